//! The four subcommands.
//!
//! * `certify` — optimize a test function per symmetry class and write
//!   existence certificates (`certificates.json`, `summary.csv`).
//! * `solve`   — run the class-restricted discrete eigensolver, confirm each
//!   certified class from below the threshold (`modes.csv`, per-mode field
//!   tables, optional `convergence.csv`).
//! * `verify`  — recompute the decomposition and quotient-assembly residuals
//!   (`residuals.csv`, also printed to stdout).
//! * `report`  — join certificates with discrete modes into `report.md` plus
//!   plot-ready slice tables.
//!
//! Every artifact embeds the fully resolved configuration, never a timestamp
//! or environment detail, so identical runs produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use wavetrap_core::fdsolver::{
    convergence_study, field_csv, modes_csv, solve_modes, unobstructed_modes, ComputedMode,
    GridSpec,
};
use wavetrap_core::geometry::WaveguideSpec;
use wavetrap_core::symmetry::TransverseFunction;
use wavetrap_core::testfun::{phi_with_profile, transverse_profile, TestParams};
use wavetrap_core::variational::{
    certify_all, quotient_quadrature, summary_csv, verify_identities_with_tol, BoundCertificate,
};
use wavetrap_core::{Error, Result};

use crate::config::{ResolvedRun, RunConfig};

/// Residuals above this are reported as failures (warnings under `--coarse`).
const RESIDUAL_GATE: f64 = 1e-9;
/// Quadrature tolerance used by `verify --coarse`.
const COARSE_QUAD_TOL: f64 = 1e-3;

/// On-disk shape of `certificates.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificatesFile {
    pub command: String,
    /// The fully resolved run configuration; feeding this block back through
    /// `--config` reproduces the run.
    pub config: RunConfig,
    pub all_valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notice: Option<String>,
    pub certificates: Vec<BoundCertificate>,
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::write(dir.join(name), text.as_bytes())?;
    Ok(())
}

fn pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifact structs always serialize");
    s.push('\n');
    s
}

/// `certify`: exit 0 iff every admissible class received a valid certificate
/// (in particular when there are no admissible classes at all), else 2.
pub fn cmd_certify(run: &ResolvedRun, out: &Path) -> Result<u8> {
    let spec = run.config.build_spec()?;
    fs::create_dir_all(out)?;
    let outcome = certify_all(&spec, run.budget)?;
    let notice = if outcome.attempts.is_empty() {
        Some(format!(
            "no admissible symmetry classes for {} with {} walls at N = {}; nothing to certify",
            spec.variant.as_str(),
            spec.wall_bc.as_str(),
            spec.n
        ))
    } else {
        None
    };
    let file = CertificatesFile {
        command: "certify".into(),
        config: run.config.clone(),
        all_valid: outcome.all_valid(),
        notice: notice.clone(),
        certificates: outcome.attempts.clone(),
    };
    write_text(out, "certificates.json", &pretty_json(&file))?;
    write_text(out, "summary.csv", &summary_csv(&spec, &outcome))?;

    if let Some(n) = &notice {
        println!("{n}");
    }
    for c in &outcome.attempts {
        let verdict = if c.valid { "certified" } else { "NOT certified" };
        println!(
            "m={}: quotient {:.9} vs threshold {:.9} (margin {:.3e}) — {}",
            c.m, c.q_star, c.threshold, c.margin, verdict
        );
    }
    Ok(if file.all_valid { 0 } else { 2 })
}

/// Rows of `solve.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct SolveRow {
    m: usize,
    mu: f64,
    threshold: f64,
    class_energy_fraction: f64,
    decay_rate: f64,
    err_est: f64,
    retained: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CertifiedClass {
    m: usize,
    q_star: f64,
    threshold: f64,
    margin: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SolveFile {
    command: String,
    config: RunConfig,
    /// Classes whose variational certificate is valid; the solve must retain
    /// a below-threshold mode for each, or the command exits 2.
    certified: Vec<CertifiedClass>,
    modes: Vec<SolveRow>,
    confirmed: bool,
}

/// `solve`: exit 0 iff every certified class is confirmed by a retained
/// discrete mode below its threshold; 2 otherwise. With `unobstructed: true`
/// the reference strip is solved instead and no confirmation is required.
pub fn cmd_solve(run: &ResolvedRun, out: &Path, study: bool) -> Result<u8> {
    let spec = run.config.build_spec()?;
    fs::create_dir_all(out)?;
    let grid: GridSpec = run.grid.into();

    let (certified, op, computed): (Vec<CertifiedClass>, _, Vec<ComputedMode>) =
        if run.unobstructed {
            if study {
                return Err(Error::InvalidParams(
                    "--study applies to the obstructed solve, not the reference strip".into(),
                ));
            }
            let (op, computed) = unobstructed_modes(spec.n, spec.wall_bc, &grid, run.k)?;
            (Vec::new(), op, computed)
        } else {
            let outcome = certify_all(&spec, run.budget)?;
            let certified = outcome
                .attempts
                .iter()
                .filter(|c| c.valid)
                .map(|c| CertifiedClass {
                    m: c.m,
                    q_star: c.q_star,
                    threshold: c.threshold,
                    margin: c.margin,
                })
                .collect();
            let (op, computed) = solve_modes(&spec, &grid, run.k)?;
            (certified, op, computed)
        };

    let q_map: BTreeMap<usize, f64> = certified.iter().map(|c| (c.m, c.q_star)).collect();
    let retained: Vec<_> = computed
        .iter()
        .filter(|c| c.retained)
        .map(|c| c.result.clone())
        .collect();
    write_text(out, "modes.csv", &modes_csv(&spec, &retained, &q_map))?;

    // One field table per retained mode, ranked within its class.
    let mut rank: BTreeMap<usize, usize> = BTreeMap::new();
    for cm in computed.iter().filter(|c| c.retained) {
        let r = rank.entry(cm.result.m).or_insert(0);
        let name = format!("mode_m{}_r{}.csv", cm.result.m, r);
        *r += 1;
        write_text(out, &name, &field_csv(&op, &cm.vector_w))?;
    }

    if study {
        let grids = [
            grid,
            grid.coarsened(),
            GridSpec::new(grid.hx, grid.hy, grid.l + 4.0),
        ];
        let table = convergence_study(&spec, &grids, run.k)?;
        write_text(out, "convergence.csv", &table.to_csv())?;
    }

    let confirmed = certified
        .iter()
        .all(|c| retained.iter().any(|r| r.m == c.m && r.mu < r.threshold));
    let file = SolveFile {
        command: "solve".into(),
        config: run.config.clone(),
        certified: certified.clone(),
        modes: computed
            .iter()
            .map(|c| SolveRow {
                m: c.result.m,
                mu: c.result.mu,
                threshold: c.result.threshold,
                class_energy_fraction: c.result.class_energy_fraction,
                decay_rate: c.result.decay_rate,
                err_est: c.result.err_est,
                retained: c.retained,
            })
            .collect(),
        confirmed,
    };
    write_text(out, "solve.json", &pretty_json(&file))?;

    for r in &retained {
        println!(
            "retained m={}: mu = {:.9} < threshold {:.9} (fraction {:.6}, decay {:.4})",
            r.m, r.mu, r.threshold, r.class_energy_fraction, r.decay_rate
        );
    }
    if run.unobstructed && retained.is_empty() {
        println!("reference strip: no retained modes, as expected");
    }
    for c in &certified {
        if !retained.iter().any(|r| r.m == c.m) {
            println!(
                "class m={}: certified (q* = {:.9}) but no discrete mode was retained",
                c.m, c.q_star
            );
        }
    }
    Ok(if confirmed { 0 } else { 2 })
}

fn push_residual(rows: &mut Vec<(String, String, f64)>, check: &str, case: String, r: f64) {
    rows.push((check.to_string(), case, r));
}

/// `verify`: recompute the transverse-decomposition residuals
/// (completeness, orthogonality, idempotence) and, for Neumann walls with
/// centred obstacles, the quotient-assembly identity residuals. All residuals
/// are printed as CSV (and written to `<out>/residuals.csv` when `--out` is
/// given). Exit 0 iff everything is below 1e-9; `--coarse` loosens the
/// quadrature, keeps exit 0, and downgrades failures to warnings.
pub fn cmd_verify(config: &RunConfig, out: Option<&Path>, coarse: bool) -> Result<u8> {
    let spec = config.build_spec()?;
    let n = spec.n;
    let h = spec.height();
    let mut rows: Vec<(String, String, f64)> = Vec::new();

    // Transverse decomposition on a dyadic sample grid, driven by smooth
    // fields with no special symmetry.
    let fields: [(&str, Box<dyn Fn(f64) -> f64>); 3] = [
        ("field_1", Box::new(|y: f64| (1.3 * y + 0.4).sin().exp())),
        (
            "field_2",
            Box::new(move |y: f64| y * y * (h - y) + 0.25 * (2.1 * y).cos()),
        ),
        (
            "field_3",
            Box::new(|y: f64| 1.0 / (1.0 + y * y) + (0.7 * y).sin()),
        ),
    ];
    for (label, f) in &fields {
        let func = TransverseFunction::from_fn(n, 64, f)?;
        let norm = func.norm_l2().max(1e-300);
        let parts: Vec<TransverseFunction> = (0..=n)
            .map(|m| func.project(m, spec.wall_bc))
            .collect::<Result<_>>()?;

        let mut sum = vec![0.0f64; func.node_count()];
        for p in &parts {
            for (s, v) in sum.iter_mut().zip(p.values()) {
                *s += v;
            }
        }
        let diff: Vec<f64> = sum
            .iter()
            .zip(func.values())
            .map(|(s, v)| s - v)
            .collect();
        let completeness = TransverseFunction::from_samples(n, 64, diff)?.norm_l2() / norm;
        push_residual(
            &mut rows,
            "decomposition_completeness",
            (*label).into(),
            completeness,
        );

        let mut idem = 0.0f64;
        for (m, p) in parts.iter().enumerate() {
            let pp = p.project(m, spec.wall_bc)?;
            let d: Vec<f64> = pp
                .values()
                .iter()
                .zip(p.values())
                .map(|(x, y)| x - y)
                .collect();
            idem = idem.max(TransverseFunction::from_samples(n, 64, d)?.norm_l2() / norm);
        }
        push_residual(&mut rows, "decomposition_idempotence", (*label).into(), idem);

        let mut ortho = 0.0f64;
        for i in 0..parts.len() {
            for j in (i + 1)..parts.len() {
                ortho = ortho.max(parts[i].inner_product(&parts[j]).abs() / (norm * norm));
            }
        }
        push_residual(
            &mut rows,
            "decomposition_orthogonality",
            (*label).into(),
            ortho,
        );
    }

    // Quotient-assembly identities (closed-form territory only).
    let quad_tol = if coarse { COARSE_QUAD_TOL } else { 1e-12 };
    match verify_identities_with_tol(&spec, 1, quad_tol) {
        Err(Error::UnsupportedSetting(_)) => {
            eprintln!(
                "note: quotient-assembly identities cover Neumann walls with centred \
                 obstacles; skipped for this setting"
            );
        }
        Err(e) => return Err(e),
        Ok(first) => {
            for (name, r) in &first.entries {
                push_residual(&mut rows, &format!("identity_{name}"), "m=1".into(), *r);
            }
            for m in 2..=n {
                let report = verify_identities_with_tol(&spec, m, quad_tol)?;
                for (name, r) in &report.entries {
                    push_residual(
                        &mut rows,
                        &format!("identity_{name}"),
                        format!("m={m}"),
                        *r,
                    );
                }
            }
        }
    }

    let mut csv = String::from("check,case,residual\n");
    for (check, case, r) in &rows {
        let _ = writeln!(csv, "{check},{case},{r}");
    }
    print!("{csv}");
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        write_text(dir, "residuals.csv", &csv)?;
    }

    let mut failures = 0usize;
    for (check, case, r) in &rows {
        if *r >= RESIDUAL_GATE {
            failures += 1;
            eprintln!("warning: residual {check}/{case} = {r:e} exceeds {RESIDUAL_GATE:e}");
        }
    }
    if coarse {
        eprintln!(
            "warning: coarse quadrature requested (tolerance {COARSE_QUAD_TOL:e}); \
             residual gate disabled"
        );
        Ok(0)
    } else if failures > 0 {
        eprintln!("{failures} residual(s) above the gate");
        Ok(2)
    } else {
        Ok(0)
    }
}

/// Discrete-mode summary parsed back from `modes.csv`.
struct DiscreteRow {
    mu: f64,
    fraction: f64,
    decay: f64,
}

fn parse_modes_csv(text: &str) -> Result<BTreeMap<usize, Vec<DiscreteRow>>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidParams("modes.csv is empty".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let idx = |name: &str| -> Result<usize> {
        cols.iter().position(|c| *c == name).ok_or_else(|| {
            Error::InvalidParams(format!("modes.csv lacks a \"{name}\" column"))
        })
    };
    let (im, imu, ifr, ide) = (idx("m")?, idx("mu")?, idx("fraction")?, idx("decay_rate")?);
    let mut map: BTreeMap<usize, Vec<DiscreteRow>> = BTreeMap::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        let field = |i: usize| -> Result<&str> {
            f.get(i).copied().ok_or_else(|| {
                Error::InvalidParams(format!("modes.csv row too short: \"{line}\""))
            })
        };
        let parse_f64 = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidParams(format!("bad number \"{s}\" in modes.csv")))
        };
        let m: usize = field(im)?.parse().map_err(|_| {
            Error::InvalidParams(format!("bad class index in modes.csv row \"{line}\""))
        })?;
        map.entry(m).or_default().push(DiscreteRow {
            mu: parse_f64(field(imu)?)?,
            fraction: parse_f64(field(ifr)?)?,
            decay: parse_f64(field(ide)?)?,
        });
    }
    Ok(map)
}

/// Log-spaced family around a center value: center * 10^((i - half)/8).
fn log_sweep(center: f64, count: usize) -> Vec<f64> {
    let half = (count as f64 - 1.0) / 2.0;
    (0..count)
        .map(|i| center * 10f64.powf((i as f64 - half) / 8.0))
        .collect()
}

fn quotient_slice_csv(
    spec: &WaveguideSpec,
    cert: &BoundCertificate,
    vary_lambda: bool,
) -> Result<String> {
    let mut csv = String::from(if vary_lambda {
        "lambda,quotient,threshold\n"
    } else {
        "alpha,quotient,threshold\n"
    });
    let center = if vary_lambda {
        cert.params.lambda
    } else {
        cert.params.alpha
    };
    for v in log_sweep(center, 33) {
        let params = if vary_lambda {
            TestParams::new(v, cert.params.alpha, cert.params.b)
        } else {
            TestParams::new(cert.params.lambda, v, cert.params.b)
        };
        let q = quotient_quadrature(spec, cert.m, &params)?.quotient;
        let _ = writeln!(csv, "{v},{q},{}", cert.threshold);
    }
    Ok(csv)
}

fn phi_field_csv(spec: &WaveguideSpec, cert: &BoundCertificate) -> Result<String> {
    let profile = transverse_profile(spec, cert.m)?;
    let xmax = spec.a + 3.0;
    let h = spec.height();
    let steps = 120usize;
    let mut csv = String::from("x,y,value\n");
    for i in 0..=steps {
        let x = -xmax + 2.0 * xmax * i as f64 / steps as f64;
        for j in 0..=steps {
            let y = h * j as f64 / steps as f64;
            if !spec.in_domain(x, y) {
                continue;
            }
            let v = phi_with_profile(spec, &profile, &cert.params, x, y)?;
            let _ = writeln!(csv, "{x},{y},{v}");
        }
    }
    Ok(csv)
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.6}"),
        None => "—".into(),
    }
}

/// `report`: join `certificates.json` (required) with `modes.csv` (optional)
/// from the output directory into `report.md`, and emit plot-ready tables:
/// quotient-vs-lambda and quotient-vs-alpha slices through each certificate's
/// optimum, plus a test-function heatfield per class. Exit 1 if the directory
/// has no certificates.
pub fn cmd_report(config: &RunConfig, out: &Path) -> Result<u8> {
    let cert_path = out.join("certificates.json");
    if !cert_path.exists() {
        return Err(Error::InvalidParams(format!(
            "{} has no certificates.json; run certify first",
            out.display()
        )));
    }
    let text = fs::read_to_string(&cert_path)?;
    let file: CertificatesFile = serde_json::from_str(&text).map_err(|e| {
        Error::InvalidParams(format!("cannot parse {}: {e}", cert_path.display()))
    })?;
    let spec = file.config.build_spec()?;

    let mut warnings: Vec<String> = Vec::new();
    let same_guide = config.variant == file.config.variant
        && config.wall_bc == file.config.wall_bc
        && config.n == file.config.n
        && config.a == file.config.a
        && config.profile == file.config.profile;
    if !same_guide {
        warnings.push(
            "the supplied --config describes a different waveguide than the recorded \
             certificates; the report reflects the recorded run"
                .into(),
        );
    }
    let modes_path = out.join("modes.csv");
    let discrete = if modes_path.exists() {
        parse_modes_csv(&fs::read_to_string(&modes_path)?)?
    } else {
        warnings.push(
            "modes.csv not found; the report covers certificates only — run solve to add \
             the discrete confirmation"
                .into(),
        );
        BTreeMap::new()
    };

    let mut md = String::from("# Trapped-mode report\n\n");
    let _ = writeln!(
        md,
        "Waveguide: {} with {} walls, N = {}, a = {}, profile {}.",
        spec.variant.as_str(),
        spec.wall_bc.as_str(),
        spec.n,
        spec.a,
        spec.profile.label()
    );
    if let (Some(budget), Some(grid), Some(k)) =
        (file.config.budget, file.config.grid, file.config.k)
    {
        let _ = writeln!(
            md,
            "Certification budget: {budget}. Eigensolver grid: hx = {}, hy = {}, L = {}, \
             k = {k}.",
            grid.hx, grid.hy, grid.l
        );
    }
    md.push('\n');
    for w in &warnings {
        let _ = writeln!(md, "> note: {w}");
        eprintln!("warning: {w}");
    }
    if !warnings.is_empty() {
        md.push('\n');
    }

    if let Some(n) = &file.notice {
        let _ = writeln!(md, "{n}.");
    } else {
        md.push_str(
            "| m | threshold | certified bound | margin | status | lowest discrete value | \
             energy fraction | decay rate |\n\
             |--:|----------:|----------------:|-------:|:-------|----------------------:|\
             ----------------:|-----------:|\n",
        );
        for c in &file.certificates {
            let status = if c.valid { "certified" } else { "not certified" };
            let best = discrete.get(&c.m).and_then(|rows| {
                rows.iter()
                    .min_by(|a, b| a.mu.partial_cmp(&b.mu).expect("finite eigenvalues"))
            });
            let _ = writeln!(
                md,
                "| {} | {:.6} | {:.6} | {:.6} | {} | {} | {} | {} |",
                c.m,
                c.threshold,
                c.q_star,
                c.margin,
                status,
                fmt_opt(best.map(|r| r.mu)),
                fmt_opt(best.map(|r| r.fraction)),
                fmt_opt(best.map(|r| r.decay)),
            );
        }
        md.push('\n');
        md.push_str(
            "Certified bound and lowest discrete value are both upper bounds for the class's \
             lowest eigenvalue; a discrete value below the threshold confirms the certificate \
             independently.\n",
        );
    }

    let mut slice_files: Vec<String> = Vec::new();
    for c in &file.certificates {
        let lam = format!("q_lambda_m{}.csv", c.m);
        write_text(out, &lam, &quotient_slice_csv(&spec, c, true)?)?;
        let alp = format!("q_alpha_m{}.csv", c.m);
        write_text(out, &alp, &quotient_slice_csv(&spec, c, false)?)?;
        let phi = format!("phi_m{}.csv", c.m);
        write_text(out, &phi, &phi_field_csv(&spec, c)?)?;
        slice_files.extend([lam, alp, phi]);
    }
    if !slice_files.is_empty() {
        md.push_str("\nPlot-ready tables written alongside this report:\n\n");
        for f in &slice_files {
            let _ = writeln!(md, "- `{f}`");
        }
    }
    write_text(out, "report.md", &md)?;
    println!(
        "report.md written ({} certificate(s), {} discrete class(es))",
        file.certificates.len(),
        discrete.len()
    );
    Ok(0)
}
