//! Strict JSON run configuration.
//!
//! A run file fully describes one waveguide plus the numerical knobs. Unknown
//! keys are rejected so a typo cannot silently fall back to a default, and
//! every optional knob has its resolved value echoed into the output
//! artifacts, making each run self-describing and reproducible.

use std::path::Path;

use serde::{Deserialize, Serialize};
use wavetrap_core::fdsolver::GridSpec;
use wavetrap_core::geometry::{Profile, Variant, WallBc, WaveguideSpec};
use wavetrap_core::variational::DEFAULT_BUDGET;
use wavetrap_core::{Error, Result};

/// Default eigensolver grid: step 1/16 in both directions, half-length 8.
pub const DEFAULT_HX: f64 = 0.0625;
pub const DEFAULT_HY: f64 = 0.0625;
pub const DEFAULT_L: f64 = 8.0;

/// Obstruction thickness profile, written as `{"kind": ..., ...}`.
///
/// A plain struct (rather than a tagged enum) so that unknown keys and
/// kind/field mismatches are rejected with precise messages.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    /// One of "zero", "parabolic", "cosine", "samples".
    pub kind: String,
    /// Peak thickness; required for "parabolic" and "cosine" only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// Symmetric node values on [-a, a]; required for "samples" only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl ProfileConfig {
    pub fn to_profile(&self) -> Result<Profile> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        match self.kind.as_str() {
            "zero" => {
                if self.amplitude.is_some() || self.values.is_some() {
                    return bad("profile kind \"zero\" takes no amplitude or values".into());
                }
                Ok(Profile::Zero)
            }
            "parabolic" | "cosine" => {
                if self.values.is_some() {
                    return bad(format!(
                        "profile kind \"{}\" takes an amplitude, not values",
                        self.kind
                    ));
                }
                let amplitude = self.amplitude.ok_or_else(|| {
                    Error::InvalidSpec(format!(
                        "profile kind \"{}\" requires an amplitude",
                        self.kind
                    ))
                })?;
                Ok(if self.kind == "parabolic" {
                    Profile::Parabolic { amplitude }
                } else {
                    Profile::Cosine { amplitude }
                })
            }
            "samples" => {
                if self.amplitude.is_some() {
                    return bad("profile kind \"samples\" takes values, not an amplitude".into());
                }
                let values = self.values.clone().ok_or_else(|| {
                    Error::InvalidSpec("profile kind \"samples\" requires values".into())
                })?;
                Ok(Profile::Samples { values })
            }
            other => bad(format!(
                "unknown profile kind \"{other}\"; expected zero, parabolic, cosine, or samples"
            )),
        }
    }

}

/// Eigensolver grid block, `{"hx": ..., "hy": ..., "l": ...}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub hx: f64,
    pub hy: f64,
    pub l: f64,
}

impl From<GridConfig> for GridSpec {
    fn from(g: GridConfig) -> GridSpec {
        GridSpec {
            hx: g.hx,
            hy: g.hy,
            l: g.l,
        }
    }
}

impl From<GridSpec> for GridConfig {
    fn from(g: GridSpec) -> GridConfig {
        GridConfig {
            hx: g.hx,
            hy: g.hy,
            l: g.l,
        }
    }
}

/// The full run file. Optional knobs may also be overridden on the command
/// line; flag > file > default.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub variant: Variant,
    pub wall_bc: WallBc,
    pub n: usize,
    pub a: f64,
    pub profile: ProfileConfig,
    /// Optimizer evaluation budget for certification.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    /// Eigensolver grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    /// Number of eigenpairs requested across all classes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// When true, `solve` runs on the unobstructed reference strip instead
    /// (certification settings are unaffected); useful as a negative control.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unobstructed: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| {
            Error::InvalidParams(format!("cannot parse {}: {e}", path.display()))
        })
    }

    pub fn build_spec(&self) -> Result<WaveguideSpec> {
        WaveguideSpec::new(
            self.variant,
            self.wall_bc,
            self.n,
            self.a,
            self.profile.to_profile()?,
        )
    }
}

/// A run with every knob resolved; echoed verbatim into each artifact.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolvedRun {
    pub config: RunConfig,
    pub budget: usize,
    pub grid: GridConfig,
    pub k: usize,
    pub unobstructed: bool,
}

/// Overrides collected from command-line flags.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub budget: Option<usize>,
    pub grid: Option<GridSpec>,
    pub k: Option<usize>,
}

/// Parse the `--grid hx,hy,L` flag.
pub fn parse_grid_flag(s: &str) -> Result<GridSpec> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParams(format!(
            "--grid wants three comma-separated numbers hx,hy,L; got \"{s}\""
        )));
    }
    let mut v = [0.0f64; 3];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part.trim().parse::<f64>().map_err(|_| {
            Error::InvalidParams(format!("--grid component \"{part}\" is not a number"))
        })?;
    }
    Ok(GridSpec {
        hx: v[0],
        hy: v[1],
        l: v[2],
    })
}

pub fn resolve(config: &RunConfig, over: &Overrides) -> Result<ResolvedRun> {
    let budget = over
        .budget
        .or(config.budget)
        .unwrap_or(DEFAULT_BUDGET);
    let grid = over
        .grid
        .map(GridConfig::from)
        .or(config.grid)
        .unwrap_or(GridConfig {
            hx: DEFAULT_HX,
            hy: DEFAULT_HY,
            l: DEFAULT_L,
        });
    let k = over.k.or(config.k).unwrap_or(2 * config.n.max(1));
    if k < 1 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    if budget < 1 {
        return Err(Error::InvalidParams(
            "optimizer budget must be at least 1".into(),
        ));
    }
    // Echo the resolved values back into the config block so the artifact,
    // fed back through --config, reproduces this run exactly.
    let mut config = config.clone();
    config.budget = Some(budget);
    config.grid = Some(grid);
    config.k = Some(k);
    let unobstructed = config.unobstructed.unwrap_or(false);
    config.unobstructed = Some(unobstructed);
    Ok(ResolvedRun {
        config,
        budget,
        grid,
        k,
        unobstructed,
    })
}
