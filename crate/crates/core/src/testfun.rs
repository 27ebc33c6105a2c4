//! Variational test functions.
//!
//! The certification argument evaluates the Rayleigh quotient of
//!
//! ```text
//! phi(x, y) = chi(x) v(y) + lambda psi_alpha(x) trig(p y),    p = m pi / 2N,
//! ```
//!
//! where `v` is the symmetry-class-m projection of a gap indicator (a
//! piecewise constant in y), `chi` is a plateau cutoff supported on the
//! obstructed region, `psi_alpha` is 1 there and decays exponentially
//! outside, and `trig` is the transverse wave of the class (cosine for
//! Neumann walls, sine for Dirichlet). Everything here is elementary and
//! exactly evaluable; the variational module integrates these pieces.

use crate::error::{Error, Result};
use crate::geometry::{Variant, WallBc, WaveguideSpec};
use crate::symmetry::{self, project_indicator};

/// Free parameters of the test function.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TestParams {
    /// Mixing weight of the travelling component.
    pub lambda: f64,
    /// Decay rate of the exponential tail (1/length).
    pub alpha: f64,
    /// Plateau half-width of the cutoff; 0 <= b < a.
    pub b: f64,
}

impl TestParams {
    pub fn new(lambda: f64, alpha: f64, b: f64) -> Self {
        TestParams { lambda, alpha, b }
    }

    pub fn validate(&self, a: f64) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidParams(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidParams(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.b.is_finite() && self.b >= 0.0 && self.b < a) {
            return Err(Error::InvalidParams(format!(
                "plateau half-width must satisfy 0 <= b < a = {a}, got {}",
                self.b
            )));
        }
        Ok(())
    }
}

/// Plateau cutoff: 1 on |x| <= b, linear ramp down to 0 at |x| = a.
pub fn chi(x: f64, a: f64, b: f64) -> f64 {
    let r = x.abs();
    if r <= b {
        1.0
    } else if r >= a {
        0.0
    } else {
        (a - r) / (a - b)
    }
}

/// Derivative of `chi` (taken as 0 at the kinks; quadrature panels always
/// break there, so the choice never lands on an evaluation node).
pub fn chi_prime(x: f64, a: f64, b: f64) -> f64 {
    let r = x.abs();
    if r <= b || r >= a {
        0.0
    } else {
        -x.signum() / (a - b)
    }
}

/// Exponential tail envelope: 1 on |x| <= a, exp(-alpha(|x| - a)) outside.
pub fn psi(x: f64, alpha: f64, a: f64) -> f64 {
    let r = x.abs();
    if r <= a {
        1.0
    } else {
        (-alpha * (r - a)).exp()
    }
}

/// Derivative of `psi` (0 on the plateau).
pub fn psi_prime(x: f64, alpha: f64, a: f64) -> f64 {
    let r = x.abs();
    if r <= a {
        0.0
    } else {
        -alpha * x.signum() * (-alpha * (r - a)).exp()
    }
}

/// Transverse wave of class m: cosine under Neumann walls, sine under
/// Dirichlet. `t` is the phase p*y.
pub fn trig(bc: WallBc, t: f64) -> f64 {
    match bc {
        WallBc::Neumann => t.cos(),
        WallBc::Dirichlet => t.sin(),
    }
}

/// Derivative of `trig` with respect to its phase.
pub fn trig_deriv(bc: WallBc, t: f64) -> f64 {
    match bc {
        WallBc::Neumann => -t.sin(),
        WallBc::Dirichlet => t.cos(),
    }
}

/// The symmetry classes for which a certificate is attempted in a given
/// setting: those whose projected indicator is not identically zero.
pub fn admissible_classes(spec: &WaveguideSpec) -> Vec<usize> {
    match (spec.variant, spec.wall_bc) {
        (Variant::CenteredObstacles, WallBc::Neumann) => (1..=spec.n).collect(),
        (Variant::CenteredObstacles, WallBc::Dirichlet) => (1..spec.n).collect(),
        (Variant::MidlineSegments, _) => (1..spec.n).collect(),
    }
}

/// The piecewise-constant transverse factor `v`: per-gap constants on the
/// reference gap layout, together with the class and source-gap metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct TransverseProfile {
    pub n: usize,
    pub m: usize,
    pub variant: Variant,
    pub bc: WallBc,
    /// Index of the source gap whose indicator was projected.
    pub source: usize,
    /// Reference gap layout (gaps of the cross-section through the
    /// obstruction centre, at zero profile thickness).
    pub layout: Vec<(f64, f64)>,
    /// One constant per gap of `layout`.
    pub values: Vec<f64>,
}

impl TransverseProfile {
    /// Constant value at height y (0 between gaps / outside the strip).
    pub fn value_at(&self, y: f64) -> f64 {
        for (&(l, r), &v) in self.layout.iter().zip(&self.values) {
            if y > l && y < r {
                return v;
            }
        }
        0.0
    }

    /// Integral of v^2 over the reference cross-section. Gaps shrink
    /// uniformly by the factor (1 - g(x)) away from the centre, so the
    /// integral of v^2 over the gaps at any x equals this norm times
    /// (1 - g(x)).
    pub fn norm_sq(&self) -> f64 {
        self.layout
            .iter()
            .zip(&self.values)
            .map(|(&(l, r), &v)| (r - l) * v * v)
            .collect::<Vec<_>>()
            .iter()
            .sum()
    }
}

/// Integral of the squared profile over the reference cross-section; for
/// centred obstacles this is v_0^2 + 2 v_1^2 + ... + 2 v_{N-1}^2 + v_N^2.
pub fn v_norm_sq(profile: &TransverseProfile) -> f64 {
    profile.norm_sq()
}

/// Build the class-m transverse profile for a setting.
///
/// The values are produced by the exact indicator projection; the explicit
/// trigonometric forms they must equal are asserted against it, so any drift
/// between the two derivations fails loudly.
pub fn transverse_profile(spec: &WaveguideSpec, m: usize) -> Result<TransverseProfile> {
    let n = spec.n;
    let admissible = admissible_classes(spec);
    if !admissible.contains(&m) {
        let reason = match (spec.variant, spec.wall_bc) {
            (Variant::CenteredObstacles, WallBc::Neumann) => {
                format!("Neumann obstructed classes are 1..={n}")
            }
            (Variant::CenteredObstacles, WallBc::Dirichlet) => format!(
                "Dirichlet classes are 1..={}: the class-0 and class-{n} projections of every interior gap indicator vanish",
                n.saturating_sub(1)
            ),
            (Variant::MidlineSegments, _) => format!(
                "segment classes are 1..={}: the class-0 and class-{n} projections vanish",
                n.saturating_sub(1)
            ),
        };
        return Err(Error::InadmissibleClass { m, reason });
    }

    let layout = spec.reference_gaps();
    let source = match (spec.variant, spec.wall_bc) {
        (Variant::CenteredObstacles, WallBc::Neumann) => 0,
        (Variant::CenteredObstacles, WallBc::Dirichlet) => {
            // Smallest interior gap index maximizing |sin(m pi j / N)|.
            let mut best = 1usize;
            let mut best_val = f64::NEG_INFINITY;
            for j in 1..n {
                let s = (m as f64 * std::f64::consts::PI * j as f64 / n as f64)
                    .sin()
                    .abs();
                if s > best_val + 1e-12 {
                    best = j;
                    best_val = s;
                }
            }
            best
        }
        (Variant::MidlineSegments, _) => 0,
    };

    let values = project_indicator(n, spec.wall_bc, &layout, source, m);

    // Cross-check the projection against the explicit per-gap constants.
    let pi = std::f64::consts::PI;
    let gamma = symmetry::gamma(m, n);
    for (idx, &v) in values.iter().enumerate() {
        let expect = match (spec.variant, spec.wall_bc) {
            (Variant::CenteredObstacles, WallBc::Neumann) => {
                gamma / (2.0 * n as f64) * (m as f64 * pi * idx as f64 / n as f64).cos()
            }
            (Variant::CenteredObstacles, WallBc::Dirichlet) => {
                gamma / n as f64
                    * (m as f64 * pi * source as f64 / n as f64).sin()
                    * (m as f64 * pi * idx as f64 / n as f64).sin()
            }
            (Variant::MidlineSegments, _) => {
                gamma / n as f64
                    * (m as f64 * pi / (2.0 * n as f64)).cos()
                    * (m as f64 * pi * (idx as f64 + 0.5) / n as f64).cos()
            }
        };
        assert!(
            (v - expect).abs() < 1e-12,
            "indicator projection disagrees with its closed form: \
             {:?}/{:?} n={n} m={m} gap {idx}: {v} vs {expect}",
            spec.variant,
            spec.wall_bc,
        );
    }
    let peak = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    assert!(peak > 0.0, "admissible class produced a zero profile");

    Ok(TransverseProfile {
        n,
        m,
        variant: spec.variant,
        bc: spec.wall_bc,
        source,
        layout,
        values,
    })
}

/// Evaluate the full test function at a point of the free region.
pub fn phi(
    spec: &WaveguideSpec,
    m: usize,
    params: &TestParams,
    x: f64,
    y: f64,
) -> Result<f64> {
    params.validate(spec.a)?;
    let profile = transverse_profile(spec, m)?;
    phi_with_profile(spec, &profile, params, x, y)
}

/// Same as [`phi`] but reusing a prebuilt profile (for grid dumps).
pub fn phi_with_profile(
    spec: &WaveguideSpec,
    profile: &TransverseProfile,
    params: &TestParams,
    x: f64,
    y: f64,
) -> Result<f64> {
    if !spec.in_domain(x, y) {
        return Err(Error::OutOfDomain { x, y });
    }
    let p = profile.m as f64 * std::f64::consts::PI / spec.height();
    let cut = chi(x, spec.a, params.b);
    let v = if cut == 0.0 {
        0.0
    } else {
        // Locate y's gap in the cross-section through x; indices align with
        // the reference layout, which carries the per-gap constants.
        let gaps = spec.gap_intervals(x);
        let mut val = 0.0;
        for (idx, &(l, r)) in gaps.iter().enumerate() {
            if y > l && y < r {
                val = profile.values[idx];
                break;
            }
        }
        val
    };
    Ok(cut * v + params.lambda * psi(x, params.alpha, spec.a) * trig(spec.wall_bc, p * y))
}
