//! Waveguide geometry: the obstructed strip and its segment variant.
//!
//! The strip is `R x (0, 2N)`. In the `CenteredObstacles` variant, `N`
//! congruent obstacles are removed, the m-th being
//! `{ |x| <= a, |y - (2m-1)| <= g(x) }` for a gap profile `g` with
//! `0 <= g < 1` and `g(+-a) = 0`; `g` identically zero degenerates the
//! obstacles to horizontal slits. In the `MidlineSegments` variant the
//! removed sets are the `N - 1` segments `{ |x| <= a, y = 2m }`.
//!
//! Everything here is exact bookkeeping: interval arithmetic for the free
//! cross-section at a given `x`, point membership, and profile evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which family of obstructions the strip carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    CenteredObstacles,
    MidlineSegments,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::CenteredObstacles => "centered_obstacles",
            Variant::MidlineSegments => "midline_segments",
        }
    }
}

/// Boundary condition on the guide walls y = 0 and y = 2N.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallBc {
    Neumann,
    Dirichlet,
}

impl WallBc {
    pub fn as_str(self) -> &'static str {
        match self {
            WallBc::Neumann => "neumann",
            WallBc::Dirichlet => "dirichlet",
        }
    }
}

/// Gap profile g on [-a, a].
///
/// Presets are evaluated analytically; `Samples` holds uniform samples over
/// [-a, a] with linear interpolation. Profiles are required to be even in x
/// (the obstacles of interest are symmetric about x = 0), so evaluation goes
/// through |x| and evenness is exact in floating point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Zero,
    /// amplitude * (1 - (x/a)^2)
    Parabolic { amplitude: f64 },
    /// amplitude * cos^2(pi x / 2a)
    Cosine { amplitude: f64 },
    /// Uniform samples over [-a, a], linearly interpolated.
    Samples { values: Vec<f64> },
}

/// Samples are stored at at least this many uniform nodes; sparser input is
/// refined by exact linear interpolation (the function is unchanged).
const MIN_SAMPLE_NODES: usize = 257;

impl Profile {
    /// True if the profile is identically zero.
    pub fn is_zero(&self) -> bool {
        match self {
            Profile::Zero => true,
            Profile::Parabolic { amplitude } | Profile::Cosine { amplitude } => *amplitude == 0.0,
            Profile::Samples { values } => values.iter().all(|&v| v == 0.0),
        }
    }

    /// Short human-readable descriptor used in CSV/JSON artifacts.
    pub fn label(&self) -> String {
        match self {
            Profile::Zero => "zero".to_string(),
            Profile::Parabolic { amplitude } => format!("parabolic({amplitude})"),
            Profile::Cosine { amplitude } => format!("cosine({amplitude})"),
            Profile::Samples { values } => format!("samples({})", values.len()),
        }
    }

    /// Evaluate g at x for obstacle half-length a. Zero outside [-a, a].
    pub fn eval(&self, x: f64, a: f64) -> f64 {
        let r = x.abs();
        // All admissible profiles vanish at the tips; returning 0 at r = a
        // keeps that exact even when the formula rounds to 1e-33-ish dust.
        if r >= a {
            return 0.0;
        }
        match self {
            Profile::Zero => 0.0,
            Profile::Parabolic { amplitude } => (amplitude * (1.0 - (r / a) * (r / a))).max(0.0),
            Profile::Cosine { amplitude } => {
                let c = (std::f64::consts::FRAC_PI_2 * r / a).cos();
                (amplitude * c * c).max(0.0)
            }
            Profile::Samples { values } => {
                let n = values.len();
                let s = (r + a) / (2.0 * a) * (n - 1) as f64;
                let i = (s.floor() as usize).min(n - 2);
                let t = s - i as f64;
                (values[i] * (1.0 - t) + values[i + 1] * t).max(0.0)
            }
        }
    }

    /// Interior x-positions where the profile may have a kink; quadrature
    /// panels must break there. Presets are smooth inside (-a, a).
    pub fn breakpoints(&self, a: f64) -> Vec<f64> {
        match self {
            Profile::Samples { values } => {
                let n = values.len();
                let mut pts: Vec<f64> = (1..n - 1)
                    .map(|i| -a + 2.0 * a * i as f64 / (n - 1) as f64)
                    .collect();
                // Evaluation through |x| can kink at the center as well.
                if !pts.iter().any(|&p| p == 0.0) {
                    pts.push(0.0);
                }
                pts.sort_by(|p, q| p.partial_cmp(q).unwrap());
                pts
            }
            _ => Vec::new(),
        }
    }

    /// Validate ranges and, for samples, enforce symmetry and refine to the
    /// minimum node count.
    fn validated(self) -> Result<Profile> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        match self {
            Profile::Zero => Ok(Profile::Zero),
            Profile::Parabolic { amplitude } | Profile::Cosine { amplitude }
                if !amplitude.is_finite() || !(0.0..1.0).contains(&amplitude) =>
            {
                bad(format!(
                    "profile amplitude must lie in [0, 1), got {amplitude}"
                ))
            }
            p @ (Profile::Parabolic { .. } | Profile::Cosine { .. }) => Ok(p),
            Profile::Samples { values } => {
                if values.len() < 2 {
                    return bad("sampled profile needs at least 2 values".into());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("sampled profile contains non-finite values".into());
                }
                if values.iter().any(|&v| !(0.0..1.0).contains(&v)) {
                    return bad("sampled profile values must lie in [0, 1)".into());
                }
                let n = values.len();
                if values[0] != 0.0 || values[n - 1] != 0.0 {
                    return bad("sampled profile must vanish at x = -a and x = a".into());
                }
                for i in 0..n / 2 {
                    if (values[i] - values[n - 1 - i]).abs() > 1e-12 {
                        return bad(format!(
                            "sampled profile must be even in x: values[{i}] = {} vs \
                             values[{}] = {}",
                            values[i],
                            n - 1 - i,
                            values[n - 1 - i]
                        ));
                    }
                }
                // Symmetrize exactly, then refine to >= MIN_SAMPLE_NODES by
                // linear interpolation (a no-op on the represented function).
                let mut sym = values.clone();
                for i in 0..n / 2 {
                    let v = 0.5 * (sym[i] + sym[n - 1 - i]);
                    sym[i] = v;
                    sym[n - 1 - i] = v;
                }
                let intervals = n - 1;
                let factor = (MIN_SAMPLE_NODES - 1).div_ceil(intervals);
                let refined = if factor <= 1 {
                    sym
                } else {
                    let m = factor * intervals + 1;
                    let mut out = Vec::with_capacity(m);
                    for k in 0..m {
                        let i = (k / factor).min(intervals - 1);
                        let t = (k - i * factor) as f64 / factor as f64;
                        out.push(sym[i] * (1.0 - t) + sym[i + 1] * t);
                    }
                    out
                };
                Ok(Profile::Samples { values: refined })
            }
        }
    }
}

/// Full description of one waveguide: variant, wall condition, period count
/// `n` (strip height 2n), obstacle half-length `a`, and gap profile.
///
/// Construct through [`WaveguideSpec::new`], which validates every invariant;
/// the fields are read-only afterwards.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WaveguideSpec {
    pub variant: Variant,
    pub wall_bc: WallBc,
    pub n: usize,
    pub a: f64,
    pub profile: Profile,
}

impl WaveguideSpec {
    pub fn new(
        variant: Variant,
        wall_bc: WallBc,
        n: usize,
        a: f64,
        profile: Profile,
    ) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidSpec("n must be at least 1".into()));
        }
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "obstacle half-length a must be positive and finite, got {a}"
            )));
        }
        if variant == Variant::MidlineSegments {
            if n < 2 {
                return Err(Error::InvalidSpec(
                    "midline segments need n >= 2 (n = 1 has no interior midline)".into(),
                ));
            }
            if !profile.is_zero() {
                return Err(Error::InvalidSpec(
                    "midline segments have zero thickness; profile must be zero".into(),
                ));
            }
            if wall_bc != WallBc::Neumann {
                return Err(Error::InvalidSpec(
                    "midline segments are only treated with Neumann walls".into(),
                ));
            }
        }
        let profile = profile.validated()?;
        let spec = WaveguideSpec {
            variant,
            wall_bc,
            n,
            a,
            profile,
        };
        // Dense sanity sweep of the profile range on [-a, a].
        for k in 0..=2000 {
            let x = -a + 2.0 * a * k as f64 / 2000.0;
            let g = spec.g(x);
            if !g.is_finite() || !(0.0..1.0).contains(&g) {
                return Err(Error::InvalidSpec(format!(
                    "profile leaves [0, 1) at x = {x}: g = {g}"
                )));
            }
        }
        if spec.g(a) != 0.0 || spec.g(-a) != 0.0 {
            return Err(Error::InvalidSpec(
                "profile must vanish at the obstacle tips x = -a, a".into(),
            ));
        }
        Ok(spec)
    }

    /// Strip height 2n.
    pub fn height(&self) -> f64 {
        2.0 * self.n as f64
    }

    /// Gap profile at x (zero outside [-a, a]).
    pub fn g(&self, x: f64) -> f64 {
        self.profile.eval(x, self.a)
    }

    /// Open intervals of free cross-section at abscissa x, ordered in y.
    ///
    /// For centered obstacles and |x| <= a these are the N + 1 gaps
    /// `(0, 1-g), (1+g, 3-g), ..., (2N-1+g, 2N)`; for midline segments the
    /// N unit cells `(0, 2), ..., (2N-2, 2N)`; outside the obstructed range
    /// the whole cross-section `(0, 2N)`.
    pub fn gap_intervals(&self, x: f64) -> Vec<(f64, f64)> {
        let h = self.height();
        if x.abs() > self.a {
            return vec![(0.0, h)];
        }
        match self.variant {
            Variant::CenteredObstacles => {
                let g = self.g(x);
                let n = self.n;
                let mut gaps = Vec::with_capacity(n + 1);
                gaps.push((0.0, 1.0 - g));
                for j in 1..n {
                    let c = 2.0 * j as f64;
                    gaps.push((c - 1.0 + g, c + 1.0 - g));
                }
                gaps.push((h - 1.0 + g, h));
                gaps
            }
            Variant::MidlineSegments => (0..self.n)
                .map(|s| (2.0 * s as f64, 2.0 * s as f64 + 2.0))
                .collect(),
        }
    }

    /// The gap layout at the reference profile value g = 0 (taken at x = a,
    /// where every profile vanishes). Transverse profiles are defined with
    /// respect to this layout.
    pub fn reference_gaps(&self) -> Vec<(f64, f64)> {
        self.gap_intervals(self.a)
    }

    /// True iff (x, y) lies strictly inside the free region: inside the open
    /// strip and outside every closed obstruction.
    pub fn in_domain(&self, x: f64, y: f64) -> bool {
        if !(0.0 < y && y < self.height()) {
            return false;
        }
        if x.abs() > self.a {
            return true;
        }
        match self.variant {
            Variant::CenteredObstacles => {
                let g = self.g(x);
                (1..=self.n).all(|m| (y - (2.0 * m as f64 - 1.0)).abs() > g)
            }
            Variant::MidlineSegments => (1..self.n).all(|m| y != 2.0 * m as f64),
        }
    }
}
