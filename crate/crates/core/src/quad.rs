//! One-dimensional Gauss-Legendre quadrature with panel refinement.
//!
//! All integrands in this crate are piecewise smooth with known breakpoints
//! (ramp corners, obstacle tips, profile sample nodes), so the strategy is:
//! place panel boundaries at every breakpoint, apply a fixed high-order
//! Gauss-Legendre rule per panel, and halve all panels until the result
//! stops moving at the requested relative tolerance.

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Computed by Newton iteration on the Legendre recurrence. Nodes come out
/// sorted ascending and exactly antisymmetric, weights symmetric.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Only the lower half needs solving; the rest is mirrored.
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, accurate enough for Newton.
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..64 {
            // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Integral of `f` over `[a, b]` with a single `pts`-point Gauss-Legendre panel.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, pts: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let (nodes, weights) = gauss_legendre(pts);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&x, &w) in nodes.iter().zip(&weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Integral of `f` over consecutive panels `[breaks[0], breaks[1]], ...`
/// with a fixed `pts`-point rule per panel. Breakpoints must be ascending.
pub fn integrate_breaks<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], pts: usize) -> f64 {
    assert!(breaks.len() >= 2, "need at least one panel");
    let (nodes, weights) = gauss_legendre(pts);
    let mut acc = 0.0;
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        debug_assert!(b >= a, "breakpoints must be ascending");
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut panel = 0.0;
        for (&x, &w) in nodes.iter().zip(&weights) {
            panel += w * f(mid + half * x);
        }
        acc += panel * half;
    }
    acc
}

/// Simultaneous integrals of a vector-valued integrand over panelled
/// breakpoints, refined until every component settles.
///
/// `f(x, out)` writes the `dim` integrand components at `x` into `out`.
/// Starting from the given panels, all panels are halved together until the
/// largest componentwise change falls below `rel_tol` relative to the
/// overall scale, or the refinement cap is hit. The cap is generous; with
/// breakpoints at every kink the integrands are panelwise analytic and two
/// or three refinements normally suffice.
pub fn integrate_adaptive_vec<F>(f: &mut F, dim: usize, breaks: &[f64], rel_tol: f64) -> Vec<f64>
where
    F: FnMut(f64, &mut [f64]),
{
    assert!(breaks.len() >= 2, "need at least one panel");
    const PTS: usize = 32;
    const MAX_LEVELS: usize = 10;
    let (nodes, weights) = gauss_legendre(PTS);
    let mut panels: Vec<(f64, f64)> = breaks.windows(2).map(|p| (p[0], p[1])).collect();
    let mut buf = vec![0.0; dim];

    let eval = |panels: &[(f64, f64)], f: &mut F, buf: &mut [f64]| -> Vec<f64> {
        let mut acc = vec![0.0; dim];
        for &(a, b) in panels {
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            for (&x, &w) in nodes.iter().zip(&weights) {
                f(mid + half * x, buf);
                for (a_i, &v) in acc.iter_mut().zip(buf.iter()) {
                    *a_i += w * half * v;
                }
            }
        }
        acc
    };

    let mut prev = eval(&panels, f, &mut buf);
    for _ in 0..MAX_LEVELS {
        let halved: Vec<(f64, f64)> = panels
            .iter()
            .flat_map(|&(a, b)| {
                let m = 0.5 * (a + b);
                [(a, m), (m, b)]
            })
            .collect();
        let next = eval(&halved, f, &mut buf);
        let scale = next
            .iter()
            .fold(1.0_f64, |s, &v| s.max(v.abs()))
            .max(prev.iter().fold(0.0_f64, |s, &v| s.max(v.abs())));
        let delta = next
            .iter()
            .zip(&prev)
            .fold(0.0_f64, |d, (&a, &b)| d.max((a - b).abs()));
        panels = halved;
        prev = next;
        if delta <= rel_tol * scale {
            break;
        }
    }
    prev
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn five_point_rule_matches_reference_values() {
        // Abscissae and weights of the 5-point rule, to full double precision.
        let (x, w) = gauss_legendre(5);
        let xr = [
            -0.906179845938664,
            -0.5384693101056831,
            0.0,
            0.5384693101056831,
            0.906179845938664,
        ];
        let wr = [
            0.23692688505618908,
            0.47862867049936647,
            0.5688888888888889,
            0.47862867049936647,
            0.23692688505618908,
        ];
        for i in 0..5 {
            assert_relative_eq!(x[i], xr[i], max_relative = 1e-14, epsilon = 1e-15);
            assert_relative_eq!(w[i], wr[i], max_relative = 1e-14);
        }
    }

    #[test]
    fn rule_is_exact_on_polynomials_up_to_degree_2n_minus_1() {
        // GL with n points integrates x^k exactly for k <= 2n - 1.
        for n in 1..=8 {
            for k in 0..=(2 * n - 1) {
                let got = integrate(|x| x.powi(k as i32), -1.0, 1.0, n);
                let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
                assert!(
                    (got - exact).abs() < 1e-13,
                    "n={n} k={k}: got {got}, expected {exact}"
                );
            }
        }
    }

    #[test]
    fn smooth_integrals_reach_near_machine_accuracy() {
        assert_relative_eq!(
            integrate(f64::sin, 0.0, std::f64::consts::PI, 20),
            2.0,
            max_relative = 1e-14
        );
        // integral of exp(-x^2) over [-3, 3] = sqrt(pi) * erf(3)
        assert_relative_eq!(
            integrate(|x| (-x * x).exp(), -3.0, 3.0, 40),
            1.7724146965190422,
            max_relative = 1e-13
        );
    }

    #[test]
    fn breakpoints_make_kinked_integrands_exact() {
        // |x - 1/3| on [0, 1] has integral 5/18; with the kink on a panel
        // boundary the composite rule is exact.
        let c = 1.0 / 3.0;
        let got = integrate_breaks(|x| (x - c).abs(), &[0.0, c, 1.0], 8);
        assert_relative_eq!(got, 5.0 / 18.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_vector_integration_converges_componentwise() {
        let mut f = |x: f64, out: &mut [f64]| {
            out[0] = (10.0 * x).sin();
            out[1] = (-x).exp();
            out[2] = (x - 0.5).abs();
        };
        let got = integrate_adaptive_vec(&mut f, 3, &[0.0, 0.5, 2.0], 1e-12);
        let i0 = (1.0 - (20.0_f64).cos()) / 10.0;
        let i1 = 1.0 - (-2.0_f64).exp();
        let i2 = 0.125 + 1.125;
        assert_relative_eq!(got[0], i0, max_relative = 1e-11);
        assert_relative_eq!(got[1], i1, max_relative = 1e-11);
        assert_relative_eq!(got[2], i2, max_relative = 1e-11);
    }

    #[test]
    fn degenerate_panel_contributes_zero() {
        assert_eq!(integrate(|x| x * x + 1.0, 2.0, 2.0, 16), 0.0);
    }

    proptest! {
        /// Random cubics integrated with a 4-point rule match the
        /// antiderivative over random intervals.
        #[test]
        fn random_cubics_are_integrated_exactly(
            c0 in -5.0..5.0f64, c1 in -5.0..5.0f64,
            c2 in -5.0..5.0f64, c3 in -5.0..5.0f64,
            a in -3.0..3.0f64, len in 0.01..4.0f64,
        ) {
            let b = a + len;
            let f = |x: f64| c0 + x * (c1 + x * (c2 + x * c3));
            let af = |x: f64| x * (c0 + x * (c1 / 2.0 + x * (c2 / 3.0 + x * c3 / 4.0)));
            let got = integrate(f, a, b, 4);
            let exact = af(b) - af(a);
            prop_assert!((got - exact).abs() <= 1e-11 * (1.0 + exact.abs()));
        }
    }
}
