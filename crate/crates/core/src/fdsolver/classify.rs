//! Symmetry-class projectors and classification for discrete eigenvectors.
//!
//! The cross-channel symmetry group (translations by 2 combined with wall
//! reflections, acting on the 4N-periodic reflection extension) acts exactly
//! on grid rows, because row shifts by one period map node rows to node rows
//! and the folded row of a duplicated node is again a duplicated node with
//! the two sides swapped. The class-m group average is therefore exact in
//! floating point up to roundoff, mirroring the continuum projector.

use crate::symmetry::{coefficient, gamma};
use crate::geometry::WallBc;

use super::assemble::DiscreteOperator;

/// Fold a (possibly out-of-range) row index through the 4N-periodic
/// reflection: returns the principal row in [0, my] and whether the fold
/// reversed orientation (which swaps the sides of duplicated nodes and flips
/// the sign under Dirichlet walls).
#[inline]
fn fold_row(t: i64, my: i64) -> (usize, bool) {
    let period = 2 * my;
    let mut q = t.rem_euclid(period);
    let mut flip = false;
    if q > my {
        q = period - q;
        flip = true;
    }
    (q as usize, flip)
}

fn apply_projector(
    op: &DiscreteOperator,
    coeffs: &[(i64, f64)],
    scale: f64,
    u: &[f64],
    out: &mut [f64],
) {
    let dims = op.dims();
    let my = dims.my as i64;
    let rows2 = dims.rows_per_two as i64;
    let dirichlet = dims.bc == WallBc::Dirichlet;
    for id in 0..u.len() {
        let (i, j, side) = op.map.node_of(id);
        let mut s = 0.0;
        for &(t, c) in coeffs {
            let (q, flip) = fold_row(j as i64 + t * rows2, my);
            let sign = if dirichlet && flip { -1.0 } else { 1.0 };
            let want_upper = (side == 1) != flip;
            s += c * sign * op.map.sample(u, i, q, want_upper);
        }
        out[id] = scale * s;
    }
}

fn class_coefficients(op: &DiscreteOperator, m: usize) -> (Vec<(i64, f64)>, f64) {
    let n = op.dims().n;
    assert!(m <= n, "class index out of range");
    let nn = n as i64;
    let coeffs = (-nn..nn).map(|t| (t, coefficient(m, t, n))).collect();
    (coeffs, gamma(m, n) / (2.0 * n as f64))
}

/// Class-m group average of physical nodal values.
pub fn project_values(op: &DiscreteOperator, m: usize, u: &[f64], out: &mut [f64]) {
    let (coeffs, scale) = class_coefficients(op, m);
    apply_projector(op, &coeffs, scale, u, out);
}

/// Class-m projector acting on the symmetrized vector w = D^{1/2} u, for use
/// inside the eigensolver iteration.
pub fn projector_w(op: &DiscreteOperator, m: usize) -> impl Fn(&mut [f64]) + '_ {
    let (coeffs, scale) = class_coefficients(op, m);
    move |w: &mut [f64]| {
        let u = op.u_from_w(w);
        let mut pu = vec![0.0; u.len()];
        apply_projector(op, &coeffs, scale, &u, &mut pu);
        for (wi, (pui, s)) in w.iter_mut().zip(pu.iter().zip(op.vol())) {
            *wi = pui * s.sqrt();
        }
    }
}

/// Share of the (volume-weighted) energy of w lying in class m.
pub fn class_fraction(op: &DiscreteOperator, w: &[f64], m: usize) -> f64 {
    let u = op.u_from_w(w);
    let mut pu = vec![0.0; u.len()];
    project_values(op, m, &u, &mut pu);
    let mut num = 0.0;
    let mut den = 0.0;
    for ((pui, ui), v) in pu.iter().zip(&u).zip(op.vol()) {
        num += v * pui * pui;
        den += v * ui * ui;
    }
    num / den
}

/// Best symmetry class for a discrete eigenvector and its energy share.
pub fn classify_mode(op: &DiscreteOperator, w: &[f64]) -> (usize, f64) {
    let n = op.dims().n;
    let mut best = (0usize, -1.0f64);
    for m in 0..=n {
        let f = class_fraction(op, w, m);
        if f > best.1 {
            best = (m, f);
        }
    }
    best
}
