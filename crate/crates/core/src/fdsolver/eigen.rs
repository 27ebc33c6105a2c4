//! Banded symmetric linear algebra and a shift-invert Lanczos eigensolver.
//!
//! The discretized operators are symmetric with modest bandwidth, so an
//! in-core band LDL^T factorization plus Lanczos iteration on the
//! shift-inverted operator retrieves the lowest eigenpairs quickly and, with
//! a fixed start vector and full reorthogonalization, deterministically.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Symmetric band matrix, lower triangle stored row-major:
/// entry (i, j) with 0 <= i - j <= bw lives at data[i*(bw+1) + (i-j)].
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, bw: usize) -> Self {
        BandMatrix {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (i - j)
    }

    /// Accumulate into the symmetric entry (i, j).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    /// Symmetric diagonal scaling: a_ij -> s_i a_ij s_j.
    pub fn scale_sym(&mut self, s: &[f64]) {
        assert_eq!(s.len(), self.n);
        for i in 0..self.n {
            let dmax = self.bw.min(i);
            for d in 0..=dmax {
                let j = i - d;
                let slot = i * (self.bw + 1) + d;
                self.data[slot] *= s[i] * s[j];
            }
        }
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.fill(0.0);
        for i in 0..self.n {
            let base = i * (self.bw + 1);
            y[i] += self.data[base] * x[i];
            let dmax = self.bw.min(i);
            for d in 1..=dmax {
                let v = self.data[base + d];
                if v != 0.0 {
                    y[i] += v * x[i - d];
                    y[i - d] += v * x[i];
                }
            }
        }
    }

    /// Dense copy (test support only; small systems).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for d in 0..=self.bw.min(i) {
                let v = self.data[i * (self.bw + 1) + d];
                m[(i, i - d)] = v;
                m[(i - d, i)] = v;
            }
        }
        m
    }
}

/// LDL^T factors of a shifted band matrix (A - shift I), same band layout;
/// unit-diagonal L below, D on the diagonal slots.
pub struct LdlFactor {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

/// Factor A - shift I. Fails with the pivot index if a pivot collapses
/// (shift essentially equal to an eigenvalue) so the caller can nudge.
pub fn ldl_factor(a: &BandMatrix, shift: f64) -> std::result::Result<LdlFactor, usize> {
    let n = a.n;
    let bw = a.bw;
    let w = bw + 1;
    let mut data = a.data.clone();
    let mut scale = 0.0f64;
    for i in 0..n {
        data[i * w] -= shift;
        scale = scale.max(data[i * w].abs());
    }
    let floor = (scale.max(1.0)) * 1e-14;

    for i in 0..n {
        let j0 = i.saturating_sub(bw);
        for j in j0..i {
            let mut s = data[i * w + (i - j)];
            for k in j0..j {
                s -= data[i * w + (i - k)] * data[j * w + (j - k)] * data[k * w];
            }
            data[i * w + (i - j)] = s / data[j * w];
        }
        let mut d = data[i * w];
        for k in j0..i {
            let l = data[i * w + (i - k)];
            d -= l * l * data[k * w];
        }
        if !d.is_finite() || d.abs() < floor {
            return Err(i);
        }
        data[i * w] = d;
    }
    Ok(LdlFactor { n, bw, data })
}

impl LdlFactor {
    /// Solve (A - shift I) x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let mut x = b.to_vec();
        // Forward: L z = b.
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let mut s = x[i];
            for j in j0..i {
                s -= self.data[i * w + (i - j)] * x[j];
            }
            x[i] = s;
        }
        // Diagonal.
        for i in 0..n {
            x[i] /= self.data[i * w];
        }
        // Backward: L^T y = z.
        for i in (0..n).rev() {
            let jmax = (i + bw).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=jmax {
                s -= self.data[j * w + (j - i)] * x[j];
            }
            x[i] = s;
        }
        x
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn fill_random(state: &mut u64, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = (splitmix64(state) >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

const MAX_STEPS: usize = 500;
const RESIDUAL_TOL: f64 = 1e-8;

/// Ritz extraction for the current Krylov factorization: returns the up-to-k
/// candidate pairs nearest the shift (sorted by physical eigenvalue), each
/// already verified against the explicit residual test, plus the worst
/// relative residual seen and the number of candidates targeted.
fn extract_verified(
    a: &BandMatrix,
    alphas: &[f64],
    betas: &[f64],
    basis: &[Vec<f64>],
    shift: f64,
    k: usize,
    project: Option<&dyn Fn(&mut [f64])>,
) -> (Vec<(f64, Vec<f64>)>, f64, usize) {
    let j = alphas.len();
    let n = a.size();
    if j == 0 {
        return (Vec::new(), 0.0, 0);
    }
    let mut t = DMatrix::zeros(j, j);
    for (i, &al) in alphas.iter().enumerate() {
        t[(i, i)] = al;
        if i + 1 < j {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut cand: Vec<(f64, usize)> = Vec::new();
    for idx in 0..j {
        let theta = eig.eigenvalues[idx];
        if theta.abs() > 1e-300 {
            cand.push((shift + 1.0 / theta, idx));
        }
    }
    cand.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let want = k.min(cand.len());

    let mut verified = Vec::with_capacity(want);
    let mut worst = 0.0f64;
    for &(mu, idx) in cand.iter().take(want) {
        let mut x = vec![0.0; n];
        for (bi, u) in basis.iter().take(j).enumerate() {
            let c = eig.eigenvectors[(bi, idx)];
            for (xi, ui) in x.iter_mut().zip(u) {
                *xi += c * ui;
            }
        }
        if let Some(p) = project {
            p(&mut x);
        }
        let nx = norm(&x);
        if nx < 1e-8 {
            continue;
        }
        for v in x.iter_mut() {
            *v /= nx;
        }
        let mut ax = vec![0.0; n];
        a.matvec(&x, &mut ax);
        let mut res = 0.0;
        for (axi, xi) in ax.iter().zip(&x) {
            let r = axi - mu * xi;
            res += r * r;
        }
        let res = res.sqrt() / mu.abs().max(1.0);
        worst = worst.max(res);
        if res <= RESIDUAL_TOL {
            verified.push((mu, x));
        }
    }
    (verified, worst, want)
}

/// Compute up to `k` eigenpairs of the symmetric matrix `a` with eigenvalues
/// nearest the shift `sigma` (both sides), returned sorted by eigenvalue
/// ascending. If `project` is given, iteration is confined to its invariant
/// subspace (the projector is applied to every Krylov vector), and the pairs
/// are the lowest of that subspace.
///
/// Every returned pair passes an explicit residual check
/// ||A x - mu x|| <= 1e-8 * max(1, |mu|). Fewer than `k` pairs come back when
/// the (projected) space is smaller than `k` or when trailing candidates sit
/// in a spectral cluster that has not yet converged; the call fails only when
/// the factorization collapses or no requested pair verifies at the step
/// limit. Deterministic: fixed seed, fixed schedule.
pub fn lowest_eigenpairs(
    a: &BandMatrix,
    k: usize,
    sigma: f64,
    project: Option<&dyn Fn(&mut [f64])>,
) -> Result<Vec<(f64, Vec<f64>)>> {
    assert!(k >= 1, "need at least one requested pair");
    let n = a.size();
    if n == 0 {
        return Ok(Vec::new());
    }

    // Factor A - sigma I, nudging the shift deterministically if it lands on
    // an eigenvalue.
    let mut shift = sigma;
    let mut factor = None;
    for attempt in 0..4 {
        match ldl_factor(a, shift) {
            Ok(f) => {
                factor = Some(f);
                break;
            }
            Err(_) if attempt < 3 => {
                shift = shift * (1.0 + 1e-7) + 1e-12;
            }
            Err(pivot) => {
                return Err(Error::ConvergenceFailure(format!(
                    "shift-invert factorization kept collapsing at pivot {pivot} \
                     (shift {shift})"
                )));
            }
        }
    }
    let factor = factor.unwrap();

    let apply_project = |v: &mut [f64]| {
        if let Some(p) = project {
            p(v);
        }
    };

    let mut rng: u64 = 0x5DEECE66D_u64 ^ (n as u64).wrapping_mul(0x9E3779B97F4A7C15);
    let mut v = vec![0.0; n];
    fill_random(&mut rng, &mut v);
    apply_project(&mut v);
    let mut nv = norm(&v);
    // A zero projected start means the subspace is (numerically) trivial;
    // retry a few deterministic redraws before concluding it is empty.
    for _ in 0..4 {
        if nv > 1e-8 {
            break;
        }
        fill_random(&mut rng, &mut v);
        apply_project(&mut v);
        nv = norm(&v);
    }
    if nv <= 1e-8 {
        return Ok(Vec::new());
    }
    for x in v.iter_mut() {
        *x /= nv;
    }

    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    let max_steps = MAX_STEPS.min(n);
    let mut step = 0usize;

    while step < max_steps {
        step += 1;
        let vj = basis.last().unwrap().clone();
        let mut w = factor.solve(&vj);
        apply_project(&mut w);
        let alpha = dot(&w, &vj);
        if !alpha.is_finite() {
            return Err(Error::ConvergenceFailure(
                "non-finite Lanczos coefficient".into(),
            ));
        }
        for (wi, vi) in w.iter_mut().zip(&vj) {
            *wi -= alpha * vi;
        }
        if basis.len() >= 2 {
            let beta_prev = *betas.last().unwrap();
            let vprev = &basis[basis.len() - 2];
            for (wi, vi) in w.iter_mut().zip(vprev) {
                *wi -= beta_prev * vi;
            }
        }
        // Full reorthogonalization, two classical Gram-Schmidt sweeps.
        for _ in 0..2 {
            for u in &basis {
                let c = dot(&w, u);
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= c * ui;
                }
            }
        }
        alphas.push(alpha);
        let beta = norm(&w);
        if beta < 1e-12 {
            // Invariant subspace exhausted: try a fresh deterministic
            // direction; if none survives orthogonalization, the projected
            // space is spanned and the final extraction below settles it.
            let mut fresh = vec![0.0; n];
            let mut found = false;
            for _ in 0..4 {
                fill_random(&mut rng, &mut fresh);
                apply_project(&mut fresh);
                for _ in 0..2 {
                    for u in &basis {
                        let c = dot(&fresh, u);
                        for (fi, ui) in fresh.iter_mut().zip(u) {
                            *fi -= c * ui;
                        }
                    }
                }
                let nf = norm(&fresh);
                if nf > 1e-8 {
                    for x in fresh.iter_mut() {
                        *x /= nf;
                    }
                    found = true;
                    break;
                }
            }
            if !found {
                break;
            }
            betas.push(0.0);
            basis.push(fresh);
            continue;
        }
        betas.push(beta);
        let mut next = w;
        for x in next.iter_mut() {
            *x /= beta;
        }
        basis.push(next);

        // Periodically check cheap convergence bounds and finish early once
        // the wanted Ritz pairs are tight.
        let interval = if step > 100 { 20 } else { 10 };
        if step < max_steps && (step < 3 * k || step % interval != 0) {
            continue;
        }
        let j = alphas.len();
        let mut t = DMatrix::zeros(j, j);
        for (i, &al) in alphas.iter().enumerate() {
            t[(i, i)] = al;
            if i + 1 < j {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut cand: Vec<(f64, usize)> = Vec::new();
        for idx in 0..j {
            let theta = eig.eigenvalues[idx];
            if theta.abs() > 1e-300 {
                cand.push((shift + 1.0 / theta, idx));
            }
        }
        cand.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        let want = k.min(cand.len());
        let beta_last = *betas.last().unwrap();
        let all_tight = want > 0
            && cand.iter().take(want).all(|&(_, idx)| {
                let theta = eig.eigenvalues[idx];
                let tail = eig.eigenvectors[(j - 1, idx)].abs();
                beta_last * tail <= 1e-12 * theta.abs().max(1e-3)
            });
        if all_tight {
            break;
        }
    }

    let (mut pairs, worst, want) = extract_verified(a, &alphas, &betas, &basis, shift, k, project);
    if pairs.is_empty() && want > 0 {
        return Err(Error::ConvergenceFailure(format!(
            "shift-invert iteration did not converge: 0 of {} pairs verified \
             after {} steps (worst relative residual {:.3e})",
            want,
            alphas.len(),
            worst
        )));
    }
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    pairs.truncate(k);
    Ok(pairs)
}
