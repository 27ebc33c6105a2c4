//! Deterministic derivative-free minimization (Nelder–Mead simplex).
//!
//! The certification search needs a reproducible optimizer: fixed simplex
//! schedule, stable tie-breaking, hard evaluation budget, no randomness.
//! Bounds are the caller's business (impose them through penalties in the
//! objective).

/// Result of a simplex run.
#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Minimize `f` starting from `start` (with known value `f_start`), using an
/// initial simplex displaced by `steps` along each coordinate.
///
/// Performs at most `max_evals` additional evaluations of `f`; stops earlier
/// when the simplex values spread drops below `ftol * (1 + |best|)`. If the
/// budget cannot even build the initial simplex, the start point is returned
/// unchanged.
pub fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    start: &[f64],
    f_start: f64,
    steps: &[f64],
    max_evals: usize,
    ftol: f64,
) -> SimplexResult {
    let dim = start.len();
    assert_eq!(steps.len(), dim, "one step per coordinate");
    let mut evals = 0usize;
    // Treat NaN objective values as worst-possible so they are driven out.
    let clean = |v: f64| if v.is_nan() { f64::INFINITY } else { v };

    if max_evals < dim {
        return SimplexResult {
            x: start.to_vec(),
            value: f_start,
            evals,
        };
    }

    let mut points: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    let mut values: Vec<f64> = Vec::with_capacity(dim + 1);
    points.push(start.to_vec());
    values.push(clean(f_start));
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += steps[i];
        let v = clean(f(&p));
        evals += 1;
        points.push(p);
        values.push(v);
    }

    let order = |values: &[f64]| -> Vec<usize> {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        // Stable: equal values keep insertion order, so runs are repeatable.
        idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        idx
    };

    while evals < max_evals {
        let idx = order(&values);
        let best = idx[0];
        let worst = idx[dim];
        let second_worst = idx[dim - 1];
        if (values[worst] - values[best]).abs() <= ftol * (1.0 + values[best].abs()) {
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; dim];
        for (k, p) in points.iter().enumerate() {
            if k != worst {
                for (c, &pi) in centroid.iter_mut().zip(p) {
                    *c += pi;
                }
            }
        }
        for c in centroid.iter_mut() {
            *c /= dim as f64;
        }

        let blend = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&points[worst])
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };

        let xr = blend(1.0);
        let vr = clean(f(&xr));
        evals += 1;

        if vr < values[best] {
            // Try to expand further along the same direction.
            if evals < max_evals {
                let xe = blend(2.0);
                let ve = clean(f(&xe));
                evals += 1;
                if ve < vr {
                    points[worst] = xe;
                    values[worst] = ve;
                    continue;
                }
            }
            points[worst] = xr;
            values[worst] = vr;
            continue;
        }
        if vr < values[second_worst] {
            points[worst] = xr;
            values[worst] = vr;
            continue;
        }

        // Contract, outside or inside depending on the reflected value.
        if evals >= max_evals {
            break;
        }
        let (xc, vc) = if vr < values[worst] {
            let xc = blend(0.5);
            let vc = clean(f(&xc));
            (xc, vc)
        } else {
            let xc = blend(-0.5);
            let vc = clean(f(&xc));
            (xc, vc)
        };
        evals += 1;
        if vc < vr.min(values[worst]) {
            points[worst] = xc;
            values[worst] = vc;
            continue;
        }

        // Shrink everything toward the best vertex.
        for k in 0..points.len() {
            if k == best {
                continue;
            }
            for d in 0..dim {
                points[k][d] = points[best][d] + 0.5 * (points[k][d] - points[best][d]);
            }
            if evals < max_evals {
                values[k] = clean(f(&points[k]));
                evals += 1;
            } else {
                values[k] = f64::INFINITY;
            }
        }
    }

    let idx = order(&values);
    SimplexResult {
        x: points[idx[0]].clone(),
        value: values[idx[0]],
        evals,
    }
}
