//! Nonnegative least squares by the Lawson–Hanson active-set method.
//!
//! Used to reconstruct completely monotone functions as nonnegative
//! exponential sums from samples of their Laplace transforms. The passive-set
//! subproblems are solved by SVD, which keeps the notoriously ill-conditioned
//! exponential design matrices under control; the iteration order is fixed,
//! so results are deterministic.

use nalgebra::{DMatrix, DVector};

/// Solves `min ||A x - b||` subject to `x >= 0`.
///
/// Returns the solution and the residual norm. `A` is `m x n` with `m >= 1`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, max_iter: usize) -> (DVector<f64>, f64) {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    // Columns that produced a non-positive passive solution immediately after
    // entering are banned until the residual improves; this breaks the
    // classical Lawson-Hanson cycle on near-collinear columns.
    let mut banned = vec![false; n];
    let mut w = a.transpose() * (b - a * &x);
    let mut best_resid = (b - a * &x).norm();

    let tol = 1e-12 * a.amax().max(1.0) * b.amax().max(1.0);
    let mut iter = 0usize;

    loop {
        // Most positive gradient among active (zero) variables.
        let mut best = None;
        for j in 0..n {
            if !passive[j] && !banned[j] && w[j] > tol {
                match best {
                    Some((_, wv)) if w[j] <= wv => {}
                    _ => best = Some((j, w[j])),
                }
            }
        }
        let Some((j_in, _)) = best else { break };
        passive[j_in] = true;
        let mut first_inner = true;

        loop {
            iter += 1;
            if iter > max_iter {
                let r = (b - a * &x).norm();
                return (x, r);
            }
            let z = solve_passive(a, b, &passive);
            if first_inner && z[j_in] <= 0.0 {
                // Entering column is numerically dependent on the current
                // passive set; ban it and move on.
                passive[j_in] = false;
                banned[j_in] = true;
                break;
            }
            first_inner = false;
            // Fully feasible step: accept.
            let mut feasible = true;
            for j in 0..n {
                if passive[j] && z[j] <= 0.0 {
                    feasible = false;
                    break;
                }
            }
            if feasible {
                for j in 0..n {
                    x[j] = if passive[j] { z[j] } else { 0.0 };
                }
                break;
            }
            // Step toward z as far as feasibility allows; drop the variables
            // that hit zero.
            let mut alpha = f64::INFINITY;
            for j in 0..n {
                if passive[j] && z[j] <= 0.0 {
                    let denom = x[j] - z[j];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            let alpha = alpha.clamp(0.0, 1.0);
            for j in 0..n {
                if passive[j] {
                    x[j] += alpha * (z[j] - x[j]);
                    if x[j] <= 1e-300 {
                        x[j] = 0.0;
                        passive[j] = false;
                    }
                }
            }
        }
        let resid = (b - a * &x).norm();
        if resid < best_resid * (1.0 - 1e-12) {
            best_resid = resid;
            for f in banned.iter_mut() {
                *f = false;
            }
        }
        w = a.transpose() * (b - a * &x);
    }

    let r = (b - a * &x).norm();
    (x, r)
}

fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..a.ncols()).filter(|&j| passive[j]).collect();
    let sub = a.select_columns(cols.iter());
    let eps = 1e-12 * sub.amax().max(1e-300);
    let svd = sub.svd(true, true);
    let sol = svd
        .solve(b, eps)
        .unwrap_or_else(|_| DVector::zeros(cols.len()));
    let mut z = DVector::zeros(a.ncols());
    for (k, &j) in cols.iter().enumerate() {
        z[j] = sol[k];
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_nonnegative_combination() {
        // b = 2*col0 + 0.5*col2 exactly.
        let a = DMatrix::from_row_slice(4, 3, &[1.0, 0.2, 0.1, 0.0, 1.0, 0.3, 0.5, 0.1, 1.0, 0.2, 0.4, 0.6]);
        let xtrue = DVector::from_vec(vec![2.0, 0.0, 0.5]);
        let b = &a * &xtrue;
        let (x, r) = nnls(&a, &b, 200);
        assert!(r < 1e-10);
        for j in 0..3 {
            assert_relative_eq!(x[j], xtrue[j], epsilon = 1e-9);
        }
    }

    #[test]
    fn clips_negative_solution() {
        // Unconstrained solution of this system has a negative component.
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.001]);
        let b = DVector::from_vec(vec![1.0, 0.5]);
        let (x, _) = nnls(&a, &b, 100);
        assert!(x[0] >= 0.0 && x[1] >= 0.0);
    }

    #[test]
    fn deterministic() {
        let a = DMatrix::from_fn(30, 12, |i, j| 1.0 / (1.0 + (i as f64) * 0.3 + (j as f64).exp() * 0.05));
        let b = DVector::from_fn(30, |i, _| 1.0 / (1.0 + i as f64));
        let (x1, r1) = nnls(&a, &b, 400);
        let (x2, r2) = nnls(&a, &b, 400);
        assert_eq!(r1.to_bits(), r2.to_bits());
        for j in 0..12 {
            assert_eq!(x1[j].to_bits(), x2[j].to_bits());
        }
    }
}
