//! Full (non-restarted) GMRES with modified Gram-Schmidt and Givens rotations.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    /// Relative residual `‖b - Ax‖ / ‖b‖` of the returned iterate.
    pub residual: f64,
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` for the linear map `apply(x, out)`.
///
/// Stops once the true relative residual drops to `tol`; a happy breakdown
/// returns the exact Krylov solution. The Krylov basis is never truncated;
/// only when the recurrence estimate has converged but round-off keeps the
/// true residual above `tol` is the cycle restarted from the current iterate.
/// On failure the error carries the best iterate found.
pub fn gmres(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<GmresOutcome> {
    let n = b.len();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(GmresOutcome {
            x: vec![0.0; n],
            residual: 0.0,
            iterations: 0,
        });
    }
    let mut x = match x0 {
        Some(x0) if x0.len() == n => x0.to_vec(),
        Some(x0) => {
            return Err(Error::LengthMismatch {
                expected: n,
                found: x0.len(),
            })
        }
        None => vec![0.0; n],
    };

    let mut r = vec![0.0; n];
    let mut iterations = 0;
    loop {
        apply(&x, &mut r);
        r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
        let residual = norm(&r) / b_norm;
        if residual <= tol {
            return Ok(GmresOutcome { x, residual, iterations });
        }
        if iterations >= max_iter {
            return Err(Error::NotConverged {
                iterations,
                residual,
                best: x,
            });
        }
        let budget = (max_iter - iterations).min(n);
        let (dx, k, stalled) = cycle(&mut apply, &r, tol * b_norm, budget);
        x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
        iterations += k;
        if stalled {
            apply(&x, &mut r);
            let residual = r.iter().zip(b).map(|(ri, bi)| (bi - ri).powi(2)).sum::<f64>().sqrt() / b_norm;
            return if residual <= tol {
                Ok(GmresOutcome { x, residual, iterations })
            } else {
                Err(Error::NotConverged {
                    iterations,
                    residual,
                    best: x,
                })
            };
        }
    }
}

/// One Arnoldi cycle on `A d = r`. Returns the correction, the number of
/// steps taken and whether the cycle made no progress at all.
fn cycle(apply: &mut impl FnMut(&[f64], &mut [f64]), r: &[f64], abs_tol: f64, budget: usize) -> (Vec<f64>, usize, bool) {
    let n = r.len();
    let beta = norm(r);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(budget + 1);
    basis.push(r.iter().map(|v| v / beta).collect());
    // columns of the rotated upper Hessenberg matrix
    let mut hess: Vec<Vec<f64>> = Vec::with_capacity(budget);
    let mut cs: Vec<f64> = Vec::with_capacity(budget);
    let mut sn: Vec<f64> = Vec::with_capacity(budget);
    let mut g = vec![0.0; budget + 1];
    g[0] = beta;

    let mut k = 0;
    let mut w = vec![0.0; n];
    while k < budget {
        apply(&basis[k], &mut w);
        let mut h = vec![0.0; k + 2];
        for (i, v) in basis.iter().enumerate() {
            let hij = dot(&w, v);
            h[i] = hij;
            w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hij * vi);
        }
        let h_next = norm(&w);
        h[k + 1] = h_next;

        for i in 0..k {
            let t = cs[i] * h[i] + sn[i] * h[i + 1];
            h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
            h[i] = t;
        }
        let denom = h[k].hypot(h[k + 1]);
        let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (h[k] / denom, h[k + 1] / denom) };
        cs.push(c);
        sn.push(s);
        h[k] = denom;
        h[k + 1] = 0.0;
        g[k + 1] = -s * g[k];
        g[k] *= c;
        hess.push(h);
        k += 1;

        let breakdown = h_next <= 1e-14 * beta;
        if g[k].abs() <= abs_tol || breakdown {
            break;
        }
        basis.push(w.iter().map(|v| v / h_next).collect());
    }

    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = g[i];
        for (j, yj) in y.iter().enumerate().skip(i + 1) {
            acc -= hess[j][i] * yj;
        }
        y[i] = if hess[i][i] == 0.0 { 0.0 } else { acc / hess[i][i] };
    }
    let mut dx = vec![0.0; n];
    for (yj, v) in y.iter().zip(&basis) {
        dx.iter_mut().zip(v).for_each(|(di, vi)| *di += yj * vi);
    }
    let stalled = g[k].abs() > abs_tol || (g[k].abs() >= 0.999 * beta);
    (dx, k, stalled)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_in_one_iteration() {
        let b = [1.0, -2.0, 3.0, 0.5];
        let out = gmres(|x, y| y.copy_from_slice(x), &b, None, 1e-12, 10).unwrap();
        assert_eq!(out.iterations, 1);
        for (a, e) in out.x.iter().zip(&b) {
            assert!((a - e).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_system_within_dimension() {
        let d = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [1.0; 5];
        let out = gmres(
            |x, y| y.iter_mut().zip(x.iter().zip(&d)).for_each(|(yi, (xi, di))| *yi = xi * di),
            &b,
            None,
            1e-12,
            50,
        )
        .unwrap();
        assert!(out.iterations <= 5);
        for (xi, di) in out.x.iter().zip(&d) {
            assert!((xi - 1.0 / di).abs() < 1e-12);
        }
        assert!(out.residual <= 1e-12);
    }

    #[test]
    fn nonsymmetric_system() {
        let a = [[4.0, 1.0, 0.0], [-2.0, 3.0, 1.0], [0.5, 0.0, 2.0]];
        let b = [1.0, 2.0, 3.0];
        let out = gmres(
            |x, y| {
                for i in 0..3 {
                    y[i] = (0..3).map(|j| a[i][j] * x[j]).sum();
                }
            },
            &b,
            None,
            1e-13,
            10,
        )
        .unwrap();
        for i in 0..3 {
            let ax: f64 = (0..3).map(|j| a[i][j] * out.x[j]).sum();
            assert!((ax - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn warm_start_at_solution_takes_no_iterations() {
        let b = [2.0, 4.0];
        let out = gmres(|x, y| y.iter_mut().zip(x).for_each(|(yi, xi)| *yi = 2.0 * xi), &b, Some(&[1.0, 2.0]), 1e-12, 5).unwrap();
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn reports_non_convergence_with_best_iterate() {
        // rotation-like matrix: GMRES stagnates for the first n-1 steps
        let n = 8;
        let b: Vec<f64> = (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
        let err = gmres(
            |x, y| {
                for i in 0..n {
                    y[(i + 1) % n] = x[i];
                }
            },
            &b,
            None,
            1e-12,
            3,
        )
        .unwrap_err();
        match err {
            Error::NotConverged { iterations, best, .. } => {
                assert_eq!(iterations, 3);
                assert_eq!(best.len(), n);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
