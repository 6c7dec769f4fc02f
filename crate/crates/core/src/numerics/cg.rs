use crate::error::{Error, Result};

use super::linalg::{dot, norm};

/// Conjugate gradients for a symmetric positive definite operator given as
/// a callback `apply(x, out)` writing `A x` into `out`. Starts from zero and
/// stops once `|A x − b| ≤ tol · |b|`.
pub fn cg_solve<F>(apply: F, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]),
{
    if !(tol > 0.0) {
        return Err(Error::invalid("cg tolerance must be positive"));
    }
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let target = tol * bnorm;
    for _ in 0..max_iter {
        if rr.sqrt() <= target {
            return Ok(x);
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::invalid("operator is not positive definite"));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    let residual = rr.sqrt() / bnorm;
    if residual <= tol {
        Ok(x)
    } else {
        Err(Error::NonConvergence {
            iterations: max_iter,
            residual,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn laplacian_1d(x: &[f64], out: &mut [f64]) {
        let n = x.len();
        for i in 0..n {
            let left = if i > 0 { x[i - 1] } else { 0.0 };
            let right = if i + 1 < n { x[i + 1] } else { 0.0 };
            out[i] = 2.0 * x[i] - left - right;
        }
    }

    /// Thomas algorithm for a tridiagonal system.
    fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
        let n = diag.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = sup[0] / diag[0];
        d[0] = rhs[0] / diag[0];
        for i in 1..n {
            let m = diag[i] - sub[i] * c[i - 1];
            c[i] = if i + 1 < n { sup[i] / m } else { 0.0 };
            d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }

    #[test]
    fn identity_and_diagonal() {
        let x = cg_solve(|v, o| o.copy_from_slice(v), &[1.0, 2.0], 1e-12, 10).unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], 2.0, epsilon = 1e-14);

        let diag = [2.0, 4.0];
        let x = cg_solve(
            |v, o| {
                for i in 0..2 {
                    o[i] = diag[i] * v[i];
                }
            },
            &[2.0, 4.0],
            1e-12,
            10,
        )
        .unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn laplacian_matches_thomas() {
        let n = 5;
        let b = vec![1.0; n];
        let x = cg_solve(laplacian_1d, &b, 1e-12, 100).unwrap();
        let expected = thomas(&vec![-1.0; n], &vec![2.0; n], &vec![-1.0; n], &b);
        for (a, e) in x.iter().zip(&expected) {
            assert_abs_diff_eq!(a, e, epsilon = 1e-8);
        }
    }

    #[test]
    fn reports_non_convergence() {
        let b = vec![1.0; 50];
        match cg_solve(laplacian_1d, &b, 1e-14, 3) {
            Err(Error::NonConvergence { iterations, residual }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-14);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn zero_rhs() {
        let x = cg_solve(laplacian_1d, &[0.0; 4], 1e-10, 10).unwrap();
        assert_eq!(x, vec![0.0; 4]);
    }
}
