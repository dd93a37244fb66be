use crate::equations::LinearizedOperator;
use crate::error::{Error, Result};
use crate::fields::ScalarField;

use super::options::SolveOptions;

#[derive(Clone, Debug)]
pub struct KrylovOutcome {
    pub u: ScalarField,
    pub iterations: usize,
    /// `||L u - rhs||_2 / ||rhs||_2`, measured by direct application.
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Restarted GMRES for `op(x) = b` with modified Gram-Schmidt Arnoldi and
/// Givens rotations. Returns `(x, iterations, relative residual)`; the
/// relative residual is recomputed from `op` at every restart.
pub fn gmres(
    op: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
    restart: usize,
) -> Result<(Vec<f64>, usize, f64)> {
    let n = b.len();
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok((x, 0, 0.0));
    }
    let target = tol * b_norm;
    let mut r = b.to_vec();
    let mut beta = b_norm;
    let mut iterations = 0;
    loop {
        if beta <= target {
            return Ok((x, iterations, beta / b_norm));
        }
        if iterations >= max_iter {
            return Err(Error::LinearSolveFailure {
                iterations,
                relative_residual: beta / b_norm,
            });
        }
        let m = restart.min(max_iter - iterations);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m {
            let mut w = op(&basis[k]);
            for (i, v) in basis.iter().enumerate() {
                h[i][k] = dot(&w, v);
                let hik = h[i][k];
                w.iter_mut().zip(v).for_each(|(wj, vj)| *wj -= hik * vj);
            }
            let w_norm = norm(&w);
            h[k + 1][k] = w_norm;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let rho = h[k][k].hypot(h[k + 1][k]);
            if rho == 0.0 {
                break;
            }
            cs[k] = h[k][k] / rho;
            sn[k] = h[k + 1][k] / rho;
            h[k][k] = rho;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k += 1;
            iterations += 1;
            if g[k].abs() <= target || w_norm == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / w_norm).collect());
        }
        // back substitution for the least-squares coefficients
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (v, yi) in basis.iter().zip(&y) {
            x.iter_mut().zip(v).for_each(|(xj, vj)| *xj += yi * vj);
        }
        let ax = op(&x);
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let new_beta = norm(&r);
        if k == 0 || new_beta >= beta {
            // breakdown or stagnation: no further progress is possible
            if new_beta <= target {
                return Ok((x, iterations, new_beta / b_norm));
            }
            return Err(Error::LinearSolveFailure {
                iterations,
                relative_residual: new_beta / b_norm,
            });
        }
        beta = new_beta;
    }
}

/// Solves `L u = rhs` on mean-zero fields with GMRES, right-preconditioned by
/// the mean-zero inverse Laplacian. The mean of `rhs` is projected out.
pub fn linear_solve_detailed(
    op: &LinearizedOperator<'_>,
    rhs: &ScalarField,
    opts: &SolveOptions,
) -> Result<KrylovOutcome> {
    rhs.same_grid(&op.coefficients().coeff_a)?;
    let b = rhs.project_mean_zero()?;
    let (x, iterations, relative_residual) = gmres(
        |v| op.apply_preconditioned(v),
        b.values(),
        opts.krylov_tol,
        opts.krylov_max_iter,
        opts.krylov_restart,
    )?;
    let u = ScalarField::new(op.grid().clone(), op.precondition(&x))?;
    Ok(KrylovOutcome {
        u,
        iterations,
        relative_residual,
    })
}

pub fn linear_solve(op: &LinearizedOperator<'_>, rhs: &ScalarField, opts: &SolveOptions) -> Result<ScalarField> {
    linear_solve_detailed(op, rhs, opts).map(|o| o.u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gmres_solves_small_nonsymmetric_system() {
        let a = [[4.0, 1.0, 0.0], [-2.0, 5.0, 1.0], [0.5, 0.0, 3.0]];
        let op = |x: &[f64]| -> Vec<f64> { a.iter().map(|row| dot(row, x)).collect() };
        let b = [1.0, 2.0, 3.0];
        let (x, its, rel) = gmres(op, &b, 1e-12, 50, 2).unwrap();
        assert!(rel <= 1e-12);
        assert!(its > 0);
        let ax = op(&x);
        assert!(ax.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-10));
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let (x, its, _) = gmres(|v| v.to_vec(), &[0.0; 4], 1e-8, 10, 5).unwrap();
        assert_eq!(its, 0);
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let op = |x: &[f64]| -> Vec<f64> { x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).collect() };
        let b = vec![1.0; 20];
        assert!(matches!(
            gmres(op, &b, 1e-14, 3, 3),
            Err(Error::LinearSolveFailure { iterations: 3, .. })
        ));
    }
}
