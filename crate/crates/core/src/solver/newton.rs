use crate::equations::{
    assemble_with, min_symbol_eigenvalue, residual_from, CoefficientFields, LinearizedOperator, ReducedEquation,
};
use crate::error::{Error, Result};
use crate::fields::{ScalarField, Spectral};

use super::krylov::linear_solve_detailed;
use super::options::SolveOptions;

/// Result of a converged Newton solve at fixed data.
#[derive(Clone, Debug)]
pub struct NewtonOutcome {
    pub phi: ScalarField,
    pub iterations: usize,
    pub residual_sup: f64,
    /// Residual sup-norm before the first and after every accepted step.
    pub residual_history: Vec<f64>,
    pub krylov_iterations: usize,
    pub coefficients: CoefficientFields,
    /// Compatibility constant `c`: the iterate solves the equation with data `F + c`.
    pub constant: f64,
}

/// Newton iteration for `residual(eq, phi, f) = 0` on mean-zero potentials.
///
/// Each step solves `L u = -residual` and backtracks along `u` until the
/// residual sup-norm decreases and the symbol stays positive definite. The
/// mean of the residual is absorbed by the compatibility constant reported in
/// [`NewtonOutcome::constant`], which vanishes for discretely compatible data.
pub fn newton_solve(
    eq: &ReducedEquation,
    f: &ScalarField,
    phi0: &ScalarField,
    opts: &SolveOptions,
) -> Result<NewtonOutcome> {
    newton_with_constant(eq, f, phi0, 0.0, opts)
}

fn shifted_residual(coeffs: &CoefficientFields, f: &ScalarField, c: f64) -> Result<ScalarField> {
    if c == 0.0 {
        residual_from(coeffs, f)
    } else {
        coeffs.determinant().zip_map(f, |q, fv| q - (fv + c).exp())
    }
}

/// Newton iteration for `Q(phi) = e^{F + c}` in the unknowns `(phi, c)`.
///
/// On a grid the mean of `Q(phi)` is exactly one only while `phi` has no
/// Nyquist content, so data without exact discrete compatibility leaves a
/// mean residual that mean-zero updates cannot remove; the scalar `c`
/// absorbs it. Each step takes `dc = mean(r) / mean(e^{F+c})` and solves
/// `L u = -(r - e^{F+c} dc)` on mean-zero fields.
pub(crate) fn newton_with_constant(
    eq: &ReducedEquation,
    f: &ScalarField,
    phi0: &ScalarField,
    c0: f64,
    opts: &SolveOptions,
) -> Result<NewtonOutcome> {
    opts.validate()?;
    eq.check_grid(f.grid())?;
    phi0.same_grid(f)?;
    f.check_finite("F")?;
    let spectral = Spectral::new(f.grid());

    let mut phi = phi0.project_mean_zero()?;
    let mut coeffs = assemble_with(eq, &spectral, &phi)?;
    let lambda_min = min_symbol_eigenvalue(eq, &coeffs);
    if lambda_min <= 0.0 {
        return Err(Error::EllipticityLoss { lambda_min });
    }
    let mut c = c0;
    let mut residual = shifted_residual(&coeffs, f, c)?;
    let mut residual_sup = residual.sup_norm();
    let mut history = vec![residual_sup];
    let mut krylov_iterations = 0;

    for iteration in 0..=opts.newton_max_iter {
        if residual_sup <= opts.newton_tol {
            return Ok(NewtonOutcome {
                phi,
                iterations: iteration,
                residual_sup,
                residual_history: history,
                krylov_iterations,
                coefficients: coeffs,
                constant: c,
            });
        }
        if iteration == opts.newton_max_iter {
            break;
        }
        let op = LinearizedOperator::from_coefficients(eq, &spectral, coeffs);
        let weight = f.map(|fv| (fv + c).exp());
        let dc = residual.mean()? / weight.mean()?;
        let rhs = residual.axpy(-dc, &weight)?.scale(-1.0);
        let solved = linear_solve_detailed(&op, &rhs, opts)?;
        krylov_iterations += solved.iterations;
        let step = solved.u;

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let trial = phi.axpy(alpha, &step)?.project_mean_zero()?;
            let trial_coeffs = assemble_with(eq, &spectral, &trial)?;
            if min_symbol_eigenvalue(eq, &trial_coeffs) > 0.0 {
                let trial_residual = shifted_residual(&trial_coeffs, f, c + alpha * dc)?;
                let trial_sup = trial_residual.sup_norm();
                if trial_sup < residual_sup {
                    accepted = Some((trial, trial_coeffs, trial_residual, trial_sup, c + alpha * dc));
                    break;
                }
            }
            alpha *= opts.damping;
        }
        let Some((next, next_coeffs, next_residual, next_sup, next_c)) = accepted else {
            return Err(Error::LineSearchFailure { residual: residual_sup });
        };
        phi = next;
        coeffs = next_coeffs;
        residual = next_residual;
        residual_sup = next_sup;
        c = next_c;
        history.push(residual_sup);
    }
    Err(Error::NewtonNotConverged {
        iterations: opts.newton_max_iter,
        residual: residual_sup,
    })
}
