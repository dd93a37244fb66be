use std::fmt::Write as _;

use serde::Serialize;

use crate::equations::{assemble, ellipticity_from, residual_from, CoefficientFields, ReducedEquation};
use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::verify::normalization_check;

use super::newton::{newton_with_constant, NewtonOutcome};
use super::options::SolveOptions;

/// `F_t = log(1 - t + t e^F)`, the continuity path from `0` to `F`.
pub fn continuity_f(f: &ScalarField, t: f64) -> Result<ScalarField> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::DomainError(format!("continuation parameter {t} outside [0, 1]")));
    }
    f.check_finite("F")?;
    Ok(f.map(|v| {
        if t == 1.0 {
            v
        } else {
            // ln(1 + t (e^F - 1)), accurate for small t (e^F - 1)
            (t * v.exp_m1()).ln_1p()
        }
    }))
}

/// Diagnostics of one accepted continuation step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub t: f64,
    pub newton_iters: usize,
    pub residual_sup: f64,
    /// Smallest eigenvalue of the linearized symbol over the grid.
    pub lambda_min: f64,
    /// `min (Lap phi + 2 - 2 e^{F_t / 2})`.
    pub harnack_margin: f64,
    pub min_a: f64,
    pub min_b: f64,
    pub strong_margin: Option<f64>,
    pub krylov_iters_total: usize,
    pub residual_history: Vec<f64>,
    /// `integral (e^{F_t} - 1)`.
    pub normalization: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ContinuityTrace {
    pub entries: Vec<TraceEntry>,
}

pub const TRACE_COLUMNS: &str =
    "t,newton_iters,residual_sup,lambda_min,harnack_margin,minA,minB,strong_margin,krylov_iters_total";

impl ContinuityTrace {
    pub fn reached_one(&self) -> bool {
        self.entries.last().is_some_and(|e| e.t == 1.0)
    }

    pub fn is_increasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[0].t < w[1].t)
    }

    /// CSV with a header row; floats in round-trip exponent notation, an
    /// empty cell where the strong condition does not apply.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRACE_COLUMNS);
        out.push('\n');
        for e in &self.entries {
            let strong = e.strong_margin.map(|m| format!("{m:e}")).unwrap_or_default();
            writeln!(
                out,
                "{:e},{},{:e},{:e},{:e},{:e},{:e},{},{}",
                e.t,
                e.newton_iters,
                e.residual_sup,
                e.lambda_min,
                e.harnack_margin,
                e.min_a,
                e.min_b,
                strong,
                e.krylov_iters_total
            )
            .expect("writing to a String");
        }
        out
    }
}

#[derive(Debug)]
pub struct SolveResult {
    /// Last accepted potential (mean zero); the solution when `converged`.
    pub phi: ScalarField,
    pub converged: bool,
    pub trace: ContinuityTrace,
    /// Why continuation stopped short of `t = 1`.
    pub failure: Option<Error>,
    /// Compatibility constant `c` of the last accepted step: `phi` solves the
    /// equation with data `F + c`. Zero up to round-off for exactly
    /// compatible discrete data; bounded by the normalization tolerance otherwise.
    pub constant: f64,
}

impl SolveResult {
    pub fn failure_reason(&self) -> Option<String> {
        self.failure.as_ref().map(|e| e.to_string())
    }
}

/// Tolerance on `integral (e^F - 1)` accepted by [`solve`].
pub const NORMALIZATION_TOL: f64 = 1e-8;

fn trace_entry(
    eq: &ReducedEquation,
    t: f64,
    f_t: &ScalarField,
    out: &NewtonOutcome,
) -> Result<TraceEntry> {
    let coeffs: &CoefficientFields = &out.coefficients;
    let report = ellipticity_from(eq, coeffs, f_t)?;
    let harnack = coeffs
        .laplacian(eq)
        .zip_map(f_t, |lap, fv| lap + 2.0 - 2.0 * (0.5 * fv).exp())?;
    Ok(TraceEntry {
        t,
        newton_iters: out.iterations,
        residual_sup: out.residual_sup,
        lambda_min: report.symbol_lambda_min,
        harnack_margin: harnack.min(),
        min_a: report.min_a,
        min_b: report.min_b,
        strong_margin: report.strong_margin,
        krylov_iters_total: out.krylov_iterations,
        residual_history: out.residual_history.clone(),
        normalization: normalization_check(f_t)?,
    })
}

/// Solves `eq` for data `F` by continuation along `F_t`, warm-starting
/// Newton from the previous accepted potential.
///
/// Precondition failures are returned as errors; a continuation that stops
/// short of `t = 1` is reported through `SolveResult::failure`.
pub fn solve(eq: &ReducedEquation, f: &ScalarField, opts: &SolveOptions) -> Result<SolveResult> {
    opts.validate()?;
    eq.check_grid(f.grid())?;
    let value = normalization_check(f)?;
    if value.abs() > NORMALIZATION_TOL {
        return Err(Error::NormalizationViolation { value });
    }
    // warm start for the compatibility constant; see `newton_with_constant`
    let mut constant = 0.0;

    let mut phi = ScalarField::zeros(f.grid());
    let mut trace = ContinuityTrace::default();
    let mut t = 0.0;
    let mut step = opts.t_step_init;

    let coeffs = assemble(eq, &phi)?;
    let residual_sup = residual_from(&coeffs, f)?.sup_norm();
    if residual_sup <= opts.newton_tol {
        // the flat potential already solves the problem: a single step to t = 1
        let out = NewtonOutcome {
            phi,
            iterations: 0,
            residual_sup,
            residual_history: vec![residual_sup],
            krylov_iterations: 0,
            coefficients: coeffs,
            constant: 0.0,
        };
        trace.entries.push(trace_entry(eq, 1.0, f, &out)?);
        return Ok(SolveResult {
            phi: out.phi,
            converged: true,
            trace,
            failure: None,
            constant: 0.0,
        });
    }

    let failure = loop {
        if t >= 1.0 {
            break None;
        }
        let t_next = if t + step >= 1.0 - 1e-12 { 1.0 } else { t + step };
        let f_t = continuity_f(f, t_next)?;
        match newton_with_constant(eq, &f_t, &phi, constant, opts) {
            Ok(out) => {
                trace.entries.push(trace_entry(eq, t_next, &f_t, &out)?);
                if out.iterations <= opts.fast_newton_iters {
                    step = (2.0 * step).min(opts.t_step_max);
                }
                phi = out.phi;
                constant = out.constant;
                t = t_next;
            }
            Err(e @ Error::EllipticityLoss { .. }) => break Some(e),
            Err(
                Error::LinearSolveFailure { .. }
                | Error::LineSearchFailure { .. }
                | Error::NewtonNotConverged { .. },
            ) => {
                step *= 0.5;
                if step < opts.t_step_min {
                    break Some(Error::ContinuationStalled { t, step });
                }
            }
            Err(e) => return Err(e),
        }
    };
    Ok(SolveResult {
        phi,
        converged: failure.is_none(),
        trace,
        failure,
        constant,
    })
}
