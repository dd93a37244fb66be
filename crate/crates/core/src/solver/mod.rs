//! Continuity-method solver: the path `F_t = log(1 - t + t e^F)`, Newton
//! iteration on mean-zero potentials and a preconditioned GMRES inner solve.

mod continuity;
mod krylov;
mod newton;
mod options;

pub use continuity::{continuity_f, solve, ContinuityTrace, SolveResult, TraceEntry};
pub use krylov::{gmres, linear_solve, linear_solve_detailed, KrylovOutcome};
pub use newton::{newton_solve, NewtonOutcome};
pub use options::SolveOptions;
