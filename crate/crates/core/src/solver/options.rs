use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveOptions {
    /// Target sup-norm of the residual.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub t_step_init: f64,
    pub t_step_min: f64,
    /// Upper bound for the step after successive fast solves.
    pub t_step_max: f64,
    /// Backtracking factor of the line search.
    pub damping: f64,
    pub max_backtracks: usize,
    /// Relative residual target of the linear solve.
    pub krylov_tol: f64,
    pub krylov_max_iter: usize,
    /// GMRES restart length.
    pub krylov_restart: usize,
    /// A step converging within this many Newton iterations doubles the next step.
    pub fast_newton_iters: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            newton_tol: 1e-10,
            newton_max_iter: 30,
            t_step_init: 0.1,
            t_step_min: 1e-4,
            t_step_max: 0.25,
            damping: 0.5,
            max_backtracks: 20,
            krylov_tol: 1e-8,
            krylov_max_iter: 500,
            krylov_restart: 30,
            fast_newton_iters: 4,
        }
    }
}

fn invalid(field: &str, message: &str) -> Error {
    Error::Validation {
        field: field.into(),
        message: message.into(),
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("newton_tol", self.newton_tol),
            ("t_step_init", self.t_step_init),
            ("t_step_min", self.t_step_min),
            ("t_step_max", self.t_step_max),
            ("damping", self.damping),
            ("krylov_tol", self.krylov_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, "must be positive"));
            }
        }
        for (name, v) in [
            ("newton_max_iter", self.newton_max_iter),
            ("krylov_max_iter", self.krylov_max_iter),
            ("krylov_restart", self.krylov_restart),
        ] {
            if v == 0 {
                return Err(invalid(name, "must be positive"));
            }
        }
        if self.damping >= 1.0 {
            return Err(invalid("damping", "must be below 1"));
        }
        if self.t_step_min > self.t_step_init || self.t_step_init > 1.0 {
            return Err(invalid("t_step_init", "must satisfy t_step_min <= t_step_init <= 1"));
        }
        if self.t_step_max < self.t_step_init {
            return Err(invalid("t_step_max", "must be at least t_step_init"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SolveOptions::default().validate().unwrap();
    }

    #[test]
    fn rejects_inconsistent_steps() {
        let o = SolveOptions {
            t_step_min: 0.5,
            ..SolveOptions::default()
        };
        assert!(o.validate().is_err());
        let o = SolveOptions {
            newton_tol: -1.0,
            ..SolveOptions::default()
        };
        assert!(matches!(o.validate(), Err(Error::Validation { field, .. }) if field == "newton_tol"));
    }
}
