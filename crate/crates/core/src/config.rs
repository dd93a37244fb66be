//! Run configuration in a line-oriented `key = value` format.
//!
//! `#` starts a comment, blank lines are ignored and a later assignment of a
//! key overrides an earlier one. Unknown keys are rejected.

use std::path::PathBuf;

use crate::equations::Variant;
use crate::error::{Error, Result};
use crate::fields::PeriodicGrid;
use crate::solver::SolveOptions;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub equation: Variant,
    /// Grid to solve on; `None` keeps the grid of the input data.
    pub grid: Option<Vec<usize>>,
    pub solver: SolveOptions,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub verbosity: u8,
}

const KEYS: &[&str] = &[
    "equation",
    "grid",
    "newton_tol",
    "newton_max_iter",
    "t_step_init",
    "t_step_min",
    "t_step_max",
    "damping",
    "max_backtracks",
    "krylov_tol",
    "krylov_max_iter",
    "krylov_restart",
    "input",
    "output",
    "trace",
    "verbosity",
];

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::Validation {
        field: field.into(),
        message: message.into(),
    }
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| invalid(key, format!("cannot parse `{value}`")))
}

/// Parses and validates a configuration, applying defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    // last assignment wins; remember where each key was set
    let mut entries: Vec<(&str, &str, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, found `{line}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unknown key `{key}`"),
            });
        }
        if value.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("missing value for `{key}`"),
            });
        }
        entries.retain(|(k, _, _)| *k != key);
        entries.push((key, value, line_no));
    }

    let mut equation = None;
    let mut grid = None;
    let mut solver = SolveOptions::default();
    let mut config_paths: [Option<PathBuf>; 3] = [None, None, None];
    let mut verbosity = 0;
    for &(key, value, _) in &entries {
        match key {
            "equation" => equation = Some(value.parse::<Variant>()?),
            "grid" => {
                let shape = value
                    .split(',')
                    .map(|v| number::<usize>("grid", v.trim()))
                    .collect::<Result<Vec<_>>>()?;
                grid = Some(shape);
            }
            "newton_tol" => solver.newton_tol = number(key, value)?,
            "newton_max_iter" => solver.newton_max_iter = number(key, value)?,
            "t_step_init" => solver.t_step_init = number(key, value)?,
            "t_step_min" => solver.t_step_min = number(key, value)?,
            "t_step_max" => solver.t_step_max = number(key, value)?,
            "damping" => solver.damping = number(key, value)?,
            "max_backtracks" => solver.max_backtracks = number(key, value)?,
            "krylov_tol" => solver.krylov_tol = number(key, value)?,
            "krylov_max_iter" => solver.krylov_max_iter = number(key, value)?,
            "krylov_restart" => solver.krylov_restart = number(key, value)?,
            "input" => config_paths[0] = Some(PathBuf::from(value)),
            "output" => config_paths[1] = Some(PathBuf::from(value)),
            "trace" => config_paths[2] = Some(PathBuf::from(value)),
            "verbosity" => verbosity = number(key, value)?,
            _ => unreachable!("key list checked above"),
        }
    }

    let equation = equation.ok_or_else(|| invalid("equation", "required"))?;
    if let Some(shape) = &grid {
        if shape.len() != equation.base_dim() {
            return Err(invalid(
                "grid",
                format!(
                    "{} axes given but {equation} needs {}",
                    shape.len(),
                    equation.base_dim()
                ),
            ));
        }
        PeriodicGrid::new(shape.clone()).map_err(|e| invalid("grid", e.to_string()))?;
    }
    solver.validate()?;
    let [input, output, trace] = config_paths;
    Ok(RunConfig {
        equation,
        grid,
        solver,
        input,
        output,
        trace,
        verbosity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse_config("equation = t5\ngrid = 16,16,16,16,16").unwrap();
        assert_eq!(c.equation, Variant::T5);
        assert_eq!(c.grid, Some(vec![16; 5]));
        assert_eq!(c.solver, SolveOptions::default());
    }

    #[test]
    fn later_keys_override_and_comments_are_ignored() {
        let c = parse_config("# run\nequation = t4 # poisson\nnewton_tol = 1e-6\n\nnewton_tol = 1e-9\n").unwrap();
        assert_eq!(c.solver.newton_tol, 1e-9);
        assert_eq!(c.equation, Variant::T4);
    }

    #[test]
    fn grid_dimension_must_match() {
        let e = parse_config("equation = t5\ngrid = 16,16").unwrap_err();
        assert!(matches!(e, Error::Validation { ref field, .. } if field == "grid"));
    }

    #[test]
    fn tolerances_must_be_positive() {
        let e = parse_config("equation = t5\nnewton_tol = -1").unwrap_err();
        assert!(matches!(e, Error::Validation { ref field, .. } if field == "newton_tol"));
    }

    #[test]
    fn unknown_keys_report_line() {
        let e = parse_config("equation = t5\n\nfoo = 1").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        assert!(matches!(parse_config("equation t5"), Err(Error::Parse { line: 1, .. })));
    }
}
