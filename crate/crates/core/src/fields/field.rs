use crate::error::{Error, Result};

use super::grid::PeriodicGrid;

/// Real samples of a periodic function on a [`PeriodicGrid`], row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        let field = ScalarField { grid, values };
        field.check_finite("field values")?;
        Ok(field)
    }

    /// Wraps values already known to have the right length.
    pub(crate) fn from_raw(grid: PeriodicGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    pub fn zeros(grid: &PeriodicGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &PeriodicGrid, c: f64) -> Self {
        ScalarField {
            values: vec![c; grid.len()],
            grid: grid.clone(),
        }
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut idx = vec![0; grid.dim()];
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|flat| {
                grid.unravel(flat, &mut idx);
                for (k, xk) in x.iter_mut().enumerate() {
                    *xk = idx[k] as f64 / grid.shape()[k] as f64;
                }
                f(&x)
            })
            .collect();
        ScalarField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFiniteInput(what))
        }
    }

    pub fn same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "grids {:?} and {:?}",
                self.grid.shape(),
                other.grid.shape()
            )))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField::from_raw(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise `f(self, other)`; grids must agree.
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        self.same_grid(other)?;
        Ok(ScalarField::from_raw(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        self.map(|v| c * v)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |a, b| a + c * b)
    }

    /// Pairwise sum of the samples (round-off grows like `log n`).
    pub fn sum(&self) -> f64 {
        pairwise_sum(&self.values)
    }

    /// Grid average, i.e. the trapezoidal integral over the unit torus.
    pub fn mean(&self) -> Result<f64> {
        self.check_finite("mean")?;
        Ok(self.sum() / self.len() as f64)
    }

    /// Integral over the unit-volume torus.
    pub fn integrate(&self) -> Result<f64> {
        self.mean()
    }

    /// Subtracts the mean, realizing the mean-zero subspace.
    pub fn project_mean_zero(&self) -> Result<ScalarField> {
        let m = self.mean()?;
        Ok(self.map(|v| v - m))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Euclidean norm of the sample vector.
    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Grid inner product `mean(self * other)`.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        self.same_grid(other)?;
        let products: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(pairwise_sum(&products) / self.len() as f64)
    }
}

pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 64 {
        values.iter().sum()
    } else {
        let (lo, hi) = values.split_at(values.len() / 2);
        pairwise_sum(lo) + pairwise_sum(hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> PeriodicGrid {
        PeriodicGrid::cubic(4, 8).unwrap()
    }

    #[test]
    fn constant_mean_and_projection() {
        let f = ScalarField::constant(&grid(), 3.0);
        assert_eq!(f.mean().unwrap(), 3.0);
        assert_eq!(f.project_mean_zero().unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn resolved_mode_has_zero_mean() {
        let f = ScalarField::from_fn(&grid(), |x| (2.0 * PI * x[1]).sin());
        assert!(f.mean().unwrap().abs() < 1e-14);
        let g = ScalarField::from_fn(&grid(), |x| (2.0 * PI * x[2]).cos());
        assert!(g.integrate().unwrap().abs() < 1e-14);
        assert_eq!(ScalarField::constant(&grid(), 1.0).integrate().unwrap(), 1.0);
    }

    #[test]
    fn projection_removes_offset() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x| 1.0 + (2.0 * PI * x[0]).sin());
        let s = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).sin());
        let p = f.project_mean_zero().unwrap();
        assert!(p.sub(&s).unwrap().sup_norm() < 1e-14);
        let pp = p.project_mean_zero().unwrap();
        assert!(pp.sub(&p).unwrap().sup_norm() < 1e-15);
    }

    #[test]
    fn non_finite_rejected() {
        let g = grid();
        let mut v = vec![0.0; g.len()];
        v[5] = f64::NAN;
        assert!(matches!(ScalarField::new(g.clone(), v), Err(Error::NonFiniteInput(_))));
        let mut f = ScalarField::zeros(&g);
        f.values_mut()[0] = f64::INFINITY;
        assert!(matches!(f.mean(), Err(Error::NonFiniteInput(_))));
        assert!(ScalarField::new(g, vec![0.0; 3]).is_err());
    }
}
