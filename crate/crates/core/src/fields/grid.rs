use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on the unit-period torus `T^d`, `d` in 4..=7.
///
/// Point `j` along an axis with `n` points sits at `x = j / n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodicGrid {
    shape: Vec<usize>,
}

pub const MIN_DIM: usize = 4;
pub const MAX_DIM: usize = 7;
pub const MIN_POINTS: usize = 8;

impl PeriodicGrid {
    pub fn new(shape: Vec<usize>) -> Result<Self> {
        if !(MIN_DIM..=MAX_DIM).contains(&shape.len()) {
            return Err(Error::InvalidGrid(format!(
                "dimension {} outside {MIN_DIM}..={MAX_DIM}",
                shape.len()
            )));
        }
        if let Some(n) = shape.iter().find(|&&n| n < MIN_POINTS || n % 2 != 0) {
            return Err(Error::InvalidGrid(format!(
                "axis length {n} must be even and at least {MIN_POINTS}"
            )));
        }
        Ok(PeriodicGrid { shape })
    }

    /// `n` points along each of `dim` axes.
    pub fn cubic(dim: usize, n: usize) -> Result<Self> {
        Self::new(vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major strides (last axis contiguous).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dim()];
        for k in (0..self.dim().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.shape[k + 1];
        }
        strides
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        1.0 / self.shape[axis] as f64
    }

    /// Multi-index of flat position `flat`.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for k in (0..self.dim()).rev() {
            out[k] = flat % self.shape[k];
            flat /= self.shape[k];
        }
    }

    pub fn ravel(&self, index: &[usize]) -> usize {
        index
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Coordinates of flat position `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0; self.dim()];
        self.unravel(flat, &mut idx);
        idx.iter()
            .zip(&self.shape)
            .map(|(&i, &n)| i as f64 / n as f64)
            .collect()
    }

    /// Signed wavenumber of spectral index `i` along `axis`; the Nyquist
    /// index `n/2` reports `n/2`.
    pub fn wavenumber(&self, axis: usize, i: usize) -> i64 {
        let n = self.shape[axis];
        if i <= n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    pub fn is_nyquist(&self, axis: usize, i: usize) -> bool {
        i == self.shape[axis] / 2
    }
}

/// Visits every multi-index in row-major order.
pub(crate) struct IndexCursor {
    shape: Vec<usize>,
    pub index: Vec<usize>,
    done: bool,
}

impl IndexCursor {
    pub fn new(shape: &[usize]) -> Self {
        IndexCursor {
            shape: shape.to_vec(),
            index: vec![0; shape.len()],
            done: shape.iter().any(|&n| n == 0),
        }
    }

    pub fn done(&self) -> bool {
        self.done
    }

    pub fn advance(&mut self) {
        for k in (0..self.shape.len()).rev() {
            self.index[k] += 1;
            if self.index[k] < self.shape[k] {
                return;
            }
            self.index[k] = 0;
        }
        self.done = true;
    }
}
