//! Fourier transforms and spectral differentiation on the unit torus.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::field::ScalarField;
use super::grid::{IndexCursor, PeriodicGrid};
use crate::error::{Error, Result};

/// Lines gathered per batch when transforming a strided axis.
const BATCH: usize = 64;

/// Linear combination `sum c * d_r d_s` of second partial derivatives
/// (0-based axes).
#[derive(Clone, Debug, PartialEq)]
pub struct HessianCombo(pub Vec<(f64, usize, usize)>);

impl HessianCombo {
    pub fn single(r: usize, s: usize) -> Self {
        HessianCombo(vec![(1.0, r, s)])
    }

    /// Laplacian restricted to `axes`.
    pub fn laplacian(axes: &[usize]) -> Self {
        HessianCombo(axes.iter().map(|&a| (1.0, a, a)).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// FFT plans and wavenumber tables for one grid.
pub struct Spectral {
    grid: PeriodicGrid,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    /// `-(2 pi k)^2` per axis and index.
    second: Vec<Vec<f64>>,
    /// `2 pi k` per axis and index, zero at the Nyquist index.
    first: Vec<Vec<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: &PeriodicGrid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = grid.shape().iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = grid.shape().iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let second = (0..grid.dim())
            .map(|a| {
                (0..grid.shape()[a])
                    .map(|i| {
                        let k = 2.0 * PI * grid.wavenumber(a, i) as f64;
                        -k * k
                    })
                    .collect()
            })
            .collect();
        let first = (0..grid.dim())
            .map(|a| {
                (0..grid.shape()[a])
                    .map(|i| {
                        if grid.is_nyquist(a, i) {
                            0.0
                        } else {
                            2.0 * PI * grid.wavenumber(a, i) as f64
                        }
                    })
                    .collect()
            })
            .collect();
        Spectral {
            grid: grid.clone(),
            forward,
            inverse,
            second,
            first,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    fn transform_axis(&self, data: &mut [Complex64], axis: usize, inverse: bool) {
        let shape = self.grid.shape();
        let n = shape[axis];
        let stride: usize = shape[axis + 1..].iter().product();
        let fft = if inverse {
            &self.inverse[axis]
        } else {
            &self.forward[axis]
        };
        let scratch_len = fft.get_inplace_scratch_len();
        if stride == 1 {
            data.par_chunks_mut(n * BATCH).for_each(|chunk| {
                let mut scratch = vec![Complex64::default(); scratch_len];
                fft.process_with_scratch(chunk, &mut scratch);
            });
            return;
        }
        data.par_chunks_mut(n * stride).for_each(|block| {
            let mut buf = vec![Complex64::default(); n * BATCH];
            let mut scratch = vec![Complex64::default(); scratch_len];
            let mut j0 = 0;
            while j0 < stride {
                let w = BATCH.min(stride - j0);
                for t in 0..n {
                    let row = &block[t * stride + j0..t * stride + j0 + w];
                    for (j, v) in row.iter().enumerate() {
                        buf[j * n + t] = *v;
                    }
                }
                fft.process_with_scratch(&mut buf[..w * n], &mut scratch);
                for t in 0..n {
                    let row = &mut block[t * stride + j0..t * stride + j0 + w];
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = buf[j * n + t];
                    }
                }
                j0 += w;
            }
        });
    }

    /// Fourier coefficients `c_k` with `f(x) = sum_k c_k exp(2 pi i k.x)`.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for axis in 0..self.grid.dim() {
            self.transform_axis(&mut data, axis, false);
        }
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
        data
    }

    /// Synthesizes grid values from coefficients (complex result).
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut data = coeffs.to_vec();
        for axis in 0..self.grid.dim() {
            self.transform_axis(&mut data, axis, true);
        }
        data
    }

    /// Real part of the synthesis.
    pub fn inverse_real(&self, coeffs: &[Complex64]) -> Vec<f64> {
        self.inverse(coeffs).into_iter().map(|v| v.re).collect()
    }

    /// Synthesizes two real fields with Hermitian spectra in one transform.
    pub fn inverse_pair(&self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let packed: Vec<Complex64> = a
            .iter()
            .zip(b)
            .map(|(x, y)| x + Complex64::i() * y)
            .collect();
        let out = self.inverse(&packed);
        (out.iter().map(|v| v.re).collect(), out.iter().map(|v| v.im).collect())
    }

    /// Multiplies `coeffs` by the (real) symbol of `combo`.
    pub fn apply_symbol(&self, coeffs: &[Complex64], combo: &HessianCombo) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); coeffs.len()];
        let mut cursor = IndexCursor::new(self.grid.shape());
        let mut flat = 0;
        while !cursor.done() {
            let idx = &cursor.index;
            let mut sym = 0.0;
            for &(c, r, s) in &combo.0 {
                sym += if r == s {
                    c * self.second[r][idx[r]]
                } else {
                    -c * self.first[r][idx[r]] * self.first[s][idx[s]]
                };
            }
            out[flat] = coeffs[flat] * sym;
            flat += 1;
            cursor.advance();
        }
        out
    }

    /// Evaluates several Hessian combinations of one field, transforming the
    /// field once and pairing the syntheses.
    pub fn hessian_combos(&self, f: &ScalarField, combos: &[HessianCombo]) -> Vec<ScalarField> {
        debug_assert_eq!(f.grid(), &self.grid);
        let coeffs = self.forward(f.values());
        let mut out = Vec::with_capacity(combos.len());
        for pair in combos.chunks(2) {
            let a = self.apply_symbol(&coeffs, &pair[0]);
            if let Some(second) = pair.get(1) {
                let b = self.apply_symbol(&coeffs, second);
                let (va, vb) = self.inverse_pair(&a, &b);
                out.push(ScalarField::from_raw(self.grid.clone(), va));
                out.push(ScalarField::from_raw(self.grid.clone(), vb));
            } else {
                out.push(ScalarField::from_raw(self.grid.clone(), self.inverse_real(&a)));
            }
        }
        out
    }

    pub fn second_partial(&self, f: &ScalarField, r: usize, s: usize) -> Result<ScalarField> {
        let dim = self.grid.dim();
        if r >= dim || s >= dim {
            return Err(Error::IndexOutOfRange(format!("axis pair ({r}, {s}) in dimension {dim}")));
        }
        f.check_finite("second_partial")?;
        Ok(self.hessian_combos(f, &[HessianCombo::single(r, s)]).remove(0))
    }

    /// Divides coefficients by the Laplacian symbol, zeroing the mean mode.
    pub fn divide_by_laplacian(&self, coeffs: &mut [Complex64]) {
        let mut cursor = IndexCursor::new(self.grid.shape());
        let mut flat = 0;
        while !cursor.done() {
            let sym: f64 = cursor
                .index
                .iter()
                .enumerate()
                .map(|(a, &i)| self.second[a][i])
                .sum();
            coeffs[flat] = if sym == 0.0 { Complex64::default() } else { coeffs[flat] / sym };
            flat += 1;
            cursor.advance();
        }
    }

    /// Solves `Laplacian u = rhs` on mean-zero fields; the mean of `rhs` is ignored.
    pub fn inverse_laplacian(&self, rhs: &[f64]) -> Vec<f64> {
        let mut coeffs = self.forward(rhs);
        self.divide_by_laplacian(&mut coeffs);
        self.inverse_real(&coeffs)
    }

    /// Energy fraction of coefficients with `|k_r| > max_k` on some axis.
    pub fn energy_beyond(&self, values: &[f64], max_k: &[usize]) -> f64 {
        let coeffs = self.forward(values);
        let mut cursor = IndexCursor::new(self.grid.shape());
        let (mut total, mut outside) = (0.0, 0.0);
        let mut flat = 0;
        while !cursor.done() {
            let e = coeffs[flat].norm_sqr();
            total += e;
            let beyond = cursor
                .index
                .iter()
                .enumerate()
                .any(|(a, &i)| self.grid.wavenumber(a, i).unsigned_abs() as usize > max_k[a]);
            if beyond {
                outside += e;
            }
            flat += 1;
            cursor.advance();
        }
        if total == 0.0 {
            0.0
        } else {
            outside / total
        }
    }
}

/// `d_r d_s f` by exact Fourier differentiation.
pub fn second_partial(f: &ScalarField, r: usize, s: usize) -> Result<ScalarField> {
    Spectral::new(f.grid()).second_partial(f, r, s)
}

/// All second partials `phi_rs`, `r <= s`.
#[derive(Clone, Debug)]
pub struct HessianStack {
    dim: usize,
    entries: Vec<ScalarField>,
}

impl HessianStack {
    pub fn compute(spectral: &Spectral, f: &ScalarField) -> Result<Self> {
        f.check_finite("hessian")?;
        let dim = f.grid().dim();
        let combos: Vec<HessianCombo> = (0..dim)
            .flat_map(|r| (r..dim).map(move |s| HessianCombo::single(r, s)))
            .collect();
        Ok(HessianStack {
            dim,
            entries: spectral.hessian_combos(f, &combos),
        })
    }

    pub fn get(&self, r: usize, s: usize) -> &ScalarField {
        let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
        // rows before `lo` hold dim, dim-1, ... entries
        let offset: usize = (0..lo).map(|i| self.dim - i).sum();
        &self.entries[offset + hi - lo]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Spectral interpolation onto `target`; modes not representable on both
/// grids, including Nyquist modes, are dropped.
pub fn resample(f: &ScalarField, target: &PeriodicGrid) -> Result<ScalarField> {
    let source = f.grid();
    if source.dim() != target.dim() {
        return Err(Error::DimensionMismatch(format!(
            "cannot resample {}-dimensional field onto {}-dimensional grid",
            source.dim(),
            target.dim()
        )));
    }
    if source == target {
        return Ok(f.clone());
    }
    let coeffs = Spectral::new(source).forward(f.values());
    let mut out = vec![Complex64::default(); target.len()];
    let mut cursor = IndexCursor::new(source.shape());
    let mut dst = vec![0usize; source.dim()];
    let mut flat = 0;
    while !cursor.done() {
        let mut keep = true;
        for a in 0..source.dim() {
            let k = source.wavenumber(a, cursor.index[a]);
            let limit = (source.shape()[a].min(target.shape()[a]) / 2) as i64;
            if k.abs() >= limit {
                keep = false;
                break;
            }
            let n = target.shape()[a] as i64;
            dst[a] = k.rem_euclid(n) as usize;
        }
        if keep {
            out[target.ravel(&dst)] = coeffs[flat];
        }
        flat += 1;
        cursor.advance();
    }
    let values = Spectral::new(target).inverse_real(&out);
    ScalarField::new(target.clone(), values)
}
