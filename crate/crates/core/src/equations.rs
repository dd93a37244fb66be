//! The four reduced equations as numerical operators on periodic fields.
//!
//! Every variant has the form `A B - sum_i a_i^2 = e^F` with
//! `A = 1 + (Laplacian over the A-block)`, `B = 1 + (Laplacian over the
//! B-block)` and `a_i` fixed combinations of mixed second derivatives. The
//! Poisson variant has an empty B-block (`B = 1`) and no cross terms.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{HessianCombo, PeriodicGrid, ScalarField, Spectral};
use crate::lie_hkt::frame::GroupId;
use crate::lie_hkt::poly::{rat, Poly, Rational};
use crate::lie_hkt::reduce::{hess_var, reduce_invariant, Invariance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Variant {
    T4,
    T5,
    T6,
    T7,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::T4, Variant::T5, Variant::T6, Variant::T7];

    pub fn base_dim(self) -> usize {
        match self {
            Variant::T4 => 4,
            Variant::T5 => 5,
            Variant::T6 => 6,
            Variant::T7 => 7,
        }
    }

    /// A (group, invariance) pair whose reduction yields this variant.
    pub fn reduction(self) -> (GroupId, Invariance) {
        match self {
            Variant::T4 => (GroupId::N1, Invariance::T4),
            Variant::T5 => (GroupId::N1, Invariance::T3),
            Variant::T6 => (GroupId::N2, Invariance::T2),
            Variant::T7 => (GroupId::N1, Invariance::S1),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::T4 => "T4",
            Variant::T5 => "T5",
            Variant::T6 => "T6",
            Variant::T7 => "T7",
        };
        f.write_str(s)
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t4" => Ok(Variant::T4),
            "t5" => Ok(Variant::T5),
            "t6" => Ok(Variant::T6),
            "t7" => Ok(Variant::T7),
            _ => Err(Error::Validation {
                field: "equation".into(),
                message: format!("unknown equation `{s}` (expected t4, t5, t6 or t7)"),
            }),
        }
    }
}

/// Index tables of one reduced equation (0-based axes).
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedEquation {
    pub variant: Variant,
    pub base_dim: usize,
    pub a_block: Vec<usize>,
    pub b_block: Vec<usize>,
    /// `a_i = sum c * phi_rs`, with integer coefficients `c`.
    pub cross: Vec<Vec<(i8, usize, usize)>>,
}

impl ReducedEquation {
    pub fn new(variant: Variant) -> Self {
        let a_block = vec![0, 1, 2, 3];
        let (b_block, cross) = match variant {
            Variant::T4 => (vec![], vec![]),
            Variant::T5 => (vec![4], (0..4).map(|i| vec![(1, i, 4)]).collect()),
            Variant::T6 => (
                vec![4, 5],
                vec![
                    vec![(1, 2, 4), (-1, 1, 5)],
                    vec![(1, 3, 4), (-1, 0, 5)],
                    vec![(1, 3, 5), (1, 0, 4)],
                    vec![(1, 2, 5), (1, 1, 4)],
                ],
            ),
            Variant::T7 => (
                vec![4, 5, 6],
                vec![
                    vec![(1, 3, 4), (-1, 0, 5), (-1, 1, 6)],
                    vec![(1, 2, 4), (1, 0, 6), (-1, 1, 5)],
                    vec![(1, 2, 5), (1, 3, 6), (1, 1, 4)],
                    vec![(1, 3, 5), (-1, 2, 6), (1, 0, 4)],
                ],
            ),
        };
        ReducedEquation {
            variant,
            base_dim: variant.base_dim(),
            a_block,
            b_block,
            cross,
        }
    }

    /// The equation's left-hand side as an exact polynomial in the Hessian
    /// symbols, in the representation used by the symbolic reduction.
    pub fn polynomial(&self) -> Poly<Rational> {
        let one = Poly::constant(rat(1));
        let block = |axes: &[usize]| {
            axes.iter()
                .fold(one.clone(), |acc, &r| &acc + &Poly::var(hess_var(r, r)))
        };
        let mut p = &block(&self.a_block) * &block(&self.b_block);
        for combo in &self.cross {
            let a = combo.iter().fold(Poly::zero(), |acc, &(c, r, s)| {
                &acc + &Poly::var(hess_var(r, s)).scale(&rat(c as i64))
            });
            p = &p - &(&a * &a);
        }
        p
    }

    /// Whether the tables agree with the symbolic reduction of the
    /// corresponding HKT equation.
    pub fn matches_symbolic(&self) -> Result<bool> {
        let (group, invariance) = self.variant.reduction();
        let reduced = reduce_invariant(group, invariance)?;
        Ok(reduced.base_dim == self.base_dim && reduced.poly == self.polynomial())
    }

    pub fn check_grid(&self, grid: &PeriodicGrid) -> Result<()> {
        if grid.dim() == self.base_dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{} needs a {}-dimensional grid, got {}",
                self.variant,
                self.base_dim,
                grid.dim()
            )))
        }
    }

    pub fn cross_combo(&self, i: usize) -> HessianCombo {
        HessianCombo(
            self.cross[i]
                .iter()
                .map(|&(c, r, s)| (c as f64, r, s))
                .collect(),
        )
    }

    /// `[Lap_A, Lap_B, a_1, ..]`; `Lap_B` is omitted when the B-block is empty.
    fn combos(&self) -> Vec<HessianCombo> {
        let mut out = vec![HessianCombo::laplacian(&self.a_block)];
        if !self.b_block.is_empty() {
            out.push(HessianCombo::laplacian(&self.b_block));
        }
        out.extend((0..self.cross.len()).map(|i| self.cross_combo(i)));
        out
    }

    pub fn is_poisson(&self) -> bool {
        self.b_block.is_empty()
    }
}

/// Pointwise coefficients `A`, `B`, `a_i` of a state.
#[derive(Clone, Debug)]
pub struct CoefficientFields {
    pub coeff_a: ScalarField,
    pub coeff_b: ScalarField,
    pub cross: Vec<ScalarField>,
}

impl CoefficientFields {
    /// `A B - sum a_i^2`, the Monge-Ampere expression.
    pub fn determinant(&self) -> ScalarField {
        let mut q = self
            .coeff_a
            .mul(&self.coeff_b)
            .expect("coefficient grids agree");
        for a in &self.cross {
            q = q.zip_map(a, |acc, v| acc - v * v).expect("coefficient grids agree");
        }
        q
    }

    /// `sum a_i^2` at one grid point.
    pub fn cross_norm_sq(&self, point: usize) -> f64 {
        self.cross.iter().map(|a| a.values()[point].powi(2)).sum()
    }

    /// Full Laplacian of the potential, `(A - 1) + (B - 1)`.
    pub fn laplacian(&self, eq: &ReducedEquation) -> ScalarField {
        if eq.is_poisson() {
            self.coeff_a.map(|a| a - 1.0)
        } else {
            self.coeff_a
                .zip_map(&self.coeff_b, |a, b| a + b - 2.0)
                .expect("coefficient grids agree")
        }
    }
}

pub fn assemble(eq: &ReducedEquation, phi: &ScalarField) -> Result<CoefficientFields> {
    assemble_with(eq, &Spectral::new(phi.grid()), phi)
}

pub fn assemble_with(eq: &ReducedEquation, spectral: &Spectral, phi: &ScalarField) -> Result<CoefficientFields> {
    eq.check_grid(phi.grid())?;
    phi.check_finite("potential")?;
    let mut fields = spectral.hessian_combos(phi, &eq.combos()).into_iter();
    let coeff_a = fields.next().expect("A-block combo").map(|v| v + 1.0);
    let coeff_b = if eq.is_poisson() {
        ScalarField::constant(phi.grid(), 1.0)
    } else {
        fields.next().expect("B-block combo").map(|v| v + 1.0)
    };
    Ok(CoefficientFields {
        coeff_a,
        coeff_b,
        cross: fields.collect(),
    })
}

/// `A B - sum a_i^2 - e^F` (the Poisson variant reduces to `Lap phi + 1 - e^F`).
pub fn residual(eq: &ReducedEquation, phi: &ScalarField, f: &ScalarField) -> Result<ScalarField> {
    phi.same_grid(f)?;
    f.check_finite("F")?;
    let coeffs = assemble(eq, phi)?;
    residual_from(&coeffs, f)
}

pub fn residual_from(coeffs: &CoefficientFields, f: &ScalarField) -> Result<ScalarField> {
    coeffs.determinant().zip_map(f, |q, fv| q - fv.exp())
}

/// The linearization of the residual at a fixed state, applied matrix-free.
pub struct LinearizedOperator<'a> {
    eq: &'a ReducedEquation,
    spectral: &'a Spectral,
    coeffs: CoefficientFields,
}

pub fn linearize<'a>(
    eq: &'a ReducedEquation,
    spectral: &'a Spectral,
    phi: &ScalarField,
) -> Result<LinearizedOperator<'a>> {
    let coeffs = assemble_with(eq, spectral, phi)?;
    Ok(LinearizedOperator::from_coefficients(eq, spectral, coeffs))
}

impl<'a> LinearizedOperator<'a> {
    pub fn from_coefficients(eq: &'a ReducedEquation, spectral: &'a Spectral, coeffs: CoefficientFields) -> Self {
        LinearizedOperator { eq, spectral, coeffs }
    }

    pub fn coefficients(&self) -> &CoefficientFields {
        &self.coeffs
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.spectral.grid()
    }

    /// `L u = A Lap_B u + B Lap_A u - 2 sum a_i (a_i-combination of u)`.
    pub fn apply(&self, u: &ScalarField) -> Result<ScalarField> {
        u.same_grid(&self.coeffs.coeff_a)?;
        let coeffs = self.spectral.forward(u.values());
        Ok(ScalarField::from_raw(self.grid().clone(), self.apply_spectral(&coeffs)))
    }

    /// `L (Lap^{-1} v)` on mean-zero data, projected back to mean zero; the
    /// right-preconditioned operator of the Krylov solve.
    pub fn apply_preconditioned(&self, v: &[f64]) -> Vec<f64> {
        let mut coeffs = self.spectral.forward(v);
        self.spectral.divide_by_laplacian(&mut coeffs);
        let mut out = self.apply_spectral(&coeffs);
        let mean = out.iter().sum::<f64>() / out.len() as f64;
        out.iter_mut().for_each(|x| *x -= mean);
        out
    }

    /// Mean-zero inverse Laplacian, the preconditioner.
    pub fn precondition(&self, v: &[f64]) -> Vec<f64> {
        self.spectral.inverse_laplacian(v)
    }

    fn apply_spectral(&self, uhat: &[Complex64]) -> Vec<f64> {
        let eq = self.eq;
        let combos = eq.combos();
        let derivs: Vec<Vec<f64>> = combos
            .chunks(2)
            .flat_map(|pair| {
                let a = self.spectral.apply_symbol(uhat, &pair[0]);
                match pair.get(1) {
                    Some(c) => {
                        let (x, y) = self.spectral.inverse_pair(&a, &self.spectral.apply_symbol(uhat, c));
                        vec![x, y]
                    }
                    None => vec![self.spectral.inverse_real(&a)],
                }
            })
            .collect();
        if eq.is_poisson() {
            return derivs.into_iter().next().expect("Laplacian term");
        }
        let (lap_a, lap_b) = (&derivs[0], &derivs[1]);
        let big_a = self.coeffs.coeff_a.values();
        let big_b = self.coeffs.coeff_b.values();
        let mut out: Vec<f64> = (0..lap_a.len())
            .map(|p| big_b[p] * lap_a[p] + big_a[p] * lap_b[p])
            .collect();
        for (a, d) in self.coeffs.cross.iter().zip(&derivs[2..]) {
            for ((o, &ai), &di) in out.iter_mut().zip(a.values()).zip(d) {
                *o -= 2.0 * ai * di;
            }
        }
        out
    }
}

/// Principal symbol of the linearization at one grid point.
#[derive(Clone, Debug)]
pub struct SymbolMatrix {
    pub matrix: DMatrix<f64>,
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
}

impl SymbolMatrix {
    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn is_symmetric(&self) -> bool {
        self.matrix == self.matrix.transpose()
    }
}

pub fn symbol_at(eq: &ReducedEquation, coeffs: &CoefficientFields, point: usize) -> Result<SymbolMatrix> {
    let len = coeffs.coeff_a.len();
    if point >= len {
        return Err(Error::IndexOutOfRange(format!("grid point {point} of {len}")));
    }
    let d = eq.base_dim;
    let a = coeffs.coeff_a.values()[point];
    let b = coeffs.coeff_b.values()[point];
    let mut m = DMatrix::<f64>::zeros(d, d);
    for &r in &eq.a_block {
        m[(r, r)] = b;
    }
    for &r in &eq.b_block {
        m[(r, r)] = a;
    }
    for (combo, field) in eq.cross.iter().zip(&coeffs.cross) {
        let ai = field.values()[point];
        for &(c, r, s) in combo {
            m[(r, s)] -= ai * c as f64;
            m[(s, r)] -= ai * c as f64;
        }
    }
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(SymbolMatrix { matrix: m, eigenvalues })
}

/// `(lambda_-, lambda_+)` of `t^2 - (A+B) t + det` with the discriminant
/// clamped at zero; the flag reports whether clamping occurred.
pub fn lambda_pair(a: f64, b: f64, det: f64) -> (f64, f64, bool) {
    let disc = (a + b).powi(2) - 4.0 * det;
    let clamped = disc < 0.0;
    let root = disc.max(0.0).sqrt();
    (0.5 * (a + b - root), 0.5 * (a + b + root), clamped)
}

/// Extreme eigenvalues of the true symbol at one point, from the
/// closed form: the off-diagonal block has orthogonal columns of squared
/// norm `sum a_i^2`, so the spectrum is `B` together with
/// `(A + B -/+ sqrt((A - B)^2 + 4 sum a_i^2)) / 2`.
pub fn symbol_extremes(eq: &ReducedEquation, a: f64, b: f64, cross_sq: f64) -> (f64, f64) {
    if eq.is_poisson() {
        return (1.0, 1.0);
    }
    let root = ((a - b).powi(2) + 4.0 * cross_sq).sqrt();
    (0.5 * (a + b - root), 0.5 * (a + b + root))
}

/// Minimum over the grid of the smallest eigenvalue of the true symbol.
pub fn min_symbol_eigenvalue(eq: &ReducedEquation, coeffs: &CoefficientFields) -> f64 {
    let (av, bv) = (coeffs.coeff_a.values(), coeffs.coeff_b.values());
    (0..av.len())
        .map(|p| symbol_extremes(eq, av[p], bv[p], coeffs.cross_norm_sq(p)).0)
        .fold(f64::INFINITY, f64::min)
}

/// Strong-ellipticity margins at one point: `e^F - 2(|a2 a3| + |a1 a4|)` for
/// the six-dimensional equation, the smaller of the two positivity
/// determinants for the seven-dimensional one, `None` otherwise.
pub fn strong_margin(eq: &ReducedEquation, a: &[f64], ef: f64) -> Option<f64> {
    if !matches!(eq.variant, Variant::T6 | Variant::T7) {
        return None;
    }
    let s1 = (a[1] * a[2]).abs() + (a[0] * a[3]).abs();
    match eq.variant {
        Variant::T6 => Some(ef - 2.0 * s1),
        Variant::T7 => {
            let s2 = (a[0] * a[2]).abs() + (a[1] * a[3]).abs();
            let s3 = (a[0] * a[1]).abs() + (a[2] * a[3]).abs();
            let m1 = ef * ef - 4.0 * s1 * s1;
            let m2 = ef.powi(3) - 4.0 * ef * (s1 * s1 + s2 * s2 + s3 * s3) - 16.0 * s1 * s2 * s3;
            Some(m1.min(m2))
        }
        Variant::T4 | Variant::T5 => unreachable!(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EllipticityReport {
    pub variant: Variant,
    /// Minimum over the grid of `lambda(phi) = (A+B-sqrt((A+B)^2-4e^F))/2`.
    pub lambda_min: f64,
    /// Maximum over the grid of the matching `lambda_+`.
    pub lambda_plus_max: f64,
    /// Minimum eigenvalue of the true symbol `P(phi)` over the grid.
    pub symbol_lambda_min: f64,
    pub min_a: f64,
    pub min_b: f64,
    pub strong_margin: Option<f64>,
    /// Points where `(A+B)^2 - 4e^F` was negative and clamped to zero.
    pub clamp_count: usize,
    pub elliptic: bool,
    pub symbol_elliptic: bool,
    pub a_positive: bool,
    pub b_positive: bool,
    pub strong_condition: Option<bool>,
}

pub fn ellipticity_report(eq: &ReducedEquation, phi: &ScalarField, f: &ScalarField) -> Result<EllipticityReport> {
    phi.same_grid(f)?;
    let coeffs = assemble(eq, phi)?;
    ellipticity_from(eq, &coeffs, f)
}

pub fn ellipticity_from(eq: &ReducedEquation, coeffs: &CoefficientFields, f: &ScalarField) -> Result<EllipticityReport> {
    coeffs.coeff_a.same_grid(f)?;
    f.check_finite("F")?;
    let (av, bv, fv) = (coeffs.coeff_a.values(), coeffs.coeff_b.values(), f.values());
    let mut r = EllipticityReport {
        variant: eq.variant,
        lambda_min: f64::INFINITY,
        lambda_plus_max: f64::NEG_INFINITY,
        symbol_lambda_min: f64::INFINITY,
        min_a: coeffs.coeff_a.min(),
        min_b: coeffs.coeff_b.min(),
        strong_margin: None,
        clamp_count: 0,
        elliptic: false,
        symbol_elliptic: false,
        a_positive: false,
        b_positive: false,
        strong_condition: None,
    };
    let mut cross = vec![0.0; eq.cross.len()];
    for p in 0..av.len() {
        let ef = fv[p].exp();
        let (lm, lp) = if eq.is_poisson() {
            (1.0, 1.0)
        } else {
            let (lm, lp, clamped) = lambda_pair(av[p], bv[p], ef);
            r.clamp_count += clamped as usize;
            (lm, lp)
        };
        r.lambda_min = r.lambda_min.min(lm);
        r.lambda_plus_max = r.lambda_plus_max.max(lp);
        for (c, field) in cross.iter_mut().zip(&coeffs.cross) {
            *c = field.values()[p];
        }
        let cross_sq: f64 = cross.iter().map(|c| c * c).sum();
        r.symbol_lambda_min = r.symbol_lambda_min.min(symbol_extremes(eq, av[p], bv[p], cross_sq).0);
        if let Some(m) = strong_margin(eq, &cross, ef) {
            r.strong_margin = Some(r.strong_margin.map_or(m, |old: f64| old.min(m)));
        }
    }
    r.elliptic = r.lambda_min > 0.0;
    r.symbol_elliptic = r.symbol_lambda_min > 0.0;
    r.a_positive = r.min_a > 0.0;
    r.b_positive = r.min_b > 0.0;
    r.strong_condition = r.strong_margin.map(|m| m > 0.0);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn tables_match_symbolic_reduction() {
        for v in Variant::ALL {
            assert!(ReducedEquation::new(v).matches_symbolic().unwrap(), "{v}");
        }
    }

    #[test]
    fn flat_state_has_unit_coefficients() {
        for v in Variant::ALL {
            let eq = ReducedEquation::new(v);
            let g = PeriodicGrid::cubic(eq.base_dim, 8).unwrap();
            let c = assemble(&eq, &ScalarField::zeros(&g)).unwrap();
            assert_eq!(c.coeff_a.min(), 1.0);
            assert_eq!(c.coeff_b.max(), 1.0);
            assert!(c.cross.iter().all(|a| a.sup_norm() == 0.0));
            let r = residual(&eq, &ScalarField::zeros(&g), &ScalarField::zeros(&g)).unwrap();
            assert_eq!(r.sup_norm(), 0.0);
        }
    }

    #[test]
    fn t5_cross_term_of_product_mode() {
        let eq = ReducedEquation::new(Variant::T5);
        let g = PeriodicGrid::cubic(5, 8).unwrap();
        let eps = 0.01;
        let phi = ScalarField::from_fn(&g, |x| eps * (2.0 * PI * x[0]).cos() * (2.0 * PI * x[4]).cos());
        let c = assemble(&eq, &phi).unwrap();
        let expected =
            ScalarField::from_fn(&g, |x| 4.0 * PI * PI * eps * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[4]).sin());
        assert!(c.cross[0].sub(&expected).unwrap().sup_norm() < 1e-13);
        assert!(c.cross[1..].iter().all(|a| a.sup_norm() < 1e-14));
    }

    #[test]
    fn zero_potential_residual_is_one_minus_exp() {
        let eq = ReducedEquation::new(Variant::T6);
        let g = PeriodicGrid::cubic(6, 8).unwrap();
        let f = ScalarField::from_fn(&g, |x| 0.3 * (2.0 * PI * x[2]).sin());
        let r = residual(&eq, &ScalarField::zeros(&g), &f).unwrap();
        let expected = f.map(|v| 1.0 - v.exp());
        assert!(r.sub(&expected).unwrap().sup_norm() < 1e-15);
    }

    #[test]
    fn symbol_of_flat_state_is_identity() {
        let eq = ReducedEquation::new(Variant::T7);
        let g = PeriodicGrid::cubic(7, 8).unwrap();
        let c = assemble(&eq, &ScalarField::zeros(&g)).unwrap();
        let s = symbol_at(&eq, &c, 17).unwrap();
        assert_eq!(s.matrix, DMatrix::identity(7, 7));
        assert!(s.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-15));
        assert!(matches!(symbol_at(&eq, &c, g.len()), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn lambda_pair_closed_form() {
        let (lm, lp, clamped) = lambda_pair(3.0, 1.0, 1.0);
        assert!((lm - (4.0 - 12f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((lp - (4.0 + 12f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((lm - 0.2679491924311228).abs() < 1e-12);
        assert!(!clamped);
        assert!(lambda_pair(1.0, 1.0, 1.0 + 1e-15).2);
    }

    #[test]
    fn flat_report() {
        for v in Variant::ALL {
            let eq = ReducedEquation::new(v);
            let g = PeriodicGrid::cubic(eq.base_dim, 8).unwrap();
            let z = ScalarField::zeros(&g);
            let r = ellipticity_report(&eq, &z, &z).unwrap();
            assert_eq!(r.lambda_min, 1.0);
            assert_eq!(r.symbol_lambda_min, 1.0);
            assert!(r.elliptic && r.a_positive && r.b_positive);
            assert_eq!(r.clamp_count, 0);
            assert_eq!(r.strong_condition.is_some(), matches!(v, Variant::T6 | Variant::T7));
            assert!(r.strong_condition.unwrap_or(true));
        }
    }

    #[test]
    fn variant_names_roundtrip() {
        for v in Variant::ALL {
            assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
        }
        assert!("t8".parse::<Variant>().is_err());
    }
}
