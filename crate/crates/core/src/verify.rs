//! Manufactured solutions, the normalization identity, estimate audits and
//! comparison of potentials up to additive constants.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::equations::{
    assemble, ellipticity_from, lambda_pair, min_symbol_eigenvalue, CoefficientFields, EllipticityReport,
    ReducedEquation, Variant,
};
use crate::error::{Error, Result};
use crate::fields::{PeriodicGrid, ScalarField, Spectral};

/// RNG seed used when a random seed term omits one.
pub const DEFAULT_RANDOM_SEED: u64 = 20_240_917;
/// Maximum number of amplitude halvings in [`manufacture`].
pub const MAX_HALVINGS: usize = 40;
/// Tolerance of the pass flags in [`audit_estimates`].
pub const AUDIT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// One term of a seed specification.
#[derive(Clone, Debug, PartialEq)]
pub enum SeedTerm {
    /// `amp * prod_j trig_j(2 pi k_j . x)`.
    Product { amplitude: f64, factors: Vec<(Trig, Vec<i64>)> },
    /// Smooth random field with wavenumbers `|k_r| < modes`, scaled to sup-norm `amplitude`.
    Random { modes: usize, amplitude: f64, seed: u64 },
}

/// Sum of seed terms, e.g. `0.02*cos(1,0,0,0,0)*cos(0,0,0,0,1), random(3,0.01,7)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedSpec {
    pub terms: Vec<SeedTerm>,
}

fn split_top_level(s: &str, sep: char) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::SeedSpec(format!("unbalanced `)` in `{s}`")));
                }
            }
            c if c == sep && depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::SeedSpec(format!("unbalanced `(` in `{s}`")));
    }
    parts.push(s[start..].trim());
    Ok(parts)
}

fn call_args<'a>(factor: &'a str, name: &str) -> Option<&'a str> {
    factor
        .strip_prefix(name)?
        .trim_start()
        .strip_prefix('(')?
        .strip_suffix(')')
}

fn parse_number<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::SeedSpec(format!("invalid {what} `{}`", s.trim())))
}

impl std::str::FromStr for SeedSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Err(Error::SeedSpec("empty seed spec".into()));
        }
        let mut terms = Vec::new();
        for term in split_top_level(s, ',')? {
            if let Some(args) = call_args(term, "random") {
                let args: Vec<&str> = args.split(',').collect();
                if !(2..=3).contains(&args.len()) {
                    return Err(Error::SeedSpec(format!("`{term}`: expected random(modes,amplitude[,seed])")));
                }
                let modes: usize = parse_number(args[0], "mode count")?;
                if modes == 0 {
                    return Err(Error::SeedSpec("random: modes must be at least 1".into()));
                }
                terms.push(SeedTerm::Random {
                    modes,
                    amplitude: parse_number(args[1], "amplitude")?,
                    seed: args.get(2).map_or(Ok(DEFAULT_RANDOM_SEED), |a| parse_number(a, "seed"))?,
                });
                continue;
            }
            let mut amplitude = 1.0;
            let mut factors = Vec::new();
            for factor in split_top_level(term, '*')? {
                let trig = [("cos", Trig::Cos), ("sin", Trig::Sin)]
                    .into_iter()
                    .find_map(|(name, t)| call_args(factor, name).map(|a| (t, a)));
                match trig {
                    Some((t, args)) => {
                        let k = args
                            .split(',')
                            .map(|a| parse_number(a, "wavenumber"))
                            .collect::<Result<Vec<i64>>>()?;
                        factors.push((t, k));
                    }
                    None => amplitude *= parse_number::<f64>(factor, "factor")?,
                }
            }
            if factors.is_empty() {
                return Err(Error::SeedSpec(format!("term `{term}` has no cos/sin factor")));
            }
            terms.push(SeedTerm::Product { amplitude, factors });
        }
        Ok(SeedSpec { terms })
    }
}

fn check_band(grid: &PeriodicGrid, k: &[i64]) -> Result<()> {
    if k.len() != grid.dim() {
        return Err(Error::SeedSpec(format!(
            "wavevector of length {} on a {}-dimensional grid",
            k.len(),
            grid.dim()
        )));
    }
    for (a, (&kr, &n)) in k.iter().zip(grid.shape()).enumerate() {
        if kr.unsigned_abs() as usize > n / 4 {
            return Err(Error::SeedSpec(format!(
                "wavenumber {kr} on axis {} exceeds the band limit {} of a {n}-point axis",
                a + 1,
                n / 4
            )));
        }
    }
    Ok(())
}

/// Smooth random mean-zero field: complex normal coefficients weighted by
/// `(1 + |k|^2)^-2` for `|k_r| < modes`, real part, scaled to sup-norm `amplitude`.
pub fn random_field(grid: &PeriodicGrid, modes: usize, amplitude: f64, seed: u64) -> Result<ScalarField> {
    check_band(grid, &vec![modes as i64 - 1; grid.dim()])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::default(); grid.len()];
    let span = 2 * modes - 1;
    let mut k = vec![0i64; grid.dim()];
    let mut idx = vec![0usize; grid.dim()];
    for flat in 0..span.pow(grid.dim() as u32) {
        let mut rem = flat;
        for a in (0..grid.dim()).rev() {
            k[a] = (rem % span) as i64 - (modes as i64 - 1);
            rem /= span;
            idx[a] = k[a].rem_euclid(grid.shape()[a] as i64) as usize;
        }
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let k2: f64 = k.iter().map(|&v| (v * v) as f64).sum();
        coeffs[grid.ravel(&idx)] = Complex64::new(re, im) * (1.0 + k2).powi(-2);
    }
    let values = Spectral::new(grid).inverse_real(&coeffs);
    let field = ScalarField::new(grid.clone(), values)?.project_mean_zero()?;
    let sup = field.sup_norm();
    if sup == 0.0 {
        return Ok(field);
    }
    Ok(field.scale(amplitude / sup))
}

/// Evaluates a seed specification on `grid`, projected to mean zero.
pub fn seed_field(spec: &SeedSpec, grid: &PeriodicGrid) -> Result<ScalarField> {
    let mut total = ScalarField::zeros(grid);
    for term in &spec.terms {
        let field = match term {
            SeedTerm::Product { amplitude, factors } => {
                for (_, k) in factors {
                    check_band(grid, k)?;
                }
                ScalarField::from_fn(grid, |x| {
                    factors.iter().fold(*amplitude, |acc, (t, k)| {
                        let arg = 2.0 * PI * k.iter().zip(x).map(|(&kr, &xr)| kr as f64 * xr).sum::<f64>();
                        acc * match t {
                            Trig::Cos => arg.cos(),
                            Trig::Sin => arg.sin(),
                        }
                    })
                })
            }
            SeedTerm::Random { modes, amplitude, seed } => random_field(grid, *modes, *amplitude, *seed)?,
        };
        total = total.add(&field)?;
    }
    total.project_mean_zero()
}

/// A problem with known solution: `F = log Q(phi_star)`.
#[derive(Clone, Debug)]
pub struct ManufacturedProblem {
    pub variant: Variant,
    pub phi_star: ScalarField,
    pub f: ScalarField,
    /// `min Q(phi_star)` over the grid.
    pub positivity_margin: f64,
    /// Factor applied to the seed, `2^-halvings`.
    pub amplitude_scale: f64,
    pub halvings: usize,
}

/// Builds `F = log(A B - sum a_i^2)` from a seed potential, halving its
/// amplitude until the expression is positive on the elliptic branch.
pub fn manufacture(eq: &ReducedEquation, seed: &ScalarField) -> Result<ManufacturedProblem> {
    eq.check_grid(seed.grid())?;
    seed.check_finite("seed")?;
    let seed = seed.project_mean_zero()?;
    let band: Vec<usize> = seed.grid().shape().iter().map(|n| n / 4).collect();
    let leak = Spectral::new(seed.grid()).energy_beyond(seed.values(), &band);
    if leak > 1e-24 {
        return Err(Error::SeedSpec(format!(
            "seed is not band-limited to a quarter of the grid (energy fraction {leak:.2e} beyond)"
        )));
    }
    let mut scale = 1.0;
    for halvings in 0..=MAX_HALVINGS {
        let phi = seed.scale(scale);
        let coeffs = assemble(eq, &phi)?;
        let q = coeffs.determinant();
        let margin = q.min();
        if margin > 0.0 && min_symbol_eigenvalue(eq, &coeffs) > 0.0 {
            return Ok(ManufacturedProblem {
                variant: eq.variant,
                phi_star: phi,
                f: q.map(f64::ln),
                positivity_margin: margin,
                amplitude_scale: scale,
                halvings,
            });
        }
        scale *= 0.5;
    }
    Err(Error::DegenerateSeed { halvings: MAX_HALVINGS })
}

/// `integral (e^F - 1)` over the unit torus.
pub fn normalization_check(f: &ScalarField) -> Result<f64> {
    f.check_finite("F")?;
    f.map(f64::exp_m1).mean()
}

/// Sup-norm distance of two potentials modulo additive constants.
pub fn compare_mod_constant(phi1: &ScalarField, phi2: &ScalarField) -> Result<f64> {
    let diff = phi1.sub(phi2)?;
    Ok(diff.project_mean_zero()?.sup_norm())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaBand {
    pub lambda_minus_min: f64,
    pub b_min: f64,
    pub lambda_plus_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateAudit {
    /// `min (Lap phi + 2 - 2 e^{F/2})`.
    pub harnack_margin: f64,
    pub min_a: f64,
    pub min_b: f64,
    pub lambda_band: LambdaBand,
    /// Largest pointwise violation of `lambda_- <= B <= lambda_+` (0 if none).
    pub band_violation: f64,
    pub tol: f64,
    pub harnack_pass: bool,
    pub a_pass: bool,
    pub b_pass: bool,
    pub band_pass: bool,
}

impl EstimateAudit {
    pub fn passed(&self) -> bool {
        self.harnack_pass && self.a_pass && self.b_pass && self.band_pass
    }
}

fn harnack_field(eq: &ReducedEquation, coeffs: &CoefficientFields, f: &ScalarField) -> Result<ScalarField> {
    coeffs
        .laplacian(eq)
        .zip_map(f, |lap, fv| lap + 2.0 - 2.0 * (0.5 * fv).exp())
}

fn audit_from(eq: &ReducedEquation, coeffs: &CoefficientFields, f: &ScalarField) -> Result<EstimateAudit> {
    let harnack_margin = harnack_field(eq, coeffs, f)?.min();
    let (av, bv, fv) = (coeffs.coeff_a.values(), coeffs.coeff_b.values(), f.values());
    let mut band = LambdaBand {
        lambda_minus_min: f64::INFINITY,
        b_min: coeffs.coeff_b.min(),
        lambda_plus_max: f64::NEG_INFINITY,
    };
    let mut violation: f64 = 0.0;
    for p in 0..av.len() {
        let (lm, lp) = if eq.is_poisson() {
            (1.0, 1.0)
        } else {
            let (lm, lp, _) = lambda_pair(av[p], bv[p], fv[p].exp());
            (lm, lp)
        };
        band.lambda_minus_min = band.lambda_minus_min.min(lm);
        band.lambda_plus_max = band.lambda_plus_max.max(lp);
        violation = violation.max(lm - bv[p]).max(bv[p] - lp);
    }
    let min_a = coeffs.coeff_a.min();
    let min_b = coeffs.coeff_b.min();
    Ok(EstimateAudit {
        harnack_margin,
        min_a,
        min_b,
        lambda_band: band,
        band_violation: violation,
        tol: AUDIT_TOL,
        harnack_pass: harnack_margin >= -AUDIT_TOL,
        a_pass: min_a > 0.0,
        b_pass: min_b > 0.0,
        band_pass: violation <= AUDIT_TOL,
    })
}

/// Pointwise audit of `2 e^{F/2} <= Lap phi + 2`, `A, B > 0` and
/// `lambda_- <= B <= lambda_+`.
pub fn audit_estimates(eq: &ReducedEquation, phi: &ScalarField, f: &ScalarField) -> Result<EstimateAudit> {
    phi.same_grid(f)?;
    f.check_finite("F")?;
    audit_from(eq, &assemble(eq, phi)?, f)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    fn of(f: &ScalarField) -> Self {
        Range {
            min: f.min(),
            max: f.max(),
        }
    }
}

/// Everything the `audit` command reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub ellipticity: EllipticityReport,
    pub estimates: EstimateAudit,
    pub a: Range,
    pub b: Range,
    pub laplacian_plus_two: Range,
    pub two_exp_half_f: Range,
    pub residual_sup: f64,
    pub normalization: f64,
}

pub fn audit(eq: &ReducedEquation, phi: &ScalarField, f: &ScalarField) -> Result<AuditReport> {
    phi.same_grid(f)?;
    f.check_finite("F")?;
    let coeffs = assemble(eq, phi)?;
    let residual = coeffs.determinant().zip_map(f, |q, fv| q - fv.exp())?;
    Ok(AuditReport {
        ellipticity: ellipticity_from(eq, &coeffs, f)?,
        estimates: audit_from(eq, &coeffs, f)?,
        a: Range::of(&coeffs.coeff_a),
        b: Range::of(&coeffs.coeff_b),
        laplacian_plus_two: Range::of(&coeffs.laplacian(eq).map(|v| v + 2.0)),
        two_exp_half_f: Range::of(&f.map(|v| 2.0 * (0.5 * v).exp())),
        residual_sup: residual.sup_norm(),
        normalization: normalization_check(f)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_products_and_random_terms() {
        let spec: SeedSpec = "0.02*cos(1,0,0,0,0)*sin(0,0,0,0,-1), random(3, 0.01, 7), 2*0.5*cos(0,1,0,0,0)"
            .parse()
            .unwrap();
        assert_eq!(spec.terms.len(), 3);
        assert_eq!(
            spec.terms[0],
            SeedTerm::Product {
                amplitude: 0.02,
                factors: vec![(Trig::Cos, vec![1, 0, 0, 0, 0]), (Trig::Sin, vec![0, 0, 0, 0, -1])]
            }
        );
        assert_eq!(spec.terms[1], SeedTerm::Random { modes: 3, amplitude: 0.01, seed: 7 });
        assert!(matches!(spec.terms[2], SeedTerm::Product { amplitude, .. } if amplitude == 1.0));
    }

    #[test]
    fn rejects_malformed_specs() {
        for bad in ["", "0.1", "cos(1,0", "tan(1,0,0,0)", "random(0,1)", "0.1*cos(a,0,0,0)"] {
            assert!(bad.parse::<SeedSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn band_limit_enforced() {
        let g = PeriodicGrid::cubic(4, 8).unwrap();
        let spec: SeedSpec = "cos(3,0,0,0)".parse().unwrap();
        assert!(matches!(seed_field(&spec, &g), Err(Error::SeedSpec(_))));
        let spec: SeedSpec = "cos(1,0,0)".parse().unwrap();
        assert!(seed_field(&spec, &g).is_err());
    }

    #[test]
    fn random_field_is_reproducible_and_scaled() {
        let g = PeriodicGrid::cubic(5, 8).unwrap();
        let a = random_field(&g, 3, 0.05, 11).unwrap();
        let b = random_field(&g, 3, 0.05, 11).unwrap();
        assert_eq!(a, b);
        assert!((a.sup_norm() - 0.05).abs() < 1e-15);
        assert!(a.mean().unwrap().abs() < 1e-16);
        assert_ne!(a, random_field(&g, 3, 0.05, 12).unwrap());
    }

    #[test]
    fn zero_seed_manufactures_zero_data() {
        let eq = ReducedEquation::new(Variant::T5);
        let g = PeriodicGrid::cubic(5, 8).unwrap();
        let p = manufacture(&eq, &ScalarField::zeros(&g)).unwrap();
        assert_eq!(p.f.sup_norm(), 0.0);
        assert_eq!(p.positivity_margin, 1.0);
        assert_eq!(p.halvings, 0);
    }

    #[test]
    fn large_seed_is_halved() {
        let eq = ReducedEquation::new(Variant::T5);
        let g = PeriodicGrid::cubic(5, 8).unwrap();
        let seed = seed_field(&"cos(1,0,0,0,1)".parse().unwrap(), &g).unwrap();
        let p = manufacture(&eq, &seed).unwrap();
        assert!(p.halvings > 0);
        assert!(p.positivity_margin > 0.0);
        assert_eq!(p.amplitude_scale, 0.5f64.powi(p.halvings as i32));
    }

    #[test]
    fn normalization_of_constants() {
        let g = PeriodicGrid::cubic(4, 8).unwrap();
        assert_eq!(normalization_check(&ScalarField::zeros(&g)).unwrap(), 0.0);
        let v = normalization_check(&ScalarField::constant(&g, 2f64.ln())).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn comparison_ignores_constants() {
        let g = PeriodicGrid::cubic(4, 8).unwrap();
        let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x[1]).sin());
        assert!(compare_mod_constant(&f, &f.map(|v| v + 7.0)).unwrap() < 1e-13);
        assert_eq!(compare_mod_constant(&f, &f).unwrap(), 0.0);
    }

    #[test]
    fn flat_audit_is_equality_case() {
        let eq = ReducedEquation::new(Variant::T5);
        let g = PeriodicGrid::cubic(5, 8).unwrap();
        let z = ScalarField::zeros(&g);
        let a = audit_estimates(&eq, &z, &z).unwrap();
        assert_eq!(a.harnack_margin, 0.0);
        assert_eq!((a.min_a, a.min_b), (1.0, 1.0));
        assert!(a.passed());
    }
}
