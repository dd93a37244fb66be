//! Reduction of `(Omega + d d_{J2} phi)^2 = e^F Omega^2` to a PDE on the base
//! torus for potentials invariant under a torus acting along central fibres.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::forms::{complex_frame, expand_hkt_square, real_part, SymbolTable};
use super::frame::{build_frame, GroupId, X5, Y1, Y2, Y3};
use super::hypercomplex::HypercomplexAction;
use super::poly::{gauss, rat, Gaussian, Monomial, Poly, Rational};
use crate::equations::Variant;
use crate::error::{Error, Result};

/// Fibre torus along which potential and data are invariant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Invariance {
    T4,
    T3,
    T2,
    S1,
}

impl fmt::Display for Invariance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Invariance::T4 => "T4",
            Invariance::T3 => "T3",
            Invariance::T2 => "T2",
            Invariance::S1 => "S1",
        };
        f.write_str(s)
    }
}

/// The HKT potential is twice the potential of the reduced equations; with
/// this scaling the flat point reduces to `A = B = 1`.
pub const POTENTIAL_SCALE: i64 = 2;

/// Variable id of the Hessian symbol `phi_rs` (0-based, order-insensitive).
pub fn hess_var(r: usize, s: usize) -> u16 {
    let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
    (lo * 8 + hi) as u16
}

/// Inverse of [`hess_var`].
pub fn hess_pair(v: u16) -> (usize, usize) {
    ((v / 8) as usize, (v % 8) as usize)
}

/// A reduced equation `P(phi_rs) = e^F` as an exact polynomial in the
/// Hessian symbols of the base coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedPolynomial {
    pub variant: Variant,
    pub base_dim: usize,
    pub poly: Poly<Rational>,
}

fn fibre_coordinates(invariance: Invariance) -> &'static [usize] {
    match invariance {
        Invariance::T4 => &[Y1, Y2, Y3, X5],
        Invariance::T3 => &[Y1, Y2, Y3],
        Invariance::T2 => &[Y2, Y3],
        Invariance::S1 => &[Y1],
    }
}

fn variant_for(group_id: GroupId, invariance: Invariance) -> Result<Variant> {
    match (group_id, invariance) {
        (_, Invariance::T4) => Ok(Variant::T4),
        (_, Invariance::T3) => Ok(Variant::T5),
        (GroupId::N2, Invariance::T2) => Ok(Variant::T6),
        (GroupId::N1, Invariance::S1) => Ok(Variant::T7),
        _ => Err(Error::UnsupportedCombination {
            group: group_id.to_string(),
            invariance: invariance.to_string(),
        }),
    }
}

/// `Z_a Zbar_b` applied to an invariant potential, as Hessian-symbol
/// polynomials in the reduced potential.
pub fn reduced_symbol_table(group_id: GroupId, invariance: Invariance) -> Result<(SymbolTable, usize)> {
    variant_for(group_id, invariance)?;
    let frame = build_frame(group_id);
    let fibre = fibre_coordinates(invariance);

    // base coordinates, labelled in frame order: label r is the coordinate moved by e_r
    let mut base = Vec::new();
    for k in 0..8 {
        let moved: Vec<usize> = (0..8)
            .filter(|&c| frame.constant_component(k, c).is_some_and(|v| !v.is_zero()))
            .collect();
        if let [c] = moved.as_slice() {
            if !fibre.contains(c) && !base.contains(c) {
                base.push(*c);
            }
        }
    }

    // e_k acting on invariant functions: constant combination of base derivatives
    let mut action = [[Rational::zero(); 8]; 8];
    for (k, row) in action.iter_mut().enumerate() {
        for (label, &c) in base.iter().enumerate() {
            row[label] = frame.constant_component(k, c).ok_or_else(|| {
                Error::DomainError(format!("e{} has a non-constant base component", k + 1))
            })?;
        }
    }

    let hc = HypercomplexAction::standard();
    let z = complex_frame(&hc);
    // z[a] and its conjugate as combinations of base derivatives
    let project = |n: usize| -> Vec<Gaussian> {
        (0..base.len())
            .map(|r| {
                (0..8).fold(Gaussian::zero(), |acc, k| {
                    acc + z[n][k] * Gaussian::new(action[k][r], rat(0))
                })
            })
            .collect()
    };
    let holo: Vec<Vec<Gaussian>> = (0..4).map(project).collect();
    let anti: Vec<Vec<Gaussian>> = (4..8).map(project).collect();

    let scale = gauss(POTENTIAL_SCALE, 0);
    let table = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut p = Poly::zero();
            for (r, zr) in holo[a].iter().enumerate() {
                for (s, zs) in anti[b].iter().enumerate() {
                    let c = *zr * *zs * scale;
                    p.add_term(Monomial::var(hess_var(r, s)), c);
                }
            }
            p
        })
    });
    Ok((table, base.len()))
}

/// Reduces the quaternionic Monge-Ampere equation on `N_i` for potentials
/// invariant under `invariance`, normalized so that the flat potential gives 1.
pub fn reduce_invariant(group_id: GroupId, invariance: Invariance) -> Result<ReducedPolynomial> {
    let variant = variant_for(group_id, invariance)?;
    let (table, base_dim) = reduced_symbol_table(group_id, invariance)?;
    let top = expand_hkt_square(&table).top_coefficient();
    let flat = top.coeff(&Monomial::one());
    assert!(!flat.is_zero(), "flat value of the top form vanishes");
    let normalized = top.scale(&(Gaussian::one() / flat));
    let poly = real_part(&normalized).ok_or_else(|| {
        Error::DomainError("reduced equation has non-real coefficients".into())
    })?;
    Ok(ReducedPolynomial {
        variant,
        base_dim,
        poly,
    })
}

impl ReducedPolynomial {
    pub fn total_degree(&self) -> usize {
        self.poly.total_degree()
    }

    /// Evaluates the polynomial for a symmetric Hessian `h[r][s]`.
    pub fn evaluate(&self, hessian: &[Vec<f64>]) -> f64 {
        self.poly
            .terms()
            .map(|(m, c)| {
                let coeff = *c.numer() as f64 / *c.denom() as f64;
                m.vars().iter().fold(coeff, |acc, &v| {
                    let (r, s) = hess_pair(v);
                    acc * hessian[r][s]
                })
            })
            .sum()
    }

    /// Terms as `(coeff, [[r, s], ...])` with 1-based indices.
    pub fn json_terms(&self) -> Vec<(Rational, Vec<[usize; 2]>)> {
        self.poly
            .terms()
            .map(|(m, c)| {
                let mono = m
                    .vars()
                    .iter()
                    .map(|&v| {
                        let (r, s) = hess_pair(v);
                        [r + 1, s + 1]
                    })
                    .collect();
                (*c, mono)
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .json_terms()
            .into_iter()
            .map(|(c, mono)| serde_json::json!({ "coeff": c.to_string(), "monomial": mono }))
            .collect();
        serde_json::json!({ "variant": self.variant.to_string(), "terms": terms })
    }

    /// Expanded LaTeX rendering `... = \mathrm{e}^F`.
    pub fn to_latex(&self) -> String {
        let mut terms: Vec<(&Monomial, &Rational)> = self.poly.terms().collect();
        // quadratic terms first, then linear, then the constant
        terms.sort_by(|a, b| b.0.degree().cmp(&a.0.degree()).then(a.0.cmp(b.0)));
        let mut out = String::new();
        for (i, (m, c)) in terms.iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let factors: String = m
                .vars()
                .iter()
                .map(|&v| {
                    let (r, s) = hess_pair(v);
                    format!("\\phi_{{{}{}}}", r + 1, s + 1)
                })
                .collect();
            if factors.is_empty() {
                out.push_str(&mag.to_string());
            } else {
                if !mag.is_one() {
                    out.push_str(&mag.to_string());
                }
                out.push_str(&factors);
            }
        }
        out.push_str(" = \\mathrm{e}^F");
        out
    }
}
