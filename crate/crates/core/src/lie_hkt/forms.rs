//! Exterior algebra on the complex coframe and the expansion of
//! `(Omega + d d_{J2} phi)^2`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::hypercomplex::HypercomplexAction;
use super::poly::{gauss, rat, solve_exact, Gaussian, Poly, Rational};

/// Generator ids: `0..4` are `zeta^1..zeta^4`, `4..8` are their conjugates.
pub const ZETA: [u8; 4] = [0, 1, 2, 3];
pub const ZETA_BAR: [u8; 4] = [4, 5, 6, 7];

/// Polynomial coefficients over the formal symbols `W_ab = Z_a Zbar_b (phi)`.
pub type SymbolPoly = Poly<Gaussian>;

/// Table `W[a][b]` (0-based) of coefficient polynomials.
pub type SymbolTable = [[SymbolPoly; 4]; 4];

/// Variable id of the formal symbol `W_ab` (0-based indices).
pub fn w_var(a: usize, b: usize) -> u16 {
    (4 * a + b) as u16
}

/// The sixteen independent formal symbols.
pub fn formal_symbols() -> SymbolTable {
    std::array::from_fn(|a| std::array::from_fn(|b| Poly::var(w_var(a, b))))
}

/// Sum of terms `coeff * zeta^I` over strictly increasing multi-indices `I`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FormExpansion {
    terms: BTreeMap<Vec<u8>, SymbolPoly>,
}

/// Sorts `idx` in place and returns the permutation sign, or `None` when a
/// generator repeats.
fn canonicalize(idx: &mut [u8]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

impl FormExpansion {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `coeff * g_{i1} ^ ... ^ g_{ik}` for an arbitrary ordering of generators.
    pub fn monomial(coeff: SymbolPoly, generators: &[u8]) -> Self {
        let mut idx = generators.to_vec();
        let mut out = Self::zero();
        if let Some(sign) = canonicalize(&mut idx) {
            out.add_term(idx, coeff.scale(&gauss(sign, 0)));
        }
        out
    }

    pub fn generator(g: u8) -> Self {
        Self::monomial(Poly::constant(Gaussian::one()), &[g])
    }

    fn add_term(&mut self, idx: Vec<u8>, coeff: SymbolPoly) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(idx.clone()).or_default();
        let sum = &*entry + &coeff;
        if sum.is_zero() {
            self.terms.remove(&idx);
        } else {
            *entry = sum;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (idx, c) in &other.terms {
            out.add_term(idx.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &SymbolPoly) -> Self {
        let mut out = Self::zero();
        for (idx, v) in &self.terms {
            out.add_term(idx.clone(), v * c);
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ia, ca) in &self.terms {
            for (ib, cb) in &other.terms {
                let mut idx: Vec<u8> = ia.iter().chain(ib).copied().collect();
                if let Some(sign) = canonicalize(&mut idx) {
                    out.add_term(idx, (ca * cb).scale(&gauss(sign, 0)));
                }
            }
        }
        out
    }

    /// Coefficient of the canonical (increasing) multi-index.
    pub fn coefficient(&self, idx: &[u8]) -> SymbolPoly {
        self.terms.get(idx).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &SymbolPoly)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// All multi-indices stored are strictly increasing.
    pub fn is_canonical(&self) -> bool {
        self.terms.keys().all(|k| k.windows(2).all(|w| w[0] < w[1]))
    }

    /// Coefficient of `zeta^1234`.
    pub fn top_coefficient(&self) -> SymbolPoly {
        self.coefficient(&ZETA)
    }
}

/// Complex vectors in the real frame basis `e1..e8`: `Z_a = e_{2a-1} - i J1 e_{2a-1}`
/// followed by the conjugates.
pub fn complex_frame(hc: &HypercomplexAction) -> [[Gaussian; 8]; 8] {
    let j1 = hc.get(1);
    std::array::from_fn(|n| {
        let a = n % 4;
        let conj = if n < 4 { -1 } else { 1 };
        std::array::from_fn(|k| {
            let real = if k == 2 * a { 1 } else { 0 };
            let imag = conj * j1[k][2 * a] as i64;
            gauss(real, imag)
        })
    })
}

/// Covectors dual to [`complex_frame`]: row `n` is `zeta^{n+1}` (n < 4) or
/// its conjugate, written in the real coframe `e^1..e^8`.
pub fn complex_coframe(hc: &HypercomplexAction) -> [[Gaussian; 8]; 8] {
    let frame = complex_frame(hc);
    // columns of `basis` are the frame vectors; its inverse has the dual rows
    let basis: Vec<Vec<Gaussian>> = (0..8).map(|k| (0..8).map(|n| frame[n][k]).collect()).collect();
    let id: Vec<Vec<Gaussian>> = (0..8)
        .map(|i| (0..8).map(|j| if i == j { Gaussian::one() } else { Gaussian::zero() }).collect())
        .collect();
    let inv = solve_exact(&basis, &id).expect("complex frame is a basis");
    std::array::from_fn(|n| std::array::from_fn(|k| inv[n][k]))
}

fn pair(covector: &[Gaussian; 8], vector: &[Gaussian; 8]) -> Gaussian {
    covector
        .iter()
        .zip(vector)
        .fold(Gaussian::zero(), |acc, (a, b)| acc + a * b)
}

/// `T[c][b]` with `J2 zetabar^c = sum_b T[c][b] zeta^b`, where `J2` acts on
/// one-forms by `(J2 alpha)(X) = -alpha(J2 X)`.
pub fn j2_on_antiholomorphic(hc: &HypercomplexAction) -> [[Gaussian; 4]; 4] {
    let frame = complex_frame(hc);
    let coframe = complex_coframe(hc);
    let j2 = hc.get(2);
    std::array::from_fn(|c| {
        let alpha = coframe[4 + c];
        // alpha o J2 as a covector: (alpha o J2)_k = sum_m alpha_m J2[m][k]
        let pulled: [Gaussian; 8] = std::array::from_fn(|k| {
            (0..8).fold(Gaussian::zero(), |acc, m| acc + alpha[m] * gauss(j2[m][k] as i64, 0))
        });
        let image: [Gaussian; 8] = pulled.map(|v| -v);
        for zbar in &frame[4..] {
            assert!(pair(&image, zbar).is_zero(), "J2 maps (0,1)-forms to (1,0)-forms");
        }
        std::array::from_fn(|b| pair(&image, &frame[b]))
    })
}

/// `Omega = 2 (zeta^12 + zeta^34)`.
pub fn hkt_form() -> FormExpansion {
    let two = Poly::constant(gauss(2, 0));
    FormExpansion::monomial(two.clone(), &[ZETA[0], ZETA[1]])
        .add(&FormExpansion::monomial(two, &[ZETA[2], ZETA[3]]))
}

/// `d d_{J2} phi = d (J2 dbar phi) = sum_{a,c} Z_a Zbar_c(phi) zeta^a ^ J2 zetabar^c`
/// for left-invariant `zeta^a`, which are closed for an Abelian structure.
pub fn ddbar_j2(hc: &HypercomplexAction, w: &SymbolTable) -> FormExpansion {
    let t = j2_on_antiholomorphic(hc);
    let mut out = FormExpansion::zero();
    for a in 0..4 {
        for c in 0..4 {
            for (b, tcb) in t[c].iter().enumerate() {
                if tcb.is_zero() {
                    continue;
                }
                let coeff = w[a][c].scale(tcb);
                out = out.add(&FormExpansion::monomial(coeff, &[ZETA[a], ZETA[b]]));
            }
        }
    }
    out
}

/// `(Omega + d d_{J2} phi)^2` for the given table of `Z_a Zbar_b (phi)`.
pub fn expand_hkt_square(w: &SymbolTable) -> FormExpansion {
    let hc = HypercomplexAction::standard();
    let form = hkt_form().add(&ddbar_j2(&hc, w));
    form.wedge(&form)
}

/// Real part of a Gaussian polynomial, or `None` if some coefficient has a
/// nonzero imaginary part.
pub fn real_part(p: &SymbolPoly) -> Option<Poly<Rational>> {
    if p.terms().any(|(_, c)| !c.im.is_zero()) {
        return None;
    }
    Some(p.map_coeffs(|c| c.re))
}

pub fn constant_value(p: &SymbolPoly) -> Option<Gaussian> {
    p.as_constant()
}

pub fn gaussian_from(r: Rational) -> Gaussian {
    Gaussian::new(r, rat(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(a: usize, b: usize) -> SymbolPoly {
        Poly::var(w_var(a - 1, b - 1))
    }

    fn c(n: i64) -> SymbolPoly {
        Poly::constant(gauss(n, 0))
    }

    #[test]
    fn wedge_anticommutes_on_generators() {
        for a in 0..8u8 {
            for b in 0..8u8 {
                let ab = FormExpansion::generator(a).wedge(&FormExpansion::generator(b));
                let ba = FormExpansion::generator(b).wedge(&FormExpansion::generator(a));
                assert_eq!(ab.add(&ba), FormExpansion::zero());
                assert!(ab.is_canonical());
            }
        }
        let two = FormExpansion::generator(0).wedge(&FormExpansion::generator(1));
        let three = FormExpansion::generator(2)
            .wedge(&FormExpansion::generator(3))
            .wedge(&FormExpansion::generator(4));
        // (-1)^{2*3} = +1
        assert_eq!(two.wedge(&three), three.wedge(&two));
        let one = FormExpansion::generator(5);
        // (-1)^{1*3} = -1
        assert_eq!(one.wedge(&three).add(&three.wedge(&one)), FormExpansion::zero());
    }

    #[test]
    fn j2_maps_conjugate_coframe() {
        let t = j2_on_antiholomorphic(&HypercomplexAction::standard());
        // J2 zetabar^1 = zeta^2, J2 zetabar^2 = -zeta^1, J2 zetabar^3 = zeta^4, J2 zetabar^4 = -zeta^3
        let expected = [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]];
        for (row, exp) in t.iter().zip(expected) {
            for (v, e) in row.iter().zip(exp) {
                assert_eq!(*v, gauss(e, 0));
            }
        }
    }

    #[test]
    fn ddbar_matches_displayed_components() {
        let f = ddbar_j2(&HypercomplexAction::standard(), &formal_symbols());
        assert_eq!(f.coefficient(&[0, 1]), &w(1, 1) + &w(2, 2));
        assert_eq!(f.coefficient(&[0, 2]), &w(3, 2) - &w(1, 4));
        assert_eq!(f.coefficient(&[0, 3]), &w(4, 2) + &w(1, 3));
        assert_eq!(f.coefficient(&[1, 2]), -&(&w(3, 1) + &w(2, 4)));
        assert_eq!(f.coefficient(&[1, 3]), &w(2, 3) - &w(4, 1));
        assert_eq!(f.coefficient(&[2, 3]), &w(3, 3) + &w(4, 4));
    }

    #[test]
    fn flat_square_is_eight() {
        let zero: SymbolTable = std::array::from_fn(|_| std::array::from_fn(|_| Poly::zero()));
        let sq = expand_hkt_square(&zero);
        assert_eq!(sq.top_coefficient(), c(8));
        assert_eq!(sq.terms().count(), 1);
    }

    #[test]
    fn diagonal_symbols_factor() {
        let table: SymbolTable =
            std::array::from_fn(|a| std::array::from_fn(|b| if a == b { w(a + 1, b + 1) } else { Poly::zero() }));
        let top = expand_hkt_square(&table).top_coefficient();
        let expected = (&(&(&w(1, 1) + &w(2, 2)) + &c(2)) * &(&(&w(3, 3) + &w(4, 4)) + &c(2))).scale(&gauss(2, 0));
        assert_eq!(top, expected);
    }
}
