//! Left-invariant frames on the nilpotent groups N1, N2, N3.
//!
//! Each group is realized as a matrix group in global coordinates
//! `(x1, x2, x3, x4, y1, y2, y3, x5)`. Left-invariant coordinate fields are
//! read off the group law `g * h` by differentiating in `h` at the identity,
//! and the frame `e1..e8` is a fixed signed scaling of those fields chosen so
//! that the brackets match the structure equations of each group.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::poly::{rat, solve_exact, Monomial, Poly, Rational};

/// Global coordinate names, in variable-id order.
pub const COORD_NAMES: [&str; 8] = ["x1", "x2", "x3", "x4", "y1", "y2", "y3", "x5"];

pub const X1: usize = 0;
pub const X2: usize = 1;
pub const X3: usize = 2;
pub const X4: usize = 3;
pub const Y1: usize = 4;
pub const Y2: usize = 5;
pub const Y3: usize = 6;
pub const X5: usize = 7;

/// Variable id of the primed (right factor) copy of a coordinate.
const fn primed(c: usize) -> u16 {
    (c + 8) as u16
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupId {
    N1,
    N2,
    N3,
}

impl GroupId {
    pub const ALL: [GroupId; 3] = [GroupId::N1, GroupId::N2, GroupId::N3];
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GroupId::N1 => "N1",
            GroupId::N2 => "N2",
            GroupId::N3 => "N3",
        };
        f.write_str(s)
    }
}

/// A vector field `sum_c V^c d/dc` with polynomial components over the
/// global coordinates.
pub type VectorField = [Poly<Rational>; 8];

/// Lie brackets of the frame, `[e_i, e_j] = sum_k c_ijk e_k` (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureConstants {
    pub group_id: GroupId,
    pub brackets: BTreeMap<(usize, usize), [Rational; 8]>,
}

impl StructureConstants {
    /// The bracket list of each group, with every antisymmetric partner filled in.
    pub fn reference(group_id: GroupId) -> Self {
        // (i, j, k, sign): [e_i, e_j] = sign * e_k, 1-based as usually written
        let list: &[(usize, usize, usize, i64)] = match group_id {
            GroupId::N1 => &[(1, 2, 5, 1), (3, 4, 5, -1)],
            GroupId::N2 => &[(1, 3, 6, 1), (2, 4, 6, 1), (1, 4, 7, 1), (2, 3, 7, -1)],
            GroupId::N3 => &[
                (1, 2, 5, 1),
                (3, 4, 5, -1),
                (1, 3, 6, 1),
                (2, 4, 6, 1),
                (1, 4, 7, 1),
                (2, 3, 7, -1),
            ],
        };
        let mut brackets = BTreeMap::new();
        for i in 0..8 {
            for j in 0..8 {
                brackets.insert((i, j), zero8());
            }
        }
        for &(i, j, k, s) in list {
            brackets.get_mut(&(i - 1, j - 1)).unwrap()[k - 1] = rat(s);
            brackets.get_mut(&(j - 1, i - 1)).unwrap()[k - 1] = rat(-s);
        }
        StructureConstants { group_id, brackets }
    }

    pub fn bracket(&self, i: usize, j: usize) -> &[Rational; 8] {
        &self.brackets[&(i, j)]
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..8).all(|i| {
            (0..8).all(|j| {
                let a = self.bracket(i, j);
                let b = self.bracket(j, i);
                a.iter().zip(b).all(|(x, y)| *x == -*y)
            })
        })
    }

    /// `[e_i, [e_j, e_k]] = 0` for all triples.
    pub fn is_two_step_nilpotent(&self) -> bool {
        for i in 0..8 {
            for j in 0..8 {
                for k in 0..8 {
                    let inner = self.bracket(j, k);
                    let mut outer = zero8();
                    for (m, c) in inner.iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        for (n, d) in self.bracket(i, m).iter().enumerate() {
                            outer[n] += *c * *d;
                        }
                    }
                    if outer.iter().any(|v| !v.is_zero()) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Only the central directions `e5..e8` occur as bracket values.
    pub fn values_in_centre(&self) -> bool {
        self.brackets.values().all(|v| v[..4].iter().all(Zero::is_zero))
    }
}

fn zero8() -> [Rational; 8] {
    std::array::from_fn(|_| Rational::zero())
}

/// Eight left-invariant vector fields in global coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateFrame {
    pub group_id: GroupId,
    pub frame: [VectorField; 8],
}

type Mat = Vec<Vec<Poly<Rational>>>;

fn zero_mat(n: usize) -> Mat {
    vec![vec![Poly::zero(); n]; n]
}

fn identity(n: usize) -> Mat {
    let mut m = zero_mat(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Poly::constant(Rational::one());
    }
    m
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = zero_mat(n);
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[k][j].is_zero() {
                    out[i][j] = &out[i][j] + &(&a[i][k] * &b[k][j]);
                }
            }
        }
    }
    out
}

/// Real 2x2 block of left multiplication by `a + i b`.
fn complex_block(a: &Poly<Rational>, b: &Poly<Rational>) -> [[Poly<Rational>; 2]; 2] {
    [[a.clone(), -b], [b.clone(), a.clone()]]
}

/// Real 4x4 block of left multiplication by the quaternion `a + b i + c j + d k`.
fn quaternion_block(q: [&Poly<Rational>; 4]) -> [[Poly<Rational>; 4]; 4] {
    let [a, b, c, d] = q;
    [
        [a.clone(), -b, -c, -d],
        [b.clone(), a.clone(), -d, c.clone()],
        [c.clone(), d.clone(), a.clone(), -b],
        [d.clone(), -c, b.clone(), a.clone()],
    ]
}

fn set_block<const N: usize>(m: &mut Mat, bi: usize, bj: usize, block: [[Poly<Rational>; N]; N]) {
    for (r, row) in block.into_iter().enumerate() {
        for (c, v) in row.into_iter().enumerate() {
            m[bi * N + r][bj * N + c] = v;
        }
    }
}

/// Real matrix representation of the Heisenberg factor at the point with
/// coordinates `c` (indexed like [`COORD_NAMES`]).
fn heisenberg_matrix(group_id: GroupId, c: &[Poly<Rational>]) -> Mat {
    match group_id {
        GroupId::N1 => {
            let mut m = identity(4);
            m[0][1] = c[X1].clone();
            m[0][2] = c[X4].clone();
            m[0][3] = c[Y1].clone();
            m[1][3] = c[X3].clone();
            m[2][3] = c[X2].clone();
            m
        }
        GroupId::N2 => {
            let mut m = identity(6);
            set_block(&mut m, 0, 1, complex_block(&c[X1], &c[X2]));
            set_block(&mut m, 1, 2, complex_block(&c[X4], &c[X3]));
            set_block(&mut m, 0, 2, complex_block(&c[Y3], &c[Y2]));
            m
        }
        GroupId::N3 => {
            let mut m = identity(12);
            // q = x1 + x4 i + x3 j + x2 k, h = y3 i + y2 j + y1 k
            set_block(&mut m, 0, 1, quaternion_block([&c[X1], &c[X4], &c[X3], &c[X2]]));
            let neg: Vec<Poly<Rational>> = c.iter().map(|p| -p).collect();
            set_block(&mut m, 1, 2, quaternion_block([&neg[X1], &c[X4], &c[X3], &c[X2]]));
            let norm = [X1, X2, X3, X4]
                .iter()
                .fold(Poly::zero(), |acc, &k| &acc + &(&c[k] * &c[k]));
            let re = norm.scale(&Rational::new(-1, 2));
            set_block(&mut m, 0, 2, quaternion_block([&re, &c[Y3], &c[Y2], &c[Y1]]));
            m
        }
    }
}

/// Coordinates of the product `g * h` as polynomials in the coordinates of
/// `g` (variables 0..8) and `h` (variables 8..16).
pub fn group_law(group_id: GroupId) -> [Poly<Rational>; 8] {
    let g: Vec<Poly<Rational>> = (0..8).map(|c| Poly::var(c as u16)).collect();
    let h: Vec<Poly<Rational>> = (0..8).map(|c| Poly::var(primed(c))).collect();
    let p = matmul(&heisenberg_matrix(group_id, &g), &heisenberg_matrix(group_id, &h));
    let additive = |k: usize| &g[k] + &h[k];
    match group_id {
        GroupId::N1 => [
            p[0][1].clone(),
            p[2][3].clone(),
            p[1][3].clone(),
            p[0][2].clone(),
            p[0][3].clone(),
            additive(Y2),
            additive(Y3),
            additive(X5),
        ],
        GroupId::N2 => [
            p[0][2].clone(),
            p[1][2].clone(),
            p[3][4].clone(),
            p[2][4].clone(),
            additive(Y1),
            p[1][4].clone(),
            p[0][4].clone(),
            additive(X5),
        ],
        GroupId::N3 => [
            p[0][4].clone(),
            p[3][4].clone(),
            p[2][4].clone(),
            p[1][4].clone(),
            p[3][8].clone(),
            p[2][8].clone(),
            p[1][8].clone(),
            additive(X5),
        ],
    }
}

/// Left-invariant field generated by moving coordinate `c` at the identity.
fn left_invariant_field(law: &[Poly<Rational>; 8], c: usize) -> VectorField {
    std::array::from_fn(|j| law[j].derivative(primed(c)).drop_vars(|v| v >= 8))
}

/// Frame member `e_k` as `(coordinate field, scale)`.
fn frame_table(group_id: GroupId) -> [(usize, i64); 8] {
    match group_id {
        // the Heisenberg pairs of H_1(2) are (x1, x3) and (x2, x4)
        GroupId::N1 => [(X1, 1), (X3, 1), (X2, 1), (X4, 1), (Y1, 1), (Y2, 1), (Y3, 1), (X5, 1)],
        GroupId::N2 => [(X1, 1), (X2, 1), (X3, 1), (X4, 1), (Y1, 1), (Y2, 1), (Y3, 1), (X5, 1)],
        GroupId::N3 => [(X1, 1), (X2, 1), (X3, 1), (X4, 1), (Y1, 2), (Y2, 2), (Y3, 2), (X5, 1)],
    }
}

pub fn build_frame(group_id: GroupId) -> CoordinateFrame {
    let law = group_law(group_id);
    let table = frame_table(group_id);
    let frame = std::array::from_fn(|k| {
        let (coord, scale) = table[k];
        let field = left_invariant_field(&law, coord);
        std::array::from_fn(|j| field[j].scale(&rat(scale)))
    });
    CoordinateFrame { group_id, frame }
}

/// `[V, W]^j = V^i d_i W^j - W^i d_i V^j`.
pub fn lie_bracket(v: &VectorField, w: &VectorField) -> VectorField {
    std::array::from_fn(|j| {
        let mut acc = Poly::zero();
        for i in 0..8 {
            let var = i as u16;
            acc = &acc + &(&v[i] * &w[j].derivative(var));
            acc = &acc - &(&w[i] * &v[j].derivative(var));
        }
        acc
    })
}

impl CoordinateFrame {
    /// Frame components at the identity, as an 8x8 matrix (row = coordinate).
    fn at_identity(&self) -> Vec<Vec<Rational>> {
        (0..8)
            .map(|c| {
                (0..8)
                    .map(|k| self.frame[k][c].coeff(&Monomial::one()))
                    .collect()
            })
            .collect()
    }

    /// Expresses every bracket `[e_i, e_j]` in the frame. Returns `None` if
    /// some bracket is not a constant combination of frame members.
    pub fn structure_constants(&self) -> Option<StructureConstants> {
        let basis = self.at_identity();
        let mut brackets = BTreeMap::new();
        for i in 0..8 {
            for j in 0..8 {
                let b = lie_bracket(&self.frame[i], &self.frame[j]);
                let rhs: Vec<Vec<Rational>> = (0..8)
                    .map(|c| vec![b[c].coeff(&Monomial::one())])
                    .collect();
                let coeffs = solve_exact(&basis, &rhs)?;
                let coeffs: [Rational; 8] = std::array::from_fn(|k| coeffs[k][0]);
                // the bracket must equal the combination identically, not only at the identity
                for c in 0..8 {
                    let mut comb = Poly::zero();
                    for (k, ck) in coeffs.iter().enumerate() {
                        comb = &comb + &self.frame[k][c].scale(ck);
                    }
                    if comb != b[c] {
                        return None;
                    }
                }
                brackets.insert((i, j), coeffs);
            }
        }
        Some(StructureConstants {
            group_id: self.group_id,
            brackets,
        })
    }

    /// Components of `e_k` along the central directions are constant.
    pub fn central_components_constant(&self) -> bool {
        (4..8).all(|k| self.frame[k].iter().all(|p| p.as_constant().is_some()))
    }

    /// Coefficient of `d/d(coord)` in `e_k`, provided it is constant.
    pub fn constant_component(&self, k: usize, coord: usize) -> Option<Rational> {
        self.frame[k][coord].as_constant()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n1_brackets() {
        let sc = build_frame(GroupId::N1).structure_constants().unwrap();
        assert_eq!(sc.bracket(0, 1)[4], rat(1));
        assert_eq!(sc.bracket(2, 3)[4], rat(-1));
        assert_eq!(sc, StructureConstants::reference(GroupId::N1));
    }

    #[test]
    fn n3_brackets() {
        let sc = build_frame(GroupId::N3).structure_constants().unwrap();
        assert_eq!(sc.bracket(0, 3)[6], rat(1));
        assert_eq!(sc.bracket(1, 2)[6], rat(-1));
        assert_eq!(sc, StructureConstants::reference(GroupId::N3));
    }

    #[test]
    fn centre_is_abelian() {
        for g in GroupId::ALL {
            let sc = build_frame(g).structure_constants().unwrap();
            for i in 4..8 {
                for j in 4..8 {
                    assert!(sc.bracket(i, j).iter().all(Zero::is_zero));
                }
            }
        }
    }

    #[test]
    fn reference_tables_are_nilpotent() {
        for g in GroupId::ALL {
            let sc = StructureConstants::reference(g);
            assert!(sc.is_antisymmetric());
            assert!(sc.is_two_step_nilpotent());
            assert!(sc.values_in_centre());
        }
    }

    #[test]
    fn law_has_identity() {
        for g in GroupId::ALL {
            let law = group_law(g);
            for (c, p) in law.iter().enumerate() {
                let at_id = p.drop_vars(|v| v < 8);
                assert_eq!(at_id, Poly::var(primed(c)), "{g} coordinate {c}");
            }
        }
    }
}
