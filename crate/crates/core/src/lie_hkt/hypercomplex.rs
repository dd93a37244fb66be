//! The hypercomplex structure `(J1, J2, J3)` on the frame `e1..e8`.

/// Integer matrix acting on frame coefficients; column `k` holds `J e_k`.
pub type IntMatrix = [[i8; 8]; 8];

/// Quaternion product on `(re, i, j, k)` components.
fn quaternion_mul(a: [i8; 4], b: [i8; 4]) -> [i8; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

/// `J_r(e1) = e_{r+1}`, `J_r(e5) = e_{r+5}`, extended so that both
/// `{e1..e4}` and `{e5..e8}` are invariant: on each block `J_r` is left
/// multiplication by the imaginary unit `i`, `j`, `k` under
/// `e1, e2, e3, e4 <-> 1, i, j, k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypercomplexAction {
    pub j: [IntMatrix; 3],
}

impl HypercomplexAction {
    pub fn standard() -> Self {
        let units = [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];
        let j = units.map(|u| {
            let mut m = [[0i8; 8]; 8];
            for block in [0, 4] {
                for k in 0..4 {
                    let mut basis = [0i8; 4];
                    basis[k] = 1;
                    let image = quaternion_mul(u, basis);
                    for (row, v) in image.into_iter().enumerate() {
                        m[block + row][block + k] = v;
                    }
                }
            }
            m
        });
        HypercomplexAction { j }
    }

    /// `J_r` for `r` in 1..=3.
    pub fn get(&self, r: usize) -> &IntMatrix {
        &self.j[r - 1]
    }
}

pub fn int_matmul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let mut out = [[0i8; 8]; 8];
    for i in 0..8 {
        for k in 0..8 {
            for j in 0..8 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn int_identity() -> IntMatrix {
    let mut m = [[0i8; 8]; 8];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

pub fn int_neg(a: &IntMatrix) -> IntMatrix {
    a.map(|row| row.map(|v| -v))
}

pub fn int_transpose(a: &IntMatrix) -> IntMatrix {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defining_values() {
        let h = HypercomplexAction::standard();
        for r in 1..=3 {
            let m = h.get(r);
            // J_r e1 = e_{r+1}, J_r e5 = e_{r+5}
            assert_eq!(m[r][0], 1);
            assert_eq!(m[4 + r][4], 1);
        }
    }

    #[test]
    fn quaternion_relations() {
        let h = HypercomplexAction::standard();
        let id = int_identity();
        for r in 1..=3 {
            assert_eq!(int_matmul(h.get(r), h.get(r)), int_neg(&id));
            assert_eq!(int_matmul(h.get(r), &int_transpose(h.get(r))), id);
        }
        assert_eq!(int_matmul(h.get(1), h.get(2)), *h.get(3));
        assert_eq!(int_matmul(h.get(2), h.get(1)), int_neg(h.get(3)));
    }
}
