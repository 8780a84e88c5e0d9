//! Real symmetric matrices and a cyclic Jacobi eigensolver for
//! analysis-scale Hamiltonians.

use crate::error::{Error, Result};

/// Largest dimension accepted by [`SymmetricMatrix`] (`2^12`).
pub const MAX_DIMENSION: usize = 4096;

const MAX_SWEEPS: usize = 100;

/// Dense real symmetric matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    entries: Vec<f64>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::argument("matrix dimension must be at least 1"));
    }
    if dim > MAX_DIMENSION {
        return Err(Error::SizeCap {
            what: "matrix dimension",
            got: dim,
            cap: MAX_DIMENSION,
            reason: "dense analysis-scale eigensolver",
        });
    }
    Ok(())
}

impl SymmetricMatrix {
    /// Builds the matrix from its upper triangle; `f(i, j)` is called for
    /// `i <= j` only and mirrored.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_dim(dim)?;
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                entries[i * dim + j] = v;
                entries[j * dim + i] = v;
            }
        }
        Ok(Self { dim, entries })
    }

    /// Builds the matrix from explicit rows, which must be exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        for row in rows {
            if row.len() != dim {
                return Err(Error::dimension("matrix row", dim, row.len()));
            }
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::argument(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            entries: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_upper_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.entries
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Full eigendecomposition with ascending eigenvalues.
    pub fn eigen(&self) -> Eigen {
        jacobi(self)
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    dim: usize,
    // column i holds the eigenvector of values[i]
    vectors: Vec<f64>,
}

impl Eigen {
    pub fn vector(&self, i: usize) -> Vec<f64> {
        (0..self.dim).map(|k| self.vectors[k * self.dim + i]).collect()
    }
}

/// Free-function form of [`SymmetricMatrix::eigen`].
pub fn symmetric_eigendecomposition(matrix: &SymmetricMatrix) -> Eigen {
    matrix.eigen()
}

fn jacobi(m: &SymmetricMatrix) -> Eigen {
    let n = m.dim;
    let mut a = m.entries.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = m.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off.sqrt() <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + col] = v[k * n + src];
        }
    }
    Eigen {
        values,
        dim: n,
        vectors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual_ok(m: &SymmetricMatrix, e: &Eigen) -> bool {
        let norm = m.frobenius_norm().max(f64::MIN_POSITIVE);
        (0..m.dim()).all(|i| {
            let v = e.vector(i);
            let mv = m.mul_vec(&v);
            let r: f64 = mv
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - e.values[i] * y).powi(2))
                .sum::<f64>()
                .sqrt();
            r < 1e-8 * norm
        })
    }

    fn orthonormal(e: &Eigen, n: usize) -> bool {
        (0..n).all(|i| {
            let vi = e.vector(i);
            (0..n).all(|j| {
                let vj = e.vector(j);
                let dot: f64 = vi.iter().zip(&vj).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                (dot - target).abs() < 1e-8
            })
        })
    }

    #[test]
    fn identity_and_pauli_x() {
        let e = SymmetricMatrix::identity(2).unwrap().eigen();
        assert_eq!(e.values, vec![1.0, 1.0]);
        let x = SymmetricMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = x.eigen();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        assert!(residual_ok(&x, &e));
    }

    #[test]
    fn rejects_asymmetric_and_oversized() {
        assert!(SymmetricMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(matches!(
            SymmetricMatrix::from_upper_fn(MAX_DIMENSION + 1, |_, _| 0.0),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn degenerate_spectrum() {
        // X1 + X2 + X3 has eigenvalues {-3, -1 x3, 1 x3, 3}
        let n = 3;
        let m = SymmetricMatrix::from_upper_fn(8, |i, j| {
            if (i ^ j).count_ones() == 1 { 1.0 } else { 0.0 }
        })
        .unwrap();
        let e = m.eigen();
        let expected = [-3.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 3.0];
        for (a, b) in e.values.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(residual_ok(&m, &e));
        assert!(orthonormal(&e, 1 << n));
    }

    proptest! {
        #[test]
        fn residual_and_orthonormality(
            dim in 1usize..=16,
            seed in proptest::collection::vec(-10.0f64..10.0, 256),
        ) {
            let m = SymmetricMatrix::from_upper_fn(dim, |i, j| seed[i * 16 + j]).unwrap();
            let e = m.eigen();
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(residual_ok(&m, &e));
            prop_assert!(orthonormal(&e, dim));
        }
    }
}
