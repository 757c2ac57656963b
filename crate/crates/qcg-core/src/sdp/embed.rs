//! Real symmetric embedding of complex Hermitian matrices and the vector
//! coordinates used by the interior-point core.
//!
//! A Hermitian `H = A + iB` embeds as `[[A, -B], [B, A]]`, which is
//! symmetric, shares `H`'s eigenvalues with doubled multiplicity, and is PSD
//! exactly when `H` is. The solver works on symmetric blocks in `svec`
//! coordinates; Hermitian data enters through [`complex_to_real`] and
//! decoded results leave through [`decode_embedded`], which also averages
//! away any numerically accumulated component outside the embedded subspace.

use crate::linalg::{C64, ComplexMatrix, LinalgError};

/// Dense real symmetric/square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn matmul(&self, other: &RealMatrix) -> RealMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = RealMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> RealMatrix {
        let n = self.n;
        let mut out = RealMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }

    /// Lower Cholesky factor; `None` if not positive definite.
    pub fn cholesky(&self) -> Option<RealMatrix> {
        let n = self.n;
        let mut l = RealMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return None;
                    }
                    l.set(i, j, sum.sqrt());
                } else {
                    l.set(i, j, sum / l.get(j, j));
                }
            }
        }
        Some(l)
    }

    /// Solve `L x = b` for lower-triangular `self`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.get(i, k) * x[k];
            }
            x[i] /= self.get(i, i);
        }
        x
    }

    /// Solve `L^T x = b` for lower-triangular `self`.
    pub fn solve_lower_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= self.get(k, i) * x[k];
            }
            x[i] /= self.get(i, i);
        }
        x
    }

    /// Symmetric eigendecomposition, reusing the Hermitian kernel.
    pub fn eigh(&self) -> Result<(Vec<f64>, RealMatrix), LinalgError> {
        let n = self.n;
        let cm = ComplexMatrix::from_fn(n, n, |i, j| C64::new(self.get(i, j), 0.0));
        let eig = cm.eigh()?;
        let mut vecs = RealMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                vecs.set(i, j, eig.vectors[(i, j)].re);
            }
        }
        Ok((eig.values, vecs))
    }
}

/// Real symmetric embedding `[[Re h, -Im h], [Im h, Re h]]` of a Hermitian
/// matrix. Eigenvalues double in multiplicity; PSD-ness is preserved both
/// ways.
pub fn complex_to_real(h: &ComplexMatrix) -> Result<RealMatrix, LinalgError> {
    if !h.is_square() {
        return Err(LinalgError::NotSquare { rows: h.rows(), cols: h.cols() });
    }
    let dev = h.hermiticity_deviation();
    if dev > 1e-12 * h.max_abs().max(1.0) {
        return Err(LinalgError::NotHermitian { deviation: dev });
    }
    let n = h.rows();
    let mut out = RealMatrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = h[(i, j)];
            out.set(i, j, v.re);
            out.set(i + n, j + n, v.re);
            out.set(i, j + n, -v.im);
            out.set(i + n, j, v.im);
        }
    }
    Ok(out)
}

/// Decode an embedded symmetric matrix back to Hermitian form, projecting
/// onto the embedded subspace (harmless for exact embeddings, and removes
/// numerical drift from solver iterates).
pub fn decode_embedded(y: &RealMatrix) -> ComplexMatrix {
    assert!(y.n % 2 == 0, "embedded matrix must have even side");
    let n = y.n / 2;
    let mut h = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re = 0.5 * (y.get(i, j) + y.get(i + n, j + n));
            let im = 0.5 * (y.get(i + n, j) - y.get(j + n, i));
            h[(i, j)] = C64::new(re, im);
        }
    }
    h.hermitize()
}

/// Dimension of the `svec` coordinates of a symmetric `n x n` matrix.
pub fn svec_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Isometric vectorization of a symmetric matrix: diagonal entries, then
/// off-diagonal entries scaled by sqrt(2), column-major upper triangle.
pub fn svec(m: &RealMatrix) -> Vec<f64> {
    let n = m.n;
    let mut out = Vec::with_capacity(svec_dim(n));
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                out.push(m.get(i, j));
            } else {
                out.push(SQRT2 * 0.5 * (m.get(i, j) + m.get(j, i)));
            }
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat(n: usize, v: &[f64]) -> RealMatrix {
    assert_eq!(v.len(), svec_dim(n));
    let mut m = RealMatrix::zeros(n);
    let mut idx = 0;
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                m.set(i, j, v[idx]);
            } else {
                let val = v[idx] / SQRT2;
                m.set(i, j, val);
                m.set(j, i, val);
            }
            idx += 1;
        }
    }
    m
}

/// Dimension of the `hvec` coordinates of a Hermitian `n x n` matrix.
pub fn hvec_dim(n: usize) -> usize {
    n * n
}

/// Isometric real vectorization of a Hermitian matrix: diagonal first, then
/// (sqrt(2) Re, sqrt(2) Im) per upper-triangle entry.
pub fn hvec(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.rows();
    let mut out = Vec::with_capacity(hvec_dim(n));
    for i in 0..n {
        out.push(h[(i, i)].re);
    }
    for i in 0..n {
        for j in i + 1..n {
            out.push(SQRT2 * h[(i, j)].re);
            out.push(SQRT2 * h[(i, j)].im);
        }
    }
    out
}

/// Inverse of [`hvec`].
pub fn hvec_to_matrix(n: usize, v: &[f64]) -> ComplexMatrix {
    assert_eq!(v.len(), hvec_dim(n));
    let mut h = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = C64::new(v[i], 0.0);
    }
    let mut idx = n;
    for i in 0..n {
        for j in i + 1..n {
            let re = v[idx] / SQRT2;
            let im = v[idx + 1] / SQRT2;
            idx += 2;
            h[(i, j)] = C64::new(re, im);
            h[(j, i)] = C64::new(re, -im);
        }
    }
    h
}

/// The `α`-th Hermitian basis element in `hvec` ordering.
pub fn hvec_basis(n: usize, alpha: usize) -> ComplexMatrix {
    let mut v = vec![0.0; hvec_dim(n)];
    v[alpha] = 1.0;
    hvec_to_matrix(n, &v)
}

/// Sparse decode map `D`: hvec(decode(svec basis of the embedded block)).
/// Returned dense as `hvec_dim(n) x svec_dim(2n)`; used to translate
/// operator coefficients from Hermitian space to embedded coordinates.
pub fn decode_map(n: usize) -> Vec<Vec<f64>> {
    let sd = svec_dim(2 * n);
    let hd = hvec_dim(n);
    let mut cols = vec![vec![0.0; hd]; sd];
    let mut basis = vec![0.0; sd];
    for gamma in 0..sd {
        basis[gamma] = 1.0;
        let y = smat(2 * n, &basis);
        basis[gamma] = 0.0;
        let h = decode_embedded(&y);
        cols[gamma] = hvec(&h);
    }
    cols
}
