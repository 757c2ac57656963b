//! Dense complex matrices and the Hermitian eigendecomposition kernel.
//!
//! Everything numerical in this crate reduces to one primitive: the
//! eigendecomposition of a Hermitian matrix ([`ComplexMatrix::eigh`]).
//! Matrix square roots, pseudo-inverses and trace norms are all derived
//! from it so there is a single kernel to validate.

use num_complex::Complex64;
use thiserror::Error;

/// Scalar alias used throughout the crate.
pub type C64 = Complex64;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max |M - M^dag| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue = {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("matrix is numerically zero, no support to invert")]
    ZeroMatrix,
    #[error("eigensolver failed to converge")]
    NoConvergence,
}

/// Which tensor factor of a bipartite space an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Dimensions of a bipartite space `H_A (x) H_B`, conditioning factor first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BipartiteDims {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl BipartiteDims {
    pub fn new(dim_a: usize, dim_b: usize) -> Self {
        assert!(dim_a > 0 && dim_b > 0, "bipartite dimensions must be positive");
        Self { dim_a, dim_b }
    }

    pub fn total(&self) -> usize {
        self.dim_a * self.dim_b
    }
}

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from a row-major slice of complex entries.
    pub fn from_slice(rows: usize, cols: usize, entries: &[C64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must equal rows*cols");
        Self { rows, cols, data: entries.to_vec() }
    }

    /// Build from row-major real entries (imaginary parts zero).
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self {
            rows,
            cols,
            data: entries.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    /// Rank-one projector |i><i| on a `dim`-dimensional space.
    pub fn basis_projector(dim: usize, i: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        m[(i, i)] = C64::new(1.0, 0.0);
        m
    }

    /// |i><j| on a `dim`-dimensional space.
    pub fn matrix_unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        m[(i, j)] = C64::new(1.0, 0.0);
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |M - M^dag| over entries; 0 for empty matrices.
    pub fn hermiticity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_deviation() <= tol
    }

    /// (M + M^dag)/2.
    pub fn hermitize(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Real part of <self, other> = Tr(self^dag other).
    pub fn inner_re(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// Eigendecomposition of a Hermitian matrix.
    ///
    /// Returns eigenvalues in ascending order and the unitary of column
    /// eigenvectors. The input is symmetrized first; callers that care about
    /// non-Hermitian inputs must check [`Self::is_hermitian`] themselves.
    pub fn eigh(&self) -> Result<HermitianEigen, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare { rows: self.rows, cols: self.cols });
        }
        hermitian_eigen(&self.hermitize())
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Result of [`ComplexMatrix::eigh`]: `M = V diag(values) V^dag`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Columns are the corresponding orthonormal eigenvectors.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Reassemble `V f(diag) V^dag` for a scalar function of the eigenvalues.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let flam = f(lam);
            if flam == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)];
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj() * flam;
                }
            }
        }
        out
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Householder tridiagonalization followed by implicit QL with Wilkinson
/// shifts. Classic EISPACK structure, adapted to complex Hermitian input by
/// a diagonal phase similarity that makes the subdiagonal real.
fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen, LinalgError> {
    let n = m.rows();
    if n == 0 {
        return Ok(HermitianEigen { values: vec![], vectors: ComplexMatrix::zeros(0, 0) });
    }
    let mut a = m.clone();
    let mut q = ComplexMatrix::identity(n);

    // Reduce to Hermitian tridiagonal form, accumulating Q.
    for k in 0..n.saturating_sub(2) {
        let mut norm_sq = 0.0;
        for i in k + 1..n {
            norm_sq += a[(i, k)].norm_sqr();
        }
        let norm = norm_sq.sqrt();
        if norm <= f64::EPSILON * a.frobenius_norm().max(1e-300) {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let alpha = if x0.norm() > 0.0 { -x0 / x0.norm() * norm } else { C64::new(-norm, 0.0) };
        // v = normalized (x - alpha e1)
        let mut v = vec![C64::new(0.0, 0.0); n];
        for i in k + 1..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // Hermitian rank-2 update A <- (I - 2vv^dag) A (I - 2vv^dag)
        let mut p = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                acc += a[(i, j)] * v[j];
            }
            p[i] = acc;
        }
        let kappa: C64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        for i in 0..n {
            for j in 0..n {
                let upd = v[i] * p[j].conj() * 2.0 + p[i] * v[j].conj() * 2.0
                    - v[i] * v[j].conj() * (kappa * 4.0);
                a[(i, j)] -= upd;
            }
        }
        // Q <- Q (I - 2vv^dag)
        for r in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                acc += q[(r, j)] * v[j];
            }
            for j in 0..n {
                q[(r, j)] -= acc * v[j].conj() * 2.0;
            }
        }
    }

    // Phase similarity: make the subdiagonal real nonnegative. The
    // subdiagonal array carries a trailing zero as in EISPACK.
    let mut diag = vec![0.0; n];
    let mut sub = vec![0.0; n];
    let mut phase = vec![C64::new(1.0, 0.0); n];
    diag[0] = a[(0, 0)].re;
    for i in 0..n - 1 {
        let e = a[(i + 1, i)] * phase[i].conj();
        // (D^dag A D)[i+1,i] = conj(ph[i+1]) a[i+1,i] ph[i]; choose ph[i+1]
        // so the product is |a[i+1,i]|.
        let mag = e.norm();
        phase[i + 1] = if mag > 0.0 { a[(i + 1, i)] * phase[i] / mag } else { phase[i] };
        sub[i] = mag;
        diag[i + 1] = a[(i + 1, i + 1)].re;
    }
    for j in 0..n {
        if phase[j] != C64::new(1.0, 0.0) {
            for r in 0..n {
                let val = q[(r, j)] * phase[j];
                q[(r, j)] = val;
            }
        }
    }

    tql2(&mut diag, &mut sub, &mut q)?;

    // Sort ascending, permuting eigenvector columns.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| q[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Implicit QL with Wilkinson shifts on a real symmetric tridiagonal matrix,
/// accumulating the (real) rotations into the complex column basis `q`.
fn tql2(d: &mut [f64], e: &mut [f64], q: &mut ComplexMatrix) -> Result<(), LinalgError> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut mseg = l;
            while mseg < n - 1 {
                let dd = d[mseg].abs() + d[mseg + 1].abs();
                if e[mseg].abs() <= f64::EPSILON * dd {
                    break;
                }
                mseg += 1;
            }
            if mseg == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(LinalgError::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[mseg] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..mseg).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[mseg] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..q.rows() {
                    f = q[(k, i + 1)].re;
                    let fi = q[(k, i + 1)].im;
                    let (re0, im0) = (q[(k, i)].re, q[(k, i)].im);
                    q[(k, i + 1)] = C64::new(s * re0 + c * f, s * im0 + c * fi);
                    q[(k, i)] = C64::new(c * re0 - s * f, c * im0 - s * fi);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mseg] = 0.0;
        }
    }
    Ok(())
}

/// Kronecker product with dimensions `(a.rows*b.rows, a.cols*b.cols)`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a[(i, j)];
            if aij.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    out[(i * b.rows() + k, j * b.cols() + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

fn check_bipartite(m: &ComplexMatrix, dims: BipartiteDims) -> Result<(), LinalgError> {
    if !m.is_square() || m.rows() != dims.total() {
        return Err(LinalgError::DimensionMismatch(format!(
            "matrix is {}x{}, bipartite dims require {0}x{0}",
            m.rows(),
            m.cols(),
        )));
    }
    Ok(())
}

/// Partial trace over the discarded factor; the kept factor is `keep`.
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: BipartiteDims,
    keep: Subsystem,
) -> Result<ComplexMatrix, LinalgError> {
    check_bipartite(m, dims)?;
    let (da, db) = (dims.dim_a, dims.dim_b);
    match keep {
        Subsystem::A => {
            let mut out = ComplexMatrix::zeros(da, da);
            for i in 0..da {
                for j in 0..da {
                    let mut acc = C64::new(0.0, 0.0);
                    for b in 0..db {
                        acc += m[(i * db + b, j * db + b)];
                    }
                    out[(i, j)] = acc;
                }
            }
            Ok(out)
        }
        Subsystem::B => {
            let mut out = ComplexMatrix::zeros(db, db);
            for i in 0..db {
                for j in 0..db {
                    let mut acc = C64::new(0.0, 0.0);
                    for a in 0..da {
                        acc += m[(a * db + i, a * db + j)];
                    }
                    out[(i, j)] = acc;
                }
            }
            Ok(out)
        }
    }
}

/// Transposition applied on the selected tensor factor only.
pub fn partial_transpose(
    m: &ComplexMatrix,
    dims: BipartiteDims,
    which: Subsystem,
) -> Result<ComplexMatrix, LinalgError> {
    check_bipartite(m, dims)?;
    let (da, db) = (dims.dim_a, dims.dim_b);
    let mut out = ComplexMatrix::zeros(da * db, da * db);
    for a in 0..da {
        for b in 0..db {
            for a2 in 0..da {
                for b2 in 0..db {
                    let v = m[(a * db + b, a2 * db + b2)];
                    match which {
                        Subsystem::A => out[(a2 * db + b, a * db + b2)] = v,
                        Subsystem::B => out[(a * db + b2, a2 * db + b)] = v,
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Exchange the two tensor factors: `SWAP (A x B) SWAP^dag`, reindexing to
/// `B x A`.
pub fn swap_factors(m: &ComplexMatrix, dims: BipartiteDims) -> Result<ComplexMatrix, LinalgError> {
    check_bipartite(m, dims)?;
    let (da, db) = (dims.dim_a, dims.dim_b);
    let mut out = ComplexMatrix::zeros(da * db, da * db);
    for a in 0..da {
        for b in 0..db {
            for a2 in 0..da {
                for b2 in 0..db {
                    out[(b * da + a, b2 * da + a2)] = m[(a * db + b, a2 * db + b2)];
                }
            }
        }
    }
    Ok(out)
}

/// PSD tolerance used when clamping small negative eigenvalues.
pub const PSD_TOL: f64 = 1e-10;

/// Hermitian PSD square root. Eigenvalues in `[-1e-10, 0)` are clamped to
/// zero; anything below that is an error.
pub fn matrix_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let eig = m.eigh()?;
    if eig.min() < -PSD_TOL {
        return Err(LinalgError::NotPsd { min_eigenvalue: eig.min() });
    }
    Ok(eig.apply_fn(|lam| if lam > 0.0 { lam.sqrt() } else { 0.0 }))
}

/// Moore-Penrose pseudo-inverse of a Hermitian PSD matrix on its support.
/// Eigenvalues below `rank_tol * lambda_max` are treated as zero.
pub fn pinv_psd(m: &ComplexMatrix, rank_tol: f64) -> Result<ComplexMatrix, LinalgError> {
    let eig = m.eigh()?;
    let lam_max = eig.max();
    if lam_max <= 0.0 {
        return Err(LinalgError::ZeroMatrix);
    }
    let cutoff = rank_tol * lam_max;
    if eig.values.iter().all(|&l| l <= cutoff) {
        return Err(LinalgError::ZeroMatrix);
    }
    Ok(eig.apply_fn(|lam| if lam > cutoff { 1.0 / lam } else { 0.0 }))
}

/// Inverse square root on the support, same thresholding as [`pinv_psd`].
pub fn pinv_sqrt_psd(m: &ComplexMatrix, rank_tol: f64) -> Result<ComplexMatrix, LinalgError> {
    let eig = m.eigh()?;
    let lam_max = eig.max();
    if lam_max <= 0.0 {
        return Err(LinalgError::ZeroMatrix);
    }
    let cutoff = rank_tol * lam_max;
    if eig.values.iter().all(|&l| l <= cutoff) {
        return Err(LinalgError::ZeroMatrix);
    }
    Ok(eig.apply_fn(|lam| if lam > cutoff { 1.0 / lam.sqrt() } else { 0.0 }))
}

/// Rank of a Hermitian PSD matrix at a relative eigenvalue threshold.
pub fn psd_rank(m: &ComplexMatrix, rank_tol: f64) -> Result<usize, LinalgError> {
    let eig = m.eigh()?;
    let cutoff = rank_tol * eig.max().max(0.0);
    Ok(eig.values.iter().filter(|&&l| l > cutoff).count())
}

/// Sum of singular values. Hermitian inputs take the exact route through
/// their eigenvalues; the general case goes through `sqrt(eig(M^dag M))`.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    assert!(m.is_square(), "trace_norm expects a square matrix");
    let scale = m.max_abs().max(1.0);
    if m.is_hermitian(1e-12 * scale) {
        let eig = m.eigh().expect("square matrix");
        eig.values.iter().map(|l| l.abs()).sum()
    } else {
        let gram = m.dagger().matmul(m);
        let eig = gram.eigh().expect("square matrix");
        eig.values.iter().map(|l| l.max(0.0).sqrt()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        random_matrix(n, rng).hermitize()
    }

    #[test]
    fn tensor_identity_cases() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor_product(&i2, &i2), ComplexMatrix::identity(4));
        let sz = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let got = tensor_product(&sz, &i2);
        let want = ComplexMatrix::from_real(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, -1.0, 0.0, //
                0.0, 0.0, 0.0, -1.0,
            ],
        );
        assert!(got.max_abs_diff(&want) == 0.0);
    }

    #[test]
    fn tensor_matches_entrywise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(2, &mut rng);
        let b = random_matrix(2, &mut rng);
        let t = tensor_product(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let want = a[(i, j)] * b[(k, l)];
                        assert_eq!(t[(2 * i + k, 2 * j + l)], want);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_product_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let dims = BipartiteDims::new(2, 3);
        let joint = tensor_product(&a, &b);
        let got = partial_trace(&joint, dims, Subsystem::A).unwrap();
        assert!(got.max_abs_diff(&a.scale(b.trace())) < 1e-14);
        let got_b = partial_trace(&joint, dims, Subsystem::B).unwrap();
        assert!(got_b.max_abs_diff(&b.scale(a.trace())) < 1e-14);
        assert!((got.trace() - joint.trace()).norm() < 1e-13);
        assert!((got_b.trace() - joint.trace()).norm() < 1e-13);
    }

    #[test]
    fn partial_trace_bell_state() {
        // |Phi+><Phi+|/2 with entries at the four corners of the 00/11 block.
        let mut bell = ComplexMatrix::zeros(4, 4);
        for &(i, j) in &[(0usize, 0usize), (0, 3), (3, 0), (3, 3)] {
            bell[(i, j)] = c(0.5, 0.0);
        }
        let dims = BipartiteDims::new(2, 2);
        let red = partial_trace(&bell, dims, Subsystem::A).unwrap();
        assert!(red.max_abs_diff(&ComplexMatrix::identity(2).scale_re(0.5)) < 1e-15);
        let i4 = ComplexMatrix::identity(4);
        let got = partial_trace(&i4, dims, Subsystem::B).unwrap();
        assert!(got.max_abs_diff(&ComplexMatrix::identity(2).scale_re(2.0)) < 1e-15);
    }

    #[test]
    fn partial_transpose_involution_and_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dims = BipartiteDims::new(2, 3);
        let m = random_matrix(6, &mut rng);
        let pt = partial_transpose(&m, dims, Subsystem::A).unwrap();
        let back = partial_transpose(&pt, dims, Subsystem::A).unwrap();
        assert!(back.max_abs_diff(&m) == 0.0);

        let a = random_matrix(2, &mut rng);
        let b = random_matrix(3, &mut rng);
        let joint = tensor_product(&a, &b);
        let ptb = partial_transpose(&joint, dims, Subsystem::B).unwrap();
        assert!(ptb.max_abs_diff(&tensor_product(&a, &b.transpose())) < 1e-15);

        // Hermiticity is preserved.
        let h = random_hermitian(6, &mut rng);
        let pth = partial_transpose(&h, dims, Subsystem::B).unwrap();
        assert!(pth.is_hermitian(1e-14));
    }

    #[test]
    fn partial_transpose_of_unnormalized_bell_is_swap() {
        let mut bell = ComplexMatrix::zeros(4, 4);
        for &(i, j) in &[(0usize, 0usize), (0, 3), (3, 0), (3, 3)] {
            bell[(i, j)] = c(1.0, 0.0);
        }
        let swap = ComplexMatrix::from_real(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        );
        let pt = partial_transpose(&bell, BipartiteDims::new(2, 2), Subsystem::A).unwrap();
        assert!(pt.max_abs_diff(&swap) == 0.0);
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for &n in &[1usize, 2, 3, 5, 8, 16, 24] {
            let h = random_hermitian(n, &mut rng);
            let eig = h.eigh().unwrap();
            let rebuilt = eig.apply_fn(|x| x);
            assert!(
                rebuilt.max_abs_diff(&h) < 1e-12 * (n as f64),
                "reconstruction failed for n={n}: {}",
                rebuilt.max_abs_diff(&h)
            );
            // orthonormal columns
            let gram = eig.vectors.dagger().matmul(&eig.vectors);
            assert!(gram.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-12 * (n as f64));
            // ascending
            for w in eig.values.windows(2) {
                assert!(w[0] <= w[1] + 1e-13);
            }
        }
    }

    #[test]
    fn eigh_handles_degenerate_spectra() {
        // diag(2, 2, 1) with a rotation applied
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(3, &mut rng);
        let u = h.eigh().unwrap().vectors;
        let d = ComplexMatrix::from_real(3, 3, &[2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0]);
        let m = u.matmul(&d).matmul(&u.dagger());
        let eig = m.eigh().unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-12);
        assert!((eig.values[1] - 2.0).abs() < 1e-12);
        assert!((eig.values[2] - 2.0).abs() < 1e-12);
        assert!(eig.apply_fn(|x| x).max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn sqrt_psd_examples() {
        let d = ComplexMatrix::from_real(2, 2, &[4.0, 0.0, 0.0, 9.0]);
        let s = matrix_sqrt_psd(&d).unwrap();
        assert!(s.max_abs_diff(&ComplexMatrix::from_real(2, 2, &[2.0, 0.0, 0.0, 3.0])) < 1e-13);
        let i3 = ComplexMatrix::identity(3);
        assert!(matrix_sqrt_psd(&i3).unwrap().max_abs_diff(&i3) < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_matrix(4, &mut rng);
        let psd = a.dagger().matmul(&a);
        let s = matrix_sqrt_psd(&psd).unwrap();
        let back = s.matmul(&s);
        assert!(back.sub(&psd).frobenius_norm() <= 1e-9 * psd.frobenius_norm().max(1.0));
        // sqrt commutes with its input
        let comm = s.matmul(&psd).sub(&psd.matmul(&s));
        assert!(comm.max_abs() < 1e-9);
    }

    #[test]
    fn sqrt_psd_rejects_indefinite() {
        let d = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -0.5]);
        match matrix_sqrt_psd(&d) {
            Err(LinalgError::NotPsd { min_eigenvalue }) => {
                assert!((min_eigenvalue + 0.5).abs() < 1e-12)
            }
            other => panic!("expected NotPsd, got {other:?}"),
        }
    }

    #[test]
    fn pinv_psd_examples() {
        let d = ComplexMatrix::from_real(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let p = pinv_psd(&d, 1e-12).unwrap();
        assert!(p.max_abs_diff(&ComplexMatrix::from_real(2, 2, &[0.5, 0.0, 0.0, 0.0])) < 1e-13);

        let d = ComplexMatrix::identity(3).scale_re(1.0 / 3.0);
        let p = pinv_psd(&d, 1e-12).unwrap();
        assert!(p.max_abs_diff(&ComplexMatrix::identity(3).scale_re(3.0)) < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let a = random_matrix(4, &mut rng);
        let psd = a.dagger().matmul(&a).add(&ComplexMatrix::identity(4).scale_re(0.1));
        let p = pinv_psd(&psd, 1e-12).unwrap();
        let prod = psd.matmul(&p);
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-9);

        assert!(matches!(
            pinv_psd(&ComplexMatrix::zeros(2, 2), 1e-12),
            Err(LinalgError::ZeroMatrix)
        ));
    }

    #[test]
    fn trace_norm_examples() {
        let d = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!((trace_norm(&d) - 2.0).abs() < 1e-14);
        assert_eq!(trace_norm(&ComplexMatrix::zeros(3, 3)), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = random_hermitian(5, &mut rng);
        let eig = h.eigh().unwrap();
        let want: f64 = eig.values.iter().map(|l| l.abs()).sum();
        assert!((trace_norm(&h) - want).abs() < 1e-12);

        // non-Hermitian route against singular values of a known matrix
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 3.0, 0.0, 0.0]);
        assert!((trace_norm(&m) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let a = random_hermitian(4, &mut rng);
            let b = random_hermitian(4, &mut rng);
            let lhs = trace_norm(&a.add(&b));
            assert!(lhs <= trace_norm(&a) + trace_norm(&b) + 1e-10);
        }
    }

    #[test]
    fn swap_factors_moves_product_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = random_matrix(2, &mut rng);
        let b = random_matrix(3, &mut rng);
        let ab = tensor_product(&a, &b);
        let ba = swap_factors(&ab, BipartiteDims::new(2, 3)).unwrap();
        assert!(ba.max_abs_diff(&tensor_product(&b, &a)) < 1e-15);
    }
}
