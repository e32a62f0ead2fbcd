//! Dense complex linear algebra with tolerance-aware rank decisions.
//!
//! Every support and containment question reduces to three primitives here:
//! [`span_of`] (numerical column span via SVD), [`contains`] (residual of one
//! orthonormal basis against the projector of another) and [`sum_subspaces`].
//! Operators are identified with vectors through row-major [`vectorize`].

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Column vector in `C^D`.
pub type CVector = DVector<Complex64>;

/// Maximum Hermiticity defect accepted by [`hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-9;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Rank cutoff policy.
///
/// A singular value (or eigenvalue) `s` is kept iff `s > max(rel * s_max, abs)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 1e-9,
            abs: 1e-12,
        }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        let tol = Self { rel, abs };
        tol.check()?;
        Ok(tol)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.rel.is_finite() && self.rel >= 0.0) {
            return Err(Error::InvalidTolerance(format!("rel = {}", self.rel)));
        }
        if !(self.abs.is_finite() && self.abs >= 0.0) {
            return Err(Error::InvalidTolerance(format!("abs = {}", self.abs)));
        }
        Ok(())
    }

    /// Cutoff for a spectrum whose largest value is `scale`.
    pub fn cutoff(&self, scale: f64) -> f64 {
        (self.rel * scale).max(self.abs)
    }

    /// Residual bound for containment of unit vectors.
    pub fn containment_threshold(&self) -> f64 {
        self.rel.max(self.abs)
    }
}

/// Dense complex matrix with at least one row and one column and finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::InvalidShape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::InvalidShape(format!(
                "{}x{} matrix is empty",
                m.nrows(),
                m.ncols()
            )));
        }
        for col in 0..m.ncols() {
            for row in 0..m.nrows() {
                let z = m[(row, col)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row, col });
                }
            }
        }
        Ok(Self(m))
    }

    /// Builds a matrix from rows of `[re, im]` pairs.
    pub fn from_entry_rows(rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(nrows * ncols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::InvalidShape(format!(
                    "row {r} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            entries.extend(row.iter().map(|&[re, im]| c(re, im)));
        }
        Self::new(nrows, ncols, entries)
    }

    pub fn to_entry_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.rows())
            .map(|r| {
                (0..self.cols())
                    .map(|col| {
                        let z = self.0[(r, col)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect()
    }

    pub(crate) fn wrap(m: DMatrix<Complex64>) -> Self {
        debug_assert!(m.nrows() > 0 && m.ncols() > 0);
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self::wrap(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::wrap(DMatrix::zeros(rows, cols))
    }

    /// Outer product `|v⟩⟨v|`.
    pub fn outer(v: &CVector) -> Self {
        Self::wrap(v * v.adjoint())
    }

    pub fn pauli_x() -> Self {
        Self::wrap(DMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        ))
    }

    pub fn pauli_y() -> Self {
        Self::wrap(DMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        ))
    }

    pub fn pauli_z() -> Self {
        Self::wrap(DMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        ))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Entrywise max-abs distance; `inf` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.0.shape() != other.0.shape() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |m - m†|`; `inf` for non-square matrices.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.dagger())
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                found: v.len(),
            });
        }
        Ok(&self.0 * v)
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                found: rhs.rows(),
            });
        }
        Ok(Self(&self.0 * &rhs.0))
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on incompatible shapes, like the underlying nalgebra product.
    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_entry_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(deserializer)?;
        Self::from_entry_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Orthonormal basis of a subspace of `C^D`.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient_dim: usize,
    /// `D x r`, orthonormal columns.
    basis: DMatrix<Complex64>,
    tol_used: f64,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: DMatrix::zeros(ambient_dim, 0),
            tol_used: 0.0,
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: DMatrix::identity(ambient_dim, ambient_dim),
            tol_used: 0.0,
        }
    }

    /// Wraps a matrix whose columns are already orthonormal.
    pub(crate) fn from_orthonormal_columns(basis: DMatrix<Complex64>, tol_used: f64) -> Self {
        Self {
            ambient_dim: basis.nrows(),
            basis,
            tol_used,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// Basis as the columns of a `D x r` matrix.
    pub fn basis(&self) -> &DMatrix<Complex64> {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<CVector> {
        self.basis.column_iter().map(|c| c.into_owned()).collect()
    }

    /// Absolute cutoff that decided the rank.
    pub fn tol_used(&self) -> f64 {
        self.tol_used
    }

    /// Max-abs deviation of the Gram matrix from the identity.
    pub fn gram_defect(&self) -> f64 {
        let r = self.rank();
        let gram = self.basis.adjoint() * &self.basis;
        let eye = DMatrix::<Complex64>::identity(r, r);
        (gram - eye).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Outcome of a containment test.
#[derive(Debug, Clone)]
pub struct ContainmentReport {
    pub contained: bool,
    /// Largest residual `‖(I - P_outer) b‖₂` over the inner basis.
    pub max_residual: f64,
    /// `r_outer x r_inner` expansion of each inner basis vector in the outer basis.
    pub coefficients: DMatrix<Complex64>,
}

/// Orthonormal basis of the numerical span of `vectors`.
pub fn span_of(vectors: &[CVector], tol: &Tolerance) -> Result<Subspace> {
    let first = vectors
        .first()
        .ok_or(Error::Empty("span_of needs at least one vector"))?;
    let dim = first.len();
    if dim == 0 {
        return Err(Error::InvalidShape("zero-dimensional vector".into()));
    }
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    let columns = DMatrix::from_columns(vectors);
    Ok(column_span(columns, tol))
}

fn column_span(columns: DMatrix<Complex64>, tol: &Tolerance) -> Subspace {
    let dim = columns.nrows();
    let (u, sigma) = one_sided_jacobi(columns);
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let cutoff = tol.cutoff(sigma_max);
    let mut order: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > cutoff).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    let kept: Vec<CVector> = order.iter().map(|&i| u.column(i).into_owned()).collect();
    let basis = if kept.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(&kept)
    };
    Subspace::from_orthonormal_columns(basis, cutoff)
}

// Hestenes one-sided Jacobi: rotates column pairs until mutually orthogonal.
// Returns normalized columns (zero where the norm vanished) and their norms,
// which are the singular values. nalgebra's complex SVD loses accuracy in
// its left vectors for some rank-deficient inputs, hence this routine.
fn one_sided_jacobi(mut a: DMatrix<Complex64>) -> (DMatrix<Complex64>, Vec<f64>) {
    const MAX_SWEEPS: usize = 80;
    let m = a.ncols();
    let eps = f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..m {
            for j in i + 1..m {
                let alpha = a.column(i).norm_squared();
                let beta = a.column(j).norm_squared();
                let gamma = a.column(i).dotc(&a.column(j));
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for r in 0..a.nrows() {
                    let x = a[(r, i)];
                    let y = a[(r, j)] * phase;
                    a[(r, i)] = x * cs - y * sn;
                    a[(r, j)] = x * sn + y * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma = Vec::with_capacity(m);
    for k in 0..m {
        let n = a.column(k).norm();
        sigma.push(n);
        if n > 0.0 {
            a.column_mut(k).unscale_mut(n);
        }
    }
    (a, sigma)
}

/// Tests `inner ⊆ outer` one inner basis vector at a time.
pub fn contains(outer: &Subspace, inner: &Subspace, tol: &Tolerance) -> Result<ContainmentReport> {
    if outer.ambient_dim != inner.ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: outer.ambient_dim,
            found: inner.ambient_dim,
        });
    }
    let coefficients = outer.basis.adjoint() * &inner.basis;
    let reconstructed = &outer.basis * &coefficients;
    let residuals = &inner.basis - reconstructed;
    let max_residual = residuals
        .column_iter()
        .map(|col| col.norm())
        .fold(0.0, f64::max);
    Ok(ContainmentReport {
        contained: max_residual <= tol.containment_threshold(),
        max_residual,
        coefficients,
    })
}

/// Span of the union of the bases of `parts`.
pub fn sum_subspaces(parts: &[Subspace], tol: &Tolerance) -> Result<Subspace> {
    let first = parts
        .first()
        .ok_or(Error::Empty("sum_subspaces needs at least one subspace"))?;
    let dim = first.ambient_dim;
    if let Some(p) = parts.iter().find(|p| p.ambient_dim != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.ambient_dim,
        });
    }
    let total: usize = parts.iter().map(Subspace::rank).sum();
    if total == 0 {
        return Ok(Subspace::zero(dim));
    }
    let mut columns = DMatrix::zeros(dim, total);
    let mut offset = 0;
    for p in parts {
        columns.columns_mut(offset, p.rank()).copy_from(&p.basis);
        offset += p.rank();
    }
    Ok(column_span(columns, tol))
}

/// Orthogonal projector `B B†` onto `s`.
pub fn projector(s: &Subspace) -> ComplexMatrix {
    ComplexMatrix::wrap(&s.basis * s.basis.adjoint())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::wrap(a.0.kronecker(&b.0))
}

/// Kronecker product of vectors.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

/// Row-major stacking of the entries of `m`.
pub fn vectorize(m: &ComplexMatrix) -> CVector {
    let (rows, cols) = (m.rows(), m.cols());
    CVector::from_iterator(
        rows * cols,
        (0..rows).flat_map(|r| (0..cols).map(move |col| m.0[(r, col)])),
    )
}

/// Eigensystem of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors matching `values`.
    pub vectors: DMatrix<Complex64>,
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::InvalidShape(format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let sym = (&m.0 + m.0.adjoint()) * c(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let cols: Vec<CVector> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    Ok(HermitianEigen {
        values,
        vectors: DMatrix::from_columns(&cols),
    })
}
