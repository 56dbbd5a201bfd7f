//! Dense Hermitian operators at desk scale.
//!
//! Everything here is stored as a full `DMatrix<Complex64>`; dimensions of
//! interest are small (total dimension at most 8), so no attempt is made at
//! exploiting structure beyond Hermiticity.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::Side;

pub type ComplexMatrix = DMatrix<Complex64>;

/// Entrywise tolerance for accepting a matrix as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Eigenvalue threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A square complex matrix equal to its conjugate transpose.
///
/// Construction symmetrizes the input after checking it, so the stored
/// matrix is exactly Hermitian.
#[derive(Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HermitianOperator")
            .field("dim", &self.dim())
            .field("matrix", &self.matrix)
            .finish()
    }
}

fn max_hermitian_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn symmetrize(m: ComplexMatrix) -> ComplexMatrix {
    let adj = m.adjoint();
    (m + adj).scale(0.5)
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, HERMITICITY_TOL)
    }

    /// Like [`HermitianOperator::new`] but with a caller-chosen Hermiticity
    /// tolerance (file input is checked more loosely than internal values).
    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let deviation = max_hermitian_deviation(&matrix);
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self {
            matrix: symmetrize(matrix),
        })
    }

    /// For matrices that are Hermitian by construction up to rounding.
    pub(crate) fn from_hermitian(matrix: ComplexMatrix) -> Self {
        debug_assert!(max_hermitian_deviation(&matrix) < 1e-8);
        Self {
            matrix: symmetrize(matrix),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = ComplexMatrix::zeros(diag.len(), diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        Self { matrix: m }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    /// Rank-1 projector onto the (normalized) vector.
    pub fn projector(vector: &[Complex64]) -> Result<Self> {
        let norm = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParameter(
                "projector needs a finite nonzero vector".into(),
            ));
        }
        let v = nalgebra::DVector::from_iterator(vector.len(), vector.iter().map(|z| z / norm));
        Ok(Self::from_hermitian(&v * v.adjoint()))
    }

    pub fn pauli_x() -> Self {
        Self::new(ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])).unwrap()
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::new(0.0, 1.0);
        Self::new(ComplexMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO])).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::from_real_diagonal(&[1.0, -1.0])
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.map(|z| z * factor),
        }
    }

    /// Conjugation `U X U†`.
    pub fn conjugate_by(&self, unitary: &ComplexMatrix) -> Self {
        Self::from_hermitian(unitary * &self.matrix * unitary.adjoint())
    }

    pub fn spectrum(&self) -> Spectrum {
        eig_hermitian(self)
    }

    /// Eigenvalues only, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;

    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        HermitianOperator {
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;

    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        HermitianOperator {
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;

    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

/// Eigendecomposition of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn eigenvector(&self, k: usize) -> nalgebra::DVector<Complex64> {
        self.eigenvectors.column(k).into_owned()
    }

    /// `Σ_k λ_k v_k v_k†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvectors.nrows();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenvectors.column(k);
            out += (v * v.adjoint()).scale(lambda);
        }
        out
    }

    /// Apply a real function to the spectrum: `Σ_k f(λ_k) v_k v_k†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let n = self.eigenvectors.nrows();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenvectors.column(k);
            out += (v * v.adjoint()).scale(f(lambda));
        }
        HermitianOperator::from_hermitian(out)
    }
}

pub fn eig_hermitian(h: &HermitianOperator) -> Spectrum {
    let eig = h.matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let n = h.dim();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Spectrum {
        eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        eigenvectors: vectors,
    }
}

/// Eigendecomposition of a raw matrix, rejecting non-Hermitian input.
pub fn eig_hermitian_checked(m: &ComplexMatrix) -> Result<Spectrum> {
    Ok(eig_hermitian(&HermitianOperator::new(m.clone())?))
}

/// Kronecker product, `a` index major.
pub fn tensor(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator {
        matrix: a.matrix.kronecker(&b.matrix),
    }
}

/// Trace over the subsystem named by `side`; the other one survives.
pub fn partial_trace(
    x: &HermitianOperator,
    dims: (usize, usize),
    side: Side,
) -> Result<HermitianOperator> {
    let (da, db) = dims;
    if x.dim() != da * db {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            found: x.dim(),
        });
    }
    let m = &x.matrix;
    let out = match side {
        Side::B => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
        Side::A => ComplexMatrix::from_fn(db, db, |k, l| {
            (0..da).map(|i| m[(i * db + k, i * db + l)]).sum()
        }),
    };
    Ok(HermitianOperator::from_hermitian(out))
}

/// Transpose of the named tensor factor, block by block.
pub fn partial_transpose_matrix(
    x: &HermitianOperator,
    dims: (usize, usize),
    side: Side,
) -> Result<HermitianOperator> {
    let (da, db) = dims;
    if x.dim() != da * db {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            found: x.dim(),
        });
    }
    let m = &x.matrix;
    let n = da * db;
    let out = ComplexMatrix::from_fn(n, n, |r, c| {
        let (i, k) = (r / db, r % db);
        let (j, l) = (c / db, c % db);
        match side {
            Side::A => m[(j * db + k, i * db + l)],
            Side::B => m[(i * db + l, j * db + k)],
        }
    });
    Ok(HermitianOperator::from_hermitian(out))
}

/// Hilbert-Schmidt inner product `tr(A†B)`; real for Hermitian arguments.
pub fn hs_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    a.check_same_dim(b)?;
    Ok(hs_unchecked(a, b))
}

pub(crate) fn hs_unchecked(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    a.matrix
        .iter()
        .zip(b.matrix.iter())
        .map(|(x, y)| (x.conj() * y).re)
        .sum()
}

/// Generalized Gell-Mann basis of the Hermitian operators on `C^d`.
///
/// The first element is `sqrt(2/d)·I`; every element has squared
/// Hilbert-Schmidt norm 2 and the family is pairwise orthogonal. For `d = 2`
/// this is `(I, X, Y, Z)`.
pub fn hermitian_basis(d: usize) -> Vec<HermitianOperator> {
    assert!(d >= 1, "hermitian_basis needs d >= 1");
    let mut basis = Vec::with_capacity(d * d);
    basis.push(HermitianOperator::identity(d).scale((2.0 / d as f64).sqrt()));
    let i = Complex64::new(0.0, 1.0);
    for j in 0..d {
        for k in (j + 1)..d {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym[(j, k)] = ONE;
            sym[(k, j)] = ONE;
            basis.push(HermitianOperator { matrix: sym });
            let mut anti = ComplexMatrix::zeros(d, d);
            anti[(j, k)] = -i;
            anti[(k, j)] = i;
            basis.push(HermitianOperator { matrix: anti });
        }
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; d];
        for x in diag.iter_mut().take(l) {
            *x = norm;
        }
        diag[l] = -(l as f64) * norm;
        basis.push(HermitianOperator::from_real_diagonal(&diag));
    }
    basis
}

/// Orthonormal basis (as columns) of the eigenspace with eigenvalue > `tol`.
pub fn support_basis(p: &HermitianOperator, tol: f64) -> Result<ComplexMatrix> {
    let spec = p.spectrum();
    if spec.eigenvalues[0] < -tol {
        return Err(Error::NotPositive {
            min_eigenvalue: spec.eigenvalues[0],
        });
    }
    let cols: Vec<_> = spec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > tol)
        .map(|(k, _)| spec.eigenvectors.column(k).into_owned())
        .collect();
    if cols.is_empty() {
        return Ok(ComplexMatrix::zeros(p.dim(), 0));
    }
    Ok(ComplexMatrix::from_columns(&cols))
}

/// Orthogonal projector onto the support of a positive semidefinite operator.
pub fn support_projector(p: &HermitianOperator, tol: f64) -> Result<HermitianOperator> {
    let basis = support_basis(p, tol)?;
    Ok(HermitianOperator::from_hermitian(&basis * basis.adjoint()))
}

/// `½ Σ |eig(A − B)|`.
pub fn trace_distance(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    a.check_same_dim(b)?;
    Ok(0.5 * (a - b).spectrum().eigenvalues.iter().map(|x| x.abs()).sum::<f64>())
}

/// Operator norm of the commutator `[A, B]`.
pub fn commutator_norm(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    a.check_same_dim(b)?;
    // i[A, B] is Hermitian
    let i = Complex64::new(0.0, 1.0);
    let c = (&a.matrix * &b.matrix - &b.matrix * &a.matrix).map(|z| z * i);
    Ok(HermitianOperator::from_hermitian(c).operator_norm())
}

/// Largest singular value of `U† V` for two column-orthonormal bases; zero
/// when either subspace is trivial.
pub fn subspace_overlap(u: &ComplexMatrix, v: &ComplexMatrix) -> f64 {
    if u.ncols() == 0 || v.ncols() == 0 {
        return 0.0;
    }
    let cross = u.adjoint() * v;
    cross
        .singular_values()
        .iter()
        .fold(0.0f64, |acc, &s| acc.max(s))
}
