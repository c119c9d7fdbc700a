//! Finite-dimensional complex linear algebra: vectors, matrices, projectors,
//! orthonormal frames, and the shared numeric tolerance policy.
//!
//! Everything here is immutable after construction and safe to share across
//! threads. Dimensions stay small (the physics lives in spaces of dimension
//! two to a few hundred), so all storage is dense.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Numeric tolerance policy shared by all modules.
///
/// `eps_zero` is the threshold below which a residual counts as zero;
/// `eps_prob` is the tighter threshold for probabilities (imaginary parts,
/// negative clamps).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    eps_zero: f64,
    eps_prob: f64,
}

impl Tolerance {
    pub fn new(eps_zero: f64, eps_prob: f64) -> Result<Self> {
        if !(eps_zero > 0.0 && eps_prob > 0.0 && eps_prob <= eps_zero) {
            return Err(Error::InvalidTolerance { eps_zero, eps_prob });
        }
        Ok(Self { eps_zero, eps_prob })
    }

    /// Override `eps_zero`, keeping `eps_prob` at its default unless the new
    /// threshold is tighter.
    pub fn with_eps_zero(eps_zero: f64) -> Result<Self> {
        let default = Self::default();
        Self::new(eps_zero, default.eps_prob.min(eps_zero))
    }

    pub fn eps_zero(&self) -> f64 {
        self.eps_zero
    }

    pub fn eps_prob(&self) -> f64 {
        self.eps_prob
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { eps_zero: 1e-10, eps_prob: 1e-12 }
    }
}

fn check_finite_slice(entries: &[Complex64]) -> Result<()> {
    if entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// A dense complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: DVector<Complex64>,
}

impl Vector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        check_finite_slice(&entries)?;
        Ok(Self { data: DVector::from_vec(entries) })
    }

    /// Vector with the given real entries and zero imaginary parts.
    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&re| Complex64::new(re, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, got: index });
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); dim];
        entries[index] = Complex64::new(1.0, 0.0);
        Self::new(entries)
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        self.data.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.data.norm()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { data: &self.data * factor }
    }

    pub fn sub(&self, other: &Vector) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self { data: &self.data - &other.data })
    }

    pub(crate) fn as_dvector(&self) -> &DVector<Complex64> {
        &self.data
    }

    pub(crate) fn from_dvector(data: DVector<Complex64>) -> Self {
        Self { data }
    }
}

fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: a, got: b })
    }
}

/// Inner product `⟨a|b⟩`, conjugate-linear in the first argument.
pub fn inner(a: &Vector, b: &Vector) -> Result<Complex64> {
    check_same_dim(a.dim(), b.dim())?;
    Ok(a.data.dotc(&b.data))
}

/// A dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: DMatrix<Complex64>,
}

impl Matrix {
    /// Build from row-major entries; `entries.len()` must equal `dim * dim`.
    pub fn from_rows(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: entries.len() });
        }
        check_finite_slice(&entries)?;
        Ok(Self { data: DMatrix::from_row_slice(dim, dim, &entries) })
    }

    pub fn identity(dim: usize) -> Self {
        Self { data: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { data: DMatrix::zeros(dim, dim) }
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &Vector, b: &Vector) -> Result<Self> {
        check_same_dim(a.dim(), b.dim())?;
        Ok(Self { data: &a.data * b.data.adjoint() })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[(row, col)]
    }

    pub fn add(&self, other: &Matrix) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self { data: &self.data + &other.data })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self { data: &self.data - &other.data })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { data: &self.data * factor }
    }

    /// Largest entry magnitude; the max-norm used by every tolerance check.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-norm distance to another matrix.
    pub fn distance(&self, other: &Matrix) -> Result<f64> {
        Ok(self.sub(other)?.max_norm())
    }

    pub(crate) fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub(crate) fn from_dmatrix(data: DMatrix<Complex64>) -> Self {
        Self { data }
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let eig = self.data.clone().symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        vals
    }

    /// Hermitian square root via eigendecomposition; eigenvalues below zero
    /// are clamped.
    pub fn hermitian_sqrt(&self) -> Self {
        let eig = self.data.clone().symmetric_eigen();
        let roots = eig.eigenvalues.map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0));
        let data = &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint();
        Self { data }
    }

    /// Unitary `exp(i·t·H)` of a Hermitian matrix `H`, via eigendecomposition.
    pub fn unitary_exp(&self, t: f64) -> Self {
        let eig = self.data.clone().symmetric_eigen();
        let phases = eig.eigenvalues.map(|l| (Complex64::new(0.0, t * l)).exp());
        let data = &eig.eigenvectors * DMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint();
        Self { data }
    }
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    check_same_dim(a.dim(), b.dim())?;
    Ok(Matrix { data: &a.data * &b.data })
}

pub fn apply(m: &Matrix, v: &Vector) -> Result<Vector> {
    check_same_dim(m.dim(), v.dim())?;
    Ok(Vector { data: &m.data * &v.data })
}

pub fn adjoint(m: &Matrix) -> Matrix {
    Matrix { data: m.data.adjoint() }
}

pub fn trace(m: &Matrix) -> Complex64 {
    m.data.trace()
}

/// An orthogonal projection operator with its rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: Matrix,
    rank: usize,
}

impl Projector {
    /// Validate that `matrix` is Hermitian and idempotent within `tol` and
    /// that its trace rounds to an integer rank.
    pub fn from_matrix(matrix: Matrix, tol: &Tolerance) -> Result<Self> {
        let eps = tol.eps_zero();
        let herm_dev = matrix.distance(&adjoint(&matrix))?;
        if herm_dev > eps {
            return Err(Error::NotProjector { reason: "not Hermitian".into(), deviation: herm_dev });
        }
        let idem_dev = matmul(&matrix, &matrix)?.distance(&matrix)?;
        if idem_dev > eps {
            return Err(Error::NotProjector { reason: "not idempotent".into(), deviation: idem_dev });
        }
        let tr = trace(&matrix);
        let rank = tr.re.round();
        let rank_dev = ((tr.re - rank).powi(2) + tr.im.powi(2)).sqrt();
        if rank_dev > eps || rank < 0.0 {
            return Err(Error::NotProjector {
                reason: format!("trace {:.6} does not round to a nonnegative integer rank", tr.re),
                deviation: rank_dev,
            });
        }
        Ok(Self { matrix, rank: rank as usize })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Sum of mutually orthogonal projectors, itself a projector.
    pub fn sum(parts: &[&Projector], tol: &Tolerance) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptySet)?;
        let mut acc = first.matrix.clone();
        for p in &parts[1..] {
            acc = acc.add(&p.matrix)?;
        }
        Self::from_matrix(acc, tol)
    }

    /// Matrix distance to another projector; used to decide identity across
    /// time slots (labels are cosmetic).
    pub fn same_as(&self, other: &Projector, eps: f64) -> bool {
        self.dim() == other.dim()
            && self.rank == other.rank
            && self.matrix.distance(&other.matrix).map(|d| d <= eps).unwrap_or(false)
    }

    /// An orthonormal basis of the range (eigenvectors with eigenvalue near
    /// one). Any such basis regenerates the projector; the choice is
    /// deterministic for a given matrix.
    pub fn range_basis(&self) -> Vec<Vector> {
        let eig = self.matrix.as_dmatrix().clone().symmetric_eigen();
        let mut out = Vec::with_capacity(self.rank);
        for (i, l) in eig.eigenvalues.iter().enumerate() {
            if *l > 0.5 {
                let mut v: DVector<Complex64> = eig.eigenvectors.column(i).into();
                let norm = v.norm();
                if norm > 0.0 {
                    v /= Complex64::new(norm, 0.0);
                }
                out.push(Vector { data: v });
            }
        }
        out
    }
}

/// `Σ |v⟩⟨v|` over an orthonormal list; rank is the number of vectors.
pub fn projector_from_vectors(vs: &[Vector], tol: &Tolerance) -> Result<Projector> {
    let first = vs.first().ok_or(Error::EmptySet)?;
    let dim = first.dim();
    let eps = tol.eps_zero();
    for (i, v) in vs.iter().enumerate() {
        check_same_dim(dim, v.dim())?;
        let norm = v.norm();
        if (norm - 1.0).abs() > eps {
            return Err(Error::NotNormalized { index: i, norm });
        }
        for (j, w) in vs.iter().enumerate().skip(i + 1) {
            let overlap = inner(v, w)?.norm();
            if overlap > eps {
                return Err(Error::NotOrthonormal { a: i, b: j, overlap });
            }
        }
    }
    let mut acc = Matrix::zeros(dim);
    for v in vs {
        acc = acc.add(&Matrix::outer(v, v)?)?;
    }
    // The generating vectors are orthonormal within eps, so the invariant
    // check below cannot fire unless eps itself is inconsistent.
    Projector::from_matrix(acc, tol)
}

/// Gram–Schmidt orthonormalization. Fails with `DegenerateInput` when a
/// residual norm underflows the tolerance (linearly dependent input).
pub fn gram_schmidt(vs: &[Vector], tol: &Tolerance) -> Result<Vec<Vector>> {
    let mut out: Vec<Vector> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut residual = v.clone();
        // Two projection passes: classical Gram-Schmidt loses orthogonality
        // near machine precision, re-orthogonalizing restores it.
        for _ in 0..2 {
            for u in &out {
                let coeff = inner(u, &residual)?;
                residual = residual.sub(&u.scale(coeff))?;
            }
        }
        let norm = residual.norm();
        if norm <= tol.eps_zero() {
            return Err(Error::DegenerateInput { residual: norm });
        }
        out.push(residual.scale(Complex64::new(1.0 / norm, 0.0)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const SQRT2_INV: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn tolerance_rejects_bad_values() {
        assert!(Tolerance::new(0.0, 1e-12).is_err());
        assert!(Tolerance::new(1e-12, 1e-10).is_err());
        assert!(Tolerance::new(1e-10, 1e-12).is_ok());
    }

    #[test]
    fn basis_projector() {
        let tol = Tolerance::default();
        let v = Vector::basis(3, 0).unwrap();
        let p = projector_from_vectors(&[v], &tol).unwrap();
        assert_eq!(p.rank(), 1);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                assert!((p.matrix().entry(i, j) - c(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn two_basis_vectors_sum_to_rank_two_projector() {
        let tol = Tolerance::default();
        let a = Vector::basis(3, 0).unwrap();
        let b = Vector::basis(3, 1).unwrap();
        let p = projector_from_vectors(&[a, b], &tol).unwrap();
        assert_eq!(p.rank(), 2);
        assert!((p.matrix().entry(0, 0).re - 1.0).abs() < 1e-15);
        assert!((p.matrix().entry(1, 1).re - 1.0).abs() < 1e-15);
        assert!(p.matrix().entry(2, 2).norm() < 1e-15);
    }

    #[test]
    fn projector_entries_for_superposed_vector() {
        // |v⟩ = (1/2, 1/2, 1/√2): outer-product entries computed by hand.
        let tol = Tolerance::default();
        let v = Vector::from_real(&[0.5, 0.5, SQRT2_INV]).unwrap();
        let p = projector_from_vectors(&[v], &tol).unwrap();
        assert_eq!(p.rank(), 1);
        assert!((p.matrix().entry(0, 0).re - 0.25).abs() < 1e-15);
        assert!((p.matrix().entry(0, 1).re - 0.25).abs() < 1e-15);
        assert!((p.matrix().entry(0, 2).re - 0.5 * SQRT2_INV).abs() < 1e-15);
        assert!((p.matrix().entry(2, 2).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn projector_rejects_non_orthonormal_input() {
        let tol = Tolerance::default();
        let a = Vector::from_real(&[1.0, 0.0]).unwrap();
        let b = Vector::from_real(&[SQRT2_INV, SQRT2_INV]).unwrap();
        match projector_from_vectors(&[a, b], &tol) {
            Err(Error::NotOrthonormal { a: 0, b: 1, overlap }) => {
                assert!((overlap - SQRT2_INV).abs() < 1e-12);
            }
            other => panic!("expected NotOrthonormal, got {other:?}"),
        }
    }

    #[test]
    fn projector_rejects_unnormalized_input() {
        let tol = Tolerance::default();
        let a = Vector::from_real(&[2.0, 0.0]).unwrap();
        assert!(matches!(
            projector_from_vectors(&[a], &tol),
            Err(Error::NotNormalized { index: 0, .. })
        ));
    }

    #[test]
    fn inner_conjugates_first_argument() {
        let a = Vector::new(vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let b = Vector::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(inner(&a, &b).unwrap(), c(0.0, -1.0));
    }

    #[test]
    fn inner_dimension_mismatch() {
        let a = Vector::from_real(&[1.0]).unwrap();
        let b = Vector::from_real(&[1.0, 0.0]).unwrap();
        assert!(matches!(inner(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn adjoint_is_involutive_and_trace_of_identity() {
        let m = Matrix::from_rows(2, vec![c(1.0, 2.0), c(3.0, -1.0), c(0.0, 0.5), c(2.0, 0.0)])
            .unwrap();
        assert!(adjoint(&adjoint(&m)).distance(&m).unwrap() < 1e-15);
        assert_eq!(trace(&Matrix::identity(3)), c(3.0, 0.0));
    }

    #[test]
    fn non_finite_entries_rejected() {
        assert!(matches!(Vector::new(vec![c(f64::NAN, 0.0)]), Err(Error::NonFinite)));
        assert!(matches!(
            Matrix::from_rows(1, vec![c(f64::INFINITY, 0.0)]),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn gram_schmidt_keeps_orthonormal_input() {
        let tol = Tolerance::default();
        let vs = vec![Vector::basis(2, 0).unwrap(), Vector::basis(2, 1).unwrap()];
        let out = gram_schmidt(&vs, &tol).unwrap();
        for (a, b) in vs.iter().zip(&out) {
            assert!(a.sub(b).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn gram_schmidt_forces_orthogonality_in_dim_two() {
        let tol = Tolerance::default();
        let vs = vec![
            Vector::from_real(&[1.0, 0.0]).unwrap(),
            Vector::from_real(&[1.0, 1.0]).unwrap(),
        ];
        let out = gram_schmidt(&vs, &tol).unwrap();
        assert!(out[0].sub(&Vector::basis(2, 0).unwrap()).unwrap().norm() < 1e-12);
        assert!(out[1].sub(&Vector::basis(2, 1).unwrap()).unwrap().norm() < 1e-12);
    }

    #[test]
    fn gram_schmidt_rejects_dependent_input() {
        let tol = Tolerance::default();
        let vs = vec![
            Vector::from_real(&[1.0, 1.0]).unwrap(),
            Vector::from_real(&[2.0, 2.0]).unwrap(),
        ];
        assert!(matches!(gram_schmidt(&vs, &tol), Err(Error::DegenerateInput { .. })));
    }

    #[test]
    fn unitary_exp_produces_unitary() {
        let h = Matrix::from_rows(
            2,
            vec![c(1.0, 0.0), c(0.25, -0.5), c(0.25, 0.5), c(-0.5, 0.0)],
        )
        .unwrap();
        let u = h.unitary_exp(0.7);
        let uu = matmul(&u, &adjoint(&u)).unwrap();
        assert!(uu.distance(&Matrix::identity(2)).unwrap() < 1e-12);
    }
}
