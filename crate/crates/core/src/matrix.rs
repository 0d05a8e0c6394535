//! Dense complex linear algebra for the 2-, 4- and 8-dimensional operators
//! used throughout the crate.
//!
//! Index convention: in a tensor product `a ⊗ b` the left factor owns the
//! most significant part of the basis index, so the three-qubit state
//! `|abc⟩` has index `4a + 2b + c`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance for unitarity and reconstruction checks.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance for rank and eigenvalue-multiset decisions.
pub const DECISION_TOL: f64 = 1e-8;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries; `data.len()` must be a perfect square.
    pub fn from_vec(data: Vec<Complex64>) -> Result<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != data.len() {
            return Err(invalid(format!(
                "{} entries do not form a square matrix",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("rows do not form a square matrix"));
        }
        Ok(Self {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &ComplexVector, v: &ComplexVector) -> Result<Self> {
        if u.dim() != v.dim() {
            return Err(invalid("outer product of vectors with different dimensions"));
        }
        let n = u.dim();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = u[i] * v[j].conj();
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius norm of `self − other`.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// ‖U†U − I‖_F.
    pub fn unitarity_residual(&self) -> f64 {
        (&self.adjoint() * self).distance(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    pub(crate) fn require_unitary(&self, tol: f64) -> Result<()> {
        let residual = self.unitarity_residual();
        if residual <= tol {
            Ok(())
        } else {
            Err(Error::NotUnitary { residual })
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.distance(&self.adjoint()) <= tol
    }

    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim, v.dim(), "dimension mismatch");
        let n = self.dim;
        let data = (0..n)
            .map(|i| (0..n).map(|j| self[(i, j)] * v[j]).sum())
            .collect();
        ComplexVector::new(data)
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        ComplexVector::new((0..self.dim).map(|i| self[(i, j)]).collect())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        tensor(self, other)
    }

    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(invalid("matrix is not square"));
        }
        let n = m.nrows();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = m[(i, j)];
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Dense complex vector (a ket).
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector {
    data: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(data: Vec<Complex64>) -> Self {
        Self { data }
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut data = vec![ZERO; dim];
        data[index] = ONE;
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            data: self.data.iter().map(|&x| x / n).collect(),
        }
    }

    pub fn is_state(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let data = self
            .data
            .iter()
            .flat_map(|&a| other.data.iter().map(move |&b| a * b))
            .collect();
        Self { data }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.data[i]
    }
}

impl Add for &ComplexVector {
    type Output = ComplexVector;
    fn add(self, rhs: &ComplexVector) -> ComplexVector {
        ComplexVector::new(self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect())
    }
}

/// Kronecker product with the left factor as the most significant index block.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim(), b.dim());
    let mut out = ComplexMatrix::zeros(na * nb);
    for i in 0..na {
        for j in 0..na {
            let x = a[(i, j)];
            if x == ZERO {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k, j * nb + l)] = x * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Traces out every factor not listed in `keep`.
///
/// `dims` lists the factor dimensions, most significant first; `keep` holds
/// factor indices and the kept factors stay in their original order.
pub fn partial_trace(m: &ComplexMatrix, keep: &[usize], dims: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if total != m.dim() {
        return Err(invalid(format!(
            "factor dimensions {:?} do not multiply to {}",
            dims,
            m.dim()
        )));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || keep_sorted.iter().any(|&k| k >= dims.len()) {
        return Err(invalid(format!("bad subsystem selection {keep:?}")));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep_sorted.contains(k)).collect();
    let kept_dim: usize = keep_sorted.iter().map(|&k| dims[k]).product();
    let traced_dim: usize = traced.iter().map(|&k| dims[k]).product();

    // Compose a full index from digits of the kept and traced parts.
    let compose = |kept_idx: usize, traced_idx: usize| -> usize {
        let mut digits = vec![0usize; dims.len()];
        let mut r = kept_idx;
        for &k in keep_sorted.iter().rev() {
            digits[k] = r % dims[k];
            r /= dims[k];
        }
        let mut r = traced_idx;
        for &k in traced.iter().rev() {
            digits[k] = r % dims[k];
            r /= dims[k];
        }
        digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
    };

    let mut out = ComplexMatrix::zeros(kept_dim);
    for i in 0..kept_dim {
        for j in 0..kept_dim {
            out[(i, j)] = (0..traced_dim)
                .map(|t| m[(compose(i, t), compose(j, t))])
                .sum();
        }
    }
    Ok(out)
}

/// Eigenvalues of a unitary matrix, counted with multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenMultiset {
    pub values: Vec<Complex64>,
}

impl EigenMultiset {
    pub fn new(mut values: Vec<Complex64>) -> Self {
        values.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// All eigenvalues of a unitary via the complex Schur form.
pub fn eigenvalues_unitary(u: &ComplexMatrix) -> Result<EigenMultiset> {
    u.require_unitary(UNITARY_TOL)?;
    Ok(EigenMultiset::new(eigenvalues(u)?))
}

/// Eigenvalues of a general square matrix (complex Schur form).
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let schur = m.to_nalgebra().schur();
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn determinant(m: &ComplexMatrix) -> Complex64 {
    m.to_nalgebra().determinant()
}

/// Schmidt decomposition `Σ cᵢ |lᵢ⟩⊗|rᵢ⟩` of a bipartite vector.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left_vectors: Vec<ComplexVector>,
    pub right_vectors: Vec<ComplexVector>,
}

impl SchmidtDecomposition {
    /// Number of coefficients above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|&&c| c > tol).count()
    }

    pub fn reconstruct(&self) -> ComplexVector {
        let dim = self.left_vectors[0].dim() * self.right_vectors[0].dim();
        let mut acc = ComplexVector::new(vec![ZERO; dim]);
        for ((c, l), r) in self
            .coefficients
            .iter()
            .zip(&self.left_vectors)
            .zip(&self.right_vectors)
        {
            acc = &acc + &l.tensor(r).scale(Complex64::new(*c, 0.0));
        }
        acc
    }
}

pub fn schmidt_vector(v: &ComplexVector, dims: [usize; 2]) -> Result<SchmidtDecomposition> {
    let [da, db] = dims;
    if da * db != v.dim() {
        return Err(invalid(format!(
            "factor dimensions {da}x{db} do not match vector of length {}",
            v.dim()
        )));
    }
    let m = DMatrix::from_row_slice(da, db, v.as_slice());
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let coefficients = order.iter().map(|&k| svd.singular_values[k]).collect();
    let left_vectors = order
        .iter()
        .map(|&k| ComplexVector::new(u.column(k).iter().copied().collect()))
        .collect();
    let right_vectors = order
        .iter()
        .map(|&k| ComplexVector::new(v_t.row(k).iter().copied().collect()))
        .collect();
    Ok(SchmidtDecomposition {
        coefficients,
        left_vectors,
        right_vectors,
    })
}

/// Realignment of `u` across a `dims[0] | dims[1]` split:
/// `R[(a a'), (b b')] = u[(a b), (a' b')]`, so that `u = Σ σₖ Aₖ ⊗ Bₖ`
/// corresponds to the singular value decomposition of `R`.
pub fn reshuffle(u: &ComplexMatrix, dims: [usize; 2]) -> Result<DMatrix<Complex64>> {
    let [da, db] = dims;
    if da * db != u.dim() {
        return Err(invalid(format!(
            "factor dimensions {da}x{db} do not match operator of dimension {}",
            u.dim()
        )));
    }
    let mut r = DMatrix::zeros(da * da, db * db);
    for a in 0..da {
        for ap in 0..da {
            for b in 0..db {
                for bp in 0..db {
                    r[(a * da + ap, b * db + bp)] = u[(a * db + b, ap * db + bp)];
                }
            }
        }
    }
    Ok(r)
}

/// Operator Schmidt rank with the singular values it was decided from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorSchmidt {
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Counts singular values of the realigned operator above `tol · σ_max`.
pub fn operator_schmidt_rank(u: &ComplexMatrix, dims: [usize; 2], tol: f64) -> Result<OperatorSchmidt> {
    let r = reshuffle(u, dims)?;
    let singular_values = singular_values(&r);
    let largest = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values.iter().filter(|&&s| s > tol * largest).count();
    Ok(OperatorSchmidt {
        rank,
        singular_values,
    })
}

/// Phase-invariant distance `1 − |tr(u†w)|/d`, clamped to `[0, 1]`.
pub fn distance_up_to_phase(u: &ComplexMatrix, w: &ComplexMatrix) -> Result<f64> {
    if u.dim() != w.dim() {
        return Err(invalid(format!(
            "cannot compare {0}x{0} with {1}x{1}",
            u.dim(),
            w.dim()
        )));
    }
    let overlap: Complex64 = u
        .as_slice()
        .iter()
        .zip(w.as_slice())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok((1.0 - overlap.norm() / u.dim() as f64).clamp(0.0, 1.0))
}

/// `exp(i·h)` for Hermitian `h` through its eigendecomposition.
pub fn expm_i_hermitian(h: &ComplexMatrix) -> ComplexMatrix {
    let eig = SymmetricEigen::new(h.to_nalgebra());
    let n = h.dim();
    let phases = eig.eigenvalues.map(|l| Complex64::from_polar(1.0, l));
    let vecs = &eig.eigenvectors;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = (0..n).map(|k| vecs[(i, k)] * phases[k] * vecs[(j, k)].conj()).sum();
        }
    }
    out
}

/// Hermitian `h` with `exp(i·h) = u` and spectrum in (−π, π], from the
/// Schur form of the unitary `u` (diagonal up to rounding since `u` is normal).
pub fn log_unitary(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    u.require_unitary(UNITARY_TOL)?;
    let (q, t) = u.to_nalgebra().schur().unpack();
    let n = u.dim();
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = (0..n).map(|k| q[(i, k)] * t[(k, k)].arg() * q[(j, k)].conj()).sum();
        }
    }
    Ok(out)
}

/// On-disk matrix format: `{"dim": n, "re": [[...]], "im": [[...]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        Self {
            dim: n,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

impl TryFrom<MatrixFile> for ComplexMatrix {
    type Error = Error;

    fn try_from(f: MatrixFile) -> Result<Self> {
        let n = f.dim;
        let well_formed = n > 0
            && f.re.len() == n
            && f.im.len() == n
            && f.re.iter().chain(&f.im).all(|row| row.len() == n);
        if !well_formed {
            return Err(Error::Malformed(format!(
                "matrix file must hold two full {n}x{n} arrays"
            )));
        }
        let data = f
            .re
            .iter()
            .zip(&f.im)
            .flat_map(|(r, i)| r.iter().zip(i).map(|(&a, &b)| Complex64::new(a, b)))
            .collect();
        Ok(ComplexMatrix { dim: n, data })
    }
}

impl ComplexMatrix {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&MatrixFile::from(self)).expect("matrix serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: MatrixFile = serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
        f.try_into()
    }
}
