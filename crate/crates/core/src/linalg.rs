//! Dense Hermitian linear algebra.
//!
//! Every matrix that flows through the crate (the `A_i` of a mixed
//! characteristic polynomial, the projector being paved, signed adjacency
//! matrices) is a [`HermitianMatrix`]. Spectra come from the Hermitian
//! tridiagonal QR solver in `nalgebra`; characteristic polynomials are
//! rebuilt from the spectrum rather than the other way round.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::realpoly::RealPoly;

/// Relative tolerance on `‖H − H*‖` accepted (and averaged away) on construction.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Relative clamp threshold for tiny negative eigenvalues of PSD matrices.
pub const PSD_TOL: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    data: CMatrix,
}

/// Eigen-decomposition with eigenvalues in nondecreasing order and the
/// matching eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `V diag(f(λ)) V*`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let s = f(lambda);
            for i in 0..n {
                scaled[(i, k)] *= s;
            }
        }
        HermitianMatrix::symmetrized(&scaled * self.vectors.adjoint())
    }
}

fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl HermitianMatrix {
    /// Validates Hermiticity up to `HERMITIAN_TOL · ‖H‖_F` and stores the
    /// average of `H` and `H*`.
    pub fn new(data: CMatrix) -> Result<Self> {
        let (r, c) = data.shape();
        if r == 0 || r != c {
            return Err(Error::Validation(format!(
                "Hermitian matrix must be square and nonempty, got {r}x{c}"
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("matrix has non-finite entries".into()));
        }
        let scale = frobenius(&data);
        let mut dev = 0.0f64;
        for i in 0..r {
            for j in i..r {
                dev = dev.max((data[(i, j)] - data[(j, i)].conj()).norm());
            }
        }
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::Validation(format!(
                "matrix is not Hermitian: max |H_ij - conj(H_ji)| = {dev:e}"
            )));
        }
        Ok(Self::symmetrized(data))
    }

    pub fn from_real(data: DMatrix<f64>) -> Result<Self> {
        Self::new(data.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Validation("rows must form a square matrix".into()));
        }
        Self::from_real(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Averages with the conjugate transpose without validation. Only for
    /// matrices that are Hermitian by construction.
    pub(crate) fn symmetrized(data: CMatrix) -> Self {
        let adj = data.adjoint();
        Self { data: (data + adj) * Complex64::new(0.5, 0.0) }
    }

    pub fn identity(n: usize) -> Self {
        Self { data: CMatrix::identity(n, n) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { data: CMatrix::zeros(n, n) }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            data: CMatrix::from_fn(n, n, |i, j| {
                if i == j { Complex64::new(diag[i], 0.0) } else { Complex64::new(0.0, 0.0) }
            }),
        }
    }

    /// All-ones matrix scaled by `c`.
    pub fn all_ones(n: usize, c: f64) -> Self {
        Self { data: CMatrix::from_element(n, n, Complex64::new(c, 0.0)) }
    }

    /// `v v*`, exactly Hermitian.
    pub fn rank_one(v: &CVector) -> Self {
        let n = v.len();
        Self { data: CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()) }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.data[(i, i)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { data: &self.data * Complex64::new(c, 0.0) }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Self { data: &self.data + &other.data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Self { data: &self.data - &other.data }
    }

    /// `Σ c_i M_i` over a nonempty family of equal dimension.
    pub fn linear_combination(coeffs: &[f64], mats: &[HermitianMatrix]) -> Self {
        assert_eq!(coeffs.len(), mats.len());
        let n = mats[0].dim();
        let mut acc = CMatrix::zeros(n, n);
        for (c, m) in coeffs.iter().zip(mats) {
            if *c != 0.0 {
                acc += &m.data * Complex64::new(*c, 0.0);
            }
        }
        Self { data: acc }
    }

    pub fn sum(mats: &[HermitianMatrix]) -> Self {
        Self::linear_combination(&vec![1.0; mats.len()], mats)
    }

    /// Largest absolute entry of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.data - &other.data).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigen(&self) -> HermitianEigen {
        let n = self.dim();
        if n == 1 {
            return HermitianEigen {
                values: vec![self.data[(0, 0)].re],
                vectors: CMatrix::identity(1, 1),
            };
        }
        let eig = SymmetricEigen::new(self.data.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        HermitianEigen { values, vectors }
    }

    /// Eigenvalues in nondecreasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim();
        if n == 1 {
            return vec![self.data[(0, 0)].re];
        }
        let mut v: Vec<f64> = self.data.clone().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().unwrap()
    }

    /// `det(z·1 − H)`, expanded from the spectrum.
    pub fn characteristic_polynomial(&self) -> RealPoly {
        RealPoly::from_roots(&self.eigenvalues())
    }

    /// Spectral norm `max |λ|`.
    pub fn operator_norm(&self) -> f64 {
        let ev = self.eigenvalues();
        ev[0].abs().max(ev[ev.len() - 1].abs())
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.data)
    }

    /// PSD up to the relative clamp threshold.
    pub fn is_psd(&self) -> bool {
        let ev = self.eigenvalues();
        let norm = ev[0].abs().max(ev[ev.len() - 1].abs());
        ev[0] >= -PSD_TOL * norm
    }

    pub fn check_psd(&self) -> Result<()> {
        let ev = self.eigenvalues();
        let norm = ev[0].abs().max(ev[ev.len() - 1].abs());
        if ev[0] < -PSD_TOL * norm {
            return Err(Error::NotPsd { min_eigenvalue: ev[0] });
        }
        Ok(())
    }

    /// Number of eigenvalues with `|λ| > rel_tol · ‖H‖`.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        let ev = self.eigenvalues();
        let norm = ev[0].abs().max(ev[ev.len() - 1].abs());
        if norm == 0.0 {
            return 0;
        }
        ev.iter().filter(|l| l.abs() > rel_tol * norm).count()
    }

    /// Principal square root of a PSD matrix. Eigenvalues down to
    /// `−PSD_TOL·‖H‖` are clamped to zero.
    pub fn psd_sqrt(&self) -> Result<Self> {
        let eig = self.eigen();
        let norm = eig.values[0].abs().max(eig.values[eig.values.len() - 1].abs());
        if eig.values[0] < -PSD_TOL * norm {
            return Err(Error::NotPsd { min_eigenvalue: eig.values[0] });
        }
        Ok(eig.map_spectrum(|l| l.max(0.0).sqrt()))
    }

    pub fn kronecker(&self, other: &Self) -> Self {
        Self { data: self.data.kronecker(&other.data) }
    }

    /// Restriction to the rows and columns in `idx` (in the given order).
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        Self { data: CMatrix::from_fn(k, k, |i, j| self.data[(idx[i], idx[j])]) }
    }

    /// `tr(self · other)`, real for Hermitian arguments.
    pub fn trace_product(&self, other: &Self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.data[(i, j)] * other.data[(j, i)]).re;
            }
        }
        acc
    }
}

/// Largest singular value of an arbitrary complex matrix.
pub fn operator_norm_general(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Orthogonal projector onto a subset of the standard basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalProjector {
    n: usize,
    support: Vec<usize>,
}

impl DiagonalProjector {
    pub fn new(n: usize, mut support: Vec<usize>) -> Result<Self> {
        support.sort_unstable();
        support.dedup();
        if let Some(&last) = support.last() {
            if last >= n {
                return Err(Error::Validation(format!("support index {last} out of range for dimension {n}")));
            }
        }
        Ok(Self { n, support })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn to_matrix(&self) -> HermitianMatrix {
        let mut diag = vec![0.0; self.n];
        for &i in &self.support {
            diag[i] = 1.0;
        }
        HermitianMatrix::from_diagonal(&diag)
    }

    /// `‖Q H Q‖`, computed on the principal submatrix.
    pub fn compression_norm(&self, h: &HermitianMatrix) -> f64 {
        if self.support.is_empty() {
            return 0.0;
        }
        h.principal_submatrix(&self.support).operator_norm()
    }

    /// `‖Q M Q‖` for a general square matrix.
    pub fn compression_norm_general(&self, m: &CMatrix) -> f64 {
        let k = self.support.len();
        let sub = CMatrix::from_fn(k, k, |i, j| m[(self.support[i], self.support[j])]);
        operator_norm_general(&sub)
    }
}

/// Convenience constructor for complex vectors from `(re, im)` slices.
pub fn cvector(re: &[f64], im: &[f64]) -> CVector {
    assert_eq!(re.len(), im.len());
    CVector::from_fn(re.len(), |i, _| Complex64::new(re[i], im[i]))
}

pub fn rvector(re: &[f64]) -> CVector {
    CVector::from_fn(re.len(), |i, _| Complex64::new(re[i], 0.0))
}

/// Rescales vectors by `S^{-1/2}`, `S = Σ v_i v_i*`, so that the rank-one
/// matrices `v_i v_i*` sum to the identity.
pub fn isotropic_normalize(vectors: &[CVector]) -> Result<Vec<CVector>> {
    let Some(first) = vectors.first() else {
        return Err(Error::Validation("empty vector system".into()));
    };
    let n = first.len();
    let mut s = CMatrix::zeros(n, n);
    for v in vectors {
        if v.len() != n {
            return Err(Error::Validation("vectors differ in dimension".into()));
        }
        s += v * v.adjoint();
    }
    let eig = HermitianMatrix::new(s)?.eigen();
    let min = eig.values[0];
    if min <= PSD_TOL * eig.values[n - 1].abs() {
        return Err(Error::Singular { min_abs_eigenvalue: min.abs() });
    }
    let w = eig.map_spectrum(|l| 1.0 / l.sqrt());
    Ok(vectors.iter().map(|v| w.as_matrix() * v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn eigenvalues_of_small_examples() {
        assert!(close(&HermitianMatrix::from_diagonal(&[1.0, 2.0]).eigenvalues(), &[1.0, 2.0], 1e-14));
        let swap = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(close(&swap.eigenvalues(), &[-1.0, 1.0], 1e-14));
        // rank-one projector onto (1,1,1)/sqrt(3)
        let j3 = HermitianMatrix::all_ones(3, 1.0 / 3.0);
        assert!(close(&j3.eigenvalues(), &[0.0, 0.0, 1.0], 1e-14));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(HermitianMatrix::from_real(m), Err(Error::Validation(_))));
        let m = DMatrix::from_row_slice(2, 3, &[0.0; 6]);
        assert!(HermitianMatrix::from_real(m).is_err());
    }

    #[test]
    fn noise_below_tolerance_is_averaged() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5 + 1e-14, 0.5, 2.0]);
        let h = HermitianMatrix::from_real(m).unwrap();
        assert_eq!(h.get(0, 1), h.get(1, 0).conj());
    }

    #[test]
    fn characteristic_polynomials() {
        let p = HermitianMatrix::from_diagonal(&[1.0, 2.0]).characteristic_polynomial();
        assert!(close(p.coeffs(), &[2.0, -3.0, 1.0], 1e-14));
        let p = HermitianMatrix::zeros(3).characteristic_polynomial();
        assert!(close(p.coeffs(), &[0.0, 0.0, 0.0, 1.0], 0.0));
        let swap = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(close(swap.characteristic_polynomial().coeffs(), &[-1.0, 0.0, 1.0], 1e-14));
    }

    #[test]
    fn square_roots() {
        let s = HermitianMatrix::from_diagonal(&[4.0, 9.0]).psd_sqrt().unwrap();
        assert!(s.max_abs_diff(&HermitianMatrix::from_diagonal(&[2.0, 3.0])) < 1e-14);
        let id = HermitianMatrix::identity(4);
        assert!(id.psd_sqrt().unwrap().max_abs_diff(&id) < 1e-14);
        let half_j = HermitianMatrix::all_ones(2, 0.5);
        assert!(half_j.psd_sqrt().unwrap().max_abs_diff(&half_j) < 1e-14);
        let bad = HermitianMatrix::from_diagonal(&[1.0, -0.1]);
        assert!(matches!(bad.psd_sqrt(), Err(Error::NotPsd { .. })));
        // noise-level negative eigenvalue is clamped
        assert!(HermitianMatrix::from_diagonal(&[1.0, -1e-12]).psd_sqrt().is_ok());
    }

    #[test]
    fn kronecker_products() {
        let i2 = HermitianMatrix::identity(2);
        assert!(i2.kronecker(&i2).max_abs_diff(&HermitianMatrix::identity(4)) == 0.0);
        let a = HermitianMatrix::from_diagonal(&[1.0, 0.0]);
        let b = HermitianMatrix::from_diagonal(&[0.0, 1.0]);
        assert_eq!(a.kronecker(&b), HermitianMatrix::from_diagonal(&[0.0, 1.0, 0.0, 0.0]));
        let swap = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let k = swap.kronecker(&i2);
        assert_eq!(k.get(0, 2).re, 1.0);
        assert_eq!(k.get(1, 3).re, 1.0);
        assert!(close(&k.eigenvalues(), &[-1.0, -1.0, 1.0, 1.0], 1e-14));
    }

    #[test]
    fn operator_norms() {
        assert!((HermitianMatrix::identity(5).operator_norm() - 1.0).abs() < 1e-14);
        assert!((HermitianMatrix::from_diagonal(&[1.0, -3.0]).operator_norm() - 3.0).abs() < 1e-14);
        for d in 1..7 {
            let j = HermitianMatrix::all_ones(d, 1.0 / d as f64);
            assert!((j.operator_norm() - 1.0).abs() < 1e-13);
        }
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.0, 0.0]).map(|x| Complex64::new(x, 0.0));
        assert!((operator_norm_general(&m) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_projectors() {
        let q = DiagonalProjector::new(4, vec![2, 0, 2]).unwrap();
        assert_eq!(q.support(), &[0, 2]);
        let m = q.to_matrix();
        // idempotent and Hermitian
        let sq = HermitianMatrix::symmetrized(m.as_matrix() * m.as_matrix());
        assert_eq!(sq, m);
        assert!(DiagonalProjector::new(2, vec![2]).is_err());
        let j = HermitianMatrix::all_ones(4, 0.25);
        assert!((q.compression_norm(&j) - 0.5).abs() < 1e-14);
    }
}
