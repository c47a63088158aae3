//! Dense complex Hermitian linear algebra.
//!
//! Tensor products follow the Kronecker convention: in `A ⊗ B` the first factor indexes the
//! coarse blocks, so basis index `(a, b)` maps to `a * dim(B) + b`. Every register layout and
//! partial trace in this crate relies on that ordering.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues at or below this are rejected by [`log_hermitian`].
/// Relative tolerance on `|M − M†|` accepted by [`HermitianOperator::new`].
pub const HERMITIAN_TOL: f64 = 1e-10;

pub const LOG_EIGENVALUE_FLOOR: f64 = 1e-14;

const DENSITY_TOL: f64 = 1e-10;

#[inline]
pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Complex Hermitian matrix. Construction symmetrizes the input as `(M + M†) / 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "MatrixJson", try_from = "MatrixJson")]
pub struct HermitianOperator {
    m: CMatrix,
}

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidOperator(format!(
                "matrix is not square: {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidOperator("empty matrix".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidOperator("non-finite entry".into()));
        }
        let skew = (&m - m.adjoint()).norm();
        if skew > HERMITIAN_TOL * m.norm().max(1.0) {
            return Err(Error::InvalidOperator(format!("matrix is not Hermitian (|M - M†| = {skew:e})")));
        }
        Ok(Self::symmetrized(m))
    }

    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        let adj = m.adjoint();
        Self { m: (m + adj) * c(0.5) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: CMatrix::zeros(dim, dim) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| c(x)));
        Self::new(CMatrix::from_diagonal(&v))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.m.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { m: &self.m * c(s) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self { m: &self.m + &other.m })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self { m: &self.m - &other.m })
    }

    /// Real part of `tr(self · other)`.
    pub fn trace_product(&self, other: &Self) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(trace_product(&self.m, &other.m).re)
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        (&self.m - &other.m).norm()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.m[(i, j)].norm() <= tol))
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Dimension { expected, found });
    }
    Ok(())
}

/// `tr(A B)` without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Positive semi-definite, unit-trace Hermitian operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianOperator", into = "HermitianOperator")]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    /// Validates `tr = 1` within 1e-10 and all eigenvalues ≥ −1e-10.
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > DENSITY_TOL {
            return Err(Error::NotDensity(format!("trace is {tr}")));
        }
        let spec = eig_hermitian(&op)?;
        let min = spec.min_eigenvalue();
        if min < -DENSITY_TOL {
            return Err(Error::NotDensity(format!("smallest eigenvalue is {min:e}")));
        }
        Ok(Self { op })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?)
    }

    /// Divides a positive semi-definite operator by its trace.
    pub fn normalize(op: &HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if !(tr > 0.0 && tr.is_finite()) {
            return Err(Error::NotDensity(format!("cannot normalize operator with trace {tr}")));
        }
        Self::new(op.scale(1.0 / tr))
    }

    /// Wraps an operator produced by a trace-preserving evolution without re-checking it.
    pub(crate) fn from_evolved(m: CMatrix) -> Self {
        Self { op: HermitianOperator::symmetrized(m) }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { op: HermitianOperator::identity(dim).scale(1.0 / dim as f64) }
    }

    /// Projector onto the normalized vector `psi`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        let norm = v.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Parameter("state vector has zero norm".into()));
        }
        let v = v / c(norm);
        Ok(Self { op: HermitianOperator::symmetrized(&v * v.adjoint()) })
    }

    /// Computational basis projector `|index⟩⟨index|`.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Parameter(format!("basis index {index} out of range for dim {dim}")));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = c(1.0);
        Ok(Self { op: HermitianOperator { m } })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.op.m
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn trace(&self) -> f64 {
        self.op.trace()
    }

    pub fn purity(&self) -> f64 {
        trace_product(&self.op.m, &self.op.m).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eig_hermitian(&self.op).map(|s| s.min_eigenvalue()).unwrap_or(f64::NAN)
    }
}

impl TryFrom<HermitianOperator> for DensityMatrix {
    type Error = Error;
    fn try_from(op: HermitianOperator) -> Result<Self> {
        Self::new(op)
    }
}

impl From<DensityMatrix> for HermitianOperator {
    fn from(d: DensityMatrix) -> Self {
        d.op
    }
}

/// Eigendecomposition `H = U diag(λ) U†`, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("spectrum of a non-empty operator")
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `U diag(f(λ)) U†` for a complex-valued `f`.
    pub fn map_complex(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let fk = f(lam);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= fk);
        }
        scaled * u.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_complex(c)
    }
}

pub fn eig_hermitian(h: &HermitianOperator) -> Result<Spectrum> {
    if h.m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidOperator("non-finite entry".into()));
    }
    let eig = h.m.clone().symmetric_eigen();
    let n = h.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// Eigenvalues only, descending.
pub fn eigenvalues_hermitian(h: &HermitianOperator) -> Vec<f64> {
    let mut ev: Vec<f64> = h.m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Spectral calculus `U diag(f(λ)) U†`. A non-finite `f(λ)` is a [`Error::Domain`].
pub fn func_hermitian(h: &HermitianOperator, f: impl Fn(f64) -> f64) -> Result<HermitianOperator> {
    let spec = eig_hermitian(h)?;
    for &lam in &spec.eigenvalues {
        if !f(lam).is_finite() {
            return Err(Error::Domain { eigenvalue: lam });
        }
    }
    Ok(HermitianOperator::symmetrized(spec.map_complex(|l| c(f(l)))))
}

pub fn exp_hermitian(h: &HermitianOperator) -> Result<HermitianOperator> {
    func_hermitian(h, f64::exp)
}

/// Matrix logarithm of a positive definite operator.
pub fn log_hermitian(h: &HermitianOperator) -> Result<HermitianOperator> {
    let spec = eig_hermitian(h)?;
    let min = spec.min_eigenvalue();
    if min <= LOG_EIGENVALUE_FLOOR {
        return Err(Error::Domain { eigenvalue: min });
    }
    Ok(HermitianOperator::symmetrized(spec.map_complex(|l| c(l.ln()))))
}

/// Square root with negative eigenvalues clamped to zero.
/// Eigenvalues below rounding level relative to the largest one are treated as zero.
pub fn sqrt_psd(h: &HermitianOperator) -> Result<HermitianOperator> {
    let spec = eig_hermitian(h)?;
    let cutoff = 4.0 * h.dim() as f64 * f64::EPSILON * spec.max_eigenvalue().abs();
    Ok(HermitianOperator::symmetrized(spec.map_complex(|l| c(if l > cutoff { l.sqrt() } else { 0.0 }))))
}

/// `exp(−i H t)`.
pub fn unitary_exp(h: &HermitianOperator, t: f64) -> Result<CMatrix> {
    Ok(eig_hermitian(h)?.map_complex(|l| Complex64::from_polar(1.0, -l * t)))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn tensor_product(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator { m: kron(&a.m, &b.m) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Partial trace of an arbitrary square matrix on `A ⊗ B`, keeping `keep`.
pub fn partial_trace_matrix(ab: &CMatrix, dims: (usize, usize), keep: Subsystem) -> Result<CMatrix> {
    let (da, db) = dims;
    if ab.nrows() != da * db || ab.ncols() != da * db {
        return Err(Error::Dimension { expected: da * db, found: ab.nrows() });
    }
    Ok(match keep {
        Subsystem::First => CMatrix::from_fn(da, da, |a, a2| {
            (0..db).map(|b| ab[(a * db + b, a2 * db + b)]).sum()
        }),
        Subsystem::Second => CMatrix::from_fn(db, db, |b, b2| {
            (0..da).map(|a| ab[(a * db + b, a * db + b2)]).sum()
        }),
    })
}

pub fn partial_trace(
    ab: &HermitianOperator,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<HermitianOperator> {
    partial_trace_matrix(&ab.m, dims, keep).map(HermitianOperator::symmetrized)
}

/// `AB − BA`.
pub fn commutator(a: &HermitianOperator, b: &HermitianOperator) -> Result<CMatrix> {
    check_dims(a.dim(), b.dim())?;
    Ok(&a.m * &b.m - &b.m * &a.m)
}

pub fn pauli_x() -> HermitianOperator {
    HermitianOperator { m: CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]) }
}

pub fn pauli_y() -> HermitianOperator {
    let i = Complex64::i();
    HermitianOperator { m: CMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]) }
}

pub fn pauli_z() -> HermitianOperator {
    HermitianOperator { m: CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]) }
}

/// Conjugates a matrix by a block-diagonal unitary `⊕ⱼ Wⱼ`: block `(j, k)` becomes
/// `Wⱼ Xⱼₖ Wₖ†`. All blocks must share one size.
pub(crate) fn conjugate_block_diagonal(x: &CMatrix, blocks: &[CMatrix]) -> CMatrix {
    let b = blocks[0].nrows();
    let n = blocks.len();
    debug_assert_eq!(x.nrows(), n * b);
    let adjoints: Vec<CMatrix> = blocks.iter().map(|w| w.adjoint()).collect();
    let mut out = CMatrix::zeros(n * b, n * b);
    for (j, wj) in blocks.iter().enumerate() {
        for (k, wk_adj) in adjoints.iter().enumerate() {
            let xjk = x.view((j * b, k * b), (b, b));
            let r = wj * xjk * wk_adj;
            out.view_mut((j * b, k * b), (b, b)).copy_from(&r);
        }
    }
    out
}

/// JSON form of a matrix: real and imaginary parts as nested row arrays.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<HermitianOperator> for MatrixJson {
    fn from(h: HermitianOperator) -> Self {
        let n = h.dim();
        let row = |f: fn(&Complex64) -> f64, i: usize| (0..n).map(|j| f(&h.m[(i, j)])).collect();
        MatrixJson {
            dim: n,
            re: (0..n).map(|i| row(|z| z.re, i)).collect(),
            im: (0..n).map(|i| row(|z| z.im, i)).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for HermitianOperator {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        let n = j.dim;
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !rows_ok(&j.re) || !rows_ok(&j.im) {
            return Err(Error::InvalidOperator(format!("matrix JSON rows do not match dim {n}")));
        }
        HermitianOperator::new(CMatrix::from_fn(n, n, |r, col| {
            Complex64::new(j.re[r][col], j.im[r][col])
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn random_hermitian(dim: usize, seed: u64) -> HermitianOperator {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = CMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        HermitianOperator::new((&m + m.adjoint()) * c(0.5)).unwrap()
    }

    #[test]
    fn pauli_and_identity_spectra() {
        let s = eig_hermitian(&pauli_z()).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, -1.0]);
        let s = eig_hermitian(&HermitianOperator::identity(2)).unwrap();
        assert!(s.eigenvalues.iter().all(|&l| close(l, 1.0, 1e-15)));
    }

    #[test]
    fn smoothed_model_spectrum() {
        let rho = HermitianOperator::from_real_diagonal(&[0.95, 0.05]).unwrap();
        let s = eig_hermitian(&rho).unwrap();
        assert!(close(s.eigenvalues[0], 0.95, 1e-15) && close(s.eigenvalues[1], 0.05, 1e-15));
    }

    #[test]
    fn non_finite_rejected() {
        let m = CMatrix::from_element(2, 2, c(f64::NAN));
        assert!(matches!(HermitianOperator::new(m), Err(Error::InvalidOperator(_))));
    }

    #[test]
    fn construction_checks_hermiticity() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(1.0)]);
        assert!(matches!(HermitianOperator::new(m), Err(Error::InvalidOperator(_))));
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0 + 1e-13), c(1.0), c(1.0)]);
        let h = HermitianOperator::new(m).unwrap();
        assert_eq!(h.matrix()[(0, 1)], h.matrix()[(1, 0)].conj());
    }

    #[test]
    fn spectrum_reconstructs_and_is_unitary() {
        for seed in 0..20 {
            let h = random_hermitian(5, seed);
            let s = eig_hermitian(&h).unwrap();
            assert!((s.reconstruct() - h.matrix()).norm() < 1e-9);
            let u = &s.eigenvectors;
            assert!((u.adjoint() * u - CMatrix::identity(5, 5)).norm() < 1e-9);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn function_examples() {
        let e = exp_hermitian(&HermitianOperator::zeros(3)).unwrap();
        assert!((e.matrix() - CMatrix::identity(3, 3)).norm() < 1e-15);
        let e = exp_hermitian(&HermitianOperator::from_real_diagonal(&[1.0, 2.0]).unwrap()).unwrap();
        assert!(close(e.matrix()[(0, 0)].re, 1f64.exp(), 1e-12));
        assert!(close(e.matrix()[(1, 1)].re, 2f64.exp(), 1e-12));
        let l = log_hermitian(&HermitianOperator::from_real_diagonal(&[0.95, 0.05]).unwrap()).unwrap();
        assert!(close(l.matrix()[(0, 0)].re, 0.95f64.ln(), 1e-14));
        assert!(close(l.matrix()[(1, 1)].re, 0.05f64.ln(), 1e-14));
    }

    #[test]
    fn log_rejects_singular() {
        let p = HermitianOperator::from_real_diagonal(&[1.0, 0.0]).unwrap();
        match log_hermitian(&p) {
            Err(Error::Domain { eigenvalue }) => assert_eq!(eigenvalue, 0.0),
            other => panic!("expected domain error, got {other:?}"),
        }
        assert!(matches!(func_hermitian(&p, f64::ln), Err(Error::Domain { .. })));
    }

    #[test]
    fn exp_then_log_round_trips() {
        for seed in 0..20 {
            let h = random_hermitian(4, 100 + seed);
            let back = log_hermitian(&exp_hermitian(&h).unwrap()).unwrap();
            assert!(back.frobenius_distance(&h) < 1e-8);
        }
    }

    #[test]
    fn kronecker_examples() {
        let i2 = HermitianOperator::identity(2);
        assert_eq!(tensor_product(&i2, &i2), HermitianOperator::identity(4));
        let zi = tensor_product(&pauli_z(), &i2);
        assert_eq!(zi.diagonal(), vec![1.0, 1.0, -1.0, -1.0]);
        let zx = tensor_product(&pauli_z(), &pauli_x());
        let m = zx.matrix();
        assert_eq!(m[(0, 1)], c(1.0));
        assert_eq!(m[(2, 3)], c(-1.0));
        assert_eq!(m[(0, 2)], c(0.0));
    }

    #[test]
    fn partial_trace_examples() {
        let rho1 = HermitianOperator::from_real_diagonal(&[0.95, 0.05]).unwrap();
        let ab = tensor_product(&pauli_z(), &rho1);
        let a = partial_trace(&ab, (2, 2), Subsystem::First).unwrap();
        assert!(a.frobenius_distance(&pauli_z()) < 1e-15);

        let a = random_hermitian(3, 7);
        let b = random_hermitian(2, 8);
        let kept = partial_trace(&tensor_product(&a, &b), (3, 2), Subsystem::First).unwrap();
        assert!(kept.frobenius_distance(&a.scale(b.trace())) < 1e-12);

        let mu = DensityMatrix::pure(&[c(0.6), Complex64::new(0.0, 0.8)]).unwrap();
        let half = DensityMatrix::maximally_mixed(2);
        let kept = partial_trace(&tensor_product(half.op(), mu.op()), (2, 2), Subsystem::Second).unwrap();
        assert!(kept.frobenius_distance(mu.op()) < 1e-15);
    }

    #[test]
    fn partial_trace_dimension_error() {
        let h = HermitianOperator::identity(6);
        assert!(matches!(partial_trace(&h, (2, 2), Subsystem::First), Err(Error::Dimension { .. })));
    }

    #[test]
    fn partial_trace_is_linear_and_trace_preserving() {
        for seed in 0..10 {
            let x = random_hermitian(6, 200 + seed);
            let y = random_hermitian(6, 300 + seed);
            for keep in [Subsystem::First, Subsystem::Second] {
                let px = partial_trace(&x, (3, 2), keep).unwrap();
                assert!(close(px.trace(), x.trace(), 1e-12));
                let sum = partial_trace(&x.scale(2.0).add(&y).unwrap(), (3, 2), keep).unwrap();
                let py = partial_trace(&y, (3, 2), keep).unwrap();
                assert!(sum.frobenius_distance(&px.scale(2.0).add(&py).unwrap()) < 1e-12);
            }
        }
    }

    #[test]
    fn commutator_examples() {
        assert!(commutator(&pauli_z(), &pauli_z()).unwrap().norm() == 0.0);
        let xy = commutator(&pauli_x(), &pauli_y()).unwrap();
        let expected = pauli_z().matrix() * Complex64::new(0.0, 2.0);
        assert!((xy - expected).norm() < 1e-15);
        let d1 = HermitianOperator::from_real_diagonal(&[1.0, -3.0, 2.0]).unwrap();
        let d2 = HermitianOperator::from_real_diagonal(&[0.5, 4.0, 7.0]).unwrap();
        assert!(commutator(&d1, &d2).unwrap().norm() == 0.0);
        assert!(commutator(&d1, &pauli_z()).is_err());
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(HermitianOperator::identity(2)).is_err());
        assert!(DensityMatrix::new(HermitianOperator::from_real_diagonal(&[1.5, -0.5]).unwrap()).is_err());
        assert!(DensityMatrix::new(HermitianOperator::from_real_diagonal(&[0.7, 0.3]).unwrap()).is_ok());
    }

    #[test]
    fn block_conjugation_matches_dense() {
        let w0 = unitary_exp(&random_hermitian(2, 1), 0.3).unwrap();
        let w1 = unitary_exp(&random_hermitian(2, 2), 0.7).unwrap();
        let mut u = CMatrix::zeros(4, 4);
        u.view_mut((0, 0), (2, 2)).copy_from(&w0);
        u.view_mut((2, 2), (2, 2)).copy_from(&w1);
        let x = random_hermitian(4, 3).into_matrix();
        let dense = &u * &x * u.adjoint();
        let blocked = conjugate_block_diagonal(&x, &[w0, w1]);
        assert!((dense - blocked).norm() < 1e-13);
    }

    #[test]
    fn json_round_trip() {
        let h = random_hermitian(3, 9);
        let s = serde_json::to_string(&h).unwrap();
        assert!(s.contains("\"re\"") && s.contains("\"im\""));
        let back: HermitianOperator = serde_json::from_str(&s).unwrap();
        assert!(back.frobenius_distance(&h) < 1e-15);
        let bad = r#"{"dim":2,"re":[[1.0]],"im":[[0.0]]}"#;
        assert!(serde_json::from_str::<HermitianOperator>(bad).is_err());
    }
}
