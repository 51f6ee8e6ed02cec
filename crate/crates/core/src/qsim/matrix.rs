//! Dense complex square matrices and the index arithmetic used to act on
//! individual qubits of a register without building full-size operators.
//!
//! Qubit `i` of a `q`-qubit register is stored in bit `q - 1 - i` of a basis
//! index, so the first qubit is the most significant one (`|q0 q1 ... >`).

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QssError, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            inner: DMatrix::from_fn(dim, dim, f),
        }
    }

    /// Builds a matrix from row-major entries. Fails unless the slice is a
    /// non-empty perfect square of finite numbers.
    pub fn from_row_major(entries: &[Complex64]) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != entries.len() {
            return Err(QssError::validation(format!(
                "{} entries do not form a square matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QssError::validation("matrix entries must be finite"));
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(dim, dim, entries),
        })
    }

    /// Outer product `|v><v|`.
    pub fn outer(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), |r, c| v[r] * v[c].conj())
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.inner[(r, c)]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, z: Complex64) {
        self.inner[(r, c)] = z;
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            inner: &self.inner * Complex64::new(s, 0.0),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            inner: self.inner.kronecker(&other.inner),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    pub fn is_finite(&self) -> bool {
        self.inner.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entrywise modulus of `self - other`. Dimensions must agree.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let prod = self * &self.adjoint();
        prod.max_abs_diff(&Self::identity(self.dim())) <= tol
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    pub fn eigenvalues_hermitian(&self) -> Result<Vec<f64>> {
        let err = self.hermiticity_error();
        if err > 1e-10 {
            return Err(QssError::validation(format!(
                "matrix is not Hermitian (deviation {err:e})"
            )));
        }
        // Symmetrize so the solver sees an exactly Hermitian input.
        let herm = (&self.inner + self.inner.adjoint()) * Complex64::new(0.5, 0.0);
        let mut values: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        Ok(values)
    }

    /// Smallest eigenvalue of a Hermitian matrix.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues_hermitian()?[0])
    }

    /// Row-major copy of all entries.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                out.push(self.get(r, c));
            }
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix(dim={}) {}", self.dim(), self.inner)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

/// Bit mask of qubit `pos` in a `nqubits` register.
#[inline]
pub(crate) fn qubit_mask(nqubits: usize, pos: usize) -> usize {
    1 << (nqubits - 1 - pos)
}

/// For every assignment `s` of the target qubits (big-endian in `positions`
/// order), the bits it contributes to a full basis index.
pub(crate) fn subspace_offsets(nqubits: usize, positions: &[usize]) -> Vec<usize> {
    let k = positions.len();
    (0..1usize << k)
        .map(|s| {
            positions
                .iter()
                .enumerate()
                .filter(|(i, _)| s & (1 << (k - 1 - i)) != 0)
                .map(|(_, &p)| qubit_mask(nqubits, p))
                .fold(0, |acc, m| acc | m)
        })
        .collect()
}

/// All basis indices whose target bits are zero.
pub(crate) fn complement_indices(nqubits: usize, positions: &[usize]) -> Vec<usize> {
    let tmask = positions.iter().fold(0usize, |acc, &p| acc | qubit_mask(nqubits, p));
    (0..1usize << nqubits).filter(|i| i & tmask == 0).collect()
}

/// `op · m` where `op` acts on the qubits at `positions` and identity elsewhere.
pub(crate) fn apply_left(m: &ComplexMatrix, op: &ComplexMatrix, nqubits: usize, positions: &[usize]) -> ComplexMatrix {
    let sub = op.dim();
    debug_assert_eq!(sub, 1 << positions.len());
    let offsets = subspace_offsets(nqubits, positions);
    let bases = complement_indices(nqubits, positions);
    let dim = m.dim();
    let mut out = ComplexMatrix::zeros(dim);
    let mut gathered = vec![ZERO; sub];
    for c in 0..dim {
        for &b in &bases {
            for (s, off) in offsets.iter().enumerate() {
                gathered[s] = m.get(b | off, c);
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (s, g) in gathered.iter().enumerate() {
                    let w = op.get(r, s);
                    if w != ZERO {
                        acc += w * g;
                    }
                }
                out.set(b | off, c, acc);
            }
        }
    }
    out
}

/// `op · m · op†` with `op` embedded on `positions`.
pub(crate) fn conjugate(m: &ComplexMatrix, op: &ComplexMatrix, nqubits: usize, positions: &[usize]) -> ComplexMatrix {
    let sub = op.dim();
    debug_assert_eq!(sub, 1 << positions.len());
    let offsets = subspace_offsets(nqubits, positions);
    let bases = complement_indices(nqubits, positions);
    let dim = m.dim();
    // Column-major storage: entry (r, c) lives at c * dim + r.
    let src = m.inner.as_slice();
    let opd: Vec<Complex64> = (0..sub * sub).map(|k| op.get(k / sub, k % sub)).collect();
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    let dst = out.as_mut_slice();
    // Per (row base, column base) block: op · m_blk · op†.
    let mut blk = vec![ZERO; sub * sub];
    let mut right = vec![ZERO; sub * sub];
    for &cb in &bases {
        for &rb in &bases {
            for (t, to) in offsets.iter().enumerate() {
                let col = (cb | to) * dim + rb;
                for (s, so) in offsets.iter().enumerate() {
                    blk[s * sub + t] = src[col + so];
                }
            }
            // right = blk · op†, i.e. right[s][c] = Σ_t blk[s][t] conj(op[c][t])
            for s in 0..sub {
                for c in 0..sub {
                    let mut acc = ZERO;
                    for t in 0..sub {
                        acc += blk[s * sub + t] * opd[c * sub + t].conj();
                    }
                    right[s * sub + c] = acc;
                }
            }
            for (c, co) in offsets.iter().enumerate() {
                let col = (cb | co) * dim + rb;
                for (r, ro) in offsets.iter().enumerate() {
                    let mut acc = ZERO;
                    for s in 0..sub {
                        acc += opd[r * sub + s] * right[s * sub + c];
                    }
                    dst[col + ro] = acc;
                }
            }
        }
    }
    ComplexMatrix { inner: out }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn row_major_rejects_non_square() {
        assert!(ComplexMatrix::from_row_major(&[ONE; 3]).is_err());
        assert!(ComplexMatrix::from_row_major(&[]).is_err());
        assert!(ComplexMatrix::from_row_major(&[c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn embedded_operator_matches_kronecker() {
        let x = ComplexMatrix::from_row_major(&[ZERO, ONE, ONE, ZERO]).unwrap();
        let y = ComplexMatrix::from_row_major(&[ZERO, -I, I, ZERO]).unwrap();
        let m = ComplexMatrix::from_fn(8, |r, col| c((r * 8 + col) as f64, (r as f64) - (col as f64)));
        // X on qubit 1, Y on qubit 2 of a 3-qubit register
        let xy = x.kron(&y);
        let full = ComplexMatrix::identity(2).kron(&xy);
        let expected = &full * &m;
        let got = apply_left(&m, &xy, 3, &[1, 2]);
        assert!(got.max_abs_diff(&expected) < 1e-12);

        // reversed target order means Y on qubit 1, X on qubit 2
        let full_rev = ComplexMatrix::identity(2).kron(&y.kron(&x));
        let got_rev = apply_left(&m, &xy, 3, &[2, 1]);
        assert!(got_rev.max_abs_diff(&(&full_rev * &m)) < 1e-12);
    }

    #[test]
    fn conjugation_matches_kronecker() {
        let u = ComplexMatrix::from_fn(4, |r, col| c((r + 2 * col) as f64 * 0.1, (r as f64 - col as f64) * 0.3));
        let m = ComplexMatrix::from_fn(8, |r, col| c((r * 8 + col) as f64, (r as f64) * (col as f64) - 3.0));
        // u on qubits (2, 0): swap to bring the pair into (0, 2) order, then embed
        let swap = ComplexMatrix::from_fn(4, |r, col| if r == ((col & 1) << 1 | col >> 1) { ONE } else { ZERO });
        let reordered = &(&swap * &u) * &swap;
        let full = ComplexMatrix::from_fn(8, |r, col| {
            if (r >> 1) & 1 != (col >> 1) & 1 {
                return ZERO;
            }
            let pair = |i: usize| (i >> 2) << 1 | (i & 1);
            reordered.get(pair(r), pair(col))
        });
        let expected = &(&full * &m) * &full.adjoint();
        assert!(conjugate(&m, &u, 3, &[2, 0]).max_abs_diff(&expected) < 1e-10);
        let single = ComplexMatrix::from_row_major(&[c(0.6, 0.0), c(0.0, 0.8), c(0.8, 0.0), c(0.0, -0.6)]).unwrap();
        let full = ComplexMatrix::identity(2)
            .kron(&single)
            .kron(&ComplexMatrix::identity(2));
        let expected = &(&full * &m) * &full.adjoint();
        assert!(conjugate(&m, &single, 3, &[1]).max_abs_diff(&expected) < 1e-10);
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let m = ComplexMatrix::from_fn(3, |r, col| if r == col { c(3.0 - r as f64, 0.0) } else { ZERO });
        assert_eq!(m.eigenvalues_hermitian().unwrap().len(), 3);
        assert!((m.min_eigenvalue().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_reject_non_hermitian() {
        let m = ComplexMatrix::from_row_major(&[ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!(matches!(m.min_eigenvalue(), Err(QssError::Validation(_))));
    }

    #[test]
    fn half_identity_min_eigenvalue() {
        let m = ComplexMatrix::identity(2).scale(0.5);
        assert!((m.min_eigenvalue().unwrap() - 0.5).abs() < 1e-15);
    }
}
