use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gates::{BellIndex, Bit, Pauli};
use super::matrix::{complement_indices, conjugate, qubit_mask, subspace_offsets, ComplexMatrix, ONE, ZERO};
use crate::error::{QssError, Result};

/// Default number of qubits a single density matrix may span (1024 x 1024).
pub const DEFAULT_QUBIT_CAP: usize = 10;

pub const VALIDATION_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;

/// Globally unique qubit identifier.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(name: impl AsRef<str>) -> Self {
        Label(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::new(s)
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label(Arc::from(s))
    }
}

impl From<&Label> for Label {
    fn from(l: &Label) -> Self {
        l.clone()
    }
}

pub fn labels<I, L>(names: I) -> Vec<Label>
where
    I: IntoIterator<Item = L>,
    L: Into<Label>,
{
    names.into_iter().map(Into::into).collect()
}

/// A density operator on an ordered list of labeled qubits.
///
/// Values are immutable; every operation returns a new state.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    labels: Vec<Label>,
}

/// Both branches of a projective measurement, without sampling.
#[derive(Clone, Debug)]
pub struct Branch<T> {
    pub outcome: T,
    pub probability: f64,
    /// Normalized post-measurement state, absent for zero-probability branches.
    pub state: Option<DensityMatrix>,
}

const ZERO_BRANCH: f64 = 1e-14;

impl DensityMatrix {
    /// Validating constructor: labels must be unique and match the dimension,
    /// and the matrix must be Hermitian, unit trace and positive semidefinite.
    pub fn new(matrix: ComplexMatrix, labels: Vec<Label>) -> Result<Self> {
        check_unique(&labels)?;
        if matrix.dim() != 1usize << labels.len() {
            return Err(QssError::labeling(format!(
                "{} labels do not match dimension {}",
                labels.len(),
                matrix.dim()
            )));
        }
        let state = Self { matrix, labels };
        state.validate()?;
        Ok(state)
    }

    /// Skips the eigenvalue check. Used on the output of operations that are
    /// completely positive by construction.
    pub(crate) fn from_parts(matrix: ComplexMatrix, labels: Vec<Label>) -> Self {
        debug_assert_eq!(matrix.dim(), 1usize << labels.len());
        debug_assert!(matrix.is_hermitian(1e-8), "non-Hermitian state");
        debug_assert!((matrix.trace().re - 1.0).abs() < 1e-8, "trace drifted");
        Self { matrix, labels }
    }

    pub fn pure(amplitudes: &[Complex64], labels: Vec<Label>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > VALIDATION_TOL {
            return Err(QssError::validation(format!("state vector norm^2 = {norm}")));
        }
        Self::new(ComplexMatrix::outer(amplitudes), labels)
    }

    /// Computational basis state; `bits[i]` is the value of `labels[i]`.
    pub fn basis(bits: &[u8], labels: Vec<Label>) -> Result<Self> {
        if bits.len() != labels.len() {
            return Err(QssError::labeling("one bit per label required"));
        }
        let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
        let mut v = vec![ZERO; 1 << bits.len()];
        v[idx] = ONE;
        Self::pure(&v, labels)
    }

    pub fn maximally_mixed(labels: Vec<Label>) -> Result<Self> {
        check_unique(&labels)?;
        let dim = 1usize << labels.len();
        Ok(Self::from_parts(
            ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
            labels,
        ))
    }

    /// Checks the three density-operator invariants.
    pub fn validate(&self) -> Result<()> {
        if !self.matrix.is_finite() {
            return Err(QssError::validation("non-finite entries"));
        }
        let herm = self.matrix.hermiticity_error();
        if herm > VALIDATION_TOL {
            return Err(QssError::validation(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > VALIDATION_TOL || tr.im.abs() > VALIDATION_TOL {
            return Err(QssError::validation(format!("trace {tr} != 1")));
        }
        let min = self.matrix.min_eigenvalue()?;
        if min < -PSD_TOL {
            return Err(QssError::validation(format!(
                "not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.labels.contains(label)
    }

    pub fn position(&self, label: &Label) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| QssError::labeling(format!("unknown qubit label {label}")))
    }

    fn positions(&self, targets: &[Label]) -> Result<Vec<usize>> {
        check_unique(targets)?;
        targets.iter().map(|l| self.position(l)).collect()
    }

    /// Same matrix under new names.
    pub fn relabel(&self, labels: Vec<Label>) -> Result<Self> {
        check_unique(&labels)?;
        if labels.len() != self.labels.len() {
            return Err(QssError::labeling("relabel must keep the qubit count"));
        }
        Ok(Self {
            matrix: self.matrix.clone(),
            labels,
        })
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `Tr(O ρ)` for an operator on `targets`.
    pub fn expectation(&self, op: &ComplexMatrix, targets: &[Label]) -> Result<f64> {
        let pos = self.positions(targets)?;
        if op.dim() != 1 << pos.len() {
            return Err(QssError::validation("operator size does not match targets"));
        }
        let applied = super::matrix::apply_left(&self.matrix, op, self.num_qubits(), &pos);
        Ok(applied.trace().re)
    }

    /// Applies `u ρ u†` where `u` acts on `targets` in the order given.
    pub fn apply_unitary(&self, u: &ComplexMatrix, targets: &[Label]) -> Result<Self> {
        let pos = self.positions(targets)?;
        if u.dim() != 1 << pos.len() {
            return Err(QssError::validation(format!(
                "gate of dimension {} cannot act on {} qubits",
                u.dim(),
                pos.len()
            )));
        }
        if !u.is_unitary(VALIDATION_TOL) {
            return Err(QssError::validation("gate is not unitary"));
        }
        let m = conjugate(&self.matrix, u, self.num_qubits(), &pos);
        Ok(Self::from_parts(m, self.labels.clone()))
    }

    /// Reorders qubits so that the label sequence becomes `new_order`.
    pub fn permute_qubits(&self, new_order: &[Label]) -> Result<Self> {
        if new_order.len() != self.labels.len() {
            return Err(QssError::labeling("new order is not a permutation of the labels"));
        }
        let old_pos = self
            .positions(new_order)
            .map_err(|_| QssError::labeling("new order is not a permutation of the labels"))?;
        let q = self.num_qubits();
        let dim = self.dim();
        let map: Vec<usize> = (0..dim)
            .map(|new_idx| {
                (0..q).fold(0usize, |acc, new_pos| {
                    if new_idx & qubit_mask(q, new_pos) != 0 {
                        acc | qubit_mask(q, old_pos[new_pos])
                    } else {
                        acc
                    }
                })
            })
            .collect();
        let m = ComplexMatrix::from_fn(dim, |r, c| self.matrix.get(map[r], map[c]));
        Ok(Self::from_parts(m, new_order.to_vec()))
    }

    /// Traces out `discard`, keeping the remaining qubits in their current order.
    pub fn partial_trace(&self, discard: &[Label]) -> Result<Self> {
        let drop_pos = self.positions(discard)?;
        if drop_pos.len() == self.num_qubits() {
            return Err(QssError::domain("cannot trace out every qubit"));
        }
        let q = self.num_qubits();
        let keep_pos: Vec<usize> = (0..q).filter(|p| !drop_pos.contains(p)).collect();
        let keep_off = super::matrix::subspace_offsets(q, &keep_pos);
        let drop_off = super::matrix::subspace_offsets(q, &drop_pos);
        let kd = keep_off.len();
        let mut out = ComplexMatrix::zeros(kd);
        for (r, &kr) in keep_off.iter().enumerate() {
            for (c, &kc) in keep_off.iter().enumerate() {
                let mut acc = ZERO;
                for &d in &drop_off {
                    acc += self.matrix.get(kr | d, kc | d);
                }
                out.set(r, c, acc);
            }
        }
        let labels = keep_pos.iter().map(|&p| self.labels[p].clone()).collect();
        Ok(Self::from_parts(out, labels))
    }

    /// Marginal on `keep`, in the order given.
    pub fn reduced(&self, keep: &[Label]) -> Result<Self> {
        self.positions(keep)?;
        let discard: Vec<Label> = self.labels.iter().filter(|l| !keep.contains(l)).cloned().collect();
        let traced = if discard.is_empty() {
            self.clone()
        } else {
            self.partial_trace(&discard)?
        };
        traced.permute_qubits(keep)
    }

    /// Transposes the indices of the qubits in `subset`. The result need not
    /// be positive, so it is returned as a bare matrix.
    pub fn partial_transpose(&self, subset: &[Label]) -> Result<ComplexMatrix> {
        let pos = self.positions(subset)?;
        let q = self.num_qubits();
        let smask = pos.iter().fold(0usize, |acc, &p| acc | qubit_mask(q, p));
        Ok(ComplexMatrix::from_fn(self.dim(), |r, c| {
            let r2 = (r & !smask) | (c & smask);
            let c2 = (c & !smask) | (r & smask);
            self.matrix.get(r2, c2)
        }))
    }

    /// Exact outcome probabilities and post-states of measuring `obs` on `qubit`.
    pub fn outcome_distribution(&self, qubit: &Label, obs: Pauli) -> Result<[Branch<Bit>; 2]> {
        if !obs.is_measurable() {
            return Err(QssError::validation("the identity is not a measurable observable"));
        }
        let pos = self.position(qubit)?;
        let q = self.num_qubits();
        let branch = |bit: Bit| {
            let projected = conjugate(&self.matrix, &obs.projector(bit), q, &[pos]);
            let p = projected.trace().re.max(0.0);
            let state = (p > ZERO_BRANCH).then(|| Self::from_parts(projected.scale(1.0 / p), self.labels.clone()));
            Branch {
                outcome: bit,
                probability: p,
                state,
            }
        };
        Ok([branch(Bit::ZERO), branch(Bit::ONE)])
    }

    /// Samples a single-qubit Pauli measurement. Only the sampled branch is
    /// projected; its probability matches [`Self::outcome_distribution`].
    pub fn measure_pauli<R: Rng + ?Sized>(
        &self,
        qubit: &Label,
        obs: Pauli,
        rng: &mut R,
    ) -> Result<(Bit, DensityMatrix)> {
        if !obs.is_measurable() {
            return Err(QssError::validation("the identity is not a measurable observable"));
        }
        let pos = self.position(qubit)?;
        let q = self.num_qubits();
        let outcomes = [Bit::ZERO, Bit::ONE];
        let projectors = outcomes.map(|b| obs.projector(b));
        let probs = projectors
            .each_ref()
            .map(|p| projected_trace(&self.matrix, p, q, &[pos]).max(0.0));
        let chosen = sample(&probs, rng);
        Ok((outcomes[chosen], self.project(&projectors[chosen], &[pos])))
    }

    fn project(&self, projector: &ComplexMatrix, positions: &[usize]) -> DensityMatrix {
        let projected = conjugate(&self.matrix, projector, self.num_qubits(), positions);
        let p = projected.trace().re;
        Self::from_parts(projected.scale(1.0 / p), self.labels.clone())
    }

    /// Exact distribution of a Bell-basis measurement on `(q1, q2)`.
    pub fn bell_distribution(&self, q1: &Label, q2: &Label) -> Result<[Branch<BellIndex>; 4]> {
        if q1 == q2 {
            return Err(QssError::labeling("Bell measurement needs two distinct qubits"));
        }
        let pos = [self.position(q1)?, self.position(q2)?];
        let q = self.num_qubits();
        Ok(BellIndex::ALL.map(|idx| {
            let projected = conjugate(&self.matrix, &idx.projector(), q, &pos);
            let p = projected.trace().re.max(0.0);
            let state = (p > ZERO_BRANCH).then(|| Self::from_parts(projected.scale(1.0 / p), self.labels.clone()));
            Branch {
                outcome: idx,
                probability: p,
                state,
            }
        }))
    }

    pub fn measure_bell<R: Rng + ?Sized>(
        &self,
        q1: &Label,
        q2: &Label,
        rng: &mut R,
    ) -> Result<(BellIndex, DensityMatrix)> {
        if q1 == q2 {
            return Err(QssError::labeling("Bell measurement needs two distinct qubits"));
        }
        let pos = [self.position(q1)?, self.position(q2)?];
        let q = self.num_qubits();
        let projectors = BellIndex::ALL.map(BellIndex::projector);
        let probs = projectors
            .each_ref()
            .map(|p| projected_trace(&self.matrix, p, q, &pos).max(0.0));
        let chosen = sample(&probs, rng);
        Ok((BellIndex::ALL[chosen], self.project(&projectors[chosen], &pos)))
    }

    /// Applies the same single-qubit basis change to every qubit.
    pub(crate) fn rotate_all(&self, rotation: &ComplexMatrix) -> ComplexMatrix {
        let q = self.num_qubits();
        (0..q).fold(self.matrix.clone(), |m, p| conjugate(&m, rotation, q, &[p]))
    }
}

/// `Tr(op · m)` with `op` embedded on `positions`, without forming the product.
fn projected_trace(m: &ComplexMatrix, op: &ComplexMatrix, nqubits: usize, positions: &[usize]) -> f64 {
    let offsets = subspace_offsets(nqubits, positions);
    let mut acc = ZERO;
    for b in complement_indices(nqubits, positions) {
        for (r, ro) in offsets.iter().enumerate() {
            for (c, co) in offsets.iter().enumerate() {
                let w = op.get(r, c);
                if w != ZERO {
                    acc += w * m.get(b | co, b | ro);
                }
            }
        }
    }
    acc.re
}

/// Index drawn with weights `probs`, skipping branches without support.
fn sample<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_supported = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= ZERO_BRANCH {
            continue;
        }
        last_supported = i;
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_supported
}

fn check_unique(labels: &[Label]) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l) {
            return Err(QssError::labeling(format!("duplicate qubit label {l}")));
        }
    }
    Ok(())
}

/// Kronecker product with the default qubit cap.
pub fn tensor_product(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    tensor_product_capped(a, b, DEFAULT_QUBIT_CAP)
}

pub fn tensor_product_capped(a: &DensityMatrix, b: &DensityMatrix, cap: usize) -> Result<DensityMatrix> {
    if let Some(l) = a.labels.iter().find(|l| b.labels.contains(l)) {
        return Err(QssError::labeling(format!("label {l} appears in both factors")));
    }
    let qubits = a.num_qubits() + b.num_qubits();
    if qubits > cap {
        return Err(QssError::Capacity {
            qubits,
            cap,
            context: "tensor product".into(),
        });
    }
    let labels = a.labels.iter().chain(&b.labels).cloned().collect();
    Ok(DensityMatrix::from_parts(a.matrix.kron(&b.matrix), labels))
}

/// Half the trace norm of `a - b`. Both states must carry the same labels in
/// the same order.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.labels != b.labels {
        return Err(QssError::labeling("trace distance needs identical label sequences"));
    }
    let diff = &a.matrix - &b.matrix;
    let eig = diff.eigenvalues_hermitian()?;
    Ok((0.5 * eig.iter().map(|e| e.abs()).sum::<f64>()).clamp(0.0, 1.0))
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    m.min_eigenvalue()
}
