//! Bell states, the four-qubit Smolin state, its 2n-qubit generalization and
//! the ancilla-controlled preparation circuit.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{QssError, Result};
use crate::qsim::{
    cnot, cz, labels, tensor_product_capped, BellIndex, Bit, ComplexMatrix, DensityMatrix, Label, Pauli,
    DEFAULT_QUBIT_CAP,
};

/// Qubit names of the four-party state, in order.
pub const PARTY_QUBITS: [&str; 4] = ["A", "B", "C", "D"];

pub fn bell_state(idx: BellIndex) -> DensityMatrix {
    bell_state_on(idx, "q1", "q2")
}

pub fn bell_state_on(idx: BellIndex, first: impl Into<Label>, second: impl Into<Label>) -> DensityMatrix {
    let matrix = idx.projector();
    DensityMatrix::new(matrix, vec![first.into(), second.into()]).expect("Bell projector is a valid state")
}

/// Equal mixture of `|φ><φ|_AB ⊗ |φ><φ|_CD` over the four Bell states.
pub fn smolin4() -> DensityMatrix {
    static STATE: OnceLock<DensityMatrix> = OnceLock::new();
    STATE
        .get_or_init(|| {
            let mut sum = ComplexMatrix::zeros(16);
            for idx in BellIndex::ALL {
                let p = idx.projector();
                sum = &sum + &p.kron(&p);
            }
            DensityMatrix::new(sum.scale(0.25), labels(PARTY_QUBITS)).expect("Smolin state is valid")
        })
        .clone()
}

/// Index `n` of the 2n-qubit generalized Smolin family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SmolinOrder(usize);

impl SmolinOrder {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(QssError::domain("generalized Smolin index must be at least 1"));
        }
        Ok(SmolinOrder(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn qubits(self) -> usize {
        2 * self.0
    }
}

pub fn generalized_smolin(n: usize) -> Result<DensityMatrix> {
    generalized_smolin_capped(SmolinOrder::new(n)?, DEFAULT_QUBIT_CAP)
}

/// `ρ_2 = |Ψ-><Ψ-|`, and for n ≥ 2
/// `ρ_2n = 1/4 Σ_m (U ρ_2(n-1) U) ⊗ (U ρ_2 U)` where each `U` applies `σ_m`
/// to the last qubit of its factor. Qubits are labelled `q1..q2n`.
pub fn generalized_smolin_capped(n: SmolinOrder, cap: usize) -> Result<DensityMatrix> {
    if n.qubits() > cap {
        return Err(QssError::Capacity {
            qubits: n.qubits(),
            cap,
            context: format!("generalized Smolin state with n = {}", n.get()),
        });
    }
    let base = BellIndex::PsiMinus.projector();
    let mut rho = base.clone();
    for k in 2..=n.get() {
        let width = 2 * (k - 1);
        let mut sum = ComplexMatrix::zeros(1 << (2 * k));
        for m in Pauli::ALL {
            let left = conjugate_last(&rho, width, m);
            let right = conjugate_last(&base, 2, m);
            sum = &sum + &left.kron(&right);
        }
        rho = sum.scale(0.25);
    }
    let names = (1..=n.qubits()).map(|i| format!("q{i}"));
    Ok(DensityMatrix::from_parts(rho, labels(names)))
}

fn conjugate_last(m: &ComplexMatrix, width: usize, p: Pauli) -> ComplexMatrix {
    let u = ComplexMatrix::identity(1 << (width - 1)).kron(&p.matrix());
    &(&u * m) * &u
}

/// Circuit input `|++>_{αβ} ⊗ |Φ+>_AB ⊗ |Φ+>_CD` on labels (alpha, beta, A, B, C, D).
pub fn circuit_input() -> DensityMatrix {
    let plus = DensityMatrix::pure(
        &[num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0); 2],
        labels(["alpha"]),
    )
    .expect("|+> is normalized");
    let beta = plus.relabel(labels(["beta"])).expect("one label");
    let ab = bell_state_on(BellIndex::PhiPlus, "A", "B");
    let cd = bell_state_on(BellIndex::PhiPlus, "C", "D");
    [beta, ab, cd]
        .iter()
        .try_fold(plus, |acc, s| tensor_product_capped(&acc, s, 6))
        .expect("six qubits")
}

/// Full six-qubit state after the four controlled gates, before discarding the ancillas.
pub fn circuit_output_with_ancillas() -> DensityMatrix {
    let gates = [
        (cz(), ["beta", "A"]),
        (cz(), ["beta", "C"]),
        (cnot(), ["alpha", "B"]),
        (cnot(), ["alpha", "D"]),
    ];
    gates.iter().fold(circuit_input(), |state, (gate, targets)| {
        state
            .apply_unitary(gate, &labels(*targets))
            .expect("built-in gates are unitary")
    })
}

/// Prepares the Smolin state from two Bell pairs and two `|+>` ancillas.
pub fn smolin_via_circuit() -> DensityMatrix {
    circuit_output_with_ancillas()
        .partial_trace(&labels(["alpha", "beta"]))
        .expect("ancillas present")
}

/// Exact probabilities of every bit tuple when `obs` is measured on every
/// qubit of `state`. Tuples are indexed big-endian in label order.
#[derive(Clone, Debug, Serialize)]
pub struct JointOutcomeDistribution {
    pub observable: Pauli,
    pub labels: Vec<Label>,
    pub probabilities: Vec<f64>,
}

impl JointOutcomeDistribution {
    pub fn probability(&self, bits: &[Bit]) -> f64 {
        assert_eq!(bits.len(), self.labels.len(), "tuple length");
        let idx = bits.iter().fold(0usize, |acc, b| (acc << 1) | b.as_u8() as usize);
        self.probabilities[idx]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<Bit>, f64)> + '_ {
        let q = self.labels.len();
        self.probabilities.iter().enumerate().map(move |(idx, &p)| {
            let bits = (0..q).map(|i| Bit(idx >> (q - 1 - i) & 1 == 1)).collect();
            (bits, p)
        })
    }

    /// Total probability of tuples whose XOR is 0.
    pub fn even_parity_mass(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx.count_ones() % 2 == 0)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

pub fn joint_distribution(state: &DensityMatrix, obs: Pauli) -> Result<JointOutcomeDistribution> {
    if !obs.is_measurable() {
        return Err(QssError::validation("the identity is not a measurable observable"));
    }
    let rotated = state.rotate_all(&obs.eigenbasis_rotation());
    let probabilities = (0..rotated.dim())
        .map(|i| {
            let p = rotated.get(i, i).re;
            if p < 1e-12 {
                0.0
            } else {
                p
            }
        })
        .collect();
    Ok(JointOutcomeDistribution {
        observable: obs,
        labels: state.labels().to_vec(),
        probabilities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::trace_distance;

    #[test]
    fn phi_plus_entries() {
        let m = bell_state(BellIndex::PhiPlus).matrix().clone();
        for r in 0..4 {
            for c in 0..4 {
                let expected = if [0, 3].contains(&r) && [0, 3].contains(&c) {
                    0.5
                } else {
                    0.0
                };
                assert!((m.get(r, c).re - expected).abs() < 1e-15 && m.get(r, c).im == 0.0);
            }
        }
    }

    #[test]
    fn bell_states_orthonormal() {
        for a in BellIndex::ALL {
            let ra = bell_state(a);
            assert!((ra.purity() - 1.0).abs() < 1e-12);
            assert!((ra.matrix().trace().re - 1.0).abs() < 1e-12);
            for b in BellIndex::ALL {
                let overlap = (ra.matrix() * bell_state(b).matrix()).trace().re;
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((overlap - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn smolin_purity_and_rank() {
        let s = smolin4();
        assert!((s.purity() - 0.25).abs() < 1e-12);
        assert!(s.matrix().min_eigenvalue().unwrap().abs() < 1e-10);
    }

    #[test]
    fn recursion_reproduces_smolin4() {
        let g = generalized_smolin(2).unwrap();
        assert!(g.matrix().max_abs_diff(smolin4().matrix()) < 1e-12);
    }

    #[test]
    fn circuit_reproduces_smolin4() {
        let c = smolin_via_circuit();
        assert_eq!(c.labels(), smolin4().labels());
        assert!(trace_distance(&c, &smolin4()).unwrap() <= 1e-12);
        assert!((circuit_input().purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circuit_gates_equal_block_unitary() {
        let via_blocks = circuit_input()
            .apply_unitary(
                &crate::qsim::smolin_preparation_unitary(),
                &labels(["alpha", "beta", "A", "B", "C", "D"]),
            )
            .unwrap();
        assert!(
            via_blocks
                .matrix()
                .max_abs_diff(circuit_output_with_ancillas().matrix())
                < 1e-12
        );
    }

    #[test]
    fn ancillas_end_maximally_mixed() {
        let anc = circuit_output_with_ancillas()
            .partial_trace(&labels(PARTY_QUBITS))
            .unwrap();
        assert!(anc.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale(0.25)) < 1e-12);
    }

    #[test]
    fn generalized_purity_follows_four_to_one_minus_n() {
        for n in 1..=4 {
            let g = generalized_smolin(n).unwrap();
            assert!((g.matrix().trace().re - 1.0).abs() < 1e-12);
            let expected = 4f64.powi(1 - n as i32);
            assert!((g.purity() - expected).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn generalized_capacity() {
        assert!(matches!(
            generalized_smolin(6),
            Err(QssError::Capacity { qubits: 12, .. })
        ));
        assert!(matches!(generalized_smolin(0), Err(QssError::Domain(_))));
    }

    #[test]
    fn singlet_is_anticorrelated() {
        let g = generalized_smolin(1).unwrap();
        for obs in Pauli::MEASURABLE {
            let d = joint_distribution(&g, obs).unwrap();
            assert!(d.even_parity_mass() < 1e-12);
        }
    }

    /// With eigenvalue +1 as bit 0, the recursion yields `<σ^{⊗2n}> = (-1)^n`:
    /// even-n members have even parity and odd-n members odd parity.
    #[test]
    fn generalized_parity_alternates_with_n() {
        for n in 2..=4 {
            let g = generalized_smolin(n).unwrap();
            for obs in Pauli::MEASURABLE {
                let d = joint_distribution(&g, obs).unwrap();
                assert!((d.total() - 1.0).abs() < 1e-10);
                let expected_even = if n % 2 == 0 { 1.0 } else { 0.0 };
                assert!((d.even_parity_mass() - expected_even).abs() < 1e-10, "n={n} {obs}");
            }
        }
    }

    #[test]
    fn smolin_joint_distribution_is_even() {
        for obs in Pauli::MEASURABLE {
            let d = joint_distribution(&smolin4(), obs).unwrap();
            for (bits, p) in d.iter() {
                if Bit::parity(bits.iter().copied()) == Bit::ONE {
                    assert!(p < 1e-12);
                } else {
                    assert!((p - 0.125).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn basis_state_joint_distribution() {
        let s = DensityMatrix::basis(&[0, 0], labels(["a", "b"])).unwrap();
        let d = joint_distribution(&s, Pauli::Z).unwrap();
        assert!((d.probability(&[Bit::ZERO, Bit::ZERO]) - 1.0).abs() < 1e-15);
        assert!(d.probabilities.iter().skip(1).all(|&p| p == 0.0));
    }
}
