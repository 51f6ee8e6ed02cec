//! Pauli observables, Bell states and the fixed gates used by the circuits.

use std::fmt;
use std::ops::BitXor;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, I, ONE, ZERO};
use crate::error::QssError;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Single-qubit Pauli operator. `I` only appears inside constructions such
/// as the generalized Smolin recursion; it is never a valid measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// The three observables a party can be told to measure.
    pub const MEASURABLE: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> ComplexMatrix {
        let entries = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -I, I, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        ComplexMatrix::from_row_major(&entries).expect("2x2")
    }

    pub fn is_measurable(self) -> bool {
        self != Pauli::I
    }

    /// Unitary whose rows are the (+1, -1) eigenvectors, i.e. the change of
    /// basis that maps the eigenbasis of `self` onto the computational basis.
    pub(crate) fn eigenbasis_rotation(self) -> ComplexMatrix {
        let h = FRAC_1_SQRT_2;
        let entries = match self {
            Pauli::I | Pauli::Z => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [
                Complex64::new(h, 0.0),
                Complex64::new(h, 0.0),
                Complex64::new(h, 0.0),
                Complex64::new(-h, 0.0),
            ],
            // <+i| = (1, -i)/sqrt2, <-i| = (1, i)/sqrt2
            Pauli::Y => [
                Complex64::new(h, 0.0),
                Complex64::new(0.0, -h),
                Complex64::new(h, 0.0),
                Complex64::new(0.0, h),
            ],
        };
        ComplexMatrix::from_row_major(&entries).expect("2x2")
    }

    /// Projector onto the eigenspace reported as `bit`.
    pub(crate) fn projector(self, bit: Bit) -> ComplexMatrix {
        let sign = if bit.is_set() { -0.5 } else { 0.5 };
        let id = ComplexMatrix::identity(2).scale(0.5);
        &id + &self.matrix().scale(sign)
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Pauli {
    type Err = QssError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" => Ok(Pauli::I),
            "X" => Ok(Pauli::X),
            "Y" => Ok(Pauli::Y),
            "Z" => Ok(Pauli::Z),
            other => Err(QssError::Parse(format!("unknown Pauli observable {other:?}"))),
        }
    }
}

/// A measurement result. Eigenvalue +1 is bit 0 and eigenvalue -1 is bit 1,
/// so the XOR of bits is 0 exactly when the product of eigenvalues is +1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bit(pub bool);

impl Bit {
    pub const ZERO: Bit = Bit(false);
    pub const ONE: Bit = Bit(true);

    pub fn from_eigenvalue(value: i8) -> Bit {
        Bit(value < 0)
    }

    pub fn eigenvalue(self) -> i8 {
        if self.0 {
            -1
        } else {
            1
        }
    }

    pub fn is_set(self) -> bool {
        self.0
    }

    pub fn as_u8(self) -> u8 {
        self.0 as u8
    }

    /// XOR of all bits in the iterator.
    pub fn parity(bits: impl IntoIterator<Item = Bit>) -> Bit {
        bits.into_iter().fold(Bit::ZERO, |acc, b| acc ^ b)
    }
}

impl BitXor for Bit {
    type Output = Bit;

    fn bitxor(self, rhs: Bit) -> Bit {
        Bit(self.0 ^ rhs.0)
    }
}

impl From<bool> for Bit {
    fn from(b: bool) -> Self {
        Bit(b)
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

pub type MeasurementOutcome = Bit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellIndex {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellIndex {
    pub const ALL: [BellIndex; 4] = [
        BellIndex::PhiPlus,
        BellIndex::PhiMinus,
        BellIndex::PsiPlus,
        BellIndex::PsiMinus,
    ];

    /// Amplitudes over |00>, |01>, |10>, |11>.
    pub fn vector(self) -> [Complex64; 4] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            BellIndex::PhiPlus => [h, ZERO, ZERO, h],
            BellIndex::PhiMinus => [h, ZERO, ZERO, -h],
            BellIndex::PsiPlus => [ZERO, h, h, ZERO],
            BellIndex::PsiMinus => [ZERO, h, -h, ZERO],
        }
    }

    pub fn projector(self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.vector())
    }

    /// Bit `r1 ^ r2` obtained when both halves are measured in `obs`.
    /// Each Bell state is an eigenstate of `obs ⊗ obs`.
    pub fn same_basis_parity(self, obs: Pauli) -> Bit {
        let positive = match (self, obs) {
            (_, Pauli::I) => true,
            (BellIndex::PhiPlus, Pauli::Y) => false,
            (BellIndex::PhiPlus, _) => true,
            (BellIndex::PhiMinus, Pauli::X) => false,
            (BellIndex::PhiMinus, _) => true,
            (BellIndex::PsiPlus, Pauli::Z) => false,
            (BellIndex::PsiPlus, _) => true,
            (BellIndex::PsiMinus, _) => false,
        };
        Bit(!positive)
    }
}

impl fmt::Display for BellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BellIndex::PhiPlus => "PhiPlus",
            BellIndex::PhiMinus => "PhiMinus",
            BellIndex::PsiPlus => "PsiPlus",
            BellIndex::PsiMinus => "PsiMinus",
        };
        f.write_str(s)
    }
}

/// Two-qubit controlled gate, control on the first qubit.
pub fn controlled(target_op: Pauli) -> ComplexMatrix {
    let p0 = ComplexMatrix::from_row_major(&[ONE, ZERO, ZERO, ZERO]).expect("2x2");
    let p1 = ComplexMatrix::from_row_major(&[ZERO, ZERO, ZERO, ONE]).expect("2x2");
    &p0.kron(&ComplexMatrix::identity(2)) + &p1.kron(&target_op.matrix())
}

pub fn cnot() -> ComplexMatrix {
    controlled(Pauli::X)
}

pub fn cz() -> ComplexMatrix {
    controlled(Pauli::Z)
}

/// The 64x64 ancilla-controlled unitary of the Smolin preparation circuit,
/// on qubit order (alpha, beta, A, B, C, D):
/// `|00><00| ⊗ I + |01><01| ⊗ Z_A Z_C + |10><10| ⊗ X_B X_D + |11><11| ⊗ Z_A X_B Z_C X_D`.
pub fn smolin_preparation_unitary() -> ComplexMatrix {
    let kron_all = |ops: [Pauli; 4]| ops.iter().skip(1).fold(ops[0].matrix(), |acc, p| acc.kron(&p.matrix()));
    use Pauli::{I as Id, X, Z};
    let branches = [
        kron_all([Id, Id, Id, Id]),
        kron_all([Z, Id, Z, Id]),
        kron_all([Id, X, Id, X]),
        kron_all([Z, X, Z, X]),
    ];
    let mut u = ComplexMatrix::zeros(64);
    for (ab, branch) in branches.iter().enumerate() {
        let mut selector = ComplexMatrix::zeros(4);
        selector.set(ab, ab, ONE);
        u = &u + &selector.kron(branch);
    }
    u
}
