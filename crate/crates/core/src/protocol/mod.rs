//! Executable state machines for the announce-and-compare protocol and the
//! ordered, ack-gated protocol with security checks.

mod checks;
mod message;
mod original;
mod registry;
mod secure;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use checks::{reconstruct_secret, select_check_sets, verify_checks, Announcements, CheckSets, CheckVerdict};
pub use message::{AbortReason, Message, Transcript};
pub use original::run_original_protocol;
pub use registry::{MergeRecord, OpOutput, RegistryOp, SystemRegistry};
pub use secure::run_secure_protocol;

use crate::adversary::AdversaryCoalition;
use crate::error::{QssError, Result};
use crate::qsim::{labels, Bit, DensityMatrix, Label, Pauli, DEFAULT_QUBIT_CAP};
use crate::smolin::smolin4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PartyId {
    Alice,
    Bob,
    Charlie,
    Diana,
}

impl PartyId {
    pub const ALL: [PartyId; 4] = [PartyId::Alice, PartyId::Bob, PartyId::Charlie, PartyId::Diana];
    /// Parties that receive qubits from Alice.
    pub const RECEIVERS: [PartyId; 3] = [PartyId::Bob, PartyId::Charlie, PartyId::Diana];

    /// Letter naming this party's qubit in each copy.
    pub fn qubit_letter(self) -> char {
        match self {
            PartyId::Alice => 'A',
            PartyId::Bob => 'B',
            PartyId::Charlie => 'C',
            PartyId::Diana => 'D',
        }
    }

    /// Label of this party's qubit in copy `copy`.
    pub fn qubit(self, copy: usize) -> Label {
        Label::new(format!("{}{copy}", self.qubit_letter()))
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartyId::Alice => "Alice",
            PartyId::Bob => "Bob",
            PartyId::Charlie => "Charlie",
            PartyId::Diana => "Diana",
        })
    }
}

impl FromStr for PartyId {
    type Err = QssError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "alice" => Ok(PartyId::Alice),
            "bob" => Ok(PartyId::Bob),
            "charlie" => Ok(PartyId::Charlie),
            "diana" => Ok(PartyId::Diana),
            other => Err(QssError::Parse(format!("unknown party {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Original,
    Secure,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Original => "original",
            Variant::Secure => "secure",
        })
    }
}

impl FromStr for Variant {
    type Err = QssError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "original" => Ok(Variant::Original),
            "secure" => Ok(Variant::Secure),
            other => Err(QssError::Parse(format!("unknown protocol variant {other:?}"))),
        }
    }
}

/// How measurement observables are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservablePolicy {
    /// One uniformly random observable per copy, shared by all four qubits.
    UniformPerCopy,
    /// Every party draws its own observable uniformly (original variant only).
    IndependentPerParty,
    Fixed(Pauli),
}

impl ObservablePolicy {
    pub(crate) fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> Pauli {
        match self {
            ObservablePolicy::Fixed(p) => p,
            _ => Pauli::MEASURABLE[rng.random_range(0..3)],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub variant: Variant,
    pub copies: usize,
    pub check_rate: f64,
    pub observable_policy: ObservablePolicy,
    pub seed: u64,
    pub qubit_cap: usize,
}

impl ProtocolConfig {
    pub fn original(copies: usize, seed: u64) -> Self {
        Self {
            variant: Variant::Original,
            copies,
            check_rate: 1.0,
            observable_policy: ObservablePolicy::IndependentPerParty,
            seed,
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }

    pub fn secure(copies: usize, check_rate: f64, seed: u64) -> Self {
        Self {
            variant: Variant::Secure,
            copies,
            check_rate,
            observable_policy: ObservablePolicy::UniformPerCopy,
            seed,
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.copies == 0 {
            return Err(QssError::Usage("at least one copy is required".into()));
        }
        if self.qubit_cap < 4 {
            return Err(QssError::Usage("qubit cap must hold one four-qubit copy".into()));
        }
        if let Variant::Secure = self.variant {
            if self.copies < 2 {
                return Err(QssError::Usage("the secure variant needs at least two copies".into()));
            }
            if !(self.check_rate > 0.0 && self.check_rate <= 1.0) {
                return Err(QssError::Usage(format!(
                    "check rate {} outside (0, 1]",
                    self.check_rate
                )));
            }
            if self.observable_policy == ObservablePolicy::IndependentPerParty {
                return Err(QssError::Usage(
                    "in the secure variant Alice assigns one observable per copy".into(),
                ));
            }
        }
        if let ObservablePolicy::Fixed(Pauli::I) = self.observable_policy {
            return Err(QssError::Usage("the identity is not a measurable observable".into()));
        }
        Ok(())
    }
}

/// Three uniform permutations, one per receiver, mapping copy index to
/// transmission position. Known only to Alice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderingSecret {
    position_of: BTreeMap<PartyId, Vec<usize>>,
    copy_at: BTreeMap<PartyId, Vec<usize>>,
}

impl OrderingSecret {
    pub fn random<R: Rng + ?Sized>(copies: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let perms = PartyId::RECEIVERS.map(|p| {
            let mut perm: Vec<usize> = (0..copies).collect();
            perm.shuffle(rng);
            (p, perm)
        });
        Self::from_permutations(BTreeMap::from(perms)).expect("shuffles are permutations")
    }

    pub fn identity(copies: usize) -> Self {
        let perms = PartyId::RECEIVERS.map(|p| (p, (0..copies).collect()));
        Self::from_permutations(BTreeMap::from(perms)).expect("identity")
    }

    /// `position_of[party][copy]` for each receiver.
    pub fn from_permutations(position_of: BTreeMap<PartyId, Vec<usize>>) -> Result<Self> {
        let n = position_of.values().next().map_or(0, Vec::len);
        let mut copy_at = BTreeMap::new();
        for p in PartyId::RECEIVERS {
            let perm = position_of
                .get(&p)
                .ok_or_else(|| QssError::Usage(format!("missing permutation for {p}")))?;
            let mut inv = vec![usize::MAX; n];
            for (copy, &pos) in perm.iter().enumerate() {
                if pos >= n || inv[pos] != usize::MAX || perm.len() != n {
                    return Err(QssError::Usage(format!("ordering for {p} is not a bijection")));
                }
                inv[pos] = copy;
            }
            copy_at.insert(p, inv);
        }
        Ok(Self { position_of, copy_at })
    }

    pub fn copies(&self) -> usize {
        self.position_of[&PartyId::Bob].len()
    }

    pub fn position(&self, party: PartyId, copy: usize) -> usize {
        self.position_of[&party][copy]
    }

    pub fn copy_at(&self, party: PartyId, position: usize) -> usize {
        self.copy_at[&party][position]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    /// The secret was shared (secure) or every copy was processed (original).
    Completed,
    Detected,
    /// Every copy was touched by the security check; nothing left to share.
    NoUncheckedCopy,
    /// The configured attack could not be mounted under the channel rules.
    AttackInfeasible,
}

/// One secret bit that the receivers were able to reconstruct.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharedBit {
    pub copy: usize,
    pub observable: Pauli,
    pub alice_bit: Bit,
    pub reconstructed_bit: Bit,
    pub cheater_guess: Option<Bit>,
}

#[derive(Clone, Debug)]
pub struct ProtocolOutcome {
    pub variant: Variant,
    pub status: RunStatus,
    pub detected: bool,
    /// Copies whose three receiver positions were all checked.
    pub checked_copies: Vec<usize>,
    pub failing_copies: Vec<usize>,
    pub secret_copy: Option<usize>,
    pub alice_bit: Option<Bit>,
    pub reconstructed_bit: Option<Bit>,
    pub cheater_guess: Option<Bit>,
    /// Every reconstructable bit; at most one in the secure variant.
    pub shared: Vec<SharedBit>,
    pub infeasible: Option<String>,
    pub transcript: Transcript,
}

impl ProtocolOutcome {
    fn new(variant: Variant) -> Self {
        Self {
            variant,
            status: RunStatus::Completed,
            detected: false,
            checked_copies: Vec::new(),
            failing_copies: Vec::new(),
            secret_copy: None,
            alice_bit: None,
            reconstructed_bit: None,
            cheater_guess: None,
            shared: Vec::new(),
            infeasible: None,
            transcript: Transcript::default(),
        }
    }

    fn finish_shared(&mut self) {
        if let Some(first) = self.shared.first() {
            self.secret_copy = Some(first.copy);
            self.alice_bit = Some(first.alice_bit);
            self.reconstructed_bit = Some(first.reconstructed_bit);
            self.cheater_guess = first.cheater_guess;
        }
    }
}

/// Runs whichever variant `config` selects.
pub fn run_protocol(config: &ProtocolConfig, coalition: Option<AdversaryCoalition>) -> Result<ProtocolOutcome> {
    match config.variant {
        Variant::Original => run_original_protocol(config, coalition),
        Variant::Secure => run_secure_protocol(config, coalition),
    }
}

/// A fresh Smolin copy on labels `A{j} B{j} C{j} D{j}`.
pub(crate) fn copy_state(copy: usize) -> DensityMatrix {
    smolin4()
        .relabel(labels(PartyId::ALL.map(|p| p.qubit(copy))))
        .expect("four labels")
}
