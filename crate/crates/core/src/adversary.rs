//! Cheating strategies of corrupted receivers behind one coalition interface.
//!
//! The engine calls the coalition at fixed points of a run:
//! [`AdversaryCoalition::receive_own`] for qubits addressed to members,
//! [`AdversaryCoalition::intercept`] for targeted qubits addressed to honest
//! receivers, [`AdversaryCoalition::measure_own`] once observables are
//! known, [`AdversaryCoalition::adjust_announcements`] for check requests and
//! [`AdversaryCoalition::final_guess`] after the secret copy is identified.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{QssError, Result};
use crate::protocol::{CheckSets, Message, PartyId, SystemRegistry};
use crate::qsim::{cnot, BellIndex, Bit, ComplexMatrix, DensityMatrix, Label, Pauli};
use crate::smolin::{bell_state_on, smolin4};

#[derive(Clone, Debug, PartialEq)]
pub enum ProbeMode {
    /// Forward one half of a fresh `|Φ+>` pair and keep the other half; the
    /// intercepted qubit is dropped.
    FreshBell,
    /// Attach an ancilla in `|0>`, apply this 4x4 unitary to
    /// (intercepted, ancilla), forward the intercepted qubit and keep the ancilla.
    Isometry(ComplexMatrix),
}

impl ProbeMode {
    /// Isometry that copies the Z value of the intercepted qubit into the ancilla.
    pub fn cnot_copy() -> Self {
        ProbeMode::Isometry(cnot())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StrategyKind {
    HonestNull,
    /// Joint Bell measurement of the two honest receivers' qubits of a copy,
    /// then resend of a fresh pair in the observed Bell state.
    BellInterceptResend,
    SameObservableMeasureResend {
        basis: Pauli,
    },
    RandomBasisMeasureResend,
    EntanglingProbe {
        mode: ProbeMode,
    },
    /// Forward a qubit from elsewhere (first a member's own qubit, then the
    /// previously intercepted one) and keep the intercepted qubit.
    CrossCopySwap,
}

impl StrategyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::HonestNull => "none",
            StrategyKind::BellInterceptResend => "bell-intercept",
            StrategyKind::SameObservableMeasureResend { .. } => "same-observable",
            StrategyKind::RandomBasisMeasureResend => "random-basis",
            StrategyKind::EntanglingProbe { .. } => "entangle-probe",
            StrategyKind::CrossCopySwap => "cross-swap",
        }
    }

    /// Whether the coalition measures its own qubits in the attack basis
    /// (announce-and-compare variant only).
    fn measures_own_in_attack_basis(&self) -> bool {
        matches!(
            self,
            StrategyKind::SameObservableMeasureResend { .. } | StrategyKind::RandomBasisMeasureResend
        )
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = QssError;

    /// Parses the CLI names with default parameters (Z basis, fresh-Bell probe).
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "none" | "honest" => StrategyKind::HonestNull,
            "bell-intercept" => StrategyKind::BellInterceptResend,
            "same-observable" => StrategyKind::SameObservableMeasureResend { basis: Pauli::Z },
            "random-basis" => StrategyKind::RandomBasisMeasureResend,
            "entangle-probe" => StrategyKind::EntanglingProbe {
                mode: ProbeMode::FreshBell,
            },
            "cross-swap" => StrategyKind::CrossCopySwap,
            other => return Err(QssError::Parse(format!("unknown strategy {other:?}"))),
        })
    }
}

/// A qubit on its way from Alice to an honest receiver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InTransit {
    pub to: PartyId,
    pub position: usize,
    pub label: Label,
}

#[derive(Clone, Debug)]
enum InterceptRecord {
    Measured {
        basis: Pauli,
        bit: Bit,
    },
    /// The member's qubit now shares `outcome` with Alice's.
    Bell {
        outcome: BellIndex,
    },
    Probe {
        ancilla: Label,
        fresh_bell: bool,
    },
    Swapped,
}

#[derive(Clone, Debug)]
pub struct AdversaryCoalition {
    members: BTreeSet<PartyId>,
    strategy: StrategyKind,
    targets: Option<BTreeSet<(PartyId, usize)>>,
    /// Qubit held in each member slot; `None` once it was given away.
    own_slots: BTreeMap<(PartyId, usize), Option<Label>>,
    own_results: BTreeMap<(PartyId, usize), (Pauli, Bit)>,
    records: BTreeMap<(PartyId, usize), InterceptRecord>,
    /// Ancilla labels kept per attacked transmission.
    probe_store: BTreeMap<(PartyId, usize), Vec<Label>>,
    attack_basis: BTreeMap<usize, Pauli>,
    held: Option<Label>,
    vacated: Option<(PartyId, usize)>,
    knowledge: Vec<Message>,
}

impl AdversaryCoalition {
    /// At most two receivers may be corrupted; Alice never is.
    pub fn new(members: impl IntoIterator<Item = PartyId>, strategy: StrategyKind) -> Result<Self> {
        let members: BTreeSet<PartyId> = members.into_iter().collect();
        if members.contains(&PartyId::Alice) {
            return Err(QssError::Usage("Alice is always honest".into()));
        }
        if members.len() > 2 {
            return Err(QssError::Usage("at most two receivers can cheat".into()));
        }
        if let StrategyKind::EntanglingProbe {
            mode: ProbeMode::Isometry(u),
        } = &strategy
        {
            if u.dim() != 4 || !u.is_unitary(1e-10) {
                return Err(QssError::validation("probe isometry must be a 4x4 unitary"));
            }
        }
        Ok(Self {
            members,
            strategy,
            targets: None,
            own_slots: BTreeMap::new(),
            own_results: BTreeMap::new(),
            records: BTreeMap::new(),
            probe_store: BTreeMap::new(),
            attack_basis: BTreeMap::new(),
            held: None,
            vacated: None,
            knowledge: Vec::new(),
        })
    }

    /// No members and no attack.
    pub fn honest() -> Self {
        Self::new([], StrategyKind::HonestNull).expect("empty coalition")
    }

    /// Restricts interception to the given `(receiver, position)` transmissions.
    pub fn with_targets(mut self, targets: impl IntoIterator<Item = (PartyId, usize)>) -> Self {
        self.targets = Some(targets.into_iter().collect());
        self
    }

    pub fn members(&self) -> &BTreeSet<PartyId> {
        &self.members
    }

    pub fn strategy(&self) -> &StrategyKind {
        &self.strategy
    }

    pub fn is_member(&self, party: PartyId) -> bool {
        self.members.contains(&party)
    }

    pub fn honest_receivers(&self) -> Vec<PartyId> {
        PartyId::RECEIVERS
            .into_iter()
            .filter(|p| !self.members.contains(p))
            .collect()
    }

    pub fn knowledge(&self) -> &[Message] {
        &self.knowledge
    }

    pub fn probe_store(&self) -> &BTreeMap<(PartyId, usize), Vec<Label>> {
        &self.probe_store
    }

    /// Whether the coalition intercepts this transmission.
    pub fn wants(&self, to: PartyId, position: usize) -> bool {
        if self.members.is_empty() || self.strategy == StrategyKind::HonestNull || self.is_member(to) {
            return false;
        }
        self.targets.as_ref().is_none_or(|t| t.contains(&(to, position)))
    }

    pub fn observe(&mut self, msg: &Message) {
        self.knowledge.push(msg.clone());
    }

    pub fn receive_own(&mut self, party: PartyId, position: usize, label: Label) {
        debug_assert!(self.is_member(party));
        self.own_slots.insert((party, position), Some(label));
    }

    /// Handles qubits in transit to honest receivers and returns the labels
    /// actually delivered, in the same order. Every call must return before
    /// the next qubit is released, so a batch holds one qubit under ack
    /// gating and a whole copy's worth without it.
    pub fn intercept<R: Rng + ?Sized>(
        &mut self,
        batch: &[InTransit],
        registry: &mut SystemRegistry,
        rng: &mut R,
    ) -> Result<Vec<Label>> {
        match self.strategy.clone() {
            StrategyKind::HonestNull => Ok(batch.iter().map(|q| q.label.clone()).collect()),
            StrategyKind::BellInterceptResend => self.bell_intercept(batch, registry, rng),
            StrategyKind::SameObservableMeasureResend { basis } => batch
                .iter()
                .map(|q| self.measure_resend(q, basis, registry, rng))
                .collect(),
            StrategyKind::RandomBasisMeasureResend => batch
                .iter()
                .map(|q| {
                    let basis = *self
                        .attack_basis
                        .entry(q.position)
                        .or_insert_with(|| Pauli::MEASURABLE[rng.random_range(0..3)]);
                    self.measure_resend(q, basis, registry, rng)
                })
                .collect(),
            StrategyKind::EntanglingProbe { mode } => {
                batch.iter().map(|q| self.probe(q, &mode, registry, rng)).collect()
            }
            StrategyKind::CrossCopySwap => batch.iter().map(|q| self.swap(q)).collect(),
        }
    }

    fn bell_intercept<R: Rng + ?Sized>(
        &mut self,
        batch: &[InTransit],
        registry: &mut SystemRegistry,
        rng: &mut R,
    ) -> Result<Vec<Label>> {
        if self.members.len() != 1 {
            return Err(QssError::StrategyInfeasible(
                "Bell intercept-resend needs exactly one cheater and two honest receivers".into(),
            ));
        }
        let [first, second] = batch else {
            return Err(QssError::StrategyInfeasible(format!(
                "Bell intercept-resend needs both honest qubits of a copy in hand, got {} \
                 (each qubit must be acknowledged before the next is sent)",
                batch.len()
            )));
        };
        let outcome = registry.measure_bell(&first.label, &second.label, rng)?;
        registry.discard(&[first.label.clone(), second.label.clone()], rng)?;
        let fresh1 = registry.fresh_label("resend");
        let fresh2 = registry.fresh_label("resend");
        registry.add_block(bell_state_on(outcome, fresh1.clone(), fresh2.clone()))?;
        for q in batch {
            self.records
                .insert((q.to, q.position), InterceptRecord::Bell { outcome });
        }
        Ok(vec![fresh1, fresh2])
    }

    fn measure_resend<R: Rng + ?Sized>(
        &mut self,
        q: &InTransit,
        basis: Pauli,
        registry: &mut SystemRegistry,
        rng: &mut R,
    ) -> Result<Label> {
        let bit = registry.measure_pauli(&q.label, basis, rng)?;
        self.attack_basis.insert(q.position, basis);
        self.records
            .insert((q.to, q.position), InterceptRecord::Measured { basis, bit });
        Ok(q.label.clone())
    }

    fn probe<R: Rng + ?Sized>(
        &mut self,
        q: &InTransit,
        mode: &ProbeMode,
        registry: &mut SystemRegistry,
        rng: &mut R,
    ) -> Result<Label> {
        let ancilla = registry.fresh_label("probe");
        let (forward, fresh_bell) = match mode {
            ProbeMode::FreshBell => {
                let substitute = registry.fresh_label("substitute");
                registry.add_block(bell_state_on(BellIndex::PhiPlus, substitute.clone(), ancilla.clone()))?;
                registry.discard(std::slice::from_ref(&q.label), rng)?;
                (substitute, true)
            }
            ProbeMode::Isometry(u) => {
                registry.add_block(DensityMatrix::basis(&[0], vec![ancilla.clone()])?)?;
                registry.apply_unitary(u.clone(), &[q.label.clone(), ancilla.clone()], rng)?;
                (q.label.clone(), false)
            }
        };
        self.probe_store.insert((q.to, q.position), vec![ancilla.clone()]);
        self.records
            .insert((q.to, q.position), InterceptRecord::Probe { ancilla, fresh_bell });
        Ok(forward)
    }

    fn swap(&mut self, q: &InTransit) -> Result<Label> {
        let forward = match self.held.take() {
            Some(prev) => prev,
            None => {
                let (&slot, label) = self
                    .own_slots
                    .iter_mut()
                    .rev()
                    .find(|(_, l)| l.is_some())
                    .ok_or_else(|| {
                        QssError::StrategyInfeasible("cross-copy swap needs a qubit already in hand".into())
                    })?;
                self.vacated = Some(slot);
                label.take().expect("checked is_some")
            }
        };
        self.held = Some(q.label.clone());
        self.records.insert((q.to, q.position), InterceptRecord::Swapped);
        Ok(forward)
    }

    /// Observable a member reports for its own qubit when parties choose
    /// freely; `drawn` is what an honest party would have picked.
    pub fn choose_own_observable(&self, position: usize, drawn: Pauli) -> Pauli {
        if self.strategy.measures_own_in_attack_basis() {
            if let Some(&basis) = self.attack_basis.get(&position) {
                return basis;
            }
        }
        drawn
    }

    /// Measures every qubit the members hold. A slot whose qubit was given
    /// away is refilled with the last intercepted qubit, if any.
    pub fn measure_own<R: Rng + ?Sized>(
        &mut self,
        observable: impl Fn(PartyId, usize) -> Pauli,
        registry: &mut SystemRegistry,
        rng: &mut R,
    ) -> Result<()> {
        if let (Some(slot), Some(held)) = (self.vacated, self.held.take()) {
            self.own_slots.insert(slot, Some(held));
        }
        let slots: Vec<((PartyId, usize), Label)> = self
            .own_slots
            .iter()
            .filter_map(|(k, l)| l.clone().map(|l| (*k, l)))
            .collect();
        for ((party, pos), label) in slots {
            let obs = observable(party, pos);
            let bit = registry.measure_pauli(&label, obs, rng)?;
            self.own_results.insert((party, pos), (obs, bit));
        }
        Ok(())
    }

    /// The members' bit for one of their positions, as used in reconstruction.
    pub fn share(&self, party: PartyId, position: usize) -> Option<Bit> {
        self.own_results.get(&(party, position)).map(|(_, b)| *b)
    }

    /// Bits announced for the members' requested positions. A position whose
    /// recorded result matches the announced observable reports that result;
    /// anything else gets a uniform bit, since without the copy grouping
    /// there is nothing better to correlate with.
    pub fn adjust_announcements<R: Rng + ?Sized>(
        &mut self,
        requests: &CheckSets,
        announced: impl Fn(PartyId, usize) -> Pauli,
        rng: &mut R,
    ) -> Vec<(PartyId, usize, Bit)> {
        let mut out = Vec::new();
        for (&party, set) in requests {
            if !self.is_member(party) {
                continue;
            }
            for &pos in set {
                let bit = match self.own_results.get(&(party, pos)) {
                    Some(&(basis, bit)) if basis == announced(party, pos) => bit,
                    _ => Bit(rng.random()),
                };
                out.push((party, pos, bit));
            }
        }
        out
    }

    /// Best guess of Alice's bit for the revealed copy without any honest
    /// receiver's announcement.
    pub fn final_guess<R: Rng + ?Sized>(
        &mut self,
        reveal: &BTreeMap<PartyId, usize>,
        observable: Pauli,
        registry: &mut SystemRegistry,
        rng: &mut R,
    ) -> Result<Bit> {
        if self.members.is_empty() || self.strategy == StrategyKind::HonestNull {
            return Ok(Bit(rng.random()));
        }
        if self.strategy == StrategyKind::BellInterceptResend {
            let member = *self.members.iter().next().expect("one member");
            let bell = self.honest_keys(reveal).find_map(|k| match self.records.get(&k) {
                Some(InterceptRecord::Bell { outcome }) => Some(*outcome),
                _ => None,
            });
            let own = reveal.get(&member).and_then(|&pos| self.share(member, pos));
            return Ok(match (bell, own) {
                (Some(outcome), Some(own)) => own ^ outcome.same_basis_parity(observable),
                _ => Bit(rng.random()),
            });
        }
        let mut guess = Bit::ZERO;
        for (&party, &pos) in reveal {
            if self.is_member(party) {
                guess = guess ^ self.share(party, pos).unwrap_or_else(|| Bit(rng.random()));
                continue;
            }
            let estimate = match self.records.get(&(party, pos)).cloned() {
                Some(InterceptRecord::Measured { basis, bit }) if basis == observable => bit,
                Some(InterceptRecord::Probe { ancilla, fresh_bell }) => {
                    let bit = registry.measure_pauli(&ancilla, observable, rng)?;
                    if fresh_bell {
                        bit ^ BellIndex::PhiPlus.same_basis_parity(observable)
                    } else {
                        bit
                    }
                }
                _ => Bit(rng.random()),
            };
            guess = guess ^ estimate;
        }
        Ok(guess)
    }

    fn honest_keys<'a>(&'a self, reveal: &'a BTreeMap<PartyId, usize>) -> impl Iterator<Item = (PartyId, usize)> + 'a {
        reveal
            .iter()
            .filter(|(p, _)| !self.is_member(**p))
            .map(|(p, pos)| (*p, *pos))
    }
}

/// Exact check that a Bell intercept-resend by `cheater` leaves the other
/// three parties' joint state unchanged. Returns the honest marginal and the
/// marginal averaged over the cheater's Bell outcomes, both on Alice's
/// qubit followed by the two honest receivers' qubits.
pub fn bell_attack_views(cheater: PartyId) -> Result<(DensityMatrix, DensityMatrix)> {
    if cheater == PartyId::Alice {
        return Err(QssError::Usage("Alice is always honest".into()));
    }
    let honest: Vec<PartyId> = PartyId::RECEIVERS.into_iter().filter(|p| *p != cheater).collect();
    let letter = |p: PartyId| Label::new(p.qubit_letter().to_string());
    let view: Vec<Label> = [PartyId::Alice, honest[0], honest[1]].map(letter).to_vec();

    let state = smolin4();
    let honest_view = state.reduced(&view)?;

    let mut mixture = ComplexMatrix::zeros(8);
    for branch in state.bell_distribution(&letter(honest[0]), &letter(honest[1]))? {
        let Some(post) = branch.state else { continue };
        // Alice keeps her collapsed qubit; the honest pair receives a fresh
        // copy of the observed Bell state.
        let alice = post.reduced(&view[..1])?;
        let resent = bell_state_on(branch.outcome, view[1].clone(), view[2].clone());
        let joint = crate::qsim::tensor_product(&alice, &resent)?;
        mixture = &mixture + &joint.matrix().scale(branch.probability);
    }
    let attacked = DensityMatrix::new(mixture, view)?;
    Ok((honest_view, attacked))
}
