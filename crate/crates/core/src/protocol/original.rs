use std::collections::BTreeMap;

use super::{
    copy_state, Message, ObservablePolicy, PartyId, ProtocolConfig, ProtocolOutcome, RunStatus, SharedBit,
    SystemRegistry, Variant,
};
use crate::adversary::{AdversaryCoalition, InTransit};
use crate::error::{QssError, Result};
use crate::qsim::{Bit, Label, Pauli};
use crate::seed::RunStreams;

/// Announce-and-compare protocol: every party measures an observable of its
/// own choosing, announces which one, and copies where all four coincide
/// carry a shared bit. All qubits of a copy leave Alice before any
/// acknowledgement, so an interceptor can hold several of them at once.
pub fn run_original_protocol(
    config: &ProtocolConfig,
    coalition: Option<AdversaryCoalition>,
) -> Result<ProtocolOutcome> {
    if config.variant != Variant::Original {
        return Err(QssError::Usage(
            "run_original_protocol needs the original variant".into(),
        ));
    }
    config.validate()?;
    let n = config.copies;
    let mut coalition = coalition.unwrap_or_else(AdversaryCoalition::honest);
    let mut streams = RunStreams::new(config.seed);
    let mut registry = SystemRegistry::new(config.qubit_cap);
    let mut outcome = ProtocolOutcome::new(Variant::Original);
    let emit = |outcome: &mut ProtocolOutcome, coalition: &mut AdversaryCoalition, msg: Message| {
        coalition.observe(&msg);
        outcome.transcript.push(msg);
    };

    for j in 0..n {
        registry.add_block(copy_state(j))?;
    }

    let mut delivered: BTreeMap<(PartyId, usize), Label> = BTreeMap::new();
    for j in 0..n {
        let mut batch = Vec::new();
        for party in PartyId::RECEIVERS {
            emit(
                &mut outcome,
                &mut coalition,
                Message::QubitSend { to: party, position: j },
            );
            let label = party.qubit(j);
            if coalition.is_member(party) {
                coalition.receive_own(party, j, label);
            } else if coalition.wants(party, j) {
                batch.push(InTransit {
                    to: party,
                    position: j,
                    label,
                });
            } else {
                delivered.insert((party, j), label);
            }
        }
        if !batch.is_empty() {
            match coalition.intercept(&batch, &mut registry, &mut streams.adversary) {
                Ok(forwarded) => {
                    for (q, label) in batch.iter().zip(forwarded) {
                        delivered.insert((q.to, q.position), label);
                    }
                }
                Err(QssError::StrategyInfeasible(reason)) => {
                    outcome.status = RunStatus::AttackInfeasible;
                    outcome.infeasible = Some(reason);
                    return Ok(outcome);
                }
                Err(e) => return Err(e),
            }
        }
        for party in PartyId::RECEIVERS {
            emit(
                &mut outcome,
                &mut coalition,
                Message::Ack {
                    from: party,
                    position: j,
                },
            );
        }
    }

    let mut choices: BTreeMap<PartyId, Vec<Pauli>> = PartyId::ALL.iter().map(|&p| (p, Vec::with_capacity(n))).collect();
    for j in 0..n {
        let shared = config.observable_policy.draw(&mut streams.public);
        for party in PartyId::ALL {
            let drawn = match config.observable_policy {
                ObservablePolicy::IndependentPerParty => config.observable_policy.draw(&mut streams.public),
                _ => shared,
            };
            let obs = if coalition.is_member(party) {
                coalition.choose_own_observable(j, drawn)
            } else {
                drawn
            };
            choices.get_mut(&party).expect("all parties").push(obs);
        }
    }

    let mut alice_bits = Vec::with_capacity(n);
    for (j, &obs) in choices[&PartyId::Alice].iter().enumerate() {
        alice_bits.push(registry.measure_pauli(&PartyId::Alice.qubit(j), obs, &mut streams.quantum)?);
    }
    let mut honest_bits: BTreeMap<(PartyId, usize), Bit> = BTreeMap::new();
    for (&(party, j), label) in &delivered {
        let bit = registry.measure_pauli(label, choices[&party][j], &mut streams.quantum)?;
        honest_bits.insert((party, j), bit);
    }
    coalition.measure_own(|p, j| choices[&p][j], &mut registry, &mut streams.adversary)?;

    emit(
        &mut outcome,
        &mut coalition,
        Message::ObservableAnnouncement {
            observables: choices.clone(),
        },
    );

    for j in 0..n {
        let obs = choices[&PartyId::Alice][j];
        if PartyId::RECEIVERS.iter().any(|p| choices[p][j] != obs) {
            continue;
        }
        let shares = PartyId::RECEIVERS.map(|p| {
            if coalition.is_member(p) {
                coalition.share(p, j)
            } else {
                honest_bits.get(&(p, j)).copied()
            }
        });
        let Some(shares) = shares.into_iter().collect::<Option<Vec<Bit>>>() else {
            continue;
        };
        for (party, &bit) in PartyId::RECEIVERS.iter().zip(&shares) {
            emit(
                &mut outcome,
                &mut coalition,
                Message::ResultAnnouncement {
                    from: *party,
                    position: j,
                    bit,
                },
            );
        }
        let cheater_guess = if coalition.members().is_empty() {
            None
        } else {
            let reveal = PartyId::RECEIVERS.iter().map(|&p| (p, j)).collect();
            Some(coalition.final_guess(&reveal, obs, &mut registry, &mut streams.adversary)?)
        };
        outcome.shared.push(SharedBit {
            copy: j,
            observable: obs,
            alice_bit: alice_bits[j],
            reconstructed_bit: Bit::parity(shares),
            cheater_guess,
        });
    }
    outcome.finish_shared();
    Ok(outcome)
}
