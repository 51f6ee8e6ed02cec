use std::collections::BTreeMap;

use rand::Rng;

use super::{
    copy_state, reconstruct_secret, select_check_sets, verify_checks, AbortReason, Announcements, Message,
    OrderingSecret, PartyId, ProtocolConfig, ProtocolOutcome, RunStatus, SharedBit, SystemRegistry, Variant,
};
use crate::adversary::{AdversaryCoalition, InTransit};
use crate::error::{QssError, Result};
use crate::qsim::{Bit, Label, Pauli};
use crate::seed::RunStreams;

/// Ordered, ack-gated protocol with a parity check on randomly requested
/// positions. Qubits leave Alice one at a time in the order
/// Bob, Charlie, Diana for each position, each only after the previous one
/// was acknowledged.
pub fn run_secure_protocol(config: &ProtocolConfig, coalition: Option<AdversaryCoalition>) -> Result<ProtocolOutcome> {
    if config.variant != Variant::Secure {
        return Err(QssError::Usage("run_secure_protocol needs the secure variant".into()));
    }
    config.validate()?;
    run_with_streams(config, coalition, RunStreams::new(config.seed))
}

fn run_with_streams(
    config: &ProtocolConfig,
    coalition: Option<AdversaryCoalition>,
    mut streams: RunStreams,
) -> Result<ProtocolOutcome> {
    let n = config.copies;
    let mut coalition = coalition.unwrap_or_else(AdversaryCoalition::honest);
    let mut registry = SystemRegistry::new(config.qubit_cap);
    let mut outcome = ProtocolOutcome::new(Variant::Secure);
    let emit = |outcome: &mut ProtocolOutcome, coalition: &mut AdversaryCoalition, msg: Message| {
        coalition.observe(&msg);
        outcome.transcript.push(msg);
    };

    // Step 1: prepare, then stream in secret order with ack gating.
    for j in 0..n {
        registry.add_block(copy_state(j))?;
    }
    let ordering = OrderingSecret::random(n, &mut streams.ordering);
    let mut delivered: BTreeMap<(PartyId, usize), Label> = BTreeMap::new();
    for t in 0..n {
        for party in PartyId::RECEIVERS {
            emit(
                &mut outcome,
                &mut coalition,
                Message::QubitSend { to: party, position: t },
            );
            let label = party.qubit(ordering.copy_at(party, t));
            if coalition.is_member(party) {
                coalition.receive_own(party, t, label);
            } else if coalition.wants(party, t) {
                let batch = [InTransit {
                    to: party,
                    position: t,
                    label,
                }];
                match coalition.intercept(&batch, &mut registry, &mut streams.adversary) {
                    Ok(mut forwarded) => {
                        delivered.insert((party, t), forwarded.remove(0));
                    }
                    Err(QssError::StrategyInfeasible(reason)) => {
                        outcome.status = RunStatus::AttackInfeasible;
                        outcome.infeasible = Some(reason);
                        return Ok(outcome);
                    }
                    Err(e) => return Err(e),
                }
            } else {
                delivered.insert((party, t), label);
            }
            emit(
                &mut outcome,
                &mut coalition,
                Message::Ack {
                    from: party,
                    position: t,
                },
            );
        }
    }

    // Step 2: one observable per copy, announced per position.
    let copy_obs: Vec<Pauli> = (0..n)
        .map(|_| config.observable_policy.draw(&mut streams.public))
        .collect();
    let announced = |party: PartyId, t: usize| copy_obs[ordering.copy_at(party, t)];
    let observables = PartyId::RECEIVERS
        .iter()
        .map(|&p| (p, (0..n).map(|t| announced(p, t)).collect()))
        .collect();
    emit(
        &mut outcome,
        &mut coalition,
        Message::ObservableAnnouncement { observables },
    );

    let mut alice_bits = Vec::with_capacity(n);
    for (j, &obs) in copy_obs.iter().enumerate() {
        alice_bits.push(registry.measure_pauli(&PartyId::Alice.qubit(j), obs, &mut streams.quantum)?);
    }
    let mut honest_bits: BTreeMap<(PartyId, usize), Bit> = BTreeMap::new();
    for (&(party, t), label) in &delivered {
        let bit = registry.measure_pauli(label, announced(party, t), &mut streams.quantum)?;
        honest_bits.insert((party, t), bit);
    }
    coalition.measure_own(announced, &mut registry, &mut streams.adversary)?;

    // Step 3: security check.
    let requests = select_check_sets(n, config.check_rate, &mut streams.public);
    emit(
        &mut outcome,
        &mut coalition,
        Message::CheckRequest {
            positions: requests.clone(),
        },
    );
    let mut announcements = Announcements::new();
    for (&party, set) in &requests {
        if coalition.is_member(party) {
            continue;
        }
        for &t in set {
            announcements.insert((party, t), honest_bits[&(party, t)]);
        }
    }
    for (party, t, bit) in coalition.adjust_announcements(&requests, announced, &mut streams.adversary) {
        announcements.insert((party, t), bit);
    }
    for (&(from, position), &bit) in &announcements {
        emit(
            &mut outcome,
            &mut coalition,
            Message::ResultAnnouncement { from, position, bit },
        );
    }
    let verdict = verify_checks(&requests, &announcements, &ordering, &alice_bits);
    outcome.checked_copies = verdict.verified.clone();
    outcome.failing_copies = verdict.failing.clone();
    if verdict.detected {
        outcome.detected = true;
        outcome.status = RunStatus::Detected;
        emit(
            &mut outcome,
            &mut coalition,
            Message::Abort {
                reason: AbortReason::CheckFailed,
            },
        );
        return Ok(outcome);
    }

    // Step 4: share one copy none of whose qubits was requested.
    let unchecked: Vec<usize> = (0..n)
        .filter(|&j| {
            PartyId::RECEIVERS
                .iter()
                .all(|p| !requests.get(p).is_some_and(|s| s.contains(&ordering.position(*p, j))))
        })
        .collect();
    if unchecked.is_empty() {
        outcome.status = RunStatus::NoUncheckedCopy;
        emit(
            &mut outcome,
            &mut coalition,
            Message::Abort {
                reason: AbortReason::NoUncheckedCopy,
            },
        );
        return Ok(outcome);
    }
    let k = unchecked[streams.ordering.random_range(0..unchecked.len())];
    let reveal: BTreeMap<PartyId, usize> = PartyId::RECEIVERS
        .iter()
        .map(|&p| (p, ordering.position(p, k)))
        .collect();
    emit(
        &mut outcome,
        &mut coalition,
        Message::RevealPositions {
            positions: reveal.clone(),
        },
    );

    let mut shares = [Bit::ZERO; 3];
    for (slot, (&party, &t)) in shares.iter_mut().zip(&reveal) {
        *slot = if coalition.is_member(party) {
            coalition
                .share(party, t)
                .ok_or_else(|| QssError::validation(format!("{party} holds no result for position {t}")))?
        } else {
            honest_bits[&(party, t)]
        };
    }
    let reconstructed = reconstruct_secret(&verdict, shares)?;
    let cheater_guess = if coalition.members().is_empty() {
        None
    } else {
        Some(coalition.final_guess(&reveal, copy_obs[k], &mut registry, &mut streams.adversary)?)
    };
    outcome.shared.push(SharedBit {
        copy: k,
        observable: copy_obs[k],
        alice_bit: alice_bits[k],
        reconstructed_bit: reconstructed,
        cheater_guess,
    });
    outcome.finish_shared();
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{ProbeMode, StrategyKind};
    use crate::protocol::PartyId::{Bob, Charlie, Diana};

    #[test]
    fn honest_runs_complete() {
        for seed in 0..200 {
            let out = run_secure_protocol(&ProtocolConfig::secure(12, 0.5, seed), None).unwrap();
            assert!(!out.detected);
            assert!(
                out.transcript.check_causality().is_ok(),
                "{:?}",
                out.transcript.check_causality()
            );
            match out.status {
                RunStatus::Completed => assert_eq!(out.reconstructed_bit, out.alice_bit),
                RunStatus::NoUncheckedCopy => assert!(out.secret_copy.is_none()),
                other => panic!("unexpected status {other:?}"),
            }
        }
    }

    #[test]
    fn full_check_leaves_nothing_to_share() {
        let out = run_secure_protocol(&ProtocolConfig::secure(4, 1.0, 3), None).unwrap();
        assert_eq!(out.status, RunStatus::NoUncheckedCopy);
        assert_eq!(out.checked_copies, vec![0, 1, 2, 3]);
        assert!(!out.detected);
    }

    #[test]
    fn bell_intercept_is_infeasible() {
        for seed in 0..20 {
            let c = AdversaryCoalition::new([Bob], StrategyKind::BellInterceptResend).unwrap();
            let out = run_secure_protocol(&ProtocolConfig::secure(4, 0.5, seed), Some(c)).unwrap();
            assert_eq!(out.status, RunStatus::AttackInfeasible);
            assert!(out.infeasible.is_some());
        }
    }

    #[test]
    fn detected_runs_reveal_nothing() {
        let mut detected = 0;
        for seed in 0..100 {
            let c = AdversaryCoalition::new(
                [Bob, Charlie],
                StrategyKind::EntanglingProbe {
                    mode: ProbeMode::FreshBell,
                },
            )
            .unwrap();
            let out = run_secure_protocol(&ProtocolConfig::secure(6, 1.0, seed), Some(c)).unwrap();
            if out.detected {
                detected += 1;
                assert!(out.secret_copy.is_none());
                assert!(!out
                    .transcript
                    .messages()
                    .iter()
                    .any(|m| matches!(m, Message::RevealPositions { .. })));
                assert!(!out.failing_copies.is_empty());
            }
        }
        // escape probability 2^-6 per run
        assert!(detected >= 90);
    }

    #[test]
    fn coalition_sees_every_broadcast() {
        let c = AdversaryCoalition::new([Diana], StrategyKind::HonestNull).unwrap();
        let config = ProtocolConfig::secure(5, 0.5, 8);
        let out = run_secure_protocol(&config, Some(c.clone())).unwrap();
        let honest = run_secure_protocol(&config, None).unwrap();
        // An inactive coalition changes nothing public.
        assert_eq!(out.transcript, honest.transcript);
    }

    fn with_ordering(config: &ProtocolConfig, ordering_seed: u64) -> ProtocolOutcome {
        let mut streams = RunStreams::new(config.seed);
        streams.ordering = crate::seed::rng_from(ordering_seed);
        run_with_streams(config, None, streams).unwrap()
    }

    fn observable_counts(msg: &Message) -> BTreeMap<PartyId, [usize; 4]> {
        let Message::ObservableAnnouncement { observables } = msg else {
            panic!("expected observable announcement, got {msg}");
        };
        observables
            .iter()
            .map(|(&p, obs)| {
                let mut c = [0; 4];
                for o in obs {
                    c[Pauli::ALL.iter().position(|x| x == o).unwrap()] += 1;
                }
                (p, c)
            })
            .collect()
    }

    #[test]
    fn public_record_hides_the_ordering() {
        let config = ProtocolConfig::secure(6, 0.5, 21);
        let runs: Vec<ProtocolOutcome> = (0..8).map(|s| with_ordering(&config, 1000 + s)).collect();
        let first = runs[0].transcript.messages();
        let split = first
            .iter()
            .position(|m| matches!(m, Message::ObservableAnnouncement { .. }))
            .unwrap();
        assert_eq!(split, 2 * 3 * 6);
        let mut orderings_differ = false;
        for run in &runs[1..] {
            let msgs = run.transcript.messages();
            assert_eq!(&msgs[..split], &first[..split]);
            assert_eq!(observable_counts(&msgs[split]), observable_counts(&first[split]));
            orderings_differ |= msgs[split] != first[split];
            let req = |m: &[Message]| m.iter().find(|x| matches!(x, Message::CheckRequest { .. })).cloned();
            assert_eq!(req(msgs), req(first));
        }
        assert!(orderings_differ);
    }

    #[test]
    fn cross_swap_runs_within_cap() {
        for seed in 0..20 {
            let c = AdversaryCoalition::new([Bob, Charlie], StrategyKind::CrossCopySwap).unwrap();
            let out = run_secure_protocol(&ProtocolConfig::secure(8, 0.5, seed), Some(c)).unwrap();
            assert_ne!(out.status, RunStatus::AttackInfeasible);
        }
    }
}
