//! Fixtures shared by the criterion benchmarks.

use qss_core::adversary::{AdversaryCoalition, StrategyKind};
use qss_core::harness::ExperimentSpec;
use qss_core::{PartyId, ProtocolConfig, Variant};

/// A same-observable coalition of Bob and Charlie attacking `attacked`
/// positions per honest receiver.
pub fn attacked_spec(copies: usize, attacked: usize, trials: u64) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(Variant::Secure);
    spec.config = ProtocolConfig::secure(copies, 0.5, 0);
    spec.strategy = StrategyKind::SameObservableMeasureResend {
        basis: qss_core::Pauli::Z,
    };
    spec.members = [PartyId::Bob, PartyId::Charlie].into();
    spec.attacked = attacked;
    spec.trials = trials;
    spec
}

pub fn probe_coalition() -> AdversaryCoalition {
    AdversaryCoalition::new(
        [PartyId::Bob, PartyId::Charlie],
        StrategyKind::EntanglingProbe {
            mode: qss_core::ProbeMode::FreshBell,
        },
    )
    .expect("two receivers form a valid coalition")
}
