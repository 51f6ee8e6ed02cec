//! Simulation toolkit for quantum secret sharing with Smolin states.
//!
//! * [`qsim`] exact density-matrix simulation.
//! * [`smolin`] Bell, Smolin and generalized Smolin constructors.
//! * [`protocol`] the announce-and-compare and the ordered, checked protocols.
//! * [`adversary`] cheating strategies of corrupted receivers.
//! * [`harness`] seeded Monte-Carlo experiments and reports.
//! * [`seed`] deterministic seed derivation.
//! * [`verify`] exact self-checks of the state constructors.

pub mod adversary;
pub mod error;
pub mod harness;
pub mod protocol;
pub mod qsim;
pub mod seed;
pub mod smolin;
pub mod verify;

pub use adversary::{AdversaryCoalition, ProbeMode, StrategyKind};
pub use error::{QssError, Result};
pub use harness::{run_experiment, sweep, write_report, ExperimentSpec, MetricsReport, ReportFormat};
pub use protocol::{
    run_protocol, ObservablePolicy, PartyId, ProtocolConfig, ProtocolOutcome, RunStatus, Transcript, Variant,
};
pub use qsim::{BellIndex, Bit, ComplexMatrix, DensityMatrix, Label, Pauli};
