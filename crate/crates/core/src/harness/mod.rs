//! Seeded Monte-Carlo experiments over protocol runs.
//!
//! Trial `t` runs with seed `derive(master_seed, t)` (see [`crate::seed`]),
//! so results do not depend on how trials are scheduled across threads.

mod report;
mod stats;

use std::collections::BTreeSet;
use std::ops::Add;
use std::time::Instant;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{parse_report, read_report, render_report, write_report, ReportFormat, ReportRow, COLUMNS};
pub use stats::{escape_log_slope, weighted_linear_fit, wilson_interval, Interval, Z_95};

use crate::adversary::{AdversaryCoalition, StrategyKind};
use crate::error::{QssError, Result};
use crate::protocol::{run_protocol, PartyId, ProtocolConfig, ProtocolOutcome, RunStatus, Variant};
use crate::seed::{derive, rng_from};

pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_COPIES: usize = 64;
pub const DEFAULT_CHECK_RATE: f64 = 0.5;

/// Salt of the per-trial stream that picks attacked positions.
const TARGET_SALT: u64 = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub config: ProtocolConfig,
    pub strategy: StrategyKind,
    pub members: BTreeSet<PartyId>,
    /// Attacked transmissions per honest receiver.
    pub attacked: usize,
    pub trials: u64,
    pub master_seed: u64,
}

impl ExperimentSpec {
    /// Defaults: 64 copies, check rate 0.5, 10^4 trials, no attack.
    pub fn new(variant: Variant) -> Self {
        let config = match variant {
            Variant::Original => ProtocolConfig::original(DEFAULT_COPIES, 0),
            Variant::Secure => ProtocolConfig::secure(DEFAULT_COPIES, DEFAULT_CHECK_RATE, 0),
        };
        Self {
            config,
            strategy: StrategyKind::HonestNull,
            members: BTreeSet::new(),
            attacked: 0,
            trials: DEFAULT_TRIALS,
            master_seed: 0,
        }
    }

    pub fn with_attack(
        mut self,
        strategy: StrategyKind,
        members: impl IntoIterator<Item = PartyId>,
        attacked: usize,
    ) -> Self {
        self.strategy = strategy;
        self.members = members.into_iter().collect();
        self.attacked = attacked;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.trials == 0 {
            return Err(QssError::Usage("at least one trial is required".into()));
        }
        if self.attacked > self.config.copies {
            return Err(QssError::Usage(format!(
                "cannot attack {} of {} copies",
                self.attacked, self.config.copies
            )));
        }
        AdversaryCoalition::new(self.members.iter().copied(), self.strategy.clone()).map(|_| ())
    }

    /// Protocol seed of trial `t`.
    pub fn trial_seed(&self, t: u64) -> u64 {
        derive(self.master_seed, t)
    }

    /// The coalition of trial `t`, targeting `attacked` uniformly chosen
    /// positions of each honest receiver.
    pub fn coalition_for(&self, t: u64) -> Result<AdversaryCoalition> {
        let coalition = AdversaryCoalition::new(self.members.iter().copied(), self.strategy.clone())?;
        let mut rng = rng_from(derive(self.trial_seed(t), TARGET_SALT));
        let n = self.config.copies;
        let targets: Vec<(PartyId, usize)> = coalition
            .honest_receivers()
            .into_iter()
            .flat_map(|p| {
                let mut picked = sample(&mut rng, n, self.attacked).into_vec();
                picked.sort_unstable();
                picked.into_iter().map(move |pos| (p, pos))
            })
            .collect();
        Ok(coalition.with_targets(targets))
    }

    pub fn run_trial(&self, t: u64) -> Result<ProtocolOutcome> {
        let config = self.config.with_seed(self.trial_seed(t));
        run_protocol(&config, Some(self.coalition_for(t)?))
    }
}

/// Exact integer tallies; addition is commutative, so parallel and serial
/// aggregation agree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialCounts {
    pub trials: u64,
    pub detected: u64,
    pub infeasible: u64,
    pub no_unchecked_copy: u64,
    pub shared_bits: u64,
    pub reconstructed_correctly: u64,
    pub guesses: u64,
    pub correct_guesses: u64,
}

impl TrialCounts {
    pub fn from_outcome(out: &ProtocolOutcome) -> Self {
        let mut c = TrialCounts {
            trials: 1,
            detected: out.detected as u64,
            infeasible: (out.status == RunStatus::AttackInfeasible) as u64,
            no_unchecked_copy: (out.status == RunStatus::NoUncheckedCopy) as u64,
            ..Default::default()
        };
        for s in &out.shared {
            c.shared_bits += 1;
            c.reconstructed_correctly += (s.reconstructed_bit == s.alice_bit) as u64;
            if let Some(g) = s.cheater_guess {
                c.guesses += 1;
                c.correct_guesses += (g == s.alice_bit) as u64;
            }
        }
        c
    }
}

impl Add for TrialCounts {
    type Output = TrialCounts;

    fn add(self, o: TrialCounts) -> TrialCounts {
        TrialCounts {
            trials: self.trials + o.trials,
            detected: self.detected + o.detected,
            infeasible: self.infeasible + o.infeasible,
            no_unchecked_copy: self.no_unchecked_copy + o.no_unchecked_copy,
            shared_bits: self.shared_bits + o.shared_bits,
            reconstructed_correctly: self.reconstructed_correctly + o.reconstructed_correctly,
            guesses: self.guesses + o.guesses,
            correct_guesses: self.correct_guesses + o.correct_guesses,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub variant: Variant,
    pub strategy: String,
    pub members: Vec<PartyId>,
    pub copies: usize,
    pub check_rate: f64,
    pub attacked: usize,
    pub trials: u64,
    pub master_seed: u64,
    pub counts: TrialCounts,
    pub detection_rate: f64,
    pub detection_ci: Interval,
    pub escape_rate: f64,
    /// Over shared bits of undetected runs for which the coalition guessed.
    pub cheater_accuracy: Option<f64>,
    pub cheater_accuracy_ci: Option<Interval>,
    /// Fraction of shared bits the receivers reconstructed correctly.
    pub reconstruction_rate: Option<f64>,
    pub infeasible_rate: f64,
    /// `1 - escape_rate^(1/m)`; undefined without attacked copies.
    pub epsilon_hat: Option<f64>,
    /// Wall-clock time, left out of serialized reports so they stay reproducible.
    #[serde(skip)]
    pub runtime_seconds: f64,
}

impl MetricsReport {
    pub fn from_counts(spec: &ExperimentSpec, counts: TrialCounts, runtime_seconds: f64) -> Self {
        let t = counts.trials as f64;
        let ratio = |k: u64, n: u64| (n > 0).then(|| k as f64 / n as f64);
        let escape_rate = (counts.trials - counts.detected) as f64 / t;
        let epsilon_hat = (spec.attacked > 0).then(|| 1.0 - escape_rate.powf(1.0 / spec.attacked as f64));
        Self {
            variant: spec.config.variant,
            strategy: spec.strategy.name().to_string(),
            members: spec.members.iter().copied().collect(),
            copies: spec.config.copies,
            check_rate: spec.config.check_rate,
            attacked: spec.attacked,
            trials: counts.trials,
            master_seed: spec.master_seed,
            counts,
            detection_rate: counts.detected as f64 / t,
            detection_ci: wilson_interval(counts.detected, counts.trials, Z_95).expect("trials > 0"),
            escape_rate,
            cheater_accuracy: ratio(counts.correct_guesses, counts.guesses),
            cheater_accuracy_ci: wilson_interval(counts.correct_guesses, counts.guesses, Z_95),
            reconstruction_rate: ratio(counts.reconstructed_correctly, counts.shared_bits),
            infeasible_rate: counts.infeasible as f64 / t,
            epsilon_hat,
            runtime_seconds,
        }
    }
}

fn with_experiment_context(spec: &ExperimentSpec, e: QssError) -> QssError {
    match e {
        QssError::Capacity { qubits, cap, context } => QssError::Capacity {
            qubits,
            cap,
            context: format!("strategy {} with qubit cap {cap}: {context}", spec.strategy),
        },
        other => other,
    }
}

/// Runs `spec.trials` independent protocol runs in parallel and aggregates them.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<MetricsReport> {
    spec.validate()?;
    let start = Instant::now();
    let counts = (0..spec.trials)
        .into_par_iter()
        .map(|t| spec.run_trial(t).map(|out| TrialCounts::from_outcome(&out)))
        .try_reduce(TrialCounts::default, |a, b| Ok(a + b))
        .map_err(|e| with_experiment_context(spec, e))?;
    Ok(MetricsReport::from_counts(spec, counts, start.elapsed().as_secs_f64()))
}

/// Serial reference implementation of [`run_experiment`].
pub fn run_experiment_serial(spec: &ExperimentSpec) -> Result<MetricsReport> {
    spec.validate()?;
    let start = Instant::now();
    let mut counts = TrialCounts::default();
    for t in 0..spec.trials {
        let out = spec.run_trial(t).map_err(|e| with_experiment_context(spec, e))?;
        counts = counts + TrialCounts::from_outcome(&out);
    }
    Ok(MetricsReport::from_counts(spec, counts, start.elapsed().as_secs_f64()))
}

/// One report per attacked-copy count, all using the template's master seed.
pub fn sweep(template: &ExperimentSpec, attacked: &[usize]) -> Result<Vec<MetricsReport>> {
    if let Some(&m) = attacked.iter().find(|&&m| m > template.config.copies) {
        return Err(QssError::Usage(format!(
            "cannot attack {m} of {} copies",
            template.config.copies
        )));
    }
    attacked
        .iter()
        .map(|&m| {
            run_experiment(&ExperimentSpec {
                attacked: m,
                ..template.clone()
            })
        })
        .collect()
}

/// Per-copy escape probability `1 - eps` from a sweep, via a weighted fit of
/// log escape rate against `m`.
pub fn fitted_escape_per_copy(reports: &[MetricsReport]) -> Option<f64> {
    let points: Vec<(usize, u64, u64)> = reports
        .iter()
        .map(|r| (r.attacked, r.counts.trials - r.counts.detected, r.counts.trials))
        .collect();
    escape_log_slope(&points).map(f64::exp)
}
