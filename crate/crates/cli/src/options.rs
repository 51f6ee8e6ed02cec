use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use qss_core::harness::{ExperimentSpec, ReportFormat, DEFAULT_CHECK_RATE, DEFAULT_COPIES, DEFAULT_TRIALS};
use qss_core::{ObservablePolicy, PartyId, Pauli, ProbeMode, ProtocolConfig, StrategyKind, Variant};

/// Experiment options. Every flag can also be given in a JSON config file
/// under the same name; flags win over the file.
#[derive(Args, Debug, Default, Clone)]
pub struct ExperimentArgs {
    /// JSON file with defaults for any of the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// original | secure [default: secure]
    #[arg(long)]
    pub variant: Option<String>,
    /// none | bell-intercept | same-observable | random-basis | entangle-probe | cross-swap [default: none]
    #[arg(long)]
    pub strategy: Option<String>,
    /// Comma-separated cheating receivers [default: bob for bell-intercept, otherwise bob,charlie]
    #[arg(long)]
    pub cheaters: Option<String>,
    /// Smolin copies per run [default: 64]
    #[arg(long)]
    pub copies: Option<usize>,
    /// Probability that a position is requested for checking [default: 0.5]
    #[arg(long)]
    pub check_rate: Option<f64>,
    /// Attacked positions per honest receiver; a comma-separated list for sweeps [default: 1 with an attack]
    #[arg(long)]
    pub attacked: Option<String>,
    /// Runs per experiment [default: 10000]
    #[arg(long)]
    pub trials: Option<u64>,
    /// Master seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv | json [default: from the --out extension, else csv]
    #[arg(long)]
    pub format: Option<String>,
    /// Attack basis of same-observable measure-resend: X | Y | Z [default: Z]
    #[arg(long)]
    pub basis: Option<String>,
    /// Entangling probe: fresh-bell | cnot [default: fresh-bell]
    #[arg(long)]
    pub probe: Option<String>,
    /// uniform-per-copy | independent-per-party | X | Y | Z [default: independent-per-party for original, uniform-per-copy for secure]
    #[arg(long)]
    pub observables: Option<String>,
    /// Largest joint system the simulator may build, in qubits [default: 10]
    #[arg(long)]
    pub qubit_cap: Option<usize>,
}

/// Accepts a number, a list, or the flag's comma-separated text.
#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
enum ListValue {
    Number(u64),
    List(Vec<serde_json::Value>),
    Text(String),
}

impl ListValue {
    fn into_text(self) -> String {
        match self {
            ListValue::Number(n) => n.to_string(),
            ListValue::Text(s) => s,
            ListValue::List(items) => items
                .iter()
                .map(|v| v.as_str().map_or_else(|| v.to_string(), str::to_string))
                .collect::<Vec<_>>()
                .join(","),
        }
    }
}

#[derive(Deserialize, Debug, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct ConfigFile {
    variant: Option<String>,
    strategy: Option<String>,
    cheaters: Option<ListValue>,
    copies: Option<usize>,
    check_rate: Option<f64>,
    attacked: Option<ListValue>,
    trials: Option<u64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<String>,
    basis: Option<String>,
    probe: Option<String>,
    observables: Option<String>,
    qubit_cap: Option<usize>,
}

fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// Fully resolved options.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ProtocolConfig,
    pub strategy: StrategyKind,
    pub members: BTreeSet<PartyId>,
    pub attacked: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
}

impl ExperimentArgs {
    pub fn resolve(&self) -> Result<Resolved> {
        let file = match &self.config {
            Some(path) => load_config(path)?,
            None => ConfigFile::default(),
        };
        let pick = |flag: &Option<String>, file: Option<String>| flag.clone().or(file);

        let variant: Variant = pick(&self.variant, file.variant).map_or(Ok(Variant::Secure), |s| s.parse())?;
        let strategy_name = pick(&self.strategy, file.strategy).unwrap_or_else(|| "none".into());
        let strategy = parse_strategy(
            &strategy_name,
            pick(&self.basis, file.basis).as_deref(),
            pick(&self.probe, file.probe).as_deref(),
        )?;
        let members = match pick(&self.cheaters, file.cheaters.map(ListValue::into_text)) {
            Some(text) => parse_parties(&text)?,
            None => default_members(&strategy),
        };
        let attacked = match pick(&self.attacked, file.attacked.map(ListValue::into_text)) {
            Some(text) => parse_counts(&text)?,
            None if strategy == StrategyKind::HonestNull => vec![0],
            None => vec![1],
        };

        let copies = self.copies.or(file.copies).unwrap_or(DEFAULT_COPIES);
        let mut config = match variant {
            Variant::Original => ProtocolConfig::original(copies, 0),
            Variant::Secure => ProtocolConfig::secure(copies, DEFAULT_CHECK_RATE, 0),
        };
        if let Some(p) = self.check_rate.or(file.check_rate) {
            config.check_rate = p;
        }
        if let Some(policy) = pick(&self.observables, file.observables) {
            config.observable_policy = parse_policy(&policy)?;
        }
        if let Some(cap) = self.qubit_cap.or(file.qubit_cap) {
            config.qubit_cap = cap;
        }

        let out = self.out.clone().or(file.out);
        let format = match pick(&self.format, file.format) {
            Some(f) => f.parse()?,
            None if out
                .as_deref()
                .and_then(Path::extension)
                .is_some_and(|e| e.eq_ignore_ascii_case("json")) =>
            {
                ReportFormat::Json
            }
            None => ReportFormat::Csv,
        };

        Ok(Resolved {
            config,
            strategy,
            members,
            attacked,
            trials: self.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
            seed: self.seed.or(file.seed).unwrap_or(0),
            out,
            format,
        })
    }
}

impl Resolved {
    pub fn single_attacked(&self) -> Result<usize> {
        match self.attacked.as_slice() {
            [m] => Ok(*m),
            _ => bail!("`run` takes one --attacked value; use `sweep` for a list"),
        }
    }

    pub fn spec(&self, attacked: usize) -> Result<ExperimentSpec> {
        let spec = ExperimentSpec {
            config: self.config.clone(),
            strategy: self.strategy.clone(),
            members: self.members.clone(),
            attacked,
            trials: self.trials,
            master_seed: self.seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_strategy(name: &str, basis: Option<&str>, probe: Option<&str>) -> Result<StrategyKind> {
    let mut strategy: StrategyKind = name.parse()?;
    match &mut strategy {
        StrategyKind::SameObservableMeasureResend { basis: b } => {
            if let Some(text) = basis {
                let p: Pauli = text.parse()?;
                if !p.is_measurable() {
                    bail!("attack basis must be X, Y or Z");
                }
                *b = p;
            }
        }
        StrategyKind::EntanglingProbe { mode } => {
            if let Some(text) = probe {
                *mode = match text.trim() {
                    "fresh-bell" => ProbeMode::FreshBell,
                    "cnot" => ProbeMode::cnot_copy(),
                    other => bail!("unknown probe {other:?} (expected fresh-bell or cnot)"),
                };
            }
        }
        _ => {}
    }
    Ok(strategy)
}

fn default_members(strategy: &StrategyKind) -> BTreeSet<PartyId> {
    match strategy {
        StrategyKind::HonestNull => BTreeSet::new(),
        StrategyKind::BellInterceptResend => BTreeSet::from([PartyId::Bob]),
        _ => BTreeSet::from([PartyId::Bob, PartyId::Charlie]),
    }
}

fn parse_parties(text: &str) -> Result<BTreeSet<PartyId>> {
    let text = text.trim();
    if text.is_empty() || text.eq_ignore_ascii_case("none") {
        return Ok(BTreeSet::new());
    }
    text.split(',')
        .map(|s| s.parse::<PartyId>().map_err(Into::into))
        .collect()
}

fn parse_counts(text: &str) -> Result<Vec<usize>> {
    let counts = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .with_context(|| format!("invalid attacked-copy count {s:?}"))
        })
        .collect::<Result<Vec<_>>>()?;
    if counts.is_empty() {
        bail!("no attacked-copy counts given");
    }
    Ok(counts)
}

fn parse_policy(text: &str) -> Result<ObservablePolicy> {
    Ok(match text.trim() {
        "uniform-per-copy" => ObservablePolicy::UniformPerCopy,
        "independent-per-party" => ObservablePolicy::IndependentPerParty,
        other => ObservablePolicy::Fixed(other.parse()?),
    })
}
