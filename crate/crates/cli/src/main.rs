//! `qss`: run protocol experiments, sweeps and state self-checks.

mod options;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use options::{ExperimentArgs, Resolved};
use qss_core::harness::{render_report, run_experiment, sweep, write_report};
use qss_core::qsim::dump_matrix;
use qss_core::smolin::{generalized_smolin, smolin4, smolin_via_circuit};
use qss_core::verify::run_state_checks;

#[derive(Parser, Debug)]
#[command(name = "qss", version, about = "Smolin-state quantum secret sharing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment and write a one-row report.
    Run(ExperimentArgs),
    /// Run one experiment per attacked-copy count (`--attacked 1,2,4`).
    Sweep(ExperimentArgs),
    /// Run the exact state-identity and partial-transpose checks.
    VerifyStates,
    /// Print the message log of a single protocol run.
    Transcript {
        #[command(flatten)]
        args: ExperimentArgs,
        /// Trial index whose derived seed is used.
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Print a state's density matrix in the debug dump format.
    DumpState {
        #[arg(value_parser = ["smolin4", "circuit", "generalized"])]
        state: String,
        /// Order of the generalized family member (2n qubits).
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run(args) => {
            let r = args.resolve()?;
            let spec = r.spec(r.single_attacked()?)?;
            let report = run_experiment(&spec)?;
            emit(&r, &[report])?;
        }
        Command::Sweep(args) => {
            let r = args.resolve()?;
            let spec = r.spec(0)?;
            let reports = sweep(&spec, &r.attacked)?;
            emit(&r, &reports)?;
        }
        Command::VerifyStates => {
            let checks = run_state_checks();
            let mut all = true;
            for c in &checks {
                println!("{c}");
                all &= c.passed;
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} checks, {failed} failed", checks.len());
            return Ok(if all { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
        Command::Transcript { args, trial } => {
            let r = args.resolve()?;
            let spec = r.spec(r.single_attacked()?)?;
            spec.validate()?;
            let out = spec.run_trial(trial)?;
            let text = out.transcript.export();
            match &r.out {
                Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
        }
        Command::DumpState { state, order } => {
            let rho = match state.as_str() {
                "smolin4" => smolin4(),
                "circuit" => smolin_via_circuit(),
                _ => generalized_smolin(order)?,
            };
            print!("{}", dump_matrix(rho.matrix()));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn emit(r: &Resolved, reports: &[qss_core::MetricsReport]) -> Result<()> {
    for rep in reports.iter().filter(|rep| rep.counts.infeasible > 0) {
        eprintln!(
            "warning: {} could not be mounted in {} of {} runs (m={})",
            rep.strategy, rep.counts.infeasible, rep.trials, rep.attacked
        );
    }
    match &r.out {
        Some(path) => {
            write_report(reports, path, r.format)?;
            eprintln!("wrote {} report row(s) to {}", reports.len(), path.display());
        }
        None => print!("{}", render_report(reports, r.format)?),
    }
    Ok(())
}
