//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::time::Instant;

use qss_core::adversary::{bell_attack_views, ProbeMode, StrategyKind};
use qss_core::harness::{fitted_escape_per_copy, render_report, run_experiment, sweep, ExperimentSpec, ReportFormat};
use qss_core::protocol::{run_protocol, ObservablePolicy, PartyId, ProtocolConfig, Variant};
use qss_core::qsim::{labels, tensor_product, trace_distance, BellIndex, ComplexMatrix, DensityMatrix, Label, Pauli};
use qss_core::smolin::{bell_state_on, generalized_smolin, joint_distribution, smolin4, smolin_via_circuit};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations on its real
/// embedding [[Re, -Im], [Im, Re]], whose spectrum is that of the input
/// with every eigenvalue doubled.
#[allow(clippy::needless_range_loop)]
fn jacobi_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let d = m.dim();
    let n = 2 * d;
    let mut a = vec![vec![0.0f64; n]; n];
    for i in 0..d {
        for j in 0..d {
            let z = m.get(i, j);
            a[i][j] = z.re;
            a[i + d][j + d] = z.re;
            a[i][j + d] = -z.im;
            a[i + d][j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev.into_iter().step_by(2).collect()
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let a = smolin4();
    let b = generalized_smolin(2).map_err(err)?;
    let c = smolin_via_circuit();
    let elapsed = start.elapsed().as_secs_f64();
    let d_ab = a.matrix().max_abs_diff(b.matrix());
    let d_ac = a.matrix().max_abs_diff(c.matrix());
    let d_bc = b.matrix().max_abs_diff(c.matrix());
    let worst = d_ab.max(d_ac).max(d_bc);
    ensure(worst <= 1e-12, format!("max entry difference {worst:e} > 1e-12"))?;
    ensure(elapsed < 1.0, format!("construction took {elapsed:.3} s"))?;
    Ok(format!("max entry difference {worst:.1e}, built in {elapsed:.4} s"))
}

fn criterion_2() -> Check {
    let rho = smolin4();
    let ev = jacobi_eigenvalues(rho.matrix());
    let expected: Vec<f64> = [0.0; 12].into_iter().chain([0.25; 4]).collect();
    let dev = ev.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(ev.len() == 16 && dev <= 1e-10, format!("spectrum {ev:?}"))?;
    let lib = rho.matrix().eigenvalues_hermitian().map_err(err)?;
    let lib_dev = lib
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(lib_dev <= 1e-10, format!("library spectrum {lib:?}"))?;
    Ok(format!(
        "{{1/4 x4, 0 x12}} within {:.1e} (Jacobi), {:.1e} (library)",
        dev, lib_dev
    ))
}

fn criterion_3() -> Check {
    let rho = smolin4();
    let mut report = Vec::new();
    for cut in [["A", "B"], ["A", "C"], ["A", "D"]] {
        let pt = rho.partial_transpose(&labels(cut)).map_err(err)?;
        let min = jacobi_eigenvalues(&pt)[0];
        ensure(min >= -1e-10, format!("cut {cut:?}|rest has min eigenvalue {min}"))?;
        report.push(format!("{}{}:{min:.1e}", cut[0], cut[1]));
    }
    for q in ["A", "B", "C", "D"] {
        let pt = rho.partial_transpose(&labels([q])).map_err(err)?;
        let min = jacobi_eigenvalues(&pt)[0];
        ensure(
            (min + 0.125).abs() <= 1e-10,
            format!("cut {q}|rest has min eigenvalue {min}"),
        )?;
        report.push(format!("{q}:{min:.6}"));
    }
    Ok(format!("min PT eigenvalues {}", report.join(" ")))
}

fn criterion_4() -> Check {
    let states = [
        ("smolin4", smolin4()),
        ("generalized_smolin(3)", generalized_smolin(3).map_err(err)?),
    ];
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for (name, state) in &states {
        for obs in Pauli::MEASURABLE {
            let even = joint_distribution(state, obs).map_err(err)?.even_parity_mass();
            lines.push(format!("{name}/{obs}={even:.3}"));
            if (even - 1.0).abs() > 1e-10 {
                failures.push(format!("{name}/{obs}"));
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("even-parity mass {}", lines.join(" ")))
    } else {
        Err(format!(
            "even-parity mass != 1 for {}; observed {}",
            failures.join(", "),
            lines.join(" ")
        ))
    }
}

fn criterion_5() -> Check {
    let rho = smolin4();
    let mut worst_p: f64 = 0.0;
    let mut worst_state: f64 = 0.0;
    for branch in rho
        .bell_distribution(&Label::from("C"), &Label::from("D"))
        .map_err(err)?
    {
        worst_p = worst_p.max((branch.probability - 0.25).abs());
        let post = branch.state.ok_or("branch without post-measurement state")?;
        let ab = post.reduced(&labels(["A", "B"])).map_err(err)?;
        let expected = bell_state_on(branch.outcome, "A", "B");
        worst_state = worst_state.max(ab.matrix().max_abs_diff(expected.matrix()));
    }
    ensure(worst_p <= 1e-10, format!("branch probability off by {worst_p:e}"))?;
    ensure(worst_state <= 1e-12, format!("post-state off by {worst_state:e}"))?;
    Ok(format!(
        "probabilities within {worst_p:.1e}, AB post-states within {worst_state:.1e}"
    ))
}

fn criterion_6() -> Check {
    let mut spec =
        ExperimentSpec::new(Variant::Original).with_attack(StrategyKind::BellInterceptResend, [PartyId::Bob], 1);
    spec.config = ProtocolConfig {
        observable_policy: ObservablePolicy::UniformPerCopy,
        ..ProtocolConfig::original(1, 0)
    };
    spec.trials = 1000;
    spec.master_seed = 6;
    let r = run_experiment(&spec).map_err(err)?;
    ensure(
        r.counts.guesses == 1000,
        format!("{} guesses over 1000 runs", r.counts.guesses),
    )?;
    ensure(
        r.cheater_accuracy == Some(1.0),
        format!("cheater accuracy {:?}", r.cheater_accuracy),
    )?;
    let mut worst: f64 = 0.0;
    for cheater in PartyId::RECEIVERS {
        let (honest, attacked) = bell_attack_views(cheater).map_err(err)?;
        worst = worst.max(trace_distance(&honest, &attacked).map_err(err)?);
    }
    ensure(worst <= 1e-12, format!("honest-view trace distance {worst:e}"))?;
    Ok(format!(
        "accuracy {}/{} over 1000 runs, honest-view trace distance {worst:.1e}",
        r.counts.correct_guesses, r.counts.guesses
    ))
}

fn criterion_7() -> Check {
    let mut spec = ExperimentSpec::new(Variant::Original).with_attack(
        StrategyKind::SameObservableMeasureResend { basis: Pauli::Z },
        [PartyId::Bob],
        4,
    );
    spec.config = ProtocolConfig::original(4, 0);
    spec.trials = 1000;
    spec.master_seed = 7;
    let r = run_experiment(&spec).map_err(err)?;
    let c = r.counts;
    ensure(c.shared_bits > 0, "no all-equal-observable copies")?;
    ensure(
        c.reconstructed_correctly == c.shared_bits,
        format!(
            "parity violated on {} of {} copies",
            c.shared_bits - c.reconstructed_correctly,
            c.shared_bits
        ),
    )?;
    ensure(
        c.correct_guesses == c.guesses && c.guesses == c.shared_bits,
        format!("accuracy {}/{}", c.correct_guesses, c.guesses),
    )?;
    Ok(format!(
        "{} attack-basis copies over 1000 runs: parity holds on all, cheater accuracy {}/{}",
        c.shared_bits, c.correct_guesses, c.guesses
    ))
}

/// Exact probability that one attacked copy, fully checked, fails the
/// parity test, averaged over Alice's uniformly chosen observable.
fn epsilon_measure_resend(bases: &[Pauli]) -> Result<f64, String> {
    let d = Label::from("D");
    let mut total = 0.0;
    for &basis in bases {
        for obs in Pauli::MEASURABLE {
            for branch in smolin4().outcome_distribution(&d, basis).map_err(err)? {
                if let Some(post) = branch.state {
                    let odd = 1.0 - joint_distribution(&post, obs).map_err(err)?.even_parity_mass();
                    total += branch.probability * odd;
                }
            }
        }
    }
    Ok(total / (3.0 * bases.len() as f64))
}

fn epsilon_fresh_bell() -> Result<f64, String> {
    let abc = smolin4().reduced(&labels(["A", "B", "C"])).map_err(err)?;
    let joint = tensor_product(&abc, &bell_state_on(BellIndex::PhiPlus, "D", "P")).map_err(err)?;
    let seen: DensityMatrix = joint.reduced(&labels(["A", "B", "C", "D"])).map_err(err)?;
    let mut total = 0.0;
    for obs in Pauli::MEASURABLE {
        total += 1.0 - joint_distribution(&seen, obs).map_err(err)?.even_parity_mass();
    }
    Ok(total / 3.0)
}

fn secure_spec(strategy: StrategyKind, attacked: usize, seed: u64) -> ExperimentSpec {
    let mut spec =
        ExperimentSpec::new(Variant::Secure).with_attack(strategy, [PartyId::Bob, PartyId::Charlie], attacked);
    spec.config = ProtocolConfig::secure(16, 1.0, 0);
    spec.master_seed = seed;
    spec
}

fn criterion_8() -> Check {
    let start = Instant::now();
    let same = StrategyKind::SameObservableMeasureResend { basis: Pauli::Z };
    let probe = StrategyKind::EntanglingProbe {
        mode: ProbeMode::FreshBell,
    };
    let eps_same = epsilon_measure_resend(&[Pauli::Z])?;
    let eps_random = epsilon_measure_resend(&Pauli::MEASURABLE)?;
    let eps_probe = epsilon_fresh_bell()?;
    ensure(
        (eps_same - 1.0 / 3.0).abs() < 1e-12,
        format!("same-observable oracle eps {eps_same}"),
    )?;
    ensure(
        (eps_random - 1.0 / 3.0).abs() < 1e-12,
        format!("random-basis oracle eps {eps_random}"),
    )?;
    ensure(
        (eps_probe - 0.5).abs() < 1e-12,
        format!("fresh-Bell oracle eps {eps_probe}"),
    )?;

    let mut notes = Vec::new();
    for (strategy, m, eps) in [(same.clone(), 10, eps_same), (probe.clone(), 8, eps_probe)] {
        let r = run_experiment(&secure_spec(strategy.clone(), m, 80 + m as u64)).map_err(err)?;
        let expected = 1.0 - (1.0 - eps).powi(m as i32);
        ensure(
            (r.detection_rate - expected).abs() <= 0.02,
            format!("{strategy} m={m}: detection {} vs {expected:.4}", r.detection_rate),
        )?;
        notes.push(format!(
            "{strategy} m={m} detection {:.4} (oracle {expected:.4})",
            r.detection_rate
        ));
    }
    for (strategy, eps) in [
        (same, eps_same),
        (StrategyKind::RandomBasisMeasureResend, eps_random),
        (probe, eps_probe),
    ] {
        let reports = sweep(&secure_spec(strategy.clone(), 0, 88), &[1, 2, 4, 8]).map_err(err)?;
        let q = fitted_escape_per_copy(&reports).ok_or("sweep fit failed")?;
        let slope = q.ln();
        let target = (1.0 - eps).ln();
        ensure(
            (slope - target).abs() <= 0.05,
            format!("{strategy}: slope {slope:.4} vs {target:.4}"),
        )?;
        ensure(
            (q - (1.0 - eps)).abs() <= 0.02,
            format!("{strategy}: fitted escape per copy {q:.4} vs {:.4}", 1.0 - eps),
        )?;
        notes.push(format!("{strategy} slope {slope:.4} (oracle {target:.4})"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed <= 600.0, format!("took {elapsed:.0} s"))?;
    Ok(format!("{}; {elapsed:.1} s", notes.join("; ")))
}

fn criterion_9() -> Check {
    let mut spec =
        ExperimentSpec::new(Variant::Secure).with_attack(StrategyKind::BellInterceptResend, [PartyId::Bob], 8);
    spec.config = ProtocolConfig::secure(8, 0.5, 0);
    spec.trials = 1000;
    spec.master_seed = 9;
    let r = run_experiment(&spec).map_err(err)?;
    ensure(
        r.infeasible_rate == 1.0,
        format!("infeasible in {} of 1000 runs", r.counts.infeasible),
    )?;
    Ok(format!("infeasible in {}/1000 runs", r.counts.infeasible))
}

fn criterion_10() -> Check {
    let mut spec = ExperimentSpec::new(Variant::Secure);
    spec.config = ProtocolConfig::secure(16, 0.5, 0);
    spec.trials = 1000;
    spec.master_seed = 10;
    let r = run_experiment(&spec).map_err(err)?;
    ensure(r.counts.detected == 0, format!("{} detections", r.counts.detected))?;
    ensure(
        r.reconstruction_rate == Some(1.0),
        format!("reconstruction {:?}", r.reconstruction_rate),
    )?;
    Ok(format!(
        "0 detections, {}/{} shared bits reconstructed",
        r.counts.reconstructed_correctly, r.counts.shared_bits
    ))
}

fn criterion_11() -> Check {
    let strategies = [
        StrategyKind::HonestNull,
        StrategyKind::SameObservableMeasureResend { basis: Pauli::Z },
        StrategyKind::RandomBasisMeasureResend,
        StrategyKind::EntanglingProbe {
            mode: ProbeMode::FreshBell,
        },
        StrategyKind::CrossCopySwap,
    ];
    let mut transcripts = 0;
    for strategy in &strategies {
        let mut spec = secure_spec(strategy.clone(), 3, 11);
        spec.config.check_rate = 0.5;
        spec.config.copies = 8;
        for t in 0..20 {
            let a = spec.run_trial(t).map_err(err)?.transcript.export();
            let b = spec.run_trial(t).map_err(err)?.transcript.export();
            ensure(a == b, format!("{strategy} trial {t}: transcripts differ"))?;
            transcripts += 1;
        }
        spec.trials = 300;
        let r1 = run_experiment(&spec).map_err(err)?;
        let r2 = run_experiment(&spec).map_err(err)?;
        for format in [ReportFormat::Csv, ReportFormat::Json] {
            let a = render_report(std::slice::from_ref(&r1), format).map_err(err)?;
            let b = render_report(std::slice::from_ref(&r2), format).map_err(err)?;
            ensure(a == b, format!("{strategy}: {format} reports differ"))?;
        }
    }
    let config = ProtocolConfig::original(4, 5);
    let a = run_protocol(&config, None).map_err(err)?.transcript.export();
    let b = run_protocol(&config, None).map_err(err)?.transcript.export();
    ensure(a == b, "original transcripts differ")?;
    Ok(format!(
        "{} transcripts and {} report pairs byte-identical",
        transcripts + 1,
        2 * strategies.len()
    ))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 11] = [
        ("state identity", criterion_1),
        ("spectrum", criterion_2),
        ("bound-entanglement signature", criterion_3),
        ("XOR correlation", criterion_4),
        ("Bell collapse", criterion_5),
        ("original-protocol break", criterion_6),
        ("simplified attack", criterion_7),
        ("secure-protocol detection law", criterion_8),
        ("feasibility gate", criterion_9),
        ("honest completeness", criterion_10),
        ("determinism", criterion_11),
    ];
    let mut failed = Vec::new();
    for (i, (title, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {id:>2} PASS  {title}: {detail} [{secs:.2} s]"),
            Err(detail) => {
                println!("criterion {id:>2} FAIL  {title}: {detail} [{secs:.2} s]");
                failed.push(id);
            }
        }
    }
    println!(
        "acceptance: {} passed, {} failed{}",
        criteria.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" ({failed:?})")
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
