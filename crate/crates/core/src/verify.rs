//! Exact self-checks of the state constructors, as run by `qss verify-states`.

use std::fmt;

use crate::qsim::{labels, Label, Pauli};
use crate::smolin::{bell_state_on, generalized_smolin, joint_distribution, smolin4, smolin_via_circuit};

#[derive(Clone, Debug, PartialEq)]
pub struct StateCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for StateCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "ok" } else { "FAILED" };
        write!(f, "{mark:<6} {}: {}", self.name, self.detail)
    }
}

fn check(name: &str, passed: bool, detail: String) -> StateCheck {
    StateCheck {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn failed(name: &str, e: impl fmt::Display) -> StateCheck {
    check(name, false, format!("error: {e}"))
}

/// Constructor agreement, spectrum, partial-transpose spectra, permutation
/// invariance, Bell collapse and the parity law of the generalized family.
pub fn run_state_checks() -> Vec<StateCheck> {
    let mut out = Vec::new();
    let rho = smolin4();

    out.push(match (generalized_smolin(2), smolin_via_circuit()) {
        (Ok(rec), circ) => {
            let d = rho
                .matrix()
                .max_abs_diff(rec.matrix())
                .max(rho.matrix().max_abs_diff(circ.matrix()))
                .max(rec.matrix().max_abs_diff(circ.matrix()));
            check(
                "constructor agreement",
                d <= 1e-12,
                format!("max entry difference {d:.2e}"),
            )
        }
        (Err(e), _) => failed("constructor agreement", e),
    });

    out.push(match rho.matrix().eigenvalues_hermitian() {
        Ok(ev) => {
            let dev = ev
                .iter()
                .enumerate()
                .map(|(i, &x)| (x - if i < 12 { 0.0 } else { 0.25 }).abs())
                .fold(0.0, f64::max);
            check(
                "spectrum {1/4 x4, 0 x12}",
                dev <= 1e-10,
                format!("max deviation {dev:.2e}"),
            )
        }
        Err(e) => failed("spectrum {1/4 x4, 0 x12}", e),
    });

    let pt_min = |subset: &[&str]| -> crate::Result<f64> {
        crate::qsim::min_eigenvalue(&rho.partial_transpose(&labels(subset.iter().copied()))?)
    };
    for cut in [["A", "B"], ["A", "C"], ["A", "D"]] {
        let name = format!("PPT across {}{}|rest", cut[0], cut[1]);
        out.push(match pt_min(&cut) {
            Ok(min) => check(&name, min >= -1e-10, format!("min eigenvalue {min:.3e}")),
            Err(e) => failed(&name, e),
        });
    }
    for q in ["A", "B", "C", "D"] {
        let name = format!("NPT across {q}|rest");
        out.push(match pt_min(&[q]) {
            Ok(min) => check(&name, (min + 0.125).abs() <= 1e-10, format!("min eigenvalue {min:.12}")),
            Err(e) => failed(&name, e),
        });
    }

    let mut worst: f64 = 0.0;
    let letters = ["A", "B", "C", "D"];
    let mut perm_error = None;
    for_each_permutation(&mut [0, 1, 2, 3], 0, &mut |p| {
        let order: Vec<Label> = p.iter().map(|&i| Label::from(letters[i])).collect();
        match rho.permute_qubits(&order).and_then(|s| s.relabel(labels(letters))) {
            Ok(s) => worst = worst.max(s.matrix().max_abs_diff(rho.matrix())),
            Err(e) => perm_error = Some(e),
        }
    });
    out.push(match perm_error {
        None => check(
            "invariance under 24 permutations",
            worst <= 1e-12,
            format!("max entry difference {worst:.2e}"),
        ),
        Some(e) => failed("invariance under 24 permutations", e),
    });

    out.push(match rho.bell_distribution(&Label::from("C"), &Label::from("D")) {
        Ok(branches) => {
            let mut dev: f64 = 0.0;
            for b in branches {
                dev = dev.max((b.probability - 0.25).abs());
                if let Some(post) = b.state {
                    match post.reduced(&labels(["A", "B"])) {
                        Ok(ab) => {
                            let expected = bell_state_on(b.outcome, "A", "B");
                            dev = dev.max(ab.matrix().max_abs_diff(expected.matrix()));
                        }
                        Err(_) => dev = f64::INFINITY,
                    }
                }
            }
            check("Bell collapse on CD", dev <= 1e-12, format!("max deviation {dev:.2e}"))
        }
        Err(e) => failed("Bell collapse on CD", e),
    });

    for n in 1..=4 {
        let name = format!("deterministic parity of {}-qubit family member", 2 * n);
        out.push(match parity_law(n) {
            Ok((expected, worst)) => check(
                &name,
                worst <= 1e-10,
                format!("XOR of all bits = {expected} with mass 1 - {worst:.1e} for X, Y, Z"),
            ),
            Err(e) => failed(&name, e),
        });
    }
    out
}

/// The family member of order `n` yields a fixed XOR, `n mod 2`, for every
/// common observable. Returns that value and the largest deviation of its
/// probability mass from 1.
fn parity_law(n: usize) -> crate::Result<(u8, f64)> {
    let state = generalized_smolin(n)?;
    let expected = (n % 2) as u8;
    let mut worst: f64 = 0.0;
    for obs in Pauli::MEASURABLE {
        let even = joint_distribution(&state, obs)?.even_parity_mass();
        let mass = if expected == 0 { even } else { 1.0 - even };
        worst = worst.max((1.0 - mass).abs());
    }
    Ok((expected, worst))
}

fn for_each_permutation(items: &mut [usize], k: usize, f: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        for_each_permutation(items, k + 1, f);
        items.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_state_checks_pass() {
        let checks = run_state_checks();
        assert_eq!(checks.len(), 15);
        for c in &checks {
            assert!(c.passed, "{c}");
        }
    }

    #[test]
    fn permutation_enumeration_is_complete() {
        let mut seen = std::collections::BTreeSet::new();
        for_each_permutation(&mut [0, 1, 2, 3], 0, &mut |p| {
            seen.insert(p.to_vec());
        });
        assert_eq!(seen.len(), 24);
    }
}
