use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use super::{OrderingSecret, PartyId};
use crate::error::{QssError, Result};
use crate::qsim::Bit;

/// Requested positions per receiving party.
pub type CheckSets = BTreeMap<PartyId, BTreeSet<usize>>;

/// Announced bits keyed by `(party, position)`.
pub type Announcements = BTreeMap<(PartyId, usize), Bit>;

/// Each position of each receiver is requested independently with
/// probability `check_rate`. The draw looks only at positions, so the
/// request carries no information about which positions form a copy.
pub fn select_check_sets<R: Rng + ?Sized>(copies: usize, check_rate: f64, rng: &mut R) -> CheckSets {
    PartyId::RECEIVERS
        .iter()
        .map(|&p| {
            let set = (0..copies)
                .filter(|_| check_rate >= 1.0 || rng.random::<f64>() < check_rate)
                .collect();
            (p, set)
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckVerdict {
    pub detected: bool,
    /// Copies with all three receiver positions requested.
    pub verified: Vec<usize>,
    pub failing: Vec<usize>,
    /// Requested positions that were never announced.
    pub missing: Vec<(PartyId, usize)>,
}

/// Evaluates the four-party parity of every fully covered copy against
/// Alice's own results. A missing announcement counts as detection.
pub fn verify_checks(
    requests: &CheckSets,
    announcements: &Announcements,
    ordering: &OrderingSecret,
    alice_results: &[Bit],
) -> CheckVerdict {
    let mut verdict = CheckVerdict::default();
    for (&party, set) in requests {
        for &pos in set {
            if !announcements.contains_key(&(party, pos)) {
                verdict.missing.push((party, pos));
            }
        }
    }
    let empty = BTreeSet::new();
    for (copy, &alice) in alice_results.iter().enumerate() {
        let positions = PartyId::RECEIVERS.map(|p| (p, ordering.position(p, copy)));
        let covered = positions
            .iter()
            .all(|(p, pos)| requests.get(p).unwrap_or(&empty).contains(pos));
        if !covered {
            continue;
        }
        verdict.verified.push(copy);
        let bits: Option<Vec<Bit>> = positions.iter().map(|key| announcements.get(key).copied()).collect();
        match bits {
            Some(bits) if Bit::parity(bits.iter().copied().chain([alice])) == Bit::ZERO => {}
            _ => verdict.failing.push(copy),
        }
    }
    verdict.detected = !verdict.failing.is_empty() || !verdict.missing.is_empty();
    verdict
}

/// XOR of the three receivers' bits for the revealed copy.
pub fn reconstruct_secret(verdict: &CheckVerdict, shares: [Bit; 3]) -> Result<Bit> {
    if verdict.detected {
        return Err(QssError::Usage(
            "cannot reconstruct after a failed security check".into(),
        ));
    }
    Ok(Bit::parity(shares))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    fn full(n: usize) -> CheckSets {
        PartyId::RECEIVERS.iter().map(|&p| (p, (0..n).collect())).collect()
    }

    fn honest_announcements(n: usize, ordering: &OrderingSecret, alice: &[Bit]) -> Announcements {
        let mut out = Announcements::new();
        for (copy, a) in alice.iter().enumerate() {
            // Bob carries Alice's bit, the others zero: parity even.
            out.insert((PartyId::Bob, ordering.position(PartyId::Bob, copy)), *a);
            out.insert((PartyId::Charlie, ordering.position(PartyId::Charlie, copy)), Bit::ZERO);
            out.insert((PartyId::Diana, ordering.position(PartyId::Diana, copy)), Bit::ZERO);
        }
        assert_eq!(out.len(), 3 * n);
        out
    }

    #[test]
    fn full_rate_selects_everything() {
        let mut rng = rng_from(1);
        assert_eq!(select_check_sets(7, 1.0, &mut rng), full(7));
    }

    #[test]
    fn empty_coverage_detects_nothing() {
        let ordering = OrderingSecret::identity(3);
        let requests: CheckSets = PartyId::RECEIVERS.iter().map(|&p| (p, BTreeSet::new())).collect();
        let v = verify_checks(&requests, &Announcements::new(), &ordering, &[Bit::ONE; 3]);
        assert!(!v.detected);
        assert!(v.verified.is_empty());
    }

    #[test]
    fn flipped_bit_is_caught() {
        let mut rng = rng_from(2);
        let ordering = OrderingSecret::random(5, &mut rng);
        let alice = [Bit::ONE, Bit::ZERO, Bit::ONE, Bit::ONE, Bit::ZERO];
        let mut ann = honest_announcements(5, &ordering, &alice);
        let v = verify_checks(&full(5), &ann, &ordering, &alice);
        assert!(!v.detected);
        assert_eq!(v.verified, vec![0, 1, 2, 3, 4]);

        let key = (PartyId::Diana, ordering.position(PartyId::Diana, 3));
        let b = ann[&key];
        ann.insert(key, b ^ Bit::ONE);
        let v = verify_checks(&full(5), &ann, &ordering, &alice);
        assert!(v.detected);
        assert_eq!(v.failing, vec![3]);
    }

    #[test]
    fn missing_announcement_is_detection() {
        let ordering = OrderingSecret::identity(2);
        let alice = [Bit::ZERO, Bit::ZERO];
        let mut ann = honest_announcements(2, &ordering, &alice);
        ann.remove(&(PartyId::Charlie, 1));
        let v = verify_checks(&full(2), &ann, &ordering, &alice);
        assert!(v.detected);
        assert_eq!(v.missing, vec![(PartyId::Charlie, 1)]);
    }

    #[test]
    fn reconstruction() {
        let ok = CheckVerdict::default();
        assert_eq!(reconstruct_secret(&ok, [Bit::ZERO; 3]).unwrap(), Bit::ZERO);
        assert_eq!(
            reconstruct_secret(&ok, [Bit::ONE, Bit::ONE, Bit::ZERO]).unwrap(),
            Bit::ZERO
        );
        let bad = CheckVerdict {
            detected: true,
            ..Default::default()
        };
        assert!(matches!(
            reconstruct_secret(&bad, [Bit::ZERO; 3]),
            Err(QssError::Usage(_))
        ));
    }

    #[test]
    fn fully_covered_copies_scale_as_rate_cubed() {
        // n·p³ expected; 400 runs of n = 50, p = 0.5 give mean 6.25 with
        // standard error sqrt(50·(1/8)(7/8)/400) ≈ 0.117.
        let ordering = OrderingSecret::identity(50);
        let mut rng = rng_from(3);
        let mut total = 0usize;
        for _ in 0..400 {
            let req = select_check_sets(50, 0.5, &mut rng);
            total += verify_checks(&req, &Announcements::new(), &ordering, &[Bit::ZERO; 50])
                .verified
                .len();
        }
        let mean = total as f64 / 400.0;
        assert!((mean - 6.25).abs() < 4.0 * 0.117, "mean {mean}");
    }
}
