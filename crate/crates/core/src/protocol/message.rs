use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::PartyId;
use crate::qsim::{Bit, Pauli};

/// Classical and quantum events of a run, in the order they happen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Message {
    QubitSend {
        to: PartyId,
        position: usize,
    },
    Ack {
        from: PartyId,
        position: usize,
    },
    /// Observable per transmission position, for each listed party.
    ObservableAnnouncement {
        observables: BTreeMap<PartyId, Vec<Pauli>>,
    },
    CheckRequest {
        positions: BTreeMap<PartyId, BTreeSet<usize>>,
    },
    ResultAnnouncement {
        from: PartyId,
        position: usize,
        bit: Bit,
    },
    /// Positions of the secret copy at each receiving party.
    RevealPositions {
        positions: BTreeMap<PartyId, usize>,
    },
    Abort {
        reason: AbortReason,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AbortReason {
    CheckFailed,
    NoUncheckedCopy,
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AbortReason::CheckFailed => "check-failed",
            AbortReason::NoUncheckedCopy => "no-unchecked-copy",
        })
    }
}

impl Message {
    pub fn tag(&self) -> &'static str {
        match self {
            Message::QubitSend { .. } => "QubitSend",
            Message::Ack { .. } => "Ack",
            Message::ObservableAnnouncement { .. } => "ObservableAnnouncement",
            Message::CheckRequest { .. } => "CheckRequest",
            Message::ResultAnnouncement { .. } => "ResultAnnouncement",
            Message::RevealPositions { .. } => "RevealPositions",
            Message::Abort { .. } => "Abort",
        }
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())?;
        match self {
            Message::QubitSend { to, position } => write!(f, " to={to} position={position}"),
            Message::Ack { from, position } => write!(f, " from={from} position={position}"),
            Message::ObservableAnnouncement { observables } => {
                for (party, obs) in observables {
                    let letters: String = obs.iter().map(|p| p.letter()).collect();
                    write!(f, " {party}={letters}")?;
                }
                Ok(())
            }
            Message::CheckRequest { positions } => {
                for (party, set) in positions {
                    let list: Vec<String> = set.iter().map(usize::to_string).collect();
                    write!(f, " {party}={}", list.join(","))?;
                }
                Ok(())
            }
            Message::ResultAnnouncement { from, position, bit } => {
                write!(f, " from={from} position={position} bit={bit}")
            }
            Message::RevealPositions { positions } => {
                for (party, pos) in positions {
                    write!(f, " {party}={pos}")?;
                }
                Ok(())
            }
            Message::Abort { reason } => write!(f, " reason={reason}"),
        }
    }
}

/// Ordered message log of one run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    messages: Vec<Message>,
}

impl Transcript {
    pub fn push(&mut self, msg: Message) {
        self.messages.push(msg);
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// One record per line: the tag followed by `key=value` fields.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for m in &self.messages {
            out.push_str(&m.to_string());
            out.push('\n');
        }
        out
    }

    /// Checks the ordering rules of the gated protocol and returns the first
    /// violation found.
    pub fn check_causality(&self) -> Result<(), String> {
        let mut pending: Option<(PartyId, usize)> = None;
        let mut last_ack = None;
        let mut announce_at = None;
        let mut check_at = None;
        let mut last_result = None;
        let mut reveal_at = None;
        for (i, m) in self.messages.iter().enumerate() {
            match m {
                Message::QubitSend { to, position } => {
                    if let Some((p, t)) = pending {
                        return Err(format!("line {i}: send to {to}#{position} before ack of {p}#{t}"));
                    }
                    if announce_at.is_some() {
                        return Err(format!("line {i}: qubit sent after observable announcement"));
                    }
                    pending = Some((*to, *position));
                }
                Message::Ack { from, position } => {
                    if pending != Some((*from, *position)) {
                        return Err(format!("line {i}: unexpected ack {from}#{position}"));
                    }
                    pending = None;
                    last_ack = Some(i);
                }
                Message::ObservableAnnouncement { .. } => {
                    if pending.is_some() {
                        return Err(format!("line {i}: announcement with a qubit in transit"));
                    }
                    announce_at = Some(i);
                }
                Message::CheckRequest { .. } => {
                    if announce_at.is_none() {
                        return Err(format!("line {i}: check request before observable announcement"));
                    }
                    check_at = Some(i);
                }
                Message::ResultAnnouncement { .. } => {
                    if check_at.is_none() {
                        return Err(format!("line {i}: result announced before check request"));
                    }
                    if reveal_at.is_some() {
                        return Err(format!("line {i}: result announced after reveal"));
                    }
                    last_result = Some(i);
                }
                Message::RevealPositions { .. } => {
                    if check_at.is_none() {
                        return Err(format!("line {i}: reveal before checks"));
                    }
                    reveal_at = Some(i);
                }
                Message::Abort { .. } => {}
            }
        }
        if let (Some(a), Some(l)) = (announce_at, last_ack) {
            if a < l {
                return Err("announcement precedes final ack".into());
            }
        }
        if let (Some(r), Some(l)) = (reveal_at, last_result) {
            if r < l {
                return Err("reveal precedes a result announcement".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn export_lines() {
        let mut t = Transcript::default();
        t.push(Message::QubitSend {
            to: PartyId::Bob,
            position: 0,
        });
        t.push(Message::Ack {
            from: PartyId::Bob,
            position: 0,
        });
        t.push(Message::ObservableAnnouncement {
            observables: BTreeMap::from([(PartyId::Bob, vec![Pauli::X])]),
        });
        t.push(Message::CheckRequest {
            positions: BTreeMap::from([(PartyId::Bob, BTreeSet::from([0]))]),
        });
        t.push(Message::ResultAnnouncement {
            from: PartyId::Bob,
            position: 0,
            bit: Bit::ONE,
        });
        t.push(Message::Abort {
            reason: AbortReason::CheckFailed,
        });
        assert_eq!(
            t.export(),
            "QubitSend to=Bob position=0\nAck from=Bob position=0\nObservableAnnouncement Bob=X\n\
             CheckRequest Bob=0\nResultAnnouncement from=Bob position=0 bit=1\nAbort reason=check-failed\n"
        );
        assert!(t.check_causality().is_ok());
    }

    #[test]
    fn causality_violations() {
        let mut t = Transcript::default();
        t.push(Message::QubitSend {
            to: PartyId::Bob,
            position: 0,
        });
        t.push(Message::QubitSend {
            to: PartyId::Bob,
            position: 1,
        });
        assert!(t.check_causality().is_err());

        let mut t = Transcript::default();
        t.push(Message::CheckRequest {
            positions: BTreeMap::new(),
        });
        assert!(t.check_causality().is_err());
    }
}
