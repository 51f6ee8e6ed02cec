//! Tracks the joint quantum state of every live qubit in a run as a set of
//! independent blocks. Blocks are merged only when an operation spans them.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{QssError, Result};
use crate::qsim::{tensor_product_capped, BellIndex, Bit, ComplexMatrix, DensityMatrix, Label, Pauli};

#[derive(Clone, Debug)]
pub enum RegistryOp {
    MeasurePauli { qubit: Label, observable: Pauli },
    MeasureBell { first: Label, second: Label },
    Unitary { gate: ComplexMatrix, targets: Vec<Label> },
    Discard { qubits: Vec<Label> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpOutput {
    Pauli(Bit),
    Bell(BellIndex),
    Done,
}

/// Labels of two blocks that were merged, in merge order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeRecord {
    pub left: Vec<Label>,
    pub right: Vec<Label>,
}

#[derive(Clone, Debug)]
pub struct SystemRegistry {
    cap: usize,
    blocks: Vec<Option<DensityMatrix>>,
    owner: HashMap<Label, usize>,
    merge_log: Vec<MergeRecord>,
    fresh: usize,
}

impl SystemRegistry {
    pub fn new(cap: usize) -> Self {
        Self {
            cap,
            blocks: Vec::new(),
            owner: HashMap::new(),
            merge_log: Vec::new(),
            fresh: 0,
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn merge_log(&self) -> &[MergeRecord] {
        &self.merge_log
    }

    pub fn block_count(&self) -> usize {
        self.blocks.iter().flatten().count()
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.owner.contains_key(label)
    }

    /// A label not used anywhere in this registry so far.
    pub fn fresh_label(&mut self, prefix: &str) -> Label {
        loop {
            let l = Label::new(format!("{prefix}#{}", self.fresh));
            self.fresh += 1;
            if !self.owner.contains_key(&l) {
                return l;
            }
        }
    }

    pub fn add_block(&mut self, state: DensityMatrix) -> Result<()> {
        if state.num_qubits() > self.cap {
            return Err(QssError::Capacity {
                qubits: state.num_qubits(),
                cap: self.cap,
                context: "new block".into(),
            });
        }
        if let Some(l) = state.labels().iter().find(|l| self.owner.contains_key(*l)) {
            return Err(QssError::labeling(format!("label {l} already registered")));
        }
        let idx = self.blocks.len();
        for l in state.labels() {
            self.owner.insert(l.clone(), idx);
        }
        self.blocks.push(Some(state));
        Ok(())
    }

    /// The block currently holding `label`.
    pub fn block_of(&self, label: &Label) -> Result<&DensityMatrix> {
        let idx = self.index_of(label)?;
        Ok(self.blocks[idx].as_ref().expect("owner points at live block"))
    }

    fn index_of(&self, label: &Label) -> Result<usize> {
        self.owner
            .get(label)
            .copied()
            .ok_or_else(|| QssError::labeling(format!("qubit {label} is not registered")))
    }

    /// Marginal state of `qubits`, which must all live in one block.
    pub fn reduced_state(&self, qubits: &[Label]) -> Result<DensityMatrix> {
        let idx = self.index_of(&qubits[0])?;
        for q in qubits {
            if self.index_of(q)? != idx {
                return Err(QssError::labeling("qubits span several blocks; merge them first"));
            }
        }
        self.blocks[idx].as_ref().expect("live").reduced(qubits)
    }

    /// Joint state of `qubits` even if they live in different blocks, without
    /// modifying the registry. Fails if the union exceeds the cap.
    pub fn joint_state(&self, qubits: &[Label]) -> Result<DensityMatrix> {
        let mut seen = Vec::new();
        for q in qubits {
            let idx = self.index_of(q)?;
            if !seen.contains(&idx) {
                seen.push(idx);
            }
        }
        let mut parts = seen.iter().map(|&i| {
            let block = self.blocks[i].as_ref().expect("live");
            let keep: Vec<Label> = block.labels().iter().filter(|l| qubits.contains(l)).cloned().collect();
            block.reduced(&keep)
        });
        let first = parts.next().expect("at least one qubit")?;
        let joint = parts.try_fold(first, |acc, p| tensor_product_capped(&acc, &p?, self.cap))?;
        joint.permute_qubits(qubits)
    }

    /// Merges every block holding one of `labels` into one; returns its index.
    fn merge_for(&mut self, labels: &[Label]) -> Result<usize> {
        let mut idxs = Vec::new();
        for l in labels {
            let i = self.index_of(l)?;
            if !idxs.contains(&i) {
                idxs.push(i);
            }
        }
        let total: usize = idxs
            .iter()
            .map(|&i| self.blocks[i].as_ref().expect("live").num_qubits())
            .sum();
        if total > self.cap {
            let names: Vec<String> = idxs
                .iter()
                .map(|&i| {
                    let b = self.blocks[i].as_ref().expect("live");
                    let ls: Vec<&str> = b.labels().iter().map(Label::as_str).collect();
                    format!("[{}]", ls.join(","))
                })
                .collect();
            return Err(QssError::Capacity {
                qubits: total,
                cap: self.cap,
                context: format!("merging blocks {}", names.join(" + ")),
            });
        }
        let target = idxs[0];
        for &i in &idxs[1..] {
            let other = self.blocks[i].take().expect("live");
            let base = self.blocks[target].take().expect("live");
            self.merge_log.push(MergeRecord {
                left: base.labels().to_vec(),
                right: other.labels().to_vec(),
            });
            for l in other.labels() {
                self.owner.insert(l.clone(), target);
            }
            self.blocks[target] = Some(tensor_product_capped(&base, &other, self.cap)?);
        }
        Ok(target)
    }

    pub fn apply<R: Rng + ?Sized>(&mut self, op: RegistryOp, rng: &mut R) -> Result<OpOutput> {
        match op {
            RegistryOp::MeasurePauli { qubit, observable } => {
                let idx = self.index_of(&qubit)?;
                let block = self.blocks[idx].as_ref().expect("live");
                let (bit, post) = block.measure_pauli(&qubit, observable, rng)?;
                self.blocks[idx] = Some(post);
                Ok(OpOutput::Pauli(bit))
            }
            RegistryOp::MeasureBell { first, second } => {
                let idx = self.merge_for(&[first.clone(), second.clone()])?;
                let block = self.blocks[idx].as_ref().expect("live");
                let (bell, post) = block.measure_bell(&first, &second, rng)?;
                self.blocks[idx] = Some(post);
                Ok(OpOutput::Bell(bell))
            }
            RegistryOp::Unitary { gate, targets } => {
                let idx = self.merge_for(&targets)?;
                let block = self.blocks[idx].as_ref().expect("live");
                let next = block.apply_unitary(&gate, &targets)?;
                self.blocks[idx] = Some(next);
                Ok(OpOutput::Done)
            }
            RegistryOp::Discard { qubits } => {
                for q in &qubits {
                    let idx = self.index_of(q)?;
                    let block = self.blocks[idx].take().expect("live");
                    if block.num_qubits() == 1 {
                        self.owner.remove(q);
                        continue;
                    }
                    self.blocks[idx] = Some(block.partial_trace(std::slice::from_ref(q))?);
                    self.owner.remove(q);
                }
                Ok(OpOutput::Done)
            }
        }
    }

    pub fn measure_pauli<R: Rng + ?Sized>(&mut self, qubit: &Label, observable: Pauli, rng: &mut R) -> Result<Bit> {
        match self.apply(
            RegistryOp::MeasurePauli {
                qubit: qubit.clone(),
                observable,
            },
            rng,
        )? {
            OpOutput::Pauli(b) => Ok(b),
            _ => unreachable!("Pauli measurement yields a bit"),
        }
    }

    pub fn measure_bell<R: Rng + ?Sized>(&mut self, first: &Label, second: &Label, rng: &mut R) -> Result<BellIndex> {
        match self.apply(
            RegistryOp::MeasureBell {
                first: first.clone(),
                second: second.clone(),
            },
            rng,
        )? {
            OpOutput::Bell(b) => Ok(b),
            _ => unreachable!("Bell measurement yields an index"),
        }
    }

    pub fn apply_unitary<R: Rng + ?Sized>(
        &mut self,
        gate: ComplexMatrix,
        targets: &[Label],
        rng: &mut R,
    ) -> Result<()> {
        self.apply(
            RegistryOp::Unitary {
                gate,
                targets: targets.to_vec(),
            },
            rng,
        )
        .map(|_| ())
    }

    pub fn discard<R: Rng + ?Sized>(&mut self, qubits: &[Label], rng: &mut R) -> Result<()> {
        self.apply(
            RegistryOp::Discard {
                qubits: qubits.to_vec(),
            },
            rng,
        )
        .map(|_| ())
    }
}
