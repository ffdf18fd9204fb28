use std::collections::VecDeque;

use crate::error::{MprError, Result};
use crate::function_classes::Witness;

/// FIFO store of generated feature vectors (`P̂`). Each row carries the
/// sequence number it was pushed with.
#[derive(Debug, Clone)]
pub struct SampleBuffer {
    capacity: usize,
    next_seq: u64,
    entries: VecDeque<(u64, Vec<f64>)>,
}

impl SampleBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(MprError::InvalidArgument(
                "buffer capacity must be at least 1".into(),
            ));
        }
        Ok(Self {
            capacity,
            next_seq: 0,
            entries: VecDeque::with_capacity(capacity + 1),
        })
    }

    /// Append rows, then evict the oldest until within capacity. Returns the
    /// sequence numbers evicted.
    pub fn extend<I: IntoIterator<Item = Vec<f64>>>(&mut self, rows: I) -> Vec<u64> {
        for row in rows {
            self.entries.push_back((self.next_seq, row));
            self.next_seq += 1;
        }
        let excess = self.entries.len().saturating_sub(self.capacity);
        self.entries.drain(..excess).map(|(seq, _)| seq).collect()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sequence_numbers(&self) -> Vec<u64> {
        self.entries.iter().map(|(s, _)| *s).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.entries.iter().map(|(_, r)| r.as_slice())
    }
}

/// A buffered witness together with its value on every generator cell.
#[derive(Debug, Clone)]
pub struct FunctionEntry {
    pub seq: u64,
    pub witness: Witness,
    pub key: String,
    pub cell_values: Vec<f64>,
}

/// FIFO store of maximiser functions (`Ĉ`).
#[derive(Debug, Clone)]
pub struct FunctionBuffer {
    capacity: usize,
    dedupe: bool,
    next_seq: u64,
    entries: VecDeque<FunctionEntry>,
}

impl FunctionBuffer {
    pub fn new(capacity: usize, dedupe: bool) -> Result<Self> {
        if capacity == 0 {
            return Err(MprError::InvalidArgument(
                "buffer capacity must be at least 1".into(),
            ));
        }
        Ok(Self {
            capacity,
            dedupe,
            next_seq: 0,
            entries: VecDeque::with_capacity(capacity + 1),
        })
    }

    /// Push a witness evaluated on `cells`. With deduplication on, a witness
    /// whose `key` is already buffered is dropped and `false` is returned.
    pub fn push(&mut self, witness: Witness, key: String, cells: &[Vec<f64>]) -> bool {
        if self.dedupe && self.entries.iter().any(|e| e.key == key) {
            return false;
        }
        let cell_values = cells
            .iter()
            .map(|x| witness.evaluate_unchecked(x))
            .collect();
        self.entries.push_back(FunctionEntry {
            seq: self.next_seq,
            witness,
            key,
            cell_values,
        });
        self.next_seq += 1;
        while self.entries.len() > self.capacity {
            self.entries.pop_front();
        }
        true
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &FunctionEntry> + '_ {
        self.entries.iter()
    }

    pub fn sequence_numbers(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.seq).collect()
    }
}
