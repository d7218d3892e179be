use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy)]
struct Entry {
    value: f64,
    index: usize,
    epoch: u64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Larger value first; on ties the lower index wins.
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Max-heap of UCB upper bounds with lazy refresh.
///
/// Every entry remembers the epoch it was computed in; [`invalidate`]
/// starts a new epoch, turning all entries stale without touching them.
/// Valid as long as true values never increase between refreshes.
///
/// [`invalidate`]: UcbCache::invalidate
#[derive(Debug, Clone, Default)]
pub struct UcbCache {
    heap: BinaryHeap<Entry>,
    epoch: u64,
    recomputations: u64,
}

impl UcbCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces the contents with fresh values for candidates `0..n`.
    pub fn rebuild(&mut self, values: impl IntoIterator<Item = f64>) {
        self.epoch += 1;
        let epoch = self.epoch;
        let entries: Vec<Entry> = values
            .into_iter()
            .enumerate()
            .map(|(index, value)| Entry { value, index, epoch })
            .collect();
        self.heap = BinaryHeap::from(entries);
    }

    pub fn invalidate(&mut self) {
        self.epoch += 1;
    }

    /// Returns the index of the largest current value, recomputing stale
    /// entries with `value_of` only while they sit on top of the heap.
    pub fn select(&mut self, mut value_of: impl FnMut(usize) -> f64) -> Result<usize> {
        loop {
            let top = *self
                .heap
                .peek()
                .ok_or_else(|| invalid("cannot select from an empty candidate set"))?;
            if top.epoch == self.epoch {
                return Ok(top.index);
            }
            self.heap.pop();
            self.recomputations += 1;
            self.heap.push(Entry {
                value: value_of(top.index),
                index: top.index,
                epoch: self.epoch,
            });
        }
    }

    /// Stale-entry recomputations since construction.
    pub fn recomputations(&self) -> u64 {
        self.recomputations
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

/// Exhaustive argmax with the same tie-break (lowest index).
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b].total_cmp(&v) != Ordering::Less => {}
            _ => best = Some(i),
        }
    }
    best
}
