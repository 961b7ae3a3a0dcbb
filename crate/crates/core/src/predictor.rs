//! Two-bit dynamic branch predictor: a direct-mapped table that combines the
//! branch target buffer and the saturating counters. Looked up by pc in
//! fetch, trained when the branch resolves in execute.

use std::fmt;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Counter2 {
    #[default]
    StrongNotTaken,
    WeakNotTaken,
    WeakTaken,
    StrongTaken,
}

impl Counter2 {
    pub fn predicts_taken(self) -> bool {
        matches!(self, Counter2::WeakTaken | Counter2::StrongTaken)
    }

    /// One saturating step toward the observed outcome.
    pub fn update(self, taken: bool) -> Counter2 {
        use Counter2::*;
        match (self, taken) {
            (StrongNotTaken, true) => WeakNotTaken,
            (WeakNotTaken, true) => WeakTaken,
            (WeakTaken, true) | (StrongTaken, true) => StrongTaken,
            (StrongNotTaken, false) | (WeakNotTaken, false) => StrongNotTaken,
            (WeakTaken, false) => WeakNotTaken,
            (StrongTaken, false) => WeakTaken,
        }
    }
}

pub fn counter_update(c: Counter2, actually_taken: bool) -> Counter2 {
    c.update(actually_taken)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Entry {
    pub valid: bool,
    pub tag: u32,
    pub target: u32,
    pub counter: Counter2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Prediction {
    pub taken: bool,
    pub target: u32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PredictorStats {
    /// Training calls that found a tag-matching entry.
    pub hits: u64,
    pub misses: u64,
    pub mispredicts: u64,
}

impl PredictorStats {
    pub fn resolved(&self) -> u64 {
        self.hits + self.misses
    }

    /// Fraction of resolved transfers that were predicted correctly.
    pub fn accuracy(&self) -> Option<f64> {
        let n = self.resolved();
        (n > 0).then(|| 1.0 - self.mispredicts as f64 / n as f64)
    }
}

pub const DEFAULT_INDEX_BITS: u32 = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchPredictor {
    index_bits: u32,
    entries: Vec<Entry>,
    stats: PredictorStats,
}

impl Default for BranchPredictor {
    fn default() -> Self {
        Self::new(DEFAULT_INDEX_BITS)
    }
}

impl BranchPredictor {
    pub fn new(index_bits: u32) -> Self {
        assert!(index_bits <= 20, "predictor table too large");
        BranchPredictor {
            index_bits,
            entries: vec![Entry::default(); 1 << index_bits],
            stats: PredictorStats::default(),
        }
    }

    pub fn index(&self, pc: u32) -> usize {
        ((pc >> 2) & ((1 << self.index_bits) - 1)) as usize
    }

    pub fn tag(&self, pc: u32) -> u32 {
        pc >> (2 + self.index_bits)
    }

    fn lookup(&self, pc: u32) -> Option<&Entry> {
        let e = &self.entries[self.index(pc)];
        (e.valid && e.tag == self.tag(pc)).then_some(e)
    }

    /// Prediction for the instruction at `pc`. Pure.
    pub fn predict(&self, pc: u32) -> Prediction {
        match self.lookup(pc) {
            Some(e) if e.counter.predicts_taken() => Prediction {
                taken: true,
                target: e.target,
            },
            _ => Prediction {
                taken: false,
                target: pc.wrapping_add(4),
            },
        }
    }

    /// Update with a resolved control transfer. Allocation happens only for
    /// taken transfers that miss, starting at WeakTaken.
    pub fn train(&mut self, pc: u32, actually_taken: bool, actual_target: u32, was_mispredicted: bool) {
        let idx = self.index(pc);
        let tag = self.tag(pc);
        let e = &mut self.entries[idx];
        if e.valid && e.tag == tag {
            self.stats.hits += 1;
            e.counter = e.counter.update(actually_taken);
            if actually_taken {
                e.target = actual_target;
            }
        } else {
            self.stats.misses += 1;
            if actually_taken {
                *e = Entry {
                    valid: true,
                    tag,
                    target: actual_target,
                    counter: Counter2::WeakTaken,
                };
            }
        }
        if was_mispredicted {
            self.stats.mispredicts += 1;
        }
    }

    pub fn stats(&self) -> PredictorStats {
        self.stats
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Invalidate every entry and zero the statistics.
    pub fn clear(&mut self) {
        *self = Self::new(self.index_bits);
    }
}

impl fmt::Display for BranchPredictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate().filter(|(_, e)| e.valid) {
            let pc = (e.tag << (2 + self.index_bits)) | ((i as u32) << 2);
            writeln!(f, "[{i:2}] pc={pc:08x} target={:08x} {:?}", e.target, e.counter)?;
        }
        let s = self.stats;
        write!(f, "resolved={} mispredicted={}", s.resolved(), s.mispredicts)
    }
}
