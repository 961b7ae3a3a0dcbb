//! Inter-stage registers. Each latch holds either one instruction or a
//! bubble tagged with the reason it exists, so every empty writeback slot
//! can be attributed to a stall source.

use crate::csr::Exception;
use crate::event::{MemEffect, TrapInfo};
use crate::exec::MemAccess;
use crate::isa::Instr;
use crate::predictor::Prediction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BubbleCause {
    /// Pipeline empty after reset.
    Fill,
    /// Inserted by the load-use interlock.
    LoadUse,
    /// Wrong-path instruction squashed by a misprediction.
    Flush,
    /// Younger instruction squashed by a trap.
    Trap,
    /// Stale instruction squashed after a store overwrote it.
    Coherence,
}

impl BubbleCause {
    pub fn label(self) -> &'static str {
        match self {
            BubbleCause::Fill => "fill",
            BubbleCause::LoadUse => "load-use",
            BubbleCause::Flush => "flush",
            BubbleCause::Trap => "trap",
            BubbleCause::Coherence => "coherence",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot<T> {
    Bubble(BubbleCause),
    Busy(T),
}

impl<T> Slot<T> {
    pub fn busy(&self) -> Option<&T> {
        match self {
            Slot::Busy(t) => Some(t),
            Slot::Bubble(_) => None,
        }
    }

    pub fn busy_mut(&mut self) -> Option<&mut T> {
        match self {
            Slot::Busy(t) => Some(t),
            Slot::Bubble(_) => None,
        }
    }

    pub fn is_bubble(&self) -> bool {
        matches!(self, Slot::Bubble(_))
    }
}

/// IF/ID.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fetched {
    pub pc: u32,
    pub raw: u32,
    pub pred: Prediction,
    /// Fetch hit unmapped space under the trapping policy.
    pub exception: Option<Exception>,
    /// Fetch hit unmapped space under the halting policy; faults at commit.
    pub halt_fault: bool,
}

/// ID/EX. `instr` is `None` when an exception was already detected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub pc: u32,
    pub raw: u32,
    pub instr: Option<Instr>,
    pub rs1_val: u32,
    pub rs2_val: u32,
    pub pred: Prediction,
    pub exception: Option<Exception>,
    pub halt_fault: bool,
}

/// EX/MEM.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Executed {
    pub pc: u32,
    pub raw: u32,
    pub instr: Option<Instr>,
    /// rd value for everything except loads.
    pub result: Option<u32>,
    pub mem: Option<MemAccess>,
    pub next_pc: u32,
    pub exception: Option<Exception>,
    pub halt_fault: bool,
    /// The instruction wrote minstret, which replaces its own increment.
    pub suppress_instret: bool,
    /// Resolved against its prediction and redirected fetch.
    pub mispredicted: bool,
}

impl Executed {
    /// Register this instruction will write and the value, when already known
    /// in EX/MEM (not for loads).
    pub fn forward_value(&self) -> Option<(u8, u32)> {
        if self.exception.is_some() || self.halt_fault {
            return None;
        }
        let rd = self.instr?.dest()?;
        if rd == 0 || self.instr?.op.is_load() {
            return None;
        }
        self.result.map(|v| (rd, v))
    }

    pub fn writes(&self) -> Option<u8> {
        if self.exception.is_some() || self.halt_fault {
            return None;
        }
        self.instr?.dest().filter(|&rd| rd != 0)
    }
}

/// MEM/WB.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Completed {
    pub pc: u32,
    pub raw: u32,
    pub rd_write: Option<(u8, u32)>,
    pub mem: Option<MemEffect>,
    pub trap: Option<TrapInfo>,
    pub next_pc: u32,
    pub suppress_instret: bool,
    pub mispredicted: bool,
    /// A store that squashed younger instructions fetched before it.
    pub coherence_flush: bool,
}

pub type IfId = Slot<Fetched>;
pub type IdEx = Slot<Decoded>;
pub type ExMem = Slot<Executed>;
pub type MemWb = Slot<Completed>;
