//! Per-retirement records and the interface both cores implement.

use std::fmt;

use thiserror::Error;

use crate::bus::SocBus;
use crate::csr::{CsrFile, TrapCause};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MemDir {
    Load,
    Store,
}

/// A committed data-memory access. `value` is the loaded value after
/// extension, or the stored value truncated to `size` bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemEffect {
    pub addr: u32,
    pub size: u32,
    pub dir: MemDir,
    pub value: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrapInfo {
    pub cause: TrapCause,
    pub tval: u32,
    pub mepc: u32,
}

/// One instruction leaving the machine: either retired with its effects, or
/// turned into a trap (then it has no register or memory effect).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RetireEvent {
    pub cycle: u64,
    pub pc: u32,
    pub raw: u32,
    pub rd_write: Option<(u8, u32)>,
    pub mem: Option<MemEffect>,
    pub trap: Option<TrapInfo>,
    pub next_pc: u32,
}

impl RetireEvent {
    /// Successfully retired (counts toward minstret).
    pub fn retired(&self) -> bool {
        self.trap.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaultKind {
    Fetch,
    Load,
    Store,
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FaultKind::Fetch => "fetch",
            FaultKind::Load => "load",
            FaultKind::Store => "store",
        })
    }
}

/// An access to unmapped space under the halting policy. The simulation
/// stops; this is not an architectural event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("unmapped {kind} at {addr:#010x} (pc {pc:#010x}, cycle {cycle})")]
pub struct SimFault {
    pub kind: FaultKind,
    pub addr: u32,
    pub pc: u32,
    pub cycle: u64,
}

/// What one clock of a core produced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CycleReport {
    pub retired: Option<RetireEvent>,
    pub stalled: bool,
    pub flushed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoreKind {
    Golden,
    Pipeline,
}

impl fmt::Display for CoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoreKind::Golden => "golden",
            CoreKind::Pipeline => "pipeline",
        })
    }
}

/// A clocked RV32 core attached to a [`SocBus`].
pub trait Core: Send {
    fn kind(&self) -> CoreKind;

    /// Advance one clock cycle.
    fn clock(&mut self, bus: &mut SocBus) -> Result<CycleReport, SimFault>;

    /// Architectural reset: registers and CSRs cleared, pc at `reset_pc`.
    /// The elapsed-cycle count keeps running.
    fn reset(&mut self, reset_pc: u32);

    /// An instruction that retired in the same cycle the last `clock`
    /// faulted. Only a pipelined core can produce one.
    fn take_stranded(&mut self) -> Option<RetireEvent> {
        None
    }

    fn regs(&self) -> &[u32; 32];

    fn csrs(&self) -> &CsrFile;

    /// Address of the next instruction to retire.
    fn pc(&self) -> u32;

    /// Clock cycles elapsed since construction.
    fn cycles(&self) -> u64;

    /// Instructions retired (trap entries excluded).
    fn instructions(&self) -> u64;
}
