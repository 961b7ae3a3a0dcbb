//! Run statistics: CPI, predictor accuracy, stall breakdown, DMIPS/MHz.

use std::fmt;

use thiserror::Error;

use crate::event::CoreKind;

/// Dhrystone 2.1 normalization: a VAX 11/780 scores 1757 Dhrystones/s.
pub const VAX_DHRYSTONES_PER_SECOND: f64 = 1757.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("iteration count must be positive")]
    ZeroIterations,
    #[error("cycle count must be positive")]
    ZeroCycles,
}

/// DMIPS per MHz from an iteration count and the cycles they took.
///
/// With f the clock in MHz, Dhrystones/s = iterations * f * 1e6 / cycles,
/// and DMIPS/MHz divides that by 1757 and by f, so f cancels.
pub fn compute_dmips(iterations: u64, cycles: u64) -> Result<f64, StatsError> {
    if iterations == 0 {
        return Err(StatsError::ZeroIterations);
    }
    if cycles == 0 {
        return Err(StatsError::ZeroCycles);
    }
    Ok(iterations as f64 * 1e6 / (cycles as f64 * VAX_DHRYSTONES_PER_SECOND))
}

pub fn cpi(instructions: u64, cycles: u64) -> Option<f64> {
    (instructions > 0).then(|| cycles as f64 / instructions as f64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BranchStats {
    pub resolved: u64,
    pub mispredicted: u64,
}

impl BranchStats {
    pub fn accuracy(&self) -> Option<f64> {
        (self.resolved > 0).then(|| 1.0 - self.mispredicted as f64 / self.resolved as f64)
    }
}

/// Cycles lost per cause.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StallBreakdown {
    pub load_use: u64,
    pub flush: u64,
    pub trap_redirect: u64,
    pub coherence: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StatsReport {
    pub core: CoreKind,
    pub cycles: u64,
    pub instructions: u64,
    pub traps: u64,
    pub branch: BranchStats,
    pub stalls: StallBreakdown,
    pub dhrystone_iters: Option<u64>,
    pub uart_bytes: u64,
}

impl StatsReport {
    pub fn cpi(&self) -> Option<f64> {
        cpi(self.instructions, self.cycles)
    }

    pub fn dmips_per_mhz(&self) -> Option<f64> {
        self.dhrystone_iters.and_then(|n| compute_dmips(n, self.cycles).ok())
    }
}

fn opt3(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.3}")).unwrap_or_else(|| "n/a".into())
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "core={}", self.core)?;
        writeln!(f, "cycles={}", self.cycles)?;
        writeln!(f, "instructions={}", self.instructions)?;
        writeln!(f, "cpi={}", opt3(self.cpi()))?;
        writeln!(f, "traps={}", self.traps)?;
        writeln!(f, "branch_resolved={}", self.branch.resolved)?;
        writeln!(f, "branch_mispredicted={}", self.branch.mispredicted)?;
        writeln!(f, "branch_accuracy={}", opt3(self.branch.accuracy()))?;
        writeln!(f, "stall_load_use={}", self.stalls.load_use)?;
        writeln!(f, "stall_flush={}", self.stalls.flush)?;
        writeln!(f, "stall_trap_redirect={}", self.stalls.trap_redirect)?;
        writeln!(f, "stall_coherence={}", self.stalls.coherence)?;
        writeln!(f, "dmips_per_mhz={}", opt3(self.dmips_per_mhz()))?;
        writeln!(f, "uart_bytes={}", self.uart_bytes)
    }
}
