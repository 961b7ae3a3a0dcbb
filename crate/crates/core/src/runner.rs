//! A core, its bus, and run control: halting, the reset button, tracing and
//! the recent-retirement history used for fault diagnostics.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::Write;

use log::warn;
use thiserror::Error;

use crate::bus::{ClockGate, SocBus};
use crate::csr::CsrFile;
use crate::event::{Core, CoreKind, CycleReport, MemDir, RetireEvent, SimFault};
use crate::golden::GoldenCore;
use crate::isa::{decode_with, DecodeOptions, Op};
use crate::pipeline::{PipelineConfig, PipelineCore};
use crate::stats::{BranchStats, StallBreakdown, StatsReport};
use crate::trace::format_event;

pub const HISTORY_LEN: usize = 16;
pub const EXIT_DIVERGENCE: i32 = 1;
pub const EXIT_FAULT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

/// Either core behind one type, so the debugger can reach pipeline
/// internals when present.
#[derive(Clone, Debug)]
pub enum AnyCore {
    Golden(GoldenCore),
    Pipeline(PipelineCore),
}

impl AnyCore {
    pub fn new(kind: CoreKind, reset_pc: u32, cfg: PipelineConfig) -> Self {
        match kind {
            CoreKind::Golden => AnyCore::Golden(GoldenCore::new(reset_pc, cfg.decode)),
            CoreKind::Pipeline => AnyCore::Pipeline(PipelineCore::new(reset_pc, cfg)),
        }
    }

    pub fn as_pipeline(&self) -> Option<&PipelineCore> {
        match self {
            AnyCore::Pipeline(p) => Some(p),
            AnyCore::Golden(_) => None,
        }
    }

    pub fn as_pipeline_mut(&mut self) -> Option<&mut PipelineCore> {
        match self {
            AnyCore::Pipeline(p) => Some(p),
            AnyCore::Golden(_) => None,
        }
    }

    fn inner(&self) -> &dyn Core {
        match self {
            AnyCore::Golden(c) => c,
            AnyCore::Pipeline(c) => c,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn Core {
        match self {
            AnyCore::Golden(c) => c,
            AnyCore::Pipeline(c) => c,
        }
    }
}

impl Core for AnyCore {
    fn kind(&self) -> CoreKind {
        self.inner().kind()
    }
    fn clock(&mut self, bus: &mut SocBus) -> Result<CycleReport, SimFault> {
        self.inner_mut().clock(bus)
    }
    fn reset(&mut self, reset_pc: u32) {
        self.inner_mut().reset(reset_pc)
    }
    fn take_stranded(&mut self) -> Option<RetireEvent> {
        self.inner_mut().take_stranded()
    }
    fn regs(&self) -> &[u32; 32] {
        self.inner().regs()
    }
    fn csrs(&self) -> &CsrFile {
        self.inner().csrs()
    }
    fn pc(&self) -> u32 {
        self.inner().pc()
    }
    fn cycles(&self) -> u64 {
        self.inner().cycles()
    }
    fn instructions(&self) -> u64 {
        self.inner().instructions()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HaltReason {
    /// A store to the SIM_EXIT register retired.
    Exit(u32),
    /// An unconditional jump to itself retired twice in a row.
    SelfLoop(u32),
    /// The cycle budget ran out.
    Budget,
}

impl HaltReason {
    /// Process exit status for this halt.
    pub fn exit_status(self) -> i32 {
        match self {
            HaltReason::Exit(code) => (code & 0xFF) as i32,
            HaltReason::SelfLoop(_) => 0,
            HaltReason::Budget => EXIT_BUDGET,
        }
    }
}

/// A fault with the retirements that led up to it.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{fault}")]
pub struct RunFault {
    pub fault: SimFault,
    pub history: Vec<RetireEvent>,
}

impl RunFault {
    /// Multi-line diagnostic: the fault, then the last retirements.
    pub fn report(&self, opts: DecodeOptions) -> String {
        let mut out = format!("fault: {}\nlast {} retirements:\n", self.fault, self.history.len());
        for ev in &self.history {
            let _ = writeln!(out, "  {}", format_event(ev, opts));
        }
        out
    }
}

/// Why a bounded step request stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepStop {
    Done,
    Breakpoint(u32),
    Halted(HaltReason),
}

pub struct Machine {
    pub core: AnyCore,
    pub bus: SocBus,
    entry_pc: u32,
    decode: DecodeOptions,
    history: VecDeque<RetireEvent>,
    last_self_loop: Option<u32>,
    halted: Option<HaltReason>,
    traps: u64,
    trace: Option<Box<dyn Write + Send>>,
    /// A fault held back for one call so the retirement that shared its
    /// cycle is reported first.
    pending_fault: Option<SimFault>,
}

impl Machine {
    pub fn new(kind: CoreKind, bus: SocBus, entry_pc: u32, cfg: PipelineConfig) -> Self {
        Machine {
            core: AnyCore::new(kind, entry_pc, cfg),
            bus,
            entry_pc,
            decode: cfg.decode,
            history: VecDeque::with_capacity(HISTORY_LEN),
            last_self_loop: None,
            halted: None,
            traps: 0,
            trace: None,
            pending_fault: None,
        }
    }

    pub fn set_trace(&mut self, sink: Box<dyn Write + Send>) {
        self.trace = Some(sink);
    }

    pub fn decode_options(&self) -> DecodeOptions {
        self.decode
    }

    pub fn entry_pc(&self) -> u32 {
        self.entry_pc
    }

    pub fn halted(&self) -> Option<HaltReason> {
        self.halted
    }

    pub fn history(&self) -> impl Iterator<Item = &RetireEvent> {
        self.history.iter()
    }

    fn fault(&self, fault: SimFault) -> RunFault {
        RunFault {
            fault,
            history: self.history.iter().copied().collect(),
        }
    }

    fn is_exit_store(&self, ev: &RetireEvent) -> bool {
        ev.mem
            .is_some_and(|m| m.dir == MemDir::Store && m.addr == self.bus.map().sim_exit)
    }

    fn is_self_jump(&self, ev: &RetireEvent) -> bool {
        ev.trap.is_none()
            && ev.next_pc == ev.pc
            && decode_with(ev.raw, self.decode).is_ok_and(|i| matches!(i.op, Op::Jal | Op::Jalr))
    }

    /// Advance one clock cycle. Returns the event retired this cycle, if any.
    pub fn clock(&mut self) -> Result<Option<RetireEvent>, RunFault> {
        if let Some(f) = self.pending_fault.take() {
            return Err(self.fault(f));
        }
        let next_cycle = self.core.cycles() + 1;
        if self.bus.buttons().reset_starts_at(next_cycle) {
            self.core.reset(self.bus.map().reset_vector);
            self.bus.clear_exit();
            self.last_self_loop = None;
            self.halted = None;
        }
        let report = match self.core.clock(&mut self.bus) {
            Ok(r) => r,
            Err(f) => match self.core.take_stranded() {
                Some(ev) => {
                    self.pending_fault = Some(f);
                    CycleReport {
                        retired: Some(ev),
                        ..Default::default()
                    }
                }
                None => return Err(self.fault(f)),
            },
        };
        let Some(ev) = report.retired else {
            return Ok(None);
        };
        if self.history.len() == HISTORY_LEN {
            self.history.pop_front();
        }
        self.history.push_back(ev);
        if ev.trap.is_some() {
            self.traps += 1;
        }
        if let Some(sink) = self.trace.as_mut() {
            if let Err(e) = writeln!(sink, "{}", format_event(&ev, self.decode)) {
                warn!("trace write failed: {e}; tracing disabled");
                self.trace = None;
            }
        }
        if self.is_exit_store(&ev) {
            if let Some(code) = self.bus.exit_code() {
                self.halted = Some(HaltReason::Exit(code));
            }
        } else if self.is_self_jump(&ev) {
            if self.last_self_loop == Some(ev.pc) {
                self.halted = Some(HaltReason::SelfLoop(ev.pc));
            }
            self.last_self_loop = Some(ev.pc);
        } else {
            self.last_self_loop = None;
        }
        Ok(Some(ev))
    }

    /// Run until a halt condition; the budget counts total elapsed cycles.
    pub fn run(&mut self, max_cycles: u64) -> Result<HaltReason, RunFault> {
        while self.halted.is_none() {
            if self.core.cycles() >= max_cycles {
                return Ok(HaltReason::Budget);
            }
            self.clock()?;
        }
        Ok(self.halted.expect("loop exits on halt"))
    }

    /// Advance until the next retirement (or trap entry).
    pub fn next_retirement(&mut self, max_cycles: u64) -> Result<Result<RetireEvent, HaltReason>, RunFault> {
        loop {
            if let Some(h) = self.halted {
                return Ok(Err(h));
            }
            if self.core.cycles() >= max_cycles {
                return Ok(Err(HaltReason::Budget));
            }
            if let Some(ev) = self.clock()? {
                return Ok(Ok(ev));
            }
        }
    }

    /// Retire up to `n` instructions (`None`: unbounded), stopping early
    /// when the next instruction to retire sits on a breakpoint.
    pub fn step(&mut self, n: Option<u64>, breakpoints: &[u32], max_cycles: u64) -> Result<StepStop, RunFault> {
        let mut gate = n.map(ClockGate::step).unwrap_or_else(ClockGate::free);
        while gate.enabled() {
            if let Some(h) = self.halted {
                return Ok(StepStop::Halted(h));
            }
            if self.core.cycles() >= max_cycles {
                return Ok(StepStop::Halted(HaltReason::Budget));
            }
            if let Some(ev) = self.clock()? {
                gate.on_retire();
                if let Some(h) = self.halted {
                    return Ok(StepStop::Halted(h));
                }
                if breakpoints.contains(&ev.next_pc) {
                    return Ok(StepStop::Breakpoint(ev.next_pc));
                }
            }
        }
        Ok(StepStop::Done)
    }

    pub fn stats(&self, dhrystone_iters: Option<u64>) -> StatsReport {
        let (branch, stalls) = match &self.core {
            AnyCore::Golden(_) => (BranchStats::default(), StallBreakdown::default()),
            AnyCore::Pipeline(p) => {
                let s = p.stats();
                let ps = p.predictor().stats();
                (
                    BranchStats {
                        resolved: ps.resolved(),
                        mispredicted: ps.mispredicts,
                    },
                    StallBreakdown {
                        load_use: s.load_use_bubbles,
                        flush: s.flush_bubbles,
                        trap_redirect: s.trap_bubbles,
                        coherence: s.coherence_bubbles,
                    },
                )
            }
        };
        StatsReport {
            core: self.core.kind(),
            cycles: self.core.cycles(),
            instructions: self.core.instructions(),
            traps: self.traps,
            branch,
            stalls,
            dhrystone_iters,
            uart_bytes: self.bus.uart_output().len() as u64,
        }
    }
}
