//! Differential execution: the golden and pipelined cores run the same
//! image and their retirement streams are compared one event at a time.
//!
//! Masked from the comparison: the cycle field, and the destination value
//! of CSR reads from the cycle counters (and, unless `strict_instret`, the
//! instruction-retired counters).

use std::fmt;

use crate::csr::{is_cycle_counter, is_instret_counter};
use crate::event::{Core, CoreKind, RetireEvent};
use crate::isa::{decode_with, DecodeOptions};
use crate::runner::{HaltReason, Machine, RunFault};
use crate::trace::format_event;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LockstepConfig {
    pub max_cycles: u64,
    pub strict_instret: bool,
}

impl Default for LockstepConfig {
    fn default() -> Self {
        LockstepConfig {
            max_cycles: 10_000_000,
            strict_instret: false,
        }
    }
}

/// What one side produced at a given retirement index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Side {
    Event(RetireEvent),
    Halted(HaltReason),
    Fault(RunFault),
}

impl Side {
    fn render(&self, opts: DecodeOptions) -> String {
        match self {
            Side::Event(ev) => format_event(ev, opts),
            Side::Halted(h) => format!("halted ({h:?})"),
            Side::Fault(f) => format!("fault: {}", f.fault),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    /// Retirement index (0-based) of the first mismatch.
    pub index: u64,
    pub cycle_golden: u64,
    pub cycle_pipeline: u64,
    pub golden: Side,
    pub pipeline: Side,
    /// Architectural state that differs after the mismatch, one per line.
    pub state_diff: Vec<String>,
    decode: DecodeOptions,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "divergence at retirement {} (golden cycle {}, pipeline cycle {})",
            self.index, self.cycle_golden, self.cycle_pipeline
        )?;
        writeln!(f, "  golden:   {}", self.golden.render(self.decode))?;
        writeln!(f, "  pipeline: {}", self.pipeline.render(self.decode))?;
        for d in &self.state_diff {
            writeln!(f, "  {d}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LockstepOutcome {
    /// Both cores retired the same stream and halted the same way.
    Match { retired: u64, halt: HaltReason },
    /// Both cores hit the same simulation fault at the same point.
    Fault(RunFault),
    Diverged(Box<Divergence>),
}

impl LockstepOutcome {
    pub fn is_match(&self) -> bool {
        matches!(self, LockstepOutcome::Match { .. })
    }
}

/// Whether the destination value of `ev` depends on timing and must be
/// ignored.
pub fn rd_is_masked(ev: &RetireEvent, opts: DecodeOptions, strict_instret: bool) -> bool {
    let Ok(instr) = decode_with(ev.raw, opts) else {
        return false;
    };
    instr.op.is_csr() && (is_cycle_counter(instr.csr) || (!strict_instret && is_instret_counter(instr.csr)))
}

/// Compare two events under the masking rules.
pub fn events_match(g: &RetireEvent, p: &RetireEvent, opts: DecodeOptions, strict_instret: bool) -> bool {
    let mask = |ev: &RetireEvent| {
        let mut ev = *ev;
        ev.cycle = 0;
        if rd_is_masked(&ev, opts, strict_instret) {
            ev.rd_write = ev.rd_write.map(|(rd, _)| (rd, 0));
        }
        ev
    };
    mask(g) == mask(p)
}

fn next(m: &mut Machine, max_cycles: u64) -> Side {
    match m.next_retirement(max_cycles) {
        Ok(Ok(ev)) => Side::Event(ev),
        Ok(Err(h)) => Side::Halted(h),
        Err(f) => Side::Fault(f),
    }
}

fn state_diff(g: &Machine, p: &Machine) -> Vec<String> {
    let mut out = Vec::new();
    if g.core.pc() != p.core.pc() {
        out.push(format!("pc: golden={:08x} pipeline={:08x}", g.core.pc(), p.core.pc()));
    }
    for (i, (a, b)) in g.core.regs().iter().zip(p.core.regs()).enumerate() {
        if a != b {
            out.push(format!("x{i}: golden={a:08x} pipeline={b:08x}"));
        }
    }
    let (gc, pc) = (g.core.csrs(), p.core.csrs());
    let pairs = [
        ("mstatus", gc.mstatus(), pc.mstatus()),
        ("mtvec", gc.mtvec(), pc.mtvec()),
        ("mepc", gc.mepc(), pc.mepc()),
        ("mcause", gc.mcause, pc.mcause),
        ("mtval", gc.mtval, pc.mtval),
        ("mscratch", gc.mscratch, pc.mscratch),
    ];
    for (name, a, b) in pairs {
        if a != b {
            out.push(format!("{name}: golden={a:08x} pipeline={b:08x}"));
        }
    }
    out
}

/// Run both machines to completion, comparing every retirement.
///
/// Both must be freshly built from the same image and scripts.
pub fn lockstep(golden: &mut Machine, pipeline: &mut Machine, cfg: LockstepConfig) -> LockstepOutcome {
    debug_assert_eq!(golden.core.kind(), CoreKind::Golden);
    debug_assert_eq!(pipeline.core.kind(), CoreKind::Pipeline);
    let opts = golden.decode_options();
    let mut index = 0u64;
    loop {
        let g = next(golden, cfg.max_cycles);
        if g == Side::Halted(HaltReason::Budget) {
            return LockstepOutcome::Match {
                retired: index,
                halt: HaltReason::Budget,
            };
        }
        // The budget is measured on the golden core; the pipeline only needs
        // a bound that catches a hang.
        let p = next(pipeline, cfg.max_cycles.saturating_mul(8));
        let same = match (&g, &p) {
            (Side::Event(a), Side::Event(b)) => events_match(a, b, opts, cfg.strict_instret),
            (Side::Halted(a), Side::Halted(b)) => a == b,
            (Side::Fault(a), Side::Fault(b)) => {
                let (mut fa, mut fb) = (a.fault, b.fault);
                fa.cycle = 0;
                fb.cycle = 0;
                fa == fb
            }
            _ => false,
        };
        if !same {
            return LockstepOutcome::Diverged(Box::new(Divergence {
                index,
                cycle_golden: golden.core.cycles(),
                cycle_pipeline: pipeline.core.cycles(),
                state_diff: state_diff(golden, pipeline),
                golden: g,
                pipeline: p,
                decode: opts,
            }));
        }
        match g {
            Side::Event(_) => index += 1,
            Side::Halted(halt) => return LockstepOutcome::Match { retired: index, halt },
            Side::Fault(f) => return LockstepOutcome::Fault(f),
        }
    }
}
