//! Cycle-accurate five-stage pipeline (IF, ID, EX, MEM, WB).
//!
//! Timing model:
//! - Branches, jumps and MRET resolve in EX. A misprediction squashes the
//!   IF and ID occupants (2 cycles).
//! - EX operands forward from EX/MEM and MEM/WB; the register file writes in
//!   WB before ID reads in the same cycle.
//! - A load followed by a dependent instruction costs one bubble.
//! - Exceptions commit at the end of MEM: the excepting instruction leaves
//!   without effect, the three younger slots are squashed and fetch restarts
//!   at mtvec, so a trap costs 4 cycles over an ordinary retirement.
//!
//! Within a tick the stages are evaluated WB, MEM, EX, ID, IF, each reading
//! the latch state from the start of the cycle.

pub mod hazard;
pub mod latches;

use std::fmt;

use crate::bus::{SocBus, UnmappedPolicy};
use crate::csr::{detect_exception, CsrFile, Exception, TrapCause};
use crate::event::{Core, CoreKind, CycleReport, FaultKind, MemDir, MemEffect, RetireEvent, SimFault, TrapInfo};
use crate::exec::{execute, load_extend, MemKind};
use crate::golden::truncate;
use crate::isa::{decode_with, disassemble_word, DecodeOptions};
use crate::predictor::{BranchPredictor, Prediction, DEFAULT_INDEX_BITS};

pub use hazard::{hazard_resolve, ForwardSelect, ForwardSource, HazardSignals};
use latches::*;

/// Pipeline depth minus one: cycles before the first retirement.
pub const FILL_CYCLES: u64 = 4;
pub const MISPREDICT_PENALTY: u64 = 2;
pub const TRAP_PENALTY: u64 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    pub decode: DecodeOptions,
    pub predictor_index_bits: u32,
    /// Test hook: disable EX/MEM and MEM/WB forwarding.
    pub forwarding: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            decode: DecodeOptions::default(),
            predictor_index_bits: DEFAULT_INDEX_BITS,
            forwarding: true,
        }
    }
}

/// Counters kept by the pipeline. Everything is counted at writeback, so
/// every cycle is either a retirement or exactly one kind of bubble, and
/// events of squashed instructions are never counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PipelineStats {
    pub cycles: u64,
    pub retired: u64,
    pub traps: u64,
    pub mispredicts: u64,
    pub load_use_stalls: u64,
    pub coherence_flushes: u64,
    pub resets: u64,
    pub fill_bubbles: u64,
    pub load_use_bubbles: u64,
    pub flush_bubbles: u64,
    pub trap_bubbles: u64,
    pub coherence_bubbles: u64,
}

impl PipelineStats {
    fn count_bubble(&mut self, cause: BubbleCause) {
        match cause {
            BubbleCause::Fill => self.fill_bubbles += 1,
            BubbleCause::LoadUse => self.load_use_bubbles += 1,
            BubbleCause::Flush => self.flush_bubbles += 1,
            BubbleCause::Trap => self.trap_bubbles += 1,
            BubbleCause::Coherence => self.coherence_bubbles += 1,
        }
    }

    /// Cycles predicted from event counts:
    /// retired + fill + load-use bubbles + 2 per mispredict + 4 per trap
    /// (+ 3 per coherence flush, zero unless code overwrites itself).
    pub fn predicted_cycles(&self) -> u64 {
        self.retired
            + FILL_CYCLES * (1 + self.resets)
            + self.load_use_bubbles
            + MISPREDICT_PENALTY * self.mispredicts
            + TRAP_PENALTY * self.traps
            + 3 * self.coherence_flushes
    }

    /// Whether the stall-accounting identity holds. True after any cycle in
    /// which an instruction retires without having redirected fetch itself
    /// (its own flush bubbles are still behind it), in particular at every
    /// halt.
    pub fn identity_holds(&self) -> bool {
        self.cycles == self.predicted_cycles()
            && self.flush_bubbles == MISPREDICT_PENALTY * self.mispredicts
            && self.trap_bubbles == TRAP_PENALTY * self.traps
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BranchResolution {
    pub actual_taken: bool,
    pub actual_target: u32,
    pub mispredict: bool,
}

/// Compare the resolved outcome of a control transfer with its prediction.
/// A taken transfer also mispredicts when the predicted target is wrong.
pub fn resolve_branch(pc: u32, actual_taken: bool, actual_target: u32, pred: Prediction) -> BranchResolution {
    let actual_target = if actual_taken { actual_target } else { pc.wrapping_add(4) };
    let mispredict = actual_taken != pred.taken || (actual_taken && actual_target != pred.target);
    BranchResolution {
        actual_taken,
        actual_target,
        mispredict,
    }
}

/// Fields a fault-injection test can corrupt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatchField {
    IfIdRaw,
    IdExRs1,
    IdExRs2,
    ExMemResult,
    ExMemStoreData,
    MemWbValue,
}

impl LatchField {
    pub const ALL: [LatchField; 6] = [
        LatchField::IfIdRaw,
        LatchField::IdExRs1,
        LatchField::IdExRs2,
        LatchField::ExMemResult,
        LatchField::ExMemStoreData,
        LatchField::MemWbValue,
    ];
}

/// What one stage holds, for the debugger's pipeline view.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StageView {
    Instr { pc: u32, raw: u32 },
    Bubble(BubbleCause),
}

#[derive(Clone, Debug)]
pub struct PipelineCore {
    cfg: PipelineConfig,
    regs: [u32; 32],
    csrs: CsrFile,
    predictor: BranchPredictor,
    fetch_pc: u32,
    if_id: IfId,
    id_ex: IdEx,
    ex_mem: ExMem,
    mem_wb: MemWb,
    arch_pc: u32,
    cycles: u64,
    stats: PipelineStats,
    mcycle_written: bool,
    /// Retired by WB in a cycle whose MEM stage then faulted.
    stranded: Option<RetireEvent>,
}

impl PipelineCore {
    pub fn new(reset_pc: u32, cfg: PipelineConfig) -> Self {
        PipelineCore {
            cfg,
            regs: [0; 32],
            csrs: CsrFile::new(),
            predictor: BranchPredictor::new(cfg.predictor_index_bits),
            fetch_pc: reset_pc,
            if_id: Slot::Bubble(BubbleCause::Fill),
            id_ex: Slot::Bubble(BubbleCause::Fill),
            ex_mem: Slot::Bubble(BubbleCause::Fill),
            mem_wb: Slot::Bubble(BubbleCause::Fill),
            arch_pc: reset_pc,
            cycles: 0,
            stats: PipelineStats::default(),
            mcycle_written: false,
            stranded: None,
        }
    }

    pub fn stats(&self) -> PipelineStats {
        self.stats
    }

    pub fn predictor(&self) -> &BranchPredictor {
        &self.predictor
    }

    pub fn csrs_mut(&mut self) -> &mut CsrFile {
        &mut self.csrs
    }

    pub fn regs_mut(&mut self) -> &mut [u32; 32] {
        &mut self.regs
    }

    /// Stage occupancy in IF, ID, EX, MEM, WB order. IF shows the address
    /// that will be fetched on the next clock.
    pub fn stages(&self) -> [StageView; 5] {
        fn view<T>(slot: &Slot<T>, f: impl Fn(&T) -> (u32, u32)) -> StageView {
            match slot {
                Slot::Busy(t) => {
                    let (pc, raw) = f(t);
                    StageView::Instr { pc, raw }
                }
                Slot::Bubble(c) => StageView::Bubble(*c),
            }
        }
        [
            StageView::Instr {
                pc: self.fetch_pc,
                raw: 0,
            },
            view(&self.if_id, |f| (f.pc, f.raw)),
            view(&self.id_ex, |d| (d.pc, d.raw)),
            view(&self.ex_mem, |x| (x.pc, x.raw)),
            view(&self.mem_wb, |c| (c.pc, c.raw)),
        ]
    }

    /// Test hook: flip one bit of a latch field. Returns false when the
    /// targeted latch holds a bubble (or no such field).
    pub fn inject_bit_flip(&mut self, field: LatchField, bit: u32) -> bool {
        let mask = 1u32 << (bit % 32);
        match field {
            LatchField::IfIdRaw => self.if_id.busy_mut().map(|f| f.raw ^= mask).is_some(),
            LatchField::IdExRs1 => self.id_ex.busy_mut().map(|d| d.rs1_val ^= mask).is_some(),
            LatchField::IdExRs2 => self.id_ex.busy_mut().map(|d| d.rs2_val ^= mask).is_some(),
            LatchField::ExMemResult => self
                .ex_mem
                .busy_mut()
                .and_then(|x| x.result.as_mut())
                .map(|v| *v ^= mask)
                .is_some(),
            LatchField::ExMemStoreData => match self.ex_mem.busy_mut().and_then(|x| x.mem.as_mut()) {
                Some(access) => match &mut access.kind {
                    MemKind::Store { value } => {
                        *value ^= mask;
                        true
                    }
                    MemKind::Load => false,
                },
                None => false,
            },
            LatchField::MemWbValue => self
                .mem_wb
                .busy_mut()
                .and_then(|c| c.rd_write.as_mut())
                .map(|(_, v)| *v ^= mask)
                .is_some(),
        }
    }

    fn fault(&self, kind: FaultKind, addr: u32, pc: u32) -> SimFault {
        SimFault {
            kind,
            addr,
            pc,
            cycle: self.cycles,
        }
    }

    fn trap_completion(&mut self, pc: u32, raw: u32, e: Exception) -> (Completed, u32) {
        let handler = self.csrs.raise_trap(e.cause, pc, e.tval);
        let c = Completed {
            pc,
            raw,
            rd_write: None,
            mem: None,
            trap: Some(TrapInfo {
                cause: e.cause,
                tval: e.tval,
                mepc: pc,
            }),
            next_pc: handler,
            suppress_instret: false,
            mispredicted: false,
            coherence_flush: false,
        };
        (c, handler)
    }

    /// Advance every stage by one cycle.
    pub fn tick(&mut self, bus: &mut SocBus) -> Result<CycleReport, SimFault> {
        self.cycles += 1;
        self.stats.cycles += 1;
        bus.set_cycle(self.cycles);
        let mut report = CycleReport::default();

        // WB
        match self.mem_wb {
            Slot::Busy(c) => {
                if let Some((rd, v)) = c.rd_write {
                    self.regs[rd as usize] = v;
                }
                self.arch_pc = c.next_pc;
                if c.trap.is_none() {
                    self.stats.retired += 1;
                    if !c.suppress_instret {
                        self.csrs.tick_minstret();
                    }
                } else {
                    self.stats.traps += 1;
                    self.stats.count_bubble(BubbleCause::Trap);
                }
                self.stats.mispredicts += c.mispredicted as u64;
                self.stats.coherence_flushes += c.coherence_flush as u64;
                report.retired = Some(RetireEvent {
                    cycle: self.cycles,
                    pc: c.pc,
                    raw: c.raw,
                    rd_write: c.rd_write,
                    mem: c.mem,
                    trap: c.trap,
                    next_pc: c.next_pc,
                });
                if bus.exit_code().is_some() {
                    // The store to the exit register has retired; nothing
                    // younger may touch the bus.
                    self.mem_wb = Slot::Bubble(BubbleCause::Fill);
                    self.end_cycle();
                    return Ok(report);
                }
            }
            Slot::Bubble(cause) => self.stats.count_bubble(cause),
        }

        // MEM
        let (next_mem_wb, redirect) = match self.memory_stage(bus) {
            Ok(out) => out,
            Err(f) => {
                self.stranded = report.retired;
                return Err(f);
            }
        };

        let next_ex_mem;
        let next_id_ex;
        let next_if_id;
        if let Some((target, cause)) = redirect {
            next_ex_mem = Slot::Bubble(cause);
            next_id_ex = Slot::Bubble(cause);
            next_if_id = Slot::Bubble(cause);
            self.fetch_pc = target;
            report.flushed = true;
        } else {
            let pending_instret = matches!(next_mem_wb, Slot::Busy(c) if c.trap.is_none() && !c.suppress_instret);
            let (executed, mispredict) = self.execute_stage(pending_instret);
            next_ex_mem = executed;
            if let Some(target) = mispredict {
                next_id_ex = Slot::Bubble(BubbleCause::Flush);
                next_if_id = Slot::Bubble(BubbleCause::Flush);
                self.fetch_pc = target;
                report.flushed = true;
            } else {
                let hz = hazard_resolve(self.id_sources(), &self.id_ex, &self.ex_mem, &self.mem_wb);
                if hz.load_use_stall {
                    self.stats.load_use_stalls += 1;
                    next_id_ex = Slot::Bubble(BubbleCause::LoadUse);
                    next_if_id = self.if_id;
                    report.stalled = true;
                } else {
                    next_id_ex = self.decode_stage();
                    next_if_id = self.fetch_stage(bus);
                }
            }
        }

        self.mem_wb = next_mem_wb;
        self.ex_mem = next_ex_mem;
        self.id_ex = next_id_ex;
        self.if_id = next_if_id;
        self.end_cycle();
        Ok(report)
    }

    fn end_cycle(&mut self) {
        let (mcycle_written, _) = self.csrs.take_counter_writes();
        self.csrs.tick_mcycle(mcycle_written || self.mcycle_written);
        self.mcycle_written = false;
        self.regs[0] = 0;
    }

    fn memory_stage(&mut self, bus: &mut SocBus) -> Result<(MemWb, Option<(u32, BubbleCause)>), SimFault> {
        let x = match self.ex_mem {
            Slot::Bubble(c) => return Ok((Slot::Bubble(c), None)),
            Slot::Busy(x) => x,
        };
        if x.halt_fault {
            return Err(self.fault(FaultKind::Fetch, x.pc, x.pc));
        }
        if let Some(e) = x.exception {
            let (c, handler) = self.trap_completion(x.pc, x.raw, e);
            return Ok((Slot::Busy(c), Some((handler, BubbleCause::Trap))));
        }
        let instr = x.instr.expect("non-excepting instruction is decoded");
        let trap_policy = bus.policy() == UnmappedPolicy::Trap;
        let mut rd_value = x.result;
        let mut mem = None;
        let mut redirect = None;
        if let Some(access) = x.mem {
            match access.kind {
                MemKind::Load => match bus.read(access.addr, access.size) {
                    Ok(v) => {
                        let v = load_extend(instr.op, v);
                        rd_value = Some(v);
                        mem = Some(MemEffect {
                            addr: access.addr,
                            size: access.size,
                            dir: MemDir::Load,
                            value: v,
                        });
                    }
                    Err(_) if trap_policy => {
                        let e = Exception::new(TrapCause::LoadAccessFault, access.addr);
                        let (c, handler) = self.trap_completion(x.pc, x.raw, e);
                        return Ok((Slot::Busy(c), Some((handler, BubbleCause::Trap))));
                    }
                    Err(_) => return Err(self.fault(FaultKind::Load, access.addr, x.pc)),
                },
                MemKind::Store { value } => match bus.write(access.addr, access.size, value) {
                    Ok(()) => {
                        mem = Some(MemEffect {
                            addr: access.addr,
                            size: access.size,
                            dir: MemDir::Store,
                            value: truncate(value, access.size),
                        });
                        if self.holds_stale_fetch(access.addr, access.size) {
                            redirect = Some((x.pc.wrapping_add(4), BubbleCause::Coherence));
                        }
                    }
                    Err(_) if trap_policy => {
                        let e = Exception::new(TrapCause::StoreAccessFault, access.addr);
                        let (c, handler) = self.trap_completion(x.pc, x.raw, e);
                        return Ok((Slot::Busy(c), Some((handler, BubbleCause::Trap))));
                    }
                    Err(_) => return Err(self.fault(FaultKind::Store, access.addr, x.pc)),
                },
            }
        }
        let rd_write = match (instr.dest(), rd_value) {
            (Some(rd), Some(v)) if rd != 0 => Some((rd, v)),
            _ => None,
        };
        let c = Completed {
            pc: x.pc,
            raw: x.raw,
            rd_write,
            mem,
            trap: None,
            next_pc: x.next_pc,
            suppress_instret: x.suppress_instret,
            mispredicted: x.mispredicted,
            coherence_flush: redirect.is_some(),
        };
        Ok((Slot::Busy(c), redirect))
    }

    /// Whether a store to [addr, addr+size) overwrote an instruction that has
    /// already been fetched into ID or EX.
    fn holds_stale_fetch(&self, addr: u32, size: u32) -> bool {
        let overlaps = |pc: u32| {
            let (a0, a1) = (addr as u64, addr as u64 + size as u64);
            let (p0, p1) = (pc as u64, pc as u64 + 4);
            a0 < p1 && p0 < a1
        };
        self.if_id.busy().is_some_and(|f| overlaps(f.pc)) || self.id_ex.busy().is_some_and(|d| overlaps(d.pc))
    }

    fn forwarded(&self, src: ForwardSource, reg_value: u32) -> u32 {
        if !self.cfg.forwarding {
            return reg_value;
        }
        match src {
            ForwardSource::RegisterFile => reg_value,
            ForwardSource::FromExMem => self
                .ex_mem
                .busy()
                .and_then(|x| x.forward_value())
                .map(|(_, v)| v)
                .unwrap_or(reg_value),
            ForwardSource::FromMemWb => self
                .mem_wb
                .busy()
                .and_then(|c| c.rd_write)
                .map(|(_, v)| v)
                .unwrap_or(reg_value),
        }
    }

    /// EX. Returns the next EX/MEM latch and, on a misprediction, the
    /// corrected fetch address.
    fn execute_stage(&mut self, pending_instret: bool) -> (ExMem, Option<u32>) {
        let d = match self.id_ex {
            Slot::Bubble(c) => return (Slot::Bubble(c), None),
            Slot::Busy(d) => d,
        };
        let pass_through = Executed {
            pc: d.pc,
            raw: d.raw,
            instr: d.instr,
            result: None,
            mem: None,
            next_pc: d.pc.wrapping_add(4),
            exception: d.exception,
            halt_fault: d.halt_fault,
            suppress_instret: false,
            mispredicted: false,
        };
        let Some(instr) = d.instr.filter(|_| d.exception.is_none() && !d.halt_fault) else {
            return (Slot::Busy(pass_through), None);
        };

        let hz = hazard_resolve([None, None], &self.id_ex, &self.ex_mem, &self.mem_wb);
        let a = self.forwarded(hz.fwd.src_a, d.rs1_val);
        let b = self.forwarded(hz.fwd.src_b, d.rs2_val);

        // minstret as seen by this instruction must include the older one
        // now in MEM, which retires next cycle.
        let bias = (instr.op.is_csr() && pending_instret) as u64;
        self.csrs.minstret = self.csrs.minstret.wrapping_add(bias);
        let out = execute(&instr, d.raw, d.pc, a, b, &mut self.csrs);
        self.csrs.minstret = self.csrs.minstret.wrapping_sub(bias);
        let (mcycle_written, minstret_written) = self.csrs.take_counter_writes();
        self.mcycle_written |= mcycle_written;

        if let Some(e) = out.exception {
            return (
                Slot::Busy(Executed {
                    exception: Some(e),
                    ..pass_through
                }),
                None,
            );
        }

        let mut redirect = None;
        if instr.op.is_control_transfer() {
            let r = resolve_branch(d.pc, out.taken, out.next_pc, d.pred);
            self.predictor.train(d.pc, r.actual_taken, r.actual_target, r.mispredict);
            if r.mispredict {
                redirect = Some(r.actual_target);
            }
        } else if d.pred.taken {
            // Stale target-buffer hit on an instruction that no longer
            // branches (the code was overwritten).
            redirect = Some(d.pc.wrapping_add(4));
        }

        let x = Executed {
            result: out.result,
            mem: out.mem,
            next_pc: out.next_pc,
            suppress_instret: minstret_written,
            mispredicted: redirect.is_some(),
            ..pass_through
        };
        (Slot::Busy(x), redirect)
    }

    fn id_sources(&self) -> [Option<u8>; 2] {
        let Some(f) = self.if_id.busy() else {
            return [None, None];
        };
        if f.exception.is_some() || f.halt_fault {
            return [None, None];
        }
        match decode_with(f.raw, self.cfg.decode) {
            Ok(i) => [i.src1(), i.src2()],
            Err(_) => [None, None],
        }
    }

    /// ID: decode and read the register file (already updated by WB).
    fn decode_stage(&self) -> IdEx {
        let f = match self.if_id {
            Slot::Bubble(c) => return Slot::Bubble(c),
            Slot::Busy(f) => f,
        };
        let mut d = Decoded {
            pc: f.pc,
            raw: f.raw,
            instr: None,
            rs1_val: 0,
            rs2_val: 0,
            pred: f.pred,
            exception: f.exception,
            halt_fault: f.halt_fault,
        };
        if f.exception.is_some() || f.halt_fault {
            return Slot::Busy(d);
        }
        let decoded = decode_with(f.raw, self.cfg.decode);
        if let Some(e) = detect_exception(decoded.as_ref().map_err(|e| *e), None, f.pc) {
            d.exception = Some(e);
            return Slot::Busy(d);
        }
        let instr = decoded.expect("illegal encodings raise above");
        d.rs1_val = self.regs[instr.rs1 as usize];
        d.rs2_val = self.regs[instr.rs2 as usize];
        d.instr = Some(instr);
        Slot::Busy(d)
    }

    /// IF: fetch at the current pc and follow the predictor.
    fn fetch_stage(&mut self, bus: &SocBus) -> IfId {
        let pc = self.fetch_pc;
        let pred = self.predictor.predict(pc);
        self.fetch_pc = pred.target;
        let mut f = Fetched {
            pc,
            raw: 0,
            pred,
            exception: None,
            halt_fault: false,
        };
        match bus.fetch(pc) {
            Ok(raw) => f.raw = raw,
            Err(_) if bus.policy() == UnmappedPolicy::Trap => {
                f.exception = Some(Exception::new(TrapCause::InstructionAccessFault, pc));
            }
            Err(_) => f.halt_fault = true,
        }
        Slot::Busy(f)
    }

    /// Stage occupancy rendered one stage per line.
    pub fn render_stages(&self) -> String {
        let names = ["IF", "ID", "EX", "MEM", "WB"];
        let mut out = String::new();
        for (name, view) in names.iter().zip(self.stages()) {
            let line = match view {
                StageView::Instr { pc, .. } if *name == "IF" => format!("{name:<3} {pc:08x} (next fetch)"),
                StageView::Instr { pc, raw } => {
                    format!("{name:<3} {pc:08x} {raw:08x} {}", disassemble_word(raw, self.cfg.decode))
                }
                StageView::Bubble(c) => format!("{name:<3} -------- bubble ({})", c.label()),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for PipelineStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cycles={} retired={} load_use={} mispredicts={} traps={}",
            self.cycles, self.retired, self.load_use_bubbles, self.mispredicts, self.traps
        )
    }
}

impl Core for PipelineCore {
    fn kind(&self) -> CoreKind {
        CoreKind::Pipeline
    }

    fn clock(&mut self, bus: &mut SocBus) -> Result<CycleReport, SimFault> {
        self.tick(bus)
    }

    fn take_stranded(&mut self) -> Option<RetireEvent> {
        self.stranded.take()
    }

    fn reset(&mut self, reset_pc: u32) {
        let cycles = self.cycles;
        let mut stats = self.stats;
        stats.resets += 1;
        *self = PipelineCore::new(reset_pc, self.cfg);
        self.cycles = cycles;
        self.stats = stats;
    }

    fn regs(&self) -> &[u32; 32] {
        &self.regs
    }

    fn csrs(&self) -> &CsrFile {
        &self.csrs
    }

    fn pc(&self) -> u32 {
        self.arch_pc
    }

    fn cycles(&self) -> u64 {
        self.cycles
    }

    fn instructions(&self) -> u64 {
        self.stats.retired
    }
}
