//! Single-cycle reference core: one instruction per clock, CPI exactly 1.
//! The pipelined core is checked against it retirement by retirement.

use crate::bus::{SocBus, UnmappedPolicy};
use crate::csr::{detect_exception, CsrFile, Exception, TrapCause};
use crate::event::{Core, CoreKind, CycleReport, FaultKind, MemDir, MemEffect, RetireEvent, SimFault, TrapInfo};
use crate::exec::{execute, load_extend, MemKind};
use crate::isa::{decode_with, DecodeOptions};

/// Architectural state: the unit of lockstep comparison.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ArchState {
    pub pc: u32,
    pub regs: [u32; 32],
    pub csrs: CsrFile,
}

impl ArchState {
    pub fn new(pc: u32) -> Self {
        ArchState {
            pc,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct GoldenCore {
    state: ArchState,
    opts: DecodeOptions,
    cycles: u64,
    instructions: u64,
}

impl GoldenCore {
    pub fn new(reset_pc: u32, opts: DecodeOptions) -> Self {
        GoldenCore {
            state: ArchState::new(reset_pc),
            opts,
            cycles: 0,
            instructions: 0,
        }
    }

    pub fn state(&self) -> &ArchState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut ArchState {
        &mut self.state
    }

    fn fault(&self, kind: FaultKind, addr: u32) -> SimFault {
        SimFault {
            kind,
            addr,
            pc: self.state.pc,
            cycle: self.cycles,
        }
    }

    fn trap(&mut self, raw: u32, e: Exception) -> RetireEvent {
        let pc = self.state.pc;
        let handler = self.state.csrs.raise_trap(e.cause, pc, e.tval);
        self.state.pc = handler;
        RetireEvent {
            cycle: self.cycles,
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
        }
    }

    /// Fetch, decode and execute exactly one instruction.
    pub fn step(&mut self, bus: &mut SocBus) -> Result<RetireEvent, SimFault> {
        self.cycles += 1;
        bus.set_cycle(self.cycles);
        let event = self.execute_one(bus)?;
        let (mcycle_written, minstret_written) = self.state.csrs.take_counter_writes();
        self.state.csrs.tick_mcycle(mcycle_written);
        if event.retired() {
            self.instructions += 1;
            if !minstret_written {
                self.state.csrs.tick_minstret();
            }
        }
        self.state.regs[0] = 0;
        Ok(event)
    }

    fn execute_one(&mut self, bus: &mut SocBus) -> Result<RetireEvent, SimFault> {
        let pc = self.state.pc;
        let policy = bus.policy();
        let raw = match bus.fetch(pc) {
            Ok(w) => w,
            Err(_) if policy == UnmappedPolicy::Trap => {
                return Ok(self.trap(0, Exception::new(TrapCause::InstructionAccessFault, pc)));
            }
            Err(_) => return Err(self.fault(FaultKind::Fetch, pc)),
        };
        let decoded = decode_with(raw, self.opts);
        if let Some(e) = detect_exception(decoded.as_ref().map_err(|e| *e), None, pc) {
            return Ok(self.trap(raw, e));
        }
        let instr = decoded.expect("illegal encodings trap above");
        let rs1 = self.state.regs[instr.rs1 as usize];
        let rs2 = self.state.regs[instr.rs2 as usize];
        let out = execute(&instr, raw, pc, rs1, rs2, &mut self.state.csrs);
        if let Some(e) = out.exception {
            return Ok(self.trap(raw, e));
        }

        let mut value = out.result;
        let mut mem = None;
        if let Some(access) = out.mem {
            match access.kind {
                MemKind::Load => match bus.read(access.addr, access.size) {
                    Ok(v) => {
                        let v = load_extend(instr.op, v);
                        value = Some(v);
                        mem = Some(MemEffect {
                            addr: access.addr,
                            size: access.size,
                            dir: MemDir::Load,
                            value: v,
                        });
                    }
                    Err(_) if policy == UnmappedPolicy::Trap => {
                        return Ok(self.trap(raw, Exception::new(TrapCause::LoadAccessFault, access.addr)));
                    }
                    Err(_) => return Err(self.fault(FaultKind::Load, access.addr)),
                },
                MemKind::Store { value: data } => match bus.write(access.addr, access.size, data) {
                    Ok(()) => {
                        mem = Some(MemEffect {
                            addr: access.addr,
                            size: access.size,
                            dir: MemDir::Store,
                            value: truncate(data, access.size),
                        });
                    }
                    Err(_) if policy == UnmappedPolicy::Trap => {
                        return Ok(self.trap(raw, Exception::new(TrapCause::StoreAccessFault, access.addr)));
                    }
                    Err(_) => return Err(self.fault(FaultKind::Store, access.addr)),
                },
            }
        }

        let rd_write = match (instr.dest(), value) {
            (Some(rd), Some(v)) if rd != 0 => {
                self.state.regs[rd as usize] = v;
                Some((rd, v))
            }
            _ => None,
        };
        self.state.pc = out.next_pc;
        Ok(RetireEvent {
            cycle: self.cycles,
            pc,
            raw,
            rd_write,
            mem,
            trap: None,
            next_pc: out.next_pc,
        })
    }
}

pub(crate) fn truncate(value: u32, size: u32) -> u32 {
    match size {
        1 => value & 0xFF,
        2 => value & 0xFFFF,
        _ => value,
    }
}

impl Core for GoldenCore {
    fn kind(&self) -> CoreKind {
        CoreKind::Golden
    }

    fn clock(&mut self, bus: &mut SocBus) -> Result<CycleReport, SimFault> {
        let ev = self.step(bus)?;
        Ok(CycleReport {
            retired: Some(ev),
            stalled: false,
            flushed: false,
        })
    }

    fn reset(&mut self, reset_pc: u32) {
        self.state = ArchState::new(reset_pc);
    }

    fn regs(&self) -> &[u32; 32] {
        &self.state.regs
    }

    fn csrs(&self) -> &CsrFile {
        &self.state.csrs
    }

    fn pc(&self) -> u32 {
        self.state.pc
    }

    fn cycles(&self) -> u64 {
        self.cycles
    }

    fn instructions(&self) -> u64 {
        self.instructions
    }
}
