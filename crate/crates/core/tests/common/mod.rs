#![allow(dead_code)]

pub mod gen;

use rvpipe::bus::{MemoryMap, SocBus};
use rvpipe::event::{CoreKind, RetireEvent};
use rvpipe::isa::{encode, Instr, Op};
use rvpipe::lockstep::{lockstep, LockstepConfig, LockstepOutcome};
use rvpipe::loader::LoadedImage;
use rvpipe::pipeline::PipelineConfig;
use rvpipe::runner::{HaltReason, Machine};

pub const SIM_EXIT: u32 = 0x1000_2000;
pub const UART: u32 = 0x1000_0000;

/// Word-level assembler helpers.
pub mod asm {
    use super::*;

    fn enc(i: Instr) -> u32 {
        encode(&i).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn r(op: Op, rd: u8, rs1: u8, rs2: u8) -> u32 {
        enc(Instr::new(op).with_rd(rd).with_rs1(rs1).with_rs2(rs2))
    }

    /// ALU-immediate, shift-immediate, load and jalr forms.
    pub fn i(op: Op, rd: u8, rs1: u8, imm: i32) -> u32 {
        enc(Instr::new(op).with_rd(rd).with_rs1(rs1).with_imm(imm))
    }

    /// Store `rs2` to `imm(rs1)`.
    pub fn s(op: Op, rs2: u8, rs1: u8, imm: i32) -> u32 {
        enc(Instr::new(op).with_rs1(rs1).with_rs2(rs2).with_imm(imm))
    }

    pub fn b(op: Op, rs1: u8, rs2: u8, off: i32) -> u32 {
        enc(Instr::new(op).with_rs1(rs1).with_rs2(rs2).with_imm(off))
    }

    /// `imm20` is the value placed in bits 31:12.
    pub fn u(op: Op, rd: u8, imm20: u32) -> u32 {
        enc(Instr::new(op).with_rd(rd).with_imm((imm20 << 12) as i32))
    }

    pub fn jal(rd: u8, off: i32) -> u32 {
        enc(Instr::new(Op::Jal).with_rd(rd).with_imm(off))
    }

    pub fn csr(op: Op, rd: u8, csr: u16, rs1_or_zimm: u8) -> u32 {
        enc(Instr::new(op).with_rd(rd).with_rs1(rs1_or_zimm).with_csr(csr))
    }

    pub fn addi(rd: u8, rs1: u8, imm: i32) -> u32 {
        i(Op::Addi, rd, rs1, imm)
    }

    pub fn nop() -> u32 {
        addi(0, 0, 0)
    }

    pub const ECALL: u32 = 0x0000_0073;
    pub const EBREAK: u32 = 0x0010_0073;
    pub const MRET: u32 = 0x3020_0073;

    /// Load a full 32-bit constant in two instructions.
    pub fn li(rd: u8, value: u32) -> [u32; 2] {
        let lo = ((value as i32) << 20) >> 20;
        let hi = value.wrapping_sub(lo as u32) >> 12;
        [u(Op::Lui, rd, hi), addi(rd, rd, lo)]
    }

    /// Store `rs` to SIM_EXIT via scratch register `tmp`.
    pub fn exit_with(rs: u8, tmp: u8) -> [u32; 2] {
        [u(Op::Lui, tmp, SIM_EXIT >> 12), s(Op::Sw, rs, tmp, 0)]
    }
}

pub fn bus_with(words: &[u32], base: u32) -> SocBus {
    let mut bus = SocBus::new(MemoryMap::default());
    LoadedImage::from_words(words, base).install(&mut bus).unwrap();
    bus
}

/// Place extra word blocks at fixed addresses.
pub fn bus_with_blocks(blocks: &[(u32, &[u32])]) -> SocBus {
    let mut bus = SocBus::new(MemoryMap::default());
    for (base, words) in blocks {
        LoadedImage::from_words(words, *base).install(&mut bus).unwrap();
    }
    bus
}

pub fn machine(kind: CoreKind, bus: SocBus) -> Machine {
    Machine::new(kind, bus, 0, PipelineConfig::default())
}

pub fn golden(words: &[u32]) -> Machine {
    machine(CoreKind::Golden, bus_with(words, 0))
}

pub fn pipeline(words: &[u32]) -> Machine {
    machine(CoreKind::Pipeline, bus_with(words, 0))
}

/// Run to a halt, collecting every retirement.
pub fn collect(m: &mut Machine, max_cycles: u64) -> (Vec<RetireEvent>, HaltReason) {
    let mut events = Vec::new();
    loop {
        match m.next_retirement(max_cycles).expect("no simulation fault") {
            Ok(ev) => events.push(ev),
            Err(h) => return (events, h),
        }
    }
}

pub fn lockstep_blocks(blocks: &[(u32, &[u32])], cfg: LockstepConfig) -> LockstepOutcome {
    let mut g = machine(CoreKind::Golden, bus_with_blocks(blocks));
    let mut p = machine(CoreKind::Pipeline, bus_with_blocks(blocks));
    lockstep(&mut g, &mut p, cfg)
}

pub fn lockstep_words(words: &[u32]) -> LockstepOutcome {
    lockstep_blocks(&[(0, words)], LockstepConfig::default())
}
