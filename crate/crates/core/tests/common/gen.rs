//! Random test programs for differential runs.
//!
//! Register conventions: x28 data base, x29 loop counter, x30 scratch for
//! multi-word idioms and the trap handler, x31 sink for counter reads (never
//! read back). Control flow is forward-only except for counted loops, so
//! every program terminates.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rvpipe::csr::addr;
use rvpipe::isa::{decode, Op};

use super::asm::*;

pub const HANDLER: u32 = 0x4000;
pub const DATA: u32 = 0x8000;
pub const MAX_LEN: usize = 512;

const DATA_REG: u8 = 28;
const LOOP_REG: u8 = 29;
const SCRATCH: u8 = 30;
const SINK: u8 = 31;

#[derive(Clone, Debug)]
pub struct Program {
    pub code: Vec<u32>,
    pub handler: Vec<u32>,
}

impl Program {
    pub fn blocks(&self) -> [(u32, &[u32]); 2] {
        [(0, &self.code[..]), (HANDLER, &self.handler[..])]
    }

    /// Operation kinds that appear in the program text.
    pub fn ops(&self) -> BTreeSet<String> {
        self.code
            .iter()
            .chain(&self.handler)
            .filter_map(|&w| decode(w).ok())
            .map(|i| i.op.mnemonic().to_owned())
            .collect()
    }
}

/// Trap handler: skip the trapping instruction.
pub fn skip_handler() -> Vec<u32> {
    vec![
        csr(Op::Csrrs, SCRATCH, addr::MEPC, 0),
        addi(SCRATCH, SCRATCH, 4),
        csr(Op::Csrrw, 0, addr::MEPC, SCRATCH),
        MRET,
    ]
}

#[derive(Clone, Debug)]
enum Block {
    Words(Vec<u32>),
    /// Skip `skip` following blocks; `bias` is added to the offset.
    Branch { op: Op, rs1: u8, rs2: u8, skip: usize, bias: i32 },
    Jal { rd: u8, skip: usize, bias: i32 },
    /// `auipc x30, 0; jalr rd, off(x30)`
    Jalr { rd: u8, skip: usize, bias: i32 },
    /// `li x30, word; sw x30, addr(x0)` overwriting block `target`.
    Patch { target: usize, word: u32 },
    Exit { rs: u8 },
}

impl Block {
    fn len(&self) -> usize {
        match self {
            Block::Words(w) => w.len(),
            Block::Branch { .. } | Block::Jal { .. } => 1,
            Block::Jalr { .. } | Block::Exit { .. } => 2,
            Block::Patch { .. } => 3,
        }
    }
}

const ALU_R: [Op; 10] = [
    Op::Add,
    Op::Sub,
    Op::Sll,
    Op::Slt,
    Op::Sltu,
    Op::Xor,
    Op::Srl,
    Op::Sra,
    Op::Or,
    Op::And,
];
const ALU_I: [Op; 6] = [Op::Addi, Op::Slti, Op::Sltiu, Op::Xori, Op::Ori, Op::Andi];
const SHIFT_I: [Op; 3] = [Op::Slli, Op::Srli, Op::Srai];
const LOADS: [Op; 5] = [Op::Lb, Op::Lh, Op::Lw, Op::Lbu, Op::Lhu];
const STORES: [Op; 3] = [Op::Sb, Op::Sh, Op::Sw];
const BRANCHES: [Op; 6] = [Op::Beq, Op::Bne, Op::Blt, Op::Bge, Op::Bltu, Op::Bgeu];
const CSR_OPS: [Op; 6] = [Op::Csrrw, Op::Csrrs, Op::Csrrc, Op::Csrrwi, Op::Csrrsi, Op::Csrrci];
const PLAIN_CSRS: [u16; 8] = [
    addr::MSCRATCH,
    addr::MSTATUS,
    addr::MEPC,
    addr::MCAUSE,
    addr::MTVAL,
    addr::MISA,
    addr::MVENDORID,
    0x7C0,
];
const COUNTER_CSRS: [u16; 8] = [
    addr::MCYCLE,
    addr::MINSTRET,
    addr::MCYCLEH,
    addr::MINSTRETH,
    addr::CYCLE,
    addr::INSTRET,
    addr::CYCLEH,
    addr::INSTRETH,
];

pub struct Generator {
    rng: StdRng,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Generator {
            rng: StdRng::seed_from_u64(seed),
        }
    }

    /// Registers the body may write or read. Mostly a small set, so that
    /// dependencies between neighbours are common.
    fn reg(&mut self) -> u8 {
        if self.rng.random_bool(0.7) {
            self.rng.random_range(0..8)
        } else {
            self.rng.random_range(0..28)
        }
    }

    fn imm12(&mut self) -> i32 {
        self.rng.random_range(-2048..2048)
    }

    fn alu(&mut self) -> u32 {
        match self.rng.random_range(0..4) {
            0 => {
                let op = ALU_R[self.rng.random_range(0..ALU_R.len())];
                r(op, self.reg(), self.reg(), self.reg())
            }
            1 => {
                let op = ALU_I[self.rng.random_range(0..ALU_I.len())];
                i(op, self.reg(), self.reg(), self.imm12())
            }
            2 => {
                let op = SHIFT_I[self.rng.random_range(0..SHIFT_I.len())];
                i(op, self.reg(), self.reg(), self.rng.random_range(0..32))
            }
            _ => {
                let op = if self.rng.random_bool(0.5) { Op::Lui } else { Op::Auipc };
                u(op, self.reg(), self.rng.random_range(0..1 << 20))
            }
        }
    }

    fn mem_offset(&mut self, size: i32) -> i32 {
        let off = self.rng.random_range(0..1024 / size) * size;
        if size > 1 && self.rng.random_bool(0.04) {
            off + self.rng.random_range(1..size)
        } else {
            off
        }
    }

    fn load(&mut self) -> u32 {
        let op = LOADS[self.rng.random_range(0..LOADS.len())];
        let size = op.mem_width().unwrap() as i32;
        let off = self.mem_offset(size);
        i(op, self.reg(), DATA_REG, off)
    }

    fn store(&mut self) -> u32 {
        let op = STORES[self.rng.random_range(0..STORES.len())];
        let size = op.mem_width().unwrap() as i32;
        let off = self.mem_offset(size);
        s(op, self.reg(), DATA_REG, off)
    }

    fn csr_access(&mut self) -> u32 {
        let op = CSR_OPS[self.rng.random_range(0..CSR_OPS.len())];
        let operand = if op.format() == rvpipe::isa::Format::CsrImm {
            self.rng.random_range(0..32)
        } else {
            self.reg()
        };
        match self.rng.random_range(0..10) {
            0..=5 => csr(op, self.reg(), PLAIN_CSRS[self.rng.random_range(0..PLAIN_CSRS.len())], operand),
            6 => {
                // mtvec may be read, never changed.
                let op = [Op::Csrrs, Op::Csrrc, Op::Csrrsi, Op::Csrrci][self.rng.random_range(0..4)];
                csr(op, self.reg(), addr::MTVEC, 0)
            }
            _ => csr(op, SINK, COUNTER_CSRS[self.rng.random_range(0..COUNTER_CSRS.len())], operand),
        }
    }

    fn illegal(&mut self) -> u32 {
        loop {
            let w = match self.rng.random_range(0..3) {
                0 => 0,
                1 => 0x0ff0_000f, // fence
                _ => self.rng.random(),
            };
            if decode(w).is_err() {
                return w;
            }
        }
    }

    /// One straight-line instruction with no control transfer.
    fn simple(&mut self) -> u32 {
        match self.rng.random_range(0..20) {
            0..=9 => self.alu(),
            10..=12 => self.load(),
            13..=15 => self.store(),
            _ => self.csr_access(),
        }
    }

    fn counted_loop(&mut self) -> Vec<u32> {
        let count = self.rng.random_range(1..=6);
        let body_len = self.rng.random_range(1..=6);
        let mut words = vec![addi(LOOP_REG, 0, count)];
        for _ in 0..body_len {
            words.push(self.simple());
        }
        words.push(addi(LOOP_REG, LOOP_REG, -1));
        words.push(b(Op::Bne, LOOP_REG, 0, -4 * (body_len as i32 + 1)));
        words
    }

    fn device_access(&mut self) -> Vec<u32> {
        match self.rng.random_range(0..4) {
            0 => vec![u(Op::Lui, SCRATCH, super::UART >> 12), s(Op::Sw, self.reg(), SCRATCH, 0)],
            1 => vec![u(Op::Lui, SCRATCH, super::UART >> 12), i(Op::Lw, self.reg(), SCRATCH, 4)],
            2 => vec![u(Op::Lui, SCRATCH, 0x10001), s(Op::Sw, self.reg(), SCRATCH, 0)],
            _ => vec![u(Op::Lui, SCRATCH, 0x10001), i(Op::Lw, self.reg(), SCRATCH, 0)],
        }
    }

    fn mret_idiom() -> Vec<u32> {
        vec![
            u(Op::Auipc, SCRATCH, 0),
            addi(SCRATCH, SCRATCH, 16),
            csr(Op::Csrrw, 0, addr::MEPC, SCRATCH),
            MRET,
        ]
    }

    fn skip(&mut self) -> usize {
        self.rng.random_range(0..4)
    }

    fn bias(&mut self, choices: &[i32]) -> i32 {
        if self.rng.random_bool(0.05) {
            choices[self.rng.random_range(0..choices.len())]
        } else {
            0
        }
    }

    fn block(&mut self) -> Block {
        match self.rng.random_range(0..100) {
            0..=54 => Block::Words(vec![self.simple()]),
            55..=64 => Block::Branch {
                op: BRANCHES[self.rng.random_range(0..BRANCHES.len())],
                rs1: self.reg(),
                rs2: self.reg(),
                skip: self.skip(),
                bias: self.bias(&[2]),
            },
            65..=68 => Block::Jal {
                rd: self.reg(),
                skip: self.skip(),
                bias: self.bias(&[2]),
            },
            69..=72 => Block::Jalr {
                rd: self.reg(),
                skip: self.skip(),
                bias: self.bias(&[1, 2, 3]),
            },
            73..=78 => Block::Words(self.counted_loop()),
            79..=82 => Block::Words(self.device_access()),
            83..=84 => Block::Words(vec![ECALL]),
            85..=86 => Block::Words(vec![EBREAK]),
            87..=88 => Block::Words(vec![self.illegal()]),
            89..=91 => Block::Words(Self::mret_idiom()),
            92..=93 => Block::Patch {
                target: usize::MAX,
                word: self.alu(),
            },
            _ => Block::Words(vec![self.alu(), self.alu()]),
        }
    }

    pub fn program(&mut self) -> Program {
        let mut blocks = vec![Block::Words(vec![
            u(Op::Lui, DATA_REG, DATA >> 12),
            u(Op::Lui, SCRATCH, HANDLER >> 12),
            csr(Op::Csrrw, 0, addr::MTVEC, SCRATCH),
        ])];
        for reg in 1..8 {
            let [hi, lo] = li(reg, self.rng.random());
            blocks.push(Block::Words(vec![hi, lo]));
        }
        let budget = self.rng.random_range(16..MAX_LEN - 40);
        let mut len: usize = blocks.iter().map(Block::len).sum();
        loop {
            let blk = self.block();
            if len + blk.len() > budget {
                break;
            }
            len += blk.len();
            blocks.push(blk);
        }
        blocks.push(Block::Exit { rs: self.reg() });

        // Patch targets: single plain words anywhere in the program.
        let plain: Vec<usize> = blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| matches!(b, Block::Words(w) if w.len() == 1))
            .map(|(i, _)| i)
            .collect();
        for b in blocks.iter_mut() {
            if let Block::Patch { target, .. } = b {
                *target = if plain.is_empty() {
                    0
                } else {
                    plain[self.rng.random_range(0..plain.len())]
                };
            }
        }
        let code = layout(&blocks);
        assert!(code.len() <= MAX_LEN);
        Program {
            code,
            handler: skip_handler(),
        }
    }
}

fn layout(blocks: &[Block]) -> Vec<u32> {
    let mut starts = Vec::with_capacity(blocks.len());
    let mut pc = 0u32;
    for b in blocks {
        starts.push(pc);
        pc += 4 * b.len() as u32;
    }
    let last = blocks.len() - 1;
    let target_of = |i: usize, skip: usize| starts[(i + 1 + skip).min(last)] as i32;
    let mut code = Vec::new();
    for (idx, blk) in blocks.iter().enumerate() {
        let here = starts[idx] as i32;
        match blk {
            Block::Words(w) => code.extend(w),
            Block::Branch { op, rs1, rs2, skip, bias } => {
                code.push(b(*op, *rs1, *rs2, target_of(idx, *skip) - here + bias))
            }
            Block::Jal { rd, skip, bias } => code.push(jal(*rd, target_of(idx, *skip) - here + bias)),
            Block::Jalr { rd, skip, bias } => {
                code.push(u(Op::Auipc, SCRATCH, 0));
                code.push(i(Op::Jalr, *rd, SCRATCH, target_of(idx, *skip) - here + bias));
            }
            Block::Patch { target, word } => {
                let [hi, lo] = li(SCRATCH, *word);
                code.extend([hi, lo, s(Op::Sw, SCRATCH, 0, starts[*target] as i32)]);
            }
            Block::Exit { rs } => code.extend(exit_with(*rs, SCRATCH)),
        }
    }
    code.push(jal(0, 0));
    code
}
