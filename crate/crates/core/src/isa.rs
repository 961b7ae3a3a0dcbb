//! Instruction set: the 37 base RV32I operations, the six Zicsr operations,
//! and the three trap-related system instructions (ECALL, EBREAK, MRET).
//!
//! Decoding produces a canonical [`Instr`]: every operand field that does not
//! apply to the operation is zero, so two decodes of equivalent encodings
//! compare equal structurally. Immediates are sign-extended once here and
//! never re-extracted downstream.

use std::fmt;

use thiserror::Error;

/// Every operation the cores execute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Lui,
    Auipc,
    Jal,
    Jalr,
    Beq,
    Bne,
    Blt,
    Bge,
    Bltu,
    Bgeu,
    Lb,
    Lh,
    Lw,
    Lbu,
    Lhu,
    Sb,
    Sh,
    Sw,
    Addi,
    Slti,
    Sltiu,
    Xori,
    Ori,
    Andi,
    Slli,
    Srli,
    Srai,
    Add,
    Sub,
    Sll,
    Slt,
    Sltu,
    Xor,
    Srl,
    Sra,
    Or,
    And,
    Csrrw,
    Csrrs,
    Csrrc,
    Csrrwi,
    Csrrsi,
    Csrrci,
    Ecall,
    Ebreak,
    Mret,
}

/// Operand shape of an operation; drives canonical form, encoding and text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Upper,
    Jump,
    JumpReg,
    Branch,
    Load,
    Store,
    AluImm,
    Shift,
    AluReg,
    CsrReg,
    CsrImm,
    System,
}

impl Op {
    pub const ALL: [Op; 46] = [
        Op::Lui,
        Op::Auipc,
        Op::Jal,
        Op::Jalr,
        Op::Beq,
        Op::Bne,
        Op::Blt,
        Op::Bge,
        Op::Bltu,
        Op::Bgeu,
        Op::Lb,
        Op::Lh,
        Op::Lw,
        Op::Lbu,
        Op::Lhu,
        Op::Sb,
        Op::Sh,
        Op::Sw,
        Op::Addi,
        Op::Slti,
        Op::Sltiu,
        Op::Xori,
        Op::Ori,
        Op::Andi,
        Op::Slli,
        Op::Srli,
        Op::Srai,
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
        Op::Csrrw,
        Op::Csrrs,
        Op::Csrrc,
        Op::Csrrwi,
        Op::Csrrsi,
        Op::Csrrci,
        Op::Ecall,
        Op::Ebreak,
        Op::Mret,
    ];

    pub fn format(self) -> Format {
        use Op::*;
        match self {
            Lui | Auipc => Format::Upper,
            Jal => Format::Jump,
            Jalr => Format::JumpReg,
            Beq | Bne | Blt | Bge | Bltu | Bgeu => Format::Branch,
            Lb | Lh | Lw | Lbu | Lhu => Format::Load,
            Sb | Sh | Sw => Format::Store,
            Addi | Slti | Sltiu | Xori | Ori | Andi => Format::AluImm,
            Slli | Srli | Srai => Format::Shift,
            Add | Sub | Sll | Slt | Sltu | Xor | Srl | Sra | Or | And => Format::AluReg,
            Csrrw | Csrrs | Csrrc => Format::CsrReg,
            Csrrwi | Csrrsi | Csrrci => Format::CsrImm,
            Ecall | Ebreak | Mret => Format::System,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        use Op::*;
        match self {
            Lui => "lui",
            Auipc => "auipc",
            Jal => "jal",
            Jalr => "jalr",
            Beq => "beq",
            Bne => "bne",
            Blt => "blt",
            Bge => "bge",
            Bltu => "bltu",
            Bgeu => "bgeu",
            Lb => "lb",
            Lh => "lh",
            Lw => "lw",
            Lbu => "lbu",
            Lhu => "lhu",
            Sb => "sb",
            Sh => "sh",
            Sw => "sw",
            Addi => "addi",
            Slti => "slti",
            Sltiu => "sltiu",
            Xori => "xori",
            Ori => "ori",
            Andi => "andi",
            Slli => "slli",
            Srli => "srli",
            Srai => "srai",
            Add => "add",
            Sub => "sub",
            Sll => "sll",
            Slt => "slt",
            Sltu => "sltu",
            Xor => "xor",
            Srl => "srl",
            Sra => "sra",
            Or => "or",
            And => "and",
            Csrrw => "csrrw",
            Csrrs => "csrrs",
            Csrrc => "csrrc",
            Csrrwi => "csrrwi",
            Csrrsi => "csrrsi",
            Csrrci => "csrrci",
            Ecall => "ecall",
            Ebreak => "ebreak",
            Mret => "mret",
        }
    }

    pub fn is_load(self) -> bool {
        self.format() == Format::Load
    }

    pub fn is_store(self) -> bool {
        self.format() == Format::Store
    }

    pub fn is_branch(self) -> bool {
        self.format() == Format::Branch
    }

    pub fn is_csr(self) -> bool {
        matches!(self.format(), Format::CsrReg | Format::CsrImm)
    }

    /// Operations that may redirect the program counter when they execute.
    pub fn is_control_transfer(self) -> bool {
        matches!(self.format(), Format::Branch | Format::Jump | Format::JumpReg) || self == Op::Mret
    }

    /// Access width in bytes for loads and stores.
    pub fn mem_width(self) -> Option<u32> {
        use Op::*;
        match self {
            Lb | Lbu | Sb => Some(1),
            Lh | Lhu | Sh => Some(2),
            Lw | Sw => Some(4),
            _ => None,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// A fully decoded instruction in canonical form.
///
/// For the immediate CSR forms the 5-bit zero-extended `zimm` sits in `rs1`
/// and `imm` is zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Instr {
    pub op: Op,
    pub rd: u8,
    pub rs1: u8,
    pub rs2: u8,
    pub imm: i32,
    pub csr: u16,
}

impl Instr {
    /// The canonical no-op, `addi x0, x0, 0`.
    pub const NOP: Instr = Instr {
        op: Op::Addi,
        rd: 0,
        rs1: 0,
        rs2: 0,
        imm: 0,
        csr: 0,
    };

    pub fn new(op: Op) -> Self {
        Instr { op, ..Self::NOP }
    }

    pub fn with_rd(mut self, rd: u8) -> Self {
        self.rd = rd;
        self
    }

    pub fn with_rs1(mut self, rs1: u8) -> Self {
        self.rs1 = rs1;
        self
    }

    pub fn with_rs2(mut self, rs2: u8) -> Self {
        self.rs2 = rs2;
        self
    }

    pub fn with_imm(mut self, imm: i32) -> Self {
        self.imm = imm;
        self
    }

    pub fn with_csr(mut self, csr: u16) -> Self {
        self.csr = csr;
        self
    }

    /// Destination register, if the operation writes one.
    pub fn dest(&self) -> Option<u8> {
        match self.op.format() {
            Format::Branch | Format::Store | Format::System => None,
            _ => Some(self.rd),
        }
    }

    /// First source register, if the operation reads one from the register file.
    pub fn src1(&self) -> Option<u8> {
        match self.op.format() {
            Format::Upper | Format::Jump | Format::CsrImm | Format::System => None,
            _ => Some(self.rs1),
        }
    }

    pub fn src2(&self) -> Option<u8> {
        match self.op.format() {
            Format::Branch | Format::Store | Format::AluReg => Some(self.rs2),
            _ => None,
        }
    }

    /// Whether the instruction satisfies the canonical-form invariants.
    pub fn check_canonical(&self) -> Result<(), EncodeError> {
        let bad = |why: &'static str| Err(EncodeError::NonCanonical { instr: *self, why });
        if self.rd > 31 || self.rs1 > 31 || self.rs2 > 31 {
            return bad("register index out of range");
        }
        let fmt = self.op.format();
        let uses_rd = !matches!(fmt, Format::Branch | Format::Store | Format::System);
        let uses_rs1 = !matches!(fmt, Format::Upper | Format::Jump | Format::System);
        let uses_rs2 = matches!(fmt, Format::Branch | Format::Store | Format::AluReg);
        let uses_csr = matches!(fmt, Format::CsrReg | Format::CsrImm);
        if (!uses_rd && self.rd != 0) || (!uses_rs1 && self.rs1 != 0) || (!uses_rs2 && self.rs2 != 0) {
            return bad("unused register field is not zero");
        }
        if !uses_csr && self.csr != 0 {
            return bad("csr field set on a non-CSR operation");
        }
        if self.csr > 0xFFF {
            return bad("csr address wider than 12 bits");
        }
        let imm = self.imm;
        let ok = match fmt {
            Format::Upper => imm & 0xFFF == 0,
            Format::Jump => imm & 1 == 0 && (-(1 << 20)..(1 << 20)).contains(&imm),
            Format::Branch => imm & 1 == 0 && (-(1 << 12)..(1 << 12)).contains(&imm),
            Format::JumpReg | Format::Load | Format::Store | Format::AluImm => (-2048..2048).contains(&imm),
            Format::Shift => (0..32).contains(&imm),
            Format::AluReg | Format::CsrReg | Format::CsrImm | Format::System => imm == 0,
        };
        if !ok {
            return bad("immediate not representable");
        }
        Ok(())
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&disassemble(self))
    }
}

/// A word that is not one of the supported encodings. This is a value the
/// cores turn into an illegal-instruction trap, not a simulator failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("illegal instruction encoding {0:#010x}")]
pub struct IllegalEncoding(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("cannot encode {instr:?}: {why}")]
    NonCanonical { instr: Instr, why: &'static str },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DecodeOptions {
    /// Decode FENCE as the canonical no-op instead of rejecting it.
    pub fence_nop: bool,
}

const OPC_LUI: u32 = 0b0110111;
const OPC_AUIPC: u32 = 0b0010111;
const OPC_JAL: u32 = 0b1101111;
const OPC_JALR: u32 = 0b1100111;
const OPC_BRANCH: u32 = 0b1100011;
const OPC_LOAD: u32 = 0b0000011;
const OPC_STORE: u32 = 0b0100011;
const OPC_OP_IMM: u32 = 0b0010011;
const OPC_OP: u32 = 0b0110011;
const OPC_MISC_MEM: u32 = 0b0001111;
const OPC_SYSTEM: u32 = 0b1110011;

const WORD_ECALL: u32 = 0x0000_0073;
const WORD_EBREAK: u32 = 0x0010_0073;
const WORD_MRET: u32 = 0x3020_0073;

#[inline]
fn bits(word: u32, hi: u32, lo: u32) -> u32 {
    (word >> lo) & ((1u32 << (hi - lo + 1)) - 1)
}

#[inline]
fn sext(value: u32, width: u32) -> i32 {
    let shift = 32 - width;
    ((value << shift) as i32) >> shift
}

fn imm_i(w: u32) -> i32 {
    (w as i32) >> 20
}

fn imm_s(w: u32) -> i32 {
    sext((bits(w, 31, 25) << 5) | bits(w, 11, 7), 12)
}

fn imm_b(w: u32) -> i32 {
    let v = (bits(w, 31, 31) << 12) | (bits(w, 7, 7) << 11) | (bits(w, 30, 25) << 5) | (bits(w, 11, 8) << 1);
    sext(v, 13)
}

fn imm_j(w: u32) -> i32 {
    let v = (bits(w, 31, 31) << 20) | (bits(w, 19, 12) << 12) | (bits(w, 20, 20) << 11) | (bits(w, 30, 21) << 1);
    sext(v, 21)
}

/// Decode with default options (FENCE is illegal).
pub fn decode(word: u32) -> Result<Instr, IllegalEncoding> {
    decode_with(word, DecodeOptions::default())
}

pub fn decode_with(word: u32, opts: DecodeOptions) -> Result<Instr, IllegalEncoding> {
    let illegal = Err(IllegalEncoding(word));
    let rd = bits(word, 11, 7) as u8;
    let rs1 = bits(word, 19, 15) as u8;
    let rs2 = bits(word, 24, 20) as u8;
    let funct3 = bits(word, 14, 12);
    let funct7 = bits(word, 31, 25);

    let instr = match bits(word, 6, 0) {
        OPC_LUI => Instr::new(Op::Lui).with_rd(rd).with_imm((word & 0xFFFF_F000) as i32),
        OPC_AUIPC => Instr::new(Op::Auipc).with_rd(rd).with_imm((word & 0xFFFF_F000) as i32),
        OPC_JAL => Instr::new(Op::Jal).with_rd(rd).with_imm(imm_j(word)),
        OPC_JALR if funct3 == 0 => Instr::new(Op::Jalr).with_rd(rd).with_rs1(rs1).with_imm(imm_i(word)),
        OPC_BRANCH => {
            let op = match funct3 {
                0b000 => Op::Beq,
                0b001 => Op::Bne,
                0b100 => Op::Blt,
                0b101 => Op::Bge,
                0b110 => Op::Bltu,
                0b111 => Op::Bgeu,
                _ => return illegal,
            };
            Instr::new(op).with_rs1(rs1).with_rs2(rs2).with_imm(imm_b(word))
        }
        OPC_LOAD => {
            let op = match funct3 {
                0b000 => Op::Lb,
                0b001 => Op::Lh,
                0b010 => Op::Lw,
                0b100 => Op::Lbu,
                0b101 => Op::Lhu,
                _ => return illegal,
            };
            Instr::new(op).with_rd(rd).with_rs1(rs1).with_imm(imm_i(word))
        }
        OPC_STORE => {
            let op = match funct3 {
                0b000 => Op::Sb,
                0b001 => Op::Sh,
                0b010 => Op::Sw,
                _ => return illegal,
            };
            Instr::new(op).with_rs1(rs1).with_rs2(rs2).with_imm(imm_s(word))
        }
        OPC_OP_IMM => {
            let base = Instr::NOP.with_rd(rd).with_rs1(rs1);
            match funct3 {
                0b000 => Instr { op: Op::Addi, ..base }.with_imm(imm_i(word)),
                0b010 => Instr { op: Op::Slti, ..base }.with_imm(imm_i(word)),
                0b011 => Instr { op: Op::Sltiu, ..base }.with_imm(imm_i(word)),
                0b100 => Instr { op: Op::Xori, ..base }.with_imm(imm_i(word)),
                0b110 => Instr { op: Op::Ori, ..base }.with_imm(imm_i(word)),
                0b111 => Instr { op: Op::Andi, ..base }.with_imm(imm_i(word)),
                0b001 if funct7 == 0 => Instr { op: Op::Slli, ..base }.with_imm(rs2 as i32),
                0b101 if funct7 == 0 => Instr { op: Op::Srli, ..base }.with_imm(rs2 as i32),
                0b101 if funct7 == 0b0100000 => Instr { op: Op::Srai, ..base }.with_imm(rs2 as i32),
                _ => return illegal,
            }
        }
        OPC_OP => {
            let op = match (funct7, funct3) {
                (0, 0b000) => Op::Add,
                (0b0100000, 0b000) => Op::Sub,
                (0, 0b001) => Op::Sll,
                (0, 0b010) => Op::Slt,
                (0, 0b011) => Op::Sltu,
                (0, 0b100) => Op::Xor,
                (0, 0b101) => Op::Srl,
                (0b0100000, 0b101) => Op::Sra,
                (0, 0b110) => Op::Or,
                (0, 0b111) => Op::And,
                _ => return illegal,
            };
            Instr::new(op).with_rd(rd).with_rs1(rs1).with_rs2(rs2)
        }
        OPC_SYSTEM => {
            let csr = bits(word, 31, 20) as u16;
            match funct3 {
                0b000 => match word {
                    WORD_ECALL => Instr::new(Op::Ecall),
                    WORD_EBREAK => Instr::new(Op::Ebreak),
                    WORD_MRET => Instr::new(Op::Mret),
                    _ => return illegal,
                },
                0b001 => Instr::new(Op::Csrrw).with_rd(rd).with_rs1(rs1).with_csr(csr),
                0b010 => Instr::new(Op::Csrrs).with_rd(rd).with_rs1(rs1).with_csr(csr),
                0b011 => Instr::new(Op::Csrrc).with_rd(rd).with_rs1(rs1).with_csr(csr),
                0b101 => Instr::new(Op::Csrrwi).with_rd(rd).with_rs1(rs1).with_csr(csr),
                0b110 => Instr::new(Op::Csrrsi).with_rd(rd).with_rs1(rs1).with_csr(csr),
                0b111 => Instr::new(Op::Csrrci).with_rd(rd).with_rs1(rs1).with_csr(csr),
                _ => return illegal,
            }
        }
        OPC_MISC_MEM if opts.fence_nop && funct3 == 0 => Instr::NOP,
        _ => return illegal,
    };
    Ok(instr)
}

fn r_type(opcode: u32, funct3: u32, funct7: u32, i: &Instr) -> u32 {
    (funct7 << 25) | ((i.rs2 as u32) << 20) | ((i.rs1 as u32) << 15) | (funct3 << 12) | ((i.rd as u32) << 7) | opcode
}

fn i_type(opcode: u32, funct3: u32, imm: u32, i: &Instr) -> u32 {
    ((imm & 0xFFF) << 20) | ((i.rs1 as u32) << 15) | (funct3 << 12) | ((i.rd as u32) << 7) | opcode
}

/// Encode a canonical instruction.
pub fn encode(instr: &Instr) -> Result<u32, EncodeError> {
    instr.check_canonical()?;
    let i = instr;
    let imm = i.imm as u32;
    let word = match i.op {
        Op::Lui => imm | ((i.rd as u32) << 7) | OPC_LUI,
        Op::Auipc => imm | ((i.rd as u32) << 7) | OPC_AUIPC,
        Op::Jal => {
            ((imm >> 20 & 1) << 31)
                | ((imm >> 1 & 0x3FF) << 21)
                | ((imm >> 11 & 1) << 20)
                | ((imm >> 12 & 0xFF) << 12)
                | ((i.rd as u32) << 7)
                | OPC_JAL
        }
        Op::Jalr => i_type(OPC_JALR, 0, imm, i),
        Op::Beq | Op::Bne | Op::Blt | Op::Bge | Op::Bltu | Op::Bgeu => {
            let funct3 = match i.op {
                Op::Beq => 0b000,
                Op::Bne => 0b001,
                Op::Blt => 0b100,
                Op::Bge => 0b101,
                Op::Bltu => 0b110,
                _ => 0b111,
            };
            ((imm >> 12 & 1) << 31)
                | ((imm >> 5 & 0x3F) << 25)
                | ((i.rs2 as u32) << 20)
                | ((i.rs1 as u32) << 15)
                | (funct3 << 12)
                | ((imm >> 1 & 0xF) << 8)
                | ((imm >> 11 & 1) << 7)
                | OPC_BRANCH
        }
        Op::Lb => i_type(OPC_LOAD, 0b000, imm, i),
        Op::Lh => i_type(OPC_LOAD, 0b001, imm, i),
        Op::Lw => i_type(OPC_LOAD, 0b010, imm, i),
        Op::Lbu => i_type(OPC_LOAD, 0b100, imm, i),
        Op::Lhu => i_type(OPC_LOAD, 0b101, imm, i),
        Op::Sb | Op::Sh | Op::Sw => {
            let funct3 = match i.op {
                Op::Sb => 0b000,
                Op::Sh => 0b001,
                _ => 0b010,
            };
            ((imm >> 5 & 0x7F) << 25)
                | ((i.rs2 as u32) << 20)
                | ((i.rs1 as u32) << 15)
                | (funct3 << 12)
                | ((imm & 0x1F) << 7)
                | OPC_STORE
        }
        Op::Addi => i_type(OPC_OP_IMM, 0b000, imm, i),
        Op::Slti => i_type(OPC_OP_IMM, 0b010, imm, i),
        Op::Sltiu => i_type(OPC_OP_IMM, 0b011, imm, i),
        Op::Xori => i_type(OPC_OP_IMM, 0b100, imm, i),
        Op::Ori => i_type(OPC_OP_IMM, 0b110, imm, i),
        Op::Andi => i_type(OPC_OP_IMM, 0b111, imm, i),
        Op::Slli => i_type(OPC_OP_IMM, 0b001, imm, i),
        Op::Srli => i_type(OPC_OP_IMM, 0b101, imm, i),
        Op::Srai => i_type(OPC_OP_IMM, 0b101, imm | 0x400, i),
        Op::Add => r_type(OPC_OP, 0b000, 0, i),
        Op::Sub => r_type(OPC_OP, 0b000, 0b0100000, i),
        Op::Sll => r_type(OPC_OP, 0b001, 0, i),
        Op::Slt => r_type(OPC_OP, 0b010, 0, i),
        Op::Sltu => r_type(OPC_OP, 0b011, 0, i),
        Op::Xor => r_type(OPC_OP, 0b100, 0, i),
        Op::Srl => r_type(OPC_OP, 0b101, 0, i),
        Op::Sra => r_type(OPC_OP, 0b101, 0b0100000, i),
        Op::Or => r_type(OPC_OP, 0b110, 0, i),
        Op::And => r_type(OPC_OP, 0b111, 0, i),
        Op::Csrrw => i_type(OPC_SYSTEM, 0b001, i.csr as u32, i),
        Op::Csrrs => i_type(OPC_SYSTEM, 0b010, i.csr as u32, i),
        Op::Csrrc => i_type(OPC_SYSTEM, 0b011, i.csr as u32, i),
        Op::Csrrwi => i_type(OPC_SYSTEM, 0b101, i.csr as u32, i),
        Op::Csrrsi => i_type(OPC_SYSTEM, 0b110, i.csr as u32, i),
        Op::Csrrci => i_type(OPC_SYSTEM, 0b111, i.csr as u32, i),
        Op::Ecall => WORD_ECALL,
        Op::Ebreak => WORD_EBREAK,
        Op::Mret => WORD_MRET,
    };
    Ok(word)
}

/// Standard name of a CSR address, for the ones the cores know about.
pub fn csr_name(addr: u16) -> Option<&'static str> {
    use crate::csr::addr::*;
    Some(match addr {
        MSTATUS => "mstatus",
        MISA => "misa",
        MTVEC => "mtvec",
        MSCRATCH => "mscratch",
        MEPC => "mepc",
        MCAUSE => "mcause",
        MTVAL => "mtval",
        MCYCLE => "mcycle",
        MINSTRET => "minstret",
        MCYCLEH => "mcycleh",
        MINSTRETH => "minstreth",
        CYCLE => "cycle",
        INSTRET => "instret",
        CYCLEH => "cycleh",
        INSTRETH => "instreth",
        MVENDORID => "mvendorid",
        MARCHID => "marchid",
        MIMPID => "mimpid",
        MHARTID => "mhartid",
        _ => return None,
    })
}

/// Render an instruction as assembler text with numeric register names,
/// e.g. `addi x1, x0, 5` or `jalr x0, 0(x1)`.
pub fn disassemble(instr: &Instr) -> String {
    let m = instr.op.mnemonic();
    let Instr { rd, rs1, rs2, imm, csr, .. } = *instr;
    let csr_text = || csr_name(csr).map(str::to_owned).unwrap_or_else(|| format!("{csr:#x}"));
    match instr.op.format() {
        Format::Upper => format!("{m} x{rd}, {:#x}", (imm as u32) >> 12),
        Format::Jump => format!("{m} x{rd}, {imm}"),
        Format::JumpReg | Format::Load => format!("{m} x{rd}, {imm}(x{rs1})"),
        Format::Branch => format!("{m} x{rs1}, x{rs2}, {imm}"),
        Format::Store => format!("{m} x{rs2}, {imm}(x{rs1})"),
        Format::AluImm | Format::Shift => format!("{m} x{rd}, x{rs1}, {imm}"),
        Format::AluReg => format!("{m} x{rd}, x{rs1}, x{rs2}"),
        Format::CsrReg => format!("{m} x{rd}, {}, x{rs1}", csr_text()),
        Format::CsrImm => format!("{m} x{rd}, {}, {rs1}", csr_text()),
        Format::System => m.to_owned(),
    }
}

/// Text for a raw word: the disassembly, or `illegal` when it does not decode.
pub fn disassemble_word(word: u32, opts: DecodeOptions) -> String {
    match decode_with(word, opts) {
        Ok(i) => disassemble(&i),
        Err(_) => "illegal".to_owned(),
    }
}
