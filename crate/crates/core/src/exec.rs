//! Execution semantics shared by both cores: the ALU, branch comparison,
//! address generation and the CSR/MRET side of the system instructions.
//!
//! Both cores call [`execute`] with operand values they obtained in their own
//! way (register file read for the single-cycle core, forwarding for the
//! pipeline). Memory is not touched here; loads and stores come back as a
//! [`MemAccess`] for the caller to perform.

use crate::csr::{detect_exception, CsrFile, CsrOp, Exception, TrapCause};
use crate::isa::{Format, Instr, Op};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AluFn {
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
}

impl AluFn {
    /// The ALU function an ALU-class operation uses.
    pub fn of(op: Op) -> Option<AluFn> {
        use Op::*;
        Some(match op {
            Add | Addi => AluFn::Add,
            Sub => AluFn::Sub,
            Sll | Slli => AluFn::Sll,
            Slt | Slti => AluFn::Slt,
            Sltu | Sltiu => AluFn::Sltu,
            Xor | Xori => AluFn::Xor,
            Srl | Srli => AluFn::Srl,
            Sra | Srai => AluFn::Sra,
            Or | Ori => AluFn::Or,
            And | Andi => AluFn::And,
            _ => return None,
        })
    }
}

/// The ALU. Shifts use the low five bits of `b`.
pub fn exec_alu(f: AluFn, a: u32, b: u32) -> u32 {
    match f {
        AluFn::Add => a.wrapping_add(b),
        AluFn::Sub => a.wrapping_sub(b),
        AluFn::Sll => a << (b & 31),
        AluFn::Slt => ((a as i32) < (b as i32)) as u32,
        AluFn::Sltu => (a < b) as u32,
        AluFn::Xor => a ^ b,
        AluFn::Srl => a >> (b & 31),
        AluFn::Sra => ((a as i32) >> (b & 31)) as u32,
        AluFn::Or => a | b,
        AluFn::And => a & b,
    }
}

/// Whether a conditional branch is taken for the given operands.
pub fn branch_taken(op: Op, a: u32, b: u32) -> bool {
    match op {
        Op::Beq => a == b,
        Op::Bne => a != b,
        Op::Blt => (a as i32) < (b as i32),
        Op::Bge => (a as i32) >= (b as i32),
        Op::Bltu => a < b,
        Op::Bgeu => a >= b,
        _ => false,
    }
}

/// Sign- or zero-extend a value read from the bus for a load.
pub fn load_extend(op: Op, raw: u32) -> u32 {
    match op {
        Op::Lb => raw as u8 as i8 as i32 as u32,
        Op::Lh => raw as u16 as i16 as i32 as u32,
        Op::Lbu => raw & 0xFF,
        Op::Lhu => raw & 0xFFFF,
        _ => raw,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MemKind {
    Load,
    Store { value: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemAccess {
    pub addr: u32,
    pub size: u32,
    pub kind: MemKind,
}

/// Result of executing one instruction up to (not including) memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExecOutcome {
    /// Value for rd for everything except loads.
    pub result: Option<u32>,
    pub mem: Option<MemAccess>,
    /// Whether the instruction redirects control flow.
    pub taken: bool,
    pub next_pc: u32,
    pub exception: Option<Exception>,
}

impl ExecOutcome {
    fn fallthrough(pc: u32) -> Self {
        ExecOutcome {
            result: None,
            mem: None,
            taken: false,
            next_pc: pc.wrapping_add(4),
            exception: None,
        }
    }

    fn fault(pc: u32, e: Exception) -> Self {
        ExecOutcome {
            exception: Some(e),
            ..Self::fallthrough(pc)
        }
    }
}

/// Execute a decoded instruction. CSR operations and MRET update `csrs`;
/// nothing else has side effects.
pub fn execute(instr: &Instr, raw: u32, pc: u32, rs1: u32, rs2: u32, csrs: &mut CsrFile) -> ExecOutcome {
    let mut out = ExecOutcome::fallthrough(pc);
    let imm = instr.imm as u32;
    match instr.op.format() {
        Format::Upper => {
            out.result = Some(if instr.op == Op::Lui { imm } else { pc.wrapping_add(imm) });
        }
        Format::Jump | Format::JumpReg => {
            let target = if instr.op == Op::Jal {
                pc.wrapping_add(imm)
            } else {
                rs1.wrapping_add(imm) & !1
            };
            if target & 0b11 != 0 {
                return ExecOutcome::fault(pc, Exception::new(TrapCause::InstructionAddressMisaligned, target));
            }
            out.result = Some(pc.wrapping_add(4));
            out.taken = true;
            out.next_pc = target;
        }
        Format::Branch => {
            if branch_taken(instr.op, rs1, rs2) {
                let target = pc.wrapping_add(imm);
                if target & 0b11 != 0 {
                    return ExecOutcome::fault(pc, Exception::new(TrapCause::InstructionAddressMisaligned, target));
                }
                out.taken = true;
                out.next_pc = target;
            }
        }
        Format::Load | Format::Store => {
            let addr = rs1.wrapping_add(imm);
            if let Some(e) = detect_exception(Ok(instr), Some(addr), pc) {
                return ExecOutcome::fault(pc, e);
            }
            let size = instr.op.mem_width().unwrap_or(4);
            let kind = if instr.op.is_load() {
                MemKind::Load
            } else {
                MemKind::Store { value: rs2 }
            };
            out.mem = Some(MemAccess { addr, size, kind });
        }
        Format::AluImm | Format::Shift | Format::AluReg => {
            let f = AluFn::of(instr.op).expect("ALU-class operation");
            let b = if instr.op.format() == Format::AluReg { rs2 } else { imm };
            out.result = Some(exec_alu(f, rs1, b));
        }
        Format::CsrReg | Format::CsrImm => {
            let kind = CsrOp::of(instr.op).expect("CSR operation");
            let (operand, zero_source) = if instr.op.format() == Format::CsrImm {
                (instr.rs1 as u32, instr.rs1 == 0)
            } else {
                (rs1, instr.rs1 == 0)
            };
            match csrs.csr_op(kind, instr.csr, operand, instr.rd == 0, zero_source) {
                Ok(old) => out.result = Some(old),
                Err(_) => return ExecOutcome::fault(pc, Exception::new(TrapCause::IllegalInstruction, raw)),
            }
        }
        Format::System => {
            if let Some(e) = detect_exception(Ok(instr), None, pc) {
                return ExecOutcome::fault(pc, e);
            }
            // MRET
            out.taken = true;
            out.next_pc = csrs.mret();
        }
    }
    out
}
