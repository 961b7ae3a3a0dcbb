//! Machine-mode CSR file, Zicsr semantics, exception detection, trap entry
//! and MRET.

use std::fmt;

use thiserror::Error;

use crate::isa::{IllegalEncoding, Instr, Op};

/// CSR addresses implemented by the cores.
pub mod addr {
    pub const MSTATUS: u16 = 0x300;
    pub const MISA: u16 = 0x301;
    pub const MTVEC: u16 = 0x305;
    pub const MSCRATCH: u16 = 0x340;
    pub const MEPC: u16 = 0x341;
    pub const MCAUSE: u16 = 0x342;
    pub const MTVAL: u16 = 0x343;
    pub const MCYCLE: u16 = 0xB00;
    pub const MINSTRET: u16 = 0xB02;
    pub const MCYCLEH: u16 = 0xB80;
    pub const MINSTRETH: u16 = 0xB82;
    pub const CYCLE: u16 = 0xC00;
    pub const INSTRET: u16 = 0xC02;
    pub const CYCLEH: u16 = 0xC80;
    pub const INSTRETH: u16 = 0xC82;
    pub const MVENDORID: u16 = 0xF11;
    pub const MARCHID: u16 = 0xF12;
    pub const MIMPID: u16 = 0xF13;
    pub const MHARTID: u16 = 0xF14;
}

pub const MSTATUS_MIE: u32 = 1 << 3;
pub const MSTATUS_MPIE: u32 = 1 << 7;
pub const MSTATUS_MPP: u32 = 0b11 << 11;

/// MXL = 1 (32-bit), extension bit I.
pub const MISA_RV32I: u32 = (1 << 30) | (1 << 8);

/// Synchronous exception causes. The interrupt bit of mcause is never set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TrapCause {
    InstructionAddressMisaligned,
    InstructionAccessFault,
    IllegalInstruction,
    Breakpoint,
    LoadAddressMisaligned,
    LoadAccessFault,
    StoreAddressMisaligned,
    StoreAccessFault,
    EcallFromM,
}

impl TrapCause {
    pub fn code(self) -> u32 {
        match self {
            TrapCause::InstructionAddressMisaligned => 0,
            TrapCause::InstructionAccessFault => 1,
            TrapCause::IllegalInstruction => 2,
            TrapCause::Breakpoint => 3,
            TrapCause::LoadAddressMisaligned => 4,
            TrapCause::LoadAccessFault => 5,
            TrapCause::StoreAddressMisaligned => 6,
            TrapCause::StoreAccessFault => 7,
            TrapCause::EcallFromM => 11,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Some(match code {
            0 => TrapCause::InstructionAddressMisaligned,
            1 => TrapCause::InstructionAccessFault,
            2 => TrapCause::IllegalInstruction,
            3 => TrapCause::Breakpoint,
            4 => TrapCause::LoadAddressMisaligned,
            5 => TrapCause::LoadAccessFault,
            6 => TrapCause::StoreAddressMisaligned,
            7 => TrapCause::StoreAccessFault,
            11 => TrapCause::EcallFromM,
            _ => return None,
        })
    }
}

impl fmt::Display for TrapCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// An exception together with the value destined for mtval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Exception {
    pub cause: TrapCause,
    pub tval: u32,
}

impl Exception {
    pub fn new(cause: TrapCause, tval: u32) -> Self {
        Exception { cause, tval }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum IllegalCsrAccess {
    #[error("csr {0:#05x} is not implemented")]
    Unimplemented(u16),
    #[error("csr {0:#05x} is read-only")]
    ReadOnly(u16),
}

/// The Zicsr operation kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsrOp {
    ReadWrite,
    ReadSet,
    ReadClear,
}

impl CsrOp {
    pub fn of(op: Op) -> Option<CsrOp> {
        match op {
            Op::Csrrw | Op::Csrrwi => Some(CsrOp::ReadWrite),
            Op::Csrrs | Op::Csrrsi => Some(CsrOp::ReadSet),
            Op::Csrrc | Op::Csrrci => Some(CsrOp::ReadClear),
            _ => None,
        }
    }
}

/// Addresses whose reads return timing-dependent counter values.
pub fn is_cycle_counter(csr: u16) -> bool {
    use addr::*;
    matches!(csr, MCYCLE | MCYCLEH | CYCLE | CYCLEH)
}

pub fn is_instret_counter(csr: u16) -> bool {
    use addr::*;
    matches!(csr, MINSTRET | MINSTRETH | INSTRET | INSTRETH)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CsrFile {
    /// Only MIE and MPIE are stored; MPP always reads as machine mode.
    mstatus: u32,
    mtvec: u32,
    mepc: u32,
    pub mcause: u32,
    pub mtval: u32,
    pub mscratch: u32,
    pub mcycle: u64,
    pub minstret: u64,
    mcycle_written: bool,
    minstret_written: bool,
}

impl CsrFile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mstatus(&self) -> u32 {
        self.mstatus | MSTATUS_MPP
    }

    pub fn set_mstatus(&mut self, value: u32) {
        self.mstatus = value & (MSTATUS_MIE | MSTATUS_MPIE);
    }

    pub fn mie(&self) -> bool {
        self.mstatus & MSTATUS_MIE != 0
    }

    pub fn mpie(&self) -> bool {
        self.mstatus & MSTATUS_MPIE != 0
    }

    pub fn mtvec(&self) -> u32 {
        self.mtvec
    }

    /// Direct mode only: the MODE bits are forced to zero.
    pub fn set_mtvec(&mut self, value: u32) {
        self.mtvec = value & !0b11;
    }

    pub fn mepc(&self) -> u32 {
        self.mepc & !0b11
    }

    pub fn set_mepc(&mut self, value: u32) {
        self.mepc = value;
    }

    /// Read a CSR without side effects.
    pub fn read(&self, csr: u16) -> Result<u32, IllegalCsrAccess> {
        use addr::*;
        Ok(match csr {
            MSTATUS => self.mstatus(),
            MISA => MISA_RV32I,
            MTVEC => self.mtvec,
            MSCRATCH => self.mscratch,
            MEPC => self.mepc(),
            MCAUSE => self.mcause,
            MTVAL => self.mtval,
            MCYCLE | CYCLE => self.mcycle as u32,
            MCYCLEH | CYCLEH => (self.mcycle >> 32) as u32,
            MINSTRET | INSTRET => self.minstret as u32,
            MINSTRETH | INSTRETH => (self.minstret >> 32) as u32,
            MVENDORID | MARCHID | MIMPID | MHARTID => 0,
            _ => return Err(IllegalCsrAccess::Unimplemented(csr)),
        })
    }

    fn write(&mut self, csr: u16, value: u32) -> Result<(), IllegalCsrAccess> {
        use addr::*;
        // Addresses 0xC00-0xFFF are read-only by encoding.
        if csr >> 10 == 0b11 {
            self.read(csr)?;
            return Err(IllegalCsrAccess::ReadOnly(csr));
        }
        match csr {
            MSTATUS => self.set_mstatus(value),
            MISA => {} // WARL: writes ignored
            MTVEC => self.set_mtvec(value),
            MSCRATCH => self.mscratch = value,
            MEPC => self.mepc = value,
            MCAUSE => self.mcause = value,
            MTVAL => self.mtval = value,
            MCYCLE => {
                self.mcycle = (self.mcycle & !0xFFFF_FFFF) | value as u64;
                self.mcycle_written = true;
            }
            MCYCLEH => {
                self.mcycle = (self.mcycle & 0xFFFF_FFFF) | ((value as u64) << 32);
                self.mcycle_written = true;
            }
            MINSTRET => {
                self.minstret = (self.minstret & !0xFFFF_FFFF) | value as u64;
                self.minstret_written = true;
            }
            MINSTRETH => {
                self.minstret = (self.minstret & 0xFFFF_FFFF) | ((value as u64) << 32);
                self.minstret_written = true;
            }
            _ => return Err(IllegalCsrAccess::Unimplemented(csr)),
        }
        Ok(())
    }

    /// Execute a Zicsr operation and return the CSR's previous value.
    ///
    /// Set/clear with a zero source (x0 or zimm = 0) performs no write, so
    /// read-only CSRs can be read that way.
    pub fn csr_op(
        &mut self,
        kind: CsrOp,
        csr: u16,
        operand: u32,
        rd_is_x0: bool,
        operand_is_zero_register: bool,
    ) -> Result<u32, IllegalCsrAccess> {
        // There are no read side effects, so rd = x0 on a plain write is
        // observationally the same as a read followed by the write.
        let _ = rd_is_x0;
        let old = self.read(csr)?;
        let new = match kind {
            CsrOp::ReadWrite => Some(operand),
            CsrOp::ReadSet if !operand_is_zero_register => Some(old | operand),
            CsrOp::ReadClear if !operand_is_zero_register => Some(old & !operand),
            _ => None,
        };
        if let Some(value) = new {
            self.write(csr, value)?;
        }
        Ok(old)
    }

    /// Enter a trap: record the cause and return the handler address.
    pub fn raise_trap(&mut self, cause: TrapCause, faulting_pc: u32, tval: u32) -> u32 {
        self.mepc = faulting_pc;
        self.mcause = cause.code();
        self.mtval = tval;
        let mie = self.mstatus & MSTATUS_MIE;
        self.mstatus &= !(MSTATUS_MIE | MSTATUS_MPIE);
        if mie != 0 {
            self.mstatus |= MSTATUS_MPIE;
        }
        self.mtvec
    }

    /// Return from a trap: restore MIE from MPIE, set MPIE, and return mepc.
    pub fn mret(&mut self) -> u32 {
        let mpie = self.mstatus & MSTATUS_MPIE;
        self.mstatus = MSTATUS_MPIE | if mpie != 0 { MSTATUS_MIE } else { 0 };
        self.mepc()
    }

    /// Whether mcycle / minstret were explicitly written since the last
    /// call; clears the flags. An explicit write replaces that cycle's
    /// increment.
    pub fn take_counter_writes(&mut self) -> (bool, bool) {
        let flags = (self.mcycle_written, self.minstret_written);
        self.mcycle_written = false;
        self.minstret_written = false;
        flags
    }

    /// Advance mcycle by one unless it was written this cycle.
    pub fn tick_mcycle(&mut self, written: bool) {
        if !written {
            self.mcycle = self.mcycle.wrapping_add(1);
        }
    }

    pub fn tick_minstret(&mut self) {
        self.minstret = self.minstret.wrapping_add(1);
    }
}

/// The highest-priority exception of an instruction, if any.
///
/// Priority: fetch misalignment, illegal instruction, ECALL/EBREAK, load
/// misalignment, store misalignment. `mem_addr` is the effective address of
/// a load or store.
pub fn detect_exception(
    decoded: Result<&Instr, IllegalEncoding>,
    mem_addr: Option<u32>,
    fetch_pc: u32,
) -> Option<Exception> {
    if fetch_pc & 0b11 != 0 {
        return Some(Exception::new(TrapCause::InstructionAddressMisaligned, fetch_pc));
    }
    let instr = match decoded {
        Ok(i) => i,
        Err(IllegalEncoding(word)) => return Some(Exception::new(TrapCause::IllegalInstruction, word)),
    };
    match instr.op {
        Op::Ecall => return Some(Exception::new(TrapCause::EcallFromM, 0)),
        Op::Ebreak => return Some(Exception::new(TrapCause::Breakpoint, 0)),
        _ => {}
    }
    if let (Some(addr), Some(width)) = (mem_addr, instr.op.mem_width()) {
        if addr % width != 0 {
            let cause = if instr.op.is_load() {
                TrapCause::LoadAddressMisaligned
            } else {
                TrapCause::StoreAddressMisaligned
            };
            return Some(Exception::new(cause, addr));
        }
    }
    None
}
