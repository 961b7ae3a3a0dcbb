//! Hazard unit: operand forwarding into EX and the load-use interlock.

use super::latches::{ExMem, IdEx, MemWb};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ForwardSource {
    #[default]
    RegisterFile,
    FromExMem,
    FromMemWb,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ForwardSelect {
    pub src_a: ForwardSource,
    pub src_b: ForwardSource,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HazardSignals {
    pub fwd: ForwardSelect,
    pub load_use_stall: bool,
}

/// Pick the youngest in-flight producer of `reg`. x0 never forwards.
fn select(reg: Option<u8>, ex_mem: &ExMem, mem_wb: &MemWb) -> ForwardSource {
    let Some(reg) = reg.filter(|&r| r != 0) else {
        return ForwardSource::RegisterFile;
    };
    if ex_mem.busy().and_then(|x| x.writes()) == Some(reg) {
        return ForwardSource::FromExMem;
    }
    if mem_wb.busy().and_then(|c| c.rd_write).map(|(rd, _)| rd) == Some(reg) {
        return ForwardSource::FromMemWb;
    }
    ForwardSource::RegisterFile
}

/// Resolve hazards for one cycle.
///
/// `id_sources` are the registers read by the instruction in ID; forwarding
/// is computed for the instruction in EX (`id_ex`). A stall is requested when
/// EX holds a load whose destination the ID instruction reads.
pub fn hazard_resolve(id_sources: [Option<u8>; 2], id_ex: &IdEx, ex_mem: &ExMem, mem_wb: &MemWb) -> HazardSignals {
    let mut signals = HazardSignals::default();
    if let Some(d) = id_ex.busy() {
        if let Some(instr) = d.instr {
            signals.fwd = ForwardSelect {
                src_a: select(instr.src1(), ex_mem, mem_wb),
                src_b: select(instr.src2(), ex_mem, mem_wb),
            };
            if instr.op.is_load() {
                if let Some(rd) = instr.dest().filter(|&rd| rd != 0) {
                    signals.load_use_stall = id_sources.contains(&Some(rd));
                }
            }
        }
    }
    signals
}
