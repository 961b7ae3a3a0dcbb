//! Retirement trace: one line per retired instruction or trap entry.
//!
//! `cycle pc raw disasm [rd=v] [mem ld|st addr=v] [trap cause=N]`

use std::fmt::Write as _;

use crate::event::{MemDir, RetireEvent};
use crate::isa::{disassemble_word, DecodeOptions};

pub fn format_event(ev: &RetireEvent, opts: DecodeOptions) -> String {
    let mut line = format!(
        "{} {:08x} {:08x} {}",
        ev.cycle,
        ev.pc,
        ev.raw,
        disassemble_word(ev.raw, opts)
    );
    if let Some((_, v)) = ev.rd_write {
        let _ = write!(line, " rd={v:08x}");
    }
    if let Some(m) = ev.mem {
        let dir = match m.dir {
            MemDir::Load => "ld",
            MemDir::Store => "st",
        };
        let _ = write!(line, " mem {dir} {:08x}={:08x}", m.addr, m.value);
    }
    if let Some(t) = ev.trap {
        let _ = write!(line, " trap cause={}", t.cause.code());
    }
    line
}
