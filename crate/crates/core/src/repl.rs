//! Step debugger. Commands are applied between clock cycles only.

use std::io::{self, BufRead, Write};

use crate::csr::addr;
use crate::event::Core;
use crate::runner::{Machine, StepStop};
use crate::trace::format_event;

pub const HELP: &str = "\
commands:
  s [n]         retire n instructions (default 1)
  c             run until a breakpoint or halt
  r             show registers
  x <addr> [n]  dump n memory words (default 1)
  csr           show the CSR file
  p             show pipeline stage occupancy
  b [pc]        set a breakpoint on pc, or list breakpoints
  pred          dump the branch predictor table
  q             quit
";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Quit,
}

pub struct Repl<W: Write> {
    machine: Machine,
    breakpoints: Vec<u32>,
    out: W,
    max_cycles: u64,
}

pub fn parse_number(s: &str) -> Option<u64> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

fn parse_u32(s: &str) -> Option<u32> {
    parse_number(s).and_then(|v| u32::try_from(v).ok())
}

impl<W: Write> Repl<W> {
    pub fn new(machine: Machine, out: W, max_cycles: u64) -> Self {
        Repl {
            machine,
            breakpoints: Vec::new(),
            out,
            max_cycles,
        }
    }

    pub fn machine(&self) -> &Machine {
        &self.machine
    }

    pub fn machine_mut(&mut self) -> &mut Machine {
        &mut self.machine
    }

    pub fn output(&self) -> &W {
        &self.out
    }

    pub fn into_parts(self) -> (Machine, W) {
        (self.machine, self.out)
    }

    /// Read commands until `q` or end of input.
    pub fn run<R: BufRead>(&mut self, input: R, prompt: bool) -> io::Result<()> {
        if prompt {
            write!(self.out, "(rvpipe) ")?;
            self.out.flush()?;
        }
        for line in input.lines() {
            if self.execute(&line?)? == Flow::Quit {
                break;
            }
            if prompt {
                write!(self.out, "(rvpipe) ")?;
                self.out.flush()?;
            }
        }
        Ok(())
    }

    pub fn execute(&mut self, line: &str) -> io::Result<Flow> {
        let words: Vec<&str> = line.split_whitespace().collect();
        let Some((&cmd, args)) = words.split_first() else {
            return Ok(Flow::Continue);
        };
        match (cmd, args) {
            ("s", []) => self.step(Some(1))?,
            ("s", [n]) => match parse_number(n) {
                Some(n) => self.step(Some(n))?,
                None => self.help()?,
            },
            ("c", []) => self.step(None)?,
            ("r", []) => self.show_regs()?,
            ("x", [a]) | ("x", [a, _]) => {
                let n = args.get(1).map_or(Some(1), |n| parse_number(n));
                match (parse_u32(a), n) {
                    (Some(a), Some(n)) => self.dump(a, n)?,
                    _ => self.help()?,
                }
            }
            ("csr", []) => self.show_csrs()?,
            ("p", []) => match self.machine.core.as_pipeline() {
                Some(p) => write!(self.out, "{}", p.render_stages())?,
                None => writeln!(self.out, "the golden core has no pipeline")?,
            },
            ("b", []) => {
                for bp in &self.breakpoints {
                    writeln!(self.out, "breakpoint {bp:08x}")?;
                }
            }
            ("b", [pc]) => match parse_u32(pc) {
                Some(pc) => {
                    if !self.breakpoints.contains(&pc) {
                        self.breakpoints.push(pc);
                    }
                    writeln!(self.out, "breakpoint {pc:08x}")?;
                }
                None => self.help()?,
            },
            ("pred", []) => match self.machine.core.as_pipeline() {
                Some(p) => writeln!(self.out, "{}", p.predictor())?,
                None => writeln!(self.out, "the golden core has no predictor")?,
            },
            ("q", []) => return Ok(Flow::Quit),
            _ => self.help()?,
        }
        Ok(Flow::Continue)
    }

    fn help(&mut self) -> io::Result<()> {
        write!(self.out, "{HELP}")
    }

    fn step(&mut self, n: Option<u64>) -> io::Result<()> {
        let result = self.machine.step(n, &self.breakpoints, self.max_cycles);
        let opts = self.machine.decode_options();
        if let Some(ev) = self.machine.history().last() {
            writeln!(self.out, "{}", format_event(ev, opts))?;
        }
        match result {
            Ok(StepStop::Done) => {}
            Ok(StepStop::Breakpoint(pc)) => writeln!(self.out, "breakpoint at {pc:08x}")?,
            Ok(StepStop::Halted(h)) => writeln!(self.out, "halted: {h:?}")?,
            Err(f) => write!(self.out, "{}", f.report(opts))?,
        }
        writeln!(
            self.out,
            "pc={:08x} cycle={}",
            self.machine.core.pc(),
            self.machine.core.cycles()
        )
    }

    fn show_regs(&mut self) -> io::Result<()> {
        let regs = *self.machine.core.regs();
        writeln!(self.out, "pc={:08x}", self.machine.core.pc())?;
        for row in 0..8 {
            let line: Vec<String> = (0..4)
                .map(|col| {
                    let i = row * 4 + col;
                    format!("x{i:<2}={:08x}", regs[i])
                })
                .collect();
            writeln!(self.out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    fn dump(&mut self, start: u32, n: u64) -> io::Result<()> {
        for i in 0..n {
            let a = start.wrapping_add(4 * i as u32);
            match self.machine.bus.peek(a, 4) {
                Ok(v) => writeln!(self.out, "{a:08x}: {v:08x}")?,
                Err(e) => writeln!(self.out, "{a:08x}: {e}")?,
            }
        }
        Ok(())
    }

    fn show_csrs(&mut self) -> io::Result<()> {
        let csrs = self.machine.core.csrs().clone();
        let names = [
            ("mstatus", addr::MSTATUS),
            ("misa", addr::MISA),
            ("mtvec", addr::MTVEC),
            ("mscratch", addr::MSCRATCH),
            ("mepc", addr::MEPC),
            ("mcause", addr::MCAUSE),
            ("mtval", addr::MTVAL),
        ];
        for (name, a) in names {
            writeln!(self.out, "{name:<8} {:08x}", csrs.read(a).unwrap_or(0))?;
        }
        writeln!(self.out, "{:<8} {}", "mcycle", csrs.mcycle)?;
        writeln!(self.out, "{:<8} {}", "minstret", csrs.minstret)
    }
}
