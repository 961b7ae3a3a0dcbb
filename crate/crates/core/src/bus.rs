//! The simulated SoC: unified RAM shared by instruction fetch and data
//! access, a UART, GPIO (8 LEDs, 5 buttons and a reset button) and a
//! simulation-exit register.

use std::collections::VecDeque;
use std::fmt;
use std::io::Write;
use std::path::Path;

use log::warn;
use serde::Deserialize;
use thiserror::Error;

pub const UART_TXDATA: u32 = 0x0;
pub const UART_TXSTATUS: u32 = 0x4;
pub const UART_RXDATA: u32 = 0x8;
pub const UART_RXSTATUS: u32 = 0xC;
pub const GPIO_LEDS: u32 = 0x0;
pub const GPIO_BUTTONS: u32 = 0x4;

const DEVICE_WINDOW: u32 = 0x10;

/// Addresses of every region on the bus. Loadable from a TOML file of
/// `key = value` pairs; omitted keys keep their defaults.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemoryMap {
    pub ram_base: u32,
    pub ram_size: u32,
    pub uart_base: u32,
    pub gpio_base: u32,
    pub sim_exit: u32,
    /// Where the reset button restarts execution. Power-on starts at the
    /// image entry point instead.
    pub reset_vector: u32,
}

impl Default for MemoryMap {
    fn default() -> Self {
        MemoryMap {
            ram_base: 0x0000_0000,
            ram_size: 128 * 1024,
            uart_base: 0x1000_0000,
            gpio_base: 0x1000_1000,
            sim_exit: 0x1000_2000,
            reset_vector: 0x0000_0000,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read memory map {path}")]
    Io { path: String, source: std::io::Error },
    #[error("memory map is not valid TOML")]
    Parse(#[from] toml::de::Error),
    #[error("invalid memory map: {0}")]
    Invalid(String),
}

impl MemoryMap {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let map: MemoryMap = toml::from_str(text)?;
        map.validate()?;
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.ram_size.is_power_of_two() {
            return Err(ConfigError::Invalid(format!("ram_size {:#x} is not a power of two", self.ram_size)));
        }
        let regions = [
            ("ram", self.ram_base as u64, self.ram_size as u64),
            ("uart", self.uart_base as u64, DEVICE_WINDOW as u64),
            ("gpio", self.gpio_base as u64, 8),
            ("sim_exit", self.sim_exit as u64, 4),
        ];
        for (name, base, len) in regions {
            if base + len > 1 << 32 {
                return Err(ConfigError::Invalid(format!("{name} region runs past the address space")));
            }
            if base % 4 != 0 {
                return Err(ConfigError::Invalid(format!("{name} base {base:#x} is not word aligned")));
            }
        }
        for (i, (a, abase, alen)) in regions.iter().enumerate() {
            for (b, bbase, blen) in &regions[i + 1..] {
                if abase < &(bbase + blen) && bbase < &(abase + alen) {
                    return Err(ConfigError::Invalid(format!("{a} and {b} regions overlap")));
                }
            }
        }
        if !self.in_ram(self.reset_vector, 4) {
            return Err(ConfigError::Invalid(format!(
                "reset vector {:#x} is outside RAM",
                self.reset_vector
            )));
        }
        Ok(())
    }

    pub fn in_ram(&self, addr: u32, len: u32) -> bool {
        let off = addr.wrapping_sub(self.ram_base) as u64;
        off + len as u64 <= self.ram_size as u64
    }
}

/// What happens when a core touches an address nothing answers to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UnmappedPolicy {
    /// Stop the simulation with a fault diagnostic.
    #[default]
    Halt,
    /// Raise an access-fault trap (cause 1, 5 or 7).
    Trap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum BusError {
    #[error("no device at {addr:#010x} for a {size}-byte access")]
    Unmapped { addr: u32, size: u32 },
}

/// Button state over time. Each entry holds from its cycle until the next.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ButtonScript {
    entries: Vec<ButtonEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ButtonEntry {
    pub cycle: u64,
    pub buttons: u8,
    pub reset: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("button script line {line}: {msg}")]
pub struct ScriptError {
    pub line: usize,
    pub msg: String,
}

impl ButtonScript {
    pub fn new(entries: Vec<ButtonEntry>) -> Result<Self, ScriptError> {
        for (i, pair) in entries.windows(2).enumerate() {
            if pair[1].cycle <= pair[0].cycle {
                return Err(ScriptError {
                    line: i + 2,
                    msg: "cycles must be strictly increasing".into(),
                });
            }
        }
        Ok(ButtonScript { entries })
    }

    /// Parse lines of `<cycle> <hex buttons>[ R]`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ScriptError> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let err = |msg: &str| ScriptError {
                line: line_no,
                msg: msg.to_owned(),
            };
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let cycle = fields
                .next()
                .and_then(|f| f.parse::<u64>().ok())
                .ok_or_else(|| err("expected a decimal cycle number"))?;
            let buttons = fields
                .next()
                .map(|f| f.trim_start_matches("0x"))
                .and_then(|f| u8::from_str_radix(f, 16).ok())
                .ok_or_else(|| err("expected a hex button value"))?;
            if buttons > 0x1F {
                return Err(err("button value wider than 5 bits"));
            }
            let reset = match fields.next() {
                None => false,
                Some("R") | Some("r") => true,
                Some(_) => return Err(err("trailing field must be R")),
            };
            if fields.next().is_some() {
                return Err(err("too many fields"));
            }
            if let Some(prev) = entries.last() {
                let prev: &ButtonEntry = prev;
                if cycle <= prev.cycle {
                    return Err(err("cycles must be strictly increasing"));
                }
            }
            entries.push(ButtonEntry { cycle, buttons, reset });
        }
        Ok(ButtonScript { entries })
    }

    fn entry_at(&self, cycle: u64) -> Option<&ButtonEntry> {
        let idx = self.entries.partition_point(|e| e.cycle <= cycle);
        idx.checked_sub(1).map(|i| &self.entries[i])
    }

    /// The BUTTONS register value in force at `cycle`: buttons in bits 4:0,
    /// reset in bit 5.
    pub fn value_at(&self, cycle: u64) -> u32 {
        self.entry_at(cycle)
            .map(|e| e.buttons as u32 | (e.reset as u32) << 5)
            .unwrap_or(0)
    }

    /// Whether a reset-asserting entry takes effect exactly at `cycle`.
    pub fn reset_starts_at(&self, cycle: u64) -> bool {
        self.entries.iter().any(|e| e.reset && e.cycle == cycle)
    }

    pub fn has_reset(&self) -> bool {
        self.entries.iter().any(|e| e.reset)
    }
}

/// Bytes written to UART TXDATA, in order. Optionally echoed to a writer
/// (e.g. stdout) as they arrive.
#[derive(Default)]
pub struct UartSink {
    bytes: Vec<u8>,
    echo: Option<Box<dyn Write + Send>>,
}

impl fmt::Debug for UartSink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UartSink")
            .field("bytes", &self.bytes.len())
            .field("echo", &self.echo.is_some())
            .finish()
    }
}

impl UartSink {
    fn push(&mut self, byte: u8) {
        self.bytes.push(byte);
        if let Some(echo) = self.echo.as_mut() {
            if echo.write_all(&[byte]).and_then(|_| echo.flush()).is_err() {
                warn!("uart echo failed; disabling echo");
                self.echo = None;
            }
        }
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }
}

/// Bus and devices. Owned by the same context as the core that drives it.
#[derive(Debug)]
pub struct SocBus {
    map: MemoryMap,
    ram: Vec<u8>,
    policy: UnmappedPolicy,
    uart: UartSink,
    rx: VecDeque<u8>,
    leds: u8,
    buttons: ButtonScript,
    exit: Option<u32>,
    cycle: u64,
}

impl SocBus {
    pub fn new(map: MemoryMap) -> Self {
        SocBus {
            ram: vec![0; map.ram_size as usize],
            map,
            policy: UnmappedPolicy::default(),
            uart: UartSink::default(),
            rx: VecDeque::new(),
            leds: 0,
            buttons: ButtonScript::default(),
            exit: None,
            cycle: 0,
        }
    }

    pub fn map(&self) -> &MemoryMap {
        &self.map
    }

    pub fn policy(&self) -> UnmappedPolicy {
        self.policy
    }

    pub fn set_policy(&mut self, policy: UnmappedPolicy) {
        self.policy = policy;
    }

    pub fn set_uart_echo(&mut self, echo: Box<dyn Write + Send>) {
        self.uart.echo = Some(echo);
    }

    pub fn set_uart_input(&mut self, input: &[u8]) {
        self.rx = input.iter().copied().collect();
    }

    pub fn set_buttons(&mut self, script: ButtonScript) {
        self.buttons = script;
    }

    pub fn buttons(&self) -> &ButtonScript {
        &self.buttons
    }

    pub fn uart_output(&self) -> &[u8] {
        self.uart.bytes()
    }

    pub fn leds(&self) -> u8 {
        self.leds
    }

    /// Exit code written to SIM_EXIT, if any.
    pub fn exit_code(&self) -> Option<u32> {
        self.exit
    }

    /// Cycle used to evaluate the button script. Set by the core each clock.
    pub fn set_cycle(&mut self, cycle: u64) {
        self.cycle = cycle;
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    fn ram_offset(&self, addr: u32, size: u32) -> Option<usize> {
        self.map
            .in_ram(addr, size)
            .then(|| addr.wrapping_sub(self.map.ram_base) as usize)
    }

    /// Copy bytes into RAM, e.g. when loading an image.
    pub fn load_bytes(&mut self, addr: u32, bytes: &[u8]) -> Result<(), BusError> {
        let off = self.ram_offset(addr, bytes.len() as u32).ok_or(BusError::Unmapped {
            addr,
            size: bytes.len() as u32,
        })?;
        self.ram[off..off + bytes.len()].copy_from_slice(bytes);
        Ok(())
    }

    /// Instruction fetch. Only RAM is executable.
    pub fn fetch(&self, addr: u32) -> Result<u32, BusError> {
        self.read_ram(addr, 4)
    }

    fn read_ram(&self, addr: u32, size: u32) -> Result<u32, BusError> {
        let off = self.ram_offset(addr, size).ok_or(BusError::Unmapped { addr, size })?;
        let mut buf = [0u8; 4];
        buf[..size as usize].copy_from_slice(&self.ram[off..off + size as usize]);
        Ok(u32::from_le_bytes(buf))
    }

    /// Device register offset, for word accesses inside a device window.
    fn device(&self, addr: u32, size: u32, base: u32, len: u32) -> Option<u32> {
        let off = addr.wrapping_sub(base);
        (off < len && size == 4).then_some(off)
    }

    /// Read side-effect free view used by debuggers; RXDATA is not dequeued.
    pub fn peek(&self, addr: u32, size: u32) -> Result<u32, BusError> {
        self.read_inner(addr, size).map(|(v, _)| v)
    }

    /// Data read; the value is zero-padded, the core applies extension.
    pub fn read(&mut self, addr: u32, size: u32) -> Result<u32, BusError> {
        let (value, dequeue) = self.read_inner(addr, size)?;
        if dequeue {
            self.rx.pop_front();
        }
        Ok(value)
    }

    fn read_inner(&self, addr: u32, size: u32) -> Result<(u32, bool), BusError> {
        if let Ok(v) = self.read_ram(addr, size) {
            return Ok((v, false));
        }
        if let Some(off) = self.device(addr, size, self.map.uart_base, DEVICE_WINDOW) {
            return Ok(match off {
                UART_TXSTATUS => (1, false),
                UART_RXDATA => match self.rx.front() {
                    Some(&b) => (b as u32, true),
                    None => (0, false),
                },
                UART_RXSTATUS => (!self.rx.is_empty() as u32, false),
                _ => (0, false),
            });
        }
        if let Some(off) = self.device(addr, size, self.map.gpio_base, 8) {
            return Ok(match off {
                GPIO_LEDS => (self.leds as u32, false),
                _ => (self.buttons.value_at(self.cycle), false),
            });
        }
        if self.device(addr, size, self.map.sim_exit, 4).is_some() {
            return Ok((0, false));
        }
        Err(BusError::Unmapped { addr, size })
    }

    pub fn write(&mut self, addr: u32, size: u32, value: u32) -> Result<(), BusError> {
        if let Some(off) = self.ram_offset(addr, size) {
            let bytes = value.to_le_bytes();
            self.ram[off..off + size as usize].copy_from_slice(&bytes[..size as usize]);
            return Ok(());
        }
        if let Some(off) = self.device(addr, size, self.map.uart_base, DEVICE_WINDOW) {
            match off {
                UART_TXDATA => self.uart.push(value as u8),
                _ => warn!("ignored write of {value:#x} to read-only uart register {addr:#010x}"),
            }
            return Ok(());
        }
        if let Some(off) = self.device(addr, size, self.map.gpio_base, 8) {
            match off {
                GPIO_LEDS => self.leds = value as u8,
                _ => warn!("ignored write of {value:#x} to read-only button register {addr:#010x}"),
            }
            return Ok(());
        }
        if self.device(addr, size, self.map.sim_exit, 4).is_some() {
            self.exit = Some(value);
            return Ok(());
        }
        Err(BusError::Unmapped { addr, size })
    }

    /// Clear the exit latch (used by an architectural reset).
    pub fn clear_exit(&mut self) {
        self.exit = None;
    }
}

/// Clock-enable control: free running, or gated to a number of retirements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    Free,
    Step,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClockGate {
    pub mode: RunMode,
    pub pending_steps: u64,
}

impl ClockGate {
    pub fn free() -> Self {
        ClockGate {
            mode: RunMode::Free,
            pending_steps: 0,
        }
    }

    pub fn step(n: u64) -> Self {
        ClockGate {
            mode: RunMode::Step,
            pending_steps: n,
        }
    }

    /// May the core tick this cycle?
    pub fn enabled(&self) -> bool {
        match self.mode {
            RunMode::Free => true,
            RunMode::Step => self.pending_steps > 0,
        }
    }

    /// Account for one retired instruction.
    pub fn on_retire(&mut self) {
        if self.mode == RunMode::Step {
            self.pending_steps = self.pending_steps.saturating_sub(1);
        }
    }
}
