//! Program images: flat binaries, `$readmemh`-style hex and ELF32
//! executables.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use goblin::elf::header::{EI_CLASS, EI_DATA, ELFCLASS32, ELFDATA2LSB, EM_RISCV};
use goblin::elf::program_header::PT_LOAD;
use goblin::elf::Elf;
use thiserror::Error;

use crate::bus::{MemoryMap, SocBus};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    Bin,
    Hex,
    Elf,
}

impl FromStr for ImageFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bin" => Ok(ImageFormat::Bin),
            "hex" => Ok(ImageFormat::Hex),
            "elf" => Ok(ImageFormat::Elf),
            other => Err(format!("unknown image format `{other}` (expected bin, hex or elf)")),
        }
    }
}

impl fmt::Display for ImageFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ImageFormat::Bin => "bin",
            ImageFormat::Hex => "hex",
            ImageFormat::Elf => "elf",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub base: u32,
    pub bytes: Vec<u8>,
}

impl Segment {
    fn end(&self) -> u64 {
        self.base as u64 + self.bytes.len() as u64
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadedImage {
    pub segments: Vec<Segment>,
    pub entry_pc: u32,
    pub format: ImageFormat,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed ELF: {0}")]
    Elf(String),
    #[error("ELF is not 32-bit")]
    ElfClass,
    #[error("ELF is not little-endian")]
    ElfEndian,
    #[error("ELF machine {0} is not RISC-V")]
    ElfMachine(u16),
    #[error("hex line {line}: {msg}")]
    Hex { line: usize, msg: String },
    #[error("segment {base:#010x}+{len:#x} lies outside RAM")]
    OutsideRam { base: u32, len: usize },
    #[error("segments at {0:#010x} and {1:#010x} overlap")]
    Overlap(u32, u32),
}

impl LoadedImage {
    /// A single segment of raw bytes at `base`, entered at `base`.
    pub fn flat(bytes: Vec<u8>, base: u32) -> Self {
        LoadedImage {
            segments: vec![Segment { base, bytes }],
            entry_pc: base,
            format: ImageFormat::Bin,
        }
    }

    /// Little-endian words at consecutive addresses from `base`.
    pub fn from_words(words: &[u32], base: u32) -> Self {
        Self::flat(words.iter().flat_map(|w| w.to_le_bytes()).collect(), base)
    }

    pub fn parse(data: &[u8], format: ImageFormat, base: u32) -> Result<Self, LoadError> {
        match format {
            ImageFormat::Bin => Ok(Self::flat(data.to_vec(), base)),
            ImageFormat::Hex => parse_hex(&String::from_utf8_lossy(data), base),
            ImageFormat::Elf => parse_elf(data),
        }
    }

    /// Segments must be non-overlapping and inside RAM.
    pub fn validate(&self, map: &MemoryMap) -> Result<(), LoadError> {
        let mut sorted: Vec<&Segment> = self.segments.iter().collect();
        sorted.sort_by_key(|s| s.base);
        for s in &sorted {
            let len = u32::try_from(s.bytes.len()).ok();
            if !len.is_some_and(|len| map.in_ram(s.base, len)) {
                return Err(LoadError::OutsideRam {
                    base: s.base,
                    len: s.bytes.len(),
                });
            }
        }
        for pair in sorted.windows(2) {
            if pair[0].end() > pair[1].base as u64 {
                return Err(LoadError::Overlap(pair[0].base, pair[1].base));
            }
        }
        Ok(())
    }

    /// Validate against the bus map and copy every segment into RAM.
    pub fn install(&self, bus: &mut SocBus) -> Result<(), LoadError> {
        self.validate(bus.map())?;
        for s in &self.segments {
            bus.load_bytes(s.base, &s.bytes).map_err(|_| LoadError::OutsideRam {
                base: s.base,
                len: s.bytes.len(),
            })?;
        }
        Ok(())
    }
}

/// Read and parse an image file. `base` applies to flat and hex images
/// (default 0) and is ignored for ELF.
pub fn load_image(path: &Path, format: ImageFormat, base: Option<u32>) -> Result<LoadedImage, LoadError> {
    let data = std::fs::read(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    LoadedImage::parse(&data, format, base.unwrap_or(0))
}

/// One 32-bit hex word per token. `@addr` moves the load address to word
/// `addr` past `base`; `//` and `#` start comments.
fn parse_hex(text: &str, base: u32) -> Result<LoadedImage, LoadError> {
    let mut segments: Vec<Segment> = Vec::new();
    let mut addr = base;
    let mut current: Option<Segment> = None;
    for (n, line) in text.lines().enumerate() {
        let err = |msg: String| LoadError::Hex { line: n + 1, msg };
        let line = line.split("//").next().unwrap_or("");
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            if let Some(a) = tok.strip_prefix('@') {
                let word = u32::from_str_radix(a, 16).map_err(|_| err(format!("bad address `{tok}`")))?;
                segments.extend(current.take());
                addr = word
                    .checked_mul(4)
                    .and_then(|off| base.checked_add(off))
                    .ok_or_else(|| err(format!("address `{tok}` out of range")))?;
                continue;
            }
            let digits = tok.replace('_', "");
            if digits.is_empty() || digits.len() > 8 {
                return Err(err(format!("`{tok}` is not a 32-bit hex word")));
            }
            let word = u32::from_str_radix(&digits, 16).map_err(|_| err(format!("`{tok}` is not a hex word")))?;
            let seg = current.get_or_insert_with(|| Segment {
                base: addr,
                bytes: Vec::new(),
            });
            seg.bytes.extend_from_slice(&word.to_le_bytes());
            addr = addr.wrapping_add(4);
        }
    }
    segments.extend(current);
    Ok(LoadedImage {
        segments,
        entry_pc: base,
        format: ImageFormat::Hex,
    })
}

fn parse_elf(data: &[u8]) -> Result<LoadedImage, LoadError> {
    if data.len() < 16 || &data[..4] != b"\x7fELF" {
        return Err(LoadError::Elf("missing ELF magic".into()));
    }
    if data[EI_CLASS] != ELFCLASS32 {
        return Err(LoadError::ElfClass);
    }
    if data[EI_DATA] != ELFDATA2LSB {
        return Err(LoadError::ElfEndian);
    }
    let elf = Elf::parse(data).map_err(|e| LoadError::Elf(e.to_string()))?;
    if elf.header.e_machine != EM_RISCV {
        return Err(LoadError::ElfMachine(elf.header.e_machine));
    }
    let mut segments = Vec::new();
    for ph in elf.program_headers.iter().filter(|ph| ph.p_type == PT_LOAD && ph.p_memsz > 0) {
        let start = ph.p_offset as usize;
        let file = start
            .checked_add(ph.p_filesz as usize)
            .and_then(|end| data.get(start..end))
            .ok_or_else(|| LoadError::Elf(format!("segment at {:#x} runs past end of file", ph.p_paddr)))?;
        if ph.p_filesz > ph.p_memsz {
            return Err(LoadError::Elf("segment file size exceeds memory size".into()));
        }
        let mut bytes = file.to_vec();
        bytes.resize(ph.p_memsz as usize, 0);
        let base = u32::try_from(ph.p_paddr).map_err(|_| LoadError::Elf("address wider than 32 bits".into()))?;
        segments.push(Segment { base, bytes });
    }
    Ok(LoadedImage {
        segments,
        entry_pc: elf.entry as u32,
        format: ImageFormat::Elf,
    })
}
