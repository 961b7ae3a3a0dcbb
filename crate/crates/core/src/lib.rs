//! Cycle-accurate RV32I simulator: a five-stage pipelined core, a
//! single-cycle reference core, and a small memory-mapped SoC.

pub mod bus;
pub mod csr;
pub mod event;
pub mod exec;
pub mod golden;
pub mod isa;
pub mod loader;
pub mod lockstep;
pub mod pipeline;
pub mod predictor;
pub mod repl;
pub mod runner;
pub mod stats;
pub mod trace;

pub use bus::{MemoryMap, SocBus, UnmappedPolicy};
pub use event::{Core, CoreKind, CycleReport, RetireEvent, SimFault};
pub use golden::GoldenCore;
pub use isa::{decode, decode_with, disassemble, encode, DecodeOptions, Instr, Op};
pub use loader::{load_image, ImageFormat, LoadedImage};
pub use lockstep::{lockstep, LockstepConfig, LockstepOutcome};
pub use pipeline::{PipelineConfig, PipelineCore};
pub use runner::{AnyCore, HaltReason, Machine, RunFault};
pub use stats::{compute_dmips, StatsReport};
