use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::debug;
use rvpipe::bus::{ButtonScript, UnmappedPolicy};
use rvpipe::isa::DecodeOptions;
use rvpipe::lockstep::{lockstep, LockstepConfig, LockstepOutcome};
use rvpipe::repl::{parse_number, Repl};
use rvpipe::runner::{HaltReason, EXIT_DIVERGENCE, EXIT_FAULT, EXIT_USAGE};
use rvpipe::{load_image, CoreKind, ImageFormat, Machine, MemoryMap, PipelineConfig, SocBus};

#[derive(Parser, Debug)]
#[command(name = "rvpipe", version, about = "RV32I 5-stage pipeline simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a program, echoing the UART to stdout and the statistics to stderr.
    Run(RunArgs),
    /// Run a program and print only the statistics, as key=value lines.
    Stats(RunArgs),
    /// Run the golden and pipelined cores in lockstep and report the first
    /// divergence.
    Diff(DiffArgs),
    /// Interactive step debugger.
    Debug(DebugArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CoreArg {
    Golden,
    Pipeline,
}

impl From<CoreArg> for CoreKind {
    fn from(c: CoreArg) -> Self {
        match c {
            CoreArg::Golden => CoreKind::Golden,
            CoreArg::Pipeline => CoreKind::Pipeline,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Bin,
    Hex,
    Elf,
}

impl From<FormatArg> for ImageFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Bin => ImageFormat::Bin,
            FormatArg::Hex => ImageFormat::Hex,
            FormatArg::Elf => ImageFormat::Elf,
        }
    }
}

fn number(s: &str) -> Result<u64, String> {
    parse_number(s).ok_or_else(|| format!("`{s}` is not a decimal or 0x-prefixed number"))
}

fn address(s: &str) -> Result<u32, String> {
    number(s).and_then(|v| u32::try_from(v).map_err(|_| format!("`{s}` does not fit in 32 bits")))
}

/// Options shared by every subcommand: what to load and how the SoC looks.
#[derive(Args, Debug)]
struct SocArgs {
    /// Program image.
    #[arg(long)]
    image: PathBuf,
    #[arg(long, value_enum, default_value = "bin")]
    format: FormatArg,
    /// Load address for bin and hex images.
    #[arg(long, value_parser = address)]
    base: Option<u32>,
    #[arg(long, value_parser = number, default_value = "100000000")]
    max_cycles: u64,
    /// Button script: lines of `<cycle> <hex buttons>[ R]`.
    #[arg(long)]
    buttons: Option<PathBuf>,
    /// Bytes fed to the UART receiver.
    #[arg(long)]
    uart_in: Option<PathBuf>,
    /// Decode FENCE as a no-op instead of an illegal instruction.
    #[arg(long)]
    fence_nop: bool,
    /// TOML file overriding the memory map.
    #[arg(long)]
    memmap: Option<PathBuf>,
    /// Raise access-fault traps on unmapped addresses instead of halting.
    #[arg(long)]
    unmapped_trap: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    soc: SocArgs,
    #[arg(long, value_enum, default_value = "pipeline")]
    core: CoreArg,
    /// Write one line per retirement to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Also write the UART output to this file.
    #[arg(long)]
    uart_out: Option<PathBuf>,
    /// Dhrystone iterations the program ran, for the DMIPS/MHz figure.
    #[arg(long, value_parser = number)]
    dhrystone_iters: Option<u64>,
}

#[derive(Args, Debug)]
struct DiffArgs {
    #[command(flatten)]
    soc: SocArgs,
    /// Compare minstret/instret reads too.
    #[arg(long)]
    strict_instret: bool,
}

#[derive(Args, Debug)]
struct DebugArgs {
    #[command(flatten)]
    soc: SocArgs,
    #[arg(long, value_enum, default_value = "pipeline")]
    core: CoreArg,
    /// Read commands from this file instead of stdin.
    #[arg(long)]
    script: Option<PathBuf>,
}

/// A failure before simulation starts: bad arguments, files or configs.
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.into())
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn build(soc: &SocArgs, kind: CoreKind) -> Result<Machine, Usage> {
    let map = match &soc.memmap {
        Some(p) => MemoryMap::load(p).with_context(|| format!("memory map {}", p.display()))?,
        None => MemoryMap::default(),
    };
    let image = load_image(&soc.image, soc.format.into(), soc.base)
        .with_context(|| format!("loading {}", soc.image.display()))?;
    debug!(
        "{}: {} segment(s), entry {:#010x}",
        soc.image.display(),
        image.segments.len(),
        image.entry_pc
    );
    let mut bus = SocBus::new(map);
    image.install(&mut bus).context("installing the image")?;
    if soc.unmapped_trap {
        bus.set_policy(UnmappedPolicy::Trap);
    }
    if let Some(p) = &soc.buttons {
        let text = String::from_utf8(read(p)?).context("button script is not UTF-8")?;
        bus.set_buttons(ButtonScript::parse(&text)?);
    }
    if let Some(p) = &soc.uart_in {
        bus.set_uart_input(&read(p)?);
    }
    let cfg = PipelineConfig {
        decode: DecodeOptions {
            fence_nop: soc.fence_nop,
        },
        ..Default::default()
    };
    Ok(Machine::new(kind, bus, image.entry_pc, cfg))
}

fn status(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn halt_note(h: HaltReason) -> String {
    match h {
        HaltReason::Exit(code) => format!("exit code {code:#x}"),
        HaltReason::SelfLoop(pc) => format!("self-loop at {pc:08x}"),
        HaltReason::Budget => "cycle budget exhausted".into(),
    }
}

fn run(args: &RunArgs, stats_only: bool) -> Result<ExitCode, Usage> {
    let mut m = build(&args.soc, args.core.into())?;
    if !stats_only {
        m.bus.set_uart_echo(Box::new(io::stdout()));
    }
    if let Some(p) = &args.trace {
        let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
        m.set_trace(Box::new(BufWriter::new(f)));
    }
    let outcome = m.run(args.soc.max_cycles);
    let opts = m.decode_options();
    let report = m.stats(args.dhrystone_iters);
    let uart = m.bus.uart_output().to_vec();
    // dropping the machine flushes the trace
    drop(m);
    if let Some(p) = &args.uart_out {
        fs::write(p, &uart).with_context(|| format!("writing {}", p.display()))?;
    }
    io::stdout().flush().ok();
    if stats_only {
        print!("{report}");
    } else {
        eprint!("{report}");
    }
    Ok(match outcome {
        Ok(h) => {
            eprintln!("halted: {}", halt_note(h));
            status(h.exit_status())
        }
        Err(f) => {
            eprint!("{}", f.report(opts));
            status(EXIT_FAULT)
        }
    })
}

fn diff(args: &DiffArgs) -> Result<ExitCode, Usage> {
    let mut g = build(&args.soc, CoreKind::Golden)?;
    let mut p = build(&args.soc, CoreKind::Pipeline)?;
    let cfg = LockstepConfig {
        max_cycles: args.soc.max_cycles,
        strict_instret: args.strict_instret,
    };
    Ok(match lockstep(&mut g, &mut p, cfg) {
        LockstepOutcome::Match { retired, halt } => {
            println!("match: {retired} retirements, {}", halt_note(halt));
            match halt {
                HaltReason::Budget => status(halt.exit_status()),
                _ => ExitCode::SUCCESS,
            }
        }
        LockstepOutcome::Diverged(d) => {
            println!("{d}");
            status(EXIT_DIVERGENCE)
        }
        LockstepOutcome::Fault(f) => {
            println!("both cores faulted identically");
            print!("{}", f.report(g.decode_options()));
            status(EXIT_FAULT)
        }
    })
}

fn debug(args: &DebugArgs) -> Result<ExitCode, Usage> {
    let m = build(&args.soc, args.core.into())?;
    let mut repl = Repl::new(m, io::stdout().lock(), args.soc.max_cycles);
    match &args.script {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            repl.run(BufReader::new(f), false)?;
        }
        None => {
            let prompt = io::stdin().is_terminal();
            repl.run(io::stdin().lock(), prompt)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                status(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.cmd {
        Command::Run(a) => run(a, false),
        Command::Stats(a) => run(a, true),
        Command::Diff(a) => diff(a),
        Command::Debug(a) => debug(a),
    };
    result.unwrap_or_else(|Usage(e)| {
        eprintln!("error: {e:#}");
        status(EXIT_USAGE)
    })
}
