use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "gatescope", version, about = "Gate-level netlist reverse engineering")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Gate library JSON; the built-in library when omitted.
    #[arg(short = 'l', long, global = true, env = "GATESCOPE_LIBRARY")]
    pub library: Option<PathBuf>,
    /// Design to load: structural Verilog or a snapshot.
    #[arg(short = 'i', long, global = true)]
    pub input: Option<PathBuf>,
    /// How to read the input; `auto` treats `.json` as a snapshot.
    #[arg(long, global = true, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Minimum severity written to standard error.
    #[arg(long, global = true, value_enum, default_value_t = LogLevel::Warn)]
    pub log_level: LogLevel,
    /// Only log these channels (repeatable).
    #[arg(long = "log-channel", global = true, value_name = "CHANNEL")]
    pub log_channels: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Auto,
    Verilog,
    Snapshot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogLevel {
    Error,
    Warn,
    Info,
    Debug,
    Trace,
}

impl LogLevel {
    pub fn filter(self) -> log::LevelFilter {
        match self {
            LogLevel::Error => log::LevelFilter::Error,
            LogLevel::Warn => log::LevelFilter::Warn,
            LogLevel::Info => log::LevelFilter::Info,
            LogLevel::Debug => log::LevelFilter::Debug,
            LogLevel::Trace => log::LevelFilter::Trace,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse the input and optionally save a snapshot.
    Parse {
        #[arg(long, value_name = "PATH")]
        save: Option<PathBuf>,
    },
    /// Counts by gate type and category.
    Stats,
    /// Strongly connected components of the gate graph.
    Scc {
        /// Also list single gates without a self-loop.
        #[arg(long)]
        include_trivial: bool,
    },
    /// State machine candidates and their state graphs
    #[command(subcommand)]
    Fsm(FsmCommand),
    /// Recover the enabling key of an obfuscated FSM and patch it out
    #[command(subcommand)]
    Harpoon(HarpoonCommand),
    /// Payloads hidden in constant-tied LUTs
    #[command(subcommand)]
    Watermark(WatermarkCommand),
    /// Write the netlist back as structural Verilog.
    WriteVerilog {
        #[command(flatten)]
        out: VerilogOut,
    },
    /// Save or load JSON snapshots
    #[command(subcommand)]
    Snapshot(SnapshotCommand),
    /// Start the HTTP API on the loaded design.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        /// Serve this directory at `/` instead of the built-in page.
        #[arg(long = "static", value_name = "DIR")]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct VerilogOut {
    /// Destination; standard output when omitted.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
    /// Emit gates with unconnected pins.
    #[arg(long)]
    pub allow_dangling: bool,
}

#[derive(Debug, Args)]
pub struct Limits {
    #[arg(long, default_value_t = 10)]
    pub max_inputs: usize,
    #[arg(long, default_value_t = 65536)]
    pub max_states: usize,
}

#[derive(Debug, Subcommand)]
pub enum FsmCommand {
    /// Ranked FSM candidates and rejected register loops.
    List,
    /// State graph of one candidate.
    Extract {
        #[arg(long, default_value_t = 0)]
        candidate: usize,
        /// Write the state graph as Graphviz DOT.
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
        /// Also print the next-state functions.
        #[arg(long)]
        functions: bool,
        #[command(flatten)]
        limits: Limits,
    },
}

#[derive(Debug, Subcommand)]
pub enum HarpoonCommand {
    /// Find the original region and the key into it.
    Analyze {
        #[arg(long, default_value_t = 0)]
        candidate: usize,
        #[command(flatten)]
        limits: Limits,
    },
    /// Make the design power up in the original region.
    Patch {
        #[arg(long, default_value_t = 0)]
        candidate: usize,
        #[command(flatten)]
        limits: Limits,
        #[command(flatten)]
        out: VerilogOut,
        /// Also save the patched netlist as a snapshot.
        #[arg(long, value_name = "PATH")]
        save: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum WatermarkCommand {
    /// Report every constant-tied LUT.
    Scan {
        /// CSV instead of a table.
        #[arg(long, conflicts_with = "json")]
        csv: bool,
    },
    /// Payload of one LUT.
    Extract {
        #[arg(long)]
        gate: String,
    },
    /// Clear unreachable rows and write the cleaned design.
    Remove {
        /// Only this LUT; every suspicious LUT by default.
        #[arg(long)]
        gate: Option<String>,
        #[command(flatten)]
        out: VerilogOut,
        #[arg(long, value_name = "PATH")]
        save: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SnapshotCommand {
    /// Save the loaded design as a snapshot.
    Save {
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
    /// Load a snapshot and report what it holds.
    Load,
}
