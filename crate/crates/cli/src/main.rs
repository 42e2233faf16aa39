use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graphmend_cli::{run, Mode, Output, ReportFormat, RunConfig};

#[derive(Parser)]
#[command(name = "graphmend", version, about = "Find and rewrite torch.compile graph breaks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report graph breaks without touching any file.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Print the unified IR of each file.
        #[arg(long)]
        dump_ir: bool,
    },
    /// Rewrite fixable graph breaks.
    Fix {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        output: OutputArgs,
        /// Tensor methods allowed in predicated branches, one per line.
        #[arg(long, value_name = "F")]
        allowlist: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Python files or directories to scan
    #[arg(required = true, value_name = "PATHS")]
    paths: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Tensor attribute dynamism table.
    #[arg(long, value_name = "F", env = "GRAPHMEND_ATTR_TABLE")]
    attr_table: Option<PathBuf>,
    /// Operators with value-dependent output shapes, one per line.
    #[arg(long, value_name = "F")]
    dynamic_shape_ops: Option<PathBuf>,
    /// Files processed in parallel
    #[arg(long, short, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct OutputArgs {
    /// Overwrite changed files
    #[arg(long)]
    in_place: bool,
    /// Write every file under DIR, mirroring the input tree
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Print a unified diff (the default)
    #[arg(long)]
    diff: bool,
    /// Exit 1 if any break is present; write nothing.
    #[arg(long)]
    check: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    #[value(alias = "json-like")]
    Json,
}

fn config(common: Common, mode: Mode) -> RunConfig {
    let mut c = RunConfig::new(common.paths, mode);
    c.report_format = match common.format {
        Format::Text => ReportFormat::Text,
        Format::Json => ReportFormat::Json,
    };
    c.attr_table_path = common.attr_table;
    c.dynamic_shape_ops_path = common.dynamic_shape_ops;
    c.jobs = usize::from(common.jobs);
    c
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.command {
        Command::Analyze { common, dump_ir } => {
            let mut c = config(common, Mode::Analyze);
            c.dump_ir = dump_ir;
            c
        }
        Command::Fix { common, output, allowlist } => {
            let output = if output.in_place {
                Output::InPlace
            } else if let Some(dir) = output.out {
                Output::OutDir(dir)
            } else if output.check {
                Output::Check
            } else {
                Output::Diff
            };
            let mut c = config(common, Mode::Fix(output));
            c.allowlist_path = allowlist;
            c
        }
    };
    let code = run(&config, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code as u8)
}
