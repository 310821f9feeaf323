use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use copt_cli::commands::{
    cmd_analyze, cmd_bench, cmd_report, cmd_rewrite, cmd_run, AnalyzeOpts, BenchOpts, Outcome,
    OutputFormat, ReportOpts, RewriteOpts, RunOpts,
};
use copt_core::interp::GroupBy;
use copt_core::profile::TableGroupBy;

/// Hotspot-driven C source optimizer: detect optimization opportunities,
/// apply them as source-to-source rewrites, execute programs under a
/// deterministic interpreter with an abstract cost model, and turn sampling
/// logs into ranked hotspot tables.
#[derive(Parser)]
#[command(name = "copt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect optimization opportunities in a C file
    Analyze {
        file: PathBuf,
        /// Comma-separated rule names, `all`, or `all-safe`
        #[arg(long, default_value = "all")]
        rules: String,
        /// Output format: text or tsv
        #[arg(long, default_value = "text")]
        format: String,
        /// Order findings by the hotspot rank of their function
        #[arg(long)]
        hotspots: Option<PathBuf>,
        /// With --hotspots: functions outside the top K are marked cold
        #[arg(long)]
        top: Option<usize>,
        /// Define a preprocessor name (repeatable)
        #[arg(long = "define", short = 'D')]
        defines: Vec<String>,
    },
    /// Apply rewrites and emit the transformed source
    Rewrite {
        file: PathBuf,
        /// Comma-separated rule names or `all-safe`
        #[arg(long, default_value = "all-safe")]
        rules: String,
        /// Also apply findings marked UNSAFE_NEEDS_OVERRIDE
        #[arg(long = "unsafe")]
        allow_unsafe: bool,
        /// Write transformed source here (default: stdout)
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        /// Write the change report here (default: stderr)
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long = "define", short = 'D')]
        defines: Vec<String>,
    },
    /// Execute a program under the deterministic interpreter
    Run {
        file: PathBuf,
        #[arg(long, default_value = "main")]
        entry: String,
        /// RNG seed; also the value `time()` returns unless --time-value is given
        #[arg(long, default_value_t = 1)]
        seed: u32,
        #[arg(long)]
        time_value: Option<i64>,
        /// Print the cost attribution table after the program output
        #[arg(long)]
        cost: bool,
        /// Attribution scope for --cost: function or location
        #[arg(long, default_value = "function")]
        cost_by: String,
        #[arg(long)]
        step_limit: Option<u64>,
        /// Dump a function entry/exit trace to stderr
        #[arg(long)]
        trace: bool,
        #[arg(long = "define", short = 'D')]
        defines: Vec<String>,
    },
    /// Render a hotspot table from a sampling log
    Report {
        file: PathBuf,
        /// Group rows by function or location
        #[arg(long, default_value = "function")]
        by: String,
        /// Keep only the top K rows (percentages still cover the full run)
        #[arg(long)]
        top: Option<usize>,
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Compare two programs for behavioral equivalence and cost
    Bench {
        original: PathBuf,
        optimized: PathBuf,
        #[arg(long, default_value = "main")]
        entry: String,
        /// Comma-separated seeds
        #[arg(long, default_value = "1,42,20071")]
        seeds: String,
        /// JSON file of cost-category weights overriding the defaults
        #[arg(long)]
        cost_model: Option<PathBuf>,
        #[arg(long = "define", short = 'D')]
        defines: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = dispatch(cli);
    if !outcome.stdout.is_empty() {
        print!("{}", outcome.stdout);
        let _ = std::io::stdout().flush();
    }
    if !outcome.stderr.is_empty() {
        eprint!("{}", outcome.stderr);
        if !outcome.stderr.ends_with('\n') {
            eprintln!();
        }
    }
    ExitCode::from(outcome.exit.clamp(0, 255) as u8)
}

fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Analyze {
            file,
            rules,
            format,
            hotspots,
            top,
            defines,
        } => {
            let format = match OutputFormat::parse(&format) {
                Ok(f) => f,
                Err(e) => return usage_error(e),
            };
            cmd_analyze(&AnalyzeOpts {
                file,
                rules,
                format,
                hotspots,
                top,
                defines,
            })
        }
        Command::Rewrite {
            file,
            rules,
            allow_unsafe,
            output,
            report,
            defines,
        } => cmd_rewrite(&RewriteOpts {
            file,
            rules,
            allow_unsafe,
            output,
            report,
            defines,
        }),
        Command::Run {
            file,
            entry,
            seed,
            time_value,
            cost,
            cost_by,
            step_limit,
            trace,
            defines,
        } => {
            let cost_by = match cost_by.as_str() {
                "function" => GroupBy::Function,
                "location" => GroupBy::Location,
                other => return usage_error(format!("unknown scope `{}`", other)),
            };
            cmd_run(&RunOpts {
                file,
                entry,
                seed,
                time_value,
                cost,
                cost_by,
                step_limit,
                trace,
                defines,
            })
        }
        Command::Report {
            file,
            by,
            top,
            format,
        } => {
            let by = match by.as_str() {
                "function" => TableGroupBy::Function,
                "location" => TableGroupBy::Location,
                other => return usage_error(format!("unknown scope `{}`", other)),
            };
            let format = match OutputFormat::parse(&format) {
                Ok(f) => f,
                Err(e) => return usage_error(e),
            };
            cmd_report(&ReportOpts {
                file,
                by,
                top,
                format,
            })
        }
        Command::Bench {
            original,
            optimized,
            entry,
            seeds,
            cost_model,
            defines,
        } => {
            let parsed: Result<Vec<u32>, _> =
                seeds.split(',').map(|s| s.trim().parse::<u32>()).collect();
            let seeds = match parsed {
                Ok(s) if !s.is_empty() => s,
                _ => return usage_error("--seeds expects a comma-separated list of integers"),
            };
            cmd_bench(&BenchOpts {
                original,
                optimized,
                entry,
                seeds,
                cost_model,
                defines,
            })
        }
    }
}

fn usage_error(message: impl Into<String>) -> Outcome {
    Outcome {
        stdout: String::new(),
        stderr: message.into(),
        exit: 3,
    }
}
