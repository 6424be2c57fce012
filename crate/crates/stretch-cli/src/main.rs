//! `stretch`: run a scheduling policy on an instance file, generate
//! instances, replay the verification batch, or convert a saved report.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a failing check, 2 for
//! operational problems (bad arguments, unreadable files, oracle budget).

use clap::{Parser, Subcommand, ValueEnum};
use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use stretch_core::forest::{active_intervals, build_forest, forest_dump, pos_schedule};
use stretch_core::gen::{adversarial_family, random_instance, GenConfig, SpreadMode};
use stretch_core::model::DISPLAY_DIGITS;
use stretch_core::oracle::{default_budget, optimal_nonpreemptive};
use stretch_core::parallel::{
    blocks_dump, dsptm_schedule, omms_schedule, sptm_schedule, virtual_instance, DeltaScope,
};
use stretch_core::single::{spt_schedule, srpt_schedule};
use stretch_core::{
    delta_ratio, gantt_csv, report_csv, report_json, run_verify, schedule_file, stretch_report,
    Instance, Rational, Schedule, VerifyConfig,
};

#[derive(Parser)]
#[command(
    name = "stretch",
    about = "Stretch-minimizing schedulers: run policies, generate instances, verify guarantees",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one policy on an instance file and print its total stretch.
    Run(RunArgs),
    /// Generate an instance file from a seed or a named family.
    Gen(GenArgs),
    /// Generate a batch and evaluate every guarantee check on it.
    Verify(VerifyArgs),
    /// Re-render a saved verification report as JSON or CSV.
    Export(ExportArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Spt,
    Srpt,
    Pos,
    Omms,
    Sptm,
    Dsptm,
    Opt,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    policy: PolicyArg,
    /// Write the schedule and its stretch report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the schedule's segment timeline as CSV.
    #[arg(long)]
    gantt: Option<PathBuf>,
    /// Write the preemption forest of the instance (single machine only).
    #[arg(long)]
    dump_forest: Option<PathBuf>,
    /// Write the release-block partition with completion spans.
    #[arg(long)]
    dump_blocks: Option<PathBuf>,
    /// Node budget for the opt policy.
    #[arg(long, default_value_t = default_budget())]
    oracle_budget: u64,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of jobs (required unless --family is given).
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// Upper bound on the processing-time ratio, e.g. 3 or 5/2.
    #[arg(long, default_value = "3")]
    delta_max: Rational,
    #[arg(long, default_value = "dense", value_parser = parse_mode)]
    mode: SpreadMode,
    /// Probability in percent that a job copies an earlier processing time.
    #[arg(long, default_value_t = 0)]
    tie_bias: u32,
    /// Denominator for all generated times.
    #[arg(long, default_value_t = 6)]
    grid: u32,
    /// Nonzero: shuffle which job gets which id, keeping the geometry.
    #[arg(long, default_value_t = 0)]
    tie_salt: u64,
    /// Named family instead of a random draw: wait-pays, nested-trees, equal-p.
    #[arg(long)]
    family: Option<String>,
    /// Family member index.
    #[arg(long)]
    size: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: u32,
    /// Sizes are drawn uniformly from 1..=n-max.
    #[arg(long, default_value_t = 6)]
    n_max: u32,
    /// Machine counts cycled through the batch, e.g. 1,2,3.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    machines: Vec<u32>,
    #[arg(long, default_value = "3")]
    delta_max: Rational,
    #[arg(long, default_value = "dense", value_parser = parse_mode)]
    mode: SpreadMode,
    #[arg(long, default_value_t = 25)]
    tie_bias: u32,
    #[arg(long, default_value_t = 6)]
    grid: u32,
    /// Node budget per oracle call; 0 skips the oracle-backed checks.
    #[arg(long, default_value_t = default_budget())]
    oracle_budget: u64,
    /// Ratio fed to the delayed schedule: the whole instance's, or each
    /// release block's own.
    #[arg(long, default_value = "global", value_parser = parse_scope)]
    delta_scope: DeltaScope,
    /// Write the full report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write one CSV row per (instance, check).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write each failing instance as its own JSON file in this directory.
    #[arg(long)]
    artifacts_dir: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ExportArgs {
    /// A report previously written by `verify --json`.
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    format: ExportFormat,
    #[arg(long)]
    out: PathBuf,
}

fn parse_mode(s: &str) -> Result<SpreadMode, String> {
    s.parse()
}

fn parse_scope(s: &str) -> Result<DeltaScope, String> {
    s.parse()
}

struct CliError(String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<stretch_core::Error> for CliError {
    fn from(e: stretch_core::Error) -> Self {
        CliError(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError(e.to_string())
    }
}

fn read_instance(path: &PathBuf) -> Result<Instance, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))?;
    Instance::from_json(&text)
        .map_err(|e| CliError(format!("cannot parse {}: {e}", path.display())))
}

fn build_schedule(
    instance: &Instance,
    policy: PolicyArg,
    oracle_budget: u64,
) -> Result<Schedule, CliError> {
    Ok(match policy {
        PolicyArg::Spt => spt_schedule(instance),
        PolicyArg::Srpt => srpt_schedule(instance)?,
        PolicyArg::Pos => {
            let srpt = srpt_schedule(instance)?;
            let forest = build_forest(&active_intervals(&srpt)?)?;
            pos_schedule(&forest, &srpt)?
        }
        PolicyArg::Omms => omms_schedule(&spt_schedule(instance))?,
        PolicyArg::Sptm => sptm_schedule(&virtual_instance(instance)),
        PolicyArg::Dsptm => {
            let sptm = sptm_schedule(&virtual_instance(instance));
            dsptm_schedule(&sptm, &delta_ratio(instance))?
        }
        PolicyArg::Opt => optimal_nonpreemptive(instance, oracle_budget)?.schedule,
    })
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, CliError> {
    let instance = read_instance(&args.instance)?;
    let schedule = build_schedule(&instance, args.policy, args.oracle_budget)?;
    let report = stretch_report(&schedule)?;
    println!("policy: {}", schedule.policy.name());
    println!(
        "total stretch: {} = {}",
        report.total,
        report.total.decimal(DISPLAY_DIGITS)
    );
    if let Some(path) = &args.out {
        let file = schedule_file(&schedule, &report);
        let mut text = serde_json::to_string_pretty(&file)?;
        text.push('\n');
        fs::write(path, text)?;
    }
    if let Some(path) = &args.gantt {
        fs::write(path, gantt_csv(&schedule))?;
    }
    if let Some(path) = &args.dump_forest {
        let srpt = srpt_schedule(&instance)?;
        let forest = build_forest(&active_intervals(&srpt)?)?;
        let mut text = serde_json::to_string_pretty(&forest_dump(&forest))?;
        text.push('\n');
        fs::write(path, text)?;
    }
    if let Some(path) = &args.dump_blocks {
        let virtual_ = virtual_instance(&instance);
        let sptm = sptm_schedule(&virtual_);
        let omms = omms_schedule(&spt_schedule(&instance))?;
        let mut text = serde_json::to_string_pretty(&blocks_dump(&virtual_, &sptm, &omms))?;
        text.push('\n');
        fs::write(path, text)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode, CliError> {
    let instance = match &args.family {
        Some(family) => adversarial_family(family, args.size.unwrap_or(1))?,
        None => {
            let n = args
                .n
                .ok_or_else(|| CliError("--n is required unless --family is given".into()))?;
            random_instance(&GenConfig {
                seed: args.seed,
                n,
                machines: args.m,
                delta_max: args.delta_max.clone(),
                mode: args.mode,
                tie_bias_percent: args.tie_bias,
                grid: args.grid,
                tie_salt: args.tie_salt,
            })?
        }
    };
    let mut text = instance.to_json();
    text.push('\n');
    fs::write(&args.out, text)?;
    println!(
        "wrote {} jobs on {} machines to {}",
        instance.n(),
        instance.machines(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, CliError> {
    let config = VerifyConfig {
        seed: args.seed,
        trials: args.trials,
        n_max: args.n_max,
        machines: args.machines.clone(),
        delta_max: args.delta_max.clone(),
        mode: args.mode,
        tie_bias_percent: args.tie_bias,
        grid: args.grid,
        oracle_budget: args.oracle_budget,
        delta_scope: args.delta_scope,
    };
    let report = run_verify(&config)?;
    for summary in &report.summaries {
        let worst = match (&summary.worst_ratio, summary.worst_instance) {
            (Some(ratio), Some(index)) => format!(
                ", worst ratio {} = {} (instance {})",
                ratio,
                ratio.decimal(DISPLAY_DIGITS),
                index
            ),
            _ => String::new(),
        };
        println!(
            "{}: pass {} fail {} skipped {}{}",
            summary.check, summary.pass, summary.fail, summary.skipped, worst
        );
    }
    if let Some(path) = &args.json {
        fs::write(path, report_json(&report))?;
    }
    if let Some(path) = &args.csv {
        fs::write(path, report_csv(&report))?;
    }
    if let Some(dir) = &args.artifacts_dir {
        fs::create_dir_all(dir)?;
        for counterexample in &report.counterexamples {
            let name = format!(
                "counterexample-{}-{}.json",
                counterexample.instance_index, counterexample.check
            );
            let mut text = counterexample.instance.to_json();
            text.push('\n');
            fs::write(dir.join(name), text)?;
        }
    }
    let failures: u32 = report.summaries.iter().map(|s| s.fail).sum();
    if failures == 0 {
        println!("all evaluated checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!(
            "{failures} check evaluation(s) failed across {} instance(s)",
            report.counterexamples.len()
        );
        Ok(ExitCode::from(1))
    }
}

fn cmd_export(args: ExportArgs) -> Result<ExitCode, CliError> {
    let text = fs::read_to_string(&args.report)
        .map_err(|e| CliError(format!("cannot read {}: {e}", args.report.display())))?;
    let report = serde_json::from_str(&text)
        .map_err(|e| CliError(format!("cannot parse {}: {e}", args.report.display())))?;
    let rendered = match args.format {
        ExportFormat::Json => report_json(&report),
        ExportFormat::Csv => report_csv(&report),
    };
    fs::write(&args.out, rendered)?;
    println!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Export(args) => cmd_export(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
