//! Command-line driver: construction pipeline + A* + reporting.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pdbplan::clock::{Clock, RealClock, VirtualClock};
use pdbplan::orchestrator::{run_construction, ConstructionConfig};
use pdbplan::pdb::INFINITY;
use pdbplan::report::{write_csv, RunReport};
use pdbplan::sas::{parse_sas_file, SasTask};
use pdbplan::search::{astar, format_plan, validate_plan, Outcome, SearchLimits};

const EXIT_SOLVED: u8 = 0;
const EXIT_INPUT: u8 = 2;
const EXIT_LIMITS: u8 = 3;
const EXIT_UNSOLVABLE: u8 = 4;

#[derive(Parser)]
#[command(name = "pdbplan", about = "Cost-optimal planner over complementary PDB collections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one task and optionally write plan/report/audit files.
    Solve {
        task: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
        /// Plan output path (IPC format).
        #[arg(long)]
        plan: Option<PathBuf>,
        /// JSON run report path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Solve several tasks and write a CSV summary with a mean row.
    Batch {
        tasks: Vec<PathBuf>,
        #[command(flatten)]
        opts: RunOpts,
        /// CSV summary path (defaults to stdout).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Parse a task and print its structure.
    Dump { task: PathBuf },
}

#[derive(Args)]
struct RunOpts {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Heuristic construction budget in seconds.
    #[arg(long, default_value_t = 1080.0)]
    construction_time: f64,
    /// Construction memory budget in bytes.
    #[arg(long, default_value_t = 4 << 30)]
    construction_memory: u64,
    /// Total budget (construction + search) in seconds.
    #[arg(long, default_value_t = 1800.0)]
    overall_time: f64,
    /// Approximate total memory budget in bytes (internal accounting).
    #[arg(long, default_value_t = 8 << 30)]
    overall_memory: u64,
    /// Dense-table cap per PDB.
    #[arg(long, default_value_t = 10_000_000)]
    max_pdb_entries: u64,
    /// Deterministic virtual time instead of wall clock.
    #[arg(long)]
    virtual_clock: bool,
    /// Construction audit log path (JSON lines).
    #[arg(long)]
    audit: Option<PathBuf>,
}

fn config_from(opts: &RunOpts) -> ConstructionConfig {
    ConstructionConfig {
        construction_time: opts.construction_time,
        construction_memory: opts.construction_memory,
        max_pdb_entries: opts.max_pdb_entries,
        seed: opts.seed,
        ..ConstructionConfig::default()
    }
}

struct RunOutcome {
    code: u8,
    report: RunReport,
    plan_text: Option<String>,
}

fn run_task(task: &SasTask, name: &str, opts: &RunOpts) -> Result<RunOutcome, String> {
    let clock: Box<dyn Clock> = if opts.virtual_clock {
        Box::new(VirtualClock::new())
    } else {
        Box::new(RealClock::new())
    };
    let clock = clock.as_ref();
    let start = clock.now();

    let construction = run_construction(task, config_from(opts), clock);
    if let Some(path) = &opts.audit {
        let mut f =
            std::fs::File::create(path).map_err(|e| format!("audit: {}: {e}", path.display()))?;
        for record in &construction.audit {
            let line = serde_json::to_string(record).map_err(|e| format!("audit: {e}"))?;
            writeln!(f, "{line}").map_err(|e| format!("audit: {e}"))?;
        }
    }

    let set = &construction.set;
    let initial_h = set.max_heuristic(&task.initial);
    let mut census: std::collections::BTreeMap<String, usize> = Default::default();
    for c in &set.collections {
        *census.entry(c.provenance.label().to_string()).or_default() += 1;
    }
    let num_pdbs = set.collections.iter().map(|c| c.pdbs.len()).sum();

    let base_report = |status: &str| RunReport {
        task: name.to_string(),
        seed: opts.seed,
        status: status.to_string(),
        plan_cost: None,
        initial_h: if initial_h == INFINITY { u64::MAX } else { initial_h },
        expansions: 0,
        evaluations: 0,
        generated: 0,
        construction_time: construction.construction_time,
        search_time: 0.0,
        total_time: clock.now() - start,
        num_collections: set.len(),
        num_pdbs,
        pdb_memory_bytes: set.memory_bytes(),
        collections_by_generator: census.iter().map(|(k, &v)| (k.clone(), v)).collect(),
    };

    if construction.unsolvable_hint || initial_h == INFINITY {
        return Ok(RunOutcome {
            code: EXIT_UNSOLVABLE,
            report: base_report("unsolvable"),
            plan_text: None,
        });
    }

    // memory guard for search is approximate: bound stored states by the
    // budget left after the PDB tables
    let state_bytes = (task.num_vars() * 2 + 96) as u64;
    let mem_left = opts.overall_memory.saturating_sub(set.memory_bytes());
    let limits = SearchLimits {
        deadline: Some(start + opts.overall_time),
        max_expansions: Some(mem_left / state_bytes.max(1)),
    };
    let h = |s: &pdbplan::sas::State| set.max_heuristic(s);
    let result = astar(task, &h, &limits, clock);

    let mut report = base_report("failed");
    report.expansions = result.expansions;
    report.evaluations = result.evaluations;
    report.generated = result.generated;
    report.search_time = result.search_time;
    report.total_time = clock.now() - start;

    match result.outcome {
        Outcome::Solved(plan) => {
            let cost = validate_plan(task, &plan).map_err(|e| format!("invalid plan: {e}"))?;
            debug_assert_eq!(Some(cost), result.plan_cost);
            report.status = "solved".into();
            report.plan_cost = Some(cost);
            Ok(RunOutcome {
                code: EXIT_SOLVED,
                report,
                plan_text: Some(format_plan(task, &plan, cost)),
            })
        }
        Outcome::Unsolvable => {
            report.status = "unsolvable".into();
            Ok(RunOutcome {
                code: EXIT_UNSOLVABLE,
                report,
                plan_text: None,
            })
        }
        Outcome::LimitExceeded => {
            report.status = "failed".into();
            Ok(RunOutcome {
                code: EXIT_LIMITS,
                report,
                plan_text: None,
            })
        }
    }
}

fn load(path: &Path) -> Result<SasTask, String> {
    parse_sas_file(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn solve(
    task_path: &Path,
    opts: &RunOpts,
    plan_path: Option<&Path>,
    report_path: Option<&Path>,
) -> Result<u8, String> {
    let task = load(task_path)?;
    let name = task_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| task_path.display().to_string());
    let outcome = run_task(&task, &name, opts)?;

    if let Some(text) = &outcome.plan_text {
        match plan_path {
            Some(p) => std::fs::write(p, text).map_err(|e| format!("plan: {}: {e}", p.display()))?,
            None => print!("{text}"),
        }
    }
    if let Some(p) = report_path {
        outcome
            .report
            .write_json(p)
            .map_err(|e| format!("report: {}: {e}", p.display()))?;
    }
    match outcome.report.status.as_str() {
        "solved" => eprintln!(
            "solved: cost {} expansions {} h0 {}",
            outcome.report.plan_cost.unwrap(),
            outcome.report.expansions,
            outcome.report.initial_h
        ),
        status => eprintln!("{status}"),
    }
    Ok(outcome.code)
}

fn batch(tasks: &[PathBuf], opts: &RunOpts, csv: Option<&Path>) -> Result<u8, String> {
    if tasks.is_empty() {
        return Err("no tasks given".into());
    }
    let mut reports = Vec::new();
    let mut worst = EXIT_SOLVED;
    for path in tasks {
        let task = load(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let outcome = run_task(&task, &name, opts)?;
        eprintln!("{}: {}", name, outcome.report.status);
        worst = worst.max(outcome.code);
        reports.push(outcome.report);
    }
    match csv {
        Some(p) => {
            let mut f =
                std::fs::File::create(p).map_err(|e| format!("csv: {}: {e}", p.display()))?;
            write_csv(&reports, &mut f).map_err(|e| format!("csv: {e}"))?;
        }
        None => {
            let mut out = std::io::stdout();
            write_csv(&reports, &mut out).map_err(|e| format!("csv: {e}"))?;
        }
    }
    Ok(worst)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve {
            task,
            opts,
            plan,
            report,
        } => solve(task, opts, plan.as_deref(), report.as_deref()),
        Command::Batch { tasks, opts, csv } => batch(tasks, opts, csv.as_deref()),
        Command::Dump { task } => load(task).map(|t| {
            print!("{}", t.debug_dump());
            EXIT_SOLVED
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
