//! Command-line surface: `solve`, `oracle`, `convert`, and `selfcheck`.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors (unreadable
//! or invalid files, infeasible parameters, failed selfcheck).

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::engine::{self, Acceptance, SolverConfig};
use crate::io::{self, BenchmarkLayout, InstanceDocument};
use crate::model::ScheduleInstance;
use crate::oracle;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Parser)]
#[command(
    name = "quacod",
    about = "Drone-route makespan scheduler driven by coordinate descent over simulated-VQE QUBO subproblems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file and print a one-line summary.
    Solve(SolveArgs),
    /// Print the exact brute-force optimal makespan of an instance file.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Convert a parallel-machine benchmark table into an instance file.
    Convert(ConvertArgs),
    /// Run the embedded three-route reference case end to end.
    Selfcheck,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Qubit budget: per-iteration subproblem size cap.
    #[arg(long, default_value_t = 20)]
    qubits: usize,
    #[arg(long, default_value_t = 400)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Penalty weight; defaults to sum(r) + c*n.
    #[arg(long)]
    penalty: Option<f64>,
    #[arg(long, value_enum, default_value_t = AcceptanceArg::Always)]
    acceptance: AcceptanceArg,
    /// Write the per-iteration trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long)]
    benchmark: PathBuf,
    #[arg(long)]
    drones: usize,
    /// Table layout, e.g. `col=1,skip=2,jobs=200`.
    #[arg(long)]
    layout: String,
    /// Recharge time in the benchmark's unit (minutes).
    #[arg(long, default_value_t = io::DEFAULT_BENCH_RECHARGE)]
    recharge: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum AcceptanceArg {
    Always,
    Monotone,
}

impl From<AcceptanceArg> for Acceptance {
    fn from(value: AcceptanceArg) -> Self {
        match value {
            AcceptanceArg::Always => Acceptance::Always,
            AcceptanceArg::Monotone => Acceptance::Monotone,
        }
    }
}

/// Run the CLI against explicit output streams; returns the exit code.
pub fn run_cli_with_output<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match cli.command {
        Command::Solve(args) => cmd_solve(&args, out, err),
        Command::Oracle { instance } => cmd_oracle(&instance, out, err),
        Command::Convert(args) => cmd_convert(&args, out, err),
        Command::Selfcheck => cmd_selfcheck(out, err),
    }
}

/// Run the CLI against stdout/stderr; returns the exit code.
pub fn run_cli<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with_output(args, &mut stdout.lock(), &mut stderr.lock())
}

fn load_instance(path: &Path, err: &mut dyn Write) -> Result<ScheduleInstance, i32> {
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
            return Err(EXIT_DATA);
        }
    };
    match io::parse_instance(&text) {
        Ok(doc) => Ok(doc.instance),
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            Err(EXIT_DATA)
        }
    }
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let inst = match load_instance(&args.instance, err) {
        Ok(inst) => inst,
        Err(code) => return code,
    };
    let cfg = SolverConfig {
        qubit_budget: args.qubits,
        max_iterations: args.iterations,
        acceptance: args.acceptance.into(),
        penalty: args.penalty,
        seed: args.seed,
        ..Default::default()
    };
    let result = match engine::solve(&inst, cfg) {
        Ok(result) => result,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_DATA;
        }
    };
    if let Some(path) = &args.trace {
        let text = io::write_trace(&result.trace);
        if let Err(e) = io::write_atomic(path, &text) {
            let _ = writeln!(err, "error: cannot write trace {}: {e}", path.display());
            return EXIT_DATA;
        }
    }
    let _ = writeln!(
        out,
        "best_makespan={} iters={} seed={}",
        io::format_value(result.best_makespan),
        result.trace.len(),
        args.seed
    );
    EXIT_OK
}

fn cmd_oracle(instance: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let inst = match load_instance(instance, err) {
        Ok(inst) => inst,
        Err(code) => return code,
    };
    match oracle::brute_force_makespan(&inst) {
        Ok(result) => {
            let _ = writeln!(out, "{}", io::format_value(result.makespan));
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DATA
        }
    }
}

fn cmd_convert(args: &ConvertArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let layout = match BenchmarkLayout::parse(&args.layout) {
        Ok(layout) => layout,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let text = match std::fs::read_to_string(&args.benchmark) {
        Ok(text) => text,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", args.benchmark.display());
            return EXIT_DATA;
        }
    };
    let inst = match io::adapt_machine_scheduling(&text, &layout, args.drones, args.recharge) {
        Ok(inst) => inst,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_DATA;
        }
    };
    let doc = InstanceDocument {
        instance: inst,
        unit: Some("minutes".to_string()),
    };
    if let Err(e) = io::write_atomic(&args.out, &io::write_instance(&doc)) {
        let _ = writeln!(err, "error: cannot write {}: {e}", args.out.display());
        return EXIT_DATA;
    }
    let _ = writeln!(
        out,
        "wrote {} ({} routes, {} drones)",
        args.out.display(),
        doc.instance.num_routes(),
        doc.instance.num_drones()
    );
    EXIT_OK
}

fn cmd_selfcheck(out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    // Embedded reference case: routes of 3.4, 2.8, and 4.4 hours, two drones,
    // 1.15 h recharge. Pairing the two short routes yields the optimum 7.35.
    let inst = ScheduleInstance::new(2, 1.15, vec![3.4, 2.8, 4.4]).expect("valid reference case");
    let expected = 7.35;

    let exact = match oracle::brute_force_makespan(&inst) {
        Ok(res) => res.makespan,
        Err(e) => {
            let _ = writeln!(err, "selfcheck FAIL: oracle: {e}");
            return EXIT_DATA;
        }
    };
    if (exact - expected).abs() > 1e-9 {
        let _ = writeln!(err, "selfcheck FAIL: oracle found {exact}, expected {expected}");
        return EXIT_DATA;
    }

    let cfg = SolverConfig {
        max_iterations: 100,
        seed: 7,
        ..Default::default()
    };
    match engine::solve(&inst, cfg) {
        Ok(result) if (result.best_makespan - expected).abs() <= 1e-9 => {
            let _ = writeln!(
                out,
                "selfcheck PASS: best_makespan={} (exact optimum {})",
                io::format_value(result.best_makespan),
                io::format_value(exact)
            );
            EXIT_OK
        }
        Ok(result) => {
            let _ = writeln!(
                err,
                "selfcheck FAIL: solver found {}, expected {expected}",
                result.best_makespan
            );
            EXIT_DATA
        }
        Err(e) => {
            let _ = writeln!(err, "selfcheck FAIL: {e}");
            EXIT_DATA
        }
    }
}
