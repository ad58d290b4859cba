use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hamkit::commands::{run, run_reproduce, Command, RunOptions, RunOutcome};
use hamkit::report::{render_text, residual_table, solution_table};

/// Numerical checks, existence certificates, and fixed-point solves for
/// Hammerstein integral equations with piecewise-polynomial kernels.
#[derive(Parser)]
#[command(name = "hamkit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct CommonArgs {
    /// Problem configuration file.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct Tuning {
    /// Output directory for report.txt, report.json, and solution tables.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Hypothesis grid size per axis (default 101).
    #[arg(long)]
    grid: Option<usize>,
    /// Margin tolerance override (defaults: 1e-10 for hypothesis scans,
    /// 1e-9 for membership and validation).
    #[arg(long)]
    tol: Option<f64>,
    /// Positive guard for the strict certificate inequalities (default 0).
    #[arg(long)]
    strictness_eps: Option<f64>,
}

#[derive(Subcommand)]
enum Sub {
    /// Scan the kernel hypotheses and report margins and witnesses.
    Hypotheses(CommonArgs),
    /// Verify the monotone split and evaluate the certificate conditions.
    Certify(CommonArgs),
    /// Certify, then iterate to a fixed point and validate the solution.
    Solve(CommonArgs),
    /// Run the built-in instance against pinned expected values.
    Reproduce(Tuning),
}

fn options(t: &Tuning) -> RunOptions {
    RunOptions {
        grid: t.grid,
        tol: t.tol,
        strictness_eps: t.strictness_eps,
    }
}

fn emit(outcome: &RunOutcome, out_dir: &Option<PathBuf>) -> std::io::Result<()> {
    let text = render_text(&outcome.report);
    print!("{text}");
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.txt"), &text)?;
        fs::write(dir.join("report.json"), outcome.report.to_json())?;
        if let Some(solution) = &outcome.solution {
            fs::write(dir.join("solution.tsv"), solution_table(solution))?;
            fs::write(dir.join("residuals.tsv"), residual_table(solution))?;
        }
        eprintln!("wrote report files to {}", dir.display());
    }
    Ok(())
}

fn execute(command: Command, common: &CommonArgs) -> Result<RunOutcome, String> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| format!("cannot read {}: {e}", common.config.display()))?;
    run(command, &text, &options(&common.tuning)).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, tuning) = match &cli.command {
        Sub::Hypotheses(args) => (execute(Command::Hypotheses, args), &args.tuning),
        Sub::Certify(args) => (execute(Command::Certify, args), &args.tuning),
        Sub::Solve(args) => (execute(Command::Solve, args), &args.tuning),
        Sub::Reproduce(tuning) => (
            run_reproduce(&options(tuning)).map_err(|e| e.to_string()),
            tuning,
        ),
    };
    match result {
        Ok(outcome) => {
            if let Err(e) = emit(&outcome, &tuning.out) {
                eprintln!("error writing output: {e}");
                return ExitCode::from(2);
            }
            if outcome.report.assertion_holds {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
