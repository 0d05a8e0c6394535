//! `gatefloor`: structure analysis, decomposition checks, template listings
//! and synthesis experiments for three-qubit gates.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid gate input,
//! 3 malformed argument or file, 4 I/O failure.

mod analyze;
mod error;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use gatefloor::synthesis::engine::{min_gate_search, optimize, SynthesisConfig, SynthesisResult};
use gatefloor::synthesis::template::{enumerate_templates, CircuitTemplate};
use gatefloor::synthesis::verify::{verify_circuit, verify_known_decompositions, NEGATIVE_MARGIN, VERIFY_TOL};

use crate::analyze::{analyze, AnalyzeOptions};
use crate::error::{CliError, CliResult};
use crate::input::{load_circuit, load_gate, load_target};
use crate::output::{write_json, write_run, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "gatefloor", version, about = "Two-qubit gate counts for three-qubit gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report control structure, operator Schmidt ranks and spectrum of a gate.
    Analyze(AnalyzeArgs),
    /// Multiply out the known Toffoli decompositions.
    Verify(VerifyArgs),
    /// List template classes of a given length.
    Templates(TemplatesArgs),
    /// Optimize templates against a target gate.
    Synthesize(SynthesizeArgs),
    /// Find the smallest template length that reaches a target.
    Search(SearchArgs),
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Gate name (e.g. `v_abc`, `deutsch:1.5708`, `cnot-on-AB`) or matrix file.
    gate: String,
    /// Detection tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Restarts of the rotated-basis control search.
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    /// Write `analysis.json` and the analyzed matrix (`gate.json`) into this
    /// directory instead of printing.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Residual bound for the exact decompositions.
    #[arg(long, default_value_t = VERIFY_TOL)]
    tolerance: f64,
    /// Also check this circuit descriptor against `--target`.
    #[arg(long)]
    circuit: Option<PathBuf>,
    #[arg(long, default_value = "toffoli")]
    target: String,
    /// Write `verification.json` into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TemplatesArgs {
    #[arg(long)]
    length: usize,
}

#[derive(Args, Debug, Clone)]
struct RunFlags {
    /// Output directory for results, traces and manifest.
    #[arg(long, default_value = "gatefloor-out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    /// Success tolerance in cost units.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Central-difference step of the gradient.
    #[arg(long, default_value_t = 1e-6)]
    grad_eps: f64,
    /// Initial step of every line search.
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    /// Local optimizer: `gradient-descent` or `bfgs`.
    #[arg(long, default_value = "gradient-descent")]
    optimizer: String,
}

impl RunFlags {
    fn config(&self, target: &str) -> SynthesisConfig {
        SynthesisConfig {
            restarts: self.restarts,
            seed: self.seed,
            max_iters: self.max_iters,
            step_size: self.step,
            grad_epsilon: self.grad_eps,
            success_tol: self.tol,
            target: target.to_string(),
            optimizer: self.optimizer.clone(),
            record_traces: true,
        }
    }
}

#[derive(Args, Debug)]
struct SynthesizeArgs {
    /// Target gate name or 8x8 matrix file.
    #[arg(long)]
    target: String,
    /// Template to optimize, e.g. `BC-AB-BC-AB-AC`.
    #[arg(long, conflicts_with = "all")]
    template: Option<CircuitTemplate>,
    /// Optimize the canonical template of every class of `--length`.
    #[arg(long, requires = "length")]
    all: bool,
    #[arg(long)]
    length: Option<usize>,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long)]
    target: String,
    #[arg(long)]
    max_length: usize,
    #[command(flatten)]
    run: RunFlags,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gatefloor: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Templates(a) => cmd_templates(a),
        Command::Synthesize(a) => cmd_synthesize(a),
        Command::Search(a) => cmd_search(a),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn cmd_analyze(a: AnalyzeArgs) -> CliResult<()> {
    let (u, _) = load_gate(&a.gate)?;
    let opts = AnalyzeOptions {
        tol: a.tol,
        restarts: a.restarts,
        seed: a.seed,
        max_iters: a.max_iters,
    };
    let report = analyze(&a.gate, &u, &opts)?;
    match a.out {
        Some(dir) => {
            output::ensure_dir(&dir)?;
            let path = dir.join("analysis.json");
            write_json(&path, &report)?;
            let gate_path = dir.join("gate.json");
            std::fs::write(&gate_path, u.to_json() + "\n").map_err(|e| CliError::io(&gate_path, e))?;
            println!("wrote {}", path.display());
            println!("wrote {}", gate_path.display());
        }
        None => println!("{}", to_json(&report)),
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> CliResult<()> {
    let mut report = verify_known_decompositions(a.tolerance)?;
    if let Some(path) = &a.circuit {
        let (pc, _) = load_circuit(path)?;
        let (target, _) = load_target(&a.target)?;
        let name = format!("circuit {}", path.display());
        report.checks.push(verify_circuit(&name, &pc, &target, a.tolerance)?);
        report.passed = report.checks.iter().all(|c| c.passed);
    }
    for check in &report.checks {
        let verdict = if check.passed { "pass" } else { "FAIL" };
        let bound = if check.expect_match {
            format!("must be ≤ {:e}", check.tolerance)
        } else {
            format!("must exceed {NEGATIVE_MARGIN:e}")
        };
        println!("{verdict}  {}  residual {:e} ({bound})", check.name, check.residual);
        for (i, step) in check.steps.iter().enumerate() {
            println!("      {}. {step}", i + 1);
        }
    }
    if let Some(dir) = &a.out {
        output::ensure_dir(dir)?;
        write_json(&dir.join("verification.json"), &report)?;
    }
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<String> = report
            .failures()
            .map(|c| format!("{} (residual {:e})", c.name, c.residual))
            .collect();
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn cmd_templates(a: TemplatesArgs) -> CliResult<()> {
    let classes = enumerate_templates(a.length)?;
    println!("length {}: {} classes", a.length, classes.len());
    for class in &classes {
        println!("  {}  orbit {}", class.canonical, class.orbit_size);
    }
    let sum: usize = classes.iter().map(|c| c.orbit_size).sum();
    let expected = 3 << (a.length - 1);
    let ok = if sum == expected { "ok" } else { "MISMATCH" };
    println!("orbit sizes sum to {sum} (3·2^{} = {expected}) {ok}", a.length - 1);
    Ok(())
}

fn summary_line(r: &SynthesisResult) {
    let verdict = if r.converged { "converged" } else { "not converged" };
    println!(
        "{}  class {} (orbit {})  best cost {:.6e}  {verdict}  (restart {})",
        r.template, r.class.canonical, r.class.orbit_size, r.best_cost, r.best_restart
    );
}

fn report_outputs(outputs: &[PathBuf]) {
    for p in outputs {
        println!("wrote {}", p.display());
    }
}

fn cmd_synthesize(a: SynthesizeArgs) -> CliResult<()> {
    let (target, record) = load_target(&a.target)?;
    let cfg = a.run.config(&a.target);
    cfg.validate()?;
    let templates: Vec<CircuitTemplate> = match (&a.template, a.all, a.length) {
        (Some(t), _, Some(l)) if t.len() != l => {
            return Err(CliError::Malformed(format!("template {t} has length {}, not {l}", t.len())))
        }
        (Some(t), _, _) => vec![t.clone()],
        (None, true, Some(l)) => enumerate_templates(l)?.into_iter().map(|c| c.canonical).collect(),
        _ => return Err(CliError::Malformed("choose --template or --all --length N".into())),
    };
    let mut results = Vec::with_capacity(templates.len());
    for t in &templates {
        let r = optimize(t, &target, &cfg)?;
        summary_line(&r);
        results.push(r);
    }
    let config = RunConfig {
        command: "synthesize",
        synthesis: cfg,
        templates: templates.iter().map(|t| t.to_string()).collect(),
        max_length: None,
    };
    let outputs = write_run(&a.run.out, &config, &results, &[record], &[])?;
    report_outputs(&outputs);
    Ok(())
}

fn cmd_search(a: SearchArgs) -> CliResult<()> {
    let (target, record) = load_target(&a.target)?;
    let cfg = a.run.config(&a.target);
    let report = min_gate_search(&target, a.max_length, &cfg)?;
    println!("length  class            best cost     converged");
    for row in &report.rows {
        println!("{:>6}  {:<15}  {:.6e}  {}", row.length, row.class.to_string(), row.best_cost, row.converged);
    }
    match report.smallest_converged_length {
        Some(l) => println!("smallest converged length: {l}"),
        None => println!("smallest converged length: none ≤ {}", a.max_length),
    }
    let config = RunConfig {
        command: "search",
        synthesis: cfg,
        templates: report.rows.iter().map(|r| r.class.to_string()).collect(),
        max_length: Some(a.max_length),
    };
    output::ensure_dir(&a.run.out)?;
    let search_path = a.run.out.join("search.json");
    write_json(&search_path, &report)?;
    let outputs = write_run(&a.run.out, &config, &report.results, &[record], &[search_path])?;
    report_outputs(&outputs);
    Ok(())
}
