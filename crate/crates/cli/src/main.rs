use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ans_cli::checks::run_checks;
use ans_cli::config::{parse_grid, ExperimentConfig, Overrides};
use ans_cli::error::CliError;
use ans_cli::experiments::{
    compare_summary, compare_table, initial_data, norm_table, record_table, run_compare, run_epsilon_sweep, run_smallness_study,
    smallness_table, sweep_tables,
};
use ans_core::snapshot::{read_vector, write_vector};
use ans_core::solver::{solve_u, solve_w, Run};
use ans_core::VectorField;
use clap::{Args, Parser, Subcommand};

/// Anisotropic Navier-Stokes experiments on a periodic box.
#[derive(Parser, Debug)]
#[command(name = "ans", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid size as `n1,n2,n3`.
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<[usize; 3]>,
    #[arg(long = "nu-h", global = true)]
    nu_h: Option<f64>,
    #[arg(long = "nu-3", global = true)]
    nu_3: Option<f64>,
    /// Besov exponent `p`.
    #[arg(long, global = true)]
    p: Option<f64>,
}

#[derive(Args, Debug)]
struct Input {
    /// Initial field snapshot; generated from the configuration when absent.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the configured initial datum.
    Gen,
    /// Norms of a field.
    Norm(Input),
    /// Evolve the full system.
    Evolve(Input),
    /// Evolve the remainder `w = u - u_F`.
    EvolveW(Input),
    /// Norms of the oscillatory family across an epsilon sweep.
    SweepEps,
    /// Remainder growth across an amplitude ladder.
    Smallness,
    /// Continuous dependence on the initial datum.
    Compare,
    /// Run the verification suites.
    Check {
        /// Replace the partition function by one that breaks the partition of unity.
        #[arg(long)]
        tamper: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen => "gen",
            Command::Norm(_) => "norm",
            Command::Evolve(_) => "evolve",
            Command::EvolveW(_) => "evolve-w",
            Command::SweepEps => "sweep-eps",
            Command::Smallness => "smallness",
            Command::Compare => "compare",
            Command::Check { .. } => "check",
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let g = &cli.global;
    let ov = Overrides { out: g.out.clone(), seed: g.seed, grid: g.grid, nu_h: g.nu_h, nu_3: g.nu_3, p: g.p };
    let text = match &g.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
        None => String::new(),
    };
    ExperimentConfig::from_text(cli.command.name(), &text, &ov)
}

fn load_field(cfg: &ExperimentConfig, input: &Input) -> Result<VectorField, CliError> {
    match &input.input {
        Some(path) => {
            let f = File::open(path).map_err(|e| CliError::io(path, e))?;
            Ok(read_vector(&mut BufReader::new(f))?)
        }
        None => initial_data(cfg),
    }
}

fn save_field(path: &Path, u: &VectorField) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let f = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(write_vector(&mut BufWriter::new(f), u)?)
}

fn finish_run(cfg: &ExperimentConfig, run: &Run, name: &str) -> Result<(), CliError> {
    record_table(cfg, run).write(&cfg.out_dir.join(format!("{name}_record.csv")))?;
    save_field(&cfg.out_dir.join(format!("{name}_final.ansf")), &run.final_state)?;
    match &run.record.blow_up {
        Some((t, reason)) => Err(CliError::BlowUp(format!("{reason} at t = {t}"))),
        None => Ok(()),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = load_config(cli)?;
    let out = cfg.out_dir.clone();
    match &cli.command {
        Command::Gen => {
            let u = initial_data(&cfg)?;
            save_field(&out.join("u0.ansf"), &u)?;
            norm_table(&cfg, &u)?.write(&out.join("u0_norms.csv"))?;
        }
        Command::Norm(input) => {
            let u = load_field(&cfg, input)?;
            if u.grid() != cfg.grid() {
                cfg.solver.grid = *u.grid();
            }
            norm_table(&cfg, &u)?.write(&out.join("norms.csv"))?;
        }
        Command::Evolve(input) => {
            let u = load_field(&cfg, input)?;
            cfg.solver.grid = *u.grid();
            finish_run(&cfg, &solve_u(&u, &cfg.solver)?, "u")?;
        }
        Command::EvolveW(input) => {
            let u = load_field(&cfg, input)?;
            cfg.solver.grid = *u.grid();
            finish_run(&cfg, &solve_w(&u, &cfg.solver)?, "w")?;
        }
        Command::SweepEps => {
            let report = run_epsilon_sweep(&cfg)?;
            let (rows, fits) = sweep_tables(&cfg, &report);
            rows.write(&out.join("sweep.csv"))?;
            fits.write(&out.join("sweep_slopes.csv"))?;
        }
        Command::Smallness => {
            let rows = run_smallness_study(&cfg)?;
            smallness_table(&cfg, &rows).write(&out.join("smallness.csv"))?;
        }
        Command::Compare => {
            let r = run_compare(&cfg)?;
            compare_table(&cfg, &r).write(&out.join("compare.csv"))?;
            compare_summary(&cfg, &r).write(&out.join("compare_summary.csv"))?;
            if r.full.blow_up || r.half.blow_up {
                return Err(CliError::BlowUp("compare run blew up".into()));
            }
        }
        Command::Check { tamper } => {
            let report = run_checks(&cfg, *tamper)?;
            std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
            let path = out.join("checks.json");
            let text = serde_json::to_string_pretty(&report).expect("serializable report");
            std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
            for s in &report.suites {
                println!("{} {} ({:.1} s)", if s.passed { "PASS" } else { "FAIL" }, s.name, s.seconds);
            }
            if !report.passed {
                let failed: Vec<&str> = report.suites.iter().filter(|s| !s.passed).map(|s| s.name.as_str()).collect();
                return Err(CliError::CheckFailed(failed.join(", ")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
