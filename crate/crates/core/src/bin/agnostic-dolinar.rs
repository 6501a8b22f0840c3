use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use agnostic_dolinar::bounds::SeriesForm;
use agnostic_dolinar::estimate::EstimatorKind;
use agnostic_dolinar::figures::{
    self, default_alpha_grid, default_n_range, default_xc_grid, FigureOptions, RunManifest, SweepSpec, SweepVariable,
    Table, VerifyConfig,
};
use agnostic_dolinar::telegraph::McConfig;
use agnostic_dolinar::Error;

#[derive(Parser)]
#[command(name = "agnostic-dolinar", version, about = "Figure data and oracle checks for agnostic coherent-state classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Agnostic receiver error vs n with bound and Helstrom reference
    Fig2(AlphaNArgs),
    /// Estimate&Discriminate error vs n
    Fig3(AlphaNArgs),
    /// Success probability over (alpha, m) for one n
    Fig4(Fig4Args),
    /// Error vs alpha for both estimators with the a-priori split
    Fig5(Fig5Args),
    /// Rice-averaged error vs prior offset x_c
    Fig6(Fig6Args),
    /// Run the oracle suite; exit 1 on any failure
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    Photon,
    Heterodyne,
}

impl From<Estimator> for EstimatorKind {
    fn from(e: Estimator) -> Self {
        match e {
            Estimator::Photon => EstimatorKind::PhotonCounting,
            Estimator::Heterodyne => EstimatorKind::Heterodyne,
        }
    }
}

#[derive(Args, Clone)]
struct Common {
    /// RK4 steps per receiver propagation
    #[arg(long, default_value_t = 400)]
    grid_steps: usize,
    /// Use the bound series with its printed extra factor 1/2
    #[arg(long)]
    paper_literal: bool,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl Common {
    fn options(&self) -> FigureOptions {
        FigureOptions {
            grid_steps: self.grid_steps,
            series: if self.paper_literal { SeriesForm::Printed } else { SeriesForm::TraceNorm },
            bias_corrected: false,
        }
    }
}

#[derive(Args, Clone)]
struct Amplitudes {
    /// |alpha| values: list `a,b,c` or range `start:stop:points`
    #[arg(long, conflicts_with = "alpha_sq")]
    alpha: Option<String>,
    /// |alpha|^2 values, same syntax
    #[arg(long)]
    alpha_sq: Option<String>,
}

impl Amplitudes {
    fn resolve(&self, default: Vec<f64>) -> Result<Vec<f64>, Error> {
        if let Some(text) = &self.alpha {
            return Ok(SweepSpec::parse(SweepVariable::Alpha, text)?.values);
        }
        if let Some(text) = &self.alpha_sq {
            return Ok(SweepSpec::parse(SweepVariable::Alpha, text)?.values.into_iter().map(f64::sqrt).collect());
        }
        Ok(default)
    }
}

fn integers(var: SweepVariable, text: &Option<String>, default: Vec<u32>) -> Result<Vec<u32>, Error> {
    match text {
        Some(t) => Ok(SweepSpec::parse(var, t)?.integers()),
        None => Ok(default),
    }
}

#[derive(Args, Clone)]
struct AlphaNArgs {
    #[command(flatten)]
    amps: Amplitudes,
    /// Training sizes: list or log-spaced range `1:128:16`
    #[arg(long)]
    n: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Fig4Args {
    #[command(flatten)]
    amps: Amplitudes,
    /// Total number of training copies
    #[arg(long, default_value_t = 15)]
    n: u32,
    /// Estimate sizes; all of 1..n when absent
    #[arg(long)]
    m: Option<String>,
    /// Restrict to one estimator
    #[arg(long, value_enum)]
    estimator: Option<Estimator>,
    /// Heterodyne estimate max(s-1,0)/m instead of s/m
    #[arg(long)]
    bias_corrected: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Fig5Args {
    #[command(flatten)]
    amps: Amplitudes,
    #[arg(long, default_value = "4,8")]
    n: String,
    #[arg(long)]
    bias_corrected: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Fig6Args {
    #[arg(long, default_value = "4,8")]
    n: String,
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    /// Prior offsets: list or range
    #[arg(long)]
    xc: Option<String>,
    #[arg(long)]
    bias_corrected: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200_000)]
    trials: u64,
    #[arg(long, default_value_t = 4000)]
    slices: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    grid_steps: usize,
    /// Also write the report here
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Outcome {
    Done,
    VerificationFailed,
}

fn emit(table: &Table, common: &Common, parameters: serde_json::Value, started: Instant) -> Result<(), Error> {
    let Format::Csv = common.format;
    match &common.out {
        None => print!("{}", table.to_csv()),
        Some(path) => {
            let digest = figures::write_table(table, path)?;
            let mut manifest = RunManifest::new(std::env::args().collect(), parameters);
            manifest.outputs.push(digest);
            manifest.duration_seconds = started.elapsed().as_secs_f64();
            manifest.write(&RunManifest::path_for(path))?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    let started = Instant::now();
    match cli.command {
        Command::Fig2(args) => {
            let alphas = args.amps.resolve(vec![0.25, 0.625])?;
            let ns = integers(SweepVariable::N, &args.n, default_n_range())?;
            let table = figures::fig2(&alphas, &ns, args.common.options())?;
            emit(&table, &args.common, json!({"alpha": alphas, "n": ns, "grid_steps": args.common.grid_steps, "paper_literal": args.common.paper_literal}), started)?;
        }
        Command::Fig3(args) => {
            let alphas = args.amps.resolve(vec![0.25, 0.625, 1.0])?;
            let ns = integers(SweepVariable::N, &args.n, default_n_range())?;
            let table = figures::fig3(&alphas, &ns)?;
            emit(&table, &args.common, json!({"alpha": alphas, "n": ns}), started)?;
        }
        Command::Fig4(args) => {
            let alphas = args.amps.resolve(default_alpha_grid())?;
            let ms = integers(SweepVariable::M, &args.m, figures::all_splits(args.n))?;
            let ests: Vec<EstimatorKind> = match args.estimator {
                Some(e) => vec![e.into()],
                None => EstimatorKind::ALL.to_vec(),
            };
            let opts = FigureOptions { bias_corrected: args.bias_corrected, ..args.common.options() };
            let table = figures::fig4(args.n, &alphas, &ms, &ests, opts)?;
            let names: Vec<&str> = ests.iter().map(|e| e.name()).collect();
            emit(&table, &args.common, json!({"n": args.n, "alpha": alphas, "m": ms, "estimators": names, "grid_steps": opts.grid_steps, "bias_corrected": opts.bias_corrected}), started)?;
        }
        Command::Fig5(args) => {
            let alphas = args.amps.resolve(default_alpha_grid())?;
            let ns = SweepSpec::parse(SweepVariable::N, &args.n)?.integers();
            let opts = FigureOptions { bias_corrected: args.bias_corrected, ..args.common.options() };
            let table = figures::fig5(&ns, &alphas, opts)?;
            emit(&table, &args.common, json!({"n": ns, "alpha": alphas, "grid_steps": opts.grid_steps, "bias_corrected": opts.bias_corrected}), started)?;
        }
        Command::Fig6(args) => {
            let ns = SweepSpec::parse(SweepVariable::N, &args.n)?.integers();
            let xcs = match &args.xc {
                Some(t) => SweepSpec::parse(SweepVariable::XC, t)?.values,
                None => default_xc_grid(),
            };
            let opts = FigureOptions { bias_corrected: args.bias_corrected, ..args.common.options() };
            let table = figures::fig6(&ns, args.sigma, &xcs, opts)?;
            emit(&table, &args.common, json!({"n": ns, "sigma": args.sigma, "x_c": xcs, "grid_steps": opts.grid_steps, "paper_literal": args.common.paper_literal}), started)?;
        }
        Command::Verify(args) => {
            let cfg = VerifyConfig { mc: McConfig::new(args.trials, args.slices, args.seed)?, grid_steps: args.grid_steps };
            let checks = figures::verify_suite(cfg);
            let report = figures::format_checks(&checks);
            print!("{report}");
            if let Some(path) = &args.out {
                std::fs::write(path, &report)?;
                let mut manifest = RunManifest::new(std::env::args().collect(), serde_json::to_value(cfg)?);
                manifest.outputs.push(figures::OutputDigest {
                    path: path.clone(),
                    sha256: figures::sha256_hex(report.as_bytes()),
                    bytes: report.len() as u64,
                });
                manifest.duration_seconds = started.elapsed().as_secs_f64();
                manifest.write(&RunManifest::path_for(path))?;
            }
            if checks.iter().any(|c| !c.passed) {
                return Ok(Outcome::VerificationFailed);
            }
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e @ (Error::InvalidArgument(_) | Error::PriorsNotNormalized { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
