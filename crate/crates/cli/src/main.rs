use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fuzzydep::error::Error;
use fuzzydep::pipeline::{emit_report, run, Mode, RunConfig, RunSummary, TrackingConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;

/// Directional dependency analysis between multivariate time series.
#[derive(Debug, Parser)]
#[command(name = "fuzzydep", version)]
struct Cli {
    /// Data source: logistic, sde, ar or csv.
    #[arg(long)]
    mode: Mode,
    /// Landmarks per variable (default 10, or 7 in csv mode).
    #[arg(long)]
    k: Option<usize>,
    /// Time shifts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    tau: Vec<usize>,
    /// Series length for generated data.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, default_value_t = 1)]
    realisations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Analyse first differences (default on in sde mode). `--diff=false` disables.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    diff: Option<bool>,
    /// Tracking CSV for csv mode.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON column mapping and matchup for the tracking CSV.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Output directory for report.json and the CSV tables.
    #[arg(long, default_value = "fuzzydep-report")]
    out: PathBuf,
    /// Also fit on series prefixes. Without lengths, uses 200, 400, ... up to T.
    #[arg(long, num_args = 0.., value_delimiter = ',')]
    prefix_sweep: Option<Vec<usize>>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Noise level of A and B in sde mode.
    #[arg(long, default_value_t = 0.2)]
    sigma_ab: f64,
    /// Random restarts of the landmark fit.
    #[arg(long, default_value_t = 5)]
    restarts: usize,
}

fn build_config(cli: Cli) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::new(cli.mode);
    cfg.k = cli.k;
    cfg.taus = cli.tau;
    cfg.t = cli.t;
    cfg.realisations = cli.realisations;
    cfg.seed = cli.seed;
    cfg.difference_series = cli.diff;
    cfg.sigma_ab = cli.sigma_ab;
    cfg.restarts = cli.restarts;
    cfg.jobs = cli.jobs;
    cfg.output_dir = Some(cli.out);
    cfg.prefix_lengths = cli.prefix_sweep.map(|lens| {
        if lens.is_empty() {
            let t = cfg.t_or_default();
            (1..=t / 200).map(|i| i * 200).filter(|&l| l < t).collect()
        } else {
            lens
        }
    });
    if cli.mode == Mode::Csv {
        let schema = cli
            .schema
            .ok_or_else(|| Error::Config("csv mode needs --schema".into()))?;
        cfg.tracking = Some(TrackingConfig::from_json_file(&schema)?);
        cfg.csv_path = Some(cli.csv.ok_or_else(|| Error::Config("csv mode needs --csv".into()))?);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_summary(s: &RunSummary) {
    println!(
        "{} realisation(s) analysed, {} failed, {:.1?}",
        s.realisations_succeeded, s.failures, s.wall_clock
    );
    for sc in &s.scenarios {
        for p in &sc.pairs {
            let wrong = match (p.incorrect_rowvar, p.incorrect_schatten) {
                (Some(n), Some(s1)) => format!("  incorrect nu/schatten {n}/{s1}"),
                _ => String::new(),
            };
            println!(
                "tau={:<3} {:<12} {}->{}  delta_nu {:+.3}  delta_schatten {:+.3}{wrong}",
                sc.scenario.tau, sc.scenario.label, p.from, p.to, p.mean_delta_rowvar, p.mean_delta_schatten
            );
        }
    }
}

fn exit_code(e: &Error) -> ExitCode {
    ExitCode::from(if e.is_config_error() { EXIT_CONFIG } else { EXIT_DATA })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match build_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let summary = match run(&cfg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let out = cfg.output_dir.as_ref().expect("set from --out");
    let primary = &summary.scenarios[0].mean_report;
    if let Err(e) = emit_report(primary, &summary, out) {
        eprintln!("error writing report: {e}");
        return exit_code(&e);
    }
    print_summary(&summary);
    println!("report written to {}", out.display());
    ExitCode::SUCCESS
}
