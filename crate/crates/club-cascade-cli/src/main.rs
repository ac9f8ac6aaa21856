//! `club-cascade`: reproducible experiment runner.
//!
//! Exit codes: 0 success, 2 configuration/validation error, 3 bounds-check
//! failure, 1 anything else.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use club_cascade::replay::{extract_features, load_ratings, split_users};
use club_cascade_cli::config::{ConfigError, ExperimentConfig, Scenario};
use club_cascade_cli::report::{
    aggregate, read_records, render_bounds_table, write_aggregate, write_records,
};
use club_cascade_cli::rng::{mix, TAG_SPLIT};
use club_cascade_cli::runner::{run_bounds_check, run_replay, run_synth, RunRecord};

#[derive(Parser)]
#[command(name = "club-cascade", version, about = "Clustered cascading-bandit experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate clustered users with cascade clicks; logs cumulative regret.
    Synth(RunArgs),
    /// Replay recommendations against held-out binary ratings; logs clicks.
    Replay(RunArgs),
    /// Extract item features from a ratings file via truncated SVD.
    Features(FeaturesArgs),
    /// Run the empirical bound suites and print a verdict table.
    BoundsCheck(BoundsArgs),
    /// Average a records CSV over seeds.
    Aggregate(AggregateArgs),
}

/// Every config key is also a flag of the same name; flags override the
/// `--config` file, which overrides built-in defaults.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    u: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    l: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    theta_mode: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    algorithms: Option<String>,
    /// Seed list, e.g. `--seed 0,1,2`.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    stride: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    m_guess: Option<String>,
    #[arg(long)]
    subsample: Option<String>,
    #[arg(long)]
    ratings: Option<String>,
    #[arg(long)]
    threshold: Option<String>,
    #[arg(long)]
    feature_users: Option<String>,
    #[arg(long)]
    split_seed: Option<String>,
    #[arg(long)]
    matrix_users: Option<String>,
    #[arg(long)]
    matrix_items: Option<String>,
    #[arg(long)]
    matrix_clusters: Option<String>,
    #[arg(long)]
    matrix_pattern: Option<String>,
    #[arg(long)]
    matrix_like: Option<String>,
    #[arg(long)]
    matrix_noise: Option<String>,
    #[arg(long)]
    trials: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |key: &str, value: &Option<String>| {
            if let Some(v) = value {
                out.push((key.to_string(), v.clone()));
            }
        };
        push("u", &self.u);
        push("m", &self.m);
        push("l", &self.l);
        push("k", &self.k);
        push("d", &self.d);
        push("t", &self.t);
        push("theta_mode", &self.theta_mode);
        push("lambda", &self.lambda);
        push("alpha", &self.alpha);
        push("beta", &self.beta);
        push("delta", &self.delta);
        push("algorithms", &self.algorithms);
        push("seed", &self.seed);
        push("init", &self.init);
        push("out", &self.out);
        push("stride", &self.stride);
        push("threads", &self.threads);
        push("m_guess", &self.m_guess);
        push("subsample", &self.subsample);
        push("ratings", &self.ratings);
        push("threshold", &self.threshold);
        push("feature_users", &self.feature_users);
        push("split_seed", &self.split_seed);
        push("matrix_users", &self.matrix_users);
        push("matrix_items", &self.matrix_items);
        push("matrix_clusters", &self.matrix_clusters);
        push("matrix_pattern", &self.matrix_pattern);
        push("matrix_like", &self.matrix_like);
        push("matrix_noise", &self.matrix_noise);
        push("trials", &self.trials);
        out
    }

    fn load(&self, scenario: Scenario) -> Result<ExperimentConfig, ConfigError> {
        let mut overrides = self.pairs();
        let scenario_value = match scenario {
            Scenario::Synth => "synth",
            Scenario::Replay => "replay",
            Scenario::BoundsCheck => "bounds_check",
        };
        overrides.insert(0, ("scenario".to_string(), scenario_value.to_string()));
        ExperimentConfig::from_sources(self.config.as_deref(), &overrides)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Test hook: append a deliberately inverted bound that must fail.
    #[arg(long, hide = true)]
    negative_control: bool,
}

#[derive(Args)]
struct FeaturesArgs {
    /// Ratings file (`user_id,item_id[,rating]`).
    #[arg(long)]
    ratings: PathBuf,
    /// Ratings at or above this count as positive.
    #[arg(long, default_value_t = 1.0)]
    threshold: f64,
    /// Feature dimension.
    #[arg(long, default_value_t = 20)]
    d: usize,
    /// Users reserved for extraction.
    #[arg(long, default_value_t = 100)]
    feature_users: usize,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    /// Output directory for features.csv, user_map.csv, item_map.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct AggregateArgs {
    /// Records CSV produced by `synth` or `replay`.
    #[arg(long)]
    input: PathBuf,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit_records(cfg: &ExperimentConfig, records: &[RunRecord]) -> Result<(), std::io::Error> {
    match &cfg.out {
        Some(path) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
            write_records(&mut file, records).map_err(io_of_report)?;
            file.flush()
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_records(&mut lock, records).map_err(io_of_report)
        }
    }
}

fn io_of_report(e: club_cascade_cli::report::ReportError) -> std::io::Error {
    match e {
        club_cascade_cli::report::ReportError::Io(io) => io,
        other => std::io::Error::other(other.to_string()),
    }
}

fn run_features(args: &FeaturesArgs) -> Result<(), String> {
    let (matrix, mapping) =
        load_ratings(&args.ratings, args.threshold).map_err(|e| e.to_string())?;
    let split = split_users(
        &matrix,
        args.feature_users,
        mix(&[args.split_seed, TAG_SPLIT]),
    )
    .map_err(|e| e.to_string())?;
    let features = extract_features(&split.history, args.d).map_err(|e| e.to_string())?;
    if features.rank_deficient {
        eprintln!(
            "warning: history matrix has numerical rank below {}, trailing feature coordinates are zero padding",
            args.d
        );
    }
    std::fs::create_dir_all(&args.out).map_err(|e| e.to_string())?;
    let write_all = || -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(args.out.join("features.csv"))?);
        for item in &features.items {
            let coords: Vec<String> = (0..item.x.dim())
                .map(|c| format!("{:.16e}", item.x[c]))
                .collect();
            writeln!(f, "{},{}", item.id, coords.join(","))?;
        }
        f.flush()?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(args.out.join("user_map.csv"))?);
        writeln!(f, "orig_id,dense_id")?;
        for (dense, orig) in mapping.users.iter().enumerate() {
            writeln!(f, "{orig},{dense}")?;
        }
        f.flush()?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(args.out.join("item_map.csv"))?);
        writeln!(f, "orig_id,dense_id")?;
        for (dense, orig) in mapping.items.iter().enumerate() {
            writeln!(f, "{orig},{dense}")?;
        }
        f.flush()
    };
    write_all().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Synth(args) => {
            let cfg = match args.overrides.load(Scenario::Synth) {
                Ok(cfg) => cfg,
                Err(e) => return config_failure(e),
            };
            match run_synth(&cfg) {
                Ok(records) => finish_records(&cfg, &records),
                Err(e) => failure(e),
            }
        }
        Command::Replay(args) => {
            let cfg = match args.overrides.load(Scenario::Replay) {
                Ok(cfg) => cfg,
                Err(e) => return config_failure(e),
            };
            match run_replay(&cfg) {
                Ok(records) => finish_records(&cfg, &records),
                Err(e) => failure(e),
            }
        }
        Command::Features(args) => match run_features(&args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(message) => {
                eprintln!("error: {message}");
                ExitCode::from(1)
            }
        },
        Command::BoundsCheck(args) => {
            let cfg = match args.overrides.load(Scenario::BoundsCheck) {
                Ok(cfg) => cfg,
                Err(e) => return config_failure(e),
            };
            let reports = run_bounds_check(&cfg, args.negative_control);
            print!("{}", render_bounds_table(&reports));
            if reports.iter().all(|r| r.passed()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Command::Aggregate(args) => {
            let run = || -> Result<(), String> {
                let file = std::fs::File::open(&args.input).map_err(|e| e.to_string())?;
                let records =
                    read_records(std::io::BufReader::new(file)).map_err(|e| e.to_string())?;
                let rows = aggregate(&records);
                match &args.out {
                    Some(path) => {
                        let mut f = std::io::BufWriter::new(
                            std::fs::File::create(path).map_err(|e| e.to_string())?,
                        );
                        write_aggregate(&mut f, &rows).map_err(|e| e.to_string())?;
                        f.flush().map_err(|e| e.to_string())
                    }
                    None => {
                        let stdout = std::io::stdout();
                        write_aggregate(&mut stdout.lock(), &rows).map_err(|e| e.to_string())
                    }
                }
            };
            match run() {
                Ok(()) => ExitCode::SUCCESS,
                Err(message) => {
                    eprintln!("error: {message}");
                    ExitCode::from(1)
                }
            }
        }
    }
}

fn finish_records(cfg: &ExperimentConfig, records: &[RunRecord]) -> ExitCode {
    for warning in warnings_for(cfg) {
        eprintln!("warning: {warning}");
    }
    match emit_records(cfg, records) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => failure(e),
    }
}

fn warnings_for(cfg: &ExperimentConfig) -> Vec<String> {
    let mut warnings = Vec::new();
    if cfg.lambda < cfg.k as f64 {
        warnings.push(format!(
            "lambda {} below list length {}; the analyzed regime wants lambda >= K",
            cfg.lambda, cfg.k
        ));
    }
    warnings
}

fn config_failure(e: ConfigError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn failure(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(1)
}
