//! Experiment configuration: flat `key=value` files, every key overridable
//! by a CLI flag of the same name, validated before any run.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("key `{key}`: {message}")]
    Value { key: String, message: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Synth,
    Replay,
    BoundsCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum AlgorithmKind {
    Club,
    ClubGlm,
    SingleCluster,
    PerUser,
}

impl AlgorithmKind {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Club => "club",
            AlgorithmKind::ClubGlm => "club_glm",
            AlgorithmKind::SingleCluster => "single_cluster",
            AlgorithmKind::PerUser => "per_user",
        }
    }
}

impl std::fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AlgorithmKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "club" => Ok(AlgorithmKind::Club),
            "club_glm" => Ok(AlgorithmKind::ClubGlm),
            "single_cluster" => Ok(AlgorithmKind::SingleCluster),
            "per_user" => Ok(AlgorithmKind::PerUser),
            other => Err(format!(
                "unknown algorithm `{other}` (want club, club_glm, single_cluster, per_user)"
            )),
        }
    }
}

/// Cluster weight layout: `orthogonal` or `gap(γ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThetaModeSpec {
    Orthogonal,
    Gap(f64),
}

/// Deletion scale: a number, `auto` (theorem default from the realized item
/// regularity), or `inf` (deletion off).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaSpec {
    Auto,
    Inf,
    Value(f64),
}

/// Confidence width: a number, `auto` (horizon form), or `anytime(δ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BetaSpec {
    Auto,
    Anytime(f64),
    Value(f64),
}

/// Initial graph: `complete` or `erdos_renyi(p,seed)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitSpec {
    Complete,
    ErdosRenyi { p: f64, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Participating users (replay: drawn from the held-out population).
    pub u: usize,
    /// True synthetic cluster count.
    pub m: usize,
    /// Content-set size per round.
    pub l: usize,
    /// Recommended list length.
    pub k: usize,
    /// Feature dimension.
    pub d: usize,
    /// Rounds per run (config key `t`).
    pub t: u64,
    pub theta_mode: ThetaModeSpec,
    pub lambda: f64,
    pub alpha: AlphaSpec,
    pub beta: BetaSpec,
    pub delta: f64,
    pub algorithms: Vec<AlgorithmKind>,
    pub seeds: Vec<u64>,
    pub init: InitSpec,
    pub out: Option<PathBuf>,
    /// Record every `stride` rounds (and always at the horizon).
    pub stride: u64,
    pub threads: usize,
    /// Cluster-count guess feeding the `auto` width.
    pub m_guess: usize,
    /// Per-round uniform subsample of the content set, if any.
    pub subsample: Option<usize>,
    /// Replay: ratings file; absent means the synthetic clustered matrix.
    pub ratings: Option<PathBuf>,
    pub threshold: f64,
    pub feature_users: usize,
    pub split_seed: u64,
    pub matrix_users: usize,
    pub matrix_items: usize,
    pub matrix_clusters: usize,
    pub matrix_pattern: usize,
    pub matrix_like: f64,
    pub matrix_noise: f64,
    /// Bounds-check: per-suite trial override; absent means suite defaults.
    pub trials: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Synth,
            u: 40,
            m: 5,
            l: 200,
            k: 4,
            d: 20,
            t: 20_000,
            theta_mode: ThetaModeSpec::Orthogonal,
            lambda: 4.0,
            alpha: AlphaSpec::Value(8.0),
            beta: BetaSpec::Value(1.0),
            delta: 0.1,
            algorithms: vec![AlgorithmKind::Club, AlgorithmKind::SingleCluster],
            seeds: (0..10).collect(),
            init: InitSpec::Complete,
            out: None,
            stride: 100,
            threads: 1,
            m_guess: 1,
            subsample: None,
            ratings: None,
            threshold: 1.0,
            feature_users: 100,
            split_seed: 0,
            matrix_users: 300,
            matrix_items: 1000,
            matrix_clusters: 5,
            matrix_pattern: 10,
            matrix_like: 0.9,
            matrix_noise: 0.002,
            trials: None,
        }
    }
}

fn value_err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.into(),
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    raw.parse()
        .map_err(|e| value_err(key, format!("cannot parse {raw:?}: {e}")))
}

/// Parse `name(arg1,arg2)`-style values; returns `(name, args)`.
fn parse_call(raw: &str) -> (&str, Vec<&str>) {
    match raw.find('(') {
        Some(open) if raw.ends_with(')') => {
            let name = &raw[..open];
            let inner = &raw[open + 1..raw.len() - 1];
            let args = if inner.is_empty() {
                Vec::new()
            } else {
                inner.split(',').map(str::trim).collect()
            };
            (name, args)
        }
        _ => (raw, Vec::new()),
    }
}

impl ExperimentConfig {
    /// Apply one `key=value` assignment.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        let raw = raw.trim();
        match key {
            "scenario" => {
                self.scenario = match raw {
                    "synth" => Scenario::Synth,
                    "replay" => Scenario::Replay,
                    "bounds_check" => Scenario::BoundsCheck,
                    other => {
                        return Err(value_err(
                            key,
                            format!("unknown scenario `{other}` (synth, replay, bounds_check)"),
                        ))
                    }
                }
            }
            "u" => self.u = parse_num(key, raw)?,
            "m" => self.m = parse_num(key, raw)?,
            "l" => self.l = parse_num(key, raw)?,
            "k" => self.k = parse_num(key, raw)?,
            "d" => self.d = parse_num(key, raw)?,
            "t" => self.t = parse_num(key, raw)?,
            "theta_mode" => {
                self.theta_mode = match parse_call(raw) {
                    ("orthogonal", args) if args.is_empty() => ThetaModeSpec::Orthogonal,
                    ("gap", args) if args.len() == 1 => {
                        ThetaModeSpec::Gap(parse_num(key, args[0])?)
                    }
                    _ => {
                        return Err(value_err(
                            key,
                            format!("want `orthogonal` or `gap(γ)`, got {raw:?}"),
                        ))
                    }
                }
            }
            "lambda" => self.lambda = parse_num(key, raw)?,
            "alpha" => {
                self.alpha = match raw {
                    "auto" => AlphaSpec::Auto,
                    "inf" => AlphaSpec::Inf,
                    _ => AlphaSpec::Value(parse_num(key, raw)?),
                }
            }
            "beta" => {
                self.beta = match parse_call(raw) {
                    ("auto", args) if args.is_empty() => BetaSpec::Auto,
                    ("anytime", args) if args.len() == 1 => {
                        BetaSpec::Anytime(parse_num(key, args[0])?)
                    }
                    _ => BetaSpec::Value(parse_num(key, raw)?),
                }
            }
            "delta" => self.delta = parse_num(key, raw)?,
            "algorithms" => {
                let parsed: Result<Vec<AlgorithmKind>, String> =
                    raw.split(',').map(|s| s.trim().parse()).collect();
                let parsed = parsed.map_err(|e| value_err(key, e))?;
                if parsed.is_empty() {
                    return Err(value_err(key, "need at least one algorithm"));
                }
                self.algorithms = parsed;
            }
            "seeds" | "seed" => {
                let parsed: Result<Vec<u64>, _> =
                    raw.split(',').map(|s| s.trim().parse::<u64>()).collect();
                self.seeds =
                    parsed.map_err(|e| value_err(key, format!("bad seed list {raw:?}: {e}")))?;
            }
            "init" => {
                self.init = match parse_call(raw) {
                    ("complete", args) if args.is_empty() => InitSpec::Complete,
                    ("erdos_renyi", args) if args.len() == 2 => InitSpec::ErdosRenyi {
                        p: parse_num(key, args[0])?,
                        seed: parse_num(key, args[1])?,
                    },
                    _ => {
                        return Err(value_err(
                            key,
                            format!("want `complete` or `erdos_renyi(p,seed)`, got {raw:?}"),
                        ))
                    }
                }
            }
            "out" => self.out = Some(PathBuf::from(raw)),
            "stride" => self.stride = parse_num(key, raw)?,
            "threads" => self.threads = parse_num(key, raw)?,
            "m_guess" => self.m_guess = parse_num(key, raw)?,
            "subsample" => {
                let n: usize = parse_num(key, raw)?;
                self.subsample = (n > 0).then_some(n);
            }
            "ratings" => self.ratings = Some(PathBuf::from(raw)),
            "threshold" => self.threshold = parse_num(key, raw)?,
            "feature_users" => self.feature_users = parse_num(key, raw)?,
            "split_seed" => self.split_seed = parse_num(key, raw)?,
            "matrix_users" => self.matrix_users = parse_num(key, raw)?,
            "matrix_items" => self.matrix_items = parse_num(key, raw)?,
            "matrix_clusters" => self.matrix_clusters = parse_num(key, raw)?,
            "matrix_pattern" => self.matrix_pattern = parse_num(key, raw)?,
            "matrix_like" => self.matrix_like = parse_num(key, raw)?,
            "matrix_noise" => self.matrix_noise = parse_num(key, raw)?,
            "trials" => self.trials = Some(parse_num(key, raw)?),
            other => return Err(ConfigError::UnknownKey(other.into())),
        }
        Ok(())
    }

    /// Parse a flat `key=value` file body over the current values; `#`
    /// starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                message: format!("expected key=value, got {line:?}"),
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn from_sources(
        file: Option<&std::path::Path>,
        overrides: &[(String, String)],
    ) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)?;
            cfg.apply_text(&text)?;
        }
        for (key, value) in overrides {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut problems = Vec::new();
        if self.k == 0 || self.d == 0 || self.u == 0 || self.m == 0 {
            problems.push("u, m, k, d must all be positive".into());
        }
        if self.k > self.l {
            problems.push(format!("k {} exceeds content-set size l {}", self.k, self.l));
        }
        if let Some(s) = self.subsample {
            if s < self.k {
                problems.push(format!("subsample {s} is below the list length {}", self.k));
            }
        }
        if self.m > self.u {
            problems.push(format!("m {} exceeds user count {}", self.m, self.u));
        }
        if self.seeds.is_empty() {
            problems.push("seed list is empty".into());
        }
        if self.stride == 0 {
            problems.push("stride must be positive".into());
        }
        if self.threads == 0 {
            problems.push("threads must be positive".into());
        }
        if !(self.lambda > 0.0) {
            problems.push("lambda must be positive".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            problems.push(format!("delta must lie in (0,1), got {}", self.delta));
        }
        if let ThetaModeSpec::Gap(g) = self.theta_mode {
            if !(g > 0.0 && g <= 2.0) {
                problems.push(format!("gap must lie in (0,2], got {g}"));
            }
        }
        if let AlphaSpec::Value(a) = self.alpha {
            if !(a >= 0.0) {
                problems.push(format!("alpha must be nonnegative, got {a}"));
            }
        }
        if let BetaSpec::Value(b) = self.beta {
            if !(b >= 0.0) {
                problems.push(format!("beta must be nonnegative, got {b}"));
            }
        }
        if let InitSpec::ErdosRenyi { p, .. } = self.init {
            if !(0.0..=1.0).contains(&p) {
                problems.push(format!("edge probability must lie in [0,1], got {p}"));
            }
        }
        if self.scenario == Scenario::Replay {
            if self.ratings.is_none() {
                if self.feature_users + 1 > self.matrix_users {
                    problems.push(format!(
                        "matrix_users {} leaves no replay users after {} feature users",
                        self.matrix_users, self.feature_users
                    ));
                }
                if self.matrix_clusters == 0 || self.matrix_clusters > self.matrix_items {
                    problems.push("matrix_clusters must lie in 1..=matrix_items".into());
                }
            }
            if self.feature_users == 0 {
                problems.push("feature_users must be positive".into());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(problems))
        }
    }
}
