//! Experiment driver: sweeps the misstep probability, runs paired episodes of
//! OLUCT and OLTA variants and writes per-episode and summary CSV.
//!
//! Config (JSON):
//!
//! ```json
//! {
//!   "environment": { "kind": "track1d_discrete" },
//!   "q_grid": [0.0, 0.1],
//!   "episodes": 1000,
//!   "planner": { "budget": 20, "exploration": 0.7, "discount": 0.9, "horizon": 10 },
//!   "algorithms": ["oluct", { "kind": "plain" }, { "kind": "sdm", "threshold": 80 }],
//!   "seed": 1,
//!   "output": "results/track1d-discrete.csv"
//! }
//! ```
//!
//! Environment kinds: `track1d_discrete`, `track1d_continuous` (`sigma_noise`),
//! `ptsp_continuous` (`sigma_noise`, optional `d_theta`, optional `map` path)
//! and `ptsp_discrete` (optional `map` path). Relative map paths resolve
//! against the config file's directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controller::{
    run_olta, run_oluct, ControlError, EpisodeOutcome, EpisodeSettings, PlanCause, DEFAULT_MAX_STEPS, PLANNING_STREAM,
};
use crate::criteria::Criterion;
use crate::environments::ptsp::DEFAULT_D_THETA;
use crate::environments::{
    ContinuousMap, ContinuousPtsp, ContinuousTrack1D, DiscretePtsp, DiscreteTrack1D, GoStraight, GridMap, MapError,
    TrackOptimal,
};
use crate::mdp::{stream, CountingModel, GenerativeModel, PlannerParams, RolloutPolicy};
use crate::tree::{Tree, TreeDump, TreeError};

/// Episodes per cell used by `--smoke` runs.
pub const SMOKE_EPISODES: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("config line {line}, column {column}: {message}")]
    ConfigSyntax { line: usize, column: usize, message: String },
    #[error("config field `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error("map {path}: {source}")]
    Map {
        path: PathBuf,
        #[source]
        source: MapError,
    },
    #[error("episode (q={q}, algorithm={algorithm}, index={episode}): {source}")]
    Episode {
        q: f64,
        algorithm: String,
        episode: usize,
        #[source]
        source: ControlError,
    },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("CSV schema mismatch: {0}")]
    Schema(String),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> HarnessError {
    HarnessError::ConfigInvalid { field: field.into(), message: message.into() }
}

/// Environment and its fixed parameters; `q` comes from the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvironmentConfig {
    Track1dDiscrete,
    Track1dContinuous {
        sigma_noise: f64,
    },
    PtspContinuous {
        sigma_noise: f64,
        #[serde(default = "default_d_theta")]
        d_theta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        map: Option<PathBuf>,
    },
    PtspDiscrete {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        map: Option<PathBuf>,
    },
}

fn default_d_theta() -> f64 {
    DEFAULT_D_THETA
}

impl EnvironmentConfig {
    /// Label written in the `env` column.
    pub fn label(&self) -> &'static str {
        match self {
            EnvironmentConfig::Track1dDiscrete => "track1d_discrete",
            EnvironmentConfig::Track1dContinuous { .. } => "track1d_continuous",
            EnvironmentConfig::PtspContinuous { .. } => "ptsp_continuous",
            EnvironmentConfig::PtspDiscrete { .. } => "ptsp_discrete",
        }
    }
}

/// `"oluct"`, or a decision criterion for OLTA.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgorithmEntry {
    Named(AlgorithmName),
    Olta(Criterion),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmName {
    Oluct,
    Plain,
    AlwaysDiscard,
    AlwaysKeep,
}

/// A resolved algorithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Algorithm {
    Oluct,
    Olta(Criterion),
}

impl Algorithm {
    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::Oluct => "oluct",
            Algorithm::Olta(c) => c.name(),
        }
    }
}

impl From<AlgorithmEntry> for Algorithm {
    fn from(entry: AlgorithmEntry) -> Self {
        match entry {
            AlgorithmEntry::Named(AlgorithmName::Oluct) => Algorithm::Oluct,
            AlgorithmEntry::Named(AlgorithmName::Plain) => Algorithm::Olta(Criterion::Plain),
            AlgorithmEntry::Named(AlgorithmName::AlwaysDiscard) => Algorithm::Olta(Criterion::AlwaysDiscard),
            AlgorithmEntry::Named(AlgorithmName::AlwaysKeep) => Algorithm::Olta(Criterion::AlwaysKeep),
            AlgorithmEntry::Olta(c) => Algorithm::Olta(c.normalized()),
        }
    }
}

fn default_max_steps() -> u64 {
    DEFAULT_MAX_STEPS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentConfig,
    pub q_grid: Vec<f64>,
    pub episodes: usize,
    pub planner: PlannerParams,
    pub algorithms: Vec<AlgorithmEntry>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: Self = serde_json::from_str(text).map_err(|e| HarnessError::ConfigSyntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config and resolves a relative map path against
    /// the config's directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.into(), source })?;
        let mut config = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        match &mut config.environment {
            EnvironmentConfig::PtspContinuous { map: Some(m), .. }
            | EnvironmentConfig::PtspDiscrete { map: Some(m) }
                if m.is_relative() =>
            {
                *m = base.join(&*m);
            }
            _ => {}
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.q_grid.is_empty() {
            return Err(invalid("q_grid", "must not be empty"));
        }
        for (i, q) in self.q_grid.iter().enumerate() {
            if !(0.0..=1.0).contains(q) {
                return Err(invalid(format!("q_grid[{i}]"), format!("{q} is outside [0, 1]")));
            }
        }
        if self.episodes == 0 {
            return Err(invalid("episodes", "must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(invalid("algorithms", "must not be empty"));
        }
        let mut seen = BTreeSet::new();
        for (i, a) in self.algorithms().iter().enumerate() {
            if !seen.insert(a.label()) {
                return Err(invalid(format!("algorithms[{i}]"), format!("duplicate algorithm `{}`", a.label())));
            }
            if let Algorithm::Olta(c) = a {
                let threshold = match c {
                    Criterion::Sdm { threshold }
                    | Criterion::Sdv { threshold }
                    | Criterion::Sdsd { threshold }
                    | Criterion::Rdv { threshold } => *threshold,
                    _ => 0.0,
                };
                if !threshold.is_finite() || threshold < 0.0 {
                    return Err(invalid(format!("algorithms[{i}].threshold"), "must be finite and non-negative"));
                }
            }
        }
        let p = &self.planner;
        if p.budget == 0 {
            return Err(invalid("planner.budget", "must be at least 1"));
        }
        if p.horizon == 0 {
            return Err(invalid("planner.horizon", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&p.discount) {
            return Err(invalid("planner.discount", "must lie in [0, 1)"));
        }
        if !p.exploration.is_finite() || p.exploration < 0.0 {
            return Err(invalid("planner.exploration", "must be finite and non-negative"));
        }
        if self.max_steps == 0 {
            return Err(invalid("max_steps", "must be at least 1"));
        }
        match &self.environment {
            EnvironmentConfig::Track1dContinuous { sigma_noise }
            | EnvironmentConfig::PtspContinuous { sigma_noise, .. }
                if !sigma_noise.is_finite() || *sigma_noise < 0.0 =>
            {
                Err(invalid("environment.sigma_noise", "must be finite and non-negative"))
            }
            EnvironmentConfig::PtspContinuous { d_theta, .. } if !d_theta.is_finite() || *d_theta <= 0.0 => {
                Err(invalid("environment.d_theta", "must be positive"))
            }
            _ => Ok(()),
        }
    }

    pub fn algorithms(&self) -> Vec<Algorithm> {
        self.algorithms.iter().copied().map(Algorithm::from).collect()
    }
}

/// Maps loaded once per run.
#[derive(Clone, Debug)]
enum LoadedMap {
    None,
    Continuous(ContinuousMap),
    Grid(GridMap),
}

fn map_error(path: &Path, source: MapError) -> HarnessError {
    HarnessError::Map { path: path.to_path_buf(), source }
}

fn load_map(env: &EnvironmentConfig) -> Result<LoadedMap, HarnessError> {
    Ok(match env {
        EnvironmentConfig::PtspContinuous { map: Some(p), .. } => {
            LoadedMap::Continuous(ContinuousMap::load(p).map_err(|source| map_error(p, source))?)
        }
        EnvironmentConfig::PtspContinuous { map: None, .. } => LoadedMap::Continuous(ContinuousMap::bundled()),
        EnvironmentConfig::PtspDiscrete { map: Some(p) } => {
            LoadedMap::Grid(GridMap::load(p).map_err(|source| map_error(p, source))?)
        }
        EnvironmentConfig::PtspDiscrete { map: None } => LoadedMap::Grid(GridMap::bundled()),
        _ => LoadedMap::None,
    })
}

/// An environment instantiated for one misstep probability.
#[derive(Clone, Debug)]
pub enum Environment {
    Track1dDiscrete(DiscreteTrack1D),
    Track1dContinuous(ContinuousTrack1D),
    PtspContinuous(ContinuousPtsp),
    PtspDiscrete(DiscretePtsp),
}

impl Environment {
    /// Instantiates `config` at misstep probability `q`, loading any map file.
    pub fn new(config: &EnvironmentConfig, q: f64) -> Result<Self, HarnessError> {
        Ok(Self::with_map(config, &load_map(config)?, q))
    }

    fn with_map(config: &EnvironmentConfig, map: &LoadedMap, q: f64) -> Self {
        match (config, map) {
            (EnvironmentConfig::Track1dDiscrete, _) => Environment::Track1dDiscrete(DiscreteTrack1D::new(q)),
            (EnvironmentConfig::Track1dContinuous { sigma_noise }, _) => {
                Environment::Track1dContinuous(ContinuousTrack1D::new(q, *sigma_noise))
            }
            (EnvironmentConfig::PtspContinuous { sigma_noise, d_theta, .. }, LoadedMap::Continuous(m)) => {
                Environment::PtspContinuous(ContinuousPtsp::new(m.clone(), q, *sigma_noise, *d_theta))
            }
            (EnvironmentConfig::PtspDiscrete { .. }, LoadedMap::Grid(m)) => {
                Environment::PtspDiscrete(DiscretePtsp::new(m.clone(), q))
            }
            _ => unreachable!("map kind always matches the environment kind"),
        }
    }

    /// Runs one episode from the environment's start state. The same model
    /// serves as planner simulator and as the real world.
    pub fn run(
        &self,
        algorithm: &Algorithm,
        settings: &EpisodeSettings,
        seed: u64,
    ) -> Result<EpisodeOutcome, ControlError> {
        match self {
            Environment::Track1dDiscrete(e) => {
                play(e, DiscreteTrack1D::START, algorithm, settings, &TrackOptimal, seed)
            }
            Environment::Track1dContinuous(e) => {
                play(e, ContinuousTrack1D::START, algorithm, settings, &TrackOptimal, seed)
            }
            Environment::PtspContinuous(e) => play(e, e.start_state(), algorithm, settings, &GoStraight, seed),
            Environment::PtspDiscrete(e) => play(e, e.start_state(), algorithm, settings, &GoStraight, seed),
        }
    }

    /// The tree an episode with `seed` builds at its start state.
    pub fn initial_tree(&self, params: &PlannerParams, seed: u64) -> Result<TreeDump, TreeError> {
        match self {
            Environment::Track1dDiscrete(e) => dump(e, DiscreteTrack1D::START, params, &TrackOptimal, seed),
            Environment::Track1dContinuous(e) => dump(e, ContinuousTrack1D::START, params, &TrackOptimal, seed),
            Environment::PtspContinuous(e) => dump(e, e.start_state(), params, &GoStraight, seed),
            Environment::PtspDiscrete(e) => dump(e, e.start_state(), params, &GoStraight, seed),
        }
    }
}

fn play<M, P>(
    env: &M,
    start: M::State,
    algorithm: &Algorithm,
    settings: &EpisodeSettings,
    policy: &P,
    seed: u64,
) -> Result<EpisodeOutcome, ControlError>
where
    M: GenerativeModel + Clone,
    P: RolloutPolicy<M>,
{
    match algorithm {
        Algorithm::Oluct => run_oluct(env, env, start, settings, policy, seed),
        Algorithm::Olta(c) => run_olta(env, env, start, settings, c, policy, seed),
    }
}

fn dump<M, P>(env: &M, start: M::State, params: &PlannerParams, policy: &P, seed: u64) -> Result<TreeDump, TreeError>
where
    M: GenerativeModel + Clone,
    P: RolloutPolicy<M>,
{
    let model = CountingModel::new(env.clone());
    let mut rng = stream(seed, PLANNING_STREAM);
    Ok(Tree::build(&model, start, params, policy, &mut rng)?.dump())
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of episode `index` at misstep `q`. The algorithm is deliberately
/// left out so every algorithm sees the same streams for a given cell.
pub fn episode_seed(master: u64, q: f64, index: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ q.to_bits()) ^ index as u64)
}

/// One CSV row per episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub env: String,
    pub q: f64,
    pub algorithm: String,
    pub episode: usize,
    pub loss: f64,
    pub model_calls: u64,
    pub wall_time_us: u64,
    pub replans: u64,
    pub steps: u64,
    pub seed: u64,
}

pub const EPISODE_COLUMNS: [&str; 10] =
    ["env", "q", "algorithm", "episode", "loss", "model_calls", "wall_time_us", "replans", "steps", "seed"];

/// One CSV row per real step, for inspecting decisions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub env: String,
    pub q: f64,
    pub algorithm: String,
    pub episode: usize,
    pub step: usize,
    pub action: usize,
    /// Empty when the step reused a sub-tree.
    pub planned: String,
}

/// Short label for why a tree was built.
pub fn plan_cause_label(cause: &PlanCause) -> String {
    match cause {
        PlanCause::Initial => "initial".into(),
        PlanCause::Systematic => "systematic".into(),
        PlanCause::NoRecommendation => "no_recommendation".into(),
        PlanCause::MissingChild => "missing_child".into(),
        PlanCause::Discarded(reason) => {
            let r = serde_json::to_value(reason).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
            format!("discarded:{r}")
        }
    }
}

/// Output of [`run_grid`], rows in (q, algorithm, episode) order.
#[derive(Clone, Debug, Default)]
pub struct GridResult {
    pub episodes: Vec<EpisodeRow>,
    pub steps: Vec<StepRow>,
    /// Episodes cut off by `max_steps`.
    pub truncated: usize,
}

/// Runs every (q, algorithm, episode) cell. Episodes run in parallel on the
/// current rayon pool; the returned order does not depend on scheduling.
pub fn run_grid(config: &ExperimentConfig, keep_steps: bool) -> Result<GridResult, HarnessError> {
    config.validate()?;
    let map = load_map(&config.environment)?;
    let algorithms = config.algorithms();
    let settings = EpisodeSettings { planner: config.planner, max_steps: config.max_steps };
    let envs: Vec<Environment> =
        config.q_grid.iter().map(|&q| Environment::with_map(&config.environment, &map, q)).collect();
    let label = config.environment.label();

    let jobs: Vec<(usize, usize, usize)> = (0..config.q_grid.len())
        .flat_map(|qi| (0..algorithms.len()).flat_map(move |ai| (0..config.episodes).map(move |e| (qi, ai, e))))
        .collect();
    let started = Instant::now();
    let outcomes = jobs
        .par_iter()
        .map(|&(qi, ai, episode)| {
            let q = config.q_grid[qi];
            let algorithm = &algorithms[ai];
            let seed = episode_seed(config.seed, q, episode);
            envs[qi].run(algorithm, &settings, seed).map_err(|source| HarnessError::Episode {
                q,
                algorithm: algorithm.label().into(),
                episode,
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    log::info!("{} episodes in {:.1?}", outcomes.len(), started.elapsed());

    let mut result = GridResult::default();
    for (&(qi, ai, episode), outcome) in jobs.iter().zip(outcomes) {
        let q = config.q_grid[qi];
        let algorithm = algorithms[ai].label();
        let r = &outcome.record;
        if r.truncated {
            result.truncated += 1;
        }
        if keep_steps {
            result.steps.extend(outcome.steps.iter().enumerate().map(|(step, s)| StepRow {
                env: label.into(),
                q,
                algorithm: algorithm.into(),
                episode,
                step,
                action: s.action.index(),
                planned: s.planned.as_ref().map(plan_cause_label).unwrap_or_default(),
            }));
        }
        result.episodes.push(EpisodeRow {
            env: label.into(),
            q,
            algorithm: algorithm.into(),
            episode,
            loss: r.loss,
            model_calls: r.model_calls,
            wall_time_us: r.wall_time_us,
            replans: r.replans,
            steps: r.steps,
            seed: r.seed,
        });
    }
    if result.truncated > 0 {
        log::warn!("{} episodes hit max_steps={} and were truncated", result.truncated, config.max_steps);
    }
    Ok(result)
}

/// Writes serializable rows with a header line.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.into(), source })?;
    }
    let file = File::create(path).map_err(|source| HarnessError::Io { path: path.into(), source })?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|source| HarnessError::Io { path: path.into(), source })?;
    Ok(())
}

/// Reads per-episode rows, checking the header.
pub fn read_episodes<R: io::Read>(reader: R) -> Result<Vec<EpisodeRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(EPISODE_COLUMNS.iter().copied()) {
        return Err(HarnessError::Schema(format!(
            "expected header `{}`, found `{}`",
            EPISODE_COLUMNS.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.deserialize()
        .map(|row| {
            row.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                HarnessError::Schema(format!("line {line}: {e}"))
            })
        })
        .collect()
}

/// Mean and unbiased standard deviation; std is 0 for a single value.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-(env, q, algorithm) statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub env: String,
    pub algorithm: String,
    pub q: f64,
    pub count: usize,
    pub loss_mean: f64,
    pub loss_std: f64,
    pub model_calls_mean: f64,
    pub model_calls_std: f64,
    pub wall_time_us_mean: f64,
    pub wall_time_us_std: f64,
    pub replans_mean: f64,
    pub steps_mean: f64,
}

/// Groups rows by (env, algorithm, q), sorted in that order.
pub fn aggregate(rows: &[EpisodeRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, String, u64), Vec<&EpisodeRow>> = BTreeMap::new();
    for row in rows {
        groups.entry((row.env.clone(), row.algorithm.clone(), sortable(row.q))).or_default().push(row);
    }
    warn_missing_cells(&groups);
    groups
        .into_values()
        .map(|g| {
            let col = |f: fn(&EpisodeRow) -> f64| mean_std(&g.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (loss_mean, loss_std) = col(|r| r.loss);
            let (model_calls_mean, model_calls_std) = col(|r| r.model_calls as f64);
            let (wall_time_us_mean, wall_time_us_std) = col(|r| r.wall_time_us as f64);
            SummaryRow {
                env: g[0].env.clone(),
                algorithm: g[0].algorithm.clone(),
                q: g[0].q,
                count: g.len(),
                loss_mean,
                loss_std,
                model_calls_mean,
                model_calls_std,
                wall_time_us_mean,
                wall_time_us_std,
                replans_mean: col(|r| r.replans as f64).0,
                steps_mean: col(|r| r.steps as f64).0,
            }
        })
        .collect()
}

// Order-preserving map of finite, non-negative q values onto integers.
fn sortable(q: f64) -> u64 {
    let bits = q.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

fn warn_missing_cells(groups: &BTreeMap<(String, String, u64), Vec<&EpisodeRow>>) {
    let mut qs: BTreeMap<&str, BTreeSet<u64>> = BTreeMap::new();
    for (env, _, q) in groups.keys() {
        qs.entry(env).or_default().insert(*q);
    }
    let pairs: BTreeSet<(&str, &str)> = groups.keys().map(|(e, a, _)| (e.as_str(), a.as_str())).collect();
    for (env, alg) in pairs {
        for q in &qs[env] {
            if !groups.contains_key(&(env.to_string(), alg.to_string(), *q)) {
                log::warn!(
                    "no rows for env={env} algorithm={alg} q={}; group omitted",
                    f64::from_bits(*q & !(1 << 63))
                );
            }
        }
    }
}
