//! Budget lower bounds and failure-probability upper bounds for the node-wise
//! recommendation at depth `d`, plus a Monte-Carlo calibration of `rho` on a
//! two-armed bandit.
//!
//! `f(t) = ceil(rho * ln t)` is the budget that survives one level down the
//! tree; `f^d(n)` is its `d`-fold composition and the failure bound at depth
//! `d` is `min(1, f^d(n)^(-(rho / 2) * delta^2))`.

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mdp::{
    stream, Action, CountingModel, FixedAction, GenerativeModel, PlannerParams, PlanningState, TransitionOutcome,
};
use crate::tree::{Tree, TreeError};

/// Default `rho`; the theory only asserts that some `rho >= 0` exists.
pub const DEFAULT_RHO: f64 = 2.0;

/// Inputs of the failure bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: u64,
    pub rho: f64,
    pub delta: f64,
    pub depth: usize,
}

impl BoundParams {
    pub fn evaluate(&self) -> FailureBound {
        failure_bound(self.n, self.rho, self.delta, self.depth)
    }
}

/// One step of the budget recursion, `ceil(rho * ln t)`.
pub fn next_budget(t: u64, rho: f64) -> u64 {
    let b = (rho * (t as f64).ln()).ceil();
    if b <= 0.0 {
        0
    } else {
        b as u64
    }
}

/// `[b_0 = n, b_1, ..., b_{d_max}]` with `b_d = ceil(rho * ln b_{d-1})`.
/// Stops before the first budget that is `<= 1`.
pub fn budget_sequence(n: u64, rho: f64, d_max: usize) -> Vec<u64> {
    let mut seq = vec![n];
    let mut b = n;
    for _ in 0..d_max {
        b = next_budget(b, rho);
        if b <= 1 {
            break;
        }
        seq.push(b);
    }
    seq
}

/// `f^d(n)`, or `None` when the recursion reaches a budget `<= 1` first.
pub fn composed_budget(n: u64, rho: f64, depth: usize) -> Option<u64> {
    if n <= 1 {
        return None;
    }
    let seq = budget_sequence(n, rho, depth);
    (seq.len() == depth + 1).then(|| seq[depth])
}

/// A clamped bound. `vacuous` is set whenever the value is the trivial 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FailureBound {
    pub value: f64,
    pub vacuous: bool,
}

/// Upper bound on the probability that the recommendation at depth `depth`
/// differs from the node-wise optimal action, given root budget `n`.
pub fn failure_bound(n: u64, rho: f64, delta: f64, depth: usize) -> FailureBound {
    let Some(b) = composed_budget(n, rho, depth) else {
        return FailureBound { value: 1.0, vacuous: true };
    };
    let value = (b as f64).powf(-0.5 * rho * delta * delta).clamp(0.0, 1.0);
    FailureBound { value, vacuous: value >= 1.0 }
}

/// One point of a bound curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: u64,
    pub d: usize,
    pub bound: f64,
    pub vacuous: bool,
}

/// Rows ordered by depth, then by `n` in grid order.
pub fn bound_curve(rho: f64, delta: f64, depths: &[usize], n_grid: &[u64]) -> Vec<BoundRow> {
    depths
        .iter()
        .flat_map(|&d| {
            n_grid.iter().map(move |&n| {
                let b = failure_bound(n, rho, delta, d);
                BoundRow { n, d, bound: b.value, vacuous: b.vacuous }
            })
        })
        .collect()
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GridError {
    #[error("empty grid specification")]
    Empty,
    #[error("cannot parse `{0}` as a budget")]
    BadNumber(String),
    #[error("range `{0}` must have 1 < lo <= hi")]
    BadRange(String),
}

fn parse_budget(s: &str) -> Result<u64, GridError> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => Ok(v as u64),
        _ => Err(GridError::BadNumber(s.to_string())),
    }
}

/// Parses a budget grid. Accepted forms:
///
/// * `100,1000,1e6`: explicit list;
/// * `1e1..1e9`: log-spaced, 10 points per decade;
/// * `1e1..1e9:20`: log-spaced with the given points per decade.
///
/// Values are rounded to integers, sorted and deduplicated.
pub fn parse_n_grid(spec: &str) -> Result<Vec<u64>, GridError> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(GridError::Empty);
    }
    let mut out = if let Some((lo, rest)) = spec.split_once("..") {
        let (hi, per_decade) = match rest.split_once(':') {
            Some((hi, k)) => (hi, k.trim().parse::<u32>().map_err(|_| GridError::BadNumber(k.to_string()))?),
            None => (rest, 10),
        };
        let (lo, hi) = (parse_budget(lo)?, parse_budget(hi)?);
        if lo < 2 || hi < lo || per_decade == 0 {
            return Err(GridError::BadRange(spec.to_string()));
        }
        let (a, b) = ((lo as f64).log10(), (hi as f64).log10());
        let steps = ((b - a) * per_decade as f64).round() as u64;
        let mut v: Vec<u64> =
            (0..=steps).map(|i| 10f64.powf(a + (b - a) * i as f64 / steps.max(1) as f64).round() as u64).collect();
        v.push(hi);
        v
    } else {
        spec.split(',').map(parse_budget).collect::<Result<Vec<_>, _>>()?
    };
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Parses `0..3` (inclusive) or a comma list such as `0,2`.
pub fn parse_depths(spec: &str) -> Result<Vec<usize>, GridError> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(GridError::Empty);
    }
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| GridError::BadNumber(s.to_string()));
    if let Some((lo, hi)) = spec.split_once("..") {
        let (lo, hi) = (num(lo)?, num(hi.trim_start_matches('=').trim())?);
        if hi < lo {
            return Err(GridError::BadRange(spec.to_string()));
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',').map(num).collect()
}

/// Single-decision state of the bandit: `pulled` once an arm was played.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BanditState {
    pub pulled: bool,
}

impl PlanningState for BanditState {
    const DISCRETE: bool = true;

    fn features(&self) -> Vec<f64> {
        vec![f64::from(u8::from(self.pulled))]
    }
}

/// Bernoulli bandit with one pull per episode, written as an MDP so the
/// ordinary tree builder can be used on it.
#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliBandit {
    pub means: Vec<f64>,
}

impl BernoulliBandit {
    /// Two arms centred on 0.5 whose means differ by `gap`.
    pub fn two_armed(gap: f64) -> Self {
        Self { means: vec![0.5 + gap / 2.0, 0.5 - gap / 2.0] }
    }

    pub fn best_arm(&self) -> Action {
        let best = self.means.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map_or(0, |(i, _)| i);
        Action(best)
    }

    pub const START: BanditState = BanditState { pulled: false };
}

impl GenerativeModel for BernoulliBandit {
    type State = BanditState;

    fn num_actions(&self) -> usize {
        self.means.len()
    }

    fn is_terminal(&self, state: &BanditState) -> bool {
        state.pulled
    }

    fn transition(&self, _: &BanditState, action: Action, rng: &mut dyn RngCore) -> TransitionOutcome<BanditState> {
        let reward = if rng.random_bool(self.means[action.index()]) { 1.0 } else { 0.0 };
        TransitionOutcome { next_state: BanditState { pulled: true }, reward, terminal: true }
    }
}

/// Observed root-recommendation failures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FailureCount {
    pub n: u64,
    pub failures: u64,
    pub trials: u64,
}

impl FailureCount {
    pub fn rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }

    /// Upper end of the Wilson score interval at normal quantile `z`.
    pub fn wilson_upper(&self, z: f64) -> f64 {
        let t = self.trials as f64;
        let p = self.rate();
        let z2 = z * z;
        let centre = p + z2 / (2.0 * t);
        let spread = z * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt();
        ((centre + spread) / (1.0 + z2 / t)).min(1.0)
    }
}

/// Builds `trials` independent trees of budget `n` on `bandit` and counts how
/// often the root recommendation is not the best arm. Trial `i` uses stream
/// `i` of `seed`, so the count does not depend on thread scheduling.
pub fn bandit_failures(
    bandit: &BernoulliBandit,
    n: u64,
    exploration: f64,
    trials: u64,
    seed: u64,
) -> Result<FailureCount, TreeError> {
    let params = PlannerParams { budget: n as usize, exploration, discount: 0.9, horizon: 1 };
    let best = bandit.best_arm();
    let policy = FixedAction(Action(0));
    let failures = (0..trials)
        .into_par_iter()
        .map(|i| {
            let model = CountingModel::new(bandit);
            let mut rng = stream(seed, i);
            let tree = Tree::build(&model, BernoulliBandit::START, &params, &policy, &mut rng)?;
            Ok(u64::from(tree.recommended_action(&mut rng)? != best))
        })
        .sum::<Result<u64, TreeError>>()?;
    Ok(FailureCount { n, failures, trials })
}

/// Largest `rho` for which `n^(-(rho / 2) delta^2)` still covers `p`.
pub fn max_rho_covering(n: u64, p: f64, delta: f64) -> f64 {
    if p <= 0.0 {
        return f64::INFINITY;
    }
    if p >= 1.0 || n <= 1 || delta <= 0.0 {
        return 0.0;
    }
    -2.0 * p.ln() / (delta * delta * (n as f64).ln())
}

/// Result of [`calibrate_rho`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Calibration {
    pub rho: f64,
    pub delta: f64,
    pub z: f64,
    pub counts: Vec<FailureCount>,
}

/// Picks the tightest `rho` whose depth-0 bound covers the upper Wilson
/// limit of the failure rate at every calibration budget.
pub fn calibrate_rho(counts: &[FailureCount], delta: f64, z: f64) -> Calibration {
    let rho = counts.iter().map(|c| max_rho_covering(c.n, c.wilson_upper(z), delta)).fold(f64::INFINITY, f64::min);
    Calibration { rho, delta, z, counts: counts.to_vec() }
}

/// Outcome of checking a calibrated `rho` on fresh trials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub n: u64,
    pub observed: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Calibrates `rho` on one seed, then compares fresh failure rates against
/// the depth-0 bound at the same budgets.
pub fn check_bandit_consistency(
    gap: f64,
    budgets: &[u64],
    exploration: f64,
    trials: u64,
    calibration_seed: u64,
    verification_seed: u64,
    z: f64,
) -> Result<(Calibration, Vec<ConsistencyRow>), TreeError> {
    let bandit = BernoulliBandit::two_armed(gap);
    let calib: Vec<FailureCount> = budgets
        .iter()
        .map(|&n| bandit_failures(&bandit, n, exploration, trials, calibration_seed))
        .collect::<Result<_, _>>()?;
    let calibration = calibrate_rho(&calib, gap, z);
    let rows = budgets
        .iter()
        .map(|&n| {
            let fresh = bandit_failures(&bandit, n, exploration, trials, verification_seed)?;
            let bound = failure_bound(n, calibration.rho, gap, 0).value;
            Ok(ConsistencyRow { n, observed: fresh.rate(), bound, holds: fresh.rate() <= bound })
        })
        .collect::<Result<_, TreeError>>()?;
    Ok((calibration, rows))
}
