//! Decision criteria: whether a reused sub-tree may keep driving the agent.
//!
//! Every criterion except the test-only [`Criterion::AlwaysKeep`] and
//! [`Criterion::AlwaysDiscard`] first applies the plain gate (the sub-tree
//! root must be fully expanded) and the model's availability predicate for
//! the recommended action. All thresholds are strict: a statistic equal to
//! its threshold keeps the tree.

use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::mdp::{Action, GenerativeModel, PlanningState};
use crate::tree::{Tree, TreeError};

/// Added to the covariance diagonal when its smallest eigenvalue is below it.
pub const COVARIANCE_RIDGE: f64 = 1e-6;
/// Lower bound on `|mean|` in variance-to-mean ratios.
pub const VMR_MEAN_FLOOR: f64 = 1e-6;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CriteriaError {
    #[error("state distribution modality requires discrete states")]
    ContinuousStates,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// A decision criterion and its threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Criterion {
    /// Keep iff the root is fully expanded.
    Plain,
    /// State distribution modality; `threshold` is a fraction in `(0, 1]`.
    Sdm { threshold: f64 },
    /// State distribution variance (variance-to-mean ratio for vectors).
    Sdv { threshold: f64 },
    /// Mahalanobis distance of the current state to the sampled states.
    Sdsd { threshold: f64 },
    /// Variance of the recommended action's returns.
    Rdv { threshold: f64 },
    /// Test-only: never reuse. Reduces the controller to re-planning at every step.
    AlwaysDiscard,
    /// Test-only: always reuse while a recommendation exists.
    AlwaysKeep,
}

impl Criterion {
    pub fn name(&self) -> &'static str {
        match self {
            Criterion::Plain => "plain",
            Criterion::Sdm { .. } => "sdm",
            Criterion::Sdv { .. } => "sdv",
            Criterion::Sdsd { .. } => "sdsd",
            Criterion::Rdv { .. } => "rdv",
            Criterion::AlwaysDiscard => "always_discard",
            Criterion::AlwaysKeep => "always_keep",
        }
    }

    /// Converts an SDM threshold given in percent (> 1) to a fraction.
    pub fn normalized(self) -> Self {
        match self {
            Criterion::Sdm { threshold } if threshold > 1.0 => {
                log::warn!("SDM threshold {threshold} read as a percentage ({})", threshold / 100.0);
                Criterion::Sdm { threshold: threshold / 100.0 }
            }
            other => other,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    Kept,
    NotFullyExpanded,
    RecommendedUnavailable,
    MultiModalOutsideMajority,
    VarianceExceeded,
    DistanceExceeded,
    ReturnVarianceExceeded,
    AlwaysDiscard,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verdict {
    pub keep: bool,
    pub reason: Reason,
}

impl Verdict {
    pub const KEEP: Verdict = Verdict { keep: true, reason: Reason::Kept };

    pub fn discard(reason: Reason) -> Self {
        Verdict { keep: false, reason }
    }

    fn keep_unless(exceeded: bool, reason: Reason) -> Self {
        if exceeded {
            Verdict::discard(reason)
        } else {
            Verdict::KEEP
        }
    }
}

/// A verdict plus the action to play when the tree is kept.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub verdict: Verdict,
    pub action: Option<Action>,
}

/// Applies `criterion` to a reused sub-tree for the agent's current `state`.
/// On keep, `action` is the sub-tree's recommendation. Fails with
/// [`TreeError::NoTriedAction`] only under [`Criterion::AlwaysKeep`].
pub fn decide<M: GenerativeModel>(
    criterion: &Criterion,
    model: &M,
    tree: &Tree<M::State>,
    state: &M::State,
    rng: &mut dyn RngCore,
) -> Result<Decision, CriteriaError> {
    let discard = |reason| Ok(Decision { verdict: Verdict::discard(reason), action: None });
    match criterion {
        Criterion::AlwaysDiscard => return discard(Reason::AlwaysDiscard),
        Criterion::AlwaysKeep => {
            let action = tree.recommended_action(rng)?;
            return Ok(Decision { verdict: Verdict::KEEP, action: Some(action) });
        }
        _ => {}
    }
    let gate = plain(tree);
    if !gate.keep {
        return discard(gate.reason);
    }
    let action = tree.recommended_action(rng)?;
    if !model.action_available(state, action) {
        return discard(Reason::RecommendedUnavailable);
    }
    let verdict = match *criterion {
        Criterion::Plain => gate,
        Criterion::Sdm { threshold } => sdm(tree, state, threshold)?,
        Criterion::Sdv { threshold } => sdv(tree, threshold),
        Criterion::Sdsd { threshold } => sdsd(tree, state, threshold)?,
        Criterion::Rdv { threshold } => rdv(tree, action, threshold),
        Criterion::AlwaysDiscard | Criterion::AlwaysKeep => unreachable!(),
    };
    Ok(Decision { verdict, action: verdict.keep.then_some(action) })
}

/// Keep iff every root action was tried at least once.
pub fn plain<S: PlanningState>(tree: &Tree<S>) -> Verdict {
    Verdict::keep_unless(!tree.root().is_fully_expanded(), Reason::NotFullyExpanded)
}

/// Groups the root's sampled states into modes by equality. A unimodal
/// distribution keeps; otherwise keep iff `state`'s mode holds a fraction of
/// the samples strictly above `threshold`.
pub fn sdm<S: PlanningState>(tree: &Tree<S>, state: &S, threshold: f64) -> Result<Verdict, CriteriaError> {
    if !S::DISCRETE {
        return Err(CriteriaError::ContinuousStates);
    }
    let samples = tree.root().sampled_states();
    let mut modes: Vec<(&S, usize)> = Vec::new();
    for s in samples {
        match modes.iter_mut().find(|(m, _)| *m == s) {
            Some((_, count)) => *count += 1,
            None => modes.push((s, 1)),
        }
    }
    if modes.len() <= 1 {
        return Ok(Verdict::KEEP);
    }
    let own = modes.iter().find(|(m, _)| *m == state).map_or(0, |(_, c)| *c);
    let fraction = own as f64 / samples.len() as f64;
    Ok(Verdict::keep_unless(fraction <= threshold, Reason::MultiModalOutsideMajority))
}

/// Scalar states: discard iff the sample variance exceeds `threshold`.
/// Vector states: discard iff the largest per-dimension variance-to-mean
/// ratio exceeds it.
pub fn sdv<S: PlanningState>(tree: &Tree<S>, threshold: f64) -> Verdict {
    Verdict::keep_unless(state_dispersion(tree.root().sampled_states()) > threshold, Reason::VarianceExceeded)
}

/// The statistic compared by [`sdv`]. Zero with fewer than two samples.
pub fn state_dispersion<S: PlanningState>(samples: &[S]) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let features: Vec<Vec<f64>> = samples.iter().map(PlanningState::features).collect();
    let dim = features[0].len();
    if dim == 1 {
        let xs: Vec<f64> = features.iter().map(|f| f[0]).collect();
        return sample_variance(&xs);
    }
    (0..dim)
        .map(|d| {
            let xs: Vec<f64> = features.iter().map(|f| f[d]).collect();
            sample_variance(&xs) / mean(&xs).abs().max(VMR_MEAN_FLOOR)
        })
        .fold(0.0, f64::max)
}

/// Discard iff the Mahalanobis distance from `state` to the root's sampled
/// states exceeds `threshold`.
pub fn sdsd<S: PlanningState>(tree: &Tree<S>, state: &S, threshold: f64) -> Result<Verdict, CriteriaError> {
    let d = distance_to_samples(state, tree.root().sampled_states())?;
    Ok(Verdict::keep_unless(d > threshold, Reason::DistanceExceeded))
}

/// Mahalanobis distance from `state` to the empirical distribution of `samples`.
pub fn distance_to_samples<S: PlanningState>(state: &S, samples: &[S]) -> Result<f64, CriteriaError> {
    let features: Vec<Vec<f64>> = samples.iter().map(PlanningState::features).collect();
    let (mu, cov) = mean_and_covariance(&features);
    mahalanobis(&state.features(), &mu, &cov)
}

/// Discard iff the sample variance of `action`'s backed-up returns at the
/// root exceeds `threshold`.
pub fn rdv<S: PlanningState>(tree: &Tree<S>, action: Action, threshold: f64) -> Verdict {
    let returns = &tree.root().action(action).returns;
    let var = if returns.len() < 2 { 0.0 } else { sample_variance(returns) };
    Verdict::keep_unless(var > threshold, Reason::ReturnVarianceExceeded)
}

/// `sqrt((x - mu)^T cov^-1 (x - mu))`. A covariance with an eigenvalue
/// below [`COVARIANCE_RIDGE`] is replaced by `cov + eps I` first.
pub fn mahalanobis(x: &[f64], mu: &[f64], cov: &DMatrix<f64>) -> Result<f64, CriteriaError> {
    let n = x.len();
    if mu.len() != n {
        return Err(CriteriaError::DimensionMismatch(n, mu.len()));
    }
    if cov.nrows() != n || cov.ncols() != n {
        return Err(CriteriaError::DimensionMismatch(n, cov.nrows()));
    }
    let diff = DVector::from_iterator(n, x.iter().zip(mu).map(|(a, b)| a - b));
    let min_eigen = cov.clone().symmetric_eigen().eigenvalues.min();
    let reg = if min_eigen < COVARIANCE_RIDGE { cov + DMatrix::identity(n, n) * COVARIANCE_RIDGE } else { cov.clone() };
    let solved = match reg.clone().cholesky() {
        Some(ch) => ch.solve(&diff),
        // Only reachable when rounding leaves an eigenvalue below -eps.
        None => reg.pseudo_inverse(1e-12).expect("svd of a finite matrix") * &diff,
    };
    Ok(diff.dot(&solved).max(0.0).sqrt())
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased (n - 1) sample variance. Zero for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Mean vector and unbiased covariance of equal-length rows. The covariance
/// is zero with fewer than two rows.
pub fn mean_and_covariance(rows: &[Vec<f64>]) -> (Vec<f64>, DMatrix<f64>) {
    let dim = rows.first().map_or(0, Vec::len);
    let n = rows.len();
    let mut mu = vec![0.0; dim];
    for r in rows {
        for (m, v) in mu.iter_mut().zip(r) {
            *m += v;
        }
    }
    mu.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = DMatrix::zeros(dim, dim);
    if n >= 2 {
        for r in rows {
            let d = DVector::from_iterator(dim, r.iter().zip(&mu).map(|(v, m)| v - m));
            cov += &d * d.transpose();
        }
        cov /= (n - 1) as f64;
    }
    (mu, cov)
}
