//! Episode controllers: OLUCT, which re-plans at every step, and OLTA, which
//! keeps following the sub-tree under the recommended action until a
//! decision criterion discards it.
//!
//! Planning and execution use separate models and separate random streams
//! derived from the episode seed. Only planning transitions are counted in
//! `model_calls`, and wall time covers tree building and criterion
//! evaluation only.

use std::time::{Duration, Instant};

use rand::RngCore;
use serde::Serialize;

use crate::criteria::{decide, CriteriaError, Criterion, Reason};
use crate::mdp::{
    sample_transition, stream, Action, CountingModel, GenerativeModel, MdpError, PlannerParams, RolloutPolicy,
};
use crate::tree::{Tree, TreeError};

/// Stream id of the planning stream of an episode.
pub const PLANNING_STREAM: u64 = 0;
/// Stream id of the real-environment stream of an episode.
pub const WORLD_STREAM: u64 = 1;

/// Upper bound on episode length for environments without a time limit.
pub const DEFAULT_MAX_STEPS: u64 = 10_000;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ControlError {
    #[error("episode cannot start from a terminal state")]
    TerminalStart,
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Model(#[from] MdpError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeSettings {
    pub planner: PlannerParams,
    /// Episodes still running after this many steps are cut off.
    pub max_steps: u64,
}

impl EpisodeSettings {
    pub fn new(planner: PlannerParams) -> Self {
        Self { planner, max_steps: DEFAULT_MAX_STEPS }
    }
}

/// Per-episode measurements.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpisodeRecord {
    /// Steps to termination (time-limit steps on timeout).
    pub loss: f64,
    /// Planning calls to the generative model.
    pub model_calls: u64,
    pub wall_time_us: u64,
    /// Tree builds, including the initial one.
    pub replans: u64,
    pub steps: u64,
    pub seed: u64,
    /// Whether the episode hit `max_steps` before a terminal state.
    pub truncated: bool,
}

/// Why a tree was built at a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanCause {
    Initial,
    /// OLUCT re-plans unconditionally.
    Systematic,
    Discarded(Reason),
    /// The kept sub-tree had no tried action to recommend.
    NoRecommendation,
    /// The previous recommendation had no child to descend into.
    MissingChild,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StepLog {
    pub action: Action,
    /// `None` when the step reused the sub-tree.
    pub planned: Option<PlanCause>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeOutcome {
    pub record: EpisodeRecord,
    pub steps: Vec<StepLog>,
}

impl EpisodeOutcome {
    pub fn actions(&self) -> Vec<Action> {
        self.steps.iter().map(|s| s.action).collect()
    }
}

struct Accounting {
    planning: Duration,
    replans: u64,
    log: Vec<StepLog>,
}

impl Accounting {
    fn new() -> Self {
        Self { planning: Duration::ZERO, replans: 0, log: Vec::new() }
    }

    fn finish<M: GenerativeModel>(self, model: &CountingModel<M>, seed: u64, truncated: bool) -> EpisodeOutcome {
        let steps = self.log.len() as u64;
        EpisodeOutcome {
            record: EpisodeRecord {
                loss: steps as f64,
                model_calls: model.calls(),
                wall_time_us: self.planning.as_micros() as u64,
                replans: self.replans,
                steps,
                seed,
                truncated,
            },
            steps: self.log,
        }
    }
}

fn plan<M, P>(
    model: &CountingModel<M>,
    state: &M::State,
    params: &PlannerParams,
    policy: &P,
    rng: &mut dyn RngCore,
    acc: &mut Accounting,
) -> Result<(Tree<M::State>, Action), ControlError>
where
    M: GenerativeModel,
    P: RolloutPolicy<M> + ?Sized,
{
    let tree = Tree::build(model, state.clone(), params, policy, rng)?;
    let action = tree.recommended_action(rng)?;
    acc.replans += 1;
    Ok((tree, action))
}

/// Builds a fresh tree at every step and plays its recommendation.
pub fn run_oluct<M, W, P>(
    model: &M,
    world: &W,
    start: M::State,
    settings: &EpisodeSettings,
    policy: &P,
    seed: u64,
) -> Result<EpisodeOutcome, ControlError>
where
    M: GenerativeModel + Clone,
    W: GenerativeModel<State = M::State>,
    P: RolloutPolicy<M> + ?Sized,
{
    if world.is_terminal(&start) {
        return Err(ControlError::TerminalStart);
    }
    let counted = CountingModel::new(model.clone());
    let mut planning_rng = stream(seed, PLANNING_STREAM);
    let mut world_rng = stream(seed, WORLD_STREAM);
    let mut acc = Accounting::new();
    let mut state = start;
    while !world.is_terminal(&state) {
        if acc.log.len() as u64 >= settings.max_steps {
            return Ok(acc.finish(&counted, seed, true));
        }
        let timer = Instant::now();
        let (_, action) = plan(&counted, &state, &settings.planner, policy, &mut planning_rng, &mut acc)?;
        acc.planning += timer.elapsed();
        let cause = if acc.log.is_empty() { PlanCause::Initial } else { PlanCause::Systematic };
        acc.log.push(StepLog { action, planned: Some(cause) });
        state = sample_transition(world, &state, action, &mut world_rng)?.next_state;
    }
    Ok(acc.finish(&counted, seed, false))
}

/// Builds a tree at the start state, then at every step either keeps the
/// sub-tree reached by the last recommendation (if `criterion` accepts it
/// for the current real state) or re-plans from the current state.
///
/// A freshly built tree is never tested; the criterion only judges reused
/// sub-trees.
pub fn run_olta<M, W, P>(
    model: &M,
    world: &W,
    start: M::State,
    settings: &EpisodeSettings,
    criterion: &Criterion,
    policy: &P,
    seed: u64,
) -> Result<EpisodeOutcome, ControlError>
where
    M: GenerativeModel + Clone,
    W: GenerativeModel<State = M::State>,
    P: RolloutPolicy<M> + ?Sized,
{
    if world.is_terminal(&start) {
        return Err(ControlError::TerminalStart);
    }
    let counted = CountingModel::new(model.clone());
    let mut planning_rng = stream(seed, PLANNING_STREAM);
    let mut world_rng = stream(seed, WORLD_STREAM);
    let mut acc = Accounting::new();
    let mut state = start;

    let timer = Instant::now();
    let (tree, first) = plan(&counted, &state, &settings.planner, policy, &mut planning_rng, &mut acc)?;
    acc.planning += timer.elapsed();
    let mut pending = Some((tree, first, PlanCause::Initial));
    // Sub-tree under the previous recommendation, or why there is none.
    let mut reused: Result<Tree<M::State>, PlanCause> = Err(PlanCause::MissingChild);

    while !world.is_terminal(&state) {
        if acc.log.len() as u64 >= settings.max_steps {
            return Ok(acc.finish(&counted, seed, true));
        }
        let timer = Instant::now();
        let (tree, action, planned) = match pending.take() {
            Some((tree, action, cause)) => (tree, action, Some(cause)),
            None => {
                let kept = match reused {
                    Ok(sub) => match decide(criterion, model, &sub, &state, &mut planning_rng) {
                        Ok(d) if d.verdict.keep => Ok((sub, d.action.expect("kept decisions carry an action"))),
                        Ok(d) => Err(PlanCause::Discarded(d.verdict.reason)),
                        Err(CriteriaError::Tree(TreeError::NoTriedAction)) => Err(PlanCause::NoRecommendation),
                        Err(e) => return Err(e.into()),
                    },
                    Err(cause) => Err(cause),
                };
                match kept {
                    Ok((sub, action)) => (sub, action, None),
                    Err(cause) => {
                        let (tree, action) =
                            plan(&counted, &state, &settings.planner, policy, &mut planning_rng, &mut acc)?;
                        (tree, action, Some(cause))
                    }
                }
            }
        };
        reused = tree.sub_tree(action).map_err(|_| PlanCause::MissingChild);
        acc.planning += timer.elapsed();
        acc.log.push(StepLog { action, planned });
        state = sample_transition(world, &state, action, &mut world_rng)?.next_state;
    }
    Ok(acc.finish(&counted, seed, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::track1d::{Cell, DiscreteTrack1D, TrackOptimal};

    fn settings(n: usize) -> EpisodeSettings {
        EpisodeSettings::new(PlannerParams { budget: n, exploration: 0.7, discount: 0.9, horizon: 10 })
    }

    #[test]
    fn deterministic_track_takes_two_steps() {
        let env = DiscreteTrack1D::new(0.0);
        for seed in 0..50 {
            let oluct = run_oluct(&env, &env, Cell(2), &settings(20), &TrackOptimal, seed).unwrap();
            assert_eq!(oluct.record.loss, 2.0);
            assert_eq!(oluct.record.replans, 2);
            let olta = run_olta(&env, &env, Cell(2), &settings(20), &Criterion::Plain, &TrackOptimal, seed).unwrap();
            assert_eq!(olta.record.loss, 2.0);
            assert!(olta.record.replans <= 2);
            assert!(olta.record.model_calls <= oluct.record.model_calls);
        }
    }

    #[test]
    fn oluct_calls_at_least_budget_per_step() {
        let env = DiscreteTrack1D::new(0.3);
        for seed in 0..20 {
            let out = run_oluct(&env, &env, Cell(2), &settings(20), &TrackOptimal, seed).unwrap();
            assert_eq!(out.record.replans, out.record.steps);
            assert!(out.record.model_calls >= out.record.steps * 20);
        }
    }

    #[test]
    fn always_discard_matches_oluct() {
        let env = DiscreteTrack1D::new(0.25);
        for seed in 0..30 {
            let a = run_oluct(&env, &env, Cell(2), &settings(20), &TrackOptimal, seed).unwrap();
            let b =
                run_olta(&env, &env, Cell(2), &settings(20), &Criterion::AlwaysDiscard, &TrackOptimal, seed).unwrap();
            assert_eq!(a.actions(), b.actions());
            assert_eq!(a.record.loss, b.record.loss);
            assert_eq!(a.record.model_calls, b.record.model_calls);
            assert_eq!(a.record.replans, b.record.replans);
        }
    }

    #[test]
    fn always_keep_builds_once_on_deterministic_track() {
        let env = DiscreteTrack1D::new(0.0);
        for seed in 0..20 {
            let out =
                run_olta(&env, &env, Cell(2), &settings(200), &Criterion::AlwaysKeep, &TrackOptimal, seed).unwrap();
            assert_eq!(out.record.replans, 1);
            assert_eq!(out.record.loss, 2.0);
        }
    }

    #[test]
    fn terminal_start_rejected() {
        let env = DiscreteTrack1D::new(0.0);
        assert_eq!(
            run_oluct(&env, &env, Cell(0), &settings(5), &TrackOptimal, 0).unwrap_err(),
            ControlError::TerminalStart
        );
        assert_eq!(
            run_olta(&env, &env, Cell(4), &settings(5), &Criterion::Plain, &TrackOptimal, 0).unwrap_err(),
            ControlError::TerminalStart
        );
    }

    #[test]
    fn replans_bounded_by_steps() {
        let env = DiscreteTrack1D::new(0.4);
        for seed in 0..50 {
            let out =
                run_olta(&env, &env, Cell(2), &settings(20), &Criterion::Sdv { threshold: 0.4 }, &TrackOptimal, seed)
                    .unwrap();
            assert!(out.record.replans <= out.record.steps + 1);
            assert!(out.record.model_calls >= out.record.replans);
            let builds = out.steps.iter().filter(|s| s.planned.is_some()).count() as u64;
            assert_eq!(builds, out.record.replans);
        }
    }

    #[test]
    fn max_steps_truncates() {
        let env = DiscreteTrack1D::new(0.5);
        let mut s = settings(4);
        s.max_steps = 1;
        let out = (0..20)
            .map(|seed| run_oluct(&env, &env, Cell(2), &s, &TrackOptimal, seed).unwrap())
            .find(|o| o.record.truncated)
            .expect("with q = 0.5 some episode needs more than one step");
        assert_eq!(out.record.steps, 1);
    }
}
