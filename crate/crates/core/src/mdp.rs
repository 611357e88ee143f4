//! State, action and generative-model abstractions shared by the planner,
//! the decision criteria and the environments.

use std::cell::Cell;
use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The random stream threaded explicitly through every stochastic operation.
pub type RandomStream = ChaCha8Rng;

/// Builds a stream from a 64-bit seed and a stream id. Different stream ids
/// with the same seed give independent sequences.
pub fn stream(seed: u64, stream_id: u64) -> RandomStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Index of an action in `[0, K)`. The action set does not depend on the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Action(pub usize);

impl Action {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// What the decision criteria are allowed to look at in a state.
pub trait PlanningState: Clone + fmt::Debug + PartialEq {
    /// Discrete states compare by exact equality and support mode counting.
    const DISCRETE: bool;

    /// Real-valued feature vector. All states of one model share a dimension.
    fn features(&self) -> Vec<f64>;
}

/// Result of one sampled transition.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionOutcome<S> {
    pub next_state: S,
    pub reward: f64,
    pub terminal: bool,
}

/// A simulator of the MDP. Implementations hold no mutable state; the call
/// counter lives in [`CountingModel`].
pub trait GenerativeModel {
    type State: PlanningState;

    fn num_actions(&self) -> usize;

    fn is_terminal(&self, state: &Self::State) -> bool;

    /// Samples `(s', r, terminal)` from `P(. | state, action)`. Callers
    /// guarantee `state` is not terminal and `action` is in range.
    fn transition(&self, state: &Self::State, action: Action, rng: &mut dyn RngCore) -> TransitionOutcome<Self::State>;

    /// Whether `action` is meaningful in `state`. Environments with blocked
    /// moves override this; criteria may discard a sub-tree whose
    /// recommendation is unavailable.
    fn action_available(&self, _state: &Self::State, _action: Action) -> bool {
        true
    }
}

impl<M: GenerativeModel + ?Sized> GenerativeModel for &M {
    type State = M::State;

    fn num_actions(&self) -> usize {
        (**self).num_actions()
    }

    fn is_terminal(&self, state: &Self::State) -> bool {
        (**self).is_terminal(state)
    }

    fn transition(&self, state: &Self::State, action: Action, rng: &mut dyn RngCore) -> TransitionOutcome<Self::State> {
        (**self).transition(state, action, rng)
    }

    fn action_available(&self, state: &Self::State, action: Action) -> bool {
        (**self).action_available(state, action)
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MdpError {
    #[error("cannot sample a transition from a terminal state")]
    TerminalState,
    #[error("action {action} out of range for {num_actions} actions")]
    ActionOutOfRange { action: usize, num_actions: usize },
    #[error("discount factor {0} outside [0, 1)")]
    InvalidDiscount(f64),
}

/// A generative model together with the number of transitions sampled from it.
#[derive(Debug)]
pub struct CountingModel<M> {
    inner: M,
    calls: Cell<u64>,
}

impl<M: GenerativeModel> CountingModel<M> {
    pub fn new(inner: M) -> Self {
        Self { inner, calls: Cell::new(0) }
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    pub fn calls(&self) -> u64 {
        self.calls.get()
    }

    pub fn reset_calls(&self) {
        self.calls.set(0);
    }

    pub fn num_actions(&self) -> usize {
        self.inner.num_actions()
    }

    pub fn is_terminal(&self, state: &M::State) -> bool {
        self.inner.is_terminal(state)
    }

    /// Samples one transition and increments the call counter by one.
    pub fn sample_transition(
        &self,
        state: &M::State,
        action: Action,
        rng: &mut dyn RngCore,
    ) -> Result<TransitionOutcome<M::State>, MdpError> {
        check_step(&self.inner, state, action)?;
        self.calls.set(self.calls.get() + 1);
        Ok(self.inner.transition(state, action, rng))
    }
}

/// Samples a transition without counting it. Used for the real-world step of
/// a controller, which is not a planning cost.
pub fn sample_transition<M: GenerativeModel>(
    model: &M,
    state: &M::State,
    action: Action,
    rng: &mut dyn RngCore,
) -> Result<TransitionOutcome<M::State>, MdpError> {
    check_step(model, state, action)?;
    Ok(model.transition(state, action, rng))
}

fn check_step<M: GenerativeModel>(model: &M, state: &M::State, action: Action) -> Result<(), MdpError> {
    if action.0 >= model.num_actions() {
        return Err(MdpError::ActionOutOfRange { action: action.0, num_actions: model.num_actions() });
    }
    if model.is_terminal(state) {
        return Err(MdpError::TerminalState);
    }
    Ok(())
}

/// `sum_k gamma^k * rewards[k]`; zero for an empty sequence.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> Result<f64, MdpError> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(MdpError::InvalidDiscount(gamma));
    }
    // Horner form, evaluated from the last reward backwards.
    Ok(rewards.iter().rev().fold(0.0, |acc, r| r + gamma * acc))
}

/// Planner settings shared by every tree build.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PlannerParams {
    /// Iterations per tree build.
    pub budget: usize,
    /// UCB exploration constant `C_p`.
    pub exploration: f64,
    pub discount: f64,
    /// Maximum rollout length of the default policy.
    pub horizon: usize,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self { budget: 20, exploration: 0.7, discount: 0.9, horizon: 10 }
    }
}

/// A rollout (default) policy.
pub trait RolloutPolicy<M: GenerativeModel> {
    fn choose(&self, model: &M, state: &M::State, rng: &mut dyn RngCore) -> Action;
}

/// Always plays the same action.
#[derive(Clone, Copy, Debug)]
pub struct FixedAction(pub Action);

impl<M: GenerativeModel> RolloutPolicy<M> for FixedAction {
    fn choose(&self, _model: &M, _state: &M::State, _rng: &mut dyn RngCore) -> Action {
        self.0
    }
}

/// Plays uniformly at random.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformRandom;

impl<M: GenerativeModel> RolloutPolicy<M> for UniformRandom {
    fn choose(&self, model: &M, _state: &M::State, rng: &mut dyn RngCore) -> Action {
        Action(rng.random_range(0..model.num_actions()))
    }
}

/// Picks one element uniformly. Draws from `rng` only when there is a choice
/// to make, so single candidates leave the stream untouched.
pub(crate) fn pick_uniform<T: Copy>(candidates: &[T], rng: &mut dyn RngCore) -> T {
    debug_assert!(!candidates.is_empty());
    if candidates.len() == 1 {
        candidates[0]
    } else {
        candidates[rng.random_range(0..candidates.len())]
    }
}
