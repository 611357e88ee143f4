//! The 1D track: a five-cell discrete corridor and its continuous extension.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};

use crate::mdp::{Action, GenerativeModel, PlanningState, RolloutPolicy, TransitionOutcome};

pub const RIGHT: Action = Action(0);
pub const LEFT: Action = Action(1);

/// Cell index on the discrete track, `0..=4`. Cells 0 and 4 are terminal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell(pub u8);

impl PlanningState for Cell {
    const DISCRETE: bool = true;

    fn features(&self) -> Vec<f64> {
        vec![f64::from(self.0)]
    }
}

/// Five cells `s0..s4`, start in `s2`. Moving into either end pays +1 and
/// terminates; with probability `q` the agent moves the opposite way.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteTrack1D {
    pub misstep: f64,
}

impl DiscreteTrack1D {
    pub const START: Cell = Cell(2);
    pub const LAST: u8 = 4;

    pub fn new(misstep: f64) -> Self {
        Self { misstep }
    }
}

fn direction(action: Action) -> i32 {
    if action == RIGHT {
        1
    } else {
        -1
    }
}

impl GenerativeModel for DiscreteTrack1D {
    type State = Cell;

    fn num_actions(&self) -> usize {
        2
    }

    fn is_terminal(&self, state: &Cell) -> bool {
        state.0 == 0 || state.0 >= Self::LAST
    }

    fn transition(&self, state: &Cell, action: Action, rng: &mut dyn RngCore) -> TransitionOutcome<Cell> {
        let mut step = direction(action);
        if rng.random_bool(self.misstep) {
            step = -step;
        }
        let next = Cell((i32::from(state.0) + step) as u8);
        let terminal = self.is_terminal(&next);
        TransitionOutcome { next_state: next, reward: if terminal { 1.0 } else { 0.0 }, terminal }
    }
}

/// Optimal policy for `q < 0.5`: head for the nearer end, random in the middle.
#[derive(Clone, Copy, Debug, Default)]
pub struct TrackOptimal;

impl RolloutPolicy<DiscreteTrack1D> for TrackOptimal {
    fn choose(&self, _model: &DiscreteTrack1D, state: &Cell, rng: &mut dyn RngCore) -> Action {
        match state.0.cmp(&2) {
            std::cmp::Ordering::Less => LEFT,
            std::cmp::Ordering::Greater => RIGHT,
            std::cmp::Ordering::Equal => Action(rng.random_range(0..2)),
        }
    }
}

/// Position on the continuous track.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Position(pub f64);

impl PlanningState for Position {
    const DISCRETE: bool = false;

    fn features(&self) -> Vec<f64> {
        vec![self.0]
    }
}

/// Track of width 50 starting at 25. Each move is one unit (reversed with
/// probability `q`) plus Gaussian noise. Reaching either boundary pays +1.
#[derive(Clone, Debug)]
pub struct ContinuousTrack1D {
    pub misstep: f64,
    pub sigma_noise: f64,
    noise: Option<Normal<f64>>,
}

impl ContinuousTrack1D {
    pub const WIDTH: f64 = 50.0;
    pub const START: Position = Position(25.0);

    pub fn new(misstep: f64, sigma_noise: f64) -> Self {
        let noise = (sigma_noise > 0.0).then(|| Normal::new(0.0, sigma_noise).expect("finite sigma"));
        Self { misstep, sigma_noise, noise }
    }
}

impl GenerativeModel for ContinuousTrack1D {
    type State = Position;

    fn num_actions(&self) -> usize {
        2
    }

    fn is_terminal(&self, state: &Position) -> bool {
        state.0 <= 0.0 || state.0 >= Self::WIDTH
    }

    fn transition(&self, state: &Position, action: Action, rng: &mut dyn RngCore) -> TransitionOutcome<Position> {
        let mut step = f64::from(direction(action));
        if rng.random_bool(self.misstep) {
            step = -step;
        }
        let eps = self.noise.map_or(0.0, |n| n.sample(rng));
        let next = Position(state.0 + step + eps);
        let terminal = self.is_terminal(&next);
        TransitionOutcome { next_state: next, reward: if terminal { 1.0 } else { 0.0 }, terminal }
    }
}

impl RolloutPolicy<ContinuousTrack1D> for TrackOptimal {
    fn choose(&self, _model: &ContinuousTrack1D, state: &Position, rng: &mut dyn RngCore) -> Action {
        let mid = ContinuousTrack1D::WIDTH / 2.0;
        if state.0 < mid {
            LEFT
        } else if state.0 > mid {
            RIGHT
        } else {
            Action(rng.random_range(0..2))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{sample_transition, stream, MdpError};

    #[test]
    fn discrete_examples() {
        let mut rng = stream(1, 0);
        let det = DiscreteTrack1D::new(0.0);
        let flip = DiscreteTrack1D::new(1.0);
        let out = det.transition(&Cell(2), RIGHT, &mut rng);
        assert_eq!(out, TransitionOutcome { next_state: Cell(3), reward: 0.0, terminal: false });
        let out = flip.transition(&Cell(2), RIGHT, &mut rng);
        assert_eq!(out, TransitionOutcome { next_state: Cell(1), reward: 0.0, terminal: false });
        let out = det.transition(&Cell(3), RIGHT, &mut rng);
        assert_eq!(out, TransitionOutcome { next_state: Cell(4), reward: 1.0, terminal: true });
        let out = det.transition(&Cell(1), LEFT, &mut rng);
        assert_eq!(out, TransitionOutcome { next_state: Cell(0), reward: 1.0, terminal: true });
        let out = flip.transition(&Cell(2), LEFT, &mut rng);
        assert_eq!(out, TransitionOutcome { next_state: Cell(3), reward: 0.0, terminal: false });
    }

    #[test]
    fn discrete_terminal_rejected() {
        let mut rng = stream(1, 0);
        let env = DiscreteTrack1D::new(0.2);
        assert_eq!(sample_transition(&env, &Cell(4), LEFT, &mut rng), Err(MdpError::TerminalState));
        assert_eq!(sample_transition(&env, &Cell(0), RIGHT, &mut rng), Err(MdpError::TerminalState));
    }

    #[test]
    fn continuous_examples() {
        let mut rng = stream(1, 0);
        let det = ContinuousTrack1D::new(0.0, 0.0);
        let out = det.transition(&Position(25.0), RIGHT, &mut rng);
        assert_eq!(out, TransitionOutcome { next_state: Position(26.0), reward: 0.0, terminal: false });
        let out = det.transition(&Position(49.5), RIGHT, &mut rng);
        assert_eq!(out, TransitionOutcome { next_state: Position(50.5), reward: 1.0, terminal: true });
        let flip = ContinuousTrack1D::new(1.0, 0.0);
        let out = flip.transition(&Position(25.0), RIGHT, &mut rng);
        assert_eq!(out, TransitionOutcome { next_state: Position(24.0), reward: 0.0, terminal: false });
    }

    #[test]
    fn continuous_noise_is_centred() {
        let mut rng = stream(3, 0);
        let env = ContinuousTrack1D::new(0.0, 0.1);
        let n = 20_000;
        let mean =
            (0..n).map(|_| env.transition(&Position(25.0), RIGHT, &mut rng).next_state.0).sum::<f64>() / n as f64;
        // standard error 0.1 / sqrt(2e4) ~ 7e-4
        assert!((mean - 26.0).abs() < 4e-3, "{mean}");
    }
}
