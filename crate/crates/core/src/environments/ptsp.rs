//! Physical travelling salesman: reach every waypoint of a walled map.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};

use super::map::{ContinuousMap, GridMap};
use crate::mdp::{Action, GenerativeModel, PlanningState, RolloutPolicy, TransitionOutcome};

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// With probability `q`, replace `action` by one of the other actions.
fn apply_misstep(action: Action, num_actions: usize, q: f64, rng: &mut dyn RngCore) -> Action {
    if q > 0.0 && rng.random_bool(q) {
        let other = rng.random_range(0..num_actions - 1);
        Action(if other >= action.0 { other + 1 } else { other })
    } else {
        action
    }
}

/// `(x, y, theta, v)` plus the episode bookkeeping the dynamics need.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PtspState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    /// Bit `i` set once waypoint `i` has been reached.
    pub visited: u32,
    pub tick: u32,
}

impl PlanningState for PtspState {
    const DISCRETE: bool = false;

    fn features(&self) -> Vec<f64> {
        vec![self.x, self.y, self.theta, self.v]
    }
}

pub const TURN_LEFT: Action = Action(0);
pub const STRAIGHT: Action = Action(1);
pub const TURN_RIGHT: Action = Action(2);

pub const DEFAULT_D_THETA: f64 = 0.3;
pub const DEFAULT_SPEED: f64 = 0.1;

/// Continuous PTSP. Actions `{+dtheta, 0, -dtheta}` steer a vehicle moving
/// at constant speed. Rewards: +1 per new waypoint, -1 per wall crash.
#[derive(Clone, Debug)]
pub struct ContinuousPtsp {
    pub map: ContinuousMap,
    pub misstep: f64,
    pub sigma_noise: f64,
    pub d_theta: f64,
    noise: Option<Normal<f64>>,
}

impl ContinuousPtsp {
    pub fn new(map: ContinuousMap, misstep: f64, sigma_noise: f64, d_theta: f64) -> Self {
        let noise = (sigma_noise > 0.0).then(|| Normal::new(0.0, sigma_noise).expect("finite sigma"));
        Self { map, misstep, sigma_noise, d_theta, noise }
    }

    pub fn start_state(&self) -> PtspState {
        PtspState { x: self.map.start[0], y: self.map.start[1], theta: 0.0, v: DEFAULT_SPEED, visited: 0, tick: 0 }
    }

    fn all_visited(&self, visited: u32) -> bool {
        visited.count_ones() as usize == self.map.waypoints.len()
    }

    /// Moves a noisy position back to a free point: into the map, out of
    /// walls, and never across a wall from `from`.
    fn settle(&self, from: (f64, f64), to: (f64, f64)) -> (f64, f64) {
        let mut p = (to.0.clamp(0.0, self.map.width), to.1.clamp(0.0, self.map.height));
        if let Some(w) = self.map.walls.iter().find(|w| w.strictly_contains(p.0, p.1)) {
            p = w.nearest_face_point(p.0, p.1);
        }
        if self.map.inside_wall(p.0, p.1) || self.map.segment_blocked(from, p) {
            from
        } else {
            p
        }
    }
}

impl GenerativeModel for ContinuousPtsp {
    type State = PtspState;

    fn num_actions(&self) -> usize {
        3
    }

    fn is_terminal(&self, s: &PtspState) -> bool {
        self.all_visited(s.visited) || s.tick >= self.map.time_limit
    }

    fn transition(&self, s: &PtspState, action: Action, rng: &mut dyn RngCore) -> TransitionOutcome<PtspState> {
        let action = apply_misstep(action, 3, self.misstep, rng);
        let turn = match action {
            TURN_LEFT => self.d_theta,
            TURN_RIGHT => -self.d_theta,
            _ => 0.0,
        };
        let mut theta = normalize_angle(s.theta + turn);
        let here = (s.x, s.y);
        let candidate = (s.x + s.v * theta.cos(), s.y + s.v * theta.sin());
        let (mut pos, mut reward) = if self.map.segment_blocked(here, candidate) {
            theta = normalize_angle(theta + PI);
            (here, -1.0)
        } else {
            (candidate, 0.0)
        };
        if let Some(noise) = self.noise {
            let noisy = (pos.0 + noise.sample(rng), pos.1 + noise.sample(rng));
            theta = normalize_angle(theta + noise.sample(rng));
            pos = self.settle(pos, noisy);
        }
        let mut visited = s.visited;
        let r2 = self.map.capture_radius * self.map.capture_radius;
        for (i, &[wx, wy]) in self.map.waypoints.iter().enumerate() {
            let bit = 1u32 << i;
            if visited & bit == 0 && (pos.0 - wx).powi(2) + (pos.1 - wy).powi(2) <= r2 {
                visited |= bit;
                reward += 1.0;
            }
        }
        let next = PtspState { x: pos.0, y: pos.1, theta, v: s.v, visited, tick: s.tick + 1 };
        let terminal = self.is_terminal(&next);
        TransitionOutcome { next_state: next, reward, terminal }
    }
}

/// Keeps the current heading.
#[derive(Clone, Copy, Debug, Default)]
pub struct GoStraight;

impl RolloutPolicy<ContinuousPtsp> for GoStraight {
    fn choose(&self, _model: &ContinuousPtsp, _state: &PtspState, _rng: &mut dyn RngCore) -> Action {
        STRAIGHT
    }
}

pub const GRID_RIGHT: Action = Action(0);
pub const GRID_DOWN: Action = Action(1);
pub const GRID_LEFT: Action = Action(2);
pub const GRID_UP: Action = Action(3);

const GRID_MOVES: [(i32, i32); 4] = [(1, 0), (0, -1), (-1, 0), (0, 1)];
const GRID_HEADINGS: [f64; 4] = [0.0, -FRAC_PI_2, PI, FRAC_PI_2];

/// Grid PTSP state. Speed is fixed to one cell per tick; `heading` is the
/// direction of the last move attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridState {
    pub x: i32,
    pub y: i32,
    pub heading: u8,
    pub visited: u32,
    pub tick: u32,
}

impl PlanningState for GridState {
    const DISCRETE: bool = true;

    fn features(&self) -> Vec<f64> {
        vec![f64::from(self.x), f64::from(self.y), GRID_HEADINGS[self.heading as usize], 1.0]
    }
}

/// Grid PTSP. Actions move to the adjacent cell in `{right, down, left, up}`;
/// blocked moves leave the agent in place without penalty.
#[derive(Clone, Debug)]
pub struct DiscretePtsp {
    pub map: GridMap,
    pub misstep: f64,
}

impl DiscretePtsp {
    pub fn new(map: GridMap, misstep: f64) -> Self {
        Self { map, misstep }
    }

    pub fn start_state(&self) -> GridState {
        GridState { x: self.map.start[0], y: self.map.start[1], heading: 0, visited: 0, tick: 0 }
    }

    fn target(s: &GridState, action: Action) -> (i32, i32) {
        let (dx, dy) = GRID_MOVES[action.0];
        (s.x + dx, s.y + dy)
    }
}

impl GenerativeModel for DiscretePtsp {
    type State = GridState;

    fn num_actions(&self) -> usize {
        4
    }

    fn is_terminal(&self, s: &GridState) -> bool {
        s.visited.count_ones() as usize == self.map.waypoints.len() || s.tick >= self.map.time_limit
    }

    fn transition(&self, s: &GridState, action: Action, rng: &mut dyn RngCore) -> TransitionOutcome<GridState> {
        let action = apply_misstep(action, 4, self.misstep, rng);
        let (tx, ty) = Self::target(s, action);
        let (x, y) = if self.map.is_wall(tx, ty) { (s.x, s.y) } else { (tx, ty) };
        let mut visited = s.visited;
        let mut reward = 0.0;
        if let Some(i) = self.map.waypoints.iter().position(|&[wx, wy]| wx == x && wy == y) {
            if visited & (1 << i) == 0 {
                visited |= 1 << i;
                reward = 1.0;
            }
        }
        let next = GridState { x, y, heading: action.0 as u8, visited, tick: s.tick + 1 };
        let terminal = self.is_terminal(&next);
        TransitionOutcome { next_state: next, reward, terminal }
    }

    fn action_available(&self, s: &GridState, action: Action) -> bool {
        let (tx, ty) = Self::target(s, action);
        !self.map.is_wall(tx, ty)
    }
}

impl RolloutPolicy<DiscretePtsp> for GoStraight {
    fn choose(&self, _model: &DiscretePtsp, state: &GridState, _rng: &mut dyn RngCore) -> Action {
        Action(state.heading as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::map::Rect;
    use crate::mdp::stream;

    fn open_map() -> ContinuousMap {
        ContinuousMap {
            width: 4.0,
            height: 4.0,
            start: [1.1, 1.1],
            walls: vec![Rect { x_min: 1.25, y_min: 0.5, x_max: 1.5, y_max: 1.5 }],
            waypoints: vec![[3.5, 3.5], [0.5, 3.5]],
            capture_radius: 0.3,
            time_limit: 300,
        }
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(normalize_angle(PI), PI);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-12);
        assert!((normalize_angle(0.3) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn straight_move() {
        let mut map = open_map();
        map.walls.clear();
        let env = ContinuousPtsp::new(map, 0.0, 0.0, DEFAULT_D_THETA);
        let s = env.start_state();
        let out = env.transition(&s, STRAIGHT, &mut stream(0, 0));
        assert!((out.next_state.x - 1.2).abs() < 1e-12);
        assert!((out.next_state.y - 1.1).abs() < 1e-12);
        assert_eq!(out.reward, 0.0);
        assert!(!out.terminal);
    }

    #[test]
    fn crash_flips_heading() {
        let env = ContinuousPtsp::new(open_map(), 0.0, 0.0, DEFAULT_D_THETA);
        let s = PtspState { x: 1.2, ..env.start_state() };
        let out = env.transition(&s, STRAIGHT, &mut stream(0, 0));
        assert_eq!((out.next_state.x, out.next_state.y), (1.2, 1.1));
        assert!((out.next_state.theta - PI).abs() < 1e-12);
        assert_eq!(out.reward, -1.0);
    }

    #[test]
    fn last_waypoint_terminates() {
        let env = ContinuousPtsp::new(open_map(), 0.0, 0.0, DEFAULT_D_THETA);
        let s = PtspState { x: 3.1, y: 3.5, visited: 0b10, ..env.start_state() };
        let out = env.transition(&s, STRAIGHT, &mut stream(0, 0));
        assert_eq!(out.reward, 1.0);
        assert!(out.terminal);
        assert_eq!(out.next_state.visited, 0b11);
    }

    #[test]
    fn time_limit_terminates() {
        let env = ContinuousPtsp::new(open_map(), 0.0, 0.0, DEFAULT_D_THETA);
        let s = PtspState { tick: 299, x: 2.0, y: 3.0, ..env.start_state() };
        assert!(env.transition(&s, STRAIGHT, &mut stream(0, 0)).terminal);
    }

    #[test]
    fn misstep_never_keeps_action() {
        let mut rng = stream(5, 0);
        for a in 0..4 {
            for _ in 0..200 {
                assert_ne!(apply_misstep(Action(a), 4, 1.0, &mut rng), Action(a));
            }
        }
    }

    fn grid() -> DiscretePtsp {
        let map = GridMap {
            width: 8,
            height: 8,
            start: [3, 3],
            walls: vec![[3, 4, 3, 4]],
            waypoints: vec![[5, 3], [0, 0]],
            time_limit: 100,
        };
        DiscretePtsp::new(map, 0.0)
    }

    #[test]
    fn grid_moves() {
        let env = grid();
        let s = env.start_state();
        let mut rng = stream(0, 0);
        let out = env.transition(&s, GRID_RIGHT, &mut rng);
        assert_eq!((out.next_state.x, out.next_state.y, out.reward), (4, 3, 0.0));
        let out = env.transition(&s, GRID_UP, &mut rng);
        assert_eq!((out.next_state.x, out.next_state.y, out.reward), (3, 3, 0.0));
        assert!(!env.action_available(&s, GRID_UP));
        assert!(env.action_available(&s, GRID_DOWN));
        let s4 = GridState { x: 4, ..s };
        let out = env.transition(&s4, GRID_RIGHT, &mut rng);
        assert_eq!(out.reward, 1.0);
        assert_eq!(out.next_state.visited, 1);
        // revisiting pays nothing
        let back = GridState { x: 4, ..out.next_state };
        assert_eq!(env.transition(&back, GRID_RIGHT, &mut rng).reward, 0.0);
    }

    #[test]
    fn grid_border_is_wall() {
        let env = grid();
        let s = GridState { x: 0, y: 2, ..env.start_state() };
        let out = env.transition(&s, GRID_LEFT, &mut stream(0, 0));
        assert_eq!((out.next_state.x, out.next_state.y), (0, 2));
    }
}
