//! Benchmark environments.

pub mod map;
pub mod ptsp;
pub mod track1d;

pub use map::{ContinuousMap, GridMap, MapError, Rect};
pub use ptsp::{ContinuousPtsp, DiscretePtsp, GoStraight, GridState, PtspState};
pub use track1d::{Cell, ContinuousTrack1D, DiscreteTrack1D, Position, TrackOptimal};

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;
    use crate::mdp::{stream, Action, GenerativeModel};

    #[test]
    fn discrete_track_misstep_rate() {
        for q in [0.05, 0.3, 0.5] {
            let env = DiscreteTrack1D::new(q);
            let mut rng = stream(11, 0);
            let n = 100_000;
            let missteps =
                (0..n).filter(|_| env.transition(&Cell(2), track1d::RIGHT, &mut rng).next_state == Cell(1)).count();
            let rate = missteps as f64 / n as f64;
            let se = (q * (1.0 - q) / n as f64).sqrt();
            assert!((rate - q).abs() <= 3.0 * se, "q={q} rate={rate}");
        }
    }

    #[test]
    fn discrete_track_outcome_support() {
        // Only two outcomes are possible from s2/right: s3 (intended) or s1.
        let env = DiscreteTrack1D::new(0.25);
        let mut rng = stream(2, 0);
        for _ in 0..1000 {
            let out = env.transition(&Cell(2), track1d::RIGHT, &mut rng);
            assert!(out.next_state == Cell(3) || out.next_state == Cell(1));
            assert_eq!(out.reward, 0.0);
            assert!(!out.terminal);
        }
    }

    #[test]
    fn ptsp_misstep_rate() {
        let q = 0.3;
        let mut map = ContinuousMap::bundled();
        map.walls.clear();
        let env = ContinuousPtsp::new(map, q, 0.0, ptsp::DEFAULT_D_THETA);
        let s = env.start_state();
        let mut rng = stream(4, 0);
        let n = 100_000;
        let missteps = (0..n).filter(|_| env.transition(&s, ptsp::STRAIGHT, &mut rng).next_state.theta != 0.0).count();
        let rate = missteps as f64 / n as f64;
        let se = (q * (1.0 - q) / n as f64).sqrt();
        assert!((rate - q).abs() <= 3.0 * se, "rate={rate}");
    }

    #[test]
    fn ptsp_walls_never_entered() {
        let env = ContinuousPtsp::new(ContinuousMap::bundled(), 0.3, 0.05, ptsp::DEFAULT_D_THETA);
        let mut rng = stream(8, 0);
        for _ in 0..10_000 {
            let mut s = env.start_state();
            let mut waypoint_reward = 0.0;
            while !env.is_terminal(&s) && s.tick < 60 {
                let a = Action(rng.random_range(0..3));
                let out = env.transition(&s, a, &mut rng);
                if out.reward > 0.0 {
                    waypoint_reward += out.reward;
                }
                s = out.next_state;
                assert!(!env.map.inside_wall(s.x, s.y), "{s:?}");
                assert!(env.map.in_bounds(s.x, s.y), "{s:?}");
                assert!(s.theta > -std::f64::consts::PI && s.theta <= std::f64::consts::PI);
            }
            assert!(waypoint_reward <= env.map.waypoints.len() as f64);
        }
    }

    #[test]
    fn grid_waypoint_reward_bounded() {
        let env = DiscretePtsp::new(GridMap::bundled(), 0.2);
        let mut rng = stream(9, 0);
        for _ in 0..2_000 {
            let mut s = env.start_state();
            let mut total = 0.0;
            while !env.is_terminal(&s) {
                let out = env.transition(&s, Action(rng.random_range(0..4)), &mut rng);
                total += out.reward;
                s = out.next_state;
                assert!(!env.map.is_wall(s.x, s.y));
            }
            assert!(total <= 6.0);
        }
    }
}
