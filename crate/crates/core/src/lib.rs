//! Open-loop UCT planning with sub-tree reuse across decision steps.
//!
//! [`tree`] builds open-loop search trees, [`criteria`] decides whether the
//! sub-tree under the played action may be reused, and [`controller`] runs
//! whole episodes with OLUCT (re-plan every step) or OLTA (reuse when the
//! criterion allows). [`bounds`] evaluates the failure-probability bounds,
//! [`environments`] holds the benchmark problems and [`harness`] drives
//! experiment grids.

pub mod bounds;
pub mod controller;
pub mod criteria;
pub mod environments;
pub mod harness;
pub mod mdp;
pub mod tree;

pub use controller::{run_olta, run_oluct, EpisodeOutcome, EpisodeRecord, EpisodeSettings};
pub use criteria::{decide, Criterion, Reason, Verdict};
pub use mdp::{
    stream, Action, CountingModel, GenerativeModel, PlannerParams, PlanningState, RolloutPolicy, TransitionOutcome,
};
pub use tree::{select_action_ucb, ActionStats, Tree, TreeNode};
