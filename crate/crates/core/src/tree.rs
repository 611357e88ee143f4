//! Open-loop search tree and the OLUCT building procedure.
//!
//! Nodes do not represent a single state. Each node stores every state
//! sampled when the tree policy reached it, so a node stands for the state
//! distribution induced by the action sequence leading to it. Action values
//! are therefore averages over that distribution.
//!
//! Counting conventions:
//! - `visits` of a node is the sum of its per-action counts `T_i`.
//! - `reached` counts the iterations that arrived at a node. For a non-root
//!   node it equals both the count of the parent edge and the number of
//!   sampled states; it also equals `visits + ended`, where `ended` counts
//!   iterations that stopped at the node (its creation and terminal samples).
//! - The root of a freshly built tree has `reached == visits == n`. After
//!   [`Tree::sub_tree`] the new root keeps its `reached`, so [`Tree::budget`]
//!   is `b(d)`, the count of the edge the sub-tree hangs from.

use rand::RngCore;
use serde::Serialize;

use crate::mdp::{
    pick_uniform, Action, CountingModel, GenerativeModel, MdpError, PlannerParams, PlanningState, RolloutPolicy,
};

pub type NodeId = usize;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TreeError {
    #[error(transparent)]
    Model(#[from] MdpError),
    #[error("cannot plan from a terminal state")]
    TerminalRoot,
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("rollout horizon must be at least 1")]
    ZeroHorizon,
    #[error("root has no tried action")]
    NoTriedAction,
    #[error("action {0} has no child node")]
    MissingChild(Action),
}

/// Statistics of one action at one node.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ActionStats {
    /// `T_i`.
    pub count: u64,
    pub value_sum: f64,
    /// Every backed-up return, in backup order.
    pub returns: Vec<f64>,
}

impl ActionStats {
    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.value_sum / self.count as f64)
    }

    fn record(&mut self, g: f64) {
        self.count += 1;
        self.value_sum += g;
        self.returns.push(g);
    }
}

#[derive(Clone, Debug)]
pub struct TreeNode<S> {
    sampled_states: Vec<S>,
    stats: Vec<ActionStats>,
    children: Vec<Option<NodeId>>,
    depth: usize,
    visits: u64,
    reached: u64,
    ended: u64,
}

impl<S> TreeNode<S> {
    fn new(state: S, num_actions: usize, depth: usize) -> Self {
        Self {
            sampled_states: vec![state],
            stats: vec![ActionStats::default(); num_actions],
            children: vec![None; num_actions],
            depth,
            visits: 0,
            reached: 0,
            ended: 0,
        }
    }

    /// Builds a node with prescribed statistics and no children. Useful for
    /// exercising selection and the criteria in isolation.
    pub fn with_stats(sampled_states: Vec<S>, stats: Vec<ActionStats>) -> Self {
        let visits = stats.iter().map(|s| s.count).sum();
        let k = stats.len();
        Self { sampled_states, stats, children: vec![None; k], depth: 0, visits, reached: visits, ended: 0 }
    }

    pub fn sampled_states(&self) -> &[S] {
        &self.sampled_states
    }

    pub fn stats(&self) -> &[ActionStats] {
        &self.stats
    }

    pub fn action(&self, a: Action) -> &ActionStats {
        &self.stats[a.0]
    }

    pub fn child(&self, a: Action) -> Option<NodeId> {
        self.children[a.0]
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `t`, the sum of the action counts.
    pub fn visits(&self) -> u64 {
        self.visits
    }

    pub fn reached(&self) -> u64 {
        self.reached
    }

    /// Iterations that stopped at this node: its creation plus terminal samples.
    pub fn ended(&self) -> u64 {
        self.ended
    }

    pub fn num_actions(&self) -> usize {
        self.stats.len()
    }

    pub fn is_fully_expanded(&self) -> bool {
        self.stats.iter().all(|s| s.count >= 1)
    }

    pub fn last_state(&self) -> &S {
        self.sampled_states.last().expect("nodes hold at least one state")
    }
}

/// `2 C_p sqrt(ln t / u)`.
pub fn exploration_bonus(t: u64, u: u64, exploration: f64) -> f64 {
    debug_assert!(t >= 1 && u >= 1);
    2.0 * exploration * ((t as f64).ln() / u as f64).sqrt()
}

/// UCB1 tree policy. Untried actions come first, chosen uniformly among
/// themselves; otherwise the highest upper confidence bound wins, with ties
/// broken uniformly.
pub fn select_action_ucb<S>(node: &TreeNode<S>, exploration: f64, rng: &mut dyn RngCore) -> Action {
    let untried: Vec<Action> = (0..node.num_actions()).filter(|&i| node.stats[i].count == 0).map(Action).collect();
    if !untried.is_empty() {
        return pick_uniform(&untried, rng);
    }
    let t = node.visits;
    let scores = node.stats.iter().map(|s| s.value_sum / s.count as f64 + exploration_bonus(t, s.count, exploration));
    argmax_uniform(scores.enumerate().map(|(i, v)| (Action(i), v)), rng)
}

fn argmax_uniform(items: impl Iterator<Item = (Action, f64)>, rng: &mut dyn RngCore) -> Action {
    let mut best = f64::NEG_INFINITY;
    let mut ties: Vec<Action> = Vec::new();
    for (a, v) in items {
        if v > best {
            best = v;
            ties.clear();
            ties.push(a);
        } else if v == best {
            ties.push(a);
        }
    }
    pick_uniform(&ties, rng)
}

/// Rolls out `policy` from `state` for at most `horizon` steps and returns
/// the discounted reward sum. Terminal states yield 0.
pub fn evaluate<M, P>(
    model: &CountingModel<M>,
    state: &M::State,
    policy: &P,
    horizon: usize,
    discount: f64,
    rng: &mut dyn RngCore,
) -> Result<f64, TreeError>
where
    M: GenerativeModel,
    P: RolloutPolicy<M> + ?Sized,
{
    if horizon == 0 {
        return Err(TreeError::ZeroHorizon);
    }
    let mut total = 0.0;
    let mut weight = 1.0;
    let mut s = state.clone();
    for _ in 0..horizon {
        if model.is_terminal(&s) {
            break;
        }
        let a = policy.choose(model.inner(), &s, rng);
        let out = model.sample_transition(&s, a, rng)?;
        total += weight * out.reward;
        weight *= discount;
        s = out.next_state;
    }
    Ok(total)
}

/// One edge of a selection path with the reward sampled along it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathStep {
    pub node: NodeId,
    pub action: Action,
    pub reward: f64,
}

/// Serializable view of a tree for debugging and fixtures.
#[derive(Debug, PartialEq, Serialize)]
pub struct TreeDump {
    pub num_actions: usize,
    pub budget: u64,
    pub build_calls: u64,
    pub nodes: Vec<NodeDump>,
}

#[derive(Debug, PartialEq, Serialize)]
pub struct NodeDump {
    pub id: NodeId,
    pub depth: usize,
    pub visits: u64,
    pub sampled_states: usize,
    pub state_mean: Vec<f64>,
    pub actions: Vec<EdgeDump>,
}

#[derive(Debug, PartialEq, Serialize)]
pub struct EdgeDump {
    pub count: u64,
    pub mean: Option<f64>,
    pub child: Option<NodeId>,
}

/// An open-loop tree stored as an arena; node 0 is not necessarily the root.
#[derive(Clone, Debug)]
pub struct Tree<S> {
    nodes: Vec<TreeNode<S>>,
    root: NodeId,
    num_actions: usize,
    build_calls: u64,
}

impl<S: PlanningState> Tree<S> {
    /// A tree holding only a root labelled by `state`.
    pub fn new(state: S, num_actions: usize) -> Self {
        Self { nodes: vec![TreeNode::new(state, num_actions, 0)], root: 0, num_actions, build_calls: 0 }
    }

    /// A tree made of a single prepared root node.
    pub fn from_root(root: TreeNode<S>) -> Self {
        let num_actions = root.num_actions();
        Self { nodes: vec![root], root: 0, num_actions, build_calls: 0 }
    }

    /// Runs `n` iterations of select, expand, evaluate and backup from `root_state`.
    pub fn build<M, P>(
        model: &CountingModel<M>,
        root_state: S,
        params: &PlannerParams,
        policy: &P,
        rng: &mut dyn RngCore,
    ) -> Result<Self, TreeError>
    where
        M: GenerativeModel<State = S>,
        P: RolloutPolicy<M> + ?Sized,
    {
        if params.budget == 0 {
            return Err(TreeError::ZeroBudget);
        }
        if params.horizon == 0 {
            return Err(TreeError::ZeroHorizon);
        }
        if !(0.0..1.0).contains(&params.discount) {
            return Err(MdpError::InvalidDiscount(params.discount).into());
        }
        if model.is_terminal(&root_state) {
            return Err(TreeError::TerminalRoot);
        }
        let calls_before = model.calls();
        let mut tree = Self::new(root_state, model.num_actions());
        let mut path = Vec::new();
        for _ in 0..params.budget {
            path.clear();
            let leaf_return = tree.descend(model, params, policy, &mut path, rng)?;
            tree.backup(&path, leaf_return, params.discount);
        }
        tree.build_calls = model.calls() - calls_before;
        Ok(tree)
    }

    /// Select and expand. Fills `path` and returns the return estimate of
    /// the leaf where the iteration stopped.
    fn descend<M, P>(
        &mut self,
        model: &CountingModel<M>,
        params: &PlannerParams,
        policy: &P,
        path: &mut Vec<PathStep>,
        rng: &mut dyn RngCore,
    ) -> Result<f64, TreeError>
    where
        M: GenerativeModel<State = S>,
        P: RolloutPolicy<M> + ?Sized,
    {
        let mut node = self.root;
        self.nodes[node].reached += 1;
        let mut state = self.nodes[node].last_state().clone();
        loop {
            let action = select_action_ucb(&self.nodes[node], params.exploration, rng);
            let out = model.sample_transition(&state, action, rng)?;
            path.push(PathStep { node, action, reward: out.reward });
            let child = match self.nodes[node].children[action.0] {
                Some(child) => {
                    let c = &mut self.nodes[child];
                    c.sampled_states.push(out.next_state.clone());
                    c.reached += 1;
                    child
                }
                None => {
                    let child = self.nodes.len();
                    let mut c = TreeNode::new(out.next_state.clone(), self.num_actions, self.nodes[node].depth + 1);
                    c.reached = 1;
                    c.ended = 1;
                    self.nodes.push(c);
                    self.nodes[node].children[action.0] = Some(child);
                    if out.terminal {
                        return Ok(0.0);
                    }
                    return evaluate(model, &out.next_state, policy, params.horizon, params.discount, rng);
                }
            };
            if out.terminal {
                self.nodes[child].ended += 1;
                return Ok(0.0);
            }
            node = child;
            state = out.next_state;
        }
    }

    /// Propagates `leaf_return` from the end of `path` to its start with
    /// `G <- r + gamma * G`, recording `G` on each traversed edge.
    pub fn backup(&mut self, path: &[PathStep], leaf_return: f64, discount: f64) {
        let mut g = leaf_return;
        for step in path.iter().rev() {
            g = step.reward + discount * g;
            let node = &mut self.nodes[step.node];
            node.stats[step.action.0].record(g);
            node.visits += 1;
        }
    }

    /// Argmax of the mean return over tried root actions, ties uniform.
    pub fn recommended_action(&self, rng: &mut dyn RngCore) -> Result<Action, TreeError> {
        let root = self.root();
        if root.visits == 0 {
            return Err(TreeError::NoTriedAction);
        }
        let means = root.stats.iter().enumerate().filter_map(|(i, s)| s.mean().map(|m| (Action(i), m)));
        Ok(argmax_uniform(means, rng))
    }

    /// Re-roots the tree at the child reached by `action`, keeping all
    /// statistics and sampled states of that sub-tree.
    pub fn sub_tree(self, action: Action) -> Result<Self, TreeError> {
        let child = self.root().children.get(action.0).copied().flatten().ok_or(TreeError::MissingChild(action))?;
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut order = vec![child];
        remap[child] = 0;
        let mut i = 0;
        while i < order.len() {
            for c in self.nodes[order[i]].children.iter().flatten() {
                remap[*c] = order.len();
                order.push(*c);
            }
            i += 1;
        }
        let mut slots: Vec<Option<TreeNode<S>>> = self.nodes.into_iter().map(Some).collect();
        let nodes = order
            .iter()
            .map(|&old| {
                let mut n = slots[old].take().expect("tree nodes have one parent");
                n.depth -= 1;
                for c in n.children.iter_mut().flatten() {
                    *c = remap[*c];
                }
                n
            })
            .collect();
        Ok(Self { nodes, root: 0, num_actions: self.num_actions, build_calls: self.build_calls })
    }

    pub fn root(&self) -> &TreeNode<S> {
        &self.nodes[self.root]
    }

    pub fn root_id(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &TreeNode<S> {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &TreeNode<S>)> {
        self.nodes.iter().enumerate()
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// `b(d)`: iterations that reached the root of this (sub-)tree.
    pub fn budget(&self) -> u64 {
        self.root().reached
    }

    /// Generative-model calls spent building the tree this one was cut from.
    pub fn build_calls(&self) -> u64 {
        self.build_calls
    }

    pub fn dump(&self) -> TreeDump {
        let nodes = self
            .nodes()
            .map(|(id, n)| {
                let dim = n.last_state().features().len();
                let mut state_mean = vec![0.0; dim];
                for s in &n.sampled_states {
                    for (m, f) in state_mean.iter_mut().zip(s.features()) {
                        *m += f;
                    }
                }
                state_mean.iter_mut().for_each(|m| *m /= n.sampled_states.len() as f64);
                NodeDump {
                    id,
                    depth: n.depth,
                    visits: n.visits,
                    sampled_states: n.sampled_states.len(),
                    state_mean,
                    actions: n
                        .stats
                        .iter()
                        .zip(&n.children)
                        .map(|(s, c)| EdgeDump { count: s.count, mean: s.mean(), child: *c })
                        .collect(),
                }
            })
            .collect();
        TreeDump { num_actions: self.num_actions, budget: self.budget(), build_calls: self.build_calls, nodes }
    }
}
