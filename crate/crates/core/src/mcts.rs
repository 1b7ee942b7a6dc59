//! Monte Carlo Tree Search over decision-tree states.
//!
//! Each [`SearchNode`] is a tree `T`. Its actions are the terminal action
//! (stop and collect the accuracy of `T`) and the split actions (split one
//! leaf on one attribute, paying `lambda`). One iteration of [`fit`]:
//!
//! 1. **Selection** descends from the root with Thompson draws until the
//!    terminal action fires. A node that is not fully expanded always fires
//!    its terminal action.
//! 2. **Simulation** routes `m` fresh stream samples through the tree of the
//!    last node and refreshes that node's terminal posterior.
//! 3. **Expansion** creates the split children of one untreated leaf (the
//!    one with the highest Gini impurity), seeding each child's posterior
//!    from the grids of the shared store.
//! 4. **Backpropagation** recomputes the posterior of every node on the path
//!    from its children, either by Clark folding ([`Variant::Tsdt`]) or by
//!    keeping the best penalized mean ([`Variant::Fast`]).
//!
//! After the last iteration the tree is read off by following the greedy
//! policy on posterior means.

use alloc::string::ToString;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};

use crate::data::AttributeSchema;
use crate::dtree::{gini, split, NodeStore, RegionId, TreeState};
use crate::posterior::{
    clark_fold_penalized, fast_max, leaf_value_posterior, thompson_select, ChildPosterior, Gaussian,
};
use crate::stream::StreamSource;
use crate::{Error, Result, SeededRng};

/// How internal posteriors are rebuilt from their children.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Nested Clark approximation of the max over penalized children.
    Tsdt,
    /// Posterior of the child with the best penalized mean.
    Fast,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Tsdt => "tsdt",
            Variant::Fast => "fast",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Number of search iterations `M`.
    pub iterations: usize,
    /// Stream samples consumed per simulation `m`.
    pub samples_per_iteration: usize,
    /// Cost of one split.
    pub lambda: f64,
    /// Exponent applied to search-leaf variances, in `(0, 1]`.
    pub gamma: f64,
    pub variant: Variant,
    pub seed: u64,
    /// States with this many splits expose only the terminal action.
    pub max_splits: Option<usize>,
    /// Wall-clock budget, checked between iterations.
    pub budget_ms: Option<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            iterations: 400,
            samples_per_iteration: 100,
            lambda: 0.05,
            gamma: 0.75,
            variant: Variant::Fast,
            seed: 0,
            max_splits: None,
            budget_ms: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.iterations == 0 {
            return bad("iterations must be >= 1");
        }
        if self.samples_per_iteration == 0 {
            return bad("samples per iteration must be >= 1");
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad("lambda must be a finite non-negative number");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        Ok(())
    }
}

/// Milliseconds since the run started. The core has no clock of its own.
pub trait Clock {
    fn elapsed_ms(&self) -> u64;
}

/// A clock that never advances; budgets never trigger.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_ms(&self) -> u64 {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SearchNodeId(usize);

impl SearchNodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A split action that has been expanded into a child search node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitEdge {
    pub leaf: RegionId,
    pub attribute: usize,
    pub node: SearchNodeId,
}

#[derive(Debug, Clone)]
pub struct SearchNode {
    state: TreeState,
    posterior: Gaussian,
    terminal_posterior: Gaussian,
    children: Vec<SplitEdge>,
    untreated: Vec<RegionId>,
    fully_expanded: bool,
    visits: u64,
}

impl SearchNode {
    fn new(state: TreeState, posterior: Gaussian) -> Self {
        let untreated = state.leaves();
        Self {
            state,
            posterior,
            terminal_posterior: posterior,
            children: Vec::new(),
            untreated,
            fully_expanded: false,
            visits: 0,
        }
    }

    pub fn state(&self) -> &TreeState {
        &self.state
    }

    /// Posterior on the optimal value from this state.
    pub fn posterior(&self) -> Gaussian {
        self.posterior
    }

    /// Posterior on the accuracy of this state's tree.
    pub fn terminal_posterior(&self) -> Gaussian {
        self.terminal_posterior
    }

    pub fn children(&self) -> &[SplitEdge] {
        &self.children
    }

    pub fn untreated_leaves(&self) -> &[RegionId] {
        &self.untreated
    }

    pub fn is_fully_expanded(&self) -> bool {
        self.fully_expanded
    }

    /// Number of selected episodes that passed through this node.
    pub fn visits(&self) -> u64 {
        self.visits
    }
}

/// The search tree plus the region store its states share.
#[derive(Debug, Clone)]
pub struct SearchTree {
    nodes: Vec<SearchNode>,
    store: NodeStore,
    iteration: usize,
}

impl SearchTree {
    pub fn new(schema: AttributeSchema, gamma: f64) -> Self {
        let store = NodeStore::new(schema);
        let state = TreeState::root(&store);
        let posterior = leaf_value_posterior(&store, &state, gamma);
        Self {
            nodes: alloc::vec![SearchNode::new(state, posterior)],
            store,
            iteration: 0,
        }
    }

    pub fn root(&self) -> SearchNodeId {
        SearchNodeId(0)
    }

    pub fn node(&self, id: SearchNodeId) -> &SearchNode {
        &self.nodes[id.0]
    }

    pub fn ids(&self) -> impl Iterator<Item = SearchNodeId> {
        (0..self.nodes.len()).map(SearchNodeId)
    }

    pub fn nodes(&self) -> &[SearchNode] {
        &self.nodes
    }

    pub fn store(&self) -> &NodeStore {
        &self.store
    }

    /// Iterations completed so far.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Terminal action first, then split children in creation order.
    pub fn child_posteriors(&self, id: SearchNodeId) -> Vec<ChildPosterior> {
        let node = &self.nodes[id.0];
        core::iter::once(ChildPosterior::terminal(node.terminal_posterior))
            .chain(
                node.children
                    .iter()
                    .map(|e| ChildPosterior::split(self.nodes[e.node.0].posterior)),
            )
            .collect()
    }

    /// Unrolls the current policy from the root. The returned path ends at the
    /// node whose terminal action fired.
    pub fn select_path<R: Rng + ?Sized>(&self, lambda: f64, rng: &mut R) -> Vec<SearchNodeId> {
        let mut path = alloc::vec![self.root()];
        loop {
            let id = *path.last().unwrap();
            let node = &self.nodes[id.0];
            if !node.fully_expanded || node.children.is_empty() {
                return path;
            }
            let pick = thompson_select(&self.child_posteriors(id), lambda, rng)
                .expect("terminal action is always present");
            if pick == 0 {
                return path;
            }
            path.push(node.children[pick - 1].node);
        }
    }

    /// Feeds `m` stream samples through the tree of `id` and refreshes its
    /// terminal posterior.
    pub fn simulate<S: StreamSource + ?Sized>(
        &mut self,
        id: SearchNodeId,
        stream: &mut S,
        m: usize,
        gamma: f64,
    ) -> Result<Gaussian> {
        let node = &mut self.nodes[id.0];
        for _ in 0..m {
            let x = stream.next_instance()?;
            node.state.observe(&mut self.store, &x);
        }
        node.terminal_posterior = leaf_value_posterior(&self.store, &node.state, gamma);
        Ok(node.terminal_posterior)
    }

    /// The untreated leaf to expand next: highest Gini impurity, then more
    /// samples, then smallest key.
    fn next_leaf(&self, id: SearchNodeId) -> Option<RegionId> {
        let store = &self.store;
        self.nodes[id.0].untreated.iter().copied().max_by(|&a, &b| {
            let (sa, sb) = (store.stats(a), store.stats(b));
            gini(sa.class_counts())
                .total_cmp(&gini(sb.class_counts()))
                .then(sa.n().cmp(&sb.n()))
                .then(sb.key().cmp(sa.key()))
        })
    }

    /// Creates the split children of one untreated leaf of `id`. Returns the
    /// new children; a leaf with no available attribute is marked treated
    /// without children.
    pub fn expand(
        &mut self,
        id: SearchNodeId,
        gamma: f64,
        max_splits: Option<usize>,
    ) -> Result<Vec<SearchNodeId>> {
        if self.nodes[id.0].fully_expanded {
            return Err(Error::AlreadyExpanded(id.0));
        }
        if max_splits.is_some_and(|cap| self.nodes[id.0].state.splits() >= cap) {
            let node = &mut self.nodes[id.0];
            node.untreated.clear();
            node.fully_expanded = true;
            return Ok(Vec::new());
        }
        let leaf = self
            .next_leaf(id)
            .expect("not fully expanded implies an untreated leaf");
        let attributes = self.nodes[id.0].state.available_splits(&self.store, leaf)?;
        let mut created = Vec::with_capacity(attributes.len());
        for attribute in attributes {
            let state = split(&mut self.store, &self.nodes[id.0].state, leaf, attribute)?;
            let posterior = leaf_value_posterior(&self.store, &state, gamma);
            let child = SearchNodeId(self.nodes.len());
            self.nodes.push(SearchNode::new(state, posterior));
            self.nodes[id.0].children.push(SplitEdge {
                leaf,
                attribute,
                node: child,
            });
            created.push(child);
        }
        let node = &mut self.nodes[id.0];
        node.untreated.retain(|&l| l != leaf);
        node.fully_expanded = node.untreated.is_empty();
        Ok(created)
    }

    /// Recomputes posteriors from the end of `path` back to the root.
    pub fn backpropagate(
        &mut self,
        path: &[SearchNodeId],
        variant: Variant,
        lambda: f64,
    ) -> Result<()> {
        if path.is_empty() {
            return Err(Error::NoChildren);
        }
        for &id in path.iter().rev() {
            let posterior = if self.nodes[id.0].children.is_empty() {
                self.nodes[id.0].terminal_posterior
            } else {
                let kids = self.child_posteriors(id);
                match variant {
                    Variant::Fast => fast_max(&kids, lambda)?,
                    Variant::Tsdt => clark_fold_penalized(&kids, lambda)?,
                }
            };
            self.nodes[id.0].posterior = posterior;
        }
        Ok(())
    }

    /// Follows the greedy policy on penalized posterior means. Ties keep the
    /// terminal action.
    pub fn extract_greedy(&self, lambda: f64) -> Vec<SearchNodeId> {
        let mut path = alloc::vec![self.root()];
        loop {
            let node = &self.nodes[path.last().unwrap().0];
            let mut best_mu = node.terminal_posterior.mu;
            let mut best = None;
            for e in &node.children {
                let mu = self.nodes[e.node.0].posterior.mu - lambda;
                if mu > best_mu {
                    best_mu = mu;
                    best = Some(e.node);
                }
            }
            match best {
                Some(next) => path.push(next),
                None => return path,
            }
        }
    }
}

/// One row of the per-iteration trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub root_mu: f64,
    pub root_var: f64,
    /// Split transitions in the selected episode.
    pub episode_depth: usize,
    pub samples_total: u64,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub tree: TreeState,
    pub trace: Vec<TraceRow>,
    pub iterations: usize,
    pub samples: u64,
    pub elapsed_ms: u64,
    pub extraction_path: Vec<SearchNodeId>,
    pub search: SearchTree,
}

impl FitResult {
    pub fn store(&self) -> &NodeStore {
        self.search.store()
    }
}

/// Runs the search without a clock.
pub fn fit<S: StreamSource>(stream: S, config: &ExperimentConfig) -> Result<FitResult> {
    fit_with_clock(stream, config, &NoClock)
}

pub fn fit_with_clock<S: StreamSource, C: Clock + ?Sized>(
    mut stream: S,
    config: &ExperimentConfig,
    clock: &C,
) -> Result<FitResult> {
    config.validate()?;
    let mut search = SearchTree::new(stream.schema().clone(), config.gamma);
    let mut rng = SeededRng::seed_from_u64(config.seed);
    let mut trace = Vec::with_capacity(config.iterations);
    let mut samples = 0u64;
    for t in 1..=config.iterations {
        if config.budget_ms.is_some_and(|b| clock.elapsed_ms() >= b) {
            break;
        }
        let path = search.select_path(config.lambda, &mut rng);
        for id in &path {
            search.nodes[id.0].visits += 1;
        }
        let end = *path.last().unwrap();
        search.simulate(end, &mut stream, config.samples_per_iteration, config.gamma)?;
        samples += config.samples_per_iteration as u64;
        if !search.nodes[end.0].fully_expanded {
            search.expand(end, config.gamma, config.max_splits)?;
        }
        search.backpropagate(&path, config.variant, config.lambda)?;
        search.iteration = t;
        let root = search.nodes[0].posterior;
        trace.push(TraceRow {
            iteration: t,
            root_mu: root.mu,
            root_var: root.var,
            episode_depth: path.len() - 1,
            samples_total: samples,
            elapsed_ms: clock.elapsed_ms(),
        });
    }
    let extraction_path = search.extract_greedy(config.lambda);
    let tree = search.node(*extraction_path.last().unwrap()).state.clone();
    Ok(FitResult {
        tree,
        iterations: search.iteration,
        samples,
        elapsed_ms: clock.elapsed_ms(),
        trace,
        extraction_path,
        search,
    })
}
