//! Execution cuts, local stars, causal closures, causal consistency and
//! system slices.
//!
//! Cuts are checked against the explored horizon: a set of nodes is a cut if
//! every maximal path from layer 0 down to the cut's deepest layer meets it.
//! The adversary has no dead ends, so every such path extends to a run.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::domain::{Configuration, InputVector, ProcessId, ViewId};
use crate::error::{Error, Result};
use crate::execution::{escape, process_color, NodeId, SystemFrame};

/// Maximum number of antichains enumerated per input component.
pub const ANTICHAIN_LIMIT: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExecutionCut {
    /// Sorted, duplicate free.
    pub members: Vec<NodeId>,
    pub strategy_tag: String,
}

impl ExecutionCut {
    pub fn new(members: impl IntoIterator<Item = NodeId>, tag: impl Into<String>) -> Self {
        let set: BTreeSet<NodeId> = members.into_iter().collect();
        ExecutionCut { members: set.into_iter().collect(), strategy_tag: tag.into() }
    }

    /// The uniform cut at layer `depth`.
    pub fn layer(frame: &SystemFrame, depth: u32) -> Self {
        ExecutionCut::new(frame.layer(depth).iter().copied(), format!("uniform:{depth}"))
    }

    pub fn max_depth(&self, frame: &SystemFrame) -> u32 {
        self.members.iter().map(|&m| frame.node_depth(m)).max().unwrap_or(0)
    }
}

/// A causal-consistency edge `g ≃_p h`, stored once with `g < h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConsistencyEdge {
    pub g: NodeId,
    pub h: NodeId,
    pub p: ProcessId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceConfig {
    pub node: NodeId,
    pub config: Configuration,
    pub inputs: InputVector,
    pub rendering: String,
}

/// The sheaf's base space: the causal closure of a cut's local star with its
/// causal-consistency edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemSlice {
    pub n: usize,
    /// Sorted by node id.
    pub configs: Vec<SliceConfig>,
    /// Sorted; both endpoints are in `configs`.
    pub edges: Vec<ConsistencyEdge>,
    pub cut: ExecutionCut,
}

impl SystemSlice {
    pub fn position(&self, node: NodeId) -> Option<usize> {
        self.configs.binary_search_by_key(&node, |c| c.node).ok()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.configs.iter().map(|c| c.node)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.position(node).is_some()
    }
}

/// Checks that `cut` meets every maximal path down to its deepest layer.
pub fn validate_cut(frame: &SystemFrame, cut: &ExecutionCut) -> Result<()> {
    if cut.members.is_empty() {
        return Err(Error::InvalidCut("empty set of configurations".into()));
    }
    for &m in &cut.members {
        frame.node(m)?;
    }
    let horizon = cut.max_depth(frame);
    let members: BTreeSet<NodeId> = cut.members.iter().copied().collect();
    // avoids[x]: some path from layer 0 reaches x without touching the cut
    let mut avoids = vec![false; frame.node_count()];
    for depth in 0..=horizon {
        for &x in frame.layer(depth) {
            if members.contains(&x) {
                continue;
            }
            let node = frame.node(x)?;
            avoids[x.index()] = depth == 0 || node.parents.iter().any(|p| avoids[p.index()]);
            if depth == horizon && avoids[x.index()] {
                return Err(Error::InvalidCut(format!("the path to {} avoids it", frame.render(x))));
            }
        }
    }
    Ok(())
}

/// `N(A)`: union of all indistinguishability classes of members of `a`.
pub fn local_star(frame: &SystemFrame, a: &[NodeId]) -> BTreeSet<NodeId> {
    let mut star = BTreeSet::new();
    for &g in a {
        for p in ProcessId::all(frame.n()) {
            star.extend(frame.indist_class(g, p).iter().copied());
        }
    }
    star
}

/// `{ g : h ≤ g ≤ w for some h ∈ N(A), w ∈ A }`.
pub fn causal_closure(frame: &SystemFrame, cut: &ExecutionCut) -> BTreeSet<NodeId> {
    if cut.members.is_empty() {
        return BTreeSet::new();
    }
    let star = local_star(frame, &cut.members);
    let up = frame.ancestors(cut.members.iter().copied());
    let down = frame.descendants(star, cut.max_depth(frame));
    up.intersection(&down).copied().collect()
}

/// Symmetric closure of `≤ ∘ ∼_p`, evaluated in the whole frame and restricted
/// to `closure`: `g ≃_p h` iff `g ∼_p m ≤ h` for some node `m` (or vice versa).
///
/// With full-information views, `g ∼_p m ≤ h` holds iff `p`'s view in `g`
/// equals `p`'s view in the ancestor of `h` at `g`'s depth.
pub fn causal_consistency(frame: &SystemFrame, closure: &BTreeSet<NodeId>) -> Vec<ConsistencyEdge> {
    let mut edges = BTreeSet::new();
    for p in ProcessId::all(frame.n()) {
        let mut by_view: HashMap<ViewId, Vec<NodeId>> = HashMap::new();
        for &u in closure {
            by_view.entry(frame.view(u, p)).or_default().push(u);
        }
        for &v in closure {
            for d in 0..=frame.node_depth(v) {
                let Some(bucket) = by_view.get(&frame.view_at(v, p, d)) else { continue };
                for &u in bucket {
                    if u != v {
                        edges.insert(ConsistencyEdge { g: u.min(v), h: u.max(v), p });
                    }
                }
            }
        }
    }
    edges.into_iter().collect()
}

/// Builds the system slice of a cut.
pub fn build_slice(frame: &SystemFrame, cut: &ExecutionCut) -> Result<SystemSlice> {
    validate_cut(frame, cut)?;
    let closure = causal_closure(frame, cut);
    let edges = causal_consistency(frame, &closure);
    let configs = closure
        .iter()
        .map(|&node| SliceConfig {
            node,
            config: frame.config(node).clone(),
            inputs: frame.inputs_of(node),
            rendering: frame.render(node),
        })
        .collect();
    Ok(SystemSlice { n: frame.n(), configs, edges, cut: cut.clone() })
}

/// DOT rendering of a slice: solid colored indistinguishability edges, dashed
/// consistency edges, cut members inside a dashed box.
pub fn slice_to_dot(frame: &SystemFrame, slice: &SystemSlice) -> String {
    let mut out = String::from("graph slice {\n  node [shape=box, fontname=\"monospace\"];\n");
    out.push_str("  subgraph cluster_cut {\n    style=dashed;\n    label=\"cut\";\n");
    for &m in &slice.cut.members {
        let _ = writeln!(out, "    n{} [label=\"{}\"];", m.0, escape(&frame.render(m)));
    }
    out.push_str("  }\n");
    for c in &slice.configs {
        if !slice.cut.members.contains(&c.node) {
            let _ = writeln!(out, "  n{} [label=\"{}\"];", c.node.0, escape(&c.rendering));
        }
    }
    for e in &slice.edges {
        let style = if frame.indistinguishable(e.g, e.h, e.p) { "solid" } else { "dashed" };
        let _ = writeln!(
            out,
            "  n{} -- n{} [color={}, style={}, label=\"{}\"];",
            e.g.0,
            e.h.0,
            process_color(e.p),
            style,
            e.p
        );
    }
    out.push_str("}\n");
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutStrategy {
    /// One cut per layer.
    Uniform,
    /// Every maximal antichain, mixing depths across branches.
    Antichain,
}

impl std::str::FromStr for CutStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(CutStrategy::Uniform),
            "antichain" => Ok(CutStrategy::Antichain),
            other => Err(Error::Parse(format!("unknown cut strategy {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Antichain {
    max_depth: u32,
    members: Vec<NodeId>,
}

/// All maximal antichains of the component below `root`, truncated at
/// `horizon`, sorted by (max depth, members).
fn component_antichains(frame: &SystemFrame, root: NodeId, horizon: u32) -> Result<Vec<Antichain>> {
    fn go(
        frame: &SystemFrame,
        node: NodeId,
        horizon: u32,
        memo: &mut HashMap<NodeId, std::rc::Rc<Vec<Vec<NodeId>>>>,
    ) -> Result<std::rc::Rc<Vec<Vec<NodeId>>>> {
        if let Some(hit) = memo.get(&node) {
            return Ok(hit.clone());
        }
        let mut sets = vec![vec![node]];
        if frame.node_depth(node) < horizon {
            let mut product: Vec<Vec<NodeId>> = vec![Vec::new()];
            for &child in &frame.node(node)?.children {
                let options = go(frame, child, horizon, memo)?;
                if product.len().saturating_mul(options.len()) > ANTICHAIN_LIMIT {
                    return Err(Error::Limit(format!(
                        "more than {ANTICHAIN_LIMIT} antichains below {}",
                        frame.render(node)
                    )));
                }
                product = product
                    .iter()
                    .flat_map(|prefix| {
                        options.iter().map(move |o| {
                            let mut next = prefix.clone();
                            next.extend_from_slice(o);
                            next
                        })
                    })
                    .collect();
            }
            sets.extend(product);
        }
        let sets = std::rc::Rc::new(sets);
        memo.insert(node, sets.clone());
        Ok(sets)
    }

    let mut memo = HashMap::new();
    let raw = go(frame, root, horizon, &mut memo)?;
    let merges = frame.descendants([root], horizon).iter().any(|&x| frame.node(x).is_ok_and(|n| n.parents.len() > 1));
    let mut out: BTreeSet<Antichain> = BTreeSet::new();
    for set in raw.iter() {
        let members: Vec<NodeId> = set.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if merges && !is_antichain(frame, &members)? {
            continue;
        }
        let max_depth = members.iter().map(|&m| frame.node_depth(m)).max().unwrap_or(0);
        out.insert(Antichain { max_depth, members });
    }
    Ok(out.into_iter().collect())
}

fn is_antichain(frame: &SystemFrame, members: &[NodeId]) -> Result<bool> {
    for &x in members {
        for &y in members {
            if x != y && frame.causally_precedes(x, y)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

struct Component {
    options: Vec<Antichain>,
    self_conflict: Vec<bool>,
}

type Conflict<'a> = Box<dyn Fn(NodeId, NodeId) -> bool + 'a>;

/// Stream of execution cuts in nondecreasing max-depth order.
///
/// Within one max depth, cuts are ordered lexicographically by their
/// per-input-component antichains (components in layer-0 order, antichains by
/// sorted node ids). An optional conflict predicate skips every cut that
/// contains a conflicting pair; skipped cuts are counted in [`CutStream::pruned`].
pub struct CutStream<'a> {
    frame: &'a SystemFrame,
    strategy: CutStrategy,
    max_depth: u32,
    target: u32,
    done: bool,
    comps: Vec<Component>,
    conflict: Option<Conflict<'a>>,
    // search state for the current target depth
    cursor: Vec<usize>,
    chosen: Vec<usize>,
    fresh: bool,
    pruned: u128,
}

impl<'a> CutStream<'a> {
    pub fn pruned(&self) -> u128 {
        self.pruned
    }

    /// Restricts the stream to cuts whose max depth is exactly `depth`.
    pub fn only_depth(mut self, depth: u32) -> Self {
        self.target = depth;
        self.max_depth = self.max_depth.min(depth);
        self.done = depth > self.max_depth;
        self
    }

    /// Skips cuts containing two members for which `conflict` holds in either order.
    pub fn with_conflicts(mut self, conflict: impl Fn(NodeId, NodeId) -> bool + 'a) -> Self {
        for comp in &mut self.comps {
            comp.self_conflict = comp
                .options
                .iter()
                .map(|o| {
                    o.members
                        .iter()
                        .enumerate()
                        .any(|(i, &x)| o.members[i + 1..].iter().any(|&y| conflict(x, y) || conflict(y, x)))
                })
                .collect();
        }
        self.conflict = Some(Box::new(conflict));
        self
    }

    fn le_lt(&self, j: usize) -> (u128, u128) {
        let opts = &self.comps[j].options;
        let le = opts.iter().filter(|o| o.max_depth <= self.target).count() as u128;
        let lt = opts.iter().filter(|o| o.max_depth < self.target).count() as u128;
        (le, lt)
    }

    /// Number of ways to complete components `j..` into a cut of max depth `target`.
    fn completions(&self, j: usize, reached: bool) -> u128 {
        let (mut le, mut lt) = (1u128, 1u128);
        for k in j..self.comps.len() {
            let (a, b) = self.le_lt(k);
            le = le.saturating_mul(a);
            lt = lt.saturating_mul(b);
        }
        if reached {
            le
        } else {
            le - lt
        }
    }

    fn reached(&self) -> bool {
        self.chosen.iter().enumerate().any(|(j, &i)| self.comps[j].options[i].max_depth == self.target)
    }

    fn conflicts_with_chosen(&self, option: &Antichain) -> bool {
        let Some(conflict) = &self.conflict else { return false };
        self.chosen.iter().enumerate().any(|(j, &i)| {
            self.comps[j].options[i]
                .members
                .iter()
                .any(|&x| option.members.iter().any(|&y| conflict(x, y) || conflict(y, x)))
        })
    }

    fn next_antichain(&mut self) -> Option<ExecutionCut> {
        let c = self.comps.len();
        loop {
            if self.done {
                return None;
            }
            if self.fresh {
                self.cursor = vec![0];
                self.chosen.clear();
                self.fresh = false;
            }
            let level = self.chosen.len();
            if level == c {
                let members =
                    self.chosen.iter().enumerate().flat_map(|(j, &i)| self.comps[j].options[i].members.iter().copied());
                let cut = ExecutionCut::new(members, "antichain");
                self.chosen.pop();
                return Some(cut);
            }
            let reached = self.reached();
            let mut picked = None;
            while self.cursor[level] < self.comps[level].options.len() {
                let idx = self.cursor[level];
                self.cursor[level] += 1;
                let option = &self.comps[level].options[idx];
                if option.max_depth > self.target {
                    self.cursor[level] = self.comps[level].options.len();
                    break;
                }
                if level + 1 == c && !reached && option.max_depth != self.target {
                    continue;
                }
                let hits = reached || option.max_depth == self.target;
                if self.comps[level].self_conflict.get(idx).copied().unwrap_or(false)
                    || self.conflicts_with_chosen(option)
                {
                    self.pruned = self.pruned.saturating_add(self.completions(level + 1, hits));
                    continue;
                }
                picked = Some(idx);
                break;
            }
            match picked {
                Some(idx) => {
                    self.chosen.push(idx);
                    if self.chosen.len() < c {
                        self.cursor.truncate(self.chosen.len());
                        self.cursor.push(0);
                    }
                }
                None if level == 0 => {
                    if self.target >= self.max_depth {
                        self.done = true;
                    } else {
                        self.target += 1;
                        self.fresh = true;
                    }
                }
                None => {
                    self.cursor.truncate(level);
                    self.chosen.pop();
                }
            }
        }
    }
}

impl Iterator for CutStream<'_> {
    type Item = ExecutionCut;

    fn next(&mut self) -> Option<ExecutionCut> {
        match self.strategy {
            CutStrategy::Uniform => {
                if self.done {
                    return None;
                }
                let cut = ExecutionCut::layer(self.frame, self.target);
                if self.target >= self.max_depth {
                    self.done = true;
                } else {
                    self.target += 1;
                }
                Some(cut)
            }
            CutStrategy::Antichain => self.next_antichain(),
        }
    }
}

/// Cuts of the frame explored to at least `max_depth`, per `strategy`.
pub fn enumerate_cuts(frame: &SystemFrame, max_depth: u32, strategy: CutStrategy) -> Result<CutStream<'_>> {
    if max_depth > frame.depth() {
        return Err(Error::Invalid(format!(
            "frame explored to depth {} only, cuts requested up to {max_depth}",
            frame.depth()
        )));
    }
    let comps = match strategy {
        CutStrategy::Uniform => Vec::new(),
        CutStrategy::Antichain => frame
            .layer(0)
            .iter()
            .map(|&root| {
                let options = component_antichains(frame, root, max_depth)?;
                let self_conflict = vec![false; options.len()];
                Ok(Component { options, self_conflict })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(CutStream {
        frame,
        strategy,
        max_depth,
        target: 0,
        done: false,
        comps,
        conflict: None,
        cursor: Vec::new(),
        chosen: Vec::new(),
        fresh: true,
        pruned: 0,
    })
}
