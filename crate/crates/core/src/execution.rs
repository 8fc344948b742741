//! Layered execution graph of the full-information protocol under an
//! adversary, with per-process indistinguishability: the system frame.
//!
//! Nodes are `(configuration, adversary state)` pairs. Nodes sharing a
//! configuration stay separate for expansion but are indistinguishable to
//! every process, since processes cannot observe the automaton state.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::adversary::{Adversary, RoundDigraph, StateId};
use crate::domain::{project_local, Configuration, InputVector, ProcessId, ViewId, ViewRegistry};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConfigId(pub u32);

#[derive(Clone, Debug)]
pub struct Node {
    pub config: ConfigId,
    pub state: StateId,
    pub depth: u32,
    pub parents: Vec<NodeId>,
    pub children: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalEdge {
    pub parent: NodeId,
    pub child: NodeId,
    pub letter: RoundDigraph,
}

/// Unordered pair of distinct nodes that look the same to `p`; `g < h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndistEdge {
    pub g: NodeId,
    pub h: NodeId,
    pub p: ProcessId,
}

/// The execution graph together with the indistinguishability index.
#[derive(Debug)]
pub struct SystemFrame {
    registry: Arc<ViewRegistry>,
    n: usize,
    input_space: Vec<InputVector>,
    configs: Vec<Configuration>,
    config_index: HashMap<Configuration, ConfigId>,
    config_parent: Vec<Option<ConfigId>>,
    nodes: Vec<Node>,
    node_index: HashMap<(ConfigId, StateId), NodeId>,
    layers: Vec<Vec<NodeId>>,
    causal_edges: Vec<CausalEdge>,
    /// Per process: view id to the nodes in which that process holds it.
    classes: Vec<HashMap<ViewId, Vec<NodeId>>>,
}

impl SystemFrame {
    /// Layer 0: one node per input vector, at the adversary's initial state.
    pub fn initial_layer(inputs: &[InputVector], adv: &Adversary, registry: Arc<ViewRegistry>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::Invalid("empty input set".into()));
        }
        let n = adv.n();
        let mut input_space: Vec<InputVector> = inputs.to_vec();
        input_space.sort();
        input_space.dedup();
        let mut frame = SystemFrame {
            registry,
            n,
            input_space: Vec::new(),
            configs: Vec::new(),
            config_index: HashMap::new(),
            config_parent: Vec::new(),
            nodes: Vec::new(),
            node_index: HashMap::new(),
            layers: vec![Vec::new()],
            causal_edges: Vec::new(),
            classes: vec![HashMap::new(); n],
        };
        for input in &input_space {
            if input.len() != n {
                return Err(Error::Arity { expected: n, found: input.len() });
            }
            let views: Vec<ViewId> =
                ProcessId::all(n).map(|p| frame.registry.initial_view(p, input.get(p).clone())).collect();
            let config = Configuration::new(views, &frame.registry)?;
            let cid = frame.intern_config(config, None);
            frame.add_node(cid, adv.initial(), 0, None);
        }
        frame.input_space = input_space;
        Ok(frame)
    }

    /// Builds layers `0..=depth`.
    pub fn explore(inputs: &[InputVector], adv: &Adversary, depth: u32) -> Result<Self> {
        let mut frame = SystemFrame::initial_layer(inputs, adv, ViewRegistry::new())?;
        for _ in 0..depth {
            frame.expand_layer(adv)?;
        }
        Ok(frame)
    }

    /// Appends the next layer: one child per node and allowed letter.
    pub fn expand_layer(&mut self, adv: &Adversary) -> Result<()> {
        if adv.n() != self.n {
            return Err(Error::Arity { expected: self.n, found: adv.n() });
        }
        let depth = self.depth();
        let parents = self.layers[depth as usize].clone();
        self.layers.push(Vec::new());
        for parent in parents {
            let (pcid, pstate) = {
                let node = &self.nodes[parent.index()];
                (node.config, node.state)
            };
            let views = self.configs[pcid.0 as usize].views.to_vec();
            for (letter, next_state) in adv.allowed_rounds(pstate)? {
                let next_views = self.registry.successor(&views, letter);
                let config = Configuration { views: next_views.into_boxed_slice(), depth: depth + 1 };
                let cid = self.intern_config(config, Some(pcid));
                let child = self.add_node(cid, *next_state, depth + 1, Some(parent));
                self.causal_edges.push(CausalEdge { parent, child, letter: letter.clone() });
            }
        }
        Ok(())
    }

    fn intern_config(&mut self, config: Configuration, parent: Option<ConfigId>) -> ConfigId {
        if let Some(&id) = self.config_index.get(&config) {
            return id;
        }
        let id = ConfigId(self.configs.len() as u32);
        self.config_index.insert(config.clone(), id);
        self.configs.push(config);
        self.config_parent.push(parent);
        id
    }

    fn add_node(&mut self, config: ConfigId, state: StateId, depth: u32, parent: Option<NodeId>) -> NodeId {
        let id = match self.node_index.get(&(config, state)) {
            Some(&id) => id,
            None => {
                let id = NodeId(self.nodes.len() as u32);
                self.nodes.push(Node { config, state, depth, parents: Vec::new(), children: Vec::new() });
                self.node_index.insert((config, state), id);
                self.layers[depth as usize].push(id);
                for p in 0..self.n {
                    let view = self.configs[config.0 as usize].views[p];
                    self.classes[p].entry(view).or_default().push(id);
                }
                id
            }
        };
        if let Some(parent) = parent {
            if !self.nodes[id.index()].parents.contains(&parent) {
                self.nodes[id.index()].parents.push(parent);
                self.nodes[parent.index()].children.push(id);
            }
        }
        id
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn registry(&self) -> &Arc<ViewRegistry> {
        &self.registry
    }

    pub fn input_space(&self) -> &[InputVector] {
        &self.input_space
    }

    /// Index of the deepest explored layer.
    pub fn depth(&self) -> u32 {
        (self.layers.len() - 1) as u32
    }

    pub fn layers(&self) -> &[Vec<NodeId>] {
        &self.layers
    }

    pub fn layer(&self, depth: u32) -> &[NodeId] {
        self.layers.get(depth as usize).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn node(&self, id: NodeId) -> Result<&Node> {
        self.nodes.get(id.index()).ok_or(Error::UnknownNode(id.0))
    }

    pub fn causal_edges(&self) -> &[CausalEdge] {
        &self.causal_edges
    }

    pub fn config(&self, id: NodeId) -> &Configuration {
        &self.configs[self.nodes[id.index()].config.0 as usize]
    }

    pub fn config_id(&self, id: NodeId) -> ConfigId {
        self.nodes[id.index()].config
    }

    pub fn node_depth(&self, id: NodeId) -> u32 {
        self.nodes[id.index()].depth
    }

    pub fn view(&self, id: NodeId, p: ProcessId) -> ViewId {
        project_local(self.config(id), p)
    }

    /// `p`'s view in the ancestor configuration of `id` at `depth`.
    pub fn view_at(&self, id: NodeId, p: ProcessId, depth: u32) -> ViewId {
        let mut cid = self.nodes[id.index()].config;
        let mut d = self.nodes[id.index()].depth;
        while d > depth {
            cid = self.config_parent[cid.0 as usize].expect("non-root configuration has a parent");
            d -= 1;
        }
        self.configs[cid.0 as usize].views[p.0]
    }

    pub fn inputs_of(&self, id: NodeId) -> InputVector {
        self.registry.project_inputs(self.config(id))
    }

    pub fn render(&self, id: NodeId) -> String {
        self.registry.render_config(self.config(id))
    }

    /// Looks a node up by its rendering, e.g. `(0,1→)`.
    pub fn find_rendered(&self, rendering: &str) -> Option<NodeId> {
        self.nodes().find(|&id| self.render(id) == rendering)
    }

    /// `N_p(g)`: every node where `p` holds the same view as in `g` (includes `g`).
    pub fn indist_class(&self, g: NodeId, p: ProcessId) -> &[NodeId] {
        let view = self.view(g, p);
        self.classes[p.0].get(&view).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn indistinguishable(&self, g: NodeId, h: NodeId, p: ProcessId) -> bool {
        self.view(g, p) == self.view(h, p)
    }

    /// Every unordered pair of distinct nodes sharing some process' view.
    pub fn indistinguishability_edges(&self) -> Vec<IndistEdge> {
        let mut edges = Vec::new();
        for (p, classes) in self.classes.iter().enumerate() {
            for members in classes.values() {
                for (i, &g) in members.iter().enumerate() {
                    for &h in &members[i + 1..] {
                        let (g, h) = if g < h { (g, h) } else { (h, g) };
                        edges.push(IndistEdge { g, h, p: ProcessId(p) });
                    }
                }
            }
        }
        edges.sort();
        edges
    }

    /// `x ≤ y`: a directed causal path leads from `x` to `y` (reflexive).
    pub fn causally_precedes(&self, x: NodeId, y: NodeId) -> Result<bool> {
        let target_depth = self.node(x)?.depth;
        self.node(y)?;
        let mut frontier = vec![y];
        let mut seen = BTreeSet::new();
        while let Some(cur) = frontier.pop() {
            if cur == x {
                return Ok(true);
            }
            if self.nodes[cur.index()].depth <= target_depth || !seen.insert(cur) {
                continue;
            }
            frontier.extend(self.nodes[cur.index()].parents.iter().copied());
        }
        Ok(false)
    }

    /// All nodes `≤` some member of `set` (the members included).
    pub fn ancestors(&self, set: impl IntoIterator<Item = NodeId>) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<NodeId> = set.into_iter().collect();
        while let Some(cur) = stack.pop() {
            if out.insert(cur) {
                stack.extend(self.nodes[cur.index()].parents.iter().copied());
            }
        }
        out
    }

    /// All nodes `≥` some member of `set` up to `max_depth` (the members included).
    pub fn descendants(&self, set: impl IntoIterator<Item = NodeId>, max_depth: u32) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<NodeId> = set.into_iter().collect();
        while let Some(cur) = stack.pop() {
            if self.nodes[cur.index()].depth > max_depth {
                continue;
            }
            if out.insert(cur) {
                stack.extend(self.nodes[cur.index()].children.iter().copied());
            }
        }
        out
    }

    /// DOT rendering of layers `from..=to`: causal edges dashed,
    /// indistinguishability edges colored per process.
    pub fn to_dot(&self, from: u32, to: u32) -> String {
        let mut out = String::from("graph frame {\n  rankdir=LR;\n  node [shape=box, fontname=\"monospace\"];\n");
        let in_range = |id: NodeId| {
            let d = self.nodes[id.index()].depth;
            from <= d && d <= to
        };
        for layer in from..=to.min(self.depth()) {
            let _ = writeln!(out, "  subgraph layer_{layer} {{ rank=same;");
            for &id in self.layer(layer) {
                let _ = writeln!(out, "    n{} [label=\"{}\"];", id.0, escape(&self.render(id)));
            }
            out.push_str("  }\n");
        }
        for e in &self.causal_edges {
            if in_range(e.parent) && in_range(e.child) {
                let _ = writeln!(out, "  n{} -- n{} [style=dashed, dir=forward];", e.parent.0, e.child.0);
            }
        }
        for e in self.indistinguishability_edges() {
            if in_range(e.g) && in_range(e.h) {
                let _ = writeln!(
                    out,
                    "  n{} -- n{} [color={}, label=\"{}\", constraint=false];",
                    e.g.0,
                    e.h.0,
                    process_color(e.p),
                    e.p
                );
            }
        }
        out.push_str("}\n");
        out
    }
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Orange for `a`, green for `b`, then further distinct colors.
pub(crate) fn process_color(p: ProcessId) -> &'static str {
    const PALETTE: [&str; 6] = ["orange", "green", "blue", "red", "purple", "brown"];
    PALETTE[p.0 % PALETTE.len()]
}
