//! Task sheaves over system slices, global sections and the coboundary
//! matrix.
//!
//! Vertex stalks hold the valid output vectors of a configuration's input
//! vector; restriction to a `p`-labelled edge projects onto coordinate `p`.
//! Sections are found by backtracking with arc consistency. The coboundary
//! matrix and its kernel give a cheap necessary condition, never a verdict on
//! their own: stalks are discrete, so the kernel is only a relaxation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num::Zero;
use serde_json::{json, Map, Value as Json};

use crate::domain::{OutputVector, ProcessId, Value, Vector};
use crate::error::{Error, Result};
use crate::execution::NodeId;
use crate::linalg::{q, solve, AffineSpace, Matrix, Solution, Q};
use crate::slicing::SystemSlice;
use crate::task::{value_to_json, Task, ValueKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafVertex {
    pub node: NodeId,
    pub rendering: String,
}

/// An edge between vertex positions `g < h`, labelled by a process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SheafEdge {
    pub g: usize,
    pub h: usize,
    pub p: ProcessId,
}

#[derive(Clone, Debug)]
pub struct TaskSheaf {
    n: usize,
    kind: ValueKind,
    vertices: Vec<SheafVertex>,
    edges: Vec<SheafEdge>,
    /// Sorted lexicographically by component.
    vertex_stalks: Vec<Vec<OutputVector>>,
    edge_stalks: Vec<Vec<Value>>,
}

impl TaskSheaf {
    /// A sheaf over an abstract graph; vertex `i` is labelled `NodeId(i)`.
    pub fn from_stalks(
        n: usize,
        kind: ValueKind,
        stalks: Vec<Vec<OutputVector>>,
        edges: impl IntoIterator<Item = (usize, usize, ProcessId)>,
    ) -> Result<Self> {
        let vertices =
            (0..stalks.len()).map(|i| SheafVertex { node: NodeId(i as u32), rendering: format!("v{i}") }).collect();
        let edges = edges
            .into_iter()
            .map(|(a, b, p)| {
                if a == b || a >= stalks.len() || b >= stalks.len() || p.index() >= n {
                    return Err(Error::Invalid(format!("bad sheaf edge ({a},{b},{p})")));
                }
                Ok(SheafEdge { g: a.min(b), h: a.max(b), p })
            })
            .collect::<Result<BTreeSet<_>>>()?;
        Self::assemble(n, kind, vertices, edges.into_iter().collect(), stalks)
    }

    fn assemble(
        n: usize,
        kind: ValueKind,
        vertices: Vec<SheafVertex>,
        edges: Vec<SheafEdge>,
        stalks: Vec<Vec<OutputVector>>,
    ) -> Result<Self> {
        let mut vertex_stalks = Vec::with_capacity(stalks.len());
        for stalk in stalks {
            if stalk.iter().any(|x| x.len() != n) {
                return Err(Error::Arity {
                    expected: n,
                    found: stalk.iter().map(Vector::len).find(|&l| l != n).unwrap(),
                });
            }
            let sorted: BTreeSet<OutputVector> = stalk.into_iter().collect();
            vertex_stalks.push(sorted.into_iter().collect::<Vec<_>>());
        }
        let edge_stalks = edges
            .iter()
            .map(|e| {
                let values: BTreeSet<Value> = vertex_stalks[e.g]
                    .iter()
                    .chain(&vertex_stalks[e.h])
                    .map(|x: &OutputVector| x.get(e.p).clone())
                    .collect();
                values.into_iter().collect()
            })
            .collect();
        Ok(TaskSheaf { n, kind, vertices, edges, vertex_stalks, edge_stalks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn vertices(&self) -> &[SheafVertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[SheafEdge] {
        &self.edges
    }

    pub fn vertex_stalk(&self, pos: usize) -> &[OutputVector] {
        &self.vertex_stalks[pos]
    }

    pub fn edge_stalk(&self, edge: usize) -> &[Value] {
        &self.edge_stalks[edge]
    }

    pub fn position(&self, node: NodeId) -> Option<usize> {
        self.vertices.iter().position(|v| v.node == node)
    }

    pub fn stalk_sizes(&self) -> Vec<usize> {
        self.vertex_stalks.iter().map(Vec::len).collect()
    }

    /// The restriction map from vertex `pos` to incident edge `edge`.
    pub fn restrict(&self, pos: usize, edge: usize, x: &OutputVector) -> Result<Value> {
        let e = self.edges.get(edge).ok_or_else(|| Error::Invalid(format!("no edge {edge}")))?;
        if e.g != pos && e.h != pos {
            return Err(Error::Invalid(format!("edge {edge} is not incident to vertex {pos}")));
        }
        if !self.vertex_stalks[pos].contains(x) {
            return Err(Error::Invalid(format!("{x} is not in the stalk of vertex {pos}")));
        }
        Ok(x.get(e.p).clone())
    }

    /// Whether `section` is a global section of this sheaf.
    pub fn is_section(&self, section: &Section) -> bool {
        section.assignment.len() == self.vertices.len()
            && section.assignment.iter().zip(&self.vertex_stalks).all(|(x, s)| s.contains(x))
            && self.edges.iter().all(|e| section.assignment[e.g].get(e.p) == section.assignment[e.h].get(e.p))
    }
}

/// Builds the task sheaf of `task` over `slice`.
pub fn build_sheaf(slice: &SystemSlice, task: &Task) -> Result<TaskSheaf> {
    if slice.n != task.n() {
        return Err(Error::Arity { expected: task.n(), found: slice.n });
    }
    let vertices = slice.configs.iter().map(|c| SheafVertex { node: c.node, rendering: c.rendering.clone() }).collect();
    let stalks = slice.configs.iter().map(|c| task.delta(&c.inputs).map(<[_]>::to_vec)).collect::<Result<Vec<_>>>()?;
    let edges = slice
        .edges
        .iter()
        .map(|e| {
            let g = slice.position(e.g).ok_or(Error::UnknownNode(e.g.0))?;
            let h = slice.position(e.h).ok_or(Error::UnknownNode(e.h.0))?;
            Ok(SheafEdge { g: g.min(h), h: g.max(h), p: e.p })
        })
        .collect::<Result<BTreeSet<_>>>()?;
    TaskSheaf::assemble(slice.n, task.kind(), vertices, edges.into_iter().collect(), stalks)
}

/// One output vector per vertex position; edge values follow by restriction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Section {
    pub assignment: Vec<OutputVector>,
}

impl Section {
    pub fn get(&self, sheaf: &TaskSheaf, node: NodeId) -> Option<&OutputVector> {
        sheaf.position(node).map(|i| &self.assignment[i])
    }

    pub fn to_json(&self, sheaf: &TaskSheaf) -> Json {
        let mut map = Map::new();
        for (v, x) in sheaf.vertices.iter().zip(&self.assignment) {
            map.insert(v.rendering.clone(), Json::Array(x.0.iter().map(value_to_json).collect()));
        }
        Json::Object(map)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Search nodes visited (value assignments tried).
    pub nodes: u64,
    pub components: usize,
}

/// Interned projections: `proj[v][k][p]` is the id of `π_p(stalk(v)[k])`.
struct Csp {
    proj: Vec<Vec<Vec<u32>>>,
    /// Per vertex: (neighbour, process) pairs.
    adj: Vec<Vec<(usize, usize)>>,
}

impl Csp {
    fn new(sheaf: &TaskSheaf) -> Self {
        let mut ids: HashMap<&Value, u32> = HashMap::new();
        let proj = sheaf
            .vertex_stalks
            .iter()
            .map(|stalk| {
                stalk
                    .iter()
                    .map(|x| {
                        x.0.iter()
                            .map(|v| {
                                let next = ids.len() as u32;
                                *ids.entry(v).or_insert(next)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut adj = vec![Vec::new(); sheaf.vertices.len()];
        for e in &sheaf.edges {
            adj[e.g].push((e.h, e.p.index()));
            adj[e.h].push((e.g, e.p.index()));
        }
        Csp { proj, adj }
    }

    /// Removes values of `x` with no `p`-compatible support in `y`.
    fn revise(&self, domains: &mut [Vec<u32>], x: usize, y: usize, p: usize) -> bool {
        let support: BTreeSet<u32> = domains[y].iter().map(|&k| self.proj[y][k as usize][p]).collect();
        let before = domains[x].len();
        let proj = &self.proj[x];
        domains[x].retain(|&k| support.contains(&proj[k as usize][p]));
        domains[x].len() != before
    }

    /// AC-3 starting from the arcs pointing at `seeds`; false on a wipe-out.
    fn propagate(&self, domains: &mut [Vec<u32>], seeds: &[usize]) -> bool {
        let mut queue: Vec<(usize, usize, usize)> = Vec::new();
        for &s in seeds {
            for &(nb, p) in &self.adj[s] {
                queue.push((nb, s, p));
            }
        }
        while let Some((x, y, p)) = queue.pop() {
            if self.revise(domains, x, y, p) {
                if domains[x].is_empty() {
                    return false;
                }
                for &(nb, q) in &self.adj[x] {
                    if nb != y || q != p {
                        queue.push((nb, x, q));
                    }
                }
            }
        }
        true
    }

    fn search(&self, order: &[usize], depth: usize, domains: &mut Vec<Vec<u32>>, stats: &mut SolveStats) -> bool {
        let Some(&var) = order.get(depth) else { return true };
        let options = domains[var].clone();
        for k in options {
            stats.nodes += 1;
            let saved = domains.clone();
            domains[var] = vec![k];
            if self.propagate(domains, &[var]) && self.search(order, depth + 1, domains, stats) {
                return true;
            }
            *domains = saved;
        }
        false
    }
}

fn components(sheaf: &TaskSheaf) -> Vec<Vec<usize>> {
    let count = sheaf.vertices.len();
    let mut parent: Vec<usize> = (0..count).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in &sheaf.edges {
        let (a, b) = (find(&mut parent, e.g), find(&mut parent, e.h));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..count {
        let root = find(&mut parent, v);
        groups.entry(root).or_default().push(v);
    }
    groups.into_values().collect()
}

/// Finds a global section, or `None`.
///
/// Components of the edge graph are solved independently. Within a component
/// variables are tried by decreasing degree, then by position; values in
/// lexicographic order. The result is the first section in that order.
pub fn find_section(sheaf: &TaskSheaf) -> Option<Section> {
    solve_sections(sheaf).0
}

pub fn solve_sections(sheaf: &TaskSheaf) -> (Option<Section>, SolveStats) {
    let csp = Csp::new(sheaf);
    let mut stats = SolveStats::default();
    let mut domains: Vec<Vec<u32>> = sheaf.vertex_stalks.iter().map(|s| (0..s.len() as u32).collect()).collect();
    if domains.iter().any(Vec::is_empty) {
        return (None, stats);
    }
    let all: Vec<usize> = (0..domains.len()).collect();
    if !csp.propagate(&mut domains, &all) {
        return (None, stats);
    }
    let comps = components(sheaf);
    stats.components = comps.len();
    for comp in comps {
        let mut order = comp;
        order.sort_by_key(|&v| (std::cmp::Reverse(csp.adj[v].len()), v));
        if !csp.search(&order, 0, &mut domains, &mut stats) {
            return (None, stats);
        }
    }
    let assignment = domains.iter().enumerate().map(|(v, d)| sheaf.vertex_stalks[v][d[0] as usize].clone()).collect();
    (Some(Section { assignment }), stats)
}

/// Every section by exhaustive enumeration, in lexicographic order of the
/// assignment (vertex 0 most significant), truncated at `limit`.
pub fn enumerate_sections(sheaf: &TaskSheaf, limit: usize, bound: u128) -> Result<Vec<Section>> {
    let product = sheaf.vertex_stalks.iter().fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128));
    if product > bound {
        return Err(Error::OracleBound { product, bound });
    }
    let mut out = Vec::new();
    if product == 0 || limit == 0 {
        return Ok(out);
    }
    let sizes: Vec<usize> = sheaf.vertex_stalks.iter().map(Vec::len).collect();
    let mut idx = vec![0usize; sizes.len()];
    loop {
        let ok = sheaf
            .edges
            .iter()
            .all(|e| sheaf.vertex_stalks[e.g][idx[e.g]].get(e.p) == sheaf.vertex_stalks[e.h][idx[e.h]].get(e.p));
        if ok {
            out.push(Section {
                assignment: idx.iter().enumerate().map(|(v, &k)| sheaf.vertex_stalks[v][k].clone()).collect(),
            });
            if out.len() >= limit {
                return Ok(out);
            }
        }
        // odometer, last vertex fastest
        let mut pos = sizes.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < sizes[pos] {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Edge orientation used for the rows of the coboundary matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Lower node id to higher node id, rows in edge order.
    Ascending,
    /// Higher node id to lower node id, rows in edge order.
    Descending,
    /// `(from, to, p)` per edge, rows in the listed order.
    Explicit(Vec<(NodeId, NodeId, ProcessId)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrientedEdge {
    pub from: usize,
    pub to: usize,
    pub p: ProcessId,
}

/// `d(x)_e = π_p(x_to) − π_p(x_from)` flattened: column `pos·n + p` holds
/// coordinate `p` of vertex `pos`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoboundaryMatrix {
    pub n: usize,
    pub rows: Vec<OrientedEdge>,
    /// `(vertex position, process)` per column.
    pub cols: Vec<(usize, ProcessId)>,
    /// `(row, col, ±1)`.
    pub entries: Vec<(usize, usize, i64)>,
}

impl CoboundaryMatrix {
    pub fn dims(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    pub fn dense(&self) -> Matrix {
        Matrix::from_triplets(self.rows.len(), self.cols.len(), self.entries.iter().copied())
    }

    pub fn col(&self, pos: usize, p: ProcessId) -> usize {
        pos * self.n + p.index()
    }

    /// Plain-text exchange format: labelled rows and columns, then triplets.
    pub fn to_text(&self, sheaf: &TaskSheaf) -> String {
        let mut out = String::new();
        let (r, c) = self.dims();
        let _ = writeln!(out, "rows {r}\ncols {c}");
        for (i, e) in self.rows.iter().enumerate() {
            let _ = writeln!(
                out,
                "row {i} {} -> {} {}",
                sheaf.vertices[e.from].rendering, sheaf.vertices[e.to].rendering, e.p
            );
        }
        for (j, (pos, p)) in self.cols.iter().enumerate() {
            let _ = writeln!(out, "col {j} {} {p}", sheaf.vertices[*pos].rendering);
        }
        for (i, j, v) in &self.entries {
            let _ = writeln!(out, "entry {i} {j} {v}");
        }
        out
    }
}

fn require_rational(sheaf: &TaskSheaf) -> Result<()> {
    match sheaf.kind {
        ValueKind::Rational => Ok(()),
        ValueKind::Symbolic => Err(Error::SymbolicTask),
    }
}

pub fn coboundary_matrix(sheaf: &TaskSheaf, orientation: &Orientation) -> Result<CoboundaryMatrix> {
    require_rational(sheaf)?;
    let rows: Vec<OrientedEdge> = match orientation {
        Orientation::Ascending => sheaf.edges.iter().map(|e| OrientedEdge { from: e.g, to: e.h, p: e.p }).collect(),
        Orientation::Descending => sheaf.edges.iter().map(|e| OrientedEdge { from: e.h, to: e.g, p: e.p }).collect(),
        Orientation::Explicit(list) => {
            let mut remaining: BTreeSet<SheafEdge> = sheaf.edges.iter().copied().collect();
            let mut rows = Vec::with_capacity(list.len());
            for &(from, to, p) in list {
                let f = sheaf.position(from).ok_or(Error::UnknownNode(from.0))?;
                let t = sheaf.position(to).ok_or(Error::UnknownNode(to.0))?;
                if !remaining.remove(&SheafEdge { g: f.min(t), h: f.max(t), p }) {
                    return Err(Error::Invalid(format!("orientation lists a missing or repeated edge ({f},{t},{p})")));
                }
                rows.push(OrientedEdge { from: f, to: t, p });
            }
            if !remaining.is_empty() {
                return Err(Error::Invalid(format!("orientation omits {} edges", remaining.len())));
            }
            rows
        }
    };
    let n = sheaf.n;
    let cols = (0..sheaf.vertices.len()).flat_map(|pos| ProcessId::all(n).map(move |p| (pos, p))).collect();
    let entries = rows
        .iter()
        .enumerate()
        .flat_map(|(i, e)| [(i, e.to * n + e.p.index(), 1), (i, e.from * n + e.p.index(), -1)])
        .collect();
    Ok(CoboundaryMatrix { n, rows, cols, entries })
}

/// Exact basis of `{ x : M x = 0 }` in reduced form.
pub fn kernel(m: &CoboundaryMatrix) -> Vec<Vec<Q>> {
    m.dense().kernel()
}

/// Flattened column vector of a section (rational tasks only).
pub fn flatten(section: &Section) -> Result<Vec<Q>> {
    section
        .assignment
        .iter()
        .flat_map(|x| x.0.iter())
        .map(|v| v.as_rational().map(|r| q(&r)).ok_or(Error::SymbolicTask))
        .collect()
}

/// Whether `M · flatten(section) = 0` exactly.
pub fn annihilates(m: &CoboundaryMatrix, section: &Section) -> Result<bool> {
    let x = flatten(section)?;
    if x.len() != m.cols.len() {
        return Err(Error::Arity { expected: m.cols.len(), found: x.len() });
    }
    let mut residual = vec![Q::zero(); m.rows.len()];
    for &(i, j, v) in &m.entries {
        residual[i] += &x[j] * Q::from_integer(v.into());
    }
    Ok(residual.iter().all(Zero::is_zero))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelOutcome {
    SectionsImpossible,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct KernelCheck {
    pub outcome: KernelOutcome,
    /// Vertex positions pinned to their singleton stalk.
    pub pinned: Vec<usize>,
    /// `None` when the pinned system is inconsistent.
    pub solution: Option<AffineSpace>,
    /// Vertices whose projected solution set is a single point, with that point.
    pub forced: Vec<(usize, Vec<Q>)>,
    /// First vertex whose projected solution set misses its whole stalk.
    pub refuted_at: Option<usize>,
}

/// Solves `M x = 0` with singleton-stalk vertices pinned and reports whether
/// some vertex is left with no admissible stalk element.
pub fn kernel_section_check(sheaf: &TaskSheaf) -> Result<KernelCheck> {
    require_rational(sheaf)?;
    let m = coboundary_matrix(sheaf, &Orientation::Ascending)?;
    let n = sheaf.n;
    let pinned: Vec<usize> = (0..sheaf.vertices.len()).filter(|&v| sheaf.vertex_stalks[v].len() == 1).collect();
    let mut rows: Vec<Vec<Q>> = Vec::new();
    let mut rhs: Vec<Q> = Vec::new();
    let dense = m.dense();
    for i in 0..dense.rows() {
        rows.push(dense.get(i).to_vec());
        rhs.push(Q::zero());
    }
    for &v in &pinned {
        let x = &sheaf.vertex_stalks[v][0];
        for p in 0..n {
            let mut row = vec![Q::zero(); m.cols.len()];
            row[v * n + p] = num::One::one();
            rows.push(row);
            rhs.push(q(&x.0[p].as_rational().ok_or(Error::SymbolicTask)?));
        }
    }
    let system = Matrix::from_rows(m.cols.len(), rows);
    let space = match solve(&system, &rhs) {
        Solution::Inconsistent => {
            return Ok(KernelCheck {
                outcome: KernelOutcome::SectionsImpossible,
                pinned,
                solution: None,
                forced: Vec::new(),
                refuted_at: None,
            })
        }
        Solution::Affine(space) => space,
    };
    let mut forced = Vec::new();
    let mut refuted_at = None;
    for v in 0..sheaf.vertices.len() {
        let coords: Vec<usize> = (0..n).map(|p| v * n + p).collect();
        let local = space.project(&coords);
        if local.dim() == 0 {
            forced.push((v, local.point.clone()));
        }
        if refuted_at.is_none() {
            let admissible = sheaf.vertex_stalks[v].iter().any(|x| match flatten_vector(x) {
                Some(point) => local.contains(&point),
                None => true,
            });
            if !admissible {
                refuted_at = Some(v);
            }
        }
    }
    let outcome = if refuted_at.is_some() { KernelOutcome::SectionsImpossible } else { KernelOutcome::Inconclusive };
    Ok(KernelCheck { outcome, pinned, solution: Some(space), forced, refuted_at })
}

/// Same outcome as [`kernel_section_check`], computed without elimination.
///
/// Every row of the coboundary matrix equates one coordinate of two vertices,
/// so the solutions of `M x = 0` are the vectors whose `p`-coordinates are
/// constant on each connected component of the `p`-labelled edges. Pinning a
/// vertex fixes its components; other coordinates stay free.
pub fn pinned_components_outcome(sheaf: &TaskSheaf) -> Result<KernelOutcome> {
    require_rational(sheaf)?;
    let count = sheaf.vertices.len();
    let mut fixed: Vec<Vec<Option<&Value>>> = vec![vec![None; sheaf.n]; count];
    for p in ProcessId::all(sheaf.n) {
        let mut parent: Vec<usize> = (0..count).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in sheaf.edges.iter().filter(|e| e.p == p) {
            let (a, b) = (find(&mut parent, e.g), find(&mut parent, e.h));
            parent[a.max(b)] = a.min(b);
        }
        let mut pin: HashMap<usize, &Value> = HashMap::new();
        for v in 0..count {
            if let [x] = sheaf.vertex_stalks[v].as_slice() {
                let root = find(&mut parent, v);
                match pin.get(&root) {
                    Some(&c) if c != x.get(p) => return Ok(KernelOutcome::SectionsImpossible),
                    _ => {
                        pin.insert(root, x.get(p));
                    }
                }
            }
        }
        for (v, row) in fixed.iter_mut().enumerate() {
            row[p.index()] = pin.get(&find(&mut parent, v)).copied();
        }
    }
    let refuted = (0..count).any(|v| {
        !sheaf.vertex_stalks[v].iter().any(|x| fixed[v].iter().enumerate().all(|(p, c)| c.is_none_or(|c| x.0[p] == *c)))
    });
    Ok(if refuted { KernelOutcome::SectionsImpossible } else { KernelOutcome::Inconclusive })
}

fn flatten_vector(x: &OutputVector) -> Option<Vec<Q>> {
    x.0.iter().map(|v| v.as_rational().map(|r| q(&r))).collect()
}

/// JSON summary of a kernel check, with forced vectors rendered as rationals.
pub fn kernel_check_json(sheaf: &TaskSheaf, check: &KernelCheck) -> Json {
    let render = |v: &[Q]| Json::Array(v.iter().map(|x| Json::String(x.to_string())).collect());
    json!({
        "outcome": match check.outcome {
            KernelOutcome::SectionsImpossible => "sections_impossible",
            KernelOutcome::Inconclusive => "inconclusive",
        },
        "pinned": check.pinned.iter().map(|&v| sheaf.vertices[v].rendering.clone()).collect::<Vec<_>>(),
        "consistent": check.solution.is_some(),
        "solution_dimension": check.solution.as_ref().map(AffineSpace::dim),
        "forced": check.forced.iter().map(|(v, x)| json!({
            "config": sheaf.vertices[*v].rendering,
            "vector": render(x),
            "in_stalk": flatten_vector_set(&sheaf.vertex_stalks[*v]).iter().any(|s| s == x),
        })).collect::<Vec<_>>(),
        "refuted_at": check.refuted_at.map(|v| sheaf.vertices[v].rendering.clone()),
    })
}

fn flatten_vector_set(stalk: &[OutputVector]) -> Vec<Vec<Q>> {
    stalk.iter().filter_map(flatten_vector).collect()
}
