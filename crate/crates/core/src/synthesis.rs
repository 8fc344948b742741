//! Iterative-deepening synthesis: explore, cut, slice, solve, extract, verify.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Map, Value as Json};

use crate::adversary::Adversary;
use crate::domain::{InputVector, LocalView, ProcessId, Value, ViewId, ViewRegistry};
use crate::error::{Error, Result};
use crate::execution::{NodeId, SystemFrame};
use crate::sheaf::{
    annihilates, build_sheaf, coboundary_matrix, pinned_components_outcome, solve_sections, KernelOutcome, Orientation,
    Section,
};
use crate::slicing::{build_slice, enumerate_cuts, CutStrategy, ExecutionCut, SystemSlice};
use crate::task::{value_from_json, value_to_json, Task, ValueKind};
use crate::verifier::{verify, Verdict};

/// Per-process partial map from local views to output values; unmapped
/// views decide ⊥.
#[derive(Clone, Debug)]
pub struct DecisionMap {
    registry: Arc<ViewRegistry>,
    n: usize,
    decisions: Vec<BTreeMap<ViewId, Value>>,
}

impl PartialEq for DecisionMap {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.to_json() == other.to_json()
    }
}

impl DecisionMap {
    pub fn new(registry: Arc<ViewRegistry>, n: usize) -> Self {
        DecisionMap { registry, n, decisions: vec![BTreeMap::new(); n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn registry(&self) -> &Arc<ViewRegistry> {
        &self.registry
    }

    pub fn get(&self, p: ProcessId, view: ViewId) -> Option<&Value> {
        self.decisions.get(p.index()).and_then(|m| m.get(&view))
    }

    /// Adds an entry; a different value for an existing entry is an error.
    pub fn insert(&mut self, p: ProcessId, view: ViewId, value: Value) -> Result<()> {
        match self.decisions[p.index()].get(&view) {
            Some(old) if *old != value => Err(Error::Internal(format!(
                "view {} of {p} receives both {old} and {value}",
                self.registry.render_view(view)
            ))),
            Some(_) => Ok(()),
            None => {
                self.decisions[p.index()].insert(view, value);
                Ok(())
            }
        }
    }

    /// Sets an entry unconditionally, returning the previous value.
    pub fn set(&mut self, p: ProcessId, view: ViewId, value: Value) -> Option<Value> {
        self.decisions[p.index()].insert(view, value)
    }

    pub fn remove(&mut self, p: ProcessId, view: ViewId) -> Option<Value> {
        self.decisions[p.index()].remove(&view)
    }

    pub fn len(&self) -> usize {
        self.decisions.iter().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries in (process, view id) order.
    pub fn entries(&self) -> impl Iterator<Item = (ProcessId, ViewId, &Value)> + '_ {
        self.decisions.iter().enumerate().flat_map(|(p, m)| m.iter().map(move |(&v, x)| (ProcessId(p), v, x)))
    }

    /// Self-contained JSON: a table of the referenced views (children after
    /// the views they contain) and the decisions indexing into it.
    pub fn to_json(&self) -> Json {
        let mut needed: BTreeSet<(u32, ViewId)> = BTreeSet::new();
        let mut stack: Vec<ViewId> = self.entries().map(|(_, v, _)| v).collect();
        while let Some(v) = stack.pop() {
            let view = self.registry.get(v);
            if needed.insert((view.depth, v)) {
                stack.extend(view.prev);
                stack.extend(view.received.iter().flatten());
            }
        }
        let index: HashMap<ViewId, usize> = needed.iter().enumerate().map(|(i, &(_, v))| (v, i)).collect();
        let views: Vec<Json> = needed
            .iter()
            .map(|&(_, v)| {
                let view = self.registry.get(v);
                json!({
                    "pid": view.pid.index(),
                    "input": value_to_json(&view.input),
                    "depth": view.depth,
                    "prev": view.prev.map(|p| index[&p]),
                    "recv": view.received.iter().map(|r| r.map(|x| index[&x])).collect::<Vec<_>>(),
                })
            })
            .collect();
        let decisions: Vec<Json> = self
            .entries()
            .map(|(p, v, x)| {
                json!({
                    "process": p.index(),
                    "view": index[&v],
                    "value": value_to_json(x),
                    "rendering": self.registry.render_view(v),
                })
            })
            .collect();
        json!({ "n": self.n, "views": views, "decisions": decisions })
    }

    /// Loads a map into `registry` (a fresh one if `None`).
    pub fn from_json(doc: &Json, kind: ValueKind, registry: Option<Arc<ViewRegistry>>) -> Result<Self> {
        let registry = registry.unwrap_or_default();
        let bad = |what: &str| Error::Parse(format!("decision map: {what}"));
        let n = doc.get("n").and_then(Json::as_u64).ok_or_else(|| bad("missing n"))? as usize;
        if n == 0 {
            return Err(bad("n must be positive"));
        }
        let table = doc.get("views").and_then(Json::as_array).ok_or_else(|| bad("missing views"))?;
        let mut ids: Vec<ViewId> = Vec::with_capacity(table.len());
        let lookup = |ids: &[ViewId], j: &Json| -> Result<Option<ViewId>> {
            match j {
                Json::Null => Ok(None),
                other => {
                    let i = other.as_u64().ok_or_else(|| bad("view reference must be an index"))? as usize;
                    ids.get(i).copied().map(Some).ok_or_else(|| bad("view reference points forward"))
                }
            }
        };
        for entry in table {
            let pid = entry.get("pid").and_then(Json::as_u64).ok_or_else(|| bad("view without pid"))? as usize;
            if pid >= n {
                return Err(bad("pid out of range"));
            }
            let input = value_from_json(entry.get("input").ok_or_else(|| bad("view without input"))?, kind)?;
            let prev = lookup(&ids, entry.get("prev").unwrap_or(&Json::Null))?;
            let received = match entry.get("recv").and_then(Json::as_array) {
                Some(list) => list.iter().map(|j| lookup(&ids, j)).collect::<Result<Vec<_>>>()?,
                None => Vec::new(),
            };
            let depth = match prev {
                None => 0,
                Some(p) => {
                    let pv = registry.get(p);
                    if pv.pid.index() != pid || pv.input != input || received.len() != n || received[pid].is_some() {
                        return Err(bad("inconsistent view history"));
                    }
                    if received.iter().flatten().any(|&r| registry.get(r).depth != pv.depth) {
                        return Err(bad("received view from the wrong round"));
                    }
                    pv.depth + 1
                }
            };
            if prev.is_none() && !received.is_empty() {
                return Err(bad("initial view with messages"));
            }
            if let Some(d) = entry.get("depth").and_then(Json::as_u64) {
                if d != u64::from(depth) {
                    return Err(bad("depth does not match history"));
                }
            }
            ids.push(registry.intern(LocalView { pid: ProcessId(pid), input, depth, prev, received }));
        }
        let mut dm = DecisionMap::new(registry.clone(), n);
        for d in doc.get("decisions").and_then(Json::as_array).ok_or_else(|| bad("missing decisions"))? {
            let p = d.get("process").and_then(Json::as_u64).ok_or_else(|| bad("decision without process"))? as usize;
            let view =
                lookup(&ids, d.get("view").unwrap_or(&Json::Null))?.ok_or_else(|| bad("decision without view"))?;
            if p >= n || registry.get(view).pid.index() != p {
                return Err(bad("decision process does not own the view"));
            }
            let value = value_from_json(d.get("value").ok_or_else(|| bad("decision without value"))?, kind)?;
            dm.insert(ProcessId(p), view, value).map_err(|e| bad(&e.to_string()))?;
        }
        Ok(dm)
    }
}

/// `δ_p(π_p(g)) = π_p(s(g))` for every configuration `g` of the slice.
pub fn extract_decision_map(
    slice: &SystemSlice,
    section: &Section,
    registry: Arc<ViewRegistry>,
) -> Result<DecisionMap> {
    if section.assignment.len() != slice.configs.len() {
        return Err(Error::Internal("section does not match the slice".into()));
    }
    let mut dm = DecisionMap::new(registry, slice.n);
    for (config, out) in slice.configs.iter().zip(&section.assignment) {
        for p in ProcessId::all(slice.n) {
            dm.insert(p, config.config.views[p.index()], out.get(p).clone())?;
        }
    }
    Ok(dm)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SynthesisStats {
    pub layer_sizes: Vec<usize>,
    pub cuts_examined: u64,
    /// Cuts skipped because two members are consistency-related with
    /// disjoint projected stalks.
    pub cuts_pruned: u128,
    pub kernel_refutations: u64,
    pub solver_nodes: u64,
    pub max_slice_size: usize,
    pub max_stalk_size: usize,
    pub verifier_rejections: u64,
}

#[derive(Clone, Debug)]
pub enum SynthesisVerdict {
    Synthesized { decision_map: DecisionMap, depth: u32, cut: Vec<String>, section: Json, verified: bool },
    NoSectionUpTo { max_depth: u32, cuts_examined: u64 },
}

#[derive(Clone, Debug)]
pub struct SynthesisReport {
    pub verdict: SynthesisVerdict,
    pub strategy: CutStrategy,
    pub max_depth: u32,
    pub inputs: Vec<InputVector>,
    pub stats: SynthesisStats,
}

impl SynthesisReport {
    pub fn is_synthesized(&self) -> bool {
        matches!(self.verdict, SynthesisVerdict::Synthesized { .. })
    }

    pub fn depth(&self) -> Option<u32> {
        match &self.verdict {
            SynthesisVerdict::Synthesized { depth, .. } => Some(*depth),
            SynthesisVerdict::NoSectionUpTo { .. } => None,
        }
    }

    pub fn decision_map(&self) -> Option<&DecisionMap> {
        match &self.verdict {
            SynthesisVerdict::Synthesized { decision_map, .. } => Some(decision_map),
            SynthesisVerdict::NoSectionUpTo { .. } => None,
        }
    }

    pub fn to_json(&self) -> Json {
        let s = &self.stats;
        let mut out = Map::new();
        let inputs: Vec<Json> =
            self.inputs.iter().map(|i| Json::Array(i.0.iter().map(value_to_json).collect())).collect();
        match &self.verdict {
            SynthesisVerdict::Synthesized { decision_map, depth, cut, section, verified } => {
                out.insert("verdict".into(), json!("synthesized"));
                out.insert("depth".into(), json!(depth));
                out.insert("cut".into(), json!(cut));
                out.insert("section".into(), section.clone());
                out.insert("decision_map".into(), decision_map.to_json());
                out.insert("verified".into(), json!(verified));
            }
            SynthesisVerdict::NoSectionUpTo { max_depth, .. } => {
                out.insert("verdict".into(), json!("no_section_up_to"));
                out.insert("depth".into(), Json::Null);
                out.insert(
                    "note".into(),
                    json!(format!(
                        "no examined cut up to depth {max_depth} admits a section; \
                         this is a bounded search result, not an impossibility proof"
                    )),
                );
            }
        }
        out.insert("max_depth".into(), json!(self.max_depth));
        out.insert(
            "strategy".into(),
            json!(match self.strategy {
                CutStrategy::Uniform => "uniform",
                CutStrategy::Antichain => "antichain",
            }),
        );
        out.insert("inputs".into(), Json::Array(inputs));
        out.insert(
            "statistics".into(),
            json!({
                "layer_sizes": s.layer_sizes,
                "cuts_examined": s.cuts_examined,
                "cuts_pruned": s.cuts_pruned.to_string(),
                "kernel_refutations": s.kernel_refutations,
                "solver_nodes": s.solver_nodes,
                "max_slice_size": s.max_slice_size,
                "max_stalk_size": s.max_stalk_size,
                "verifier_rejections": s.verifier_rejections,
            }),
        );
        Json::Object(out)
    }
}

struct CutEval {
    slice: SystemSlice,
    section: Option<Section>,
    kernel_refuted: bool,
    solver_nodes: u64,
    max_stalk: usize,
}

fn evaluate(frame: &SystemFrame, task: &Task, cut: &ExecutionCut) -> Result<CutEval> {
    let slice = build_slice(frame, cut)?;
    let sheaf = build_sheaf(&slice, task)?;
    let max_stalk = sheaf.stalk_sizes().into_iter().max().unwrap_or(0);
    let pinnable = sheaf.stalk_sizes().contains(&1);
    if task.kind() == ValueKind::Rational
        && pinnable
        && !sheaf.edges().is_empty()
        && pinned_components_outcome(&sheaf)? == KernelOutcome::SectionsImpossible
    {
        return Ok(CutEval { slice, section: None, kernel_refuted: true, solver_nodes: 0, max_stalk });
    }
    let (section, stats) = solve_sections(&sheaf);
    if let Some(s) = &section {
        if task.kind() == ValueKind::Rational {
            let m = coboundary_matrix(&sheaf, &Orientation::Ascending)?;
            if !annihilates(&m, s)? {
                return Err(Error::Internal("section outside the coboundary kernel".into()));
            }
        }
    }
    Ok(CutEval { slice, section, kernel_refuted: false, solver_nodes: stats.nodes, max_stalk })
}

/// Pairs of nodes that can never both be cut members of a slice with a
/// section: `p`-consistent, with disjoint `p`-projections of their stalks.
struct ConflictTable {
    history: Vec<Vec<Vec<ViewId>>>,
    input_of: Vec<usize>,
    disjoint: Vec<Vec<Vec<bool>>>,
}

impl ConflictTable {
    fn new(frame: &SystemFrame, task: &Task) -> Result<Self> {
        let n = frame.n();
        let inputs = frame.input_space();
        let proj: Vec<Vec<BTreeSet<Value>>> = inputs
            .iter()
            .map(|i| {
                let delta = task.delta(i)?;
                Ok(ProcessId::all(n).map(|p| delta.iter().map(|x| x.get(p).clone()).collect()).collect())
            })
            .collect::<Result<_>>()?;
        let disjoint = (0..n)
            .map(|p| {
                (0..inputs.len())
                    .map(|i| (0..inputs.len()).map(|j| proj[i][p].is_disjoint(&proj[j][p])).collect())
                    .collect()
            })
            .collect();
        let index: HashMap<&InputVector, usize> = inputs.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut history = Vec::with_capacity(frame.node_count());
        let mut input_of = Vec::with_capacity(frame.node_count());
        for x in frame.nodes() {
            let d = frame.node_depth(x);
            history.push(ProcessId::all(n).map(|p| (0..=d).map(|k| frame.view_at(x, p, k)).collect()).collect());
            input_of.push(index[&frame.inputs_of(x)]);
        }
        Ok(ConflictTable { history, input_of, disjoint })
    }

    fn conflict(&self, x: NodeId, y: NodeId) -> bool {
        let (hx, hy) = (&self.history[x.index()], &self.history[y.index()]);
        let (ix, iy) = (self.input_of[x.index()], self.input_of[y.index()]);
        (0..hx.len()).any(|p| {
            if !self.disjoint[p][ix][iy] {
                return false;
            }
            let d = hx[p].len().min(hy[p].len()) - 1;
            hx[p][d] == hy[p][d]
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SynthesisOptions {
    pub max_depth: u32,
    pub strategy: CutStrategy,
    /// Worker threads for cut evaluation; the report does not depend on it.
    pub jobs: usize,
    /// Skip antichain cuts containing a pair that rules out every section.
    pub prune: bool,
    /// Give up with [`Error::Limit`] after examining this many cuts.
    pub max_cuts: Option<u64>,
}

impl SynthesisOptions {
    pub fn new(max_depth: u32, strategy: CutStrategy) -> Self {
        SynthesisOptions { max_depth, strategy, jobs: 1, prune: true, max_cuts: None }
    }
}

/// Searches cuts of nondecreasing max depth up to `max_depth` for a slice
/// whose task sheaf has a section, and returns the first verified one.
pub fn synthesize(
    adv: &Adversary,
    task: &Task,
    inputs: &[InputVector],
    max_depth: u32,
    strategy: CutStrategy,
    jobs: usize,
) -> Result<SynthesisReport> {
    let options = SynthesisOptions { jobs, ..SynthesisOptions::new(max_depth, strategy) };
    synthesize_with(adv, task, inputs, &options)
}

pub fn synthesize_with(
    adv: &Adversary,
    task: &Task,
    inputs: &[InputVector],
    options: &SynthesisOptions,
) -> Result<SynthesisReport> {
    let SynthesisOptions { max_depth, strategy, jobs, prune, max_cuts } = *options;
    let n = task.n();
    if adv.n() != n {
        return Err(Error::Arity { expected: n, found: adv.n() });
    }
    for input in inputs {
        task.delta(input)?;
    }
    let pool = if jobs > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::Internal(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };
    let batch = jobs.max(1) * 8;
    let registry = ViewRegistry::new();
    let mut frame = SystemFrame::initial_layer(inputs, adv, registry.clone())?;
    let mut stats = SynthesisStats::default();

    for depth in 0..=max_depth {
        if depth > 0 {
            frame.expand_layer(adv)?;
        }
        stats.layer_sizes = frame.layer_sizes();
        let table = match strategy {
            CutStrategy::Antichain if prune => Some(ConflictTable::new(&frame, task)?),
            _ => None,
        };
        let mut stream = enumerate_cuts(&frame, depth, strategy)?.only_depth(depth);
        if let Some(t) = &table {
            stream = stream.with_conflicts(move |x, y| t.conflict(x, y));
        }
        loop {
            let cuts: Vec<ExecutionCut> = stream.by_ref().take(batch).collect();
            if cuts.is_empty() {
                break;
            }
            let results: Vec<Result<CutEval>> = match &pool {
                Some(pool) => pool.install(|| cuts.par_iter().map(|c| evaluate(&frame, task, c)).collect()),
                None => cuts.iter().map(|c| evaluate(&frame, task, c)).collect(),
            };
            for (cut, result) in cuts.iter().zip(results) {
                let eval = result?;
                if max_cuts.is_some_and(|m| stats.cuts_examined >= m) {
                    return Err(Error::Limit(format!("more than {} cuts examined", stats.cuts_examined)));
                }
                stats.cuts_examined += 1;
                stats.solver_nodes += eval.solver_nodes;
                stats.kernel_refutations += u64::from(eval.kernel_refuted);
                stats.max_slice_size = stats.max_slice_size.max(eval.slice.configs.len());
                stats.max_stalk_size = stats.max_stalk_size.max(eval.max_stalk);
                let Some(section) = eval.section else { continue };
                let dm = extract_decision_map(&eval.slice, &section, registry.clone())?;
                let verdict = verify(adv, task, inputs, &dm, depth)?;
                if verdict != Verdict::Pass {
                    stats.verifier_rejections += 1;
                    continue;
                }
                let sheaf = build_sheaf(&eval.slice, task)?;
                stats.cuts_pruned = stats.cuts_pruned.saturating_add(stream.pruned());
                return Ok(SynthesisReport {
                    verdict: SynthesisVerdict::Synthesized {
                        decision_map: dm,
                        depth,
                        cut: cut.members.iter().map(|&m| frame.render(m)).collect(),
                        section: section.to_json(&sheaf),
                        verified: true,
                    },
                    strategy,
                    max_depth,
                    inputs: inputs.to_vec(),
                    stats,
                });
            }
        }
        stats.cuts_pruned = stats.cuts_pruned.saturating_add(stream.pruned());
    }
    Ok(SynthesisReport {
        verdict: SynthesisVerdict::NoSectionUpTo { max_depth, cuts_examined: stats.cuts_examined },
        strategy,
        max_depth,
        inputs: inputs.to_vec(),
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{builtin_lossy_link, builtin_reliable};
    use crate::domain::Vector;
    use crate::task::{builtin_consensus, product_vectors};

    fn binary() -> Vec<Vector> {
        product_vectors(&[Value::int(0), Value::int(1)], 2)
    }

    fn consensus() -> Task {
        builtin_consensus(2, &[Value::int(0), Value::int(1)]).unwrap()
    }

    #[test]
    fn reliable_consensus_at_depth_one() {
        let adv = builtin_reliable(2).unwrap();
        let report = synthesize(&adv, &consensus(), &binary(), 1, CutStrategy::Uniform, 1).unwrap();
        assert_eq!(report.depth(), Some(1));
        let dm = report.decision_map().unwrap();
        // min-value consensus is the lexicographically first choice
        for input in binary() {
            let registry = dm.registry();
            let init: Vec<ViewId> = ProcessId::all(2).map(|p| registry.initial_view(p, input.get(p).clone())).collect();
            let next = registry.successor(&init, &crate::adversary::RoundDigraph::complete(2));
            let expected = if input == Vector::from_ints(&[1, 1]) { 1 } else { 0 };
            for p in ProcessId::all(2) {
                assert_eq!(dm.get(p, next[p.index()]), Some(&Value::int(expected)));
            }
        }
    }

    #[test]
    fn consensus_on_lossy_link_has_no_section_up_to_two() {
        let adv = builtin_lossy_link(2).unwrap();
        let report = synthesize(&adv, &consensus(), &binary(), 2, CutStrategy::Uniform, 1).unwrap();
        assert!(!report.is_synthesized());
        assert_eq!(report.stats.cuts_examined, 3);
        let j = report.to_json();
        assert_eq!(j["verdict"], "no_section_up_to");
        assert!(j["note"].as_str().unwrap().contains("not an impossibility proof"));
    }

    #[test]
    fn constant_task_maps_every_view() {
        let adv = builtin_lossy_link(2).unwrap();
        let inputs = binary();
        let out = Vector::from_ints(&[7, 7]);
        let delta = inputs.iter().map(|i| (i.clone(), vec![out.clone()])).collect::<Vec<_>>();
        let task = Task::new(2, ValueKind::Rational, inputs.clone(), vec![out], delta).unwrap();
        let report = synthesize(&adv, &task, &inputs, 1, CutStrategy::Uniform, 1).unwrap();
        assert_eq!(report.depth(), Some(0));
        let dm = report.decision_map().unwrap();
        assert_eq!(dm.len(), 4);
        assert!(dm.entries().all(|(_, _, v)| *v == Value::int(7)));
    }

    #[test]
    fn decision_map_json_round_trip() {
        let adv = builtin_reliable(2).unwrap();
        let report = synthesize(&adv, &consensus(), &binary(), 1, CutStrategy::Uniform, 1).unwrap();
        let dm = report.decision_map().unwrap();
        let doc = dm.to_json();
        let back = DecisionMap::from_json(&doc, ValueKind::Rational, None).unwrap();
        assert_eq!(&back, dm);
        assert!(verify(&adv, &consensus(), &binary(), &back, 1).unwrap().is_pass());

        let mut broken = doc.clone();
        broken["decisions"][0]["process"] = json!(1);
        assert!(DecisionMap::from_json(&broken, ValueKind::Rational, None).is_err());
        let mut forward = doc;
        forward["views"][0]["prev"] = json!(5);
        assert!(DecisionMap::from_json(&forward, ValueKind::Rational, None).is_err());
    }

    #[test]
    fn extraction_rejects_conflicting_values() {
        let adv = builtin_lossy_link(2).unwrap();
        let frame = SystemFrame::explore(&binary(), &adv, 0).unwrap();
        let slice = build_slice(&frame, &ExecutionCut::layer(&frame, 0)).unwrap();
        let v = |a, b| Vector::from_ints(&[a, b]);
        // (0,0) and (0,1) share a's view but disagree on a's value
        let bad = Section { assignment: vec![v(0, 0), v(1, 1), v(1, 1), v(1, 1)] };
        assert!(matches!(extract_decision_map(&slice, &bad, frame.registry().clone()), Err(Error::Internal(_))));
        let one = Section { assignment: vec![v(0, 0); 4] };
        assert_eq!(extract_decision_map(&slice, &one, frame.registry().clone()).unwrap().len(), 4);
    }

    #[test]
    fn jobs_do_not_change_the_report() {
        let adv = builtin_lossy_link(2).unwrap();
        let a = synthesize(&adv, &consensus(), &binary(), 1, CutStrategy::Antichain, 1).unwrap();
        let b = synthesize(&adv, &consensus(), &binary(), 1, CutStrategy::Antichain, 3).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn pruning_does_not_change_the_verdict() {
        let adv = crate::adversary::builtin_tilted_single_shot(2).unwrap();
        let task = crate::task::builtin_tilted_consensus();
        for k in 0..=2 {
            let mut options = SynthesisOptions::new(k, CutStrategy::Antichain);
            let pruned = synthesize_with(&adv, &task, &binary(), &options).unwrap();
            options.prune = false;
            let full = synthesize_with(&adv, &task, &binary(), &options).unwrap();
            assert!(!pruned.is_synthesized() && !full.is_synthesized());
            assert_eq!(full.stats.cuts_pruned, 0);
            assert_eq!(
                u128::from(full.stats.cuts_examined),
                pruned.stats.cuts_pruned + u128::from(pruned.stats.cuts_examined)
            );
        }
    }

    #[test]
    fn cut_budget() {
        let adv = builtin_lossy_link(2).unwrap();
        let options = SynthesisOptions { max_cuts: Some(2), ..SynthesisOptions::new(3, CutStrategy::Uniform) };
        assert!(matches!(synthesize_with(&adv, &consensus(), &binary(), &options), Err(Error::Limit(_))));
    }

    #[test]
    fn arity_mismatch() {
        let adv = builtin_lossy_link(2).unwrap();
        let task = builtin_consensus(3, &[Value::int(0), Value::int(1)]).unwrap();
        assert!(synthesize(&adv, &task, &[], 1, CutStrategy::Uniform, 1).is_err());
    }
}
