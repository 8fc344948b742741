//! Command-line frontend.
//!
//! Exit codes: 0 on success (synthesized, verified), 2 when no section was
//! found up to the bound or verification failed, 1 on errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value as Json;

use crate::adversary::{builtin, load_adversary, save_adversary, Adversary};
use crate::domain::{parse_rational, InputVector, ProcessId, Value, Vector};
use crate::error::{io_err, Error, Result};
use crate::execution::SystemFrame;
use crate::linalg::Q;
use crate::sheaf::{
    build_sheaf, coboundary_matrix, kernel, kernel_check_json, kernel_section_check, KernelOutcome, Orientation,
};
use crate::slicing::{build_slice, slice_to_dot, CutStrategy, ExecutionCut};
use crate::synthesis::{synthesize_with, DecisionMap, SynthesisOptions, SynthesisVerdict};
use crate::task::{
    builtin_consensus, builtin_epsilon_agreement, builtin_tilted_consensus, load_task, product_vectors, save_task,
    EpsilonMode, Task, ValueKind,
};
use crate::verifier::{verify, Verdict};

#[derive(Parser, Debug)]
#[command(name = "tasksheaf", version, about = "Task solvability under message adversaries via task sheaves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Explore the execution graph and report layer and edge counts.
    Frame(FrameArgs),
    /// Build the slice of the uniform cut at one depth.
    Slice(SliceArgs),
    /// Search for a decision map by iterative deepening.
    Solve(SolveArgs),
    /// Check a decision map on every run prefix up to a depth.
    Verify(VerifyArgs),
    /// Coboundary matrix, kernel and pinned kernel check of a uniform slice.
    Matrix(MatrixArgs),
    /// Write a builtin adversary or task as JSON.
    Export(ExportArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Setup {
    /// Builtin adversary (lossy-link, tilted, reliable) or a JSON file.
    #[arg(long, default_value = "lossy-link")]
    pub adversary: String,
    /// Builtin task (consensus, epsilon, tilted-consensus) or a JSON file.
    #[arg(long)]
    pub task: Option<String>,
    /// Number of processes for builtins.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Input vectors: `binary`, or `;`-separated vectors such as `0,0;0,1`.
    /// Defaults to the task's inputs, else `binary`.
    #[arg(long)]
    pub inputs: Option<String>,
    /// ε for the epsilon task.
    #[arg(long, default_value = "0.25")]
    pub epsilon: String,
    /// Output grid for the epsilon task.
    #[arg(long, default_value = "0,0.25,0.5,0.75,1")]
    pub grid: String,
    /// Validity of mixed inputs for the epsilon task.
    #[arg(long, value_enum, default_value_t = Mode::Loose)]
    pub mode: Mode,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Mixed inputs may decide any ε-close grid vector.
    Loose,
    /// Mixed inputs must also decide inside the input range.
    Strict,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Uniform,
    Antichain,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrientationArg {
    Ascending,
    Descending,
}

#[derive(Args, Debug)]
pub struct FrameArgs {
    #[command(flatten)]
    pub setup: Setup,
    #[arg(long, default_value_t = 1)]
    pub depth: u32,
    /// Write the frame as Graphviz DOT.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SliceArgs {
    #[command(flatten)]
    pub setup: Setup,
    #[arg(long, default_value_t = 0)]
    pub depth: u32,
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub setup: Setup,
    #[arg(long, default_value_t = 2)]
    pub max_depth: u32,
    #[arg(long, value_enum, default_value_t = Strategy::Uniform)]
    pub strategy: Strategy,
    /// Write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Worker threads for cut evaluation; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Evaluate every antichain cut, without conflict pruning.
    #[arg(long)]
    pub no_prune: bool,
    /// Stop with an error after examining this many cuts.
    #[arg(long)]
    pub max_cuts: Option<u64>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub setup: Setup,
    /// A report written by `solve`, or a bare decision map.
    #[arg(long)]
    pub map: PathBuf,
    /// Horizon; defaults to the report's depth.
    #[arg(long)]
    pub depth: Option<u32>,
}

#[derive(Args, Debug)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub setup: Setup,
    #[arg(long, default_value_t = 0)]
    pub depth: u32,
    #[arg(long, value_enum, default_value_t = OrientationArg::Ascending)]
    pub orientation: OrientationArg,
    /// Write the matrix (text exchange format) and kernel basis here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[command(flatten)]
    pub setup: Setup,
    #[arg(long)]
    pub adversary_out: Option<PathBuf>,
    #[arg(long)]
    pub task_out: Option<PathBuf>,
}

fn parse_value(s: &str, kind: Option<ValueKind>) -> Result<Value> {
    let s = s.trim();
    match kind {
        Some(ValueKind::Symbolic) => Ok(Value::Sym(s.to_string())),
        Some(ValueKind::Rational) => Value::parse_num(s),
        None => Ok(Value::parse_num(s).unwrap_or_else(|_| Value::Sym(s.to_string()))),
    }
}

fn parse_inputs(spec: &str, n: usize, kind: Option<ValueKind>) -> Result<Vec<InputVector>> {
    if spec.trim() == "binary" {
        return Ok(product_vectors(&[Value::int(0), Value::int(1)], n));
    }
    let mut out = Vec::new();
    for part in spec.split(';').filter(|p| !p.trim().is_empty()) {
        let v = Vector(
            part.trim()
                .trim_start_matches('(')
                .trim_end_matches(')')
                .split(',')
                .map(|x| parse_value(x, kind))
                .collect::<Result<_>>()?,
        );
        if v.len() != n {
            return Err(Error::Arity { expected: n, found: v.len() });
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::Parse("no input vectors given".into()));
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn load_task_spec(setup: &Setup) -> Result<Option<Task>> {
    let Some(spec) = &setup.task else { return Ok(None) };
    let n = setup.n;
    let task = match spec.as_str() {
        "consensus" => builtin_consensus(n, &[Value::int(0), Value::int(1)])?,
        "tilted-consensus" => {
            if n != 2 {
                return Err(Error::Arity { expected: 2, found: n });
            }
            builtin_tilted_consensus()
        }
        "epsilon" => {
            let eps = parse_rational(&setup.epsilon)?;
            let grid = setup.grid.split(',').map(|g| parse_rational(g.trim())).collect::<Result<Vec<_>>>()?;
            let inputs = match &setup.inputs {
                Some(s) => parse_inputs(s, n, Some(ValueKind::Rational))?,
                None => product_vectors(&[Value::int(0), Value::int(1)], n),
            };
            let mode = match setup.mode {
                Mode::Loose => EpsilonMode::Loose,
                Mode::Strict => EpsilonMode::Strict,
            };
            builtin_epsilon_agreement(n, eps, &grid, &inputs, mode)?
        }
        path => load_task(Path::new(path))?,
    };
    Ok(Some(task))
}

struct Resolved {
    adversary: Adversary,
    task: Option<Task>,
    inputs: Vec<InputVector>,
}

fn resolve(setup: &Setup) -> Result<Resolved> {
    let task = load_task_spec(setup)?;
    let n = task.as_ref().map_or(setup.n, Task::n);
    let adversary = match builtin(&setup.adversary, n) {
        Some(adv) => adv?,
        None => load_adversary(Path::new(&setup.adversary), Some(n))?,
    };
    let n = adversary.n();
    let inputs = match (&setup.inputs, &task) {
        (Some(spec), t) => parse_inputs(spec, n, t.as_ref().map(Task::kind))?,
        (None, Some(t)) => t.inputs().to_vec(),
        (None, None) => parse_inputs("binary", n, None)?,
    };
    if let Some(t) = &task {
        for i in &inputs {
            t.delta(i)?;
        }
    }
    Ok(Resolved { adversary, task, inputs })
}

fn require_task(r: &Resolved) -> Result<&Task> {
    r.task.as_ref().ok_or_else(|| Error::Invalid("this command needs --task".into()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(io_err(path))
}

fn render_inputs(inputs: &[InputVector]) -> String {
    inputs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Runs one command, writing human-readable output to `out`; returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let w = |e: std::io::Error| Error::Io { path: PathBuf::from("<stdout>"), source: e };
    match cli.command {
        Command::Frame(args) => {
            let r = resolve(&args.setup)?;
            let frame = SystemFrame::explore(&r.inputs, &r.adversary, args.depth)?;
            writeln!(out, "inputs: {}", render_inputs(&r.inputs)).map_err(w)?;
            writeln!(out, "layers: {:?}", frame.layer_sizes()).map_err(w)?;
            let edges = frame.indistinguishability_edges();
            for p in ProcessId::all(frame.n()) {
                writeln!(out, "indistinguishability edges {p}: {}", edges.iter().filter(|e| e.p == p).count())
                    .map_err(w)?;
            }
            if let Some(path) = &args.dot {
                write_file(path, &frame.to_dot(0, args.depth))?;
            }
            Ok(0)
        }
        Command::Slice(args) => {
            let r = resolve(&args.setup)?;
            let frame = SystemFrame::explore(&r.inputs, &r.adversary, args.depth)?;
            let slice = build_slice(&frame, &ExecutionCut::layer(&frame, args.depth))?;
            writeln!(out, "configurations: {}", slice.configs.len()).map_err(w)?;
            writeln!(out, "consistency edges: {}", slice.edges.len()).map_err(w)?;
            if let Some(task) = &r.task {
                let sheaf = build_sheaf(&slice, task)?;
                let sizes = sheaf.stalk_sizes();
                writeln!(
                    out,
                    "stalk sizes: min {} max {}",
                    sizes.iter().min().unwrap_or(&0),
                    sizes.iter().max().unwrap_or(&0)
                )
                .map_err(w)?;
            }
            if let Some(path) = &args.dot {
                write_file(path, &slice_to_dot(&frame, &slice))?;
            }
            Ok(0)
        }
        Command::Solve(args) => {
            let r = resolve(&args.setup)?;
            let task = require_task(&r)?;
            let strategy = match args.strategy {
                Strategy::Uniform => CutStrategy::Uniform,
                Strategy::Antichain => CutStrategy::Antichain,
            };
            let options = SynthesisOptions {
                jobs: args.jobs,
                prune: !args.no_prune,
                max_cuts: args.max_cuts,
                ..SynthesisOptions::new(args.max_depth, strategy)
            };
            let report = synthesize_with(&r.adversary, task, &r.inputs, &options)?;
            let s = &report.stats;
            match &report.verdict {
                SynthesisVerdict::Synthesized { depth, cut, decision_map, .. } => {
                    writeln!(out, "synthesized at depth {depth} (verified)").map_err(w)?;
                    writeln!(out, "cut: {}", cut.join(" ")).map_err(w)?;
                    writeln!(out, "decision map entries: {}", decision_map.len()).map_err(w)?;
                }
                SynthesisVerdict::NoSectionUpTo { max_depth, cuts_examined } => {
                    writeln!(
                        out,
                        "no section up to depth {max_depth} ({cuts_examined} cuts examined); \
                         bounded search only, not an impossibility proof"
                    )
                    .map_err(w)?;
                }
            }
            writeln!(
                out,
                "layers {:?}, cuts pruned {}, kernel refutations {}, solver nodes {}, verifier rejections {}",
                s.layer_sizes, s.cuts_pruned, s.kernel_refutations, s.solver_nodes, s.verifier_rejections
            )
            .map_err(w)?;
            if let Some(path) = &args.report {
                write_file(path, &serde_json::to_string_pretty(&report.to_json())?)?;
            }
            Ok(if report.is_synthesized() { 0 } else { 2 })
        }
        Command::Verify(args) => {
            let text = std::fs::read_to_string(&args.map).map_err(io_err(&args.map))?;
            let doc: Json = serde_json::from_str(&text)?;
            let mut setup = args.setup.clone();
            let map_doc = match doc.get("decision_map") {
                Some(m) => {
                    if setup.inputs.is_none() {
                        if let Some(list) = doc.get("inputs").and_then(Json::as_array) {
                            let parts: Vec<String> = list
                                .iter()
                                .map(|v| {
                                    v.as_array()
                                        .map(|xs| xs.iter().map(json_scalar).collect::<Vec<_>>().join(","))
                                        .unwrap_or_default()
                                })
                                .collect();
                            setup.inputs = Some(parts.join(";"));
                        }
                    }
                    m
                }
                None => &doc,
            };
            let depth = match (args.depth, doc.get("depth").and_then(Json::as_u64)) {
                (Some(d), _) => d,
                (None, Some(d)) => d as u32,
                (None, None) => return Err(Error::Invalid("--depth is required for a bare decision map".into())),
            };
            let r = resolve(&setup)?;
            let task = require_task(&r)?;
            let dm = DecisionMap::from_json(map_doc, task.kind(), None)?;
            let verdict = verify(&r.adversary, task, &r.inputs, &dm, depth)?;
            writeln!(out, "{verdict}").map_err(w)?;
            Ok(match verdict {
                Verdict::Pass => 0,
                Verdict::Fail { .. } => 2,
            })
        }
        Command::Matrix(args) => {
            let r = resolve(&args.setup)?;
            let task = require_task(&r)?;
            let frame = SystemFrame::explore(&r.inputs, &r.adversary, args.depth)?;
            let slice = build_slice(&frame, &ExecutionCut::layer(&frame, args.depth))?;
            let sheaf = build_sheaf(&slice, task)?;
            let orientation = match args.orientation {
                OrientationArg::Ascending => Orientation::Ascending,
                OrientationArg::Descending => Orientation::Descending,
            };
            let m = coboundary_matrix(&sheaf, &orientation)?;
            let (rows, cols) = m.dims();
            writeln!(
                out,
                "coboundary matrix: {rows} x {cols} ({} configurations x {} coordinates each)",
                cols / sheaf.n(),
                sheaf.n()
            )
            .map_err(w)?;
            let basis = kernel(&m);
            writeln!(out, "kernel dimension: {}", basis.len()).map_err(w)?;
            let check = kernel_section_check(&sheaf)?;
            for (v, x) in &check.forced {
                let stalk_hit = sheaf.vertex_stalk(*v).iter().any(|s| {
                    s.0.iter().zip(x).all(|(a, b)| a.as_rational().map(|r| crate::linalg::q(&r)) == Some(b.clone()))
                });
                writeln!(
                    out,
                    "forced {} = ({}){}",
                    sheaf.vertices()[*v].rendering,
                    x.iter().map(Q::to_string).collect::<Vec<_>>().join(","),
                    if stalk_hit { "" } else { "  not a valid output" }
                )
                .map_err(w)?;
            }
            let verdict = match check.outcome {
                KernelOutcome::SectionsImpossible => "sections impossible",
                KernelOutcome::Inconclusive => "inconclusive",
            };
            writeln!(out, "pinned kernel check: {verdict}").map_err(w)?;
            if let Some(path) = &args.out {
                let mut text = m.to_text(&sheaf);
                text.push_str(&format!("kernel {}\n", basis.len()));
                for (i, v) in basis.iter().enumerate() {
                    let entries: Vec<String> = v.iter().map(Q::to_string).collect();
                    text.push_str(&format!("basis {i} {}\n", entries.join(" ")));
                }
                text.push_str(&format!("check {}\n", kernel_check_json(&sheaf, &check)));
                write_file(path, &text)?;
            }
            Ok(0)
        }
        Command::Export(args) => {
            let r = resolve(&args.setup)?;
            if let Some(path) = &args.adversary_out {
                save_adversary(&r.adversary, path)?;
                writeln!(out, "wrote {}", path.display()).map_err(w)?;
            }
            if let Some(path) = &args.task_out {
                save_task(require_task(&r)?, path)?;
                writeln!(out, "wrote {}", path.display()).map_err(w)?;
            }
            if args.adversary_out.is_none() && args.task_out.is_none() {
                writeln!(out, "{}", r.adversary.to_json()).map_err(w)?;
            }
            Ok(0)
        }
    }
}

fn json_scalar(v: &Json) -> String {
    match v {
        Json::String(s) => s.clone(),
        other => other.to_string(),
    }
}
