//! Exhaustive run-prefix checker for decision maps.
//!
//! Runs are generated from scratch (initial views, adversary letters and the
//! full-information successor), independently of the execution graph.

use std::fmt;

use crate::adversary::{Adversary, RoundDigraph, StateId};
use crate::domain::{InputVector, ProcessId, Value, Vector, ViewId};
use crate::error::{Error, Result};
use crate::synthesis::DecisionMap;
use crate::task::Task;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    /// Some process has not decided by the horizon.
    Termination,
    /// A process maps a later view to a different value than its decision.
    Finality,
    /// The decided vector is not valid for the input vector.
    Validity,
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureKind::Termination => "termination",
            FailureKind::Finality => "finality",
            FailureKind::Validity => "validity",
        })
    }
}

/// A run prefix: input vector and the round digraphs chosen so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub inputs: InputVector,
    pub letters: Vec<RoundDigraph>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.inputs)?;
        let n = self.inputs.len();
        let letters: Vec<String> = self.letters.iter().map(|l| l.render(n)).collect();
        if !letters.is_empty() {
            write!(f, " {}", letters.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail {
        kind: FailureKind,
        witness: Witness,
        detail: String,
        /// Failing run prefixes found (prefixes extending a failure are not explored).
        failures: u64,
    },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("pass"),
            Verdict::Fail { kind, witness, detail, failures } => {
                write!(f, "fail({kind}) on {witness}: {detail} [{failures} failing prefixes]")
            }
        }
    }
}

struct Path {
    state: StateId,
    views: Vec<ViewId>,
    decided: Vec<Option<Value>>,
    letters: Vec<RoundDigraph>,
    input: usize,
}

/// Checks `dm` on every run prefix of length `depth` from every input vector.
pub fn verify(adv: &Adversary, task: &Task, inputs: &[InputVector], dm: &DecisionMap, depth: u32) -> Result<Verdict> {
    let n = task.n();
    if adv.n() != n {
        return Err(Error::Arity { expected: n, found: adv.n() });
    }
    if dm.n() != n {
        return Err(Error::Arity { expected: n, found: dm.n() });
    }
    let registry = dm.registry().clone();
    let mut layer = Vec::with_capacity(inputs.len());
    for (i, input) in inputs.iter().enumerate() {
        if input.len() != n {
            return Err(Error::Arity { expected: n, found: input.len() });
        }
        task.delta(input)?;
        let views = ProcessId::all(n).map(|p| registry.initial_view(p, input.get(p).clone())).collect();
        layer.push(Path { state: adv.initial(), views, decided: vec![None; n], letters: Vec::new(), input: i });
    }

    let mut first: Option<(FailureKind, Witness, String)> = None;
    let mut failures = 0u64;
    for round in 0..=depth {
        let mut survivors = Vec::with_capacity(layer.len());
        for mut path in layer {
            let input = &inputs[path.input];
            let mut failure = None;
            for p in ProcessId::all(n) {
                let Some(value) = dm.get(p, path.views[p.index()]) else { continue };
                match &path.decided[p.index()] {
                    None => path.decided[p.index()] = Some(value.clone()),
                    Some(d) if d != value => {
                        failure = Some((FailureKind::Finality, format!("{p} decided {d} but later maps to {value}")));
                        break;
                    }
                    Some(_) => {}
                }
            }
            if failure.is_none() {
                if path.decided.iter().all(Option::is_some) {
                    let out = Vector(path.decided.iter().map(|d| d.clone().unwrap()).collect());
                    if !task.delta(input)?.contains(&out) {
                        failure = Some((FailureKind::Validity, format!("decided {out}, not valid for {input}")));
                    }
                } else if round == depth {
                    let pending: Vec<String> = ProcessId::all(n)
                        .filter(|p| path.decided[p.index()].is_none())
                        .map(|p| p.to_string())
                        .collect();
                    failure = Some((
                        FailureKind::Termination,
                        format!("{} undecided after {depth} rounds", pending.join(",")),
                    ));
                }
            }
            if let Some((kind, detail)) = failure {
                failures += 1;
                if first.is_none() {
                    first = Some((kind, Witness { inputs: input.clone(), letters: path.letters.clone() }, detail));
                }
                continue;
            }
            survivors.push(path);
        }
        if round == depth {
            break;
        }
        layer = Vec::new();
        for path in survivors {
            for (letter, next) in adv.allowed_rounds(path.state)? {
                let mut letters = path.letters.clone();
                letters.push(letter.clone());
                layer.push(Path {
                    state: *next,
                    views: registry.successor(&path.views, letter),
                    decided: path.decided.clone(),
                    letters,
                    input: path.input,
                });
            }
        }
    }
    Ok(match first {
        None => Verdict::Pass,
        Some((kind, witness, detail)) => Verdict::Fail { kind, witness, detail, failures },
    })
}
