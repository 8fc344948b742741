//! Message adversaries as safety automata over round communication digraphs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::ProcessId;
use crate::error::{io_err, Error, Result};

/// The set of messages that arrive in one synchronous round.
///
/// Self-delivery is implicit and never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RoundDigraph {
    arrivals: Vec<(ProcessId, ProcessId)>,
}

impl RoundDigraph {
    pub fn new(n: usize, arrivals: impl IntoIterator<Item = (ProcessId, ProcessId)>) -> Result<Self> {
        let mut arrivals: Vec<_> = arrivals.into_iter().collect();
        for &(s, r) in &arrivals {
            if s.0 >= n || r.0 >= n {
                return Err(Error::Invalid(format!("arrival {s}->{r} outside of {n} processes")));
            }
            if s == r {
                return Err(Error::Invalid(format!("self-loop {s}->{r} in round digraph")));
            }
        }
        arrivals.sort();
        arrivals.dedup();
        Ok(RoundDigraph { arrivals })
    }

    /// No message arrives.
    pub fn empty() -> Self {
        RoundDigraph { arrivals: Vec::new() }
    }

    /// Every message arrives.
    pub fn complete(n: usize) -> Self {
        let arrivals =
            (0..n).flat_map(|s| (0..n).filter(move |&r| r != s).map(move |r| (ProcessId(s), ProcessId(r)))).collect();
        RoundDigraph { arrivals }
    }

    pub fn arrivals(&self) -> &[(ProcessId, ProcessId)] {
        &self.arrivals
    }

    pub fn arrives(&self, sender: ProcessId, receiver: ProcessId) -> bool {
        self.arrivals.binary_search(&(sender, receiver)).is_ok()
    }

    /// Arrow notation for two processes (`−`, `→`, `←`, `↔`); an explicit
    /// arrival list otherwise.
    pub fn render(&self, n: usize) -> String {
        if n == 2 {
            let right = self.arrives(ProcessId(0), ProcessId(1));
            let left = self.arrives(ProcessId(1), ProcessId(0));
            return match (right, left) {
                (false, false) => "−",
                (true, false) => "→",
                (false, true) => "←",
                (true, true) => "↔",
            }
            .to_string();
        }
        let parts: Vec<String> = self.arrivals.iter().map(|(s, r)| format!("{}>{}", s.0, r.0)).collect();
        format!("[{}]", parts.join(" "))
    }

    /// Inverse of [`RoundDigraph::render`] for the two-process arrow notation.
    pub fn parse_arrow(symbol: &str) -> Result<Self> {
        let (a, b) = (ProcessId(0), ProcessId(1));
        let arrivals = match symbol {
            "−" | "-" => vec![],
            "→" | "->" => vec![(a, b)],
            "←" | "<-" => vec![(b, a)],
            "↔" | "<->" => vec![(a, b), (b, a)],
            other => return Err(Error::Parse(format!("unknown round symbol {other:?}"))),
        };
        RoundDigraph::new(2, arrivals)
    }
}

/// Automaton state index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub usize);

/// A finite automaton whose letters are round digraphs. Letters missing from a
/// state are forbidden there; every state must allow at least one letter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adversary {
    n: usize,
    states: Vec<String>,
    initial: StateId,
    /// Per state, the allowed letters with successor states, sorted by letter.
    letters: Vec<Vec<(RoundDigraph, StateId)>>,
}

impl Adversary {
    /// Builds and validates an adversary. Transitions are `(from, letter, to)`.
    pub fn new(
        n: usize,
        states: Vec<String>,
        initial: &str,
        transitions: Vec<(String, RoundDigraph, String)>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("an adversary needs at least one process".into()));
        }
        let lookup: BTreeMap<&str, usize> = states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        if lookup.len() != states.len() {
            return Err(Error::Invalid("duplicate adversary state names".into()));
        }
        let state = |name: &str| {
            lookup
                .get(name)
                .map(|&i| StateId(i))
                .ok_or_else(|| Error::Invalid(format!("unknown adversary state {name:?}")))
        };
        let initial = state(initial)?;
        let mut letters: Vec<Vec<(RoundDigraph, StateId)>> = vec![Vec::new(); states.len()];
        for (from, letter, to) in transitions {
            let (from, to) = (state(&from)?, state(&to)?);
            if let Some(max) = letter.arrivals.iter().map(|(s, r)| s.0.max(r.0)).max() {
                if max >= n {
                    return Err(Error::Arity { expected: n, found: max + 1 });
                }
            }
            let row = &mut letters[from.0];
            match row.iter().find(|(l, _)| *l == letter) {
                Some((_, existing)) if *existing != to => {
                    return Err(Error::Invalid(format!(
                        "letter {} from state {:?} has two successor states",
                        letter.render(n),
                        states[from.0]
                    )))
                }
                Some(_) => {}
                None => row.push((letter, to)),
            }
        }
        for (i, row) in letters.iter_mut().enumerate() {
            if row.is_empty() {
                return Err(Error::DeadEnd(states[i].clone()));
            }
            row.sort();
        }
        Ok(Adversary { n, states, initial, letters })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.0]
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name).map(StateId)
    }

    /// The letters permitted in state `s` together with the successor states.
    pub fn allowed_rounds(&self, s: StateId) -> Result<&[(RoundDigraph, StateId)]> {
        let row =
            self.letters.get(s.0).ok_or_else(|| Error::Invalid(format!("unknown adversary state index {}", s.0)))?;
        if row.is_empty() {
            return Err(Error::DeadEnd(self.states[s.0].clone()));
        }
        Ok(row)
    }

    /// Follows a letter from `s`, or `None` if the letter is forbidden there.
    pub fn step(&self, s: StateId, letter: &RoundDigraph) -> Option<StateId> {
        self.letters.get(s.0)?.iter().find(|(l, _)| l == letter).map(|&(_, t)| t)
    }

    /// Whether a finite sequence of letters is permitted from the initial state.
    pub fn accepts_prefix<'a>(&self, word: impl IntoIterator<Item = &'a RoundDigraph>) -> bool {
        let mut s = self.initial;
        for letter in word {
            match self.step(s, letter) {
                Some(t) => s = t,
                None => return false,
            }
        }
        true
    }

    pub fn to_file(&self) -> AdversaryFile {
        let letters = self
            .letters
            .iter()
            .enumerate()
            .flat_map(|(from, row)| {
                row.iter().map(move |(letter, to)| LetterFile {
                    from: self.states[from].clone(),
                    arrivals: letter.arrivals.iter().map(|(s, r)| [s.0, r.0]).collect(),
                    to: self.states[to.0].clone(),
                })
            })
            .collect();
        AdversaryFile { n: self.n, states: self.states.clone(), initial: self.states[self.initial.0].clone(), letters }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("adversary serializes")
    }

    pub fn from_file(file: AdversaryFile) -> Result<Self> {
        let n = file.n;
        let transitions = file
            .letters
            .into_iter()
            .map(|l| {
                let letter = RoundDigraph::new(n, l.arrivals.iter().map(|&[s, r]| (ProcessId(s), ProcessId(r))))?;
                Ok((l.from, letter, l.to))
            })
            .collect::<Result<Vec<_>>>()?;
        Adversary::new(n, file.states, &file.initial, transitions)
    }

    pub fn from_json(text: &str, expected_n: Option<usize>) -> Result<Self> {
        let file: AdversaryFile = serde_json::from_str(text)?;
        if let Some(expected) = expected_n {
            if file.n != expected {
                return Err(Error::Arity { expected, found: file.n });
            }
        }
        Adversary::from_file(file)
    }
}

impl fmt::Display for Adversary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "adversary on {} processes, initial state {}", self.n, self.states[self.initial.0])?;
        for (i, row) in self.letters.iter().enumerate() {
            let letters: Vec<String> =
                row.iter().map(|(l, t)| format!("{}->{}", l.render(self.n), self.states[t.0])).collect();
            writeln!(f, "  {}: {}", self.states[i], letters.join(", "))?;
        }
        Ok(())
    }
}

/// On-disk adversary schema.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct AdversaryFile {
    pub n: usize,
    pub states: Vec<String>,
    pub initial: String,
    pub letters: Vec<LetterFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct LetterFile {
    pub from: String,
    pub arrivals: Vec<[usize; 2]>,
    pub to: String,
}

/// Reads and validates an adversary file, optionally checking its process count.
pub fn load_adversary(path: &Path, expected_n: Option<usize>) -> Result<Adversary> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Adversary::from_json(&text, expected_n)
}

pub fn save_adversary(adv: &Adversary, path: &Path) -> Result<()> {
    std::fs::write(path, adv.to_json()).map_err(io_err(path))
}

fn require_two(n: usize) -> Result<()> {
    if n != 2 {
        return Err(Error::Arity { expected: 2, found: n });
    }
    Ok(())
}

/// Two processes; at most one of the two messages is lost in each round.
pub fn builtin_lossy_link(n: usize) -> Result<Adversary> {
    require_two(n)?;
    let transitions = ["→", "←", "↔"]
        .iter()
        .map(|s| Ok(("s".to_string(), RoundDigraph::parse_arrow(s)?, "s".to_string())))
        .collect::<Result<Vec<_>>>()?;
    Adversary::new(2, vec!["s".into()], "s", transitions)
}

/// Two processes; exactly one message from `a` to `b` is delivered over a run.
///
/// The "exactly" part is a liveness property that bounded exploration cannot
/// observe: the `pending` state is treated as live since every finite prefix
/// ending there still extends to a run that delivers.
pub fn builtin_tilted_single_shot(n: usize) -> Result<Adversary> {
    require_two(n)?;
    let none = RoundDigraph::empty();
    let right = RoundDigraph::parse_arrow("→")?;
    Adversary::new(
        2,
        vec!["pending".into(), "sent".into()],
        "pending",
        vec![
            ("pending".into(), none.clone(), "pending".into()),
            ("pending".into(), right, "sent".into()),
            ("sent".into(), none, "sent".into()),
        ],
    )
}

/// Every message always arrives.
pub fn builtin_reliable(n: usize) -> Result<Adversary> {
    Adversary::new(n, vec!["s".into()], "s", vec![("s".into(), RoundDigraph::complete(n), "s".into())])
}

/// Resolves a builtin adversary by name.
pub fn builtin(name: &str, n: usize) -> Option<Result<Adversary>> {
    match name {
        "lossy-link" | "lossy_link" => Some(builtin_lossy_link(n)),
        "tilted" | "tilted-single-shot" => Some(builtin_tilted_single_shot(n)),
        "reliable" => Some(builtin_reliable(n)),
        _ => None,
    }
}
