//! Processes, values, full-information local views and configurations.
//!
//! Local views are hash-consed in a [`ViewRegistry`]: structurally equal views
//! always receive the same [`ViewId`], so indistinguishability reduces to id
//! comparison. The registry is append-only and shared behind an `Arc`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use num::rational::Ratio;
use num::Signed;

use crate::adversary::RoundDigraph;
use crate::error::{Error, Result};

/// Exact rational used for numeric task values.
pub type Rational = Ratio<i64>;

/// Index of a process in `[0, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProcessId(pub usize);

impl ProcessId {
    pub fn index(self) -> usize {
        self.0
    }

    /// All process ids of an `n`-process system.
    pub fn all(n: usize) -> impl Iterator<Item = ProcessId> {
        (0..n).map(ProcessId)
    }
}

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 < 26 {
            write!(f, "{}", (b'a' + self.0 as u8) as char)
        } else {
            write!(f, "p{}", self.0)
        }
    }
}

/// An input or output value: an exact rational or an opaque symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Num(Rational),
    Sym(String),
}

impl Value {
    pub fn int(v: i64) -> Self {
        Value::Num(Rational::from_integer(v))
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self {
            Value::Num(r) => Some(*r),
            Value::Sym(_) => None,
        }
    }

    /// Parses `"3"`, `"-0.25"` or `"1/3"` into an exact rational value.
    pub fn parse_num(s: &str) -> Result<Self> {
        parse_rational(s).map(Value::Num)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(r) => f.write_str(&format_rational(r)),
            Value::Sym(s) => f.write_str(s),
        }
    }
}

pub(crate) fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num = i64::from_str(num.trim()).map_err(|_| bad())?;
        let den = i64::from_str(den.trim()).map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num = i64::from_str(&digits).map_err(|_| bad())?;
    let den = 10i64.checked_pow(frac_part.len() as u32).ok_or_else(bad)?;
    let r = Rational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Renders terminating decimals as decimals (`0.25`) and anything else as `p/q`.
pub(crate) fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        return r.to_integer().to_string();
    }
    let mut den = *r.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while den % 2 == 0 {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    let scale = match 10i64.checked_pow(places) {
        Some(s) => s,
        None => return format!("{}/{}", r.numer(), r.denom()),
    };
    let scaled = match (r.abs() * Rational::from_integer(scale)).to_integer().checked_abs() {
        Some(v) => v,
        None => return format!("{}/{}", r.numer(), r.denom()),
    };
    let int = scaled / scale;
    let frac = scaled % scale;
    let sign = if r.is_negative() { "-" } else { "" };
    format!("{sign}{int}.{frac:0width$}", width = places as usize)
}

/// A vector with one value per process (input or output vector).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vector(pub Vec<Value>);

pub type InputVector = Vector;
pub type OutputVector = Vector;

impl Vector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, p: ProcessId) -> &Value {
        &self.0[p.0]
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Vector(values.iter().map(|&v| Value::int(v)).collect())
    }

    pub fn constant(value: Value, n: usize) -> Self {
        Vector(vec![value; n])
    }

    pub fn is_constant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Interned handle of a [`LocalView`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ViewId(pub u32);

/// Full-information local state of one process after `depth` rounds.
///
/// Round `r` stores the process' own view after `r - 1` rounds (`prev`) and,
/// per sender, either nothing or the sender's view after `r - 1` rounds.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalView {
    pub pid: ProcessId,
    pub input: Value,
    pub depth: u32,
    pub prev: Option<ViewId>,
    /// Indexed by sender; the own slot is always `None`. Empty at depth 0.
    pub received: Vec<Option<ViewId>>,
}

#[derive(Default)]
struct Interner {
    views: Vec<Arc<LocalView>>,
    index: HashMap<Arc<LocalView>, ViewId>,
}

/// Append-only interning table for local views.
#[derive(Default)]
pub struct ViewRegistry {
    inner: RwLock<Interner>,
}

impl fmt::Debug for ViewRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ViewRegistry").field("len", &self.len()).finish()
    }
}

impl ViewRegistry {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn len(&self) -> usize {
        self.inner.read().expect("view registry poisoned").views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn intern(&self, view: LocalView) -> ViewId {
        if let Some(&id) = self.inner.read().expect("view registry poisoned").index.get(&view) {
            return id;
        }
        let mut inner = self.inner.write().expect("view registry poisoned");
        if let Some(&id) = inner.index.get(&view) {
            return id;
        }
        let id = ViewId(inner.views.len() as u32);
        let view = Arc::new(view);
        inner.views.push(view.clone());
        inner.index.insert(view, id);
        id
    }

    pub fn get(&self, id: ViewId) -> Arc<LocalView> {
        self.inner.read().expect("view registry poisoned").views[id.0 as usize].clone()
    }

    /// The view's own state `depth` rounds into its history.
    pub fn truncate(&self, mut id: ViewId, depth: u32) -> ViewId {
        loop {
            let view = self.get(id);
            if view.depth <= depth {
                return id;
            }
            id = view.prev.expect("positive-depth view has a predecessor");
        }
    }

    pub fn initial_view(&self, pid: ProcessId, input: Value) -> ViewId {
        self.intern(LocalView { pid, input, depth: 0, prev: None, received: Vec::new() })
    }

    /// One synchronous full-information round: every receiver appends the
    /// current views of the senders whose messages arrive under `letter`.
    pub fn successor(&self, views: &[ViewId], letter: &RoundDigraph) -> Vec<ViewId> {
        let n = views.len();
        let current: Vec<Arc<LocalView>> = views.iter().map(|&v| self.get(v)).collect();
        (0..n)
            .map(|q| {
                let received = (0..n)
                    .map(|s| (s != q && letter.arrives(ProcessId(s), ProcessId(q))).then_some(views[s]))
                    .collect();
                self.intern(LocalView {
                    pid: ProcessId(q),
                    input: current[q].input.clone(),
                    depth: current[q].depth + 1,
                    prev: Some(views[q]),
                    received,
                })
            })
            .collect()
    }

    /// Recovers the round digraph of round `round` (1-based) from a configuration.
    pub fn round_letter(&self, config: &Configuration, round: u32) -> Result<RoundDigraph> {
        let n = config.views.len();
        let mut arrivals = Vec::new();
        for q in 0..n {
            let view = self.get(self.truncate(config.views[q], round));
            for (s, slot) in view.received.iter().enumerate() {
                if slot.is_some() {
                    arrivals.push((ProcessId(s), ProcessId(q)));
                }
            }
        }
        RoundDigraph::new(n, arrivals)
    }

    /// Canonical rendering such as `(0,1→↔)`: inputs followed by one arrival
    /// pattern per round.
    pub fn render_config(&self, config: &Configuration) -> String {
        let inputs = self.project_inputs(config);
        let n = config.views.len();
        let mut out = String::from("(");
        for (i, v) in inputs.0.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&v.to_string());
        }
        for round in 1..=config.depth {
            let letter = self.round_letter(config, round).expect("views carry valid arrivals");
            if n != 2 && round == 1 {
                out.push('|');
            } else if n != 2 {
                out.push(';');
            }
            out.push_str(&letter.render(n));
        }
        out.push(')');
        out
    }

    pub fn project_inputs(&self, config: &Configuration) -> InputVector {
        Vector(config.views.iter().map(|&v| self.get(v).input.clone()).collect())
    }

    /// Nested textual form of a single view, e.g. `b:1[a:0]`.
    pub fn render_view(&self, id: ViewId) -> String {
        let view = self.get(id);
        let mut out = format!("{}:{}", view.pid, view.input);
        let mut rounds = Vec::new();
        let mut cursor = Some(id);
        while let Some(c) = cursor {
            let v = self.get(c);
            if v.depth == 0 {
                break;
            }
            let heard: Vec<String> = v.received.iter().flatten().map(|&s| self.render_view(s)).collect();
            rounds.push(format!("[{}]", heard.join(" ")));
            cursor = v.prev;
        }
        rounds.reverse();
        for r in rounds {
            out.push_str(&r);
        }
        out
    }
}

/// A global state: one local view per process, all after the same number of rounds.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub views: Box<[ViewId]>,
    pub depth: u32,
}

impl Configuration {
    pub fn new(views: Vec<ViewId>, registry: &ViewRegistry) -> Result<Self> {
        if views.is_empty() {
            return Err(Error::Invalid("a configuration needs at least one process".into()));
        }
        let depth = registry.get(views[0]).depth;
        for (i, &v) in views.iter().enumerate() {
            let view = registry.get(v);
            if view.pid != ProcessId(i) {
                return Err(Error::Invalid(format!("view of {} placed at slot {i}", view.pid)));
            }
            if view.depth != depth {
                return Err(Error::Invalid("configuration views differ in round count".into()));
            }
        }
        Ok(Configuration { views: views.into_boxed_slice(), depth })
    }

    pub fn n(&self) -> usize {
        self.views.len()
    }
}

/// `π_p`: the local view of process `p`.
pub fn project_local(c: &Configuration, p: ProcessId) -> ViewId {
    c.views[p.0]
}

/// `π_I`: the input vector, recoverable at every depth.
pub fn project_inputs(registry: &ViewRegistry, c: &Configuration) -> InputVector {
    registry.project_inputs(c)
}
