//! Tasks `⟨I, O, Δ⟩` as finite, fully enumerated tables.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::domain::{format_rational, parse_rational, InputVector, OutputVector, Rational, Value, Vector};
use crate::error::{io_err, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Rational,
    Symbolic,
}

/// How ε-agreement treats inputs that are not all equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsilonMode {
    /// Mixed inputs may decide any ε-close grid vector.
    Loose,
    /// Mixed inputs must decide ε-close grid vectors inside the input range.
    Strict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    n: usize,
    kind: ValueKind,
    inputs: Vec<InputVector>,
    outputs: Vec<OutputVector>,
    delta: BTreeMap<InputVector, Vec<OutputVector>>,
}

impl Task {
    /// Validates and normalizes a task: every vector has arity `n`, every
    /// input has a nonempty `Δ(i) ⊆ O`, and values match `kind`.
    pub fn new(
        n: usize,
        kind: ValueKind,
        inputs: impl IntoIterator<Item = InputVector>,
        outputs: impl IntoIterator<Item = OutputVector>,
        delta: impl IntoIterator<Item = (InputVector, Vec<OutputVector>)>,
    ) -> Result<Self> {
        let inputs: BTreeSet<_> = inputs.into_iter().collect();
        let outputs: BTreeSet<_> = outputs.into_iter().collect();
        let check = |v: &Vector| -> Result<()> {
            if v.len() != n {
                return Err(Error::InvalidTask(format!("vector {v} does not have {n} entries")));
            }
            let ok = v.0.iter().all(|x| match kind {
                ValueKind::Rational => matches!(x, Value::Num(_)),
                ValueKind::Symbolic => true,
            });
            if !ok {
                return Err(Error::InvalidTask(format!("vector {v} has non-rational entries")));
            }
            Ok(())
        };
        if inputs.is_empty() {
            return Err(Error::InvalidTask("empty input set".into()));
        }
        inputs.iter().chain(outputs.iter()).try_for_each(check)?;
        let mut table = BTreeMap::new();
        for (input, outs) in delta {
            if !inputs.contains(&input) {
                return Err(Error::InvalidTask(format!("Δ given for {input}, which is not an input")));
            }
            let outs: BTreeSet<_> = outs.into_iter().collect();
            if let Some(bad) = outs.iter().find(|o| !outputs.contains(*o)) {
                return Err(Error::InvalidTask(format!("Δ({input}) contains {bad}, which is not in O")));
            }
            if table.insert(input.clone(), outs.into_iter().collect::<Vec<_>>()).is_some() {
                return Err(Error::InvalidTask(format!("Δ({input}) given twice")));
            }
        }
        for input in &inputs {
            match table.get(input) {
                None => return Err(Error::InvalidTask(format!("Δ({input}) missing"))),
                Some(outs) if outs.is_empty() => return Err(Error::InvalidTask(format!("Δ({input}) is empty"))),
                Some(_) => {}
            }
        }
        Ok(Task { n, kind, inputs: inputs.into_iter().collect(), outputs: outputs.into_iter().collect(), delta: table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    /// Input vectors in lexicographic order.
    pub fn inputs(&self) -> &[InputVector] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[OutputVector] {
        &self.outputs
    }

    /// `Δ(i)`, sorted lexicographically.
    pub fn delta(&self, input: &InputVector) -> Result<&[OutputVector]> {
        self.delta.get(input).map(Vec::as_slice).ok_or_else(|| Error::UnknownInput(input.to_string()))
    }

    /// Restricts `I` (and `Δ`) to the given inputs; `O` is unchanged.
    pub fn restrict_inputs(&self, inputs: &[InputVector]) -> Result<Task> {
        let delta = inputs.iter().map(|i| Ok((i.clone(), self.delta(i)?.to_vec()))).collect::<Result<Vec<_>>>()?;
        Task::new(self.n, self.kind, inputs.iter().cloned(), self.outputs.iter().cloned(), delta)
    }

    pub fn to_file(&self) -> TaskFile {
        let vec_json = |v: &Vector| v.0.iter().map(value_to_json).collect::<Vec<_>>();
        TaskFile {
            n: self.n,
            kind: self.kind,
            inputs: self.inputs.iter().map(vec_json).collect(),
            outputs: self.outputs.iter().map(vec_json).collect(),
            delta: self
                .delta
                .iter()
                .map(|(i, outs)| DeltaEntry { input: vec_json(i), out: outs.iter().map(vec_json).collect() })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("task serializes")
    }

    pub fn from_file(file: TaskFile) -> Result<Self> {
        let kind = file.kind;
        let vector = |v: &Vec<Json>| -> Result<Vector> {
            Ok(Vector(v.iter().map(|x| value_from_json(x, kind)).collect::<Result<_>>()?))
        };
        let inputs = file.inputs.iter().map(vector).collect::<Result<Vec<_>>>()?;
        let outputs = file.outputs.iter().map(vector).collect::<Result<Vec<_>>>()?;
        let delta = file
            .delta
            .iter()
            .map(|d| Ok((vector(&d.input)?, d.out.iter().map(vector).collect::<Result<Vec<_>>>()?)))
            .collect::<Result<Vec<_>>>()?;
        Task::new(file.n, kind, inputs, outputs, delta)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Task::from_file(serde_json::from_str(text)?)
    }
}

/// On-disk task schema.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    pub n: usize,
    pub kind: ValueKind,
    pub inputs: Vec<Vec<Json>>,
    pub outputs: Vec<Vec<Json>>,
    pub delta: Vec<DeltaEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaEntry {
    #[serde(rename = "in")]
    pub input: Vec<Json>,
    pub out: Vec<Vec<Json>>,
}

/// Numbers become JSON numbers when a short decimal renders them exactly,
/// strings such as `"1/3"` otherwise; symbols are strings.
pub fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Num(r) if r.is_integer() => Json::from(r.to_integer()),
        Value::Num(r) => {
            let text = format_rational(r);
            match text.parse::<f64>() {
                Ok(f) if !text.contains('/') && parse_rational(&f.to_string()).ok() == Some(*r) => Json::from(f),
                _ => Json::from(text),
            }
        }
        Value::Sym(s) => Json::from(s.clone()),
    }
}

pub fn value_from_json(v: &Json, kind: ValueKind) -> Result<Value> {
    match (kind, v) {
        (ValueKind::Rational, Json::Number(num)) => match num.as_i64() {
            Some(i) => Ok(Value::int(i)),
            None => Ok(Value::Num(parse_rational(&num.to_string())?)),
        },
        (ValueKind::Rational, Json::String(s)) => Ok(Value::Num(parse_rational(s)?)),
        (ValueKind::Symbolic, Json::String(s)) => Ok(Value::Sym(s.clone())),
        (ValueKind::Symbolic, Json::Number(num)) => Ok(Value::Sym(num.to_string())),
        (_, other) => Err(Error::Parse(format!("unsupported task value {other}"))),
    }
}

pub fn load_task(path: &Path) -> Result<Task> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Task::from_json(&text)
}

pub fn save_task(task: &Task, path: &Path) -> Result<()> {
    std::fs::write(path, task.to_json()).map_err(io_err(path))
}

/// All vectors in `values^n`, lexicographically ordered.
pub fn product_vectors(values: &[Value], n: usize) -> Vec<Vector> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Value>| {
                values.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v.clone());
                    next
                })
            })
            .collect();
    }
    let mut vectors: Vec<Vector> = out.into_iter().map(Vector).collect();
    vectors.sort();
    vectors.dedup();
    vectors
}

/// Consensus: agree on one value that some process proposed.
pub fn builtin_consensus(n: usize, values: &[Value]) -> Result<Task> {
    if values.is_empty() {
        return Err(Error::InvalidTask("consensus needs at least one value".into()));
    }
    let kind =
        if values.iter().all(|v| matches!(v, Value::Num(_))) { ValueKind::Rational } else { ValueKind::Symbolic };
    let inputs = product_vectors(values, n);
    let outputs: Vec<Vector> = values.iter().map(|v| Vector::constant(v.clone(), n)).collect();
    let delta: Vec<_> = inputs
        .iter()
        .map(|i| {
            let proposed: BTreeSet<&Value> = i.0.iter().collect();
            (i.clone(), proposed.into_iter().map(|v| Vector::constant(v.clone(), n)).collect())
        })
        .collect();
    Task::new(n, kind, inputs.clone(), outputs, delta)
}

/// ε-agreement over a finite output grid.
///
/// `O` holds the grid vectors whose components pairwise differ by at most
/// `eps`. Inputs with all components equal to `c` must decide `(c,…,c)`.
/// Mixed inputs may decide all of `O` ([`EpsilonMode::Loose`]) or only
/// the vectors inside the input range ([`EpsilonMode::Strict`]).
pub fn builtin_epsilon_agreement(
    n: usize,
    eps: Rational,
    grid: &[Rational],
    inputs: &[InputVector],
    mode: EpsilonMode,
) -> Result<Task> {
    if eps <= Rational::from_integer(0) {
        return Err(Error::InvalidTask("ε must be positive".into()));
    }
    let grid_values: Vec<Value> = grid.iter().map(|&g| Value::Num(g)).collect();
    let outputs: Vec<Vector> = product_vectors(&grid_values, n)
        .into_iter()
        .filter(|o| {
            let nums: Vec<Rational> = o.0.iter().filter_map(Value::as_rational).collect();
            let (lo, hi) = (nums.iter().min().copied(), nums.iter().max().copied());
            matches!((lo, hi), (Some(lo), Some(hi)) if hi - lo <= eps)
        })
        .collect();
    let mut delta = Vec::new();
    for input in inputs {
        let nums = input
            .0
            .iter()
            .map(|v| v.as_rational().ok_or_else(|| Error::InvalidTask(format!("non-rational input {input}"))))
            .collect::<Result<Vec<_>>>()?;
        let (lo, hi) = match (nums.iter().min(), nums.iter().max()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => return Err(Error::InvalidTask("empty input vector".into())),
        };
        let valid: Vec<Vector> = if input.is_constant() {
            outputs.iter().filter(|o| o.is_constant() && o.0[0] == input.0[0]).cloned().collect()
        } else {
            match mode {
                EpsilonMode::Loose => outputs.clone(),
                EpsilonMode::Strict => outputs
                    .iter()
                    .filter(|o| o.0.iter().filter_map(Value::as_rational).all(|x| lo <= x && x <= hi))
                    .cloned()
                    .collect(),
            }
        };
        if valid.is_empty() {
            return Err(Error::InvalidTask(format!("Δ({input}) is empty: grid too coarse for ε")));
        }
        delta.push((input.clone(), valid));
    }
    Task::new(n, ValueKind::Rational, inputs.iter().cloned(), outputs, delta)
}

/// Both processes must decide `a`'s input.
pub fn builtin_tilted_consensus() -> Task {
    let inputs = product_vectors(&[Value::int(0), Value::int(1)], 2);
    let delta: Vec<_> = inputs.iter().map(|i| (i.clone(), vec![Vector::constant(i.0[0].clone(), 2)])).collect();
    Task::new(2, ValueKind::Rational, inputs.clone(), [Vector::from_ints(&[0, 0]), Vector::from_ints(&[1, 1])], delta)
        .expect("tilted consensus is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn quarter_grid() -> Vec<Rational> {
        ["0", "0.25", "0.5", "0.75", "1"].iter().map(|s| q(s)).collect()
    }

    fn binary() -> Vec<Vector> {
        product_vectors(&[Value::int(0), Value::int(1)], 2)
    }

    /// Consensus validity and agreement checked directly over all constant vectors.
    fn consensus_oracle(input: &Vector, values: &[Value]) -> Vec<Vector> {
        let mut out: Vec<Vector> = values
            .iter()
            .map(|v| Vector::constant(v.clone(), input.len()))
            .filter(|o| input.0.contains(&o.0[0]))
            .collect();
        out.sort();
        out
    }

    #[test]
    fn binary_consensus() {
        let values = [Value::int(0), Value::int(1)];
        let t = builtin_consensus(2, &values).unwrap();
        assert_eq!(t.inputs().len(), 4);
        assert_eq!(t.delta(&Vector::from_ints(&[0, 0])).unwrap(), &[Vector::from_ints(&[0, 0])]);
        assert_eq!(t.delta(&Vector::from_ints(&[1, 1])).unwrap(), &[Vector::from_ints(&[1, 1])]);
        assert_eq!(t.delta(&Vector::from_ints(&[0, 1])).unwrap().len(), 2);
        for i in t.inputs() {
            assert_eq!(t.delta(i).unwrap(), consensus_oracle(i, &values).as_slice());
            assert!(t.delta(i).unwrap().iter().all(|o| o.is_constant() && i.0.contains(&o.0[0])));
        }
        assert!(matches!(t.delta(&Vector::from_ints(&[2, 2])), Err(Error::UnknownInput(_))));
    }

    #[test]
    fn epsilon_agreement_quarter_grid() {
        let t = builtin_epsilon_agreement(2, q("0.25"), &quarter_grid(), &binary(), EpsilonMode::Loose).unwrap();
        let v = |a: &str, b: &str| Vector(vec![Value::Num(q(a)), Value::Num(q(b))]);
        assert_eq!(t.delta(&Vector::from_ints(&[0, 0])).unwrap(), &[v("0", "0")]);
        assert_eq!(t.delta(&Vector::from_ints(&[1, 1])).unwrap(), &[v("1", "1")]);
        let mixed = t.delta(&Vector::from_ints(&[0, 1])).unwrap();
        assert!(mixed.contains(&v("0.5", "0.75")));
        assert!(!mixed.contains(&v("0", "1")));
        // grid pairs with |x - y| <= 1/4, enumerated by hand: 5 diagonal + 2 * 4 off-diagonal
        assert_eq!(t.outputs().len(), 13);
        assert_eq!(mixed, t.outputs());
    }

    #[test]
    fn epsilon_agreement_restricted_inputs() {
        let grid: Vec<Rational> = ["0", "0.5", "1", "1.5", "2"].iter().map(|s| q(s)).collect();
        let inputs = vec![Vector::from_ints(&[0, 1]), Vector::from_ints(&[1, 2])];
        let v = |a: &str, b: &str| Vector(vec![Value::Num(q(a)), Value::Num(q(b))]);
        for mode in [EpsilonMode::Loose, EpsilonMode::Strict] {
            let t = builtin_epsilon_agreement(2, q("0.5"), &grid, &inputs, mode).unwrap();
            assert!(t.delta(&inputs[0]).unwrap().contains(&v("0.5", "1")));
        }
        let strict = builtin_epsilon_agreement(2, q("0.5"), &grid, &inputs, EpsilonMode::Strict).unwrap();
        assert!(!strict.delta(&inputs[0]).unwrap().contains(&v("1.5", "2")));
        assert!(strict.delta(&inputs[0]).unwrap().iter().all(|o| o.0.iter().all(|x| *x <= Value::int(1))));
    }

    #[test]
    fn epsilon_agreement_rejects_coarse_grid() {
        // the constant input (1,1) has no grid point to decide
        let grid = vec![q("0"), q("0.5")];
        let err = builtin_epsilon_agreement(2, q("0.25"), &grid, &binary(), EpsilonMode::Strict);
        assert!(err.is_err());
        assert!(builtin_epsilon_agreement(2, q("0"), &quarter_grid(), &binary(), EpsilonMode::Strict).is_err());
    }

    #[test]
    fn tilted_consensus_decides_a() {
        let t = builtin_tilted_consensus();
        assert_eq!(t.delta(&Vector::from_ints(&[0, 1])).unwrap(), &[Vector::from_ints(&[0, 0])]);
        assert_eq!(t.delta(&Vector::from_ints(&[1, 1])).unwrap(), &[Vector::from_ints(&[1, 1])]);
        assert!(t.inputs().iter().all(|i| t.delta(i).unwrap().len() == 1));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let t = builtin_consensus(2, &[Value::int(0), Value::int(1)]).unwrap();
        assert_eq!(Task::from_json(&t.to_json()).unwrap(), t);
        let eps = builtin_epsilon_agreement(2, q("0.25"), &quarter_grid(), &binary(), EpsilonMode::Strict).unwrap();
        assert_eq!(Task::from_json(&eps.to_json()).unwrap(), eps);

        let empty = r#"{"n":2,"kind":"rational","inputs":[[0,0]],"outputs":[[0,0]],"delta":[{"in":[0,0],"out":[]}]}"#;
        assert!(matches!(Task::from_json(empty), Err(Error::InvalidTask(_))));
        let outside =
            r#"{"n":2,"kind":"rational","inputs":[[0,0]],"outputs":[[0,0]],"delta":[{"in":[0,0],"out":[[1,1]]}]}"#;
        assert!(matches!(Task::from_json(outside), Err(Error::InvalidTask(_))));
        let symbolic = r#"{"n":2,"kind":"symbolic","inputs":[["x","y"]],"outputs":[["u","u"]],"delta":[{"in":["x","y"],"out":[["u","u"]]}]}"#;
        let t = Task::from_json(symbolic).unwrap();
        assert_eq!(t.kind(), ValueKind::Symbolic);
        assert!(Task::from_json("[1,2").is_err());
    }

    #[test]
    fn json_values_stay_exact() {
        for s in ["0.25", "1/3", "-2", "0.1"] {
            let v = Value::Num(q(s));
            assert_eq!(value_from_json(&value_to_json(&v), ValueKind::Rational).unwrap(), v);
        }
    }
}
