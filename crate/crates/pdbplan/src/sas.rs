//! SAS+ task model: parsing, validation, state transitions and the causal
//! graph.
//!
//! The input format is the Fast Downward translator output (version 3 `.sas`
//! text layout). Mutex groups are parsed and ignored; axioms and conditional
//! effects are rejected.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

pub type VarId = usize;
pub type Value = u16;

/// A full assignment to all task variables.
pub type State = Vec<Value>;

/// A partial assignment, sorted by variable id, no duplicate variables.
pub type PartialState = Vec<(VarId, Value)>;

#[derive(Debug, Error)]
pub enum SasError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("syntax error at line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unsupported feature at line {line}: {msg}")]
    Unsupported { line: usize, msg: String },
    #[error("semantic error: {0}")]
    Semantic(String),
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub domain_size: Value,
    pub value_names: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Operator {
    pub name: String,
    pub pre: PartialState,
    pub eff: PartialState,
    pub cost: u32,
}

impl Operator {
    pub fn pre_value(&self, var: VarId) -> Option<Value> {
        self.pre
            .binary_search_by_key(&var, |&(v, _)| v)
            .ok()
            .map(|i| self.pre[i].1)
    }

    pub fn eff_value(&self, var: VarId) -> Option<Value> {
        self.eff
            .binary_search_by_key(&var, |&(v, _)| v)
            .ok()
            .map(|i| self.eff[i].1)
    }
}

#[derive(Debug, Clone)]
pub struct SasTask {
    pub variables: Vec<Variable>,
    pub operators: Vec<Operator>,
    pub initial: State,
    pub goal: PartialState,
}

impl SasTask {
    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn goal_vars(&self) -> Vec<VarId> {
        self.goal.iter().map(|&(v, _)| v).collect()
    }

    pub fn is_goal(&self, state: &State) -> bool {
        self.goal.iter().all(|&(v, val)| state[v] == val)
    }

    pub fn applicable(&self, state: &State, op: &Operator) -> bool {
        op.pre.iter().all(|&(v, val)| state[v] == val)
    }

    /// Applies `op` to `state`, or `None` when a precondition is violated.
    pub fn apply_operator(&self, state: &State, op: &Operator) -> Option<State> {
        if !self.applicable(state, op) {
            return None;
        }
        let mut next = state.clone();
        for &(v, val) in &op.eff {
            next[v] = val;
        }
        Some(next)
    }

    fn validate(&self) -> Result<(), SasError> {
        let n = self.variables.len();
        if self.initial.len() != n {
            return Err(SasError::Semantic(format!(
                "initial state assigns {} of {} variables",
                self.initial.len(),
                n
            )));
        }
        for (v, &val) in self.initial.iter().enumerate() {
            if val >= self.variables[v].domain_size {
                return Err(SasError::Semantic(format!(
                    "initial value {} out of range for variable {}",
                    val, v
                )));
            }
        }
        if self.goal.is_empty() {
            return Err(SasError::Semantic("goal is empty".into()));
        }
        let check_partial = |ps: &PartialState, what: &str| -> Result<(), SasError> {
            for &(v, val) in ps {
                if v >= n {
                    return Err(SasError::Semantic(format!(
                        "{what} references unknown variable {v}"
                    )));
                }
                if val >= self.variables[v].domain_size {
                    return Err(SasError::Semantic(format!(
                        "{what} assigns value {val} out of range for variable {v}"
                    )));
                }
            }
            Ok(())
        };
        check_partial(&self.goal, "goal")?;
        for op in &self.operators {
            check_partial(&op.pre, &format!("operator '{}' precondition", op.name))?;
            check_partial(&op.eff, &format!("operator '{}' effect", op.name))?;
            if op.eff.is_empty() {
                return Err(SasError::Semantic(format!(
                    "operator '{}' has no effect",
                    op.name
                )));
            }
        }
        Ok(())
    }

    /// Deterministic text dump of the parsed model, for debugging and
    /// round-trip checks.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        writeln!(out, "variables {}", self.variables.len()).unwrap();
        for (i, v) in self.variables.iter().enumerate() {
            writeln!(out, "  var {} {} dom {}", i, v.name, v.domain_size).unwrap();
        }
        writeln!(out, "initial {:?}", self.initial).unwrap();
        writeln!(out, "goal {:?}", self.goal).unwrap();
        writeln!(out, "operators {}", self.operators.len()).unwrap();
        for op in &self.operators {
            writeln!(
                out,
                "  op '{}' pre {:?} eff {:?} cost {}",
                op.name, op.pre, op.eff, op.cost
            )
            .unwrap();
        }
        out
    }
}

/// Directed causal graph plus its symmetric closure.
#[derive(Debug, Clone)]
pub struct CausalGraph {
    pub successors: Vec<BTreeSet<VarId>>,
    pub related: Vec<BTreeSet<VarId>>,
}

impl CausalGraph {
    /// All variables outside `vars` related (in either arc direction) to at
    /// least one member of `vars`, in ascending id order.
    pub fn causally_related_vars(&self, vars: &[VarId]) -> Vec<VarId> {
        let member: BTreeSet<VarId> = vars.iter().copied().collect();
        let mut out = BTreeSet::new();
        for &v in vars {
            for &u in &self.related[v] {
                if !member.contains(&u) {
                    out.insert(u);
                }
            }
        }
        out.into_iter().collect()
    }

    pub fn are_related(&self, u: VarId, v: VarId) -> bool {
        self.related[u].contains(&v)
    }
}

/// Arc (u, v) iff some operator defines eff on v and pre or eff on u, u != v.
pub fn build_causal_graph(task: &SasTask) -> CausalGraph {
    let n = task.num_vars();
    let mut successors = vec![BTreeSet::new(); n];
    for op in &task.operators {
        for &(v, _) in &op.eff {
            for &(u, _) in op.pre.iter().chain(op.eff.iter()) {
                if u != v {
                    successors[u].insert(v);
                }
            }
        }
    }
    let mut related = vec![BTreeSet::new(); n];
    for u in 0..n {
        for &v in &successors[u] {
            related[u].insert(v);
            related[v].insert(u);
        }
    }
    CausalGraph {
        successors,
        related,
    }
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            iter: text.lines().enumerate(),
            line: 0,
        }
    }

    fn next(&mut self) -> Result<&'a str, SasError> {
        match self.iter.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l.trim())
            }
            None => Err(SasError::Syntax {
                line: self.line + 1,
                msg: "unexpected end of file".into(),
            }),
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), SasError> {
        let l = self.next()?;
        if l != token {
            return Err(SasError::Syntax {
                line: self.line,
                msg: format!("expected '{token}', found '{l}'"),
            });
        }
        Ok(())
    }

    fn next_usize(&mut self) -> Result<usize, SasError> {
        let l = self.next()?;
        l.parse().map_err(|_| SasError::Syntax {
            line: self.line,
            msg: format!("expected a number, found '{l}'"),
        })
    }

    fn err(&self, msg: impl Into<String>) -> SasError {
        SasError::Syntax {
            line: self.line,
            msg: msg.into(),
        }
    }
}

pub fn parse_sas_file(path: &Path) -> Result<SasTask, SasError> {
    let text = std::fs::read_to_string(path).map_err(|source| SasError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_sas_str(&text)
}

pub fn parse_sas_str(text: &str) -> Result<SasTask, SasError> {
    let mut lines = Lines::new(text);
    lines.expect("begin_version")?;
    let version = lines.next()?;
    if version != "3" {
        return Err(SasError::Unsupported {
            line: lines.line,
            msg: format!("unsupported format version '{version}' (expected 3)"),
        });
    }
    lines.expect("end_version")?;

    lines.expect("begin_metric")?;
    let metric = lines.next()?;
    let use_costs = match metric {
        "0" => false,
        "1" => true,
        other => {
            return Err(SasError::Unsupported {
                line: lines.line,
                msg: format!("unsupported metric '{other}'"),
            })
        }
    };
    lines.expect("end_metric")?;

    let num_vars = lines.next_usize()?;
    let mut variables = Vec::with_capacity(num_vars);
    for _ in 0..num_vars {
        lines.expect("begin_variable")?;
        let name = lines.next()?.to_string();
        let axiom_layer = lines.next()?;
        if axiom_layer != "-1" {
            return Err(SasError::Unsupported {
                line: lines.line,
                msg: format!("variable '{name}' is derived (axiom layer {axiom_layer})"),
            });
        }
        let domain_size = lines.next_usize()?;
        if domain_size < 1 || domain_size > Value::MAX as usize {
            return Err(lines.err(format!("bad domain size {domain_size}")));
        }
        let mut value_names = Vec::with_capacity(domain_size);
        for _ in 0..domain_size {
            value_names.push(lines.next()?.to_string());
        }
        lines.expect("end_variable")?;
        variables.push(Variable {
            name,
            domain_size: domain_size as Value,
            value_names,
        });
    }

    // Mutex groups are parsed for structure and otherwise ignored.
    let num_mutexes = lines.next_usize()?;
    for _ in 0..num_mutexes {
        lines.expect("begin_mutex_group")?;
        let k = lines.next_usize()?;
        for _ in 0..k {
            lines.next()?;
        }
        lines.expect("end_mutex_group")?;
    }

    lines.expect("begin_state")?;
    let mut initial = Vec::with_capacity(num_vars);
    for _ in 0..num_vars {
        initial.push(lines.next_usize()? as Value);
    }
    lines.expect("end_state")?;

    lines.expect("begin_goal")?;
    let goal_count = lines.next_usize()?;
    let mut goal: PartialState = Vec::with_capacity(goal_count);
    for _ in 0..goal_count {
        let (v, val) = parse_pair(&mut lines)?;
        goal.push((v, val));
    }
    lines.expect("end_goal")?;
    goal.sort_unstable();

    let num_ops = lines.next_usize()?;
    let mut operators = Vec::with_capacity(num_ops);
    for _ in 0..num_ops {
        lines.expect("begin_operator")?;
        let name = lines.next()?.to_string();
        let mut pre: PartialState = Vec::new();
        let mut eff: PartialState = Vec::new();
        let num_prevail = lines.next_usize()?;
        for _ in 0..num_prevail {
            let (v, val) = parse_pair(&mut lines)?;
            pre.push((v, val));
        }
        let num_pre_post = lines.next_usize()?;
        for _ in 0..num_pre_post {
            let l = lines.next()?;
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() < 4 {
                return Err(lines.err(format!("malformed pre/post line '{l}'")));
            }
            let num_conditions: usize = fields[0]
                .parse()
                .map_err(|_| lines.err("bad effect condition count"))?;
            if num_conditions != 0 {
                return Err(SasError::Unsupported {
                    line: lines.line,
                    msg: format!("operator '{name}' has conditional effects"),
                });
            }
            let var: usize = fields[1].parse().map_err(|_| lines.err("bad variable id"))?;
            let pre_val: i64 = fields[2].parse().map_err(|_| lines.err("bad pre value"))?;
            let post_val: usize = fields[3].parse().map_err(|_| lines.err("bad post value"))?;
            if pre_val >= 0 {
                pre.push((var, pre_val as Value));
            }
            eff.push((var, post_val as Value));
        }
        let file_cost = lines.next_usize()? as u32;
        let cost = if use_costs { file_cost } else { 1 };
        lines.expect("end_operator")?;
        pre.sort_unstable();
        eff.sort_unstable();
        if pre.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(lines.err(format!(
                "operator '{name}' assigns the same variable twice in preconditions"
            )));
        }
        if eff.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(lines.err(format!(
                "operator '{name}' assigns the same variable twice in effects"
            )));
        }
        operators.push(Operator {
            name,
            pre,
            eff,
            cost,
        });
    }

    let num_axioms = lines.next_usize()?;
    if num_axioms != 0 {
        return Err(SasError::Unsupported {
            line: lines.line,
            msg: format!("{num_axioms} axioms present (axioms unsupported)"),
        });
    }

    let task = SasTask {
        variables,
        operators,
        initial,
        goal,
    };
    task.validate()?;
    Ok(task)
}

fn parse_pair(lines: &mut Lines) -> Result<(VarId, Value), SasError> {
    let l = lines.next()?;
    let mut it = l.split_whitespace();
    let v: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| lines.err(format!("malformed variable/value pair '{l}'")))?;
    let val: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| lines.err(format!("malformed variable/value pair '{l}'")))?;
    Ok((v, val as Value))
}
