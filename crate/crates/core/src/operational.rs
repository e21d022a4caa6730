//! Structural operational semantics.
//!
//! Configurations are terms whose leaves may also be states of the graphs
//! assigned by a valuation. Transitions are derived by the rules
//!
//! ```text
//! (act)    a -a-> √
//! (graph)  X@s -a-> X@s'        for s -a-> s' in ρ(X)   (√ if s' is √)
//! (sum)    t -a-> t'  implies  t + u -a-> t'  and  u + t -a-> t'
//! (seq)    t -a-> √   implies  t.u -a-> u
//!          t -a-> t'  implies  t.u -a-> t'.u
//! (rec)    S_X -a-> t' implies  X -a-> t'          for X bound by the spec
//! ```
//!
//! Only transitions with well-founded derivations count. The moves of the
//! spec variables are computed as a least fixed point, so `X = X` has no
//! moves and `X = X + a.X` has only the moves of `a.X`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::algebraic::Valuation;
use crate::lts::{ProcessGraph, Target};
use crate::syntax::{flatten_avoiding, Action, RecSpec, Term};

/// Default bound on explored configurations.
pub const DEFAULT_STATE_LIMIT: usize = 10_000;

/// Bound on the number of distinct initial moves of one spec variable.
pub const MAX_VARIABLE_MOVES: usize = 1024;

/// Bound on the total size of the residual configurations of all variable
/// moves; growing residuals mean the least fixed point is infinite.
pub const MAX_MOVE_NODES: usize = 1 << 12;

/// Explored configurations may hold at most this many term nodes per
/// configuration allowed by the limit.
const NODES_PER_STATE: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("configuration space exceeds the limit of {0} states")]
    StateLimit(usize),
    #[error("initial moves of the recursion variables do not converge (stopped at `{0}`)")]
    Divergent(String),
    #[error("nested recursion in `{0}`; flatten the term first")]
    NestedRecursion(String),
}

/// A configuration term.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Proc {
    Deadlock,
    Act(Action),
    /// A variable bound by the recursive specification.
    Var(String),
    /// State `state` of the graph the valuation assigns to `var`.
    State { var: String, state: usize },
    /// At least two summands, sorted and without duplicates.
    Sum(Vec<Proc>),
    /// The left operand is never itself a sequence.
    Seq(Box<Proc>, Box<Proc>),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Config {
    Tick,
    Proc(Proc),
}

impl Proc {
    /// Number of nodes in the configuration term.
    pub fn size(&self) -> usize {
        match self {
            Proc::Sum(items) => 1 + items.iter().map(Proc::size).sum::<usize>(),
            Proc::Seq(l, r) => 1 + l.size() + r.size(),
            _ => 1,
        }
    }
}

impl fmt::Display for Proc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Proc::Deadlock => f.write_str("delta"),
            Proc::Act(a) => write!(f, "{a}"),
            Proc::Var(x) => f.write_str(x),
            Proc::State { var, state } => write!(f, "{var}@{state}"),
            Proc::Sum(items) => {
                for (i, p) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            Proc::Seq(l, r) => {
                match **l {
                    Proc::Sum(_) => write!(f, "({l})")?,
                    _ => write!(f, "{l}")?,
                }
                match **r {
                    Proc::Sum(_) | Proc::Seq(..) => write!(f, ".({r})"),
                    _ => write!(f, ".{r}"),
                }
            }
        }
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Config::Tick => f.write_str("√"),
            Config::Proc(p) => write!(f, "{p}"),
        }
    }
}

type Moves = Vec<(Action, Config)>;

/// Derives transitions of configurations for one recursive specification
/// and valuation.
#[derive(Debug)]
pub struct Evaluator<'v> {
    valuation: &'v Valuation,
    bodies: BTreeMap<String, Proc>,
    var_moves: BTreeMap<String, Moves>,
    limit: usize,
}

impl<'v> Evaluator<'v> {
    /// Prepares evaluation under `spec`; spec right-hand sides must be
    /// recursion-free and every free variable must be bound by `valuation`.
    pub fn new(
        spec: Option<&RecSpec>,
        valuation: &'v Valuation,
        limit: usize,
    ) -> Result<Evaluator<'v>, EvalError> {
        let mut ev = Evaluator {
            valuation,
            bodies: BTreeMap::new(),
            var_moves: BTreeMap::new(),
            limit,
        };
        if let Some(spec) = spec {
            // bodies can only be converted once every spec variable is known
            for x in spec.vars() {
                ev.bodies.insert(x, Proc::Deadlock);
            }
            for (x, body) in spec.iter() {
                let p = ev.config_of(body)?;
                ev.bodies.insert(x.clone(), p);
            }
            ev.var_moves = ev.least_moves()?;
        }
        Ok(ev)
    }

    /// The moves of every spec variable: the least solution of
    /// `moves(X) = steps(S_X)`, by iteration from the empty assignment.
    fn least_moves(&self) -> Result<BTreeMap<String, Moves>, EvalError> {
        let mut current: BTreeMap<String, Moves> =
            self.bodies.keys().map(|x| (x.clone(), Vec::new())).collect();
        // the sets only grow, so the move bound also bounds the rounds
        loop {
            let mut changed = false;
            let mut next = BTreeMap::new();
            let mut nodes = 0;
            for (x, body) in &self.bodies {
                let moves = self.steps_with(body, &current);
                nodes += moves
                    .iter()
                    .map(|(_, c)| match c {
                        Config::Tick => 1,
                        Config::Proc(p) => p.size(),
                    })
                    .sum::<usize>();
                if moves.len() > MAX_VARIABLE_MOVES || nodes > MAX_MOVE_NODES {
                    return Err(EvalError::Divergent(x.clone()));
                }
                changed |= moves != current[x];
                next.insert(x.clone(), moves);
            }
            current = next;
            if !changed {
                return Ok(current);
            }
        }
    }

    /// Converts a recursion-free term into a normalized configuration.
    pub fn config_of(&self, t: &Term) -> Result<Proc, EvalError> {
        let p = match t {
            Term::Var(x) if self.bodies.contains_key(x) => Proc::Var(x.clone()),
            Term::Var(x) if self.valuation.contains(x) => Proc::State {
                var: x.clone(),
                state: 0,
            },
            Term::Var(x) => return Err(EvalError::UnboundVariable(x.clone())),
            Term::Act(a) => Proc::Act(a.clone()),
            Term::Deadlock => Proc::Deadlock,
            Term::Sum(l, r) => Proc::Sum(vec![self.config_of(l)?, self.config_of(r)?]),
            Term::Seq(l, r) => Proc::Seq(Box::new(self.config_of(l)?), Box::new(self.config_of(r)?)),
            Term::Rec(..) => return Err(EvalError::NestedRecursion(t.to_string())),
        };
        Ok(self.normalize(p))
    }

    fn graph(&self, var: &str) -> &ProcessGraph {
        self.valuation.get(var).expect("graph states refer to bound variables")
    }

    /// Bisimulation-preserving normal form: sums are flattened, sorted,
    /// deduplicated and stripped of `delta`; sequences associate to the
    /// right; `delta.t` and stuck graph states become `delta`.
    pub fn normalize(&self, p: Proc) -> Proc {
        match p {
            Proc::Sum(items) => {
                let mut flat = BTreeSet::new();
                for item in items {
                    match self.normalize(item) {
                        Proc::Deadlock => {}
                        Proc::Sum(inner) => flat.extend(inner),
                        other => {
                            flat.insert(other);
                        }
                    }
                }
                let mut flat: Vec<Proc> = flat.into_iter().collect();
                match flat.len() {
                    0 => Proc::Deadlock,
                    1 => flat.pop().unwrap(),
                    _ => Proc::Sum(flat),
                }
            }
            Proc::Seq(l, r) => {
                let r = self.normalize(*r);
                match self.normalize(*l) {
                    Proc::Deadlock => Proc::Deadlock,
                    Proc::Seq(l1, l2) => {
                        let tail = self.normalize(Proc::Seq(l2, Box::new(r)));
                        Proc::Seq(l1, Box::new(tail))
                    }
                    l => Proc::Seq(Box::new(l), Box::new(r)),
                }
            }
            Proc::State { ref var, state } if self.graph(var).outgoing(state).is_empty() => {
                Proc::Deadlock
            }
            other => other,
        }
    }

    /// All `(action, target)` pairs derivable from `p`, sorted.
    pub fn steps(&self, p: &Proc) -> Moves {
        self.steps_with(p, &self.var_moves)
    }

    pub fn steps_of(&self, c: &Config) -> Moves {
        match c {
            Config::Tick => Vec::new(),
            Config::Proc(p) => self.steps(p),
        }
    }

    fn steps_with(&self, p: &Proc, var_moves: &BTreeMap<String, Moves>) -> Moves {
        let mut out = BTreeSet::new();
        self.collect_steps(p, var_moves, &mut out);
        out.into_iter().collect()
    }

    fn collect_steps(
        &self,
        p: &Proc,
        var_moves: &BTreeMap<String, Moves>,
        out: &mut BTreeSet<(Action, Config)>,
    ) {
        match p {
            Proc::Deadlock => {}
            Proc::Act(a) => {
                out.insert((a.clone(), Config::Tick));
            }
            Proc::Var(x) => {
                out.extend(var_moves.get(x).into_iter().flatten().cloned());
            }
            Proc::State { var, state } => {
                for t in self.graph(var).outgoing(*state) {
                    let target = match t.target {
                        Target::Tick => Config::Tick,
                        Target::State(s) => Config::Proc(self.normalize(Proc::State {
                            var: var.clone(),
                            state: s,
                        })),
                    };
                    out.insert((t.action.clone(), target));
                }
            }
            Proc::Sum(items) => {
                for item in items {
                    self.collect_steps(item, var_moves, out);
                }
            }
            Proc::Seq(l, r) => {
                let mut left = BTreeSet::new();
                self.collect_steps(l, var_moves, &mut left);
                for (a, target) in left {
                    let next = match target {
                        Config::Tick => (**r).clone(),
                        Config::Proc(l2) => self.normalize(Proc::Seq(Box::new(l2), r.clone())),
                    };
                    out.insert((a, Config::Proc(next)));
                }
            }
        }
    }

    /// Explores the configurations reachable from `start` and returns the
    /// minimized graph.
    pub fn explore(&self, start: Proc) -> Result<ProcessGraph, EvalError> {
        let mut index: HashMap<Proc, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        let mut edges = Vec::new();
        let mut nodes = start.size();
        index.insert(start.clone(), 0);
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            let src = index[&p];
            for (a, target) in self.steps(&p) {
                let target = match target {
                    Config::Tick => Target::Tick,
                    Config::Proc(q) => {
                        let next = index.len();
                        let id = *index.entry(q.clone()).or_insert_with(|| {
                            nodes += q.size();
                            queue.push_back(q);
                            next
                        });
                        if index.len() > self.limit || nodes > self.limit.saturating_mul(NODES_PER_STATE) {
                            return Err(EvalError::StateLimit(self.limit));
                        }
                        Target::State(id)
                    }
                };
                edges.push((src, a, target));
            }
        }
        Ok(ProcessGraph::normalized(index.len(), 0, edges).minimize())
    }
}

/// The transitions of the configuration denoted by a recursion-free term.
pub fn derive_steps(
    t: &Term,
    spec: Option<&RecSpec>,
    valuation: &Valuation,
) -> Result<Vec<(Action, Config)>, EvalError> {
    let ev = Evaluator::new(spec, valuation, DEFAULT_STATE_LIMIT)?;
    let p = ev.config_of(t)?;
    Ok(ev.steps(&p))
}

/// The operational graph of `t` under `spec` and `valuation`, minimized,
/// with the default exploration limit.
pub fn graph_of(t: &Term, spec: Option<&RecSpec>, valuation: &Valuation) -> Result<ProcessGraph, EvalError> {
    graph_of_with_limit(t, spec, valuation, DEFAULT_STATE_LIMIT)
}

/// [`graph_of`] with an explicit bound on explored configurations.
///
/// Nested recursion in `t` is flattened first; its binders are renamed
/// apart from the variables of `spec` and `valuation`.
pub fn graph_of_with_limit(
    t: &Term,
    spec: Option<&RecSpec>,
    valuation: &Valuation,
    limit: usize,
) -> Result<ProcessGraph, EvalError> {
    let mut avoid = valuation.vars();
    if let Some(spec) = spec {
        avoid.extend(spec.vars());
        avoid.extend(spec.free_vars());
    }
    let (head, inner) = flatten_avoiding(t, &avoid);
    let combined = match (spec, inner) {
        (Some(s), Some(inner)) => Some(s.merged(&inner)),
        (Some(s), None) => Some(s.clone()),
        (None, inner) => inner,
    };
    let ev = Evaluator::new(combined.as_ref(), valuation, limit)?;
    let start = ev.config_of(&head)?;
    ev.explore(start)
}
