//! Process graphs modulo strong bisimilarity.
//!
//! A [`ProcessGraph`] is a finite rooted transition system with a single
//! shared termination state `√`. Graphs are kept in a normal form: every
//! state is reachable from the initial state, the initial state is `0`, and
//! the remaining states are numbered breadth-first with outgoing transitions
//! visited in `(action, target)` order.

mod formula;
pub mod partition;
mod universe;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::syntax::{Action, RecSpec, Term};

pub use formula::Formula;
pub use partition::{coarsest_partition, Partition};
pub use universe::{
    enumerate_universe, raw_graph_count, Succ, Universe, UniverseError, DEFAULT_UNIVERSE_BUDGET,
};

/// Where a transition leads: the termination state or an ordinary state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Tick,
    State(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: usize,
    pub action: Action,
    pub target: Target,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProcessGraph {
    states: usize,
    /// Sorted by `(source, action, target)`, no duplicates.
    transitions: Vec<Transition>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("state {0} is out of range")]
    StateOutOfRange(usize),
    #[error("a graph needs at least one state")]
    NoStates,
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Outcome of a bisimilarity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bisimilarity {
    Bisimilar,
    /// The formula holds in the first graph and fails in the second.
    Distinguished(Formula),
}

impl Bisimilarity {
    pub fn holds(&self) -> bool {
        matches!(self, Bisimilarity::Bisimilar)
    }
}

impl ProcessGraph {
    /// Builds a graph from raw transitions. Unreachable states are dropped
    /// and the rest renumbered so that `initial` becomes state `0`.
    pub fn new(
        states: usize,
        initial: usize,
        transitions: impl IntoIterator<Item = (usize, Action, Target)>,
    ) -> Result<ProcessGraph, GraphError> {
        if states == 0 {
            return Err(GraphError::NoStates);
        }
        if initial >= states {
            return Err(GraphError::StateOutOfRange(initial));
        }
        let transitions: Vec<_> = transitions.into_iter().collect();
        for (s, _, t) in &transitions {
            if *s >= states {
                return Err(GraphError::StateOutOfRange(*s));
            }
            if let Target::State(t) = t {
                if *t >= states {
                    return Err(GraphError::StateOutOfRange(*t));
                }
            }
        }
        Ok(Self::normalized(states, initial, transitions))
    }

    /// Infallible constructor for internally generated, in-range input.
    pub(crate) fn normalized(
        states: usize,
        initial: usize,
        transitions: Vec<(usize, Action, Target)>,
    ) -> ProcessGraph {
        let mut out: Vec<Vec<(Action, Target)>> = vec![Vec::new(); states];
        for (s, a, t) in transitions {
            out[s].push((a, t));
        }
        for edges in &mut out {
            edges.sort();
            edges.dedup();
        }
        let mut number = vec![usize::MAX; states];
        let mut order = Vec::new();
        let mut queue = VecDeque::from([initial]);
        number[initial] = 0;
        order.push(initial);
        while let Some(s) = queue.pop_front() {
            for (_, t) in &out[s] {
                if let Target::State(t) = *t {
                    if number[t] == usize::MAX {
                        number[t] = order.len();
                        order.push(t);
                        queue.push_back(t);
                    }
                }
            }
        }
        let mut result: Vec<Transition> = Vec::new();
        for &s in &order {
            for (a, t) in &out[s] {
                let target = match *t {
                    Target::Tick => Target::Tick,
                    Target::State(t) => Target::State(number[t]),
                };
                result.push(Transition {
                    source: number[s],
                    action: a.clone(),
                    target,
                });
            }
        }
        result.sort();
        result.dedup();
        ProcessGraph {
            states: order.len(),
            transitions: result,
        }
    }

    /// `delta`: one state, no transitions.
    pub fn deadlock() -> ProcessGraph {
        ProcessGraph {
            states: 1,
            transitions: Vec::new(),
        }
    }

    /// A single `a` step into termination.
    pub fn action(a: Action) -> ProcessGraph {
        ProcessGraph {
            states: 1,
            transitions: vec![Transition {
                source: 0,
                action: a,
                target: Target::Tick,
            }],
        }
    }

    /// One state with an `a` self-loop.
    pub fn action_loop(a: Action) -> ProcessGraph {
        ProcessGraph {
            states: 1,
            transitions: vec![Transition {
                source: 0,
                action: a,
                target: Target::State(0),
            }],
        }
    }

    pub fn num_states(&self) -> usize {
        self.states
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn outgoing(&self, state: usize) -> &[Transition] {
        let lo = self.transitions.partition_point(|t| t.source < state);
        let hi = self.transitions.partition_point(|t| t.source <= state);
        &self.transitions[lo..hi]
    }

    pub fn alphabet(&self) -> BTreeSet<Action> {
        self.transitions.iter().map(|t| t.action.clone()).collect()
    }

    fn raw(&self, offset: usize) -> impl Iterator<Item = (usize, Action, Target)> + '_ {
        self.transitions.iter().map(move |t| {
            (t.source + offset, t.action.clone(), shift(t.target, offset))
        })
    }

    /// Alternative composition: a fresh root carrying the initial moves of
    /// both operands.
    pub fn sum(&self, other: &ProcessGraph) -> ProcessGraph {
        let (g_off, h_off) = (1, 1 + self.states);
        let mut edges: Vec<_> = self.raw(g_off).chain(other.raw(h_off)).collect();
        for t in self.outgoing(0) {
            edges.push((0, t.action.clone(), shift(t.target, g_off)));
        }
        for t in other.outgoing(0) {
            edges.push((0, t.action.clone(), shift(t.target, h_off)));
        }
        Self::normalized(1 + self.states + other.states, 0, edges)
    }

    /// Sequential composition: every transition into `√` is redirected to
    /// the initial state of `other`.
    pub fn seq(&self, other: &ProcessGraph) -> ProcessGraph {
        let h_off = self.states;
        let mut edges: Vec<_> = self
            .transitions
            .iter()
            .map(|t| {
                let target = match t.target {
                    Target::Tick => Target::State(h_off),
                    s => s,
                };
                (t.source, t.action.clone(), target)
            })
            .collect();
        edges.extend(other.raw(h_off));
        Self::normalized(self.states + other.states, 0, edges)
    }

    /// `a*g`: a fresh root with an `a` self-loop that can at any point
    /// continue with an initial move of `g`.
    pub fn kleene_star(a: Action, g: &ProcessGraph) -> ProcessGraph {
        let mut edges: Vec<_> = g.raw(1).collect();
        edges.push((0, a, Target::State(0)));
        for t in g.outgoing(0) {
            edges.push((0, t.action.clone(), shift(t.target, 1)));
        }
        Self::normalized(1 + g.states, 0, edges)
    }

    fn edges(&self, offset: usize, labels: &BTreeMap<&Action, usize>) -> Vec<partition::Edge> {
        self.transitions
            .iter()
            .map(|t| (t.source + offset, labels[&t.action], shift(t.target, offset)))
            .collect()
    }

    /// Quotient by the coarsest strong bisimulation, in normal form.
    pub fn minimize(&self) -> ProcessGraph {
        let labels: BTreeMap<&Action, usize> = self
            .transitions
            .iter()
            .map(|t| &t.action)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, a)| (a, i))
            .collect();
        let p = coarsest_partition(self.states, &self.edges(0, &labels));
        let tick_block = p.block_of(Target::Tick);
        let class = |b: usize| if b > tick_block { b - 1 } else { b };
        let edges = self
            .transitions
            .iter()
            .map(|t| {
                let target = match t.target {
                    Target::Tick => Target::Tick,
                    Target::State(s) => Target::State(class(p.block(s))),
                };
                (class(p.block(t.source)), t.action.clone(), target)
            })
            .collect();
        Self::normalized(p.count() - 1, class(p.block(0)), edges)
    }

    /// Unfolding of the graph cut off after `depth` steps; deeper behaviour
    /// is replaced by deadlock. The result is minimized.
    pub fn truncate(&self, depth: usize) -> ProcessGraph {
        let n = self.states;
        let index = |s: usize, d: usize| d * n + s;
        let mut edges = Vec::new();
        for d in 0..depth {
            for t in &self.transitions {
                let target = match t.target {
                    Target::Tick => Target::Tick,
                    Target::State(s) => Target::State(index(s, d + 1)),
                };
                edges.push((index(t.source, d), t.action.clone(), target));
            }
        }
        Self::normalized(n * (depth + 1), 0, edges).minimize()
    }

    /// Renders the graph as a closed term `<P0 | P0 = ..., P1 = ...>`.
    pub fn to_term(&self) -> Term {
        let var = |s: usize| format!("P{s}");
        let bindings = (0..self.states).map(|s| {
            let summands = self.outgoing(s).iter().map(|t| match t.target {
                Target::Tick => Term::Act(t.action.clone()),
                Target::State(u) => Term::seq(Term::Act(t.action.clone()), Term::Var(var(u))),
            });
            (var(s), Term::sum_of(summands))
        });
        Term::Rec(var(0), RecSpec::new(bindings))
    }

    /// One line per transition, `src action dst`, with `TICK` for `√`.
    pub fn to_canonical_text(&self) -> String {
        let mut out = String::new();
        for t in &self.transitions {
            let _ = writeln!(out, "{} {} {}", t.source, t.action, TargetText(t.target));
        }
        out
    }

    /// Parses the canonical line format. State `0` is initial; blank lines
    /// and `#` comments are ignored.
    pub fn from_canonical_text(text: &str) -> Result<ProcessGraph, GraphError> {
        let mut edges = Vec::new();
        let mut states = 1;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| GraphError::Format {
                line: i + 1,
                message: message.to_string(),
            };
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [src, action, dst] = parts[..] else {
                return Err(err("expected `src action dst`"));
            };
            let src: usize = src.parse().map_err(|_| err("source is not a state number"))?;
            let target = if dst == "TICK" {
                Target::Tick
            } else {
                Target::State(dst.parse().map_err(|_| err("target is not a state number or TICK"))?)
            };
            states = states.max(src + 1);
            if let Target::State(t) = target {
                states = states.max(t + 1);
            }
            edges.push((src, Action::new(action), target));
        }
        ProcessGraph::new(states, 0, edges)
    }

    /// Graphviz rendering; the initial state is double-circled.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph process {\n  rankdir=LR;\n  node [shape=circle];\n");
        for s in 0..self.states {
            let shape = if s == 0 { " shape=doublecircle" } else { "" };
            let _ = writeln!(out, "  s{s} [label=\"{s}\"{shape}];");
        }
        if self.transitions.iter().any(|t| t.target == Target::Tick) {
            out.push_str("  tick [label=\"√\" shape=circle];\n");
        }
        for t in &self.transitions {
            let dst = match t.target {
                Target::Tick => "tick".to_string(),
                Target::State(s) => format!("s{s}"),
            };
            let _ = writeln!(out, "  s{} -> {dst} [label=\"{}\"];", t.source, t.action);
        }
        out.push_str("}\n");
        out
    }
}

fn shift(t: Target, offset: usize) -> Target {
    match t {
        Target::Tick => Target::Tick,
        Target::State(s) => Target::State(s + offset),
    }
}

struct TargetText(Target);

impl fmt::Display for TargetText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Target::Tick => f.write_str("TICK"),
            Target::State(s) => write!(f, "{s}"),
        }
    }
}

impl fmt::Display for ProcessGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.transitions.is_empty() {
            return f.write_str("{}");
        }
        f.write_str("{ ")?;
        for (i, t) in self.transitions.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} {} {}", t.source, t.action, TargetText(t.target))?;
        }
        f.write_str(" }")
    }
}

/// Strong bisimilarity of the initial states, decided by partition
/// refinement on the disjoint union. A negative verdict carries a formula
/// satisfied by `g` but not by `h`.
pub fn bisimilar(g: &ProcessGraph, h: &ProcessGraph) -> Bisimilarity {
    let actions: BTreeSet<&Action> = g
        .transitions
        .iter()
        .chain(&h.transitions)
        .map(|t| &t.action)
        .collect();
    let labels: Vec<Action> = actions.iter().map(|a| (*a).clone()).collect();
    let index: BTreeMap<&Action, usize> = actions.into_iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut edges = g.edges(0, &index);
    edges.extend(h.edges(g.states, &index));
    let p = coarsest_partition(g.states + h.states, &edges);
    if p.same_block(0, g.states) {
        return Bisimilarity::Bisimilar;
    }
    let formula = partition::distinguishing_formula(
        &p,
        &edges,
        &labels,
        Target::State(0),
        Target::State(g.states),
    )
    .expect("separated initial states");
    Bisimilarity::Distinguished(formula)
}

/// Shorthand for `bisimilar(g, h).holds()`.
pub fn is_bisimilar(g: &ProcessGraph, h: &ProcessGraph) -> bool {
    bisimilar(g, h).holds()
}
