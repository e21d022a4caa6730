//! Denotational semantics: terms are folded over the graph combinators, and
//! recursion is approximated by iterated unfolding from `delta`.
//!
//! For a guarded specification the `n`-th approximation agrees with the
//! operational graph on every path of length at most `n`.

use std::collections::BTreeMap;

use crate::algebraic::Valuation;
use crate::lts::ProcessGraph;
use crate::operational::{graph_of, EvalError};
use crate::syntax::{RecSpec, Substitution, Term};

/// Substitutes the right-hand sides of `spec` into `t` `n` times, then
/// replaces the remaining spec variables by `delta`.
pub fn unfold(t: &Term, spec: &RecSpec, n: usize) -> Term {
    let sigma = spec.as_substitution();
    let mut current = t.clone();
    for _ in 0..n {
        current = current.substitute(&sigma);
    }
    let cutoff: Substitution = spec.vars().into_iter().map(|x| (x, Term::Deadlock)).collect();
    current.substitute(&cutoff)
}

/// The graph of a recursion-free term, built compositionally from the
/// combinators, with free variables looked up through `lookup`.
pub fn interpret_with<'g, F>(t: &Term, lookup: &F) -> Result<ProcessGraph, EvalError>
where
    F: Fn(&str) -> Option<&'g ProcessGraph>,
{
    Ok(fold(t, lookup)?.minimize())
}

fn fold<'g, F>(t: &Term, lookup: &F) -> Result<ProcessGraph, EvalError>
where
    F: Fn(&str) -> Option<&'g ProcessGraph>,
{
    Ok(match t {
        Term::Var(x) => lookup(x)
            .cloned()
            .ok_or_else(|| EvalError::UnboundVariable(x.clone()))?,
        Term::Act(a) => ProcessGraph::action(a.clone()),
        Term::Deadlock => ProcessGraph::deadlock(),
        Term::Sum(l, r) => fold(l, lookup)?.sum(&fold(r, lookup)?),
        Term::Seq(l, r) => fold(l, lookup)?.seq(&fold(r, lookup)?),
        Term::Rec(..) => return Err(EvalError::NestedRecursion(t.to_string())),
    })
}

/// [`interpret_with`] for a valuation.
pub fn interpret(t: &Term, valuation: &Valuation) -> Result<ProcessGraph, EvalError> {
    interpret_with(t, &|x: &str| valuation.get(x))
}

/// The `n`-th approximation of `t` under `spec`: the graph of
/// [`unfold(t, spec, n)`](unfold) under `valuation`, minimized.
///
/// Computed without materializing the unfolded term, by iterating
/// `A_0(X) = delta`, `A_{k+1}(X) = [[S_X]](valuation, A_k)`.
pub fn approximate(
    t: &Term,
    spec: &RecSpec,
    n: usize,
    valuation: &Valuation,
) -> Result<ProcessGraph, EvalError> {
    let mut approx: BTreeMap<String, ProcessGraph> = spec
        .vars()
        .into_iter()
        .map(|x| (x, ProcessGraph::deadlock()))
        .collect();
    for _ in 0..n {
        let mut next = BTreeMap::new();
        for (x, body) in spec.iter() {
            let g = interpret_with(body, &|y: &str| approx.get(y).or_else(|| valuation.get(y)))?;
            next.insert(x.clone(), g);
        }
        if next == approx {
            break;
        }
        approx = next;
    }
    interpret_with(t, &|y: &str| approx.get(y).or_else(|| valuation.get(y)))
}

/// [`approximate`] by the literal definition: unfold, then evaluate
/// operationally.
pub fn approximate_by_unfolding(
    t: &Term,
    spec: &RecSpec,
    n: usize,
    valuation: &Valuation,
) -> Result<ProcessGraph, EvalError> {
    graph_of(&unfold(t, spec, n), None, valuation)
}
