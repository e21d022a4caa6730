//! Terms of BPA with deadlock and recursion binders `<X | S>`.
//!
//! The signature is fixed: one constant per action, `delta`, alternative
//! composition `+` and sequential composition `.`. Recursion is expressed
//! with binders `<X | X = t, Y = u>` whose recursive specification maps a
//! finite, nonempty set of variables to terms.
//!
//! Names starting with a lowercase letter are actions; names starting with
//! an uppercase letter or `_` are variables.

mod format;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use parse::{parse_document, parse_term, Document, ParseError, ParseErrorKind};

/// An action label drawn from a declared alphabet.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action(String);

impl Action {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        assert!(!name.is_empty(), "action names are nonempty");
        Action(name)
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Action {
    fn from(name: &str) -> Self {
        Action::new(name)
    }
}

/// True for identifiers the parser classifies as variables.
pub fn is_variable_name(name: &str) -> bool {
    name.starts_with(|c: char| c.is_ascii_uppercase() || c == '_')
}

/// True for identifiers the parser classifies as actions.
pub fn is_action_name(name: &str) -> bool {
    name.starts_with(|c: char| c.is_ascii_lowercase())
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Act(Action),
    Deadlock,
    Sum(Box<Term>, Box<Term>),
    Seq(Box<Term>, Box<Term>),
    /// `<X | S>`: the `X` component of a solution of `S`. `X` is one of
    /// the variables bound by `S`.
    Rec(String, RecSpec),
}

/// A recursive specification: a finite map from variables to terms,
/// iterated in variable-name order.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecSpec {
    bindings: BTreeMap<String, Term>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
}

pub type Substitution = BTreeMap<String, Term>;

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn act(name: &str) -> Term {
        Term::Act(Action::new(name))
    }

    pub fn sum(l: Term, r: Term) -> Term {
        Term::Sum(Box::new(l), Box::new(r))
    }

    pub fn seq(l: Term, r: Term) -> Term {
        Term::Seq(Box::new(l), Box::new(r))
    }

    pub fn rec(x: impl Into<String>, spec: RecSpec) -> Term {
        Term::Rec(x.into(), spec)
    }

    /// Left-nested sum of the given terms; `delta` for an empty list.
    pub fn sum_of(terms: impl IntoIterator<Item = Term>) -> Term {
        terms
            .into_iter()
            .reduce(Term::sum)
            .unwrap_or(Term::Deadlock)
    }

    pub fn is_recursion_free(&self) -> bool {
        match self {
            Term::Var(_) | Term::Act(_) | Term::Deadlock => true,
            Term::Sum(l, r) | Term::Seq(l, r) => l.is_recursion_free() && r.is_recursion_free(),
            Term::Rec(..) => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Act(_) | Term::Deadlock => {}
            Term::Sum(l, r) | Term::Seq(l, r) => {
                l.collect_free(out);
                r.collect_free(out);
            }
            Term::Rec(_, spec) => out.extend(spec.free_vars()),
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_all(&mut out);
        out
    }

    fn collect_all(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Act(_) | Term::Deadlock => {}
            Term::Sum(l, r) | Term::Seq(l, r) => {
                l.collect_all(out);
                r.collect_all(out);
            }
            Term::Rec(x, spec) => {
                out.insert(x.clone());
                for (y, body) in spec.iter() {
                    out.insert(y.clone());
                    body.collect_all(out);
                }
            }
        }
    }

    pub fn actions(&self) -> BTreeSet<Action> {
        let mut out = BTreeSet::new();
        self.collect_actions(&mut out);
        out
    }

    fn collect_actions(&self, out: &mut BTreeSet<Action>) {
        match self {
            Term::Act(a) => {
                out.insert(a.clone());
            }
            Term::Var(_) | Term::Deadlock => {}
            Term::Sum(l, r) | Term::Seq(l, r) => {
                l.collect_actions(out);
                r.collect_actions(out);
            }
            Term::Rec(_, spec) => {
                for body in spec.bodies() {
                    body.collect_actions(out);
                }
            }
        }
    }

    /// Capture-avoiding simultaneous substitution of free occurrences.
    ///
    /// Bound variables of a binder are renamed to their smallest unused
    /// primed variant when they would capture a variable free in the range
    /// of the substitution.
    pub fn substitute(&self, sigma: &Substitution) -> Term {
        if sigma.is_empty() {
            return self.clone();
        }
        match self {
            Term::Var(x) => sigma.get(x).cloned().unwrap_or_else(|| self.clone()),
            Term::Act(_) | Term::Deadlock => self.clone(),
            Term::Sum(l, r) => Term::sum(l.substitute(sigma), r.substitute(sigma)),
            Term::Seq(l, r) => Term::seq(l.substitute(sigma), r.substitute(sigma)),
            Term::Rec(x, spec) => {
                let free = self.free_vars();
                let active: Substitution = sigma
                    .iter()
                    .filter(|(k, _)| free.contains(*k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                if active.is_empty() {
                    return self.clone();
                }
                let range_free: BTreeSet<String> =
                    active.values().flat_map(Term::free_vars).collect();
                let bound = spec.vars();
                let mut avoid: BTreeSet<String> = range_free.clone();
                avoid.extend(free.iter().cloned());
                avoid.extend(bound.iter().cloned());

                let mut renamed: BTreeMap<String, String> = BTreeMap::new();
                for y in &bound {
                    if range_free.contains(y) {
                        let fresh = fresh_name(y, &avoid);
                        avoid.insert(fresh.clone());
                        renamed.insert(y.clone(), fresh);
                    }
                }
                let mut inner = active;
                for (old, new) in &renamed {
                    inner.insert(old.clone(), Term::Var(new.clone()));
                }
                let rename = |y: &String| renamed.get(y).cloned().unwrap_or_else(|| y.clone());
                let bindings = spec
                    .iter()
                    .map(|(y, body)| (rename(y), body.substitute(&inner)))
                    .collect();
                Term::Rec(rename(x), RecSpec { bindings })
            }
        }
    }

    /// Alpha-equivalence: equality up to consistent renaming of bound
    /// variables.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        alpha_eq_in(self, other, &mut Vec::new())
    }
}

/// Smallest primed variant of `base` (`X'`, `X''`, ...) not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut candidate = format!("{base}'");
    while avoid.contains(&candidate) {
        candidate.push('\'');
    }
    candidate
}

// Scope stack of (left name, right name) pairs; innermost last.
fn alpha_eq_in(t: &Term, u: &Term, scope: &mut Vec<(String, String)>) -> bool {
    match (t, u) {
        (Term::Var(x), Term::Var(y)) => {
            for (l, r) in scope.iter().rev() {
                if l == x || r == y {
                    return l == x && r == y;
                }
            }
            x == y
        }
        (Term::Act(a), Term::Act(b)) => a == b,
        (Term::Deadlock, Term::Deadlock) => true,
        (Term::Sum(l1, r1), Term::Sum(l2, r2)) | (Term::Seq(l1, r1), Term::Seq(l2, r2)) => {
            alpha_eq_in(l1, l2, scope) && alpha_eq_in(r1, r2, scope)
        }
        (Term::Rec(x, s), Term::Rec(y, s2)) => {
            if s.len() != s2.len() {
                return false;
            }
            let left: Vec<&String> = s.bindings.keys().collect();
            let mut right: Vec<Option<&String>> = s2.bindings.keys().map(Some).collect();
            let mut pairing = Vec::with_capacity(left.len());
            match_bindings(x, y, s, s2, &left, &mut right, &mut pairing, scope)
        }
        _ => false,
    }
}

// Tries every bijection between the two binding sets; specs are small.
#[allow(clippy::too_many_arguments)]
fn match_bindings(
    x: &str,
    y: &str,
    s: &RecSpec,
    s2: &RecSpec,
    left: &[&String],
    right: &mut Vec<Option<&String>>,
    pairing: &mut Vec<(String, String)>,
    scope: &mut Vec<(String, String)>,
) -> bool {
    let depth = pairing.len();
    if depth == left.len() {
        if !pairing.iter().any(|(l, r)| l == x && r == y) {
            return false;
        }
        let base = scope.len();
        scope.extend(pairing.iter().cloned());
        let ok = pairing
            .iter()
            .all(|(l, r)| alpha_eq_in(&s.bindings[l], &s2.bindings[r], scope));
        scope.truncate(base);
        return ok;
    }
    for i in 0..right.len() {
        if let Some(r) = right[i] {
            right[i] = None;
            pairing.push((left[depth].clone(), r.clone()));
            let found = match_bindings(x, y, s, s2, left, right, pairing, scope);
            pairing.pop();
            right[i] = Some(r);
            if found {
                return true;
            }
        }
    }
    false
}

impl RecSpec {
    /// Builds a specification from its bindings. Panics on an empty set of
    /// bindings.
    pub fn new(bindings: impl IntoIterator<Item = (String, Term)>) -> RecSpec {
        let bindings: BTreeMap<String, Term> = bindings.into_iter().collect();
        assert!(!bindings.is_empty(), "a recursive specification binds at least one variable");
        RecSpec { bindings }
    }

    /// Convenience constructor from `(&str, Term)` pairs.
    pub fn of<'a>(bindings: impl IntoIterator<Item = (&'a str, Term)>) -> RecSpec {
        RecSpec::new(bindings.into_iter().map(|(k, v)| (k.to_string(), v)))
    }

    pub fn get(&self, x: &str) -> Option<&Term> {
        self.bindings.get(x)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.bindings.contains_key(x)
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.bindings.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.bindings.iter()
    }

    pub fn bodies(&self) -> impl Iterator<Item = &Term> {
        self.bindings.values()
    }

    pub fn bindings(&self) -> &BTreeMap<String, Term> {
        &self.bindings
    }

    /// Variables free in some right-hand side and not bound by the spec.
    pub fn free_vars(&self) -> BTreeSet<String> {
        self.bindings
            .values()
            .flat_map(Term::free_vars)
            .filter(|v| !self.bindings.contains_key(v))
            .collect()
    }

    pub fn is_recursion_free(&self) -> bool {
        self.bindings.values().all(Term::is_recursion_free)
    }

    /// The substitution `X -> <X | S>` for every bound `X`.
    pub fn unfolding(&self) -> Substitution {
        self.bindings
            .keys()
            .map(|x| (x.clone(), Term::Rec(x.clone(), self.clone())))
            .collect()
    }

    /// The substitution `X -> S_X` for every bound `X`.
    pub fn as_substitution(&self) -> Substitution {
        self.bindings.clone()
    }

    /// Union of two specifications with disjoint variable sets.
    pub fn merged(&self, other: &RecSpec) -> RecSpec {
        let mut bindings = self.bindings.clone();
        for (k, v) in &other.bindings {
            let clash = bindings.insert(k.clone(), v.clone());
            assert!(clash.is_none(), "merged specifications must bind disjoint variables");
        }
        RecSpec { bindings }
    }
}

impl FromIterator<(String, Term)> for RecSpec {
    fn from_iter<I: IntoIterator<Item = (String, Term)>>(iter: I) -> Self {
        RecSpec::new(iter)
    }
}

/// Name of the placeholder variable bound by [`flatten`] for recursion-free
/// input.
pub const PLACEHOLDER_VAR: &str = "_fresh";

/// Converts a term into the form `<head | spec>` with `head` and every
/// right-hand side of `spec` recursion-free.
///
/// Binders are renamed apart so that every variable of the returned spec
/// comes from exactly one binder. A recursion-free input is returned as is,
/// paired with the one-entry spec `{_fresh = delta}` (renamed if `_fresh`
/// already occurs).
pub fn flatten(t: &Term) -> (Term, RecSpec) {
    match flatten_avoiding(t, &BTreeSet::new()) {
        (head, Some(spec)) => (head, spec),
        (head, None) => {
            let used = t.all_vars();
            let name = if used.contains(PLACEHOLDER_VAR) {
                fresh_name(PLACEHOLDER_VAR, &used)
            } else {
                PLACEHOLDER_VAR.to_string()
            };
            (head, RecSpec::new([(name, Term::Deadlock)]))
        }
    }
}

/// Like [`flatten`], but keeps the names in `avoid` (plus the free variables
/// of `t`) out of the generated spec, and returns `None` instead of a
/// placeholder spec for recursion-free input.
pub fn flatten_avoiding(t: &Term, avoid: &BTreeSet<String>) -> (Term, Option<RecSpec>) {
    if t.is_recursion_free() {
        return (t.clone(), None);
    }
    let mut used = avoid.clone();
    used.extend(t.free_vars());
    let mut flattener = Flattener {
        used,
        bindings: BTreeMap::new(),
    };
    let head = flattener.visit(t, &BTreeMap::new());
    (head, Some(RecSpec::new(flattener.bindings)))
}

struct Flattener {
    used: BTreeSet<String>,
    bindings: BTreeMap<String, Term>,
}

impl Flattener {
    fn visit(&mut self, t: &Term, env: &BTreeMap<String, String>) -> Term {
        match t {
            Term::Var(x) => Term::Var(env.get(x).cloned().unwrap_or_else(|| x.clone())),
            Term::Act(_) | Term::Deadlock => t.clone(),
            Term::Sum(l, r) => Term::sum(self.visit(l, env), self.visit(r, env)),
            Term::Seq(l, r) => Term::seq(self.visit(l, env), self.visit(r, env)),
            Term::Rec(x, spec) => {
                let mut inner = env.clone();
                for y in spec.bindings.keys() {
                    let name = if self.used.contains(y) {
                        fresh_name(y, &self.used)
                    } else {
                        y.clone()
                    };
                    self.used.insert(name.clone());
                    inner.insert(y.clone(), name);
                }
                for (y, body) in &spec.bindings {
                    let flat = self.visit(body, &inner);
                    self.bindings.insert(inner[y].clone(), flat);
                }
                Term::Var(inner[x].clone())
            }
        }
    }
}
