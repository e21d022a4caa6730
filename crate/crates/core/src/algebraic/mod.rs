//! Algebraic semantics: a recursive specification denotes its solutions.
//!
//! A valuation is compatible with `S` when `ρ(Y) ↔ [[S_Y]](ρ)` for every
//! `Y ∈ V_S`. Unguarded variables then range over all solutions rather than
//! a single least one, and an equation holds under `S` when it holds for
//! every compatible valuation. Quantification is over a finite [`Universe`],
//! so every verdict here is relative to that universe.

mod guarded;
mod search;
mod valuation;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

pub use guarded::{head_vars, is_guarded, GuardednessReport};
pub use valuation::Valuation;

use crate::denotational::interpret;
use crate::lts::{is_bisimilar, Universe};
use crate::operational::{graph_of, EvalError};
use crate::syntax::{Equation, RecSpec, Term};
use search::Search;

/// Default cap on search nodes visited by [`compatible_valuations`] and
/// [`holds`].
pub const DEFAULT_SEARCH_BUDGET: u64 = 20_000_000;

/// Default cap on the number of valuations enumerated by
/// [`holds_conditional`] and [`congruence_check`].
pub const DEFAULT_VALUATION_BUDGET: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("valuation does not bind `{0}`")]
    MissingBinding(String),
    #[error("right-hand side of `{0}` contains recursion; flatten the specification first")]
    NestedRecursion(String),
    #[error("search exceeded its budget of {budget} nodes")]
    SearchBudgetExceeded { budget: u64 },
    #[error("refusing to enumerate {} valuations (budget {budget})", count_text(.count))]
    ValuationBudgetExceeded { count: Option<u128>, budget: u128 },
    #[error("specification is {0}")]
    Unguarded(GuardednessReport),
    #[error("specification has free variables {}", .0.iter().cloned().collect::<Vec<_>>().join(", "))]
    OpenSpec(BTreeSet<String>),
    #[error("internal inconsistency: guarded specification has {0} solutions in the universe")]
    Inconsistent(usize),
    #[error("specifications bind different variables")]
    VarSetMismatch,
}

fn count_text(count: &Option<u128>) -> String {
    count.map_or_else(|| "more than 2^128".to_string(), |n| n.to_string())
}

/// Whether `ρ(Y) ↔ [[S_Y]](ρ)` for every `Y ∈ V_S`.
pub fn is_compatible(valuation: &Valuation, spec: &RecSpec) -> Result<bool, AlgebraError> {
    for x in spec.vars().iter().chain(&spec.free_vars()) {
        if !valuation.contains(x) {
            return Err(AlgebraError::MissingBinding(x.clone()));
        }
    }
    for (y, body) in spec.iter() {
        let g = graph_of(body, None, valuation)?;
        if !is_bisimilar(valuation.get(y).expect("checked above"), &g) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The compatible valuations of a specification within a universe, over the
/// variables `V_S ∪ fv(S)`, in canonical order.
#[derive(Clone, Debug)]
pub struct SolutionSet<'u> {
    spec: RecSpec,
    universe: &'u Universe,
    vars: Vec<String>,
    rows: Vec<Vec<usize>>,
}

impl<'u> SolutionSet<'u> {
    pub fn spec(&self) -> &RecSpec {
        &self.spec
    }

    pub fn universe(&self) -> &'u Universe {
        self.universe
    }

    /// The quantified variables, sorted.
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Solutions as member indices, one per variable in [`vars`](Self::vars) order.
    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn valuation(&self, i: usize) -> Valuation {
        row_valuation(self.universe, &self.vars, &self.rows[i])
    }

    pub fn valuations(&self) -> Vec<Valuation> {
        (0..self.rows.len()).map(|i| self.valuation(i)).collect()
    }
}

/// One line per solution, `X=g3 Y=g0`, then a legend for the ids used.
impl fmt::Display for SolutionSet<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut used = BTreeSet::new();
        for row in &self.rows {
            let cells: Vec<String> = self
                .vars
                .iter()
                .zip(row)
                .map(|(x, &j)| format!("{x}={}", self.universe.id(j)))
                .collect();
            writeln!(f, "{}", cells.join(" "))?;
            used.extend(row.iter().copied());
        }
        if !used.is_empty() {
            writeln!(f, "where")?;
            for j in used {
                writeln!(f, "  {} = {}", self.universe.id(j), self.universe.member(j))?;
            }
        }
        Ok(())
    }
}

fn row_valuation(universe: &Universe, vars: &[String], row: &[usize]) -> Valuation {
    vars.iter()
        .zip(row)
        .map(|(x, &j)| (x.clone(), universe.member(j).clone()))
        .collect()
}

/// All valuations of `V_S ∪ fv(S)` into the universe compatible with `spec`.
pub fn compatible_valuations<'u>(spec: &RecSpec, universe: &'u Universe) -> Result<SolutionSet<'u>, AlgebraError> {
    compatible_valuations_with_budget(spec, universe, DEFAULT_SEARCH_BUDGET)
}

/// [`compatible_valuations`] with an explicit bound on search nodes.
pub fn compatible_valuations_with_budget<'u>(
    spec: &RecSpec,
    universe: &'u Universe,
    budget: u64,
) -> Result<SolutionSet<'u>, AlgebraError> {
    let search = Search::new(spec, universe, &BTreeSet::new(), budget)?;
    let vars = search.vars().to_vec();
    let rows = search.run()?;
    Ok(SolutionSet {
        spec: spec.clone(),
        universe,
        vars,
        rows,
    })
}

/// The single solution of a closed guarded specification within the
/// universe, or `None` if its solution lies outside.
pub fn unique_solution(spec: &RecSpec, universe: &Universe) -> Result<Option<Valuation>, AlgebraError> {
    let report = is_guarded(spec);
    if !report.is_guarded() {
        return Err(AlgebraError::Unguarded(report));
    }
    let free = spec.free_vars();
    if !free.is_empty() {
        return Err(AlgebraError::OpenSpec(free));
    }
    let solutions = compatible_valuations(spec, universe)?;
    match solutions.len() {
        0 => Ok(None),
        1 => Ok(Some(solutions.valuation(0))),
        n => Err(AlgebraError::Inconsistent(n)),
    }
}

/// Result of checking an equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    /// The first valuation in canonical order that refutes the equation.
    Fails(Valuation),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

fn quantified(eq: &Equation, spec: &RecSpec) -> BTreeSet<String> {
    let mut vars = spec.vars();
    vars.extend(spec.free_vars());
    vars.extend(eq.lhs.free_vars());
    vars.extend(eq.rhs.free_vars());
    vars
}

fn sides_agree(eq: &Equation, valuation: &Valuation) -> Result<bool, AlgebraError> {
    let l = graph_of(&eq.lhs, None, valuation)?;
    let r = graph_of(&eq.rhs, None, valuation)?;
    Ok(is_bisimilar(&l, &r))
}

/// Compositional counterpart of [`sides_agree`]; nested recursion falls
/// back to the operational route.
fn sides_agree_compositional(eq: &Equation, valuation: &Valuation) -> Result<bool, AlgebraError> {
    if !(eq.lhs.is_recursion_free() && eq.rhs.is_recursion_free()) {
        return sides_agree(eq, valuation);
    }
    let l = interpret(&eq.lhs, valuation)?;
    let r = interpret(&eq.rhs, valuation)?;
    Ok(is_bisimilar(&l, &r))
}

/// Whether `eq` holds for every valuation of `V_S ∪ fv(S) ∪ fv(eq)` that is
/// compatible with `spec`.
///
/// Compatible valuations come from the universe search and the sides are
/// compared compositionally; [`holds_conditional`] takes the operational
/// route over all valuations instead.
pub fn holds(eq: &Equation, spec: &RecSpec, universe: &Universe) -> Result<Verdict, AlgebraError> {
    holds_with_budget(eq, spec, universe, DEFAULT_SEARCH_BUDGET)
}

pub fn holds_with_budget(
    eq: &Equation,
    spec: &RecSpec,
    universe: &Universe,
    budget: u64,
) -> Result<Verdict, AlgebraError> {
    let eq_vars: BTreeSet<String> = eq.lhs.free_vars().into_iter().chain(eq.rhs.free_vars()).collect();
    let search = Search::new(spec, universe, &BTreeSet::new(), budget)?;
    let spec_vars = search.vars().to_vec();
    // variables only the equation mentions are unconstrained
    let loose: Vec<String> = eq_vars.iter().filter(|v| !spec_vars.contains(v)).cloned().collect();
    let vars: Vec<String> = quantified(eq, spec).into_iter().collect();
    let slot = |v: &String| vars.iter().position(|w| w == v).expect("quantified");
    let spec_slots: Vec<usize> = spec_vars.iter().map(slot).collect();
    let loose_slots: Vec<usize> = loose.iter().map(slot).collect();
    let key_slots: Vec<usize> = eq_vars.iter().map(slot).collect();

    let rows = search.run()?;
    let mut memo: HashMap<Vec<usize>, bool> = HashMap::new();
    let mut witness: Option<Vec<usize>> = None;
    let mut row = vec![0; vars.len()];
    for spec_row in &rows {
        for (&i, &j) in spec_slots.iter().zip(spec_row) {
            row[i] = j;
        }
        for loose_row in Odometer::new(universe.len(), loose.len(), u128::from(budget))? {
            for (&i, &j) in loose_slots.iter().zip(&loose_row) {
                row[i] = j;
            }
            let key: Vec<usize> = key_slots.iter().map(|&i| row[i]).collect();
            let ok = match memo.get(&key) {
                Some(&ok) => ok,
                None => {
                    let ok = sides_agree_compositional(eq, &row_valuation(universe, &vars, &row))?;
                    memo.insert(key, ok);
                    ok
                }
            };
            if !ok && witness.as_ref().is_none_or(|w| row < *w) {
                witness = Some(row.clone());
            }
        }
    }
    Ok(match witness {
        Some(row) => Verdict::Fails(row_valuation(universe, &vars, &row)),
        None => Verdict::Holds,
    })
}

/// Lexicographic enumeration of all rows over `k` variables.
struct Odometer {
    base: usize,
    row: Option<Vec<usize>>,
}

impl Odometer {
    fn new(base: usize, k: usize, budget: u128) -> Result<Odometer, AlgebraError> {
        let count = u32::try_from(k).ok().and_then(|k| (base as u128).checked_pow(k));
        match count {
            Some(n) if n <= budget => {}
            _ => return Err(AlgebraError::ValuationBudgetExceeded { count, budget }),
        }
        let row = if base == 0 && k > 0 { None } else { Some(vec![0; k]) };
        Ok(Odometer { base, row })
    }
}

impl Iterator for Odometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.row.clone()?;
        let row = self.row.as_mut().unwrap();
        let mut i = row.len();
        loop {
            if i == 0 {
                self.row = None;
                break;
            }
            i -= 1;
            row[i] += 1;
            if row[i] < self.base {
                break;
            }
            row[i] = 0;
        }
        Some(current)
    }
}

/// Checks `eq` as the conditional equation `(⋀ X = S_X) ⇒ lhs = rhs` over
/// every valuation into the universe. Agrees with [`holds`], including the
/// witness, by an independent route.
pub fn holds_conditional(eq: &Equation, spec: &RecSpec, universe: &Universe) -> Result<Verdict, AlgebraError> {
    holds_conditional_with_budget(eq, spec, universe, DEFAULT_VALUATION_BUDGET)
}

pub fn holds_conditional_with_budget(
    eq: &Equation,
    spec: &RecSpec,
    universe: &Universe,
    budget: u128,
) -> Result<Verdict, AlgebraError> {
    let vars: Vec<String> = quantified(eq, spec).into_iter().collect();
    for row in Odometer::new(universe.len(), vars.len(), budget)? {
        let rho = row_valuation(universe, &vars, &row);
        let mut antecedent = true;
        for (x, body) in spec.iter() {
            let g = graph_of(body, None, &rho)?;
            if !is_bisimilar(rho.get(x).expect("quantified"), &g) {
                antecedent = false;
                break;
            }
        }
        if antecedent && !sides_agree(eq, &rho)? {
            return Ok(Verdict::Fails(rho));
        }
    }
    Ok(Verdict::Holds)
}

/// Outcome of [`congruence_check`], relative to the universe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CongruenceOutcome {
    /// Some right-hand sides differ under `witness`.
    PremiseFailed { var: String, witness: Valuation },
    ConclusionVerified,
    /// The premise holds but the recursions differ; this is a bug.
    ConclusionViolated { witness: Valuation },
}

impl fmt::Display for CongruenceOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CongruenceOutcome::PremiseFailed { var, witness } => {
                write!(f, "premise fails for {var} under {witness}")
            }
            CongruenceOutcome::ConclusionVerified => f.write_str("conclusion verified"),
            CongruenceOutcome::ConclusionViolated { witness } => {
                write!(f, "conclusion violated under {witness}")
            }
        }
    }
}

/// The congruence property for recursion: if `S_X ↔ S'_X` under every
/// valuation, then `<t|S>` and `<t|S'>` denote the same.
///
/// For guarded specifications the conclusion compares the operational
/// graphs of `<t|S>` and `<t|S'>` for every binding of the free variables;
/// otherwise it compares the solution sets.
pub fn congruence_check(
    spec: &RecSpec,
    other: &RecSpec,
    t: &Term,
    universe: &Universe,
) -> Result<CongruenceOutcome, AlgebraError> {
    congruence_check_with_budget(spec, other, t, universe, DEFAULT_VALUATION_BUDGET)
}

pub fn congruence_check_with_budget(
    spec: &RecSpec,
    other: &RecSpec,
    t: &Term,
    universe: &Universe,
    budget: u128,
) -> Result<CongruenceOutcome, AlgebraError> {
    if spec.vars() != other.vars() {
        return Err(AlgebraError::VarSetMismatch);
    }
    let mut all = spec.vars();
    all.extend(spec.free_vars());
    all.extend(other.free_vars());
    all.extend(t.free_vars());
    let vars: Vec<String> = all.iter().cloned().collect();
    for row in Odometer::new(universe.len(), vars.len(), budget)? {
        let rho = row_valuation(universe, &vars, &row);
        for (x, body) in spec.iter() {
            let g = graph_of(body, None, &rho)?;
            let h = graph_of(other.get(x).expect("same variables"), None, &rho)?;
            if !is_bisimilar(&g, &h) {
                return Ok(CongruenceOutcome::PremiseFailed {
                    var: x.clone(),
                    witness: rho,
                });
            }
        }
    }

    let free: Vec<String> = all.iter().filter(|v| !spec.contains(v)).cloned().collect();
    if is_guarded(spec).is_guarded() && is_guarded(other).is_guarded() {
        for row in Odometer::new(universe.len(), free.len(), budget)? {
            let rho = row_valuation(universe, &free, &row);
            let g = graph_of(t, Some(spec), &rho)?;
            let h = graph_of(t, Some(other), &rho)?;
            if !is_bisimilar(&g, &h) {
                return Ok(CongruenceOutcome::ConclusionViolated { witness: rho });
            }
        }
        return Ok(CongruenceOutcome::ConclusionVerified);
    }

    let extra: BTreeSet<String> = all.iter().cloned().collect();
    let left = Search::new(spec, universe, &extra, DEFAULT_SEARCH_BUDGET)?.run()?;
    let right = Search::new(other, universe, &extra, DEFAULT_SEARCH_BUDGET)?.run()?;
    if left == right {
        return Ok(CongruenceOutcome::ConclusionVerified);
    }
    let witness = left
        .iter()
        .zip(&right)
        .find(|(l, r)| l != r)
        .map(|(l, r)| l.min(r))
        .or_else(|| left.get(right.len()))
        .or_else(|| right.get(left.len()))
        .expect("solution lists differ");
    Ok(CongruenceOutcome::ConclusionViolated {
        witness: row_valuation(universe, &vars, witness),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::{enumerate_universe, ProcessGraph, DEFAULT_UNIVERSE_BUDGET};
    use crate::syntax::Action;

    fn universe(names: &[&str], states: usize) -> Universe {
        let alphabet = names.iter().map(|n| Action::new(*n)).collect();
        enumerate_universe(&alphabet, states, DEFAULT_UNIVERSE_BUDGET).unwrap()
    }
    fn x() -> Term {
        Term::var("X")
    }
    fn ax() -> Term {
        Term::seq(Term::act("a"), x())
    }
    fn a_loop() -> ProcessGraph {
        ProcessGraph::action_loop(Action::new("a"))
    }

    #[test]
    fn compatibility_examples() {
        let spec = RecSpec::of([("X", ax())]);
        assert!(is_compatible(&Valuation::new().with("X", a_loop()), &spec).unwrap());
        let a = ProcessGraph::action(Action::new("a"));
        assert!(!is_compatible(&Valuation::new().with("X", a), &spec).unwrap());
        assert_eq!(
            is_compatible(&Valuation::new(), &spec).unwrap_err(),
            AlgebraError::MissingBinding("X".into())
        );
        let idle = RecSpec::of([("X", x())]);
        for g in universe(&["a"], 1).members() {
            assert!(is_compatible(&Valuation::new().with("X", g.clone()), &idle).unwrap());
        }
    }

    #[test]
    fn solution_sets() {
        let u = universe(&["a"], 1);
        let idle = compatible_valuations(&RecSpec::of([("X", x())]), &u).unwrap();
        assert_eq!(idle.len(), 4);
        let looping = compatible_valuations(&RecSpec::of([("X", ax())]), &u).unwrap();
        assert_eq!(looping.valuations(), vec![Valuation::new().with("X", a_loop())]);
        assert_eq!(looping.to_string(), "X=g2\nwhere\n  g2 = { 0 a 0 }\n");
        let star = compatible_valuations(&RecSpec::of([("X", Term::sum(x(), ax()))]), &u).unwrap();
        assert_eq!(star.rows(), &[vec![2], vec![3]]);
    }

    #[test]
    fn unique_solution_examples() {
        let spec = RecSpec::of([("X", ax())]);
        let v = unique_solution(&spec, &universe(&["a"], 1)).unwrap().unwrap();
        assert_eq!(v.get("X"), Some(&a_loop()));
        let v = unique_solution(&spec, &universe(&["a"], 2)).unwrap().unwrap();
        assert_eq!(v.get("X"), Some(&a_loop()));
        let abx = RecSpec::of([("X", Term::seq(Term::act("a"), Term::seq(Term::act("b"), x())))]);
        assert_eq!(unique_solution(&abx, &universe(&["a", "b"], 1)).unwrap(), None);
        assert!(matches!(
            unique_solution(&RecSpec::of([("X", x())]), &universe(&["a"], 1)),
            Err(AlgebraError::Unguarded(_))
        ));
        assert!(matches!(
            unique_solution(&RecSpec::of([("X", Term::seq(Term::var("P"), x()))]), &universe(&["a"], 1)),
            Err(AlgebraError::OpenSpec(_))
        ));
    }

    #[test]
    fn equation_examples() {
        let u = universe(&["a", "b"], 1);
        let star = RecSpec::of([("X", Term::sum(x(), ax()))]);
        let eq = Equation { lhs: x(), rhs: ax() };
        let Verdict::Fails(witness) = holds(&eq, &star, &u).unwrap() else {
            panic!("X = a.X must fail under X = X + a.X");
        };
        assert!(is_compatible(&witness, &star).unwrap());
        assert_eq!(holds_conditional(&eq, &star, &u).unwrap(), Verdict::Fails(witness));

        let looping = RecSpec::of([("X", ax())]);
        assert!(holds(&eq, &looping, &u).unwrap().holds());
        assert!(holds_conditional(&eq, &looping, &u).unwrap().holds());

        let xy = Equation { lhs: x(), rhs: Term::var("Y") };
        let idle = RecSpec::of([("X", x())]);
        let u1 = universe(&["a"], 1);
        assert!(!holds(&xy, &idle, &u1).unwrap().holds());
        assert!(!holds_conditional(&xy, &idle, &u1).unwrap().holds());
    }

    #[test]
    fn odometer_is_lexicographic() {
        let rows: Vec<_> = Odometer::new(2, 2, 10).unwrap().collect();
        assert_eq!(rows, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(Odometer::new(5, 0, 10).unwrap().count(), 1);
        assert!(Odometer::new(10, 3, 999).is_err());
    }

    #[test]
    fn congruence_examples() {
        let u = universe(&["a", "b"], 1);
        let s = RecSpec::of([("X", ax())]);
        let s2 = RecSpec::of([("X", Term::sum(ax(), ax()))]);
        assert_eq!(congruence_check(&s, &s2, &x(), &u).unwrap(), CongruenceOutcome::ConclusionVerified);
        let bx = RecSpec::of([("X", Term::seq(Term::act("b"), x()))]);
        assert!(matches!(
            congruence_check(&s, &bx, &x(), &u).unwrap(),
            CongruenceOutcome::PremiseFailed { .. }
        ));
        let star = RecSpec::of([("X", Term::sum(x(), ax()))]);
        let star2 = RecSpec::of([("X", Term::sum(ax(), x()))]);
        let u1 = universe(&["a"], 1);
        assert_eq!(
            congruence_check(&star, &star2, &x(), &u1).unwrap(),
            CongruenceOutcome::ConclusionVerified
        );
        assert_eq!(
            congruence_check(&s, &RecSpec::of([("Y", x())]), &x(), &u1).unwrap_err(),
            AlgebraError::VarSetMismatch
        );
    }
}
