//! Exact search for compatible valuations into a universe.
//!
//! Variables are assigned member indices one at a time, most constrained
//! first. After every assignment the equations are propagated:
//!
//! * a spec variable whose body is fully assigned and does not mention it is
//!   determined by looking the body up in the universe;
//! * an assigned spec variable with a fully assigned body is checked
//!   outright;
//! * otherwise the initial moves its body can already be seen to have are
//!   matched against the initial moves of the assigned member, which may
//!   narrow the domain of a variable reached by a single step.
//!
//! Pruning only discards partial assignments that have no compatible
//! completion, so the search is exhaustive.

use std::collections::{BTreeMap, BTreeSet};

use super::AlgebraError;
use crate::denotational::interpret_with;
use crate::lts::{ProcessGraph, Succ, Universe};
use crate::syntax::{Action, RecSpec, Term};

type Assignment = Vec<Option<usize>>;
/// `None` stands for the whole universe.
type Domains = Vec<Option<Vec<usize>>>;

pub(crate) struct Search<'a> {
    universe: &'a Universe,
    vars: Vec<String>,
    index: BTreeMap<String, usize>,
    bodies: Vec<Option<&'a Term>>,
    body_vars: Vec<Vec<usize>>,
    budget: u64,
    nodes: u64,
    rows: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug)]
enum Piece<'t> {
    Member(usize),
    Term(&'t Term),
}

enum HeadCheck {
    Dead,
    Narrowed,
    Unchanged,
}

impl<'a> Search<'a> {
    /// Prepares a search over `V_S ∪ fv(S) ∪ extra`.
    pub(crate) fn new(
        spec: &'a RecSpec,
        universe: &'a Universe,
        extra: &BTreeSet<String>,
        budget: u64,
    ) -> Result<Search<'a>, AlgebraError> {
        if let Some((x, _)) = spec.iter().find(|(_, body)| !body.is_recursion_free()) {
            return Err(AlgebraError::NestedRecursion(x.clone()));
        }
        let mut all = spec.vars();
        all.extend(spec.free_vars());
        all.extend(extra.iter().cloned());
        let vars: Vec<String> = all.into_iter().collect();
        let index: BTreeMap<String, usize> = vars.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let bodies: Vec<Option<&Term>> = vars.iter().map(|v| spec.get(v)).collect();
        let body_vars = bodies
            .iter()
            .map(|b| match b {
                Some(t) => t.free_vars().iter().map(|v| index[v]).collect(),
                None => Vec::new(),
            })
            .collect();
        Ok(Search {
            universe,
            vars,
            index,
            bodies,
            body_vars,
            budget,
            nodes: 0,
            rows: Vec::new(),
        })
    }

    pub(crate) fn vars(&self) -> &[String] {
        &self.vars
    }

    /// All compatible assignments, in lexicographic order of member indices
    /// over the sorted variables.
    pub(crate) fn run(mut self) -> Result<Vec<Vec<usize>>, AlgebraError> {
        let n = self.vars.len();
        self.explore(vec![None; n], vec![None; n])?;
        self.rows.sort();
        Ok(self.rows)
    }

    fn explore(&mut self, mut assign: Assignment, mut domains: Domains) -> Result<(), AlgebraError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(AlgebraError::SearchBudgetExceeded { budget: self.budget });
        }
        if !self.propagate(&mut assign, &mut domains)? {
            return Ok(());
        }
        let size = |d: &Option<Vec<usize>>| d.as_ref().map_or(self.universe.len(), Vec::len);
        let choice = (0..self.vars.len())
            .filter(|&v| assign[v].is_none())
            .min_by_key(|&v| (size(&domains[v]), v));
        let Some(v) = choice else {
            self.rows.push(assign.into_iter().map(|a| a.expect("complete")).collect());
            return Ok(());
        };
        let candidates: Vec<usize> = match &domains[v] {
            Some(d) => d.clone(),
            None => (0..self.universe.len()).collect(),
        };
        for j in candidates {
            let mut a = assign.clone();
            let mut d = domains.clone();
            a[v] = Some(j);
            d[v] = Some(vec![j]);
            self.explore(a, d)?;
        }
        Ok(())
    }

    /// Returns `false` if the partial assignment has no compatible completion.
    fn propagate(&self, assign: &mut Assignment, domains: &mut Domains) -> Result<bool, AlgebraError> {
        loop {
            let mut changed = false;
            for y in 0..self.vars.len() {
                let Some(body) = self.bodies[y] else { continue };
                let complete = self.body_vars[y].iter().all(|&v| assign[v].is_some());
                match assign[y] {
                    None if complete && !self.body_vars[y].contains(&y) => {
                        let Some(j) = self.evaluate(body, assign)? else {
                            return Ok(false);
                        };
                        if !allows(&domains[y], j) {
                            return Ok(false);
                        }
                        assign[y] = Some(j);
                        domains[y] = Some(vec![j]);
                        changed = true;
                    }
                    None => {}
                    Some(p) if complete => {
                        if self.evaluate(body, assign)? != Some(p) {
                            return Ok(false);
                        }
                    }
                    Some(p) => match self.head_check(body, p, assign, domains)? {
                        HeadCheck::Dead => return Ok(false),
                        HeadCheck::Narrowed => changed = true,
                        HeadCheck::Unchanged => {}
                    },
                }
            }
            if domains.iter().any(|d| d.as_ref().is_some_and(Vec::is_empty)) {
                return Ok(false);
            }
            if !changed {
                return Ok(true);
            }
        }
    }

    fn lookup<'s>(&'s self, assign: &'s Assignment) -> impl Fn(&str) -> Option<&'a ProcessGraph> + 's {
        move |x: &str| {
            let j = assign[*self.index.get(x)?]?;
            Some(self.universe.member(j))
        }
    }

    /// The member bisimilar to the graph of a fully assigned term.
    fn evaluate(&self, t: &Term, assign: &Assignment) -> Result<Option<usize>, AlgebraError> {
        let g = interpret_with(t, &self.lookup(assign))?;
        Ok(self.universe.find(&g))
    }

    /// Initial moves of `t` visible under a partial assignment, with the
    /// residual as a sequence of pieces (empty for termination). The flag
    /// is `false` if an unassigned variable in head position may add more.
    fn moves<'t>(&self, t: &'t Term, assign: &Assignment) -> (Vec<(Action, Vec<Piece<'t>>)>, bool) {
        match t {
            Term::Act(a) => (vec![(a.clone(), Vec::new())], true),
            Term::Deadlock => (Vec::new(), true),
            Term::Var(x) => match assign[self.index[x]] {
                Some(j) => {
                    let moves = self
                        .universe
                        .moves(j)
                        .iter()
                        .map(|(a, s)| match s {
                            Succ::Tick => (a.clone(), Vec::new()),
                            Succ::Member(m) => (a.clone(), vec![Piece::Member(*m)]),
                        })
                        .collect();
                    (moves, true)
                }
                None => (Vec::new(), false),
            },
            Term::Sum(l, r) => {
                let (mut lm, lc) = self.moves(l, assign);
                let (rm, rc) = self.moves(r, assign);
                lm.extend(rm);
                (lm, lc && rc)
            }
            Term::Seq(l, r) => {
                let (lm, lc) = self.moves(l, assign);
                let moves = lm
                    .into_iter()
                    .map(|(a, mut res)| {
                        res.push(Piece::Term(r));
                        (a, res)
                    })
                    .collect();
                (moves, lc)
            }
            Term::Rec(..) => (Vec::new(), false),
        }
    }

    fn head_check(
        &self,
        body: &Term,
        p: usize,
        assign: &Assignment,
        domains: &mut Domains,
    ) -> Result<HeadCheck, AlgebraError> {
        let (moves, complete) = self.moves(body, assign);
        let target = self.universe.moves(p);
        let successors = |a: &Action| -> Vec<usize> {
            target
                .iter()
                .filter_map(|(b, s)| match s {
                    Succ::Member(m) if b == a => Some(*m),
                    _ => None,
                })
                .collect()
        };
        let mut outcome = HeadCheck::Unchanged;
        for (a, residual) in &moves {
            if residual.is_empty() {
                if !target.contains(&(a.clone(), Succ::Tick)) {
                    return Ok(HeadCheck::Dead);
                }
                continue;
            }
            let residual: Vec<Piece> = residual
                .iter()
                .map(|piece| match piece {
                    Piece::Term(Term::Var(x)) => match assign[self.index[x]] {
                        Some(j) => Piece::Member(j),
                        None => *piece,
                    },
                    _ => *piece,
                })
                .collect();
            match residual.as_slice() {
                [Piece::Member(m)] => {
                    if !target.contains(&(a.clone(), Succ::Member(*m))) {
                        return Ok(HeadCheck::Dead);
                    }
                }
                [Piece::Term(Term::Var(x))] => {
                    let v = self.index[x];
                    let allowed: Vec<usize> = successors(a).into_iter().filter(|&m| allows(&domains[v], m)).collect();
                    if domains[v].as_ref() != Some(&allowed) {
                        outcome = HeadCheck::Narrowed;
                        domains[v] = Some(allowed);
                    }
                    if domains[v].as_ref().is_some_and(Vec::is_empty) {
                        return Ok(HeadCheck::Dead);
                    }
                }
                pieces => {
                    let assigned = pieces.iter().all(|piece| match piece {
                        Piece::Member(_) => true,
                        Piece::Term(t) => t.free_vars().iter().all(|x| assign[self.index[x]].is_some()),
                    });
                    if assigned {
                        let g = self.compose(pieces, assign)?;
                        match self.universe.find(&g) {
                            Some(m) if target.contains(&(a.clone(), Succ::Member(m))) => {}
                            _ => return Ok(HeadCheck::Dead),
                        }
                    } else if successors(a).is_empty() {
                        return Ok(HeadCheck::Dead);
                    }
                }
            }
        }
        if complete {
            let visible: BTreeSet<(&Action, bool)> = moves.iter().map(|(a, r)| (a, r.is_empty())).collect();
            let required: BTreeSet<(&Action, bool)> =
                target.iter().map(|(a, s)| (a, *s == Succ::Tick)).collect();
            if visible != required {
                return Ok(HeadCheck::Dead);
            }
        }
        Ok(outcome)
    }

    fn compose(&self, pieces: &[Piece], assign: &Assignment) -> Result<ProcessGraph, AlgebraError> {
        let mut g: Option<ProcessGraph> = None;
        for piece in pieces {
            let h = match piece {
                Piece::Member(m) => self.universe.member(*m).clone(),
                Piece::Term(t) => interpret_with(t, &self.lookup(assign))?,
            };
            g = Some(match g {
                None => h,
                Some(g) => g.seq(&h),
            });
        }
        Ok(g.expect("residuals are nonempty"))
    }
}

fn allows(domain: &Option<Vec<usize>>, j: usize) -> bool {
    domain.as_ref().is_none_or(|d| d.binary_search(&j).is_ok())
}
