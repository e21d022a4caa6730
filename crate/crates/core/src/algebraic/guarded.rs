use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::syntax::{RecSpec, Term};

/// Outcome of the guardedness analysis. An unguarded specification comes
/// with a cycle `X1 ⇒ X2 ⇒ ... ⇒ X1` of head-position dependencies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuardednessReport {
    cycle: Option<Vec<String>>,
}

impl GuardednessReport {
    pub fn is_guarded(&self) -> bool {
        self.cycle.is_none()
    }

    /// The witness cycle; first and last entries coincide.
    pub fn cycle(&self) -> Option<&[String]> {
        self.cycle.as_deref()
    }
}

impl fmt::Display for GuardednessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.cycle {
            None => f.write_str("guarded"),
            Some(cycle) => write!(f, "unguarded: cycle {}", cycle.join(" ⇒ ")),
        }
    }
}

/// Variables occurring in head position: those that can make the first
/// step of `t`.
pub fn head_vars(t: &Term) -> BTreeSet<String> {
    match t {
        Term::Var(x) => BTreeSet::from([x.clone()]),
        Term::Act(_) | Term::Deadlock => BTreeSet::new(),
        Term::Sum(l, r) => {
            let mut h = head_vars(l);
            h.extend(head_vars(r));
            h
        }
        Term::Seq(l, _) => head_vars(l),
        Term::Rec(x, spec) => {
            // heads of <x|S> are the free heads reachable from x inside S
            let mut seen = BTreeSet::from([x.clone()]);
            let mut todo = vec![x.clone()];
            let mut out = BTreeSet::new();
            while let Some(y) = todo.pop() {
                for z in head_vars(spec.get(&y).expect("binder is bound")) {
                    if !spec.contains(&z) {
                        out.insert(z);
                    } else if seen.insert(z.clone()) {
                        todo.push(z);
                    }
                }
            }
            out
        }
    }
}

/// The head dependency relation `Y ⇒ Z` iff `Z` is a spec variable in head
/// position of `S_Y`; the specification is guarded iff it is acyclic.
pub fn is_guarded(spec: &RecSpec) -> GuardednessReport {
    let deps: BTreeMap<&String, Vec<String>> = spec
        .iter()
        .map(|(y, body)| {
            let heads = head_vars(body).into_iter().filter(|z| spec.contains(z)).collect();
            (y, heads)
        })
        .collect();

    // depth-first search with colours; the first back edge closes a cycle
    #[derive(Clone, Copy, PartialEq)]
    enum Colour {
        White,
        Grey,
        Black,
    }
    let mut colour: BTreeMap<&String, Colour> = deps.keys().map(|k| (*k, Colour::White)).collect();
    let mut path: Vec<&String> = Vec::new();

    fn visit<'a>(
        y: &'a String,
        deps: &'a BTreeMap<&'a String, Vec<String>>,
        colour: &mut BTreeMap<&'a String, Colour>,
        path: &mut Vec<&'a String>,
    ) -> Option<Vec<String>> {
        colour.insert(y, Colour::Grey);
        path.push(y);
        for z in &deps[y] {
            let (z, _) = deps.get_key_value(z).expect("dependency is a spec variable");
            match colour[z] {
                Colour::Grey => {
                    let start = path.iter().position(|p| p == z).unwrap();
                    let mut cycle: Vec<String> = path[start..].iter().map(|s| s.to_string()).collect();
                    cycle.push(z.to_string());
                    return Some(cycle);
                }
                Colour::White => {
                    if let Some(c) = visit(z, deps, colour, path) {
                        return Some(c);
                    }
                }
                Colour::Black => {}
            }
        }
        path.pop();
        colour.insert(y, Colour::Black);
        None
    }

    for y in deps.keys() {
        if colour[*y] == Colour::White {
            if let Some(cycle) = visit(y, &deps, &mut colour, &mut path) {
                return GuardednessReport { cycle: Some(cycle) };
            }
        }
    }
    GuardednessReport { cycle: None }
}
