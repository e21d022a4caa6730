//! Generators and a naive bisimulation oracle shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use recspec::lts::{enumerate_universe, DEFAULT_UNIVERSE_BUDGET};
use recspec::syntax::{parse_document, Document};
use recspec::{Action, ProcessGraph, RecSpec, Target, Term, Universe};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn universe(actions: &[&str], states: usize) -> Universe {
    let alphabet: BTreeSet<Action> = actions.iter().map(|a| Action::new(*a)).collect();
    enumerate_universe(&alphabet, states, DEFAULT_UNIVERSE_BUDGET).expect("small universe")
}

pub fn corpus() -> Document {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/recursion.pa");
    let text = std::fs::read_to_string(&path).expect("corpus file");
    parse_document(&text).expect("corpus parses")
}

const SPEC_VARS: [&str; 3] = ["X", "Y", "Z"];

/// A recursion-free term over the given actions and variables.
pub fn term(rng: &mut ChaCha8Rng, depth: usize, actions: &[&str], vars: &[&str]) -> Term {
    if depth == 0 || rng.gen_bool(0.3) {
        let roll = rng.gen_range(0..6);
        return match roll {
            0 => Term::Deadlock,
            1 | 2 if !vars.is_empty() => Term::var(*vars.choose(rng).unwrap()),
            _ => Term::act(actions.choose(rng).unwrap()),
        };
    }
    let l = term(rng, depth - 1, actions, vars);
    let r = term(rng, depth - 1, actions, vars);
    if rng.gen_bool(0.5) {
        Term::sum(l, r)
    } else {
        Term::seq(l, r)
    }
}

/// A flat specification with `n` variables; bodies may be unguarded and may
/// mention the extra free variables.
pub fn spec(rng: &mut ChaCha8Rng, n: usize, actions: &[&str], free: &[&str]) -> RecSpec {
    let bound = &SPEC_VARS[..n];
    let vars: Vec<&str> = bound.iter().chain(free).copied().collect();
    RecSpec::new(
        bound
            .iter()
            .map(|x| (x.to_string(), term(rng, 3, actions, &vars))),
    )
}

/// A closed specification in which every variable occurrence is in tail
/// position after at least one action.
pub fn guarded_spec(rng: &mut ChaCha8Rng, n: usize, actions: &[&str]) -> RecSpec {
    let vars = &SPEC_VARS[..n];
    let act = |rng: &mut ChaCha8Rng| Term::act(actions.choose(rng).unwrap());
    let bindings = vars.iter().map(|x| {
        let summands = rng.gen_range(1..=3);
        let body = Term::sum_of((0..summands).map(|_| {
            let y = Term::var(*vars.choose(rng).unwrap());
            match rng.gen_range(0..6) {
                0 => act(rng),
                1 | 2 => Term::seq(act(rng), y),
                3 => Term::seq(act(rng), Term::seq(act(rng), y)),
                4 => {
                    let z = Term::var(*vars.choose(rng).unwrap());
                    let inner = Term::seq(act(rng), z);
                    Term::seq(act(rng), Term::sum(y, inner))
                }
                _ => Term::seq(act(rng), act(rng)),
            }
        }));
        (x.to_string(), body)
    });
    RecSpec::new(bindings.collect::<Vec<_>>())
}

fn count_nodes(t: &Term) -> usize {
    match t {
        Term::Sum(l, r) | Term::Seq(l, r) => 1 + count_nodes(l) + count_nodes(r),
        _ => 1,
    }
}

/// Applies one `+`-idempotence, commutativity or associativity step at a
/// random position of a recursion-free term.
pub fn rewrite(rng: &mut ChaCha8Rng, t: &Term) -> Term {
    let target = rng.gen_range(0..count_nodes(t));
    let rule = rng.gen_range(0..3);
    rewrite_at(t, &mut { target }, rule)
}

fn rewrite_at(t: &Term, target: &mut usize, rule: u8) -> Term {
    if *target == 0 {
        *target = usize::MAX;
        return match (rule, t) {
            (1, Term::Sum(l, r)) => Term::Sum(r.clone(), l.clone()),
            (2, Term::Sum(l, r)) => match &**l {
                Term::Sum(l1, l2) => Term::sum((**l1).clone(), Term::sum((**l2).clone(), (**r).clone())),
                _ => match &**r {
                    Term::Sum(r1, r2) => Term::sum(Term::sum((**l).clone(), (**r1).clone()), (**r2).clone()),
                    _ => Term::Sum(r.clone(), l.clone()),
                },
            },
            _ => Term::sum(t.clone(), t.clone()),
        };
    }
    *target = target.wrapping_sub(1);
    match t {
        Term::Sum(l, r) => {
            let l = rewrite_at(l, target, rule);
            Term::sum(l, rewrite_at(r, target, rule))
        }
        Term::Seq(l, r) => {
            let l = rewrite_at(l, target, rule);
            Term::seq(l, rewrite_at(r, target, rule))
        }
        _ => t.clone(),
    }
}

/// A raw labelled transition system over `states` ordinary states and
/// one termination node, as a list of `(source, label, target)`.
pub type RawLts = Vec<(usize, usize, Target)>;

/// Greatest bisimulation by naive iteration over all pairs of nodes; node
/// `states` is termination.
pub fn naive_bisimulation(states: usize, edges: &RawLts) -> Vec<Vec<bool>> {
    let n = states + 1;
    let node = |t: Target| match t {
        Target::Tick => states,
        Target::State(s) => s,
    };
    let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &(s, a, t) in edges {
        out[s].push((a, node(t)));
    }
    let mut rel = vec![vec![true; n]; n];
    for s in 0..n {
        rel[s][states] = s == states;
        rel[states][s] = s == states;
    }
    loop {
        let mut changed = false;
        for s in 0..n {
            for t in 0..n {
                if !rel[s][t] {
                    continue;
                }
                let simulates = |x: usize, y: usize, rel: &Vec<Vec<bool>>| {
                    out[x].iter().all(|&(a, x2)| {
                        out[y].iter().any(|&(b, y2)| a == b && rel[x2][y2])
                    })
                };
                if !simulates(s, t, &rel) || !simulates(t, s, &rel) {
                    rel[s][t] = false;
                    rel[t][s] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return rel;
        }
    }
}

pub fn labels() -> [Action; 2] {
    [Action::new("a"), Action::new("b")]
}

/// The graph rooted at `root` of a raw system.
pub fn rooted(states: usize, edges: &RawLts, root: usize) -> ProcessGraph {
    let labels = labels();
    ProcessGraph::new(
        states,
        root,
        edges.iter().map(|&(s, a, t)| (s, labels[a].clone(), t)),
    )
    .expect("in range")
}

/// A random raw system with exactly `states` ordinary states.
pub fn random_lts(rng: &mut ChaCha8Rng, states: usize, density: f64) -> RawLts {
    let mut edges = Vec::new();
    for s in 0..states {
        for a in 0..2 {
            if rng.gen_bool(density / 2.0) {
                edges.push((s, a, Target::Tick));
            }
            for t in 0..states {
                if rng.gen_bool(density / states as f64) {
                    edges.push((s, a, Target::State(t)));
                }
            }
        }
    }
    edges
}

pub fn random_graph(rng: &mut ChaCha8Rng, max_states: usize) -> ProcessGraph {
    let states = rng.gen_range(1..=max_states);
    let edges = random_lts(rng, states, 1.2);
    rooted(states, &edges, 0)
}
