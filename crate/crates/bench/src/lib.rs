//! Deterministic workloads for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recspec::{Action, ProcessGraph, RecSpec, Target, Term};

/// A random graph with `states` states over `{a, b}`, each state having
/// about `fanout` outgoing transitions.
pub fn random_graph(seed: u64, states: usize, fanout: usize) -> ProcessGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let actions = [Action::new("a"), Action::new("b")];
    let mut edges = Vec::new();
    for s in 0..states {
        for _ in 0..fanout {
            let action = actions[rng.gen_range(0..actions.len())].clone();
            let target = if rng.gen_ratio(1, 10) {
                Target::Tick
            } else {
                Target::State(rng.gen_range(0..states))
            };
            edges.push((s, action, target));
        }
    }
    ProcessGraph::new(states, 0, edges).expect("edges are in range")
}

/// A guarded ring `X_i = a.X_{i+1} + b.X_{2i mod n}` on `n` variables.
pub fn ring_spec(n: usize) -> RecSpec {
    let var = |i: usize| Term::var(format!("X{i}"));
    RecSpec::new((0..n).map(|i| {
        let body = Term::sum(
            Term::seq(Term::act("a"), var((i + 1) % n)),
            Term::seq(Term::act("b"), var(2 * i % n)),
        );
        (format!("X{i}"), body)
    }))
}

/// `<X | X = X + a.X>`: the unguarded star of the examples.
pub fn star_spec() -> RecSpec {
    let x = Term::var("X");
    RecSpec::of([("X", Term::sum(x.clone(), Term::seq(Term::act("a"), x)))])
}
