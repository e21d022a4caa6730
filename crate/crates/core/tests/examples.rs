//! Worked examples across the modules, checked through the public API.

mod common;

use common::*;
use recspec::algebraic::{holds, holds_conditional, is_compatible, Verdict};
use recspec::operational::graph_of;
use recspec::syntax::{flatten, parse_document};
use recspec::{bisimilar, is_bisimilar, Action, Bisimilarity, Equation, ProcessGraph, RecSpec, Target, Term, Valuation};

fn act(a: &str) -> ProcessGraph {
    ProcessGraph::action(Action::new(a))
}

fn parse_term(src: &str) -> Term {
    let doc = parse_document(&format!("actions a, b, c;\nterm t = {src};")).unwrap();
    doc.terms["t"].clone()
}

#[test]
fn flatten_nested_recursion() {
    let t = parse_term("<X | X = a.<Y | Y = b.Y,> + a.X,>");
    let (head, spec) = flatten(&t);
    assert_eq!(head, Term::var("X"));
    let expected = RecSpec::of([
        ("X", Term::sum(Term::seq(Term::act("a"), Term::var("Y")), Term::seq(Term::act("a"), Term::var("X")))),
        ("Y", Term::seq(Term::act("b"), Term::var("Y"))),
    ]);
    assert_eq!(spec, expected);
    let rho = Valuation::new();
    let nested = graph_of(&t, None, &rho).unwrap();
    let flat = graph_of(&head, Some(&spec), &rho).unwrap();
    assert!(is_bisimilar(&nested, &flat));
}

#[test]
fn branching_time_is_observed() {
    let (a, b, c) = (act("a"), act("b"), act("c"));
    let late = a.seq(&b.sum(&c));
    let early = a.seq(&b).sum(&a.seq(&c));
    let Bisimilarity::Distinguished(f) = bisimilar(&late, &early) else {
        panic!("a.(b + c) and a.b + a.c must differ");
    };
    assert!(f.holds(&late) && !f.holds(&early));

    // the naive oracle on the disjoint union agrees
    let labels = |x: &Action| ["a", "b", "c"].iter().position(|n| *n == x.name()).unwrap();
    let mut edges: RawLts = Vec::new();
    for (offset, g) in [(0, &late), (late.num_states(), &early)] {
        for t in g.transitions() {
            let target = match t.target {
                Target::Tick => Target::Tick,
                Target::State(s) => Target::State(s + offset),
            };
            edges.push((t.source + offset, labels(&t.action), target));
        }
    }
    let oracle = naive_bisimulation(late.num_states() + early.num_states(), &edges);
    assert!(!oracle[0][late.num_states()]);
}

#[test]
fn idempotence_and_deadlock() {
    let a = act("a");
    assert!(is_bisimilar(&a.sum(&a), &a));
    assert_eq!(a.seq(&act("b")).to_canonical_text(), "0 a 1\n1 b TICK\n");
    assert!(is_bisimilar(&ProcessGraph::deadlock().seq(&a), &ProcessGraph::deadlock()));
}

#[test]
fn minimize_and_truncate() {
    let a = Action::new("a");
    let cycle = ProcessGraph::new(
        3,
        0,
        [
            (0, a.clone(), Target::State(1)),
            (1, a.clone(), Target::State(2)),
            (2, a.clone(), Target::State(0)),
        ],
    )
    .unwrap();
    let a_loop = ProcessGraph::action_loop(a.clone());
    assert_eq!(cycle.minimize(), a_loop);
    assert_eq!(act("a").minimize(), act("a"));

    let aa_delta = act("a").seq(&act("a")).seq(&ProcessGraph::deadlock());
    assert!(is_bisimilar(&a_loop.truncate(2), &aa_delta));
    assert!(is_bisimilar(&act("a").truncate(5), &act("a")));
}

#[test]
fn kleene_star_examples() {
    let a = Action::new("a");
    let star_delta = ProcessGraph::kleene_star(a.clone(), &ProcessGraph::deadlock());
    assert!(is_bisimilar(&star_delta, &ProcessGraph::action_loop(a.clone())));
    let star_b = ProcessGraph::kleene_star(a.clone(), &act("b")).minimize();
    assert_eq!(star_b.num_states(), 1);
    assert_eq!(star_b.to_canonical_text(), "0 a 0\n0 b TICK\n");
    let unfolded = act("a").seq(&star_b).sum(&act("b"));
    assert!(is_bisimilar(&star_b, &unfolded));
}

#[test]
fn unfold_fails_under_star_with_named_witness() {
    let u = universe(&["a", "b"], 1);
    let x = Term::var("X");
    let ax = Term::seq(Term::act("a"), x.clone());
    let star = RecSpec::of([("X", Term::sum(x.clone(), ax.clone()))]);
    let eq = Equation { lhs: x, rhs: ax };

    // a*b is a compatible valuation that refutes X = a.X ...
    let a_star_b = ProcessGraph::kleene_star(Action::new("a"), &act("b"));
    let rho = Valuation::new().with("X", a_star_b.clone());
    assert!(is_compatible(&rho, &star).unwrap());
    let lhs = graph_of(&eq.lhs, None, &rho).unwrap();
    let rhs = graph_of(&eq.rhs, None, &rho).unwrap();
    let Bisimilarity::Distinguished(f) = bisimilar(&lhs, &rhs) else {
        panic!("a*b must refute X = a.X");
    };
    assert!(f.holds(&lhs) != f.holds(&rhs), "{f} must separate the sides");

    // ... but the first refuting member in canonical order is a*a
    let Verdict::Fails(witness) = holds(&eq, &star, &u).unwrap() else {
        panic!("X = a.X must fail");
    };
    let a_star_a = ProcessGraph::kleene_star(Action::new("a"), &act("a")).minimize();
    assert_eq!(witness.get("X"), Some(&a_star_a));
    assert_eq!(holds_conditional(&eq, &star, &u).unwrap(), Verdict::Fails(witness));
}

#[test]
fn defining_equation_holds_both_ways() {
    let u = universe(&["a"], 1);
    let x = Term::var("X");
    let body = Term::sum(x.clone(), Term::seq(Term::act("a"), x.clone()));
    let star = RecSpec::of([("X", body.clone())]);
    let eq = Equation { lhs: x, rhs: body };
    assert!(holds(&eq, &star, &u).unwrap().holds());
    assert!(holds_conditional(&eq, &star, &u).unwrap().holds());
}

#[test]
fn independent_variables_separate() {
    let u = universe(&["a"], 1);
    let idle = RecSpec::of([("X", Term::var("X"))]);
    let eq = Equation { lhs: Term::var("X"), rhs: Term::var("Y") };
    let Verdict::Fails(witness) = holds(&eq, &idle, &u).unwrap() else {
        panic!("X = Y must fail");
    };
    assert_eq!(witness.get("X"), Some(&ProcessGraph::deadlock()));
    assert_eq!(witness.get("Y"), Some(&act("a")));
}

#[test]
fn corpus_specs_parse() {
    let doc = corpus();
    assert_eq!(doc.specs.len(), 11);
    assert!(doc.equations.contains_key("distrib"));
    assert_eq!(doc.alphabet.len(), 2);
}
