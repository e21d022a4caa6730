mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use proptest::prelude::*;
use proptest::sample::select;
use rand::Rng;
use recspec::algebraic::{compatible_valuations, holds, holds_conditional, is_compatible, is_guarded};
use recspec::denotational::{approximate, approximate_by_unfolding, interpret};
use recspec::operational::{graph_of, graph_of_with_limit, EvalError};
use recspec::syntax::{flatten, parse_document, Substitution};
use recspec::{is_bisimilar, Action, Equation, ProcessGraph, RecSpec, Target, Term, Valuation};

const VARS: [&str; 4] = ["P", "X", "Y", "Z"];

fn leaf() -> impl Strategy<Value = Term> {
    prop_oneof![
        Just(Term::Deadlock),
        select(vec!["a", "b"]).prop_map(Term::act),
        select(VARS.to_vec()).prop_map(Term::var),
    ]
}

fn flat_term() -> impl Strategy<Value = Term> {
    leaf().prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Term::sum(l, r)),
            (inner.clone(), inner).prop_map(|(l, r)| Term::seq(l, r)),
        ]
    })
}

fn any_term() -> impl Strategy<Value = Term> {
    leaf().prop_recursive(4, 40, 3, |inner| {
        prop_oneof![
            3 => (inner.clone(), inner.clone()).prop_map(|(l, r)| Term::sum(l, r)),
            3 => (inner.clone(), inner.clone()).prop_map(|(l, r)| Term::seq(l, r)),
            1 => (select(vec!["X", "Y"]), inner.clone(), inner).prop_map(|(x, s, t)| {
                Term::rec(x, RecSpec::of([("X", s), ("Y", t)]))
            }),
        ]
    })
}

fn graph(max_states: usize) -> impl Strategy<Value = ProcessGraph> {
    (1..=max_states)
        .prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..2usize, 0..=n), 0..=3 * n)))
        .prop_map(|(n, edges)| {
            let labels = labels();
            let edges = edges.into_iter().map(|(s, a, t)| {
                let t = if t == n { Target::Tick } else { Target::State(t) };
                (s, labels[a].clone(), t)
            });
            ProcessGraph::new(n, 0, edges).unwrap()
        })
}

fn valuation() -> impl Strategy<Value = Valuation> {
    prop::collection::vec(graph(3), 4).prop_map(|gs| {
        VARS.iter().zip(gs).map(|(x, g)| (x.to_string(), g)).collect()
    })
}

fn substitution() -> impl Strategy<Value = Substitution> {
    prop::collection::btree_map(select(VARS.to_vec()).prop_map(String::from), any_term(), 0..3)
}

/// Exploration bound for randomly generated recursion.
const LIMIT: usize = 500;

/// Skips inputs whose configuration space is infinite.
fn finite<T>(r: Result<T, EvalError>) -> Result<T, TestCaseError> {
    match r {
        Err(EvalError::StateLimit(_) | EvalError::Divergent(_)) => Err(TestCaseError::reject("infinite")),
        r => Ok(r.expect("evaluation succeeds")),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn format_parse_round_trip(t in any_term()) {
        let doc = parse_document(&format!("actions a, b;\nterm t = {t};")).unwrap();
        prop_assert!(doc.terms["t"].alpha_eq(&t), "{} reparsed as {}", t, doc.terms["t"]);
    }

    #[test]
    fn free_vars_of_substitution(t in any_term(), sigma in substitution()) {
        let fv = t.free_vars();
        let mut expected: BTreeSet<String> = fv.iter().filter(|x| !sigma.contains_key(*x)).cloned().collect();
        for (x, u) in &sigma {
            if fv.contains(x) {
                expected.extend(u.free_vars());
            }
        }
        prop_assert_eq!(t.substitute(&sigma).free_vars(), expected);
    }

    #[test]
    fn substitution_composes(t in any_term(), sigma in substitution(), tau in substitution()) {
        let mut composed: Substitution = sigma.iter().map(|(x, u)| (x.clone(), u.substitute(&tau))).collect();
        for (y, u) in &tau {
            composed.entry(y.clone()).or_insert_with(|| u.clone());
        }
        let stepwise = t.substitute(&sigma).substitute(&tau);
        prop_assert!(stepwise.alpha_eq(&t.substitute(&composed)));
    }

    #[test]
    fn flatten_is_recursion_free(t in any_term()) {
        let (head, spec) = flatten(&t);
        prop_assert!(head.is_recursion_free());
        prop_assert!(spec.is_recursion_free());
    }

    #[test]
    fn flatten_preserves_semantics(t in any_term(), rho in valuation()) {
        let direct = finite(graph_of_with_limit(&t, None, &rho, LIMIT))?;
        let (head, spec) = flatten(&t);
        let flat = finite(graph_of_with_limit(&head, Some(&spec), &rho, LIMIT))?;
        prop_assert!(is_bisimilar(&direct, &flat));
    }

    #[test]
    fn bisimilarity_is_an_equivalence(g in graph(3), h in graph(3)) {
        let variants = [g.clone(), g.minimize(), g.sum(&g), h.clone(), h.sum(&h)];
        for p in &variants {
            prop_assert!(is_bisimilar(p, p));
            for q in &variants {
                prop_assert_eq!(is_bisimilar(p, q), is_bisimilar(q, p));
                for r in &variants {
                    if is_bisimilar(p, q) && is_bisimilar(q, r) {
                        prop_assert!(is_bisimilar(p, r));
                    }
                }
            }
        }
    }

    #[test]
    fn combinators_are_congruences(g in graph(3), h in graph(3)) {
        let g2 = g.sum(&g).minimize();
        let h2 = h.sum(&ProcessGraph::deadlock());
        prop_assert!(is_bisimilar(&g.sum(&h), &g2.sum(&h2)));
        prop_assert!(is_bisimilar(&g.seq(&h), &g2.seq(&h2)));
    }

    #[test]
    fn minimize_properties(g in graph(4)) {
        let m = g.minimize();
        prop_assert!(is_bisimilar(&g, &m));
        prop_assert_eq!(&m.minimize(), &m);
        prop_assert!(m.num_states() <= g.num_states());
        let edges: RawLts = g.transitions().iter()
            .map(|t| (t.source, usize::from(t.action.name() == "b"), t.target))
            .collect();
        let oracle = naive_bisimulation(g.num_states(), &edges);
        let classes = (0..g.num_states())
            .filter(|&s| (0..s).all(|t| !oracle[s][t]))
            .count();
        prop_assert_eq!(m.num_states(), classes);
    }

    #[test]
    fn truncations_determine_finite_graphs(g in graph(3), h in graph(3)) {
        let depth = g.num_states().max(h.num_states()) + 1;
        let agree = (0..=depth).all(|k| is_bisimilar(&g.truncate(k), &h.truncate(k)));
        prop_assert_eq!(agree, is_bisimilar(&g, &h));
        prop_assert_eq!(g.truncate(0), ProcessGraph::deadlock());
    }

    #[test]
    fn kleene_star_defining_equation(g in graph(3)) {
        let a = Action::new("a");
        let star = ProcessGraph::kleene_star(a.clone(), &g);
        let unfolded = ProcessGraph::action(a).seq(&star).sum(&g);
        prop_assert!(is_bisimilar(&star, &unfolded));
    }

    #[test]
    fn operational_agrees_with_combinators(t in flat_term(), rho in valuation()) {
        let op = graph_of(&t, None, &rho).unwrap();
        prop_assert!(is_bisimilar(&op, &interpret(&t, &rho).unwrap()));
        prop_assert_eq!(op, graph_of(&t, None, &rho).unwrap());
    }

    #[test]
    fn substitution_lemma(t in flat_term(), u in flat_term(), rho in valuation()) {
        let sigma = Substitution::from([("X".to_string(), u.clone())]);
        let left = graph_of(&t.substitute(&sigma), None, &rho).unwrap();
        let mut extended = rho.clone();
        extended.insert("X", graph_of(&u, None, &rho).unwrap());
        let right = graph_of(&t, None, &extended).unwrap();
        prop_assert!(is_bisimilar(&left, &right));
    }

    #[test]
    fn valuation_encoding(rho in valuation()) {
        for x in VARS {
            let g = graph_of(&Term::var(x), None, &rho).unwrap();
            prop_assert!(is_bisimilar(&g, rho.get(x).unwrap()));
        }
    }

    #[test]
    fn unfolding_law(seed in any::<u64>(), rho in valuation()) {
        let mut rng = rng(seed);
        let n = rng.gen_range(1..=3);
        let spec = spec(&mut rng, n, &["a", "b"], &["P"]);
        let folded = finite(graph_of_with_limit(&Term::rec("X", spec.clone()), None, &rho, LIMIT))?;
        let once = spec.get("X").unwrap().substitute(&spec.unfolding());
        let unfolded = finite(graph_of_with_limit(&once, None, &rho, LIMIT))?;
        prop_assert!(is_bisimilar(&folded, &unfolded), "{{{}}}", spec);
    }

    #[test]
    fn approximation_by_unfolding_agrees(seed in any::<u64>(), rho in valuation(), n in 0..4usize) {
        let mut rng = rng(seed);
        let k = rng.gen_range(1..=3);
        let spec = spec(&mut rng, k, &["a", "b"], &["P"]);
        let fast = approximate(&Term::var("X"), &spec, n, &rho).unwrap();
        let slow = approximate_by_unfolding(&Term::var("X"), &spec, n, &rho).unwrap();
        prop_assert!(is_bisimilar(&fast, &slow));
    }

    #[test]
    fn contraction_for_guarded_specs(seed in any::<u64>(), n in 0..8usize) {
        let mut rng = rng(seed);
        let k = rng.gen_range(1..=3);
        let spec = guarded_spec(&mut rng, k, &["a", "b"]);
        let rho = Valuation::new();
        let op = graph_of(&Term::rec("X", spec.clone()), None, &rho).unwrap();
        let approx = approximate(&Term::var("X"), &spec, n, &rho).unwrap();
        prop_assert!(is_bisimilar(&approx.truncate(n), &op.truncate(n)));
    }

    #[test]
    fn guarded_specs_converge_within_variable_count(seed in any::<u64>(), n in 0..5usize) {
        // guardedness through chains of head variables needs |V_S| rounds per step
        let mut rng = rng(seed);
        let k = rng.gen_range(1..=3);
        let spec = spec(&mut rng, k, &["a", "b"], &[]);
        prop_assume!(is_guarded(&spec).is_guarded());
        let rho = Valuation::new();
        let op = finite(graph_of_with_limit(&Term::rec("X", spec.clone()), None, &rho, LIMIT))?;
        let approx = approximate(&Term::var("X"), &spec, n * spec.len(), &rho).unwrap();
        prop_assert!(is_bisimilar(&approx.truncate(n), &op.truncate(n)), "{{{}}}", spec);
    }

    #[test]
    fn approximations_are_monotone(seed in any::<u64>(), k in 0..4usize, dn in 0..3usize, dm in 0..3usize) {
        let mut rng = rng(seed);
        let vars = rng.gen_range(1..=3);
        let spec = guarded_spec(&mut rng, vars, &["a", "b"]);
        let rho = Valuation::new();
        let (n, m) = (k + dn, k + dn + dm);
        let x = Term::var("X");
        let an = approximate(&x, &spec, n, &rho).unwrap();
        let am = approximate(&x, &spec, m, &rho).unwrap();
        prop_assert!(is_bisimilar(&an.truncate(k), &am.truncate(k)));
        prop_assert_eq!(approximate(&x, &spec, 0, &rho).unwrap(), ProcessGraph::deadlock());
    }

    #[test]
    fn operational_solution_is_compatible(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let k = rng.gen_range(1..=3);
        let spec = guarded_spec(&mut rng, k, &["a", "b"]);
        let rho: Valuation = spec
            .vars()
            .into_iter()
            .map(|y| {
                let g = graph_of(&Term::rec(y.clone(), spec.clone()), None, &Valuation::new()).unwrap();
                (y, g)
            })
            .collect();
        prop_assert!(is_compatible(&rho, &spec).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn search_matches_brute_force(seed in any::<u64>(), wide in any::<bool>()) {
        let (actions, u): (&[&str], _) = if wide {
            (&["a", "b"], universe(&["a", "b"], 1))
        } else {
            (&["a"], universe(&["a"], 1))
        };
        let mut rng = rng(seed);
        let k = rng.gen_range(1..=if wide { 2 } else { 3 });
        let free: &[&str] = if rng.gen_bool(0.3) { &["P"] } else { &[] };
        let spec = spec(&mut rng, k, actions, free);
        let solutions = compatible_valuations(&spec, &u).unwrap();
        let vars = solutions.vars().to_vec();
        let mut expected = Vec::new();
        let mut row = vec![0; vars.len()];
        'all: loop {
            let rho: Valuation = vars.iter().zip(&row).map(|(x, &j)| (x.clone(), u.member(j).clone())).collect();
            if is_compatible(&rho, &spec).unwrap() {
                expected.push(row.clone());
            }
            for i in (0..row.len()).rev() {
                row[i] += 1;
                if row[i] < u.len() {
                    continue 'all;
                }
                row[i] = 0;
            }
            break;
        }
        prop_assert_eq!(solutions.rows(), &expected[..], "{{{}}}", spec);
    }

    #[test]
    fn holds_agrees_with_conditional_form(seed in any::<u64>()) {
        let u = universe(&["a", "b"], 1);
        let mut rng = rng(seed);
        let k = rng.gen_range(1..=2);
        let spec = spec(&mut rng, k, &["a", "b"], &[]);
        let vars = ["X", "Y", "Q"];
        let eq = Equation {
            lhs: term(&mut rng, 2, &["a", "b"], &vars[..k]),
            rhs: term(&mut rng, 2, &["a", "b"], &vars),
        };
        prop_assert_eq!(holds(&eq, &spec, &u).unwrap(), holds_conditional(&eq, &spec, &u).unwrap());
    }
}

#[test]
fn kleene_solutions_in_two_state_universe() {
    let u = universe(&["a"], 2);
    let spec = RecSpec::of([("X", Term::sum(Term::var("X"), Term::seq(Term::act("a"), Term::var("X"))))]);
    let solutions: BTreeMap<usize, ()> = compatible_valuations(&spec, &u)
        .unwrap()
        .rows()
        .iter()
        .map(|r| (r[0], ()))
        .collect();
    for (i, p) in u.members().iter().enumerate() {
        let star = ProcessGraph::kleene_star(Action::new("a"), p);
        assert_eq!(is_bisimilar(p, &star), solutions.contains_key(&i), "member {p}");
    }
}
