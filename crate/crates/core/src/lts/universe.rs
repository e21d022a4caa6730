use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use super::{coarsest_partition, ProcessGraph, Target};
use crate::syntax::Action;

/// Default cap on the number of raw transition relations
/// [`enumerate_universe`] is willing to visit.
pub const DEFAULT_UNIVERSE_BUDGET: u128 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum UniverseError {
    #[error("a universe needs a nonempty alphabet and at least one state")]
    InvalidBounds,
    #[error("refusing to enumerate {} raw graphs (budget {budget})", count_text(.raw_count))]
    BudgetExceeded { raw_count: Option<u128>, budget: u128 },
}

fn count_text(count: &Option<u128>) -> String {
    match count {
        Some(n) => n.to_string(),
        None => "more than 2^128".to_string(),
    }
}

/// Successor of a universe member's initial move: termination, or another
/// member (universes are closed under taking derivatives).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Succ {
    Tick,
    Member(usize),
}

/// Every process graph with at most `max_states` states over an alphabet,
/// one minimized representative per bisimilarity class.
///
/// Members are ordered by state count, then transition count, then the
/// sorted transition list.
#[derive(Clone, Debug)]
pub struct Universe {
    alphabet: Vec<Action>,
    max_states: usize,
    members: Vec<ProcessGraph>,
    moves: Vec<Vec<(Action, Succ)>>,
    buckets: HashMap<ShapeKey, Vec<usize>>,
}

/// An isomorphism-invariant fingerprint of a minimized graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct ShapeKey {
    states: usize,
    transitions: usize,
    initial: Vec<(Action, bool)>,
    profiles: Vec<Vec<(Action, bool)>>,
}

impl ShapeKey {
    fn of(g: &ProcessGraph) -> ShapeKey {
        let profile = |s: usize| {
            g.outgoing(s)
                .iter()
                .map(|t| (t.action.clone(), t.target == Target::Tick))
                .collect::<Vec<_>>()
        };
        let mut profiles: Vec<_> = (0..g.num_states()).map(profile).collect();
        let initial = profiles[0].clone();
        profiles.sort();
        ShapeKey {
            states: g.num_states(),
            transitions: g.transitions().len(),
            initial,
            profiles,
        }
    }
}

fn order_key(g: &ProcessGraph) -> (usize, usize, &[super::Transition]) {
    (g.num_states(), g.transitions().len(), g.transitions())
}

/// `sum_{k=1}^{max_states} 2^(k * |A| * (k + 1))`: the number of transition
/// relations over `k` states plus termination. `None` on overflow.
pub fn raw_graph_count(alphabet_len: usize, max_states: usize) -> Option<u128> {
    let mut total: u128 = 0;
    for k in 1..=max_states {
        let slots = k.checked_mul(alphabet_len)?.checked_mul(k + 1)?;
        let count = 1u128.checked_shl(u32::try_from(slots).ok()?)?;
        total = total.checked_add(count)?;
    }
    Some(total)
}

/// Enumerates all transition relations with up to `max_states` states,
/// minimizes each and keeps one representative per bisimilarity class.
pub fn enumerate_universe(
    alphabet: &BTreeSet<Action>,
    max_states: usize,
    budget: u128,
) -> Result<Universe, UniverseError> {
    if alphabet.is_empty() || max_states == 0 {
        return Err(UniverseError::InvalidBounds);
    }
    let raw_count = raw_graph_count(alphabet.len(), max_states);
    match raw_count {
        Some(n) if n <= budget => {}
        _ => return Err(UniverseError::BudgetExceeded { raw_count, budget }),
    }
    let alphabet: Vec<Action> = alphabet.iter().cloned().collect();

    let mut candidates: BTreeSet<ProcessGraph> = BTreeSet::new();
    for k in 1..=max_states {
        let mut slots = Vec::new();
        for s in 0..k {
            for a in &alphabet {
                slots.push((s, a, Target::Tick));
                for t in 0..k {
                    slots.push((s, a, Target::State(t)));
                }
            }
        }
        for mask in 0u64..(1u64 << slots.len()) {
            let edges = slots
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &(s, a, t))| (s, a.clone(), t))
                .collect();
            let g = ProcessGraph::normalized(k, 0, edges);
            if g.num_states() < k {
                continue; // has unreachable states; seen with fewer states
            }
            let m = g.minimize();
            if m.num_states() == k {
                candidates.insert(m);
            }
        }
    }

    // Deduplicate by refining the disjoint union of all candidates at once.
    let candidates: Vec<ProcessGraph> = candidates.into_iter().collect();
    let (partition, offsets) = joint_partition(&candidates, &alphabet);
    let mut best: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, g) in candidates.iter().enumerate() {
        let block = partition.block(offsets[i]);
        best.entry(block)
            .and_modify(|j| {
                if order_key(g) < order_key(&candidates[*j]) {
                    *j = i;
                }
            })
            .or_insert(i);
    }
    let mut members: Vec<ProcessGraph> = best.values().map(|&i| candidates[i].clone()).collect();
    members.sort_by(|g, h| order_key(g).cmp(&order_key(h)));

    Ok(Universe::from_members(alphabet, max_states, members))
}

fn joint_partition(graphs: &[ProcessGraph], alphabet: &[Action]) -> (super::Partition, Vec<usize>) {
    let label: HashMap<&Action, usize> = alphabet.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut offsets = Vec::with_capacity(graphs.len());
    let mut edges = Vec::new();
    let mut total = 0;
    for g in graphs {
        offsets.push(total);
        for t in g.transitions() {
            let target = match t.target {
                Target::Tick => Target::Tick,
                Target::State(s) => Target::State(s + total),
            };
            edges.push((t.source + total, label[&t.action], target));
        }
        total += g.num_states();
    }
    (coarsest_partition(total, &edges), offsets)
}

impl Universe {
    fn from_members(alphabet: Vec<Action>, max_states: usize, members: Vec<ProcessGraph>) -> Universe {
        let (partition, offsets) = joint_partition(&members, &alphabet);
        let member_of_block: HashMap<usize, usize> = offsets
            .iter()
            .enumerate()
            .map(|(i, &off)| (partition.block(off), i))
            .collect();
        let moves = members
            .iter()
            .zip(&offsets)
            .map(|(g, &off)| {
                g.outgoing(0)
                    .iter()
                    .map(|t| {
                        let succ = match t.target {
                            Target::Tick => Succ::Tick,
                            Target::State(s) => Succ::Member(
                                *member_of_block
                                    .get(&partition.block(s + off))
                                    .expect("universe is closed under derivatives"),
                            ),
                        };
                        (t.action.clone(), succ)
                    })
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect()
            })
            .collect();
        let mut buckets: HashMap<ShapeKey, Vec<usize>> = HashMap::new();
        for (i, g) in members.iter().enumerate() {
            buckets.entry(ShapeKey::of(g)).or_default().push(i);
        }
        Universe {
            alphabet,
            max_states,
            members,
            moves,
            buckets,
        }
    }

    pub fn alphabet(&self) -> &[Action] {
        &self.alphabet
    }

    pub fn max_states(&self) -> usize {
        self.max_states
    }

    pub fn members(&self) -> &[ProcessGraph] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &ProcessGraph {
        &self.members[i]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Initial moves of member `i`, successors given as member indices.
    pub fn moves(&self, i: usize) -> &[(Action, Succ)] {
        &self.moves[i]
    }

    /// Index of the member bisimilar to `g`, if any.
    pub fn find(&self, g: &ProcessGraph) -> Option<usize> {
        let m = g.minimize();
        if m.num_states() > self.max_states {
            return None;
        }
        self.buckets
            .get(&ShapeKey::of(&m))?
            .iter()
            .copied()
            .find(|&i| super::is_bisimilar(&self.members[i], &m))
    }

    /// Short identifier of member `i`, as used in solution listings.
    pub fn id(&self, i: usize) -> String {
        format!("g{i}")
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.alphabet.iter().map(Action::name).collect();
        writeln!(
            f,
            "universe ({{{}}}, {}): {} members",
            names.join(", "),
            self.max_states,
            self.members.len()
        )?;
        for (i, g) in self.members.iter().enumerate() {
            writeln!(f, "{} = {}", self.id(i), g)?;
        }
        Ok(())
    }
}
