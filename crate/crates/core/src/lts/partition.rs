//! Coarsest strong bisimulation by signature refinement.
//!
//! Nodes are the ordinary states `0..states` plus one extra node standing for
//! the termination state. The initial partition separates termination from
//! everything else; each round splits blocks by the set of
//! `(label, successor block)` pairs until the partition is stable.

use std::collections::HashMap;

use super::formula::Formula;
use super::Target;
use crate::syntax::Action;

/// A labelled edge of a raw transition system. Labels are plain indices so
/// the refinement is independent of how actions are represented.
pub type Edge = (usize, usize, Target);

#[derive(Clone, Debug)]
pub struct Partition {
    states: usize,
    /// Block of every node; index `states` is the termination node.
    blocks: Vec<usize>,
    count: usize,
    /// Block assignment after every round, starting with the initial split.
    history: Vec<Vec<usize>>,
}

impl Partition {
    /// Block of an ordinary state.
    pub fn block(&self, state: usize) -> usize {
        self.blocks[state]
    }

    pub fn block_of(&self, target: Target) -> usize {
        match target {
            Target::Tick => self.blocks[self.states],
            Target::State(s) => self.blocks[s],
        }
    }

    /// Number of blocks, the termination block included.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn same_block(&self, s: usize, t: usize) -> bool {
        self.blocks[s] == self.blocks[t]
    }

    /// Blocks of the ordinary states, in state order.
    pub fn state_blocks(&self) -> &[usize] {
        &self.blocks[..self.states]
    }

    /// Number of refinement rounds that changed the partition.
    pub fn rounds(&self) -> usize {
        self.history.len() - 1
    }

    fn node(&self, t: Target) -> usize {
        match t {
            Target::Tick => self.states,
            Target::State(s) => s,
        }
    }

    /// First round whose partition separates the two nodes.
    fn split_level(&self, s: usize, t: usize) -> Option<usize> {
        self.history.iter().position(|level| level[s] != level[t])
    }
}

fn successors(states: usize, edges: &[Edge]) -> Vec<Vec<(usize, usize)>> {
    let mut succ = vec![Vec::new(); states + 1];
    for &(src, label, target) in edges {
        let node = match target {
            Target::Tick => states,
            Target::State(t) => t,
        };
        succ[src].push((label, node));
    }
    succ
}

/// Computes the coarsest strong bisimulation of a raw transition system.
///
/// Every edge source and state target must be below `states`.
pub fn coarsest_partition(states: usize, edges: &[Edge]) -> Partition {
    let succ = successors(states, edges);
    let n = states + 1;
    let mut blocks = vec![0; n];
    blocks[states] = if states > 0 { 1 } else { 0 };
    let mut count = if states > 0 { 2 } else { 1 };
    let mut history = vec![blocks.clone()];

    let mut ids: HashMap<(usize, Vec<(usize, usize)>), usize> = HashMap::new();
    loop {
        ids.clear();
        let mut next = Vec::with_capacity(n);
        for node in 0..n {
            let mut sig: Vec<(usize, usize)> =
                succ[node].iter().map(|&(l, t)| (l, blocks[t])).collect();
            sig.sort_unstable();
            sig.dedup();
            let fresh = ids.len();
            next.push(*ids.entry((blocks[node], sig)).or_insert(fresh));
        }
        if ids.len() == count {
            break;
        }
        count = ids.len();
        blocks = next;
        history.push(blocks.clone());
    }
    Partition {
        states,
        blocks,
        count,
        history,
    }
}

/// Builds a Hennessy-Milner formula that holds at `s` and fails at `t`, or
/// `None` when the two nodes are bisimilar.
///
/// `labels` maps edge labels back to actions.
pub fn distinguishing_formula(
    partition: &Partition,
    edges: &[Edge],
    labels: &[Action],
    s: Target,
    t: Target,
) -> Option<Formula> {
    let succ = successors(partition.states, edges);
    let (s, t) = (partition.node(s), partition.node(t));
    partition.split_level(s, t)?;
    Some(distinguish(partition, &succ, labels, s, t))
}

fn distinguish(
    p: &Partition,
    succ: &[Vec<(usize, usize)>],
    labels: &[Action],
    s: usize,
    t: usize,
) -> Formula {
    let level = p
        .split_level(s, t)
        .expect("only separated nodes are distinguished");
    if level == 0 {
        // one of the two is the termination node
        return if s == p.states {
            Formula::Tick
        } else {
            Formula::negate(Formula::Tick)
        };
    }
    let prev = &p.history[level - 1];
    // A move of s whose (label, block) t cannot match at the previous level.
    let unmatched = |from: usize, other: usize| {
        succ[from].iter().copied().find(|&(l, x)| {
            !succ[other]
                .iter()
                .any(|&(l2, y)| l2 == l && prev[y] == prev[x])
        })
    };
    if let Some((label, s2)) = unmatched(s, t) {
        let conjuncts = succ[t]
            .iter()
            .filter(|&&(l, _)| l == label)
            .map(|&(_, t2)| distinguish(p, succ, labels, s2, t2))
            .collect::<Vec<_>>();
        Formula::diamond(labels[label].clone(), Formula::and(conjuncts))
    } else {
        Formula::negate(distinguish(p, succ, labels, t, s))
    }
}
