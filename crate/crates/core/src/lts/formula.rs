use std::fmt;

use super::{ProcessGraph, Target};
use crate::syntax::Action;

/// Hennessy-Milner logic with a termination predicate; used to explain why
/// two graphs are not bisimilar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    True,
    /// Holds only in the termination state.
    Tick,
    Not(Box<Formula>),
    And(Vec<Formula>),
    Diamond(Action, Box<Formula>),
}

impl Formula {
    pub fn negate(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn diamond(a: Action, f: Formula) -> Formula {
        Formula::Diamond(a, Box::new(f))
    }

    pub fn and(mut conjuncts: Vec<Formula>) -> Formula {
        match conjuncts.len() {
            0 => Formula::True,
            1 => conjuncts.pop().unwrap(),
            _ => Formula::And(conjuncts),
        }
    }

    pub fn holds_at(&self, g: &ProcessGraph, at: Target) -> bool {
        match self {
            Formula::True => true,
            Formula::Tick => at == Target::Tick,
            Formula::Not(f) => !f.holds_at(g, at),
            Formula::And(fs) => fs.iter().all(|f| f.holds_at(g, at)),
            Formula::Diamond(a, f) => match at {
                Target::Tick => false,
                Target::State(s) => g
                    .outgoing(s)
                    .iter()
                    .any(|t| &t.action == a && f.holds_at(g, t.target)),
            },
        }
    }

    /// Whether the formula holds in the initial state of `g`.
    pub fn holds(&self, g: &ProcessGraph) -> bool {
        self.holds_at(g, Target::State(g.initial()))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("tt"),
            Formula::Tick => f.write_str("√"),
            Formula::Not(inner) => write!(f, "¬{inner}"),
            Formula::And(fs) => {
                f.write_str("(")?;
                for (i, c) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ∧ ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
            Formula::Diamond(a, inner) => write!(f, "<{a}>{inner}"),
        }
    }
}
