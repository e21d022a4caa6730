use std::fmt;

use super::{Equation, RecSpec, Term};

// Binding strength: `+` < `.` < atoms.
const SUM: u8 = 0;
const SEQ: u8 = 1;
const ATOM: u8 = 2;

fn level(t: &Term) -> u8 {
    match t {
        Term::Sum(..) => SUM,
        Term::Seq(..) => SEQ,
        _ => ATOM,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, t: &Term, min: u8) -> fmt::Result {
    if level(t) < min {
        f.write_str("(")?;
        write_term(f, t)?;
        f.write_str(")")
    } else {
        write_term(f, t)
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    match t {
        Term::Var(x) => f.write_str(x),
        Term::Act(a) => write!(f, "{a}"),
        Term::Deadlock => f.write_str("delta"),
        // both operators associate to the left
        Term::Sum(l, r) => {
            write_at(f, l, SUM)?;
            f.write_str(" + ")?;
            write_at(f, r, SEQ)
        }
        Term::Seq(l, r) => {
            write_at(f, l, SEQ)?;
            f.write_str(".")?;
            write_at(f, r, ATOM)
        }
        Term::Rec(x, spec) => write!(f, "<{x} | {spec}>"),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self)
    }
}

/// Formats the bindings as `X = t, Y = u`.
impl fmt::Display for RecSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, body)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x} = {body}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}
