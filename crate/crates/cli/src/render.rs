//! Output formats for process graphs and valuations.

use std::fmt::Write;

use recspec::{ProcessGraph, Target, Valuation};

use crate::config::Format;

pub fn graph(g: &ProcessGraph, format: Format) -> String {
    match format {
        Format::Text => format!(
            "# states: {}\n# process: {}\n{}",
            g.num_states(),
            expression(g),
            g.to_canonical_text()
        ),
        Format::Graph => g.to_canonical_text(),
        Format::Dot => g.to_dot(),
    }
}

/// `X = a*b, Y = delta`, one readable expression per variable.
pub fn valuation(rho: &Valuation) -> String {
    rho.iter()
        .map(|(x, g)| format!("{x} = {}", expression(g)))
        .collect::<Vec<_>>()
        .join(", ")
}

// Binding strength of a rendered expression.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Sum,
    Star,
    Seq,
    Atom,
}

/// A readable expression for a minimized graph. Self-loops become a prefix
/// iteration `a*P`; graphs with longer cycles fall back to a recursion.
pub fn expression(g: &ProcessGraph) -> String {
    if has_long_cycle(g) {
        return g.to_term().to_string();
    }
    state(g, g.initial()).0
}

fn state(g: &ProcessGraph, s: usize) -> (String, Level) {
    let mut loops = Vec::new();
    let mut exits = Vec::new();
    for t in g.outgoing(s) {
        match t.target {
            Target::State(u) if u == s => loops.push(t.action.to_string()),
            Target::Tick => exits.push((t.action.to_string(), Level::Atom)),
            Target::State(u) => {
                let (rest, level) = state(g, u);
                exits.push((format!("{}.{}", t.action, wrap(rest, level, Level::Seq)), Level::Seq));
            }
        }
    }
    let body = match exits.len() {
        0 => ("delta".to_string(), Level::Atom),
        1 => exits.pop().expect("one exit"),
        _ => {
            let parts: Vec<String> = exits.into_iter().map(|(e, _)| e).collect();
            (parts.join(" + "), Level::Sum)
        }
    };
    if loops.is_empty() {
        return body;
    }
    let iterated = if loops.len() == 1 {
        loops.pop().expect("one loop")
    } else {
        format!("({})", loops.join(" + "))
    };
    let (rest, level) = body;
    (format!("{iterated}*{}", wrap(rest, level, Level::Atom)), Level::Star)
}

fn wrap(e: String, level: Level, min: Level) -> String {
    if level < min {
        format!("({e})")
    } else {
        e
    }
}

/// Whether some cycle passes through two or more states.
fn has_long_cycle(g: &ProcessGraph) -> bool {
    // colour DFS over non-loop edges: 0 new, 1 on stack, 2 done
    fn visit(g: &ProcessGraph, s: usize, colour: &mut [u8]) -> bool {
        colour[s] = 1;
        for t in g.outgoing(s) {
            let Target::State(u) = t.target else { continue };
            if u == s {
                continue;
            }
            if colour[u] == 1 || (colour[u] == 0 && visit(g, u, colour)) {
                return true;
            }
        }
        colour[s] = 2;
        false
    }
    let mut colour = vec![0; g.num_states()];
    (0..g.num_states()).any(|s| colour[s] == 0 && visit(g, s, &mut colour))
}

/// Appends `  X = { ... }` lines with the exact graphs.
pub fn valuation_graphs(out: &mut String, rho: &Valuation) {
    for (x, g) in rho.iter() {
        let _ = writeln!(out, "  {x} = {g}");
    }
}
