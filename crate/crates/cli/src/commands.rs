//! One function per subcommand. Each returns a [`Report`]; nothing here
//! prints or exits.

use std::collections::BTreeSet;
use std::fmt::Write;

use recspec::algebraic::{
    compatible_valuations_with_budget, holds_conditional, holds_with_budget, is_guarded, Verdict,
};
use recspec::denotational::approximate;
use recspec::lts::enumerate_universe;
use recspec::operational::graph_of_with_limit;
use recspec::syntax::{flatten_avoiding, parse_document, parse_term, Document};
use recspec::{bisimilar, is_bisimilar, Action, Bisimilarity, Equation, ProcessGraph, RecSpec, Term, Universe, Valuation};

use crate::config::{Command, RunConfig};
use crate::{render, CliError, Report};

/// Runs every command except `corpus` against a loaded document.
pub fn run(config: &RunConfig, doc: &Document) -> Result<Report, CliError> {
    let names = Names::new(doc, &config.alphabet);
    match &config.command {
        Command::Lts { term, .. } => lts(config, &names, term),
        Command::Guarded { spec, .. } => guarded(&names, spec),
        Command::Bisim { left, right, .. } => bisim(config, &names, left, right),
        Command::Solve { spec, .. } => solve(config, &names, spec),
        Command::Check {
            equation,
            spec,
            conditional,
            ..
        } => check(config, &names, equation, spec, *conditional),
        Command::Approx { term, n, .. } => approx(config, &names, term, *n),
        Command::Compare { term, .. } => compare(config, &names, term),
        Command::Universe => universe(config),
        Command::Corpus { .. } => Err(CliError::Usage("`corpus` cannot be nested".into())),
    }
}

fn lts(config: &RunConfig, names: &Names, name: &str) -> Result<Report, CliError> {
    let g = Context::new(config, names)?.graph(&names.term(name)?)?;
    Ok(Report::success(render::graph(&g, config.format), format!("states {}", g.num_states())))
}

fn guarded(names: &Names, name: &str) -> Result<Report, CliError> {
    let report = is_guarded(&names.spec(name)?);
    let verdict = if report.is_guarded() { "guarded" } else { "unguarded" };
    Ok(Report::success(format!("{report}\n"), verdict))
}

fn bisim(config: &RunConfig, names: &Names, left: &str, right: &str) -> Result<Report, CliError> {
    let cx = Context::new(config, names)?;
    let g = cx.graph(&names.term(left)?)?;
    let h = cx.graph(&names.term(right)?)?;
    Ok(match bisimilar(&g, &h) {
        Bisimilarity::Bisimilar => Report::success("bisimilar\n", "bisimilar"),
        Bisimilarity::Distinguished(f) => {
            Report::fails(format!("not bisimilar: {f} holds for {left} but not for {right}\n"), "distinguished")
        }
    })
}

fn solve(config: &RunConfig, names: &Names, name: &str) -> Result<Report, CliError> {
    let spec = names.spec(name)?;
    let u = universe_of(config)?;
    let set = compatible_valuations_with_budget(&spec, &u, config.search_budget).map_err(semantic)?;
    let plural = if set.len() == 1 { "" } else { "s" };
    let mut out = format!("{} solution{plural} in {}\n", set.len(), universe_name(&u));
    write!(out, "{set}").expect("writing to a string");
    Ok(Report::success(out, format!("solutions {}", set.len())))
}

fn check(config: &RunConfig, names: &Names, eq: &str, spec: &str, conditional: bool) -> Result<Report, CliError> {
    let eq = names.equation(eq)?;
    let spec = names.spec(spec)?;
    let u = universe_of(config)?;
    let verdict = if conditional {
        holds_conditional(&eq, &spec, &u)
    } else {
        holds_with_budget(&eq, &spec, &u, config.search_budget)
    }
    .map_err(semantic)?;
    Ok(match verdict {
        Verdict::Holds => Report::success(format!("HOLDS in {}\n", universe_name(&u)), "holds"),
        Verdict::Fails(rho) => {
            let mut out = format!("FAILS, witness {}\n", render::valuation(&rho));
            render::valuation_graphs(&mut out, &rho);
            Report::fails(out, "fails")
        }
    })
}

fn approx(config: &RunConfig, names: &Names, name: &str, n: usize) -> Result<Report, CliError> {
    let cx = Context::new(config, names)?;
    let (head, spec) = cx.flatten(&names.term(name)?);
    let g = approximate(&head, &spec, n, &cx.valuation).map_err(semantic)?;
    Ok(Report::success(render::graph(&g, config.format), format!("states {}", g.num_states())))
}

fn compare(config: &RunConfig, names: &Names, name: &str) -> Result<Report, CliError> {
    let cx = Context::new(config, names)?;
    let t = names.term(name)?;
    let operational = cx.graph(&t)?;
    let (head, spec) = cx.flatten(&t);
    let mut out = String::new();
    let mut first_difference = None;
    for k in 0..=config.depth {
        let denotational = approximate(&head, &spec, k, &cx.valuation).map_err(semantic)?;
        let (op, den) = (operational.truncate(k), denotational.truncate(k));
        let agree = is_bisimilar(&op, &den);
        let word = if agree { "agree" } else { "differ" };
        writeln!(out, "depth {k}: {word} ({} vs {} states)", op.num_states(), den.num_states()).expect("string");
        if !agree && first_difference.is_none() {
            first_difference = Some(k);
        }
    }
    Ok(match first_difference {
        None => {
            writeln!(out, "operational and denotational graphs agree up to depth {}", config.depth).expect("string");
            Report::success(out, "agree")
        }
        Some(k) => {
            writeln!(out, "operational and denotational graphs first differ at depth {k}").expect("string");
            Report::fails(out, "differ")
        }
    })
}

fn universe(config: &RunConfig) -> Result<Report, CliError> {
    let u = universe_of(config)?;
    Ok(Report::success(u.to_string(), format!("members {}", u.len())))
}

fn universe_of(config: &RunConfig) -> Result<Universe, CliError> {
    enumerate_universe(&config.alphabet, config.max_states, config.universe_budget).map_err(semantic)
}

fn universe_name(u: &Universe) -> String {
    let names: Vec<&str> = u.alphabet().iter().map(Action::name).collect();
    format!("U({{{}}}, {}) of {} members", names.join(", "), u.max_states(), u.len())
}

fn semantic(e: impl std::fmt::Display) -> CliError {
    CliError::Semantic(e.to_string())
}

/// Looks up declared names, falling back to inline syntax.
pub struct Names<'d> {
    doc: &'d Document,
    alphabet: BTreeSet<Action>,
}

impl<'d> Names<'d> {
    pub fn new(doc: &'d Document, extra: &BTreeSet<Action>) -> Names<'d> {
        let alphabet = doc.alphabet.union(extra).cloned().collect();
        Names { doc, alphabet }
    }

    pub fn term(&self, text: &str) -> Result<Term, CliError> {
        if let Some(t) = self.doc.terms.get(text) {
            return Ok(t.clone());
        }
        parse_term(text, &self.alphabet).map_err(|e| self.inline_error("term", text, e))
    }

    pub fn spec(&self, text: &str) -> Result<RecSpec, CliError> {
        if let Some(s) = self.doc.specs.get(text) {
            return Ok(s.clone());
        }
        let body = text.trim().trim_start_matches('{').trim_end_matches('}');
        let doc = self
            .inline_document(&format!("spec inline {{ {body} }};"))
            .map_err(|e| self.inline_error("specification", text, e))?;
        Ok(doc.specs["inline"].clone())
    }

    pub fn equation(&self, text: &str) -> Result<Equation, CliError> {
        if let Some(eq) = self.doc.equations.get(text) {
            return Ok(eq.clone());
        }
        let doc = self
            .inline_document(&format!("eq inline: {text};"))
            .map_err(|e| self.inline_error("equation", text, e))?;
        Ok(doc.equations["inline"].clone())
    }

    fn inline_document(&self, item: &str) -> Result<Document, recspec::syntax::ParseError> {
        let actions: Vec<&str> = self.alphabet.iter().map(Action::name).collect();
        parse_document(&format!("actions {};\n{item}", actions.join(", ")))
    }

    /// An unknown bare name is a semantic error; anything else that fails
    /// to parse is a syntax error.
    fn inline_error(&self, what: &str, text: &str, e: recspec::syntax::ParseError) -> CliError {
        let bare = !text.is_empty() && text.chars().all(|c| c.is_alphanumeric() || c == '_');
        if bare {
            CliError::Semantic(format!("no {what} named `{text}`"))
        } else {
            CliError::Parse(format!("inline {what} `{text}`: {}", e.kind))
        }
    }
}

/// The specification from `--spec` and the valuation from `--bind`.
struct Context<'c> {
    config: &'c RunConfig,
    spec: Option<RecSpec>,
    valuation: Valuation,
}

impl<'c> Context<'c> {
    fn new(config: &'c RunConfig, names: &Names) -> Result<Context<'c>, CliError> {
        let spec = config.spec.as_deref().map(|s| names.spec(s)).transpose()?;
        let mut valuation = Valuation::new();
        for (x, text) in &config.bindings {
            let t = names.term(text)?;
            let g = graph_of_with_limit(&t, None, &Valuation::new(), config.limit).map_err(semantic)?;
            valuation.insert(x.clone(), g);
        }
        Ok(Context {
            config,
            spec,
            valuation,
        })
    }

    fn graph(&self, t: &Term) -> Result<ProcessGraph, CliError> {
        graph_of_with_limit(t, self.spec.as_ref(), &self.valuation, self.config.limit).map_err(semantic)
    }

    /// `t` as a recursion-free head over the `--spec` bindings plus those
    /// of its own binders.
    fn flatten(&self, t: &Term) -> (Term, RecSpec) {
        let outer = self.spec.clone().unwrap_or_default();
        let mut avoid: BTreeSet<String> = outer.vars();
        avoid.extend(outer.free_vars());
        avoid.extend(self.valuation.vars());
        match flatten_avoiding(t, &avoid) {
            (head, Some(inner)) => (head, outer.merged(&inner)),
            (head, None) => (head, outer),
        }
    }
}
