//! Command-line grammar and the validated run configuration.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use recspec::algebraic::DEFAULT_SEARCH_BUDGET;
use recspec::lts::DEFAULT_UNIVERSE_BUDGET;
use recspec::operational::DEFAULT_STATE_LIMIT;
use recspec::syntax::{is_action_name, is_variable_name};
use recspec::Action;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "recspec",
    version,
    about = "Semantics of recursion in basic process algebra",
    long_about = "Semantics of recursion in basic process algebra.\n\n\
        Exit status: 0 on success, 1 for unreadable or malformed input, \
        2 for semantic errors, 3 when a property fails."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

/// Flags shared by all subcommands; each command reads the ones it needs.
#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Universe alphabet, comma separated [default: a]
    #[arg(long, global = true, value_delimiter = ',', value_name = "LIST")]
    pub actions: Vec<String>,

    /// Maximal number of states of a universe member
    #[arg(long, global = true, default_value_t = 1, value_name = "N")]
    pub max_states: usize,

    /// Maximal number of states explored by the operational semantics
    #[arg(long, global = true, default_value_t = DEFAULT_STATE_LIMIT, value_name = "N")]
    pub limit: usize,

    /// Rendering of process graphs
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Deepest approximation compared by `compare`
    #[arg(long, global = true, default_value_t = 6, value_name = "N")]
    pub depth: usize,

    /// Cap on the raw graphs enumerated to build a universe
    #[arg(long, global = true, default_value_t = DEFAULT_UNIVERSE_BUDGET, value_name = "N")]
    pub budget: u128,

    /// Cap on the nodes visited when searching for solutions
    #[arg(long, global = true, default_value_t = DEFAULT_SEARCH_BUDGET, value_name = "N")]
    pub search_budget: u64,

    /// Specification that binds the free variables of the terms
    #[arg(long, global = true, value_name = "SPEC")]
    pub spec: Option<String>,

    /// Binds a free variable to the graph of a closed term
    #[arg(long = "bind", global = true, value_name = "X=TERM")]
    pub bindings: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Print the operational process graph of a term
    Lts { document: PathBuf, term: String },
    /// Decide whether a specification is guarded
    Guarded { document: PathBuf, spec: String },
    /// Decide strong bisimilarity of two terms
    Bisim {
        document: PathBuf,
        left: String,
        right: String,
    },
    /// List the solutions of a specification within the universe
    Solve { document: PathBuf, spec: String },
    /// Check an equation over the solutions of a specification
    Check {
        document: PathBuf,
        equation: String,
        spec: String,
        /// Quantify over all valuations, with the spec as a premise
        #[arg(long)]
        conditional: bool,
    },
    /// Print the n-th approximation of a term
    Approx {
        document: PathBuf,
        term: String,
        n: usize,
    },
    /// Compare operational and denotational graphs up to --depth
    Compare { document: PathBuf, term: String },
    /// List the universe given by --actions and --max-states
    Universe,
    /// Check the `#!` expectations of a document
    Corpus { document: PathBuf },
}

impl Command {
    /// The document the command reads, if any.
    pub fn document(&self) -> Option<&Path> {
        match self {
            Command::Lts { document, .. }
            | Command::Guarded { document, .. }
            | Command::Bisim { document, .. }
            | Command::Solve { document, .. }
            | Command::Check { document, .. }
            | Command::Approx { document, .. }
            | Command::Compare { document, .. }
            | Command::Corpus { document } => Some(document),
            Command::Universe => None,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// Canonical transition lines with a `#` header
    Text,
    /// Graphviz
    Dot,
    /// Bare canonical transition lines
    Graph,
}

/// A validated invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub alphabet: BTreeSet<Action>,
    pub max_states: usize,
    pub universe_budget: u128,
    pub search_budget: u64,
    pub limit: usize,
    pub format: Format,
    pub depth: usize,
    pub spec: Option<String>,
    pub bindings: Vec<(String, String)>,
}

impl RunConfig {
    pub fn input(&self) -> Option<&Path> {
        self.command.document()
    }
}

impl TryFrom<Cli> for RunConfig {
    type Error = CliError;

    fn try_from(cli: Cli) -> Result<RunConfig, CliError> {
        let o = cli.options;
        let mut alphabet = BTreeSet::new();
        for name in &o.actions {
            let name = name.trim();
            if !is_action_name(name) {
                return Err(CliError::Usage(format!("`{name}` is not an action name")));
            }
            alphabet.insert(Action::new(name));
        }
        if alphabet.is_empty() {
            alphabet.insert(Action::new("a"));
        }
        for (flag, value) in [("--max-states", o.max_states), ("--limit", o.limit)] {
            if value == 0 {
                return Err(CliError::Usage(format!("{flag} must be positive")));
            }
        }
        let bindings = o
            .bindings
            .iter()
            .map(|b| match b.split_once('=') {
                Some((x, t)) if is_variable_name(x.trim()) => Ok((x.trim().to_string(), t.trim().to_string())),
                _ => Err(CliError::Usage(format!("--bind expects X=TERM, got `{b}`"))),
            })
            .collect::<Result<_, _>>()?;
        Ok(RunConfig {
            command: cli.command,
            alphabet,
            max_states: o.max_states,
            universe_budget: o.budget,
            search_budget: o.search_budget,
            limit: o.limit,
            format: o.format,
            depth: o.depth,
            spec: o.spec,
            bindings,
        })
    }
}
