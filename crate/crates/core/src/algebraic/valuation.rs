use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::lts::ProcessGraph;

/// An assignment of process graphs to variables. Values are stored
/// minimized, as representatives of their bisimilarity classes.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Valuation(BTreeMap<String, ProcessGraph>);

impl Valuation {
    pub fn new() -> Valuation {
        Valuation::default()
    }

    pub fn insert(&mut self, var: impl Into<String>, g: ProcessGraph) {
        self.0.insert(var.into(), g.minimize());
    }

    /// Builder-style [`insert`](Self::insert).
    pub fn with(mut self, var: impl Into<String>, g: ProcessGraph) -> Valuation {
        self.insert(var, g);
        self
    }

    pub fn get(&self, var: &str) -> Option<&ProcessGraph> {
        self.0.get(var)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.0.contains_key(var)
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.0.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ProcessGraph)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The valuation restricted to the given variables.
    pub fn restricted<'a>(&self, vars: impl IntoIterator<Item = &'a String>) -> Valuation {
        Valuation(
            vars.into_iter()
                .filter_map(|v| self.0.get(v).map(|g| (v.clone(), g.clone())))
                .collect(),
        )
    }
}

impl FromIterator<(String, ProcessGraph)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (String, ProcessGraph)>>(iter: I) -> Self {
        let mut v = Valuation::new();
        for (k, g) in iter {
            v.insert(k, g);
        }
        v
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, g)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{x} = {g}")?;
        }
        Ok(())
    }
}
