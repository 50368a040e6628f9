//! Substitutions: finite maps from variables to terms with no identity
//! bindings stored.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::term::{Term, Var, VarNames};

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Substitution {
    map: BTreeMap<Var, Term>,
}

impl Substitution {
    /// The empty substitution.
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a substitution from bindings, dropping identity bindings.
    pub fn from_bindings(bindings: impl IntoIterator<Item = (Var, Term)>) -> Self {
        let mut s = Substitution::new();
        for (v, t) in bindings {
            s.insert(v, t);
        }
        s
    }

    /// Inserts `v/t`; an identity binding removes `v` from the domain.
    pub fn insert(&mut self, v: Var, t: Term) {
        if t == Term::Var(v) {
            self.map.remove(&v);
        } else {
            self.map.insert(v, t);
        }
    }

    pub fn get(&self, v: Var) -> Option<&Term> {
        self.map.get(&v)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    pub fn domain(&self) -> BTreeSet<Var> {
        self.map.keys().copied().collect()
    }

    pub fn range_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for t in self.map.values() {
            t.for_each_var(&mut |v| {
                out.insert(v);
            });
        }
        out
    }

    /// Var(θ) = Dom(θ) ∪ Ran(θ).
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.domain();
        out.extend(self.range_vars());
        out
    }

    /// Simultaneous application.
    pub fn apply(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        match t {
            Term::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Int(n) => Term::Int(*n),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
        }
    }

    pub fn apply_all(&self, ts: &[Term]) -> Vec<Term> {
        ts.iter().map(|t| self.apply(t)).collect()
    }

    /// `self` followed by `sigma`: the result maps X to `sigma(self(X))`.
    pub fn compose(&self, sigma: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (v, t) in &self.map {
            out.insert(*v, sigma.apply(t));
        }
        for (v, t) in &sigma.map {
            if !self.map.contains_key(v) {
                out.insert(*v, t.clone());
            }
        }
        out
    }

    /// Restriction to the given variables.
    pub fn restrict(&self, vars: &BTreeSet<Var>) -> Substitution {
        Substitution {
            map: self
                .map
                .iter()
                .filter(|(v, _)| vars.contains(v))
                .map(|(v, t)| (*v, t.clone()))
                .collect(),
        }
    }

    pub fn is_idempotent(&self) -> bool {
        let dom = self.domain();
        self.range_vars().is_disjoint(&dom)
    }

    pub fn display<'a>(&'a self, names: &'a VarNames) -> SubstDisplay<'a> {
        SubstDisplay { sub: self, names }
    }
}

pub struct SubstDisplay<'a> {
    sub: &'a Substitution,
    names: &'a VarNames,
}

impl fmt::Display for SubstDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.sub.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(
                f,
                "{}/{}",
                Term::Var(*v).display(self.names),
                t.display(self.names)
            )?;
        }
        f.write_str("}")
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display(&VarNames::new()).fmt(f)
    }
}
