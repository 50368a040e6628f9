//! First-order terms over a finite constructor signature and an interned
//! variable namespace.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// List constructor functor.
pub const CONS: &str = ".";
/// Empty list constant.
pub const NIL: &str = "[]";

/// A logic variable. Identity is the interned integer; names live in a
/// separate [`VarNames`] table and only matter for printing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

impl Var {
    pub fn id(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_G{}", self.0)
    }
}

/// Printing names for variables. Variables without an entry print as `_G<id>`.
pub type VarNames = BTreeMap<Var, Arc<str>>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    /// Integer constant; counts as one symbol.
    Int(i64),
    /// Compound term or constant (arity 0).
    App(Arc<str>, Vec<Term>),
}

impl Term {
    pub fn var(v: Var) -> Term {
        Term::Var(v)
    }

    pub fn constant(name: &str) -> Term {
        Term::App(Arc::from(name), Vec::new())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(Arc::from(name), args)
    }

    pub fn nil() -> Term {
        Term::constant(NIL)
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::App(Arc::from(CONS), vec![head, tail])
    }

    /// Builds `[e1,...,en|tail]`.
    pub fn list_with_tail(items: impl IntoIterator<Item = Term>, tail: Term) -> Term {
        let items: Vec<Term> = items.into_iter().collect();
        items
            .into_iter()
            .rev()
            .fold(tail, |acc, item| Term::cons(item, acc))
    }

    pub fn list(items: impl IntoIterator<Item = Term>) -> Term {
        Term::list_with_tail(items, Term::nil())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Int(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Constants are integers and 0-ary applications.
    pub fn is_constant(&self) -> bool {
        match self {
            Term::Int(_) => true,
            Term::App(_, args) => args.is_empty(),
            Term::Var(_) => false,
        }
    }

    pub fn occurs(&self, v: Var) -> bool {
        match self {
            Term::Var(w) => *w == v,
            Term::Int(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    /// Visits variable occurrences left to right, with repetition.
    pub fn for_each_var(&self, f: &mut impl FnMut(Var)) {
        match self {
            Term::Var(v) => f(*v),
            Term::Int(_) => {}
            Term::App(_, args) => {
                for a in args {
                    a.for_each_var(f);
                }
            }
        }
    }

    /// Distinct variables in first-occurrence order.
    pub fn vars(&self) -> Vec<Var> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.for_each_var(&mut |v| {
            if seen.insert(v) {
                out.push(v);
            }
        });
        out
    }

    pub fn var_set(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.for_each_var(&mut |v| {
            out.insert(v);
        });
        out
    }

    /// Number of occurrences of `v`.
    pub fn occurrences(&self, v: Var) -> usize {
        let mut n = 0;
        self.for_each_var(&mut |w| {
            if w == v {
                n += 1;
            }
        });
        n
    }

    pub fn max_var(&self) -> Option<Var> {
        let mut best: Option<Var> = None;
        self.for_each_var(&mut |v| {
            if best.map_or(true, |b| v > b) {
                best = Some(v);
            }
        });
        best
    }

    /// Nesting depth; variables and constants have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::App(_, args) if !args.is_empty() => {
                1 + args.iter().map(Term::depth).max().unwrap_or(0)
            }
            _ => 1,
        }
    }

    /// Renames variables through `map`, leaving unmapped variables alone.
    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Term {
        match self {
            Term::Var(v) => Term::Var(*map.get(v).unwrap_or(v)),
            Term::Int(n) => Term::Int(*n),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.rename(map)).collect())
            }
        }
    }

    pub fn display<'a>(&'a self, names: &'a VarNames) -> TermDisplay<'a> {
        TermDisplay { term: self, names }
    }
}

/// Number of function and constant symbols in `t`; variables count 0.
pub fn tsize(t: &Term) -> u64 {
    match t {
        Term::Var(_) => 0,
        Term::Int(_) => 1,
        Term::App(_, args) => 1 + args.iter().map(tsize).sum::<u64>(),
    }
}

/// True iff no variable occurs twice across the whole sequence.
pub fn is_linear<'a>(ts: impl IntoIterator<Item = &'a Term>) -> bool {
    let mut seen = BTreeSet::new();
    let mut linear = true;
    for t in ts {
        t.for_each_var(&mut |v| {
            if !seen.insert(v) {
                linear = false;
            }
        });
        if !linear {
            return false;
        }
    }
    linear
}

pub fn vars_of<'a>(ts: impl IntoIterator<Item = &'a Term>) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    for t in ts {
        t.for_each_var(&mut |v| {
            out.insert(v);
        });
    }
    out
}

/// Distinct variables of a term sequence in first-occurrence order.
pub fn ordered_vars<'a>(ts: impl IntoIterator<Item = &'a Term>) -> Vec<Var> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in ts {
        t.for_each_var(&mut |v| {
            if seen.insert(v) {
                out.push(v);
            }
        });
    }
    out
}

/// Source of fresh variables. Every call to [`VarGen::fresh`] returns a
/// variable never returned before by this generator.
#[derive(Debug, Clone)]
pub struct VarGen {
    next: u32,
}

impl VarGen {
    pub fn starting_at(next: u32) -> Self {
        VarGen { next }
    }

    /// A generator whose variables avoid every variable in `avoid`.
    pub fn avoiding<'a>(avoid: impl IntoIterator<Item = &'a Var>) -> Self {
        let next = avoid.into_iter().map(|v| v.0 + 1).max().unwrap_or(0);
        VarGen { next }
    }

    pub fn fresh(&mut self) -> Var {
        let v = Var(self.next);
        self.next = self
            .next
            .checked_add(1)
            .expect("variable namespace exhausted");
        v
    }

    /// Ensures future variables are strictly above `v`.
    pub fn bump_past(&mut self, v: Var) {
        if self.next <= v.0 {
            self.next = v.0 + 1;
        }
    }

    pub fn peek(&self) -> u32 {
        self.next
    }
}

/// Map from the variables of `ts` (first-occurrence order) to `V0, V1, ...`.
pub fn canonical_map<'a>(ts: impl IntoIterator<Item = &'a Term>) -> BTreeMap<Var, Var> {
    ordered_vars(ts)
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, Var(i as u32)))
        .collect()
}

/// Canonical renaming of a term sequence.
pub fn canonicalize(ts: &[Term]) -> Vec<Term> {
    let map = canonical_map(ts);
    ts.iter().map(|t| t.rename(&map)).collect()
}

/// Variance: each sequence is an instance of the other.
pub fn variant_eq(a: &[Term], b: &[Term]) -> bool {
    a.len() == b.len() && canonicalize(a) == canonicalize(b)
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    names: &'a VarNames,
}

fn write_var(f: &mut fmt::Formatter<'_>, v: Var, names: &VarNames) -> fmt::Result {
    match names.get(&v) {
        Some(n) => f.write_str(n),
        None => write!(f, "{v}"),
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, names: &VarNames) -> fmt::Result {
    match t {
        Term::Var(v) => write_var(f, *v, names),
        Term::Int(n) => write!(f, "{n}"),
        Term::App(name, args) if &**name == CONS && args.len() == 2 => {
            f.write_str("[")?;
            write_term(f, &args[0], names)?;
            let mut tail = &args[1];
            loop {
                match tail {
                    Term::App(n, a) if &**n == CONS && a.len() == 2 => {
                        f.write_str(",")?;
                        write_term(f, &a[0], names)?;
                        tail = &a[1];
                    }
                    Term::App(n, a) if &**n == NIL && a.is_empty() => break,
                    other => {
                        f.write_str("|")?;
                        write_term(f, other, names)?;
                        break;
                    }
                }
            }
            f.write_str("]")
        }
        Term::App(name, args) => {
            f.write_str(name)?;
            if !args.is_empty() {
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write_term(f, a, names)?;
                }
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self.term, self.names)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, &VarNames::new())
    }
}
