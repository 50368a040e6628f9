//! Moded programs: predicates with a single In/Out mode, atoms, clauses,
//! queries, and the builtin base.

mod builtin;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::subst::Substitution;
use crate::term::{ordered_vars, vars_of, Term, Var, VarGen, VarNames};

pub use builtin::{builtin_mode, evaluate_builtin, is_builtin, BuiltinStatus, BUILTINS};
pub use parse::{parse_program, parse_query, ParseError, ParseErrorKind, ProgramError};

/// Predicate symbol: name and arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pred {
    pub name: Arc<str>,
    pub arity: usize,
}

impl Pred {
    pub fn new(name: &str, arity: usize) -> Self {
        Pred {
            name: Arc::from(name),
            arity,
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeFlag {
    In,
    Out,
}

/// One flag per argument position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mode(pub Vec<ModeFlag>);

impl Mode {
    pub fn all_in(arity: usize) -> Self {
        Mode(vec![ModeFlag::In; arity])
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn is_input(&self, pos: usize) -> bool {
        self.0[pos] == ModeFlag::In
    }

    pub fn input_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, f)| **f == ModeFlag::In)
            .map(|(i, _)| i)
    }

    pub fn output_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, f)| **f == ModeFlag::Out)
            .map(|(i, _)| i)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, flag) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(match flag {
                ModeFlag::In => "In",
                ModeFlag::Out => "Out",
            })?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub pred: Arc<str>,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Self {
        Atom {
            pred: Arc::from(pred),
            args,
        }
    }

    pub fn key(&self) -> Pred {
        Pred {
            name: self.pred.clone(),
            arity: self.args.len(),
        }
    }

    pub fn apply(&self, sub: &Substitution) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: sub.apply_all(&self.args),
        }
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: self.args.iter().map(|t| t.rename(map)).collect(),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        vars_of(&self.args)
    }

    /// The atom as a single term, for unification and variance checks.
    pub fn as_term(&self) -> Term {
        Term::App(self.pred.clone(), self.args.clone())
    }

    pub fn display<'a>(&'a self, names: &'a VarNames) -> AtomDisplay<'a> {
        AtomDisplay { atom: self, names }
    }
}

pub struct AtomDisplay<'a> {
    atom: &'a Atom,
    names: &'a VarNames,
}

fn is_infix(pred: &str, arity: usize) -> bool {
    arity == 2 && matches!(pred, "<" | ">" | "=<" | "<=" | "\\=")
}

impl fmt::Display for AtomDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.atom;
        if is_infix(&a.pred, a.args.len()) {
            return write!(
                f,
                "{} {} {}",
                a.args[0].display(self.names),
                a.pred,
                a.args[1].display(self.names)
            );
        }
        f.write_str(&a.pred)?;
        if !a.args.is_empty() {
            f.write_str("(")?;
            for (i, t) in a.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", t.display(self.names))?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display(&VarNames::new()).fmt(f)
    }
}

/// A possibly empty sequence of atoms; the empty query is □.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Query {
    pub atoms: Vec<Atom>,
}

impl Query {
    pub fn new(atoms: Vec<Atom>) -> Self {
        Query { atoms }
    }

    pub fn empty() -> Self {
        Query::default()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn apply(&self, sub: &Substitution) -> Query {
        Query {
            atoms: self.atoms.iter().map(|a| a.apply(sub)).collect(),
        }
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Query {
        Query {
            atoms: self.atoms.iter().map(|a| a.rename(map)).collect(),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for a in &self.atoms {
            out.extend(a.vars());
        }
        out
    }

    pub fn max_var(&self) -> Option<Var> {
        self.atoms
            .iter()
            .flat_map(|a| a.args.iter())
            .filter_map(Term::max_var)
            .max()
    }

    /// The query as a term sequence (one term per atom).
    pub fn as_terms(&self) -> Vec<Term> {
        self.atoms.iter().map(Atom::as_term).collect()
    }

    /// Canonical renaming: variables become `V0, V1, ...` in first-occurrence order.
    pub fn canonical(&self) -> Query {
        let map = crate::term::canonical_map(self.atoms.iter().flat_map(|a| a.args.iter()));
        self.rename(&map)
    }

    pub fn variant_eq(&self, other: &Query) -> bool {
        self.atoms.len() == other.atoms.len()
            && self
                .atoms
                .iter()
                .zip(&other.atoms)
                .all(|(a, b)| a.pred == b.pred && a.args.len() == b.args.len())
            && crate::term::variant_eq(&self.as_terms(), &other.as_terms())
    }

    pub fn display<'a>(&'a self, names: &'a VarNames) -> QueryDisplay<'a> {
        QueryDisplay { query: self, names }
    }
}

pub struct QueryDisplay<'a> {
    query: &'a Query,
    names: &'a VarNames,
}

impl fmt::Display for QueryDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.query.is_empty() {
            return f.write_str("□");
        }
        for (i, a) in self.query.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", a.display(self.names))?;
        }
        Ok(())
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display(&VarNames::new()).fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn new(head: Atom, body: Vec<Atom>) -> Self {
        Clause { head, body }
    }

    pub fn is_unit(&self) -> bool {
        self.body.is_empty()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.head.vars();
        for a in &self.body {
            out.extend(a.vars());
        }
        out
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Clause {
        Clause {
            head: self.head.rename(map),
            body: self.body.iter().map(|a| a.rename(map)).collect(),
        }
    }

    /// Variables in first-occurrence order, head first.
    pub fn ordered_vars(&self) -> Vec<Var> {
        ordered_vars(
            self.head
                .args
                .iter()
                .chain(self.body.iter().flat_map(|a| a.args.iter())),
        )
    }

    /// A variant of this clause whose variables are all fresh from `gen`.
    pub fn rename_fresh(&self, gen: &mut VarGen) -> Clause {
        let map: BTreeMap<Var, Var> = self
            .ordered_vars()
            .into_iter()
            .map(|v| (v, gen.fresh()))
            .collect();
        self.rename(&map)
    }

    /// The clause as a term sequence `head, body...` for variance checks.
    pub fn as_terms(&self) -> Vec<Term> {
        std::iter::once(self.head.as_term())
            .chain(self.body.iter().map(Atom::as_term))
            .collect()
    }

    pub fn variant_eq(&self, other: &Clause) -> bool {
        crate::term::variant_eq(&self.as_terms(), &other.as_terms())
    }

    pub fn display<'a>(&'a self, names: &'a VarNames) -> ClauseDisplay<'a> {
        ClauseDisplay {
            clause: self,
            names,
        }
    }
}

/// A variant of `clause` sharing no variable with `avoid`.
pub fn rename_apart(clause: &Clause, avoid: &BTreeSet<Var>) -> Clause {
    let mut gen = VarGen::avoiding(avoid.iter().chain(clause.vars().iter()));
    clause.rename_fresh(&mut gen)
}

pub struct ClauseDisplay<'a> {
    clause: &'a Clause,
    names: &'a VarNames,
}

impl fmt::Display for ClauseDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.clause.head.display(self.names))?;
        if !self.clause.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, a) in self.clause.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", a.display(self.names))?;
            }
        }
        f.write_str(".")
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display(&VarNames::new()).fmt(f)
    }
}

/// A `:- level p(1,0,_) + c.` annotation as written: one entry per
/// position, `None` at output positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelDecl {
    pub pred: Pred,
    pub coefficients: Vec<Option<u64>>,
    pub constant: u64,
}

/// Which clause resolves a selected atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClauseRef {
    /// Index into the program's clause list.
    Program(usize),
    /// The ground-fact table of a builtin predicate.
    Builtin,
}

impl fmt::Display for ClauseRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClauseRef::Program(i) => write!(f, "c{}", i + 1),
            ClauseRef::Builtin => f.write_str("builtin"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ModedProgram {
    pub clauses: Vec<Clause>,
    modes: BTreeMap<Pred, Mode>,
    /// Printing names for clause variables.
    pub names: VarNames,
    pub levels: Vec<LevelDecl>,
    /// Non-fatal diagnostics (e.g. predicates given the default all-In mode).
    pub warnings: Vec<String>,
    by_pred: BTreeMap<Pred, Vec<usize>>,
}

impl ModedProgram {
    /// Assembles a program. Builtin modes are implicit; defined predicates
    /// without a declared mode default to all-In with a warning. Predicates
    /// used but neither defined, declared nor builtin are rejected.
    pub fn new(clauses: Vec<Clause>, modes: BTreeMap<Pred, Mode>) -> Result<Self, ProgramError> {
        let mut modes = modes;
        let mut warnings = Vec::new();
        for (p, m) in &modes {
            if m.arity() != p.arity {
                return Err(ProgramError::ModeArity(p.clone(), m.arity()));
            }
            if let Some(bm) = builtin_mode(p) {
                if &bm != m {
                    return Err(ProgramError::BuiltinMode(p.clone()));
                }
            }
        }
        let mut by_pred: BTreeMap<Pred, Vec<usize>> = BTreeMap::new();
        for (i, c) in clauses.iter().enumerate() {
            let key = c.head.key();
            if is_builtin(&key) {
                return Err(ProgramError::BuiltinRedefined(key));
            }
            by_pred.entry(key).or_default().push(i);
        }
        for p in by_pred.keys() {
            if !modes.contains_key(p) {
                warnings.push(format!("no mode declared for {p}; defaulting to all-In"));
                modes.insert(p.clone(), Mode::all_in(p.arity));
            }
        }
        for c in &clauses {
            for a in &c.body {
                let key = a.key();
                if !modes.contains_key(&key) && !is_builtin(&key) {
                    return Err(ProgramError::Undefined(key));
                }
            }
        }
        Ok(ModedProgram {
            clauses,
            modes,
            names: VarNames::new(),
            levels: Vec::new(),
            warnings,
            by_pred,
        })
    }

    pub fn mode(&self, pred: &Pred) -> Option<Mode> {
        self.modes.get(pred).cloned().or_else(|| builtin_mode(pred))
    }

    pub fn modes(&self) -> &BTreeMap<Pred, Mode> {
        &self.modes
    }

    /// Mode of an atom's predicate; unknown predicates are treated as all-In.
    pub fn mode_of(&self, atom: &Atom) -> Mode {
        self.mode(&atom.key())
            .unwrap_or_else(|| Mode::all_in(atom.args.len()))
    }

    pub fn input_args<'a>(&self, atom: &'a Atom) -> Vec<&'a Term> {
        let mode = self.mode_of(atom);
        mode.input_positions().map(|i| &atom.args[i]).collect()
    }

    pub fn output_args<'a>(&self, atom: &'a Atom) -> Vec<&'a Term> {
        let mode = self.mode_of(atom);
        mode.output_positions().map(|i| &atom.args[i]).collect()
    }

    pub fn input_vars(&self, atom: &Atom) -> BTreeSet<Var> {
        vars_of(self.input_args(atom))
    }

    pub fn output_vars(&self, atom: &Atom) -> BTreeSet<Var> {
        vars_of(self.output_args(atom))
    }

    /// Indices of the clauses defining `pred`, in textual order.
    pub fn clauses_for(&self, pred: &Pred) -> &[usize] {
        self.by_pred.get(pred).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Predicates occurring in some clause head.
    pub fn defined(&self) -> BTreeSet<Pred> {
        self.by_pred.keys().cloned().collect()
    }

    pub fn is_defined(&self, pred: &Pred) -> bool {
        self.by_pred.contains_key(pred)
    }

    /// Every predicate occurring in the program (heads and bodies).
    pub fn relations(&self) -> BTreeSet<Pred> {
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            out.insert(c.head.key());
            for a in &c.body {
                out.insert(a.key());
            }
        }
        out
    }

    /// Largest variable id used in any clause.
    pub fn max_var(&self) -> Option<Var> {
        self.clauses.iter().flat_map(|c| c.vars()).max()
    }

    /// A variable generator whose output avoids the program and `query`.
    pub fn var_gen_for(&self, query: &Query) -> VarGen {
        let top = [self.max_var(), query.max_var()]
            .into_iter()
            .flatten()
            .max();
        match top {
            Some(v) => VarGen::starting_at(v.0 + 1),
            None => VarGen::starting_at(0),
        }
    }

    /// The clauses defining predicates accepted by `keep`, with the full mode table.
    pub fn subprogram(&self, keep: impl Fn(&Pred) -> bool) -> ModedProgram {
        let clauses: Vec<Clause> = self
            .clauses
            .iter()
            .filter(|c| keep(&c.head.key()))
            .cloned()
            .collect();
        let mut by_pred: BTreeMap<Pred, Vec<usize>> = BTreeMap::new();
        for (i, c) in clauses.iter().enumerate() {
            by_pred.entry(c.head.key()).or_default().push(i);
        }
        ModedProgram {
            clauses,
            modes: self.modes.clone(),
            names: self.names.clone(),
            levels: self
                .levels
                .iter()
                .filter(|l| keep(&l.pred))
                .cloned()
                .collect(),
            warnings: Vec::new(),
            by_pred,
        }
    }

    /// Same program with clause bodies replaced (used to apply body permutations).
    pub fn with_clauses(&self, clauses: Vec<Clause>) -> ModedProgram {
        assert_eq!(clauses.len(), self.clauses.len());
        ModedProgram {
            clauses,
            ..self.clone()
        }
    }

    /// Source text that parses back to a variant-equal program.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        for (p, m) in &self.modes {
            out.push_str(":- mode ");
            out.push_str(&p.name);
            if p.arity > 0 {
                out.push('(');
                let flags: Vec<&str> =
                    m.0.iter()
                        .map(|f| match f {
                            ModeFlag::In => "in",
                            ModeFlag::Out => "out",
                        })
                        .collect();
                out.push_str(&flags.join(","));
                out.push(')');
            }
            out.push_str(".\n");
        }
        for l in &self.levels {
            let coeffs: Vec<String> = l
                .coefficients
                .iter()
                .map(|c| c.map_or("_".to_string(), |k| k.to_string()))
                .collect();
            out.push_str(&format!(
                ":- level {}({}) + {}.\n",
                l.pred.name,
                coeffs.join(","),
                l.constant
            ));
        }
        for c in &self.clauses {
            out.push_str(&c.display(&self.names).to_string());
            out.push('\n');
        }
        out
    }
}
