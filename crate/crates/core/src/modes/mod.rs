//! Syntactic mode classifiers: nicely-moded, simply-moded, input-recursive,
//! their permutation variants, and the dependency graph.
//!
//! Every negative verdict carries a witness naming the leftmost violation,
//! found by checking conditions in a fixed order (output linearity, input
//! against current-and-later outputs, head inputs against body outputs,
//! outputs being variables) and scanning atoms and positions left to right.

mod depgraph;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::program::{Atom, Clause, ModedProgram, Pred, Query};
use crate::term::{Term, Var, VarNames};

pub use depgraph::DepGraph;

/// Largest body accepted by the permutation search.
pub const MAX_PERMUTATION_BODY: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// The output terms do not form a linear sequence.
    OutputsNotLinear,
    /// An input of atom i shares a variable with an output of atom j >= i.
    InputMeetsLaterOutput,
    /// A head input shares a variable with a body output.
    HeadInputMeetsBodyOutput,
    /// A body or query output is not a variable.
    OutputNotVariable,
    /// A mutually recursive body atom has an input variable absent from the head inputs.
    RecursiveInputNotInHead,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::OutputsNotLinear => "outputs not linear",
            Condition::InputMeetsLaterOutput => {
                "input shares a variable with a current or later output"
            }
            Condition::HeadInputMeetsBodyOutput => {
                "head input shares a variable with a body output"
            }
            Condition::OutputNotVariable => "output is not a variable",
            Condition::RecursiveInputNotInHead => {
                "recursive call has an input variable not in the head inputs"
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomRef {
    Head,
    /// Index into a clause body or a query.
    Body(usize),
}

/// An argument position of a head, body or query atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Site {
    pub atom: AtomRef,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub condition: Condition,
    /// Clause index for program-level checks.
    pub clause: Option<usize>,
    pub variable: Option<Var>,
    /// The offending term for [`Condition::OutputNotVariable`].
    pub term: Option<Term>,
    pub sites: Vec<Site>,
}

impl Violation {
    fn new(condition: Condition, variable: Option<Var>, sites: Vec<Site>) -> Self {
        Violation {
            condition,
            clause: None,
            variable,
            term: None,
            sites,
        }
    }

    /// Re-checks the violation against the cited positions of `head`/`body`.
    pub fn reverify(&self, program: &ModedProgram, head: Option<&Atom>, body: &[Atom]) -> bool {
        let atom_at = |r: AtomRef| -> Option<&Atom> {
            match r {
                AtomRef::Head => head,
                AtomRef::Body(i) => body.get(i),
            }
        };
        let arg = |s: &Site| -> Option<(&Atom, &Term, bool)> {
            let a = atom_at(s.atom)?;
            let t = a.args.get(s.position)?;
            Some((a, t, program.mode_of(a).is_input(s.position)))
        };
        let occurs_at = |s: &Site, v: Var| arg(s).is_some_and(|(_, t, _)| t.occurs(v));
        match self.condition {
            Condition::OutputsNotLinear => {
                let (Some(v), [s1, s2]) = (self.variable, self.sites.as_slice()) else {
                    return false;
                };
                let outputs = [s1, s2]
                    .iter()
                    .all(|s| arg(s).is_some_and(|(_, _, input)| !input));
                let count: usize = if s1 == s2 {
                    arg(s1).map_or(0, |(_, t, _)| t.occurrences(v))
                } else {
                    [s1, s2]
                        .iter()
                        .map(|s| arg(s).map_or(0, |(_, t, _)| t.occurrences(v).min(1)))
                        .sum()
                };
                outputs && count >= 2
            }
            Condition::InputMeetsLaterOutput => {
                let (Some(v), [si, so]) = (self.variable, self.sites.as_slice()) else {
                    return false;
                };
                let order_ok = match (si.atom, so.atom) {
                    (AtomRef::Body(i), AtomRef::Body(j)) => i <= j,
                    _ => false,
                };
                order_ok
                    && arg(si).is_some_and(|(_, _, input)| input)
                    && arg(so).is_some_and(|(_, _, input)| !input)
                    && occurs_at(si, v)
                    && occurs_at(so, v)
            }
            Condition::HeadInputMeetsBodyOutput => {
                let (Some(v), [sh, sb]) = (self.variable, self.sites.as_slice()) else {
                    return false;
                };
                sh.atom == AtomRef::Head
                    && matches!(sb.atom, AtomRef::Body(_))
                    && arg(sh).is_some_and(|(_, _, input)| input)
                    && arg(sb).is_some_and(|(_, _, input)| !input)
                    && occurs_at(sh, v)
                    && occurs_at(sb, v)
            }
            Condition::OutputNotVariable => {
                let [s] = self.sites.as_slice() else {
                    return false;
                };
                matches!(s.atom, AtomRef::Body(_))
                    && arg(s).is_some_and(|(_, t, input)| !input && !t.is_var())
            }
            Condition::RecursiveInputNotInHead => {
                let (Some(v), [s], Some(h)) = (self.variable, self.sites.as_slice(), head) else {
                    return false;
                };
                arg(s).is_some_and(|(_, _, input)| input)
                    && occurs_at(s, v)
                    && !program.input_vars(h).contains(&v)
            }
        }
    }

    pub fn describe(&self, names: &VarNames) -> String {
        let mut out = self.condition.to_string();
        if let Some(c) = self.clause {
            out.push_str(&format!(" in clause {}", c + 1));
        }
        if let Some(v) = self.variable {
            out.push_str(&format!(": variable {}", Term::Var(v).display(names)));
        }
        if let Some(t) = &self.term {
            out.push_str(&format!(": term {}", t.display(names)));
        }
        let sites: Vec<String> = self
            .sites
            .iter()
            .map(|s| match s.atom {
                AtomRef::Head => format!("head arg {}", s.position + 1),
                AtomRef::Body(i) => format!("atom {} arg {}", i + 1, s.position + 1),
            })
            .collect();
        if !sites.is_empty() {
            out.push_str(&format!(" at {}", sites.join(", ")));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModednessReport {
    pub holds: bool,
    pub witness: Option<Violation>,
}

impl ModednessReport {
    fn pass() -> Self {
        ModednessReport {
            holds: true,
            witness: None,
        }
    }

    fn fail(v: Violation) -> Self {
        ModednessReport {
            holds: false,
            witness: Some(v),
        }
    }

    fn in_clause(mut self, idx: usize) -> Self {
        if let Some(w) = &mut self.witness {
            w.clause = Some(idx);
        }
        self
    }
}

fn output_sites(program: &ModedProgram, atoms: &[Atom]) -> Vec<(Site, Term)> {
    let mut out = Vec::new();
    for (i, a) in atoms.iter().enumerate() {
        for p in program.mode_of(a).output_positions() {
            out.push((
                Site {
                    atom: AtomRef::Body(i),
                    position: p,
                },
                a.args[p].clone(),
            ));
        }
    }
    out
}

fn check_output_linearity(program: &ModedProgram, atoms: &[Atom]) -> Option<Violation> {
    let mut first: Vec<(Var, Site)> = Vec::new();
    for (site, term) in output_sites(program, atoms) {
        let mut clash = None;
        term.for_each_var(&mut |v| {
            if clash.is_some() {
                return;
            }
            match first.iter().find(|(w, _)| *w == v) {
                Some((_, s)) => clash = Some((v, *s)),
                None => first.push((v, site)),
            }
        });
        if let Some((v, s)) = clash {
            return Some(Violation::new(
                Condition::OutputsNotLinear,
                Some(v),
                vec![s, site],
            ));
        }
    }
    None
}

fn check_inputs_against_outputs(program: &ModedProgram, atoms: &[Atom]) -> Option<Violation> {
    let outs = output_sites(program, atoms);
    for (i, a) in atoms.iter().enumerate() {
        for p in program.mode_of(a).input_positions() {
            for v in a.args[p].vars() {
                let hit = outs.iter().find(|(s, t)| match s.atom {
                    AtomRef::Body(j) => j >= i && t.occurs(v),
                    AtomRef::Head => false,
                });
                if let Some((s, _)) = hit {
                    return Some(Violation::new(
                        Condition::InputMeetsLaterOutput,
                        Some(v),
                        vec![
                            Site {
                                atom: AtomRef::Body(i),
                                position: p,
                            },
                            *s,
                        ],
                    ));
                }
            }
        }
    }
    None
}

fn check_head(program: &ModedProgram, head: &Atom, body: &[Atom]) -> Option<Violation> {
    let outs = output_sites(program, body);
    for p in program.mode_of(head).input_positions() {
        for v in head.args[p].vars() {
            if let Some((s, _)) = outs.iter().find(|(_, t)| t.occurs(v)) {
                return Some(Violation::new(
                    Condition::HeadInputMeetsBodyOutput,
                    Some(v),
                    vec![
                        Site {
                            atom: AtomRef::Head,
                            position: p,
                        },
                        *s,
                    ],
                ));
            }
        }
    }
    None
}

fn check_outputs_are_variables(program: &ModedProgram, atoms: &[Atom]) -> Option<Violation> {
    output_sites(program, atoms)
        .into_iter()
        .find(|(_, t)| !t.is_var())
        .map(|(s, t)| Violation {
            condition: Condition::OutputNotVariable,
            clause: None,
            variable: None,
            term: Some(t),
            sites: vec![s],
        })
}

/// Nicely-moded check of a query given as an atom sequence.
pub fn nicely_moded_atoms(program: &ModedProgram, atoms: &[Atom]) -> ModednessReport {
    check_output_linearity(program, atoms)
        .or_else(|| check_inputs_against_outputs(program, atoms))
        .map_or_else(ModednessReport::pass, ModednessReport::fail)
}

pub fn check_nicely_moded(program: &ModedProgram, query: &Query) -> ModednessReport {
    nicely_moded_atoms(program, &query.atoms)
}

pub fn check_nicely_moded_clause(program: &ModedProgram, clause: &Clause) -> ModednessReport {
    let body = nicely_moded_atoms(program, &clause.body);
    if !body.holds {
        return body;
    }
    check_head(program, &clause.head, &clause.body)
        .map_or_else(ModednessReport::pass, ModednessReport::fail)
}

pub fn check_nicely_moded_program(program: &ModedProgram) -> ModednessReport {
    for (i, c) in program.clauses.iter().enumerate() {
        let r = check_nicely_moded_clause(program, c);
        if !r.holds {
            return r.in_clause(i);
        }
    }
    ModednessReport::pass()
}

pub fn simply_moded_atoms(program: &ModedProgram, atoms: &[Atom]) -> ModednessReport {
    let nm = nicely_moded_atoms(program, atoms);
    if !nm.holds {
        return nm;
    }
    check_outputs_are_variables(program, atoms)
        .map_or_else(ModednessReport::pass, ModednessReport::fail)
}

pub fn check_simply_moded(program: &ModedProgram, query: &Query) -> ModednessReport {
    simply_moded_atoms(program, &query.atoms)
}

pub fn check_simply_moded_clause(program: &ModedProgram, clause: &Clause) -> ModednessReport {
    let nm = check_nicely_moded_clause(program, clause);
    if !nm.holds {
        return nm;
    }
    check_outputs_are_variables(program, &clause.body)
        .map_or_else(ModednessReport::pass, ModednessReport::fail)
}

pub fn check_simply_moded_program(program: &ModedProgram) -> ModednessReport {
    for (i, c) in program.clauses.iter().enumerate() {
        let r = check_simply_moded_clause(program, c);
        if !r.holds {
            return r.in_clause(i);
        }
    }
    ModednessReport::pass()
}

/// Checks Var(In(B)) ⊆ Var(In(H)) for every body atom B with Rel(B) ≃ Rel(H).
pub fn check_input_recursive_clause(
    program: &ModedProgram,
    graph: &DepGraph,
    clause: &Clause,
) -> ModednessReport {
    let head_pred = clause.head.key();
    let head_inputs = program.input_vars(&clause.head);
    for (i, b) in clause.body.iter().enumerate() {
        if !graph.mutual(&head_pred, &b.key()) {
            continue;
        }
        for p in program.mode_of(b).input_positions() {
            if let Some(v) = b.args[p]
                .vars()
                .into_iter()
                .find(|v| !head_inputs.contains(v))
            {
                return ModednessReport::fail(Violation::new(
                    Condition::RecursiveInputNotInHead,
                    Some(v),
                    vec![Site {
                        atom: AtomRef::Body(i),
                        position: p,
                    }],
                ));
            }
        }
    }
    ModednessReport::pass()
}

pub fn check_input_recursive(program: &ModedProgram, graph: &DepGraph) -> ModednessReport {
    for (i, c) in program.clauses.iter().enumerate() {
        let r = check_input_recursive_clause(program, graph, c);
        if !r.holds {
            return r.in_clause(i);
        }
    }
    ModednessReport::pass()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    NicelyModed,
    SimplyModed,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermutationError {
    #[error("body of {len} atoms exceeds the permutation bound of {bound}")]
    BodyTooLong { len: usize, bound: usize },
}

/// Finds an ordering of `atoms` that passes the `target` check (with `head`
/// as clause head when given). Returns `perm` with `perm[k]` the original
/// index of the atom placed at position `k`; the identity is preferred.
pub fn find_permutation(
    program: &ModedProgram,
    head: Option<&Atom>,
    atoms: &[Atom],
    target: Target,
) -> Result<Option<Vec<usize>>, PermutationError> {
    if atoms.len() > MAX_PERMUTATION_BODY {
        return Err(PermutationError::BodyTooLong {
            len: atoms.len(),
            bound: MAX_PERMUTATION_BODY,
        });
    }
    // Order-independent conditions first.
    if check_output_linearity(program, atoms).is_some() {
        return Ok(None);
    }
    if let Some(h) = head {
        if check_head(program, h, atoms).is_some() {
            return Ok(None);
        }
    }
    if target == Target::SimplyModed && check_outputs_are_variables(program, atoms).is_some() {
        return Ok(None);
    }
    let inputs: Vec<BTreeSet<Var>> = atoms.iter().map(|a| program.input_vars(a)).collect();
    let outputs: Vec<BTreeSet<Var>> = atoms.iter().map(|a| program.output_vars(a)).collect();
    let mut placed = vec![false; atoms.len()];
    let mut order = Vec::with_capacity(atoms.len());
    if place(&inputs, &outputs, &mut placed, &mut order) {
        Ok(Some(order))
    } else {
        Ok(None)
    }
}

/// Depth-first placement: an atom may go next when its inputs avoid the
/// outputs of every atom not yet placed, itself included.
fn place(
    inputs: &[BTreeSet<Var>],
    outputs: &[BTreeSet<Var>],
    placed: &mut [bool],
    order: &mut Vec<usize>,
) -> bool {
    if order.len() == placed.len() {
        return true;
    }
    for a in 0..placed.len() {
        if placed[a] {
            continue;
        }
        let blocked = (0..placed.len())
            .filter(|&b| !placed[b])
            .any(|b| !inputs[a].is_disjoint(&outputs[b]));
        if blocked {
            continue;
        }
        placed[a] = true;
        order.push(a);
        if place(inputs, outputs, placed, order) {
            return true;
        }
        order.pop();
        placed[a] = false;
    }
    false
}

pub fn apply_permutation<T: Clone>(items: &[T], perm: &[usize]) -> Vec<T> {
    perm.iter().map(|&i| items[i].clone()).collect()
}

/// Permutes every clause body so the program passes `target`, if possible.
/// Returns the reordered program and the per-clause permutations.
pub fn permute_program(
    program: &ModedProgram,
    target: Target,
) -> Result<Option<(ModedProgram, Vec<Vec<usize>>)>, PermutationError> {
    let mut clauses = Vec::with_capacity(program.clauses.len());
    let mut perms = Vec::with_capacity(program.clauses.len());
    for c in &program.clauses {
        match find_permutation(program, Some(&c.head), &c.body, target)? {
            Some(perm) => {
                clauses.push(Clause::new(
                    c.head.clone(),
                    apply_permutation(&c.body, &perm),
                ));
                perms.push(perm);
            }
            None => return Ok(None),
        }
    }
    Ok(Some((program.with_clauses(clauses), perms)))
}

/// `P` extends `R` iff no relation defined in `P` occurs in `R`.
pub fn extends(p: &ModedProgram, r_relations: &BTreeSet<Pred>) -> bool {
    p.defined().is_disjoint(r_relations)
}
