//! Input-consuming resolution: single steps, derivations with chronological
//! backtracking, deadlock/failure classification and atom genealogy.

mod switch;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::program::{
    evaluate_builtin, is_builtin, rename_apart, Atom, BuiltinStatus, Clause, ClauseRef,
    ModedProgram, Query,
};
use crate::subst::Substitution;
use crate::term::{Term, Var, VarGen, VarNames};
use crate::unify::{is_relevant, unify_protecting};

pub use switch::{is_normalized, left_switch, normalize_prefix, switch_agrees, SwitchError};

pub const DEFAULT_MAX_STEPS: usize = 10_000;
pub const DEFAULT_MAX_BACKTRACKS: usize = 10_000;

/// Why an atom cannot take an input-consuming step with a given clause.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Unresolvable {
    #[error("no unifier")]
    NotUnifiable,
    /// A unifier exists but it instantiates the atom's input arguments
    /// (for builtins: the atom is not yet sufficiently instantiated).
    #[error("unifiable but not input-consuming")]
    NotInputConsuming,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("atom index {index} out of range for a query of {len} atoms")]
    NoSuchAtom { index: usize, len: usize },
    #[error("clause {0} does not define the selected predicate")]
    WrongClause(ClauseRef),
    #[error("{0}")]
    Unresolvable(#[from] Unresolvable),
}

/// Input-consuming resolvability of `atom` against an already renamed clause.
/// The mgu protects the atom's input variables, so it fixes them whenever
/// some relevant mgu does.
pub fn ic_resolvable_renamed(
    program: &ModedProgram,
    atom: &Atom,
    clause: &Clause,
) -> Result<Substitution, Unresolvable> {
    if atom.key() != clause.head.key() {
        return Err(Unresolvable::NotUnifiable);
    }
    let protected = program.input_vars(atom);
    let theta = unify_protecting(&atom.args, &clause.head.args, &protected)
        .map_err(|_| Unresolvable::NotUnifiable)?;
    let fixed = program
        .input_args(atom)
        .into_iter()
        .all(|s| theta.apply(s) == *s);
    if fixed {
        Ok(theta)
    } else {
        Err(Unresolvable::NotInputConsuming)
    }
}

/// Renames `clause` apart from `avoid` and checks input-consuming resolvability.
pub fn ic_resolvable(
    program: &ModedProgram,
    atom: &Atom,
    clause: &Clause,
    avoid: &BTreeSet<Var>,
) -> Result<(Substitution, Clause), Unresolvable> {
    let mut avoid = avoid.clone();
    avoid.extend(atom.vars());
    let renamed = rename_apart(clause, &avoid);
    let theta = ic_resolvable_renamed(program, atom, &renamed)?;
    Ok((theta, renamed))
}

/// Builtin atoms resolve against their fact table without binding anything.
pub fn builtin_resolvable(atom: &Atom) -> Result<(), Unresolvable> {
    match evaluate_builtin(atom) {
        BuiltinStatus::Decided(true) => Ok(()),
        BuiltinStatus::Decided(false) => Err(Unresolvable::NotUnifiable),
        BuiltinStatus::Suspended => Err(Unresolvable::NotInputConsuming),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationStep {
    pub source: Query,
    pub selected: usize,
    pub clause: ClauseRef,
    /// The renamed variant of the program clause; `None` for builtins.
    pub input_clause: Option<Clause>,
    pub mgu: Substitution,
    pub resolvent: Query,
    /// For each resolvent atom, the position of its parent in `source`.
    pub genealogy: Vec<usize>,
}

impl DerivationStep {
    pub fn selected_atom(&self) -> &Atom {
        &self.source.atoms[self.selected]
    }

    /// Number of atoms that replace the selected one.
    pub fn body_len(&self) -> usize {
        self.input_clause.as_ref().map_or(0, |c| c.body.len())
    }
}

/// Builds the step for a resolvable pair; `clause` must already be renamed apart.
pub fn make_step(
    query: &Query,
    selected: usize,
    clause_ref: ClauseRef,
    clause: Option<Clause>,
    mgu: Substitution,
) -> DerivationStep {
    let body: &[Atom] = clause.as_ref().map_or(&[], |c| c.body.as_slice());
    let atoms = &query.atoms;
    let mut resolvent = Vec::with_capacity(atoms.len() + body.len());
    let mut genealogy = Vec::with_capacity(atoms.len() + body.len());
    for (i, a) in atoms[..selected].iter().enumerate() {
        resolvent.push(a.apply(&mgu));
        genealogy.push(i);
    }
    for b in body {
        resolvent.push(b.apply(&mgu));
        genealogy.push(selected);
    }
    for (i, a) in atoms.iter().enumerate().skip(selected + 1) {
        resolvent.push(a.apply(&mgu));
        genealogy.push(i);
    }
    DerivationStep {
        source: query.clone(),
        selected,
        clause: clause_ref,
        input_clause: clause,
        mgu,
        resolvent: Query::new(resolvent),
        genealogy,
    }
}

/// Resolves atom `index` of `query` with the given clause (or builtin),
/// renaming the clause with variables from `gen`.
pub fn ic_step(
    program: &ModedProgram,
    query: &Query,
    index: usize,
    clause_ref: ClauseRef,
    gen: &mut VarGen,
) -> Result<DerivationStep, StepError> {
    let atom = query.atoms.get(index).ok_or(StepError::NoSuchAtom {
        index,
        len: query.len(),
    })?;
    match clause_ref {
        ClauseRef::Builtin => {
            if !is_builtin(&atom.key()) {
                return Err(StepError::WrongClause(clause_ref));
            }
            builtin_resolvable(atom)?;
            Ok(make_step(
                query,
                index,
                clause_ref,
                None,
                Substitution::new(),
            ))
        }
        ClauseRef::Program(c) => {
            let clause = program
                .clauses
                .get(c)
                .filter(|cl| cl.head.key() == atom.key())
                .ok_or(StepError::WrongClause(clause_ref))?;
            let renamed = clause.rename_fresh(gen);
            let theta = ic_resolvable_renamed(program, atom, &renamed)?;
            Ok(make_step(query, index, clause_ref, Some(renamed), theta))
        }
    }
}

/// Re-resolves with a fixed, already renamed input clause (used when a
/// derivation is rearranged).
pub fn ic_step_with(
    program: &ModedProgram,
    query: &Query,
    index: usize,
    clause_ref: ClauseRef,
    clause: Option<&Clause>,
) -> Result<DerivationStep, StepError> {
    let atom = query.atoms.get(index).ok_or(StepError::NoSuchAtom {
        index,
        len: query.len(),
    })?;
    match (clause_ref, clause) {
        (ClauseRef::Builtin, None) => {
            if !is_builtin(&atom.key()) {
                return Err(StepError::WrongClause(clause_ref));
            }
            builtin_resolvable(atom)?;
            Ok(make_step(
                query,
                index,
                clause_ref,
                None,
                Substitution::new(),
            ))
        }
        (ClauseRef::Program(_), Some(c)) => {
            let theta = ic_resolvable_renamed(program, atom, c)?;
            Ok(make_step(query, index, clause_ref, Some(c.clone()), theta))
        }
        _ => Err(StepError::WrongClause(clause_ref)),
    }
}

/// An input-consuming resolvable (atom, clause) pair of a query.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub atom: usize,
    pub clause: ClauseRef,
    pub input_clause: Option<Clause>,
    pub mgu: Substitution,
}

impl Candidate {
    pub fn into_step(self, query: &Query) -> DerivationStep {
        make_step(query, self.atom, self.clause, self.input_clause, self.mgu)
    }
}

/// All input-consuming resolvable clauses for atom `index`, in textual order.
pub fn candidates_for_atom(
    program: &ModedProgram,
    query: &Query,
    index: usize,
    gen: &mut VarGen,
) -> Vec<Candidate> {
    let atom = &query.atoms[index];
    let key = atom.key();
    if is_builtin(&key) {
        return match builtin_resolvable(atom) {
            Ok(()) => vec![Candidate {
                atom: index,
                clause: ClauseRef::Builtin,
                input_clause: None,
                mgu: Substitution::new(),
            }],
            Err(_) => Vec::new(),
        };
    }
    let mut out = Vec::new();
    for &c in program.clauses_for(&key) {
        let renamed = program.clauses[c].rename_fresh(gen);
        if let Ok(mgu) = ic_resolvable_renamed(program, atom, &renamed) {
            out.push(Candidate {
                atom: index,
                clause: ClauseRef::Program(c),
                input_clause: Some(renamed),
                mgu,
            });
        }
    }
    out
}

/// Every input-consuming resolvable pair, atoms left to right, clauses in order.
pub fn candidates(program: &ModedProgram, query: &Query, gen: &mut VarGen) -> Vec<Candidate> {
    (0..query.len())
        .flat_map(|i| candidates_for_atom(program, query, i, gen))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stuck {
    /// Some atom unifies with a clause head (or is a suspended builtin).
    Deadlock,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("atom {atom} has an input-consuming step with {clause}")]
pub struct NotStuck {
    pub atom: usize,
    pub clause: ClauseRef,
}

/// Classifies a query none of whose atoms can take an input-consuming step.
/// The empty query is not stuck and is classified as a failure to resolve
/// nothing only by convention of the caller; here it yields `Failure`.
pub fn classify_stuck(program: &ModedProgram, query: &Query) -> Result<Stuck, NotStuck> {
    let avoid = query.vars();
    let mut deadlock = false;
    for (i, atom) in query.atoms.iter().enumerate() {
        let key = atom.key();
        if is_builtin(&key) {
            match builtin_resolvable(atom) {
                Ok(()) => {
                    return Err(NotStuck {
                        atom: i,
                        clause: ClauseRef::Builtin,
                    })
                }
                Err(Unresolvable::NotInputConsuming) => deadlock = true,
                Err(Unresolvable::NotUnifiable) => {}
            }
            continue;
        }
        for &c in program.clauses_for(&key) {
            match ic_resolvable(program, atom, &program.clauses[c], &avoid) {
                Ok(_) => {
                    return Err(NotStuck {
                        atom: i,
                        clause: ClauseRef::Program(c),
                    })
                }
                Err(Unresolvable::NotInputConsuming) => deadlock = true,
                Err(Unresolvable::NotUnifiable) => {}
            }
        }
    }
    Ok(if deadlock {
        Stuck::Deadlock
    } else {
        Stuck::Failure
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    /// Computed answer substitution, restricted to the initial query's variables.
    Success(Substitution),
    Deadlock,
    Failure,
    BudgetExhausted,
    /// A prefix that is neither finished nor stuck.
    Partial,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Success(_) => "success",
            Status::Deadlock => "deadlock",
            Status::Failure => "failure",
            Status::BudgetExhausted => "budget-exhausted",
            Status::Partial => "partial",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub initial: Query,
    pub steps: Vec<DerivationStep>,
    pub status: Status,
}

impl Derivation {
    pub fn new(initial: Query) -> Self {
        Derivation {
            initial,
            steps: Vec::new(),
            status: Status::Partial,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Q_k: the initial query for k = 0, else the k-th resolvent.
    pub fn query(&self, k: usize) -> &Query {
        if k == 0 {
            &self.initial
        } else {
            &self.steps[k - 1].resolvent
        }
    }

    pub fn final_query(&self) -> &Query {
        self.query(self.steps.len())
    }

    /// θ1⋯θn, composed left to right.
    pub fn composed(&self) -> Substitution {
        self.steps
            .iter()
            .fold(Substitution::new(), |acc, s| acc.compose(&s.mgu))
    }

    /// Composed mgu restricted to the initial query's variables.
    pub fn answer(&self) -> Substitution {
        self.composed().restrict(&self.initial.vars())
    }

    /// For every Q_k, the initial-query position each atom descends from.
    pub fn origins(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push((0..self.initial.len()).collect::<Vec<_>>());
        for s in &self.steps {
            let prev = out.last().unwrap();
            let next = s.genealogy.iter().map(|&p| prev[p]).collect();
            out.push(next);
        }
        out
    }

    /// Initial-query ancestor of the atom selected at each step.
    pub fn step_origins(&self) -> Vec<usize> {
        let origins = self.origins();
        self.steps
            .iter()
            .enumerate()
            .map(|(k, s)| origins[k][s.selected])
            .collect()
    }

    /// Sets the status from the final query: success, stuck or partial.
    pub fn settle(&mut self, program: &ModedProgram) {
        self.status = if self.final_query().is_empty() {
            Status::Success(self.answer())
        } else {
            match classify_stuck(program, self.final_query()) {
                Ok(Stuck::Deadlock) => Status::Deadlock,
                Ok(Stuck::Failure) => Status::Failure,
                Err(_) => Status::Partial,
            }
        };
    }

    /// Re-checks every step from scratch: chaining, standardization apart,
    /// clause variance, unifier, relevance, idempotence, input consumption,
    /// most-generality and the resolvent itself.
    pub fn validate(&self, program: &ModedProgram) -> Result<(), String> {
        let mut used: BTreeSet<Var> = self.initial.vars();
        let mut current = &self.initial;
        for (k, s) in self.steps.iter().enumerate() {
            let fail = |msg: &str| Err(format!("step {}: {msg}", k + 1));
            if &s.source != current {
                return fail("source is not the previous resolvent");
            }
            let Some(atom) = s.source.atoms.get(s.selected) else {
                return fail("selected index out of range");
            };
            if !s.mgu.is_idempotent() {
                return fail("mgu not idempotent");
            }
            if program
                .input_args(atom)
                .iter()
                .any(|t| s.mgu.apply(t) != **t)
            {
                return fail("mgu instantiates the selected atom's inputs");
            }
            match (&s.clause, &s.input_clause) {
                (ClauseRef::Builtin, None) => {
                    if builtin_resolvable(atom).is_err() {
                        return fail("builtin not decided true");
                    }
                    if !s.mgu.is_empty() {
                        return fail("builtin step binds variables");
                    }
                }
                (ClauseRef::Program(c), Some(ic)) => {
                    let Some(orig) = program.clauses.get(*c) else {
                        return fail("clause index out of range");
                    };
                    if !ic.variant_eq(orig) || ic.vars().len() != orig.vars().len() {
                        return fail("input clause is not a variant of the program clause");
                    }
                    if !ic.vars().is_disjoint(&used) {
                        return fail("input clause not standardized apart");
                    }
                    used.extend(ic.vars());
                    let lhs = &atom.args;
                    let rhs = &ic.head.args;
                    if atom.key() != ic.head.key() || s.mgu.apply_all(lhs) != s.mgu.apply_all(rhs) {
                        return fail("mgu does not unify");
                    }
                    if !is_relevant(&s.mgu, lhs, rhs) {
                        return fail("mgu not relevant");
                    }
                    // most general: our mgu is an instance of it and vice versa
                    let Ok(ours) = crate::unify::unify(lhs, rhs) else {
                        return fail("no unifier exists");
                    };
                    let vs: Vec<Term> = lhs.iter().chain(rhs).cloned().collect();
                    if !crate::term::variant_eq(&s.mgu.apply_all(&vs), &ours.apply_all(&vs)) {
                        return fail("mgu is not most general");
                    }
                }
                _ => return fail("clause reference and input clause disagree"),
            }
            let expected = make_step(
                &s.source,
                s.selected,
                s.clause,
                s.input_clause.clone(),
                s.mgu.clone(),
            );
            if expected.resolvent != s.resolvent || expected.genealogy != s.genealogy {
                return fail("resolvent or genealogy mismatch");
            }
            used.extend(s.mgu.range_vars());
            current = &s.resolvent;
        }
        Ok(())
    }

    pub fn render(&self, names: &VarNames) -> String {
        let mut out = format!("0: {}\n", self.initial.display(names));
        let qvars = self.initial.vars();
        for (k, s) in self.steps.iter().enumerate() {
            out.push_str(&format!(
                "{}: select {} [{}] with {}  θ={}\n   => {}\n",
                k + 1,
                s.selected_atom().display(names),
                s.selected + 1,
                s.clause,
                s.mgu.restrict(&qvars).display(names),
                s.resolvent.display(names)
            ));
        }
        out.push_str(&format!("status: {}", self.status.name()));
        if let Status::Success(cas) = &self.status {
            out.push_str(&format!(" {}", cas.display(names)));
        }
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_steps: usize,
    pub max_backtracks: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_steps: DEFAULT_MAX_STEPS,
            max_backtracks: DEFAULT_MAX_BACKTRACKS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    /// Leftmost atom with at least one input-consuming resolvable clause,
    /// clauses tried in textual order with chronological backtracking.
    LeftmostIc,
    /// Fixed (atom, clause) choices; no backtracking.
    Scripted(Vec<(usize, ClauseRef)>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("scripted step {step}: {error}")]
pub struct ScriptError {
    pub step: usize,
    pub error: StepError,
}

pub fn run(
    program: &ModedProgram,
    query: &Query,
    strategy: &Strategy,
    budget: Budget,
) -> Result<Derivation, ScriptError> {
    match strategy {
        Strategy::LeftmostIc => Ok(derive(program, query, budget)),
        Strategy::Scripted(script) => derive_scripted(program, query, script),
    }
}

pub fn derive_scripted(
    program: &ModedProgram,
    query: &Query,
    script: &[(usize, ClauseRef)],
) -> Result<Derivation, ScriptError> {
    let mut gen = program.var_gen_for(query);
    let mut d = Derivation::new(query.clone());
    for (k, &(atom, clause)) in script.iter().enumerate() {
        let step = ic_step(program, d.final_query(), atom, clause, &mut gen)
            .map_err(|error| ScriptError { step: k + 1, error })?;
        d.steps.push(step);
    }
    d.settle(program);
    Ok(d)
}

struct Frame {
    alternatives: Vec<Candidate>,
    next: usize,
}

/// Leftmost input-consuming derivation with chronological backtracking over
/// clause choices. Returns the first successful derivation; otherwise the
/// first deadlocked one if any leaf deadlocks, else the last failed one.
pub fn derive(program: &ModedProgram, query: &Query, budget: Budget) -> Derivation {
    let mut gen = program.var_gen_for(query);
    let mut d = Derivation::new(query.clone());
    let mut frames: Vec<Frame> = Vec::new();
    let mut steps_taken = 0usize;
    let mut backtracks = 0usize;
    let mut deadlocked: Option<Derivation> = None;
    let mut failed: Option<Derivation> = None;

    loop {
        let current = d.final_query().clone();
        if current.is_empty() {
            d.status = Status::Success(d.answer());
            return d;
        }
        let selection = (0..current.len())
            .map(|i| candidates_for_atom(program, &current, i, &mut gen))
            .find(|c| !c.is_empty());
        match selection {
            Some(alternatives) => frames.push(Frame {
                alternatives,
                next: 0,
            }),
            None => {
                let stuck = classify_stuck(program, &current)
                    .expect("no atom is input-consuming resolvable");
                let mut leaf = d.clone();
                match stuck {
                    Stuck::Deadlock => {
                        leaf.status = Status::Deadlock;
                        deadlocked.get_or_insert(leaf);
                    }
                    Stuck::Failure => {
                        leaf.status = Status::Failure;
                        failed = Some(leaf);
                    }
                }
                // every frame has exactly one step in `d`; undo steps until a
                // frame with an untried alternative is on top
                loop {
                    let Some(f) = frames.last() else {
                        return deadlocked.or(failed).expect("a stuck leaf was recorded");
                    };
                    d.steps.pop();
                    backtracks += 1;
                    if f.next < f.alternatives.len() {
                        break;
                    }
                    frames.pop();
                }
                if backtracks > budget.max_backtracks {
                    d.status = Status::BudgetExhausted;
                    return d;
                }
            }
        }
        if steps_taken >= budget.max_steps {
            d.status = Status::BudgetExhausted;
            return d;
        }
        let frame = frames.last_mut().unwrap();
        let cand = frame.alternatives[frame.next].clone();
        frame.next += 1;
        let step = cand.into_step(d.final_query());
        d.steps.push(step);
        steps_taken += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{parse_program, parse_query};

    pub const APPEND: &str = ":- mode app(in,in,out).
        app([],Ys,Ys).
        app([H|Xs],Ys,[H|Zs]) :- app(Xs,Ys,Zs).";

    const REVERSE: &str = ":- mode reverse(in,out). :- mode reverse_acc(in,out,in).
        reverse(Xs,Ys) :- reverse_acc(Xs,Ys,[]).
        reverse_acc([],Ys,Ys).
        reverse_acc([X|Xs],Ys,Zs) :- reverse_acc(Xs,Ys,[X|Zs]).";

    fn show(q: &Query, names: &VarNames) -> String {
        q.display(names).to_string()
    }

    #[test]
    fn resolvability_verdicts() {
        let p = parse_program(APPEND).unwrap();
        let (q, _) = parse_query("app(X,Y,Z)", &p).unwrap();
        let avoid = q.vars();
        assert_eq!(
            ic_resolvable(&p, &q.atoms[0], &p.clauses[0], &avoid).unwrap_err(),
            Unresolvable::NotInputConsuming
        );
        let (q, names) = parse_query("app([],[],Z)", &p).unwrap();
        let (theta, _) = ic_resolvable(&p, &q.atoms[0], &p.clauses[0], &q.vars()).unwrap();
        assert_eq!(
            theta.apply(&q.atoms[0].args[2]).display(&names).to_string(),
            "[]"
        );
        assert_eq!(
            ic_resolvable(&p, &q.atoms[0], &p.clauses[1], &q.vars()).unwrap_err(),
            Unresolvable::NotUnifiable
        );
    }

    #[test]
    fn reverse_trace() {
        let p = parse_program(REVERSE).unwrap();
        let (q, names) = parse_query("reverse([X1,X2],Zs)", &p).unwrap();
        let d = derive(&p, &q, Budget::default());
        assert_eq!(d.len(), 4);
        d.validate(&p).unwrap();
        let Status::Success(cas) = &d.status else {
            panic!("{:?}", d.status)
        };
        assert_eq!(cas.display(&names).to_string(), "{Zs/[X2,X1]}");
        assert!(show(d.query(1), &names).starts_with("reverse_acc([X1,X2],Zs,[])"));
    }

    #[test]
    fn deadlock_and_failure() {
        let p = parse_program(APPEND).unwrap();
        let (q, _) = parse_query("app(X,Y,Z)", &p).unwrap();
        let d = derive(&p, &q, Budget::default());
        assert_eq!(d.status, Status::Deadlock);
        assert_eq!(d.len(), 0);
        let (q, _) = parse_query("app(f(a),Y,Z)", &p).unwrap();
        assert_eq!(derive(&p, &q, Budget::default()).status, Status::Failure);
        assert_eq!(classify_stuck(&p, &q), Ok(Stuck::Failure));
        let (ok, _) = parse_query("app([1],[2],Z)", &p).unwrap();
        assert!(classify_stuck(&p, &ok).is_err());
    }

    #[test]
    fn builtin_failure_is_failure() {
        let p = parse_program(":- mode t(in). t(X) :- X > 2.").unwrap();
        let (q, _) = parse_query("1 > 2", &p).unwrap();
        assert_eq!(classify_stuck(&p, &q), Ok(Stuck::Failure));
        let (q, _) = parse_query("t(1)", &p).unwrap();
        assert_eq!(derive(&p, &q, Budget::default()).status, Status::Failure);
        let (q, _) = parse_query("t(3)", &p).unwrap();
        assert!(matches!(
            derive(&p, &q, Budget::default()).status,
            Status::Success(_)
        ));
        let (q, _) = parse_query("t(X)", &p).unwrap();
        let d = derive(&p, &q, Budget::default());
        assert_eq!(d.status, Status::Deadlock);
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn append_answer() {
        let p = parse_program(APPEND).unwrap();
        let (q, names) = parse_query("app([1],[2],Z)", &p).unwrap();
        let d = derive(&p, &q, Budget::default());
        assert_eq!(d.len(), 2);
        let Status::Success(cas) = &d.status else {
            panic!()
        };
        assert_eq!(cas.display(&names).to_string(), "{Z/[1,2]}");
    }

    #[test]
    fn backtracking_over_clauses() {
        let src = ":- mode p(in,out). :- mode q(in).
            p(X,a). p(X,b).
            q(b).
            r(X) :- p(X,Y), q(Y).";
        let p = parse_program(src).unwrap();
        let (q, names) = parse_query("p(1,Y), q(Y)", &p).unwrap();
        let d = derive(&p, &q, Budget::default());
        let Status::Success(cas) = &d.status else {
            panic!("{:?}", d.status)
        };
        assert_eq!(cas.display(&names).to_string(), "{Y/b}");
        d.validate(&p).unwrap();
    }

    #[test]
    fn budget_exhaustion() {
        let src = ":- mode loop(in). loop(X) :- loop(X).";
        let p = parse_program(src).unwrap();
        let (q, _) = parse_query("loop(a)", &p).unwrap();
        let d = derive(
            &p,
            &q,
            Budget {
                max_steps: 50,
                max_backtracks: 10,
            },
        );
        assert_eq!(d.status, Status::BudgetExhausted);
        assert_eq!(d.len(), 50);
    }

    #[test]
    fn scripted_q2_leaves_right_atom_alone() {
        let p = parse_program(APPEND).unwrap();
        let (q, _) = parse_query("app([1,2],[3,4],Xs), app(Xs,[5,6],Ys)", &p).unwrap();
        let d = derive_scripted(&p, &q, &[(0, ClauseRef::Program(1))]).unwrap();
        assert_eq!(d.status, Status::Partial);
        let ys = q.atoms[1].args[2].as_var().unwrap();
        assert!(d.steps[0].mgu.get(ys).is_none());
        let e = derive_scripted(&p, &q, &[(1, ClauseRef::Program(1))]).unwrap_err();
        assert_eq!(e.step, 1);
        assert!(matches!(
            ic_step(
                &p,
                &Query::empty(),
                0,
                ClauseRef::Program(0),
                &mut VarGen::starting_at(0)
            ),
            Err(StepError::NoSuchAtom { .. })
        ));
    }

    #[test]
    fn origins_follow_genealogy() {
        let p = parse_program(APPEND).unwrap();
        let (q, _) = parse_query("app([1,2],[3,4],Xs), app(Xs,[5,6],Ys)", &p).unwrap();
        let d = derive(&p, &q, Budget::default());
        assert!(matches!(d.status, Status::Success(_)));
        let so = d.step_origins();
        assert_eq!(so, vec![0, 0, 0, 1, 1, 1, 1, 1]);
    }
}
