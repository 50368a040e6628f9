//! Martelli–Montanari unification with occurs check.
//!
//! Equations are processed front to back and every binding is applied
//! eagerly to the remaining equations and to the solved part, so the result
//! is an idempotent mgu whose variables all come from the input terms.
//!
//! Variable–variable equations are oriented deterministically: a variable in
//! the *protected* set is only bound when the other side is a non-variable
//! term or is itself protected; otherwise the variable with the larger id is
//! bound to the smaller one. Protecting the input variables of a selected atom
//! yields an mgu that fixes those inputs whenever some mgu does.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::subst::Substitution;
use crate::term::{Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnifyError {
    #[error("functor clash between {0} and {1}")]
    Clash(Term, Term),
    #[error("occurs check: {0} occurs in {1}")]
    Occurs(Var, Term),
    #[error("sequences of different length ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// Most general unifier of two term sequences.
pub fn unify(lhs: &[Term], rhs: &[Term]) -> Result<Substitution, UnifyError> {
    unify_protecting(lhs, rhs, &BTreeSet::new())
}

pub fn unify_terms(a: &Term, b: &Term) -> Result<Substitution, UnifyError> {
    unify(std::slice::from_ref(a), std::slice::from_ref(b))
}

/// Most general unifier that avoids binding `protected` variables where the
/// equations leave a choice.
pub fn unify_protecting(
    lhs: &[Term],
    rhs: &[Term],
    protected: &BTreeSet<Var>,
) -> Result<Substitution, UnifyError> {
    if lhs.len() != rhs.len() {
        return Err(UnifyError::LengthMismatch(lhs.len(), rhs.len()));
    }
    let mut eqs: VecDeque<(Term, Term)> = lhs.iter().cloned().zip(rhs.iter().cloned()).collect();
    let mut solved = Substitution::new();

    while let Some((a, b)) = eqs.pop_front() {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), Term::Var(y)) => {
                let (bound, to) = orient(x, y, protected);
                bind(&mut eqs, &mut solved, bound, Term::Var(to));
            }
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if t.occurs(x) {
                    return Err(UnifyError::Occurs(x, t));
                }
                bind(&mut eqs, &mut solved, x, t);
            }
            (Term::Int(m), Term::Int(n)) => {
                if m != n {
                    return Err(UnifyError::Clash(Term::Int(m), Term::Int(n)));
                }
            }
            (Term::App(f, fa), Term::App(g, ga)) => {
                if f != g || fa.len() != ga.len() {
                    return Err(UnifyError::Clash(Term::App(f, fa), Term::App(g, ga)));
                }
                for pair in fa.into_iter().zip(ga).rev() {
                    eqs.push_front(pair);
                }
            }
            (a, b) => return Err(UnifyError::Clash(a, b)),
        }
    }
    Ok(solved)
}

/// Returns `(bound, target)` for a variable–variable equation.
fn orient(x: Var, y: Var, protected: &BTreeSet<Var>) -> (Var, Var) {
    match (protected.contains(&x), protected.contains(&y)) {
        (true, false) => (y, x),
        (false, true) => (x, y),
        _ if x > y => (x, y),
        _ => (y, x),
    }
}

fn bind(eqs: &mut VecDeque<(Term, Term)>, solved: &mut Substitution, x: Var, t: Term) {
    let single = Substitution::from_bindings([(x, t.clone())]);
    for (l, r) in eqs.iter_mut() {
        if l.occurs(x) {
            *l = single.apply(l);
        }
        if r.occurs(x) {
            *r = single.apply(r);
        }
    }
    let updated: Vec<(Var, Term)> = solved.iter().map(|(v, s)| (*v, single.apply(s))).collect();
    *solved = Substitution::from_bindings(updated);
    solved.insert(x, t);
}

/// Checks that `theta` is relevant for the given sequences:
/// Var(θ) ⊆ Var(lhs) ∪ Var(rhs).
pub fn is_relevant(theta: &Substitution, lhs: &[Term], rhs: &[Term]) -> bool {
    let mut allowed = crate::term::vars_of(lhs);
    allowed.extend(crate::term::vars_of(rhs));
    theta.vars().is_subset(&allowed)
}
