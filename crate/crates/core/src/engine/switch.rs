//! Swapping two adjacent steps so that the left atom is resolved first, and
//! repeated swapping to move all steps of a query prefix to the front.

use thiserror::Error;

use crate::program::ModedProgram;
use crate::term::{variant_eq, Term};

use super::{ic_step_with, Derivation, DerivationStep, Status, StepError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SwitchError {
    #[error("pattern mismatch: {0}")]
    PatternMismatch(String),
    #[error("switched step on the left atom is not input-consuming: {0}")]
    FirstStep(StepError),
    #[error("switched step on the right atom is not input-consuming: {0}")]
    SecondStep(StepError),
    #[error("replaying step {step} after the switch failed: {error}")]
    Replay { step: usize, error: StepError },
}

/// Given steps `n` and `n + 1` (0-based) where step `n` resolves an atom D
/// and step `n + 1` resolves an atom B standing left of D and untouched by
/// step `n`, returns the derivation that resolves B first and then D with
/// the same input clauses. Later steps are kept, or replayed with their input
/// clauses when the new Q_{n+2} differs syntactically from the old one.
pub fn left_switch(
    program: &ModedProgram,
    d: &Derivation,
    n: usize,
) -> Result<Derivation, SwitchError> {
    if n + 1 >= d.steps.len() {
        return Err(SwitchError::PatternMismatch(format!(
            "no steps {} and {} in a derivation of length {}",
            n + 1,
            n + 2,
            d.steps.len()
        )));
    }
    let first = &d.steps[n];
    let second = &d.steps[n + 1];
    let (j, i) = (first.selected, second.selected);
    if i >= j {
        return Err(SwitchError::PatternMismatch(format!(
            "step {} selects atom {} which is not left of atom {} selected by step {}",
            n + 2,
            i + 1,
            j + 1,
            n + 1
        )));
    }
    if first.resolvent.atoms[i] != first.source.atoms[i] {
        return Err(SwitchError::PatternMismatch(format!(
            "atom {} is instantiated by step {}",
            i + 1,
            n + 1
        )));
    }

    let qn = &first.source;
    let b_step = ic_step_with(program, qn, i, second.clause, second.input_clause.as_ref())
        .map_err(SwitchError::FirstStep)?;
    let d_pos = j + b_step.body_len() - 1;
    let d_step = ic_step_with(
        program,
        &b_step.resolvent,
        d_pos,
        first.clause,
        first.input_clause.as_ref(),
    )
    .map_err(SwitchError::SecondStep)?;

    let mut steps: Vec<DerivationStep> = d.steps[..n].to_vec();
    let unchanged = d_step.resolvent == second.resolvent;
    steps.push(b_step);
    steps.push(d_step);
    if unchanged {
        steps.extend(d.steps[n + 2..].iter().cloned());
    } else {
        for (k, s) in d.steps.iter().enumerate().skip(n + 2) {
            let current = &steps.last().unwrap().resolvent;
            let replayed = ic_step_with(
                program,
                current,
                s.selected,
                s.clause,
                s.input_clause.as_ref(),
            )
            .map_err(|error| SwitchError::Replay { step: k + 1, error })?;
            steps.push(replayed);
        }
    }
    let mut out = Derivation {
        initial: d.initial.clone(),
        steps,
        status: d.status.clone(),
    };
    if out.status != Status::BudgetExhausted {
        out.settle(program);
    }
    Ok(out)
}

/// Checks θ_{n+1}θ_{n+2} = θ'_{n+1}θ'_{n+2} up to renaming, on every
/// variable of Q_n and of both input clauses, and that Q_{n+2} is preserved
/// up to renaming.
pub fn switch_agrees(original: &Derivation, switched: &Derivation, n: usize) -> bool {
    let (a, b) = (&original.steps[n], &original.steps[n + 1]);
    let (a2, b2) = (&switched.steps[n], &switched.steps[n + 1]);
    let mut terms: Vec<Term> = a.source.as_terms();
    for c in [&a.input_clause, &b.input_clause].into_iter().flatten() {
        terms.extend(c.as_terms());
    }
    let vars: Vec<Term> = crate::term::ordered_vars(&terms)
        .into_iter()
        .map(Term::Var)
        .collect();
    let before = a.mgu.compose(&b.mgu);
    let after = a2.mgu.compose(&b2.mgu);
    let mut lhs = before.apply_all(&vars);
    let mut rhs = after.apply_all(&vars);
    lhs.extend(b.resolvent.as_terms());
    rhs.extend(b2.resolvent.as_terms());
    variant_eq(&lhs, &rhs)
}

/// True when every step on an atom descending from the first `split` atoms
/// of the initial query precedes every other step.
pub fn is_normalized(d: &Derivation, split: usize) -> bool {
    let so = d.step_origins();
    !so.windows(2).any(|w| w[0] >= split && w[1] < split)
}

/// Repeatedly left-switches adjacent (right-atom, left-atom) step pairs until
/// all steps on the first `split` initial atoms come first.
pub fn normalize_prefix(
    program: &ModedProgram,
    d: &Derivation,
    split: usize,
) -> Result<Derivation, SwitchError> {
    if split > d.initial.len() {
        return Err(SwitchError::PatternMismatch(format!(
            "split {} beyond a query of {} atoms",
            split,
            d.initial.len()
        )));
    }
    let mut current = d.clone();
    loop {
        let so = current.step_origins();
        let next = so.windows(2).position(|w| w[0] >= split && w[1] < split);
        match next {
            None => return Ok(current),
            Some(k) => current = left_switch(program, &current, k)?,
        }
    }
}
