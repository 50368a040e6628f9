//! Random queries and random input-consuming derivations over the bundled
//! programs, plus the per-step and switching checks shared by the property
//! tests and the acceptance runner.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use icterm_core::corpus::bundled;
use icterm_core::engine::{
    candidates, is_normalized, left_switch, normalize_prefix, switch_agrees, Derivation,
};
use icterm_core::ictree::build_ic_tree;
use icterm_core::modes::{
    check_nicely_moded, check_nicely_moded_program, check_simply_moded, check_simply_moded_program,
    permute_program, Target,
};
use icterm_core::program::{Atom, ModedProgram, Pred, Query};
use icterm_core::term::{variant_eq, Term, Var};

pub struct Subject {
    pub name: String,
    pub program: ModedProgram,
    pub simply_moded: bool,
}

/// Nicely-moded bundled programs; those that are only nicely-moded after a
/// body permutation are included in permuted form.
pub fn subjects() -> Vec<Subject> {
    bundled()
        .into_iter()
        .filter_map(|e| {
            let p = e.program().unwrap();
            let p = if check_nicely_moded_program(&p).holds {
                p
            } else {
                permute_program(&p, Target::NicelyModed).ok()??.0
            };
            Some(Subject {
                name: e.name,
                simply_moded: check_simply_moded_program(&p).holds,
                program: p,
            })
        })
        .collect()
}

struct QueryGen<'a> {
    rng: &'a mut ChaCha8Rng,
    next: u32,
    outputs: Vec<Var>,
}

impl QueryGen<'_> {
    fn fresh(&mut self) -> Var {
        let v = Var(self.next);
        self.next += 1;
        v
    }

    fn constant(&mut self) -> Term {
        match self.rng.gen_range(0..6) {
            0 => Term::constant("a"),
            1 => Term::constant("b"),
            2 => Term::nil(),
            n => Term::Int(n as i64 - 2),
        }
    }

    fn input(&mut self, depth: usize) -> Term {
        match self.rng.gen_range(0..10) {
            0 | 1 => Term::Var(if !self.outputs.is_empty() && self.rng.gen_bool(0.5) {
                *self.outputs.choose(self.rng).unwrap()
            } else {
                self.fresh()
            }),
            2 | 3 => self.constant(),
            _ if depth == 0 => self.constant(),
            _ => {
                let n = self.rng.gen_range(0..=4);
                let items: Vec<Term> = (0..n).map(|_| self.input(depth - 1)).collect();
                let tail = if self.rng.gen_bool(0.8) {
                    Term::nil()
                } else {
                    Term::Var(self.fresh())
                };
                Term::list_with_tail(items, tail)
            }
        }
    }

    fn output(&mut self, simply: bool) -> Term {
        if simply || self.rng.gen_bool(0.7) {
            let v = self.fresh();
            self.outputs.push(v);
            return Term::Var(v);
        }
        if self.rng.gen_bool(0.5) {
            self.constant()
        } else {
            let (h, t) = (self.fresh(), self.fresh());
            self.outputs.extend([h, t]);
            Term::cons(Term::Var(h), Term::Var(t))
        }
    }
}

/// A random query of 1 to 3 atoms over the program's defined predicates:
/// outputs are fresh (variables when `simply`), inputs are built from
/// constants, short lists, fresh variables and earlier outputs.
pub fn random_query(p: &ModedProgram, rng: &mut ChaCha8Rng, simply: bool) -> Query {
    random_query_sized(p, rng, simply, 3)
}

/// As [`random_query`], with input terms nested at most `depth` deep.
pub fn random_query_sized(
    p: &ModedProgram,
    rng: &mut ChaCha8Rng,
    simply: bool,
    depth: usize,
) -> Query {
    let preds: Vec<Pred> = p.defined().into_iter().collect();
    loop {
        let mut g = QueryGen {
            rng: &mut *rng,
            next: 0,
            outputs: Vec::new(),
        };
        let n = g.rng.gen_range(1..=3);
        let mut atoms = Vec::new();
        for _ in 0..n {
            let pred = preds.choose(g.rng).unwrap().clone();
            let mode = p.mode(&pred).unwrap();
            // inputs first, so they cannot see this atom's own outputs
            let mut args = vec![Term::nil(); pred.arity];
            for i in mode.input_positions() {
                args[i] = g.input(depth);
            }
            for i in mode.output_positions() {
                args[i] = g.output(simply);
            }
            atoms.push(Atom::new(&pred.name, args));
        }
        let q = Query::new(atoms);
        let ok = if simply {
            check_simply_moded(p, &q).holds
        } else {
            check_nicely_moded(p, &q).holds
        };
        if ok {
            return q;
        }
    }
}

/// An input-consuming derivation choosing uniformly among all resolvable
/// (atom, clause) pairs at each step.
pub fn random_derivation(
    p: &ModedProgram,
    q: &Query,
    rng: &mut ChaCha8Rng,
    max_steps: usize,
) -> Derivation {
    let mut gen = p.var_gen_for(q);
    let mut d = Derivation::new(q.clone());
    for _ in 0..max_steps {
        let current = d.final_query().clone();
        let mut cands = candidates(p, &current, &mut gen);
        if cands.is_empty() {
            break;
        }
        let k = rng.gen_range(0..cands.len());
        d.steps.push(cands.swap_remove(k).into_step(&current));
    }
    d.settle(p);
    d
}

#[derive(Debug, Default, Clone, Copy)]
pub struct StepTally {
    pub steps: usize,
    pub nm_persistence: usize,
    pub sm_persistence: usize,
    pub non_outputs_fixed: usize,
    pub one_atom_inputs: usize,
    pub left_unchanged: usize,
}

impl StepTally {
    pub fn add(&mut self, o: &StepTally) {
        self.steps += o.steps;
        self.nm_persistence += o.nm_persistence;
        self.sm_persistence += o.sm_persistence;
        self.non_outputs_fixed += o.non_outputs_fixed;
        self.one_atom_inputs += o.one_atom_inputs;
        self.left_unchanged += o.left_unchanged;
    }
}

/// Checks every step of `d` (from a nicely-moded query) for persistence of
/// nice/simple modedness, untouched non-output variables and unchanged
/// atoms left of the selected one. Returns the number of checks made, or
/// the first violation.
pub fn check_steps(
    p: &ModedProgram,
    sm_program: bool,
    d: &Derivation,
) -> Result<StepTally, String> {
    d.validate(p)?;
    let q0 = &d.initial;
    let out_vars: BTreeSet<Var> = q0.atoms.iter().flat_map(|a| p.output_vars(a)).collect();
    let fixed: Vec<Var> = q0.vars().difference(&out_vars).copied().collect();
    let sm_query = sm_program && check_simply_moded(p, q0).holds;
    let mut t = StepTally::default();
    let mut composed = icterm_core::subst::Substitution::new();
    for (k, s) in d.steps.iter().enumerate() {
        t.steps += 1;
        if check_nicely_moded(p, &s.source).holds {
            if !check_nicely_moded(p, &s.resolvent).holds {
                return Err(format!("step {}: resolvent not nicely-moded", k + 1));
            }
            t.nm_persistence += 1;
        }
        if sm_query {
            if !check_simply_moded(p, &s.resolvent).holds {
                return Err(format!("step {}: resolvent not simply-moded", k + 1));
            }
            t.sm_persistence += 1;
        }
        if s.resolvent.atoms[..s.selected] != s.source.atoms[..s.selected] {
            return Err(format!(
                "step {}: an atom left of the selected one changed",
                k + 1
            ));
        }
        t.left_unchanged += 1;
        composed = composed.compose(&s.mgu);
        for &x in &fixed {
            if composed.apply(&Term::Var(x)) != Term::Var(x) {
                return Err(format!("step {}: non-output variable {x} bound", k + 1));
            }
        }
        t.non_outputs_fixed += 1;
        if q0.len() == 1 {
            for x in p.input_vars(&q0.atoms[0]) {
                if composed.apply(&Term::Var(x)) != Term::Var(x) {
                    return Err(format!("step {}: input variable {x} bound", k + 1));
                }
            }
            t.one_atom_inputs += 1;
        }
    }
    Ok(t)
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SwitchTally {
    pub switches: usize,
    pub normalizations: usize,
}

fn initial_image(d: &Derivation) -> Vec<Term> {
    let vars: Vec<Term> = d.initial.vars().into_iter().map(Term::Var).collect();
    let mut out = d.composed().apply_all(&vars);
    out.extend(d.final_query().as_terms());
    out
}

fn b_step_counts(d: &Derivation) -> Vec<usize> {
    let mut counts = vec![0; d.initial.len()];
    for o in d.step_origins() {
        counts[o] += 1;
    }
    counts
}

/// Every applicable left switch of `d` and every prefix normalization,
/// re-validated from scratch.
pub fn check_switching(p: &ModedProgram, d: &Derivation) -> Result<SwitchTally, String> {
    let mut t = SwitchTally::default();
    for n in 0..d.steps.len().saturating_sub(1) {
        if d.steps[n + 1].selected >= d.steps[n].selected {
            continue;
        }
        let s = left_switch(p, d, n).map_err(|e| format!("switch at {n}: {e}"))?;
        s.validate(p)
            .map_err(|e| format!("switch at {n}: not input-consuming: {e}"))?;
        if !switch_agrees(d, &s, n) {
            return Err(format!("switch at {n}: composed mgus or Q_(n+2) differ"));
        }
        if s.steps[n].selected != d.steps[n + 1].selected
            || s.steps[n].clause != d.steps[n + 1].clause
            || s.steps[n + 1].clause != d.steps[n].clause
        {
            return Err(format!("switch at {n}: roles not swapped"));
        }
        if !variant_eq(&initial_image(d), &initial_image(&s)) {
            return Err(format!("switch at {n}: final query or answer changed"));
        }
        t.switches += 1;
    }
    for split in 1..d.initial.len() {
        let nd = normalize_prefix(p, d, split).map_err(|e| format!("normalize {split}: {e}"))?;
        nd.validate(p)
            .map_err(|e| format!("normalize {split}: not input-consuming: {e}"))?;
        if !is_normalized(&nd, split) {
            return Err(format!("normalize {split}: not a fixpoint"));
        }
        if !variant_eq(&initial_image(d), &initial_image(&nd)) {
            return Err(format!("normalize {split}: final query or answer changed"));
        }
        if b_step_counts(d) != b_step_counts(&nd) {
            return Err(format!("normalize {split}: steps per initial atom changed"));
        }
        let again = normalize_prefix(p, &nd, split).map_err(|e| e.to_string())?;
        if again != nd {
            return Err(format!(
                "normalize {split}: second pass changed the derivation"
            ));
        }
        t.normalizations += 1;
    }
    Ok(t)
}

/// On a complete IC-tree: every proper subtree is smaller than the whole
/// tree, no single atom's tree is larger than the query's, and no node has
/// more than atoms × (clauses + 1) children. `Ok(None)` when the tree is cut.
pub fn check_tree_bounds(
    p: &ModedProgram,
    q: &Query,
    budget: usize,
) -> Result<Option<usize>, String> {
    let t = build_ic_tree(p, q, budget);
    let Some(total) = t.nodes_count() else {
        return Ok(None);
    };
    let sizes = t.subtree_sizes();
    if let Some(i) = (1..sizes.len()).find(|&i| sizes[i] >= total) {
        return Err(format!(
            "subtree at node {i} has {} of {total} nodes",
            sizes[i]
        ));
    }
    for a in &q.atoms {
        let single = build_ic_tree(p, &Query::new(vec![a.clone()]), budget);
        match single.nodes_count() {
            Some(k) if k > total => {
                return Err(format!(
                    "tree of one atom has {k} nodes, the query's {total}"
                ))
            }
            Some(_) => {}
            None => return Err("tree of one atom cut while the query's is complete".into()),
        }
    }
    for n in &t.nodes {
        if n.children.len() > n.query.len() * (p.clauses.len() + 1) {
            return Err("node with too many children".into());
        }
    }
    Ok(Some(total))
}
