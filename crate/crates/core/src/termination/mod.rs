//! Moded level mappings over term sizes, the quasi-recurrency check,
//! level-mapping inference, the termination theorems and the necessity probe.

mod probe;
mod prove;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modes::DepGraph;
use crate::program::{is_builtin, Atom, ModedProgram, Pred};
use crate::term::{tsize, Term, Var, VarNames};

pub use probe::{necessity_probe, ProbeConfig, ProbeReport, ProbeSample};
pub use prove::{
    prove_input_termination, Base, BaseEvidence, Certificate, FailedHypothesis, Hypothesis,
    TheoremReport,
};

/// `constant + Σ coeff(x)·TSize(xθ)`, as a function of the instantiation θ.
/// Differences of sizes may have negative entries.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SymbolicSize {
    pub constant: i64,
    /// Zero coefficients are never stored.
    pub coeffs: BTreeMap<Var, i64>,
}

impl SymbolicSize {
    pub fn constant(c: i64) -> Self {
        SymbolicSize {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn coeff(&self, v: Var) -> i64 {
        self.coeffs.get(&v).copied().unwrap_or(0)
    }

    fn add_var(&mut self, v: Var, k: i64) {
        let e = self.coeffs.entry(v).or_insert(0);
        *e += k;
        if *e == 0 {
            self.coeffs.remove(&v);
        }
    }

    pub fn add_scaled(&mut self, other: &SymbolicSize, k: i64) {
        self.constant += k * other.constant;
        for (&v, &c) in &other.coeffs {
            self.add_var(v, k * c);
        }
    }

    pub fn minus(&self, other: &SymbolicSize) -> SymbolicSize {
        let mut out = self.clone();
        out.add_scaled(other, -1);
        out
    }

    /// Value under an assignment of sizes to variables.
    pub fn eval(&self, size_of: impl Fn(Var) -> u64) -> i64 {
        self.constant
            + self
                .coeffs
                .iter()
                .map(|(&v, &k)| k * size_of(v) as i64)
                .sum::<i64>()
    }

    pub fn display<'a>(&'a self, names: &'a VarNames) -> SymbolicDisplay<'a> {
        SymbolicDisplay { size: self, names }
    }
}

pub struct SymbolicDisplay<'a> {
    size: &'a SymbolicSize,
    names: &'a VarNames,
}

impl fmt::Display for SymbolicDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.size.constant)?;
        for (&v, &k) in &self.size.coeffs {
            let sign = if k < 0 { '-' } else { '+' };
            let name = Term::Var(v).display(self.names).to_string();
            match k.abs() {
                1 => write!(f, " {sign} {name}")?,
                a => write!(f, " {sign} {a}{name}")?,
            }
        }
        Ok(())
    }
}

/// TSize as a linear expression: one per symbol, plus each variable
/// weighted by its number of occurrences.
pub fn symbolic_tsize(t: &Term) -> SymbolicSize {
    let mut out = SymbolicSize::constant(tsize(t) as i64);
    t.for_each_var(&mut |v| out.add_var(v, 1));
    out
}

/// Level of one predicate: `constant + Σ coefficients[i]·TSize(arg_i)` over
/// input positions. Coefficients at output positions are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredLevel {
    pub coefficients: Vec<u64>,
    pub constant: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LevelMapping {
    pub entries: BTreeMap<Pred, PredLevel>,
}

impl LevelMapping {
    /// The `:- level` declarations of a program; output positions get 0.
    pub fn from_program(program: &ModedProgram) -> LevelMapping {
        let entries = program
            .levels
            .iter()
            .map(|d| {
                (
                    d.pred.clone(),
                    PredLevel {
                        coefficients: d.coefficients.iter().map(|c| c.unwrap_or(0)).collect(),
                        constant: d.constant,
                    },
                )
            })
            .collect();
        LevelMapping { entries }
    }

    pub fn set(&mut self, pred: Pred, level: PredLevel) {
        self.entries.insert(pred, level);
    }

    /// Defined predicates without an entry (they get the zero mapping).
    pub fn missing(&self, program: &ModedProgram) -> Vec<Pred> {
        program
            .defined()
            .into_iter()
            .filter(|p| !self.entries.contains_key(p))
            .collect()
    }

    pub fn level_of(&self, program: &ModedProgram, atom: &Atom) -> SymbolicSize {
        let mut out = SymbolicSize::default();
        let Some(l) = self.entries.get(&atom.key()) else {
            return out;
        };
        out.constant = l.constant as i64;
        for i in program.mode_of(atom).input_positions() {
            let k = l.coefficients.get(i).copied().unwrap_or(0) as i64;
            if k != 0 {
                out.add_scaled(&symbolic_tsize(&atom.args[i]), k);
            }
        }
        out
    }

    /// Concrete level of an atom, counting variables as size 0.
    pub fn concrete_level(&self, program: &ModedProgram, atom: &Atom) -> u64 {
        let Some(l) = self.entries.get(&atom.key()) else {
            return 0;
        };
        l.constant
            + program
                .mode_of(atom)
                .input_positions()
                .map(|i| l.coefficients.get(i).copied().unwrap_or(0) * tsize(&atom.args[i]))
                .sum::<u64>()
    }

    /// `|app(x1,x2,_)| = TSize(x1)` style lines.
    pub fn describe(&self, program: &ModedProgram) -> Vec<String> {
        self.entries
            .iter()
            .map(|(p, l)| {
                let mode = program.mode(p);
                let args: Vec<String> = (0..p.arity)
                    .map(|i| match &mode {
                        Some(m) if !m.is_input(i) => "_".to_string(),
                        _ => format!("x{}", i + 1),
                    })
                    .collect();
                let mut terms: Vec<String> = Vec::new();
                for (i, &k) in l.coefficients.iter().enumerate() {
                    let input = mode.as_ref().map_or(true, |m| m.is_input(i));
                    if k == 0 || !input {
                        continue;
                    }
                    terms.push(if k == 1 {
                        format!("TSize(x{})", i + 1)
                    } else {
                        format!("{k}·TSize(x{})", i + 1)
                    });
                }
                if l.constant != 0 || terms.is_empty() {
                    terms.push(l.constant.to_string());
                }
                let lhs = if p.arity == 0 {
                    format!("|{}|", p.name)
                } else {
                    format!("|{}({})|", p.name, args.join(","))
                };
                format!("{lhs} = {}", terms.join(" + "))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Offending {
    NegativeCoefficient { var: Var, coefficient: i64 },
    ConstantTooSmall(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QrVerdict {
    Proven,
    Unknown(Offending),
}

/// One constrained (clause, body atom) pair with Rel(H) ≃ Rel(B).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrEntry {
    pub clause: usize,
    pub body_atom: usize,
    pub head: Pred,
    pub body: Pred,
    /// |H| − |B|.
    pub difference: SymbolicSize,
    pub verdict: QrVerdict,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QrReport {
    pub entries: Vec<QrEntry>,
    /// Defined predicates that defaulted to the zero mapping.
    pub missing: Vec<Pred>,
}

impl QrReport {
    pub fn all_proven(&self) -> bool {
        self.entries.iter().all(|e| e.verdict == QrVerdict::Proven)
    }

    pub fn first_unknown(&self) -> Option<&QrEntry> {
        self.entries.iter().find(|e| e.verdict != QrVerdict::Proven)
    }
}

/// Sound check of |H| − |B| > 0 for all instances: every coefficient of the
/// difference must be non-negative and its constant at least 1.
pub fn judge(difference: &SymbolicSize) -> QrVerdict {
    if let Some((&var, &coefficient)) = difference.coeffs.iter().find(|(_, &k)| k < 0) {
        return QrVerdict::Unknown(Offending::NegativeCoefficient { var, coefficient });
    }
    if difference.constant < 1 {
        return QrVerdict::Unknown(Offending::ConstantTooSmall(difference.constant));
    }
    QrVerdict::Proven
}

/// The (clause, body atom) pairs constrained by quasi-recurrency.
pub fn recursive_pairs(program: &ModedProgram, graph: &DepGraph) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (ci, c) in program.clauses.iter().enumerate() {
        let h = c.head.key();
        for (bi, b) in c.body.iter().enumerate() {
            if graph.mutual(&h, &b.key()) {
                out.push((ci, bi));
            }
        }
    }
    out
}

pub fn check_quasi_recurrent(
    program: &ModedProgram,
    mapping: &LevelMapping,
    graph: &DepGraph,
) -> QrReport {
    check_pairs(program, mapping, &recursive_pairs(program, graph))
}

fn check_pairs(
    program: &ModedProgram,
    mapping: &LevelMapping,
    pairs: &[(usize, usize)],
) -> QrReport {
    let entries = pairs
        .iter()
        .map(|&(ci, bi)| {
            let c = &program.clauses[ci];
            let b = &c.body[bi];
            let difference = mapping
                .level_of(program, &c.head)
                .minus(&mapping.level_of(program, b));
            QrEntry {
                clause: ci,
                body_atom: bi,
                head: c.head.key(),
                body: b.key(),
                verdict: judge(&difference),
                difference,
            }
        })
        .collect();
    QrReport {
        entries,
        missing: mapping.missing(program),
    }
}

/// Largest number of candidates tried per component.
pub const MAX_CANDIDATES_LOG2: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{positions} input positions in component {component:?} give more than 2^20 candidates")]
pub struct SearchSpaceTooLarge {
    pub component: Vec<Pred>,
    pub positions: usize,
}

/// Every mapping with {0,1} coefficients and constant 0 for the component
/// containing `pred`, in search order (fewest coefficients first, then
/// earlier positions first). Other predicates are left unmapped.
pub fn family_mappings(
    program: &ModedProgram,
    graph: &DepGraph,
    pred: &Pred,
) -> Result<Vec<LevelMapping>, SearchSpaceTooLarge> {
    let Some(ci) = graph.component_of(pred) else {
        return Ok(vec![LevelMapping::default()]);
    };
    let comp = &graph.components()[ci];
    component_candidates(program, comp)
}

fn component_candidates(
    program: &ModedProgram,
    comp: &[Pred],
) -> Result<Vec<LevelMapping>, SearchSpaceTooLarge> {
    let preds: Vec<&Pred> = comp
        .iter()
        .filter(|p| program.is_defined(p) && !is_builtin(p))
        .collect();
    let slots: Vec<(usize, usize)> = preds
        .iter()
        .enumerate()
        .flat_map(|(pi, p)| {
            let mode = program.mode(p).expect("defined predicates have modes");
            mode.input_positions()
                .map(move |pos| (pi, pos))
                .collect::<Vec<_>>()
        })
        .collect();
    let k = slots.len();
    if k > MAX_CANDIDATES_LOG2 {
        return Err(SearchSpaceTooLarge {
            component: comp.to_vec(),
            positions: k,
        });
    }
    // bit (k-1-s) stands for slot s, so larger masks prefer earlier slots
    let mut masks: Vec<u32> = (0..(1u32 << k)).collect();
    masks.sort_by_key(|&m| (m.count_ones(), std::cmp::Reverse(m)));
    Ok(masks
        .into_iter()
        .map(|m| {
            let mut l = LevelMapping::default();
            for p in &preds {
                l.set(
                    (*p).clone(),
                    PredLevel {
                        coefficients: vec![0; p.arity],
                        constant: 0,
                    },
                );
            }
            for (s, &(pi, pos)) in slots.iter().enumerate() {
                if m & (1 << (k - 1 - s)) != 0 {
                    l.entries.get_mut(preds[pi]).unwrap().coefficients[pos] = 1;
                }
            }
            l
        })
        .collect())
}

/// Searches {0,1}-coefficient mappings (constant 0) component by component;
/// returns the first mapping that makes every constrained pair Proven.
pub fn infer_level_mapping(
    program: &ModedProgram,
    graph: &DepGraph,
) -> Result<Option<LevelMapping>, SearchSpaceTooLarge> {
    let pairs = recursive_pairs(program, graph);
    let comps = graph.components();
    let found: Vec<Result<Option<LevelMapping>, SearchSpaceTooLarge>> = comps
        .par_iter()
        .map(|comp| {
            let members: BTreeSet<&Pred> = comp.iter().collect();
            let local: Vec<(usize, usize)> = pairs
                .iter()
                .copied()
                .filter(|&(ci, _)| members.contains(&program.clauses[ci].head.key()))
                .collect();
            for cand in component_candidates(program, comp)? {
                if check_pairs(program, &cand, &local).all_proven() {
                    return Ok(Some(cand));
                }
            }
            Ok(None)
        })
        .collect();
    let mut mapping = LevelMapping::default();
    for r in found {
        match r? {
            Some(l) => mapping.entries.extend(l.entries),
            None => return Ok(None),
        }
    }
    Ok(Some(mapping))
}
