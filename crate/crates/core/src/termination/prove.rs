//! Mechanical check of the hypotheses of the termination theorems: the
//! program extends its base, the base is input terminating, the program is
//! (permutation) nicely-moded and quasi recurrent.

use std::collections::BTreeSet;
use std::fmt;

use crate::modes::{check_nicely_moded_program, extends, permute_program, DepGraph, Target};
use crate::program::{is_builtin, ModedProgram, Pred};

use super::{check_quasi_recurrent, LevelMapping, QrReport};

/// Why a non-builtin base is taken to be input terminating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseEvidence {
    Asserted,
    Proven,
    Unknown,
}

/// The program R that P is built on.
#[derive(Debug, Clone)]
pub enum Base {
    Empty,
    /// The builtin predicates P uses, as tables of ground facts.
    Builtins,
    Program(ModedProgram, BaseEvidence),
}

impl Base {
    fn relations(&self, p: &ModedProgram) -> BTreeSet<Pred> {
        match self {
            Base::Empty => BTreeSet::new(),
            Base::Builtins => p.relations().into_iter().filter(is_builtin).collect(),
            Base::Program(r, _) => r.relations(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Base::Empty => "empty",
            Base::Builtins => "builtins",
            Base::Program(..) => "program",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hypothesis {
    Extends,
    BaseInputTerminating,
    NicelyModed,
    QuasiRecurrent,
    SimplyModed,
    InputRecursive,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::Extends => "extends",
            Hypothesis::BaseInputTerminating => "base-input-terminating",
            Hypothesis::NicelyModed => "nicely-moded",
            Hypothesis::QuasiRecurrent => "quasi-recurrent",
            Hypothesis::SimplyModed => "simply-moded",
            Hypothesis::InputRecursive => "input-recursive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailedHypothesis {
    pub hypothesis: Hypothesis,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub mapping: LevelMapping,
    pub qr: QrReport,
    /// Body permutations applied to make the program nicely-moded, if any.
    pub permutations: Option<Vec<Vec<usize>>>,
    pub base: &'static str,
}

#[derive(Debug, Clone)]
pub enum TheoremReport {
    Proven(Certificate),
    NotProven(Vec<FailedHypothesis>),
}

impl TheoremReport {
    pub fn is_proven(&self) -> bool {
        matches!(self, TheoremReport::Proven(_))
    }

    pub fn failed(&self) -> Vec<Hypothesis> {
        match self {
            TheoremReport::Proven(_) => Vec::new(),
            TheoremReport::NotProven(f) => f.iter().map(|h| h.hypothesis).collect(),
        }
    }
}

/// Checks every hypothesis (none is skipped after a failure, so the report
/// lists all of them) and returns a certificate when they all hold.
pub fn prove_input_termination(
    program: &ModedProgram,
    base: &Base,
    mapping: &LevelMapping,
) -> TheoremReport {
    let mut failed = Vec::new();
    let r_rel = base.relations(program);
    if !extends(program, &r_rel) {
        let clash: Vec<String> = program
            .defined()
            .intersection(&r_rel)
            .map(|p| p.to_string())
            .collect();
        failed.push(FailedHypothesis {
            hypothesis: Hypothesis::Extends,
            detail: format!("defined in both: {}", clash.join(", ")),
        });
    }
    if let Base::Program(_, ev) = base {
        if *ev == BaseEvidence::Unknown {
            failed.push(FailedHypothesis {
                hypothesis: Hypothesis::BaseInputTerminating,
                detail: "base program not known to be input terminating".into(),
            });
        }
    }

    let mut permutations = None;
    let mut subject = program.clone();
    let mut nm_programs: Vec<&ModedProgram> = vec![program];
    if let Base::Program(r, _) = base {
        nm_programs.push(r);
    }
    for (k, p) in nm_programs.into_iter().enumerate() {
        let nm = check_nicely_moded_program(p);
        if nm.holds {
            continue;
        }
        match permute_program(p, Target::NicelyModed) {
            Ok(Some((permuted, perms))) => {
                if k == 0 {
                    subject = permuted;
                    permutations = Some(perms);
                }
            }
            Ok(None) => {
                let names = &p.names;
                failed.push(FailedHypothesis {
                    hypothesis: Hypothesis::NicelyModed,
                    detail: format!(
                        "{}{} (no body permutation helps)",
                        if k == 0 { "" } else { "base: " },
                        nm.witness.map(|w| w.describe(names)).unwrap_or_default()
                    ),
                });
            }
            Err(e) => failed.push(FailedHypothesis {
                hypothesis: Hypothesis::NicelyModed,
                detail: e.to_string(),
            }),
        }
    }

    let graph = DepGraph::build(&subject);
    let qr = check_quasi_recurrent(&subject, mapping, &graph);
    if let Some(e) = qr.first_unknown() {
        let h = &subject.clauses[e.clause].head;
        failed.push(FailedHypothesis {
            hypothesis: Hypothesis::QuasiRecurrent,
            detail: format!(
                "clause {} body atom {}: |{}| - |{}| = {}",
                e.clause + 1,
                e.body_atom + 1,
                h.display(&subject.names),
                subject.clauses[e.clause].body[e.body_atom].display(&subject.names),
                e.difference.display(&subject.names)
            ),
        });
    }

    if failed.is_empty() {
        TheoremReport::Proven(Certificate {
            mapping: mapping.clone(),
            qr,
            permutations,
            base: base.name(),
        })
    } else {
        TheoremReport::NotProven(failed)
    }
}
