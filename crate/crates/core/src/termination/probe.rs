//! Spot check of the IC-tree level mapping |A| = nodes(A*) on ground
//! instances of recursive clauses.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ictree::{ictree_level, DEFAULT_NODE_BUDGET};
use crate::modes::{check_input_recursive, check_simply_moded_program, DepGraph};
use crate::program::{Atom, ModedProgram};
use crate::subst::Substitution;
use crate::term::Term;

use super::prove::{FailedHypothesis, Hypothesis};
use super::recursive_pairs;

#[derive(Debug, Clone, Copy)]
pub struct ProbeConfig {
    /// Instances per recursive (clause, body atom) pair.
    pub samples_per_pair: usize,
    pub max_depth: usize,
    pub node_budget: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            samples_per_pair: 50,
            max_depth: 3,
            node_budget: DEFAULT_NODE_BUDGET,
            seed: 0x1c7e,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeSample {
    pub clause: usize,
    pub body_atom: usize,
    pub head: Atom,
    pub body: Atom,
    pub head_level: Option<usize>,
    pub body_level: Option<usize>,
}

impl ProbeSample {
    /// Both levels defined and the head's strictly larger.
    pub fn decreases(&self) -> bool {
        matches!((self.head_level, self.body_level), (Some(h), Some(b)) if h > b)
    }

    pub fn undefined(&self) -> bool {
        self.head_level.is_none() || self.body_level.is_none()
    }
}

#[derive(Debug, Clone)]
pub enum ProbeReport {
    Refused(Vec<FailedHypothesis>),
    Ran(Vec<ProbeSample>),
}

impl ProbeReport {
    pub fn samples(&self) -> &[ProbeSample] {
        match self {
            ProbeReport::Refused(_) => &[],
            ProbeReport::Ran(s) => s,
        }
    }

    pub fn violations(&self) -> Vec<&ProbeSample> {
        self.samples()
            .iter()
            .filter(|s| !s.undefined() && !s.decreases())
            .collect()
    }

    pub fn undefined(&self) -> usize {
        self.samples().iter().filter(|s| s.undefined()).count()
    }
}

/// Ground terms are built from the program's constants and functors plus
/// the integers 1 and 2.
struct TermPool {
    constants: Vec<Term>,
    functors: Vec<(String, usize)>,
}

impl TermPool {
    fn of(program: &ModedProgram) -> TermPool {
        let mut constants: BTreeSet<Term> = [Term::nil(), Term::Int(1), Term::Int(2)].into();
        let mut functors: BTreeSet<(String, usize)> = [(crate::term::CONS.to_string(), 2)].into();
        fn walk(t: &Term, c: &mut BTreeSet<Term>, f: &mut BTreeSet<(String, usize)>) {
            match t {
                Term::Var(_) => {}
                Term::Int(_) => {
                    c.insert(t.clone());
                }
                Term::App(_, args) if args.is_empty() => {
                    c.insert(t.clone());
                }
                Term::App(name, args) => {
                    f.insert((name.to_string(), args.len()));
                    for a in args {
                        walk(a, c, f);
                    }
                }
            }
        }
        for cl in &program.clauses {
            for a in std::iter::once(&cl.head).chain(&cl.body) {
                for t in &a.args {
                    walk(t, &mut constants, &mut functors);
                }
            }
        }
        TermPool {
            constants: constants.into_iter().collect(),
            functors: functors.into_iter().collect(),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng, depth: usize) -> Term {
        if depth == 0 || rng.gen_bool(0.3) {
            return self.constants.choose(rng).unwrap().clone();
        }
        let (name, arity) = self.functors.choose(rng).unwrap();
        let args = (0..*arity).map(|_| self.sample(rng, depth - 1)).collect();
        Term::app(name, args)
    }
}

/// For simply-moded, input-recursive programs: grounds the head inputs of
/// each recursive clause at random and compares nodes(H*) with nodes(B*).
pub fn necessity_probe(
    program: &ModedProgram,
    graph: &DepGraph,
    config: &ProbeConfig,
) -> ProbeReport {
    let mut refused = Vec::new();
    let sm = check_simply_moded_program(program);
    if !sm.holds {
        refused.push(FailedHypothesis {
            hypothesis: Hypothesis::SimplyModed,
            detail: sm
                .witness
                .map(|w| w.describe(&program.names))
                .unwrap_or_default(),
        });
    }
    let ir = check_input_recursive(program, graph);
    if !ir.holds {
        refused.push(FailedHypothesis {
            hypothesis: Hypothesis::InputRecursive,
            detail: ir
                .witness
                .map(|w| w.describe(&program.names))
                .unwrap_or_default(),
        });
    }
    if !refused.is_empty() {
        return ProbeReport::Refused(refused);
    }

    let pool = TermPool::of(program);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut samples = Vec::new();
    for (ci, bi) in recursive_pairs(program, graph) {
        let clause = &program.clauses[ci];
        let head_inputs = program.input_vars(&clause.head);
        for _ in 0..config.samples_per_pair {
            let theta = Substitution::from_bindings(
                head_inputs
                    .iter()
                    .map(|&v| (v, pool.sample(&mut rng, config.max_depth))),
            );
            let head = clause.head.apply(&theta);
            let body = clause.body[bi].apply(&theta);
            samples.push(ProbeSample {
                clause: ci,
                body_atom: bi,
                head_level: ictree_level(program, &head, config.node_budget),
                body_level: ictree_level(program, &body, config.node_budget),
                head,
                body,
            });
        }
    }
    ProbeReport::Ran(samples)
}
