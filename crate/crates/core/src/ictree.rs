//! IC-trees: every input-consuming resolvent of a query, expanded breadth
//! first under a node budget, with node counts taken on canonically renamed
//! queries.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::candidates;
use crate::program::{Atom, ClauseRef, ModedProgram, Query};
use crate::subst::Substitution;
use crate::term::{Term, Var, VarGen, VarNames};

pub const DEFAULT_NODE_BUDGET: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Completeness {
    Complete,
    BudgetCut,
}

/// The (atom, clause) pair that produced a node, with the step's mgu.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub atom: usize,
    pub clause: ClauseRef,
    pub mgu: Substitution,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IcNode {
    /// Canonically renamed query.
    pub query: Query,
    pub parent: Option<usize>,
    pub edge: Option<Edge>,
    pub children: Vec<usize>,
    pub depth: usize,
    /// False only for nodes left unexpanded by a budget cut.
    pub expanded: bool,
}

#[derive(Debug, Clone)]
pub struct IcTree {
    /// Nodes in breadth-first order; index 0 is the root.
    pub nodes: Vec<IcNode>,
    pub completeness: Completeness,
    pub budget: usize,
}

/// Builds the IC-tree of `query` breadth first, stopping before the node
/// count would exceed `budget`.
pub fn build_ic_tree(program: &ModedProgram, query: &Query, budget: usize) -> IcTree {
    let budget = budget.max(1);
    let mut nodes = vec![IcNode {
        query: query.canonical(),
        parent: None,
        edge: None,
        children: Vec::new(),
        depth: 0,
        expanded: false,
    }];
    let mut completeness = Completeness::Complete;
    let mut next = 0;
    while next < nodes.len() {
        let q = nodes[next].query.clone();
        let mut gen: VarGen = program.var_gen_for(&q);
        let cands = candidates(program, &q, &mut gen);
        if nodes.len() + cands.len() > budget {
            completeness = Completeness::BudgetCut;
            break;
        }
        let depth = nodes[next].depth + 1;
        for c in cands {
            let edge = Edge {
                atom: c.atom,
                clause: c.clause,
                mgu: c.mgu.clone(),
            };
            let step = c.into_step(&q);
            let id = nodes.len();
            nodes.push(IcNode {
                query: step.resolvent.canonical(),
                parent: Some(next),
                edge: Some(edge),
                children: Vec::new(),
                depth,
                expanded: false,
            });
            nodes[next].children.push(id);
        }
        nodes[next].expanded = true;
        next += 1;
    }
    IcTree {
        nodes,
        completeness,
        budget,
    }
}

impl IcTree {
    pub fn is_complete(&self) -> bool {
        self.completeness == Completeness::Complete
    }

    /// nodes^ic(Q); `None` when the tree was cut.
    pub fn nodes_count(&self) -> Option<usize> {
        self.is_complete().then_some(self.nodes.len())
    }

    /// Nodes actually built, whether or not the tree is complete.
    pub fn built(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> &Query {
        &self.nodes[0].query
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Number of nodes in the subtree rooted at each node.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![1usize; self.nodes.len()];
        for i in (0..self.nodes.len()).rev() {
            if let Some(p) = self.nodes[i].parent {
                sizes[p] += sizes[i];
            }
        }
        sizes
    }

    /// The (atom, clause) choices leading from the root to `node`.
    pub fn path_to(&self, node: usize) -> Vec<(usize, ClauseRef)> {
        let mut path = Vec::new();
        let mut cur = node;
        while let (Some(p), Some(e)) = (self.nodes[cur].parent, &self.nodes[cur].edge) {
            path.push((e.atom, e.clause));
            cur = p;
        }
        path.reverse();
        path
    }

    /// Node with the largest depth (first in breadth-first order).
    pub fn deepest(&self) -> usize {
        let d = self.depth();
        self.nodes.iter().position(|n| n.depth == d).unwrap_or(0)
    }

    /// "N nodes" or "≥N nodes (budget cut)".
    pub fn count_label(&self) -> String {
        match self.nodes_count() {
            Some(n) => format!("{n} nodes"),
            None => format!("≥{} nodes (budget cut)", self.nodes.len()),
        }
    }

    pub fn render(&self) -> String {
        let names = canonical_names(&self.nodes);
        let mut out = String::new();
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let n = &self.nodes[i];
            let indent = "  ".repeat(n.depth);
            let label = match &n.edge {
                Some(e) => format!("[atom {}, {}] ", e.atom + 1, e.clause),
                None => String::new(),
            };
            let cut = if n.expanded { "" } else { " …" };
            let _ = writeln!(out, "{indent}{label}{}{cut}", n.query.display(&names));
            stack.extend(n.children.iter().rev());
        }
        let _ = writeln!(out, "{}", self.count_label());
        out
    }

    pub fn dump(&self) -> TreeDump {
        let names = canonical_names(&self.nodes);
        TreeDump {
            complete: self.is_complete(),
            nodes_count: self.nodes_count(),
            built: self.nodes.len(),
            budget: self.budget,
            depth: self.depth(),
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| NodeDump {
                    id,
                    parent: n.parent,
                    depth: n.depth,
                    atom: n.edge.as_ref().map(|e| e.atom + 1),
                    clause: n.edge.as_ref().map(|e| e.clause.to_string()),
                    query: n.query.display(&names).to_string(),
                    expanded: n.expanded,
                })
                .collect(),
        }
    }
}

fn canonical_names(nodes: &[IcNode]) -> VarNames {
    let top = nodes
        .iter()
        .filter_map(|n| n.query.max_var())
        .max()
        .map_or(0, |v| v.0 + 1);
    (0..top)
        .map(|i| (Var(i), Arc::from(format!("V{i}").as_str())))
        .collect()
}

/// Structured form of a tree for `--dump`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDump {
    pub complete: bool,
    pub nodes_count: Option<usize>,
    pub built: usize,
    pub budget: usize,
    pub depth: usize,
    pub nodes: Vec<NodeDump>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDump {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    /// 1-based atom position in the parent query.
    pub atom: Option<usize>,
    pub clause: Option<String>,
    pub query: String,
    pub expanded: bool,
}

/// A*: output arguments replaced by fresh, distinct variables.
pub fn freshen_outputs(program: &ModedProgram, atom: &Atom) -> Atom {
    let mut gen = VarGen::avoiding(atom.vars().iter());
    let mode = program.mode_of(atom);
    let args = atom
        .args
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if mode.is_input(i) {
                t.clone()
            } else {
                Term::Var(gen.fresh())
            }
        })
        .collect();
    Atom {
        pred: atom.pred.clone(),
        args,
    }
}

/// nodes^ic(A*), or `None` if the tree is cut.
pub fn ictree_level(program: &ModedProgram, atom: &Atom, budget: usize) -> Option<usize> {
    let q = Query::new(vec![freshen_outputs(program, atom)]);
    build_ic_tree(program, &q, budget).nodes_count()
}
