//! Predicate dependency structure: refers-to edges, the depends-on closure,
//! mutual recursion classes and `dep` counts.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::program::{ModedProgram, Pred};

#[derive(Debug, Clone)]
pub struct DepGraph {
    preds: Vec<Pred>,
    index: BTreeMap<Pred, usize>,
    refers: BTreeSet<(usize, usize)>,
    /// reach[p] = { q | p ⊒ q } (reflexive, transitive).
    reach: Vec<BTreeSet<usize>>,
    scc_of: Vec<usize>,
    /// Components in reverse topological order of ⊐ (callees first).
    sccs: Vec<Vec<usize>>,
    defined: BTreeSet<usize>,
}

impl DepGraph {
    pub fn build(program: &ModedProgram) -> Self {
        let preds: Vec<Pred> = program.relations().into_iter().collect();
        let index: BTreeMap<Pred, usize> = preds
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        let mut refers = BTreeSet::new();
        for c in &program.clauses {
            let h = index[&c.head.key()];
            for b in &c.body {
                refers.insert((h, index[&b.key()]));
            }
        }

        let mut graph: DiGraph<usize, ()> = DiGraph::new();
        let nodes: Vec<NodeIndex> = (0..preds.len()).map(|i| graph.add_node(i)).collect();
        for &(a, b) in &refers {
            graph.add_edge(nodes[a], nodes[b], ());
        }

        let mut reach = vec![BTreeSet::new(); preds.len()];
        for (start, set) in reach.iter_mut().enumerate() {
            let mut stack = vec![start];
            set.insert(start);
            while let Some(p) = stack.pop() {
                for n in graph.neighbors(nodes[p]) {
                    let q = graph[n];
                    if set.insert(q) {
                        stack.push(q);
                    }
                }
            }
        }

        let sccs: Vec<Vec<usize>> = tarjan_scc(&graph)
            .into_iter()
            .map(|comp| {
                let mut c: Vec<usize> = comp.into_iter().map(|n| graph[n]).collect();
                c.sort_unstable();
                c
            })
            .collect();
        let mut scc_of = vec![0; preds.len()];
        for (i, comp) in sccs.iter().enumerate() {
            for &p in comp {
                scc_of[p] = i;
            }
        }
        let defined = program
            .defined()
            .iter()
            .filter_map(|p| index.get(p).copied())
            .collect();

        DepGraph {
            preds,
            index,
            refers,
            reach,
            scc_of,
            sccs,
            defined,
        }
    }

    pub fn predicates(&self) -> &[Pred] {
        &self.preds
    }

    fn idx(&self, p: &Pred) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// There is a clause with `p` in the head and `q` in the body.
    pub fn refers_to(&self, p: &Pred, q: &Pred) -> bool {
        match (self.idx(p), self.idx(q)) {
            (Some(a), Some(b)) => self.refers.contains(&(a, b)),
            _ => false,
        }
    }

    /// p ⊒ q. Reflexive even for predicates the program never mentions.
    pub fn depends(&self, p: &Pred, q: &Pred) -> bool {
        if p == q {
            return true;
        }
        match (self.idx(p), self.idx(q)) {
            (Some(a), Some(b)) => self.reach[a].contains(&b),
            _ => false,
        }
    }

    /// p ≃ q.
    pub fn mutual(&self, p: &Pred, q: &Pred) -> bool {
        self.depends(p, q) && self.depends(q, p)
    }

    /// p ⊐ q.
    pub fn strict(&self, p: &Pred, q: &Pred) -> bool {
        self.depends(p, q) && !self.depends(q, p)
    }

    /// Number of predicates defined in the program that `p` depends on.
    pub fn dep(&self, p: &Pred) -> usize {
        match self.idx(p) {
            Some(a) => self.reach[a].intersection(&self.defined).count(),
            None => 0,
        }
    }

    /// Mutual-recursion classes, callees before callers.
    pub fn components(&self) -> Vec<Vec<Pred>> {
        self.sccs
            .iter()
            .map(|c| c.iter().map(|&i| self.preds[i].clone()).collect())
            .collect()
    }

    pub fn component_of(&self, p: &Pred) -> Option<usize> {
        self.idx(p).map(|i| self.scc_of[i])
    }
}
