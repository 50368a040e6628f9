//! Bundled example programs with their expected classifications, query
//! panels and IC-tree evidence queries, plus the table rows kept as
//! reference metadata only.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{derive, Budget, Status};
use crate::ictree::{build_ic_tree, DEFAULT_NODE_BUDGET};
use crate::modes::{
    check_input_recursive, check_nicely_moded_program, check_simply_moded_program, permute_program,
    DepGraph, Target,
};
use crate::program::{parse_program, parse_query, ModedProgram};
use crate::termination::{check_quasi_recurrent, infer_level_mapping, LevelMapping};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub nm: bool,
    pub sm: bool,
    pub ir: bool,
    /// With the declared level mapping, or, if none is declared, with some
    /// mapping from the {0,1} family.
    pub qr: bool,
    /// Input termination; reference only.
    #[serde(default)]
    pub it: Option<bool>,
    #[serde(default)]
    pub permutation_nm: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Success { answer: String },
    Deadlock,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelQuery {
    pub query: String,
    pub expect: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    pub source: String,
    pub main_mode: String,
    pub expected: Expected,
    #[serde(default)]
    pub panel: Vec<PanelQuery>,
    /// Queries whose IC-trees are built as termination evidence.
    #[serde(default)]
    pub evidence: Vec<String>,
}

impl CorpusEntry {
    pub fn program(&self) -> Result<ModedProgram, String> {
        parse_program(&self.source).map_err(|e| e.to_string())
    }
}

fn success(q: &str, answer: &str) -> PanelQuery {
    PanelQuery {
        query: q.into(),
        expect: Outcome::Success {
            answer: answer.into(),
        },
    }
}

fn stuck(q: &str, expect: Outcome) -> PanelQuery {
    PanelQuery {
        query: q.into(),
        expect,
    }
}

#[allow(clippy::too_many_arguments)]
fn entry(
    name: &str,
    source: &str,
    main_mode: &str,
    flags: [bool; 4],
    it: bool,
    permutation_nm: Option<bool>,
    panel: Vec<PanelQuery>,
    evidence: &[&str],
) -> CorpusEntry {
    let [nm, sm, ir, qr] = flags;
    CorpusEntry {
        name: name.into(),
        source: source.into(),
        main_mode: main_mode.into(),
        expected: Expected {
            nm,
            sm,
            ir,
            qr,
            it: Some(it),
            permutation_nm,
        },
        panel,
        evidence: evidence.iter().map(|s| s.to_string()).collect(),
    }
}

pub const APPEND: &str = include_str!("../../corpus/append.pl");
pub const APPEND_OUT_IN_OUT: &str = include_str!("../../corpus/append_out_in_out.pl");
pub const REVERSE: &str = include_str!("../../corpus/reverse.pl");
pub const LAST: &str = include_str!("../../corpus/last.pl");
pub const LAST_SELECTFIRST: &str = include_str!("../../corpus/last_selectfirst.pl");
pub const MERGE: &str = include_str!("../../corpus/merge.pl");
pub const FLATTEN: &str = include_str!("../../corpus/flatten.pl");
pub const FLATTEN_TEXTBOOK: &str = include_str!("../../corpus/flatten_textbook.pl");
pub const QUICKSORT: &str = include_str!("../../corpus/quicksort.pl");
pub const OUTPUT_DRIVEN: &str = include_str!("../../corpus/output_driven.pl");
const REFERENCE_ROWS: &str = include_str!("../../corpus/reference_rows.tsv");

/// The bundled entries, in a fixed order.
pub fn bundled() -> Vec<CorpusEntry> {
    use Outcome::{Deadlock, Failure};
    vec![
        entry(
            "append",
            APPEND,
            "app(In,In,Out)",
            [true, true, true, true],
            true,
            None,
            vec![
                success("app([1],[2],Z)", "{Z/[1,2]}"),
                stuck("app(X,Y,Z)", Deadlock),
                stuck("app(f(a),Y,Z)", Failure),
                success(
                    "app([1,2],[3,4],Xs), app(Xs,[5,6],Ys)",
                    "{Xs/[1,2,3,4], Ys/[1,2,3,4,5,6]}",
                ),
                success(
                    "app(Xs,[5,6],Ys), app([1,2],[3,4],Xs)",
                    "{Xs/[1,2,3,4], Ys/[1,2,3,4,5,6]}",
                ),
            ],
            &[
                "app([1,2,3,4],[5],Z)",
                "app([a,b,c],Y,Z)",
                "app(X,Y,Z)",
                "app([1,2],[3,4],Xs), app(Xs,[5,6],Ys)",
                "app(Xs,[5,6],Ys), app([1,2],[3,4],Xs)",
            ],
        ),
        entry(
            "append_out_in_out",
            APPEND_OUT_IN_OUT,
            "app(Out,In,Out)",
            [true, true, true, false],
            false,
            None,
            vec![success("app(X,[1],Z)", "{X/[], Z/[1]}")],
            &["app(X,[1],Z)"],
        ),
        entry(
            "reverse",
            REVERSE,
            "reverse(In,Out)",
            [true, true, true, true],
            true,
            None,
            vec![
                success("reverse([X1,X2],Zs)", "{Zs/[X2,X1]}"),
                success("reverse([1,2,3],Zs)", "{Zs/[3,2,1]}"),
                stuck("reverse(Xs,Zs)", Deadlock),
            ],
            &[
                "reverse([1,2,3,4],Zs)",
                "reverse([X1,X2,X3],Zs)",
                "reverse(Xs,Zs)",
                "reverse([a,b],Ys), reverse(Ys,Zs)",
            ],
        ),
        entry(
            "last",
            LAST,
            "last(In,Out)",
            [true, false, true, true],
            true,
            None,
            vec![success("last([1,2,3],E)", "{E/3}")],
            &["last([1,2,3,4],E)", "last([X,Y],E)"],
        ),
        entry(
            "last_selectfirst",
            LAST_SELECTFIRST,
            "last(In,Out)",
            [true, true, true, true],
            true,
            None,
            vec![
                success("last([1,2,3],E)", "{E/3}"),
                stuck("last([],E)", Failure),
            ],
            &["last([1,2,3,4],E)", "last([X,Y],E)"],
        ),
        entry(
            "merge",
            MERGE,
            "merge(In,In,Out)",
            [true, true, true, true],
            true,
            None,
            vec![
                success("merge([1,3],[2],Z)", "{Z/[1,2,3]}"),
                success("merge([],[],Z)", "{Z/[]}"),
                success("merge([2],[2],Z)", "{Z/[2,2]}"),
            ],
            &[
                "merge([1,3],[2,4],Z)",
                "merge([1,2],[X],Z)",
                "merge(Xs,[],Z)",
            ],
        ),
        entry(
            "flatten",
            FLATTEN,
            "flatten(In,Out)",
            [true, true, false, true],
            true,
            None,
            vec![
                success("flatten([a,[b]],Ys)", "{Ys/[a,b]}"),
                success("flatten([[a],b],Ys)", "{Ys/[a,b]}"),
                stuck("flatten(X,Ys)", Deadlock),
            ],
            &[
                "flatten([a,b],Ys)",
                "flatten([[a]],Ys)",
                "flatten([X,[Y]],Ys)",
            ],
        ),
        entry(
            "flatten_textbook",
            FLATTEN_TEXTBOOK,
            "flatten(In,Out)",
            [false, false, false, true],
            true,
            Some(true),
            vec![success("flatten([a,[b]],Ys)", "{Ys/[a,b]}")],
            &["flatten([a,b],Ys)", "flatten([X,[Y]],Ys)"],
        ),
        entry(
            "quicksort",
            QUICKSORT,
            "qs(In,Out)",
            [true, true, false, false],
            true,
            None,
            vec![
                success("qs([2,1,3],Ys)", "{Ys/[1,2,3]}"),
                success("qs([],Ys)", "{Ys/[]}"),
            ],
            &["qs([2,1],Ys)", "qs([1,1],Ys)"],
        ),
        entry(
            "output_driven",
            OUTPUT_DRIVEN,
            "p(In,Out)",
            [true, false, true, false],
            true,
            None,
            vec![success("p(1,Y)", "{Y/a}")],
            &["p(1,Y)", "p(X,Y)"],
        ),
    ]
}

/// A row of the published tables for a program that is not bundled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub table: u8,
    pub file: Option<String>,
    pub predicate: String,
    pub nm: Option<bool>,
    pub it: Option<bool>,
    pub qr: Option<bool>,
    pub sm: Option<bool>,
    pub ir: Option<bool>,
}

pub fn reference_rows() -> Vec<ReferenceRow> {
    fn flag(s: &str) -> Option<bool> {
        match s {
            "yes" => Some(true),
            "no" => Some(false),
            _ => None,
        }
    }
    REFERENCE_ROWS
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let c: Vec<&str> = l.split('\t').collect();
            ReferenceRow {
                table: c[0].parse().expect("table number"),
                file: (c[1] != "-").then(|| c[1].to_string()),
                predicate: c[2].to_string(),
                nm: flag(c[3]),
                it: flag(c[4]),
                qr: flag(c[5]),
                sm: flag(c[6]),
                ir: flag(c[7]),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub node_budget: usize,
    pub derive: Budget,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            node_budget: DEFAULT_NODE_BUDGET,
            derive: Budget::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub ok: bool,
}

/// IC-tree size for one evidence query; `nodes` is `None` on a budget cut.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub query: String,
    pub nodes: Option<usize>,
    pub built: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryResult {
    pub name: String,
    pub checks: Vec<Check>,
    pub evidence: Vec<Evidence>,
    pub error: Option<String>,
}

impl EntryResult {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.ok)
    }

    pub fn mismatches(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.ok).collect()
    }
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

fn flag_check(name: &str, expected: bool, actual: bool) -> Check {
    Check {
        name: name.into(),
        expected: yes_no(expected),
        actual: yes_no(actual),
        ok: expected == actual,
    }
}

fn outcome_of(status: &Status, names: &crate::term::VarNames) -> String {
    match status {
        Status::Success(ans) => format!("success {}", ans.display(names)),
        other => other.name().to_string(),
    }
}

fn expected_outcome(o: &Outcome) -> String {
    match o {
        Outcome::Success { answer } => format!("success {answer}"),
        Outcome::Deadlock => "deadlock".into(),
        Outcome::Failure => "failure".into(),
    }
}

/// QR verdict used for corpus checks: the declared mapping if the program
/// has one, otherwise whether the {0,1} search finds any.
pub fn qr_holds(p: &ModedProgram, g: &DepGraph) -> Result<bool, String> {
    if p.levels.is_empty() {
        infer_level_mapping(p, g)
            .map(|m| m.is_some())
            .map_err(|e| e.to_string())
    } else {
        Ok(check_quasi_recurrent(p, &LevelMapping::from_program(p), g).all_proven())
    }
}

pub fn run_entry(entry: &CorpusEntry, config: &RunConfig) -> EntryResult {
    let mut result = EntryResult {
        name: entry.name.clone(),
        checks: Vec::new(),
        evidence: Vec::new(),
        error: None,
    };
    let p = match entry.program() {
        Ok(p) => p,
        Err(e) => {
            result.error = Some(e);
            return result;
        }
    };
    let g = DepGraph::build(&p);
    let e = &entry.expected;
    let checks = &mut result.checks;
    checks.push(flag_check("nm", e.nm, check_nicely_moded_program(&p).holds));
    checks.push(flag_check("sm", e.sm, check_simply_moded_program(&p).holds));
    checks.push(flag_check("ir", e.ir, check_input_recursive(&p, &g).holds));
    match qr_holds(&p, &g) {
        Ok(qr) => checks.push(flag_check("qr", e.qr, qr)),
        Err(err) => result.error = Some(err),
    }
    if let Some(pnm) = e.permutation_nm {
        match permute_program(&p, Target::NicelyModed) {
            Ok(found) => checks.push(flag_check("permutation_nm", pnm, found.is_some())),
            Err(err) => result.error = Some(err.to_string()),
        }
    }
    for pq in &entry.panel {
        let name = format!("query {}", pq.query);
        let actual = match parse_query(&pq.query, &p) {
            Ok((q, names)) => outcome_of(&derive(&p, &q, config.derive).status, &names),
            Err(err) => format!("parse error: {err}"),
        };
        let expected = expected_outcome(&pq.expect);
        result.checks.push(Check {
            name,
            ok: actual == expected,
            expected,
            actual,
        });
    }
    for q in &entry.evidence {
        match parse_query(q, &p) {
            Ok((query, _)) => {
                let t = build_ic_tree(&p, &query, config.node_budget);
                result.evidence.push(Evidence {
                    query: q.clone(),
                    nodes: t.nodes_count(),
                    built: t.built(),
                });
            }
            Err(err) => result.error = Some(format!("evidence query {q}: {err}")),
        }
    }
    result
}

/// Runs the entries whose name contains `filter` (all if `None`), in parallel.
pub fn run_corpus(
    entries: &[CorpusEntry],
    filter: Option<&str>,
    config: &RunConfig,
) -> Vec<EntryResult> {
    entries
        .par_iter()
        .filter(|e| filter.map_or(true, |f| e.name.contains(f)))
        .map(|e| run_entry(e, config))
        .collect()
}
