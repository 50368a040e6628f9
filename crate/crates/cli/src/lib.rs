//! Commands behind the `icterm` binary. Every command returns a report type
//! that serializes to one JSON document and renders as plain text.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use icterm_core::corpus::{self, CorpusEntry, EntryResult, RunConfig};
use icterm_core::engine::{run, Budget, Derivation, Status, Strategy};
use icterm_core::ictree::{build_ic_tree, TreeDump};
use icterm_core::modes::{
    check_input_recursive, check_nicely_moded_program, check_simply_moded_program, permute_program,
    DepGraph, ModednessReport, Target,
};
use icterm_core::program::{parse_program, parse_query, ClauseRef, ModedProgram, ProgramError};
use icterm_core::termination::{
    check_quasi_recurrent, infer_level_mapping, prove_input_termination, Base, BaseEvidence,
    LevelMapping, QrReport, QrVerdict, TheoremReport,
};

#[derive(Debug)]
pub enum CliError {
    Io(PathBuf, std::io::Error),
    Program(String),
    Query(String),
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Program(m) => write!(f, "program: {m}"),
            CliError::Query(m) => write!(f, "query: {m}"),
            CliError::Usage(m) => write!(f, "usage: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

pub fn load_program(path: &Path) -> Result<ModedProgram, CliError> {
    parse_program(&read(path)?).map_err(|e| CliError::Program(e.to_string()))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<String>,
}

impl Verdict {
    fn of(r: ModednessReport, p: &ModedProgram) -> Verdict {
        Verdict {
            holds: r.holds,
            witness: r.witness.map(|w| w.describe(&p.names)),
        }
    }

    fn line(&self, label: &str) -> String {
        match &self.witness {
            Some(w) => format!("{label}: {} ({w})", yes_no(self.holds)),
            None => format!("{label}: {}", yes_no(self.holds)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateInfo {
    pub predicate: String,
    pub mode: String,
    pub dep: usize,
    pub component: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationReport {
    /// Per-clause body orders (0-based original positions), if one exists.
    pub nicely_moded: Option<Vec<Vec<usize>>>,
    pub simply_moded: Option<Vec<Vec<usize>>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QrPair {
    /// 1-based clause number.
    pub clause: usize,
    /// 1-based body atom position.
    pub body_atom: usize,
    pub head: String,
    pub body: String,
    pub difference: String,
    pub proven: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QrSummary {
    /// "declared", "inferred" or "none".
    pub mapping_source: String,
    pub mapping: Vec<String>,
    pub proven: bool,
    pub pairs: Vec<QrPair>,
    pub missing: Vec<String>,
    pub error: Option<String>,
}

fn qr_pairs(p: &ModedProgram, r: &QrReport) -> Vec<QrPair> {
    r.entries
        .iter()
        .map(|e| {
            let c = &p.clauses[e.clause];
            QrPair {
                clause: e.clause + 1,
                body_atom: e.body_atom + 1,
                head: c.head.display(&p.names).to_string(),
                body: c.body[e.body_atom].display(&p.names).to_string(),
                difference: e.difference.display(&p.names).to_string(),
                proven: e.verdict == QrVerdict::Proven,
            }
        })
        .collect()
}

fn qr_summary(p: &ModedProgram, g: &DepGraph, infer: bool) -> QrSummary {
    let (source, mapping, error) = if infer || p.levels.is_empty() {
        match infer_level_mapping(p, g) {
            Ok(Some(m)) => ("inferred", Some(m), None),
            Ok(None) => ("none", None, None),
            Err(e) => ("none", None, Some(e.to_string())),
        }
    } else {
        ("declared", Some(LevelMapping::from_program(p)), None)
    };
    match mapping {
        Some(m) => {
            let r = check_quasi_recurrent(p, &m, g);
            QrSummary {
                mapping_source: source.into(),
                mapping: m.describe(p),
                proven: r.all_proven(),
                pairs: qr_pairs(p, &r),
                missing: r.missing.iter().map(|p| p.to_string()).collect(),
                error,
            }
        }
        None => QrSummary {
            mapping_source: source.into(),
            mapping: Vec::new(),
            proven: false,
            pairs: Vec::new(),
            missing: Vec::new(),
            error,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub file: String,
    pub predicates: Vec<PredicateInfo>,
    pub nicely_moded: Verdict,
    pub simply_moded: Verdict,
    pub input_recursive: Verdict,
    pub permutation: Option<PermutationReport>,
    pub quasi_recurrent: QrSummary,
    pub warnings: Vec<String>,
    /// Wall-clock milliseconds per phase; only with `--timings`.
    pub timings_ms: Option<BTreeMap<String, u64>>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyzeOptions {
    pub permute: bool,
    pub infer: bool,
    pub timings: bool,
}

pub fn analyze(path: &Path, opts: AnalyzeOptions) -> Result<AnalysisReport, CliError> {
    let mut timings = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut BTreeMap<String, u64>| {
        timings.insert(name.to_string(), clock.elapsed().as_millis() as u64);
        clock = Instant::now();
    };
    let p = load_program(path)?;
    let g = DepGraph::build(&p);
    lap("parse", &mut timings);
    let predicates = p
        .defined()
        .into_iter()
        .map(|pred| PredicateInfo {
            mode: p.mode(&pred).map(|m| m.to_string()).unwrap_or_default(),
            dep: g.dep(&pred),
            component: g.component_of(&pred).unwrap_or(0),
            predicate: pred.to_string(),
        })
        .collect();
    let nicely_moded = Verdict::of(check_nicely_moded_program(&p), &p);
    let simply_moded = Verdict::of(check_simply_moded_program(&p), &p);
    let input_recursive = Verdict::of(check_input_recursive(&p, &g), &p);
    lap("modes", &mut timings);
    let permutation = opts.permute.then(|| {
        let mut r = PermutationReport {
            nicely_moded: None,
            simply_moded: None,
            error: None,
        };
        match permute_program(&p, Target::NicelyModed) {
            Ok(found) => r.nicely_moded = found.map(|(_, perms)| perms),
            Err(e) => r.error = Some(e.to_string()),
        }
        match permute_program(&p, Target::SimplyModed) {
            Ok(found) => r.simply_moded = found.map(|(_, perms)| perms),
            Err(e) => r.error = Some(e.to_string()),
        }
        r
    });
    lap("permutation", &mut timings);
    let quasi_recurrent = qr_summary(&p, &g, opts.infer);
    lap("quasi_recurrent", &mut timings);
    Ok(AnalysisReport {
        file: path.display().to_string(),
        predicates,
        nicely_moded,
        simply_moded,
        input_recursive,
        permutation,
        quasi_recurrent,
        warnings: p.warnings.clone(),
        timings_ms: opts.timings.then_some(timings),
    })
}

fn perms_text(perms: &Option<Vec<Vec<usize>>>) -> String {
    match perms {
        None => "none".into(),
        Some(ps) => {
            let moved: Vec<String> = ps
                .iter()
                .enumerate()
                .filter(|(_, p)| p.iter().enumerate().any(|(k, &i)| k != i))
                .map(|(c, p)| {
                    let order: Vec<String> = p.iter().map(|i| (i + 1).to_string()).collect();
                    format!("c{}: [{}]", c + 1, order.join(","))
                })
                .collect();
            if moved.is_empty() {
                "identity".into()
            } else {
                moved.join("; ")
            }
        }
    }
}

impl AnalysisReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "program: {}", self.file);
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        for p in &self.predicates {
            let _ = writeln!(
                out,
                "  {} mode {} dep {} class {}",
                p.predicate, p.mode, p.dep, p.component
            );
        }
        let _ = writeln!(out, "{}", self.nicely_moded.line("nicely-moded"));
        let _ = writeln!(out, "{}", self.simply_moded.line("simply-moded"));
        let _ = writeln!(out, "{}", self.input_recursive.line("input-recursive"));
        if let Some(p) = &self.permutation {
            let _ = writeln!(
                out,
                "permutation nicely-moded: {}",
                perms_text(&p.nicely_moded)
            );
            let _ = writeln!(
                out,
                "permutation simply-moded: {}",
                perms_text(&p.simply_moded)
            );
            if let Some(e) = &p.error {
                let _ = writeln!(out, "permutation error: {e}");
            }
        }
        let q = &self.quasi_recurrent;
        let verdict = if q.proven { "Proven" } else { "Unknown" };
        let _ = writeln!(
            out,
            "quasi-recurrent: {verdict} (mapping {})",
            q.mapping_source
        );
        for m in &q.mapping {
            let _ = writeln!(out, "  {m}");
        }
        for pair in &q.pairs {
            let _ = writeln!(
                out,
                "  c{} atom {}: |{}| - |{}| = {}  {}",
                pair.clause,
                pair.body_atom,
                pair.head,
                pair.body,
                pair.difference,
                if pair.proven { "proven" } else { "unknown" }
            );
        }
        if !q.missing.is_empty() {
            let _ = writeln!(out, "  no level given for: {}", q.missing.join(", "));
        }
        if let Some(e) = &q.error {
            let _ = writeln!(out, "  search: {e}");
        }
        if let Some(t) = &self.timings_ms {
            let parts: Vec<String> = t.iter().map(|(k, v)| format!("{k} {v}ms")).collect();
            let _ = writeln!(out, "timings: {}", parts.join(", "));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    /// 1-based position of the selected atom.
    pub atom: usize,
    pub selected: String,
    pub clause: String,
    /// The step's mgu restricted to the query's variables.
    pub theta: String,
    pub resolvent: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceReport {
    pub query: String,
    pub steps: Vec<TraceStep>,
    pub status: String,
    pub answer: Option<String>,
}

/// `leftmost`, or `script:ATOM:CLAUSE,...` with 1-based atoms and clauses
/// written `c3` or `builtin`.
pub fn parse_strategy(s: &str) -> Result<Strategy, CliError> {
    if s == "leftmost" {
        return Ok(Strategy::LeftmostIc);
    }
    let Some(rest) = s.strip_prefix("script:") else {
        return Err(CliError::Usage(format!("unknown strategy {s}")));
    };
    let bad = || CliError::Usage(format!("bad script step in {s}"));
    let mut script = Vec::new();
    for part in rest.split(',').filter(|p| !p.is_empty()) {
        let (a, c) = part.split_once(':').ok_or_else(bad)?;
        let atom: usize = a.trim().parse().map_err(|_| bad())?;
        let clause = match c.trim() {
            "builtin" => ClauseRef::Builtin,
            c => {
                let n: usize = c.trim_start_matches('c').parse().map_err(|_| bad())?;
                ClauseRef::Program(n.checked_sub(1).ok_or_else(bad)?)
            }
        };
        script.push((atom.checked_sub(1).ok_or_else(bad)?, clause));
    }
    Ok(Strategy::Scripted(script))
}

fn query_of(
    p: &ModedProgram,
    q: &str,
) -> Result<(icterm_core::program::Query, icterm_core::term::VarNames), CliError> {
    parse_query(q, p).map_err(|e: ProgramError| CliError::Query(e.to_string()))
}

pub fn trace(
    path: &Path,
    query: &str,
    strategy: &Strategy,
    budget: Budget,
) -> Result<TraceReport, CliError> {
    let p = load_program(path)?;
    let (q, names) = query_of(&p, query)?;
    let d: Derivation =
        run(&p, &q, strategy, budget).map_err(|e| CliError::Query(e.to_string()))?;
    let qvars = q.vars();
    let steps = d
        .steps
        .iter()
        .enumerate()
        .map(|(k, s)| TraceStep {
            step: k + 1,
            atom: s.selected + 1,
            selected: s.selected_atom().display(&names).to_string(),
            clause: s.clause.to_string(),
            theta: s.mgu.restrict(&qvars).display(&names).to_string(),
            resolvent: s.resolvent.display(&names).to_string(),
        })
        .collect();
    let answer = match &d.status {
        Status::Success(a) => Some(a.display(&names).to_string()),
        _ => None,
    };
    Ok(TraceReport {
        query: q.display(&names).to_string(),
        steps,
        status: d.status.name().to_string(),
        answer,
    })
}

impl TraceReport {
    pub fn render(&self) -> String {
        let mut out = format!("0: {}\n", self.query);
        for s in &self.steps {
            let shown = if s.resolvent.is_empty() {
                "□"
            } else {
                &s.resolvent
            };
            let _ = writeln!(
                out,
                "{}: {} [atom {}] {} θ={}\n   => {}",
                s.step, s.selected, s.atom, s.clause, s.theta, shown
            );
        }
        let _ = write!(out, "status: {}", self.status);
        if let Some(a) = &self.answer {
            let _ = write!(out, " {a}");
        }
        out.push('\n');
        out
    }
}

pub struct TreeOutput {
    pub text: String,
    pub dump: TreeDump,
}

pub fn tree(path: &Path, query: &str, budget: usize) -> Result<TreeOutput, CliError> {
    let p = load_program(path)?;
    let (q, _) = query_of(&p, query)?;
    let t = build_ic_tree(&p, &q, budget);
    Ok(TreeOutput {
        text: t.render(),
        dump: t.dump(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedCheck {
    pub hypothesis: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProveReport {
    pub file: String,
    pub base: String,
    pub base_evidence: Option<String>,
    pub proven: bool,
    pub failed: Vec<FailedCheck>,
    pub mapping_source: String,
    pub mapping: Vec<String>,
    pub pairs: Vec<QrPair>,
    pub permutations: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Default)]
pub struct ProveOptions {
    /// `builtins` (default), `empty`, or a program file.
    pub base: Option<String>,
    /// Take a program base to be input terminating without proof.
    pub assume_base: bool,
    pub infer: bool,
}

fn mode_declarations(r: &ModedProgram) -> String {
    let mut out = String::new();
    for (pred, mode) in r.modes() {
        if pred.arity == 0 || !r.is_defined(pred) {
            continue;
        }
        let flags: Vec<&str> = (0..pred.arity)
            .map(|i| if mode.is_input(i) { "in" } else { "out" })
            .collect();
        let _ = writeln!(out, ":- mode {}({}).", pred.name, flags.join(","));
    }
    out
}

pub fn prove(path: &Path, opts: &ProveOptions) -> Result<ProveReport, CliError> {
    let src = read(path)?;
    let (base, evidence) = match opts.base.as_deref() {
        None | Some("builtins") => (Base::Builtins, None),
        Some("empty") => (Base::Empty, None),
        Some(file) => {
            let r = load_program(Path::new(file))?;
            let own = prove_input_termination(&r, &Base::Builtins, &LevelMapping::from_program(&r));
            let ev = if own.is_proven() {
                BaseEvidence::Proven
            } else if opts.assume_base {
                BaseEvidence::Asserted
            } else {
                BaseEvidence::Unknown
            };
            (Base::Program(r, ev), Some(format!("{ev:?}").to_lowercase()))
        }
    };
    // predicates of a program base are known to P through their modes
    let p = match (parse_program(&src), &base) {
        (Ok(p), _) => p,
        (Err(ProgramError::Undefined(_)), Base::Program(r, _)) => {
            parse_program(&format!("{}{src}", mode_declarations(r)))
                .map_err(|e| CliError::Program(e.to_string()))?
        }
        (Err(e), _) => return Err(CliError::Program(e.to_string())),
    };
    let g = DepGraph::build(&p);
    let (source, mapping) = if opts.infer || p.levels.is_empty() {
        match infer_level_mapping(&p, &g) {
            Ok(Some(m)) => ("inferred", m),
            _ => ("none", LevelMapping::default()),
        }
    } else {
        ("declared", LevelMapping::from_program(&p))
    };
    let report = prove_input_termination(&p, &base, &mapping);
    let mut out = ProveReport {
        file: path.display().to_string(),
        base: base.name().to_string(),
        base_evidence: evidence,
        proven: report.is_proven(),
        failed: Vec::new(),
        mapping_source: source.into(),
        mapping: mapping.describe(&p),
        pairs: Vec::new(),
        permutations: None,
    };
    match report {
        TheoremReport::Proven(cert) => {
            let subject = match &cert.permutations {
                Some(perms) => p.with_clauses(
                    p.clauses
                        .iter()
                        .zip(perms)
                        .map(|(c, perm)| {
                            icterm_core::program::Clause::new(
                                c.head.clone(),
                                icterm_core::modes::apply_permutation(&c.body, perm),
                            )
                        })
                        .collect(),
                ),
                None => p.clone(),
            };
            out.pairs = qr_pairs(&subject, &cert.qr);
            out.permutations = cert.permutations;
        }
        TheoremReport::NotProven(failed) => {
            out.failed = failed
                .into_iter()
                .map(|f| FailedCheck {
                    hypothesis: f.hypothesis.to_string(),
                    detail: f.detail,
                })
                .collect();
            out.pairs = qr_pairs(&p, &check_quasi_recurrent(&p, &mapping, &g));
        }
    }
    Ok(out)
}

impl ProveReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let base = match &self.base_evidence {
            Some(ev) => format!("{} ({ev})", self.base),
            None => self.base.clone(),
        };
        let _ = writeln!(out, "program: {}  base: {base}", self.file);
        let _ = writeln!(out, "level mapping ({}):", self.mapping_source);
        for m in &self.mapping {
            let _ = writeln!(out, "  {m}");
        }
        if self.proven {
            let _ = writeln!(out, "input terminating: Proven");
            if let Some(p) = &self.permutations {
                let _ = writeln!(
                    out,
                    "  after body permutation: {}",
                    perms_text(&Some(p.clone()))
                );
            }
            for pair in &self.pairs {
                let _ = writeln!(
                    out,
                    "  c{} atom {}: |{}| - |{}| = {}",
                    pair.clause, pair.body_atom, pair.head, pair.body, pair.difference
                );
            }
        } else {
            let _ = writeln!(out, "input terminating: NotProven");
            for f in &self.failed {
                let _ = writeln!(out, "  {}: {}", f.hypothesis, f.detail);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub entries: Vec<EntryResult>,
    pub passed: usize,
    pub failed: usize,
}

pub fn corpus(
    manifest: Option<&Path>,
    filter: Option<&str>,
    config: &RunConfig,
) -> Result<CorpusReport, CliError> {
    let entries: Vec<CorpusEntry> = match manifest {
        None => corpus::bundled(),
        Some(m) => serde_json::from_str(&read(m)?)
            .map_err(|e| CliError::Program(format!("{}: {e}", m.display())))?,
    };
    let results = corpus::run_corpus(&entries, filter, config);
    let passed = results.iter().filter(|r| r.passed()).count();
    Ok(CorpusReport {
        failed: results.len() - passed,
        passed,
        entries: results,
    })
}

impl CorpusReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.entries {
            let evidence: Vec<String> = r
                .evidence
                .iter()
                .map(|e| match e.nodes {
                    Some(n) => format!("{} {n} nodes", e.query),
                    None => format!("{} ≥{} nodes (budget cut)", e.query, e.built),
                })
                .collect();
            let _ = writeln!(
                out,
                "{} {} ({} checks)",
                if r.passed() { "PASS" } else { "FAIL" },
                r.name,
                r.checks.len()
            );
            for c in r.mismatches() {
                let _ = writeln!(
                    out,
                    "  {}: expected {}, got {}",
                    c.name, c.expected, c.actual
                );
            }
            if let Some(e) = &r.error {
                let _ = writeln!(out, "  error: {e}");
            }
            for e in evidence {
                let _ = writeln!(out, "  IC-tree {e}");
            }
        }
        let _ = writeln!(
            out,
            "{} of {} entries pass",
            self.passed,
            self.passed + self.failed
        );
        out
    }
}
