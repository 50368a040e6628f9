//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{
    check_steps, check_switching, check_tree_bounds, random_derivation, random_query,
    random_query_sized, subjects, StepTally, SwitchTally,
};
use icterm_core::corpus::{self, bundled};
use icterm_core::engine::{classify_stuck, derive, Budget, Status, Stuck};
use icterm_core::ictree::{build_ic_tree, DEFAULT_NODE_BUDGET};
use icterm_core::modes::{
    check_input_recursive, check_nicely_moded, check_nicely_moded_program,
    check_simply_moded_program, find_permutation, DepGraph, Target,
};
use icterm_core::program::{parse_program, parse_query, ModedProgram, Pred};
use icterm_core::term::{variant_eq, Term};
use icterm_core::termination::{
    check_quasi_recurrent, family_mappings, infer_level_mapping, necessity_probe, Hypothesis,
    LevelMapping, ProbeConfig, ProbeReport, QrVerdict,
};

type Outcome = Result<String, String>;

fn program(src: &str) -> ModedProgram {
    parse_program(src).expect("bundled program parses")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

fn reverse_trace() -> Outcome {
    let start = Instant::now();
    let p = program(corpus::REVERSE);
    let (q, _) = parse_query("reverse([X1,X2],Zs)", &p).map_err(|e| e.to_string())?;
    let d = derive(&p, &q, Budget::default());
    ensure(d.len() == 4, || format!("{} steps", d.len()))?;
    ensure(matches!(d.status, Status::Success(_)), || {
        d.status.name().into()
    })?;
    ensure(d.final_query().is_empty(), || {
        "does not end in the empty query".into()
    })?;
    // the queries of the worked example, written with shared variable names
    let (expected, _) = parse_query(
        "reverse([X1,X2],Zs), reverse_acc([X1,X2],Zs,[]), \
         reverse_acc([X2],Zs,[X1]), reverse_acc([],Zs,[X2,X1])",
        &p,
    )
    .map_err(|e| e.to_string())?;
    let actual: Vec<Term> = (0..4).flat_map(|k| d.query(k).as_terms()).collect();
    ensure(variant_eq(&actual, &expected.as_terms()), || {
        format!("intermediate queries differ: {actual:?}")
    })?;
    d.validate(&p)?;
    within(Duration::from_secs(1), start)?;
    Ok("4 steps ending in the empty query".into())
}

fn deadlock_and_failure() -> Outcome {
    let start = Instant::now();
    let p = program(corpus::APPEND);
    let (q, _) = parse_query("app(X,Y,Z)", &p).map_err(|e| e.to_string())?;
    ensure(classify_stuck(&p, &q) == Ok(Stuck::Deadlock), || {
        "app(X,Y,Z) not deadlock".into()
    })?;
    let d = derive(&p, &q, Budget::default());
    ensure(d.status == Status::Deadlock && d.is_empty(), || {
        format!("derive gave {} after {} steps", d.status.name(), d.len())
    })?;
    let (q, _) = parse_query("app(f(a),Y,Z)", &p).map_err(|e| e.to_string())?;
    ensure(classify_stuck(&p, &q) == Ok(Stuck::Failure), || {
        "app(f(a),Y,Z) not failure".into()
    })?;
    let d = derive(&p, &q, Budget::default());
    ensure(d.status == Status::Failure && d.is_empty(), || {
        d.status.name().into()
    })?;
    within(Duration::from_secs(1), start)?;
    Ok("deadlock at step 0; failure".into())
}

fn classifications() -> Outcome {
    let flags = |src: &str| {
        let p = program(src);
        let g = DepGraph::build(&p);
        (
            check_nicely_moded_program(&p).holds,
            check_simply_moded_program(&p).holds,
            check_input_recursive(&p, &g).holds,
        )
    };
    let table = [
        ("append", corpus::APPEND, Some(true), Some(true), Some(true)),
        (
            "reverse",
            corpus::REVERSE,
            Some(true),
            Some(true),
            Some(true),
        ),
        ("merge", corpus::MERGE, Some(true), Some(true), Some(true)),
        (
            "flatten",
            corpus::FLATTEN,
            Some(true),
            Some(true),
            Some(false),
        ),
        (
            "quicksort",
            corpus::QUICKSORT,
            Some(true),
            Some(true),
            Some(false),
        ),
        ("last", corpus::LAST, None, Some(false), None),
    ];
    for (name, src, nm, sm, ir) in table {
        let (a_nm, a_sm, a_ir) = flags(src);
        for (label, want, got) in [("NM", nm, a_nm), ("SM", sm, a_sm), ("IR", ir, a_ir)] {
            if let Some(w) = want {
                ensure(w == got, || {
                    format!("{name} {label}: expected {w}, got {got}")
                })?;
            }
        }
    }
    let p = program(corpus::APPEND);
    let (q1, _) =
        parse_query("app(Xs,[5,6],Ys), app([1,2],[3,4],Xs)", &p).map_err(|e| e.to_string())?;
    ensure(!check_nicely_moded(&p, &q1).holds, || {
        "Q1 nicely-moded".into()
    })?;
    let perm =
        find_permutation(&p, None, &q1.atoms, Target::NicelyModed).map_err(|e| e.to_string())?;
    ensure(perm == Some(vec![1, 0]), || {
        format!("Q1 permutation {perm:?}")
    })?;
    Ok("6 programs and Q1 as tabulated".into())
}

fn has_unknown_on(p: &ModedProgram, l: &LevelMapping, g: &DepGraph, clause: usize) -> bool {
    check_quasi_recurrent(p, l, g)
        .entries
        .iter()
        .any(|e| e.clause == clause && matches!(e.verdict, QrVerdict::Unknown(_)))
}

fn qr_certificates() -> Outcome {
    let start = Instant::now();
    for (name, src) in [
        ("append", corpus::APPEND),
        ("reverse", corpus::REVERSE),
        ("merge", corpus::MERGE),
        ("flatten", corpus::FLATTEN),
    ] {
        let p = program(src);
        let g = DepGraph::build(&p);
        let l = LevelMapping::from_program(&p);
        let r = check_quasi_recurrent(&p, &l, &g);
        ensure(r.all_proven() && !r.entries.is_empty(), || {
            format!("{name} not all proven")
        })?;
    }
    let mut searched = 0;
    for (name, src, pred, clause) in [
        ("quicksort", corpus::QUICKSORT, Pred::new("qs", 2), 1),
        ("output_driven", corpus::OUTPUT_DRIVEN, Pred::new("p", 2), 0),
    ] {
        let p = program(src);
        let g = DepGraph::build(&p);
        let family = family_mappings(&p, &g, &pred).map_err(|e| e.to_string())?;
        for l in &family {
            ensure(has_unknown_on(&p, l, &g, clause), || {
                format!("{name}: some mapping proves clause {}", clause + 1)
            })?;
        }
        searched += family.len();
        let inferred = infer_level_mapping(&p, &g).map_err(|e| e.to_string())?;
        ensure(inferred.is_none(), || {
            format!("{name}: inference found a mapping")
        })?;
    }
    within(Duration::from_secs(5), start)?;
    Ok(format!(
        "4 programs proven; Unknown under all {searched} family mappings"
    ))
}

/// Nesting depth where a list counts as deep as its length.
fn list_depth(t: &Term) -> usize {
    let mut items = Vec::new();
    let mut cur = t;
    while let Term::App(f, args) = cur {
        if &**f != "." || args.len() != 2 {
            break;
        }
        items.push(&args[0]);
        cur = &args[1];
    }
    if !items.is_empty() {
        let inner = items.iter().map(|i| list_depth(i)).max().unwrap_or(0);
        return items.len().max(1 + inner);
    }
    match t {
        Term::App(_, args) if !args.is_empty() => {
            1 + args.iter().map(list_depth).max().unwrap_or(0)
        }
        _ => 0,
    }
}

fn sufficiency_evidence() -> Outcome {
    let certified = ["append", "reverse", "merge", "flatten"];
    let mut trees = 0;
    let mut largest = 0;
    for e in bundled()
        .into_iter()
        .filter(|e| certified.contains(&e.name.as_str()))
    {
        let p = e.program()?;
        let mut panel = 0;
        for qs in &e.evidence {
            let (q, _) = parse_query(qs, &p).map_err(|e| e.to_string())?;
            if !check_nicely_moded(&p, &q).holds {
                continue;
            }
            panel += 1;
            let depth = q
                .atoms
                .iter()
                .flat_map(|a| &a.args)
                .map(list_depth)
                .max()
                .unwrap_or(0);
            ensure(depth <= 4, || format!("{qs}: input too deep"))?;
            let t = build_ic_tree(&p, &q, DEFAULT_NODE_BUDGET);
            let n = t
                .nodes_count()
                .ok_or_else(|| format!("{qs}: {}", t.count_label()))?;
            largest = largest.max(n);
            trees += 1;
        }
        ensure(panel >= 2, || format!("{}: panel too small", e.name))?;
    }
    Ok(format!("{trees} complete trees, largest {largest} nodes"))
}

fn switching_suite() -> Outcome {
    let subs = subjects();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5317);
    let mut total = SwitchTally::default();
    let mut derivations = 0;
    while derivations < 600 {
        let s = &subs[rng.gen_range(0..subs.len())];
        let q = random_query(&s.program, &mut rng, false);
        if q.len() < 2 {
            continue;
        }
        let d = random_derivation(&s.program, &q, &mut rng, 25);
        let t = check_switching(&s.program, &d).map_err(|e| format!("{}: {e}", s.name))?;
        total.switches += t.switches;
        total.normalizations += t.normalizations;
        derivations += 1;
    }
    ensure(total.switches > 0 && total.normalizations > 0, || {
        "nothing exercised".into()
    })?;
    Ok(format!(
        "{derivations} derivations, {} switches, {} normalizations",
        total.switches, total.normalizations
    ))
}

fn persistence_suite() -> Outcome {
    let subs = subjects();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e57);
    let mut total = StepTally::default();
    let mut derivations = 0;
    while total.steps < 12_000 {
        let s = &subs[rng.gen_range(0..subs.len())];
        let simply = s.simply_moded && rng.gen_bool(0.5);
        let q = random_query(&s.program, &mut rng, simply);
        let d = random_derivation(&s.program, &q, &mut rng, 40);
        let t =
            check_steps(&s.program, s.simply_moded, &d).map_err(|e| format!("{}: {e}", s.name))?;
        total.add(&t);
        derivations += 1;
    }
    ensure(
        total.sm_persistence > 0 && total.one_atom_inputs > 0,
        || "suite not exercised".into(),
    )?;
    Ok(format!(
        "{} steps over {derivations} derivations (NM {}, SM {}, one-atom {})",
        total.steps, total.nm_persistence, total.sm_persistence, total.one_atom_inputs
    ))
}

fn tree_bounds() -> Outcome {
    let mut complete = 0;
    let mut cut = 0;
    for e in bundled() {
        let p = e.program()?;
        for qs in &e.evidence {
            let (q, _) = parse_query(qs, &p).map_err(|e| e.to_string())?;
            match check_tree_bounds(&p, &q, DEFAULT_NODE_BUDGET)
                .map_err(|m| format!("{qs}: {m}"))?
            {
                Some(_) => complete += 1,
                None => cut += 1,
            }
        }
    }
    let subs = subjects();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1c);
    for _ in 0..300 {
        let s = &subs[rng.gen_range(0..subs.len())];
        let q = random_query_sized(&s.program, &mut rng, false, 2);
        match check_tree_bounds(&s.program, &q, 2_000).map_err(|m| format!("{}: {m}", s.name))? {
            Some(_) => complete += 1,
            None => cut += 1,
        }
    }
    Ok(format!(
        "{complete} complete trees checked, {cut} cut trees skipped"
    ))
}

fn necessity_probe_suite() -> Outcome {
    let config = ProbeConfig::default();
    let mut samples = 0;
    for (name, src) in [
        ("append", corpus::APPEND),
        ("reverse", corpus::REVERSE),
        ("merge", corpus::MERGE),
    ] {
        let p = program(src);
        let r = necessity_probe(&p, &DepGraph::build(&p), &config);
        let ProbeReport::Ran(s) = &r else {
            return Err(format!("{name} refused"));
        };
        ensure(s.len() >= 50, || format!("{name}: {} samples", s.len()))?;
        ensure(r.undefined() == 0, || {
            format!("{name}: {} cut trees", r.undefined())
        })?;
        ensure(r.violations().is_empty(), || {
            format!("{name}: {:?}", r.violations()[0])
        })?;
        samples += s.len();
    }
    for (name, src) in [
        ("flatten", corpus::FLATTEN),
        ("quicksort", corpus::QUICKSORT),
    ] {
        let p = program(src);
        match necessity_probe(&p, &DepGraph::build(&p), &config) {
            ProbeReport::Refused(f)
                if f.iter().any(|h| h.hypothesis == Hypothesis::InputRecursive) => {}
            other => return Err(format!("{name}: {other:?}")),
        }
    }
    Ok(format!(
        "{samples} samples decrease; flatten and quicksort refused (input-recursive)"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("worked example trace", reverse_trace),
        ("deadlock and failure", deadlock_and_failure),
        ("modedness classifications", classifications),
        ("quasi-recurrency certificates", qr_certificates),
        ("sufficiency evidence", sufficiency_evidence),
        ("left-switching suite", switching_suite),
        ("persistence suite", persistence_suite),
        ("ic-tree bounds", tree_bounds),
        ("necessity probe", necessity_probe_suite),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail} ({ms} ms)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why} ({ms} ms)", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
