//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cogniview::analysis::{cl_report, liveness, module_liveness, CLConfig, LivenessMap};
use cogniview::cli::build_view;
use cogniview::emit::emit_view;
use cogniview::interp::{check_equivalence, check_exhaustive};
use cogniview::refactor::optimize_with;
use cogniview::syntax::{parse_source, print_ast, FunctionDef, ModuleAst, SourceUnit, StmtKind};

type Outcome = Result<String, String>;

const GUARD_FILES: [&str; 5] =
    ["guard_sign.mpy", "guard_grade.mpy", "guard_validate.mpy", "guard_discount.mpy", "guard_loop_filter.mpy"];

fn binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cogniview")).args(args).env_remove("COGNIVIEW_CONFIG").output().expect("run binary")
}

fn all_functions(m: &ModuleAst) -> Vec<&FunctionDef> {
    fn walk<'a>(f: &'a FunctionDef, out: &mut Vec<&'a FunctionDef>) {
        out.push(f);
        f.nested().for_each(|g| walk(g, out));
    }
    let mut out = Vec::new();
    m.functions().for_each(|f| walk(f, &mut out));
    out
}

fn form(kind: &StmtKind) -> &'static str {
    match kind {
        StmtKind::Assign { .. } => "assign",
        StmtKind::If { .. } => "if",
        StmtKind::While { .. } => "while",
        StmtKind::For { .. } => "for",
        StmtKind::Return(_) => "return",
        StmtKind::Break => "break",
        StmtKind::Continue => "continue",
        StmtKind::Pass => "pass",
        StmtKind::Expr(_) => "expr",
    }
}

fn round_trip(corpus: &[SourceUnit]) -> Outcome {
    if corpus.len() < 30 {
        return Err(format!("corpus has {} files", corpus.len()));
    }
    let started = Instant::now();
    let mut kinds = BTreeSet::new();
    let mut nested_defs = false;
    for unit in corpus {
        let m = parse_source(unit).map_err(|e| format!("{}: {e}", unit.path))?;
        let back = parse_source(&SourceUnit::new("p.mpy", print_ast(&m))).map_err(|e| format!("{}: {e}", unit.path))?;
        if !back.structurally_eq(&m) {
            return Err(format!("{} does not round-trip", unit.path));
        }
        nested_defs |= m.functions().any(|f| f.nested().next().is_some());
        for f in all_functions(&m) {
            f.statements().for_each(|s| s.walk(&mut |s| { kinds.insert(form(&s.kind)); }));
        }
        m.top_level_statements().for_each(|s| s.walk(&mut |s| { kinds.insert(form(&s.kind)); }));
    }
    let elapsed = started.elapsed();
    let cfg = CLConfig::default();
    let reports: Vec<_> =
        corpus.iter().map(|u| cl_report(&parse_source(u).unwrap(), u, &cfg).unwrap()).collect();
    if kinds.len() < 9 {
        return Err(format!("only {} statement forms covered", kinds.len()));
    }
    if !nested_defs || !reports.iter().any(|r| r.max_nesting() >= 4) {
        return Err("corpus lacks nested defs or depth-4 nesting".into());
    }
    if !reports.iter().any(|r| !r.call.recursive.is_empty()) || !reports.iter().any(|r| !r.overlong_lines.is_empty()) {
        return Err("corpus lacks recursion or long lines".into());
    }
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{} files in {:.3} s", corpus.len(), elapsed.as_secs_f64()))
}

fn live_by_search(map: &LivenessMap, p: usize, v: &str) -> bool {
    let nodes = &map.cfg.nodes;
    let mut seen = BTreeSet::new();
    let mut stack = vec![p];
    while let Some(n) = stack.pop() {
        if !seen.insert(n) {
            continue;
        }
        if nodes[n].uses.contains(v) {
            return true;
        }
        if !nodes[n].defs.contains(v) {
            stack.extend(nodes[n].succs.iter().copied());
        }
    }
    false
}

fn check_liveness(map: &LivenessMap) -> bool {
    let vars: BTreeSet<&String> = map.cfg.nodes.iter().flat_map(|n| n.uses.iter().chain(n.defs.iter())).collect();
    map.cfg.nodes.iter().enumerate().all(|(i, node)| {
        let out: BTreeSet<String> = node.succs.iter().flat_map(|&s| map.live_in[s].iter().cloned()).collect();
        let mut inn: BTreeSet<String> = out.difference(&node.defs).cloned().collect();
        inn.extend(node.uses.iter().cloned());
        map.live_out[i] == out
            && map.live_in[i] == inn
            && vars.iter().all(|v| map.live_in[i].contains(*v) == live_by_search(map, i, v))
    })
}

fn liveness_oracle(corpus: &[SourceUnit]) -> Outcome {
    let mut scopes = 0;
    for unit in corpus {
        let m = parse_source(unit).unwrap();
        for f in all_functions(&m) {
            if !check_liveness(&liveness(f, 5)) {
                return Err(format!("{}:{} disagrees", unit.path, f.name));
            }
            scopes += 1;
        }
        if !check_liveness(&module_liveness(&m, 5)) {
            return Err(format!("{}:<module> disagrees", unit.path));
        }
    }
    Ok(format!("{scopes} functions plus every module scope"))
}

/// Every intermediate module of the unchecked optimizer run, each checked
/// against the input with the fuzzing and exhaustive oracles.
fn semantic_safety(corpus: &[SourceUnit]) -> Outcome {
    let started = Instant::now();
    let cfg = CLConfig { fuzz_trials: 200, seed: 0, ..CLConfig::default() };
    let mut steps = 0;
    for unit in corpus {
        let m = parse_source(unit).unwrap();
        let total = optimize_with(&m, unit, &cfg, false).1.applied_count();
        for k in 1..=total {
            let (state, _) = optimize_with(&m, unit, &CLConfig { max_iters: k, ..cfg.clone() }, false);
            let fuzz = check_equivalence(&m, &state, &cfg);
            if !fuzz.equivalent {
                return Err(format!("{} step {k}: {:?}", unit.path, fuzz.counterexample));
            }
            let exhaustive = check_exhaustive(&m, &state, 2);
            if !exhaustive.equivalent {
                return Err(format!("{} step {k} exhaustive: {:?}", unit.path, exhaustive.counterexample));
            }
            steps += 1;
        }
    }
    let elapsed = started.elapsed();
    if elapsed >= Duration::from_secs(60) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{steps} applied transformations, 0 counterexamples, {:.2} s", elapsed.as_secs_f64()))
}

fn flattening() -> Outcome {
    let cfg = CLConfig::default();
    let mut notes = Vec::new();
    for name in GUARD_FILES {
        let outcome = build_view(&common::corpus_file(name), &cfg, true).map_err(|e| e.diagnostic())?;
        let (b, a) = (&outcome.view.report_before, &outcome.view.report_after);
        if a.max_nesting() >= b.max_nesting() || a.composite_score >= b.composite_score {
            return Err(format!(
                "{name}: nesting {}->{}, score {}->{}",
                b.max_nesting(),
                a.max_nesting(),
                b.composite_score,
                a.composite_score
            ));
        }
        if name == "guard_sign.mpy" && (b.max_nesting(), a.max_nesting()) != (2, 1) {
            return Err(format!("worked example nesting {}->{}", b.max_nesting(), a.max_nesting()));
        }
        notes.push(format!("{} {}->{}", name.trim_end_matches(".mpy"), b.max_nesting(), a.max_nesting()));
    }
    Ok(notes.join(", "))
}

fn line_budget(corpus: &[SourceUnit]) -> Outcome {
    let cfg = CLConfig::default();
    let mut wrapping_files = 0;
    for unit in corpus {
        let m = parse_source(unit).unwrap();
        let (out, _) = optimize_with(&m, unit, &cfg, true);
        let view = emit_view(&out, unit, &cfg).map_err(|e| e.to_string())?;
        let flagged: BTreeSet<usize> = view.unbreakable.iter().map(|u| u.view_line).collect();
        for (i, line) in view.text.lines().enumerate() {
            if line.chars().count() > cfg.line_limit && !flagged.contains(&(i + 1)) {
                return Err(format!("{} view line {} has {} chars", unit.path, i + 1, line.chars().count()));
            }
        }
        if !view.report_before.overlong_lines.is_empty() && view.report_after.overlong_lines.len() < view.report_before.overlong_lines.len() {
            wrapping_files += 1;
        }
    }
    if wrapping_files < 3 {
        return Err(format!("only {wrapping_files} files exercise wrapping"));
    }
    let unit = common::corpus_file("wrap_worked.mpy");
    let view = emit_view(&parse_source(&unit).unwrap(), &unit, &cfg).map_err(|e| e.to_string())?;
    let expected = ["result = (alpha * beta", "    + gamma * delta + epsilon)"];
    let lines: Vec<&str> = view.text.lines().filter(|l| l.starts_with("result") || l.starts_with("    +")).collect();
    if lines != expected {
        return Err(format!("worked example wrapped as {lines:?}"));
    }
    let lengths: Vec<usize> = lines.iter().map(|l| l.chars().count()).collect();
    Ok(format!("{wrapping_files} files wrapped; worked example lines measure {} and {}", lengths[0], lengths[1]))
}

fn optimizer_laws(corpus: &[SourceUnit]) -> Outcome {
    let cfg = CLConfig::default();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut applied_total = 0;
    for unit in corpus {
        let outcome = build_view(unit, &cfg, true).map_err(|e| e.diagnostic())?;
        let applied: Vec<_> = outcome.trace.applied().collect();
        if applied.iter().any(|e| e.score_after >= e.score_before)
            || applied.windows(2).any(|w| w[1].score_before != w[0].score_after)
        {
            return Err(format!("{}: trace not strictly decreasing", unit.path));
        }
        applied_total += applied.len();
        let view_path = dir.path().join(unit.path.replace(".mpy", ".view.mpy"));
        std::fs::write(&view_path, &outcome.view.text).map_err(|e| e.to_string())?;
        let second = dir.path().join("second.mpy");
        let out = binary(&["view", view_path.to_str().unwrap(), "-o", second.to_str().unwrap()]);
        let summary: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| format!("{}: {e}", unit.path))?;
        if out.status.code() != Some(0) || summary["applied"] != 0 {
            return Err(format!("{}: second view run applied {}", unit.path, summary["applied"]));
        }
    }
    Ok(format!("{applied_total} applications strictly decreasing; second runs apply 0 on {} files", corpus.len()))
}

fn capacity_sweep() -> Outcome {
    let file = common::corpus_dir().join("capacity_six.mpy");
    let overloads = |cap: &str| -> Result<u64, String> {
        let out = binary(&["metrics", file.to_str().unwrap(), "--json", "--capacity", cap]);
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
        Ok(v["functions"].as_array().ok_or("no functions")?.iter().filter_map(|f| f["overload_count"].as_u64()).sum())
    };
    let (at5, at6) = (overloads("5")?, overloads("6")?);
    if at5 >= 1 && at6 == 0 {
        Ok(format!("overload_count {at5} at capacity 5, {at6} at capacity 6"))
    } else {
        Err(format!("overload_count {at5} at capacity 5, {at6} at capacity 6"))
    }
}

fn corpus_run(report: &Path) -> Result<(Duration, Vec<u8>), String> {
    let started = Instant::now();
    let out = binary(&["corpus", common::corpus_dir().to_str().unwrap(), "--report", report.to_str().unwrap()]);
    let elapsed = started.elapsed();
    if out.status.code() != Some(0) {
        return Err(format!("corpus exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    Ok((elapsed, std::fs::read(report).map_err(|e| e.to_string())?))
}

fn determinism_and_runtime() -> (Outcome, Outcome) {
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return (Err(e.to_string()), Err(e.to_string())),
    };
    let first = corpus_run(&dir.path().join("a.json"));
    let second = corpus_run(&dir.path().join("b.json"));
    match (first, second) {
        (Ok((t1, a)), Ok((t2, b))) => {
            let det = if a == b { Ok(format!("{} identical bytes", a.len())) } else { Err("reports differ".into()) };
            let slowest = t1.max(t2);
            let rt = if slowest < Duration::from_secs(300) {
                Ok(format!("corpus command in {:.2} s", slowest.as_secs_f64()))
            } else {
                Err(format!("corpus command took {slowest:?}"))
            };
            (det, rt)
        }
        (Err(e), _) | (_, Err(e)) => (Err(e.clone()), Err(e)),
    }
}

fn run_all() -> bool {
    let corpus = common::corpus();
    let (determinism, runtime) = determinism_and_runtime();
    let results: Vec<(&str, Outcome)> = vec![
        ("round-trip suite", round_trip(&corpus)),
        ("liveness oracle equivalence", liveness_oracle(&corpus)),
        ("semantic safety", semantic_safety(&corpus)),
        ("flattening efficacy", flattening()),
        ("line budget", line_budget(&corpus)),
        ("optimizer laws", optimizer_laws(&corpus)),
        ("capacity metric", capacity_sweep()),
        ("determinism", determinism),
        ("end-to-end runtime", runtime),
    ];
    let mut ok = true;
    for (name, outcome) in results {
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                ok = false;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    ok
}

fn main() {
    let passed = std::thread::Builder::new()
        .stack_size(256 << 20)
        .spawn(run_all)
        .expect("spawn acceptance thread")
        .join()
        .unwrap_or(false);
    std::process::exit(if passed { 0 } else { 1 });
}
