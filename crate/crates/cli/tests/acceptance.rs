//! One line per acceptance criterion: `PASS name: detail` or `FAIL name: why`.

#[path = "../../core/tests/common/mod.rs"]
mod common;
#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeMap;
use std::fs;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use common::props;
use graphmend_core::frontend::{emit_source, parse_module};
use graphmend_core::{fix_file, FixOptions, FixOutcome, SourceModule, TagStatus};
use proptest::test_runner::{Config, TestRunner};
use support::*;

type Verdict = Result<String, String>;

fn fix(path: &Path) -> FixOutcome {
    fix_file(&SourceModule::read(path).unwrap(), &FixOptions::default())
}

fn all_inputs() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = corpus().iter().map(|c| c.original()).collect();
    files.extend(unit_fixtures());
    files
}

fn ensure(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

fn detection_fidelity() -> Verdict {
    let sources: Vec<SourceModule> = all_inputs().iter().map(|p| SourceModule::read(p).unwrap()).collect();
    let start = Instant::now();
    let outcomes: Vec<FixOutcome> = sources.iter().map(|s| fix_file(s, &FixOptions::default())).collect();
    let elapsed = start.elapsed();

    let cases = corpus();
    let mut rows = Vec::new();
    for (name, found, percent) in TABLE {
        let i = cases.iter().position(|c| c.name == name).ok_or(format!("missing corpus case {name}"))?;
        let report = &outcomes[i].report;
        let got = (report.tags.len(), report.fixed_percent());
        ensure(got == (found, percent), || format!("{name}: got {got:?}, want ({found},{percent})"))?;
        ensure(reported_tags(report) == cases[i].expected(), || format!("{name}: tags differ from manifest"))?;
        rows.push(format!("({found},{percent})"));
    }
    let fixtures = unit_fixtures();
    ensure(fixtures.len() >= 12, || format!("only {} unit fixtures", fixtures.len()))?;
    for (k, path) in fixtures.iter().enumerate() {
        let want = expected_tags(&sidecar(path).tags);
        let got = reported_tags(&outcomes[cases.len() + k].report);
        ensure(got == want, || format!("{}: {got:?} != {want:?}", path.display()))?;
    }
    ensure(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;
    Ok(format!("{} + {} unit fixtures in {:.0?}", rows.join(" "), fixtures.len(), elapsed))
}

fn golden_transforms() -> Verdict {
    for (input, golden) in [("branch_select.py", "branch_select.py"), ("print_stats.py", "print_stats.py")] {
        let out = fix(&unit_dir().join(input));
        let want = fs::read_to_string(golden_dir().join(golden)).unwrap();
        let names = golden_names(&want);
        ensure(normalized_tokens(&out.new_text, &names) == normalized_tokens(&want, &names), || {
            format!("{input} does not match {golden}:\n{}", out.new_text)
        })?;
    }
    Ok("branch_select, print_stats".into())
}

fn idempotency() -> Verdict {
    let files = all_inputs();
    for path in &files {
        let first = fix(path);
        let again = fix_file(&SourceModule::new(path, first.new_text.clone()), &FixOptions::default());
        ensure(again.new_text == first.new_text && again.report.edits == 0, || {
            format!("{}: second pass made {} edit(s)", path.display(), again.report.edits)
        })?;
    }
    Ok(format!("{} files, second pass 0 rewrites", files.len()))
}

fn round_trip() -> Verdict {
    let mut untouched = 0;
    let files = all_inputs();
    for path in &files {
        let src = SourceModule::read(path).unwrap();
        parse_module(&src).map_err(|e| e.to_string())?;
        ensure(emit_source(&src, &[]).unwrap() == src.text(), || format!("{}: re-emission differs", path.display()))?;
        let out = fix_file(&src, &FixOptions::default());
        if out.report.count(TagStatus::Fixed) == 0 {
            ensure(out.new_text == src.text(), || format!("{}: changed without a fix", path.display()))?;
            untouched += 1;
        }
    }
    Ok(format!("{} files re-emit exactly, {untouched} without fixes are byte-identical", files.len()))
}

fn unfixable_honesty() -> Verdict {
    let cases = [
        ("item_access.py", "unfixable", "host read of tensor value"),
        ("dynamic_shape.py", "unfixable", "dynamic-shape operator"),
        ("tensor_while.py", "unfixable", "loop"),
        ("impure_branch.py", "skipped", "impure branch"),
    ];
    for (file, status, reason) in cases {
        let path = unit_dir().join(file);
        let out = fix(&path);
        ensure(!out.report.tags.is_empty(), || format!("{file}: nothing reported"))?;
        for (line, _, s, r) in reported_tags(&out.report) {
            ensure(s == status && r.as_deref() == Some(reason), || format!("{file}:{line}: {s} {r:?}"))?;
        }
        ensure(out.new_text == fs::read_to_string(&path).unwrap(), || format!("{file} was rewritten"))?;
    }
    let moe = corpus().into_iter().find(|c| c.name == "moe_minicpm_like").unwrap();
    let out = fix(&moe.original());
    ensure(out.report.count(TagStatus::Unfixable) == 15 && !out.changed(), || "moe_minicpm_like was touched".into())?;
    Ok(".item(), dynamic-shape ops, tensor loops, impure branches".into())
}

fn ir_proptests() -> Verdict {
    let cases = 256;
    let runner = || TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    let run = |name: &str, r: Result<(), String>| r.map_err(|e| format!("{name}: {e}"));
    run("cfg node count", runner().run(&common::body(), |b| props::cfg_node_count(&b)).map_err(|e| e.to_string()))?;
    run("dominators", runner().run(&common::body(), |b| props::dominators_match_paths(&b)).map_err(|e| e.to_string()))?;
    run("taint", runner().run(&props::straight_line(), |t| props::taint_equals_closure(&t)).map_err(|e| e.to_string()))?;
    run("taint bound", runner().run(&common::body(), |b| props::taint_within_closure(&b)).map_err(|e| e.to_string()))?;
    run("heal", runner().run(&common::body(), |b| props::heal_idempotent(&b)).map_err(|e| e.to_string()))?;
    Ok(format!("cfg count, dominators, taint, heal: {cases} cases each"))
}

fn snapshot(dir: &Path, out: &mut BTreeMap<PathBuf, u64>) {
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            snapshot(&p, out);
        } else {
            let mut h = DefaultHasher::new();
            fs::read(&p).unwrap().hash(&mut h);
            out.insert(p, h.finish());
        }
    }
}

fn cli_contract() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_graphmend");
    let status = |args: &[&str]| Command::new(bin).args(args).env_remove("GRAPHMEND_ATTR_TABLE").output().unwrap().status.code().unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    for case in corpus() {
        let dir = root.join(&case.name);
        fs::create_dir_all(&dir).unwrap();
        fs::copy(case.original(), dir.join("original.py")).unwrap();
        fs::copy(case.transformed(), dir.join("transformed.py")).unwrap();
    }
    fs::write(root.join("broken.py"), "import torch\n\n@torch.compile\ndef f(x:\n    return x\n").unwrap();
    let p = |rel: &str| root.join(rel).to_str().unwrap().to_string();

    let matrix = [
        ("break-free", p("qwen_audio_like/transformed.py"), [0, 0, 0]),
        ("fully fixable", p("qwen_audio_like/original.py"), [1, 1, 0]),
        ("partially fixable", p("longformer_like/original.py"), [1, 1, 1]),
        ("unfixable", p("moe_minicpm_like/original.py"), [1, 1, 1]),
        ("parse error", p("broken.py"), [2, 2, 2]),
    ];
    let mut before = BTreeMap::new();
    snapshot(root, &mut before);
    for (what, file, [analyze, check, diff]) in &matrix {
        let got = [status(&["analyze", file]), status(&["fix", "--check", file]), status(&["fix", "--diff", file])];
        ensure(got == [*analyze, *check, *diff], || format!("{what}: exit codes {got:?}"))?;
    }
    let whole = status(&["fix", "--check", "--jobs", "4", root.to_str().unwrap()]);
    ensure(whole == 2, || format!("--check over the corpus exited {whole}"))?;
    let mut after = BTreeMap::new();
    snapshot(root, &mut after);
    ensure(before == after, || "--check changed the filesystem".into())?;
    Ok(format!("{} rows x analyze/check/diff; --check leaves {} file hashes unchanged", matrix.len(), after.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 7] = [
        ("detection fidelity", detection_fidelity),
        ("golden transforms", golden_transforms),
        ("idempotency", idempotency),
        ("round-trip", round_trip),
        ("unfixable honesty", unfixable_honesty),
        ("IR proptests", ir_proptests),
        ("CLI contract", cli_contract),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                println!("FAIL {name}: {why}");
                failed.push(name);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed: {failed:?}");
        std::process::exit(1);
    }
}
