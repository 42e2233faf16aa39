mod support;

use std::fs;

use graphmend_core::analysis::{analyze, AnalysisConfig, BreakKind};
use graphmend_core::frontend::unified_diff;
use graphmend_core::transform::FileStatus;
use graphmend_core::uniir::dump_ir;
use graphmend_core::{fix_file, FixOptions, SourceModule, UniIr};
use support::*;

fn fix(path: &std::path::Path) -> graphmend_core::FixOutcome {
    fix_file(&SourceModule::read(path).unwrap(), &FixOptions::default())
}

#[test]
fn there_are_enough_unit_fixtures() {
    assert!(unit_fixtures().len() >= 12, "{}", unit_fixtures().len());
}

#[test]
fn unit_fixture_tags_match_sidecars() {
    for path in unit_fixtures() {
        let expected = sidecar(&path);
        let out = fix(&path);
        let name = path.display();
        if expected.file_skipped {
            assert_eq!(out.report.status, FileStatus::Skipped, "{name}");
        } else {
            assert_eq!(out.report.status, FileStatus::Ok, "{name}");
        }
        assert_eq!(reported_tags(&out.report), expected_tags(&expected.tags), "{name}");

        let src = SourceModule::read(&path).unwrap();
        let ir = UniIr::build(src.clone()).unwrap();
        let tags = analyze(&ir, &AnalysisConfig::default()).tags;
        let fixable: Vec<(usize, bool)> =
            tags.iter().map(|t| (src.line_col(ir.ast.span(t.site).start).0, t.fixable)).collect();
        let want: Vec<(usize, bool)> = expected.tags.iter().map(|t| (t.line, t.fixable)).collect();
        assert_eq!(fixable, want, "{name}");
    }
}

#[test]
fn mixed_fixture_has_three_fixable_and_one_not() {
    let src = SourceModule::read(unit_dir().join("mixed.py")).unwrap();
    let ir = UniIr::build(src).unwrap();
    let tags = analyze(&ir, &AnalysisConfig::default()).tags;
    let kinds: Vec<(BreakKind, bool)> = tags.iter().map(|t| (t.kind, t.fixable)).collect();
    assert_eq!(
        kinds,
        [
            (BreakKind::DynCtrlFl, true),
            (BreakKind::LoggerPrint, true),
            (BreakKind::LoggerPrint, true),
            (BreakKind::ItemAccess, false)
        ]
    );
}

#[test]
fn cfg_dumps_match_expected_graphs() {
    let mut checked = 0;
    for path in unit_fixtures() {
        let golden = path.with_extension("cfg");
        if !golden.exists() {
            continue;
        }
        let ir = UniIr::build(SourceModule::read(&path).unwrap()).unwrap();
        let dump = dump_ir(&ir);
        let cfg = &dump[dump.find("cfg ").unwrap()..];
        assert_eq!(cfg, fs::read_to_string(&golden).unwrap(), "{}", path.display());
        checked += 1;
    }
    assert!(checked >= 3);
}

fn assert_golden(input: &str, golden: &str) {
    let out = fix(&unit_dir().join(input));
    let golden = fs::read_to_string(golden_dir().join(golden)).unwrap();
    let names = golden_names(&golden);
    // The header line is a comment, so it drops out of the token stream.
    assert_eq!(normalized_tokens(&out.new_text, &names), normalized_tokens(&golden, &names), "{}", out.new_text);
}

#[test]
fn branch_select_rewrites_to_golden() {
    assert_golden("branch_select.py", "branch_select.py");
    let out = fix(&unit_dir().join("branch_select.py"));
    let body: Vec<&str> = out.new_text.lines().skip_while(|l| !l.starts_with("def f")).collect();
    assert!(!body.iter().any(|l| l.trim_start().starts_with("if ") || l.trim() == "else:"));
    assert_eq!(out.new_text.matches("torch.where(").count(), 1);
    assert!(body.iter().any(|l| l.trim().ends_with("= x.sum() > 10")));
}

#[test]
fn print_stats_rewrites_to_golden() {
    assert_golden("print_stats.py", "print_stats.py");
    let out = fix(&unit_dir().join("print_stats.py"));
    let lines: Vec<&str> = out.new_text.lines().map(str::trim).collect();
    let capture = lines.iter().position(|l| l.starts_with("__gm_defer_0 = (\"tensor:\", x)")).unwrap();
    let hoist = lines.iter().position(|l| l.ends_with("= torch.sin(x)")).unwrap();
    let replay = lines.iter().position(|l| *l == "print(*__gm_defer_0)").unwrap();
    let ret = lines.iter().position(|l| l.starts_with("return ")).unwrap();
    assert!(capture < hoist && hoist < replay && replay < ret);
}

#[test]
fn comparator_sees_structural_differences() {
    let names = ["cond"];
    let a = "cond = x > 1\nz = torch.where(cond, a, b)\n";
    let b = "__gm_pred_0 = x > 1\nz = torch.where(__gm_pred_0, a, b)\n";
    let c = "__gm_pred_0 = x > 1\nz = torch.where(__gm_pred_0, b, a)\n";
    assert_eq!(normalized_tokens(a, &names), normalized_tokens(b, &names));
    assert_ne!(normalized_tokens(a, &names), normalized_tokens(c, &names));
}

#[test]
fn branch_select_diff_replaces_four_lines_with_four() {
    let path = unit_dir().join("branch_select.py");
    let src = SourceModule::read(&path).unwrap();
    let out = fix(&path);
    let diff = unified_diff("branch_select.py", src.text(), &out.new_text);
    let body: Vec<&str> = diff.lines().filter(|l| !l.starts_with("---") && !l.starts_with("+++")).collect();
    let removed: Vec<&str> = body.iter().filter(|l| l.starts_with('-')).map(|l| l[1..].trim()).collect();
    let added = body.iter().filter(|l| l.starts_with('+')).count();
    assert_eq!(removed, ["if x.sum() > 10: # host branch", "z = x_1 + y_1", "else:", "z = x_1 * y_1"]);
    assert_eq!(added, 4);
}

fn all_inputs() -> Vec<std::path::PathBuf> {
    let mut files = unit_fixtures();
    files.extend(corpus().iter().map(|c| c.original()));
    files
}

#[test]
fn second_pass_is_a_fixed_point() {
    for path in all_inputs() {
        let first = fix(&path);
        let again = fix_file(&SourceModule::new(&path, first.new_text.clone()), &FixOptions::default());
        assert_eq!(again.new_text, first.new_text, "{}", path.display());
        assert_eq!(again.report.edits, 0, "{}", path.display());
        assert!(!again.changed());
    }
}

#[test]
fn files_without_fixable_tags_round_trip() {
    let mut seen = 0;
    for path in all_inputs() {
        let out = fix(&path);
        let src = fs::read_to_string(&path).unwrap();
        if out.report.count(graphmend_core::TagStatus::Fixed) == 0 {
            assert_eq!(out.new_text, src, "{}", path.display());
            seen += 1;
        }
    }
    assert!(seen >= 5);
}

#[test]
fn unfixable_causes_carry_reasons() {
    let cases = [
        ("item_access.py", "unfixable", "host read of tensor value"),
        ("dynamic_shape.py", "unfixable", "dynamic-shape operator"),
        ("tensor_while.py", "unfixable", "loop"),
        ("impure_branch.py", "skipped", "impure branch"),
    ];
    for (file, status, reason) in cases {
        let path = unit_dir().join(file);
        let out = fix(&path);
        assert!(!out.report.tags.is_empty(), "{file}");
        for (_, _, s, r) in reported_tags(&out.report) {
            assert_eq!(s, status, "{file}");
            assert_eq!(r.as_deref(), Some(reason), "{file}");
        }
        assert_eq!(out.new_text, fs::read_to_string(&path).unwrap(), "{file} was rewritten");
    }
}

#[test]
fn every_tag_is_fixed_or_explained() {
    for path in all_inputs() {
        for t in fix(&path).report.tags {
            let fixed = t.status == graphmend_core::TagStatus::Fixed;
            assert!(fixed || t.reason.is_some(), "{}:{}", path.display(), t.line);
        }
    }
}
