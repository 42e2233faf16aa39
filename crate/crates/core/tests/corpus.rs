mod support;

use std::fs;
use std::time::{Duration, Instant};

use graphmend_core::{fix_file, FixOptions, SourceModule, TagStatus};
use support::*;

#[test]
fn corpus_counts_match_expected_rates() {
    let cases = corpus();
    assert_eq!(cases.len(), TABLE.len());
    for (name, found, percent) in TABLE {
        let case = cases.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("missing {name}"));
        let out = fix_file(&SourceModule::read(case.original()).unwrap(), &FixOptions::default());
        assert_eq!((out.report.tags.len(), out.report.fixed_percent()), (found, percent), "{name}");
    }
}

#[test]
fn corpus_tags_match_manifests() {
    for case in corpus() {
        let out = fix_file(&SourceModule::read(case.original()).unwrap(), &FixOptions::default());
        assert_eq!(reported_tags(&out.report), case.expected(), "{}", case.name);
        let m = &case.manifest;
        let before = m["expected_breaks_before"].as_u64().unwrap() as usize;
        let after = m["expected_breaks_after"].as_u64().unwrap() as usize;
        assert!(after <= before);
        assert_eq!(out.report.tags.len(), before, "{}", case.name);
        assert_eq!(out.report.remaining(), after, "{}", case.name);
        assert_eq!(out.report.fixed_percent() as u64, m["expected_fixed_percent"].as_u64().unwrap());
    }
}

#[test]
fn checked_in_transforms_are_current() {
    for case in corpus() {
        let out = fix_file(&SourceModule::read(case.original()).unwrap(), &FixOptions::default());
        let stored = fs::read_to_string(case.transformed()).unwrap();
        assert_eq!(out.new_text, stored, "{} is stale", case.name);
    }
}

#[test]
fn transformed_corpus_keeps_only_unfixable_breaks() {
    for case in corpus() {
        let out = fix_file(&SourceModule::read(case.transformed()).unwrap(), &FixOptions::default());
        let remaining = case.manifest["expected_breaks_after"].as_u64().unwrap() as usize;
        assert_eq!(out.report.tags.len(), remaining, "{}", case.name);
        assert_eq!(out.report.count(TagStatus::Fixed), 0, "{}", case.name);
    }
}

#[test]
fn longformer_fixes_loggers_and_reports_item_reads() {
    let case = corpus().into_iter().find(|c| c.name == "longformer_like").unwrap();
    let out = fix_file(&SourceModule::read(case.original()).unwrap(), &FixOptions::default());
    for t in &out.report.tags {
        match format!("{:?}", t.kind).as_str() {
            "LoggerPrint" => assert_eq!(t.status, TagStatus::Fixed),
            "ItemAccess" => assert_eq!(t.status, TagStatus::Unfixable),
            other => panic!("unexpected {other}"),
        }
    }
}

#[test]
fn detection_over_all_fixtures_is_fast() {
    let mut files: Vec<SourceModule> = corpus().iter().map(|c| SourceModule::read(c.original()).unwrap()).collect();
    files.extend(unit_fixtures().iter().map(|p| SourceModule::read(p).unwrap()));
    let start = Instant::now();
    for f in &files {
        fix_file(f, &FixOptions::default());
    }
    assert!(start.elapsed() < Duration::from_secs(1), "{:?}", start.elapsed());
}
