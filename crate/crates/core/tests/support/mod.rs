#![allow(dead_code)]

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use graphmend_core::frontend::{tokenize, TokenKind};
use graphmend_core::{FileReport, SourceModule};
use serde_json::Value;

pub fn repo_root() -> PathBuf {
    let here = Path::new(env!("CARGO_MANIFEST_DIR"));
    here.ancestors().find(|p| p.join("corpus").is_dir()).expect("repository root").to_path_buf()
}

pub fn unit_dir() -> PathBuf {
    repo_root().join("fixtures/unit")
}

pub fn golden_dir() -> PathBuf {
    repo_root().join("fixtures/golden")
}

fn files_with_ext(dir: &Path, ext: &str) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    out.sort();
    out
}

pub fn unit_fixtures() -> Vec<PathBuf> {
    files_with_ext(&unit_dir(), "py")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedTag {
    pub line: usize,
    pub kind: String,
    pub fixable: bool,
    pub status: String,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Sidecar {
    pub file_skipped: bool,
    pub tags: Vec<ExpectedTag>,
}

/// Reads `name.tags` next to a fixture: one `line kind yes|no status [reason]`
/// per expected tag, or `file skipped`.
pub fn sidecar(fixture: &Path) -> Sidecar {
    let text = fs::read_to_string(fixture.with_extension("tags")).expect("sidecar");
    let mut out = Sidecar::default();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        if line == "file skipped" {
            out.file_skipped = true;
            continue;
        }
        let mut parts = line.splitn(5, ' ');
        let mut next = || parts.next().map(str::to_string);
        out.tags.push(ExpectedTag {
            line: next().unwrap().parse().unwrap(),
            kind: next().unwrap(),
            fixable: next().unwrap() == "yes",
            status: next().unwrap(),
            reason: next(),
        });
    }
    out
}

/// The tags a report actually carries, in sidecar terms.
pub fn reported_tags(report: &FileReport) -> Vec<(usize, String, String, Option<String>)> {
    report
        .tags
        .iter()
        .map(|t| {
            let status = serde_json::to_value(t.status).unwrap().as_str().unwrap().to_string();
            (t.line, format!("{:?}", t.kind), status, t.reason.clone())
        })
        .collect()
}

pub fn expected_tags(tags: &[ExpectedTag]) -> Vec<(usize, String, String, Option<String>)> {
    tags.iter().map(|t| (t.line, t.kind.clone(), t.status.clone(), t.reason.clone())).collect()
}

pub struct CorpusCase {
    pub name: String,
    pub dir: PathBuf,
    pub manifest: Value,
}

impl CorpusCase {
    pub fn original(&self) -> PathBuf {
        self.dir.join(self.manifest["original_path"].as_str().unwrap())
    }

    pub fn transformed(&self) -> PathBuf {
        self.dir.join(self.manifest["transformed_path"].as_str().unwrap())
    }

    pub fn expected(&self) -> Vec<(usize, String, String, Option<String>)> {
        self.manifest["expected_tags"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| {
                (
                    t["line"].as_u64().unwrap() as usize,
                    t["kind"].as_str().unwrap().to_string(),
                    t["status"].as_str().unwrap().to_string(),
                    t.get("reason").and_then(Value::as_str).map(str::to_string),
                )
            })
            .collect()
    }
}

pub fn corpus() -> Vec<CorpusCase> {
    let root = repo_root().join("corpus");
    let mut dirs: Vec<PathBuf> = fs::read_dir(&root).unwrap().map(|e| e.unwrap().path()).filter(|p| p.is_dir()).collect();
    dirs.sort();
    dirs.into_iter()
        .map(|dir| {
            let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
            CorpusCase { name: manifest["name"].as_str().unwrap().to_string(), dir, manifest }
        })
        .collect()
}

/// Expected (tags found, percent fixed) for each corpus program.
pub const TABLE: [(&str, usize, usize); 8] = [
    ("biogpt_like", 2, 100),
    ("blenderbot_like", 3, 100),
    ("flan_t5_like", 3, 100),
    ("longformer_like", 5, 40),
    ("moe_minicpm_like", 15, 0),
    ("phi4_mini_like", 5, 100),
    ("qwen_audio_like", 2, 100),
    ("pegasus_like", 2, 100),
];

/// Token texts with comments and layout-free blank lines dropped, `__gm_*`
/// names and the given names replaced by `$n` in order of first appearance.
pub fn normalized_tokens(text: &str, names: &[&str]) -> Vec<String> {
    let src = SourceModule::new("n.py", text);
    let tokens = tokenize(&src).expect("tokenizes");
    let mut map: HashMap<String, usize> = HashMap::new();
    tokens
        .iter()
        .map(|t| {
            let s = t.text(text);
            match t.kind {
                TokenKind::Name if s.starts_with("__gm_") || names.contains(&s) => {
                    let n = map.len();
                    format!("${}", *map.entry(s.to_string()).or_insert(n))
                }
                TokenKind::Newline => "<nl>".to_string(),
                TokenKind::Indent => "<indent>".to_string(),
                TokenKind::Dedent => "<dedent>".to_string(),
                TokenKind::EndMarker => "<end>".to_string(),
                _ => s.to_string(),
            }
        })
        .collect()
}

/// Names listed on a golden file's `# normalize:` header line.
pub fn golden_names(text: &str) -> Vec<&str> {
    text.lines()
        .find_map(|l| l.strip_prefix("# normalize:"))
        .map(|rest| rest.split_whitespace().collect())
        .unwrap_or_default()
}
