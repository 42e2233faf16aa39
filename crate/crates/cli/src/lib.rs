//! Batch driver: file discovery, the per-file pipeline, and output modes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use graphmend_core::analysis::{NameList, TorchAttrTable};
use graphmend_core::frontend::unified_diff;
use graphmend_core::transform::FileStatus;
use graphmend_core::uniir::dump_ir;
use graphmend_core::{fix_file, Error, FileReport, FixOptions, FixReport, SourceModule, UniIr};
use rayon::prelude::*;

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_BREAKS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Output {
    InPlace,
    OutDir(PathBuf),
    Diff,
    Check,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    Analyze,
    Fix(Output),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub paths: Vec<PathBuf>,
    pub mode: Mode,
    pub report_format: ReportFormat,
    pub attr_table_path: Option<PathBuf>,
    pub allowlist_path: Option<PathBuf>,
    pub dynamic_shape_ops_path: Option<PathBuf>,
    pub jobs: usize,
    pub dump_ir: bool,
}

impl RunConfig {
    pub fn new(paths: Vec<PathBuf>, mode: Mode) -> Self {
        RunConfig {
            paths,
            mode,
            report_format: ReportFormat::Text,
            attr_table_path: None,
            allowlist_path: None,
            dynamic_shape_ops_path: None,
            jobs: 1,
            dump_ir: false,
        }
    }

    pub fn options(&self) -> Result<FixOptions, Error> {
        let mut options = FixOptions::default();
        if let Some(p) = &self.attr_table_path {
            options.analysis.attr_table = TorchAttrTable::load(p)?;
        }
        if let Some(p) = &self.dynamic_shape_ops_path {
            options.analysis.dynamic_shape_ops = NameList::load(p)?;
        }
        if let Some(p) = &self.allowlist_path {
            options.allowlist = NameList::load(p)?;
        }
        Ok(options)
    }
}

/// An input file and the root it was discovered under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Input {
    pub path: PathBuf,
    pub relative: PathBuf,
}

/// Expands directories into the `.py` files below them, skipping hidden
/// directories. Plain files are taken as given. Missing paths are returned
/// as errors alongside the inputs that were found.
pub fn discover(paths: &[PathBuf]) -> (Vec<Input>, Vec<(PathBuf, Error)>) {
    let mut inputs = Vec::new();
    let mut errors = Vec::new();
    for root in paths {
        if root.is_dir() {
            walk(root, &mut inputs, &mut errors);
        } else if root.is_file() {
            let relative = root.file_name().map(PathBuf::from).unwrap_or_else(|| root.clone());
            inputs.push(Input { path: root.clone(), relative });
        } else {
            let err = std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory");
            errors.push((root.clone(), Error::io(root, err)));
        }
    }
    inputs.sort_by(|a, b| a.path.cmp(&b.path));
    inputs.dedup_by(|a, b| a.path == b.path);
    (inputs, errors)
}

fn walk(root: &Path, inputs: &mut Vec<Input>, errors: &mut Vec<(PathBuf, Error)>) {
    let hidden = |e: &walkdir::DirEntry| e.depth() > 0 && e.file_name().to_str().is_some_and(|n| n.starts_with('.'));
    let walker = walkdir::WalkDir::new(root).sort_by_file_name().into_iter();
    for entry in walker.filter_entry(|e| !(e.file_type().is_dir() && hidden(e))) {
        match entry {
            Ok(e) if e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "py") => {
                let relative = e.path().strip_prefix(root).unwrap_or(e.path()).to_path_buf();
                inputs.push(Input { path: e.into_path(), relative });
            }
            Ok(_) => {}
            Err(e) => {
                let path = e.path().unwrap_or(root).to_path_buf();
                errors.push((path.clone(), Error::io(&path, e.into())));
            }
        }
    }
}

struct FileResult {
    report: FileReport,
    diff: String,
    dump: String,
    exit: i32,
}

fn error_report(path: &Path, err: &Error) -> FileReport {
    let mut report = FileReport::new(path.display().to_string(), FileStatus::Error);
    report.message = Some(err.to_string());
    report
}

fn process(input: &Input, config: &RunConfig, options: &FixOptions) -> FileResult {
    let failed = |report: FileReport| FileResult { report, diff: String::new(), dump: String::new(), exit: EXIT_ERROR };
    let source = match SourceModule::read(&input.path) {
        Ok(s) => s,
        Err(e) => return failed(error_report(&input.path, &e)),
    };
    let dump = if config.dump_ir {
        UniIr::build(source.clone()).map(|ir| dump_ir(&ir)).unwrap_or_default()
    } else {
        String::new()
    };
    let outcome = fix_file(&source, options);
    let mut report = outcome.report;
    if matches!(report.status, FileStatus::Error | FileStatus::Aborted) {
        return FileResult { report, diff: String::new(), dump, exit: EXIT_ERROR };
    }
    let mut diff = String::new();
    let mut exit = match &config.mode {
        Mode::Analyze | Mode::Fix(Output::Check) => {
            if report.tags.is_empty() {
                EXIT_CLEAN
            } else {
                EXIT_BREAKS
            }
        }
        Mode::Fix(_) => {
            if report.remaining() == 0 {
                EXIT_CLEAN
            } else {
                EXIT_BREAKS
            }
        }
    };
    let written = match &config.mode {
        Mode::Fix(Output::InPlace) if outcome.new_text != source.text() => fs::write(&input.path, &outcome.new_text)
            .map_err(|e| Error::io(&input.path, e)),
        Mode::Fix(Output::OutDir(dir)) => {
            let target = dir.join(&input.relative);
            target
                .parent()
                .map_or(Ok(()), fs::create_dir_all)
                .and_then(|_| fs::write(&target, &outcome.new_text))
                .map_err(|e| Error::io(&target, e))
        }
        Mode::Fix(Output::Diff) => {
            diff = unified_diff(&input.path.display().to_string(), source.text(), &outcome.new_text);
            Ok(())
        }
        _ => Ok(()),
    };
    if let Err(e) = written {
        report.status = FileStatus::Error;
        report.message = Some(e.to_string());
        exit = EXIT_ERROR;
    }
    FileResult { report, diff, dump, exit }
}

/// Runs the configured mode over every input and returns the exit code:
/// 0 when no breaks remain, 1 when some do, 2 when any file failed.
pub fn run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let options = match config.options() {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "graphmend: {e}");
            return EXIT_ERROR;
        }
    };
    let (inputs, missing) = discover(&config.paths);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(config.jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "graphmend: {e}");
            return EXIT_ERROR;
        }
    };
    let results: Vec<FileResult> = pool.install(|| inputs.par_iter().map(|i| process(i, config, &options)).collect());

    let mut exit = if missing.is_empty() { EXIT_CLEAN } else { EXIT_ERROR };
    let mut reports: Vec<FileReport> = missing.iter().map(|(p, e)| error_report(p, e)).collect();
    for r in results {
        exit = exit.max(r.exit);
        if !r.dump.is_empty() {
            let _ = write!(out, "{}", r.dump);
        }
        if !r.diff.is_empty() {
            let _ = write!(out, "{}", r.diff);
        }
        reports.push(r.report);
    }
    let report = FixReport::new(reports);
    let rendered = match config.report_format {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Json => report.to_json() + "\n",
    };
    let sink: &mut dyn Write = match config.mode {
        Mode::Analyze => out,
        Mode::Fix(_) => err,
    };
    let _ = write!(sink, "{rendered}");
    exit
}
