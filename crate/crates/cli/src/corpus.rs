//! Fixture corpus runner.
//!
//! A corpus is a directory of `*.toml` manifests next to the `.sos` files
//! they reference:
//!
//! ```toml
//! description = "formal-hypothesis bisimilarity breaks under a new label"
//! specs = ["unary_identity.sos"]
//!
//! [[case]]
//! name = "fh on the base"
//! args = ["check", "fh", "f(x)", "x", "--tss", "F"]
//! exit = 0
//! contains = ["holds"]
//! ```
//!
//! Each case is an ordinary command line; the manifest's specs are passed as
//! `--spec` arguments. A case passes when the exit code matches and every
//! `contains` string occurs in the text output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::{GlobalOpts, InputError, Outcome, Report, EXIT_FAILS, EXIT_OK};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub description: String,
    pub specs: Vec<String>,
    #[serde(default, rename = "case")]
    pub cases: Vec<Case>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case {
    pub name: String,
    pub args: Vec<String>,
    pub exit: i32,
    #[serde(default)]
    pub contains: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Row {
    pub fixture: String,
    pub case: String,
    pub expected: i32,
    pub actual: Option<i32>,
    pub passed: bool,
    /// Why the case failed, if it did.
    pub problem: Option<String>,
    pub output: String,
    /// The case's own JSON report, when it produced one.
    pub report: Option<serde_json::Value>,
}

fn run_case(dir: &Path, specs: &[String], case: &Case, json: bool) -> (i32, String, String) {
    let mut argv: Vec<String> = vec!["opensos".into()];
    argv.extend(case.args.iter().cloned());
    if json {
        argv.push("--json".into());
    }
    for s in specs {
        argv.push("--spec".into());
        argv.push(dir.join(s).to_string_lossy().into_owned());
    }
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = crate::run(argv, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

fn run_fixture(dir: &Path, manifest_path: &Path) -> Vec<Row> {
    let fixture = manifest_path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
    let broken = |problem: String| {
        vec![Row {
            fixture: fixture.clone(),
            case: "<manifest>".into(),
            expected: EXIT_OK,
            actual: None,
            passed: false,
            problem: Some(problem),
            output: String::new(),
            report: None,
        }]
    };
    let text = match std::fs::read_to_string(manifest_path) {
        Ok(t) => t,
        Err(e) => return broken(format!("unreadable manifest: {e}")),
    };
    let manifest: Manifest = match toml::from_str(&text) {
        Ok(m) => m,
        Err(e) => return broken(format!("invalid manifest: {e}")),
    };
    if let Some(missing) = manifest.specs.iter().find(|s| !dir.join(s).is_file()) {
        return broken(format!("manifest names missing spec `{missing}`"));
    }
    manifest
        .cases
        .iter()
        .map(|case| {
            let (code, out, err) = run_case(dir, &manifest.specs, case, false);
            let (_, json_out, _) = run_case(dir, &manifest.specs, case, true);
            let report = serde_json::from_str(&json_out).ok();
            let missing: Vec<&String> = case.contains.iter().filter(|c| !out.contains(c.as_str())).collect();
            let problem = if code != case.exit {
                Some(format!("exit {code}, expected {}{}", case.exit, if err.is_empty() { String::new() } else { format!(": {}", err.trim()) }))
            } else if !missing.is_empty() {
                Some(format!("output lacks {missing:?}"))
            } else {
                None
            };
            Row {
                fixture: fixture.clone(),
                case: case.name.clone(),
                expected: case.exit,
                actual: Some(code),
                passed: problem.is_none(),
                problem,
                output: out,
                report,
            }
        })
        .collect()
}

/// Runs every manifest in `dir`, fixtures in parallel; rows are ordered by
/// fixture name and then by their order in the manifest.
pub fn run_dir(dir: &Path) -> Result<Vec<Row>, InputError> {
    let entries = std::fs::read_dir(dir).map_err(|e| InputError(format!("{}: {e}", dir.display())))?;
    let mut manifests: Vec<PathBuf> = entries
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    manifests.sort();
    let rows = std::thread::scope(|scope| {
        let handles: Vec<_> = manifests.iter().map(|m| scope.spawn(move || run_fixture(dir, m))).collect();
        handles.into_iter().flat_map(|h| h.join().expect("fixture thread panicked")).collect()
    });
    Ok(rows)
}

pub(crate) fn run_corpus(dir: &Path, _global: &GlobalOpts) -> Result<Outcome, InputError> {
    let rows = run_dir(dir)?;
    let failed = rows.iter().filter(|r| !r.passed).count();
    let mut text = String::new();
    let width = rows.iter().map(|r| r.fixture.len() + r.case.len() + 3).max().unwrap_or(0);
    writeln!(text, "{:<width$}  expected  actual  status", "fixture / case").unwrap();
    for r in &rows {
        let label = format!("{} / {}", r.fixture, r.case);
        let actual = r.actual.map(|a| a.to_string()).unwrap_or_else(|| "-".into());
        let status = if r.passed { "pass".to_string() } else { format!("FAIL ({})", r.problem.as_deref().unwrap_or("")) };
        writeln!(text, "{label:<width$}  {:>8}  {actual:>6}  {status}", r.expected).unwrap();
    }
    writeln!(text, "{} case(s), {} failed", rows.len(), failed).unwrap();
    let details = rows.iter().map(|r| json!(r)).collect();
    let report = Report {
        analysis: "corpus".into(),
        tss: String::new(),
        verdict: if failed == 0 { "pass".into() } else { "fail".into() },
        details,
    };
    Ok(Outcome { report, text, code: if failed == 0 { EXIT_OK } else { EXIT_FAILS } })
}
