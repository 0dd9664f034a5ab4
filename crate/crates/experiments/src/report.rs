use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// One checked claim of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Common surface of experiment reports.
pub trait ExperimentReport: Serialize {
    fn name(&self) -> &'static str;
    fn assertions(&self) -> &[Assertion];
    /// `(file name, contents)` of the CSV artifacts.
    fn csv_artifacts(&self) -> Vec<(String, String)>;

    fn passed(&self) -> bool {
        self.assertions().iter().all(|a| a.passed)
    }
}

/// Writes `report.json` and the CSV artifacts into `root/<experiment name>/`.
pub fn write_artifacts<R: ExperimentReport + ?Sized>(report: &R, root: &Path) -> io::Result<PathBuf> {
    let dir = root.join(report.name());
    fs::create_dir_all(&dir)?;
    let json = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
    fs::write(dir.join("report.json"), json + "\n")?;
    for (file, body) in report.csv_artifacts() {
        fs::write(dir.join(file), body)?;
    }
    Ok(dir)
}

/// CSV text from a header and rows of numbers.
pub(crate) fn csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// `a[i] / a[i+1]` for consecutive entries.
pub(crate) fn successive_ratios(a: &[f64]) -> Vec<f64> {
    a.windows(2).map(|w| w[0] / w[1]).collect()
}

pub(crate) fn strictly_decreasing(a: &[f64]) -> bool {
    a.windows(2).all(|w| w[1] < w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Dummy {
        assertions: Vec<Assertion>,
    }

    impl ExperimentReport for Dummy {
        fn name(&self) -> &'static str {
            "dummy"
        }
        fn assertions(&self) -> &[Assertion] {
            &self.assertions
        }
        fn csv_artifacts(&self) -> Vec<(String, String)> {
            vec![("table.csv".into(), csv("a,b", [vec![1.0, 0.5]]))]
        }
    }

    #[test]
    fn csv_uses_scientific_notation() {
        assert_eq!(csv("x,y", [vec![1.0, 0.25]]), "x,y\n1e0,2.5e-1\n");
    }

    #[test]
    fn ratio_and_monotonicity_helpers() {
        assert_eq!(successive_ratios(&[8.0, 4.0, 1.0]), vec![2.0, 4.0]);
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0]));
    }

    #[test]
    fn artifacts_land_in_named_directory() {
        let tmp = tempfile::tempdir().unwrap();
        let rep = Dummy { assertions: vec![Assertion::new("ok", true, ""), Assertion::new("bad", false, "x")] };
        assert!(!rep.passed());
        let dir = write_artifacts(&rep, tmp.path()).unwrap();
        assert_eq!(dir, tmp.path().join("dummy"));
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
        assert_eq!(json["assertions"][1]["passed"], false);
        assert_eq!(fs::read_to_string(dir.join("table.csv")).unwrap(), "a,b\n1e0,5e-1\n");
    }
}
