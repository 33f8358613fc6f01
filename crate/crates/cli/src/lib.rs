//! Command-line harness for the biphoton source toolkit: configuration,
//! experiment drivers, fixture parsing, and report rendering.

pub mod config;
pub mod experiments;
pub mod fixtures;
pub mod reference;
pub mod report;

use std::path::Path;

use anyhow::{Context, Result};

use experiments::ExperimentOutput;

/// Write the report (and CSV artifacts) of a run into `dir`, honoring the
/// configured format list: `text` → `report.txt`, `json` → `report.json`,
/// `csv` → one file per artifact.
pub fn write_outputs(output: &ExperimentOutput, dir: &Path, formats: &[String]) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let write = |name: &str, contents: &str| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
    };
    if formats.iter().any(|f| f == "text") {
        write("report.txt", &output.report.render_text())?;
    }
    if formats.iter().any(|f| f == "json") {
        write("report.json", &output.report.render_json())?;
    }
    if formats.iter().any(|f| f == "csv") {
        for artifact in &output.artifacts {
            write(&artifact.filename, &artifact.contents)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use experiments::Artifact;
    use report::{ExperimentReport, RunMode};

    #[test]
    fn outputs_honor_the_format_list() {
        let out = ExperimentOutput {
            report: ExperimentReport::new("chsh", RunMode::Exact),
            artifacts: vec![Artifact {
                filename: "terms.csv".into(),
                contents: "a,b\n1,2\n".into(),
            }],
        };
        let dir = tempfile::tempdir().unwrap();

        write_outputs(&out, dir.path(), &["text".into(), "csv".into()]).unwrap();
        assert!(dir.path().join("report.txt").exists());
        assert!(dir.path().join("terms.csv").exists());
        assert!(!dir.path().join("report.json").exists());

        write_outputs(&out, dir.path(), &["json".into()]).unwrap();
        assert!(dir.path().join("report.json").exists());
    }
}
