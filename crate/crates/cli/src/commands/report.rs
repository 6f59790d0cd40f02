//! `gec report`: merge every per-run evaluation JSON under
//! `out/eval/` into one cross-system comparison.

use anyhow::{bail, Context, Result};

use super::{read_json, say, write_file, write_json};
use crate::config::Config;
use crate::report::{merge_reports, merged_csv, merged_markdown, EvalReport};

pub fn run_report(config: &Config, quiet: bool) -> Result<()> {
    let eval_dir = config.out_dir().join("eval");
    let entries = std::fs::read_dir(&eval_dir).with_context(|| {
        format!(
            "reading {} (run `gec evaluate` first?)",
            eval_dir.display()
        )
    })?;
    let mut reports: Vec<EvalReport> = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            reports.push(read_json(&path)?);
        }
    }
    if reports.is_empty() {
        bail!("no evaluation reports under {}", eval_dir.display());
    }

    let n = reports.len();
    let merged = merge_reports(reports)?;
    let dir = config.out_dir().join("report");
    write_json(&dir.join("report.json"), &merged)?;
    write_file(&dir.join("report.csv"), &merged_csv(&merged))?;
    write_file(&dir.join("report.md"), &merged_markdown(&merged))?;
    say!(quiet, "merged {} evaluation reports → {}", n, dir.display());
    Ok(())
}
