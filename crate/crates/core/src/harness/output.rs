//! CSV output.

use std::path::Path;

use super::runner::{ExperimentResults, ReferenceCoefficients};
use crate::error::{BanditError, Result};

/// Formats with 9 significant digits, dropping trailing zeros.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..=14).contains(&mag) {
        return format!("{x:.8e}");
    }
    let s = format!("{:.*}", (8 - mag).max(0) as usize, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn csv_err(e: csv::Error) -> BanditError {
    BanditError::Io(e.to_string())
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(csv_err)
}

/// Writes `summary.csv`, `runs.csv`, `reference.csv`, one `trace_<algo>_<rep>.csv`
/// per run and, when runs aborted, `failures.csv`.
pub fn write_results(dir: &Path, results: &ExperimentResults, reference: Option<&ReferenceCoefficients>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = writer(&dir.join("summary.csv"))?;
    w.write_record(["algorithm", "checkpoint", "mean_regret", "std_regret"]).map_err(csv_err)?;
    for s in &results.summaries {
        for (i, &c) in results.checkpoints.iter().enumerate() {
            w.write_record([s.algorithm.name(), &c.to_string(), &fmt_sig9(s.mean[i]), &fmt_sig9(s.std[i])])
                .map_err(csv_err)?;
        }
    }
    w.flush()?;

    let mut runs = writer(&dir.join("runs.csv"))?;
    runs.write_record(["algorithm", "rep", "seed", "explore_rounds", "exploit_rounds", "counts"]).map_err(csv_err)?;
    for t in &results.traces {
        let counts: Vec<String> = t.counts.iter().map(|c| c.to_string()).collect();
        runs.write_record([
            t.algorithm.name(),
            &t.rep.to_string(),
            &t.seed.to_string(),
            &t.explore_rounds.to_string(),
            &t.exploit_rounds.to_string(),
            &counts.join(";"),
        ])
        .map_err(csv_err)?;
        let mut tw = writer(&dir.join(format!("trace_{}_{}.csv", t.algorithm.name(), t.rep)))?;
        tw.write_record(["checkpoint", "regret"]).map_err(csv_err)?;
        for (c, r) in results.checkpoints.iter().zip(&t.regret) {
            tw.write_record([c.to_string(), fmt_sig9(*r)]).map_err(csv_err)?;
        }
        tw.flush()?;
    }
    runs.flush()?;

    if let Some(r) = reference {
        let mut rw = writer(&dir.join("reference.csv"))?;
        rw.write_record(["checkpoint", "unconstrained", "structural"]).map_err(csv_err)?;
        for (c, a, b) in r.curves(&results.checkpoints) {
            rw.write_record([c.to_string(), fmt_sig9(a), fmt_sig9(b)]).map_err(csv_err)?;
        }
        rw.flush()?;
    }

    let failures = dir.join("failures.csv");
    if results.failures.is_empty() {
        if failures.exists() {
            std::fs::remove_file(&failures)?;
        }
    } else {
        let mut fw = writer(&failures)?;
        fw.write_record(["algorithm", "rep", "seed", "message"]).map_err(csv_err)?;
        for f in &results.failures {
            fw.write_record([f.algorithm.name(), &f.rep.to_string(), &f.seed.to_string(), &f.message])
                .map_err(csv_err)?;
        }
        fw.flush()?;
    }
    Ok(())
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    pub checkpoint: u64,
    pub mean_regret: f64,
    pub std_regret: f64,
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| BanditError::Io(format!("bad summary field {i} in {rec:?}")))
        };
        rows.push(SummaryRow {
            algorithm: rec.get(0).unwrap_or_default().to_string(),
            checkpoint: num(1)? as u64,
            mean_regret: num(2)?,
            std_regret: num(3)?,
        });
    }
    Ok(rows)
}

/// `(checkpoint, regret)` rows of a trace file.
pub fn read_trace(path: &Path) -> Result<Vec<(u64, f64)>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let c = rec.get(0).and_then(|s| s.parse().ok());
        let v = rec.get(1).and_then(|s| s.parse().ok());
        match (c, v) {
            (Some(c), Some(v)) => rows.push((c, v)),
            _ => return Err(BanditError::Io(format!("bad trace row {rec:?}"))),
        }
    }
    Ok(rows)
}
