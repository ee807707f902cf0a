//! `history.csv` serialization: one long-format row per recorded value,
//! `iter,field,index,value`, so weight trajectories and inner trace
//! sequences stay diffable.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use spca_core::io::format_f64;
use spca_core::{IterationRecord, TrainingHistory};

pub fn history_to_csv(history: &TrainingHistory) -> String {
    let mut out = String::from("iter,field,index,value\n");
    for (t, rec) in history.records.iter().enumerate() {
        let _ = writeln!(out, "{t},objective,0,{}", format_f64(rec.objective));
        for (i, &v) in rec.ell_raw.iter().enumerate() {
            let _ = writeln!(out, "{t},ell_raw,{i},{}", format_f64(v));
        }
        for (i, &v) in rec.ell_norm.iter().enumerate() {
            let _ = writeln!(out, "{t},ell_norm,{i},{}", format_f64(v));
        }
        for (i, &v) in rec.weights.iter().enumerate() {
            let _ = writeln!(out, "{t},weight,{i},{}", format_f64(v));
        }
        for (i, &v) in rec.trace_objective.iter().enumerate() {
            let _ = writeln!(out, "{t},trace,{i},{}", format_f64(v));
        }
    }
    out
}

pub fn write_history(history: &TrainingHistory, path: &Path) -> Result<()> {
    std::fs::write(path, history_to_csv(history))
        .with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_history(path: &Path) -> Result<TrainingHistory> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read history {}", path.display()))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("iter,field,index,value") => {}
        other => bail!("{}: bad history header {other:?}", path.display()),
    }
    let mut records: Vec<IterationRecord> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            bail!("{} line {}: expected 4 fields", path.display(), lineno + 2);
        }
        let iter: usize = parts[0].parse().context("bad iter")?;
        let index: usize = parts[2].parse().context("bad index")?;
        let value: f64 = parts[3].parse().context("bad value")?;
        while records.len() <= iter {
            records.push(IterationRecord {
                ell_raw: Vec::new(),
                ell_norm: Vec::new(),
                weights: Vec::new(),
                objective: 0.0,
                trace_objective: Vec::new(),
                inner_iters: 0,
            });
        }
        let rec = &mut records[iter];
        let push_at = |v: &mut Vec<f64>, index: usize, value: f64| -> Result<()> {
            if index != v.len() {
                bail!("out-of-order index {index} (expected {})", v.len());
            }
            v.push(value);
            Ok(())
        };
        match parts[1] {
            "objective" => rec.objective = value,
            "ell_raw" => push_at(&mut rec.ell_raw, index, value)?,
            "ell_norm" => push_at(&mut rec.ell_norm, index, value)?,
            "weight" => push_at(&mut rec.weights, index, value)?,
            "trace" => {
                push_at(&mut rec.trace_objective, index, value)?;
                rec.inner_iters = rec.trace_objective.len();
            }
            other => bail!("{} line {}: unknown field {other:?}", path.display(), lineno + 2),
        }
    }
    if records.is_empty() {
        bail!("{}: history has no records", path.display());
    }
    Ok(TrainingHistory { records })
}
