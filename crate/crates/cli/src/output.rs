use std::io::Write;

use asi_sim::dynamics::PopulationSeries;
use asi_sim::scenarios::{ScenarioSummary, SweepPoint};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub time_ns: f64,
    pub label: String,
    pub probability: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JsonDocument {
    pub records: Vec<Record>,
    pub summary: ScenarioSummary,
}

/// Time-major records, one per (sample, label).
pub fn records(series: &PopulationSeries) -> Vec<Record> {
    let mut out = Vec::with_capacity(series.times.len() * series.labels.len());
    for (k, &t) in series.times.iter().enumerate() {
        for (label, values) in series.labels.iter().zip(&series.values) {
            // + 0.0 folds −0 into 0
            out.push(Record { time_ns: t * 1e9, label: label.clone(), probability: values[k] + 0.0 });
        }
    }
    out
}

pub fn write_csv(w: &mut impl Write, records: &[Record]) -> std::io::Result<()> {
    w.write_all(b"time_ns,label,probability\n")?;
    for r in records {
        writeln!(w, "{:.6},{},{:.9}", r.time_ns + 0.0, r.label, r.probability)?;
    }
    Ok(())
}

pub fn write_json(w: &mut impl Write, records: Vec<Record>, summary: ScenarioSummary) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, &JsonDocument { records, summary })?;
    w.write_all(b"\n")
}

pub fn write_sweep_csv(w: &mut impl Write, points: &[SweepPoint]) -> std::io::Result<()> {
    w.write_all(b"x,extracted_mhz,raw_mhz,analytic_mhz,contrast\n")?;
    for p in points {
        let ext = p.extracted_mhz.map(|v| format!("{v:.6}")).unwrap_or_default();
        writeln!(w, "{:.6},{},{:.6},{:.6},{:.9}", p.x, ext, p.raw_mhz, p.analytic_mhz, p.contrast)?;
    }
    Ok(())
}
