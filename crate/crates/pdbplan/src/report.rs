//! Run reports: per-task JSON and batch CSV.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub task: String,
    pub seed: u64,
    pub status: String,
    pub plan_cost: Option<u64>,
    pub initial_h: u64,
    pub expansions: u64,
    pub evaluations: u64,
    pub generated: u64,
    pub construction_time: f64,
    pub search_time: f64,
    pub total_time: f64,
    pub num_collections: usize,
    pub num_pdbs: usize,
    pub pdb_memory_bytes: u64,
    pub collections_by_generator: Vec<(String, usize)>,
}

impl RunReport {
    pub fn write_json(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        writeln!(f)
    }
}

const CSV_COLUMNS: &[&str] = &[
    "task",
    "seed",
    "status",
    "plan_cost",
    "initial_h",
    "expansions",
    "construction_time",
    "search_time",
    "total_time",
    "num_collections",
    "num_pdbs",
    "pdb_memory_bytes",
];

/// CSV over the reports plus a final `mean` row averaging the numeric
/// columns over all rows.
pub fn write_csv(reports: &[RunReport], w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "{}", CSV_COLUMNS.join(","))?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{:.3},{:.3},{:.3},{},{},{}",
            r.task,
            r.seed,
            r.status,
            r.plan_cost.map_or(String::new(), |c| c.to_string()),
            r.initial_h,
            r.expansions,
            r.construction_time,
            r.search_time,
            r.total_time,
            r.num_collections,
            r.num_pdbs,
            r.pdb_memory_bytes,
        )?;
    }
    if !reports.is_empty() {
        let n = reports.len() as f64;
        let mean = |f: &dyn Fn(&RunReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        let costs: Vec<u64> = reports.iter().filter_map(|r| r.plan_cost).collect();
        let mean_cost = if costs.is_empty() {
            String::new()
        } else {
            format!("{:.3}", costs.iter().sum::<u64>() as f64 / costs.len() as f64)
        };
        writeln!(
            w,
            "mean,,,{},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3}",
            mean_cost,
            mean(&|r| r.initial_h as f64),
            mean(&|r| r.expansions as f64),
            mean(&|r| r.construction_time),
            mean(&|r| r.search_time),
            mean(&|r| r.total_time),
            mean(&|r| r.num_collections as f64),
            mean(&|r| r.num_pdbs as f64),
            mean(&|r| r.pdb_memory_bytes as f64),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(task: &str, cost: u64) -> RunReport {
        RunReport {
            task: task.into(),
            seed: 1,
            status: "solved".into(),
            plan_cost: Some(cost),
            initial_h: cost,
            expansions: 10,
            evaluations: 20,
            generated: 30,
            construction_time: 1.0,
            search_time: 0.5,
            total_time: 1.5,
            num_collections: 2,
            num_pdbs: 3,
            pdb_memory_bytes: 4096,
            collections_by_generator: vec![("nfd".into(), 1), ("cbp".into(), 1)],
        }
    }

    #[test]
    fn json_round_trip() {
        let r = sample("t1", 7);
        let text = serde_json::to_string(&r).unwrap();
        let back: RunReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.plan_cost, Some(7));
        assert_eq!(back.collections_by_generator.len(), 2);
    }

    #[test]
    fn csv_has_header_rows_and_mean() {
        let reports = vec![sample("t1", 4), sample("t2", 6)];
        let mut buf = Vec::new();
        write_csv(&reports, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("task,seed,status"));
        assert!(lines[3].starts_with("mean,"));
        assert!(lines[3].contains("5.000"), "mean cost missing: {}", lines[3]);
    }

    #[test]
    fn empty_batch_emits_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }
}
