//! Sweep CSV and sidecar formats.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use cqhc::sim::{PointEstimate, SweepRecord};

pub const HEADER: [&str; 6] = ["p", "trials", "failures", "p_l", "stderr", "wall_s"];

#[derive(Serialize, Deserialize)]
pub struct Sidecar {
    #[serde(flatten)]
    pub record: SweepRecord,
    pub omit_timing: bool,
}

/// Floats use the shortest representation that parses back exactly.
pub fn to_csv(points: &[PointEstimate], omit_timing: bool) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for pt in points {
        let wall = if omit_timing {
            String::new()
        } else {
            format!("{:.3}", pt.wall_s)
        };
        w.write_record([
            pt.p.to_string(),
            pt.trials.to_string(),
            pt.failures.to_string(),
            pt.p_l.to_string(),
            pt.stderr.to_string(),
            wall,
        ])?;
    }
    Ok(w.into_inner()?)
}

pub fn read_csv(path: &Path) -> Result<Vec<PointEstimate>> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        bail!(
            "unexpected header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        );
    }
    let mut points = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("").trim();
        let ctx = || format!("row {}", line + 2);
        let p: f64 = field(0).parse().with_context(ctx)?;
        let trials: u64 = field(1).parse().with_context(ctx)?;
        let failures: u64 = field(2).parse().with_context(ctx)?;
        let mut pt = PointEstimate::from_counts(p, trials, failures);
        if !field(5).is_empty() {
            pt.wall_s = field(5).parse().with_context(ctx)?;
        }
        points.push(pt);
    }
    Ok(points)
}
