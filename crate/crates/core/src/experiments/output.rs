//! Files written next to each result table: the CSV itself, a JSON
//! metadata sidecar and a generic plotting script.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::config::ExperimentConfig;
use crate::experiments::table::ResultTable;

/// Contents of `<name>.meta.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub name: String,
    pub seed: u64,
    pub version: &'static str,
    pub execution: &'static str,
    pub rows: usize,
    pub columns: Vec<String>,
    pub wall_time_seconds: f64,
    pub config: ExperimentConfig,
}

impl RunMetadata {
    pub fn new(table: &ResultTable, cfg: &ExperimentConfig, parallel: bool, wall_time_seconds: f64) -> Self {
        Self {
            name: table.name.clone(),
            seed: cfg.seed,
            version: env!("CARGO_PKG_VERSION"),
            execution: if parallel { "parallel" } else { "sequential" },
            rows: table.rows.len(),
            columns: table.columns.clone(),
            wall_time_seconds,
            config: cfg.clone(),
        }
    }
}

pub const PLOT_SCRIPT_NAME: &str = "plot.py";

/// Plots any result CSV: `python3 plot.py <csv> <x column> <y column>
/// [group column]`. Rows are grouped into one line per value of the group
/// column (`layout` by default, when present).
pub const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt


def main():
    if len(sys.argv) < 4:
        sys.exit("usage: plot.py <csv> <x column> <y column> [group column]")
    path, xcol, ycol = sys.argv[1:4]
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    group = sys.argv[4] if len(sys.argv) > 4 else ("layout" if rows and "layout" in rows[0] else None)
    series = defaultdict(list)
    for r in rows:
        if r[xcol] and r[ycol]:
            series[r[group] if group else ycol].append((float(r[xcol]), float(r[ycol])))
    for name, pts in sorted(series.items()):
        pts.sort()
        plt.plot([p[0] for p in pts], [p[1] for p in pts], marker=".", label=name)
    plt.xlabel(xcol)
    plt.ylabel(ycol)
    plt.legend()
    out = path.rsplit(".", 1)[0] + "." + ycol + ".png"
    plt.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main()
"#;

/// Writes `<dir>/<name>.csv`, `<dir>/<name>.meta.json` and
/// `<dir>/plot.py`, creating `dir` if needed. Returns the paths written.
pub fn write_outputs(table: &ResultTable, meta: &RunMetadata, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let csv = dir.join(format!("{}.csv", table.name));
    table.save_csv(&csv)?;
    let sidecar = dir.join(format!("{}.meta.json", table.name));
    let json = serde_json::to_string_pretty(meta).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(&sidecar, json + "\n")?;
    let script = dir.join(PLOT_SCRIPT_NAME);
    std::fs::write(&script, PLOT_SCRIPT)?;
    Ok(vec![csv, sidecar, script])
}
