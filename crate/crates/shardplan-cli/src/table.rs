//! The construction comparison table: row type, builders, and the CSV
//! and text renderings. CSV output parses back into the exact same rows.

use std::time::Instant;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use shardplan::access::Structure;
use shardplan::ilp::{
    build_ip_avg, build_ip_ramp, build_ip_worst, solution_to_map, solution_to_ramp_map, solve,
    IpObjective, SolveConfig, SolveStatus,
};
use shardplan::maps::{
    construction2_ramp, cumulative_map, modified_cumulative_map, ramp_cumulative_map, rates,
    AssignmentMap, LevelStrategy, Rate,
};

/// One construction's outcome on one structure. Optional fields are blank
/// in CSV when the construction failed or the notion does not apply (the
/// level stack has no single threshold, infeasible programs no rates).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// Row key: `cumulative`, `modified`, `ip-avg`, `ip-worst`,
    /// `ramp-cumulative`, `construction2`, `ip-ramp-exact` or
    /// `ip-ramp-relaxed`.
    pub construction: String,
    /// `ok`, `optimal`, `infeasible`, `budget-exceeded` or `error`.
    pub status: String,
    pub t: Option<u64>,
    pub l: u64,
    pub m: Option<u64>,
    pub avg_num: Option<i64>,
    pub avg_den: Option<i64>,
    pub worst_num: Option<i64>,
    pub worst_den: Option<i64>,
    pub wall_ms: u64,
}

impl ComparisonRow {
    fn empty(construction: &str, status: &str, l: usize, wall_ms: u64) -> ComparisonRow {
        ComparisonRow {
            construction: construction.to_string(),
            status: status.to_string(),
            t: None,
            l: l as u64,
            m: None,
            avg_num: None,
            avg_den: None,
            worst_num: None,
            worst_den: None,
            wall_ms,
        }
    }

    fn from_map(
        construction: &str,
        status: &str,
        map: &AssignmentMap,
        wall_ms: u64,
    ) -> ComparisonRow {
        let report = rates(map);
        ComparisonRow {
            construction: construction.to_string(),
            status: status.to_string(),
            t: Some(map.t() as u64),
            l: map.levels() as u64,
            m: Some(map.m() as u64),
            avg_num: Some(*report.average().numer()),
            avg_den: Some(*report.average().denom()),
            worst_num: Some(*report.worst().numer()),
            worst_den: Some(*report.worst().denom()),
            wall_ms,
        }
    }

    /// Average rate, when the row has one.
    pub fn average(&self) -> Option<Rate> {
        Some(Rate::new(self.avg_num?, self.avg_den?))
    }

    /// Worst rate, when the row has one.
    pub fn worst(&self) -> Option<Rate> {
        Some(Rate::new(self.worst_num?, self.worst_den?))
    }
}

fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::BudgetExceeded => "budget-exceeded",
    }
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis().try_into().unwrap_or(u64::MAX)
}

/// Runs every construction that applies to the structure and collects one
/// row per construction, in a stable order.
pub fn comparison_rows(structure: &Structure, config: &SolveConfig) -> Vec<ComparisonRow> {
    let mut rows = Vec::new();
    match structure {
        Structure::Perfect(s) => {
            let start = Instant::now();
            let map = cumulative_map(s);
            rows.push(ComparisonRow::from_map("cumulative", "ok", &map, elapsed_ms(start)));

            let start = Instant::now();
            match modified_cumulative_map(s) {
                Ok(map) => {
                    rows.push(ComparisonRow::from_map("modified", "ok", &map, elapsed_ms(start)))
                }
                Err(_) => {
                    rows.push(ComparisonRow::empty("modified", "error", 1, elapsed_ms(start)))
                }
            }

            for (name, objective) in
                [("ip-avg", IpObjective::Average), ("ip-worst", IpObjective::Worst)]
            {
                let start = Instant::now();
                let row = (|| -> anyhow::Result<ComparisonRow> {
                    let ip = match objective {
                        IpObjective::Average => build_ip_avg(s)?,
                        IpObjective::Worst => build_ip_worst(s)?,
                    };
                    let sol = solve(&ip, config);
                    if !sol.is_optimal() {
                        return Ok(ComparisonRow::empty(
                            name,
                            status_name(sol.status()),
                            1,
                            elapsed_ms(start),
                        ));
                    }
                    let map = solution_to_map(s, &sol)?;
                    Ok(ComparisonRow::from_map(name, "optimal", &map, elapsed_ms(start)))
                })()
                .unwrap_or_else(|_| ComparisonRow::empty(name, "error", 1, elapsed_ms(start)));
                rows.push(row);
            }
        }
        Structure::Ramp(r) => {
            let l = r.levels();

            let start = Instant::now();
            match ramp_cumulative_map(r) {
                Ok(map) => rows.push(ComparisonRow::from_map(
                    "ramp-cumulative",
                    "ok",
                    &map,
                    elapsed_ms(start),
                )),
                Err(_) => rows.push(ComparisonRow::empty(
                    "ramp-cumulative",
                    "error",
                    l,
                    elapsed_ms(start),
                )),
            }

            let start = Instant::now();
            match construction2_ramp(r, LevelStrategy::Cumulative, config) {
                Ok(recipe) => {
                    let m: usize = recipe.levels().iter().map(|lvl| lvl.map().m()).sum();
                    let report = recipe.rates();
                    rows.push(ComparisonRow {
                        construction: "construction2".to_string(),
                        status: "ok".to_string(),
                        t: None,
                        l: l as u64,
                        m: Some(m as u64),
                        avg_num: Some(*report.average().numer()),
                        avg_den: Some(*report.average().denom()),
                        worst_num: Some(*report.worst().numer()),
                        worst_den: Some(*report.worst().denom()),
                        wall_ms: elapsed_ms(start),
                    });
                }
                Err(_) => {
                    rows.push(ComparisonRow::empty("construction2", "error", l, elapsed_ms(start)))
                }
            }

            for (name, mode) in [
                ("ip-ramp-exact", shardplan::maps::RampMode::Exact),
                ("ip-ramp-relaxed", shardplan::maps::RampMode::Relaxed),
            ] {
                let start = Instant::now();
                let row = (|| -> anyhow::Result<ComparisonRow> {
                    let ip = build_ip_ramp(r, mode, IpObjective::Average)?;
                    let sol = solve(&ip, config);
                    if !sol.is_optimal() {
                        return Ok(ComparisonRow::empty(
                            name,
                            status_name(sol.status()),
                            l,
                            elapsed_ms(start),
                        ));
                    }
                    let map = solution_to_ramp_map(r, &sol)?;
                    Ok(ComparisonRow::from_map(name, "optimal", &map, elapsed_ms(start)))
                })()
                .unwrap_or_else(|_| ComparisonRow::empty(name, "error", l, elapsed_ms(start)));
                rows.push(row);
            }
        }
    }
    rows
}

/// Serializes rows as CSV with a header line.
pub fn to_csv(rows: &[ComparisonRow]) -> anyhow::Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer.into_inner().context("flushing CSV")?;
    String::from_utf8(bytes).context("CSV is always UTF-8")
}

/// Parses CSV produced by [`to_csv`] back into rows.
#[cfg(test)]
pub fn from_csv(text: &str) -> anyhow::Result<Vec<ComparisonRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        rows.push(record.context("parsing CSV row")?);
    }
    Ok(rows)
}

/// Renders rows as an aligned text table.
pub fn render_table(rows: &[ComparisonRow]) -> String {
    let headers = ["construction", "t", "L", "m", "avg", "worst", "status", "wall"];
    let mut cells: Vec<[String; 8]> = Vec::with_capacity(rows.len());
    for row in rows {
        let opt = |v: Option<u64>| v.map_or("-".to_string(), |v| v.to_string());
        let rate = |r: Option<Rate>| r.map_or("-".to_string(), crate::output::fraction);
        cells.push([
            row.construction.clone(),
            opt(row.t),
            row.l.to_string(),
            opt(row.m),
            rate(row.average()),
            rate(row.worst()),
            row.status.clone(),
            format!("{}ms", row.wall_ms),
        ]);
    }
    let mut widths = headers.map(str::len);
    for row in &cells {
        for (w, cell) in widths.iter_mut().zip(row.iter()) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let push_row = |cols: &[String; 8], out: &mut String| {
        for (i, (cell, w)) in cols.iter().zip(widths.iter()).enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            out.push_str(cell);
            for _ in cell.len()..*w {
                out.push(' ');
            }
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    };
    push_row(&headers.map(str::to_string), &mut out);
    for row in &cells {
        push_row(row, &mut out);
    }
    out
}
