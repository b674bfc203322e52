//! File emission: the time-series CSV, run/batch summaries, the margin grid
//! CSV, and the plot-ready report CSVs.
//!
//! All numeric formatting is fixed-precision so identical runs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use habsim_core::{RunResult, ScenarioConfig, TimeSeriesRecord};
use habsim_resilience::{MarginGrid, RunMetrics};
use serde::Serialize;

/// Fixed column schema of `timeseries.csv`.
pub const TIMESERIES_HEADER: &str = "time_s,fire_radius_m,fire_phase,t_zone1_k,t_zone2_k,\
p_zone1_pa,p_zone2_pa,fan1_efficiency,fan2_efficiency,compressor_efficiency,\
condenser_efficiency,eclss_power_w,storage_soc_j,health_ie,agent_status";

fn timeseries_row(r: &TimeSeriesRecord) -> String {
    format!(
        "{:.1},{:.6},{},{:.6},{:.6},{:.6},{:.6},{:.3},{:.3},{:.3},{:.3},{:.6},{:.6},{},{}",
        r.time_s,
        r.fire_radius_m,
        r.fire_phase,
        r.t_zone1_k,
        r.t_zone2_k,
        r.p_zone1_pa,
        r.p_zone2_pa,
        r.fan1_efficiency,
        r.fan2_efficiency,
        r.compressor_efficiency,
        r.condenser_efficiency,
        r.eclss_power_w,
        r.storage_soc_j,
        r.health_ie,
        r.agent_status
    )
}

/// Render the full time series as CSV text.
pub fn timeseries_csv(result: &RunResult) -> String {
    let mut out = String::with_capacity(result.records.len() * 160 + 200);
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for r in &result.records {
        out.push_str(&timeseries_row(r));
        out.push('\n');
    }
    out
}

/// Write `timeseries.csv`, returning the data row count.
pub fn write_timeseries(result: &RunResult, path: &Path) -> Result<usize> {
    fs::write(path, timeseries_csv(result))
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(result.records.len())
}

#[derive(Debug, Serialize)]
pub struct RunSummary<'a> {
    pub seed: u64,
    pub end_time_s: f64,
    pub rows: usize,
    pub metrics: &'a RunMetrics,
}

pub fn write_run_summary(summary: &RunSummary<'_>, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary).context("serializing summary")?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Fixed column schema of `grid.csv`: one row per realization cell.
pub const GRID_HEADER: &str = "spread_index,detection_index,spread_rate_mm_s,detection_delay_s,\
seed,status,time_to_recover_s,recovered,max_temperature_k,max_power_w,t_h_effect_s,\
response_margin,failed";

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.6}"))
}

/// Render the margin grid as CSV text, one row per cell in index order.
pub fn grid_csv(grid: &MarginGrid) -> String {
    let mut out = String::new();
    out.push_str(GRID_HEADER);
    out.push('\n');
    for cell in &grid.cells {
        let _ = write!(
            out,
            "{},{},{:.6},{:.6},{},",
            cell.spread_index,
            cell.detection_index,
            cell.spread_rate_mm_s,
            cell.detection_delay_s,
            cell.seed
        );
        match &cell.outcome {
            Ok(m) => {
                let _ = writeln!(
                    out,
                    "ok,{:.6},{},{:.6},{:.6},{},{:.6},{}",
                    m.time_to_recover,
                    m.recovered,
                    m.max_temperature,
                    m.max_power,
                    opt(m.t_h_effect),
                    m.response_margin,
                    m.failed
                );
            }
            Err(message) => {
                let _ = writeln!(out, "error:{},,,,,,,", message.replace(',', ";"));
            }
        }
    }
    out
}

pub fn write_grid(grid: &MarginGrid, path: &Path) -> Result<usize> {
    fs::write(path, grid_csv(grid)).with_context(|| format!("writing {}", path.display()))?;
    Ok(grid.cells.len())
}

#[derive(Debug, Serialize)]
pub struct BatchSummary {
    pub master_seed: u64,
    pub n_spread: usize,
    pub n_detection: usize,
    pub spread_rates_mm_s: Vec<f64>,
    pub detection_delays_s: Vec<f64>,
    pub cells: usize,
    pub cell_errors: usize,
    pub failures: usize,
    pub min_margin: f64,
    pub max_margin: f64,
}

impl BatchSummary {
    pub fn from_grid(grid: &MarginGrid, master_seed: u64) -> Self {
        let metrics: Vec<&RunMetrics> = grid
            .cells
            .iter()
            .filter_map(|c| c.outcome.as_ref().ok())
            .collect();
        let margins: Vec<f64> = metrics.iter().map(|m| m.response_margin).collect();
        Self {
            master_seed,
            n_spread: grid.n_spread(),
            n_detection: grid.n_detection(),
            spread_rates_mm_s: grid.spread_rates_mm_s.clone(),
            detection_delays_s: grid.detection_delays_s.clone(),
            cells: grid.cells.len(),
            cell_errors: grid.cells.len() - metrics.len(),
            failures: metrics.iter().filter(|m| m.failed).count(),
            min_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
            max_margin: margins.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

pub fn write_batch_summary(summary: &BatchSummary, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary).context("serializing batch summary")?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Minimal view of one parsed grid row used by the report command.
#[derive(Debug, Clone)]
pub struct GridRow {
    pub spread_index: usize,
    pub detection_index: usize,
    pub spread_rate_mm_s: f64,
    pub detection_delay_s: f64,
    pub ok: bool,
    pub time_to_recover_s: f64,
    pub max_temperature_k: f64,
    pub max_power_w: f64,
    pub response_margin: f64,
}

/// Parse a `grid.csv` produced by [`write_grid`].
pub fn parse_grid_csv(text: &str) -> Result<Vec<GridRow>> {
    let mut lines = text.lines();
    let header = lines.next().context("grid.csv is empty")?;
    if header != GRID_HEADER {
        bail!("grid.csv header does not match the documented schema");
    }
    let mut rows = Vec::new();
    for (index, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != GRID_HEADER.split(',').count() {
            bail!("grid.csv row {} has {} fields", index + 2, fields.len());
        }
        let ok = fields[5] == "ok";
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .with_context(|| format!("grid.csv row {}: bad {what} `{s}`", index + 2))
        };
        rows.push(GridRow {
            spread_index: fields[0].parse().context("bad spread_index")?,
            detection_index: fields[1].parse().context("bad detection_index")?,
            spread_rate_mm_s: parse(fields[2], "spread rate")?,
            detection_delay_s: parse(fields[3], "detection delay")?,
            ok,
            time_to_recover_s: if ok {
                parse(fields[6], "recovery time")?
            } else {
                f64::NAN
            },
            max_temperature_k: if ok {
                parse(fields[8], "max temperature")?
            } else {
                f64::NAN
            },
            max_power_w: if ok {
                parse(fields[9], "max power")?
            } else {
                f64::NAN
            },
            response_margin: if ok {
                parse(fields[11], "margin")?
            } else {
                f64::NAN
            },
        });
    }
    Ok(rows)
}

/// Emit the three plot-ready CSVs derived from a batch grid: recovery time
/// against peak temperature, recovery time against peak power, and the
/// margin matrix. Returns the written file names.
pub fn write_report(rows: &[GridRow], out_dir: &Path) -> Result<Vec<String>> {
    let mut recovery_temp = String::from("time_to_recover_s,max_temperature_k\n");
    let mut recovery_power = String::from("time_to_recover_s,max_power_w\n");
    for row in rows.iter().filter(|r| r.ok) {
        let _ = writeln!(
            recovery_temp,
            "{:.6},{:.6}",
            row.time_to_recover_s, row.max_temperature_k
        );
        let _ = writeln!(
            recovery_power,
            "{:.6},{:.6}",
            row.time_to_recover_s, row.max_power_w
        );
    }

    let mut spreads: Vec<(usize, f64)> = rows
        .iter()
        .map(|r| (r.spread_index, r.spread_rate_mm_s))
        .collect();
    spreads.sort_by_key(|e| e.0);
    spreads.dedup_by_key(|e| e.0);
    let mut delays: Vec<(usize, f64)> = rows
        .iter()
        .map(|r| (r.detection_index, r.detection_delay_s))
        .collect();
    delays.sort_by_key(|e| e.0);
    delays.dedup_by_key(|e| e.0);

    let mut margin = String::from("spread_rate_mm_s");
    for (_, d) in &delays {
        let _ = write!(margin, ",{d:.6}");
    }
    margin.push('\n');
    for (i, s) in &spreads {
        let _ = write!(margin, "{s:.6}");
        for (j, _) in &delays {
            let cell = rows
                .iter()
                .find(|r| r.spread_index == *i && r.detection_index == *j)
                .context("grid.csv is missing a cell")?;
            if cell.ok {
                let _ = write!(margin, ",{:.6}", cell.response_margin);
            } else {
                margin.push(',');
            }
        }
        margin.push('\n');
    }

    let files = [
        ("recovery_vs_max_temperature.csv", recovery_temp),
        ("recovery_vs_max_power.csv", recovery_power),
        ("margin_grid.csv", margin),
    ];
    let mut written = Vec::new();
    for (name, text) in files {
        let path = out_dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        written.push(name.to_string());
    }
    Ok(written)
}

/// Serialize the effective configuration back to TOML.
pub fn dump_config(config: &ScenarioConfig) -> Result<String> {
    toml::to_string_pretty(config).context("serializing configuration")
}

#[cfg(test)]
mod tests {
    use super::*;
    use habsim_core::scenario::run_scenario;

    #[test]
    fn timeseries_row_count_and_header() {
        let mut config = ScenarioConfig::default();
        config.clock.end_time_s = 10.0;
        config.disturbance.events.clear();
        let result = run_scenario(&config, None).unwrap();
        let text = timeseries_csv(&result);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TIMESERIES_HEADER);
        assert_eq!(lines.count(), 11);
    }

    #[test]
    fn timeseries_bytes_reproducible() {
        let config = ScenarioConfig::default();
        let a = timeseries_csv(&run_scenario(&config, Some(5)).unwrap());
        let b = timeseries_csv(&run_scenario(&config, Some(5)).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn config_round_trips_through_toml() {
        let mut config = ScenarioConfig::default();
        let parsed: ScenarioConfig = toml::from_str(&dump_config(&config).unwrap()).unwrap();
        assert_eq!(parsed, config);
        config.disturbance.events[0].finish_time_s = Some(900.0);
        config.eclss.t_high_k = 301.25;
        config.batch.n_spread_samples = 4;
        let parsed: ScenarioConfig = toml::from_str(&dump_config(&config).unwrap()).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn grid_csv_round_trips() {
        let mut config = ScenarioConfig::default();
        config.batch.n_spread_samples = 2;
        config.batch.n_detection_samples = 2;
        config.batch.horizon_s = 900.0;
        let grid = habsim_resilience::run_batch(&config, 3, 2).unwrap();
        let text = grid_csv(&grid);
        let rows = parse_grid_csv(&text).unwrap();
        assert_eq!(rows.len(), 4);
        for (row, cell) in rows.iter().zip(&grid.cells) {
            assert_eq!(row.spread_index, cell.spread_index);
            assert!(row.ok);
            let m = cell.outcome.as_ref().unwrap();
            assert!((row.response_margin - m.response_margin).abs() < 1e-6);
        }
    }
}
