//! Monte Carlo batch harness: sample, run every (spread, delay) combination,
//! and assemble the margin grid.
//!
//! Each cell owns a derived seed, so cells are independent and the grid is
//! reproducible for a given master seed regardless of worker count or
//! execution order. Sample lists are sorted ascending so grid rows and
//! columns are monotone axes.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use habsim_core::fdd::FddMode;
use habsim_core::rng::RngStream;
use habsim_core::scenario::{run_scenario, ScenarioConfig};
use habsim_core::ValidationError;
use thiserror::Error;

use crate::metrics::{extract_metrics, RunMetrics};
use crate::sampling::{sample_detection_delays, sample_spread_rates};

/// Salts for the per-purpose RNG streams forked off the master seed.
const SPREAD_STREAM_SALT: u64 = 0xA1;
const DELAY_STREAM_SALT: u64 = 0xA2;
const CELL_STREAM_SALT_BASE: u64 = 0xC000;

#[derive(Debug, Error)]
pub enum BatchError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

/// Outcome of one grid cell. Cell execution failures are recorded without
/// aborting the batch.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub spread_index: usize,
    pub detection_index: usize,
    /// Sampled fire spread rate, mm/s.
    pub spread_rate_mm_s: f64,
    /// Sampled detection delay, s.
    pub detection_delay_s: f64,
    pub seed: u64,
    pub outcome: Result<RunMetrics, String>,
}

/// Matrix of per-realization metrics indexed by (spread sample, detection
/// sample), both sorted ascending.
#[derive(Debug, Clone)]
pub struct MarginGrid {
    pub spread_rates_mm_s: Vec<f64>,
    pub detection_delays_s: Vec<f64>,
    /// Row-major: `cells[i * n_detection + j]` for spread i, delay j.
    pub cells: Vec<CellResult>,
}

impl MarginGrid {
    pub fn n_spread(&self) -> usize {
        self.spread_rates_mm_s.len()
    }

    pub fn n_detection(&self) -> usize {
        self.detection_delays_s.len()
    }

    pub fn cell(&self, spread_index: usize, detection_index: usize) -> &CellResult {
        &self.cells[spread_index * self.n_detection() + detection_index]
    }

    /// Response margin of one cell; NaN for cells that failed to execute.
    pub fn margin(&self, spread_index: usize, detection_index: usize) -> f64 {
        match &self.cell(spread_index, detection_index).outcome {
            Ok(m) => m.response_margin,
            Err(_) => f64::NAN,
        }
    }
}

/// Build the scenario for one cell: the base scenario with the sampled
/// spread rate and detection delay substituted, the batch horizon applied,
/// and sampled-latency detection forced.
fn cell_scenario(base: &ScenarioConfig, spread_mm_s: f64, delay_s: f64) -> ScenarioConfig {
    let mut config = base.clone();
    for event in &mut config.disturbance.events {
        event.spread_rate_m_s = spread_mm_s * 1.0e-3;
    }
    config.fdd.mode = FddMode::SampledLatency;
    config.fdd.latency_s = delay_s;
    config.clock.end_time_s = config.batch.horizon_s;
    config
}

fn run_cell(
    base: &ScenarioConfig,
    spread_index: usize,
    detection_index: usize,
    spread_mm_s: f64,
    delay_s: f64,
    seed: u64,
) -> CellResult {
    let config = cell_scenario(base, spread_mm_s, delay_s);
    let outcome = run_scenario(&config, Some(seed))
        .map_err(|e| e.to_string())
        .and_then(|result| {
            extract_metrics(&result, config.batch.t_crit_k, config.power.baseline_load_w)
                .map_err(|e| e.to_string())
        });
    CellResult {
        spread_index,
        detection_index,
        spread_rate_mm_s: spread_mm_s,
        detection_delay_s: delay_s,
        seed,
        outcome,
    }
}

/// Run the full Cartesian batch. `jobs` caps the worker threads; any value
/// produces the identical grid because cells are seeded independently of the
/// execution schedule.
pub fn run_batch(
    base: &ScenarioConfig,
    master_seed: u64,
    jobs: usize,
) -> Result<MarginGrid, BatchError> {
    base.validate()?;
    let batch = &base.batch;
    let master = RngStream::new(master_seed);

    let mut spread_rng = master.fork(SPREAD_STREAM_SALT);
    let mut spreads = sample_spread_rates(
        batch.n_spread_samples as usize,
        batch.beta_alpha,
        batch.beta_beta,
        batch.spread_interval_mm_s,
        &mut spread_rng,
    );
    spreads.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));

    let mut delay_rng = master.fork(DELAY_STREAM_SALT);
    let mut delays = sample_detection_delays(
        batch.n_detection_samples as usize,
        batch.detection_interval_s,
        &mut delay_rng,
    );
    delays.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));

    let n_detection = delays.len();
    let n_cells = spreads.len() * n_detection;
    let tasks: Vec<(usize, usize, f64, f64, u64)> = (0..n_cells)
        .map(|index| {
            let i = index / n_detection;
            let j = index % n_detection;
            let seed = master.fork(CELL_STREAM_SALT_BASE + index as u64).next_u64();
            (i, j, spreads[i], delays[j], seed)
        })
        .collect();

    let jobs = jobs.max(1).min(n_cells.max(1));
    let slots: Mutex<Vec<Option<CellResult>>> = Mutex::new(vec![None; n_cells]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= n_cells {
                    break;
                }
                let (i, j, spread, delay, seed) = tasks[index];
                let result = run_cell(base, i, j, spread, delay, seed);
                slots.lock().expect("batch worker poisoned")[index] = Some(result);
            });
        }
    });
    let cells = slots
        .into_inner()
        .expect("batch worker poisoned")
        .into_iter()
        .map(|slot| slot.expect("all cells executed"))
        .collect();
    Ok(MarginGrid {
        spread_rates_mm_s: spreads,
        detection_delays_s: delays,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_base() -> ScenarioConfig {
        let mut config = ScenarioConfig::default();
        config.batch.n_spread_samples = 2;
        config.batch.n_detection_samples = 2;
        config.batch.horizon_s = 1200.0;
        config
    }

    #[test]
    fn cell_scenario_substitutes_parameters() {
        let base = ScenarioConfig::default();
        let c = cell_scenario(&base, 1.5, 333.0);
        assert_eq!(c.disturbance.events[0].spread_rate_m_s, 1.5e-3);
        assert_eq!(c.fdd.latency_s, 333.0);
        assert_eq!(c.clock.end_time_s, base.batch.horizon_s);
        assert_eq!(c.fdd.mode, FddMode::SampledLatency);
    }

    #[test]
    fn grid_dimensions_and_ordering() {
        let grid = run_batch(&tiny_base(), 11, 2).unwrap();
        assert_eq!(grid.cells.len(), 4);
        assert!(grid.spread_rates_mm_s[0] <= grid.spread_rates_mm_s[1]);
        assert!(grid.detection_delays_s[0] <= grid.detection_delays_s[1]);
        for (index, cell) in grid.cells.iter().enumerate() {
            assert_eq!(cell.spread_index, index / 2);
            assert_eq!(cell.detection_index, index % 2);
            assert!(cell.outcome.is_ok());
        }
    }

    #[test]
    fn same_master_seed_identical_grids() {
        let base = tiny_base();
        let a = run_batch(&base, 7, 2).unwrap();
        let b = run_batch(&base, 7, 1).unwrap();
        for (ca, cb) in a.cells.iter().zip(&b.cells) {
            assert_eq!(ca.seed, cb.seed);
            let (ma, mb) = (ca.outcome.as_ref().unwrap(), cb.outcome.as_ref().unwrap());
            assert_eq!(ma.response_margin.to_bits(), mb.response_margin.to_bits());
            assert_eq!(ma.max_temperature.to_bits(), mb.max_temperature.to_bits());
        }
        let c = run_batch(&base, 8, 2).unwrap();
        assert_ne!(
            a.spread_rates_mm_s, c.spread_rates_mm_s,
            "different master seeds must draw different samples"
        );
    }

    #[test]
    fn single_cell_batch_matches_standalone_run() {
        let mut base = tiny_base();
        base.batch.n_spread_samples = 1;
        base.batch.n_detection_samples = 1;
        let grid = run_batch(&base, 3, 1).unwrap();
        let cell = grid.cell(0, 0);
        let standalone = cell_scenario(&base, cell.spread_rate_mm_s, cell.detection_delay_s);
        let result = run_scenario(&standalone, Some(cell.seed)).unwrap();
        let metrics =
            extract_metrics(&result, base.batch.t_crit_k, base.power.baseline_load_w).unwrap();
        let cell_metrics = cell.outcome.as_ref().unwrap();
        assert_eq!(
            metrics.response_margin.to_bits(),
            cell_metrics.response_margin.to_bits()
        );
        assert_eq!(
            metrics.max_temperature.to_bits(),
            cell_metrics.max_temperature.to_bits()
        );
        assert_eq!(
            metrics.time_to_recover.to_bits(),
            cell_metrics.time_to_recover.to_bits()
        );
    }

    #[test]
    fn margins_never_exceed_one() {
        let grid = run_batch(&tiny_base(), 21, 4).unwrap();
        for cell in &grid.cells {
            let m = cell.outcome.as_ref().unwrap();
            assert!(m.response_margin <= 1.0);
            assert_eq!(m.failed, m.response_margin < 1.0);
        }
    }
}
