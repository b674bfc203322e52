//! Monte Carlo resilience analysis for the habitat simulator.
//!
//! Samples fire spread rates (beta-distributed) and detection delays
//! (uniform), runs a full scenario for every combination, and reduces each
//! realization to a [`RunMetrics`] including the response margin
//! `1 - t_sc / t_h`. Cells carry independent derived seeds, so batches are
//! reproducible bit-for-bit at any worker count.

pub mod batch;
pub mod metrics;
pub mod sampling;

pub use batch::{run_batch, BatchError, CellResult, MarginGrid};
pub use metrics::{extract_metrics, response_margin, MetricsError, RunMetrics};
pub use sampling::{sample_detection_delays, sample_spread_rates};
