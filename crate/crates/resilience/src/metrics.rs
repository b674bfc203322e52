//! Per-realization resilience metrics and the response margin.

use habsim_core::{RunResult, TimeSeriesRecord};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("hazard-effect time must be positive, got {0}")]
    NonPositiveHazardTime(f64),
}

/// Resilience summary of one realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunMetrics {
    /// Safety-control time t_sc: extinguish minus ignition, or the remaining
    /// horizon after ignition when the fire outlives the run (`recovered`
    /// false marks the value a lower bound). Zero if no fire ever ignites.
    pub time_to_recover: f64,
    /// Whether the fire was extinguished within the horizon.
    pub recovered: bool,
    /// Peak habitat temperature (max over zones and time), K.
    pub max_temperature: f64,
    /// Peak habitat power demand (ECLSS plus baseline), W.
    pub max_power: f64,
    /// Hazard-effect time t_h: first crossing of the critical temperature,
    /// measured from ignition. None if the threshold is never reached.
    pub t_h_effect: Option<f64>,
    /// 1 - t_sc / t_h; exactly 1 when the habitat stays below the critical
    /// temperature.
    pub response_margin: f64,
    /// Habitat failure marker: margin below one.
    pub failed: bool,
    pub ignition_time: Option<f64>,
    pub detection_time: Option<f64>,
    pub suppression_start: Option<f64>,
    pub extinguished_time: Option<f64>,
}

/// Response margin `1 - t_sc / t_h`. A hazard that never causes critical
/// damage (`t_h` none) yields a margin of exactly 1.
pub fn response_margin(t_sc: f64, t_h: Option<f64>) -> Result<f64, MetricsError> {
    debug_assert!(t_sc >= 0.0);
    match t_h {
        None => Ok(1.0),
        Some(t) if t > 0.0 => Ok(1.0 - t_sc / t),
        Some(t) => Err(MetricsError::NonPositiveHazardTime(t)),
    }
}

fn habitat_temperature(r: &TimeSeriesRecord) -> f64 {
    r.t_zone1_k.max(r.t_zone2_k)
}

/// Extract the resilience metrics from a completed run's time series.
/// `t_crit` is the critical temperature; `baseline_load` is added to the
/// recorded ECLSS demand to form total habitat consumption.
pub fn extract_metrics(
    result: &RunResult,
    t_crit: f64,
    baseline_load: f64,
) -> Result<RunMetrics, MetricsError> {
    let records = &result.records;
    let max_temperature = records
        .iter()
        .map(habitat_temperature)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_power = records
        .iter()
        .map(|r| r.eclss_power_w + baseline_load)
        .fold(f64::NEG_INFINITY, f64::max);

    let ignition_time = records.iter().find(|r| r.fire_phase >= 1).map(|r| r.time_s);
    let detection_time = records.iter().find(|r| r.health_ie == 1).map(|r| r.time_s);
    let suppression_start = records
        .iter()
        .find(|r| r.agent_status == 2)
        .map(|r| r.time_s);
    let extinguished_time = records.iter().find(|r| r.fire_phase == 3).map(|r| r.time_s);

    let (time_to_recover, recovered, t_h_effect) = match ignition_time {
        None => (0.0, true, None),
        Some(ignition) => {
            let t_h = records
                .iter()
                .find(|r| r.time_s >= ignition && habitat_temperature(r) >= t_crit)
                .map(|r| r.time_s - ignition);
            match extinguished_time {
                Some(out) => (out - ignition, true, t_h),
                // Unrecovered within the horizon: report the remaining run
                // length as a lower bound on the recovery time.
                None => (result.end_time - ignition, false, t_h),
            }
        }
    };
    let response_margin = response_margin(time_to_recover, t_h_effect)?;
    Ok(RunMetrics {
        time_to_recover,
        recovered,
        max_temperature,
        max_power,
        t_h_effect,
        response_margin,
        failed: response_margin < 1.0,
        ignition_time,
        detection_time,
        suppression_start,
        extinguished_time,
    })
}
