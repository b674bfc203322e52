//! Scenario configuration, validation, and the wiring of a full habitat run.
//!
//! Every field carries a default so an empty configuration reproduces the
//! reference fire scenario: a 2000 s horizon with an intensity-3 fire
//! igniting in zone 2 at t = 300 s, sampled-latency detection, and a single
//! repair agent. Validation reports the path of the first offending field.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::ChannelMap;
use crate::disturbance::{
    ComponentPlacement, DisturbanceInitiator, DisturbanceKind, FireState, IntensityLevel,
};
use crate::eclss::{Eclss, EclssConfig};
use crate::engine::{Engine, RegistrationError, RunError, SimClock};
use crate::environment::{IeConfig, InteriorEnvironment, ZoneState};
use crate::fdd::{FddConfig, FddMode, FddSystem, RepairConfig, RepairSystem};
use crate::power::{PowerConfig, PowerSystem};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClockBlock {
    pub base_step_s: f64,
    pub end_time_s: f64,
    /// Step period shared by all habitat subsystems, s.
    pub subsystem_period_s: f64,
}

impl Default for ClockBlock {
    fn default() -> Self {
        Self {
            base_step_s: 0.1,
            end_time_s: 2000.0,
            subsystem_period_s: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IeBlock {
    pub zone_volumes_m3: [f64; 2],
    pub pocket_door_open: bool,
    pub door_conductance_w_per_k: f64,
    pub wall_conductance_w_per_k: f64,
    pub wall_sink_k: f64,
    pub heat_capacity_j_per_mol_k: f64,
    pub initial_temperature_k: [f64; 2],
    pub initial_pressure_pa: [f64; 2],
    pub sensor_sigma_temperature_k: f64,
    pub sensor_sigma_pressure_pa: f64,
    /// Crew-safe bands used by detection and reporting.
    pub safe_temperature_k: [f64; 2],
    pub safe_pressure_pa: [f64; 2],
    pub vent_floor_fraction: f64,
}

impl Default for IeBlock {
    fn default() -> Self {
        Self {
            zone_volumes_m3: [4.0, 4.0],
            pocket_door_open: true,
            door_conductance_w_per_k: 300.0,
            wall_conductance_w_per_k: 2060.0,
            wall_sink_k: 299.9,
            heat_capacity_j_per_mol_k: 29.1,
            initial_temperature_k: [299.9, 299.9],
            initial_pressure_pa: [101_325.0, 101_325.0],
            sensor_sigma_temperature_k: 0.1,
            sensor_sigma_pressure_pa: 50.0,
            safe_temperature_k: [291.0, 300.0],
            safe_pressure_pa: [96_000.0, 106_000.0],
            vent_floor_fraction: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EclssBlock {
    pub t_low_k: f64,
    pub t_high_k: f64,
    pub t_hysteresis_k: f64,
    pub p_low_pa: f64,
    pub p_high_pa: f64,
    pub p_hysteresis_pa: f64,
    pub cooling_power_w: f64,
    pub heater_power_w: f64,
    pub fan_power_w: f64,
    pub compressor_power_w: f64,
    pub condenser_power_w: f64,
    pub ipcs_power_w: f64,
    pub supply_rate_mol_s: f64,
    pub vent_rate_mol_s: f64,
    pub efficiency_table: [f64; 5],
}

impl Default for EclssBlock {
    fn default() -> Self {
        let c = EclssConfig::default();
        Self {
            t_low_k: c.t_low,
            t_high_k: c.t_high,
            t_hysteresis_k: c.t_hysteresis,
            p_low_pa: c.p_low,
            p_high_pa: c.p_high,
            p_hysteresis_pa: c.p_hysteresis,
            cooling_power_w: c.cooling_power,
            heater_power_w: c.heater_power,
            fan_power_w: c.fan_power,
            compressor_power_w: c.compressor_power,
            condenser_power_w: c.condenser_power,
            ipcs_power_w: c.ipcs_power,
            supply_rate_mol_s: c.supply_rate,
            vent_rate_mol_s: c.vent_rate,
            efficiency_table: c.efficiency_table,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerBlock {
    pub solar_w: f64,
    pub nuclear_w: f64,
    pub capacity_j: f64,
    pub initial_soc_fraction: f64,
    pub charge_efficiency: f64,
    pub discharge_efficiency: f64,
    pub baseline_load_w: f64,
    pub storage_multipliers: [f64; 5],
    pub converter_efficiencies: [f64; 4],
}

impl Default for PowerBlock {
    fn default() -> Self {
        let c = PowerConfig::default();
        Self {
            solar_w: c.solar_output,
            nuclear_w: c.nuclear_output,
            capacity_j: c.capacity,
            initial_soc_fraction: c.initial_soc_fraction,
            charge_efficiency: c.charge_efficiency,
            discharge_efficiency: c.discharge_efficiency,
            baseline_load_w: c.baseline_load,
            storage_multipliers: c.storage_multipliers,
            converter_efficiencies: c.converter_efficiencies,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisturbanceEvent {
    pub kind: DisturbanceKind,
    pub start_time_s: f64,
    pub finish_time_s: Option<f64>,
    pub intensity: u8,
    /// Zone number the hazard lives in (1-based).
    pub zone: u8,
    pub origin_m: [f64; 2],
    pub spread_rate_m_s: f64,
}

impl Default for DisturbanceEvent {
    fn default() -> Self {
        Self {
            kind: DisturbanceKind::Fire,
            start_time_s: 300.0,
            finish_time_s: None,
            intensity: 3,
            zone: 2,
            origin_m: [0.0, -0.75],
            spread_rate_m_s: 0.4e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlacementBlock {
    /// Zone numbers (1-based) per damage-tracked component.
    pub fan_zone1: u8,
    pub fan_zone2: u8,
    pub compressor: u8,
    pub condenser: u8,
    pub storage: u8,
    pub converter: u8,
}

impl Default for PlacementBlock {
    fn default() -> Self {
        Self {
            fan_zone1: 1,
            fan_zone2: 2,
            compressor: 2,
            condenser: 1,
            storage: 1,
            converter: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DisturbanceBlock {
    pub events: Vec<DisturbanceEvent>,
    pub placement: PlacementBlock,
}

impl DisturbanceBlock {
    /// The reference schedule: one fire event with default parameters.
    pub fn reference() -> Self {
        Self {
            events: vec![DisturbanceEvent::default()],
            placement: PlacementBlock::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FddBlock {
    pub mode: FddMode,
    pub persistence: u32,
    pub latency_s: f64,
    pub detectable_radius_m: f64,
}

impl Default for FddBlock {
    fn default() -> Self {
        let c = FddConfig::default();
        Self {
            mode: c.mode,
            persistence: c.persistence,
            latency_s: c.latency,
            detectable_radius_m: c.detectable_radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepairBlock {
    pub suppression_rate_m_s: f64,
    pub availability_delay_s: f64,
}

impl Default for RepairBlock {
    fn default() -> Self {
        let c = RepairConfig::default();
        Self {
            suppression_rate_m_s: c.suppression_rate,
            availability_delay_s: c.availability_delay,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchBlock {
    pub n_spread_samples: u32,
    pub n_detection_samples: u32,
    pub beta_alpha: f64,
    pub beta_beta: f64,
    /// Spread-rate sampling interval, mm/s.
    pub spread_interval_mm_s: [f64; 2],
    /// Detection-delay sampling interval, s.
    pub detection_interval_s: [f64; 2],
    pub t_crit_k: f64,
    /// Horizon used for batch cells (long runaway fires need room to cross
    /// the critical temperature), s.
    pub horizon_s: f64,
}

impl Default for BatchBlock {
    fn default() -> Self {
        Self {
            n_spread_samples: 10,
            n_detection_samples: 10,
            beta_alpha: 8.49,
            beta_beta: 7.84,
            spread_interval_mm_s: [0.23, 1.9],
            detection_interval_s: [280.0, 560.0],
            t_crit_k: 350.0,
            horizon_s: 6000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    /// Time-series sampling period, s.
    pub period_s: f64,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { period_s: 1.0 }
    }
}

/// Complete scenario: every module's block plus the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub clock: ClockBlock,
    pub ie: IeBlock,
    pub eclss: EclssBlock,
    pub power: PowerBlock,
    pub disturbance: DisturbanceBlock,
    pub fdd: FddBlock,
    pub repair: RepairBlock,
    pub batch: BatchBlock,
    pub output: OutputBlock,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            clock: ClockBlock::default(),
            ie: IeBlock::default(),
            eclss: EclssBlock::default(),
            power: PowerBlock::default(),
            disturbance: DisturbanceBlock::reference(),
            fdd: FddBlock::default(),
            repair: RepairBlock::default(),
            batch: BatchBlock::default(),
            output: OutputBlock::default(),
        }
    }
}

/// Invariant violation with the path of the offending field.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("{path}: {message}")]
pub struct ValidationError {
    pub path: String,
    pub message: String,
}

fn err(path: &str, message: impl Into<String>) -> ValidationError {
    ValidationError {
        path: path.to_string(),
        message: message.into(),
    }
}

fn on_grid(value: f64, base: f64) -> bool {
    let ratio = value / base;
    (ratio - ratio.round()).abs() < 1e-9
}

// NaN-rejecting range predicates for parsed values.
fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

fn non_negative(v: f64) -> bool {
    v.is_finite() && v >= 0.0
}

fn unit_fraction(v: f64) -> bool {
    v.is_finite() && v > 0.0 && v <= 1.0
}

impl ScenarioConfig {
    /// Check every module invariant, reporting the first violation with its
    /// field path.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let c = &self.clock;
        if !positive(c.base_step_s) {
            return Err(err("clock.base_step_s", "must be positive and finite"));
        }
        if !non_negative(c.end_time_s) {
            return Err(err("clock.end_time_s", "must be non-negative and finite"));
        }
        if !on_grid(c.end_time_s, c.base_step_s) {
            return Err(err("clock.end_time_s", "must be a multiple of base_step_s"));
        }
        if !positive(c.subsystem_period_s) || !on_grid(c.subsystem_period_s, c.base_step_s) {
            return Err(err(
                "clock.subsystem_period_s",
                "must be a positive multiple of base_step_s",
            ));
        }

        let ie = &self.ie;
        for (i, v) in ie.zone_volumes_m3.iter().enumerate() {
            if !positive(*v) {
                return Err(err(&format!("ie.zone_volumes_m3[{i}]"), "must be positive"));
            }
        }
        if !non_negative(ie.door_conductance_w_per_k) {
            return Err(err("ie.door_conductance_w_per_k", "must be non-negative"));
        }
        if !non_negative(ie.wall_conductance_w_per_k) {
            return Err(err("ie.wall_conductance_w_per_k", "must be non-negative"));
        }
        if !positive(ie.wall_sink_k) {
            return Err(err("ie.wall_sink_k", "must be positive"));
        }
        if !positive(ie.heat_capacity_j_per_mol_k) {
            return Err(err("ie.heat_capacity_j_per_mol_k", "must be positive"));
        }
        for (i, t) in ie.initial_temperature_k.iter().enumerate() {
            if !positive(*t) {
                return Err(err(
                    &format!("ie.initial_temperature_k[{i}]"),
                    "must be positive",
                ));
            }
        }
        for (i, p) in ie.initial_pressure_pa.iter().enumerate() {
            if !positive(*p) {
                return Err(err(
                    &format!("ie.initial_pressure_pa[{i}]"),
                    "must be positive",
                ));
            }
        }
        if !non_negative(ie.sensor_sigma_temperature_k) {
            return Err(err("ie.sensor_sigma_temperature_k", "must be non-negative"));
        }
        if !non_negative(ie.sensor_sigma_pressure_pa) {
            return Err(err("ie.sensor_sigma_pressure_pa", "must be non-negative"));
        }
        if ie.safe_temperature_k[0] >= ie.safe_temperature_k[1] {
            return Err(err(
                "ie.safe_temperature_k",
                "lower bound must be below upper",
            ));
        }
        if ie.safe_pressure_pa[0] >= ie.safe_pressure_pa[1] {
            return Err(err(
                "ie.safe_pressure_pa",
                "lower bound must be below upper",
            ));
        }
        if !(0.0..1.0).contains(&ie.vent_floor_fraction) {
            return Err(err("ie.vent_floor_fraction", "must be within [0, 1)"));
        }

        let e = &self.eclss;
        if e.t_low_k >= e.t_high_k {
            return Err(err("eclss.t_low_k", "must be below t_high_k"));
        }
        if e.t_hysteresis_k < 0.0 || e.t_low_k + e.t_hysteresis_k >= e.t_high_k - e.t_hysteresis_k {
            return Err(err(
                "eclss.t_hysteresis_k",
                "bands overlap: t_low + width must stay below t_high - width",
            ));
        }
        if e.p_low_pa >= e.p_high_pa {
            return Err(err("eclss.p_low_pa", "must be below p_high_pa"));
        }
        if e.p_hysteresis_pa < 0.0
            || e.p_low_pa + e.p_hysteresis_pa >= e.p_high_pa - e.p_hysteresis_pa
        {
            return Err(err(
                "eclss.p_hysteresis_pa",
                "bands overlap: p_low + width must stay below p_high - width",
            ));
        }
        for (name, v) in [
            ("eclss.cooling_power_w", e.cooling_power_w),
            ("eclss.heater_power_w", e.heater_power_w),
            ("eclss.fan_power_w", e.fan_power_w),
            ("eclss.compressor_power_w", e.compressor_power_w),
            ("eclss.condenser_power_w", e.condenser_power_w),
            ("eclss.supply_rate_mol_s", e.supply_rate_mol_s),
            ("eclss.vent_rate_mol_s", e.vent_rate_mol_s),
        ] {
            if !positive(v) {
                return Err(err(name, "must be positive"));
            }
        }
        if !non_negative(e.ipcs_power_w) {
            return Err(err("eclss.ipcs_power_w", "must be non-negative"));
        }
        for (i, v) in e.efficiency_table.iter().enumerate() {
            if !unit_fraction(*v) {
                return Err(err(
                    &format!("eclss.efficiency_table[{i}]"),
                    "must be within (0, 1]",
                ));
            }
        }

        let p = &self.power;
        for (name, v) in [
            ("power.solar_w", p.solar_w),
            ("power.nuclear_w", p.nuclear_w),
        ] {
            if !non_negative(v) {
                return Err(err(name, "must be non-negative"));
            }
        }
        if !positive(p.capacity_j) {
            return Err(err("power.capacity_j", "must be positive"));
        }
        if !(0.0..=1.0).contains(&p.initial_soc_fraction) {
            return Err(err("power.initial_soc_fraction", "must be within [0, 1]"));
        }
        for (name, v) in [
            ("power.charge_efficiency", p.charge_efficiency),
            ("power.discharge_efficiency", p.discharge_efficiency),
        ] {
            if !unit_fraction(v) {
                return Err(err(name, "must be within (0, 1]"));
            }
        }
        if !non_negative(p.baseline_load_w) {
            return Err(err("power.baseline_load_w", "must be non-negative"));
        }
        for (i, v) in p.storage_multipliers.iter().enumerate() {
            if !unit_fraction(*v) {
                return Err(err(
                    &format!("power.storage_multipliers[{i}]"),
                    "must be within (0, 1]",
                ));
            }
        }
        for (i, v) in p.converter_efficiencies.iter().enumerate() {
            if !(0.0..=1.0).contains(v) {
                return Err(err(
                    &format!("power.converter_efficiencies[{i}]"),
                    "must be within [0, 1]",
                ));
            }
        }

        let d = &self.disturbance;
        let fires = d
            .events
            .iter()
            .filter(|ev| ev.kind == DisturbanceKind::Fire)
            .count();
        if fires > 1 {
            return Err(err(
                "disturbance.events",
                "at most one fire event is supported",
            ));
        }
        for (i, ev) in d.events.iter().enumerate() {
            let path = |field: &str| format!("disturbance.events[{i}].{field}");
            if ev.kind != DisturbanceKind::Fire {
                return Err(err(
                    &path("kind"),
                    "only fire is implemented; other kinds are reserved tags",
                ));
            }
            if !non_negative(ev.start_time_s) {
                return Err(err(&path("start_time_s"), "must be non-negative"));
            }
            if let Some(finish) = ev.finish_time_s {
                if finish <= ev.start_time_s {
                    return Err(err(&path("finish_time_s"), "must exceed start_time_s"));
                }
            }
            if !(1..=5).contains(&ev.intensity) {
                return Err(err(&path("intensity"), "must be within 1..=5"));
            }
            if !(1..=2).contains(&ev.zone) {
                return Err(err(&path("zone"), "must be 1 or 2"));
            }
            if !non_negative(ev.spread_rate_m_s) {
                return Err(err(&path("spread_rate_m_s"), "must be non-negative"));
            }
        }
        for (name, zone) in [
            ("disturbance.placement.fan_zone1", d.placement.fan_zone1),
            ("disturbance.placement.fan_zone2", d.placement.fan_zone2),
            ("disturbance.placement.compressor", d.placement.compressor),
            ("disturbance.placement.condenser", d.placement.condenser),
            ("disturbance.placement.storage", d.placement.storage),
            ("disturbance.placement.converter", d.placement.converter),
        ] {
            if !(1..=2).contains(&zone) {
                return Err(err(name, "must be 1 or 2"));
            }
        }

        let f = &self.fdd;
        if f.persistence < 1 {
            return Err(err("fdd.persistence", "must be at least 1"));
        }
        if !non_negative(f.latency_s) {
            return Err(err("fdd.latency_s", "must be non-negative"));
        }
        if !positive(f.detectable_radius_m) {
            return Err(err("fdd.detectable_radius_m", "must be positive"));
        }

        let r = &self.repair;
        if !positive(r.suppression_rate_m_s) {
            return Err(err("repair.suppression_rate_m_s", "must be positive"));
        }
        if !non_negative(r.availability_delay_s) {
            return Err(err("repair.availability_delay_s", "must be non-negative"));
        }

        let b = &self.batch;
        if b.n_spread_samples < 1 {
            return Err(err("batch.n_spread_samples", "must be at least 1"));
        }
        if b.n_detection_samples < 1 {
            return Err(err("batch.n_detection_samples", "must be at least 1"));
        }
        if !positive(b.beta_alpha) || !positive(b.beta_beta) {
            return Err(err("batch.beta_alpha", "shape parameters must be positive"));
        }
        if b.spread_interval_mm_s[0] >= b.spread_interval_mm_s[1] {
            return Err(err(
                "batch.spread_interval_mm_s",
                "lower bound must be below upper",
            ));
        }
        if b.detection_interval_s[0] >= b.detection_interval_s[1] {
            return Err(err(
                "batch.detection_interval_s",
                "lower bound must be below upper",
            ));
        }
        if !positive(b.t_crit_k) {
            return Err(err("batch.t_crit_k", "must be positive"));
        }
        if !positive(b.horizon_s) || !on_grid(b.horizon_s, c.base_step_s) {
            return Err(err(
                "batch.horizon_s",
                "must be a positive multiple of base_step_s",
            ));
        }

        if !positive(self.output.period_s) || !on_grid(self.output.period_s, c.base_step_s) {
            return Err(err(
                "output.period_s",
                "must be a positive multiple of base_step_s",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Registration(#[from] RegistrationError),
    #[error(transparent)]
    Run(#[from] RunError),
}

/// One sampled row of the output time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRecord {
    pub time_s: f64,
    pub fire_radius_m: f64,
    pub fire_phase: u8,
    pub t_zone1_k: f64,
    pub t_zone2_k: f64,
    pub p_zone1_pa: f64,
    pub p_zone2_pa: f64,
    pub fan1_efficiency: f64,
    pub fan2_efficiency: f64,
    pub compressor_efficiency: f64,
    pub condenser_efficiency: f64,
    pub eclss_power_w: f64,
    pub storage_soc_j: f64,
    pub health_ie: u8,
    pub agent_status: u8,
}

pub use crate::engine::RunResult;

/// Wire a habitat simulation from a validated configuration. Subsystems are
/// registered in the canonical deterministic order: disturbance initiator,
/// interior environment, ECLSS, power, FDD, repair scheduler; the recorder
/// samples after each committed tick.
pub fn build_habitat(
    config: &ScenarioConfig,
    seed: u64,
) -> Result<(Engine, ChannelMap), ScenarioError> {
    let clock = SimClock::new(config.clock.base_step_s, config.clock.end_time_s)?;
    let mut engine = Engine::new(clock);
    let fire_event = config
        .disturbance
        .events
        .iter()
        .find(|ev| ev.kind == DisturbanceKind::Fire);
    let origin = fire_event.map_or((0.0, 0.0), |ev| (ev.origin_m[0], ev.origin_m[1]));
    let ch = ChannelMap::declare(
        &mut engine,
        config.ie.initial_temperature_k,
        config.ie.initial_pressure_pa,
        origin,
    )
    .map_err(RegistrationError::from)?;

    let period = config.clock.subsystem_period_s;

    let fire = fire_event.map(|ev| {
        FireState::pending(
            (ev.origin_m[0], ev.origin_m[1]),
            ev.spread_rate_m_s,
            IntensityLevel::new(ev.intensity).expect("validated intensity"),
            ev.start_time_s,
        )
    });
    let placement = ComponentPlacement {
        fan_zone1: (config.disturbance.placement.fan_zone1 - 1) as usize,
        fan_zone2: (config.disturbance.placement.fan_zone2 - 1) as usize,
        compressor: (config.disturbance.placement.compressor - 1) as usize,
        condenser: (config.disturbance.placement.condenser - 1) as usize,
        storage: (config.disturbance.placement.storage - 1) as usize,
        converter: (config.disturbance.placement.converter - 1) as usize,
    };
    engine.register(Box::new(DisturbanceInitiator::new(
        ch.clone(),
        period,
        fire,
        placement,
    )))?;

    let ie_config = IeConfig {
        volumes: config.ie.zone_volumes_m3,
        pocket_door_open: config.ie.pocket_door_open,
        door_conductance: config.ie.door_conductance_w_per_k,
        wall_conductance: config.ie.wall_conductance_w_per_k,
        wall_sink_temperature: config.ie.wall_sink_k,
        heat_capacity: config.ie.heat_capacity_j_per_mol_k,
        fire_zone: fire_event.map_or(1, |ev| (ev.zone - 1) as usize),
        sensor_sigma_temperature: config.ie.sensor_sigma_temperature_k,
        sensor_sigma_pressure: config.ie.sensor_sigma_pressure_pa,
        vent_floor_fraction: config.ie.vent_floor_fraction,
    };
    let zones = [
        ZoneState::from_pressure(
            config.ie.initial_temperature_k[0],
            config.ie.initial_pressure_pa[0],
            config.ie.zone_volumes_m3[0],
        ),
        ZoneState::from_pressure(
            config.ie.initial_temperature_k[1],
            config.ie.initial_pressure_pa[1],
            config.ie.zone_volumes_m3[1],
        ),
    ];
    let sensor_rng = RngStream::new(seed).fork(1);
    engine.register(Box::new(InteriorEnvironment::new(
        ch.clone(),
        period,
        ie_config,
        zones,
        sensor_rng,
    )))?;

    let eclss_config = EclssConfig {
        t_low: config.eclss.t_low_k,
        t_high: config.eclss.t_high_k,
        t_hysteresis: config.eclss.t_hysteresis_k,
        p_low: config.eclss.p_low_pa,
        p_high: config.eclss.p_high_pa,
        p_hysteresis: config.eclss.p_hysteresis_pa,
        cooling_power: config.eclss.cooling_power_w,
        heater_power: config.eclss.heater_power_w,
        fan_power: config.eclss.fan_power_w,
        compressor_power: config.eclss.compressor_power_w,
        condenser_power: config.eclss.condenser_power_w,
        ipcs_power: config.eclss.ipcs_power_w,
        supply_rate: config.eclss.supply_rate_mol_s,
        vent_rate: config.eclss.vent_rate_mol_s,
        efficiency_table: config.eclss.efficiency_table,
    };
    engine.register(Box::new(Eclss::new(ch.clone(), period, eclss_config)))?;

    let power_config = PowerConfig {
        solar_output: config.power.solar_w,
        nuclear_output: config.power.nuclear_w,
        capacity: config.power.capacity_j,
        initial_soc_fraction: config.power.initial_soc_fraction,
        charge_efficiency: config.power.charge_efficiency,
        discharge_efficiency: config.power.discharge_efficiency,
        baseline_load: config.power.baseline_load_w,
        storage_multipliers: config.power.storage_multipliers,
        converter_efficiencies: config.power.converter_efficiencies,
    };
    engine.register(Box::new(PowerSystem::new(ch.clone(), period, power_config)))?;

    let fdd_config = FddConfig {
        mode: config.fdd.mode,
        temperature_band: (
            config.ie.safe_temperature_k[0],
            config.ie.safe_temperature_k[1],
        ),
        pressure_band: (config.ie.safe_pressure_pa[0], config.ie.safe_pressure_pa[1]),
        persistence: config.fdd.persistence,
        latency: config.fdd.latency_s,
        detectable_radius: config.fdd.detectable_radius_m,
    };
    engine.register(Box::new(FddSystem::new(ch.clone(), period, fdd_config)))?;

    let repair_config = RepairConfig {
        suppression_rate: config.repair.suppression_rate_m_s,
        availability_delay: config.repair.availability_delay_s,
    };
    engine.register(Box::new(RepairSystem::new(
        ch.clone(),
        period,
        repair_config,
    )))?;

    engine.finalize()?;
    Ok((engine, ch))
}

/// Validate, build, and run one scenario, returning the sampled time series.
/// `seed_override` substitutes the configured master seed when present.
pub fn run_scenario(
    config: &ScenarioConfig,
    seed_override: Option<u64>,
) -> Result<RunResult, ScenarioError> {
    run_scenario_with(config, seed_override, |_| {})
}

/// [`run_scenario`] with a hook invoked once per base tick (after commit);
/// the CLI uses it for wall-clock pacing.
pub fn run_scenario_with(
    config: &ScenarioConfig,
    seed_override: Option<u64>,
    mut on_tick: impl FnMut(f64),
) -> Result<RunResult, ScenarioError> {
    config.validate()?;
    let seed = seed_override.unwrap_or(config.seed);
    let (mut engine, ch) = build_habitat(config, seed)?;
    let output_ticks = (config.output.period_s / config.clock.base_step_s).round() as u64;
    let expected_rows = (config.clock.end_time_s / config.output.period_s).floor() as usize + 1;
    let mut records = Vec::with_capacity(expected_rows);
    engine.run(|tick, now, bus| {
        on_tick(now);
        if tick % output_ticks != 0 {
            return;
        }
        let time_s = (tick / output_ticks) as f64 * config.output.period_s;
        let eff = bus.fused(ch.eclss_efficiency).0;
        records.push(TimeSeriesRecord {
            time_s,
            fire_radius_m: bus.fused_scalar(ch.fire_physical),
            fire_phase: bus.fused_scalar(ch.fire_status) as u8,
            t_zone1_k: bus.fused(ch.ie_temperature).0[0],
            t_zone2_k: bus.fused(ch.ie_temperature).0[1],
            p_zone1_pa: bus.fused(ch.ie_pressure).0[0],
            p_zone2_pa: bus.fused(ch.ie_pressure).0[1],
            fan1_efficiency: eff[0],
            fan2_efficiency: eff[1],
            compressor_efficiency: eff[2],
            condenser_efficiency: eff[3],
            eclss_power_w: bus.fused_scalar(ch.eclss_power_demand),
            storage_soc_j: bus.fused(ch.power_status).0[0],
            health_ie: bus.fused_scalar(ch.health_ie) as u8,
            agent_status: bus.fused_scalar(ch.repair_agent) as u8,
        });
    })?;
    Ok(RunResult {
        records,
        seed,
        end_time: config.clock.end_time_s,
    })
}
