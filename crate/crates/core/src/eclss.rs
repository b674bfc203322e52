//! Environmental control: hysteretic thermal control (ATCS), pressure
//! control (IPCS), damage-driven component efficiencies, and the resulting
//! electrical demand.

use crate::bus::{InputView, OutputBuffer};
use crate::channels::ChannelMap;
use crate::disturbance::DamageLevel;
use crate::engine::{StepError, Subsystem, SubsystemDescriptor};

/// Efficiency applied per damage level (index = level - 1) for fans, the
/// compressor, and the condenser.
pub const DEFAULT_EFFICIENCY_TABLE: [f64; 5] = [1.00, 0.90, 0.75, 0.60, 0.40];

#[derive(Debug, Clone)]
pub struct EclssConfig {
    /// Heater engages below this measured temperature, K.
    pub t_low: f64,
    /// Cooling engages above this measured temperature, K.
    pub t_high: f64,
    pub t_hysteresis: f64,
    /// Air supply engages below this measured pressure, Pa.
    pub p_low: f64,
    /// Venting engages above this measured pressure, Pa.
    pub p_high: f64,
    pub p_hysteresis: f64,
    /// Rated cooling heat removal per zone, W.
    pub cooling_power: f64,
    /// Rated heater output per zone, W.
    pub heater_power: f64,
    /// Rated electrical draws, W.
    pub fan_power: f64,
    pub compressor_power: f64,
    pub condenser_power: f64,
    pub ipcs_power: f64,
    /// Molar air supply / vent rates, mol/s (total across zones).
    pub supply_rate: f64,
    pub vent_rate: f64,
    pub efficiency_table: [f64; 5],
}

impl Default for EclssConfig {
    fn default() -> Self {
        Self {
            t_low: 295.0,
            t_high: 300.5,
            t_hysteresis: 0.5,
            p_low: 98_000.0,
            p_high: 104_000.0,
            p_hysteresis: 1_000.0,
            cooling_power: 1_500.0,
            heater_power: 500.0,
            fan_power: 100.0,
            compressor_power: 400.0,
            condenser_power: 150.0,
            ipcs_power: 10.0,
            supply_rate: 0.5,
            vent_rate: 0.5,
            efficiency_table: DEFAULT_EFFICIENCY_TABLE,
        }
    }
}

/// Latched actuator and efficiency state.
#[derive(Debug, Clone, Copy)]
pub struct EclssState {
    pub cooling_on: [bool; 2],
    pub heater_on: [bool; 2],
    pub supplying: bool,
    pub venting: bool,
    pub fan_efficiency: [f64; 2],
    pub compressor_efficiency: f64,
    pub condenser_efficiency: f64,
}

impl Default for EclssState {
    fn default() -> Self {
        Self {
            cooling_on: [false; 2],
            heater_on: [false; 2],
            supplying: false,
            venting: false,
            fan_efficiency: [1.0; 2],
            compressor_efficiency: 1.0,
            condenser_efficiency: 1.0,
        }
    }
}

/// Per-zone thermal hysteresis: cooling latches on above `t_high` and off
/// below `t_high - width`; the heater mirrors this around `t_low`. Commands
/// otherwise hold their previous value, so a monotone signal toggles each
/// actuator at most once.
pub fn thermal_control(measured: [f64; 2], state: &mut EclssState, config: &EclssConfig) {
    let w = config.t_hysteresis;
    for (i, &t) in measured.iter().enumerate() {
        state.cooling_on[i] = if state.cooling_on[i] {
            t > config.t_high - w
        } else {
            t > config.t_high
        };
        state.heater_on[i] = if state.heater_on[i] {
            t < config.t_low + w
        } else {
            t < config.t_low
        };
    }
}

/// Pressure hysteresis on the zone-averaged measurement: supply below
/// `p_low`, vent above `p_high`, nothing inside the band. Returns the signed
/// molar flow command (positive = supply).
pub fn pressure_control(measured: f64, state: &mut EclssState, config: &EclssConfig) -> f64 {
    let w = config.p_hysteresis;
    state.supplying = if state.supplying {
        measured < config.p_low + w
    } else {
        measured < config.p_low
    };
    state.venting = if state.venting {
        measured > config.p_high - w
    } else {
        measured > config.p_high
    };
    if state.supplying {
        config.supply_rate
    } else if state.venting {
        -config.vent_rate
    } else {
        0.0
    }
}

/// Apply damage indicator levels to component efficiencies. The mapping is
/// the configured step table, applied instantaneously.
pub fn apply_eclss_damage(
    state: &mut EclssState,
    config: &EclssConfig,
    fan: [DamageLevel; 2],
    compressor: DamageLevel,
    condenser: DamageLevel,
) {
    let eff = |level: DamageLevel| config.efficiency_table[(level.get() - 1) as usize];
    state.fan_efficiency = [eff(fan[0]), eff(fan[1])];
    state.compressor_efficiency = eff(compressor);
    state.condenser_efficiency = eff(condenser);
}

/// Heat removal delivered to one zone while its cooling runs: the rated
/// power derated by the fan/compressor/condenser chain.
pub fn delivered_cooling(zone: usize, state: &EclssState, config: &EclssConfig) -> f64 {
    config.cooling_power
        * state.fan_efficiency[zone]
        * state.compressor_efficiency
        * state.condenser_efficiency
}

/// Total electrical demand, W. Each active component draws its rated power
/// divided by its current efficiency; fans run continuously.
pub fn eclss_power_demand(state: &EclssState, config: &EclssConfig) -> f64 {
    let mut demand =
        config.fan_power / state.fan_efficiency[0] + config.fan_power / state.fan_efficiency[1];
    if state.cooling_on[0] || state.cooling_on[1] {
        demand += config.compressor_power / state.compressor_efficiency;
        demand += config.condenser_power / state.condenser_efficiency;
    }
    for i in 0..2 {
        if state.heater_on[i] {
            demand += config.heater_power;
        }
    }
    if state.supplying || state.venting {
        demand += config.ipcs_power;
    }
    demand
}

/// Engine adapter for the controller pair.
pub struct Eclss {
    desc: SubsystemDescriptor,
    ch: ChannelMap,
    config: EclssConfig,
    state: EclssState,
}

impl Eclss {
    pub fn new(ch: ChannelMap, period: f64, config: EclssConfig) -> Self {
        let desc = SubsystemDescriptor {
            id: "eclss".into(),
            step_period: period,
            input_channels: vec![
                ch.ie_sensor_temperature,
                ch.ie_sensor_pressure,
                ch.fire_intensity,
                ch.damage_fan_zone1,
                ch.damage_fan_zone2,
                ch.damage_compressor,
                ch.damage_condenser,
            ],
            output_channels: vec![
                ch.eclss_thermal,
                ch.eclss_air_flow,
                ch.eclss_power_demand,
                ch.eclss_efficiency,
                ch.eclss_actuators,
            ],
        };
        Self {
            desc,
            ch,
            config,
            state: EclssState::default(),
        }
    }

    pub fn state(&self) -> &EclssState {
        &self.state
    }
}

impl Subsystem for Eclss {
    fn descriptor(&self) -> &SubsystemDescriptor {
        &self.desc
    }

    fn step(&mut self, inputs: &InputView<'_>, out: &mut OutputBuffer) -> Result<(), StepError> {
        let level = |ch| {
            let raw = inputs.scalar(ch) as u8;
            DamageLevel::new(raw.clamp(1, 5)).expect("clamped level")
        };
        apply_eclss_damage(
            &mut self.state,
            &self.config,
            [
                level(self.ch.damage_fan_zone1),
                level(self.ch.damage_fan_zone2),
            ],
            level(self.ch.damage_compressor),
            level(self.ch.damage_condenser),
        );

        let t = inputs.get(self.ch.ie_sensor_temperature);
        thermal_control([t[0], t[1]], &mut self.state, &self.config);
        let p = inputs.get(self.ch.ie_sensor_pressure);
        let flow = pressure_control(0.5 * (p[0] + p[1]), &mut self.state, &self.config);

        let mut thermal = [0.0f64; 2];
        for (i, q) in thermal.iter_mut().enumerate() {
            if self.state.heater_on[i] {
                *q += self.config.heater_power;
            }
            if self.state.cooling_on[i] {
                *q -= delivered_cooling(i, &self.state, &self.config);
            }
        }
        out.stage(self.ch.eclss_thermal, &thermal)?;
        out.stage(self.ch.eclss_air_flow, &[flow / 2.0, flow / 2.0])?;
        out.stage(
            self.ch.eclss_power_demand,
            &[eclss_power_demand(&self.state, &self.config)],
        )?;
        out.stage(
            self.ch.eclss_efficiency,
            &[
                self.state.fan_efficiency[0],
                self.state.fan_efficiency[1],
                self.state.compressor_efficiency,
                self.state.condenser_efficiency,
            ],
        )?;
        out.stage(
            self.ch.eclss_actuators,
            &[
                self.state.cooling_on[0] as u8 as f64,
                self.state.cooling_on[1] as u8 as f64,
                self.state.heater_on[0] as u8 as f64,
                self.state.heater_on[1] as u8 as f64,
                self.state.supplying as u8 as f64,
                self.state.venting as u8 as f64,
            ],
        )?;
        Ok(())
    }
}
