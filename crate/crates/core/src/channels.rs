//! Channel names and the resolved id map for the habitat wiring.

use crate::bus::BusError;
use crate::engine::Engine;
use crate::signal::{ChannelId, ChannelSpec, SignalKind};

pub const FIRE_PHYSICAL: &str = "fire.physical";
pub const FIRE_INTENSITY: &str = "fire.intensity";
pub const FIRE_STATUS: &str = "fire.status";
pub const AIRLOCK_LEAK: &str = "airlock.leak";
pub const DAMAGE_FAN_ZONE1: &str = "damage.fan_zone1";
pub const DAMAGE_FAN_ZONE2: &str = "damage.fan_zone2";
pub const DAMAGE_COMPRESSOR: &str = "damage.compressor";
pub const DAMAGE_CONDENSER: &str = "damage.condenser";
pub const DAMAGE_STORAGE: &str = "damage.storage";
pub const DAMAGE_CONVERTER: &str = "damage.converter";
pub const IE_TEMPERATURE: &str = "ie.temperature";
pub const IE_PRESSURE: &str = "ie.pressure";
pub const IE_SENSOR_TEMPERATURE: &str = "ie.sensor.temperature";
pub const IE_SENSOR_PRESSURE: &str = "ie.sensor.pressure";
pub const ECLSS_THERMAL: &str = "eclss.thermal_power";
pub const ECLSS_AIR_FLOW: &str = "eclss.air_flow";
pub const ECLSS_POWER_DEMAND: &str = "eclss.power_demand";
pub const ECLSS_EFFICIENCY: &str = "eclss.efficiency";
pub const ECLSS_ACTUATORS: &str = "eclss.actuators";
pub const POWER_STATUS: &str = "power.status";
pub const HEALTH_IE: &str = "health.ie";
pub const REPAIR_SUPPRESSION: &str = "repair.fire_suppression";
pub const REPAIR_AGENT: &str = "repair.agent";

/// Resolved channel ids for the full habitat wiring, in declaration order.
#[derive(Debug, Clone)]
pub struct ChannelMap {
    pub fire_physical: ChannelId,
    pub fire_intensity: ChannelId,
    pub fire_status: ChannelId,
    pub airlock_leak: ChannelId,
    pub damage_fan_zone1: ChannelId,
    pub damage_fan_zone2: ChannelId,
    pub damage_compressor: ChannelId,
    pub damage_condenser: ChannelId,
    pub damage_storage: ChannelId,
    pub damage_converter: ChannelId,
    pub ie_temperature: ChannelId,
    pub ie_pressure: ChannelId,
    pub ie_sensor_temperature: ChannelId,
    pub ie_sensor_pressure: ChannelId,
    pub eclss_thermal: ChannelId,
    pub eclss_air_flow: ChannelId,
    pub eclss_power_demand: ChannelId,
    pub eclss_efficiency: ChannelId,
    pub eclss_actuators: ChannelId,
    pub power_status: ChannelId,
    pub health_ie: ChannelId,
    pub repair_suppression: ChannelId,
    pub repair_agent: ChannelId,
}

impl ChannelMap {
    /// Declare every habitat channel on the engine's bus with its kind,
    /// units, and initial value. `initial_t` / `initial_p` seed the
    /// environment channels so consumers observe a consistent state at t=0.
    pub fn declare(
        engine: &mut Engine,
        initial_t: [f64; 2],
        initial_p: [f64; 2],
        fire_origin: (f64, f64),
    ) -> Result<Self, BusError> {
        use SignalKind::*;
        let mut declare = |name: &str, kind, units: Vec<&'static str>, initial: Vec<f64>| {
            engine
                .declare_channel(ChannelSpec::new(name, kind, units, initial))
                .map_err(|e| match e {
                    crate::engine::RegistrationError::Bus(b) => b,
                    other => panic!("channel declaration: {other}"),
                })
        };
        Ok(Self {
            fire_physical: declare(
                FIRE_PHYSICAL,
                Disturbance,
                vec!["m", "m/s", "m", "m"],
                vec![0.0, 0.0, fire_origin.0, fire_origin.1],
            )?,
            fire_intensity: declare(FIRE_INTENSITY, Disturbance, vec!["level"], vec![1.0])?,
            fire_status: declare(FIRE_STATUS, Cyber, vec!["code"], vec![0.0])?,
            airlock_leak: declare(
                AIRLOCK_LEAK,
                Physical,
                vec!["mol/s", "mol/s"],
                vec![0.0, 0.0],
            )?,
            damage_fan_zone1: declare(DAMAGE_FAN_ZONE1, Damage, vec!["level"], vec![1.0])?,
            damage_fan_zone2: declare(DAMAGE_FAN_ZONE2, Damage, vec!["level"], vec![1.0])?,
            damage_compressor: declare(DAMAGE_COMPRESSOR, Damage, vec!["level"], vec![1.0])?,
            damage_condenser: declare(DAMAGE_CONDENSER, Damage, vec!["level"], vec![1.0])?,
            damage_storage: declare(DAMAGE_STORAGE, Damage, vec!["level"], vec![1.0])?,
            damage_converter: declare(DAMAGE_CONVERTER, Damage, vec!["level"], vec![1.0])?,
            ie_temperature: declare(IE_TEMPERATURE, Physical, vec!["K", "K"], initial_t.to_vec())?,
            ie_pressure: declare(IE_PRESSURE, Physical, vec!["Pa", "Pa"], initial_p.to_vec())?,
            ie_sensor_temperature: declare(
                IE_SENSOR_TEMPERATURE,
                Cyber,
                vec!["K", "K"],
                initial_t.to_vec(),
            )?,
            ie_sensor_pressure: declare(
                IE_SENSOR_PRESSURE,
                Cyber,
                vec!["Pa", "Pa"],
                initial_p.to_vec(),
            )?,
            eclss_thermal: declare(ECLSS_THERMAL, Physical, vec!["W", "W"], vec![0.0, 0.0])?,
            eclss_air_flow: declare(
                ECLSS_AIR_FLOW,
                Physical,
                vec!["mol/s", "mol/s"],
                vec![0.0, 0.0],
            )?,
            eclss_power_demand: declare(ECLSS_POWER_DEMAND, Cyber, vec!["W"], vec![0.0])?,
            eclss_efficiency: declare(
                ECLSS_EFFICIENCY,
                Cyber,
                vec!["-", "-", "-", "-"],
                vec![1.0, 1.0, 1.0, 1.0],
            )?,
            eclss_actuators: declare(ECLSS_ACTUATORS, Cyber, vec!["bool"; 6], vec![0.0; 6])?,
            power_status: declare(
                POWER_STATUS,
                Cyber,
                vec!["J", "W", "W", "W", "W", "-", "-"],
                vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0],
            )?,
            health_ie: declare(HEALTH_IE, Health, vec!["bit"], vec![0.0])?,
            repair_suppression: declare(REPAIR_SUPPRESSION, Repair, vec!["m/s"], vec![0.0])?,
            repair_agent: declare(REPAIR_AGENT, Cyber, vec!["code"], vec![0.0])?,
        })
    }
}
