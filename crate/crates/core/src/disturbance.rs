//! Disturbance initiator: fire model, damage indicator derivation, and the
//! frames that carry hazard state to the rest of the habitat.
//!
//! The fire is a semispherical front that grows linearly at its spread rate
//! and shrinks under an agent's suppression rate. Its effect on the interior
//! environment is a surface heat flux selected by a five-level intensity
//! scale (level 1 is nominal and produces nothing). Secondary, cascading
//! effects are expressed as damage indicator levels derived from zone
//! temperatures per component class.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bus::{InputView, OutputBuffer};
use crate::channels::ChannelMap;
use crate::engine::{StepError, Subsystem, SubsystemDescriptor};

/// Severity of a primary disruption, 1 (nominal) to 5 (worst).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct IntensityLevel(u8);

impl IntensityLevel {
    pub const NOMINAL: IntensityLevel = IntensityLevel(1);

    pub fn new(level: u8) -> Result<Self, DamageError> {
        if (1..=5).contains(&level) {
            Ok(Self(level))
        } else {
            Err(DamageError::IntensityOutOfRange(level))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Disruptions act only above level 1.
    pub fn is_active(self) -> bool {
        self.0 > 1
    }
}

impl TryFrom<u8> for IntensityLevel {
    type Error = DamageError;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<IntensityLevel> for u8 {
    fn from(v: IntensityLevel) -> u8 {
        v.0
    }
}

/// Severity of a secondary (cascading) effect, 1 to 5. Power converters only
/// ever reach 4 (critical failure).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DamageLevel(u8);

impl DamageLevel {
    pub const NOMINAL: DamageLevel = DamageLevel(1);

    pub fn new(level: u8) -> Result<Self, DamageError> {
        if (1..=5).contains(&level) {
            Ok(Self(level))
        } else {
            Err(DamageError::DamageOutOfRange(level))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DamageError {
    #[error("intensity level {0} outside 1..=5")]
    IntensityOutOfRange(u8),
    #[error("damage level {0} outside 1..=5")]
    DamageOutOfRange(u8),
    #[error("temperature {0} is not finite")]
    NonFiniteTemperature(f64),
}

/// Component classes with distinct temperature-to-damage bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentClass {
    EnergyStorage,
    Compressor,
    PowerConverter,
}

/// Map a component temperature (degrees Celsius) onto its damage indicator
/// level. Bands are half-open with the lower severity winning at shared
/// endpoints, which makes the mapping total over all finite temperatures.
pub fn temperature_to_damage(
    component: ComponentClass,
    celsius: f64,
) -> Result<DamageLevel, DamageError> {
    if !celsius.is_finite() {
        return Err(DamageError::NonFiniteTemperature(celsius));
    }
    let level = match component {
        ComponentClass::EnergyStorage => {
            if (-1.0..=30.0).contains(&celsius) {
                1
            } else if (-20.0..-1.0).contains(&celsius) {
                2
            } else if (-50.0..-20.0).contains(&celsius) {
                3
            } else if celsius > 30.0 && celsius <= 50.0 {
                4
            } else {
                5
            }
        }
        ComponentClass::Compressor => {
            if (10.0..=30.0).contains(&celsius) {
                1
            } else if (0.0..10.0).contains(&celsius) || (celsius > 30.0 && celsius <= 60.0) {
                2
            } else if (-10.0..0.0).contains(&celsius) || (celsius > 60.0 && celsius <= 90.0) {
                3
            } else if (-20.0..-10.0).contains(&celsius) || (celsius > 90.0 && celsius <= 120.0) {
                4
            } else {
                5
            }
        }
        ComponentClass::PowerConverter => {
            if celsius <= 105.0 {
                1
            } else if celsius <= 125.0 {
                2
            } else if celsius <= 145.0 {
                3
            } else {
                4
            }
        }
    };
    Ok(DamageLevel(level))
}

/// Fire lifecycle. Transitions only ever move forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirePhase {
    Pending,
    Burning,
    Suppressing,
    Extinguished,
}

impl FirePhase {
    pub fn code(self) -> u8 {
        match self {
            FirePhase::Pending => 0,
            FirePhase::Burning => 1,
            FirePhase::Suppressing => 2,
            FirePhase::Extinguished => 3,
        }
    }
}

/// Semisphere surface heat flux per intensity level, W/m².
pub const INTENSITY_FLUX_W_M2: [f64; 5] = [0.0, 20e3, 60e3, 120e3, 200e3];

/// State of the single modeled fire hazard.
#[derive(Debug, Clone, PartialEq)]
pub struct FireState {
    /// Habitat plan coordinates of the origin, meters.
    pub origin: (f64, f64),
    pub radius: f64,
    /// Growth rate of the front, m/s.
    pub spread_rate: f64,
    pub intensity: IntensityLevel,
    pub start_time: f64,
    pub phase: FirePhase,
}

impl FireState {
    pub fn pending(
        origin: (f64, f64),
        spread_rate: f64,
        intensity: IntensityLevel,
        start_time: f64,
    ) -> Self {
        Self {
            origin,
            radius: 0.0,
            spread_rate,
            intensity,
            start_time,
            phase: FirePhase::Pending,
        }
    }

    /// Heat release into the zone air, W. Zero unless burning or suppressing.
    pub fn heat_output(&self) -> f64 {
        match self.phase {
            FirePhase::Burning | FirePhase::Suppressing => {
                fire_heat_output(self.intensity, self.radius)
            }
            _ => 0.0,
        }
    }
}

/// Semispherical surface flux: q(intensity) * 2*pi*r^2. Level 1 emits nothing.
pub fn fire_heat_output(intensity: IntensityLevel, radius: f64) -> f64 {
    let q = INTENSITY_FLUX_W_M2[(intensity.get() - 1) as usize];
    q * 2.0 * std::f64::consts::PI * radius * radius
}

/// Advance the fire by `dt`. While burning the radius grows at the spread
/// rate; under suppression the net rate is `spread - suppression`, clamped at
/// zero, and reaching zero extinguishes the fire. A pending fire ignites once
/// the clock reaches its start time (no growth on the ignition step).
pub fn step_fire(state: &mut FireState, now: f64, dt: f64, suppression_rate: f64) {
    debug_assert!(dt > 0.0 && suppression_rate >= 0.0);
    match state.phase {
        FirePhase::Pending => {
            if now >= state.start_time {
                state.phase = FirePhase::Burning;
            }
        }
        FirePhase::Burning | FirePhase::Suppressing => {
            if suppression_rate > 0.0 {
                state.phase = FirePhase::Suppressing;
            }
            let net = match state.phase {
                FirePhase::Suppressing => state.spread_rate - suppression_rate,
                _ => state.spread_rate,
            };
            state.radius = (state.radius + net * dt).max(0.0);
            if state.phase == FirePhase::Suppressing && state.radius <= 0.0 {
                state.radius = 0.0;
                state.phase = FirePhase::Extinguished;
            }
        }
        FirePhase::Extinguished => {}
    }
}

/// Which zone (0-based) each damage-tracked component sits in.
#[derive(Debug, Clone, Copy)]
pub struct ComponentPlacement {
    pub fan_zone1: usize,
    pub fan_zone2: usize,
    pub compressor: usize,
    pub condenser: usize,
    pub storage: usize,
    pub converter: usize,
}

impl Default for ComponentPlacement {
    fn default() -> Self {
        // Zone 2 holds the fire-adjacent equipment in the reference layout.
        Self {
            fan_zone1: 0,
            fan_zone2: 1,
            compressor: 1,
            condenser: 0,
            storage: 0,
            converter: 0,
        }
    }
}

/// Derived damage indicator levels for every placed component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DamageIndicators {
    pub fan_zone1: DamageLevel,
    pub fan_zone2: DamageLevel,
    pub compressor: DamageLevel,
    pub condenser: DamageLevel,
    pub storage: DamageLevel,
    pub converter: DamageLevel,
}

#[derive(Debug, Error, PartialEq)]
pub enum PlacementError {
    #[error("component placed in unknown zone {zone} (have {zones})")]
    UnknownZone { zone: usize, zones: usize },
}

/// Convert zone temperatures (kelvin) into per-component damage levels using
/// each component's placement. Fans and the condenser reuse the compressor
/// temperature bands.
pub fn derive_damage_indicators(
    zone_temperatures_k: &[f64],
    placement: &ComponentPlacement,
) -> Result<DamageIndicators, PlacementError> {
    let celsius = |zone: usize| -> Result<f64, PlacementError> {
        zone_temperatures_k
            .get(zone)
            .map(|t| t - 273.15)
            .ok_or(PlacementError::UnknownZone {
                zone,
                zones: zone_temperatures_k.len(),
            })
    };
    let dmg = |class, zone| -> Result<DamageLevel, PlacementError> {
        // Temperatures come from simulated state, so finiteness holds; a
        // non-finite value would already have aborted the IE step.
        Ok(temperature_to_damage(class, celsius(zone)?).expect("finite zone temperature"))
    };
    Ok(DamageIndicators {
        fan_zone1: dmg(ComponentClass::Compressor, placement.fan_zone1)?,
        fan_zone2: dmg(ComponentClass::Compressor, placement.fan_zone2)?,
        compressor: dmg(ComponentClass::Compressor, placement.compressor)?,
        condenser: dmg(ComponentClass::Compressor, placement.condenser)?,
        storage: dmg(ComponentClass::EnergyStorage, placement.storage)?,
        converter: dmg(ComponentClass::PowerConverter, placement.converter)?,
    })
}

/// One scheduled disturbance. Only fire carries an implemented model; the
/// other kinds are reserved tags so schedules naming them parse but are
/// rejected at validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceKind {
    Fire,
    Moonquake,
    Meteorite,
    Dust,
    AirlockLeak,
}

/// Engine adapter owning the fire and the damage derivation.
pub struct DisturbanceInitiator {
    desc: SubsystemDescriptor,
    ch: ChannelMap,
    fire: Option<FireState>,
    placement: ComponentPlacement,
    dt: f64,
}

impl DisturbanceInitiator {
    pub fn new(
        ch: ChannelMap,
        period: f64,
        fire: Option<FireState>,
        placement: ComponentPlacement,
    ) -> Self {
        let desc = SubsystemDescriptor {
            id: "disturbance".into(),
            step_period: period,
            input_channels: vec![ch.ie_temperature, ch.repair_suppression],
            output_channels: vec![
                ch.fire_physical,
                ch.fire_intensity,
                ch.fire_status,
                ch.airlock_leak,
                ch.damage_fan_zone1,
                ch.damage_fan_zone2,
                ch.damage_compressor,
                ch.damage_condenser,
                ch.damage_storage,
                ch.damage_converter,
            ],
        };
        Self {
            desc,
            ch,
            fire,
            placement,
            dt: period,
        }
    }

    pub fn fire(&self) -> Option<&FireState> {
        self.fire.as_ref()
    }
}

impl Subsystem for DisturbanceInitiator {
    fn descriptor(&self) -> &SubsystemDescriptor {
        &self.desc
    }

    fn step(&mut self, inputs: &InputView<'_>, out: &mut OutputBuffer) -> Result<(), StepError> {
        let suppression = inputs.scalar(self.ch.repair_suppression).max(0.0);
        let (radius, spread, origin, intensity, phase) = match self.fire.as_mut() {
            Some(fire) => {
                step_fire(fire, inputs.now, self.dt, suppression);
                let reported_intensity = match fire.phase {
                    FirePhase::Burning | FirePhase::Suppressing => fire.intensity,
                    // Pending and extinguished fires report the nominal level.
                    _ => IntensityLevel::NOMINAL,
                };
                (
                    fire.radius,
                    fire.spread_rate,
                    fire.origin,
                    reported_intensity,
                    fire.phase,
                )
            }
            None => (
                0.0,
                0.0,
                (0.0, 0.0),
                IntensityLevel::NOMINAL,
                FirePhase::Pending,
            ),
        };
        out.stage(self.ch.fire_physical, &[radius, spread, origin.0, origin.1])?;
        out.stage(self.ch.fire_intensity, &[intensity.get() as f64])?;
        out.stage(self.ch.fire_status, &[phase.code() as f64])?;
        out.stage(self.ch.airlock_leak, &[0.0, 0.0])?;

        let temps = inputs.get(self.ch.ie_temperature);
        let indicators = derive_damage_indicators(temps, &self.placement)
            .map_err(|e| StepError::Model(e.to_string()))?;
        out.stage(
            self.ch.damage_fan_zone1,
            &[indicators.fan_zone1.get() as f64],
        )?;
        out.stage(
            self.ch.damage_fan_zone2,
            &[indicators.fan_zone2.get() as f64],
        )?;
        out.stage(
            self.ch.damage_compressor,
            &[indicators.compressor.get() as f64],
        )?;
        out.stage(
            self.ch.damage_condenser,
            &[indicators.condenser.get() as f64],
        )?;
        out.stage(self.ch.damage_storage, &[indicators.storage.get() as f64])?;
        out.stage(
            self.ch.damage_converter,
            &[indicators.converter.get() as f64],
        )?;
        Ok(())
    }
}
