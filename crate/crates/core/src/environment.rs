//! Two-zone lumped thermal and pressure model of the habitat air volume.
//!
//! Each zone carries a temperature and a gas inventory; pressure is always
//! derived from the ideal gas law, never stored. Zones exchange heat through
//! a pocket-door conductance when the door is open and lose heat to a lumped
//! wall sink. With the door open the gas inventories rebalance every step so
//! both zones share a single pressure.

use thiserror::Error;

use crate::bus::{InputView, OutputBuffer};
use crate::channels::ChannelMap;
use crate::disturbance::{fire_heat_output, IntensityLevel};
use crate::engine::{StepError, Subsystem, SubsystemDescriptor};
use crate::rng::RngStream;
use crate::GAS_CONSTANT;

/// Lumped state of one zone. Pressure is derived via [`zone_pressure`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneState {
    pub temperature: f64,
    pub gas_amount: f64,
    pub volume: f64,
}

impl ZoneState {
    /// Construct a zone holding `pressure` pascals at `temperature` kelvin.
    pub fn from_pressure(temperature: f64, pressure: f64, volume: f64) -> Self {
        Self {
            temperature,
            gas_amount: pressure * volume / (GAS_CONSTANT * temperature),
            volume,
        }
    }
}

/// Ideal gas pressure of a zone, pascals.
pub fn zone_pressure(zone: &ZoneState) -> f64 {
    zone.gas_amount * GAS_CONSTANT * zone.temperature / zone.volume
}

/// Static thermal/pneumatic parameters of the interior environment.
#[derive(Debug, Clone)]
pub struct IeConfig {
    pub volumes: [f64; 2],
    pub pocket_door_open: bool,
    /// Inter-zone conductance through the open door, W/K.
    pub door_conductance: f64,
    /// Conductance from each zone to the lumped wall sink, W/K.
    pub wall_conductance: f64,
    pub wall_sink_temperature: f64,
    /// Effective molar heat capacity of the zone air lump, J/(mol K).
    pub heat_capacity: f64,
    /// Zone index the fire heats (0-based).
    pub fire_zone: usize,
    pub sensor_sigma_temperature: f64,
    pub sensor_sigma_pressure: f64,
    /// Venting stops once a zone inventory falls to this fraction of its
    /// initial moles so the controller cannot evacuate the habitat.
    pub vent_floor_fraction: f64,
}

impl Default for IeConfig {
    fn default() -> Self {
        Self {
            volumes: [4.0, 4.0],
            pocket_door_open: true,
            door_conductance: 300.0,
            wall_conductance: 2060.0,
            wall_sink_temperature: 299.9,
            heat_capacity: 29.1,
            fire_zone: 1,
            sensor_sigma_temperature: 0.1,
            sensor_sigma_pressure: 50.0,
            vent_floor_fraction: 0.4,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum IeError {
    #[error("zone {zone} state non-finite after step (T={temperature}, n={gas})")]
    NonFinite {
        zone: usize,
        temperature: f64,
        gas: f64,
    },
}

/// Per-step inputs to the environment update.
#[derive(Debug, Clone, Copy, Default)]
pub struct IeInputs {
    /// Fire heat into the fire zone, W.
    pub fire_heat: f64,
    /// Heater (positive) / cooling (negative) power per zone, W.
    pub thermal_power: [f64; 2],
    /// Controlled air supply (positive) or vent (negative) per zone, mol/s.
    pub air_flow: [f64; 2],
    /// Airlock leak flow per zone, mol/s (zero unless a leak is modeled).
    pub leak_flow: [f64; 2],
}

/// Advance both zones by one explicit-Euler step of length `dt`.
///
/// The energy balance per zone is
/// `n c dT/dt = Q_fire + Q_eclss - U_wall (T - T_sink) + U_door (T_other - T)`
/// with the door term only when the door is open. When conductances are large
/// relative to the current inventory the step is internally subdivided to
/// keep the explicit update stable; the subdivision count is a deterministic
/// function of the state. Gas flows integrate afterwards, clamped at zero,
/// and an open door rebalances inventories so both zones share one pressure.
pub fn step_ie(
    zones: &mut [ZoneState; 2],
    config: &IeConfig,
    inputs: &IeInputs,
    dt: f64,
) -> Result<(), IeError> {
    debug_assert!(dt > 0.0);
    let door_u = if config.pocket_door_open {
        config.door_conductance
    } else {
        0.0
    };
    let u_total = config.wall_conductance + door_u;
    let min_heat_capacity = zones
        .iter()
        .map(|z| z.gas_amount * config.heat_capacity)
        .fold(f64::INFINITY, f64::min);
    // Explicit Euler is stable for U dt / (n c) < 2; subdivide to keep the
    // per-substep factor at or below 0.5.
    let substeps = if u_total > 0.0 && min_heat_capacity.is_finite() && min_heat_capacity > 0.0 {
        ((u_total * dt) / (0.5 * min_heat_capacity)).ceil().max(1.0) as usize
    } else {
        1
    };
    let h = dt / substeps as f64;
    for _ in 0..substeps {
        let mut delta = [0.0f64; 2];
        for i in 0..2 {
            let other = 1 - i;
            let fire = if i == config.fire_zone {
                inputs.fire_heat
            } else {
                0.0
            };
            let q = fire + inputs.thermal_power[i]
                - config.wall_conductance * (zones[i].temperature - config.wall_sink_temperature)
                + door_u * (zones[other].temperature - zones[i].temperature);
            delta[i] = q * h / (zones[i].gas_amount * config.heat_capacity);
        }
        for i in 0..2 {
            zones[i].temperature += delta[i];
        }
    }
    for (i, zone) in zones.iter_mut().enumerate() {
        let flow = inputs.air_flow[i] + inputs.leak_flow[i];
        zone.gas_amount = (zone.gas_amount + flow * dt).max(0.0);
    }
    if config.pocket_door_open {
        rebalance_open_door(zones);
    }
    for (i, z) in zones.iter().enumerate() {
        if !z.temperature.is_finite() || !z.gas_amount.is_finite() || z.temperature <= 0.0 {
            return Err(IeError::NonFinite {
                zone: i,
                temperature: z.temperature,
                gas: z.gas_amount,
            });
        }
    }
    Ok(())
}

/// Redistribute the total gas inventory so both zones sit at one pressure.
/// The split preserves the total exactly: n1 = N (V1/T1) / (V1/T1 + V2/T2).
fn rebalance_open_door(zones: &mut [ZoneState; 2]) {
    let total = zones[0].gas_amount + zones[1].gas_amount;
    let w0 = zones[0].volume / zones[0].temperature;
    let w1 = zones[1].volume / zones[1].temperature;
    let n0 = total * w0 / (w0 + w1);
    zones[0].gas_amount = n0;
    zones[1].gas_amount = total - n0;
}

/// Shared pressure of two rebalanced zones. Computed from the totals so both
/// zones report the bit-identical value.
pub fn shared_pressure(zones: &[ZoneState; 2]) -> f64 {
    let total = zones[0].gas_amount + zones[1].gas_amount;
    let w0 = zones[0].volume / zones[0].temperature;
    let w1 = zones[1].volume / zones[1].temperature;
    total * GAS_CONSTANT / (w0 + w1)
}

/// Sensor sampling: truth plus zero-mean Gaussian noise from the run's
/// seeded stream.
pub fn sample_sensor(truth: f64, sigma: f64, rng: &mut RngStream) -> f64 {
    truth + sigma * rng.normal()
}

/// Engine adapter around the zone model.
pub struct InteriorEnvironment {
    desc: SubsystemDescriptor,
    ch: ChannelMap,
    config: IeConfig,
    zones: [ZoneState; 2],
    initial_moles: [f64; 2],
    rng: RngStream,
    dt: f64,
}

impl InteriorEnvironment {
    pub fn new(
        ch: ChannelMap,
        period: f64,
        config: IeConfig,
        zones: [ZoneState; 2],
        rng: RngStream,
    ) -> Self {
        let desc = SubsystemDescriptor {
            id: "ie".into(),
            step_period: period,
            input_channels: vec![
                ch.fire_physical,
                ch.fire_intensity,
                ch.eclss_thermal,
                ch.eclss_air_flow,
                ch.airlock_leak,
            ],
            output_channels: vec![
                ch.ie_temperature,
                ch.ie_pressure,
                ch.ie_sensor_temperature,
                ch.ie_sensor_pressure,
            ],
        };
        let initial_moles = [zones[0].gas_amount, zones[1].gas_amount];
        Self {
            desc,
            ch,
            config,
            zones,
            initial_moles,
            rng,
            dt: period,
        }
    }

    pub fn zones(&self) -> &[ZoneState; 2] {
        &self.zones
    }

    /// Moles below which venting is inhibited, per zone.
    fn vent_floor(&self, zone: usize) -> f64 {
        self.config.vent_floor_fraction * self.initial_moles[zone]
    }
}

impl Subsystem for InteriorEnvironment {
    fn descriptor(&self) -> &SubsystemDescriptor {
        &self.desc
    }

    fn step(&mut self, inputs: &InputView<'_>, out: &mut OutputBuffer) -> Result<(), StepError> {
        let fire_phys = inputs.get(self.ch.fire_physical);
        let radius = fire_phys[0];
        let intensity_raw = inputs.scalar(self.ch.fire_intensity) as u8;
        let intensity = IntensityLevel::new(intensity_raw.clamp(1, 5)).expect("clamped level");
        let fire_heat = fire_heat_output(intensity, radius);

        let thermal = inputs.get(self.ch.eclss_thermal);
        let flow = inputs.get(self.ch.eclss_air_flow);
        let leak = inputs.get(self.ch.airlock_leak);
        let mut air_flow = [flow[0], flow[1]];
        for (i, f) in air_flow.iter_mut().enumerate() {
            if *f < 0.0 && self.zones[i].gas_amount <= self.vent_floor(i) {
                *f = 0.0;
            }
        }
        let ie_inputs = IeInputs {
            fire_heat,
            thermal_power: [thermal[0], thermal[1]],
            air_flow,
            leak_flow: [leak[0], leak[1]],
        };
        step_ie(&mut self.zones, &self.config, &ie_inputs, self.dt)
            .map_err(|e| StepError::NonFinite(e.to_string()))?;

        let t = [self.zones[0].temperature, self.zones[1].temperature];
        let p = if self.config.pocket_door_open {
            let shared = shared_pressure(&self.zones);
            [shared, shared]
        } else {
            [zone_pressure(&self.zones[0]), zone_pressure(&self.zones[1])]
        };
        out.stage(self.ch.ie_temperature, &t)?;
        out.stage(self.ch.ie_pressure, &p)?;

        let st = self.config.sensor_sigma_temperature;
        let sp = self.config.sensor_sigma_pressure;
        let sensed_t = [
            sample_sensor(t[0], st, &mut self.rng),
            sample_sensor(t[1], st, &mut self.rng),
        ];
        let sensed_p = [
            sample_sensor(p[0], sp, &mut self.rng),
            sample_sensor(p[1], sp, &mut self.rng),
        ];
        out.stage(self.ch.ie_sensor_temperature, &sensed_t)?;
        out.stage(self.ch.ie_sensor_pressure, &sensed_p)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_zones(t: f64, p: f64) -> [ZoneState; 2] {
        [
            ZoneState::from_pressure(t, p, 4.0),
            ZoneState::from_pressure(t, p, 4.0),
        ]
    }

    fn adiabatic() -> IeConfig {
        IeConfig {
            wall_conductance: 0.0,
            door_conductance: 0.0,
            pocket_door_open: false,
            ..IeConfig::default()
        }
    }

    #[test]
    fn equilibrium_is_stationary() {
        let config = IeConfig::default();
        let mut zones = two_zones(config.wall_sink_temperature, 101_325.0);
        let before = zones;
        step_ie(&mut zones, &config, &IeInputs::default(), 1.0).unwrap();
        assert_relative_eq!(zones[0].temperature, before[0].temperature, epsilon = 1e-12);
        assert_relative_eq!(zones[1].temperature, before[1].temperature, epsilon = 1e-12);
    }

    #[test]
    fn euler_step_matches_hand_calculation() {
        // One adiabatic step: dT = Q dt / (n c). Pick n c = 1e4 J/K.
        let mut config = adiabatic();
        let mut zones = two_zones(295.0, 101_325.0);
        config.heat_capacity = 1.0e4 / zones[0].gas_amount;
        config.fire_zone = 0;
        let inputs = IeInputs {
            fire_heat: 1000.0,
            ..IeInputs::default()
        };
        step_ie(&mut zones, &config, &inputs, 1.0).unwrap();
        assert_relative_eq!(zones[0].temperature, 295.0 + 0.1, epsilon = 1e-9);
        assert_relative_eq!(zones[1].temperature, 295.0, epsilon = 1e-12);
    }

    #[test]
    fn fire_zone_leads_with_open_door() {
        let config = IeConfig::default();
        let mut zones = two_zones(config.wall_sink_temperature, 101_325.0);
        let inputs = IeInputs {
            fire_heat: 2000.0,
            ..IeInputs::default()
        };
        for _ in 0..200 {
            step_ie(&mut zones, &config, &inputs, 1.0).unwrap();
            assert!(zones[1].temperature > zones[0].temperature);
        }
        assert!(zones[0].temperature > config.wall_sink_temperature);
    }

    #[test]
    fn pressure_round_trip_and_linearity() {
        let zone = ZoneState::from_pressure(295.0, 101_325.0, 4.0);
        assert_relative_eq!(zone_pressure(&zone), 101_325.0, epsilon = 1e-6);
        let doubled = ZoneState {
            temperature: 2.0 * zone.temperature,
            ..zone
        };
        assert_relative_eq!(zone_pressure(&doubled), 2.0 * 101_325.0, epsilon = 1e-6);
    }

    #[test]
    fn open_door_pressures_bit_equal() {
        let config = IeConfig::default();
        let mut zones = two_zones(config.wall_sink_temperature, 101_325.0);
        let inputs = IeInputs {
            fire_heat: 5000.0,
            ..IeInputs::default()
        };
        for _ in 0..100 {
            step_ie(&mut zones, &config, &inputs, 1.0).unwrap();
            let p0 = zone_pressure(&zones[0]);
            let p1 = zone_pressure(&zones[1]);
            // The rebalanced split leaves both zones within one ulp; the
            // published shared pressure is computed once so it is bit-equal.
            assert_relative_eq!(p0, p1, max_relative = 1e-12);
        }
    }

    #[test]
    fn gas_conserved_without_flows() {
        let config = IeConfig::default();
        let mut zones = two_zones(config.wall_sink_temperature, 101_325.0);
        let total0 = zones[0].gas_amount + zones[1].gas_amount;
        let inputs = IeInputs {
            fire_heat: 3000.0,
            ..IeInputs::default()
        };
        for _ in 0..1000 {
            step_ie(&mut zones, &config, &inputs, 1.0).unwrap();
        }
        let total = zones[0].gas_amount + zones[1].gas_amount;
        assert!(((total - total0) / total0).abs() < 1e-12);
    }

    #[test]
    fn energy_bookkeeping_error_halves_with_step() {
        // Adiabatic single zone driven by Q(t) = k t^2 sampled at step
        // starts; the enthalpy sum vs the exact integral is left-rectangle
        // quadrature whose error scales linearly in dt.
        let config = adiabatic();
        let horizon: f64 = 400.0;
        let k = 0.0603; // W/s^2
        let exact = k * horizon.powi(3) / 3.0;
        let run = |dt: f64| -> f64 {
            let mut zones = two_zones(295.0, 101_325.0);
            let c = zones[0].gas_amount * config.heat_capacity;
            let mut t = 0.0;
            while t < horizon - 1e-9 {
                let inputs = IeInputs {
                    fire_heat: k * t * t,
                    ..IeInputs::default()
                };
                let mut cfg = config.clone();
                cfg.fire_zone = 0;
                step_ie(&mut zones, &cfg, &inputs, dt).unwrap();
                t += dt;
            }
            let enthalpy = (zones[0].temperature - 295.0) * c;
            (enthalpy - exact).abs()
        };
        let err_full = run(1.0);
        let err_half = run(0.5);
        let ratio = err_half / err_full;
        assert!(
            (0.4..0.6).contains(&ratio),
            "halving error ratio {ratio} (full {err_full}, half {err_half})"
        );
    }

    #[test]
    fn more_fire_heat_never_cooler() {
        let config = IeConfig::default();
        let mut cool = two_zones(config.wall_sink_temperature, 101_325.0);
        let mut hot = cool;
        for _ in 0..300 {
            step_ie(
                &mut cool,
                &config,
                &IeInputs {
                    fire_heat: 1000.0,
                    ..Default::default()
                },
                1.0,
            )
            .unwrap();
            step_ie(
                &mut hot,
                &config,
                &IeInputs {
                    fire_heat: 1500.0,
                    ..Default::default()
                },
                1.0,
            )
            .unwrap();
            assert!(hot[1].temperature >= cool[1].temperature);
            assert!(hot[0].temperature >= cool[0].temperature);
        }
    }

    #[test]
    fn gas_clamped_at_zero() {
        let mut config = adiabatic();
        config.vent_floor_fraction = 0.0;
        let mut zones = two_zones(295.0, 101_325.0);
        let inputs = IeInputs {
            air_flow: [-1e6, 0.0],
            ..IeInputs::default()
        };
        step_ie(&mut zones, &config, &inputs, 1.0).unwrap();
        assert_eq!(zones[0].gas_amount, 0.0);
    }

    #[test]
    fn noiseless_sensor_is_exact() {
        let mut rng = RngStream::new(5);
        assert_eq!(sample_sensor(296.5, 0.0, &mut rng), 296.5);
    }

    #[test]
    fn sensor_noise_mean_converges() {
        let mut rng = RngStream::new(17);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| sample_sensor(295.0, 0.2, &mut rng))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 295.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn sensor_sequence_deterministic() {
        let mut a = RngStream::new(3);
        let mut b = RngStream::new(3);
        for _ in 0..100 {
            assert_eq!(
                sample_sensor(100.0, 1.0, &mut a).to_bits(),
                sample_sensor(100.0, 1.0, &mut b).to_bits()
            );
        }
    }
}
