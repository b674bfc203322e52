//! Power system: constant solar + nuclear generation behind a converter,
//! energy storage with damage-dependent efficiency, and the served/unmet
//! bookkeeping for the habitat loads.

use crate::bus::{InputView, OutputBuffer};
use crate::channels::ChannelMap;
use crate::disturbance::DamageLevel;
use crate::engine::{StepError, Subsystem, SubsystemDescriptor};

/// Storage charge/discharge multiplier per damage level (index = level - 1).
pub const DEFAULT_STORAGE_MULTIPLIERS: [f64; 5] = [1.00, 0.90, 0.75, 0.40, 0.10];
/// Converter efficiency per damage level; level 4 is critical failure.
pub const DEFAULT_CONVERTER_EFFICIENCIES: [f64; 4] = [0.95, 0.90, 0.80, 0.00];

#[derive(Debug, Clone)]
pub struct PowerConfig {
    pub solar_output: f64,
    pub nuclear_output: f64,
    pub capacity: f64,
    pub initial_soc_fraction: f64,
    /// Nominal charge/discharge efficiencies before damage multipliers.
    pub charge_efficiency: f64,
    pub discharge_efficiency: f64,
    /// Constant non-ECLSS load (FDD sensors etc.), W.
    pub baseline_load: f64,
    pub storage_multipliers: [f64; 5],
    pub converter_efficiencies: [f64; 4],
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            solar_output: 3_000.0,
            nuclear_output: 2_000.0,
            capacity: 20.0e6,
            initial_soc_fraction: 0.8,
            charge_efficiency: 0.95,
            discharge_efficiency: 0.95,
            baseline_load: 200.0,
            storage_multipliers: DEFAULT_STORAGE_MULTIPLIERS,
            converter_efficiencies: DEFAULT_CONVERTER_EFFICIENCIES,
        }
    }
}

/// Battery state. Efficiencies already include any damage multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorageState {
    pub state_of_charge: f64,
    pub capacity: f64,
    pub charge_efficiency: f64,
    pub discharge_efficiency: f64,
}

/// Generation-side state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationState {
    pub solar_output: f64,
    pub nuclear_output: f64,
    pub converter_efficiency: f64,
}

/// Outcome of one power step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFlow {
    pub available: f64,
    pub served: f64,
    pub unmet: f64,
}

/// Serve `demand` watts for `dt` seconds from generation plus storage.
/// Surplus charges at the charge efficiency; deficits discharge at the
/// inverse discharge efficiency. State of charge stays in `[0, capacity]`
/// and a step never both charges and discharges.
pub fn step_power(
    gen: &GenerationState,
    demand: f64,
    storage: &mut StorageState,
    dt: f64,
) -> PowerFlow {
    debug_assert!(dt > 0.0 && demand >= 0.0);
    let available = (gen.solar_output + gen.nuclear_output) * gen.converter_efficiency;
    if available >= demand {
        let surplus = available - demand;
        storage.state_of_charge = (storage.state_of_charge
            + surplus * storage.charge_efficiency * dt)
            .min(storage.capacity);
        PowerFlow {
            available,
            served: demand,
            unmet: 0.0,
        }
    } else {
        let deficit = demand - available;
        let needed = deficit * dt / storage.discharge_efficiency;
        if storage.state_of_charge >= needed {
            storage.state_of_charge -= needed;
            PowerFlow {
                available,
                served: demand,
                unmet: 0.0,
            }
        } else {
            let deliverable = storage.state_of_charge * storage.discharge_efficiency / dt;
            storage.state_of_charge = 0.0;
            PowerFlow {
                available,
                served: available + deliverable,
                unmet: deficit - deliverable,
            }
        }
    }
}

/// Damage application: storage levels scale both storage efficiencies by the
/// configured multiplier; converter levels select the converter efficiency
/// directly (level 4 shuts generation down entirely).
pub fn apply_power_damage(
    config: &PowerConfig,
    storage_level: DamageLevel,
    converter_level: DamageLevel,
) -> (f64, f64, f64) {
    let m = config.storage_multipliers[(storage_level.get() - 1) as usize];
    let conv_idx = (converter_level.get().min(4) - 1) as usize;
    (
        config.charge_efficiency * m,
        config.discharge_efficiency * m,
        config.converter_efficiencies[conv_idx],
    )
}

/// Engine adapter for generation plus storage.
pub struct PowerSystem {
    desc: SubsystemDescriptor,
    ch: ChannelMap,
    config: PowerConfig,
    storage: StorageState,
    dt: f64,
}

impl PowerSystem {
    pub fn new(ch: ChannelMap, period: f64, config: PowerConfig) -> Self {
        let desc = SubsystemDescriptor {
            id: "power".into(),
            step_period: period,
            input_channels: vec![
                ch.eclss_power_demand,
                ch.fire_intensity,
                ch.damage_storage,
                ch.damage_converter,
            ],
            output_channels: vec![ch.power_status],
        };
        let storage = StorageState {
            state_of_charge: config.capacity * config.initial_soc_fraction,
            capacity: config.capacity,
            charge_efficiency: config.charge_efficiency,
            discharge_efficiency: config.discharge_efficiency,
        };
        Self {
            desc,
            ch,
            config,
            storage,
            dt: period,
        }
    }

    pub fn storage(&self) -> &StorageState {
        &self.storage
    }
}

impl Subsystem for PowerSystem {
    fn descriptor(&self) -> &SubsystemDescriptor {
        &self.desc
    }

    fn step(&mut self, inputs: &InputView<'_>, out: &mut OutputBuffer) -> Result<(), StepError> {
        let level = |ch| {
            let raw = inputs.scalar(ch) as u8;
            DamageLevel::new(raw.clamp(1, 5)).expect("clamped level")
        };
        let (charge_eff, discharge_eff, converter_eff) = apply_power_damage(
            &self.config,
            level(self.ch.damage_storage),
            level(self.ch.damage_converter),
        );
        self.storage.charge_efficiency = charge_eff;
        self.storage.discharge_efficiency = discharge_eff;

        let demand = inputs.scalar(self.ch.eclss_power_demand) + self.config.baseline_load;
        let gen = GenerationState {
            solar_output: self.config.solar_output,
            nuclear_output: self.config.nuclear_output,
            converter_efficiency: converter_eff,
        };
        let flow = step_power(&gen, demand, &mut self.storage, self.dt);
        out.stage(
            self.ch.power_status,
            &[
                self.storage.state_of_charge,
                flow.available,
                demand,
                flow.served,
                flow.unmet,
                self.storage.charge_efficiency,
                converter_eff,
            ],
        )?;
        Ok(())
    }
}
