//! Property tests over the subsystem state machines.

use habsim_core::disturbance::{fire_heat_output, step_fire, FirePhase, FireState, IntensityLevel};
use habsim_core::eclss::{thermal_control, EclssConfig, EclssState};
use habsim_core::environment::{step_ie, IeConfig, IeInputs, ZoneState};
use habsim_core::power::{step_power, GenerationState, StorageState};
use proptest::prelude::*;

proptest! {
    // Radius never decreases while burning and never increases once the
    // suppression rate is at least the spread rate.
    #[test]
    fn fire_radius_monotone(
        spread in 0.0f64..5e-3,
        extra_suppression in 0.0f64..5e-3,
        steps in prop::collection::vec(0.1f64..10.0, 1..60),
    ) {
        let mut burning = FireState::pending((0.0, 0.0), spread, IntensityLevel::new(3).unwrap(), 0.0);
        burning.phase = FirePhase::Burning;
        let mut last = burning.radius;
        for &dt in &steps {
            step_fire(&mut burning, 0.0, dt, 0.0);
            prop_assert!(burning.radius >= last);
            last = burning.radius;
        }
        let mut doused = burning.clone();
        let mut last = doused.radius;
        for &dt in &steps {
            step_fire(&mut doused, 0.0, dt, spread + extra_suppression);
            prop_assert!(doused.radius <= last);
            prop_assert!(doused.radius >= 0.0);
            last = doused.radius;
        }
    }

    // Heat output is continuous in radius and zero exactly at radius zero or
    // intensity one.
    #[test]
    fn heat_output_continuous_and_gated(radius in 0.0f64..2.0, delta in 1e-9f64..1e-6) {
        let level3 = IntensityLevel::new(3).unwrap();
        let q0 = fire_heat_output(level3, radius);
        let q1 = fire_heat_output(level3, radius + delta);
        prop_assert!((q1 - q0).abs() < 60e3 * 2.0 * std::f64::consts::PI * (2.0 * radius + 1.0) * delta * 2.0);
        prop_assert_eq!(fire_heat_output(level3, 0.0), 0.0);
        prop_assert_eq!(fire_heat_output(IntensityLevel::new(1).unwrap(), radius), 0.0);
        prop_assert_eq!(q0 == 0.0, radius == 0.0);
    }

    // A monotone signal crosses each latch threshold at most once in each
    // direction, so every actuator boolean changes at most twice (once to
    // align with the starting regime, once per crossing) and never chatters.
    #[test]
    fn hysteresis_no_chatter_on_monotone_signals(
        mut samples in prop::collection::vec(288.0f64..305.0, 2..80),
        rising in any::<bool>(),
    ) {
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if !rising {
            samples.reverse();
        }
        let config = EclssConfig::default();
        let mut state = EclssState::default();
        let mut cooling_flips = 0;
        let mut heater_flips = 0;
        let mut last = (state.cooling_on[0], state.heater_on[0]);
        for &t in &samples {
            thermal_control([t, t], &mut state, &config);
            prop_assert!(!(state.cooling_on[0] && state.heater_on[0]));
            if state.cooling_on[0] != last.0 {
                cooling_flips += 1;
            }
            if state.heater_on[0] != last.1 {
                heater_flips += 1;
            }
            last = (state.cooling_on[0], state.heater_on[0]);
        }
        prop_assert!(cooling_flips <= 2, "cooling toggled {} times", cooling_flips);
        prop_assert!(heater_flips <= 2, "heater toggled {} times", heater_flips);
        // A signal that starts inside the deadband toggles at most once.
        if (config.t_low + config.t_hysteresis..config.t_high - config.t_hysteresis)
            .contains(&samples[0])
        {
            prop_assert!(cooling_flips <= 1);
            prop_assert!(heater_flips <= 1);
        }
    }

    // State of charge stays within bounds and no step both charges and
    // discharges.
    #[test]
    fn soc_bounds_and_exclusive_flow(
        capacity in 1e3f64..1e6,
        start_frac in 0.0f64..1.0,
        loads in prop::collection::vec((0.0f64..5e3, 0.0f64..5e3), 1..100),
    ) {
        let mut storage = StorageState {
            state_of_charge: capacity * start_frac,
            capacity,
            charge_efficiency: 0.9,
            discharge_efficiency: 0.85,
        };
        for &(generation, demand) in &loads {
            let before = storage.state_of_charge;
            let gen = GenerationState {
                solar_output: generation,
                nuclear_output: 0.0,
                converter_efficiency: 1.0,
            };
            let flow = step_power(&gen, demand, &mut storage, 1.0);
            prop_assert!(storage.state_of_charge >= 0.0);
            prop_assert!(storage.state_of_charge <= capacity);
            let charged = storage.state_of_charge > before;
            let discharged = storage.state_of_charge < before;
            prop_assert!(!(charged && discharged));
            if charged {
                prop_assert!(generation >= demand);
            }
            if discharged {
                prop_assert!(demand > generation);
            }
            prop_assert!(flow.unmet >= 0.0);
            prop_assert!(flow.served + flow.unmet - demand < 1e-9);
        }
    }

    // Total gas inventory is conserved by heating and door rebalancing.
    #[test]
    fn gas_conservation_under_heating(
        heats in prop::collection::vec(0.0f64..5e4, 1..120),
        door_open in any::<bool>(),
    ) {
        let config = IeConfig {
            pocket_door_open: door_open,
            ..IeConfig::default()
        };
        let mut zones = [
            ZoneState::from_pressure(299.9, 101_325.0, 4.0),
            ZoneState::from_pressure(299.9, 101_325.0, 4.0),
        ];
        let total0 = zones[0].gas_amount + zones[1].gas_amount;
        for &q in &heats {
            let inputs = IeInputs { fire_heat: q, ..IeInputs::default() };
            step_ie(&mut zones, &config, &inputs, 1.0).unwrap();
            let total = zones[0].gas_amount + zones[1].gas_amount;
            prop_assert!(((total - total0) / total0).abs() < 1e-12);
        }
    }
}
