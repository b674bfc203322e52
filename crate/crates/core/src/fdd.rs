//! Synthetic fault detection and the repair scheduler/agent.
//!
//! Detection runs in one of two modes. `Threshold` flips the health bit
//! after a configured number of consecutive out-of-band sensor samples and
//! clears it after the same number back in band. `SampledLatency` flips the
//! bit a fixed latency after the fire radius first reaches a detectable
//! size, which reproduces detection delays that thresholding alone cannot
//! explain; the bit clears once the fire is out and the sensors are back in
//! band. The repair scheduler dispatches a single agent on a 0 -> 1 health
//! transition, subject to an availability delay, and the agent suppresses
//! the fire until it is extinguished.

use serde::{Deserialize, Serialize};

use crate::bus::{InputView, OutputBuffer};
use crate::channels::ChannelMap;
use crate::engine::{StepError, Subsystem, SubsystemDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FddMode {
    Threshold,
    SampledLatency,
}

#[derive(Debug, Clone)]
pub struct FddConfig {
    pub mode: FddMode,
    /// Safe band on zone temperatures, K.
    pub temperature_band: (f64, f64),
    /// Safe band on habitat pressure, Pa.
    pub pressure_band: (f64, f64),
    /// Consecutive out-of-band samples before the health bit flips.
    pub persistence: u32,
    /// Sampled-latency mode: delay after the fire becomes detectable, s.
    pub latency: f64,
    /// Sampled-latency mode: radius at which the fire becomes detectable, m.
    pub detectable_radius: f64,
}

impl Default for FddConfig {
    fn default() -> Self {
        Self {
            mode: FddMode::SampledLatency,
            temperature_band: (291.0, 300.0),
            pressure_band: (96_000.0, 106_000.0),
            persistence: 5,
            latency: 500.0,
            detectable_radius: 0.020,
        }
    }
}

/// Detection state machine producing the binary interior-environment health
/// bit. Pure; stepped with the fused sensor and fire views.
#[derive(Debug, Clone)]
pub struct FddState {
    config: FddConfig,
    health: u8,
    out_of_band_run: u32,
    in_band_run: u32,
    /// First time the fire radius reached the detectable size.
    detectable_since: Option<f64>,
    seen_fire: bool,
}

impl FddState {
    pub fn new(config: FddConfig) -> Self {
        Self {
            config,
            health: 0,
            out_of_band_run: 0,
            in_band_run: 0,
            detectable_since: None,
            seen_fire: false,
        }
    }

    pub fn health(&self) -> u8 {
        self.health
    }

    fn in_band(&self, temperatures: [f64; 2], pressure: f64) -> bool {
        let (t_lo, t_hi) = self.config.temperature_band;
        let (p_lo, p_hi) = self.config.pressure_band;
        temperatures.iter().all(|t| (t_lo..=t_hi).contains(t)) && (p_lo..=p_hi).contains(&pressure)
    }

    /// Evaluate one sample set and return the updated health bit.
    pub fn evaluate(
        &mut self,
        now: f64,
        temperatures: [f64; 2],
        pressure: f64,
        fire_radius: f64,
    ) -> u8 {
        if fire_radius > 0.0 {
            self.seen_fire = true;
        }
        let fire_out = self.seen_fire && fire_radius == 0.0;
        let in_band = self.in_band(temperatures, pressure);
        match self.config.mode {
            FddMode::Threshold => {
                if in_band {
                    self.in_band_run += 1;
                    self.out_of_band_run = 0;
                } else {
                    self.out_of_band_run += 1;
                    self.in_band_run = 0;
                }
                if self.health == 0 && self.out_of_band_run >= self.config.persistence {
                    self.health = 1;
                } else if self.health == 1 && self.in_band_run >= self.config.persistence {
                    self.health = 0;
                }
            }
            FddMode::SampledLatency => {
                if self.detectable_since.is_none() && fire_radius >= self.config.detectable_radius {
                    self.detectable_since = Some(now);
                }
                if self.health == 0 {
                    if let Some(t0) = self.detectable_since {
                        if now >= t0 + self.config.latency {
                            self.health = 1;
                        }
                    }
                } else if fire_out && in_band {
                    self.health = 0;
                    self.detectable_since = None;
                    self.seen_fire = false;
                }
            }
        }
        self.health
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentStatus {
    Idle,
    /// Dispatched but still within the availability delay.
    Traveling,
    Repairing,
}

impl AgentStatus {
    pub fn code(self) -> u8 {
        match self {
            AgentStatus::Idle => 0,
            AgentStatus::Traveling => 1,
            AgentStatus::Repairing => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RepairConfig {
    /// Fire suppression rate the agent applies, m/s.
    pub suppression_rate: f64,
    /// Delay between dispatch and the repair becoming effective, s.
    pub availability_delay: f64,
}

impl Default for RepairConfig {
    fn default() -> Self {
        Self {
            suppression_rate: 1.0e-3,
            availability_delay: 50.0,
        }
    }
}

/// Single-agent repair scheduler. Dispatches on a 0 -> 1 health transition
/// and keeps suppressing until the fire is extinguished and health clears;
/// faults arriving while busy queue until the agent is idle again.
#[derive(Debug, Clone)]
pub struct RepairScheduler {
    config: RepairConfig,
    status: AgentStatus,
    effective_at: f64,
    last_health: u8,
    queued: u32,
}

impl RepairScheduler {
    pub fn new(config: RepairConfig) -> Self {
        Self {
            config,
            status: AgentStatus::Idle,
            effective_at: 0.0,
            last_health: 0,
            queued: 0,
        }
    }

    pub fn status(&self) -> AgentStatus {
        self.status
    }

    pub fn queued(&self) -> u32 {
        self.queued
    }

    /// Advance one step. Returns the suppression rate currently applied.
    pub fn step(&mut self, now: f64, health: u8, fire_radius: f64) -> f64 {
        let rising = self.last_health == 0 && health == 1;
        self.last_health = health;
        if rising {
            if self.status == AgentStatus::Idle {
                self.status = AgentStatus::Traveling;
                self.effective_at = now + self.config.availability_delay;
            } else {
                self.queued += 1;
            }
        }
        if self.status == AgentStatus::Traveling && now >= self.effective_at {
            self.status = AgentStatus::Repairing;
        }
        let fire_out = fire_radius == 0.0;
        if self.status == AgentStatus::Repairing && fire_out && health == 0 {
            // Repair complete: the scheduler reverts to nominal and serves
            // any fault queued while busy.
            self.status = AgentStatus::Idle;
            if self.queued > 0 {
                self.queued -= 1;
                self.status = AgentStatus::Traveling;
                self.effective_at = now + self.config.availability_delay;
            }
        }
        if self.status == AgentStatus::Repairing && !fire_out {
            self.config.suppression_rate
        } else {
            0.0
        }
    }
}

/// Engine adapter for the FDD block.
pub struct FddSystem {
    desc: SubsystemDescriptor,
    ch: ChannelMap,
    state: FddState,
}

impl FddSystem {
    pub fn new(ch: ChannelMap, period: f64, config: FddConfig) -> Self {
        let desc = SubsystemDescriptor {
            id: "fdd".into(),
            step_period: period,
            input_channels: vec![
                ch.ie_sensor_temperature,
                ch.ie_sensor_pressure,
                ch.fire_physical,
            ],
            output_channels: vec![ch.health_ie],
        };
        Self {
            desc,
            ch,
            state: FddState::new(config),
        }
    }
}

impl Subsystem for FddSystem {
    fn descriptor(&self) -> &SubsystemDescriptor {
        &self.desc
    }

    fn step(&mut self, inputs: &InputView<'_>, out: &mut OutputBuffer) -> Result<(), StepError> {
        let t = inputs.get(self.ch.ie_sensor_temperature);
        let p = inputs.get(self.ch.ie_sensor_pressure);
        let radius = inputs.get(self.ch.fire_physical)[0];
        let health = self
            .state
            .evaluate(inputs.now, [t[0], t[1]], 0.5 * (p[0] + p[1]), radius);
        out.stage(self.ch.health_ie, &[health as f64])?;
        Ok(())
    }
}

/// Engine adapter for the repair scheduler.
pub struct RepairSystem {
    desc: SubsystemDescriptor,
    ch: ChannelMap,
    scheduler: RepairScheduler,
}

impl RepairSystem {
    pub fn new(ch: ChannelMap, period: f64, config: RepairConfig) -> Self {
        let desc = SubsystemDescriptor {
            id: "repair".into(),
            step_period: period,
            input_channels: vec![ch.health_ie, ch.fire_physical],
            output_channels: vec![ch.repair_suppression, ch.repair_agent],
        };
        Self {
            desc,
            ch,
            scheduler: RepairScheduler::new(config),
        }
    }
}

impl Subsystem for RepairSystem {
    fn descriptor(&self) -> &SubsystemDescriptor {
        &self.desc
    }

    fn step(&mut self, inputs: &InputView<'_>, out: &mut OutputBuffer) -> Result<(), StepError> {
        let health = inputs.scalar(self.ch.health_ie) as u8;
        let radius = inputs.get(self.ch.fire_physical)[0];
        let rate = self.scheduler.step(inputs.now, health, radius);
        out.stage(self.ch.repair_suppression, &[rate])?;
        out.stage(
            self.ch.repair_agent,
            &[self.scheduler.status().code() as f64],
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn threshold_config(persistence: u32) -> FddConfig {
        FddConfig {
            mode: FddMode::Threshold,
            persistence,
            ..FddConfig::default()
        }
    }

    #[test]
    fn all_in_band_stays_healthy() {
        let mut fdd = FddState::new(threshold_config(5));
        for k in 0..100 {
            let h = fdd.evaluate(k as f64, [295.0, 296.0], 101_000.0, 0.0);
            assert_eq!(h, 0);
        }
    }

    #[test]
    fn persistence_counts_consecutive_samples() {
        let mut fdd = FddState::new(threshold_config(5));
        for k in 0..4 {
            assert_eq!(fdd.evaluate(k as f64, [295.0, 305.0], 101_000.0, 0.0), 0);
        }
        // Health flips on the 5th consecutive out-of-band sample.
        assert_eq!(fdd.evaluate(4.0, [295.0, 305.0], 101_000.0, 0.0), 1);
        // And clears after 5 consecutive in-band samples.
        for k in 0..4 {
            assert_eq!(
                fdd.evaluate(5.0 + k as f64, [295.0, 296.0], 101_000.0, 0.0),
                1
            );
        }
        assert_eq!(fdd.evaluate(9.0, [295.0, 296.0], 101_000.0, 0.0), 0);
    }

    #[test]
    fn short_spike_suppressed() {
        let mut fdd = FddState::new(threshold_config(5));
        for k in 0..3 {
            fdd.evaluate(k as f64, [295.0, 310.0], 101_000.0, 0.0);
        }
        let h = fdd.evaluate(3.0, [295.0, 296.0], 101_000.0, 0.0);
        assert_eq!(h, 0);
        assert_eq!(fdd.health(), 0);
    }

    #[test]
    fn sampled_latency_detection_time() {
        let config = FddConfig {
            mode: FddMode::SampledLatency,
            latency: 470.0,
            detectable_radius: 0.020,
            ..FddConfig::default()
        };
        let mut fdd = FddState::new(config);
        // Radius grows at 0.23 mm/s from t = 0; first sample >= 20 mm is at
        // t = ceil(20/0.23) = 87, so detection lands at 87 + 470 = 557.
        let mut detected_at = None;
        for k in 0..700 {
            let t = k as f64;
            let radius = 0.23e-3 * t;
            let h = fdd.evaluate(t, [295.0, 305.0], 101_000.0, radius);
            if h == 1 {
                detected_at = Some(t);
                break;
            }
        }
        assert_eq!(detected_at, Some(557.0));
    }

    #[test]
    fn sampled_latency_resets_after_extinguish() {
        let config = FddConfig {
            mode: FddMode::SampledLatency,
            latency: 10.0,
            ..FddConfig::default()
        };
        let mut fdd = FddState::new(config);
        for k in 0..40 {
            fdd.evaluate(k as f64, [295.0, 305.0], 101_000.0, 0.05);
        }
        assert_eq!(fdd.health(), 1);
        // Fire out but temperatures still hot: health holds.
        fdd.evaluate(40.0, [295.0, 305.0], 101_000.0, 0.0);
        assert_eq!(fdd.health(), 1);
        // Back in band with the fire out: health clears.
        fdd.evaluate(41.0, [295.0, 296.0], 101_000.0, 0.0);
        assert_eq!(fdd.health(), 0);
    }

    #[test]
    fn repair_dispatch_honors_availability_delay() {
        let mut agent = RepairScheduler::new(RepairConfig {
            suppression_rate: 1.0e-3,
            availability_delay: 50.0,
        });
        // Fault detected at t = 850.
        assert_eq!(agent.step(850.0, 1, 0.1), 0.0);
        assert_eq!(agent.status(), AgentStatus::Traveling);
        for t in 851..900 {
            assert_eq!(agent.step(t as f64, 1, 0.1), 0.0);
        }
        // Suppression effective exactly at 850 + 50.
        assert_eq!(agent.step(900.0, 1, 0.1), 1.0e-3);
        assert_eq!(agent.status(), AgentStatus::Repairing);
    }

    #[test]
    fn healthy_system_never_dispatches() {
        let mut agent = RepairScheduler::new(RepairConfig::default());
        for t in 0..100 {
            assert_eq!(agent.step(t as f64, 0, 0.0), 0.0);
            assert_eq!(agent.status(), AgentStatus::Idle);
        }
    }

    #[test]
    fn agent_returns_to_idle_after_repair() {
        let mut agent = RepairScheduler::new(RepairConfig {
            suppression_rate: 1.0e-3,
            availability_delay: 0.0,
        });
        agent.step(10.0, 1, 0.1);
        assert_eq!(agent.step(11.0, 1, 0.1), 1.0e-3);
        // Fire extinguished, health cleared: agent idles and stops emitting.
        assert_eq!(agent.step(12.0, 0, 0.0), 0.0);
        assert_eq!(agent.status(), AgentStatus::Idle);
    }

    #[test]
    fn second_fault_queues_while_busy() {
        let mut agent = RepairScheduler::new(RepairConfig {
            suppression_rate: 1.0e-3,
            availability_delay: 5.0,
        });
        agent.step(0.0, 1, 0.1); // dispatch
        agent.step(1.0, 0, 0.1); // health drops (sensor quirk), agent stays busy
        agent.step(2.0, 1, 0.1); // second rising edge while busy -> queue
        assert_eq!(agent.queued(), 1);
        for t in 3..8 {
            agent.step(t as f64, 1, 0.1);
        }
        assert_eq!(agent.status(), AgentStatus::Repairing);
        // First repair completes; queued fault dispatches immediately.
        agent.step(8.0, 0, 0.0);
        assert_eq!(agent.queued(), 0);
        assert_eq!(agent.status(), AgentStatus::Traveling);
    }

    #[test]
    fn health_stays_binary() {
        let mut fdd = FddState::new(threshold_config(3));
        for k in 0..1000 {
            let t2 = if k % 7 < 3 { 305.0 } else { 295.0 };
            let h = fdd.evaluate(k as f64, [295.0, t2], 101_000.0, 0.0);
            assert!(h == 0 || h == 1);
        }
    }
}
