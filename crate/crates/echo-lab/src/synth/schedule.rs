//! Canonical measurement schedules.

use crate::error::{Error, Result};

/// The measurement kinds the toolkit can lay out sampling grids for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    /// Hole depth vs waiting time, zero field.
    ShbDecay,
    /// Hole depth vs waiting time under a magnetic field (seconds scale).
    ShbDecayBField,
    /// Two-pulse echo vs pulse delay.
    TwoPulseEcho,
    /// Stimulated echo vs waiting time, one scan per pulse delay.
    ThreePulseEcho,
    /// Hole shift vs applied electric field.
    StarkSweep,
    /// Hole width vs burn power.
    PowerSweep,
}

impl ScheduleKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "shb-decay" => Ok(ScheduleKind::ShbDecay),
            "shb-decay-bfield" => Ok(ScheduleKind::ShbDecayBField),
            "2ppe" => Ok(ScheduleKind::TwoPulseEcho),
            "3ppe" => Ok(ScheduleKind::ThreePulseEcho),
            "stark-sweep" => Ok(ScheduleKind::StarkSweep),
            "power-sweep" => Ok(ScheduleKind::PowerSweep),
            other => Err(Error::Config(format!("unknown schedule kind `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::ShbDecay => "shb-decay",
            ScheduleKind::ShbDecayBField => "shb-decay-bfield",
            ScheduleKind::TwoPulseEcho => "2ppe",
            ScheduleKind::ThreePulseEcho => "3ppe",
            ScheduleKind::StarkSweep => "stark-sweep",
            ScheduleKind::PowerSweep => "power-sweep",
        }
    }
}

/// An ordered sampling grid in base units, plus the per-scan pulse delays
/// for the stimulated-echo kind.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSchedule {
    pub kind: ScheduleKind,
    /// Waiting times / delays (seconds), fields (V/cm) or powers (watts).
    pub values: Vec<f64>,
    /// Pulse delays (seconds); nonempty only for the three-pulse kind.
    pub delays: Vec<f64>,
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = hi / lo;
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo * ratio.powf(i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

impl ExperimentSchedule {
    pub fn new(kind: ScheduleKind, values: Vec<f64>, delays: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid_param("schedule must be nonempty"));
        }
        for w in values.windows(2) {
            if w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::invalid_param(
                    "schedule values must be strictly increasing",
                ));
            }
        }
        if kind == ScheduleKind::ThreePulseEcho && delays.is_empty() {
            return Err(Error::invalid_param(
                "three-pulse schedule needs at least one delay",
            ));
        }
        Ok(ExperimentSchedule {
            kind,
            values,
            delays,
        })
    }

    /// The canonical grid for each measurement kind:
    /// - `shb-decay`: 40 log-spaced waiting times, 10 µs – 15 ms
    /// - `shb-decay-bfield`: 20 log-spaced waiting times, 100 ms – 6 s
    /// - `2ppe`: delays 100 ns – 1.8 µs in 25 ns steps (69 points)
    /// - `3ppe`: waiting times 1 µs – 400 µs in 5 µs steps per delay
    ///   in {120, 200, 280} ns
    /// - `stark-sweep`: 21 fields, −1000 – +1000 V/cm
    /// - `power-sweep`: 10 log-spaced burn powers, 4 – 400 µW
    pub fn canonical(kind: ScheduleKind) -> Self {
        match kind {
            ScheduleKind::ShbDecay => ExperimentSchedule {
                kind,
                values: log_grid(10e-6, 15e-3, 40),
                delays: Vec::new(),
            },
            ScheduleKind::ShbDecayBField => ExperimentSchedule {
                kind,
                values: log_grid(0.1, 6.0, 20),
                delays: Vec::new(),
            },
            ScheduleKind::TwoPulseEcho => ExperimentSchedule {
                kind,
                values: (0..69).map(|i| 1e-7 + i as f64 * 2.5e-8).collect(),
                delays: Vec::new(),
            },
            ScheduleKind::ThreePulseEcho => Self::three_pulse_with_step(5e-6),
            ScheduleKind::StarkSweep => ExperimentSchedule {
                kind,
                values: (0..21).map(|i| -1000.0 + 100.0 * i as f64).collect(),
                delays: Vec::new(),
            },
            ScheduleKind::PowerSweep => ExperimentSchedule {
                kind,
                values: log_grid(4e-6, 400e-6, 10),
                delays: Vec::new(),
            },
        }
    }

    /// The three-pulse grid with a custom waiting-time increment.
    pub fn three_pulse_with_step(step: f64) -> Self {
        let mut values = Vec::new();
        let mut tw = 1e-6;
        while tw <= 400e-6 + 1e-12 {
            values.push(tw);
            tw = 1e-6 + step * values.len() as f64;
        }
        ExperimentSchedule {
            kind: ScheduleKind::ThreePulseEcho,
            values,
            delays: vec![120e-9, 200e-9, 280e-9],
        }
    }
}
