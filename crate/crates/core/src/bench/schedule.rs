//! Bits-per-cell schedules keyed by noise level.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const RANGE_TOL: f64 = 1e-9;
pub const MIN_BITS: u64 = 100;
pub const DESK_CAP: u64 = 10_000;

/// One schedule row. `alpha` and `spreading_factor` restrict the row when
/// set; `sigma_min..=sigma_max` is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleRow {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spreading_factor: Option<usize>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub bits: u64,
}

impl ScheduleRow {
    fn matches(&self, sigma: f64, alpha: f64, s_f: usize) -> bool {
        self.alpha.is_none_or(|a| (a - alpha).abs() <= RANGE_TOL)
            && self.spreading_factor.is_none_or(|s| s == s_f)
            && sigma >= self.sigma_min - RANGE_TOL
            && sigma <= self.sigma_max + RANGE_TOL
    }
}

/// Ordered rows; the first matching row wins, so overlapping ranges are fine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BitSchedule {
    pub rows: Vec<ScheduleRow>,
}

fn row(alpha: Option<f64>, s_f: Option<usize>, lo: f64, hi: f64, bits: u64) -> ScheduleRow {
    ScheduleRow { alpha, spreading_factor: s_f, sigma_min: lo, sigma_max: hi, bits }
}

impl BitSchedule {
    /// Example I counts (any alpha and spreading factor).
    pub fn table1() -> Self {
        BitSchedule {
            rows: vec![
                row(None, None, 0.0, 4.0, 20_000_000),
                row(None, None, 5.0, 10.0, 1_000_000),
                row(None, None, 11.0, 15.0, 500_000),
                row(None, None, 16.0, 20.0, 100_000),
            ],
        }
    }

    /// Example II counts per (alpha, s_f).
    pub fn table2() -> Self {
        let (a20, a10) = (Some(20.0), Some(10.0));
        BitSchedule {
            rows: vec![
                row(a20, Some(500), 0.0, 0.15, 10_000_000),
                row(a20, Some(500), 0.2, 0.65, 5_000_000),
                row(a20, Some(500), 0.7, 1.0, 100_000),
                row(a20, Some(1000), 0.0, 0.15, 10_000_000),
                row(a20, Some(1000), 0.2, 0.65, 7_000_000),
                row(a20, Some(1000), 0.7, 1.0, 1_000_000),
                row(a10, Some(1000), 0.0, 0.6, 10_000_000),
                row(a10, Some(1000), 0.65, 1.0, 1_000_000),
                row(a10, Some(1000), 1.0, 1.5, 100_000),
            ],
        }
    }

    /// Single row covering every cell with `bits`.
    pub fn uniform(bits: u64) -> Self {
        BitSchedule { rows: vec![row(None, None, 0.0, f64::INFINITY, bits)] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::Config("bit schedule has no rows".into()));
        }
        for r in &self.rows {
            if r.bits < MIN_BITS {
                return Err(Error::Config(format!("schedule row with {} bits; at least {MIN_BITS} required", r.bits)));
            }
            if !(r.sigma_min <= r.sigma_max) || r.sigma_min < 0.0 {
                return Err(Error::Config(format!("bad sigma range [{}, {}]", r.sigma_min, r.sigma_max)));
            }
        }
        Ok(())
    }

    /// Scheduled count for a cell, before any scale cap.
    pub fn lookup(&self, sigma: f64, alpha: f64, s_f: usize) -> Result<u64> {
        self.rows.iter().find(|r| r.matches(sigma, alpha, s_f)).map(|r| r.bits).ok_or(Error::Unscheduled(sigma))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// Scheduled counts capped at `cap`.
    Desk {
        cap: u64,
    },
    Full,
}

impl Default for Scale {
    fn default() -> Self {
        Scale::Desk { cap: DESK_CAP }
    }
}

/// Bits to send in a cell under `scale`.
pub fn adapt_bits(sigma: f64, alpha: f64, s_f: usize, schedule: &BitSchedule, scale: Scale) -> Result<u64> {
    let n = schedule.lookup(sigma, alpha, s_f)?;
    Ok(match scale {
        Scale::Full => n,
        Scale::Desk { cap } => n.min(cap),
    })
}
