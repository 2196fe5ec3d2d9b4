//! Monte Carlo BER sweeps over (sigma, epsilon, alpha, s_f) grids.

use std::collections::HashSet;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::record::{BerRecord, CellKey, Scheme};
use super::schedule::{adapt_bits, BitSchedule, Scale};
use crate::baselines::{simulate_baseline, Baseline};
use crate::modem::{TransmitSettings, Transmitter};
use crate::netsim::{PinNoise, SdeScheme};
use crate::rng::{derive_seed, rng_from_seed};
use crate::topology::Design;
use crate::{Error, Result};

/// Named or explicit bit schedule in a sweep file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleChoice {
    Named(String),
    Rows(BitSchedule),
}

impl ScheduleChoice {
    pub fn resolve(&self) -> Result<BitSchedule> {
        match self {
            ScheduleChoice::Named(n) => match n.as_str() {
                "table1" => Ok(BitSchedule::table1()),
                "table2" => Ok(BitSchedule::table2()),
                _ => Err(Error::Config(format!("unknown schedule '{n}' (table1, table2)"))),
            },
            ScheduleChoice::Rows(s) => Ok(s.clone()),
        }
    }
}

/// CSK/DCSK reference cells over an Eb/N0 grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSpec {
    pub ebn0_db: Vec<f64>,
    pub spreading_factor: usize,
    pub bits: u64,
    #[serde(default = "default_baseline_dt")]
    pub dt: f64,
}

fn default_baseline_dt() -> f64 {
    1e-3
}

/// Serialized sweep parameters. Missing epsilon/alpha/s_f grids fall back
/// to the single value in the design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub sigma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spreading_factor: Option<Vec<usize>>,
    pub schedule: ScheduleChoice,
    #[serde(default)]
    pub scale: Scale,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub sde: SdeScheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baselines: Option<BaselineSpec>,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub design: Design,
    pub sigmas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub alphas: Vec<f64>,
    pub spreading_factors: Vec<usize>,
    pub schedule: BitSchedule,
    pub scale: Scale,
    pub seed: u64,
    pub sde: SdeScheme,
    pub pin_noise: PinNoise,
    pub baselines: Option<BaselineSpec>,
}

impl SweepConfig {
    pub fn from_spec(design: Design, spec: &SweepSpec) -> Result<Self> {
        Ok(SweepConfig {
            sigmas: spec.sigma.clone(),
            epsilons: spec.epsilon.clone().unwrap_or_else(|| vec![design.epsilon]),
            alphas: spec.alpha.clone().unwrap_or_else(|| vec![design.alpha]),
            spreading_factors: spec
                .spreading_factor
                .clone()
                .unwrap_or_else(|| vec![design.simulation.spreading_factor]),
            schedule: spec.schedule.resolve()?,
            scale: spec.scale,
            seed: spec.seed,
            sde: spec.sde,
            pin_noise: PinNoise::default(),
            baselines: spec.baselines.clone(),
            design,
        })
    }

    /// Example I at desk scale: `table1` counts capped at 10^4 bits.
    pub fn desk_example1(design: Design, sigmas: Vec<f64>) -> Self {
        SweepConfig {
            sigmas,
            epsilons: vec![design.epsilon],
            alphas: vec![design.alpha],
            spreading_factors: vec![design.simulation.spreading_factor],
            schedule: BitSchedule::table1(),
            scale: Scale::default(),
            seed: 1,
            sde: SdeScheme::default(),
            pin_noise: PinNoise::default(),
            baselines: None,
            design,
        }
    }

    fn validate(&self) -> Result<()> {
        let grids = [
            ("sigma", self.sigmas.len()),
            ("epsilon", self.epsilons.len()),
            ("alpha", self.alphas.len()),
            ("spreading_factor", self.spreading_factors.len()),
        ];
        if let Some((name, _)) = grids.iter().find(|(_, n)| *n == 0) {
            return Err(Error::Config(format!("empty {name} grid")));
        }
        if self.sigmas.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::Config("sigma values must be finite and non-negative".into()));
        }
        if self.spreading_factors.contains(&0) {
            return Err(Error::Config("spreading factor must be positive".into()));
        }
        if let Scale::Desk { cap } = self.scale {
            if cap < super::schedule::MIN_BITS {
                return Err(Error::Config(format!("desk cap {cap} below {}", super::schedule::MIN_BITS)));
            }
        }
        self.schedule.validate()?;
        if let Some(b) = &self.baselines {
            if b.ebn0_db.is_empty() || b.bits < super::schedule::MIN_BITS || b.spreading_factor == 0 {
                return Err(Error::Config("baseline grid needs Eb/N0 values, s_f > 0 and at least 100 bits".into()));
            }
        }
        Ok(())
    }

    /// Every cell of the grid (CLSK first, then baselines) with its bit
    /// count and seed. Seeds hash the cell coordinates, so a resumed or
    /// reordered grid reproduces the same cells.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        self.validate()?;
        let mut cells = Vec::new();
        for &s_f in &self.spreading_factors {
            for &alpha in &self.alphas {
                for &epsilon in &self.epsilons {
                    for &sigma in &self.sigmas {
                        let key = CellKey {
                            scheme: Scheme::Clsk,
                            sigma,
                            epsilon: Some(epsilon),
                            alpha: Some(alpha),
                            spreading_factor: s_f,
                        };
                        let bits = adapt_bits(sigma, alpha, s_f, &self.schedule, self.scale)?;
                        cells.push(Cell { key, bits, seed: cell_seed(self.seed, &key) });
                    }
                }
            }
        }
        if let Some(b) = &self.baselines {
            for scheme in [Scheme::Csk, Scheme::Dcsk] {
                for &db in &b.ebn0_db {
                    let key =
                        CellKey { scheme, sigma: db, epsilon: None, alpha: None, spreading_factor: b.spreading_factor };
                    cells.push(Cell { key, bits: b.bits, seed: cell_seed(self.seed, &key) });
                }
            }
        }
        let mut seen = HashSet::new();
        for c in &cells {
            if !seen.insert(c.seed) {
                return Err(Error::SeedReuse(c.seed));
            }
        }
        Ok(cells)
    }
}

fn cell_seed(base: u64, k: &CellKey) -> u64 {
    let opt = |v: Option<f64>| v.map_or(u64::MAX, f64::to_bits);
    derive_seed(base, &[k.scheme.id(), k.sigma.to_bits(), opt(k.epsilon), opt(k.alpha), k.spreading_factor as u64])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub key: CellKey,
    pub bits: u64,
    pub seed: u64,
}

/// A cell that could not be completed; the sweep carries on without it.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub cell: Cell,
    pub error: String,
}

pub type CellOutcome = std::result::Result<BerRecord, CellFailure>;

/// Cells of `cells` not already present in `done` (matched by scheme and seed).
pub fn pending_cells(cells: &[Cell], done: &[BerRecord]) -> Vec<Cell> {
    let have: HashSet<(Scheme, u64)> = done.iter().map(|r| (r.scheme, r.seed)).collect();
    cells.iter().filter(|c| !have.contains(&(c.key.scheme, c.seed))).copied().collect()
}

/// Runs every cell of the grid.
pub fn ber_sweep(cfg: &SweepConfig) -> Result<Vec<CellOutcome>> {
    let cells = cfg.cells()?;
    Ok(run_cells(cfg, &cells))
}

/// Runs `cells` in parallel; output order follows input order.
pub fn run_cells(cfg: &SweepConfig, cells: &[Cell]) -> Vec<CellOutcome> {
    crate::par::map(cells.to_vec(), |cell| run_cell(cfg, &cell).map_err(|e| CellFailure { cell, error: e.to_string() }))
}

pub fn run_cell(cfg: &SweepConfig, cell: &Cell) -> Result<BerRecord> {
    let start = Instant::now();
    let errors = match cell.key.scheme {
        Scheme::Clsk => clsk_errors(cfg, cell)?,
        Scheme::Csk | Scheme::Dcsk => {
            let b = cfg.baselines.as_ref().ok_or_else(|| Error::invalid("baseline cell without baseline grid"))?;
            let scheme = if cell.key.scheme == Scheme::Csk { Baseline::Csk } else { Baseline::Dcsk };
            simulate_baseline(scheme, cell.bits as usize, cell.key.sigma, cell.key.spreading_factor, b.dt, cell.seed)?
        }
    };
    BerRecord::from_counts(cell.key, cell.bits, errors, cell.seed, start.elapsed().as_secs_f64())
}

/// Random equiprobable bits after one discarded preamble symbol, which
/// absorbs the transient from the random initial state.
fn clsk_errors(cfg: &SweepConfig, cell: &Cell) -> Result<u64> {
    let k = &cell.key;
    let mut design = cfg.design.clone().with_epsilon(k.epsilon.unwrap_or(cfg.design.epsilon));
    design = design.with_alpha(k.alpha.unwrap_or(cfg.design.alpha));
    design.simulation.spreading_factor = k.spreading_factor;
    let settings = TransmitSettings {
        sigma: k.sigma,
        seed: cell.seed,
        scheme: cfg.sde,
        pin_noise: cfg.pin_noise,
        ..Default::default()
    };
    let mut tx = Transmitter::new(&design, &settings)?;
    let mut bit_rng = rng_from_seed(derive_seed(cell.seed, &[2]));
    let preamble: u8 = bit_rng.random_range(0..2);
    tx.send_and_detect(tx.map.symbol(preamble)?)?;
    let mut errors = 0;
    for _ in 0..cell.bits {
        let bit: u8 = bit_rng.random_range(0..2);
        let frame = tx.send_and_detect(tx.map.symbol(bit)?)?;
        if design.symbols[frame.symbol].bit != bit {
            errors += 1;
        }
    }
    Ok(errors)
}
