use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::system::{random_state, NetSystem};
use crate::dynsys::{check_bound, rk4_step, Rk4Work, DEFAULT_DIVERGENCE_BOUND};
use crate::rng::{derive_seed, rng_from_seed};
use crate::{par, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub dt: f64,
    pub transient: f64,
    pub window: f64,
    /// Steps between error evaluations inside the window.
    pub measure_every: usize,
    pub seed: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { dt: 1e-3, transient: 50.0, window: 50.0, measure_every: 10, seed: 0 }
    }
}

/// Time-averaged pairwise errors at one grid value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub value: f64,
    /// Mean `||x_i - x_j||` over all nodes including control nodes; `None`
    /// when the run diverged.
    pub mean_error: Option<DMatrix<f64>>,
    pub failure: Option<String>,
}

/// Runs `family(value)` from a seeded random start for every grid value and
/// averages the pairwise errors over the window after the transient.
/// Divergence at one grid value is recorded and the scan continues.
pub fn spatiotemporal_scan<F>(family: F, grid: &[f64], opts: &ScanOptions) -> Result<Vec<ScanPoint>>
where
    F: Fn(f64) -> Result<NetSystem> + Sync,
{
    if grid.is_empty() {
        return Err(crate::Error::invalid("empty scan grid"));
    }
    if !(opts.dt > 0.0) || opts.measure_every == 0 || !(opts.window > 0.0) {
        return Err(crate::Error::invalid("dt, window and measure_every must be positive"));
    }
    let jobs: Vec<(usize, f64)> = grid.iter().copied().enumerate().collect();
    Ok(par::map(jobs, |(idx, value)| match scan_point(&family, value, opts, idx) {
        Ok(m) => ScanPoint { value, mean_error: Some(m), failure: None },
        Err(e) => ScanPoint { value, mean_error: None, failure: Some(e.to_string()) },
    }))
}

fn scan_point<F>(family: &F, value: f64, opts: &ScanOptions, idx: usize) -> Result<DMatrix<f64>>
where
    F: Fn(f64) -> Result<NetSystem>,
{
    let sys = family(value)?;
    let mut rng = rng_from_seed(derive_seed(opts.seed, &[idx as u64]));
    let mut x = random_state(sys.n(), sys.l(), &mut rng).flat();
    let total = sys.n() + sys.l();
    let mut w = Rk4Work::new(x.len());
    let mut f = |x: &[f64], d: &mut [f64]| sys.rhs(x, d);
    let n_tr = (opts.transient / opts.dt).round() as usize;
    let n_win = (opts.window / opts.dt).round() as usize;
    for step in 1..=n_tr {
        rk4_step(&mut f, &mut x, opts.dt, &mut w);
        if step % 1000 == 0 {
            check_bound(&x, DEFAULT_DIVERGENCE_BOUND, step)?;
        }
    }
    let mut acc = DMatrix::zeros(total, total);
    let mut count = 0usize;
    for step in 1..=n_win {
        rk4_step(&mut f, &mut x, opts.dt, &mut w);
        if step % opts.measure_every == 0 {
            check_bound(&x, DEFAULT_DIVERGENCE_BOUND, n_tr + step)?;
            for i in 0..total {
                for j in i + 1..total {
                    let e = ((x[3 * i] - x[3 * j]).powi(2)
                        + (x[3 * i + 1] - x[3 * j + 1]).powi(2)
                        + (x[3 * i + 2] - x[3 * j + 2]).powi(2))
                    .sqrt();
                    acc[(i, j)] += e;
                }
            }
            count += 1;
        }
    }
    let mut m = acc / count.max(1) as f64;
    for i in 0..total {
        for j in i + 1..total {
            m[(j, i)] = m[(i, j)];
        }
    }
    Ok(m)
}
