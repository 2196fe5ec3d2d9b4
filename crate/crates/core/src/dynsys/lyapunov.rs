use nalgebra::Matrix3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::NodeModel;
use super::ode::{check_bound, rk4_step, Rk4Work, DEFAULT_DIVERGENCE_BOUND};
use crate::rng::{derive_seed, rng_from_seed};
use crate::{par, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovOptions {
    pub dt: f64,
    pub transient: f64,
    pub horizon: f64,
    pub renorm_every: usize,
    pub seed: u64,
    pub divergence_bound: f64,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        LyapunovOptions {
            dt: 1e-3,
            transient: 100.0,
            horizon: 2000.0,
            renorm_every: 10,
            seed: 0,
            divergence_bound: DEFAULT_DIVERGENCE_BOUND,
        }
    }
}

/// Sampled master stability function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsfCurve {
    /// `(eta, mu)` pairs, strictly increasing in `eta`.
    pub samples: Vec<(f64, f64)>,
    /// First grid value with `mu >= 0`; every grid value below it has `mu < 0`.
    pub threshold: f64,
    /// Linear interpolation of the zero crossing between the threshold and
    /// the grid point just below it.
    pub crossing: f64,
}

/// Largest Lyapunov exponent of `z' = (Df(s) + eta * gamma) z` along a free
/// trajectory `s' = f(s)`, by periodic renormalization.
pub fn max_lyapunov(m: &NodeModel, eta: f64, gamma: &Matrix3<f64>, opts: &LyapunovOptions) -> Result<f64> {
    if !(opts.dt > 0.0) || !(opts.horizon > 0.0) || opts.transient < 0.0 {
        return Err(Error::invalid("dt and horizon must be positive, transient non-negative"));
    }
    if opts.renorm_every == 0 {
        return Err(Error::invalid("renorm_every must be at least 1"));
    }
    if !eta.is_finite() {
        return Err(Error::Domain("eta"));
    }
    let mut rng = rng_from_seed(opts.seed);
    let mut s = [1.0, 1.0, 1.0];
    for v in s.iter_mut() {
        *v += rng.random_range(-1e-2..1e-2);
    }

    let dt = opts.dt;
    let mut w3 = Rk4Work::new(3);
    let mut free = |x: &[f64], d: &mut [f64]| m.flow(x, d);
    let n_transient = (opts.transient / dt).round() as usize;
    for step in 0..n_transient {
        rk4_step(&mut free, &mut s, dt, &mut w3);
        if step % 1000 == 0 {
            check_bound(&s, opts.divergence_bound, step)?;
        }
    }

    let g = *gamma * eta;
    let mut tangent = |x: &[f64], d: &mut [f64]| {
        m.flow(&x[..3], &mut d[..3]);
        let j = m.jacobian_unchecked(&x[..3]) + g;
        for r in 0..3 {
            d[3 + r] = j[(r, 0)] * x[3] + j[(r, 1)] * x[4] + j[(r, 2)] * x[5];
        }
    };
    let mut state = [s[0], s[1], s[2], 0.0, 0.0, 0.0];
    let mut norm = 0.0;
    for v in state[3..].iter_mut() {
        *v = rng.random_range(-1.0..1.0);
        norm += *v * *v;
    }
    let norm = norm.sqrt();
    state[3..].iter_mut().for_each(|v| *v /= norm);

    let mut w6 = Rk4Work::new(6);
    let n = (opts.horizon / dt).round() as usize;
    let mut log_sum = 0.0;
    let mut step = 0;
    while step < n {
        let k = opts.renorm_every.min(n - step);
        for _ in 0..k {
            rk4_step(&mut tangent, &mut state, dt, &mut w6);
        }
        step += k;
        check_bound(&state[..3], opts.divergence_bound, n_transient + step)?;
        let nz = (state[3] * state[3] + state[4] * state[4] + state[5] * state[5]).sqrt();
        if !(nz > 0.0) || !nz.is_finite() {
            return Err(Error::Domain("tangent vector"));
        }
        log_sum += nz.ln();
        state[3..].iter_mut().for_each(|v| *v /= nz);
    }
    Ok(log_sum / (n as f64 * dt))
}

/// Evaluates [`max_lyapunov`] on every grid point. Each point gets its own
/// seed derived from `opts.seed` and the point index.
pub fn msf_sweep(m: &NodeModel, gamma: &Matrix3<f64>, grid: &[f64], opts: &LyapunovOptions) -> Result<MsfCurve> {
    if grid.is_empty() {
        return Err(Error::invalid("empty eta grid"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("eta grid must be strictly increasing"));
    }
    let jobs: Vec<(usize, f64)> = grid.iter().copied().enumerate().collect();
    let mus = par::map(jobs, |(i, eta)| {
        let o = LyapunovOptions { seed: derive_seed(opts.seed, &[i as u64]), ..*opts };
        max_lyapunov(m, eta, gamma, &o)
    });
    let mut samples = Vec::with_capacity(grid.len());
    for (eta, mu) in grid.iter().zip(mus) {
        samples.push((*eta, mu?));
    }
    curve_from_samples(samples)
}

pub(crate) fn curve_from_samples(samples: Vec<(f64, f64)>) -> Result<MsfCurve> {
    let idx = samples.iter().position(|&(_, mu)| mu >= 0.0);
    match idx {
        None => Err(Error::ThresholdNotFound("every sampled exponent is negative".into())),
        Some(0) => Err(Error::ThresholdNotFound("first grid point is already unstable".into())),
        Some(i) => {
            let (e0, m0) = samples[i - 1];
            let (e1, m1) = samples[i];
            let crossing = e0 + (e1 - e0) * (-m0) / (m1 - m0);
            Ok(MsfCurve { threshold: e1, crossing, samples })
        }
    }
}
