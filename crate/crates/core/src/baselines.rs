//! Chaos shift keying (CSK) and differential CSK over an AWGN channel.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynsys::{rk4_step, NodeModel, Rk4Work};
use crate::rng::{derive_seed, rng_from_seed, SimRng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BasebandSignal {
    pub samples: Vec<f64>,
    pub dt: f64,
    pub s_f: usize,
}

impl BasebandSignal {
    pub fn new(samples: Vec<f64>, dt: f64, s_f: usize) -> Result<Self> {
        if s_f == 0 || samples.len() % s_f != 0 {
            return Err(Error::invalid(format!("length {} is not a multiple of s_f = {s_f}", samples.len())));
        }
        Ok(BasebandSignal { samples, dt, s_f })
    }

    pub fn symbols(&self) -> usize {
        self.samples.len() / self.s_f
    }

    /// Mean per-symbol energy `sum s^2` (one bit per symbol).
    pub fn bit_energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.symbols().max(1) as f64
    }
}

/// First Chen component sampled every `dt`, continuing across calls.
#[derive(Debug, Clone)]
pub struct ChaoticSource {
    model: NodeModel,
    x: Vec<f64>,
    dt: f64,
    work: Rk4Work,
}

impl ChaoticSource {
    /// Random start in `[-5, 5]^3` followed by a 50-unit transient.
    pub fn new(seed: u64, dt: f64) -> Self {
        let mut rng = rng_from_seed(seed);
        let x = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
        let mut s = ChaoticSource { model: NodeModel::chen(), x, dt, work: Rk4Work::new(3) };
        s.advance((50.0 / dt).round() as usize);
        s
    }

    fn advance(&mut self, steps: usize) {
        let m = self.model;
        let mut f = |x: &[f64], d: &mut [f64]| m.flow(x, d);
        for _ in 0..steps {
            rk4_step(&mut f, &mut self.x, self.dt, &mut self.work);
        }
    }

    pub fn take(&mut self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| {
                self.advance(1);
                self.x[0]
            })
            .collect()
    }
}

fn need(src: &[f64], n: usize, what: &str) -> Result<()> {
    if src.len() < n {
        return Err(Error::invalid(format!("{what} has {} samples, {n} needed", src.len())));
    }
    Ok(())
}

/// Symbol `n` copies samples `n*s_f .. (n+1)*s_f` of `x` (bit 0) or `y` (bit 1).
pub fn csk_modulate(bits: &[u8], x: &[f64], y: &[f64], s_f: usize, dt: f64) -> Result<BasebandSignal> {
    let total = bits.len() * s_f;
    need(x, total, "x")?;
    need(y, total, "y")?;
    let mut out = Vec::with_capacity(total);
    for (n, &b) in bits.iter().enumerate() {
        let src = if b == 0 { x } else { y };
        out.extend_from_slice(&src[n * s_f..(n + 1) * s_f]);
    }
    BasebandSignal::new(out, dt, s_f)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Correlates each symbol against the matching replica windows, each
/// correlation scaled by the replica's norm. Unscaled correlation favours
/// whichever replica has more energy in the window and misdetects even
/// without noise.
pub fn csk_demodulate(r: &BasebandSignal, x: &[f64], y: &[f64]) -> Result<Vec<u8>> {
    let s_f = r.s_f;
    need(x, r.samples.len(), "x")?;
    need(y, r.samples.len(), "y")?;
    let score = |seg: &[f64], rep: &[f64]| {
        let norm = dot(rep, rep).sqrt();
        if norm > 0.0 {
            dot(seg, rep) / norm
        } else {
            0.0
        }
    };
    Ok((0..r.symbols())
        .map(|n| {
            let w = n * s_f..(n + 1) * s_f;
            let seg = &r.samples[w.clone()];
            u8::from(score(seg, &y[w.clone()]) > score(seg, &x[w]))
        })
        .collect())
}

/// Reference half then `+reference` (bit 0) or `-reference` (bit 1).
pub fn dcsk_modulate(bits: &[u8], x: &[f64], s_f: usize, dt: f64) -> Result<BasebandSignal> {
    if s_f == 0 || s_f % 2 != 0 {
        return Err(Error::invalid(format!("DCSK needs an even spreading factor, got {s_f}")));
    }
    let h = s_f / 2;
    need(x, bits.len() * h, "x")?;
    let mut out = Vec::with_capacity(bits.len() * s_f);
    for (n, &b) in bits.iter().enumerate() {
        let r = &x[n * h..(n + 1) * h];
        out.extend_from_slice(r);
        let sign = if b == 0 { 1.0 } else { -1.0 };
        out.extend(r.iter().map(|v| sign * v));
    }
    BasebandSignal::new(out, dt, s_f)
}

/// Sign of the correlation between the two halves of each symbol.
pub fn dcsk_demodulate(r: &BasebandSignal) -> Result<Vec<u8>> {
    if r.s_f % 2 != 0 {
        return Err(Error::invalid(format!("DCSK needs an even spreading factor, got {}", r.s_f)));
    }
    let h = r.s_f / 2;
    Ok(r.samples.chunks_exact(r.s_f).map(|s| u8::from(dot(&s[..h], &s[h..]) < 0.0)).collect())
}

/// Adds white Gaussian noise with variance `N0 / 2` per sample, where
/// `N0 = Eb / 10^(ebn0_db / 10)` and `Eb` is measured on `signal`. An
/// infinite ratio adds nothing.
pub fn awgn(signal: &BasebandSignal, ebn0_db: f64, rng: &mut SimRng) -> Result<BasebandSignal> {
    if signal.samples.is_empty() {
        return Err(Error::invalid("empty signal"));
    }
    if ebn0_db == f64::INFINITY {
        return Ok(signal.clone());
    }
    let n0 = signal.bit_energy() / 10f64.powf(ebn0_db / 10.0);
    let sd = (n0 / 2.0).sqrt();
    let samples = signal.samples.iter().map(|v| v + sd * rng.sample::<f64, _>(StandardNormal)).collect();
    Ok(BasebandSignal { samples, dt: signal.dt, s_f: signal.s_f })
}

pub const FIT_A: f64 = -0.5354;
pub const FIT_B: f64 = 7.2835;
pub const FIT_C: f64 = -25.05;
pub const FIT_VERTEX_DB: f64 = -FIT_B / (2.0 * FIT_A);

/// Quadratic-exponent trend `min(1, 10^(a x^2 + b x + c))` of CLSK error
/// rate against Eb/N0 in dB. The exponent peaks at `FIT_VERTEX_DB`; only the
/// decreasing branch above it describes measured data.
pub fn fit_curve(x: f64) -> f64 {
    10f64.powf(FIT_A * x * x + FIT_B * x + FIT_C).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Csk,
    Dcsk,
}

/// Bit errors of `bits` random equiprobable bits sent with `scheme` at
/// `ebn0_db`. Chaotic sources are Chen first components sampled every
/// `dt`. Processing is chunked to bound memory.
pub fn simulate_baseline(scheme: Baseline, bits: usize, ebn0_db: f64, s_f: usize, dt: f64, seed: u64) -> Result<u64> {
    if s_f == 0 {
        return Err(Error::invalid("spreading factor must be positive"));
    }
    let mut bit_rng = rng_from_seed(derive_seed(seed, &[0]));
    let mut noise_rng = rng_from_seed(derive_seed(seed, &[1]));
    let mut sx = ChaoticSource::new(derive_seed(seed, &[2]), dt);
    let mut sy = ChaoticSource::new(derive_seed(seed, &[3]), dt);
    let chunk = 256;
    let mut errors = 0;
    let mut sent = 0;
    while sent < bits {
        let k = chunk.min(bits - sent);
        let b: Vec<u8> = (0..k).map(|_| bit_rng.random_range(0..2)).collect();
        let got = match scheme {
            Baseline::Csk => {
                let x = sx.take(k * s_f);
                let y = sy.take(k * s_f);
                let s = csk_modulate(&b, &x, &y, s_f, dt)?;
                csk_demodulate(&awgn(&s, ebn0_db, &mut noise_rng)?, &x, &y)?
            }
            Baseline::Dcsk => {
                let x = sx.take(k * s_f / 2);
                let s = dcsk_modulate(&b, &x, s_f, dt)?;
                dcsk_demodulate(&awgn(&s, ebn0_db, &mut noise_rng)?)?
            }
        };
        errors += b.iter().zip(&got).filter(|(a, c)| a != c).count() as u64;
        sent += k;
    }
    Ok(errors)
}
