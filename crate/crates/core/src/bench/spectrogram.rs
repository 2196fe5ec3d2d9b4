//! Short-time Fourier magnitudes and a spectral-centroid covertness statistic.

use std::f64::consts::PI;
use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{Error, Result};

pub const DEFAULT_WINDOW: usize = 256;
pub const DEFAULT_OVERLAP: usize = 128;

/// One-sided STFT magnitudes; `mag[c][k]` is column `c`, bin `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrogram {
    pub window: usize,
    pub hop: usize,
    pub dt: f64,
    /// Window centre times.
    pub times: Vec<f64>,
    pub freqs: Vec<f64>,
    pub mag: Vec<Vec<f64>>,
}

/// Periodic Hann window.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect()
}

/// Hann-windowed STFT of `signal` sampled every `dt`.
pub fn spectrogram(signal: &[f64], dt: f64, window: usize, overlap: usize) -> Result<Spectrogram> {
    if window < 2 || window > signal.len() {
        return Err(Error::Window(format!("window {window} for a signal of {} samples", signal.len())));
    }
    if overlap >= window {
        return Err(Error::Window(format!("overlap {overlap} must be below window {window}")));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid("sample interval must be positive"));
    }
    let hop = window - overlap;
    let cols = (signal.len() - window) / hop + 1;
    let bins = window / 2 + 1;
    let w = hann(window);
    let fft = FftPlanner::new().plan_fft_forward(window);
    let mut buf = vec![Complex::new(0.0, 0.0); window];
    let mut mag = Vec::with_capacity(cols);
    let mut times = Vec::with_capacity(cols);
    for c in 0..cols {
        let start = c * hop;
        for (k, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(signal[start + k] * w[k], 0.0);
        }
        fft.process(&mut buf);
        mag.push(buf[..bins].iter().map(|z| z.norm()).collect());
        times.push((start as f64 + window as f64 / 2.0) * dt);
    }
    let freqs = (0..bins).map(|k| k as f64 / (window as f64 * dt)).collect();
    Ok(Spectrogram { window, hop, dt, times, freqs, mag })
}

impl Spectrogram {
    /// Energy of column `c` recovered from its one-sided bins; equals the
    /// windowed-signal energy by Parseval.
    pub fn column_energy(&self, c: usize) -> f64 {
        let m = &self.mag[c];
        let n = self.window;
        let last = m.len() - 1;
        let mut e = 0.0;
        for (k, v) in m.iter().enumerate() {
            let double = k != 0 && !(n % 2 == 0 && k == last);
            e += if double { 2.0 } else { 1.0 } * v * v;
        }
        e / n as f64
    }

    /// Power-weighted mean frequency of each column (0 for a silent column).
    pub fn centroids(&self) -> Vec<f64> {
        self.mag
            .iter()
            .map(|col| {
                let p: f64 = col.iter().map(|v| v * v).sum();
                if p > 0.0 {
                    col.iter().zip(&self.freqs).map(|(v, f)| v * v * f).sum::<f64>() / p
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Matrix CSV: header `time` then one column per bin frequency.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["time".to_string()];
        header.extend(self.freqs.iter().map(|f| f.to_string()));
        wr.write_record(&header)?;
        for (t, col) in self.times.iter().zip(&self.mag) {
            let mut row = vec![t.to_string()];
            row.extend(col.iter().map(|v| v.to_string()));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Welch two-sample t-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("each sample needs at least two values"));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (qa, qb) = (va / a.len() as f64, vb / b.len() as f64);
    let se2 = qa + qb;
    if se2 == 0.0 {
        let p = if ma == mb { 1.0 } else { 0.0 };
        return Ok(WelchTest { t: if p == 1.0 { 0.0 } else { f64::INFINITY }, df: f64::NAN, p_value: p });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (qa * qa / (a.len() as f64 - 1.0) + qb * qb / (b.len() as f64 - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(WelchTest { t, df, p_value: 2.0 * (1.0 - dist.cdf(t.abs())) })
}

/// Jumps of the spectral centroid between consecutive columns, split by
/// whether the two column centres fall in different symbols.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentroidTest {
    pub across: Vec<f64>,
    pub within: Vec<f64>,
    pub test: WelchTest,
}

impl CentroidTest {
    /// True when the two groups are not distinguishable at `level`.
    pub fn indistinguishable(&self, level: f64) -> bool {
        self.test.p_value >= level
    }
}

/// Covertness statistic for a signal whose symbols are `symbol_samples`
/// long, the first starting at sample `offset`.
pub fn centroid_boundary_test(spec: &Spectrogram, symbol_samples: usize, offset: usize) -> Result<CentroidTest> {
    if symbol_samples == 0 {
        return Err(Error::invalid("symbol length must be positive"));
    }
    let c = spec.centroids();
    let symbol_of = |col: usize| {
        let centre = col * spec.hop + spec.window / 2;
        centre.checked_sub(offset).map(|s| s / symbol_samples)
    };
    let (mut across, mut within) = (Vec::new(), Vec::new());
    for k in 0..c.len().saturating_sub(1) {
        let (Some(a), Some(b)) = (symbol_of(k), symbol_of(k + 1)) else { continue };
        let jump = (c[k + 1] - c[k]).abs();
        if a == b {
            within.push(jump);
        } else {
            across.push(jump);
        }
    }
    if across.len() < 2 || within.len() < 2 {
        return Err(Error::Window(format!(
            "{} boundary and {} interior column pairs; need two of each",
            across.len(),
            within.len()
        )));
    }
    let test = welch_t_test(&across, &within)?;
    Ok(CentroidTest { across, within, test })
}
