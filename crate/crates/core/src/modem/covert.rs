use serde::Serialize;

use super::transmit::Transmission;
use crate::topology::Design;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowStat {
    pub first_symbol: usize,
    /// Smallest time-averaged channel-link error over the window.
    pub min_channel: f64,
    /// Time average over the window of the largest receiver error among the
    /// pairs clustered by the symbol being sent.
    pub max_intra: f64,
}

impl WindowStat {
    pub fn ratio(&self) -> f64 {
        self.min_channel / self.max_intra
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovertnessReport {
    pub windows: Vec<WindowStat>,
    /// Per symbol: smallest time-averaged channel-link error.
    pub channel_per_symbol: Vec<f64>,
    /// Per symbol: largest time-averaged intra-cluster receiver error.
    pub intra_per_symbol: Vec<f64>,
}

impl CovertnessReport {
    pub fn min_ratio(&self) -> f64 {
        self.windows.iter().map(WindowStat::ratio).fold(f64::INFINITY, f64::min)
    }
}

fn trapezoid_mean(t: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 1..t.len() {
        acc += 0.5 * (t[k] - t[k - 1]) * (v[k] + v[k - 1]);
    }
    acc / (t[t.len() - 1] - t[0])
}

/// Channel-versus-receiver error statistics over sliding windows of
/// `window` symbols, starting at symbol `skip`.
pub fn covertness(tx: &Transmission, design: &Design, window: usize, skip: usize) -> Result<CovertnessReport> {
    let n_sym = tx.bits.len();
    if window == 0 || skip + window > n_sym {
        return Err(Error::Window(format!("{window}-symbol window after {skip} skipped symbols, {n_sym} sent")));
    }
    let s_f = tx.spreading_factor;
    let channel: Vec<Vec<f64>> =
        tx.channel_links.iter().map(|&(i, j)| tx.channel.error_series(i, j)).collect::<Result<_>>()?;
    // Largest intra-cluster receiver error at each sample, using the pattern
    // of the symbol being sent.
    let rx = &tx.receiver;
    let mut intra = vec![0.0; rx.len()];
    for seg in &tx.schedule {
        let pattern = &design.symbols[seg.symbol].pattern;
        let pairs: Vec<(usize, usize)> = pattern
            .intra_pairs()
            .into_iter()
            .filter(|&(i, j)| rx.position(i).is_some() && rx.position(j).is_some())
            .collect();
        let series: Vec<Vec<f64>> = pairs.iter().map(|&(i, j)| rx.error_series(i, j)).collect::<Result<_>>()?;
        for k in seg.n * s_f..=(seg.n + 1) * s_f {
            intra[k] = series.iter().map(|s| s[k]).fold(0.0, f64::max);
        }
    }
    let t = &rx.times;
    let span = |a: usize, b: usize| (a * s_f, b * s_f + 1);
    let mut channel_per_symbol = Vec::with_capacity(n_sym);
    let mut intra_per_symbol = Vec::with_capacity(n_sym);
    for n in 0..n_sym {
        let (a, b) = span(n, n + 1);
        channel_per_symbol
            .push(channel.iter().map(|c| trapezoid_mean(&t[a..b], &c[a..b])).fold(f64::INFINITY, f64::min));
        intra_per_symbol.push(trapezoid_mean(&t[a..b], &intra[a..b]));
    }
    let windows = (skip..=n_sym - window)
        .map(|w| {
            let (a, b) = span(w, w + window);
            WindowStat {
                first_symbol: w,
                min_channel: channel.iter().map(|c| trapezoid_mean(&t[a..b], &c[a..b])).fold(f64::INFINITY, f64::min),
                max_intra: trapezoid_mean(&t[a..b], &intra[a..b]),
            }
        })
        .collect();
    Ok(CovertnessReport { windows, channel_per_symbol, intra_per_symbol })
}
