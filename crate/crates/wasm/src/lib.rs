//! Browser bindings for the demo page in `www/`. Every function returns a
//! JSON string so the page needs no generated TypeScript types.

use clsk::dynsys::{example_gamma, max_lyapunov, LyapunovOptions, NodeModel};
use clsk::modem::{reference_matrix, transmit, TransmitSettings};
use clsk::netsim::{spatiotemporal_scan, NetSystem, ScanOptions};
use clsk::topology::{example1, example2, Design};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Longest series handed to the page; longer ones are decimated.
const MAX_POINTS: usize = 2000;

fn design(example: u8) -> Result<Design, String> {
    let file = match example {
        1 => example1(),
        2 => example2(),
        _ => return Err(format!("unknown example {example}")),
    };
    file.to_design().map_err(|e| e.to_string())
}

fn linspace(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, String> {
    if points < 2 || !(hi > lo) {
        return Err("need at least two points and max > min".into());
    }
    Ok((0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect())
}

fn decimate(v: &[f64]) -> Vec<f64> {
    let step = v.len().div_ceil(MAX_POINTS).max(1);
    v.iter().step_by(step).copied().collect()
}

/// Largest transverse Lyapunov exponent on an evenly spaced `eta` grid.
/// `threshold` is the first grid value with a non-negative exponent, or null.
#[wasm_bindgen]
pub fn msf_curve(eta_min: f64, eta_max: f64, points: usize, horizon: f64) -> Result<String, String> {
    let grid = linspace(eta_min, eta_max, points)?;
    let opts = LyapunovOptions { horizon, transient: 20.0, ..Default::default() };
    let model = NodeModel::chen();
    let gamma = example_gamma();
    let mu = grid
        .iter()
        .map(|&eta| max_lyapunov(&model, eta, &gamma, &opts))
        .collect::<clsk::Result<Vec<f64>>>()
        .map_err(|e| e.to_string())?;
    let threshold = mu.iter().position(|m| *m >= 0.0).map(|k| grid[k]);
    Ok(json!({ "eta": grid, "mu": mu, "threshold": threshold }).to_string())
}

/// Time-averaged synchronization errors of one symbol's configuration over a
/// coupling-strength grid: the largest intra-cluster and the smallest
/// inter-cluster error per point (null where the run diverged).
#[wasm_bindgen]
pub fn epsilon_scan(
    example: u8,
    symbol: usize,
    eps_min: f64,
    eps_max: f64,
    points: usize,
    seed: u32,
) -> Result<String, String> {
    let d = design(example)?;
    let sym = d.symbols.get(symbol).ok_or_else(|| format!("symbol {symbol} out of range"))?;
    let grid = linspace(eps_min, eps_max, points)?;
    let ctrl = d.control_network(symbol);
    let family = |e: f64| NetSystem::new(d.model, &d.clone().with_epsilon(e).topology(symbol), ctrl.as_ref());
    let opts = ScanOptions { transient: 20.0, window: 20.0, seed: seed.into(), ..Default::default() };
    let scan = spatiotemporal_scan(family, &grid, &opts).map_err(|e| e.to_string())?;
    let (intra_pairs, inter_pairs) = (sym.pattern.intra_pairs(), sym.pattern.inter_pairs());
    let (mut intra, mut inter) = (Vec::new(), Vec::new());
    for p in &scan {
        match &p.mean_error {
            Some(m) => {
                intra.push(Some(intra_pairs.iter().map(|&(i, j)| m[(i, j)]).fold(0.0, f64::max)));
                inter.push(Some(inter_pairs.iter().map(|&(i, j)| m[(i, j)]).fold(f64::INFINITY, f64::min)));
            }
            None => {
                intra.push(None);
                inter.push(None);
            }
        }
    }
    Ok(json!({ "epsilon": grid, "intra": intra, "inter": inter, "pattern": sym.pattern.to_one_based() }).to_string())
}

/// Sends `bits` (a string of 0 and 1) and returns the detected bits, the
/// error signal on the first channel link and the receiver errors between
/// the first receiver node and each of the others.
#[wasm_bindgen]
pub fn transmit_demo(example: u8, bits: &str, sigma: f64, seed: u32) -> Result<String, String> {
    let d = design(example)?;
    let bits: Vec<u8> = bits
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(format!("'{c}' is not a bit")),
        })
        .collect::<Result<_, _>>()?;
    if bits.is_empty() || bits.len() > 64 {
        return Err("send between 1 and 64 bits".into());
    }
    let settings = TransmitSettings { sigma, seed: seed.into(), ..Default::default() };
    let tx = transmit(&bits, &d, &settings).map_err(|e| e.to_string())?;
    let rx_nodes = d.receiver_nodes();
    let refs = d
        .symbols
        .iter()
        .map(|s| reference_matrix(&s.pattern, &rx_nodes))
        .collect::<clsk::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let frames = tx.detect(&refs).map_err(|e| e.to_string())?;
    let detected: Vec<u8> = frames.iter().map(|f| d.symbols[f.symbol].bit).collect();
    let (a, b) = tx.channel_links[0];
    let channel = tx.channel.error_series(a, b).map_err(|e| e.to_string())?;
    let mut receiver = Vec::new();
    for &j in &rx_nodes[1..] {
        let e = tx.receiver.error_series(rx_nodes[0], j).map_err(|e| e.to_string())?;
        receiver.push(json!({ "pair": [rx_nodes[0] + 1, j + 1], "error": decimate(&e) }));
    }
    Ok(json!({
        "bits": bits,
        "detected": detected,
        "errors": bits.iter().zip(&detected).filter(|(x, y)| x != y).count(),
        "symbol_duration": tx.symbol_duration,
        "t": decimate(&tx.channel.times),
        "channel_link": [a + 1, b + 1],
        "channel": decimate(&channel),
        "receiver": receiver,
    })
    .to_string())
}
