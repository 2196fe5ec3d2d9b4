use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::detect::{detect_segment, reference_matrix, DetectionFrame, DetectionRule};
use crate::netsim::{
    integrate_network, integrate_sde_with_rng, random_state, NetSystem, NetworkState, NoiseConfig, NoiseSource,
    PinNoise, SdeScheme, SimOptions, Trajectory,
};
use crate::rng::{derive_seed, rng_from_seed, SimRng};
use crate::topology::Design;
use crate::{Error, Result};

/// Bit-to-symbol lookup for a design.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMap {
    /// `bits[m]` is the bit carried by symbol `m`.
    pub bits: Vec<u8>,
}

impl SymbolMap {
    pub fn from_design(d: &Design) -> Result<Self> {
        let bits: Vec<u8> = d.symbols.iter().map(|s| s.bit).collect();
        for a in 0..d.symbols.len() {
            for b in a + 1..d.symbols.len() {
                if d.symbols[a].pattern.same_partition(&d.symbols[b].pattern) {
                    return Err(Error::InvalidPattern(format!("symbols {a} and {b} share a pattern")));
                }
            }
        }
        Ok(SymbolMap { bits })
    }

    pub fn capacity(&self) -> usize {
        self.bits.len()
    }

    pub fn symbol(&self, bit: u8) -> Result<usize> {
        self.bits.iter().position(|&b| b == bit).ok_or(Error::UnmappedBit(bit))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSegment {
    pub n: usize,
    pub symbol: usize,
    pub t_start: f64,
    pub t_end: f64,
}

/// Piecewise-constant symbol schedule: symbol `n` occupies
/// `[n * t_b, (n + 1) * t_b)`.
pub fn schedule_controls(bits: &[u8], map: &SymbolMap, t_b: f64) -> Result<Vec<ScheduleSegment>> {
    if !(t_b > 0.0) {
        return Err(Error::invalid("symbol duration must be positive"));
    }
    bits.iter()
        .enumerate()
        .map(|(n, &b)| {
            Ok(ScheduleSegment { n, symbol: map.symbol(b)?, t_start: n as f64 * t_b, t_end: (n + 1) as f64 * t_b })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmitSettings {
    pub sigma: f64,
    pub seed: u64,
    pub scheme: SdeScheme,
    pub pin_noise: PinNoise,
    pub epsilon_scaled_links: bool,
}

impl Default for TransmitSettings {
    fn default() -> Self {
        TransmitSettings {
            sigma: 0.0,
            seed: 0,
            scheme: SdeScheme::Sra4,
            pin_noise: PinNoise::PerControlNode,
            epsilon_scaled_links: false,
        }
    }
}

/// Stored samples of a subset of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedTraces {
    /// Augmented node indices (control nodes follow network nodes).
    pub nodes: Vec<usize>,
    pub times: Vec<f64>,
    data: Vec<f64>,
}

impl ObservedTraces {
    pub fn from_parts(nodes: Vec<usize>, times: Vec<f64>, data: Vec<f64>) -> Result<Self> {
        if data.len() != times.len() * nodes.len() * 3 {
            return Err(Error::Dimension("trace data does not match nodes x samples x 3".into()));
        }
        Ok(ObservedTraces { nodes, times, data })
    }

    pub fn from_trajectory(traj: &Trajectory, nodes: &[usize]) -> Self {
        let mut data = Vec::with_capacity(traj.len() * nodes.len() * 3);
        for k in 0..traj.len() {
            for &i in nodes {
                data.extend_from_slice(traj.node(k, i));
            }
        }
        ObservedTraces { nodes: nodes.to_vec(), times: traj.times.clone(), data }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// State of the `i`-th observed node at sample `k`.
    pub fn node(&self, k: usize, i: usize) -> &[f64] {
        let b = (k * self.nodes.len() + i) * 3;
        &self.data[b..b + 3]
    }

    pub fn position(&self, node: usize) -> Option<usize> {
        self.nodes.iter().position(|&v| v == node)
    }

    /// `||x_a - x_b||` per sample for observed nodes `a`, `b` (augmented labels).
    pub fn error_series(&self, a: usize, b: usize) -> Result<Vec<f64>> {
        let (i, j) = match (self.position(a), self.position(b)) {
            (Some(i), Some(j)) => (i, j),
            _ => return Err(Error::invalid(format!("nodes {} and {} are not both observed", a + 1, b + 1))),
        };
        Ok((0..self.len())
            .map(|k| {
                let x = self.node(k, i);
                let y = self.node(k, j);
                ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt()
            })
            .collect())
    }

    /// Reads the long format written by [`ObservedTraces::write_csv`].
    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut times: Vec<f64> = Vec::new();
        let mut nodes: Vec<usize> = Vec::new();
        let mut data = Vec::new();
        for (k, rec) in rd.records().enumerate() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).ok_or_else(|| Error::Config(format!("short trace row {k}")));
            let num = |i: usize| -> Result<f64> {
                field(i)?.parse().map_err(|_| Error::Config(format!("bad number in trace row {k}")))
            };
            let t = num(0)?;
            let node: usize = field(1)?.parse().map_err(|_| Error::Config(format!("bad node in trace row {k}")))?;
            let comp: usize =
                field(2)?.parse().map_err(|_| Error::Config(format!("bad component in trace row {k}")))?;
            if node == 0 || !(1..=3).contains(&comp) {
                return Err(Error::Config(format!("node {node} component {comp} out of range in row {k}")));
            }
            if times.last() != Some(&t) {
                times.push(t);
            }
            if times.len() == 1 && comp == 1 {
                nodes.push(node - 1);
            }
            data.push(num(3)?);
        }
        ObservedTraces::from_parts(nodes, times, data)
    }

    /// Long-format CSV as for network trajectories.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "node", "component", "value"])?;
        for k in 0..self.len() {
            let t = self.times[k].to_string();
            for (p, &node) in self.nodes.iter().enumerate() {
                for (c, v) in self.node(k, p).iter().enumerate() {
                    wr.write_record([t.as_str(), &(node + 1).to_string(), &(c + 1).to_string(), &v.to_string()])?;
                }
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Stateful transmitter: integrates one symbol at a time with the state and
/// noise stream carried across symbol boundaries.
pub struct Transmitter {
    systems: Vec<NetSystem>,
    noise: Vec<NoiseConfig>,
    state: NetworkState,
    rng: SimRng,
    opts: SimOptions,
    steps_per_symbol: usize,
    sigma: f64,
    pub receiver: Vec<usize>,
    pub channel_links: Vec<(usize, usize)>,
    pub references: Vec<DMatrix<u8>>,
    pub map: SymbolMap,
    pub spreading_factor: usize,
    pub rule: DetectionRule,
}

impl Transmitter {
    /// Checks the design rules, draws the initial state from `seed` and
    /// prepares one compiled system per symbol.
    pub fn new(design: &Design, settings: &TransmitSettings) -> Result<Self> {
        let report = design.requirements();
        if !report.passed() {
            return Err(Error::Requirement(report.summary()));
        }
        let map = SymbolMap::from_design(design)?;
        let mut systems = Vec::with_capacity(design.symbols.len());
        let mut noise = Vec::with_capacity(design.symbols.len());
        let sources: Vec<NoiseSource> = if design.l > 0 {
            vec![NoiseSource::Pins]
        } else {
            design.noise_links().into_iter().map(|(i, j)| NoiseSource::Link { i, j }).collect()
        };
        for s in 0..design.symbols.len() {
            let ctrl = design.control_network(s);
            systems.push(NetSystem::new(design.model, &design.topology(s), ctrl.as_ref())?);
            noise.push(NoiseConfig {
                sigma: settings.sigma,
                sources: sources.clone(),
                seed: settings.seed,
                scheme: settings.scheme,
                pin_noise: settings.pin_noise,
                epsilon_scaled_links: settings.epsilon_scaled_links,
            });
        }
        noise[0].validate()?;
        let sim = design.simulation;
        let state = random_state(design.n, design.l, &mut rng_from_seed(derive_seed(settings.seed, &[0])));
        let receiver = design.receiver_nodes();
        let references =
            design.symbols.iter().map(|s| reference_matrix(&s.pattern, &receiver)).collect::<Result<Vec<_>>>()?;
        Ok(Transmitter {
            systems,
            noise,
            state,
            rng: rng_from_seed(derive_seed(settings.seed, &[1])),
            opts: SimOptions { dt: sim.dt, sample_every: sim.sample_every, ..Default::default() },
            steps_per_symbol: sim.sample_every * sim.spreading_factor,
            sigma: settings.sigma,
            receiver,
            channel_links: report.channel_links,
            references,
            map,
            spreading_factor: sim.spreading_factor,
            rule: sim.detector,
        })
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    /// Integrates one symbol duration under `symbol`'s configuration and
    /// returns `s_f + 1` samples including the starting state.
    pub fn send_symbol(&mut self, symbol: usize) -> Result<Trajectory> {
        let sys = self.systems.get(symbol).ok_or_else(|| Error::invalid(format!("symbol {symbol} out of range")))?;
        let traj = if self.sigma > 0.0 {
            integrate_sde_with_rng(
                sys,
                &self.state,
                &self.noise[symbol],
                self.steps_per_symbol,
                &self.opts,
                &mut self.rng,
            )?
        } else {
            integrate_network(sys, &self.state, self.steps_per_symbol, &self.opts)?
        };
        self.state = traj.last_state().expect("trajectory has samples");
        Ok(traj)
    }

    /// Sends `symbol` and runs the detector on the receiver samples.
    pub fn send_and_detect(&mut self, symbol: usize) -> Result<DetectionFrame> {
        let traj = self.send_symbol(symbol)?;
        let rx = ObservedTraces::from_trajectory(&traj, &self.receiver);
        detect_segment(&rx, 0, self.spreading_factor, &self.references, self.rule)
    }
}

/// Everything observable on the channel links and at the receiver.
#[derive(Debug, Clone)]
pub struct Transmission {
    pub bits: Vec<u8>,
    pub schedule: Vec<ScheduleSegment>,
    pub spreading_factor: usize,
    pub rule: DetectionRule,
    pub symbol_duration: f64,
    pub receiver: ObservedTraces,
    pub channel_links: Vec<(usize, usize)>,
    pub channel: ObservedTraces,
}

impl Transmission {
    pub fn detect(&self, refs: &[DMatrix<u8>]) -> Result<Vec<DetectionFrame>> {
        (0..self.bits.len())
            .map(|n| detect_segment(&self.receiver, n, self.spreading_factor, refs, self.rule))
            .collect()
    }
}

/// Transmits `bits` through `design` and returns the channel and receiver
/// observations.
pub fn transmit(bits: &[u8], design: &Design, settings: &TransmitSettings) -> Result<Transmission> {
    let mut tx = Transmitter::new(design, settings)?;
    let schedule = schedule_controls(bits, &tx.map, design.simulation.symbol_duration())?;
    let mut full: Option<Trajectory> = None;
    for seg in &schedule {
        let traj = tx.send_symbol(seg.symbol)?;
        match &mut full {
            None => full = Some(traj),
            Some(f) => f.append(&traj)?,
        }
    }
    let mut channel_nodes: Vec<usize> = tx.channel_links.iter().flat_map(|&(i, j)| [i, j]).collect();
    channel_nodes.sort_unstable();
    channel_nodes.dedup();
    let (receiver, channel) = match &full {
        Some(f) => {
            (ObservedTraces::from_trajectory(f, &tx.receiver), ObservedTraces::from_trajectory(f, &channel_nodes))
        }
        None => (
            ObservedTraces { nodes: tx.receiver.clone(), times: vec![], data: vec![] },
            ObservedTraces { nodes: channel_nodes, times: vec![], data: vec![] },
        ),
    };
    Ok(Transmission {
        bits: bits.to_vec(),
        schedule,
        spreading_factor: design.simulation.spreading_factor,
        rule: design.simulation.detector,
        symbol_duration: design.simulation.symbol_duration(),
        receiver,
        channel_links: tx.channel_links.clone(),
        channel,
    })
}
