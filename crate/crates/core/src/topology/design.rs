//! Network description file and the validated in-memory design.
//!
//! Nodes are numbered from 1 in the file. Control nodes, when present, are
//! numbered `N+1 ..= N+L` after the `N` network nodes.

use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use super::control::ControlNetwork;
use super::pattern::{ClusterPattern, PermutationSymmetry};
use super::requirements::{check_requirements, RequirementInput, RequirementReport};
use super::{matrix_from_rows, matrix_to_rows, CouplingTopology};
use crate::dynsys::NodeModel;
use crate::modem::DetectionRule;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub nodes: usize,
    pub epsilon: f64,
    pub gamma: Vec<Vec<f64>>,
    pub transmitter: Vec<usize>,
    pub receiver: Vec<usize>,
    pub control_links: Vec<[usize; 2]>,
    /// Links carrying channel noise; defaults to the channel links.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noisy_links: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSection {
    pub bit: u8,
    pub pattern: Vec<Vec<usize>>,
    pub xi: Vec<Vec<f64>>,
    /// Involution behind the pattern, as disjoint transpositions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    pub alpha: f64,
    /// Control node (1-based among control nodes) driving each network node.
    pub pin: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub dt: f64,
    /// Integration steps between stored samples.
    pub sample_every: usize,
    /// Stored samples per symbol.
    pub spreading_factor: usize,
    #[serde(default)]
    pub detector: DetectionRule,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection { dt: 1e-3, sample_every: 50, spreading_factor: 200, detector: DetectionRule::Overlap }
    }
}

impl SimulationSection {
    /// Symbol duration in time units.
    pub fn symbol_duration(&self) -> f64 {
        self.dt * (self.sample_every * self.spreading_factor) as f64
    }
}

/// Serialized form of a network design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDesign {
    pub model: ModelSection,
    pub network: NetworkSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    pub symbol: Vec<SymbolSection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolConfig {
    pub bit: u8,
    pub xi: DMatrix<f64>,
    pub pattern: ClusterPattern,
    pub symmetry: Option<PermutationSymmetry>,
    pub control_matrix: Option<DMatrix<f64>>,
}

/// Validated design with 0-based indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub model: NodeModel,
    pub gamma: Matrix3<f64>,
    pub epsilon: f64,
    pub n: usize,
    /// Number of control nodes (0 without a control network).
    pub l: usize,
    pub transmitter: Vec<usize>,
    pub receiver: Vec<usize>,
    pub control_links: Vec<(usize, usize)>,
    pub noisy_links: Option<Vec<(usize, usize)>>,
    pub alpha: f64,
    pub pin: Vec<usize>,
    pub simulation: SimulationSection,
    pub symbols: Vec<SymbolConfig>,
}

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn to_zero(list: &[usize], max: usize, what: &str) -> Result<Vec<usize>> {
    list.iter()
        .map(|&i| if i == 0 || i > max { Err(cfg(format!("{what}: node {i} outside 1..={max}"))) } else { Ok(i - 1) })
        .collect()
}

fn pairs_to_zero(list: &[[usize; 2]], max: usize, what: &str) -> Result<Vec<(usize, usize)>> {
    list.iter()
        .map(|p| {
            let v = to_zero(p, max, what)?;
            Ok((v[0].min(v[1]), v[0].max(v[1])))
        })
        .collect()
}

fn square(rows: &[Vec<f64>], n: usize, what: &str) -> Result<DMatrix<f64>> {
    let m = matrix_from_rows(rows).map_err(|e| cfg(format!("{what}: {e}")))?;
    if m.shape() != (n, n) {
        return Err(cfg(format!("{what}: expected {n}x{n}, got {}x{}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(cfg(format!("{what}: non-finite entry")));
    }
    Ok(m)
}

impl NetworkDesign {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| cfg(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| cfg(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| cfg(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }

    pub fn to_design(&self) -> Result<Design> {
        let net = &self.network;
        let n = net.nodes;
        if n == 0 {
            return Err(cfg("network needs at least one node"));
        }
        let gamma = square(&net.gamma, 3, "gamma")?;
        let gamma = Matrix3::from_fn(|i, j| gamma[(i, j)]);
        if !net.epsilon.is_finite() || net.epsilon < 0.0 {
            return Err(cfg(format!("epsilon {} must be >= 0", net.epsilon)));
        }

        let (l, alpha, pin) = match &self.control {
            None => (0, 0.0, Vec::new()),
            Some(c) => {
                if c.pin.len() != n {
                    return Err(cfg(format!("pin map has {} entries for {n} nodes", c.pin.len())));
                }
                let l = c.pin.iter().copied().max().unwrap_or(0);
                if !c.alpha.is_finite() || c.alpha < 0.0 {
                    return Err(cfg(format!("alpha {} must be >= 0", c.alpha)));
                }
                (l, c.alpha, to_zero(&c.pin, l, "pin")?)
            }
        };
        let total = n + l;

        let transmitter = to_zero(&net.transmitter, total, "transmitter")?;
        let receiver = to_zero(&net.receiver, total, "receiver")?;
        let control_links = pairs_to_zero(&net.control_links, total, "control_links")?;
        let noisy_links = net.noisy_links.as_ref().map(|v| pairs_to_zero(v, total, "noisy_links")).transpose()?;

        if self.symbol.is_empty() {
            return Err(cfg("no symbols defined"));
        }
        let mut symbols = Vec::with_capacity(self.symbol.len());
        for (k, s) in self.symbol.iter().enumerate() {
            let what = format!("symbol {k}");
            if symbols.iter().any(|o: &SymbolConfig| o.bit == s.bit) {
                return Err(cfg(format!("{what}: bit {} defined twice", s.bit)));
            }
            let xi = square(&s.xi, n, &format!("{what} xi"))?;
            let pattern =
                ClusterPattern::from_one_based(&s.pattern, n).map_err(|e| cfg(format!("{what} pattern: {e}")))?;
            let symmetry = s
                .symmetry
                .as_ref()
                .map(|t| {
                    let pairs: Vec<(usize, usize)> = t.iter().map(|p| (p[0], p[1])).collect();
                    PermutationSymmetry::from_transpositions(n, &pairs)
                })
                .transpose()
                .map_err(|e| cfg(format!("{what} symmetry: {e}")))?;
            let control_matrix = match (&s.control_matrix, l) {
                (None, 0) => None,
                (Some(rows), l) if l > 0 => Some(square(rows, l, &format!("{what} control_matrix"))?),
                (Some(_), _) => return Err(cfg(format!("{what}: control_matrix without [control]"))),
                (None, _) => return Err(cfg(format!("{what}: control_matrix missing"))),
            };
            symbols.push(SymbolConfig { bit: s.bit, xi, pattern, symmetry, control_matrix });
        }

        let model = NodeModel { a: self.model.a, b: self.model.b, c: self.model.c };
        let simulation = self.simulation.unwrap_or_default();
        if !(simulation.dt > 0.0) || simulation.sample_every == 0 || simulation.spreading_factor == 0 {
            return Err(cfg("simulation: dt, sample_every and spreading_factor must be positive"));
        }
        Ok(Design {
            model,
            gamma,
            epsilon: net.epsilon,
            n,
            l,
            transmitter,
            receiver,
            control_links,
            noisy_links,
            alpha,
            pin,
            simulation,
            symbols,
        })
    }
}

impl Design {
    pub fn to_file(&self) -> NetworkDesign {
        let one = |v: &[usize]| v.iter().map(|i| i + 1).collect::<Vec<_>>();
        let pairs = |v: &[(usize, usize)]| v.iter().map(|&(a, b)| [a + 1, b + 1]).collect::<Vec<_>>();
        NetworkDesign {
            model: ModelSection { a: self.model.a, b: self.model.b, c: self.model.c },
            network: NetworkSection {
                nodes: self.n,
                epsilon: self.epsilon,
                gamma: (0..3).map(|i| (0..3).map(|j| self.gamma[(i, j)]).collect()).collect(),
                transmitter: one(&self.transmitter),
                receiver: one(&self.receiver),
                control_links: pairs(&self.control_links),
                noisy_links: self.noisy_links.as_deref().map(pairs),
            },
            control: (self.l > 0).then(|| ControlSection { alpha: self.alpha, pin: one(&self.pin) }),
            simulation: Some(self.simulation),
            symbol: self
                .symbols
                .iter()
                .map(|s| SymbolSection {
                    bit: s.bit,
                    pattern: s.pattern.to_one_based(),
                    xi: matrix_to_rows(&s.xi),
                    symmetry: s
                        .symmetry
                        .as_ref()
                        .map(|d| d.transpositions().into_iter().map(|(a, b)| [a, b]).collect()),
                    control_matrix: s.control_matrix.as_ref().map(matrix_to_rows),
                })
                .collect(),
        }
    }

    pub fn symbol_for_bit(&self, bit: u8) -> Option<usize> {
        self.symbols.iter().position(|s| s.bit == bit)
    }

    pub fn topology(&self, symbol: usize) -> CouplingTopology {
        CouplingTopology { xi: self.symbols[symbol].xi.clone(), gamma: self.gamma, epsilon: self.epsilon }
    }

    pub fn control_network(&self, symbol: usize) -> Option<ControlNetwork> {
        self.symbols[symbol].control_matrix.as_ref().map(|a| ControlNetwork {
            a: a.clone(),
            pin: self.pin.clone(),
            alpha: self.alpha,
        })
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Coupling over network and control nodes; pin entries sit at
    /// `(i, N + pin[i])` only, since pinning is one-way.
    pub fn augmented_coupling(&self, symbol: usize) -> DMatrix<f64> {
        let total = self.n + self.l;
        let s = &self.symbols[symbol];
        let mut m = DMatrix::zeros(total, total);
        m.view_mut((0, 0), (self.n, self.n)).copy_from(&(&s.xi * self.epsilon));
        if let Some(a) = &s.control_matrix {
            m.view_mut((self.n, self.n), (self.l, self.l)).copy_from(a);
            for (i, &k) in self.pin.iter().enumerate() {
                m[(i, self.n + k)] = self.alpha * self.epsilon;
            }
        }
        m
    }

    /// Node pattern extended with every control node as a singleton.
    pub fn augmented_pattern(&self, symbol: usize) -> ClusterPattern {
        let mut clusters = self.symbols[symbol].pattern.clusters().to_vec();
        clusters.extend((self.n..self.n + self.l).map(|k| vec![k]));
        ClusterPattern::new(clusters, self.n + self.l).expect("extension of a valid pattern")
    }

    pub fn requirement_input(&self) -> RequirementInput {
        RequirementInput {
            couplings: (0..self.symbols.len()).map(|s| self.augmented_coupling(s)).collect(),
            patterns: (0..self.symbols.len()).map(|s| self.augmented_pattern(s)).collect(),
            transmitter: self.transmitter.clone(),
            receiver: self.receiver.clone(),
            control_links: self.control_links.clone(),
        }
    }

    pub fn requirements(&self) -> RequirementReport {
        check_requirements(&self.requirement_input())
    }

    /// Transmitter/receiver links in augmented indexing.
    pub fn channel_links(&self) -> Vec<(usize, usize)> {
        self.requirements().channel_links
    }

    /// Links carrying channel noise: the declared list, else the channel links.
    pub fn noise_links(&self) -> Vec<(usize, usize)> {
        self.noisy_links.clone().unwrap_or_else(|| self.channel_links())
    }

    /// Receiver nodes that are network nodes (control nodes excluded).
    pub fn receiver_nodes(&self) -> Vec<usize> {
        self.receiver.iter().copied().filter(|&i| i < self.n).collect()
    }
}

fn rows(flat: &[f64], n: usize) -> Vec<Vec<f64>> {
    flat.chunks(n).map(|c| c.to_vec()).collect()
}

const XI1: [f64; 64] = [
    -2., 1., 0., 0., 0., 0., 0., 1., //
    1., -3., 1., 0., 0., 0., 1., 0., //
    0., 1., -3., 1., 0., 1., 0., 0., //
    0., 0., 1., -2., 1., 0., 0., 0., //
    0., 0., 0., 1., -2., 1., 0., 0., //
    0., 0., 1., 0., 1., -3., 1., 0., //
    0., 1., 0., 0., 0., 1., -3., 1., //
    1., 0., 0., 0., 0., 0., 1., -2., //
];

const XI2: [f64; 64] = [
    -2., 1., 0., 1., 0., 0., 0., 0., //
    1., -3., 1., 0., 0., 0., 1., 0., //
    0., 1., -3., 1., 0., 1., 0., 0., //
    1., 0., 1., -2., 0., 0., 0., 0., //
    0., 0., 0., 0., -2., 1., 0., 1., //
    0., 0., 1., 0., 1., -3., 1., 0., //
    0., 1., 0., 0., 0., 1., -3., 1., //
    0., 0., 0., 0., 1., 0., 1., -2., //
];

fn gamma_rows() -> Vec<Vec<f64>> {
    vec![vec![0., 0., 0.], vec![1., 0., 0.], vec![0., 0., 0.]]
}

fn chen_section() -> ModelSection {
    let m = NodeModel::chen();
    ModelSection { a: m.a, b: m.b, c: m.c }
}

/// Eight-node ring design: two reflection-symmetric topologies selected by
/// switching the links 1-8, 4-5 (bit 0) against 1-4, 5-8 (bit 1).
pub fn example1() -> NetworkDesign {
    NetworkDesign {
        model: chen_section(),
        network: NetworkSection {
            nodes: 8,
            epsilon: 7.0,
            gamma: gamma_rows(),
            transmitter: vec![1, 4, 5, 8],
            receiver: vec![2, 3, 6, 7],
            control_links: vec![[1, 4], [4, 5], [5, 8], [1, 8]],
            noisy_links: None,
        },
        control: None,
        simulation: Some(SimulationSection::default()),
        symbol: vec![
            SymbolSection {
                bit: 0,
                pattern: vec![vec![1, 8], vec![2, 7], vec![3, 6], vec![4, 5]],
                xi: rows(&XI1, 8),
                symmetry: Some(vec![[1, 8], [2, 7], [3, 6], [4, 5]]),
                control_matrix: None,
            },
            SymbolSection {
                bit: 1,
                pattern: vec![vec![1, 4], vec![2, 3], vec![5, 8], vec![6, 7]],
                xi: rows(&XI2, 8),
                symmetry: Some(vec![[1, 4], [2, 3], [5, 8], [6, 7]]),
                control_matrix: None,
            },
        ],
    }
}

/// Five-node star pinned by three control nodes. Bit 0 couples control nodes
/// 1' and 2'; bit 1 uses the weights derived from the pattern {1,2},{3,4},{5}.
pub fn example2() -> NetworkDesign {
    let star = vec![
        vec![-1., 0., 0., 0., 1.],
        vec![0., -1., 0., 0., 1.],
        vec![0., 0., -1., 0., 1.],
        vec![0., 0., 0., -1., 1.],
        vec![1., 1., 1., 1., -4.],
    ];
    NetworkDesign {
        model: chen_section(),
        network: NetworkSection {
            nodes: 5,
            epsilon: 3.0,
            gamma: gamma_rows(),
            transmitter: vec![6, 7, 8],
            receiver: vec![1, 2, 3, 4, 5],
            control_links: vec![[6, 7], [6, 8], [7, 8]],
            noisy_links: None,
        },
        control: Some(ControlSection { alpha: 10.0, pin: vec![1, 1, 2, 2, 3] }),
        simulation: Some(SimulationSection {
            dt: 1e-3,
            sample_every: 50,
            spreading_factor: 500,
            detector: DetectionRule::Agreement,
        }),
        symbol: vec![
            SymbolSection {
                bit: 0,
                pattern: vec![vec![1, 2, 3, 4], vec![5]],
                xi: star.clone(),
                symmetry: None,
                control_matrix: Some(vec![vec![-20., 20., 0.], vec![20., -20., 0.], vec![0., 0., 0.]]),
            },
            SymbolSection {
                bit: 1,
                pattern: vec![vec![1, 2], vec![3, 4], vec![5]],
                xi: star,
                symmetry: None,
                control_matrix: Some(vec![vec![-1., 0., 1.], vec![0., -1., 1.], vec![2., 2., -4.]]),
            },
        ],
    }
}
