use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sde::{sde_step, wiener_pair, NoiseColumns, SdeScheme, SdeWork};
use super::trajectory::Trajectory;
use crate::dynsys::{check_bound, rk4_step, NodeModel, Rk4Work, DEFAULT_DIVERGENCE_BOUND};
use crate::rng::{rng_from_seed, SimRng};
use crate::topology::{ControlNetwork, CouplingTopology};
use crate::{Error, Result};

/// Node states `x` (N x 3), control-node states `xc` (L x 3) and time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub x: Vec<[f64; 3]>,
    pub xc: Vec<[f64; 3]>,
    pub t: f64,
}

impl NetworkState {
    pub fn new(x: Vec<[f64; 3]>, xc: Vec<[f64; 3]>) -> Self {
        NetworkState { x, xc, t: 0.0 }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.x.iter().chain(self.xc.iter()).flat_map(|v| v.iter().copied()).collect()
    }

    pub fn from_flat(v: &[f64], n: usize, t: f64) -> Self {
        let nodes: Vec<[f64; 3]> = v.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        NetworkState { x: nodes[..n].to_vec(), xc: nodes[n..].to_vec(), t }
    }
}

/// Independent uniform `[-5, 5]^3` start for `n` nodes and `l` control nodes.
pub fn random_state(n: usize, l: usize, rng: &mut SimRng) -> NetworkState {
    let mut draw = |k: usize| -> Vec<[f64; 3]> {
        (0..k)
            .map(|_| [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)])
            .collect()
    };
    let x = draw(n);
    let xc = draw(l);
    NetworkState::new(x, xc)
}

type Sparse = Vec<Vec<(usize, f64)>>;

fn sparse_rows(m: &nalgebra::DMatrix<f64>, scale: f64) -> Sparse {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).filter(|&j| m[(i, j)] != 0.0).map(|j| (j, scale * m[(i, j)])).collect())
        .collect()
}

/// Compiled right-hand side of a (possibly pinned) network.
#[derive(Debug, Clone)]
pub struct NetSystem {
    pub model: NodeModel,
    n: usize,
    l: usize,
    /// Nonzero `(row, col, weight)` entries of the inner coupling matrix.
    gamma: Vec<(usize, usize, f64)>,
    /// Off-diagonal `eps * xi` by rows.
    coupling: Sparse,
    /// `eps * (row sum of xi)`; zero for diffusive coupling.
    row_sums: Vec<f64>,
    /// `A` by rows.
    control: Sparse,
    /// `(control node, alpha * eps)` per network node.
    pins: Vec<(usize, f64)>,
    /// Per-component gain of a scalar increment pushed through `gamma`.
    noise_dir: [f64; 3],
    xi_weights: nalgebra::DMatrix<f64>,
    epsilon: f64,
    alpha: f64,
    pin_groups: Vec<Vec<usize>>,
}

impl NetSystem {
    pub fn new(model: NodeModel, topo: &CouplingTopology, ctrl: Option<&ControlNetwork>) -> Result<Self> {
        let n = topo.n();
        if topo.xi.ncols() != n {
            return Err(Error::Dimension("coupling matrix must be square".into()));
        }
        let g = &topo.gamma;
        let gamma: Vec<(usize, usize, f64)> = (0..3)
            .flat_map(|r| (0..3).map(move |c| (r, c)))
            .filter(|&(r, c)| g[(r, c)] != 0.0)
            .map(|(r, c)| (r, c, g[(r, c)]))
            .collect();
        let noise_dir = [g.row(0).sum(), g.row(1).sum(), g.row(2).sum()];
        let (l, control, pins, alpha, pin_groups) = match ctrl {
            None => (0, Vec::new(), Vec::new(), 0.0, Vec::new()),
            Some(c) => {
                if c.pin.len() != n {
                    return Err(Error::Dimension(format!("pin map has {} entries for {n} nodes", c.pin.len())));
                }
                let l = c.l();
                let pins = c.pin.iter().map(|&k| (k, c.alpha * topo.epsilon)).collect();
                let mut groups = vec![Vec::new(); l];
                for (i, &k) in c.pin.iter().enumerate() {
                    groups[k].push(i);
                }
                (l, sparse_rows(&c.a, 1.0), pins, c.alpha, groups)
            }
        };
        Ok(NetSystem {
            model,
            n,
            l,
            gamma,
            coupling: sparse_rows(&topo.xi, topo.epsilon)
                .into_iter()
                .enumerate()
                .map(|(i, row)| row.into_iter().filter(|&(j, _)| j != i).collect())
                .collect(),
            row_sums: (0..n).map(|i| topo.epsilon * topo.xi.row(i).sum()).collect(),
            control,
            pins,
            noise_dir,
            xi_weights: topo.xi.clone(),
            epsilon: topo.epsilon,
            alpha,
            pin_groups,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn dim(&self) -> usize {
        3 * (self.n + self.l)
    }

    #[inline]
    pub fn rhs(&self, x: &[f64], d: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let xi = &x[3 * i..3 * i + 3];
            self.model.flow(xi, &mut d[3 * i..3 * i + 3]);
            // Differences keep identical states exactly synchronized.
            for &(j, w) in &self.coupling[i] {
                for &(r, c, g) in &self.gamma {
                    d[3 * i + r] += w * g * (x[3 * j + c] - x[3 * i + c]);
                }
            }
            let rs = self.row_sums[i];
            if rs != 0.0 {
                for &(r, c, g) in &self.gamma {
                    d[3 * i + r] += rs * g * x[3 * i + c];
                }
            }
            if let Some(&(k, s)) = self.pins.get(i) {
                let b = 3 * (n + k);
                for &(r, c, g) in &self.gamma {
                    d[3 * i + r] += s * g * x[b + c];
                }
            }
        }
        for k in 0..self.l {
            let b = 3 * (n + k);
            self.model.flow(&x[b..b + 3], &mut d[b..b + 3]);
            for &(m, a) in &self.control[k] {
                for &(r, c, g) in &self.gamma {
                    d[b + r] += a * g * x[3 * (n + m) + c];
                }
            }
        }
    }

    fn check_state(&self, s: &NetworkState) -> Result<()> {
        if s.x.len() != self.n || s.xc.len() != self.l {
            return Err(Error::Dimension(format!(
                "state has {}+{} nodes, system expects {}+{}",
                s.x.len(),
                s.xc.len(),
                self.n,
                self.l
            )));
        }
        Ok(())
    }

    /// Diffusion columns for the requested noise sources.
    pub fn noise_columns(&self, noise: &NoiseConfig) -> Result<NoiseColumns> {
        let mut cols = Vec::new();
        let dir = self.noise_dir;
        let push = |col: &mut Vec<(usize, f64)>, node: usize, gain: f64| {
            for (r, &d) in dir.iter().enumerate() {
                if d != 0.0 && gain != 0.0 {
                    col.push((3 * node + r, gain * d));
                }
            }
        };
        for src in &noise.sources {
            match *src {
                NoiseSource::Link { i, j } => {
                    if i >= self.n || j >= self.n || i == j {
                        return Err(Error::invalid(format!("noisy link ({}, {}) is not a node pair", i + 1, j + 1)));
                    }
                    let w = self.xi_weights[(i, j)];
                    if w == 0.0 {
                        return Err(Error::invalid(format!("noisy link ({}, {}) is absent", i + 1, j + 1)));
                    }
                    let eps = if noise.epsilon_scaled_links { self.epsilon } else { 1.0 };
                    let gain = noise.sigma * eps * w;
                    let mut col = Vec::new();
                    push(&mut col, i, gain);
                    push(&mut col, j, -gain);
                    cols.push(col);
                }
                NoiseSource::Pins => {
                    if self.l == 0 {
                        return Err(Error::invalid("pin noise requested without a control network"));
                    }
                    let gain = self.alpha * self.epsilon * noise.sigma;
                    match noise.pin_noise {
                        PinNoise::PerControlNode => {
                            for group in &self.pin_groups {
                                let mut col = Vec::new();
                                for &i in group {
                                    push(&mut col, i, gain);
                                }
                                cols.push(col);
                            }
                        }
                        PinNoise::PerPinLink => {
                            for i in 0..self.n {
                                let mut col = Vec::new();
                                push(&mut col, i, gain);
                                cols.push(col);
                            }
                        }
                    }
                }
            }
        }
        Ok(cols)
    }
}

/// Derivative of the whole network at `s`.
pub fn network_rhs(
    model: &NodeModel,
    s: &NetworkState,
    topo: &CouplingTopology,
    ctrl: Option<&ControlNetwork>,
) -> Result<NetworkState> {
    let sys = NetSystem::new(*model, topo, ctrl)?;
    sys.check_state(s)?;
    let x = s.flat();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("network state"));
    }
    let mut d = vec![0.0; x.len()];
    sys.rhs(&x, &mut d);
    Ok(NetworkState::from_flat(&d, sys.n, s.t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub dt: f64,
    pub sample_every: usize,
    pub divergence_bound: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { dt: 1e-3, sample_every: 1, divergence_bound: DEFAULT_DIVERGENCE_BOUND }
    }
}

impl SimOptions {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.sample_every == 0 {
            return Err(Error::invalid("sample_every must be at least 1"));
        }
        Ok(())
    }
}

/// Where Wiener increments enter the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseSource {
    /// Scalar process on the coupling link between nodes `i` and `j`
    /// (0-based), entering the two ends with opposite signs.
    Link { i: usize, j: usize },
    /// Processes on the pin links.
    Pins,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PinNoise {
    /// One process per control node, shared by the nodes it drives.
    #[default]
    PerControlNode,
    /// One independent process per pinned node.
    PerPinLink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub sigma: f64,
    pub sources: Vec<NoiseSource>,
    pub seed: u64,
    pub scheme: SdeScheme,
    pub pin_noise: PinNoise,
    /// Multiply link-noise gain by the coupling strength.
    pub epsilon_scaled_links: bool,
}

impl NoiseConfig {
    pub fn new(sigma: f64, sources: Vec<NoiseSource>, seed: u64) -> Self {
        NoiseConfig {
            sigma,
            sources,
            seed,
            scheme: SdeScheme::default(),
            pin_noise: PinNoise::default(),
            epsilon_scaled_links: false,
        }
    }

    pub fn links(sigma: f64, links: &[(usize, usize)], seed: u64) -> Self {
        Self::new(sigma, links.iter().map(|&(i, j)| NoiseSource::Link { i, j }).collect(), seed)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::invalid(format!("noise strength {} must be >= 0", self.sigma)));
        }
        Ok(())
    }
}

/// RK4 integration of the network; `n` steps, every `sample_every`-th stored.
pub fn integrate_network(sys: &NetSystem, s0: &NetworkState, n: usize, opts: &SimOptions) -> Result<Trajectory> {
    opts.validate()?;
    sys.check_state(s0)?;
    let mut x = s0.flat();
    let mut traj = Trajectory::with_capacity(sys.n, sys.l, n / opts.sample_every + 1);
    traj.push(s0.t, &x);
    let mut w = Rk4Work::new(x.len());
    let mut f = |x: &[f64], d: &mut [f64]| sys.rhs(x, d);
    for step in 1..=n {
        rk4_step(&mut f, &mut x, opts.dt, &mut w);
        if step % opts.sample_every == 0 {
            check_bound(&x, opts.divergence_bound, step)?;
            traj.push(s0.t + step as f64 * opts.dt, &x);
        }
    }
    check_bound(&x, opts.divergence_bound, n)?;
    Ok(traj)
}

/// Stochastic integration with increments drawn from `rng`; continues an
/// existing stream so that consecutive segments share one generator.
pub fn integrate_sde_with_rng(
    sys: &NetSystem,
    s0: &NetworkState,
    noise: &NoiseConfig,
    n: usize,
    opts: &SimOptions,
    rng: &mut SimRng,
) -> Result<Trajectory> {
    opts.validate()?;
    noise.validate()?;
    sys.check_state(s0)?;
    let cols = sys.noise_columns(noise)?;
    let m = cols.len();
    let mut x = s0.flat();
    let mut traj = Trajectory::with_capacity(sys.n, sys.l, n / opts.sample_every + 1);
    traj.push(s0.t, &x);
    let mut w = SdeWork::new(x.len());
    let mut dw = vec![0.0; m];
    let mut i10 = vec![0.0; m];
    let h = opts.dt;
    let mut f = |x: &[f64], d: &mut [f64]| sys.rhs(x, d);
    for step in 1..=n {
        for k in 0..m {
            let (a, b) = wiener_pair(rng, h);
            dw[k] = a;
            i10[k] = b;
        }
        sde_step(&mut f, &mut x, h, &cols, &dw, &i10, noise.scheme, &mut w);
        if step % opts.sample_every == 0 {
            check_bound(&x, opts.divergence_bound, step)?;
            traj.push(s0.t + step as f64 * h, &x);
        }
    }
    check_bound(&x, opts.divergence_bound, n)?;
    Ok(traj)
}

/// Stochastic integration seeded from `noise.seed`.
pub fn integrate_network_sde(
    sys: &NetSystem,
    s0: &NetworkState,
    noise: &NoiseConfig,
    n: usize,
    opts: &SimOptions,
) -> Result<Trajectory> {
    let mut rng = rng_from_seed(noise.seed);
    integrate_sde_with_rng(sys, s0, noise, n, opts, &mut rng)
}
