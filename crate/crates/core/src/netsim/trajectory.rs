use std::io::Write;

use super::system::NetworkState;
use crate::{Error, Result};

/// Stored samples of a network run. Each sample holds `3 * (n + l)` values:
/// network nodes first, then control nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub n: usize,
    pub l: usize,
    pub times: Vec<f64>,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn with_capacity(n: usize, l: usize, samples: usize) -> Self {
        Trajectory { n, l, times: Vec::with_capacity(samples), data: Vec::with_capacity(samples * 3 * (n + l)) }
    }

    pub fn stride(&self) -> usize {
        3 * (self.n + self.l)
    }

    pub fn push(&mut self, t: f64, x: &[f64]) {
        debug_assert_eq!(x.len(), self.stride());
        self.times.push(t);
        self.data.extend_from_slice(x);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn sample(&self, k: usize) -> &[f64] {
        let s = self.stride();
        &self.data[k * s..(k + 1) * s]
    }

    /// State of node `i` (control nodes follow the network nodes) at sample `k`.
    pub fn node(&self, k: usize, i: usize) -> &[f64] {
        let b = k * self.stride() + 3 * i;
        &self.data[b..b + 3]
    }

    pub fn state(&self, k: usize) -> NetworkState {
        NetworkState::from_flat(self.sample(k), self.n, self.times[k])
    }

    pub fn last_state(&self) -> Option<NetworkState> {
        (!self.is_empty()).then(|| self.state(self.len() - 1))
    }

    /// Appends `other`, dropping its first sample when it repeats our last one.
    pub fn append(&mut self, other: &Trajectory) -> Result<()> {
        if other.n != self.n || other.l != self.l {
            return Err(Error::Dimension("trajectories of different networks".into()));
        }
        let skip = usize::from(!self.is_empty() && !other.is_empty() && other.times[0] == *self.times.last().unwrap());
        self.times.extend_from_slice(&other.times[skip..]);
        self.data.extend_from_slice(&other.data[skip * other.stride()..]);
        Ok(())
    }

    /// Long-format CSV: `t,node,component,value` with 1-based node and
    /// component labels, ordered by sample, node, component.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "node", "component", "value"])?;
        for k in 0..self.len() {
            let t = self.times[k].to_string();
            for i in 0..self.n + self.l {
                for (c, v) in self.node(k, i).iter().enumerate() {
                    wr.write_record([t.as_str(), &(i + 1).to_string(), &(c + 1).to_string(), &v.to_string()])?;
                }
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// `||x_i(t) - x_j(t)||` at every stored sample.
pub fn sync_error_series(traj: &Trajectory, i: usize, j: usize) -> Result<Vec<f64>> {
    let total = traj.n + traj.l;
    if i >= total || j >= total {
        return Err(Error::invalid(format!("node index out of range ({}, {})", i + 1, j + 1)));
    }
    if i == j {
        return Err(Error::invalid("error series needs two distinct nodes"));
    }
    Ok((0..traj.len())
        .map(|k| {
            let a = traj.node(k, i);
            let b = traj.node(k, j);
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
        })
        .collect())
}
