use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::pattern::{is_symmetry, nearly_zero, pattern_from_symmetry, ClusterPattern, PermutationSymmetry};
use super::{SPECTRAL_TOL, STRUCT_TOL};
use crate::{Error, Result};

/// One connected block of the transverse part.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransverseBlock {
    /// Indices (into the transverse coordinates) spanned by this block.
    pub coordinates: Vec<usize>,
    pub matrix: DMatrix<f64>,
    /// Decreasing order; the first entry is the block's least stable mode.
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSplit {
    /// Orthogonal change of basis, transverse columns first.
    pub psi: DMatrix<f64>,
    /// `psi^T xi psi`, block diagonal.
    pub theta: DMatrix<f64>,
    pub transverse: Vec<TransverseBlock>,
    /// Synchronous block.
    pub phi: DMatrix<f64>,
    /// Decreasing order; the first entry is 0.
    pub sync_eigenvalues: Vec<f64>,
    pub lambda_min: f64,
}

impl SpectralSplit {
    pub fn transverse_eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.transverse.iter().flat_map(|b| b.eigenvalues.iter().copied()).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Second synchronous eigenvalue, absent when there is a single cluster.
    pub fn lambda_s2(&self) -> Option<f64> {
        self.sync_eigenvalues.get(1).copied()
    }

    /// `psi * theta * psi^T`, which equals the original coupling matrix.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.psi * &self.theta * self.psi.transpose()
    }
}

/// Splits `xi` into the transverse and synchronous subspaces of the
/// involution `delta`. `pattern` must be the orbit partition of `delta`.
pub fn block_diagonalize(
    xi: &DMatrix<f64>,
    delta: &PermutationSymmetry,
    pattern: &ClusterPattern,
) -> Result<SpectralSplit> {
    let n = xi.nrows();
    if !is_symmetry(xi, delta)? {
        return Err(Error::InvalidSymmetry("permutation does not preserve the coupling matrix".into()));
    }
    if (xi - xi.transpose()).abs().max() > STRUCT_TOL {
        return Err(Error::Decomposition("coupling matrix is not symmetric".into()));
    }
    let orbits = pattern_from_symmetry(delta)?;
    if pattern.n() != n || !orbits.same_partition(pattern) {
        return Err(Error::InvalidPattern(format!("pattern {pattern} does not match the symmetry orbits {orbits}")));
    }

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut trans_cols: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut sync_cols: Vec<Vec<(usize, f64)>> = Vec::new();
    for c in pattern.clusters() {
        match c.as_slice() {
            [k] => sync_cols.push(vec![(*k, 1.0)]),
            [i, j] => {
                let (i, j) = ((*i).min(*j), (*i).max(*j));
                trans_cols.push(vec![(i, h), (j, -h)]);
                sync_cols.push(vec![(i, h), (j, h)]);
            }
            _ => unreachable!("orbits of an involution have at most two nodes"),
        }
    }
    let nt = trans_cols.len();
    let mut psi = DMatrix::zeros(n, n);
    for (col, entries) in trans_cols.iter().chain(sync_cols.iter()).enumerate() {
        for &(row, v) in entries {
            psi[(row, col)] = v;
        }
    }
    let theta = psi.transpose() * xi * &psi;

    for i in 0..nt {
        for j in nt..n {
            if !nearly_zero(theta[(i, j)]) || !nearly_zero(theta[(j, i)]) {
                return Err(Error::Decomposition(format!(
                    "transverse and synchronous parts are coupled at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }

    let omega = theta.view((0, 0), (nt, nt)).into_owned();
    let phi = theta.view((nt, nt), (n - nt, n - nt)).into_owned();

    let transverse: Vec<TransverseBlock> = components(&omega)
        .into_iter()
        .map(|coords| {
            let m = DMatrix::from_fn(coords.len(), coords.len(), |a, b| omega[(coords[a], coords[b])]);
            let eigenvalues = sorted_eigenvalues(&m);
            TransverseBlock { coordinates: coords, matrix: m, eigenvalues }
        })
        .collect();

    let sync_eigenvalues = sorted_eigenvalues(&phi);
    if sync_eigenvalues[0].abs() > SPECTRAL_TOL {
        return Err(Error::Decomposition(format!(
            "largest synchronous eigenvalue is {} rather than 0",
            sync_eigenvalues[0]
        )));
    }
    let lambda_min = transverse.iter().map(|b| b.eigenvalues[0].abs()).fold(f64::INFINITY, f64::min);

    Ok(SpectralSplit { psi, theta, transverse, phi, sync_eigenvalues, lambda_min })
}

fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Connected components of the off-diagonal sparsity graph.
fn components(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut label = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![s];
        let mut comp = Vec::new();
        label[s] = id;
        while let Some(u) = stack.pop() {
            comp.push(u);
            for v in 0..n {
                if v != u && label[v] == usize::MAX && (!nearly_zero(m[(u, v)]) || !nearly_zero(m[(v, u)])) {
                    label[v] = id;
                    stack.push(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Strict `|lambda_s2| < lambda_min`. A single synchronous mode has no
/// `lambda_s2` and passes whenever `lambda_min > 0`.
pub fn check_eigenvalue_condition(split: &SpectralSplit) -> bool {
    let s2 = split.lambda_s2().map_or(0.0, f64::abs);
    split.lambda_min > 0.0 && s2 < split.lambda_min
}

/// Admissible coupling strengths `[|eta_bar| / lambda_min, |eta_bar| / |lambda_s2|]`.
pub fn epsilon_range(eta_bar: f64, split: &SpectralSplit) -> Result<(f64, f64)> {
    if !eta_bar.is_finite() || eta_bar >= 0.0 {
        return Err(Error::invalid(format!("stability threshold must be negative, got {eta_bar}")));
    }
    if !check_eigenvalue_condition(split) {
        return Err(Error::NoEpsilonRange {
            lambda_s2: split.lambda_s2().map_or(0.0, f64::abs),
            lambda_min: split.lambda_min,
        });
    }
    let e = eta_bar.abs();
    let upper = split.lambda_s2().map_or(f64::INFINITY, |s| e / s.abs());
    Ok((e / split.lambda_min, upper))
}
