//! Coupling matrices, symmetries, spectral stability analysis, control
//! networks, design-requirement checks and the network description file.

mod control;
mod design;
mod pattern;
mod requirements;
mod spectral;
mod validate;

pub use control::{alpha_thresholds, control_weights, AlphaRegime, AlphaThresholds, ControlNetwork};
pub use design::{
    example1, example2, ControlSection, Design, ModelSection, NetworkDesign, NetworkSection, SimulationSection,
    SymbolConfig, SymbolSection,
};
pub use pattern::{is_symmetry, pattern_from_symmetry, ClusterPattern, PermutationSymmetry};
pub use requirements::{check_requirements, RequirementCheck, RequirementInput, RequirementReport};
pub use spectral::{block_diagonalize, check_eigenvalue_condition, epsilon_range, SpectralSplit, TransverseBlock};
pub use validate::{validate_topology, CheckOutcome, ValidationReport};

use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance for structural checks (row sums, symmetry, permutation identities).
pub const STRUCT_TOL: f64 = 1e-9;
/// Tolerance for spectral comparisons.
pub const SPECTRAL_TOL: f64 = 1e-8;

/// Outer coupling matrix, inner coupling matrix and coupling strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingTopology {
    pub xi: DMatrix<f64>,
    pub gamma: Matrix3<f64>,
    pub epsilon: f64,
}

impl CouplingTopology {
    pub fn new(xi: DMatrix<f64>, gamma: Matrix3<f64>, epsilon: f64) -> Result<Self> {
        if xi.nrows() != xi.ncols() || xi.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "coupling matrix must be square and nonempty, got {}x{}",
                xi.nrows(),
                xi.ncols()
            )));
        }
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::invalid(format!("coupling strength {epsilon} must be >= 0")));
        }
        Ok(CouplingTopology { xi, gamma, epsilon })
    }

    pub fn n(&self) -> usize {
        self.xi.nrows()
    }

    /// Undirected links `(i, j)` with `i < j` and nonzero weight.
    pub fn links(&self) -> Vec<(usize, usize)> {
        links_of(&self.xi)
    }
}

pub(crate) fn links_of(m: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let n = m.nrows();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if m[(i, j)].abs() > STRUCT_TOL || m[(j, i)].abs() > STRUCT_TOL {
                out.push((i, j));
            }
        }
    }
    out
}

/// Builds a dense matrix from row vectors.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Dimension("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}
