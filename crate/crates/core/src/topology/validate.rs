use nalgebra::SymmetricEigen;
use serde::Serialize;

use super::{CouplingTopology, SPECTRAL_TOL, STRUCT_TOL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Offending entries or eigenvalues, empty when passed.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
    /// Eigenvalues of the coupling matrix in decreasing order (when symmetric).
    pub eigenvalues: Vec<f64>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn outcome(name: &'static str, bad: Vec<String>) -> CheckOutcome {
    CheckOutcome { name, passed: bad.is_empty(), detail: bad.join(", ") }
}

/// Checks zero row sums, symmetry, non-negative off-diagonals, a 0/1 inner
/// coupling matrix and the spectrum `0 = l1 > l2 >= ... >= lN`.
/// Indices in the report are 1-based.
pub fn validate_topology(t: &CouplingTopology) -> ValidationReport {
    let xi = &t.xi;
    let n = t.n();
    let mut checks = Vec::new();

    let bad = (0..n)
        .filter_map(|i| {
            let s: f64 = xi.row(i).sum();
            (s.abs() > STRUCT_TOL).then(|| format!("row {} sums to {s}", i + 1))
        })
        .collect();
    checks.push(outcome("zero row sums", bad));

    let mut bad = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if (xi[(i, j)] - xi[(j, i)]).abs() > STRUCT_TOL {
                bad.push(format!("({},{})", i + 1, j + 1));
            }
        }
    }
    let symmetric = bad.is_empty();
    checks.push(outcome("symmetric", bad));

    let mut bad = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && xi[(i, j)] < -STRUCT_TOL {
                bad.push(format!("({},{}) = {}", i + 1, j + 1, xi[(i, j)]));
            }
        }
    }
    checks.push(outcome("non-negative off-diagonal", bad));

    let bad = t
        .gamma
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0 && **v != 1.0)
        .map(|(k, v)| format!("entry {k} = {v}"))
        .collect();
    checks.push(outcome("inner coupling is 0/1", bad));

    let mut eigenvalues = Vec::new();
    if symmetric {
        let eig = SymmetricEigen::new(xi.clone());
        eigenvalues = eig.eigenvalues.iter().copied().collect();
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let mut bad = Vec::new();
        if eigenvalues[0].abs() > SPECTRAL_TOL {
            bad.push(format!("largest eigenvalue {} is not 0", eigenvalues[0]));
        }
        if n > 1 && eigenvalues[1] > -SPECTRAL_TOL {
            bad.push(format!("second eigenvalue {} is not negative (disconnected)", eigenvalues[1]));
        }
        checks.push(outcome("spectrum 0 = l1 > l2", bad));
    } else {
        checks.push(outcome("spectrum 0 = l1 > l2", vec!["not computed: matrix not symmetric".into()]));
    }

    ValidationReport { checks, eigenvalues }
}
