use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::STRUCT_TOL;
use crate::{Error, Result};

/// Partition of nodes `0..n` into ordered, disjoint, nonempty clusters.
/// Stored 0-based; displayed 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterPattern {
    clusters: Vec<Vec<usize>>,
    n: usize,
}

impl ClusterPattern {
    pub fn new(clusters: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for c in &clusters {
            if c.is_empty() {
                return Err(Error::InvalidPattern("empty cluster".into()));
            }
            for &i in c {
                if i >= n {
                    return Err(Error::InvalidPattern(format!("node {} out of range", i + 1)));
                }
                if seen[i] {
                    return Err(Error::InvalidPattern(format!("node {} in two clusters", i + 1)));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPattern(format!("node {} not covered", i + 1)));
        }
        Ok(ClusterPattern { clusters, n })
    }

    /// Clusters given with 1-based node labels.
    pub fn from_one_based(clusters: &[Vec<usize>], n: usize) -> Result<Self> {
        let mut zero = Vec::with_capacity(clusters.len());
        for c in clusters {
            let mut v = Vec::with_capacity(c.len());
            for &i in c {
                if i == 0 {
                    return Err(Error::InvalidPattern("node labels are 1-based".into()));
                }
                v.push(i - 1);
            }
            zero.push(v);
        }
        Self::new(zero, n)
    }

    pub fn singletons(n: usize) -> Self {
        ClusterPattern { clusters: (0..n).map(|i| vec![i]).collect(), n }
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.clusters.iter().map(|c| c.iter().map(|i| i + 1).collect()).collect()
    }

    /// Cluster index of every node.
    pub fn labels(&self) -> Vec<usize> {
        let mut l = vec![0; self.n];
        for (k, c) in self.clusters.iter().enumerate() {
            for &i in c {
                l[i] = k;
            }
        }
        l
    }

    pub fn same_cluster(&self, i: usize, j: usize) -> bool {
        let l = self.labels();
        l[i] == l[j]
    }

    /// Partition equality, ignoring the order of clusters and of members.
    pub fn same_partition(&self, other: &ClusterPattern) -> bool {
        self.canonical() == other.canonical()
    }

    fn canonical(&self) -> Vec<Vec<usize>> {
        let mut c: Vec<Vec<usize>> = self
            .clusters
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.sort_unstable();
                c
            })
            .collect();
        c.sort();
        c
    }

    /// All `(i, j)` with `i < j` in a common cluster.
    pub fn intra_pairs(&self) -> Vec<(usize, usize)> {
        let l = self.labels();
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if l[i] == l[j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// All `(i, j)` with `i < j` in different clusters.
    pub fn inter_pairs(&self) -> Vec<(usize, usize)> {
        let l = self.labels();
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if l[i] != l[j] {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

impl fmt::Display for ClusterPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, c) in self.clusters.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{{")?;
            for (m, i) in c.iter().enumerate() {
                if m > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", i + 1)?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

/// Node permutation `i -> perm[i]`, stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationSymmetry {
    perm: Vec<usize>,
}

impl PermutationSymmetry {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidSymmetry(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        Ok(PermutationSymmetry { perm })
    }

    pub fn identity(n: usize) -> Self {
        PermutationSymmetry { perm: (0..n).collect() }
    }

    /// Product of disjoint transpositions given as 1-based pairs.
    pub fn from_transpositions(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for &(a, b) in pairs {
            if a == 0 || b == 0 || a > n || b > n || a == b {
                return Err(Error::InvalidSymmetry(format!("bad transposition ({a} {b})")));
            }
            let (a, b) = (a - 1, b - 1);
            if touched[a] || touched[b] {
                return Err(Error::InvalidSymmetry("transpositions must be disjoint".into()));
            }
            touched[a] = true;
            touched[b] = true;
            perm.swap(a, b);
        }
        Ok(PermutationSymmetry { perm })
    }

    /// Reads a 0/1 matrix with exactly one 1 per row and column; row `i`
    /// has its 1 in column `perm[i]`.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension("permutation matrix must be square".into()));
        }
        let n = m.nrows();
        let mut perm = Vec::with_capacity(n);
        for i in 0..n {
            let mut col = None;
            for j in 0..n {
                let v = m[(i, j)];
                if v == 1.0 {
                    if col.is_some() {
                        return Err(Error::InvalidSymmetry(format!("row {} has two ones", i + 1)));
                    }
                    col = Some(j);
                } else if v != 0.0 {
                    return Err(Error::InvalidSymmetry(format!("entry ({},{}) is not 0/1", i + 1, j + 1)));
                }
            }
            perm.push(col.ok_or_else(|| Error::InvalidSymmetry(format!("row {} has no one", i + 1)))?);
        }
        Self::new(perm)
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.perm.len();
        DMatrix::from_fn(n, n, |i, j| if self.perm[i] == j { 1.0 } else { 0.0 })
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn image(&self, i: usize) -> usize {
        self.perm[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    pub fn is_involution(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| self.perm[p] == i)
    }

    pub fn compose(&self, other: &PermutationSymmetry) -> Result<PermutationSymmetry> {
        if self.n() != other.n() {
            return Err(Error::Dimension("permutation sizes differ".into()));
        }
        Ok(PermutationSymmetry { perm: (0..self.n()).map(|i| self.perm[other.perm[i]]).collect() })
    }

    /// 2-cycles as 1-based pairs `(i, j)` with `i < j`.
    pub fn transpositions(&self) -> Vec<(usize, usize)> {
        (0..self.n())
            .filter(|&i| self.perm[i] > i && self.perm[self.perm[i]] == i)
            .map(|i| (i + 1, self.perm[i] + 1))
            .collect()
    }
}

/// `true` iff `delta * xi * delta^T == xi` entrywise. For an involution this
/// is the same as `delta * xi * delta == xi`.
pub fn is_symmetry(xi: &DMatrix<f64>, delta: &PermutationSymmetry) -> Result<bool> {
    let n = xi.nrows();
    if xi.ncols() != n || delta.n() != n {
        return Err(Error::Dimension(format!(
            "coupling matrix {}x{} vs permutation of size {}",
            xi.nrows(),
            xi.ncols(),
            delta.n()
        )));
    }
    let p = delta.as_slice();
    for i in 0..n {
        for j in 0..n {
            if (xi[(p[i], p[j])] - xi[(i, j)]).abs() > 1e-12 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Orbits of an involution, ordered by smallest member: 2-cycles become pairs
/// and fixed points singletons.
pub fn pattern_from_symmetry(delta: &PermutationSymmetry) -> Result<ClusterPattern> {
    if !delta.is_involution() {
        return Err(Error::InvalidSymmetry("permutation is not an involution".into()));
    }
    let n = delta.n();
    let mut clusters = Vec::new();
    for i in 0..n {
        let j = delta.image(i);
        if j == i {
            clusters.push(vec![i]);
        } else if j > i {
            clusters.push(vec![i, j]);
        }
    }
    ClusterPattern::new(clusters, n)
}

// Used by the spectral code to decide which entries are structurally zero.
pub(crate) fn nearly_zero(v: f64) -> bool {
    v.abs() <= STRUCT_TOL
}
