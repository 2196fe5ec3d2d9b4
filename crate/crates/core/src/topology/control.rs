use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::pattern::ClusterPattern;
use crate::{Error, Result};

/// Auxiliary control nodes pinned onto the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlNetwork {
    /// L x L coupling among control nodes.
    pub a: DMatrix<f64>,
    /// Control node driving each network node (0-based).
    pub pin: Vec<usize>,
    pub alpha: f64,
}

impl ControlNetwork {
    pub fn new(a: DMatrix<f64>, pin: Vec<usize>, alpha: f64) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(Error::Dimension("control matrix must be square and nonempty".into()));
        }
        if let Some(&p) = pin.iter().find(|&&p| p >= a.nrows()) {
            return Err(Error::Dimension(format!("pin target {} exceeds {} control nodes", p + 1, a.nrows())));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::invalid(format!("control strength {alpha} must be >= 0")));
        }
        Ok(ControlNetwork { a, pin, alpha })
    }

    pub fn l(&self) -> usize {
        self.a.nrows()
    }

    /// N x L interconnection matrix with a single 1 per row.
    pub fn pin_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.pin.len(), self.l(), |i, k| if self.pin[i] == k { 1.0 } else { 0.0 })
    }
}

/// `omega_kl = (sum over i in G_k, j in G_l of xi_ij) / |G_k|`.
pub fn control_weights(xi: &DMatrix<f64>, pattern: &ClusterPattern) -> Result<DMatrix<f64>> {
    if xi.nrows() != pattern.n() || xi.ncols() != pattern.n() {
        return Err(Error::Dimension("pattern does not cover the coupling matrix".into()));
    }
    let cl = pattern.clusters();
    Ok(DMatrix::from_fn(cl.len(), cl.len(), |k, l| {
        let s: f64 = cl[k].iter().flat_map(|&i| cl[l].iter().map(move |&j| xi[(i, j)])).sum();
        s / cl[k].len() as f64
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphaRegime {
    /// `alpha <= alpha1`.
    Insufficient,
    /// `alpha1 < alpha <= alpha2`: strong enough to induce the pattern.
    Induces,
    /// `alpha > alpha2`: strong enough to control it.
    Controls,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaThresholds {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl AlphaThresholds {
    pub fn regime(&self, alpha: f64) -> AlphaRegime {
        if alpha > self.alpha2 {
            AlphaRegime::Controls
        } else if alpha > self.alpha1 {
            AlphaRegime::Induces
        } else {
            AlphaRegime::Insufficient
        }
    }
}

/// `alpha1 = |eta_bar| / eps - lambda_min`, `alpha2 = |eta_bar| / eps`.
pub fn alpha_thresholds(eta_bar: f64, epsilon: f64, lambda_min: f64) -> Result<AlphaThresholds> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid(format!("coupling strength must be positive, got {epsilon}")));
    }
    let alpha2 = eta_bar.abs() / epsilon;
    Ok(AlphaThresholds { alpha1: alpha2 - lambda_min, alpha2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{example1, example2};
    use proptest::prelude::*;

    #[test]
    fn example_two_weights() {
        let d = example2().to_design().unwrap();
        let s = &d.symbols[1];
        assert_eq!(s.pattern.to_one_based(), vec![vec![1, 2], vec![3, 4], vec![5]]);
        let w = control_weights(&s.xi, &s.pattern).unwrap();
        let want = DMatrix::from_row_slice(3, 3, &[-1., 0., 1., 0., -1., 1., 2., 2., -4.]);
        assert_eq!(w, want);
        assert_eq!(&want, s.control_matrix.as_ref().unwrap());
    }

    #[test]
    fn single_cluster_collapses() {
        let d = example1().to_design().unwrap();
        let all = ClusterPattern::new(vec![(0..8).collect()], 8).unwrap();
        let w = control_weights(&d.symbols[0].xi, &all).unwrap();
        assert_eq!(w.shape(), (1, 1));
        assert!(w[(0, 0)].abs() < 1e-12);
    }

    #[test]
    fn thresholds() {
        let t = alpha_thresholds(-10.5, 3.0, 0.0).unwrap();
        assert_eq!(t.alpha1, t.alpha2);
        let a = alpha_thresholds(-10.5, 3.0, 1.0).unwrap();
        let b = alpha_thresholds(-10.5, 6.0, 1.0).unwrap();
        assert!((b.alpha2 - a.alpha2 / 2.0).abs() < 1e-12);
        assert_eq!(a.regime(3.0), AlphaRegime::Induces);
        assert_eq!(a.regime(4.0), AlphaRegime::Controls);
        assert_eq!(a.regime(1.0), AlphaRegime::Insufficient);
        assert!(alpha_thresholds(-10.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn pin_matrix_rows() {
        let c = ControlNetwork::new(DMatrix::zeros(3, 3), vec![0, 0, 1, 1, 2], 10.0).unwrap();
        let p = c.pin_matrix();
        for i in 0..5 {
            assert_eq!(p.row(i).sum(), 1.0);
        }
        assert!(ControlNetwork::new(DMatrix::zeros(2, 2), vec![2], 1.0).is_err());
    }

    proptest! {
        #[test]
        fn weights_have_zero_row_sums(
            w in proptest::collection::vec(0.0..5.0f64, 15),
            labels in proptest::collection::vec(0usize..3, 6),
        ) {
            // Random weighted graph on 6 nodes turned into a diffusive matrix.
            let mut xi = DMatrix::zeros(6, 6);
            let mut k = 0;
            for i in 0..6 {
                for j in i + 1..6 {
                    xi[(i, j)] = w[k];
                    xi[(j, i)] = w[k];
                    k += 1;
                }
            }
            for i in 0..6 {
                let s: f64 = xi.row(i).sum();
                xi[(i, i)] = -s;
            }
            let mut clusters: Vec<Vec<usize>> = vec![vec![]; 3];
            for (i, &l) in labels.iter().enumerate() {
                clusters[l].push(i);
            }
            clusters.retain(|c| !c.is_empty());
            let p = ClusterPattern::new(clusters, 6).unwrap();
            let om = control_weights(&xi, &p).unwrap();
            for r in 0..om.nrows() {
                prop_assert!(om.row(r).sum().abs() < 1e-9);
            }
        }
    }
}
