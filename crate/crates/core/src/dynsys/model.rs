use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Chen oscillator parameters. State dimension is always 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeModel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl NodeModel {
    pub const DIM: usize = 3;

    /// a = 35, b = 8/3, c = 28.
    pub fn chen() -> Self {
        NodeModel { a: 35.0, b: 8.0 / 3.0, c: 28.0 }
    }

    /// Vector field without input validation, written into `out`.
    #[inline(always)]
    pub fn flow(&self, x: &[f64], out: &mut [f64]) {
        let (x1, x2, x3) = (x[0], x[1], x[2]);
        out[0] = self.a * (x2 - x1);
        out[1] = x1 * (self.c - self.a - x3) + self.c * x2;
        out[2] = x1 * x2 - self.b * x3;
    }

    #[inline(always)]
    pub fn jacobian_unchecked(&self, x: &[f64]) -> Matrix3<f64> {
        let (x1, x2, x3) = (x[0], x[1], x[2]);
        Matrix3::new(-self.a, self.a, 0.0, self.c - self.a - x3, self.c, -x1, x2, x1, -self.b)
    }
}

impl Default for NodeModel {
    fn default() -> Self {
        Self::chen()
    }
}

fn check_finite(x: &Vector3<f64>) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain("node state"))
    }
}

pub fn chen_flow(x: &Vector3<f64>, m: &NodeModel) -> Result<Vector3<f64>> {
    check_finite(x)?;
    let mut out = Vector3::zeros();
    m.flow(x.as_slice(), out.as_mut_slice());
    Ok(out)
}

pub fn chen_jacobian(x: &Vector3<f64>, m: &NodeModel) -> Result<Matrix3<f64>> {
    check_finite(x)?;
    Ok(m.jacobian_unchecked(x.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn origin_is_fixed() {
        let f = chen_flow(&Vector3::zeros(), &NodeModel::chen()).unwrap();
        assert_eq!(f, Vector3::zeros());
    }

    #[test]
    fn flow_at_ones() {
        let f = chen_flow(&Vector3::new(1.0, 1.0, 1.0), &NodeModel::chen()).unwrap();
        assert!((f[0] - 0.0).abs() < 1e-14);
        assert!((f[1] - 20.0).abs() < 1e-14);
        assert!((f[2] + 5.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn nontrivial_equilibrium() {
        let m = NodeModel::chen();
        // x3 = 2c - a, x1^2 = b x3
        let x3 = 2.0 * m.c - m.a;
        let x1 = (m.b * x3).sqrt();
        assert!((x1 - 56f64.sqrt()).abs() < 1e-12);
        let f = chen_flow(&Vector3::new(x1, x1, x3), &m).unwrap();
        assert!(f.norm() < 1e-12, "{f}");
    }

    #[test]
    fn jacobian_at_origin() {
        let j = chen_jacobian(&Vector3::zeros(), &NodeModel::chen()).unwrap();
        let want = Matrix3::new(-35.0, 35.0, 0.0, -7.0, 28.0, 0.0, 0.0, 0.0, -8.0 / 3.0);
        assert!((j - want).abs().max() < 1e-14);
    }

    #[test]
    fn non_finite_rejected() {
        let m = NodeModel::chen();
        assert!(matches!(chen_flow(&Vector3::new(f64::NAN, 0.0, 0.0), &m), Err(Error::Domain(_))));
        assert!(chen_jacobian(&Vector3::new(0.0, f64::INFINITY, 0.0), &m).is_err());
    }

    fn finite_difference(x: Vector3<f64>, m: &NodeModel) -> Matrix3<f64> {
        let mut j = Matrix3::zeros();
        for k in 0..3 {
            let h = 1e-6 * (1.0 + x[k].abs());
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let col = (chen_flow(&xp, m).unwrap() - chen_flow(&xm, m).unwrap()) / (2.0 * h);
            j.set_column(k, &col);
        }
        j
    }

    proptest! {
        #[test]
        fn jacobian_matches_finite_differences(
            x1 in -100.0..100.0f64, x2 in -100.0..100.0f64, x3 in -100.0..100.0f64
        ) {
            let x = Vector3::new(x1, x2, x3);
            prop_assume!(x.norm() <= 100.0);
            let m = NodeModel::chen();
            let j = chen_jacobian(&x, &m).unwrap();
            let fd = finite_difference(x, &m);
            let scale = j.abs().max().max(1.0);
            prop_assert!((j - fd).abs().max() / scale < 1e-6);
        }

        #[test]
        fn jacobian_trace_is_constant(
            x1 in -50.0..50.0f64, x2 in -50.0..50.0f64, x3 in -50.0..50.0f64
        ) {
            let j = chen_jacobian(&Vector3::new(x1, x2, x3), &NodeModel::chen()).unwrap();
            prop_assert!((j.trace() + 29.0 / 3.0).abs() < 1e-12);
        }
    }
}
