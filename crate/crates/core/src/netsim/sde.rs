//! Stochastic Runge-Kutta steps for SDEs with constant (additive) diffusion.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Sparse constant diffusion matrix, one column per Wiener process.
pub type NoiseColumns = Vec<Vec<(usize, f64)>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SdeScheme {
    /// Four-stage additive-noise SRK on the classical RK4 drift tableau;
    /// strong order 1.5, identical to RK4 when the noise vanishes.
    #[default]
    Sra4,
    /// Two-stage SRA1 tableau, strong order 1.5.
    Sra1,
    /// Euler-Maruyama, strong order 1.0 for additive noise.
    Euler,
}

/// Wiener increment and its time integral over one step.
pub fn wiener_pair<R: Rng>(rng: &mut R, h: f64) -> (f64, f64) {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    let dw = h.sqrt() * a;
    let i10 = 0.5 * h * h.sqrt() * (a + b / 3f64.sqrt());
    (dw, i10)
}

#[derive(Debug, Clone)]
pub struct SdeWork {
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
    gw: Vec<f64>,
    gi: Vec<f64>,
}

impl SdeWork {
    pub fn new(n: usize) -> Self {
        SdeWork {
            k: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            tmp: vec![0.0; n],
            gw: vec![0.0; n],
            gi: vec![0.0; n],
        }
    }
}

/// Advances `x` by one step of size `h` given the increments `dw` and their
/// time integrals `i10` for every noise column.
#[allow(clippy::too_many_arguments)]
pub fn sde_step<F>(
    rhs: &mut F,
    x: &mut [f64],
    h: f64,
    g: &NoiseColumns,
    dw: &[f64],
    i10: &[f64],
    scheme: SdeScheme,
    w: &mut SdeWork,
) where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = x.len();
    w.gw.iter_mut().for_each(|v| *v = 0.0);
    w.gi.iter_mut().for_each(|v| *v = 0.0);
    for (col, (&dwc, &ic)) in g.iter().zip(dw.iter().zip(i10)) {
        for &(row, coef) in col {
            w.gw[row] += coef * dwc;
            w.gi[row] += coef * ic / h;
        }
    }
    let [k1, k2, k3, k4] = &mut w.k;
    match scheme {
        SdeScheme::Sra4 => {
            rhs(x, k1);
            for i in 0..n {
                w.tmp[i] = x[i] + 0.5 * h * k1[i] + 1.5 * w.gi[i];
            }
            rhs(&w.tmp, k2);
            for i in 0..n {
                w.tmp[i] = x[i] + 0.5 * h * k2[i] + 1.5 * w.gi[i];
            }
            rhs(&w.tmp, k3);
            for i in 0..n {
                w.tmp[i] = x[i] + h * k3[i];
            }
            rhs(&w.tmp, k4);
            let h6 = h / 6.0;
            for i in 0..n {
                x[i] += h6 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]) + w.gw[i];
            }
        }
        SdeScheme::Sra1 => {
            rhs(x, k1);
            for i in 0..n {
                w.tmp[i] = x[i] + 0.75 * h * k1[i] + 1.5 * w.gi[i];
            }
            rhs(&w.tmp, k2);
            for i in 0..n {
                x[i] += h * (k1[i] + 2.0 * k2[i]) / 3.0 + w.gw[i];
            }
        }
        SdeScheme::Euler => {
            rhs(x, k1);
            for i in 0..n {
                x[i] += h * k1[i] + w.gw[i];
            }
        }
    }
}
