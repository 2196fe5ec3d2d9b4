use crate::{Error, Result};

pub const DEFAULT_DIVERGENCE_BOUND: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    /// Abort when any component exceeds this magnitude.
    pub divergence_bound: f64,
    /// Keep every `sample_every`-th state (the initial state is always kept).
    pub sample_every: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { divergence_bound: DEFAULT_DIVERGENCE_BOUND, sample_every: 1 }
    }
}

/// Scratch buffers for [`rk4_step`].
#[derive(Debug, Clone)]
pub struct Rk4Work {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Work {
    pub fn new(n: usize) -> Self {
        Rk4Work { k1: vec![0.0; n], k2: vec![0.0; n], k3: vec![0.0; n], k4: vec![0.0; n], tmp: vec![0.0; n] }
    }
}

/// One classical RK4 step of the autonomous system `rhs(x, dx)`, in place.
#[inline]
pub fn rk4_step<F>(rhs: &mut F, x: &mut [f64], dt: f64, w: &mut Rk4Work)
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = x.len();
    rhs(x, &mut w.k1);
    for i in 0..n {
        w.tmp[i] = x[i] + 0.5 * dt * w.k1[i];
    }
    rhs(&w.tmp, &mut w.k2);
    for i in 0..n {
        w.tmp[i] = x[i] + 0.5 * dt * w.k2[i];
    }
    rhs(&w.tmp, &mut w.k3);
    for i in 0..n {
        w.tmp[i] = x[i] + dt * w.k3[i];
    }
    rhs(&w.tmp, &mut w.k4);
    let h6 = dt / 6.0;
    for i in 0..n {
        x[i] += h6 * (w.k1[i] + 2.0 * (w.k2[i] + w.k3[i]) + w.k4[i]);
    }
}

/// Divergence check used by every integrator in the crate.
pub fn check_bound(x: &[f64], bound: f64, step: usize) -> Result<()> {
    // NaN fails the comparison and is reported as divergence as well.
    if x.iter().all(|v| v.abs() <= bound) {
        Ok(())
    } else {
        Err(Error::Divergence { step, bound })
    }
}

/// Fixed-step RK4 with the default divergence bound; returns `n + 1` states.
pub fn integrate_ode<F>(rhs: F, x0: &[f64], dt: f64, n: usize) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&[f64], &mut [f64]),
{
    integrate_ode_with(rhs, x0, dt, n, &OdeOptions::default())
}

pub fn integrate_ode_with<F>(mut rhs: F, x0: &[f64], dt: f64, n: usize, opts: &OdeOptions) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    if n == 0 {
        return Err(Error::invalid("step count must be at least 1"));
    }
    if opts.sample_every == 0 {
        return Err(Error::invalid("sample_every must be at least 1"));
    }
    check_bound(x0, opts.divergence_bound, 0)?;
    let mut x = x0.to_vec();
    let mut w = Rk4Work::new(x.len());
    let mut out = Vec::with_capacity(n / opts.sample_every + 1);
    out.push(x.clone());
    for step in 1..=n {
        rk4_step(&mut rhs, &mut x, dt, &mut w);
        check_bound(&x, opts.divergence_bound, step)?;
        if step % opts.sample_every == 0 {
            out.push(x.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay_error(dt: f64) -> f64 {
        let n = (1.0 / dt).round() as usize;
        let traj = integrate_ode(|x, d| d[0] = -x[0], &[1.0], dt, n).unwrap();
        (traj[n][0] - (-1.0f64).exp()).abs()
    }

    #[test]
    fn exponential_decay() {
        let traj = integrate_ode(|x, d| d[0] = -x[0], &[1.0], 0.01, 100).unwrap();
        assert_eq!(traj.len(), 101);
        assert_eq!(traj[0], vec![1.0]);
        assert!((traj[100][0] - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn fourth_order_convergence() {
        let e1 = decay_error(0.1);
        let e2 = decay_error(0.05);
        assert!(e1 / e2 >= 8.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn zero_field_is_constant() {
        let traj = integrate_ode(|_, d| d.fill(0.0), &[3.0, -2.0], 0.1, 50).unwrap();
        assert!(traj.iter().all(|s| s == &vec![3.0, -2.0]));
    }

    #[test]
    fn harmonic_energy_drift() {
        let traj = integrate_ode(
            |x, d| {
                d[0] = x[1];
                d[1] = -x[0];
            },
            &[1.0, 0.0],
            0.01,
            10_000,
        )
        .unwrap();
        let e = |s: &Vec<f64>| 0.5 * (s[0] * s[0] + s[1] * s[1]);
        assert!((e(&traj[10_000]) - e(&traj[0])).abs() < 1e-6);
    }

    #[test]
    fn divergence_names_step() {
        let err = integrate_ode(|x, d| d[0] = x[0] * x[0], &[1.0], 0.01, 1000).unwrap_err();
        match err {
            Error::Divergence { step, bound } => {
                assert!(step > 90 && step < 110, "step {step}");
                assert_eq!(bound, DEFAULT_DIVERGENCE_BOUND);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(integrate_ode(|_, d| d[0] = 0.0, &[0.0], 0.0, 1).is_err());
        assert!(integrate_ode(|_, d| d[0] = 0.0, &[0.0], 0.1, 0).is_err());
    }

    #[test]
    fn subsampling_keeps_endpoints() {
        let opts = OdeOptions { sample_every: 10, ..Default::default() };
        let traj = integrate_ode_with(|x, d| d[0] = -x[0], &[1.0], 0.01, 100, &opts).unwrap();
        assert_eq!(traj.len(), 11);
        assert!((traj[10][0] - (-1.0f64).exp()).abs() < 1e-8);
    }
}
