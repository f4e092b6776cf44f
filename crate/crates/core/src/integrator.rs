//! Time stepping in Fourier space.
//!
//! Models split their right-hand side as `dv/dt = A v + N(v)` with `A`
//! diagonal (or block diagonal) per mode. The integrating-factor scheme
//! propagates `A` exactly and applies classical RK4 to the transformed
//! variable `w = exp(-tA) v` (Lawson's method); plain RK4 acts on the full
//! right-hand side and is kept as a cross-validation path.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Spectrum};
use crate::ops::Dealias;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Ifrk4,
    Rk4,
}

/// Largest `dt * omega_max` accepted by plain RK4.
pub const RK4_STABILITY_LIMIT: f64 = 2.8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub dealias: Dealias,
    pub t_end: f64,
    pub output_stride: usize,
    /// Switches the quadratic terms off (linearized runs).
    pub nonlinear: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            scheme: Scheme::Ifrk4,
            dealias: Dealias::TwoThirds,
            t_end: 1.0,
            output_stride: 10,
            nonlinear: true,
        }
    }
}

impl IntegratorConfig {
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    /// Checks the RK4 stability guard against the fastest linear frequency.
    pub fn check_stability(&self, omega_max: f64) -> Result<()> {
        let product = self.dt * omega_max;
        if self.scheme == Scheme::Rk4 && product > RK4_STABILITY_LIMIT {
            return Err(Error::Stability {
                dt: self.dt,
                product,
            });
        }
        Ok(())
    }
}

/// A semilinear evolution `dv/dt = A v + N(v)` on a set of spectra.
pub trait Evolution: Sync {
    fn grid(&self) -> &Arc<Grid>;

    /// `v <- exp(tau A) v`.
    fn propagate(&self, v: &mut [Spectrum], tau: f64);

    /// `A v`.
    fn linear(&self, v: &[Spectrum]) -> Vec<Spectrum>;

    /// `N(v)`; zero for linearized runs.
    fn nonlinear(&self, v: &[Spectrum]) -> Vec<Spectrum>;

    /// Fastest linear frequency on the grid.
    fn omega_max(&self) -> f64;

    /// Hook run after each accepted step (constraint re-projection).
    fn finish_step(&self, _v: &mut [Spectrum]) {}
}

fn axpy(y: &[Spectrum], a: f64, x: &[Spectrum]) -> Vec<Spectrum> {
    y.iter()
        .zip(x)
        .map(|(yy, xx)| yy.iter().zip(xx).map(|(p, q)| p + q * a).collect())
        .collect()
}

fn add_assign_scaled(y: &mut [Spectrum], a: f64, x: &[Spectrum]) {
    for (yy, xx) in y.iter_mut().zip(x) {
        for (p, q) in yy.iter_mut().zip(xx) {
            *p += q * a;
        }
    }
}

fn sum(a: Vec<Spectrum>, b: &[Spectrum]) -> Vec<Spectrum> {
    let mut a = a;
    add_assign_scaled(&mut a, 1.0, b);
    a
}

fn is_finite(v: &[Spectrum]) -> bool {
    v.iter()
        .flat_map(|s| s.iter())
        .all(|c: &Complex64| c.re.is_finite() && c.im.is_finite())
}

/// Advances `v` from `t` to `t + dt`.
pub fn step<E: Evolution + ?Sized>(
    model: &E,
    v: &mut Vec<Spectrum>,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<()> {
    let h = cfg.dt;
    match cfg.scheme {
        Scheme::Ifrk4 => {
            // Lawson RK4 with E(tau) = exp(tau A)
            let k1 = model.nonlinear(v);

            let mut v2 = axpy(v, 0.5 * h, &k1);
            model.propagate(&mut v2, 0.5 * h);
            let k2 = model.nonlinear(&v2);

            let mut ev_half = v.clone();
            model.propagate(&mut ev_half, 0.5 * h);
            let v3 = axpy(&ev_half, 0.5 * h, &k2);
            let k3 = model.nonlinear(&v3);

            let mut ek3 = k3.clone();
            model.propagate(&mut ek3, 0.5 * h);
            let mut v4 = ev_half.clone();
            model.propagate(&mut v4, 0.5 * h);
            add_assign_scaled(&mut v4, h, &ek3);
            let k4 = model.nonlinear(&v4);

            // v_{n+1} = E(h) [v + h/6 k1] + h/3 E(h/2) [k2 + k3] + h/6 k4
            let mut next = axpy(v, h / 6.0, &k1);
            model.propagate(&mut next, h);
            let mut mid = sum(k2, &k3);
            model.propagate(&mut mid, 0.5 * h);
            add_assign_scaled(&mut next, h / 3.0, &mid);
            add_assign_scaled(&mut next, h / 6.0, &k4);
            *v = next;
        }
        Scheme::Rk4 => {
            let f = |x: &[Spectrum]| sum(model.linear(x), &model.nonlinear(x));
            let k1 = f(v);
            let k2 = f(&axpy(v, 0.5 * h, &k1));
            let k3 = f(&axpy(v, 0.5 * h, &k2));
            let k4 = f(&axpy(v, h, &k3));
            add_assign_scaled(v, h / 6.0, &k1);
            add_assign_scaled(v, h / 3.0, &k2);
            add_assign_scaled(v, h / 3.0, &k3);
            add_assign_scaled(v, h / 6.0, &k4);
        }
    }
    model.finish_step(v);
    if !is_finite(v) {
        return Err(Error::NumericalBlowup { t: t + h });
    }
    Ok(())
}

/// Runs `cfg.steps()` steps from `t0`, calling `observe(step, t, v)` at step
/// 0, every `output_stride` steps and after the last step. Returns the final
/// time.
pub fn integrate<E: Evolution + ?Sized>(
    model: &E,
    v: &mut Vec<Spectrum>,
    t0: f64,
    cfg: &IntegratorConfig,
    mut observe: impl FnMut(usize, f64, &[Spectrum]) -> Result<()>,
) -> Result<f64> {
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(Error::Domain(format!("dt must be positive, got {}", cfg.dt)));
    }
    cfg.check_stability(model.omega_max())?;
    let stride = cfg.output_stride.max(1);
    let steps = cfg.steps();
    observe(0, t0, v)?;
    let mut t = t0;
    for k in 1..=steps {
        step(model, v, t, cfg)?;
        t = t0 + k as f64 * cfg.dt;
        if k % stride == 0 || k == steps {
            observe(k, t, v)?;
        }
    }
    Ok(t)
}

/// Propagator of the 2x2 block `d/dt (a, b) = [[0, p], [q, 0]] (a, b)` over `tau`,
/// where `p q = -omega^2 <= 0`: `cos(omega tau) I + sin(omega tau)/omega * A`.
pub(crate) fn wave_block(
    a: Complex64,
    b: Complex64,
    p: Complex64,
    q: Complex64,
    omega: f64,
    tau: f64,
) -> (Complex64, Complex64) {
    let (c, sinc) = if omega == 0.0 {
        (1.0, tau)
    } else {
        ((omega * tau).cos(), (omega * tau).sin() / omega)
    };
    (a * c + p * b * sinc, q * a * sinc + b * c)
}
