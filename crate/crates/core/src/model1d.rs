//! One-dimensional full-dispersion Boussinesq system and the Whitham equation.
//!
//! The Boussinesq right-hand side is evaluated in the reformulated splitting
//!
//! ```text
//! eta_t = -M(D)(1 - beta d_x^2) u + H u - beta H d_x^2 u - d_x(eta u)
//! u_t   = -d_x eta - u d_x u
//! ```
//!
//! which equals `eta_t = -K(D) d_x u - d_x(eta u)` symbol by symbol. The
//! direct form is kept as [`Boussinesq1d::rhs_direct`] for cross-checking.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, RealField, Spectrum};
use crate::integrator::{self, wave_block, Evolution, IntegratorConfig};
use crate::ops::{project, Dealias};
use crate::symbols::{eval_k, eval_w, Symbol};

#[derive(Clone, Debug)]
pub struct State1D {
    pub eta: RealField,
    pub u: RealField,
    pub t: f64,
}

impl State1D {
    pub fn new(eta: RealField, u: RealField, t: f64) -> Result<Self> {
        if !eta.same_grid(&u) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { eta, u, t })
    }

    pub fn rest(grid: &Arc<Grid>) -> Self {
        Self {
            eta: RealField::zeros(grid),
            u: RealField::zeros(grid),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.eta.grid
    }

    /// Minimum over the grid of the local depth `1 + eta`.
    pub fn min_depth(&self) -> f64 {
        1.0 + self.eta.min()
    }

    pub fn is_finite(&self) -> bool {
        self.eta.is_finite() && self.u.is_finite()
    }

    pub fn to_spectra(&self) -> Vec<Spectrum> {
        vec![self.eta.spectrum(), self.u.spectrum()]
    }

    pub fn from_spectra(grid: &Arc<Grid>, v: &[Spectrum], t: f64) -> Self {
        Self {
            eta: RealField::from_spectrum(grid, &v[0]),
            u: RealField::from_spectrum(grid, &v[1]),
            t,
        }
    }
}

/// Precomputed operators for the 1D Boussinesq system.
pub struct Boussinesq1d {
    grid: Arc<Grid>,
    beta: f64,
    nonlinear: bool,
    mask: Vec<bool>,
    /// `i k`, zero at Nyquist.
    dx: Vec<Complex64>,
    /// `K(k)`.
    dispersion: Vec<f64>,
    /// Linear eta-symbol of the reformulated system acting on u.
    split_eta: Vec<Complex64>,
    /// `|k| sqrt(K(k))` where `d_x` is nonzero.
    omega: Vec<f64>,
}

impl Boussinesq1d {
    pub fn new(grid: &Arc<Grid>, beta: f64, dealias: Dealias) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::Grid("the 1D model needs a 1D grid".into()));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("beta must be positive, got {beta}")));
        }
        let dx = Symbol::Derivative(0).table(grid).values;
        let m = Symbol::M.table(grid).values;
        let h = Symbol::Hilbert.table(grid).values;
        let dispersion: Vec<f64> = grid.wavenumber_moduli().iter().map(|&k| eval_k(k, beta)).collect();
        let split_eta = (0..grid.len())
            .map(|i| {
                let one_minus_beta_dxx = 1.0 - beta * (dx[i] * dx[i]);
                -m[i] * one_minus_beta_dxx + h[i] - beta * h[i] * dx[i] * dx[i]
            })
            .collect();
        let omega = (0..grid.len())
            .map(|i| (-(dx[i] * dx[i]).re * dispersion[i]).sqrt())
            .collect();
        Ok(Self {
            grid: Arc::clone(grid),
            beta,
            nonlinear: true,
            mask: dealias.mask(grid.spec()),
            dx,
            dispersion,
            split_eta,
            omega,
        })
    }

    pub fn for_config(grid: &Arc<Grid>, beta: f64, cfg: &IntegratorConfig) -> Result<Self> {
        let mut model = Self::new(grid, beta, cfg.dealias)?;
        model.nonlinear = cfg.nonlinear;
        Ok(model)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Dealiased spectra of `eta u` and `u u_x`.
    fn products(&self, eta_h: &[Complex64], u_h: &[Complex64]) -> (Spectrum, Spectrum) {
        let g = &self.grid;
        let eta = g.inverse(eta_h);
        let u = g.inverse(u_h);
        let ux_h: Spectrum = u_h.iter().zip(&self.dx).map(|(a, b)| a * b).collect();
        let ux = g.inverse(&ux_h);
        let flux: Vec<f64> = eta.iter().zip(&u).map(|(a, b)| a * b).collect();
        let adv: Vec<f64> = u.iter().zip(&ux).map(|(a, b)| a * b).collect();
        let mut flux_h = g.forward(&flux);
        let mut adv_h = g.forward(&adv);
        project(&mut flux_h, &self.mask);
        project(&mut adv_h, &self.mask);
        (flux_h, adv_h)
    }

    fn nonlinear_spectra(&self, eta_h: &[Complex64], u_h: &[Complex64]) -> (Spectrum, Spectrum) {
        let (flux_h, adv_h) = self.products(eta_h, u_h);
        let n_eta = flux_h.iter().zip(&self.dx).map(|(p, d)| -d * p).collect();
        let n_u = adv_h.iter().map(|a| -a).collect();
        (n_eta, n_u)
    }

    /// Time derivatives through the reformulated splitting.
    pub fn rhs(&self, state: &State1D) -> Result<(RealField, RealField)> {
        let (eta_h, u_h) = (state.eta.spectrum(), state.u.spectrum());
        let mut d_eta: Spectrum = u_h.iter().zip(&self.split_eta).map(|(u, s)| s * u).collect();
        let mut d_u: Spectrum = eta_h.iter().zip(&self.dx).map(|(e, d)| -d * e).collect();
        if self.nonlinear {
            let (n_eta, n_u) = self.nonlinear_spectra(&eta_h, &u_h);
            add(&mut d_eta, &n_eta);
            add(&mut d_u, &n_u);
        }
        self.finish_rhs(state.t, d_eta, d_u)
    }

    /// Time derivatives through `eta_t = -K(D) d_x u - d_x(eta u)` directly.
    pub fn rhs_direct(&self, state: &State1D) -> Result<(RealField, RealField)> {
        let (eta_h, u_h) = (state.eta.spectrum(), state.u.spectrum());
        let mut d_eta: Spectrum = (0..self.grid.len())
            .map(|i| -self.dispersion[i] * self.dx[i] * u_h[i])
            .collect();
        let mut d_u: Spectrum = eta_h.iter().zip(&self.dx).map(|(e, d)| -d * e).collect();
        if self.nonlinear {
            let (n_eta, n_u) = self.nonlinear_spectra(&eta_h, &u_h);
            add(&mut d_eta, &n_eta);
            add(&mut d_u, &n_u);
        }
        self.finish_rhs(state.t, d_eta, d_u)
    }

    fn finish_rhs(&self, t: f64, d_eta: Spectrum, d_u: Spectrum) -> Result<(RealField, RealField)> {
        let a = RealField::from_spectrum(&self.grid, &d_eta);
        let b = RealField::from_spectrum(&self.grid, &d_u);
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::NumericalBlowup { t });
        }
        Ok((a, b))
    }
}

fn add(a: &mut [Complex64], b: &[Complex64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
}

impl Evolution for Boussinesq1d {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn propagate(&self, v: &mut [Spectrum], tau: f64) {
        let (eta, u) = v.split_at_mut(1);
        for i in 0..self.grid.len() {
            let p = -self.dispersion[i] * self.dx[i];
            let q = -self.dx[i];
            let (a, b) = wave_block(eta[0][i], u[0][i], p, q, self.omega[i], tau);
            eta[0][i] = a;
            u[0][i] = b;
        }
    }

    fn linear(&self, v: &[Spectrum]) -> Vec<Spectrum> {
        let d_eta = v[1].iter().zip(&self.split_eta).map(|(u, s)| s * u).collect();
        let d_u = v[0].iter().zip(&self.dx).map(|(e, d)| -d * e).collect();
        vec![d_eta, d_u]
    }

    fn nonlinear(&self, v: &[Spectrum]) -> Vec<Spectrum> {
        if !self.nonlinear {
            let zero = vec![Complex64::new(0.0, 0.0); self.grid.len()];
            return vec![zero.clone(), zero];
        }
        let (a, b) = self.nonlinear_spectra(&v[0], &v[1]);
        vec![a, b]
    }

    fn omega_max(&self) -> f64 {
        let k = self.grid.spec().max_wavenumber();
        k * eval_k(k, self.beta).sqrt()
    }
}

/// Right-hand side of the Boussinesq system in reformulated form.
pub fn rhs_1d(state: &State1D, beta: f64, dealias: Dealias) -> Result<(RealField, RealField)> {
    Boussinesq1d::new(state.grid(), beta, dealias)?.rhs(state)
}

/// Advances a state by one time step.
pub fn step(state: &State1D, cfg: &IntegratorConfig, beta: f64) -> Result<State1D> {
    let model = Boussinesq1d::for_config(state.grid(), beta, cfg)?;
    cfg.check_stability(model.omega_max())?;
    let mut v = state.to_spectra();
    integrator::step(&model, &mut v, state.t, cfg)?;
    Ok(State1D::from_spectra(state.grid(), &v, state.t + cfg.dt))
}

/// Integrates from `state` to `state.t + cfg.steps() * cfg.dt`, handing
/// every recorded state to `observe`.
pub fn evolve(
    state: &State1D,
    cfg: &IntegratorConfig,
    beta: f64,
    mut observe: impl FnMut(&State1D) -> Result<()>,
) -> Result<State1D> {
    let model = Boussinesq1d::for_config(state.grid(), beta, cfg)?;
    let g = state.grid();
    let mut v = state.to_spectra();
    let t = integrator::integrate(&model, &mut v, state.t, cfg, |_, t, v| {
        observe(&State1D::from_spectra(g, v, t))
    })?;
    Ok(State1D::from_spectra(g, &v, t))
}

/// Hamiltonian `1/2 int (u K(D) u + eta^2 + eta u^2) dx`.
pub fn hamiltonian(state: &State1D, beta: f64) -> f64 {
    let g = state.grid();
    let ku = RealField::from_spectrum(
        g,
        &Symbol::Dispersion { beta }.table(g).apply(&state.u.spectrum()),
    );
    let dv = g.spec().cell_volume();
    0.5 * (0..g.len())
        .map(|i| {
            let (e, u) = (state.eta.values[i], state.u.values[i]);
            u * ku.values[i] + e * e + e * u * u
        })
        .sum::<f64>()
        * dv
}

/// Whitham equation `u_t + W(D) u_x + u u_x = 0`.
pub struct Whitham {
    grid: Arc<Grid>,
    beta: f64,
    nonlinear: bool,
    mask: Vec<bool>,
    dx: Vec<Complex64>,
    /// `-i k W(k)`.
    linear_symbol: Vec<Complex64>,
}

impl Whitham {
    pub fn new(grid: &Arc<Grid>, beta: f64, dealias: Dealias) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::Grid("the Whitham model needs a 1D grid".into()));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("beta must be nonnegative, got {beta}")));
        }
        let dx = Symbol::Derivative(0).table(grid).values;
        let linear_symbol = grid
            .wavenumber_moduli()
            .iter()
            .zip(&dx)
            .map(|(&k, d)| -d * eval_w(k, beta))
            .collect();
        Ok(Self {
            grid: Arc::clone(grid),
            beta,
            nonlinear: true,
            mask: dealias.mask(grid.spec()),
            dx,
            linear_symbol,
        })
    }

    pub fn for_config(grid: &Arc<Grid>, beta: f64, cfg: &IntegratorConfig) -> Result<Self> {
        let mut model = Self::new(grid, beta, cfg.dealias)?;
        model.nonlinear = cfg.nonlinear;
        Ok(model)
    }

    fn advection(&self, u_h: &[Complex64]) -> Spectrum {
        let g = &self.grid;
        let u = g.inverse(u_h);
        let ux_h: Spectrum = u_h.iter().zip(&self.dx).map(|(a, b)| a * b).collect();
        let ux = g.inverse(&ux_h);
        let prod: Vec<f64> = u.iter().zip(&ux).map(|(a, b)| a * b).collect();
        let mut h = g.forward(&prod);
        project(&mut h, &self.mask);
        h.iter_mut().for_each(|c| *c = -*c);
        h
    }

    /// `-W(D) u_x - u u_x`.
    pub fn rhs(&self, u: &RealField) -> Result<RealField> {
        let u_h = u.spectrum();
        let mut out: Spectrum = u_h.iter().zip(&self.linear_symbol).map(|(a, s)| a * s).collect();
        if self.nonlinear {
            add(&mut out, &self.advection(&u_h));
        }
        let r = RealField::from_spectrum(&self.grid, &out);
        if !r.is_finite() {
            return Err(Error::NumericalBlowup { t: f64::NAN });
        }
        Ok(r)
    }
}

impl Evolution for Whitham {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn propagate(&self, v: &mut [Spectrum], tau: f64) {
        for (c, s) in v[0].iter_mut().zip(&self.linear_symbol) {
            *c *= (s * tau).exp();
        }
    }

    fn linear(&self, v: &[Spectrum]) -> Vec<Spectrum> {
        vec![v[0].iter().zip(&self.linear_symbol).map(|(a, s)| a * s).collect()]
    }

    fn nonlinear(&self, v: &[Spectrum]) -> Vec<Spectrum> {
        if !self.nonlinear {
            return vec![vec![Complex64::new(0.0, 0.0); self.grid.len()]];
        }
        vec![self.advection(&v[0])]
    }

    fn omega_max(&self) -> f64 {
        let k = self.grid.spec().max_wavenumber();
        k * eval_w(k, self.beta)
    }
}

/// `-W(D) u_x - u u_x`.
pub fn whitham_rhs(u: &RealField, beta: f64, dealias: Dealias) -> Result<RealField> {
    Whitham::new(&u.grid, beta, dealias)?.rhs(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::lp_norm;
    use crate::random::{random_field, RandomFieldSpec};
    use crate::Lp;
    use std::f64::consts::PI;

    fn line(n: usize) -> Arc<Grid> {
        Grid::line(n, 2.0 * PI).unwrap()
    }

    fn rel_err(a: &RealField, b: &RealField) -> f64 {
        lp_norm(&a.sub(b), Lp::Two) / lp_norm(b, Lp::Two).max(1e-300)
    }

    #[test]
    fn rest_is_equilibrium() {
        let g = line(64);
        let (a, b) = rhs_1d(&State1D::rest(&g), 1.0, Dealias::TwoThirds).unwrap();
        assert_eq!(a.max_abs(), 0.0);
        assert_eq!(b.max_abs(), 0.0);
        let cfg = IntegratorConfig::default();
        let s = step(&State1D::rest(&g), &cfg, 1.0).unwrap();
        assert_eq!(s.eta.max_abs() + s.u.max_abs(), 0.0);
        assert!((s.t - cfg.dt).abs() < 1e-15);
    }

    #[test]
    fn linear_plane_wave_rhs_matches_dispersion_relation() {
        // eta = eps cos(kx), u = eps/sqrt(K) cos(kx) travels right with omega^2 = k^2 K(k):
        // eta_t = eps omega sin(kx), u_t = eps k sin(kx)
        let g = line(64);
        let (k, eps, beta) = (5.0, 1e-7, 1.0);
        let kk = eval_k(k, beta);
        let omega = k * kk.sqrt();
        let eta = RealField::from_fn(&g, |x| eps * (k * x[0]).cos());
        let u = RealField::from_fn(&g, |x| eps / kk.sqrt() * (k * x[0]).cos());
        let state = State1D::new(eta, u, 0.0).unwrap();
        let (de, du) = rhs_1d(&state, beta, Dealias::TwoThirds).unwrap();
        let de_exact = RealField::from_fn(&g, |x| eps * omega * (k * x[0]).sin());
        let du_exact = RealField::from_fn(&g, |x| eps * k * (k * x[0]).sin());
        // nonlinear terms are O(eps^2)
        assert!(rel_err(&de, &de_exact) < 1e-6);
        assert!(rel_err(&du, &du_exact) < 1e-6);
    }

    #[test]
    fn reformulation_matches_direct_form() {
        for n in [128, 256] {
            let g = line(n);
            let model = Boussinesq1d::new(&g, 1.0, Dealias::TwoThirds).unwrap();
            for seed in 0..20u64 {
                let spec = RandomFieldSpec {
                    seed,
                    n,
                    decay: 1.0,
                    band: n / 3,
                    mean: 0.0,
                };
                let eta = random_field(&g, &spec).scaled(0.3);
                let u = random_field(&g, &RandomFieldSpec { seed: seed + 1000, ..spec });
                let st = State1D::new(eta, u, 0.0).unwrap();
                let (a1, b1) = model.rhs(&st).unwrap();
                let (a2, b2) = model.rhs_direct(&st).unwrap();
                assert!(rel_err(&a1, &a2) < 1e-10, "n={n} seed={seed}");
                assert!(rel_err(&b1, &b2) < 1e-14);
            }
        }
    }

    #[test]
    fn whitham_single_mode_and_mean() {
        let g = line(64);
        let k = 3.0;
        let beta = 0.7;
        let u = RealField::from_fn(&g, |x| (k * x[0]).cos());
        let mut lin = Whitham::new(&g, beta, Dealias::TwoThirds).unwrap();
        lin.nonlinear = false;
        let r = lin.rhs(&u).unwrap();
        let w = eval_w(k, beta);
        for i in 0..g.len() {
            let x = g.spec().coords(i)[0];
            assert!((r.values[i] - w * k * (k * x).sin()).abs() < 1e-12);
        }
        assert_eq!(whitham_rhs(&RealField::zeros(&g), beta, Dealias::None).unwrap().max_abs(), 0.0);
        for seed in 0..5 {
            let spec = RandomFieldSpec {
                seed,
                n: 64,
                decay: 1.5,
                band: 20,
                mean: 0.4,
            };
            let u = random_field(&g, &spec);
            for d in [Dealias::TwoThirds, Dealias::None] {
                let r = whitham_rhs(&u, beta, d).unwrap();
                assert!(r.spectrum()[0].norm() < 1e-14);
            }
        }
    }

    #[test]
    fn hamiltonian_chain_rule_vanishes() {
        // dH/dt = int (K u + eta u) u_t + (eta + u^2/2) eta_t
        let g = line(128);
        let beta = 1.0;
        let model = Boussinesq1d::new(&g, beta, Dealias::TwoThirds).unwrap();
        for seed in 0..10u64 {
            let spec = RandomFieldSpec {
                seed,
                n: 128,
                decay: 1.5,
                band: 42,
                mean: 0.0,
            };
            let eta = random_field(&g, &spec).scaled(0.2);
            let u = random_field(&g, &RandomFieldSpec { seed: seed + 77, ..spec }).scaled(0.2);
            let st = State1D::new(eta.clone(), u.clone(), 0.0).unwrap();
            let (de, du) = model.rhs(&st).unwrap();
            let ku = RealField::from_spectrum(
                &g,
                &Symbol::Dispersion { beta }.table(&g).apply(&u.spectrum()),
            );
            let dv = g.spec().cell_volume();
            let (mut dh, mut scale) = (0.0, 0.0);
            for i in 0..g.len() {
                let a = (ku.values[i] + eta.values[i] * u.values[i]) * du.values[i];
                let b = (eta.values[i] + 0.5 * u.values[i] * u.values[i]) * de.values[i];
                dh += (a + b) * dv;
                scale += (a.abs() + b.abs()) * dv;
            }
            assert!(dh.abs() <= 1e-12 * scale, "dH/dt = {dh}, scale {scale}");
        }
    }

    #[test]
    fn rk4_guard_rejects_large_dt() {
        let g = line(256);
        let cfg = IntegratorConfig {
            dt: 0.01,
            scheme: crate::integrator::Scheme::Rk4,
            ..Default::default()
        };
        assert!(matches!(
            step(&State1D::rest(&g), &cfg, 1.0),
            Err(Error::Stability { .. })
        ));
    }
}
