//! Two-dimensional full-dispersion Boussinesq system with curl-free velocity.
//!
//! The elevation equation is evaluated through the Riesz-transform splitting
//!
//! ```text
//! eta_t = (Mtilde(D) + 1)(1 - beta Lap)(R1 u1 + R2 u2) - div(eta u)
//! ```
//!
//! and the velocity through `u_t = -grad eta - 1/2 grad |u|^2`. The direct
//! form `eta_t = -K(D) div u - div(eta u)` is available for cross-checking.
//!
//! Modes touching a Nyquist frequency carry no derivative (odd symbols vanish
//! there), so the Helmholtz projection leaves them unchanged.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, RealField, Spectrum};
use crate::integrator::{self, wave_block, Evolution, IntegratorConfig};
use crate::ops::{project, Dealias, Lp};
use crate::symbols::{eval_k, Symbol};

#[derive(Clone, Debug)]
pub struct State2D {
    pub eta: RealField,
    pub u1: RealField,
    pub u2: RealField,
    pub t: f64,
}

impl State2D {
    pub fn new(eta: RealField, u1: RealField, u2: RealField, t: f64) -> Result<Self> {
        if !(eta.same_grid(&u1) && eta.same_grid(&u2)) {
            return Err(Error::GridMismatch);
        }
        if eta.grid.dim() != 2 {
            return Err(Error::Grid("2D state needs a 2D grid".into()));
        }
        Ok(Self { eta, u1, u2, t })
    }

    pub fn rest(grid: &Arc<Grid>) -> Self {
        Self {
            eta: RealField::zeros(grid),
            u1: RealField::zeros(grid),
            u2: RealField::zeros(grid),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.eta.grid
    }

    pub fn min_depth(&self) -> f64 {
        1.0 + self.eta.min()
    }

    pub fn is_finite(&self) -> bool {
        self.eta.is_finite() && self.u1.is_finite() && self.u2.is_finite()
    }

    pub fn to_spectra(&self) -> Vec<Spectrum> {
        vec![self.eta.spectrum(), self.u1.spectrum(), self.u2.spectrum()]
    }

    pub fn from_spectra(grid: &Arc<Grid>, v: &[Spectrum], t: f64) -> Self {
        Self {
            eta: RealField::from_spectrum(grid, &v[0]),
            u1: RealField::from_spectrum(grid, &v[1]),
            u2: RealField::from_spectrum(grid, &v[2]),
            t,
        }
    }
}

struct Derivatives {
    d1: Vec<Complex64>,
    d2: Vec<Complex64>,
}

impl Derivatives {
    fn new(grid: &Arc<Grid>) -> Self {
        Self {
            d1: Symbol::Derivative(0).table(grid).values,
            d2: Symbol::Derivative(1).table(grid).values,
        }
    }
}

fn gradient_projection(d: &Derivatives, u1: &mut [Complex64], u2: &mut [Complex64]) {
    for i in 1..u1.len() {
        let (k1, k2) = (d.d1[i].im, d.d2[i].im);
        let kk = k1 * k1 + k2 * k2;
        if kk == 0.0 {
            continue;
        }
        let q = (u1[i] * k1 + u2[i] * k2) / kk;
        u1[i] = q * k1;
        u2[i] = q * k2;
    }
}

/// Gradient part of the Helmholtz decomposition of `(u1, u2)`.
pub fn project_curl_free(u1: &RealField, u2: &RealField) -> Result<(RealField, RealField)> {
    if !u1.same_grid(u2) {
        return Err(Error::GridMismatch);
    }
    let g = &u1.grid;
    let d = Derivatives::new(g);
    let (mut a, mut b) = (u1.spectrum(), u2.spectrum());
    gradient_projection(&d, &mut a, &mut b);
    Ok((RealField::from_spectrum(g, &a), RealField::from_spectrum(g, &b)))
}

/// `|| d1 u2 - d2 u1 ||_{L^2}`.
pub fn curl_norm(u1: &RealField, u2: &RealField) -> f64 {
    let g = &u1.grid;
    let d = Derivatives::new(g);
    let (a, b) = (u1.spectrum(), u2.spectrum());
    let curl: Spectrum = (0..g.len()).map(|i| d.d1[i] * b[i] - d.d2[i] * a[i]).collect();
    crate::ops::weighted_norm_spectrum(g, &curl, |_| 1.0)
}

/// Precomputed operators for the 2D system.
pub struct Boussinesq2d {
    grid: Arc<Grid>,
    beta: f64,
    nonlinear: bool,
    mask: Vec<bool>,
    d: Derivatives,
    dispersion: Vec<f64>,
    /// `(Mtilde + 1)(1 + beta |k|^2) R_j`.
    split: [Vec<Complex64>; 2],
    omega: Vec<f64>,
}

impl Boussinesq2d {
    pub fn new(grid: &Arc<Grid>, beta: f64, dealias: Dealias) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(Error::Grid("the 2D model needs a 2D grid".into()));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("beta must be positive, got {beta}")));
        }
        let d = Derivatives::new(grid);
        let dispersion: Vec<f64> = grid.wavenumber_moduli().iter().map(|&k| eval_k(k, beta)).collect();
        let mt = Symbol::Mtilde.table(grid).values;
        let lap = Symbol::Laplacian.table(grid).values;
        let split = [0usize, 1].map(|j| {
            let r = Symbol::RieszTransform(j).table(grid).values;
            (0..grid.len())
                .map(|i| (mt[i] + 1.0) * (1.0 - beta * lap[i]) * r[i])
                .collect()
        });
        let omega = (0..grid.len())
            .map(|i| {
                let kk = d.d1[i].im.powi(2) + d.d2[i].im.powi(2);
                (kk * dispersion[i]).sqrt()
            })
            .collect();
        Ok(Self {
            grid: Arc::clone(grid),
            beta,
            nonlinear: true,
            mask: dealias.mask(grid.spec()),
            d,
            dispersion,
            split,
            omega,
        })
    }

    pub fn for_config(grid: &Arc<Grid>, beta: f64, cfg: &IntegratorConfig) -> Result<Self> {
        let mut model = Self::new(grid, beta, cfg.dealias)?;
        model.nonlinear = cfg.nonlinear;
        Ok(model)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    fn nonlinear_spectra(&self, v: &[Spectrum]) -> [Spectrum; 3] {
        let g = &self.grid;
        let eta = g.inverse(&v[0]);
        let u1 = g.inverse(&v[1]);
        let u2 = g.inverse(&v[2]);
        let n = g.len();
        let mut f1 = g.forward(&(0..n).map(|i| eta[i] * u1[i]).collect::<Vec<_>>());
        let mut f2 = g.forward(&(0..n).map(|i| eta[i] * u2[i]).collect::<Vec<_>>());
        let mut q = g.forward(
            &(0..n)
                .map(|i| 0.5 * (u1[i] * u1[i] + u2[i] * u2[i]))
                .collect::<Vec<_>>(),
        );
        project(&mut f1, &self.mask);
        project(&mut f2, &self.mask);
        project(&mut q, &self.mask);
        let (d1, d2) = (&self.d.d1, &self.d.d2);
        [
            (0..n).map(|i| -(d1[i] * f1[i] + d2[i] * f2[i])).collect(),
            (0..n).map(|i| -d1[i] * q[i]).collect(),
            (0..n).map(|i| -d2[i] * q[i]).collect(),
        ]
    }

    fn velocity_linear(&self, eta_h: &[Complex64]) -> [Spectrum; 2] {
        [
            eta_h.iter().zip(&self.d.d1).map(|(e, d)| -d * e).collect(),
            eta_h.iter().zip(&self.d.d2).map(|(e, d)| -d * e).collect(),
        ]
    }

    fn split_eta(&self, v: &[Spectrum]) -> Spectrum {
        (0..self.grid.len())
            .map(|i| self.split[0][i] * v[1][i] + self.split[1][i] * v[2][i])
            .collect()
    }

    fn direct_eta(&self, v: &[Spectrum]) -> Spectrum {
        (0..self.grid.len())
            .map(|i| -self.dispersion[i] * (self.d.d1[i] * v[1][i] + self.d.d2[i] * v[2][i]))
            .collect()
    }

    fn assemble(&self, t: f64, v: &[Spectrum], eta_lin: Spectrum) -> Result<[RealField; 3]> {
        let [mut a, mut b, mut c] = {
            let [b, c] = self.velocity_linear(&v[0]);
            [eta_lin, b, c]
        };
        if self.nonlinear {
            let [na, nb, nc] = self.nonlinear_spectra(v);
            for i in 0..self.grid.len() {
                a[i] += na[i];
                b[i] += nb[i];
                c[i] += nc[i];
            }
        }
        let out = [a, b, c].map(|s| RealField::from_spectrum(&self.grid, &s));
        if out.iter().any(|f| !f.is_finite()) {
            return Err(Error::NumericalBlowup { t });
        }
        Ok(out)
    }

    /// Time derivatives `(eta_t, u1_t, u2_t)` through the Riesz splitting.
    pub fn rhs(&self, state: &State2D) -> Result<[RealField; 3]> {
        let v = state.to_spectra();
        let eta_lin = self.split_eta(&v);
        self.assemble(state.t, &v, eta_lin)
    }

    /// Time derivatives with `-K(D) div u` evaluated directly.
    pub fn rhs_direct(&self, state: &State2D) -> Result<[RealField; 3]> {
        let v = state.to_spectra();
        let eta_lin = self.direct_eta(&v);
        self.assemble(state.t, &v, eta_lin)
    }
}

impl Evolution for Boussinesq2d {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn propagate(&self, v: &mut [Spectrum], tau: f64) {
        let (eta, u) = v.split_at_mut(1);
        let (u1, u2) = u.split_at_mut(1);
        for i in 0..self.grid.len() {
            let (k1, k2) = (self.d.d1[i].im, self.d.d2[i].im);
            let kmod = k1.hypot(k2);
            if kmod == 0.0 {
                continue;
            }
            let (n1, n2) = (k1 / kmod, k2 / kmod);
            // longitudinal part (eta, q) rotates, the transverse part is frozen
            let q = u1[0][i] * n1 + u2[0][i] * n2;
            let (w1, w2) = (u1[0][i] - q * n1, u2[0][i] - q * n2);
            let p = Complex64::new(0.0, -self.dispersion[i] * kmod);
            let r = Complex64::new(0.0, -kmod);
            let (e_new, q_new) = wave_block(eta[0][i], q, p, r, self.omega[i], tau);
            eta[0][i] = e_new;
            u1[0][i] = w1 + q_new * n1;
            u2[0][i] = w2 + q_new * n2;
        }
    }

    fn linear(&self, v: &[Spectrum]) -> Vec<Spectrum> {
        let [b, c] = self.velocity_linear(&v[0]);
        vec![self.split_eta(v), b, c]
    }

    fn nonlinear(&self, v: &[Spectrum]) -> Vec<Spectrum> {
        if !self.nonlinear {
            return vec![vec![Complex64::new(0.0, 0.0); self.grid.len()]; 3];
        }
        self.nonlinear_spectra(v).to_vec()
    }

    fn omega_max(&self) -> f64 {
        let k = self.grid.spec().max_wavenumber();
        k * eval_k(k, self.beta).sqrt()
    }

    fn finish_step(&self, v: &mut [Spectrum]) {
        let (_, u) = v.split_at_mut(1);
        let (u1, u2) = u.split_at_mut(1);
        gradient_projection(&self.d, &mut u1[0], &mut u2[0]);
    }
}

pub fn rhs_2d(state: &State2D, beta: f64, dealias: Dealias) -> Result<[RealField; 3]> {
    Boussinesq2d::new(state.grid(), beta, dealias)?.rhs(state)
}

/// One time step followed by re-projection onto curl-free velocities.
pub fn step_2d(state: &State2D, cfg: &IntegratorConfig, beta: f64) -> Result<State2D> {
    let model = Boussinesq2d::for_config(state.grid(), beta, cfg)?;
    cfg.check_stability(model.omega_max())?;
    let mut v = state.to_spectra();
    integrator::step(&model, &mut v, state.t, cfg)?;
    Ok(State2D::from_spectra(state.grid(), &v, state.t + cfg.dt))
}

/// Integrates from `state`, handing every recorded state to `observe`.
pub fn evolve_2d(
    state: &State2D,
    cfg: &IntegratorConfig,
    beta: f64,
    mut observe: impl FnMut(&State2D) -> Result<()>,
) -> Result<State2D> {
    let model = Boussinesq2d::for_config(state.grid(), beta, cfg)?;
    let g = state.grid();
    let mut v = state.to_spectra();
    let t = integrator::integrate(&model, &mut v, state.t, cfg, |_, t, v| {
        observe(&State2D::from_spectra(g, v, t))
    })?;
    Ok(State2D::from_spectra(g, &v, t))
}

/// `1/2 grad |u|^2`, spectrally differentiated.
pub fn gradient_form(u1: &RealField, u2: &RealField) -> (RealField, RealField) {
    let g = &u1.grid;
    let d = Derivatives::new(g);
    let q = u1.mul(u1).add(&u2.mul(u2)).scaled(0.5).spectrum();
    let a: Spectrum = q.iter().zip(&d.d1).map(|(x, y)| x * y).collect();
    let b: Spectrum = q.iter().zip(&d.d2).map(|(x, y)| x * y).collect();
    (RealField::from_spectrum(g, &a), RealField::from_spectrum(g, &b))
}

/// `(u . grad u1, u . grad u2)`.
pub fn transport_form(u1: &RealField, u2: &RealField) -> (RealField, RealField) {
    let g = &u1.grid;
    let d = Derivatives::new(g);
    let deriv = |f: &RealField, t: &[Complex64]| {
        let s: Spectrum = f.spectrum().iter().zip(t).map(|(x, y)| x * y).collect();
        RealField::from_spectrum(g, &s)
    };
    let (u1x, u1y) = (deriv(u1, &d.d1), deriv(u1, &d.d2));
    let (u2x, u2y) = (deriv(u2, &d.d1), deriv(u2, &d.d2));
    (
        u1.mul(&u1x).add(&u2.mul(&u1y)),
        u1.mul(&u2x).add(&u2.mul(&u2y)),
    )
}

/// `1/2 int (u . K(D) u + eta^2 + eta |u|^2) dx`.
pub fn hamiltonian_2d(state: &State2D, beta: f64) -> f64 {
    let g = state.grid();
    let k = Symbol::Dispersion { beta }.table(g);
    let ku1 = RealField::from_spectrum(g, &k.apply(&state.u1.spectrum()));
    let ku2 = RealField::from_spectrum(g, &k.apply(&state.u2.spectrum()));
    let dv = g.spec().cell_volume();
    0.5 * (0..g.len())
        .map(|i| {
            let (e, a, b) = (state.eta.values[i], state.u1.values[i], state.u2.values[i]);
            a * ku1.values[i] + b * ku2.values[i] + e * e + e * (a * a + b * b)
        })
        .sum::<f64>()
        * dv
}

/// `|| u ||_{H^s}` of the pair `(u1, u2)`.
pub fn velocity_norm(u1: &RealField, u2: &RealField, s: f64) -> f64 {
    crate::ops::sobolev_norm(u1, s).hypot(crate::ops::sobolev_norm(u2, s))
}

/// Relative L2 distance between two vector fields.
pub fn relative_l2(a: &[&RealField], b: &[&RealField]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        num += crate::ops::lp_norm(&x.sub(y), Lp::Two).powi(2);
        den += crate::ops::lp_norm(y, Lp::Two).powi(2);
    }
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model1d::{Boussinesq1d, State1D};
    use crate::random::{random_field, RandomFieldSpec};
    use std::f64::consts::PI;

    fn plane(n: usize) -> Arc<Grid> {
        Grid::plane([n, n], [2.0 * PI, 2.0 * PI]).unwrap()
    }

    fn random_curl_free(g: &Arc<Grid>, seed: u64, band: usize) -> (RealField, RealField) {
        let n = g.spec().n[0];
        let phi = random_field(
            g,
            &RandomFieldSpec {
                seed,
                n,
                decay: 2.5,
                band,
                mean: 0.0,
            },
        );
        let d = Derivatives::new(g);
        let ph = phi.spectrum();
        let a: Spectrum = ph.iter().zip(&d.d1).map(|(x, y)| x * y).collect();
        let b: Spectrum = ph.iter().zip(&d.d2).map(|(x, y)| x * y).collect();
        (RealField::from_spectrum(g, &a), RealField::from_spectrum(g, &b))
    }

    #[test]
    fn projection_keeps_gradients_and_kills_curls() {
        let g = plane(32);
        let (k1, k2) = (2.0, 3.0);
        // grad of sin(k1 x1) sin(k2 x2)
        let u1 = RealField::from_fn(&g, |x| k1 * (k1 * x[0]).cos() * (k2 * x[1]).sin());
        let u2 = RealField::from_fn(&g, |x| k2 * (k1 * x[0]).sin() * (k2 * x[1]).cos());
        let (p1, p2) = project_curl_free(&u1, &u2).unwrap();
        for i in 0..g.len() {
            assert!((p1.values[i] - u1.values[i]).abs() < 1e-12);
            assert!((p2.values[i] - u2.values[i]).abs() < 1e-12);
        }
        // (-d2 psi, d1 psi) for psi = cos(x1 + 2 x2) + sin(3 x1)
        let v1 = RealField::from_fn(&g, |x| 2.0 * (x[0] + 2.0 * x[1]).sin());
        let v2 = RealField::from_fn(&g, |x| -(x[0] + 2.0 * x[1]).sin() + 3.0 * (3.0 * x[0]).cos());
        let (q1, q2) = project_curl_free(&v1, &v2).unwrap();
        assert!(q1.max_abs() < 1e-12 && q2.max_abs() < 1e-12);
    }

    #[test]
    fn projection_is_idempotent_and_curl_free() {
        let g = plane(32);
        for seed in 0..20 {
            let spec = RandomFieldSpec {
                seed,
                n: 32,
                decay: 1.0,
                band: 15,
                mean: 0.3,
            };
            let a = random_field(&g, &spec);
            let b = random_field(&g, &RandomFieldSpec { seed: seed + 500, ..spec });
            let (p1, p2) = project_curl_free(&a, &b).unwrap();
            let (pp1, pp2) = project_curl_free(&p1, &p2).unwrap();
            for i in 0..g.len() {
                assert!((p1.values[i] - pp1.values[i]).abs() < 1e-12);
                assert!((p2.values[i] - pp2.values[i]).abs() < 1e-12);
            }
            assert!(curl_norm(&p1, &p2) < 1e-12);
            // zero mode untouched
            assert!((p1.spectrum()[0].re - 0.3).abs() < 1e-14);
        }
    }

    #[test]
    fn splitting_matches_direct_form() {
        for n in [32, 64] {
            let g = plane(n);
            let model = Boussinesq2d::new(&g, 1.0, Dealias::TwoThirds).unwrap();
            for seed in 0..5 {
                let eta = random_field(
                    &g,
                    &RandomFieldSpec {
                        seed: seed + 99,
                        n,
                        decay: 1.0,
                        band: n / 3,
                        mean: 0.0,
                    },
                )
                .scaled(0.1);
                let (u1, u2) = random_curl_free(&g, seed, n / 3);
                let st = State2D::new(eta, u1, u2, 0.0).unwrap();
                let a = model.rhs(&st).unwrap();
                let b = model.rhs_direct(&st).unwrap();
                assert!(relative_l2(&[&a[0]], &[&b[0]]) < 1e-10);
            }
        }
    }

    #[test]
    fn one_dimensional_embedding_reduces_to_1d_rhs() {
        let n = 64;
        let g2 = plane(n);
        let g1 = Grid::line(n, 2.0 * PI).unwrap();
        let spec = RandomFieldSpec {
            seed: 3,
            n,
            decay: 1.2,
            band: 20,
            mean: 0.05,
        };
        let eta1 = random_field(&g1, &spec).scaled(0.2);
        let u1 = random_field(&g1, &RandomFieldSpec { seed: 4, ..spec });
        let embed = |f: &RealField| {
            RealField::from_fn(&g2, |x| {
                let i = (x[0] / (2.0 * PI) * n as f64).round() as usize % n;
                f.values[i]
            })
        };
        let st2 = State2D::new(embed(&eta1), embed(&u1), RealField::zeros(&g2), 0.0).unwrap();
        let st1 = State1D::new(eta1, u1, 0.0).unwrap();
        let [a2, b2, c2] = rhs_2d(&st2, 1.0, Dealias::TwoThirds).unwrap();
        let (a1, b1) = Boussinesq1d::new(&g1, 1.0, Dealias::TwoThirds).unwrap().rhs(&st1).unwrap();
        let (ea, eb) = (embed(&a1), embed(&b1));
        assert!(relative_l2(&[&a2], &[&ea]) < 1e-10);
        assert!(relative_l2(&[&b2], &[&eb]) < 1e-10);
        assert!(c2.max_abs() < 1e-12);
    }

    #[test]
    fn transport_and_gradient_forms_agree_for_curl_free_fields() {
        let g = plane(64);
        for seed in 0..5 {
            // band below n/4 keeps the quadratic products alias free
            let (u1, u2) = random_curl_free(&g, seed, 15);
            let (a1, a2) = gradient_form(&u1, &u2);
            let (b1, b2) = transport_form(&u1, &u2);
            assert!(relative_l2(&[&a1, &a2], &[&b1, &b2]) < 1e-10);
        }
    }

    #[test]
    fn rest_state_stays_at_rest() {
        let g = plane(16);
        let cfg = IntegratorConfig::default();
        let s = step_2d(&State2D::rest(&g), &cfg, 1.0).unwrap();
        assert_eq!(s.eta.max_abs() + s.u1.max_abs() + s.u2.max_abs(), 0.0);
        let [a, b, c] = rhs_2d(&State2D::rest(&g), 1.0, Dealias::None).unwrap();
        assert_eq!(a.max_abs() + b.max_abs() + c.max_abs(), 0.0);
    }
}
