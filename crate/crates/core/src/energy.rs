//! Modified energies and their coercivity bounds.
//!
//! `E_s = 1/2 |eta|_{H^s}^2 + 1/2 |u|_{H^{s+1/2}}^2 + 1/2 int eta (J^s u)^2`.
//!
//! The bounds use `c0 = min(h0~, c0~)` with `h0~ = min(1 + eta)` measured on
//! the state and `c0~ = 1 - 2^{-1/2}`, and the upper factor `1 + h1` with
//! `h1 = max(max eta, 0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RealField;
use crate::model1d::State1D;
use crate::model2d::State2D;
use crate::ops::{apply_multiplier, sobolev_norm, weighted_norm_spectrum};
use crate::symbols::Symbol;

/// `inf_{|k| >= 1} 1 - (1 + k^2)^{-1/2}`.
pub const C0_TILDE: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    pub e_s: f64,
    pub hs_eta: f64,
    pub hs12_u: f64,
    pub cubic: f64,
    pub lower: f64,
    pub upper: f64,
    pub min_depth: f64,
    /// `|dE/dt| / (E + E^2)`; filled in by the energy monitor.
    pub ratio: f64,
}

impl EnergyReport {
    /// `1/2 (|eta|_{H^s}^2 + |u|_{H^{s+1/2}}^2)`, the energy without the cubic term.
    pub fn naive(&self) -> f64 {
        0.5 * (self.hs_eta * self.hs_eta + self.hs12_u * self.hs12_u)
    }

    pub fn sandwich_holds(&self, rel_tol: f64) -> bool {
        let slack = rel_tol * self.upper.abs().max(f64::MIN_POSITIVE);
        self.lower <= self.e_s + slack && self.e_s <= self.upper + slack
    }
}

/// `(c0, h1)` for the elevation `eta`.
pub fn sandwich_constants(eta: &RealField) -> (f64, f64) {
    let h0 = 1.0 + eta.min();
    (h0.min(C0_TILDE), eta.max().max(0.0))
}

fn cubic(eta: &RealField, js_u: &[RealField]) -> f64 {
    let dv = eta.grid.spec().cell_volume();
    let sum: f64 = (0..eta.values.len())
        .map(|i| {
            let sq: f64 = js_u.iter().map(|f| f.values[i] * f.values[i]).sum();
            eta.values[i] * sq
        })
        .sum();
    0.5 * sum * dv
}

fn report(t: f64, eta: &RealField, u: &[&RealField], s: f64) -> Result<EnergyReport> {
    if !eta.is_finite() || u.iter().any(|f| !f.is_finite()) {
        return Err(Error::NumericalBlowup { t });
    }
    let hs_eta = sobolev_norm(eta, s);
    let hs12_u = u
        .iter()
        .map(|f| sobolev_norm(f, s + 0.5).powi(2))
        .sum::<f64>()
        .sqrt();
    let js = Symbol::Bessel(s);
    let js_u = u
        .iter()
        .map(|f| apply_multiplier(&js, f))
        .collect::<Result<Vec<_>>>()?;
    let cubic = cubic(eta, &js_u);
    let e_s = 0.5 * hs_eta * hs_eta + 0.5 * hs12_u * hs12_u + cubic;
    let (c0, h1) = sandwich_constants(eta);
    let out = EnergyReport {
        t,
        e_s,
        hs_eta,
        hs12_u,
        cubic,
        lower: 0.5 * (hs_eta * hs_eta + c0 * hs12_u * hs12_u),
        upper: 0.5 * (hs_eta * hs_eta + (1.0 + h1) * hs12_u * hs12_u),
        min_depth: 1.0 + eta.min(),
        ratio: 0.0,
    };
    if !out.e_s.is_finite() {
        return Err(Error::NumericalBlowup { t });
    }
    Ok(out)
}

pub fn modified_energy_1d(state: &State1D, s: f64) -> Result<EnergyReport> {
    if s <= 2.0 {
        return Err(Error::Domain(format!("1D modified energy needs s > 2, got {s}")));
    }
    report(state.t, &state.eta, &[&state.u], s)
}

pub fn modified_energy_2d(state: &State2D, s: f64) -> Result<EnergyReport> {
    if s <= 3.0 {
        return Err(Error::Domain(format!("2D modified energy needs s > 3, got {s}")));
    }
    report(state.t, &state.eta, &[&state.u1, &state.u2], s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferenceEnergy {
    pub value: f64,
    /// `|eta~|_{H^1}`.
    pub h1_eta: f64,
    /// `|u~|_{H^{3/2}}`.
    pub h32_u: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Energy of the difference of two solutions, with the cubic weight taken
/// from the first one:
/// `2E~ = |eta~|^2 + |d eta~|^2 + |u~|^2 + |D^{1/2} d u~|^2 + int eta1 (d u~)^2`.
pub fn difference_energy(s1: &State1D, s2: &State1D) -> Result<DifferenceEnergy> {
    if !s1.eta.same_grid(&s2.eta) {
        return Err(Error::GridMismatch);
    }
    let g = s1.grid();
    let eta = s1.eta.sub(&s2.eta);
    let u = s1.u.sub(&s2.u);
    let h1_eta = sobolev_norm(&eta, 1.0);
    let uh = u.spectrum();
    let quad_u = weighted_norm_spectrum(g, &uh, |k| 1.0 + k * k * k).powi(2);
    let ux = apply_multiplier(&Symbol::Derivative(0), &u)?;
    let dv = g.spec().cell_volume();
    let cubic: f64 = s1
        .eta
        .values
        .iter()
        .zip(&ux.values)
        .map(|(e, d)| e * d * d)
        .sum::<f64>()
        * dv;
    let h32_u = sobolev_norm(&u, 1.5);
    let (c0, h1) = sandwich_constants(&s1.eta);
    Ok(DifferenceEnergy {
        value: 0.5 * (h1_eta * h1_eta + quad_u + cubic),
        h1_eta,
        h32_u,
        lower: 0.5 * (h1_eta * h1_eta + c0 * h32_u * h32_u),
        upper: 0.5 * (h1_eta * h1_eta + (1.0 + h1) * h32_u * h32_u),
    })
}
