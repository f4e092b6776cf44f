//! Initial data families.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, RealField};
use crate::model1d::State1D;
use crate::model2d::{project_curl_free, State2D};
use crate::random::{random_field, RandomFieldSpec};
use crate::symbols::{eval_k, Symbol};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum InitialData {
    Rest,
    /// `eta = a exp(-|x - c|^2 / width^2)` centred in the box. The velocity
    /// is `velocity * eta` in 1D and `velocity * grad eta` in 2D.
    Gaussian {
        amplitude: f64,
        width: f64,
        velocity: f64,
    },
    /// Right-going linear wave along the first axis with integer `mode`:
    /// `eta = a cos(k x1)`, `u1 = a / sqrt(K(k)) cos(k x1)`.
    PlaneWave { mode: usize, amplitude: f64 },
    /// Band-limited random fields rescaled to the given sup norms. The
    /// elevation uses the run seed, the velocity the seed plus one.
    Random {
        decay: f64,
        band: usize,
        amplitude: f64,
        velocity: f64,
    },
    /// Grid values supplied by the user, row-major.
    Arrays {
        eta: Vec<f64>,
        u1: Vec<f64>,
        #[serde(default)]
        u2: Vec<f64>,
    },
}

impl InitialData {
    pub fn name(&self) -> &'static str {
        match self {
            InitialData::Rest => "rest",
            InitialData::Gaussian { .. } => "gaussian",
            InitialData::PlaneWave { .. } => "plane-wave",
            InitialData::Random { .. } => "random",
            InitialData::Arrays { .. } => "arrays",
        }
    }
}

fn gaussian(grid: &Arc<Grid>, a: f64, width: f64) -> RealField {
    let spec = grid.spec();
    let centre: Vec<f64> = spec.period.iter().map(|l| 0.5 * l).collect();
    RealField::from_fn(grid, |x| {
        let r2: f64 = (0..spec.dim).map(|d| (x[d] - centre[d]).powi(2)).sum();
        a * (-r2 / (width * width)).exp()
    })
}

fn scaled_random(grid: &Arc<Grid>, seed: u64, decay: f64, band: usize, sup: f64) -> Result<RealField> {
    let n = *grid.spec().n.iter().min().expect("grid has an axis");
    if 2 * band >= n {
        return Err(Error::Domain(format!("band {band} not resolved by n={n}")));
    }
    let f = random_field(
        grid,
        &RandomFieldSpec {
            seed,
            n,
            decay,
            band,
            mean: 0.0,
        },
    );
    let m = f.max_abs();
    Ok(if m == 0.0 { f } else { f.scaled(sup / m) })
}

fn plane_wave(grid: &Arc<Grid>, mode: usize, a: f64, beta: f64) -> Result<(RealField, RealField)> {
    let spec = grid.spec();
    if 2 * mode >= spec.n[0] {
        return Err(Error::Domain(format!("plane-wave mode {mode} not resolved")));
    }
    let k = 2.0 * PI * mode as f64 / spec.period[0];
    let c = if mode == 0 { 0.0 } else { a / eval_k(k, beta).sqrt() };
    Ok((
        RealField::from_fn(grid, |x| a * (k * x[0]).cos()),
        RealField::from_fn(grid, |x| c * (k * x[0]).cos()),
    ))
}

fn array(grid: &Arc<Grid>, values: &[f64], name: &str) -> Result<RealField> {
    if values.len() != grid.len() {
        return Err(Error::Domain(format!(
            "initial array {name} has {} values, the grid has {}",
            values.len(),
            grid.len()
        )));
    }
    RealField::new(grid, values.to_vec())
}

pub fn initial_1d(grid: &Arc<Grid>, data: &InitialData, seed: u64, beta: f64) -> Result<State1D> {
    let (eta, u) = match data {
        InitialData::Rest => return Ok(State1D::rest(grid)),
        InitialData::Gaussian {
            amplitude,
            width,
            velocity,
        } => {
            let eta = gaussian(grid, *amplitude, *width);
            let u = eta.scaled(*velocity);
            (eta, u)
        }
        InitialData::PlaneWave { mode, amplitude } => plane_wave(grid, *mode, *amplitude, beta)?,
        InitialData::Random {
            decay,
            band,
            amplitude,
            velocity,
        } => (
            scaled_random(grid, seed, *decay, *band, *amplitude)?,
            scaled_random(grid, seed.wrapping_add(1), *decay, *band, *velocity)?,
        ),
        InitialData::Arrays { eta, u1, .. } => (array(grid, eta, "eta")?, array(grid, u1, "u1")?),
    };
    State1D::new(eta, u, 0.0)
}

/// Builds 2D data; the velocity is projected onto curl-free fields.
pub fn initial_2d(grid: &Arc<Grid>, data: &InitialData, seed: u64, beta: f64) -> Result<State2D> {
    let grad = |f: &RealField| -> Result<(RealField, RealField)> {
        Ok((
            crate::ops::apply_multiplier(&Symbol::Derivative(0), f)?,
            crate::ops::apply_multiplier(&Symbol::Derivative(1), f)?,
        ))
    };
    let (eta, u1, u2) = match data {
        InitialData::Rest => return Ok(State2D::rest(grid)),
        InitialData::Gaussian {
            amplitude,
            width,
            velocity,
        } => {
            let eta = gaussian(grid, *amplitude, *width);
            let (a, b) = grad(&eta)?;
            (eta, a.scaled(*velocity), b.scaled(*velocity))
        }
        InitialData::PlaneWave { mode, amplitude } => {
            let (eta, u) = plane_wave(grid, *mode, *amplitude, beta)?;
            (eta, u, RealField::zeros(grid))
        }
        InitialData::Random {
            decay,
            band,
            amplitude,
            velocity,
        } => {
            let eta = scaled_random(grid, seed, *decay, *band, *amplitude)?;
            let phi = scaled_random(grid, seed.wrapping_add(1), *decay + 1.0, *band, 1.0)?;
            let (a, b) = grad(&phi)?;
            let m = a.max_abs().max(b.max_abs());
            let c = if m == 0.0 { 0.0 } else { velocity / m };
            (eta, a.scaled(c), b.scaled(c))
        }
        InitialData::Arrays { eta, u1, u2 } => (
            array(grid, eta, "eta")?,
            array(grid, u1, "u1")?,
            array(grid, u2, "u2")?,
        ),
    };
    let (u1, u2) = project_curl_free(&u1, &u2)?;
    State2D::new(eta, u1, u2, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model2d::curl_norm;

    #[test]
    fn gaussian_minimum_depth() {
        let g = Grid::line(256, 2.0 * PI).unwrap();
        let data = InitialData::Gaussian {
            amplitude: -0.2,
            width: 2.0 * PI / 16.0,
            velocity: 0.0,
        };
        let s = initial_1d(&g, &data, 0, 1.0).unwrap();
        assert!((s.min_depth() - 0.8).abs() < 1e-14);
        assert_eq!(s.u.max_abs(), 0.0);
    }

    #[test]
    fn random_data_has_requested_sup() {
        let g = Grid::line(128, 2.0 * PI).unwrap();
        let data = InitialData::Random {
            decay: 1.5,
            band: 20,
            amplitude: 0.3,
            velocity: 0.1,
        };
        let s = initial_1d(&g, &data, 9, 1.0).unwrap();
        assert!((s.eta.max_abs() - 0.3).abs() < 1e-15);
        assert!((s.u.max_abs() - 0.1).abs() < 1e-15);
        let again = initial_1d(&g, &data, 9, 1.0).unwrap();
        assert_eq!(s.eta.values, again.eta.values);
    }

    #[test]
    fn two_dimensional_data_is_curl_free() {
        let g = Grid::plane([32, 32], [2.0 * PI, 2.0 * PI]).unwrap();
        for data in [
            InitialData::Gaussian {
                amplitude: 0.1,
                width: 1.0,
                velocity: 0.5,
            },
            InitialData::Random {
                decay: 1.0,
                band: 8,
                amplitude: 0.1,
                velocity: 0.1,
            },
        ] {
            let s = initial_2d(&g, &data, 1, 1.0).unwrap();
            assert!(curl_norm(&s.u1, &s.u2) < 1e-13);
            assert!(s.u1.max_abs() > 0.0);
        }
    }

    #[test]
    fn arrays_are_checked_against_the_grid() {
        let g = Grid::line(16, 1.0).unwrap();
        let bad = InitialData::Arrays {
            eta: vec![0.0; 8],
            u1: vec![0.0; 16],
            u2: vec![],
        };
        assert!(initial_1d(&g, &bad, 0, 1.0).is_err());
    }
}
