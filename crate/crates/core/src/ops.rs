//! Multiplier application, norms and dealiasing.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec, RealField, ROUND_TRIP_TOL};
use crate::symbols::{Symbol, SymbolTable};

/// Applies a multiplier symbol to a real field.
///
/// Fails with [`Error::SymbolParity`] when the result has an imaginary part
/// above the round-trip tolerance, measured against the output and against
/// the input amplified by the largest symbol modulus.
pub fn apply_multiplier(sym: &Symbol, f: &RealField) -> Result<RealField> {
    apply_table(&sym.table(&f.grid), f)
}

pub fn apply_table(table: &SymbolTable, f: &RealField) -> Result<RealField> {
    let out = table.apply(&f.spectrum());
    let (values, residue) = f.grid.inverse_with_residue(&out);
    // rounding in the input spectrum is amplified by the largest symbol value
    let gain = table.values.iter().fold(1.0_f64, |m, v| m.max(v.norm()));
    let scale = values
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(gain * f.max_abs());
    if residue > ROUND_TRIP_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SymbolParity {
            symbol: table.name.clone(),
            residue,
        });
    }
    Ok(RealField {
        grid: Arc::clone(&f.grid),
        values,
    })
}

/// `|| J^s f ||_{L^2}` computed in symbol space.
pub fn sobolev_norm(f: &RealField, s: f64) -> f64 {
    sobolev_norm_spectrum(&f.grid, &f.spectrum(), s)
}

pub fn sobolev_norm_spectrum(grid: &Grid, spectrum: &[Complex64], s: f64) -> f64 {
    weighted_norm_spectrum(grid, spectrum, |k| (1.0 + k * k).powf(s))
}

/// `sqrt(L^dim * sum_k w(|k|) |fhat(k)|^2)`.
pub fn weighted_norm_spectrum(
    grid: &Grid,
    spectrum: &[Complex64],
    weight: impl Fn(f64) -> f64,
) -> f64 {
    let sum: f64 = spectrum
        .iter()
        .zip(grid.wavenumber_moduli())
        .map(|(c, &k)| weight(k) * c.norm_sqr())
        .sum();
    (grid.spec().measure() * sum).sqrt()
}

/// Lebesgue exponents realizable by grid quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lp {
    One,
    Two,
    Four,
    Infinity,
}

impl Lp {
    pub fn exponent(self) -> f64 {
        match self {
            Lp::One => 1.0,
            Lp::Two => 2.0,
            Lp::Four => 4.0,
            Lp::Infinity => f64::INFINITY,
        }
    }
}

/// Rectangle-rule `L^p` norm; the grid maximum for `p = infinity`.
pub fn lp_norm(f: &RealField, p: Lp) -> f64 {
    lp_norm_values(f.grid.spec(), &f.values, p)
}

pub fn lp_norm_values(spec: &GridSpec, values: &[f64], p: Lp) -> f64 {
    let dv = spec.cell_volume();
    match p {
        Lp::Infinity => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        Lp::One => values.iter().map(|v| v.abs()).sum::<f64>() * dv,
        Lp::Two => (values.iter().map(|v| v * v).sum::<f64>() * dv).sqrt(),
        Lp::Four => (values.iter().map(|v| (v * v) * (v * v)).sum::<f64>() * dv).powf(0.25),
    }
}

/// Treatment of the quadratic products.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dealias {
    /// Zero every mode with `3|m| >= n` on some axis after each product.
    TwoThirds,
    None,
}

impl Dealias {
    pub fn mask(self, spec: &GridSpec) -> Vec<bool> {
        (0..spec.len())
            .map(|i| match self {
                Dealias::None => true,
                Dealias::TwoThirds => {
                    let m = spec.frequency(i);
                    (0..spec.dim).all(|a| 3 * m[a].unsigned_abs() < spec.n[a] as u64)
                }
            })
            .collect()
    }
}

/// Zeroes the spectrum outside `mask`.
pub fn project(spectrum: &mut [Complex64], mask: &[bool]) {
    for (c, &keep) in spectrum.iter_mut().zip(mask) {
        if !keep {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Removes the mean.
pub fn mean_zero(f: &RealField) -> RealField {
    let mean = f.values.iter().sum::<f64>() / f.values.len() as f64;
    f.map(|v| v - mean)
}

/// Maximum of `|f|` after trigonometric interpolation onto a grid refined
/// by `factor` along every axis. A sharper estimate of the true supremum
/// than the grid maximum.
pub fn oversampled_max(f: &RealField, factor: usize) -> f64 {
    let spec = f.grid.spec();
    let fine_n: Vec<usize> = spec.n.iter().map(|&n| n * factor).collect();
    let fine = Grid::new(
        GridSpec::new(&fine_n, &spec.period).expect("refined grid of a valid grid is valid"),
    );
    let coarse = f.spectrum();
    let mut padded = vec![Complex64::new(0.0, 0.0); fine.len()];
    for (i, &c) in coarse.iter().enumerate() {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let m = spec.frequency(i);
        // a Nyquist coefficient is split evenly between +n/2 and -n/2
        let mut targets: Vec<([i64; 2], f64)> = vec![(m, 1.0)];
        for a in 0..spec.dim {
            if m[a] == -(spec.n[a] as i64) / 2 {
                targets = targets
                    .into_iter()
                    .flat_map(|(mm, w)| {
                        let mut flip = mm;
                        flip[a] = -mm[a];
                        [(mm, 0.5 * w), (flip, 0.5 * w)]
                    })
                    .collect();
            }
        }
        for (mm, w) in targets {
            let mut idx = [0usize; 2];
            for a in 0..spec.dim {
                idx[a] = mm[a].rem_euclid(fine_n[a] as i64) as usize;
            }
            padded[fine.spec().flatten(idx)] += c * w;
        }
    }
    fine.inverse(&padded)
        .iter()
        .fold(0.0, |m, v: &f64| m.max(v.abs()))
}
