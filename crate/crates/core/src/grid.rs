//! Periodic grids and discrete Fourier transforms.
//!
//! Normalization: the forward transform carries a factor `1/n` per axis, so the
//! zero mode of a spectrum is the mean of the field and
//!
//! ```text
//! f(x) = sum_k fhat(k) exp(i k.x),   int |f|^2 dx = L^dim * sum_k |fhat(k)|^2
//! ```
//!
//! where `L^dim` is the measure of the periodic cell. Every norm in the crate
//! carries that measure factor, so discrete norms converge to continuum norms
//! as the grid is refined.
//!
//! Two-dimensional data is stored row-major with axis 0 (`x1`) slowest:
//! `flat = i1 * n2 + i2`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Spectrum = Vec<Complex64>;

/// Relative size of the imaginary residue tolerated after a round trip.
pub const ROUND_TRIP_TOL: f64 = 1e-12;

/// Plain description of a periodic grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub n: Vec<usize>,
    pub period: Vec<f64>,
    pub wavenumbers: Vec<Vec<f64>>,
}

impl GridSpec {
    pub fn new(n: &[usize], period: &[f64]) -> Result<Self> {
        let dim = n.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::Grid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if period.len() != dim {
            return Err(Error::Grid(format!(
                "{dim} axes but {} period lengths",
                period.len()
            )));
        }
        for (&na, &la) in n.iter().zip(period) {
            if na < 8 || !na.is_power_of_two() {
                return Err(Error::Grid(format!(
                    "points per axis must be a power of two >= 8, got {na}"
                )));
            }
            if !(la.is_finite() && la > 0.0) {
                return Err(Error::Grid(format!("period must be positive, got {la}")));
            }
        }
        let wavenumbers = n
            .iter()
            .zip(period)
            .map(|(&na, &la)| {
                (0..na)
                    .map(|j| 2.0 * PI * signed_frequency(j, na) as f64 / la)
                    .collect()
            })
            .collect();
        Ok(Self {
            dim,
            n: n.to_vec(),
            period: period.to_vec(),
            wavenumbers,
        })
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Measure of the periodic cell, `L1 * ... * Ldim`.
    pub fn measure(&self) -> f64 {
        self.period.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.measure() / self.len() as f64
    }

    /// Per-axis indices of a flat index.
    pub fn unflatten(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.n[1], flat % self.n[1]]
        }
    }

    pub fn flatten(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.n[1] + idx[1]
        }
    }

    /// Physical coordinates of a grid point (unused axes are 0).
    pub fn coords(&self, flat: usize) -> [f64; 2] {
        let idx = self.unflatten(flat);
        let mut x = [0.0; 2];
        for a in 0..self.dim {
            x[a] = idx[a] as f64 * self.period[a] / self.n[a] as f64;
        }
        x
    }

    /// Wavevector of a flat spectral index (unused axes are 0).
    pub fn wavevector(&self, flat: usize) -> [f64; 2] {
        let idx = self.unflatten(flat);
        let mut k = [0.0; 2];
        for a in 0..self.dim {
            k[a] = self.wavenumbers[a][idx[a]];
        }
        k
    }

    /// Signed integer frequencies of a flat spectral index.
    pub fn frequency(&self, flat: usize) -> [i64; 2] {
        let idx = self.unflatten(flat);
        let mut m = [0; 2];
        for a in 0..self.dim {
            m[a] = signed_frequency(idx[a], self.n[a]);
        }
        m
    }

    pub fn is_nyquist(&self, flat: usize) -> bool {
        let idx = self.unflatten(flat);
        (0..self.dim).any(|a| idx[a] == self.n[a] / 2)
    }

    /// Largest wavevector modulus on the grid.
    pub fn max_wavenumber(&self) -> f64 {
        (0..self.dim)
            .map(|a| (PI * self.n[a] as f64 / self.period[a]).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Standard FFT frequency layout: `0, 1, ..., n/2-1, -n/2, ..., -1`.
pub fn signed_frequency(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// A grid together with its FFT plans and cached wavevectors.
///
/// Plans are immutable after construction, so a `Grid` can be shared across
/// threads behind an `Arc`.
pub struct Grid {
    spec: GridSpec,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    kvec: Vec<[f64; 2]>,
    kmod: Vec<f64>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Arc<Self> {
        let mut planner = FftPlanner::new();
        let forward = spec.n.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = spec.n.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let kvec: Vec<[f64; 2]> = (0..spec.len()).map(|i| spec.wavevector(i)).collect();
        let kmod = kvec.iter().map(|k| k[0].hypot(k[1])).collect();
        Arc::new(Self {
            spec,
            forward,
            inverse,
            kvec,
            kmod,
        })
    }

    pub fn line(n: usize, period: f64) -> Result<Arc<Self>> {
        Ok(Self::new(GridSpec::new(&[n], &[period])?))
    }

    pub fn plane(n: [usize; 2], period: [f64; 2]) -> Result<Arc<Self>> {
        Ok(Self::new(GridSpec::new(&n, &period)?))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn len(&self) -> usize {
        self.kvec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kvec.is_empty()
    }

    /// Wavevectors indexed like a spectrum.
    pub fn wavevectors(&self) -> &[[f64; 2]] {
        &self.kvec
    }

    /// `|k|` indexed like a spectrum.
    pub fn wavenumber_moduli(&self) -> &[f64] {
        &self.kmod
    }

    pub fn forward(&self, values: &[f64]) -> Spectrum {
        assert_eq!(values.len(), self.len(), "field size does not match grid");
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, &self.forward);
        let scale = 1.0 / self.len() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    pub fn forward_complex(&self, values: &[Complex64]) -> Spectrum {
        let mut buf = values.to_vec();
        self.transform(&mut buf, &self.forward);
        let scale = 1.0 / self.len() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    pub fn inverse_complex(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(spectrum.len(), self.len(), "spectrum size does not match grid");
        let mut buf = spectrum.to_vec();
        self.transform(&mut buf, &self.inverse);
        buf
    }

    /// Inverse transform keeping the real part.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<f64> {
        self.inverse_complex(spectrum).into_iter().map(|c| c.re).collect()
    }

    /// Inverse transform returning the real part and the largest imaginary residue.
    pub fn inverse_with_residue(&self, spectrum: &[Complex64]) -> (Vec<f64>, f64) {
        let full = self.inverse_complex(spectrum);
        let residue = full.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
        (full.into_iter().map(|c| c.re).collect(), residue)
    }

    fn transform(&self, buf: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        match self.spec.dim {
            1 => plans[0].process(buf),
            _ => {
                let (n1, n2) = (self.spec.n[0], self.spec.n[1]);
                // rows are contiguous along axis 1
                plans[1].process(buf);
                let mut tr = transpose(buf, n1, n2);
                plans[0].process(&mut tr);
                let back = transpose(&tr, n2, n1);
                buf.copy_from_slice(&back);
            }
        }
    }
}

fn transpose(src: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = src[r * cols + c];
        }
    }
    out
}

/// Real grid function.
#[derive(Clone, Debug)]
pub struct RealField {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![c; grid.len()],
        }
    }

    pub fn new(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            values,
        })
    }

    /// Samples `f(x)` at every grid point; `x[1]` is 0 in one dimension.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.spec().coords(i))).collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    /// Real part of the inverse transform of `spectrum`.
    pub fn from_spectrum(grid: &Arc<Grid>, spectrum: &[Complex64]) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: grid.inverse(spectrum),
        }
    }

    pub fn spectrum(&self) -> Spectrum {
        self.grid.forward(&self.values)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Grid quadrature of the field, exact for band-limited periodic data.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.spec().cell_volume()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert!(self.same_grid(other));
        Self {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }
}
