//! Deterministic random band-limited fields.
//!
//! Algorithm: a `ChaCha8Rng` seeded with `seed` draws one uniform phase in
//! `[0, 2 pi)` per Fourier mode of a half space, visiting modes in
//! lexicographic order of their signed frequencies `(m1, m2)` with
//! `|m|_inf <= band`. The mode receives amplitude `|k|^(-decay)` and its
//! mirror the complex conjugate, so the field is real. The zero mode is
//! `mean`. The same `(seed, spec)` always yields the same bits, and the same
//! seed yields the same function on any grid that resolves the band.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::{Grid, RealField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomFieldSpec {
    pub seed: u64,
    /// Points per axis of the grid the field is meant for.
    pub n: usize,
    /// Spectral decay exponent `p` in `|k|^(-p)`.
    pub decay: f64,
    /// Largest active integer frequency per axis.
    pub band: usize,
    pub mean: f64,
}

/// Samples the random field described by `spec` on `grid`.
///
/// # Panics
/// If the band is not resolved by the grid (`band >= n/2` on some axis).
pub fn random_field(grid: &Arc<Grid>, spec: &RandomFieldSpec) -> RealField {
    let gs = grid.spec();
    for &n in &gs.n {
        assert!(2 * spec.band < n, "band {} not resolved by n={n}", spec.band);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut fhat = vec![Complex64::new(0.0, 0.0); grid.len()];
    fhat[0] = Complex64::new(spec.mean, 0.0);
    let b = spec.band as i64;
    let (r1, r2) = if gs.dim == 1 { (b, 0) } else { (b, b) };
    for m1 in -r1..=r1 {
        for m2 in -r2..=r2 {
            // one representative per conjugate pair
            if !(m1 > 0 || (m1 == 0 && m2 > 0)) {
                continue;
            }
            let theta: f64 = rng.gen_range(0.0..2.0 * PI);
            let mut kk = (2.0 * PI * m1 as f64 / gs.period[0]).powi(2);
            if gs.dim == 2 {
                kk += (2.0 * PI * m2 as f64 / gs.period[1]).powi(2);
            }
            let c = Complex64::from_polar(kk.sqrt().powf(-spec.decay), theta);
            let idx = index_of(gs, [m1, m2]);
            let mirror = index_of(gs, [-m1, -m2]);
            fhat[idx] = c;
            fhat[mirror] = c.conj();
        }
    }
    RealField::from_spectrum(grid, &fhat)
}

fn index_of(gs: &crate::grid::GridSpec, m: [i64; 2]) -> usize {
    let mut idx = [0usize; 2];
    for a in 0..gs.dim {
        idx[a] = m[a].rem_euclid(gs.n[a] as i64) as usize;
    }
    gs.flatten(idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_grid_independent() {
        let spec = RandomFieldSpec {
            seed: 42,
            n: 64,
            decay: 1.0,
            band: 10,
            mean: 0.25,
        };
        let g64 = Grid::line(64, 2.0 * PI).unwrap();
        let a = random_field(&g64, &spec);
        let b = random_field(&g64, &spec);
        assert_eq!(a.values, b.values);
        let g128 = Grid::line(128, 2.0 * PI).unwrap();
        let c = random_field(&g128, &spec);
        // every other point of the fine grid coincides with the coarse grid
        for i in 0..64 {
            assert!((a.values[i] - c.values[2 * i]).abs() < 1e-13);
        }
        let fh = a.spectrum();
        assert!((fh[0].re - 0.25).abs() < 1e-14);
        assert!(fh[11].norm() < 1e-14 && fh[10].norm() > 0.0);
    }

    #[test]
    fn two_dimensional_field_is_real_and_banded() {
        let g = Grid::plane([32, 32], [2.0 * PI, 2.0 * PI]).unwrap();
        let spec = RandomFieldSpec {
            seed: 7,
            n: 32,
            decay: 2.0,
            band: 6,
            mean: 0.0,
        };
        let f = random_field(&g, &spec);
        let (_, residue) = g.inverse_with_residue(&f.spectrum());
        assert!(residue < 1e-14);
        let fh = f.spectrum();
        for (i, c) in fh.iter().enumerate() {
            let m = g.spec().frequency(i);
            if m[0].abs() > 6 || m[1].abs() > 6 {
                assert!(c.norm() < 1e-14);
            }
        }
    }
}
