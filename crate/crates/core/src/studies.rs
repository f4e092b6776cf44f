//! Numerical studies: plane-wave return, convergence orders, conservation,
//! energy-monitor refinement, non-cavitation, curl preservation and
//! continuity of the flow.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::energy::{modified_energy_1d, EnergyReport};
use crate::error::{Error, Result};
use crate::grid::{Grid, RealField};
use crate::initial::{initial_1d, initial_2d, InitialData};
use crate::integrator::{IntegratorConfig, Scheme};
use crate::model1d::{evolve, hamiltonian, State1D};
use crate::model2d::{curl_norm, evolve_2d, relative_l2, velocity_norm};
use crate::monitors::{energy_inequality_monitor, existence_time, noncavitation_monitor, ExistenceEstimate, NoncavitationVerdict};
use crate::ops::{lp_norm, sobolev_norm, Lp};
use crate::symbols::eval_k;

fn relative_error(a: &[&RealField], b: &[&RealField]) -> f64 {
    relative_l2(a, b)
}

/// Linear period of the plane wave with integer mode `mode` on a box of
/// length `period`.
pub fn plane_wave_period(mode: usize, period: f64, beta: f64) -> f64 {
    let k = 2.0 * PI * mode as f64 / period;
    2.0 * PI / (k * eval_k(k, beta).sqrt())
}

fn period_config(period: f64, steps: usize) -> IntegratorConfig {
    IntegratorConfig {
        dt: period / steps as f64,
        t_end: period,
        output_stride: steps,
        nonlinear: false,
        ..Default::default()
    }
}

/// Relative L2 error after one linear period of a plane wave in 1D.
pub fn plane_wave_return_1d(mode: usize, n: usize, period: f64, beta: f64, steps: usize) -> Result<f64> {
    let g = Grid::line(n, period)?;
    let data = InitialData::PlaneWave { mode, amplitude: 1e-3 };
    let s0 = initial_1d(&g, &data, 0, beta)?;
    let cfg = period_config(plane_wave_period(mode, period, beta), steps);
    let s1 = evolve(&s0, &cfg, beta, |_| Ok(()))?;
    Ok(relative_error(&[&s1.eta, &s1.u], &[&s0.eta, &s0.u]))
}

/// As [`plane_wave_return_1d`] for a wave along the first axis of a square box.
pub fn plane_wave_return_2d(mode: usize, n: usize, period: f64, beta: f64, steps: usize) -> Result<f64> {
    let g = Grid::plane([n, n], [period, period])?;
    let data = InitialData::PlaneWave { mode, amplitude: 1e-3 };
    let s0 = initial_2d(&g, &data, 0, beta)?;
    let cfg = period_config(plane_wave_period(mode, period, beta), steps);
    let s1 = evolve_2d(&s0, &cfg, beta, |_| Ok(()))?;
    Ok(relative_error(&[&s1.eta, &s1.u1, &s1.u2], &[&s0.eta, &s0.u1, &s0.u2]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderReport {
    /// `(dt, |v_dt - v_{dt/2}|)`.
    pub differences: Vec<(f64, f64)>,
    /// `log2` of successive difference ratios.
    pub orders: Vec<f64>,
}

/// Observed temporal order from successive dt-halvings: with `levels`
/// step sizes `dt, dt/2, ...`, differences of consecutive solutions at
/// `t_end` are compared.
pub fn temporal_order(
    data: &State1D,
    beta: f64,
    scheme: Scheme,
    dt: f64,
    t_end: f64,
    levels: usize,
) -> Result<OrderReport> {
    if levels < 3 {
        return Err(Error::InsufficientData { len: levels });
    }
    let finals = (0..levels)
        .map(|l| {
            let h = dt / 2f64.powi(l as i32);
            let cfg = IntegratorConfig {
                dt: h,
                t_end,
                scheme,
                output_stride: usize::MAX,
                ..Default::default()
            };
            evolve(data, &cfg, beta, |_| Ok(()))
        })
        .collect::<Result<Vec<_>>>()?;
    let differences: Vec<(f64, f64)> = finals
        .windows(2)
        .enumerate()
        .map(|(l, w)| {
            let e = lp_norm(&w[0].eta.sub(&w[1].eta), Lp::Two).hypot(lp_norm(&w[0].u.sub(&w[1].u), Lp::Two));
            (dt / 2f64.powi(l as i32), e)
        })
        .collect();
    let orders = differences.windows(2).map(|w| (w[0].1 / w[1].1).log2()).collect();
    Ok(OrderReport { differences, orders })
}

/// Relative L2 distance at `t_end` between runs on `ns` and a reference
/// run on `n_ref`, sampled at the coarse grid points.
pub fn spatial_convergence(
    data: &InitialData,
    period: f64,
    beta: f64,
    cfg: &IntegratorConfig,
    ns: &[usize],
    n_ref: usize,
) -> Result<Vec<(usize, f64)>> {
    let run = |n: usize| -> Result<State1D> {
        let g = Grid::line(n, period)?;
        evolve(&initial_1d(&g, data, 0, beta)?, cfg, beta, |_| Ok(()))
    };
    let reference = run(n_ref)?;
    ns.iter()
        .map(|&n| {
            if !n_ref.is_multiple_of(n) {
                return Err(Error::Grid(format!("{n} does not divide the reference size {n_ref}")));
            }
            let coarse = run(n)?;
            let stride = n_ref / n;
            let sample = |f: &RealField| {
                RealField::new(&coarse.eta.grid, f.values.iter().step_by(stride).copied().collect())
            };
            let (re, ru) = (sample(&reference.eta)?, sample(&reference.u)?);
            Ok((n, relative_error(&[&coarse.eta, &coarse.u], &[&re, &ru])))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub mass: f64,
    pub momentum: f64,
    pub hamiltonian: f64,
}

/// Largest relative drift of `int eta`, `int u` and `H` over the recorded
/// states. Mass and momentum are normalised by
/// `max(|Q(0)|, |eta0|_{L1} + |u0|_{L1})`, the Hamiltonian by `|H(0)|`.
pub fn conservation_drift(data: &State1D, cfg: &IntegratorConfig, beta: f64) -> Result<Drift> {
    let scale = lp_norm(&data.eta, Lp::One) + lp_norm(&data.u, Lp::One);
    let (m0, p0, h0) = (data.eta.integral(), data.u.integral(), hamiltonian(data, beta));
    let mut d = Drift {
        mass: 0.0,
        momentum: 0.0,
        hamiltonian: 0.0,
    };
    evolve(data, cfg, beta, |st| {
        d.mass = d.mass.max((st.eta.integral() - m0).abs() / m0.abs().max(scale));
        d.momentum = d.momentum.max((st.u.integral() - p0).abs() / p0.abs().max(scale));
        d.hamiltonian = d.hamiltonian.max((hamiltonian(st, beta) - h0).abs() / h0.abs().max(f64::MIN_POSITIVE));
        Ok(())
    })?;
    Ok(d)
}

/// Energy reports along a 1D run at the output cadence.
pub fn energy_series(data: &State1D, cfg: &IntegratorConfig, beta: f64, s: f64) -> Result<Vec<EnergyReport>> {
    let mut out = Vec::new();
    evolve(data, cfg, beta, |st| {
        out.push(modified_energy_1d(st, s)?);
        Ok(())
    })?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyMonitorRow {
    pub n: usize,
    pub modified: f64,
    pub naive: f64,
    pub sandwich_violations: usize,
}

/// The three standard runs of the energy-monitor study.
pub fn standard_runs() -> Vec<(&'static str, InitialData, u64)> {
    vec![
        (
            "gaussian-at-rest",
            InitialData::Gaussian {
                amplitude: 0.1,
                width: 2.0 * PI / 16.0,
                velocity: 0.0,
            },
            0,
        ),
        (
            "gaussian-moving",
            InitialData::Gaussian {
                amplitude: 0.1,
                width: 2.0 * PI / 16.0,
                velocity: 1.0,
            },
            0,
        ),
        (
            "random",
            InitialData::Random {
                decay: 2.0,
                band: 16,
                amplitude: 0.1,
                velocity: 0.1,
            },
            7,
        ),
    ]
}

/// Sup ratios `|dE/dt| / (E + E^2)` of the modified and the naive energy
/// for one initial datum at several resolutions.
pub fn energy_monitor_study(
    data: &InitialData,
    seed: u64,
    period: f64,
    beta: f64,
    s: f64,
    cfg: &IntegratorConfig,
    ns: &[usize],
) -> Result<Vec<EnergyMonitorRow>> {
    ns.iter()
        .map(|&n| {
            let g = Grid::line(n, period)?;
            let series = energy_series(&initial_1d(&g, data, seed, beta)?, cfg, beta, s)?;
            let t: Vec<f64> = series.iter().map(|r| r.t).collect();
            let e: Vec<f64> = series.iter().map(|r| r.e_s).collect();
            let naive: Vec<f64> = series.iter().map(|r| r.naive()).collect();
            Ok(EnergyMonitorRow {
                n,
                modified: energy_inequality_monitor(&t, &e)?.sup_ratio,
                naive: energy_inequality_monitor(&t, &naive)?.sup_ratio,
                sandwich_violations: series.iter().filter(|r| !r.sandwich_holds(1e-12)).count(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoncavitationStudy {
    pub estimate: ExistenceEstimate,
    pub verdict: NoncavitationVerdict,
    pub t_end: f64,
}

/// Runs until `min(T2, t_cap)` and checks `min(1 + eta) >= h0/2`.
pub fn noncavitation_study(
    data: &State1D,
    beta: f64,
    s: f64,
    h0: f64,
    c1: f64,
    c2: f64,
    dt: f64,
    t_cap: f64,
) -> Result<NoncavitationStudy> {
    let est = existence_time(sobolev_norm(&data.eta, s), sobolev_norm(&data.u, s + 0.5), h0, c1, c2)?;
    let t_end = est.t2.min(t_cap);
    let steps = (t_end / dt).ceil().max(1.0);
    let cfg = IntegratorConfig {
        dt: t_end / steps,
        t_end,
        output_stride: 1,
        ..Default::default()
    };
    let mut samples = Vec::new();
    evolve(data, &cfg, beta, |st| {
        samples.push((st.t, st.min_depth()));
        Ok(())
    })?;
    // the last sample may exceed T2 by rounding of t
    if let Some(last) = samples.last_mut() {
        last.0 = last.0.min(t_end);
    }
    Ok(NoncavitationStudy {
        verdict: noncavitation_monitor(&samples, h0, t_end),
        estimate: est,
        t_end,
    })
}

/// Largest relative curl `|curl u|_2 / |u|_{H^1}` over a 2D run.
pub fn curl_preservation(data: &InitialData, n: usize, period: f64, beta: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let g = Grid::plane([n, n], [period, period])?;
    let s0 = initial_2d(&g, data, 0, beta)?;
    let mut worst = 0.0f64;
    evolve_2d(&s0, cfg, beta, |st| {
        let scale = velocity_norm(&st.u1, &st.u2, 1.0);
        if scale > 0.0 {
            worst = worst.max(curl_norm(&st.u1, &st.u2) / scale);
        }
        Ok(())
    })?;
    Ok(worst)
}

/// Multiplies the spectrum by `exp(-(eps |k|)^2)`.
pub fn mollify(f: &RealField, eps: f64) -> RealField {
    let g = &f.grid;
    let spec: Vec<_> = f
        .spectrum()
        .iter()
        .zip(g.wavenumber_moduli())
        .map(|(c, &k)| c * (-(eps * k).powi(2)).exp())
        .collect();
    RealField::from_spectrum(g, &spec)
}

/// `|eta|_{H^1} + |u|_{H^{3/2}}` of a difference.
pub fn h1_h32_distance(a: &State1D, b: &State1D) -> f64 {
    sobolev_norm(&a.eta.sub(&b.eta), 1.0) + sobolev_norm(&a.u.sub(&b.u), 1.5)
}

/// Distances at `cfg.t_end` between the solution from `data` and the
/// solutions from its mollifications at the scales `eps`.
pub fn continuity_of_flow(data: &State1D, eps: &[f64], cfg: &IntegratorConfig, beta: f64) -> Result<Vec<(f64, f64)>> {
    let target = evolve(data, cfg, beta, |_| Ok(()))?;
    eps.iter()
        .map(|&e| {
            let smooth = State1D::new(mollify(&data.eta, e), mollify(&data.u, e), data.t)?;
            let sol = evolve(&smooth, cfg, beta, |_| Ok(()))?;
            Ok((e, h1_h32_distance(&sol, &target)))
        })
        .collect()
}

/// Largest over smallest of a positive series.
pub fn spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > 0.0 {
        hi / lo
    } else if hi == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Grid helper shared by the studies.
pub fn line(n: usize) -> Result<Arc<Grid>> {
    Grid::line(n, 2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_wave_returns_after_one_period() {
        let e = plane_wave_return_1d(4, 64, 2.0 * PI, 1.0, 200).unwrap();
        assert!(e < 1e-10, "{e}");
        let e = plane_wave_return_2d(3, 16, 2.0 * PI, 1.0, 100).unwrap();
        assert!(e < 1e-10, "{e}");
    }

    #[test]
    fn mollification_damps_high_modes() {
        let g = line(64).unwrap();
        let f = RealField::from_fn(&g, |x| (10.0 * x[0]).cos());
        let m = mollify(&f, 0.1);
        assert!((m.max_abs() - (-1.0f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn spread_of_series() {
        assert_eq!(spread([1.0, 2.0, 1.5]), 2.0);
        assert_eq!(spread([0.0, 0.0]), 1.0);
        assert!(spread([0.0, 1.0]).is_infinite());
    }
}
