//! Run monitors: a-priori existence times, non-cavitation and the energy
//! inequality.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExistenceEstimate {
    pub t1: f64,
    /// `+inf` when the velocity vanishes (serialized as `null`).
    pub t2: f64,
    pub t0: f64,
    pub c1: f64,
    pub c2: f64,
    pub h0: f64,
}

/// `T1 = ln(1 + 1/(1 + C1 |(eta0,u0)|^2)) / C1`, `T2 = h0 / (C2 (1 + |eta0|) |u0|)`.
///
/// `eta_norm` is `|eta0|_{H^s}` and `u_norm` is `|u0|_{H^{s+1/2}}`; the
/// data norm entering `T1` is their Euclidean combination.
pub fn existence_time(eta_norm: f64, u_norm: f64, h0: f64, c1: f64, c2: f64) -> Result<ExistenceEstimate> {
    if !(h0 > 0.0 && h0 < 1.0) {
        return Err(Error::Domain(format!("h0 must lie in (0, 1), got {h0}")));
    }
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(Error::Domain(format!("C1 and C2 must be positive, got {c1}, {c2}")));
    }
    if !(eta_norm >= 0.0 && u_norm >= 0.0) || !(eta_norm + u_norm).is_finite() {
        return Err(Error::Domain("data norms must be finite and nonnegative".into()));
    }
    let data = eta_norm * eta_norm + u_norm * u_norm;
    let t1 = (1.0 / (1.0 + c1 * data)).ln_1p() / c1;
    let t2 = if u_norm == 0.0 {
        f64::INFINITY
    } else {
        h0 / (c2 * (1.0 + eta_norm) * u_norm)
    };
    Ok(ExistenceEstimate {
        t1,
        t2,
        t0: t1.min(t2),
        c1,
        c2,
        h0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoncavitationVerdict {
    pub holds: bool,
    pub floor: f64,
    /// Smallest recorded `min(1 + eta)` on `[0, T2]`.
    pub min_depth: f64,
    pub first_violation: Option<f64>,
    /// Last recorded time that was checked.
    pub checked_until: f64,
}

/// Checks `min(1 + eta(t)) >= h0/2` on every sample with `t <= t2`.
/// `samples` holds `(t, min(1 + eta))` in time order.
pub fn noncavitation_monitor(samples: &[(f64, f64)], h0: f64, t2: f64) -> NoncavitationVerdict {
    let floor = 0.5 * h0;
    let mut out = NoncavitationVerdict {
        holds: true,
        floor,
        min_depth: f64::INFINITY,
        first_violation: None,
        checked_until: 0.0,
    };
    for &(t, depth) in samples.iter().take_while(|(t, _)| *t <= t2) {
        out.checked_until = t;
        out.min_depth = out.min_depth.min(depth);
        // a NaN depth is a violation too
        if !(depth >= floor) && out.first_violation.is_none() {
            out.first_violation = Some(t);
            out.holds = false;
        }
    }
    out
}

/// Second-order derivative of samples on a possibly non-uniform time grid:
/// three-point centered stencils inside, one-sided three-point stencils at
/// the ends.
pub fn time_derivative(t: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    let n = t.len();
    if n < 3 || f.len() != n {
        return Err(Error::InsufficientData { len: n.min(f.len()) });
    }
    let stencil = |i0: usize, at: usize| {
        // derivative at t[at] of the parabola through i0, i0+1, i0+2
        let (a, b, c) = (t[i0], t[i0 + 1], t[i0 + 2]);
        let x = t[at];
        let wa = ((x - b) + (x - c)) / ((a - b) * (a - c));
        let wb = ((x - a) + (x - c)) / ((b - a) * (b - c));
        let wc = ((x - a) + (x - b)) / ((c - a) * (c - b));
        wa * f[i0] + wb * f[i0 + 1] + wc * f[i0 + 2]
    };
    Ok((0..n)
        .map(|i| match i {
            0 => stencil(0, 0),
            i if i == n - 1 => stencil(n - 3, n - 1),
            i => stencil(i - 1, i),
        })
        .collect())
}

/// `|dE/dt| / (E + E^2)` with `0/0 = 0`.
pub fn energy_ratio(de: f64, e: f64) -> f64 {
    let den = e + e * e;
    if de == 0.0 {
        0.0
    } else if den > 0.0 {
        de.abs() / den
    } else {
        f64::INFINITY
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyInequalityReport {
    pub sup_ratio: f64,
    pub argmax_t: f64,
    pub derivative: Vec<f64>,
    pub ratios: Vec<f64>,
}

/// Sup over the recorded series of `|dE/dt| / (E + E^2)`.
pub fn energy_inequality_monitor(t: &[f64], e: &[f64]) -> Result<EnergyInequalityReport> {
    let derivative = time_derivative(t, e)?;
    let ratios: Vec<f64> = derivative.iter().zip(e).map(|(&d, &e)| energy_ratio(d, e)).collect();
    let (mut sup_ratio, mut argmax_t) = (0.0, t[0]);
    for (i, &r) in ratios.iter().enumerate() {
        if r > sup_ratio || r.is_nan() {
            sup_ratio = r;
            argmax_t = t[i];
        }
    }
    Ok(EnergyInequalityReport {
        sup_ratio,
        argmax_t,
        derivative,
        ratios,
    })
}
