//! Empirical constants of the commutator and multiplier estimates.
//!
//! Every estimate is evaluated as `LHS / RHS` on one-dimensional periodic
//! fields. Products are formed on the grid and dealiased; the random
//! families used by the refinement studies are band-limited well below
//! `n/4`, so the products are alias free and the commutators exact.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, RealField};
use crate::ops::{apply_multiplier, apply_table, lp_norm, oversampled_max, project, Dealias, Lp};
use crate::random::{random_field, RandomFieldSpec};
use crate::symbols::Symbol;

/// Below this the right-hand side counts as zero.
pub const RHS_FLOOR: f64 = 1e-14;
/// Largest left-hand side accepted against a zero right-hand side.
pub const LHS_TOL: f64 = 1e-10;

/// Both sides of one estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
}

impl Sides {
    /// `None` for a degenerate trial (both sides zero).
    pub fn ratio(self, estimate: &str) -> Result<Option<f64>> {
        if self.rhs < RHS_FLOOR {
            if self.lhs > LHS_TOL {
                return Err(Error::Inconsistency {
                    estimate: estimate.to_string(),
                    lhs: self.lhs,
                    rhs: self.rhs,
                });
            }
            return Ok(None);
        }
        Ok(Some(self.lhs / self.rhs))
    }
}

fn product(f: &RealField, g: &RealField) -> RealField {
    let mut h = f.mul(g).spectrum();
    project(&mut h, &Dealias::TwoThirds.mask(f.grid.spec()));
    RealField::from_spectrum(&f.grid, &h)
}

fn check_line(f: &RealField, g: &RealField) -> Result<()> {
    if !f.same_grid(g) {
        return Err(Error::GridMismatch);
    }
    if f.grid.dim() != 1 {
        return Err(Error::Grid("the inequality lab works on 1D grids".into()));
    }
    Ok(())
}

/// `|[J^s, f] g|_2` against `|f'|_inf |J^{s-1} g|_2 + |J^s f|_2 |g|_inf`.
pub fn kato_ponce_sides(f: &RealField, g: &RealField, s: f64) -> Result<Sides> {
    check_line(f, g)?;
    if s < 1.0 {
        return Err(Error::Domain(format!("Kato-Ponce needs s >= 1, got {s}")));
    }
    let js = Symbol::Bessel(s);
    let comm = apply_multiplier(&js, &product(f, g))?.sub(&product(f, &apply_multiplier(&js, g)?));
    let fx = apply_multiplier(&Symbol::Derivative(0), f)?;
    let rhs = lp_norm(&fx, Lp::Infinity) * lp_norm(&apply_multiplier(&Symbol::Bessel(s - 1.0), g)?, Lp::Two)
        + lp_norm(&apply_multiplier(&js, f)?, Lp::Two) * lp_norm(g, Lp::Infinity);
    Ok(Sides {
        lhs: lp_norm(&comm, Lp::Two),
        rhs,
    })
}

pub fn kato_ponce_ratio(f: &RealField, g: &RealField, s: f64) -> Result<f64> {
    Ok(kato_ponce_sides(f, g, s)?.ratio("kato-ponce")?.unwrap_or(0.0))
}

/// Which clause of the fractional Leibniz rule a parameter set exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeibnizClause {
    /// `0 < sigma_1, sigma_2 < sigma`.
    Interior,
    /// `sigma_2 = 0`, `p_2 = inf`.
    Endpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeibnizParams {
    pub sigma1: f64,
    pub sigma2: f64,
    pub p: Lp,
    pub p1: Lp,
    pub p2: Lp,
}

impl LeibnizParams {
    pub const INTERIOR: Self = Self {
        sigma1: 0.25,
        sigma2: 0.25,
        p: Lp::Two,
        p1: Lp::Four,
        p2: Lp::Four,
    };
    pub const ENDPOINT: Self = Self {
        sigma1: 0.5,
        sigma2: 0.0,
        p: Lp::Two,
        p1: Lp::Two,
        p2: Lp::Infinity,
    };

    pub fn sigma(&self) -> f64 {
        self.sigma1 + self.sigma2
    }

    pub fn clause(&self) -> Result<LeibnizClause> {
        let sigma = self.sigma();
        let holder = 1.0 / self.p1.exponent() + 1.0 / self.p2.exponent();
        if !(sigma > 0.0 && sigma < 1.0) || (holder - 1.0 / self.p.exponent()).abs() > 1e-15 {
            return Err(Error::Domain(format!("inadmissible Leibniz parameters {self:?}")));
        }
        if self.sigma2 == 0.0 && self.p2 == Lp::Infinity && self.sigma1 == sigma {
            return Ok(LeibnizClause::Endpoint);
        }
        if self.sigma1 > 0.0 && self.sigma1 < sigma && self.sigma2 > 0.0 && self.sigma2 < sigma {
            return Ok(LeibnizClause::Interior);
        }
        Err(Error::Domain(format!("inadmissible Leibniz parameters {self:?}")))
    }
}

/// `D^sigma(fg) - f D^sigma g - g D^sigma f`.
///
/// `D^sigma` annihilates means, and the defect of `(f, g)` equals the defect
/// of their mean-free parts; the mean contributions cancel identically.
pub fn leibniz_defect(f: &RealField, g: &RealField, sigma: f64) -> Result<RealField> {
    check_line(f, g)?;
    let d = Symbol::Riesz(sigma);
    Ok(apply_multiplier(&d, &product(f, g))?
        .sub(&product(f, &apply_multiplier(&d, g)?))
        .sub(&product(g, &apply_multiplier(&d, f)?)))
}

pub fn frac_leibniz_sides(f: &RealField, g: &RealField, params: &LeibnizParams) -> Result<Sides> {
    params.clause()?;
    let defect = leibniz_defect(f, g, params.sigma())?;
    let df = apply_multiplier(&Symbol::Riesz(params.sigma1), f)?;
    let dg = apply_multiplier(&Symbol::Riesz(params.sigma2), g)?;
    Ok(Sides {
        lhs: lp_norm(&defect, params.p),
        rhs: lp_norm(&df, params.p1) * lp_norm(&dg, params.p2),
    })
}

pub fn frac_leibniz_ratio(f: &RealField, g: &RealField, params: &LeibnizParams) -> Result<f64> {
    Ok(frac_leibniz_sides(f, g, params)?
        .ratio("fractional-leibniz")?
        .unwrap_or(0.0))
}

/// `[D^{1/2}, a] D^{1/2} f`.
pub fn dmp_commutator(a: &RealField, f: &RealField) -> Result<RealField> {
    check_line(a, f)?;
    let d = Symbol::Riesz(0.5);
    let h = apply_multiplier(&d, f)?;
    Ok(apply_multiplier(&d, &product(a, &h))?.sub(&product(a, &apply_multiplier(&d, &h)?)))
}

pub fn dmp_commutator_sides(a: &RealField, f: &RealField, s: f64) -> Result<Sides> {
    if s <= 1.5 {
        return Err(Error::Domain(format!("the commutator estimate needs s > 3/2, got {s}")));
    }
    let c = dmp_commutator(a, f)?;
    Ok(Sides {
        lhs: lp_norm(&c, Lp::Two),
        rhs: crate::ops::sobolev_norm(a, s) * lp_norm(f, Lp::Two),
    })
}

pub fn dmp_commutator_ratio(a: &RealField, f: &RealField, s: f64) -> Result<f64> {
    Ok(dmp_commutator_sides(a, f, s)?
        .ratio("dmp-commutator")?
        .unwrap_or(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierRatios {
    pub r_m: f64,
    pub r_minf: f64,
    pub r_br: f64,
}

/// `|J^s M f|_2 / |f|_2`, `|M (1 - d^2) f|_inf / |f|_inf` (numerator on a
/// 4x refined grid) and `|(J - D) d f|_2 / |f|_2`.
pub fn multiplier_estimate_ratios(f: &RealField, s: f64) -> Result<MultiplierRatios> {
    let l2 = lp_norm(f, Lp::Two);
    let linf = lp_norm(f, Lp::Infinity);
    if l2 == 0.0 || linf == 0.0 {
        return Ok(MultiplierRatios {
            r_m: 0.0,
            r_minf: 0.0,
            r_br: 0.0,
        });
    }
    let jm = apply_multiplier(&Symbol::Product(vec![Symbol::Bessel(s), Symbol::M]), f)?;
    let m2 = apply_multiplier(&Symbol::Product(vec![Symbol::M, Symbol::Bessel(2.0)]), f)?;
    // (J - D) d as one symbol, ik / ((1 + k^2)^{1/2} + |k|), free of cancellation
    let mut table = Symbol::Derivative(0).table(&f.grid);
    for (v, &k) in table.values.iter_mut().zip(f.grid.wavenumber_moduli()) {
        *v /= (1.0 + k * k).sqrt() + k;
    }
    table.name = "(J - D) d/dx".into();
    let br = apply_table(&table, f)?;
    Ok(MultiplierRatios {
        r_m: lp_norm(&jm, Lp::Two) / l2,
        r_minf: oversampled_max(&m2, 4) / linf,
        r_br: lp_norm(&br, Lp::Two) / l2,
    })
}

/// `max_k (1 + k^2)^{s/2} e^{-|k|}` over the grid wavenumbers.
pub fn r_m_bound(grid: &Grid, s: f64) -> f64 {
    grid.wavenumber_moduli()
        .iter()
        .map(|&k| (1.0 + k * k).powf(0.5 * s) * (-k).exp())
        .fold(0.0, f64::max)
}

/// Estimates covered by the refinement studies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimate", rename_all = "kebab-case")]
pub enum Estimate {
    KatoPonce { s: f64 },
    FracLeibniz { params: LeibnizParams },
    DmpCommutator { s: f64 },
}

impl Estimate {
    pub fn name(&self) -> String {
        match self {
            Estimate::KatoPonce { s } => format!("kato-ponce(s={s})"),
            Estimate::FracLeibniz { params } => format!(
                "fractional-leibniz(sigma1={}, sigma2={})",
                params.sigma1, params.sigma2
            ),
            Estimate::DmpCommutator { s } => format!("dmp-commutator(s={s})"),
        }
    }

    fn sides(&self, f: &RealField, g: &RealField) -> Result<Sides> {
        match self {
            Estimate::KatoPonce { s } => kato_ponce_sides(f, g, *s),
            Estimate::FracLeibniz { params } => frac_leibniz_sides(f, g, params),
            Estimate::DmpCommutator { s } => dmp_commutator_sides(f, g, *s),
        }
    }
}

/// Random families shared by all studies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub band: usize,
    pub decay: f64,
    pub base_seed: u64,
    pub period: f64,
}

impl Default for Family {
    fn default() -> Self {
        Self {
            band: 24,
            decay: 1.0,
            base_seed: 0,
            period: 2.0 * std::f64::consts::PI,
        }
    }
}

impl Family {
    /// The pair of fields for trial `i`; identical on every grid resolving the band.
    pub fn pair(&self, grid: &Arc<Grid>, i: u64) -> (RealField, RealField) {
        let spec = |seed, mean| RandomFieldSpec {
            seed,
            n: grid.len(),
            decay: self.decay,
            band: self.band,
            mean,
        };
        let seed = self.base_seed.wrapping_add(2 * i);
        (
            random_field(grid, &spec(seed, 0.2)),
            random_field(grid, &spec(seed.wrapping_add(1), -0.1)),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub estimate: String,
    pub clause: Option<LeibnizClause>,
    pub trials: usize,
    pub max_ratio: f64,
    pub argmax_seed: u64,
    /// Trials with both sides zero.
    pub degenerate: usize,
    pub refinement: Vec<(usize, f64)>,
}

impl RatioReport {
    /// Largest over smallest max ratio across the refinement series.
    pub fn spread(&self) -> f64 {
        let (lo, hi) = self
            .refinement
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(_, r)| (lo.min(r), hi.max(r)));
        if lo > 0.0 {
            hi / lo
        } else if hi == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    }
}

/// Runs `trials` random pairs at every grid size in `ns`.
pub fn refinement_study(est: &Estimate, family: &Family, trials: usize, ns: &[usize]) -> Result<RatioReport> {
    let clause = match est {
        Estimate::FracLeibniz { params } => Some(params.clause()?),
        _ => None,
    };
    let mut report = RatioReport {
        estimate: est.name(),
        clause,
        trials,
        max_ratio: 0.0,
        argmax_seed: family.base_seed,
        degenerate: 0,
        refinement: Vec::with_capacity(ns.len()),
    };
    for &n in ns {
        let grid = Grid::line(n, family.period)?;
        let ratios = (0..trials as u64)
            .into_par_iter()
            .map(|i| {
                let (f, g) = family.pair(&grid, i);
                est.sides(&f, &g)?.ratio(&est.name())
            })
            .collect::<Result<Vec<_>>>()?;
        let mut best = 0.0f64;
        for (i, r) in ratios.iter().enumerate() {
            match r {
                None => report.degenerate += 1,
                Some(r) => {
                    best = best.max(*r);
                    if *r > report.max_ratio {
                        report.max_ratio = *r;
                        report.argmax_seed = family.base_seed.wrapping_add(2 * i as u64);
                    }
                }
            }
        }
        report.refinement.push((n, best));
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierReport {
    pub s: f64,
    pub trials: usize,
    pub max_r_m: f64,
    pub max_r_minf: f64,
    pub max_r_br: f64,
    /// `(n, grid max of (1 + k^2)^{s/2} e^{-|k|})`.
    pub r_m_bounds: Vec<(usize, f64)>,
    /// Trials with `r_BR > 1/2 + 1e-10` or `r_M` above the grid bound.
    pub violations: usize,
    pub refinement: Vec<(usize, MultiplierRatios)>,
}

pub fn multiplier_study(s: f64, family: &Family, trials: usize, ns: &[usize]) -> Result<MultiplierReport> {
    let mut report = MultiplierReport {
        s,
        trials,
        max_r_m: 0.0,
        max_r_minf: 0.0,
        max_r_br: 0.0,
        r_m_bounds: Vec::new(),
        violations: 0,
        refinement: Vec::new(),
    };
    for &n in ns {
        let grid = Grid::line(n, family.period)?;
        let bound = r_m_bound(&grid, s);
        let rows = (0..trials as u64)
            .into_par_iter()
            .map(|i| multiplier_estimate_ratios(&family.pair(&grid, i).0, s))
            .collect::<Result<Vec<_>>>()?;
        let mut best = MultiplierRatios {
            r_m: 0.0,
            r_minf: 0.0,
            r_br: 0.0,
        };
        for r in rows {
            if r.r_br > 0.5 + 1e-10 || r.r_m > bound * (1.0 + 1e-12) {
                report.violations += 1;
            }
            best.r_m = best.r_m.max(r.r_m);
            best.r_minf = best.r_minf.max(r.r_minf);
            best.r_br = best.r_br.max(r.r_br);
        }
        report.max_r_m = report.max_r_m.max(best.r_m);
        report.max_r_minf = report.max_r_minf.max(best.r_minf);
        report.max_r_br = report.max_r_br.max(best.r_br);
        report.r_m_bounds.push((n, bound));
        report.refinement.push((n, best));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn line(n: usize) -> Arc<Grid> {
        Grid::line(n, 2.0 * PI).unwrap()
    }

    fn mode(g: &Arc<Grid>, m: f64) -> RealField {
        RealField::from_fn(g, |x| (m * x[0]).cos())
    }

    #[test]
    fn constants_commute() {
        let g = line(64);
        let c = RealField::constant(&g, 1.7);
        let f = mode(&g, 3.0).add(&RealField::from_fn(&g, |x| (5.0 * x[0]).sin()));
        // round-off in the product is amplified by J^s at the top modes
        let kp = kato_ponce_sides(&c, &f, 2.6).unwrap();
        let scale = 1.7 * crate::ops::sobolev_norm(&f, 2.6);
        assert!(kp.lhs < 1e-13 * scale);
        assert!(frac_leibniz_ratio(&f, &c, &LeibnizParams::INTERIOR).unwrap() < 1e-14);
        assert!(dmp_commutator_ratio(&c, &f, 1.6).unwrap() < 1e-14);
    }

    #[test]
    fn leibniz_defect_of_a_single_mode() {
        let g = line(64);
        for (m, sigma) in [(3.0, 0.5), (5.0, 0.3), (1.0, 0.9)] {
            let f = mode(&g, m);
            let d = leibniz_defect(&f, &f, sigma).unwrap();
            let a = 0.5 * (2.0 * m).powf(sigma) - m.powf(sigma);
            let b = m.powf(sigma);
            for (i, v) in d.values.iter().enumerate() {
                let x = g.spec().coords(i)[0];
                assert!((v - (a * (2.0 * m * x).cos() - b)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn leibniz_defect_ignores_means() {
        let g = line(64);
        let f = mode(&g, 2.0).add(&RealField::from_fn(&g, |x| 0.3 * (7.0 * x[0]).sin()));
        let h = mode(&g, 5.0);
        let a = leibniz_defect(&f, &h, 0.5).unwrap();
        let b = leibniz_defect(&f.map(|v| v + 0.8), &h.map(|v| v - 1.3), 0.5).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn dmp_commutator_of_a_single_mode() {
        let g = line(64);
        let m = 4.0;
        let f = mode(&g, m);
        let c = dmp_commutator(&f, &f).unwrap();
        for (i, v) in c.values.iter().enumerate() {
            let x = g.spec().coords(i)[0];
            let exact = 0.5 * (2f64.sqrt() - 1.0) * m * (2.0 * m * x).cos() - 0.5 * m;
            assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn kato_ponce_sine_is_finite() {
        let g = line(64);
        let f = RealField::from_fn(&g, |x| x[0].sin());
        let r = kato_ponce_ratio(&f, &f, 1.0).unwrap();
        assert!(r.is_finite() && r > 0.0);
    }

    #[test]
    fn zero_rhs_with_nonzero_lhs_is_an_inconsistency() {
        let s = Sides { lhs: 1.0, rhs: 0.0 };
        assert!(matches!(s.ratio("x"), Err(Error::Inconsistency { .. })));
        assert_eq!(Sides { lhs: 0.0, rhs: 0.0 }.ratio("x").unwrap(), None);
    }

    #[test]
    fn leibniz_clauses() {
        assert_eq!(LeibnizParams::INTERIOR.clause().unwrap(), LeibnizClause::Interior);
        assert_eq!(LeibnizParams::ENDPOINT.clause().unwrap(), LeibnizClause::Endpoint);
        let bad = LeibnizParams {
            p2: Lp::Two,
            ..LeibnizParams::INTERIOR
        };
        assert!(bad.clause().is_err());
    }

    #[test]
    fn bessel_riesz_symbol_supremum_rises_to_one_half() {
        let mut last = 0.0;
        for e in 3..16 {
            let g = line(1 << e);
            let sup = g
                .wavenumber_moduli()
                .iter()
                .map(|&k| k / ((1.0 + k * k).sqrt() + k))
                .fold(0.0, f64::max);
            assert!(sup > last && sup <= 0.5, "n = {}: {sup}", 1 << e);
            last = sup;
        }
        assert!(0.5 - last < 1e-8);
    }

    #[test]
    fn multiplier_ratios_on_single_modes() {
        let g = line(128);
        let s = 2.6;
        for m in [1.0, 4.0, 20.0, 63.0] {
            let f = mode(&g, m);
            let r = multiplier_estimate_ratios(&f, s).unwrap();
            let mk = crate::symbols::eval_m(m).norm();
            if m <= 20.0 {
                // higher modes put r_M below rounding level
                assert_relative_eq!(r.r_m, (1.0 + m * m).powf(0.5 * s) * mk, max_relative = 1e-12);
            }
            let br = m * ((1.0 + m * m).sqrt() - m);
            assert_relative_eq!(r.r_br, br, max_relative = 1e-12);
            assert!(r.r_br < 0.5);
        }
        let z = multiplier_estimate_ratios(&RealField::zeros(&g), s).unwrap();
        assert_eq!((z.r_m, z.r_minf, z.r_br), (0.0, 0.0, 0.0));
    }
}
