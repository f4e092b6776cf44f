//! Fourier multiplier symbols.
//!
//! Conventions: `sgn(0) = 0`, so `M(0) = 0`; `K(0) = 1` by continuous
//! extension; Riesz potentials and Riesz transforms vanish on the zero mode.
//! Two-dimensional radial symbols are evaluated at `|k| = sqrt(k1^2 + k2^2)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::grid::Grid;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Linear dispersion symbol `tanh(|k|)/|k| * (1 + beta |k|^2)`, with `K(0) = 1`.
pub fn eval_k(k: f64, beta: f64) -> f64 {
    let a = k.abs();
    let ratio = if a < 1e-8 {
        // tanh(a)/a = 1 - a^2/3 + O(a^4)
        1.0 - a * a / 3.0
    } else {
        a.tanh() / a
    };
    ratio * (1.0 + beta * a * a)
}

/// Whitham symbol `sqrt(K)`.
pub fn eval_w(k: f64, beta: f64) -> f64 {
    eval_k(k, beta).sqrt()
}

pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `i (tanh(k) - sgn(k))`; bounded in modulus by `exp(-|k|)`.
pub fn eval_m(k: f64) -> Complex64 {
    I * tanh_minus_sgn(k)
}

/// `tanh(|k|) - 1`, the radial counterpart of [`eval_m`].
pub fn eval_mtilde(kmod: f64) -> f64 {
    let e = (-2.0 * kmod.abs()).exp();
    -2.0 * e / (1.0 + e)
}

/// `tanh(x) - sgn(x)` without cancellation: `-sgn(x) * 2 e^{-2|x|} / (1 + e^{-2|x|})`.
fn tanh_minus_sgn(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let e = (-2.0 * x.abs()).exp();
    -sgn(x) * 2.0 * e / (1.0 + e)
}

/// How a symbol behaves under `k -> -k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    /// `s(-k) = s(k)` and real.
    EvenReal,
    /// `s(-k) = -s(k)` and purely imaginary.
    OddImaginary,
    General,
}

/// The multipliers used by the models and the diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub enum Symbol {
    /// Bessel potential `J^s`, symbol `(1 + |k|^2)^(s/2)`.
    Bessel(f64),
    /// Riesz potential `D^a`, symbol `|k|^a` (0 on the zero mode unless `a = 0`).
    Riesz(f64),
    /// Hilbert transform, symbol `-i sgn(k1)`.
    Hilbert,
    /// Riesz transform along an axis, symbol `-i k_j / |k|`.
    RieszTransform(usize),
    /// `d/dx_j`, symbol `i k_j`.
    Derivative(usize),
    /// Symbol `-|k|^2`.
    Laplacian,
    Dispersion { beta: f64 },
    Whitham { beta: f64 },
    /// `i (tanh(k1) - sgn(k1))`.
    M,
    /// `tanh|k| - 1`.
    Mtilde,
    Product(Vec<Symbol>),
}

impl Symbol {
    pub fn eval(&self, k: [f64; 2]) -> Complex64 {
        let kmod = k[0].hypot(k[1]);
        let re = |x: f64| Complex64::new(x, 0.0);
        match self {
            Symbol::Bessel(s) => re((1.0 + kmod * kmod).powf(s / 2.0)),
            Symbol::Riesz(a) => {
                if *a == 0.0 {
                    re(1.0)
                } else if kmod == 0.0 {
                    re(0.0)
                } else {
                    re(kmod.powf(*a))
                }
            }
            Symbol::Hilbert => -I * sgn(k[0]),
            Symbol::RieszTransform(j) => {
                if kmod == 0.0 {
                    re(0.0)
                } else {
                    -I * k[*j] / kmod
                }
            }
            Symbol::Derivative(j) => I * k[*j],
            Symbol::Laplacian => re(-kmod * kmod),
            Symbol::Dispersion { beta } => re(eval_k(kmod, *beta)),
            Symbol::Whitham { beta } => re(eval_w(kmod, *beta)),
            Symbol::M => eval_m(k[0]),
            Symbol::Mtilde => re(eval_mtilde(kmod)),
            Symbol::Product(fs) => fs.iter().map(|f| f.eval(k)).product(),
        }
    }

    pub fn parity(&self) -> Parity {
        match self {
            Symbol::Bessel(_)
            | Symbol::Riesz(_)
            | Symbol::Laplacian
            | Symbol::Dispersion { .. }
            | Symbol::Whitham { .. }
            | Symbol::Mtilde => Parity::EvenReal,
            Symbol::Hilbert | Symbol::RieszTransform(_) | Symbol::Derivative(_) | Symbol::M => {
                Parity::OddImaginary
            }
            Symbol::Product(fs) => {
                let mut odd = 0;
                for f in fs {
                    match f.parity() {
                        Parity::EvenReal => {}
                        Parity::OddImaginary => odd += 1,
                        Parity::General => return Parity::General,
                    }
                }
                if odd % 2 == 0 {
                    Parity::EvenReal
                } else {
                    Parity::OddImaginary
                }
            }
        }
    }

    /// Tabulates the symbol on a grid's wavevector lattice.
    ///
    /// Odd-imaginary symbols are set to zero on Nyquist modes so that real
    /// fields stay real; products are tabulated factor by factor, which is
    /// the same as applying the factors one after the other.
    pub fn table(&self, grid: &Arc<Grid>) -> SymbolTable {
        let values = match self {
            Symbol::Product(fs) => {
                let mut acc = vec![Complex64::new(1.0, 0.0); grid.len()];
                for f in fs {
                    let t = f.table(grid);
                    acc.iter_mut().zip(&t.values).for_each(|(a, b)| *a *= b);
                }
                acc
            }
            _ => {
                let spec = grid.spec();
                let odd = self.parity() == Parity::OddImaginary;
                grid.wavevectors()
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| {
                        if odd && spec.is_nyquist(i) {
                            Complex64::new(0.0, 0.0)
                        } else {
                            self.eval(k)
                        }
                    })
                    .collect()
            }
        };
        SymbolTable {
            name: self.to_string(),
            parity: self.parity(),
            values,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Bessel(s) => write!(f, "J^{s}"),
            Symbol::Riesz(a) => write!(f, "D^{a}"),
            Symbol::Hilbert => write!(f, "H"),
            Symbol::RieszTransform(j) => write!(f, "R_{}", j + 1),
            Symbol::Derivative(j) => write!(f, "d_{}", j + 1),
            Symbol::Laplacian => write!(f, "Lap"),
            Symbol::Dispersion { beta } => write!(f, "K[beta={beta}]"),
            Symbol::Whitham { beta } => write!(f, "W[beta={beta}]"),
            Symbol::M => write!(f, "M"),
            Symbol::Mtilde => write!(f, "Mtilde"),
            Symbol::Product(fs) => {
                let parts: Vec<String> = fs.iter().map(|s| s.to_string()).collect();
                write!(f, "{}", parts.join("*"))
            }
        }
    }
}

/// Symbol values precomputed on a grid, indexed like a spectrum.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    pub name: String,
    pub parity: Parity,
    pub values: Vec<Complex64>,
}

impl SymbolTable {
    pub fn apply(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        spectrum.iter().zip(&self.values).map(|(a, b)| a * b).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn k_symbol_values() {
        assert_eq!(eval_k(0.0, 1.0), 1.0);
        assert_eq!(eval_k(-1.7, 0.3), eval_k(1.7, 0.3));
        // 2 tanh(1), mpmath at 40 digits
        assert_relative_eq!(eval_k(1.0, 1.0), 1.523_188_311_911_529_8, max_relative = 1e-14);
        // continuity at the switch-over
        assert_relative_eq!(eval_k(1e-8, 2.0), eval_k(1.0001e-8, 2.0), max_relative = 1e-12);
    }

    #[test]
    fn m_symbol_values() {
        assert_eq!(eval_m(0.0), Complex64::new(0.0, 0.0));
        // tanh(2) - 1, mpmath at 40 digits
        let m2 = eval_m(2.0);
        assert_eq!(m2.re, 0.0);
        assert_relative_eq!(m2.im, -0.035_972_419_924_183_12, max_relative = 1e-13);
        assert_relative_eq!(eval_m(-2.0).im, 0.035_972_419_924_183_12, max_relative = 1e-13);
    }

    #[test]
    fn mtilde_values() {
        assert_eq!(eval_mtilde(0.0), -1.0);
        // tanh(20) - 1, mpmath at 40 digits
        let v = eval_mtilde(20.0);
        assert_relative_eq!(v, -8.496_708_510_583_178e-18, max_relative = 1e-13);
        assert!(v.abs() <= (-20.0f64).exp());
    }

    #[test]
    fn mtilde_reassembles_k() {
        // (Mtilde + 1)(1 + |k|^2)/|k| = K(|k|, 1)
        for j in 1..200 {
            let k = 0.05 * j as f64;
            let lhs = (eval_mtilde(k) + 1.0) * (1.0 + k * k) / k;
            assert_relative_eq!(lhs, eval_k(k, 1.0), max_relative = 1e-13);
        }
    }

    #[test]
    fn exponential_bounds() {
        for j in -4000..=4000 {
            let k = 0.01 * j as f64;
            assert!(eval_m(k).norm() <= (-k.abs()).exp() * (1.0 + 1e-15));
            assert!(eval_mtilde(k.abs()).abs() <= (-k.abs()).exp() * (1.0 + 1e-15));
        }
    }

    #[test]
    fn riesz_identity_in_symbol_space() {
        // D^1 = H d_x and R_j Lap = D^1 d_j, pointwise
        let d1 = Symbol::Riesz(1.0);
        let hd = Symbol::Product(vec![Symbol::Hilbert, Symbol::Derivative(0)]);
        for j in -50..=50 {
            let k = [0.37 * j as f64, 0.0];
            assert!((d1.eval(k) - hd.eval(k)).norm() < 1e-13);
        }
        for j in 0..2 {
            let lhs = Symbol::Product(vec![Symbol::RieszTransform(j), Symbol::Laplacian]);
            let rhs = Symbol::Product(vec![Symbol::Riesz(1.0), Symbol::Derivative(j)]);
            for a in -7..=7 {
                for b in -7..=7 {
                    let k = [a as f64 * 0.9, b as f64 * 1.3];
                    assert!((lhs.eval(k) - rhs.eval(k)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn parity_of_products() {
        let dd = Symbol::Product(vec![Symbol::Derivative(0), Symbol::Derivative(0)]);
        assert_eq!(dd.parity(), Parity::EvenReal);
        let hdd = Symbol::Product(vec![Symbol::Hilbert, dd]);
        assert_eq!(hdd.parity(), Parity::OddImaginary);
    }

    #[test]
    fn odd_tables_vanish_at_nyquist() {
        let grid = Grid::line(16, 2.0 * PI).unwrap();
        let t = Symbol::Derivative(0).table(&grid);
        assert_eq!(t.values[8], Complex64::new(0.0, 0.0));
        let e = Symbol::Bessel(2.0).table(&grid);
        assert_eq!(e.values[8].re, 65.0);
    }
}
