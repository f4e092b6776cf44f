//! Pseudospectral simulation of the periodic full-dispersion Boussinesq
//! systems with surface tension, in one and two space dimensions, together
//! with the diagnostics that accompany their energy-method analysis:
//! modified energies, coercivity bounds, non-cavitation propagation,
//! a-priori existence times, difference-of-solutions estimates and empirical
//! checks of the commutator and multiplier inequalities.

pub mod config;
pub mod energy;
pub mod error;
pub mod grid;
pub mod gronwall;
pub mod initial;
pub mod integrator;
pub mod lab;
pub mod model1d;
pub mod model2d;
pub mod monitors;
pub mod ops;
pub mod plot;
pub mod random;
pub mod run;
pub mod snapshot;
pub mod studies;
pub mod symbols;

pub use error::{Error, Result};
pub use grid::{Grid, GridSpec, RealField, Spectrum};
pub use ops::{apply_multiplier, lp_norm, sobolev_norm, Dealias, Lp};
pub use symbols::{eval_k, eval_m, eval_mtilde, eval_w, Parity, Symbol, SymbolTable};
