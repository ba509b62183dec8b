//! Exact and numerical machinery for half-integral weight modular forms,
//! their additive-twist L-series, and the geometric side of the
//! half-integral weight Petersson trace formula.
//!
//! Module map:
//! - [`arith`]: symbols, multipliers, characters, Ramanujan and Salié sums
//! - [`special`]: gamma/zeta/Bessel functions and the vertical-line contour engine
//! - [`forms`]: q-expansions, eta quotients, evaluation and modularity checks
//! - [`twists`]: additive-twist L-series and their functional equations
//! - [`trace`]: trace-formula geometric side and the K-function
//! - [`gammasolve`]: exact residue polynomials and gamma-factor classification
//! - [`cli`]: command-line driver and JSON reports

pub mod arith;
pub mod cli;
pub mod error;
pub mod forms;
pub mod gammasolve;
pub mod special;
pub mod trace;
pub mod twists;

pub use error::{Error, Result};
pub use num_complex::Complex64;
