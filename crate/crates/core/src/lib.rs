//! Polar decomposition of semigroups generated by accretive quadratic
//! operators, computed at the level of their Hamilton maps.
//!
//! A symbol `q(X) = XᵀQX` on `ℝ²ⁿ` with `Re Q ⪰ 0` generates the
//! contraction semigroup `e^{−tq^w}`, which factors as
//! `e^{−t a_t^w} e^{−it b_t^w}` with real quadratic forms `a_t ⪰ 0` and
//! `b_t`. On matrices this reads `e^{−2itJQ} = e^{−2itJA_t} e^{2tJB_t}`;
//! [`polar`] computes both factors, [`singular`] the singular space that
//! governs the anisotropy of `a_t`, and [`certify`] checks the lower bound
//! `a_t ≥ c κ_t` numerically.
//!
//! Everything is generic over the real scalar `T` (`f32` or `f64`); the
//! aliases at the crate root fix `T = f64`.

// `!(x > 0)` is used deliberately so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod certify;
pub mod error;
pub mod matfun;
pub mod polar;
pub mod quadrature;
pub mod scalar;
pub mod singular;
pub mod symbols;

pub use error::{Error, Result};
pub use scalar::Real;

/// Complex `f64` matrix.
pub type CMat = scalar::CMat<f64>;
/// Real `f64` matrix.
pub type RMat = scalar::RMat<f64>;
pub type RVec = scalar::RVec<f64>;
pub type QuadraticSymbol = symbols::QuadraticSymbol<f64>;
pub type HamiltonMap = symbols::HamiltonMap<f64>;
pub type SingularSpaceInfo = singular::SingularSpaceInfo<f64>;
pub type PolarFactors = polar::PolarFactors<f64>;
pub type MehlerSymbol = polar::MehlerSymbol<f64>;
pub type Spectrum = matfun::Spectrum<f64>;
pub type ExampleSpec = catalog::ExampleSpec<f64>;
pub type BoundCertificate = certify::BoundCertificate<f64>;
