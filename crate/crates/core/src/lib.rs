//! Grassmannian geodesics in affine coordinates and the minimal graphs they
//! sweep out.
//!
//! A slope matrix `Z(t)` of shape `(n-1) x m` defines the graph
//! `f^α(x, t) = Σ_i z_i^α(t) x^i` over `ℝⁿ`. That graph is minimal exactly
//! when `Z` follows the Grassmannian geodesic equation
//!
//! ```text
//! Z̈ - 2 Ż Zᵀ (I + Z Zᵀ)⁻¹ Ż = 0
//! ```
//!
//! The modules here build closed-form solutions of that equation, certify
//! which of them stay in the affine chart for all time (and therefore give
//! entire graphs), check the minimal surface system directly on the graph,
//! integrate the equation numerically, and treat the Lorentzian analogue.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(x <= tol)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod entire;
mod error;
pub mod geodesic;
pub mod graph;
pub mod lorentz;
pub mod matlin;
pub mod ode;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::Error;
pub use geodesic::{ClosedFormGeodesic, CurveJet, Frequency, SlopeCurve, SpectralBlock};
pub use matlin::{LinalgError, Mat};

/// Which ambient geometry a graph lives in.
///
/// `Euclidean` is `ℝ^{n+m}` with the flat metric. `Lorentzian` is
/// `ℝ^{n-1, m+1}` with `|x|² - t² - |y|²`, where the graph is taken over the
/// Minkowski base `ℝ^{n-1,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ambient {
    Euclidean,
    Lorentzian,
}

impl Ambient {
    /// `+1` for Euclidean, `-1` for Lorentzian: the sign in front of `ZZᵀ`
    /// in the slope metric `I ± ZZᵀ`.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Ambient::Euclidean => 1.0,
            Ambient::Lorentzian => -1.0,
        }
    }
}
