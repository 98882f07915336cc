//! Graphs over the Minkowski base `ℝ^{n-1,1}` inside `ℝ^{n-1,m+1}`.
//!
//! The slope metric becomes `I - ZZᵀ`, the geodesic equation
//! `Z̈ + 2 Ż Zᵀ (I - ZZᵀ)⁻¹ Ż = 0`, and the `tanh` family
//! `Z(t) = [[tanh(Λt), 0], [0, 0]]` is a global solution whose graph carries a
//! Lorentzian metric everywhere.

use alloc::vec::Vec;

use libm::{cosh, tanh};

use crate::error::Error;
use crate::geodesic::{geodesic_acceleration, CurveJet, SlopeCurve, SpectralBlock};
use crate::graph::{induced_metric_in, AnsatzPoint};
use crate::matlin::Mat;
use crate::Ambient;

/// Eigenvalues with `|λ| <= SIGNATURE_ZERO_RATIO * ‖g‖_F` count as zero.
pub const SIGNATURE_ZERO_RATIO: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignatureCount {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

impl SignatureCount {
    pub fn of(g: &Mat) -> Result<Self, Error> {
        let eig = g.sym_eigen()?;
        let cut = SIGNATURE_ZERO_RATIO * g.frobenius_norm();
        let mut s = SignatureCount {
            plus: 0,
            minus: 0,
            zero: 0,
        };
        for v in eig.values {
            if v > cut {
                s.plus += 1;
            } else if v < -cut {
                s.minus += 1;
            } else {
                s.zero += 1;
            }
        }
        Ok(s)
    }

    /// `(k, 1, 0)`.
    pub fn is_lorentzian(&self) -> bool {
        self.minus == 1 && self.zero == 0
    }
}

/// `Z̈ + 2 Ż Zᵀ (I - ZZᵀ)⁻¹ Ż`.
pub fn lorentz_residual(jet: &CurveJet) -> Result<Mat, Error> {
    let acc = geodesic_acceleration(Ambient::Lorentzian, &jet.z, &jet.zd)
        .map_err(|_| Error::SpacelikeBreakdown { t: jet.t })?;
    Ok(&jet.zdd - &acc)
}

#[derive(Debug, Clone)]
pub struct LorentzMetric {
    pub g: Mat,
    pub signature: SignatureCount,
    pub det_g: f64,
}

/// Induced metric of the graph in `ℝ^{n-1,m+1}`: spatial block `I - ZZᵀ`,
/// border `-Z Żᵀx`, corner `-1 - |Żᵀx|²`.
pub fn lorentz_metric(jet: &CurveJet, p: &AnsatzPoint) -> Result<LorentzMetric, Error> {
    let g = induced_metric_in(Ambient::Lorentzian, jet, p)?;
    let signature = SignatureCount::of(&g)?;
    let det_g = g.det()?;
    Ok(LorentzMetric {
        g,
        signature,
        det_g,
    })
}

/// `Z(t) = [[tanh(Λt), 0], [0, 0]]` with `Z(0) = 0`, `Ż(0) = Λ̃`.
#[derive(Debug, Clone)]
pub struct TanhFamily(pub SpectralBlock);

impl TanhFamily {
    /// `-(∏ sech²(λᵢt)) (1 + Σ λᵢ² (xⁱ)² sech²(λᵢt))`, the determinant of the
    /// induced metric in closed form.
    pub fn metric_det(&self, p: &AnsatzPoint) -> f64 {
        let (prod, sum) = self.sech_terms(p);
        -prod * (1.0 + sum)
    }

    /// `-1 - Σ λᵢ² (xⁱ)² sech²(λᵢt)`, the Schur complement of the spatial block.
    pub fn metric_schur(&self, p: &AnsatzPoint) -> f64 {
        -1.0 - self.sech_terms(p).1
    }

    /// `∏ sech²(λᵢt)`, the determinant of the spatial block.
    pub fn spatial_det(&self, t: f64) -> f64 {
        self.0.lambdas().iter().map(|&l| sech2(l * t)).product()
    }

    fn sech_terms(&self, p: &AnsatzPoint) -> (f64, f64) {
        let lambdas = self.0.lambdas();
        let prod = self.spatial_det(p.t);
        let sum = lambdas
            .iter()
            .enumerate()
            .map(|(i, &l)| l * l * p.x[i] * p.x[i] * sech2(l * p.t))
            .sum();
        (prod, sum)
    }
}

fn sech2(u: f64) -> f64 {
    let c = cosh(u);
    1.0 / (c * c)
}

impl SlopeCurve for TanhFamily {
    fn shape(&self) -> (usize, usize) {
        self.0.slope_shape()
    }

    fn jet(&self, t: f64) -> Result<CurveJet, Error> {
        let (k, m) = self.shape();
        let mut z = Mat::zeros(k, m);
        let mut zd = Mat::zeros(k, m);
        let mut zdd = Mat::zeros(k, m);
        for (i, l) in self.0.lambdas().into_iter().enumerate() {
            let th = tanh(l * t);
            let s2 = sech2(l * t);
            z[(i, i)] = th;
            zd[(i, i)] = l * s2;
            zdd[(i, i)] = -2.0 * l * l * th * s2;
        }
        CurveJet::new(t, z, zd, zdd)
    }
}

/// Signatures of the induced metric over a batch of points.
pub fn signatures(
    curve: &TanhFamily,
    points: &[AnsatzPoint],
) -> Result<Vec<SignatureCount>, Error> {
    points
        .iter()
        .map(|p| {
            let jet = curve.jet(p.t)?;
            lorentz_metric(&jet, p).map(|m| m.signature)
        })
        .collect()
}
