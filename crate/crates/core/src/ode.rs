//! Fixed-step RK4 for `Z̈ = 2σ Ż Zᵀ (I + σZZᵀ)⁻¹ Ż`.
//!
//! The right-hand side is the same acceleration the residual operators use,
//! so a closed form that passes the residual checks and an integrated
//! trajectory exercise one shared piece of algebra from two directions.

use alloc::format;
use alloc::vec::Vec;

use libm::{ceil, log};

use crate::error::{invalid, Error};
use crate::geodesic::geodesic_acceleration;
use crate::matlin::Mat;
use crate::Ambient;

/// Euclidean runs stop once `‖Z‖_F` exceeds this.
pub const BLOW_UP_NORM: f64 = 1e8;
/// Lorentzian runs stop once `det(I - ZZᵀ)` drops below this.
pub const SPACELIKE_DET_MIN: f64 = 1e-10;
/// Steps used by [`convergence_order`].
pub const CONVERGENCE_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
/// Errors below this at every step mean the trajectory is reproduced exactly.
pub const EXACT_ERROR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub z: Mat,
    pub zd: Mat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Completed,
    BlowUp { t: f64 },
    ChartBreakdown { t: f64 },
}

#[derive(Debug, Clone)]
pub struct IntegrationRun {
    /// Strictly increasing in `t`, starting at `t = 0`.
    pub samples: Vec<Sample>,
    pub status: RunStatus,
    pub ambient: Ambient,
    /// Step actually used: `t_end` divided into equal steps no longer than requested.
    pub step: f64,
}

impl IntegrationRun {
    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("a run always holds its initial sample")
    }
}

enum StepFailure {
    Singular,
}

fn rhs(ambient: Ambient, z: &Mat, zd: &Mat) -> Result<(Mat, Mat), StepFailure> {
    let acc = geodesic_acceleration(ambient, z, zd).map_err(|_| StepFailure::Singular)?;
    Ok((zd.clone(), acc))
}

fn rk4_step(ambient: Ambient, z: &Mat, zd: &Mat, h: f64) -> Result<(Mat, Mat), StepFailure> {
    let (k1z, k1v) = rhs(ambient, z, zd)?;
    let (k2z, k2v) = rhs(
        ambient,
        &(z + &k1z.scale(h / 2.0)),
        &(zd + &k1v.scale(h / 2.0)),
    )?;
    let (k3z, k3v) = rhs(
        ambient,
        &(z + &k2z.scale(h / 2.0)),
        &(zd + &k2v.scale(h / 2.0)),
    )?;
    let (k4z, k4v) = rhs(ambient, &(z + &k3z.scale(h)), &(zd + &k3v.scale(h)))?;
    let combine = |a: &Mat, b: &Mat, c: &Mat, d: &Mat| &(&(a + &b.scale(2.0)) + &c.scale(2.0)) + d;
    let z_next = z + &combine(&k1z, &k2z, &k3z, &k4z).scale(h / 6.0);
    let zd_next = zd + &combine(&k1v, &k2v, &k3v, &k4v).scale(h / 6.0);
    Ok((z_next, zd_next))
}

fn lorentz_margin(z: &Mat) -> f64 {
    (&Mat::identity(z.rows()) - &(z * &z.transpose()))
        .det()
        .unwrap_or(f64::NAN)
}

/// Integrates from `(Z(0), Ż(0)) = (z0, zd0)` to `t_end` with classical RK4.
///
/// Stops early with [`RunStatus::BlowUp`] when `‖Z‖_F` passes
/// [`BLOW_UP_NORM`] (or the state stops being finite), and with
/// [`RunStatus::ChartBreakdown`] when the slope metric becomes singular or,
/// in the Lorentzian case, `det(I - ZZᵀ)` falls below [`SPACELIKE_DET_MIN`].
pub fn integrate(
    z0: &Mat,
    zd0: &Mat,
    t_end: f64,
    step: f64,
    ambient: Ambient,
) -> Result<IntegrationRun, Error> {
    if z0.shape() != zd0.shape() {
        return Err(invalid(format!(
            "Z(0) is {:?} but Ż(0) is {:?}",
            z0.shape(),
            zd0.shape()
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid(format!("step must be positive, got {step}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(invalid(format!(
            "t_end must be finite and non-negative, got {t_end}"
        )));
    }
    let steps = ceil(t_end / step - 1e-9).max(0.0) as usize;
    let h = if steps == 0 {
        step
    } else {
        t_end / steps as f64
    };

    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(Sample {
        t: 0.0,
        z: z0.clone(),
        zd: zd0.clone(),
    });
    let mut status = RunStatus::Completed;
    let (mut z, mut zd) = (z0.clone(), zd0.clone());
    for i in 1..=steps {
        let t = if i == steps { t_end } else { h * i as f64 };
        let (zn, zdn) = match rk4_step(ambient, &z, &zd, h) {
            Ok(next) => next,
            // I + ZZᵀ >= I, so a Euclidean "singular" pivot only means its
            // conditioning has outrun double precision as Z escapes to infinity
            Err(StepFailure::Singular) if ambient == Ambient::Euclidean => {
                status = RunStatus::BlowUp { t };
                break;
            }
            Err(StepFailure::Singular) => {
                status = RunStatus::ChartBreakdown { t };
                break;
            }
        };
        if !zn.is_finite() || !zdn.is_finite() || zn.frobenius_norm() > BLOW_UP_NORM {
            if zn.is_finite() {
                samples.push(Sample { t, z: zn, zd: zdn });
            }
            status = RunStatus::BlowUp { t };
            break;
        }
        let leaves_spacelike =
            ambient == Ambient::Lorentzian && !(lorentz_margin(&zn) >= SPACELIKE_DET_MIN);
        samples.push(Sample {
            t,
            z: zn.clone(),
            zd: zdn.clone(),
        });
        if leaves_spacelike {
            status = RunStatus::ChartBreakdown { t };
            break;
        }
        z = zn;
        zd = zdn;
    }
    Ok(IntegrationRun {
        samples,
        status,
        ambient,
        step: h,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvergenceEstimate {
    /// Least-squares slope of `log(error)` against `log(step)`.
    Order(f64),
    /// The integrator reproduces the reference at every step.
    Exact,
}

/// Estimates the order of accuracy at `t_end` against a reference solution
/// by fitting errors over [`CONVERGENCE_STEPS`].
pub fn convergence_order(
    z0: &Mat,
    zd0: &Mat,
    t_end: f64,
    ambient: Ambient,
    reference: impl Fn(f64) -> Result<Mat, Error>,
) -> Result<ConvergenceEstimate, Error> {
    let exact = reference(t_end)?;
    let mut pts = Vec::with_capacity(CONVERGENCE_STEPS.len());
    for &step in &CONVERGENCE_STEPS {
        let run = integrate(z0, zd0, t_end, step, ambient)?;
        match run.status {
            RunStatus::Completed => {}
            RunStatus::BlowUp { t } | RunStatus::ChartBreakdown { t } => {
                return Err(invalid(format!("integration stopped early at t = {t}")));
            }
        }
        let err = (&run.last().z - &exact).frobenius_norm();
        pts.push((run.step, err));
    }
    if pts.iter().all(|&(_, e)| e < EXACT_ERROR) {
        return Ok(ConvergenceEstimate::Exact);
    }
    let xs: Vec<f64> = pts.iter().map(|&(h, _)| log(h)).collect();
    let ys: Vec<f64> = pts
        .iter()
        .map(|&(_, e)| log(e.max(f64::MIN_POSITIVE)))
        .collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(ConvergenceEstimate::Order(sxy / sxx))
}
