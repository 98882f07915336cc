//! The evolving-plane graph `Φ(x, t) = (x, t, Zᵀ(t) x)` and the minimal
//! surface system on it.
//!
//! Two independent routes to the same answer live here. [`mss_residual`]
//! contracts the inverse induced metric with the Euclidean Hessian of each
//! `f^α`. [`mss_residual_det_form`] evaluates the block determinant condition
//! through its Schur complement, which is `x`-independent and equals the
//! geodesic residual. [`fd_oracle_residual`] rebuilds the first route from
//! finite differences of `Z(t)` alone.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error};
use crate::geodesic::{CurveJet, SlopeCurve};
use crate::matlin::Mat;
use crate::Ambient;

/// Default finite-difference step for [`fd_oracle_residual`].
pub const FD_STEP: f64 = 1e-4;

/// A point `(x¹, …, x^{n-1}, t)` of the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzPoint {
    pub x: Vec<f64>,
    pub t: f64,
}

impl AnsatzPoint {
    pub fn new(x: Vec<f64>, t: f64) -> Self {
        AnsatzPoint { x, t }
    }
}

#[derive(Debug, Clone)]
pub struct MetricReport {
    pub g: Mat,
    pub det_g: f64,
    /// `g^{ij} ∂ᵢ∂ⱼ f^α` for each `α`
    pub residual: Vec<f64>,
    pub hessians: Vec<Mat>,
}

fn check_point(jet: &CurveJet, p: &AnsatzPoint) -> Result<(), Error> {
    if p.x.len() != jet.z.rows() {
        return Err(invalid(format!(
            "point has {} spatial coordinates, slope matrix has {} rows",
            p.x.len(),
            jet.z.rows()
        )));
    }
    Ok(())
}

/// `w_β = ⟨x, ż⃗^β⟩`, i.e. `Żᵀ x`.
fn velocity_weights(jet: &CurveJet, x: &[f64]) -> Mat {
    &jet.zd.transpose() * &Mat::column_vector(x)
}

/// `(x, t, f¹, …, f^m)` with `f^α = Σᵢ zᵢ^α xⁱ`. The jet is taken to be
/// evaluated at `p.t`.
pub fn embed(jet: &CurveJet, p: &AnsatzPoint) -> Result<Vec<f64>, Error> {
    check_point(jet, p)?;
    let f = &jet.z.transpose() * &Mat::column_vector(&p.x);
    let mut out = Vec::with_capacity(p.x.len() + 1 + f.rows());
    out.extend_from_slice(&p.x);
    out.push(p.t);
    out.extend_from_slice(f.as_slice());
    Ok(out)
}

/// Induced metric in coordinates `(x, t)`:
///
/// ```text
/// [ I + σZZᵀ     σ Z w      ]
/// [ σ (Zw)ᵀ      σ(1 + |w|²) ]
/// ```
///
/// with `w = Żᵀx` and `σ = ±1` for Euclidean/Lorentzian ambient space.
pub fn induced_metric_in(ambient: Ambient, jet: &CurveJet, p: &AnsatzPoint) -> Result<Mat, Error> {
    check_point(jet, p)?;
    let sigma = ambient.sign();
    let k = jet.z.rows();
    let w = velocity_weights(jet, &p.x);
    let top = &Mat::identity(k) + &(&jet.z * &jet.z.transpose()).scale(sigma);
    let side = (&jet.z * &w).scale(sigma);
    let corner =
        Mat::from_rows(&[[sigma * (1.0 + w.as_slice().iter().map(|v| v * v).sum::<f64>())]]);
    Ok(Mat::from_blocks(&top, &side, &side.transpose(), &corner))
}

/// Euclidean induced metric.
pub fn induced_metric(jet: &CurveJet, p: &AnsatzPoint) -> Result<Mat, Error> {
    induced_metric_in(Ambient::Euclidean, jet, p)
}

/// Hessian of `f^α` in `(x, t)`: zero spatial block, `ż⃗^α` on the border and
/// `⟨x, z̈⃗^α⟩` in the corner.
pub fn hessian(jet: &CurveJet, p: &AnsatzPoint, alpha: usize) -> Result<Mat, Error> {
    check_point(jet, p)?;
    let k = jet.z.rows();
    let mut h = Mat::zeros(k + 1, k + 1);
    for i in 0..k {
        h[(i, k)] = jet.zd[(i, alpha)];
        h[(k, i)] = jet.zd[(i, alpha)];
    }
    h[(k, k)] = (0..k).map(|i| p.x[i] * jet.zdd[(i, alpha)]).sum();
    Ok(h)
}

fn contract(g_inv: &Mat, h: &Mat) -> f64 {
    // both symmetric: tr(g⁻¹ h) = Σ g⁻¹_ij h_ij
    g_inv
        .as_slice()
        .iter()
        .zip(h.as_slice())
        .map(|(a, b)| a * b)
        .sum()
}

pub fn metric_report_in(
    ambient: Ambient,
    jet: &CurveJet,
    p: &AnsatzPoint,
) -> Result<MetricReport, Error> {
    let g = induced_metric_in(ambient, jet, p)?;
    let (det_g, g_inv) = g.invert_with_det()?;
    let hessians = (0..jet.z.cols())
        .map(|a| hessian(jet, p, a))
        .collect::<Result<Vec<_>, _>>()?;
    let residual = hessians.iter().map(|h| contract(&g_inv, h)).collect();
    Ok(MetricReport {
        g,
        det_g,
        residual,
        hessians,
    })
}

pub fn metric_report(jet: &CurveJet, p: &AnsatzPoint) -> Result<MetricReport, Error> {
    metric_report_in(Ambient::Euclidean, jet, p)
}

/// `g^{ij} ∂ᵢ∂ⱼ f^α` for each `α` in the given ambient space.
pub fn laplacian_residual(
    ambient: Ambient,
    jet: &CurveJet,
    p: &AnsatzPoint,
) -> Result<Vec<f64>, Error> {
    metric_report_in(ambient, jet, p).map(|r| r.residual)
}

/// Minimal surface system residual `g^{ij} ∂ᵢ∂ⱼ f^α`, Euclidean ambient.
pub fn mss_residual(jet: &CurveJet, p: &AnsatzPoint) -> Result<Vec<f64>, Error> {
    laplacian_residual(Ambient::Euclidean, jet, p)
}

/// `D - C A⁻¹ B` for a bordered matrix with scalar corner `D`.
fn schur_scalar(a_inv: &Mat, b: &[f64], c: &[f64], d: f64) -> f64 {
    let n = b.len();
    let mut s = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += a_inv[(i, j)] * b[j];
        }
        s += c[i] * row;
    }
    d - s
}

/// For each `(k, α)`, the Schur value of
///
/// ```text
/// [ I + σZZᵀ               2 ż⃗^α  ]
/// [ σ Σ_β ż_k^β (z⃗^β)ᵀ     z̈_k^α  ]
/// ```
///
/// whose vanishing for all `(k, α)` is the determinant form of the minimal
/// surface system.
pub fn det_form_residual(ambient: Ambient, jet: &CurveJet) -> Result<Mat, Error> {
    let sigma = ambient.sign();
    let (k, m) = jet.shape();
    let a = &Mat::identity(k) + &(&jet.z * &jet.z.transpose()).scale(sigma);
    let a_inv = a.inverse().map_err(|_| match ambient {
        Ambient::Lorentzian => Error::SpacelikeBreakdown { t: jet.t },
        Ambient::Euclidean => Error::InvariantViolated {
            what: "I + ZZᵀ invertible",
            defect: f64::NAN,
        },
    })?;
    let rows = (&jet.zd * &jet.z.transpose()).scale(sigma);
    let mut out = Mat::zeros(k, m);
    for alpha in 0..m {
        let border: Vec<f64> = jet.zd.column(alpha).iter().map(|v| 2.0 * v).collect();
        for row in 0..k {
            out[(row, alpha)] = schur_scalar(&a_inv, &border, rows.row(row), jet.zdd[(row, alpha)]);
        }
    }
    Ok(out)
}

/// Euclidean determinant-form residual; equals the geodesic residual.
pub fn mss_residual_det_form(jet: &CurveJet) -> Result<Mat, Error> {
    det_form_residual(Ambient::Euclidean, jet)
}

/// Rebuilds `g^{ij}∂ᵢ∂ⱼf^α` from the determinant form through its linear
/// dependence on `x`: `Σ_k x^k R_{kα} / s`, where `R` is the determinant-form
/// residual and `s = g_nn - c g_top⁻¹ cᵀ` is the Schur complement of the
/// spatial block in the metric.
pub fn laplacian_from_det_form(
    ambient: Ambient,
    jet: &CurveJet,
    p: &AnsatzPoint,
) -> Result<Vec<f64>, Error> {
    check_point(jet, p)?;
    let r = det_form_residual(ambient, jet)?;
    let g = induced_metric_in(ambient, jet, p)?;
    let k = jet.z.rows();
    let top_inv = g.block(0, 0, k, k).inverse()?;
    let side = g.block(0, k, k, 1).into_vec();
    let s = schur_scalar(&top_inv, &side, &side, g[(k, k)]);
    Ok((0..jet.z.cols())
        .map(|alpha| (0..k).map(|row| p.x[row] * r[(row, alpha)]).sum::<f64>() / s)
        .collect())
}

/// Finite-difference oracle for [`mss_residual`], using only `Z(t)`.
///
/// Evaluates `f^α(x, t) = Σᵢ zᵢ^α(t) xⁱ` on a centred stencil of width `h`,
/// forms gradients and Hessians by central differences, assembles the metric
/// from the graph tangent vectors `(e_j, ∂_j f)` and contracts.
pub fn fd_oracle_residual(
    curve: &impl SlopeCurve,
    p: &AnsatzPoint,
    h: f64,
) -> Result<Vec<f64>, Error> {
    if !(h > 0.0) {
        return Err(invalid(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let (k, m) = curve.shape();
    if p.x.len() != k {
        return Err(invalid(format!(
            "point has {} spatial coordinates, expected {k}",
            p.x.len()
        )));
    }
    let n = k + 1;
    let slopes = [
        curve.slope(p.t - h)?,
        curve.slope(p.t)?,
        curve.slope(p.t + h)?,
    ];

    // f at u + a·h·e_i + b·h·e_j, with a, b ∈ {-1, 0, 1}
    let f = |alpha: usize, shifts: &[(usize, i32)]| -> f64 {
        let mut x = p.x.clone();
        let mut dt = 0i32;
        for &(dir, s) in shifts {
            if dir == k {
                dt += s;
            } else {
                x[dir] += s as f64 * h;
            }
        }
        let z = &slopes[(dt + 1) as usize];
        (0..k).map(|i| z[(i, alpha)] * x[i]).sum()
    };

    let mut grads = Mat::zeros(n, m);
    let mut hessians = Vec::with_capacity(m);
    for alpha in 0..m {
        let f0 = f(alpha, &[]);
        let mut hess = Mat::zeros(n, n);
        for i in 0..n {
            let fp = f(alpha, &[(i, 1)]);
            let fm = f(alpha, &[(i, -1)]);
            grads[(i, alpha)] = (fp - fm) / (2.0 * h);
            hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in (i + 1)..n {
                let v = (f(alpha, &[(i, 1), (j, 1)])
                    - f(alpha, &[(i, 1), (j, -1)])
                    - f(alpha, &[(i, -1), (j, 1)])
                    + f(alpha, &[(i, -1), (j, -1)]))
                    / (4.0 * h * h);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        hessians.push(hess);
    }
    let g = &Mat::identity(n) + &(&grads * &grads.transpose());
    let g_inv = g.inverse()?;
    Ok(hessians.iter().map(|hs| contract(&g_inv, hs)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::{affine_residual, ClosedFormGeodesic, Frequency, SpectralBlock};
    use crate::testutil::{random_mat, rng};
    use rand::Rng;
    use std::vec;

    fn rotation() -> ClosedFormGeodesic {
        let spec = SpectralBlock::new(3, 2, vec![Frequency::rational(1, 2); 2]).unwrap();
        ClosedFormGeodesic::build(spec, Mat::from_rows(&[[0.0, 1.0], [-1.0, 0.0]])).unwrap()
    }

    /// Z(t) = diag(t², 0): not a geodesic.
    struct Quadratic;

    impl SlopeCurve for Quadratic {
        fn shape(&self) -> (usize, usize) {
            (2, 2)
        }

        fn jet(&self, t: f64) -> Result<CurveJet, Error> {
            CurveJet::new(
                t,
                Mat::diag(&[t * t, 0.0]),
                Mat::diag(&[2.0 * t, 0.0]),
                Mat::diag(&[2.0, 0.0]),
            )
        }
    }

    #[test]
    fn embed_on_axis_and_rotation_slice() {
        let g = rotation();
        let jet = g.eval(1.3).unwrap();
        let p = AnsatzPoint::new(vec![0.0, 0.0], 1.3);
        assert_eq!(embed(&jet, &p).unwrap(), vec![0.0, 0.0, 1.3, 0.0, 0.0]);

        let (x1, x2, t) = (0.7, -1.9, 2.2f64);
        let e = embed(&g.eval(t).unwrap(), &AnsatzPoint::new(vec![x1, x2], t)).unwrap();
        // f = Zᵀx with Z = [[sin t, -cos t], [cos t, sin t]]
        let want = [
            x1,
            x2,
            t,
            x1 * t.sin() + x2 * t.cos(),
            -x1 * t.cos() + x2 * t.sin(),
        ];
        for (a, b) in e.iter().zip(&want) {
            assert!((a - b).abs() < 1e-13);
        }
        // the slice lies in the cone over the Clifford torus
        assert!((x1 * x1 + x2 * x2 - e[3] * e[3] - e[4] * e[4]).abs() < 1e-12);
        assert!(embed(&jet, &AnsatzPoint::new(vec![1.0], 0.0)).is_err());
    }

    #[test]
    fn flat_metric_and_axis_metric() {
        let jet = CurveJet::new(0.0, Mat::zeros(2, 2), Mat::zeros(2, 2), Mat::zeros(2, 2)).unwrap();
        let p = AnsatzPoint::new(vec![0.3, 0.4], 0.0);
        assert_eq!(induced_metric(&jet, &p).unwrap(), Mat::identity(3));

        let jet = rotation().eval(0.4).unwrap();
        let g = induced_metric(&jet, &AnsatzPoint::new(vec![0.0, 0.0], 0.4)).unwrap();
        assert_eq!(g[(0, 2)], 0.0);
        assert_eq!(g[(1, 2)], 0.0);
        assert_eq!(g[(2, 2)], 1.0);
    }

    #[test]
    fn metric_matches_tangent_vectors_by_fd() {
        let g = rotation();
        let (x, t, h) = (vec![1.0, 0.0], 0.0, 1e-6);
        let jet = g.eval(t).unwrap();
        let p = AnsatzPoint::new(x.clone(), t);
        let phi = |dx: [f64; 2], dt: f64| {
            embed(
                &g.eval(t + dt).unwrap(),
                &AnsatzPoint::new(vec![x[0] + dx[0], x[1] + dx[1]], t + dt),
            )
            .unwrap()
        };
        let tangent = |i: usize| -> Vec<f64> {
            let (mut a, mut b) = ([0.0; 2], [0.0; 2]);
            let (mut ta, mut tb) = (0.0, 0.0);
            if i < 2 {
                a[i] = h;
                b[i] = -h;
            } else {
                ta = h;
                tb = -h;
            }
            phi(a, ta)
                .iter()
                .zip(phi(b, tb))
                .map(|(p, q)| (p - q) / (2.0 * h))
                .collect()
        };
        let tv: Vec<Vec<f64>> = (0..3).map(tangent).collect();
        let gm = induced_metric(&jet, &p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = tv[i].iter().zip(&tv[j]).map(|(a, b)| a * b).sum();
                assert!((dot - gm[(i, j)]).abs() < 1e-9, "({i}, {j})");
            }
        }
    }

    #[test]
    fn constant_slope_is_minimal() {
        let mut r = rng(20);
        let jet = CurveJet::new(
            0.0,
            random_mat(&mut r, 3, 2),
            Mat::zeros(3, 2),
            Mat::zeros(3, 2),
        )
        .unwrap();
        let res = mss_residual(&jet, &AnsatzPoint::new(vec![1.0, -2.0, 0.5], 0.0)).unwrap();
        assert!(res.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rotation_graph_is_minimal() {
        let g = rotation();
        let mut r = rng(21);
        for _ in 0..100 {
            let t = r.random_range(-5.0..5.0);
            let p = AnsatzPoint::new(
                vec![r.random_range(-5.0..5.0), r.random_range(-5.0..5.0)],
                t,
            );
            let rep = metric_report(&g.eval(t).unwrap(), &p).unwrap();
            assert!(rep.residual.iter().all(|v| v.abs() < 1e-10));
            assert!(rep.det_g > 0.0);
            assert!(rep.g.symmetry_defect() < 1e-13);
            let fd = fd_oracle_residual(&g, &p, FD_STEP).unwrap();
            assert!(fd.iter().all(|v| v.abs() < 1e-6), "{fd:?}");
        }
    }

    #[test]
    fn non_geodesic_residual_agrees_across_forms() {
        let jet = Quadratic.jet(1.0).unwrap();
        let p = AnsatzPoint::new(vec![1.0, 1.0], 1.0);
        let direct = mss_residual(&jet, &p).unwrap();
        assert!(direct[0].abs() > 0.1);
        let via_det = laplacian_from_det_form(Ambient::Euclidean, &jet, &p).unwrap();
        for (a, b) in direct.iter().zip(&via_det) {
            assert!((a - b).abs() < 1e-14);
        }
        // divided by det of the top-left block the bordered determinant equals
        // the Schur value; times x and over det g it gives the residual
        let rep = metric_report(&jet, &p).unwrap();
        let top_det = rep.g.block(0, 0, 2, 2).det().unwrap();
        let schur = mss_residual_det_form(&jet).unwrap();
        let lin: f64 = (0..2).map(|k| p.x[k] * schur[(k, 0)]).sum();
        assert!((direct[0] - top_det * lin / rep.det_g).abs() < 1e-14);
    }

    #[test]
    fn det_form_matches_affine_residual() {
        let mut r = rng(22);
        for _ in 0..20 {
            let jet = CurveJet::new(
                0.0,
                random_mat(&mut r, 4, 3),
                random_mat(&mut r, 4, 3),
                random_mat(&mut r, 4, 3),
            )
            .unwrap();
            let a = mss_residual_det_form(&jet).unwrap();
            let b = affine_residual(&jet);
            assert!((&a - &b).frobenius_norm() < 1e-13 * (1.0 + b.frobenius_norm()));
        }
    }

    #[test]
    fn det_form_unit_acceleration() {
        let mut zdd = Mat::zeros(3, 2);
        zdd[(1, 0)] = 1.0;
        let jet = CurveJet::new(
            0.0,
            random_mat(&mut rng(23), 3, 2),
            Mat::zeros(3, 2),
            zdd.clone(),
        )
        .unwrap();
        assert_eq!(mss_residual_det_form(&jet).unwrap(), zdd);
    }

    #[test]
    fn det_form_vanishes_on_geodesics() {
        let g = rotation();
        for &t in &[0.0, 1.0, 7.5] {
            assert!(
                mss_residual_det_form(&g.eval(t).unwrap())
                    .unwrap()
                    .max_abs()
                    < 1e-10
            );
        }
    }

    #[test]
    fn fd_oracle_flat_and_richardson() {
        struct Flat;
        impl SlopeCurve for Flat {
            fn shape(&self) -> (usize, usize) {
                (2, 1)
            }
            fn jet(&self, t: f64) -> Result<CurveJet, Error> {
                CurveJet::new(t, Mat::zeros(2, 1), Mat::zeros(2, 1), Mat::zeros(2, 1))
            }
        }
        let p = AnsatzPoint::new(vec![0.5, 0.5], 0.2);
        assert_eq!(fd_oracle_residual(&Flat, &p, 1e-3).unwrap(), vec![0.0]);
        assert!(fd_oracle_residual(&Flat, &p, 0.0).is_err());

        // Z(t) = diag(t², 0) is quadratic in t, so the stencil is exact up to
        // rounding; use a cubic-in-t curve to see the h² error.
        struct Cubic;
        impl SlopeCurve for Cubic {
            fn shape(&self) -> (usize, usize) {
                (2, 2)
            }
            fn jet(&self, t: f64) -> Result<CurveJet, Error> {
                let z = Mat::from_rows(&[[t * t * t, 0.3 * t], [0.1, t.sin()]]);
                let zd = Mat::from_rows(&[[3.0 * t * t, 0.3], [0.0, t.cos()]]);
                let zdd = Mat::from_rows(&[[6.0 * t, 0.0], [0.0, -t.sin()]]);
                CurveJet::new(t, z, zd, zdd)
            }
        }
        let p = AnsatzPoint::new(vec![0.8, -0.6], 0.7);
        let exact = mss_residual(&Cubic.jet(0.7).unwrap(), &p).unwrap();
        let err = |h: f64| {
            let fd = fd_oracle_residual(&Cubic, &p, h).unwrap();
            fd.iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        let ratio = e1 / e2;
        assert!(
            (3.5..4.5).contains(&ratio),
            "ratio {ratio}, errors {e1} {e2}"
        );
    }
}
