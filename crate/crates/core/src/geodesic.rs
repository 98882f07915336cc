//! Grassmannian geodesics in the affine chart and in the Stiefel model.
//!
//! A point of `Gr(m, n-1+m)` in the affine chart is a slope matrix `Z` of
//! shape `(n-1) x m`, the graph of a linear map `ℝ^m → ℝ^{n-1}`. In the
//! Stiefel model the same point is an orthonormal frame `V = [P; Q]` with
//! `P` the top `m x m` block, and `Z = Q P⁻¹` whenever `P` is invertible.
//!
//! The closed-form family [`ClosedFormGeodesic`] is the image of the
//! trigonometric frame `[cos(Λ̃t); sin(Λ̃t)]` under the orthogonal matrix
//! `[[M, MBᵀ], [-NB, N]]` with `M = (I + BᵀB)^{-1/2}`, `N = (I + BBᵀ)^{-1/2}`.

use alloc::format;
use alloc::vec::Vec;

use libm::{cos, sin, tan};

use crate::error::{invalid, Error};
use crate::matlin::{LinalgError, Mat};
use crate::Ambient;

/// Tolerance on `‖LᵀL - I‖_F` for matrices that must be orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;

/// Relative tolerance for the identities checked when a closed form is built.
pub const CONSTRUCTION_TOL: f64 = 1e-9;

/// A positive frequency `λ`, kept exact when it was given as a ratio so that
/// common periods can be computed without rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frequency {
    Rational { num: u64, den: u64 },
    Real(f64),
}

impl Frequency {
    pub fn rational(num: u64, den: u64) -> Self {
        Frequency::Rational { num, den }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Frequency::Rational { num, den } => num as f64 / den as f64,
            Frequency::Real(x) => x,
        }
    }

    /// Reduced `(num, den)` when exact.
    pub fn ratio(&self) -> Option<(u64, u64)> {
        match *self {
            Frequency::Rational { num, den } => {
                let g = num_integer::gcd(num, den).max(1);
                Some((num / g, den / g))
            }
            Frequency::Real(_) => None,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        match *self {
            Frequency::Rational { num, den } if num == 0 || den == 0 => Err(invalid(format!(
                "frequency {num}/{den} must be a positive ratio"
            ))),
            Frequency::Real(x) if !(x > 0.0 && x.is_finite()) => Err(invalid(format!(
                "frequency {x} must be positive and finite"
            ))),
            _ => Ok(()),
        }
    }
}

/// The data `(n, m, λ₁ ≤ … ≤ λ_r)` defining `Λ̃` and its trigonometric blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBlock {
    n: usize,
    m: usize,
    freqs: Vec<Frequency>,
}

impl SpectralBlock {
    pub fn new(n: usize, m: usize, freqs: Vec<Frequency>) -> Result<Self, Error> {
        if n < 2 || m < 1 {
            return Err(invalid(format!(
                "need n >= 2 and m >= 1, got n = {n}, m = {m}"
            )));
        }
        if freqs.len() > (n - 1).min(m) {
            return Err(invalid(format!(
                "rank r = {} exceeds min(n-1, m) = {}",
                freqs.len(),
                (n - 1).min(m)
            )));
        }
        for f in &freqs {
            f.validate()?;
        }
        if freqs.windows(2).any(|w| w[0].value() > w[1].value()) {
            return Err(invalid("frequencies must be non-decreasing"));
        }
        Ok(SpectralBlock { n, m, freqs })
    }

    pub fn from_values(n: usize, m: usize, lambdas: &[f64]) -> Result<Self, Error> {
        SpectralBlock::new(n, m, lambdas.iter().map(|&l| Frequency::Real(l)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rank(&self) -> usize {
        self.freqs.len()
    }

    pub fn frequencies(&self) -> &[Frequency] {
        &self.freqs
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.freqs.iter().map(Frequency::value).collect()
    }

    /// Shape `(n-1, m)` of slope matrices for this block.
    pub fn slope_shape(&self) -> (usize, usize) {
        (self.n - 1, self.m)
    }

    /// `Λ̃ = [[Λ, 0], [0, 0]]`, `(n-1) x m`.
    pub fn lambda_tilde(&self) -> Mat {
        let mut out = Mat::zeros(self.n - 1, self.m);
        for (i, f) in self.freqs.iter().enumerate() {
            out[(i, i)] = f.value();
        }
        out
    }

    /// `order`-th time derivative of `cos(Λ̃t) = diag(cos(λᵢt), I_{m-r})`, `m x m`.
    pub fn cos_block(&self, t: f64, order: u8) -> Mat {
        let mut out = Mat::zeros(self.m, self.m);
        for i in 0..self.m {
            out[(i, i)] = match self.freqs.get(i) {
                Some(f) => trig_derivative(f.value(), t, order, false),
                None if order == 0 => 1.0,
                None => 0.0,
            };
        }
        out
    }

    /// `order`-th time derivative of `sin(Λ̃t) = [[sin(Λt), 0], [0, 0]]`, `(n-1) x m`.
    pub fn sin_block(&self, t: f64, order: u8) -> Mat {
        let mut out = Mat::zeros(self.n - 1, self.m);
        for (i, f) in self.freqs.iter().enumerate() {
            out[(i, i)] = trig_derivative(f.value(), t, order, true);
        }
        out
    }
}

fn trig_derivative(lambda: f64, t: f64, order: u8, is_sin: bool) -> f64 {
    let (s, c) = (sin(lambda * t), cos(lambda * t));
    match (order, is_sin) {
        (0, false) => c,
        (0, true) => s,
        (1, false) => -lambda * s,
        (1, true) => lambda * c,
        (2, false) => -lambda * lambda * c,
        (2, true) => -lambda * lambda * s,
        _ => unreachable!("only derivatives up to second order are used"),
    }
}

/// `(Z, Ż, Z̈)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveJet {
    pub t: f64,
    pub z: Mat,
    pub zd: Mat,
    pub zdd: Mat,
}

impl CurveJet {
    pub fn new(t: f64, z: Mat, zd: Mat, zdd: Mat) -> Result<Self, Error> {
        if z.shape() != zd.shape() || z.shape() != zdd.shape() {
            return Err(invalid(format!(
                "jet shapes differ: Z {:?}, Ż {:?}, Z̈ {:?}",
                z.shape(),
                zd.shape(),
                zdd.shape()
            )));
        }
        Ok(CurveJet { t, z, zd, zdd })
    }

    /// `(n-1, m)`.
    pub fn shape(&self) -> (usize, usize) {
        self.z.shape()
    }
}

/// Something that produces slope-matrix jets along `t`.
pub trait SlopeCurve {
    /// `(n-1, m)`.
    fn shape(&self) -> (usize, usize);

    fn jet(&self, t: f64) -> Result<CurveJet, Error>;

    fn slope(&self, t: f64) -> Result<Mat, Error> {
        self.jet(t).map(|j| j.z)
    }
}

/// `2σ Ż Zᵀ (I + σ Z Zᵀ)⁻¹ Ż` with `σ = ambient.sign()`: the acceleration a
/// geodesic must have. Every residual and the ODE right-hand side go through
/// here.
pub(crate) fn geodesic_acceleration(
    ambient: Ambient,
    z: &Mat,
    zd: &Mat,
) -> Result<Mat, LinalgError> {
    let sigma = ambient.sign();
    let k = z.rows();
    let metric = &Mat::identity(k) + &(z * &z.transpose()).scale(sigma);
    let inv = metric.inverse()?;
    let zt_inv = &z.transpose() * &inv;
    Ok((&(zd * &zt_inv) * zd).scale(2.0 * sigma))
}

/// `Z̈ - 2 Ż Zᵀ (I + ZZᵀ)⁻¹ Ż`; zero exactly when the jet is geodesic.
pub fn affine_residual(jet: &CurveJet) -> Mat {
    // I + ZZᵀ has all eigenvalues >= 1
    let acc = geodesic_acceleration(Ambient::Euclidean, &jet.z, &jet.zd)
        .expect("I + ZZᵀ is positive definite");
    &jet.zdd - &acc
}

/// Squared speed `tr(Żᵀ (I + ZZᵀ)⁻¹ Ż (I + ZᵀZ)⁻¹)` of an affine-chart curve,
/// constant along geodesics.
pub fn affine_speed_sq(z: &Mat, zd: &Mat) -> Result<f64, Error> {
    let (k, m) = z.shape();
    let left = (&Mat::identity(k) + &(z * &z.transpose())).inverse()?;
    let right = (&Mat::identity(m) + &(&z.transpose() * z)).inverse()?;
    Ok((&(&(&zd.transpose() * &left) * zd) * &right).trace())
}

/// The `tan` family `Z(t) = [[tan(Λt), 0], [0, 0]]` from `Z(0) = 0`,
/// `Ż(0) = Λ̃`. Leaves the chart at `t = π / (2 λ_r)`.
#[derive(Debug, Clone)]
pub struct TanFamily(pub SpectralBlock);

impl SlopeCurve for TanFamily {
    fn shape(&self) -> (usize, usize) {
        self.0.slope_shape()
    }

    fn jet(&self, t: f64) -> Result<CurveJet, Error> {
        let (k, m) = self.shape();
        let mut z = Mat::zeros(k, m);
        let mut zd = Mat::zeros(k, m);
        let mut zdd = Mat::zeros(k, m);
        for (i, l) in self.0.lambdas().into_iter().enumerate() {
            let c = cos(l * t);
            if c.abs() < 1e-12 {
                return Err(Error::ChartBreakdown { t: Some(t) });
            }
            let tn = tan(l * t);
            let sec2 = 1.0 / (c * c);
            z[(i, i)] = tn;
            zd[(i, i)] = l * sec2;
            zdd[(i, i)] = 2.0 * l * l * tn * sec2;
        }
        CurveJet::new(t, z, zd, zdd)
    }
}

/// An orthonormal `m`-frame `V = [P; Q]` in `ℝ^{n-1+m}`, `P` the top `m` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelFrame {
    v: Mat,
    split: usize,
}

impl StiefelFrame {
    pub fn new(v: Mat) -> Result<Self, Error> {
        let (rows, m) = v.shape();
        if rows <= m {
            return Err(invalid(format!("frame must be tall, got {rows}x{m}")));
        }
        let defect = v.orthonormality_defect();
        if !(defect <= ORTHOGONALITY_TOL) {
            return Err(Error::InvariantViolated {
                what: "VᵀV = I",
                defect,
            });
        }
        Ok(StiefelFrame { v, split: m })
    }

    pub fn v(&self) -> &Mat {
        &self.v
    }

    pub fn m(&self) -> usize {
        self.split
    }

    pub fn p(&self) -> Mat {
        self.v.block(0, 0, self.split, self.split)
    }

    pub fn q(&self) -> Mat {
        self.v
            .block(self.split, 0, self.v.rows() - self.split, self.split)
    }
}

/// A frame with its first two time derivatives.
#[derive(Debug, Clone)]
pub struct StiefelJet {
    pub t: f64,
    pub frame: StiefelFrame,
    pub vd: Mat,
    pub vdd: Mat,
}

impl StiefelJet {
    pub fn new(t: f64, frame: StiefelFrame, vd: Mat, vdd: Mat) -> Result<Self, Error> {
        if vd.shape() != frame.v.shape() || vdd.shape() != frame.v.shape() {
            return Err(invalid("frame derivatives must match the frame shape"));
        }
        Ok(StiefelJet { t, frame, vd, vdd })
    }

    /// Pushes the jet into the affine chart: `Z = QP⁻¹`,
    /// `Ż = (Q̇ - ZṖ)P⁻¹`, `Z̈ = (Q̈ - 2ŻṖ - ZP̈)P⁻¹`.
    pub fn to_affine(&self) -> Result<CurveJet, Error> {
        let m = self.frame.split;
        let k = self.frame.v.rows() - m;
        let p_inv = self
            .frame
            .p()
            .invert_with_floor(1.0)
            .map(|(_, inv)| inv)
            .map_err(|_| Error::ChartBreakdown { t: Some(self.t) })?;
        let pd = self.vd.block(0, 0, m, m);
        let qd = self.vd.block(m, 0, k, m);
        let pdd = self.vdd.block(0, 0, m, m);
        let qdd = self.vdd.block(m, 0, k, m);
        let z = &self.frame.q() * &p_inv;
        let zd = &(&qd - &(&z * &pd)) * &p_inv;
        let zdd = &(&(&qdd - &(&zd * &pd).scale(2.0)) - &(&z * &pdd)) * &p_inv;
        CurveJet::new(self.t, z, zd, zdd)
    }
}

/// Defects of the three Stiefel geodesic conditions.
#[derive(Debug, Clone)]
pub struct StiefelResidual {
    /// `‖VᵀV - I‖_F`
    pub orthonormality: f64,
    /// `‖VᵀV̇‖_F`
    pub horizontality: f64,
    /// `V̈ + V(V̇ᵀV̇)`
    pub acceleration: Mat,
}

pub fn stiefel_residual(
    frame: &StiefelFrame,
    vd: &Mat,
    vdd: &Mat,
) -> Result<StiefelResidual, Error> {
    let v = &frame.v;
    if vd.shape() != v.shape() || vdd.shape() != v.shape() {
        return Err(invalid("frame derivatives must match the frame shape"));
    }
    let vt = v.transpose();
    Ok(StiefelResidual {
        orthonormality: v.orthonormality_defect(),
        horizontality: (&vt * vd).frobenius_norm(),
        acceleration: vdd + &(v * &(&vd.transpose() * vd)),
    })
}

fn check_orthogonal(l: &Mat, what: &'static str) -> Result<(), Error> {
    if !l.is_square() {
        return Err(invalid(format!(
            "{what} must be square, got {:?}",
            l.shape()
        )));
    }
    let defect = l.orthonormality_defect();
    if !(defect <= ORTHOGONALITY_TOL) {
        return Err(Error::InvariantViolated { what, defect });
    }
    Ok(())
}

/// `V ↦ LV` (and likewise for the derivatives) for `L ∈ O(n-1+m)`.
pub fn left_orthogonal_action(l: &Mat, samples: &[StiefelJet]) -> Result<Vec<StiefelJet>, Error> {
    check_orthogonal(l, "LᵀL = I")?;
    samples
        .iter()
        .map(|s| {
            let v = l.matmul(s.frame.v())?;
            Ok(StiefelJet {
                t: s.t,
                frame: StiefelFrame {
                    v,
                    split: s.frame.split,
                },
                vd: l * &s.vd,
                vdd: l * &s.vdd,
            })
        })
        .collect()
}

/// `P⁻¹` for the top block of an orthonormal frame, whose entries are `O(1)`.
fn chart_inverse(p: &Mat) -> Result<Mat, LinalgError> {
    p.invert_with_floor(1.0).map(|(_, inv)| inv)
}

/// `Z = QP⁻¹`.
pub fn stiefel_to_affine(frame: &StiefelFrame) -> Result<Mat, Error> {
    let p_inv = chart_inverse(&frame.p()).map_err(|_| Error::ChartBreakdown { t: None })?;
    Ok(&frame.q() * &p_inv)
}

/// Closed-form geodesic `Z(t) = Q(t) P(t)⁻¹` with
/// `P = M(cos(Λ̃t) + Bᵀ sin(Λ̃t))` and `Q = N(-B cos(Λ̃t) + sin(Λ̃t))`,
/// passing through `Z(0) = -B` with `Ż(0) = (I + BBᵀ)^{1/2} Λ̃ (I + BᵀB)^{1/2}`.
#[derive(Debug, Clone)]
pub struct ClosedFormGeodesic {
    spec: SpectralBlock,
    b: Mat,
    /// `M = (I + BᵀB)^{-1/2}`, `m x m`
    m_inv_sqrt: Mat,
    /// `N = (I + BBᵀ)^{-1/2}`, `(n-1) x (n-1)`
    n_inv_sqrt: Mat,
}

impl ClosedFormGeodesic {
    /// Computes `M` and `N` and checks `NB = BM` and that
    /// `[[M, MBᵀ], [-NB, N]]` is orthogonal.
    pub fn build(spec: SpectralBlock, b: Mat) -> Result<Self, Error> {
        if b.shape() != spec.slope_shape() {
            return Err(invalid(format!(
                "B must be {}x{}, got {}x{}",
                spec.n() - 1,
                spec.m(),
                b.rows(),
                b.cols()
            )));
        }
        let (k, m) = b.shape();
        let bt = b.transpose();
        let m_inv_sqrt = (&Mat::identity(m) + &(&bt * &b)).spd_roots()?.inv_sqrt;
        let n_inv_sqrt = (&Mat::identity(k) + &(&b * &bt)).spd_roots()?.inv_sqrt;
        let g = ClosedFormGeodesic {
            spec,
            b,
            m_inv_sqrt,
            n_inv_sqrt,
        };

        let scale = 1.0 + g.b.frobenius_norm();
        let commute = (&(&g.n_inv_sqrt * &g.b) - &(&g.b * &g.m_inv_sqrt)).frobenius_norm();
        if !(commute <= CONSTRUCTION_TOL * scale) {
            return Err(Error::InvariantViolated {
                what: "NB = BM",
                defect: commute,
            });
        }
        let orth = g.factor_matrix().orthonormality_defect();
        if !(orth <= CONSTRUCTION_TOL * scale) {
            return Err(Error::InvariantViolated {
                what: "[[M, MBᵀ], [-NB, N]] orthogonal",
                defect: orth,
            });
        }
        Ok(g)
    }

    pub fn spec(&self) -> &SpectralBlock {
        &self.spec
    }

    pub fn b(&self) -> &Mat {
        &self.b
    }

    pub fn m_inv_sqrt(&self) -> &Mat {
        &self.m_inv_sqrt
    }

    pub fn n_inv_sqrt(&self) -> &Mat {
        &self.n_inv_sqrt
    }

    /// `[[M, MBᵀ], [-NB, N]] ∈ O(n-1+m)`.
    pub fn factor_matrix(&self) -> Mat {
        let mbt = &self.m_inv_sqrt * &self.b.transpose();
        let nb = -&(&self.n_inv_sqrt * &self.b);
        Mat::from_blocks(&self.m_inv_sqrt, &mbt, &nb, &self.n_inv_sqrt)
    }

    /// Initial data as stated in closed form, computed from the square roots
    /// directly: `(-B, (I + BBᵀ)^{1/2} Λ̃ (I + BᵀB)^{1/2})`.
    pub fn initial_data(&self) -> Result<(Mat, Mat), Error> {
        let (k, m) = self.b.shape();
        let bt = self.b.transpose();
        let left = (&Mat::identity(k) + &(&self.b * &bt)).spd_roots()?.sqrt;
        let right = (&Mat::identity(m) + &(&bt * &self.b)).spd_roots()?.sqrt;
        Ok((-&self.b, &(&left * &self.spec.lambda_tilde()) * &right))
    }

    fn frame_blocks(&self, t: f64, order: u8) -> (Mat, Mat) {
        let c = self.spec.cos_block(t, order);
        let s = self.spec.sin_block(t, order);
        let p = &self.m_inv_sqrt * &(&c + &(&self.b.transpose() * &s));
        let q = &self.n_inv_sqrt * &(&s - &(&self.b * &c));
        (p, q)
    }

    /// The Stiefel lift `[P; Q]` with analytic derivatives.
    pub fn stiefel_lift(&self, t: f64) -> StiefelJet {
        let [v, vd, vdd] = [0u8, 1, 2].map(|k| {
            let (p, q) = self.frame_blocks(t, k);
            Mat::vstack(&p, &q)
        });
        StiefelJet {
            t,
            frame: StiefelFrame {
                v,
                split: self.spec.m(),
            },
            vd,
            vdd,
        }
    }

    /// `Z(t)`, `Ż(t)`, `Z̈(t)` from the closed form with analytic derivatives.
    pub fn eval(&self, t: f64) -> Result<CurveJet, Error> {
        let (p, q) = self.frame_blocks(t, 0);
        let (pd, qd) = self.frame_blocks(t, 1);
        let (pdd, qdd) = self.frame_blocks(t, 2);
        let p_inv = chart_inverse(&p).map_err(|_| Error::ChartBreakdown { t: Some(t) })?;
        let z = &q * &p_inv;
        let zd = &(&qd - &(&z * &pd)) * &p_inv;
        let zdd = &(&(&qdd - &(&zd * &pd).scale(2.0)) - &(&z * &pdd)) * &p_inv;
        CurveJet::new(t, z, zd, zdd)
    }
}

impl SlopeCurve for ClosedFormGeodesic {
    fn shape(&self) -> (usize, usize) {
        self.b.shape()
    }

    fn jet(&self, t: f64) -> Result<CurveJet, Error> {
        self.eval(t)
    }

    fn slope(&self, t: f64) -> Result<Mat, Error> {
        let (p, q) = self.frame_blocks(t, 0);
        let p_inv = chart_inverse(&p).map_err(|_| Error::ChartBreakdown { t: Some(t) })?;
        Ok(&q * &p_inv)
    }
}

/// `[[A, B], [C, D]] ∈ O(n-1+m)` split as `A: m x m`, `B: m x (n-1)`,
/// `C: (n-1) x m`, `D: (n-1) x (n-1)`.
#[derive(Debug, Clone)]
pub struct OrthPartition {
    pub a: Mat,
    pub bblk: Mat,
    pub c: Mat,
    pub d: Mat,
}

impl OrthPartition {
    pub fn new(a: Mat, bblk: Mat, c: Mat, d: Mat) -> Result<Self, Error> {
        let m = a.rows();
        let k = d.rows();
        if a.shape() != (m, m)
            || bblk.shape() != (m, k)
            || c.shape() != (k, m)
            || d.shape() != (k, k)
        {
            return Err(invalid("partition blocks do not tile a square matrix"));
        }
        let part = OrthPartition { a, bblk, c, d };
        check_orthogonal(&part.assembled(), "partition orthogonal")?;
        Ok(part)
    }

    /// Splits an orthogonal matrix after its first `m` rows and columns.
    pub fn from_orthogonal(l: &Mat, m: usize) -> Result<Self, Error> {
        if !l.is_square() || m == 0 || m >= l.rows() {
            return Err(invalid(format!("cannot split {:?} at m = {m}", l.shape())));
        }
        let k = l.rows() - m;
        OrthPartition::new(
            l.block(0, 0, m, m),
            l.block(0, m, m, k),
            l.block(m, 0, k, m),
            l.block(m, m, k, k),
        )
    }

    pub fn identity(k: usize, m: usize) -> Self {
        OrthPartition {
            a: Mat::identity(m),
            bblk: Mat::zeros(m, k),
            c: Mat::zeros(k, m),
            d: Mat::identity(k),
        }
    }

    pub fn assembled(&self) -> Mat {
        Mat::from_blocks(&self.a, &self.bblk, &self.c, &self.d)
    }
}

struct MobiusParts {
    w: CurveJet,
    u_inv: Mat,
}

fn mobius_parts(part: &OrthPartition, jet: &CurveJet) -> Result<MobiusParts, Error> {
    let (k, m) = jet.shape();
    if part.a.rows() != m || part.d.rows() != k {
        return Err(invalid(format!(
            "partition is for (n-1, m) = ({}, {}), jet is ({k}, {m})",
            part.d.rows(),
            part.a.rows()
        )));
    }
    let u = &part.a + &(&part.bblk * &jet.z);
    let y = &part.c + &(&part.d * &jet.z);
    let u_inv = u
        .inverse()
        .map_err(|_| Error::ChartBreakdown { t: Some(jet.t) })?;
    let ud = &part.bblk * &jet.zd;
    let yd = &part.d * &jet.zd;
    let udd = &part.bblk * &jet.zdd;
    let ydd = &part.d * &jet.zdd;
    let w = &y * &u_inv;
    let wd = &(&yd - &(&w * &ud)) * &u_inv;
    let wdd = &(&(&ydd - &(&wd * &ud).scale(2.0)) - &(&w * &udd)) * &u_inv;
    Ok(MobiusParts {
        w: CurveJet::new(jet.t, w, wd, wdd)?,
        u_inv,
    })
}

/// `W = (C + DZ)(A + BZ)⁻¹` with analytic derivatives.
pub fn mobius_transform(part: &OrthPartition, jet: &CurveJet) -> Result<CurveJet, Error> {
    mobius_parts(part, jet).map(|p| p.w)
}

/// `‖R(W) - (D - WB) R(Z) (A + BZ)⁻¹‖_F` where `R` is [`affine_residual`].
/// Zero up to rounding for every jet, geodesic or not.
pub fn mobius_covariance_defect(part: &OrthPartition, jet: &CurveJet) -> Result<f64, Error> {
    let parts = mobius_parts(part, jet)?;
    let rw = affine_residual(&parts.w);
    let rz = affine_residual(jet);
    let factor = &part.d - &(&parts.w.z * &part.bblk);
    let predicted = &(&factor * &rz) * &parts.u_inv;
    Ok((&rw - &predicted).frobenius_norm())
}

/// Size of the terms entering [`mobius_covariance_defect`], so that the
/// defect can be judged relative to rounding:
/// `s(W) + s(Z) ‖D - WB‖_F ‖(A + BZ)⁻¹‖_F` with
/// `s(X) = 1 + ‖Ẍ‖_F + ‖Ẋ‖_F² (1 + ‖X‖_F)`.
pub fn mobius_defect_scale(part: &OrthPartition, jet: &CurveJet) -> Result<f64, Error> {
    let parts = mobius_parts(part, jet)?;
    let size = |j: &CurveJet| {
        let v = j.zd.frobenius_norm();
        1.0 + j.zdd.frobenius_norm() + v * v * (1.0 + j.z.frobenius_norm())
    };
    let factor = &part.d - &(&parts.w.z * &part.bblk);
    Ok(size(&parts.w) + size(jet) * factor.frobenius_norm() * parts.u_inv.frobenius_norm())
}

/// `Z ↦ S Z R` for `S ∈ O(n-1)` and `R ∈ O(m)`, either optional.
pub fn orthogonal_symmetry(
    jet: &CurveJet,
    s: Option<&Mat>,
    r: Option<&Mat>,
) -> Result<CurveJet, Error> {
    let (k, m) = jet.shape();
    if let Some(s) = s {
        if s.shape() != (k, k) {
            return Err(invalid(format!("S must be {k}x{k}")));
        }
        check_orthogonal(s, "SᵀS = I")?;
    }
    if let Some(r) = r {
        if r.shape() != (m, m) {
            return Err(invalid(format!("R must be {m}x{m}")));
        }
        check_orthogonal(r, "RᵀR = I")?;
    }
    let apply = |x: &Mat| {
        let left = match s {
            Some(s) => s * x,
            None => x.clone(),
        };
        match r {
            Some(r) => &left * r,
            None => left,
        }
    };
    CurveJet::new(jet.t, apply(&jet.z), apply(&jet.zd), apply(&jet.zdd))
}
