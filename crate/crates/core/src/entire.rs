//! Which `(Λ̃, B)` pairs give geodesics that never leave the affine chart.
//!
//! The closed form stays in the chart for all `t` exactly when
//! `det(cos(Λ̃t) + Bᵀ sin(Λ̃t)) > 0` for every `t`. A sufficient construction
//! uses block-diagonal `B` built from `2 x 2` cells `aI + bJ` (eigenvalues
//! `a ± ib`), each block sharing a single frequency. Those blocks have even
//! size, which is why `n - 1` even (`n` odd) is where they fill out the domain.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_integer::Integer;

use crate::error::{invalid, Error};
use crate::geodesic::{Frequency, SpectralBlock};
use crate::matlin::Mat;

/// Grid points per scanned interval when the caller has no preference.
pub const DEFAULT_GRID_POINTS: usize = 4096;
pub const MIN_GRID_POINTS: usize = 16;
/// Golden-section refinement stops at this bracket width.
pub const REFINE_WIDTH: f64 = 1e-10;
/// Periods scanned when the frequencies have no exact common period.
pub const FALLBACK_PERIODS: f64 = 8.0;

/// One diagonal block: a frequency shared by `2 * cells.len()` directions,
/// and the `2 x 2` cells `[[a, b], [-b, a]]` making up its `B` block.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub lambda: Frequency,
    pub cells: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub n: usize,
    pub m: usize,
    pub blocks: Vec<Block>,
}

/// `true` iff the cell has no real eigenvalue, i.e. `trace² < 4 det`.
pub fn char_poly_positive_2x2(cell: [[f64; 2]; 2]) -> bool {
    let tr = cell[0][0] + cell[1][1];
    let det = cell[0][0] * cell[1][1] - cell[0][1] * cell[1][0];
    tr * tr < 4.0 * det
}

/// Realises a [`BlockSpec`] as `(Λ̃, B)`. Blocks are ordered by frequency so
/// that `Λ` is non-decreasing; `B` is zero outside the leading `s x s` block.
pub fn build_odd_pair(spec: &BlockSpec) -> Result<(SpectralBlock, Mat), Error> {
    let BlockSpec { n, m, blocks } = spec;
    let (n, m) = (*n, *m);
    if n < 2 || m < 1 {
        return Err(invalid(format!(
            "need n >= 2 and m >= 1, got n = {n}, m = {m}"
        )));
    }
    let mut sorted: Vec<&Block> = blocks.iter().collect();
    sorted.sort_by(|a, b| a.lambda.value().total_cmp(&b.lambda.value()));
    if sorted
        .windows(2)
        .any(|w| w[0].lambda.value() == w[1].lambda.value())
    {
        return Err(invalid("block frequencies must be distinct"));
    }
    let size: usize = sorted.iter().map(|b| 2 * b.cells.len()).sum();
    if size > (n - 1).min(m) {
        return Err(invalid(format!(
            "blocks span {size} directions but min(n-1, m) = {}",
            (n - 1).min(m)
        )));
    }

    let mut freqs = Vec::with_capacity(size);
    let mut b = Mat::zeros(n - 1, m);
    let mut at = 0;
    for block in sorted {
        if block.cells.is_empty() {
            return Err(invalid("every block needs at least one cell"));
        }
        for &(a, c) in &block.cells {
            if !char_poly_positive_2x2([[a, c], [-c, a]]) || !a.is_finite() || !c.is_finite() {
                return Err(invalid(format!("cell ({a}, {c}) has a real eigenvalue")));
            }
            b[(at, at)] = a;
            b[(at, at + 1)] = c;
            b[(at + 1, at)] = -c;
            b[(at + 1, at + 1)] = a;
            freqs.push(block.lambda);
            freqs.push(block.lambda);
            at += 2;
        }
    }
    Ok((SpectralBlock::new(n, m, freqs)?, b))
}

/// `det(cos(Λ̃t) + Bᵀ sin(Λ̃t))`, the `m x m` chart determinant.
pub fn positivity_det(spec: &SpectralBlock, b: &Mat, t: f64) -> f64 {
    let a = &spec.cos_block(t, 0) + &(&b.transpose() * &spec.sin_block(t, 0));
    a.det().expect("square by construction")
}

/// Smallest `T > 0` with `λᵢ T ∈ 2πℤ` for all `i`, when every frequency is
/// rational. With `λᵢ = pᵢ/qᵢ` reduced, `T = 2π lcm(qᵢ) / gcd(pᵢ)`.
pub fn common_period(spec: &SpectralBlock) -> Option<f64> {
    let mut num_gcd = 0u64;
    let mut den_lcm = 1u64;
    for f in spec.frequencies() {
        let (p, q) = f.ratio()?;
        num_gcd = num_gcd.gcd(&p);
        den_lcm = den_lcm.checked_mul(q / den_lcm.gcd(&q))?;
    }
    if num_gcd == 0 {
        // r = 0: the determinant is identically one
        return Some(2.0 * PI);
    }
    Some(2.0 * PI * den_lcm as f64 / num_gcd as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanRange {
    Interval(f64, f64),
    /// One exact common period when the frequencies allow it.
    AutoPeriod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    EntireCertifiedOnInterval,
    ViolationFound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub min_det: f64,
    pub argmin_t: f64,
    pub scanned_interval: (f64, f64),
    /// The interval is a full common period, so the verdict holds for all `t`.
    pub periodic: bool,
    pub verdict: Verdict,
}

/// Samples the chart determinant on a uniform grid, polishes every local
/// minimum by golden-section search and reports the smallest value seen.
pub fn positivity_scan(
    spec: &SpectralBlock,
    b: &Mat,
    range: ScanRange,
    grid_points: usize,
) -> Result<PositivityReport, Error> {
    if b.shape() != spec.slope_shape() {
        return Err(invalid(format!(
            "B must be {:?}, got {:?}",
            spec.slope_shape(),
            b.shape()
        )));
    }
    if grid_points < MIN_GRID_POINTS {
        return Err(invalid(format!(
            "need at least {MIN_GRID_POINTS} grid points"
        )));
    }
    let (lo, hi, periodic) = match range {
        ScanRange::Interval(lo, hi) => {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(invalid(format!("bad scan interval [{lo}, {hi}]")));
            }
            (lo, hi, false)
        }
        ScanRange::AutoPeriod => match common_period(spec) {
            Some(p) => (0.0, p, true),
            None => {
                let slowest = spec.lambdas().first().copied().unwrap_or(1.0);
                (0.0, FALLBACK_PERIODS * 2.0 * PI / slowest, false)
            }
        },
    };

    let f = |t: f64| positivity_det(spec, b, t);
    let h = (hi - lo) / grid_points as f64;
    let ts: Vec<f64> = (0..=grid_points).map(|i| lo + h * i as f64).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| f(t)).collect();

    let mut best = (vals[0], ts[0]);
    for (i, (&v, &t)) in vals.iter().zip(&ts).enumerate() {
        if v < best.0 {
            best = (v, t);
        }
        let left = if i > 0 { vals[i - 1] } else { f64::INFINITY };
        let right = vals.get(i + 1).copied().unwrap_or(f64::INFINITY);
        let is_min = v <= left && v <= right && (v < left || v < right);
        if !is_min {
            continue;
        }
        let a = if i > 0 { ts[i - 1] } else { t };
        let c = if i < grid_points { ts[i + 1] } else { t };
        let (tm, vm) = golden_section(&f, a, c);
        if vm < best.0 {
            best = (vm, tm);
        }
    }

    Ok(PositivityReport {
        min_det: best.0,
        argmin_t: best.1,
        scanned_interval: (lo, hi),
        periodic,
        verdict: if best.0 > 0.0 {
            Verdict::EntireCertifiedOnInterval
        } else {
            Verdict::ViolationFound
        },
    })
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > REFINE_WIDTH {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// First time `π / (2 λ_r)` at which the `tan` family leaves the chart, or
/// `None` when `r = 0` and the curve is constant.
pub fn tan_blow_up_time(spec: &SpectralBlock) -> Option<f64> {
    spec.lambdas().last().map(|&l| PI / (2.0 * l))
}
