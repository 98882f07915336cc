//! One function per mode. Each returns the report plus any extra files; the
//! caller decides where they go.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::Path;

use mingraph_core::entire::{positivity_scan, ScanRange};
use mingraph_core::geodesic::{affine_residual, stiefel_residual, TanFamily};
use mingraph_core::graph::{embed, fd_oracle_residual, mss_residual, AnsatzPoint, FD_STEP};
use mingraph_core::lorentz::TanhFamily;
use mingraph_core::ode::{integrate, RunStatus};
use mingraph_core::{
    Ambient, ClosedFormGeodesic, Error, Frequency, Mat, SlopeCurve, SpectralBlock,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{field, AmbientKind, JobConfig, Lambda, Mode, Which, SCHEMA_VERSION};
use crate::error::{exit, io, CliError};
use crate::report::*;

pub const REPORT_FILE: &str = "report.json";
pub const CSV_FILE: &str = "points.csv";
pub const OBJ_FILE: &str = "points.obj";

/// Step used to locate the `tan` blow-up in the worked example.
pub const TAN_EXAMPLE_STEP: f64 = 1e-4;

/// `(file name, contents)`.
pub type Artifact = (String, Vec<u8>);

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub exit: i32,
    /// Written next to the report.
    pub files: Vec<Artifact>,
}

impl Outcome {
    pub fn report_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("reports are plain data");
        s.push('\n');
        s
    }

    /// Writes the report and extra files into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let path = dir.join(REPORT_FILE);
        std::fs::write(&path, self.report_json()).map_err(io(&path))?;
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(io(&path))?;
        }
        Ok(())
    }
}

pub fn run(cfg: &JobConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let mut files = Vec::new();
    let (result, code) = match cfg.mode {
        Mode::Example => (ModeReport::Example(example(cfg)?), exit::OK),
        Mode::Solve => {
            let r = solve(cfg)?;
            let code = if r.chart_breakdowns > 0 {
                exit::CHART_BREAKDOWN
            } else {
                exit::OK
            };
            (ModeReport::Solve(r), code)
        }
        Mode::Verify => {
            let r = verify(cfg)?;
            let code = if r.chart_breakdowns > 0 {
                exit::CHART_BREAKDOWN
            } else {
                exit::OK
            };
            (ModeReport::Verify(r), code)
        }
        Mode::EntireCheck => {
            let r = entire_check(cfg)?;
            let code = if r.verdict == "violation-found" {
                exit::POSITIVITY_VIOLATION
            } else {
                exit::OK
            };
            (ModeReport::EntireCheck(r), code)
        }
        Mode::Integrate => {
            let r = run_integration(cfg)?;
            let code = match r.status {
                Status::Completed => exit::OK,
                Status::BlowUp { .. } => exit::BLOW_UP,
                Status::ChartBreakdown { .. } => exit::CHART_BREAKDOWN,
            };
            (ModeReport::Integrate(r), code)
        }
        Mode::Export => {
            let (r, f) = export(cfg)?;
            files = f;
            (ModeReport::Export(r), exit::OK)
        }
    };
    Ok(Outcome {
        report: Report {
            schema_version: SCHEMA_VERSION,
            config: cfg.clone(),
            result,
        },
        exit: code,
        files,
    })
}

fn pair_summary(spec: &SpectralBlock, b: &Mat) -> Pair {
    Pair {
        n: spec.n(),
        m: spec.m(),
        lambdas: spec.frequencies().iter().map(|&f| Lambda(f)).collect(),
        b: rows(b),
    }
}

/// `k` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![lo];
    }
    (0..k)
        .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
        .collect()
}

/// Seeded points in `[-w, w]^n`, the last coordinate being `t`.
pub fn sample_points(seed: u64, n: usize, w: f64, count: usize) -> Vec<AnsatzPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = (0..n - 1).map(|_| rng.random_range(-w..=w)).collect();
            AnsatzPoint::new(x, rng.random_range(-w..=w))
        })
        .collect()
}

fn scan_range(cfg: &JobConfig) -> ScanRange {
    match cfg.scan {
        Some([a, b]) => ScanRange::Interval(a, b),
        None => ScanRange::AutoPeriod,
    }
}

fn relative_residual(jet: &mingraph_core::CurveJet) -> f64 {
    affine_residual(jet).frobenius_norm() / (1.0 + jet.zdd.frobenius_norm())
}

/// `Λ = ½I`, `B = J` in `n = 3`, `m = 2`: `Z(t) = [[sin t, -cos t], [cos t, sin t]]`.
pub fn rotation_pair() -> (SpectralBlock, Mat) {
    let spec = SpectralBlock::new(3, 2, vec![Frequency::rational(1, 2); 2]).expect("valid");
    (spec, Mat::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]))
}

fn example(cfg: &JobConfig) -> Result<Vec<ExampleReport>, CliError> {
    let mut out = Vec::new();
    if matches!(cfg.which, Which::Rotation | Which::All) {
        out.push(rotation_example(cfg)?);
    }
    if matches!(cfg.which, Which::Tan | Which::All) {
        out.push(tan_example(cfg)?);
    }
    Ok(out)
}

fn rotation_example(cfg: &JobConfig) -> Result<ExampleReport, CliError> {
    let (spec, b) = rotation_pair();
    let g = ClosedFormGeodesic::build(spec.clone(), b.clone())?;

    let mut max_err: f64 = 0.0;
    let mut max_res: f64 = 0.0;
    for t in linspace(cfg.t_range[0], cfg.t_range[1], cfg.t_samples) {
        let jet = g.eval(t)?;
        let (s, c) = t.sin_cos();
        let want = Mat::from_rows(&[[s, -c], [c, s]]);
        max_err = max_err.max((&jet.z - &want).max_abs());
        max_res = max_res.max(relative_residual(&jet));
    }

    let mut max_mss: f64 = 0.0;
    let mut max_gap: f64 = 0.0;
    let mut max_cone: f64 = 0.0;
    for p in sample_points(cfg.seed, 3, cfg.box_half_width, cfg.points) {
        let jet = g.eval(p.t)?;
        let exact = mss_residual(&jet, &p)?;
        let fd = fd_oracle_residual(&g, &p, FD_STEP)?;
        for (a, f) in exact.iter().zip(&fd) {
            max_mss = max_mss.max(a.abs());
            max_gap = max_gap.max((a - f).abs());
        }
        let e = embed(&jet, &p)?;
        let x2 = e[0] * e[0] + e[1] * e[1];
        let y2 = e[3] * e[3] + e[4] * e[4];
        max_cone = max_cone.max((x2 - y2).abs());
    }

    let positivity = positivity_scan(&spec, &b, ScanRange::AutoPeriod, cfg.grid_points)?;
    Ok(ExampleReport::Rotation {
        pair: pair_summary(&spec, &b),
        t_samples: cfg.t_samples,
        max_closed_form_error: max_err,
        max_geodesic_residual: max_res,
        points: cfg.points,
        max_mss_residual: max_mss,
        max_fd_oracle_gap: max_gap,
        max_cone_defect: max_cone,
        positivity: (&positivity).into(),
    })
}

fn tan_example(cfg: &JobConfig) -> Result<ExampleReport, CliError> {
    let spec = SpectralBlock::new(3, 2, vec![Frequency::rational(1, 1)]).expect("valid");
    let b = Mat::zeros(2, 2);
    let fam = TanFamily(spec.clone());
    let mut max_res: f64 = 0.0;
    for t in linspace(-1.5, 1.5, cfg.t_samples) {
        max_res = max_res.max(relative_residual(&fam.jet(t)?));
    }
    let predicted = mingraph_core::entire::tan_blow_up_time(&spec).unwrap_or(FRAC_PI_2);
    let run = integrate(
        &Mat::zeros(2, 2),
        &spec.lambda_tilde(),
        2.0 * predicted,
        TAN_EXAMPLE_STEP,
        Ambient::Euclidean,
    )?;
    let detected = match run.status {
        RunStatus::BlowUp { t } => Some(t),
        _ => None,
    };
    let positivity = positivity_scan(&spec, &b, ScanRange::AutoPeriod, cfg.grid_points)?;
    Ok(ExampleReport::Tan {
        pair: pair_summary(&spec, &b),
        max_geodesic_residual: max_res,
        predicted_blow_up: predicted,
        integrator_step: TAN_EXAMPLE_STEP,
        detected_blow_up: detected,
        positivity: (&positivity).into(),
    })
}

fn solve(cfg: &JobConfig) -> Result<SolveReport, CliError> {
    let (spec, b) = cfg.pair()?;
    let g = ClosedFormGeodesic::build(spec.clone(), b.clone())?;
    let (z0, zd0) = g.initial_data()?;
    let mut breakdowns = 0;
    let mut samples = Vec::with_capacity(cfg.t_samples);
    for t in linspace(cfg.t_range[0], cfg.t_range[1], cfg.t_samples) {
        let z = match g.slope(t) {
            Ok(z) => Some(rows(&z)),
            Err(Error::ChartBreakdown { .. }) => {
                breakdowns += 1;
                None
            }
            Err(e) => return Err(e.into()),
        };
        samples.push(SolveSample { t, z });
    }
    Ok(SolveReport {
        pair: pair_summary(&spec, &b),
        initial_slope: rows(&z0),
        initial_velocity: rows(&zd0),
        samples,
        chart_breakdowns: breakdowns,
    })
}

fn verify(cfg: &JobConfig) -> Result<VerifyReport, CliError> {
    let (spec, b) = cfg.pair()?;
    let g = ClosedFormGeodesic::build(spec.clone(), b.clone())?;
    let mut breakdowns = 0;
    let (mut res, mut orth, mut horiz, mut acc): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for t in linspace(cfg.t_range[0], cfg.t_range[1], cfg.t_samples) {
        let lift = g.stiefel_lift(t);
        let s = stiefel_residual(&lift.frame, &lift.vd, &lift.vdd)?;
        orth = orth.max(s.orthonormality);
        horiz = horiz.max(s.horizontality);
        acc = acc.max(s.acceleration.frobenius_norm());
        match g.eval(t) {
            Ok(jet) => res = res.max(relative_residual(&jet)),
            Err(Error::ChartBreakdown { .. }) => breakdowns += 1,
            Err(e) => return Err(e.into()),
        }
    }

    let (mut mss, mut gap): (f64, f64) = (0.0, 0.0);
    for p in sample_points(cfg.seed, spec.n(), cfg.box_half_width, cfg.points) {
        let jet = match g.eval(p.t) {
            Ok(jet) => jet,
            Err(Error::ChartBreakdown { .. }) => {
                breakdowns += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let exact = mss_residual(&jet, &p)?;
        let fd = fd_oracle_residual(&g, &p, FD_STEP)?;
        for (a, f) in exact.iter().zip(&fd) {
            mss = mss.max(a.abs());
            gap = gap.max((a - f).abs());
        }
    }

    Ok(VerifyReport {
        pair: pair_summary(&spec, &b),
        t_samples: cfg.t_samples,
        max_geodesic_residual: res,
        max_stiefel_orthonormality: orth,
        max_stiefel_horizontality: horiz,
        max_stiefel_acceleration: acc,
        points: cfg.points,
        max_mss_residual: mss,
        max_fd_oracle_gap: gap,
        chart_breakdowns: breakdowns,
    })
}

fn entire_check(cfg: &JobConfig) -> Result<Positivity, CliError> {
    let (spec, b) = cfg.pair()?;
    let r = positivity_scan(&spec, &b, scan_range(cfg), cfg.grid_points)?;
    Ok((&r).into())
}

fn run_integration(cfg: &JobConfig) -> Result<IntegrateReport, CliError> {
    let t_end = cfg.t_range[1];
    if t_end < 0.0 {
        return Err(field(
            "t_range",
            "integration runs forward from 0 to t_range[1] >= 0",
        ));
    }
    let ambient: Ambient = cfg.ambient.into();
    let (spec, b, z0, zd0, reference): (_, _, _, _, Box<dyn SlopeCurve>) = match cfg.ambient {
        AmbientKind::Euclidean => {
            let (spec, b) = cfg.pair()?;
            let g = ClosedFormGeodesic::build(spec.clone(), b.clone())?;
            let (z0, zd0) = g.initial_data()?;
            (spec, b, z0, zd0, Box::new(g))
        }
        AmbientKind::Lorentzian => {
            if !cfg.blocks.is_empty() || cfg.b.as_ref().is_some_and(|v| v.iter().any(|&x| x != 0.0))
            {
                return Err(field("b", "Lorentzian runs start from Z(0) = 0"));
            }
            let spec = cfg.spectral()?;
            let (k, m) = spec.slope_shape();
            let zd0 = spec.lambda_tilde();
            (
                spec.clone(),
                Mat::zeros(k, m),
                Mat::zeros(k, m),
                zd0,
                Box::new(TanhFamily(spec)),
            )
        }
    };
    let run = integrate(&z0, &zd0, t_end, cfg.step, ambient)?;
    let last = run.last();
    let reference_error = match run.status {
        RunStatus::Completed => reference
            .slope(last.t)
            .ok()
            .map(|z| (&last.z - &z).frobenius_norm()),
        _ => None,
    };
    Ok(IntegrateReport {
        pair: pair_summary(&spec, &b),
        ambient: match cfg.ambient {
            AmbientKind::Euclidean => "euclidean",
            AmbientKind::Lorentzian => "lorentzian",
        },
        step: run.step,
        steps: run.samples.len() - 1,
        status: run.status.into(),
        t_final: last.t,
        z_final: rows(&last.z),
        reference_error,
    })
}

/// Column names `x1..x{n-1}, t, y1..ym` of an embedded point.
pub fn coordinate_names(n: usize, m: usize) -> Vec<String> {
    (1..n)
        .map(|i| format!("x{i}"))
        .chain(std::iter::once("t".to_string()))
        .chain((1..=m).map(|a| format!("y{a}")))
        .collect()
}

/// Embedded points over the `(x, t)` grid in row-major order: `x1` slowest,
/// `t` fastest.
pub fn export_grid(cfg: &JobConfig, g: &ClosedFormGeodesic) -> Result<Vec<Vec<f64>>, CliError> {
    let (k, _) = g.shape();
    let xs = linspace(cfg.x_range[0], cfg.x_range[1], cfg.x_samples);
    let jets = linspace(cfg.t_range[0], cfg.t_range[1], cfg.t_samples)
        .into_iter()
        .map(|t| g.eval(t))
        .collect::<Result<Vec<_>, _>>()?;
    let total = cfg
        .x_samples
        .checked_pow(k as u32)
        .ok_or_else(|| field("x_samples", "grid too large"))?;
    let mut out = Vec::with_capacity(total * jets.len());
    let mut idx = vec![0usize; k];
    for _ in 0..total {
        let x: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
        for jet in &jets {
            out.push(embed(jet, &AnsatzPoint::new(x.clone(), jet.t))?);
        }
        for d in (0..k).rev() {
            idx[d] += 1;
            if idx[d] < cfg.x_samples {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(out)
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn export(cfg: &JobConfig) -> Result<(ExportReport, Vec<Artifact>), CliError> {
    let (spec, b) = cfg.pair()?;
    let (n, m) = (spec.n(), spec.m());
    let names = coordinate_names(n, m);
    let projection = match &cfg.projection {
        None => None,
        Some(p) => Some(
            p.iter()
                .map(|c| {
                    names.iter().position(|x| x == c).ok_or_else(|| {
                        field(
                            "projection",
                            format!(
                                "unknown coordinate {c:?}; expected one of {}",
                                names.join(", ")
                            ),
                        )
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };
    if cfg.faces && (projection.is_none() || n != 3) {
        return Err(field("faces", "faces need an OBJ projection and n = 3"));
    }

    let g = ClosedFormGeodesic::build(spec.clone(), b.clone())?;
    let grid = export_grid(cfg, &g)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&names)?;
    for row in &grid {
        w.write_record(row.iter().map(|&v| format_float(v)))?;
    }
    let csv_bytes = w.into_inner().map_err(|e| CliError::Io {
        path: CSV_FILE.into(),
        source: e.into_error(),
    })?;
    let mut files = vec![(CSV_FILE.to_string(), csv_bytes)];

    let mut faces = 0;
    if let Some(proj) = &projection {
        let mut obj = String::new();
        for row in &grid {
            let [a, b, c] = [row[proj[0]], row[proj[1]], row[proj[2]]].map(format_float);
            writeln!(obj, "v {a} {b} {c}").expect("writing to a String");
        }
        if cfg.faces {
            // vertex (i, j, k) sits at (i * X + j) * T + k, 1-based in OBJ
            let (xn, tn) = (cfg.x_samples, cfg.t_samples);
            let id = |i: usize, j: usize, k: usize| (i * xn + j) * tn + k + 1;
            for i in 0..xn {
                for j in 0..xn.saturating_sub(1) {
                    for k in 0..tn.saturating_sub(1) {
                        let q = [
                            id(i, j, k),
                            id(i, j + 1, k),
                            id(i, j + 1, k + 1),
                            id(i, j, k + 1),
                        ];
                        writeln!(obj, "f {} {} {} {}", q[0], q[1], q[2], q[3])
                            .expect("writing to a String");
                        faces += 1;
                    }
                }
            }
        }
        files.push((OBJ_FILE.to_string(), obj.into_bytes()));
    }

    let report = ExportReport {
        pair: pair_summary(&spec, &b),
        vertices: grid.len(),
        csv: CSV_FILE.to_string(),
        obj: projection.map(|_| OBJ_FILE.to_string()),
        faces,
    };
    Ok((report, files))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 1.0, 5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(linspace(2.0, 3.0, 1), vec![2.0]);
    }

    #[test]
    fn names_follow_the_csv_header() {
        assert_eq!(coordinate_names(3, 2), ["x1", "x2", "t", "y1", "y2"]);
    }

    #[test]
    fn points_are_seeded() {
        let a = sample_points(7, 4, 10.0, 5);
        let b = sample_points(7, 4, 10.0, 5);
        let c = sample_points(8, 4, 10.0, 5);
        assert_eq!(
            a.iter().map(|p| p.t).collect::<Vec<_>>(),
            b.iter().map(|p| p.t).collect::<Vec<_>>()
        );
        assert_ne!(a[0].t, c[0].t);
        assert!(a
            .iter()
            .all(|p| p.x.len() == 3 && p.x.iter().all(|x| x.abs() <= 10.0)));
    }

    #[test]
    fn float_text_round_trips() {
        for x in [std::f64::consts::PI, -1e-300, 0.1 + 0.2, 123456.789e10] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }
}
