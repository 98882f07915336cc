//! JSON report shapes. Field order is fixed by declaration order and no
//! maps are used, so equal inputs serialize to equal bytes.

use mingraph_core::entire::{PositivityReport, Verdict};
use mingraph_core::ode::RunStatus;
use mingraph_core::Mat;
use serde::Serialize;

use crate::config::{JobConfig, Lambda};

pub type Rows = Vec<Vec<f64>>;

pub fn rows(m: &Mat) -> Rows {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: JobConfig,
    pub result: ModeReport,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeReport {
    Example(Vec<ExampleReport>),
    Solve(SolveReport),
    Verify(VerifyReport),
    EntireCheck(Positivity),
    Integrate(IntegrateReport),
    Export(ExportReport),
}

#[derive(Debug, Clone, Serialize)]
pub struct Pair {
    pub n: usize,
    pub m: usize,
    pub lambdas: Vec<Lambda>,
    pub b: Rows,
}

#[derive(Debug, Serialize)]
pub struct Positivity {
    pub min_det: f64,
    pub argmin_t: f64,
    pub scanned_interval: (f64, f64),
    pub periodic: bool,
    pub verdict: &'static str,
}

impl From<&PositivityReport> for Positivity {
    fn from(r: &PositivityReport) -> Self {
        Positivity {
            min_det: r.min_det,
            argmin_t: r.argmin_t,
            scanned_interval: r.scanned_interval,
            periodic: r.periodic,
            verdict: match r.verdict {
                Verdict::EntireCertifiedOnInterval if r.periodic => "entire-certified",
                Verdict::EntireCertifiedOnInterval => "positive-on-interval",
                Verdict::ViolationFound => "violation-found",
            },
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "which", rename_all = "kebab-case")]
pub enum ExampleReport {
    Rotation {
        pair: Pair,
        t_samples: usize,
        /// Against `[[sin t, -cos t], [cos t, sin t]]`.
        max_closed_form_error: f64,
        max_geodesic_residual: f64,
        points: usize,
        max_mss_residual: f64,
        max_fd_oracle_gap: f64,
        /// `| |x|² - |y|² |`: each slice lies in the cone over the Clifford torus.
        max_cone_defect: f64,
        positivity: Positivity,
    },
    Tan {
        pair: Pair,
        max_geodesic_residual: f64,
        predicted_blow_up: f64,
        integrator_step: f64,
        detected_blow_up: Option<f64>,
        positivity: Positivity,
    },
}

#[derive(Debug, Serialize)]
pub struct SolveSample {
    pub t: f64,
    /// `None` where the curve is outside the affine chart.
    pub z: Option<Rows>,
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub pair: Pair,
    pub initial_slope: Rows,
    pub initial_velocity: Rows,
    pub samples: Vec<SolveSample>,
    pub chart_breakdowns: usize,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub pair: Pair,
    pub t_samples: usize,
    /// `‖R‖_F / (1 + ‖Z̈‖_F)`.
    pub max_geodesic_residual: f64,
    pub max_stiefel_orthonormality: f64,
    pub max_stiefel_horizontality: f64,
    pub max_stiefel_acceleration: f64,
    pub points: usize,
    pub max_mss_residual: f64,
    pub max_fd_oracle_gap: f64,
    pub chart_breakdowns: usize,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Completed,
    BlowUp { t: f64 },
    ChartBreakdown { t: f64 },
}

impl From<RunStatus> for Status {
    fn from(s: RunStatus) -> Self {
        match s {
            RunStatus::Completed => Status::Completed,
            RunStatus::BlowUp { t } => Status::BlowUp { t },
            RunStatus::ChartBreakdown { t } => Status::ChartBreakdown { t },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct IntegrateReport {
    pub pair: Pair,
    pub ambient: &'static str,
    pub step: f64,
    pub steps: usize,
    pub status: Status,
    pub t_final: f64,
    pub z_final: Rows,
    /// Frobenius distance to the closed form at `t_final`, when one exists.
    pub reference_error: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ExportReport {
    pub pair: Pair,
    pub vertices: usize,
    pub csv: String,
    pub obj: Option<String>,
    pub faces: usize,
}
