use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mingraph::config::{AmbientKind, BlockConfig, Lambda, Which};
use mingraph::{run, CliError, JobConfig, Mode};

/// Closed-form Grassmannian geodesics and the minimal graphs they sweep out.
#[derive(Parser)]
#[command(name = "mingraph", version)]
struct Cli {
    /// JSON job file; flags given on the command line override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for report.json and exported files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Do not print the report on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// The rotation solution and the tan family, with residual reports.
    Example {
        #[arg(long, value_enum)]
        which: Option<Which>,
        #[command(flatten)]
        job: JobArgs,
    },
    /// Build a closed form and tabulate Z(t).
    Solve(JobArgs),
    /// Geodesic, minimal-surface and Stiefel residuals over a grid.
    Verify(JobArgs),
    /// Certify det(cos(Λ̃t) + Bᵀ sin(Λ̃t)) > 0.
    EntireCheck(JobArgs),
    /// RK4 from closed-form initial data.
    Integrate(JobArgs),
    /// CSV point cloud of the graph, optionally an OBJ projection.
    Export {
        /// Three of x1.., t, y1.. for the OBJ file.
        #[arg(long, value_delimiter = ',')]
        projection: Option<Vec<String>>,
        #[arg(long)]
        faces: bool,
        #[command(flatten)]
        job: JobArgs,
    },
}

#[derive(Args, Default)]
struct JobArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Comma-separated, e.g. `1/2,1/2`.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<Lambda>>,
    /// Row-major entries of B.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    b: Option<Vec<f64>>,
    /// Odd-dimension block as `lambda:a:b[:a:b...]`; repeatable.
    #[arg(long = "block", value_parser = parse_block)]
    blocks: Vec<BlockConfig>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    t_range: Option<Vec<f64>>,
    #[arg(long)]
    t_samples: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x_range: Option<Vec<f64>>,
    #[arg(long)]
    x_samples: Option<usize>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    box_half_width: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, value_enum)]
    ambient: Option<AmbientKind>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// Explicit scan interval instead of one common period.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    scan: Option<Vec<f64>>,
}

fn parse_block(s: &str) -> Result<BlockConfig, String> {
    let mut parts = s.split(':');
    let lambda: Lambda = parts.next().unwrap_or_default().parse()?;
    let nums = parts
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| format!("bad cell entry {p:?}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if nums.is_empty() || nums.len() % 2 != 0 {
        return Err("expected lambda:a:b with one (a, b) pair per cell".into());
    }
    Ok(BlockConfig {
        lambda,
        cells: nums.chunks(2).map(|c| (c[0], c[1])).collect(),
    })
}

fn pair(name: &str, v: Vec<f64>) -> Result<[f64; 2], CliError> {
    <[f64; 2]>::try_from(v)
        .map_err(|v| CliError::Config(format!("--{name} takes two values, got {}", v.len())))
}

impl JobArgs {
    fn apply(self, cfg: &mut JobConfig) -> Result<(), CliError> {
        let JobArgs {
            n,
            m,
            lambdas,
            b,
            blocks,
            t_range,
            t_samples,
            x_range,
            x_samples,
            points,
            box_half_width,
            step,
            ambient,
            grid_points,
            scan,
        } = self;
        cfg.n = n.or(cfg.n);
        cfg.m = m.or(cfg.m);
        if let Some(l) = lambdas {
            cfg.lambdas = l;
        }
        if b.is_some() {
            cfg.b = b;
        }
        if !blocks.is_empty() {
            cfg.blocks = blocks;
        }
        if let Some(r) = t_range {
            cfg.t_range = pair("t-range", r)?;
        }
        if let Some(r) = x_range {
            cfg.x_range = pair("x-range", r)?;
        }
        if let Some(r) = scan {
            cfg.scan = Some(pair("scan", r)?);
        }
        cfg.t_samples = t_samples.unwrap_or(cfg.t_samples);
        cfg.x_samples = x_samples.unwrap_or(cfg.x_samples);
        cfg.points = points.unwrap_or(cfg.points);
        cfg.box_half_width = box_half_width.unwrap_or(cfg.box_half_width);
        cfg.step = step.unwrap_or(cfg.step);
        cfg.ambient = ambient.unwrap_or(cfg.ambient);
        cfg.grid_points = grid_points.unwrap_or(cfg.grid_points);
        Ok(())
    }
}

fn build_config(cli: Cli) -> Result<(JobConfig, bool), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => Some(JobConfig::load(path)?),
        None => None,
    };
    let mode_of = |c: &Command| match c {
        Command::Example { .. } => Mode::Example,
        Command::Solve(_) => Mode::Solve,
        Command::Verify(_) => Mode::Verify,
        Command::EntireCheck(_) => Mode::EntireCheck,
        Command::Integrate(_) => Mode::Integrate,
        Command::Export { .. } => Mode::Export,
    };
    let mut job = match (&mut cfg, cli.command) {
        (None, None) => {
            return Err(CliError::Config(
                "give a subcommand or --config <path>".into(),
            ))
        }
        (Some(cfg), None) => cfg.clone(),
        (cfg, Some(cmd)) => {
            let mode = mode_of(&cmd);
            let mut job = cfg.take().unwrap_or_else(|| JobConfig::new(mode));
            job.mode = mode;
            match cmd {
                Command::Example { which, job: args } => {
                    job.which = which.unwrap_or(job.which);
                    args.apply(&mut job)?;
                }
                Command::Export {
                    projection,
                    faces,
                    job: args,
                } => {
                    if let Some(p) = projection {
                        let n = p.len();
                        let p = <[String; 3]>::try_from(p).map_err(|_| {
                            CliError::Config(format!(
                                "--projection takes three coordinates, got {n}"
                            ))
                        })?;
                        job.projection = Some(p);
                    }
                    job.faces |= faces;
                    args.apply(&mut job)?;
                }
                Command::Solve(a)
                | Command::Verify(a)
                | Command::EntireCheck(a)
                | Command::Integrate(a) => a.apply(&mut job)?,
            }
            job
        }
    };
    job.seed = cli.seed.unwrap_or(job.seed);
    if cli.out.is_some() {
        job.out = cli.out;
    }
    Ok((job, cli.quiet))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match build_config(cli).and_then(|(job, quiet)| {
        if job.mode == Mode::Export && job.out.is_none() {
            return Err(CliError::Config("export needs --out <dir>".into()));
        }
        let outcome = run(&job)?;
        if let Some(dir) = &job.out {
            outcome.write_to(dir)?;
        }
        if !quiet {
            print!("{}", outcome.report_json());
        }
        Ok(outcome.exit)
    }) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mingraph: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code.clamp(0, 255) as u8)
}
