//! `critmetric`: command-line front end.
//!
//! Exit codes: 0 pass or feasible, 1 checked and failed, 2 usage or
//! numerical error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
}

impl Failure {
    pub fn usage(e: critmetric::Error) -> Self {
        Failure::Usage(e.to_string())
    }

    pub fn numerical(e: critmetric::Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

impl From<critmetric::Error> for Failure {
    fn from(e: critmetric::Error) -> Self {
        use critmetric::Error as E;
        match e {
            E::UnknownMetric(_)
            | E::InvalidParameter(_)
            | E::UnsupportedDimension { .. }
            | E::DimensionMismatch { .. }
            | E::Hypothesis(_)
            | E::OutsideChart(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

/// Result of a run that completed its check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Parser)]
#[command(name = "critmetric", version, about = "Quadratic curvature functionals on chart metrics")]
struct Cli {
    /// TOML run configuration; keys present there override flags.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file (default: $CRITMETRIC_OUT_DIR/<command>.<ext>, else stdout).
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct MetricArgs {
    /// Catalog id (see `critmetric catalog`).
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    side: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    /// Circle radius of the circle factor.
    #[arg(long = "L")]
    circle_radius: Option<f64>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Nodes per periodic coordinate.
    #[arg(long)]
    periodic: Option<usize>,
    /// Nodes per polar coordinate.
    #[arg(long)]
    polar: Option<usize>,
}

impl MetricArgs {
    fn fill(self, c: &mut RunConfig) {
        c.metric = self.metric;
        c.n = self.n;
        c.side = self.side;
        c.r = self.r;
        c.circle_radius = self.circle_radius;
        c.p = self.p;
        c.q = self.q;
        c.a = self.a;
        c.b = self.b;
        c.periodic = self.periodic;
        c.polar = self.polar;
    }
}

#[derive(Args)]
struct TsArgs {
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog entries, or build one and check its volume.
    Catalog {
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Curvature fields and structural residuals at every node.
    Curvature {
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Algebraic identities and inequalities on random or engine frames.
    Identities {
        #[command(flatten)]
        metric: MetricArgs,
        /// Use random symmetry-consistent tensors instead of a metric.
        #[arg(long)]
        synthetic: bool,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Value of the functional, its scaling law and rigidity integrands.
    Functional {
        #[command(flatten)]
        metric: MetricArgs,
        #[command(flatten)]
        ts: TsArgs,
        /// Rescale to unit volume first.
        #[arg(long)]
        normalize: bool,
        /// Integrand id (1For-th-1, 1For-th-2, 3For-th-1, 3lem-Form-2); repeatable.
        #[arg(long)]
        integrand: Vec<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Euler-Lagrange residuals of the unit-volume rescaled metric.
    CriticalCheck {
        #[command(flatten)]
        metric: MetricArgs,
        #[command(flatten)]
        ts: TsArgs,
        /// Judge the residuals divided by sup |Rm|².
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Feasibility of a (t, s) inequality system over a grid (CSV).
    RegionScan {
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        t: Option<Vec<f64>>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        s: Option<Vec<f64>>,
        /// Points per axis.
        #[arg(long)]
        res: Option<usize>,
        #[arg(long)]
        t_res: Option<usize>,
        #[arg(long)]
        s_res: Option<usize>,
    },
    /// Pointwise pinching condition at every node.
    PinchCheck {
        #[command(flatten)]
        metric: MetricArgs,
        #[command(flatten)]
        ts: TsArgs,
    },
    /// Volume-normalised gradient descent over an ansatz family.
    Flow {
        /// warped_circle_sphere or conformal_torus.
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        ts: TsArgs,
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Gradient-norm stopping tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Half-width of the seeded uniform start; 0 starts at the base metric.
        #[arg(long)]
        init_scale: Option<f64>,
        /// Starting parameters (overrides the random start).
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        theta0: Option<Vec<f64>>,
        /// Tolerance for the final Euler-Lagrange residuals.
        #[arg(long)]
        el_tol: Option<f64>,
        #[arg(long)]
        periodic: Option<usize>,
        #[arg(long)]
        polar: Option<usize>,
    },
}

fn pair(v: Option<Vec<f64>>) -> Option<[f64; 2]> {
    v.map(|v| [v[0], v[1]])
}

fn into_config(cmd: Command) -> RunConfig {
    let mut c = RunConfig::default();
    let name = match cmd {
        Command::Catalog { metric, tol } => {
            metric.fill(&mut c);
            c.tol = tol;
            "catalog"
        }
        Command::Curvature { metric, tol } => {
            metric.fill(&mut c);
            c.tol = tol;
            "curvature"
        }
        Command::Identities {
            metric,
            synthetic,
            samples,
            seed,
            tol,
        } => {
            metric.fill(&mut c);
            c.synthetic = synthetic.then_some(true);
            c.samples = samples;
            c.seed = seed;
            c.tol = tol;
            "identities"
        }
        Command::Functional {
            metric,
            ts,
            normalize,
            integrand,
            tol,
        } => {
            metric.fill(&mut c);
            (c.t, c.s) = (ts.t, ts.s);
            c.normalize = normalize.then_some(true);
            c.integrand = (!integrand.is_empty()).then_some(integrand);
            c.tol = tol;
            "functional"
        }
        Command::CriticalCheck {
            metric,
            ts,
            normalize,
            tol,
        } => {
            metric.fill(&mut c);
            (c.t, c.s) = (ts.t, ts.s);
            c.normalize = normalize.then_some(true);
            c.tol = tol;
            "critical-check"
        }
        Command::RegionScan {
            system,
            n,
            t,
            s,
            res,
            t_res,
            s_res,
        } => {
            c.system = system;
            c.n = n;
            c.t_range = pair(t);
            c.s_range = pair(s);
            c.res = res;
            c.t_res = t_res;
            c.s_res = s_res;
            "region-scan"
        }
        Command::PinchCheck { metric, ts } => {
            metric.fill(&mut c);
            (c.t, c.s) = (ts.t, ts.s);
            "pinch-check"
        }
        Command::Flow {
            family,
            n,
            ts,
            modes,
            steps,
            lr,
            seed,
            tol,
            init_scale,
            theta0,
            el_tol,
            periodic,
            polar,
        } => {
            c.family = family;
            c.n = n;
            (c.t, c.s) = (ts.t, ts.s);
            c.modes = modes;
            c.steps = steps;
            c.lr = lr;
            c.seed = seed;
            c.tol = tol;
            c.init_scale = init_scale;
            c.theta0 = theta0;
            c.el_tol = el_tol;
            c.periodic = periodic;
            c.polar = polar;
            "flow"
        }
    };
    c.command = Some(name.to_string());
    c
}

fn run(argv: Vec<String>) -> Result<Verdict, Failure> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(Verdict::Pass);
            }
            // clap's rendering already includes the usage line
            return Err(Failure::Usage(e.render().to_string()));
        }
    };
    let mut cfg = into_config(cli.command);
    cfg.output = cli.output;
    if let Some(path) = &cli.config {
        cfg.overlay(RunConfig::load(path)?)?;
    }
    commands::dispatch(cfg)
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("{}", msg.trim_end());
            if !msg.contains("Usage:") {
                eprintln!("\nUsage: critmetric <COMMAND> [OPTIONS]  (see `critmetric --help`)");
            }
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical error: {msg}");
            ExitCode::from(2)
        }
    }
}
