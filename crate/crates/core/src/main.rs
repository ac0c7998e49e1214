use std::fs::{self, File};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use okbim::dynamics::StopReason;
use okbim::linear::compute_sigma;
use okbim::scenario::{
    self, convergence_space, convergence_time, linear_compare, full_scale, RunOptions, Scenario,
};

#[derive(Parser)]
#[command(name = "okbim", version, about = "Boundary integral simulation of sharp-interface diblock copolymer domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// Preset name or path to a TOML scenario file.
    #[arg(long)]
    scenario: String,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    gmres_tol: Option<f64>,
    /// Krasny cutoff for Fourier coefficients.
    #[arg(long)]
    filter_tol: Option<f64>,
    /// Use N = 512, dt = 5e-4, t_end = 25 (long-running).
    #[arg(long)]
    full_scale: bool,
}

impl ScenarioArgs {
    fn load(&self) -> okbim::Result<Scenario> {
        let mut s = Scenario::load(&self.scenario)?;
        if self.full_scale {
            s = full_scale(s);
        }
        if let Some(n) = self.n {
            s.n = n;
        }
        if let Some(dt) = self.dt {
            s.dt = dt;
        }
        if let Some(t) = self.t_end {
            s.t_end = t;
        }
        if let Some(tol) = self.gmres_tol {
            s.gmres_tol = tol;
        }
        if let Some(tol) = self.filter_tol {
            s.filter_tol = tol;
        }
        if let Some(out) = &self.out {
            s.out_dir = Some(out.clone());
        }
        s.validate()?;
        Ok(s)
    }

    fn out_dir(&self, s: &Scenario, default: &str) -> PathBuf {
        s.out_dir.clone().unwrap_or_else(|| PathBuf::from(default))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write series.csv, snapshots/ and report.txt.
    Run {
        #[command(flatten)]
        args: ScenarioArgs,
        #[arg(long, short)]
        quiet: bool,
    },
    /// Marker deviation of each N against the largest N.
    ConvergenceSpace {
        #[command(flatten)]
        args: ScenarioArgs,
        /// Comma-separated grid sizes.
        #[arg(long, value_delimiter = ',', default_value = "64,128,256,512")]
        ns: Vec<usize>,
    },
    /// Marker deviation of each time step against the smallest.
    ConvergenceTime {
        #[command(flatten)]
        args: ScenarioArgs,
        /// Comma-separated time steps.
        #[arg(long, value_delimiter = ',', default_value = "5e-3,2.5e-3,1.25e-3,6.25e-4")]
        dts: Vec<f64>,
    },
    /// Nonlinear perturbed circle against the linear oracle.
    LinearCompare {
        #[command(flatten)]
        args: ScenarioArgs,
        #[arg(long, default_value_t = 1e-4)]
        oracle_dt: f64,
    },
    /// Print the surface tension of the quartic double well.
    Sigma,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> okbim::Result<ExitCode> {
    match cli.command {
        Command::Sigma => {
            println!("{:.16}", compute_sigma());
        }
        Command::Run { args, quiet } => {
            let s = args.load()?;
            let dir = args.out_dir(&s, &format!("runs/{}", display_name(&s)));
            let report = scenario::run(
                &s,
                &RunOptions {
                    out_dir: Some(dir.clone()),
                    keep_records: false,
                    verbose: !quiet,
                },
            )?;
            println!("stop: {}", report.stop);
            println!("t_final: {}", report.t_final);
            if let Some(t) = report.t_c {
                println!("t_c: {t}");
            }
            println!("output: {}", dir.display());
            if let StopReason::SolverFailure(_) = report.stop {
                return Ok(ExitCode::from(2));
            }
        }
        Command::ConvergenceSpace { args, ns } => {
            let s = args.load()?;
            let rows = convergence_space(&s, &ns, s.dt, s.t_end)?;
            let dir = args.out_dir(&s, "runs/convergence");
            fs::create_dir_all(&dir)?;
            scenario::write_convergence_csv(File::create(dir.join("convergence_space.csv"))?, "n", &rows)?;
            scenario::write_convergence_csv(std::io::stdout().lock(), "n", &rows)?;
        }
        Command::ConvergenceTime { args, dts } => {
            let s = args.load()?;
            let rows = convergence_time(&s, &dts, s.n, s.t_end)?;
            let dir = args.out_dir(&s, "runs/convergence");
            fs::create_dir_all(&dir)?;
            scenario::write_convergence_csv(File::create(dir.join("convergence_time.csv"))?, "dt", &rows)?;
            scenario::write_convergence_csv(std::io::stdout().lock(), "dt", &rows)?;
        }
        Command::LinearCompare { args, oracle_dt } => {
            let s = args.load()?;
            let rows = linear_compare(&s, s.t_end, oracle_dt)?;
            let dir = args.out_dir(&s, "runs/linear_compare");
            fs::create_dir_all(&dir)?;
            scenario::write_linear_compare_csv(File::create(dir.join("linear_compare.csv"))?, &rows)?;
            scenario::write_linear_compare_csv(std::io::stdout().lock(), &rows)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn display_name(s: &Scenario) -> &str {
    if s.name.is_empty() {
        "custom"
    } else {
        &s.name
    }
}
