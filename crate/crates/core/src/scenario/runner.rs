use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::Scenario;
use crate::bie::FieldSolution;
use crate::dynamics::{EvolutionState, StopReason};
use crate::error::Result;
use crate::geometry::InterfaceSystem;

/// One row of `series.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeriesRecord {
    pub step: usize,
    pub t: f64,
    pub j: f64,
    pub w_inf: f64,
    pub max_abs_v: f64,
    pub s_alpha: Vec<f64>,
    pub area: Vec<f64>,
}

impl TimeSeriesRecord {
    fn new(state: &EvolutionState, sol: &FieldSolution) -> Self {
        let sys = &state.system;
        Self {
            step: state.steps,
            t: state.t,
            j: state.flux(),
            w_inf: sol.w_inf,
            max_abs_v: sol.max_abs_v(),
            s_alpha: sys.curves.iter().map(|c| c.s_alpha()).collect(),
            area: sys.curves.iter().map(|c| c.enclosed_area()).collect(),
        }
    }

    fn csv_header(m: usize) -> String {
        let mut h = String::from("t,J,w_inf,max_abs_V");
        for i in 1..=m {
            h.push_str(&format!(",s_alpha_{i}"));
        }
        for i in 1..=m {
            h.push_str(&format!(",area_{i}"));
        }
        h
    }

    fn csv_row(&self) -> String {
        let mut r = format!("{:.17e},{:.17e},{:.17e},{:.17e}", self.t, self.j, self.w_inf, self.max_abs_v);
        for v in self.s_alpha.iter().chain(&self.area) {
            r.push_str(&format!(",{v:.17e}"));
        }
        r
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GmresStats {
    pub solves: usize,
    pub total_iterations: usize,
    pub max_iterations: usize,
    pub max_residual: f64,
}

impl GmresStats {
    fn add(&mut self, sol: &FieldSolution) {
        self.solves += 1;
        self.total_iterations += sol.iterations;
        self.max_iterations = self.max_iterations.max(sol.iterations);
        self.max_residual = self.max_residual.max(sol.residual);
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.solves == 0 {
            0.0
        } else {
            self.total_iterations as f64 / self.solves as f64
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the scenario's output directory.
    pub out_dir: Option<PathBuf>,
    /// Keep records in memory.
    pub keep_records: bool,
    /// Print a progress line at every output step.
    pub verbose: bool,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub stop: StopReason,
    pub t_c: Option<f64>,
    pub steps: usize,
    pub t_final: f64,
    pub wall_seconds: f64,
    pub gmres: GmresStats,
    pub near_singular_steps: usize,
    pub records: Vec<TimeSeriesRecord>,
    pub rows_written: usize,
    pub final_state: EvolutionState,
}

struct Outputs {
    dir: PathBuf,
    series: BufWriter<File>,
    snapshots: usize,
}

impl Outputs {
    fn create(dir: &Path, m: usize) -> Result<Self> {
        fs::create_dir_all(dir.join("snapshots"))?;
        let mut series = BufWriter::new(File::create(dir.join("series.csv"))?);
        writeln!(series, "{}", TimeSeriesRecord::csv_header(m))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            series,
            snapshots: 0,
        })
    }

    fn record(&mut self, rec: &TimeSeriesRecord, sys: &InterfaceSystem) -> Result<()> {
        writeln!(self.series, "{}", rec.csv_row())?;
        self.series.flush()?;
        self.snapshot(rec.t, sys)
    }

    fn snapshot(&mut self, t: f64, sys: &InterfaceSystem) -> Result<()> {
        let path = self.dir.join("snapshots").join(format!("t_{:05}.txt", self.snapshots));
        write_snapshot(File::create(path)?, t, sys)?;
        self.snapshots += 1;
        Ok(())
    }
}

/// Header `t=<t> M=<m>`, then one blank-line separated block of `x y` rows
/// per curve.
pub fn write_snapshot(w: impl Write, t: f64, sys: &InterfaceSystem) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "t={t} M={}", sys.m())?;
    for c in &sys.curves {
        writeln!(w)?;
        for p in c.markers() {
            writeln!(w, "{:.17e} {:.17e}", p[0], p[1])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Runs the scenario: solve, record, stop check, step.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let system = scenario.build_system()?;
    let cfg = scenario.dynamics_config();
    let m = system.m();
    let mut state = EvolutionState::new(system, cfg.flux_tol);
    let dir = opts.out_dir.clone().or_else(|| scenario.out_dir.clone());
    let mut out = match &dir {
        Some(d) => Some(Outputs::create(d, m)?),
        None => None,
    };
    let mut gmres = GmresStats::default();
    let mut records = Vec::new();
    let mut rows = 0;
    let mut near_steps = 0;
    let mut last_recorded = None;

    let stop = loop {
        let sol = match state.solve(&cfg) {
            Ok(s) if s.v.iter().all(|v| v.is_finite()) && s.w_inf.is_finite() => s,
            Ok(_) => break StopReason::SolverFailure("non-finite velocity".into()),
            Err(e) => break StopReason::SolverFailure(e.to_string()),
        };
        gmres.add(&sol);
        if sol.near_singular {
            near_steps += 1;
        }
        if state.steps % scenario.output_every == 0 {
            let rec = TimeSeriesRecord::new(&state, &sol);
            if let Some(o) = out.as_mut() {
                o.record(&rec, &state.system)?;
            }
            if opts.verbose {
                eprintln!(
                    "t = {:.4}  J = {:+.4e}  w_inf = {:+.6e}  max|V| = {:.3e}  gmres {}",
                    rec.t, rec.j, rec.w_inf, rec.max_abs_v, sol.iterations
                );
            }
            rows += 1;
            last_recorded = Some(state.steps);
            if opts.keep_records {
                records.push(rec);
            }
        }
        if let Some(reason) = state.stop_check(scenario.t_end, &cfg.stop) {
            break reason;
        }
        if let Err(e) = state.advance(&sol, &cfg) {
            break StopReason::SolverFailure(e.to_string());
        }
    };

    if let Some(o) = out.as_mut() {
        if !matches!(stop, StopReason::Time) && last_recorded != Some(state.steps) {
            o.snapshot(state.t, &state.system)?;
        }
    }
    let report = RunReport {
        stop,
        t_c: state.t_c,
        steps: state.steps,
        t_final: state.t,
        wall_seconds: start.elapsed().as_secs_f64(),
        gmres,
        near_singular_steps: near_steps,
        records,
        rows_written: rows,
        final_state: state,
    };
    if let Some(d) = &dir {
        write_report(File::create(d.join("report.txt"))?, scenario, &report)?;
    }
    Ok(report)
}

fn write_report(w: impl Write, scenario: &Scenario, r: &RunReport) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "scenario: {}", if scenario.name.is_empty() { "custom" } else { &scenario.name })?;
    writeln!(w, "stop_reason: {}", r.stop.label())?;
    writeln!(w, "stop_detail: {}", r.stop)?;
    match r.t_c {
        Some(t) => writeln!(w, "t_c: {t}")?,
        None => writeln!(w, "t_c: none")?,
    }
    writeln!(w, "t_final: {}", r.t_final)?;
    writeln!(w, "steps: {}", r.steps)?;
    writeln!(w, "n: {}", scenario.n)?;
    writeln!(w, "dt: {}", scenario.dt)?;
    writeln!(w, "wall_time_s: {:.3}", r.wall_seconds)?;
    writeln!(w, "gmres_solves: {}", r.gmres.solves)?;
    writeln!(w, "gmres_mean_iterations: {:.2}", r.gmres.mean_iterations())?;
    writeln!(w, "gmres_max_iterations: {}", r.gmres.max_iterations)?;
    writeln!(w, "gmres_max_residual: {:.3e}", r.gmres.max_residual)?;
    writeln!(w, "near_singular_steps: {}", r.near_singular_steps)?;
    w.flush()?;
    Ok(())
}
