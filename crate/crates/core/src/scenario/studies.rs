use std::f64::consts::PI;
use std::io::Write;

use super::{run, Domain, RunOptions, Scenario};
use crate::dynamics::{EvolutionState, StopReason};
use crate::error::{Error, Result};
use crate::geometry::{dist, InterfaceCurve, InterfaceSystem, Point};
use crate::linear::{self, LinearState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    /// `N` for spatial studies, `Δt` for temporal ones.
    pub parameter: f64,
    pub max_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearCompareRow {
    pub t: f64,
    pub r_num: f64,
    pub r_lin: f64,
    pub delta_num: f64,
    pub delta_lin: f64,
}

fn final_system(scenario: &Scenario) -> Result<InterfaceSystem> {
    let mut s = scenario.clone();
    s.out_dir = None;
    s.output_every = usize::MAX;
    let r = run(&s, &RunOptions::default())?;
    if r.stop != StopReason::Time {
        return Err(Error::Validation(format!("run stopped early at t = {}: {}", r.t_final, r.stop)));
    }
    Ok(r.final_state.system)
}

/// Largest marker distance between two systems, matching every node of the
/// coarse one with the node at the same `α` on the fine one.
pub fn marker_deviation(coarse: &InterfaceSystem, fine: &InterfaceSystem) -> f64 {
    coarse
        .curves
        .iter()
        .zip(&fine.curves)
        .map(|(c, f)| {
            let stride = f.n() / c.n();
            let (pc, pf) = (c.markers(), f.markers());
            pc.iter()
                .enumerate()
                .map(|(j, p)| dist(*p, pf[j * stride]))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Deviation of each `N` from the largest one at `t_end`.
pub fn convergence_space(scenario: &Scenario, ns: &[usize], dt: f64, t_end: f64) -> Result<Vec<ConvergenceRow>> {
    let finest = *ns.iter().max().ok_or_else(|| Error::Config("empty N list".into()))?;
    if ns.iter().any(|n| finest % n != 0) {
        return Err(Error::Config("every N must divide the largest".into()));
    }
    let with = |n: usize| Scenario {
        n,
        dt,
        t_end,
        ..scenario.clone()
    };
    let reference = final_system(&with(finest))?;
    ns.iter()
        .filter(|n| **n != finest)
        .map(|&n| {
            Ok(ConvergenceRow {
                parameter: n as f64,
                max_error: marker_deviation(&final_system(&with(n))?, &reference),
            })
        })
        .collect()
}

/// Deviation of each `Δt` from the smallest one at `t_end`.
pub fn convergence_time(scenario: &Scenario, dts: &[f64], n: usize, t_end: f64) -> Result<Vec<ConvergenceRow>> {
    let finest = dts.iter().copied().fold(f64::INFINITY, f64::min);
    if !finest.is_finite() {
        return Err(Error::Config("empty dt list".into()));
    }
    let with = |dt: f64| Scenario {
        n,
        dt,
        t_end,
        ..scenario.clone()
    };
    let reference = final_system(&with(finest))?;
    dts.iter()
        .filter(|dt| **dt != finest)
        .map(|&dt| {
            Ok(ConvergenceRow {
                parameter: dt,
                max_error: marker_deviation(&final_system(&with(dt))?, &reference),
            })
        })
        .collect()
}

/// Mean radius and mode-`k` amplitude of `r(φ)` about `center`:
/// `R = (1/2π)∮ r dφ`, `δ = (1/π)∮ r cos kφ dφ`.
pub fn mode_amplitudes(curve: &InterfaceCurve, center: Point, k: u32) -> (f64, f64) {
    let n = curve.n();
    let h = 2.0 * PI / n as f64;
    let sa = curve.s_alpha();
    let (mut r0, mut rk) = (0.0, 0.0);
    for (p, th) in curve.markers().iter().zip(curve.theta()) {
        let (x, y) = (p[0] - center[0], p[1] - center[1]);
        let r2 = x * x + y * y;
        let (xa, ya) = (sa * th.cos(), sa * th.sin());
        let phi_a = (x * ya - y * xa) / r2;
        let phi = y.atan2(x);
        let r = r2.sqrt();
        r0 += r * phi_a;
        rk += r * (f64::from(k) * phi).cos() * phi_a;
    }
    (r0 * h / (2.0 * PI), rk * h / PI)
}

/// Nonlinear run of a single perturbed circle against the linear oracle.
pub fn linear_compare(scenario: &Scenario, t_end: f64, oracle_dt: f64) -> Result<Vec<LinearCompareRow>> {
    let [Domain::PerturbedCircle {
        center,
        radius,
        delta,
        mode,
    }] = scenario.domains[..]
    else {
        return Err(Error::Config("linear comparison needs exactly one perturbed_circle domain".into()));
    };
    let oracle = linear::integrate(
        &LinearState {
            r: radius,
            delta,
            k: mode,
            r_inf: scenario.r_inf,
            sigma: scenario.sigma_value(),
        },
        oracle_dt,
        t_end,
    )?;
    let cfg = scenario.dynamics_config();
    let mut state = EvolutionState::new(scenario.build_system()?, cfg.flux_tol);
    let mut rows = Vec::new();
    loop {
        if state.steps % scenario.output_every == 0 {
            let (r_num, delta_num) = mode_amplitudes(&state.system.curves[0], center, mode);
            let lin = linear::sample(&oracle, state.t);
            rows.push(LinearCompareRow {
                t: state.t,
                r_num,
                r_lin: lin.r,
                delta_num,
                delta_lin: lin.delta,
            });
        }
        match state.stop_check(t_end, &cfg.stop) {
            None => {}
            Some(StopReason::Time) => break,
            Some(other) => return Err(Error::Validation(format!("run stopped early at t = {}: {other}", state.t))),
        }
        state.step(&cfg)?;
    }
    Ok(rows)
}

pub fn write_convergence_csv(mut w: impl Write, label: &str, rows: &[ConvergenceRow]) -> Result<()> {
    writeln!(w, "{label},max_error")?;
    for r in rows {
        writeln!(w, "{},{:.6e}", r.parameter, r.max_error)?;
    }
    Ok(())
}

pub fn write_linear_compare_csv(mut w: impl Write, rows: &[LinearCompareRow]) -> Result<()> {
    writeln!(w, "t,R_num,R_lin,delta_num,delta_lin")?;
    for r in rows {
        writeln!(
            w,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            r.t, r.r_num, r.r_lin, r.delta_num, r.delta_lin
        )?;
    }
    Ok(())
}
