//! WebAssembly bindings for the browser demo in `www/`.

use okbim::dynamics::{DynamicsConfig, EvolutionState, StopReason};
use okbim::linear::{self, LinearState};
use okbim::scenario::{preset, PRESETS};
use wasm_bindgen::prelude::*;

fn js_err(e: okbim::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Names of the built-in scenarios.
#[wasm_bindgen]
pub fn preset_names() -> Vec<String> {
    PRESETS.iter().map(|s| s.to_string()).collect()
}

/// Linear-theory trajectory of a perturbed circle as flat `[t, R, δ, ...]`.
#[wasm_bindgen]
pub fn linear_trajectory(
    radius: f64,
    delta: f64,
    mode: u32,
    r_inf: f64,
    sigma: f64,
    t_end: f64,
    dt: f64,
) -> Result<Vec<f64>, JsError> {
    let state = LinearState {
        r: radius,
        delta,
        k: mode,
        r_inf,
        sigma,
    };
    let traj = linear::integrate(&state, dt, t_end).map_err(js_err)?;
    Ok(traj.iter().flat_map(|p| [p.t, p.r, p.delta]).collect())
}

/// Growth rate `δ̇/δ` for modes `2..=k_max` at radius `radius`.
#[wasm_bindgen]
pub fn growth_rates(radius: f64, r_inf: f64, sigma: f64, k_max: u32) -> Vec<f64> {
    (2..=k_max)
        .map(|k| {
            linear::growth_rate(&LinearState {
                r: radius,
                delta: 0.0,
                k,
                r_inf,
                sigma,
            })
        })
        .collect()
}

/// A running preset.
#[wasm_bindgen]
pub struct Simulation {
    state: EvolutionState,
    cfg: DynamicsConfig,
    r_inf: f64,
    stop: Option<StopReason>,
}

#[wasm_bindgen]
impl Simulation {
    #[wasm_bindgen(constructor)]
    pub fn new(name: &str, n: usize, dt: f64) -> Result<Simulation, JsError> {
        let mut s = preset(name).map_err(js_err)?;
        s.n = n;
        s.dt = dt;
        let system = s.build_system().map_err(js_err)?;
        let cfg = s.dynamics_config();
        Ok(Simulation {
            state: EvolutionState::new(system, cfg.flux_tol),
            cfg,
            r_inf: s.r_inf,
            stop: None,
        })
    }

    /// Takes up to `count` steps; returns `false` once a stop condition holds.
    pub fn step(&mut self, count: usize) -> bool {
        for _ in 0..count {
            if self.stop.is_some() {
                break;
            }
            if let Some(r) = self.state.stop_check(f64::INFINITY, &self.cfg.stop) {
                self.stop = Some(r);
                break;
            }
            if let Err(e) = self.state.step(&self.cfg) {
                self.stop = Some(StopReason::SolverFailure(e.to_string()));
            }
        }
        self.stop.is_none()
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    pub fn flux(&self) -> f64 {
        self.state.flux()
    }

    pub fn r_inf(&self) -> f64 {
        self.r_inf
    }

    pub fn curve_count(&self) -> usize {
        self.state.system.m()
    }

    /// Marker coordinates of curve `i` as flat `[x, y, ...]`.
    pub fn markers(&self, i: usize) -> Vec<f64> {
        self.state
            .system
            .curves
            .get(i)
            .map(|c| c.markers().iter().flat_map(|p| *p).collect())
            .unwrap_or_default()
    }

    pub fn areas(&self) -> Vec<f64> {
        self.state.system.curves.iter().map(|c| c.enclosed_area()).collect()
    }

    pub fn stop_reason(&self) -> Option<String> {
        self.stop.as_ref().map(|r| r.to_string())
    }
}
