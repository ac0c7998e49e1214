//! Time stepping of the interface system.
//!
//! Each curve evolves through its length `L` and tangent angle
//! `θ = α + q(α)`. The normal velocity comes from the boundary integral
//! solve; a tangential velocity keeps the markers equally spaced in
//! arclength. The stiff curvature term `-σ|k|³/s_α³ q̂_k` is removed with an
//! integrating factor and the remainder is advanced by AB2.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::bie::{self, FieldSolution, FluxPhase, SolverConfig};
use crate::error::Result;
use crate::geometry::{dist, InterfaceCurve, InterfaceSystem, Point};
use crate::spectral::{self, wavenumber, PeriodicSamples, SmoothingFilter};

pub const DEFAULT_FLUX_TOL: f64 = 1e-3;
pub const DEFAULT_FILTER_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynamicsConfig {
    pub dt: f64,
    pub filter_tol: f64,
    pub smoothing: SmoothingFilter,
    pub flux_tol: f64,
    pub solver: SolverConfig,
    pub stop: StopConfig,
}

impl DynamicsConfig {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            filter_tol: DEFAULT_FILTER_TOL,
            smoothing: SmoothingFilter::default(),
            flux_tol: DEFAULT_FLUX_TOL,
            solver: SolverConfig::default(),
            stop: StopConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StopConfig {
    /// Contact when nodes come closer than this many node spacings.
    pub contact_spacings: f64,
    /// Blowup when `max|κ| > curvature_factor / min L`.
    pub curvature_factor: f64,
    /// Collapse when a curve is shorter than this many of its initial lengths.
    pub collapse_fraction: f64,
}

impl Default for StopConfig {
    fn default() -> Self {
        Self {
            contact_spacings: 2.0,
            curvature_factor: 100.0,
            collapse_fraction: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StopReason {
    Time,
    NearContact { curves: (usize, usize), distance: f64 },
    CurvatureBlowup { curve: usize, kappa: f64 },
    Collapse { curve: usize, length: f64 },
    SolverFailure(String),
}

impl StopReason {
    pub fn label(&self) -> &'static str {
        match self {
            StopReason::Time => "time",
            StopReason::NearContact { .. } => "near-contact",
            StopReason::CurvatureBlowup { .. } => "curvature-blowup",
            StopReason::Collapse { .. } => "collapse",
            StopReason::SolverFailure(_) => "solver-failure",
        }
    }
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopReason::Time => write!(f, "time"),
            StopReason::NearContact { curves, distance } => {
                write!(f, "near-contact (domains {} and {}, distance {distance:.3e})", curves.0 + 1, curves.1 + 1)
            }
            StopReason::CurvatureBlowup { curve, kappa } => {
                write!(f, "curvature-blowup (domain {}, max |kappa| {kappa:.3e})", curve + 1)
            }
            StopReason::Collapse { curve, length } => write!(f, "collapse (domain {}, L = {length:.3e})", curve + 1),
            StopReason::SolverFailure(msg) => write!(f, "solver-failure ({msg})"),
        }
    }
}

/// Per-curve rates at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveRates {
    pub s_alpha: f64,
    /// Filtered spectrum of the nonstiff part of `θ_t`.
    pub n_hat: Vec<Complex64>,
    pub length_rate: f64,
    pub x_ref_rate: Point,
}

#[derive(Clone, Debug)]
pub struct EvolutionState {
    pub system: InterfaceSystem,
    pub t: f64,
    pub steps: usize,
    pub phase: FluxPhase,
    /// Time at which the flux was forced to zero.
    pub t_c: Option<f64>,
    pub prev_solution: Option<FieldSolution>,
    history: Option<Vec<CurveRates>>,
    initial_lengths: Vec<f64>,
    t0: f64,
}

impl EvolutionState {
    pub fn new(system: InterfaceSystem, flux_tol: f64) -> Self {
        let initial_lengths = system.curves.iter().map(InterfaceCurve::length).collect();
        let mut state = Self {
            phase: FluxPhase::default(),
            system,
            t: 0.0,
            steps: 0,
            t_c: None,
            prev_solution: None,
            history: None,
            initial_lengths,
            t0: 0.0,
        };
        state.phase = FluxPhase::transient(&state.system);
        state.refresh_phase(flux_tol);
        state
    }

    pub fn has_history(&self) -> bool {
        self.history.is_some()
    }

    pub fn flux(&self) -> f64 {
        bie::flux_target(&self.system, &self.phase)
    }

    pub fn solve(&self, cfg: &DynamicsConfig) -> Result<FieldSolution> {
        bie::solve(&self.system, &self.phase, &cfg.solver, self.prev_solution.as_ref())
    }

    /// Solves at the current state and advances by one step.
    pub fn step(&mut self, cfg: &DynamicsConfig) -> Result<FieldSolution> {
        let sol = self.solve(cfg)?;
        self.advance(&sol, cfg)?;
        Ok(sol)
    }

    /// Advances by one step using the velocity solved at the current state:
    /// integrating-factor Euler on the first step, AB2 afterwards.
    pub fn advance(&mut self, sol: &FieldSolution, cfg: &DynamicsConfig) -> Result<()> {
        let sigma = self.system.sigma;
        let dt = cfg.dt;
        let rates: Vec<CurveRates> = self
            .system
            .curves
            .iter()
            .zip(sol.curves())
            .map(|(c, v)| curve_rates(c, v, sigma, cfg))
            .collect();
        let mut curves = Vec::with_capacity(rates.len());
        for (i, (curve, now)) in self.system.curves.iter().zip(&rates).enumerate() {
            let prev = self.history.as_ref().map(|h| &h[i]);
            curves.push(advance_curve(curve, now, prev, sigma, cfg)?);
        }
        self.system.curves = curves;
        self.history = Some(rates);
        self.prev_solution = Some(sol.clone());
        self.steps += 1;
        self.t = self.t0 + self.steps as f64 * dt;
        self.refresh_phase(cfg.flux_tol);
        Ok(())
    }

    fn refresh_phase(&mut self, flux_tol: f64) {
        let before = self.phase.forced_zero;
        self.phase = update_flux_phase(self.phase, &self.system, flux_tol);
        if self.phase.forced_zero && !before {
            self.t_c = Some(self.t);
        }
    }

    pub fn stop_check(&self, t_end: f64, cfg: &StopConfig) -> Option<StopReason> {
        stop_check(&self.system, self.t, t_end, &self.initial_lengths, cfg)
    }
}

fn theta_alpha(curve: &InterfaceCurve) -> Vec<f64> {
    spectral::derivative(curve.q(), 1).into_iter().map(|d| 1.0 + d).collect()
}

/// `L_t = ∫ θ_α V dα`.
pub fn length_rate(curve: &InterfaceCurve, v: &[f64]) -> f64 {
    let h = 2.0 * PI / curve.n() as f64;
    h * theta_alpha(curve).iter().zip(v).map(|(a, v)| a * v).sum::<f64>()
}

/// Tangential velocity with `T(0) = 0` making `s_αt = Vθ_α + T_α` uniform.
pub fn tangential_velocity(curve: &InterfaceCurve, v: &[f64]) -> Vec<f64> {
    let g: Vec<f64> = theta_alpha(curve).iter().zip(v).map(|(a, v)| a * v).collect();
    let (p, _) = spectral::antiderivative(&g);
    p.iter().map(|x| p[0] - x).collect()
}

/// Full `θ_t = (-V_α + Tθ_α)/s_α`.
pub fn theta_rate(curve: &InterfaceCurve, v: &[f64], t: &[f64]) -> Vec<f64> {
    let va = spectral::derivative(v, 1);
    let sa = curve.s_alpha();
    theta_alpha(curve)
        .iter()
        .zip(va.iter().zip(t))
        .map(|(ta, (va, t))| (-va + t * ta) / sa)
        .collect()
}

/// Spectrum of `θ_t` minus its stiff part `-σ|k|³/s_α³ q̂_k`.
pub fn theta_nonstiff(curve: &InterfaceCurve, v: &[f64], t: &[f64], sigma: f64) -> Vec<Complex64> {
    let n = curve.n();
    let c = sigma / curve.s_alpha().powi(3);
    let q_hat = spectral::forward(curve.q());
    let mut out = spectral::forward(&theta_rate(curve, v, t));
    for (j, (o, q)) in out.iter_mut().zip(&q_hat).enumerate() {
        let k = wavenumber(j, n).unsigned_abs() as f64;
        *o += c * k * k * k * q;
    }
    out
}

/// `exp(-σ|k|³ ∫ s_α⁻³ dt)` by the trapezoid rule over equally spaced
/// levels of `s_α`.
pub fn integrating_factor(k: i64, sigma: f64, dt: f64, s_levels: &[f64]) -> f64 {
    let last = s_levels.len().saturating_sub(1);
    let integral: f64 = s_levels
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let w = if i == 0 || i == last { 0.5 } else { 1.0 };
            w / s.powi(3)
        })
        .sum::<f64>()
        * dt;
    let k = k.unsigned_abs() as f64;
    (-sigma * k * k * k * integral).exp()
}

pub fn curve_rates(curve: &InterfaceCurve, v: &[f64], sigma: f64, cfg: &DynamicsConfig) -> CurveRates {
    let t = tangential_velocity(curve, v);
    let mut n_hat = theta_nonstiff(curve, v, &t, sigma);
    apply_filters(&mut n_hat, cfg);
    let theta = curve.theta()[0];
    let (s, c) = theta.sin_cos();
    // T(0) = 0, so the reference marker moves along the normal only.
    CurveRates {
        s_alpha: curve.s_alpha(),
        n_hat,
        length_rate: length_rate(curve, v),
        x_ref_rate: [v[0] * s, -v[0] * c],
    }
}

fn apply_filters(coeffs: &mut [Complex64], cfg: &DynamicsConfig) {
    spectral::krasny_filter(coeffs, cfg.filter_tol);
    cfg.smoothing.apply(coeffs);
}

fn advance_curve(
    curve: &InterfaceCurve,
    now: &CurveRates,
    prev: Option<&CurveRates>,
    sigma: f64,
    cfg: &DynamicsConfig,
) -> Result<InterfaceCurve> {
    let dt = cfg.dt;
    let n = curve.n();
    let (length, x_ref) = match prev {
        None => (
            curve.length() + dt * now.length_rate,
            [
                curve.x_ref()[0] + dt * now.x_ref_rate[0],
                curve.x_ref()[1] + dt * now.x_ref_rate[1],
            ],
        ),
        Some(p) => (
            curve.length() + 0.5 * dt * (3.0 * now.length_rate - p.length_rate),
            [
                curve.x_ref()[0] + 0.5 * dt * (3.0 * now.x_ref_rate[0] - p.x_ref_rate[0]),
                curve.x_ref()[1] + 0.5 * dt * (3.0 * now.x_ref_rate[1] - p.x_ref_rate[1]),
            ],
        ),
    };
    let s_next = length / (2.0 * PI);
    let mut q_hat = spectral::forward(curve.q());
    for (j, q) in q_hat.iter_mut().enumerate() {
        let k = wavenumber(j, n);
        let e1 = integrating_factor(k, sigma, dt, &[now.s_alpha, s_next]);
        *q = match prev {
            None => e1 * (*q + dt * now.n_hat[j]),
            Some(p) => {
                let e2 = integrating_factor(k, sigma, dt, &[p.s_alpha, now.s_alpha, s_next]);
                e1 * *q + 0.5 * dt * (3.0 * e1 * now.n_hat[j] - e2 * p.n_hat[j])
            }
        };
    }
    apply_filters(&mut q_hat, cfg);
    InterfaceCurve::from_parts(length, PeriodicSamples::new(spectral::inverse(&q_hat))?, x_ref)
}

/// Latches the flux to zero once `|½πR∞² - A⁻| < flux_tol`.
pub fn update_flux_phase(phase: FluxPhase, system: &InterfaceSystem, flux_tol: f64) -> FluxPhase {
    if phase.forced_zero {
        return FluxPhase::forced();
    }
    let j = system.half_outer_area() - system.total_interior_area();
    if j.abs() < flux_tol {
        FluxPhase::forced()
    } else {
        FluxPhase { j, forced_zero: false }
    }
}

pub fn stop_check(
    system: &InterfaceSystem,
    t: f64,
    t_end: f64,
    initial_lengths: &[f64],
    cfg: &StopConfig,
) -> Option<StopReason> {
    if t >= t_end - 1e-12 * t_end.abs().max(1.0) {
        return Some(StopReason::Time);
    }
    for (i, c) in system.curves.iter().enumerate() {
        if let Some(l0) = initial_lengths.get(i) {
            if c.length() < cfg.collapse_fraction * l0 {
                return Some(StopReason::Collapse { curve: i, length: c.length() });
            }
        }
    }
    let min_l = system.curves.iter().map(InterfaceCurve::length).fold(f64::INFINITY, f64::min);
    let limit = cfg.curvature_factor / min_l;
    for (i, c) in system.curves.iter().enumerate() {
        let kmax = c.curvature().iter().fold(0.0f64, |m, k| m.max(k.abs()));
        if !kmax.is_finite() || kmax > limit {
            return Some(StopReason::CurvatureBlowup { curve: i, kappa: kmax });
        }
    }
    let markers: Vec<Vec<Point>> = system.curves.iter().map(InterfaceCurve::markers).collect();
    let spacing: Vec<f64> = system.curves.iter().map(|c| c.length() / c.n() as f64).collect();
    for (a, pa) in markers.iter().enumerate() {
        let n = pa.len();
        let limit = cfg.contact_spacings * spacing[a];
        for i in 0..n {
            for j in i + 3..n {
                if i + n - j < 3 {
                    continue;
                }
                let d = dist(pa[i], pa[j]);
                if d < limit {
                    return Some(StopReason::NearContact { curves: (a, a), distance: d });
                }
            }
        }
        for (b, pb) in markers.iter().enumerate().skip(a + 1) {
            let limit = cfg.contact_spacings * spacing[a].max(spacing[b]);
            for p in pa {
                for q in pb {
                    let d = dist(*p, *q);
                    if d < limit {
                        return Some(StopReason::NearContact { curves: (a, b), distance: d });
                    }
                }
            }
        }
    }
    None
}
