//! Closed-form circle solutions and the linear stability oracle for a
//! perturbed circle `r = R + δ cos kθ`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearState {
    pub r: f64,
    pub delta: f64,
    pub k: u32,
    pub r_inf: f64,
    pub sigma: f64,
}

impl LinearState {
    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r < self.r_inf) {
            return Err(Error::Validation(format!("need 0 < R < R_inf, got R = {}, R_inf = {}", self.r, self.r_inf)));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::Validation(format!("surface tension must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    /// Relative amplitude past which the linearisation is doubtful.
    pub fn is_small(&self) -> bool {
        (self.delta / self.r).abs() <= 0.1
    }
}

/// Coefficients of the first-order fields `A⁻ r^k` inside and
/// `A⁺ r^k + B⁺ r^{-k}` outside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFields {
    pub a_minus: f64,
    pub a_plus: f64,
    pub b_plus: f64,
}

/// Radius whose disk holds half the outer area.
pub fn steady_radius(r_inf: f64) -> f64 {
    r_inf / 2f64.sqrt()
}

/// `u` of the circular base state at radius `r`.
pub fn u_fields(radius: f64, r_inf: f64, sigma: f64, r: f64) -> f64 {
    if r <= radius {
        0.25 * (r * r - radius * radius) + sigma / radius
    } else {
        -0.25 * r * r + 0.5 * r_inf * r_inf * r.ln() + sigma / radius + 0.25 * radius * radius
            - 0.5 * r_inf * r_inf * radius.ln()
    }
}

/// `∂u/∂r` of the base state, taking the branch on the given side.
pub fn u_fields_dr(r_inf: f64, r: f64, inside: bool) -> f64 {
    if inside {
        0.5 * r
    } else {
        -0.5 * r + 0.5 * r_inf * r_inf / r
    }
}

/// `p₁ = σ(k²-1)/R² + R/2 - R∞²/(2R)`.
fn p1(s: &LinearState) -> f64 {
    let k2 = f64::from(s.k).powi(2);
    s.sigma * (k2 - 1.0) / (s.r * s.r) + 0.5 * s.r - 0.5 * s.r_inf * s.r_inf / s.r
}

pub fn perturbation_coefficients(s: &LinearState) -> LinearFields {
    let k = s.k as i32;
    let k2 = f64::from(s.k).powi(2);
    let a_minus = s.sigma * (k2 - 1.0) / s.r.powi(k + 2) - 0.5 / s.r.powi(k - 1);
    let denom = s.r.powi(2 * k) + s.r_inf.powi(2 * k);
    let a_plus = p1(s) * s.r.powi(k) / denom;
    LinearFields {
        a_minus,
        a_plus,
        b_plus: a_plus * s.r_inf.powi(2 * k),
    }
}

/// `Ṙ` and `δ̇`.
pub fn ode_rhs(s: &LinearState) -> (f64, f64) {
    (radius_rate(s.r, s.r_inf), growth_rate(s) * s.delta)
}

/// `Ṙ = R∞²/(4R) - R/2`.
pub fn radius_rate(r: f64, r_inf: f64) -> f64 {
    0.25 * r_inf * r_inf / r - 0.5 * r
}

/// `δ̇/δ = -R∞²/(4R²) - 1/2 + k(t₂ - t₃)/2 - k t₁/2`.
pub fn growth_rate(s: &LinearState) -> f64 {
    let k = f64::from(s.k);
    let ki = s.k as i32;
    let (r, ri) = (s.r, s.r_inf);
    let t1 = s.sigma * (k * k - 1.0) / r.powi(3) - 0.5;
    let denom = r.powi(2 * ki) + ri.powi(2 * ki);
    let p = p1(s);
    let t2 = p * r.powi(2 * ki - 1) / denom;
    let t3 = p * ri.powi(2 * ki) / (r * denom);
    -0.25 * ri * ri / (r * r) - 0.5 + 0.5 * k * (t2 - t3) - 0.5 * k * t1
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub r: f64,
    pub delta: f64,
}

/// Classical RK4 on `(R, δ)`; the last step is shortened to land on `t_end`.
pub fn integrate(state0: &LinearState, dt: f64, t_end: f64) -> Result<Vec<TrajectoryPoint>> {
    state0.validate()?;
    if !(dt > 0.0) {
        return Err(Error::Validation(format!("time step must be positive, got {dt}")));
    }
    let mut s = *state0;
    let mut t = 0.0;
    let mut out = vec![TrajectoryPoint { t, r: s.r, delta: s.delta }];
    let f = |r: f64, d: f64| ode_rhs(&LinearState { r, delta: d, ..s });
    while t < t_end - 1e-12 * dt {
        let h = dt.min(t_end - t);
        let (k1r, k1d) = f(s.r, s.delta);
        let (k2r, k2d) = f(s.r + 0.5 * h * k1r, s.delta + 0.5 * h * k1d);
        let (k3r, k3d) = f(s.r + 0.5 * h * k2r, s.delta + 0.5 * h * k2d);
        let (k4r, k4d) = f(s.r + h * k3r, s.delta + h * k3d);
        s.r += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
        s.delta += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        t += h;
        out.push(TrajectoryPoint { t, r: s.r, delta: s.delta });
    }
    Ok(out)
}

/// Linear interpolation of a trajectory at time `t`.
pub fn sample(traj: &[TrajectoryPoint], t: f64) -> TrajectoryPoint {
    let i = traj.partition_point(|p| p.t < t).clamp(1, traj.len() - 1);
    let (a, b) = (traj[i - 1], traj[i]);
    let w = if b.t > a.t { (t - a.t) / (b.t - a.t) } else { 0.0 };
    TrajectoryPoint {
        t,
        r: a.r + w * (b.r - a.r),
        delta: a.delta + w * (b.delta - a.delta),
    }
}

pub fn write_trajectory_csv(mut w: impl Write, traj: &[TrajectoryPoint]) -> Result<()> {
    writeln!(w, "t,R,delta")?;
    for p in traj {
        writeln!(w, "{:.17e},{:.17e},{:.17e}", p.t, p.r, p.delta)?;
    }
    Ok(())
}

/// Double-well potential `F(φ) = φ⁴/4 - φ²/2`.
fn double_well(phi: f64) -> f64 {
    0.25 * phi.powi(4) - 0.5 * phi * phi
}

/// `σ = (1/(φ₊ - φ₋)) ∫ √(2(F(φ) - F(φ₋))) dφ` with `φ± = ±1`.
pub fn compute_sigma() -> f64 {
    let gl = GaussLegendre::new(16);
    let f_min = double_well(-1.0);
    let integral = gl.integrate(-1.0, 1.0, |phi| (2.0 * (double_well(phi) - f_min)).max(0.0).sqrt());
    integral / 2.0
}
