//! Closed interfaces in the equal-arclength tangent-angle representation.
//!
//! A curve is stored as its total length `L`, the periodic part `q` of the
//! tangent angle, `θ(α) = α + q(α)`, and the absolute position `x_ref` of the
//! `α = 0` marker. Markers are recovered by integrating
//! `x_α = (L/2π)(cos θ, sin θ)`; all curves are oriented counterclockwise so
//! that `n = (sin θ, -cos θ)` points out of the enclosed region.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::spectral::{self, check_grid, node, PeriodicSamples};

pub type Point = [f64; 2];

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// A smooth closed curve parametrised counterclockwise by `t ∈ [0, 2π)`.
pub trait ClosedShape {
    fn point(&self, t: f64) -> Point;
    /// `dx/dt`.
    fn velocity(&self, t: f64) -> Point;
    fn validate(&self) -> Result<()>;
}

/// Ellipse with semi-axis `a` along direction `angle`, `b` perpendicular.
///
/// `t = 0` sits at the tip of the `a` axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipse {
    pub center: Point,
    pub a: f64,
    pub b: f64,
    pub angle: f64,
}

impl ClosedShape for Ellipse {
    fn point(&self, t: f64) -> Point {
        let (s, c) = self.angle.sin_cos();
        let (u, v) = (self.a * t.cos(), self.b * t.sin());
        [self.center[0] + c * u - s * v, self.center[1] + s * u + c * v]
    }

    fn velocity(&self, t: f64) -> Point {
        let (s, c) = self.angle.sin_cos();
        let (u, v) = (-self.a * t.sin(), self.b * t.cos());
        [c * u - s * v, s * u + c * v]
    }

    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::DegenerateShape(format!(
                "ellipse semi-axes must be positive, got a={}, b={}",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

/// `r(φ) = radius + delta·cos(mode·φ)` about `center`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbedCircle {
    pub center: Point,
    pub radius: f64,
    pub delta: f64,
    pub mode: u32,
}

impl ClosedShape for PerturbedCircle {
    fn point(&self, t: f64) -> Point {
        let r = self.radius + self.delta * (self.mode as f64 * t).cos();
        [self.center[0] + r * t.cos(), self.center[1] + r * t.sin()]
    }

    fn velocity(&self, t: f64) -> Point {
        let k = self.mode as f64;
        let r = self.radius + self.delta * (k * t).cos();
        let dr = -self.delta * k * (k * t).sin();
        [dr * t.cos() - r * t.sin(), dr * t.sin() + r * t.cos()]
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.delta.abs() < self.radius) {
            return Err(Error::DegenerateShape(format!(
                "perturbed circle needs radius > |delta|, got R={}, delta={}",
                self.radius, self.delta
            )));
        }
        Ok(())
    }
}

/// One closed interface in `(L, θ)` form.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceCurve {
    length: f64,
    q: Vec<f64>,
    x_ref: Point,
}

impl InterfaceCurve {
    pub fn from_parts(length: f64, q: PeriodicSamples, x_ref: Point) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::DegenerateShape(format!("curve length {length}")));
        }
        Ok(Self {
            length,
            q: q.into_inner(),
            x_ref,
        })
    }

    /// Circle of radius `r` centred at `center`, marker 0 at angle 0.
    pub fn circle(center: Point, r: f64, n: usize) -> Result<Self> {
        check_grid(n)?;
        Self::from_parts(
            2.0 * PI * r,
            PeriodicSamples::new(vec![PI / 2.0; n])?,
            [center[0] + r, center[1]],
        )
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// `s_α = L/2π`.
    pub fn s_alpha(&self) -> f64 {
        self.length / (2.0 * PI)
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn x_ref(&self) -> Point {
        self.x_ref
    }

    pub fn theta(&self) -> Vec<f64> {
        let n = self.n();
        self.q.iter().enumerate().map(|(j, q)| node(j, n) + q).collect()
    }

    /// Mean tangent-angle offset `θ₀`.
    pub fn theta0(&self) -> f64 {
        self.q.iter().sum::<f64>() / self.n() as f64
    }

    /// `x_α` with its mean removed, so the recovered polygon always closes.
    fn x_alpha(&self) -> (Vec<f64>, Vec<f64>) {
        let sa = self.s_alpha();
        let theta = self.theta();
        let mut xa: Vec<f64> = theta.iter().map(|t| sa * t.cos()).collect();
        let mut ya: Vec<f64> = theta.iter().map(|t| sa * t.sin()).collect();
        let mx = xa.iter().sum::<f64>() / xa.len() as f64;
        let my = ya.iter().sum::<f64>() / ya.len() as f64;
        xa.iter_mut().for_each(|v| *v -= mx);
        ya.iter_mut().for_each(|v| *v -= my);
        (xa, ya)
    }

    pub fn markers(&self) -> Vec<Point> {
        let (xa, ya) = self.x_alpha();
        let (px, _) = spectral::antiderivative(&xa);
        let (py, _) = spectral::antiderivative(&ya);
        px.iter()
            .zip(&py)
            .map(|(x, y)| [self.x_ref[0] + x - px[0], self.x_ref[1] + y - py[0]])
            .collect()
    }

    /// `κ = (2π/L)(1 + q_α)`.
    pub fn curvature(&self) -> Vec<f64> {
        let qa = spectral::derivative(&self.q, 1);
        let scale = 2.0 * PI / self.length;
        qa.iter().map(|d| scale * (1.0 + d)).collect()
    }

    /// Unit normals `(sin θ, -cos θ)` and tangents `(cos θ, sin θ)`.
    pub fn normal_tangent(&self) -> (Vec<Point>, Vec<Point>) {
        self.theta()
            .iter()
            .map(|t| {
                let (s, c) = t.sin_cos();
                ([s, -c], [c, s])
            })
            .unzip()
    }

    /// Trapezoid rule for `½∮(x y_α - y x_α) dα`.
    pub fn enclosed_area(&self) -> f64 {
        let pts = self.markers();
        let (xa, ya) = self.x_alpha();
        let h = 2.0 * PI / self.n() as f64;
        0.5 * h
            * pts
                .iter()
                .zip(xa.iter().zip(&ya))
                .map(|(p, (dx, dy))| p[0] * dy - p[1] * dx)
                .sum::<f64>()
    }

    pub fn translated(&self, d: Point) -> Self {
        Self {
            x_ref: [self.x_ref[0] + d[0], self.x_ref[1] + d[1]],
            ..self.clone()
        }
    }

    /// Rigid rotation about the origin.
    pub fn rotated(&self, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        let [x, y] = self.x_ref;
        Self {
            length: self.length,
            q: self.q.iter().map(|v| v + phi).collect(),
            x_ref: [c * x - s * y, s * x + c * y],
        }
    }

    pub fn geometry(&self) -> CurveGeometry {
        let (normals, tangents) = self.normal_tangent();
        CurveGeometry {
            points: self.markers(),
            normals,
            tangents,
            kappa: self.curvature(),
            s_alpha: self.s_alpha(),
        }
    }

    /// True when no two non-adjacent polygon edges intersect.
    pub fn is_simple(&self) -> bool {
        polygon_is_simple(&self.markers())
    }
}

/// Node-wise geometric data of one curve, computed once per state.
#[derive(Clone, Debug)]
pub struct CurveGeometry {
    pub points: Vec<Point>,
    pub normals: Vec<Point>,
    pub tangents: Vec<Point>,
    pub kappa: Vec<f64>,
    pub s_alpha: f64,
}

impl CurveGeometry {
    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// Quadrature weight `s_α h` of the periodic trapezoid rule.
    pub fn weight(&self) -> f64 {
        self.s_alpha * 2.0 * PI / self.n() as f64
    }

    pub fn spacing(&self) -> f64 {
        self.weight()
    }
}

/// Places `n` markers equidistant in arclength on `shape`.
///
/// Cumulative arclength is tabulated on `32n` panels with an 8-point
/// Gauss-Legendre rule; each marker parameter is then found by a safeguarded
/// Newton iteration inside its bracketing panel.
pub fn resample_equal_arclength(shape: &dyn ClosedShape, n: usize) -> Result<InterfaceCurve> {
    check_grid(n)?;
    shape.validate()?;
    let speed = |t: f64| {
        let v = shape.velocity(t);
        v[0].hypot(v[1])
    };
    let gl = GaussLegendre::new(8);
    let panels = 32 * n;
    let dt = 2.0 * PI / panels as f64;
    let mut cumulative = Vec::with_capacity(panels + 1);
    cumulative.push(0.0);
    for i in 0..panels {
        let lo = dt * i as f64;
        let seg = gl.integrate(lo, lo + dt, speed);
        cumulative.push(cumulative[i] + seg);
    }
    let length = cumulative[panels];
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::DegenerateShape(format!("perimeter {length}")));
    }

    let mut params = Vec::with_capacity(n);
    for j in 0..n {
        let target = length * j as f64 / n as f64;
        let i = cumulative.partition_point(|&c| c <= target).saturating_sub(1).min(panels - 1);
        let (lo, hi) = (dt * i as f64, dt * (i + 1) as f64);
        let span = cumulative[i + 1] - cumulative[i];
        let mut t = lo + (target - cumulative[i]) / span * dt;
        let mut converged = false;
        for _ in 0..50 {
            let f = cumulative[i] + gl.integrate(lo, t, speed) - target;
            if f.abs() <= 1e-14 * length {
                converged = true;
                break;
            }
            t = (t - f / speed(t)).clamp(lo, hi);
        }
        if !converged {
            return Err(Error::ArclengthInversion { target });
        }
        params.push(t);
    }

    let mut q = Vec::with_capacity(n);
    let mut prev = 0.0;
    for (j, &t) in params.iter().enumerate() {
        let v = shape.velocity(t);
        let raw = v[1].atan2(v[0]) - node(j, n);
        let unwrapped = if j == 0 { raw } else { raw - 2.0 * PI * ((raw - prev) / (2.0 * PI)).round() };
        q.push(unwrapped);
        prev = unwrapped;
    }
    // winding check: continuing one more node must return to q[0]
    let v0 = shape.velocity(0.0);
    let closing = v0[1].atan2(v0[0]) - 2.0 * PI;
    let closing = closing - 2.0 * PI * ((closing - prev) / (2.0 * PI)).round();
    if (closing - q[0]).abs() > 1.0 {
        return Err(Error::DegenerateShape(
            "curve is not a counterclockwise curve of winding one".into(),
        ));
    }

    let curve = InterfaceCurve::from_parts(length, PeriodicSamples::new(q)?, shape.point(params[0]))?;
    if !curve.is_simple() {
        return Err(Error::DegenerateShape("resampled polygon self-intersects".into()));
    }
    Ok(curve)
}

fn segments_intersect(p1: Point, p2: Point, p3: Point, p4: Point) -> bool {
    let orient = |a: Point, b: Point, c: Point| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let d1 = orient(p3, p4, p1);
    let d2 = orient(p3, p4, p2);
    let d3 = orient(p1, p2, p3);
    let d4 = orient(p1, p2, p4);
    ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0))
}

pub fn polygon_is_simple(pts: &[Point]) -> bool {
    let n = pts.len();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_intersect(a, b, pts[j], pts[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) && p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0] {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn polygons_overlap(a: &[Point], b: &[Point]) -> bool {
    if point_in_polygon(a[0], b) || point_in_polygon(b[0], a) {
        return true;
    }
    let (na, nb) = (a.len(), b.len());
    (0..na).any(|i| (0..nb).any(|j| segments_intersect(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb])))
}

/// All interior domains, the outer radius `R∞` and the surface tension `σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceSystem {
    pub curves: Vec<InterfaceCurve>,
    pub r_inf: f64,
    pub sigma: f64,
}

impl InterfaceSystem {
    /// Validates containment in the outer disk and pairwise disjointness.
    pub fn new(curves: Vec<InterfaceCurve>, r_inf: f64, sigma: f64) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::Validation("at least one domain is required".into()));
        }
        if !(sigma > 0.0) {
            return Err(Error::Validation(format!("surface tension must be positive, got {sigma}")));
        }
        if !(r_inf > 0.0) {
            return Err(Error::Validation(format!("outer radius must be positive, got {r_inf}")));
        }
        let polys: Vec<Vec<Point>> = curves.iter().map(InterfaceCurve::markers).collect();
        for (i, p) in polys.iter().enumerate() {
            if let Some(x) = p.iter().find(|x| x[0].hypot(x[1]) >= r_inf) {
                return Err(Error::Validation(format!(
                    "domain {} leaves the outer disk (marker at ({:.4}, {:.4}), R_inf = {r_inf})",
                    i + 1,
                    x[0],
                    x[1]
                )));
            }
        }
        for i in 0..polys.len() {
            for j in i + 1..polys.len() {
                if polygons_overlap(&polys[i], &polys[j]) {
                    return Err(Error::Validation(format!("domains {} and {} overlap", i + 1, j + 1)));
                }
            }
        }
        Ok(Self { curves, r_inf, sigma })
    }

    pub fn m(&self) -> usize {
        self.curves.len()
    }

    pub fn total_nodes(&self) -> usize {
        self.curves.iter().map(InterfaceCurve::n).sum()
    }

    pub fn total_interior_area(&self) -> f64 {
        self.curves.iter().map(InterfaceCurve::enclosed_area).sum()
    }

    /// `½ A_total = ½ π R∞²`.
    pub fn half_outer_area(&self) -> f64 {
        0.5 * PI * self.r_inf * self.r_inf
    }

    pub fn geometries(&self) -> Vec<CurveGeometry> {
        self.curves.iter().map(InterfaceCurve::geometry).collect()
    }
}
