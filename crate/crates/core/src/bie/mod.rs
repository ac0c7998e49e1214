//! Boundary integral system for the normal velocity `V` and the far-field
//! constant `w̃∞`.
//!
//! Collocated at every node `x_i`:
//!
//! ```text
//! w̃∞ + 2 S[V](x_i) = σκ(x_i) - S[x'·n'](x_i) + D[|x'|²/2](x_i)
//! ```
//!
//! with `S`, `D` the single and double layers of `G = (1/2π) ln|x - x'|`
//! summed over all curves, closed by the flux row `Σ_curves ∫ V ds = J`.
//! Unknowns are ordered `[V(curve 1), …, V(curve M), w̃∞]`.

mod gmres;

pub use gmres::{gmres, GmresOutcome};

use std::f64::consts::PI;

use crate::error::Result;
use crate::geometry::{dist, CurveGeometry, InterfaceSystem};
use crate::potentials::{double_layer, near_singular, SelfSingleLayer, SmoothRule, Targets};

pub const DEFAULT_MAX_ITER: usize = 500;

/// Flux driving the transient phase; latched to zero once the imposed
/// flux has (nearly) vanished.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FluxPhase {
    pub j: f64,
    pub forced_zero: bool,
}

impl FluxPhase {
    pub fn transient(system: &InterfaceSystem) -> Self {
        let mut phase = Self::default();
        phase.j = flux_target(system, &phase);
        phase
    }

    pub fn forced() -> Self {
        Self { j: 0.0, forced_zero: true }
    }
}

/// `J = ½ π R∞² - A⁻`, or zero once forced.
pub fn flux_target(system: &InterfaceSystem, phase: &FluxPhase) -> f64 {
    if phase.forced_zero {
        0.0
    } else {
        system.half_outer_area() - system.total_interior_area()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldSolution {
    /// Normal velocity at all nodes, curves concatenated.
    pub v: Vec<f64>,
    pub w_inf: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Some target came within a tenth of a node spacing of another curve.
    pub near_singular: bool,
    offsets: Vec<usize>,
}

impl FieldSolution {
    pub fn curve(&self, i: usize) -> &[f64] {
        &self.v[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn curves(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.offsets.len() - 1).map(move |i| self.curve(i))
    }

    pub fn max_abs_v(&self) -> f64 {
        self.v.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// The unknown vector in solver layout.
    pub fn unknowns(&self) -> Vec<f64> {
        let mut u = self.v.clone();
        u.push(self.w_inf);
        u
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub rule: SmoothRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: DEFAULT_MAX_ITER,
            rule: SmoothRule::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// The single-layer part of the system for one geometry, tabulated once and
/// applied densely for every GMRES iteration.
#[derive(Clone, Debug)]
pub struct BoundaryOperator {
    geoms: Vec<CurveGeometry>,
    offsets: Vec<usize>,
    self_blocks: Vec<SelfSingleLayer>,
    /// Row-major cross-curve single-layer weights, zero on diagonal blocks.
    cross: Vec<f64>,
    near_singular: bool,
}

impl BoundaryOperator {
    pub fn new(system: &InterfaceSystem, rule: SmoothRule) -> Self {
        Self::from_geometries(system.geometries(), rule)
    }

    pub fn from_geometries(geoms: Vec<CurveGeometry>, rule: SmoothRule) -> Self {
        let mut offsets = vec![0];
        for g in &geoms {
            offsets.push(offsets.last().unwrap() + g.n());
        }
        let total = *offsets.last().unwrap();
        let self_blocks = geoms.iter().map(|g| SelfSingleLayer::new(g, rule)).collect();
        let mut cross = vec![0.0; if geoms.len() > 1 { total * total } else { 0 }];
        let mut near = false;
        for (a, ga) in geoms.iter().enumerate() {
            for (b, gb) in geoms.iter().enumerate() {
                if a == b {
                    continue;
                }
                near |= near_singular(gb, &ga.points);
                let w = gb.weight() / (2.0 * PI);
                for (i, t) in ga.points.iter().enumerate() {
                    let row = (offsets[a] + i) * total + offsets[b];
                    for (j, p) in gb.points.iter().enumerate() {
                        cross[row + j] = w * dist(*t, *p).ln();
                    }
                }
            }
        }
        Self {
            geoms,
            offsets,
            self_blocks,
            cross,
            near_singular: near,
        }
    }

    pub fn geometries(&self) -> &[CurveGeometry] {
        &self.geoms
    }

    pub fn total_nodes(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn near_singular(&self) -> bool {
        self.near_singular
    }

    /// `S[density]` summed over all curves, evaluated at all nodes.
    pub fn single_layer(&self, density: &[f64]) -> Vec<f64> {
        let total = self.total_nodes();
        let mut out = vec![0.0; total];
        for (c, block) in self.self_blocks.iter().enumerate() {
            let (lo, hi) = (self.offsets[c], self.offsets[c + 1]);
            out[lo..hi].copy_from_slice(&block.apply(&density[lo..hi]));
        }
        if !self.cross.is_empty() {
            for (i, o) in out.iter_mut().enumerate() {
                let row = &self.cross[i * total..(i + 1) * total];
                *o += row.iter().zip(density).map(|(k, d)| k * d).sum::<f64>();
            }
        }
        out
    }

    /// Left-hand side: per-node `w_inf + 2 S[V]` and the flux `Σ V_j s_α h`.
    pub fn apply(&self, v: &[f64], w_inf: f64) -> (Vec<f64>, f64) {
        let rows = self.single_layer(v).into_iter().map(|s| w_inf + 2.0 * s).collect();
        let flux = self
            .geoms
            .iter()
            .enumerate()
            .map(|(c, g)| g.weight() * v[self.offsets[c]..self.offsets[c + 1]].iter().sum::<f64>())
            .sum();
        (rows, flux)
    }

    /// Right-hand side `σκ - S[x'·n'] + D[|x'|²/2]` at all nodes.
    pub fn rhs(&self, sigma: f64, rule: SmoothRule) -> Result<Vec<f64>> {
        let total = self.total_nodes();
        let mut xn = Vec::with_capacity(total);
        let mut half_r2 = Vec::with_capacity(total);
        for g in &self.geoms {
            for (p, n) in g.points.iter().zip(&g.normals) {
                xn.push(p[0] * n[0] + p[1] * n[1]);
                half_r2.push(0.5 * (p[0] * p[0] + p[1] * p[1]));
            }
        }
        let s = self.single_layer(&xn);
        let mut d = vec![0.0; total];
        for (a, ga) in self.geoms.iter().enumerate() {
            let (lo, hi) = (self.offsets[a], self.offsets[a + 1]);
            for (b, gb) in self.geoms.iter().enumerate() {
                let dens = &half_r2[self.offsets[b]..self.offsets[b + 1]];
                let vals = if a == b {
                    double_layer(dens, gb, Targets::SelfNodes, rule)?
                } else {
                    double_layer(dens, gb, Targets::Points(&ga.points), rule)?
                };
                d[lo..hi].iter_mut().zip(vals).for_each(|(x, v)| *x += v);
            }
        }
        let kappa = self.geoms.iter().flat_map(|g| g.kappa.iter().copied());
        Ok(kappa.zip(s).zip(d).map(|((k, s), d)| sigma * k - s + d).collect())
    }
}

/// Right-hand side of the collocated equations.
pub fn assemble_rhs(system: &InterfaceSystem, rule: SmoothRule) -> Result<Vec<f64>> {
    BoundaryOperator::new(system, rule).rhs(system.sigma, rule)
}

/// Applies the system matrix to `(V, w_inf)`.
pub fn apply_operator(v: &[f64], w_inf: f64, system: &InterfaceSystem, rule: SmoothRule) -> Result<(Vec<f64>, f64)> {
    let op = BoundaryOperator::new(system, rule);
    if v.len() != op.total_nodes() {
        return Err(crate::Error::LengthMismatch {
            expected: op.total_nodes(),
            found: v.len(),
        });
    }
    Ok(op.apply(v, w_inf))
}

/// Solves for `V` and `w̃∞` at the current geometry.
pub fn solve(
    system: &InterfaceSystem,
    phase: &FluxPhase,
    config: &SolverConfig,
    warm_start: Option<&FieldSolution>,
) -> Result<FieldSolution> {
    let op = BoundaryOperator::new(system, config.rule);
    solve_with(&op, system.sigma, flux_target(system, phase), config, warm_start)
}

pub fn solve_with(
    op: &BoundaryOperator,
    sigma: f64,
    flux: f64,
    config: &SolverConfig,
    warm_start: Option<&FieldSolution>,
) -> Result<FieldSolution> {
    let total = op.total_nodes();
    let mut b = op.rhs(sigma, config.rule)?;
    b.push(flux);
    let x0 = warm_start.map(FieldSolution::unknowns).filter(|u| u.len() == total + 1);
    let out = gmres(
        |x, y| {
            let (rows, f) = op.apply(&x[..total], x[total]);
            y[..total].copy_from_slice(&rows);
            y[total] = f;
        },
        &b,
        x0.as_deref(),
        config.tol,
        config.max_iter,
    )?;
    let mut v = out.x;
    let w_inf = v.pop().unwrap();
    Ok(FieldSolution {
        v,
        w_inf,
        residual: out.residual,
        iterations: out.iterations,
        near_singular: op.near_singular(),
        offsets: op.offsets.clone(),
    })
}

/// Single layer of all curves, kept for callers that only need `S`.
pub fn single_layer_all(system: &InterfaceSystem, density: &[f64], rule: SmoothRule) -> Vec<f64> {
    BoundaryOperator::new(system, rule).single_layer(density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::InterfaceCurve;

    fn circle_system(r: f64, r_inf: f64, sigma: f64, n: usize) -> InterfaceSystem {
        InterfaceSystem::new(vec![InterfaceCurve::circle([0.0, 0.0], r, n).unwrap()], r_inf, sigma).unwrap()
    }

    #[test]
    fn flux_targets() {
        let sys = circle_system(2.0, 10.0, 0.47, 64);
        assert!((flux_target(&sys, &FluxPhase::default()) - 46.0 * PI).abs() < 1e-10);
        assert_eq!(flux_target(&sys, &FluxPhase::forced()), 0.0);
        let steady = circle_system(2.0, 2.0 * 2f64.sqrt(), 0.47, 64);
        assert!(flux_target(&steady, &FluxPhase::default()).abs() < 1e-12);
    }

    #[test]
    fn circle_rhs_closed_form() {
        let (r, sigma) = (2.0, 0.47);
        let sys = circle_system(r, 10.0, sigma, 64);
        let b = assemble_rhs(&sys, SmoothRule::default()).unwrap();
        // σ/R - S[R] + D[R²/2] = σ/R - R² ln R + R²/4
        let expect = sigma / r - r * r * r.ln() + r * r / 4.0;
        assert!(b.iter().all(|x| (x - expect).abs() < 1e-11));

        let sys2 = circle_system(r, 10.0, 2.0 * sigma, 64);
        let b2 = assemble_rhs(&sys2, SmoothRule::default()).unwrap();
        assert!(b.iter().zip(&b2).all(|(x, y)| (y - x - sigma / r).abs() < 1e-12));
    }

    #[test]
    fn operator_on_circle() {
        let r = 2.0;
        let sys = circle_system(r, 10.0, 0.47, 64);
        let (rows, flux) = apply_operator(&[0.0; 64], 3.5, &sys, SmoothRule::default()).unwrap();
        assert!(rows.iter().all(|x| *x == 3.5) && flux == 0.0);
        let v = 0.7;
        let (rows, flux) = apply_operator(&[v; 64], 0.0, &sys, SmoothRule::default()).unwrap();
        assert!(rows.iter().all(|x| (x - 2.0 * v * r * r.ln()).abs() < 1e-12));
        assert!((flux - 2.0 * PI * r * v).abs() < 1e-12);
    }

    #[test]
    fn operator_is_linear() {
        let sys = circle_system(1.3, 4.0, 0.47, 32);
        let v1: Vec<f64> = (0..32).map(|j| (j as f64 * 0.37).sin()).collect();
        let v2: Vec<f64> = (0..32).map(|j| (j as f64 * 0.11).cos()).collect();
        let combo: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
        let rule = SmoothRule::default();
        let (r1, f1) = apply_operator(&v1, 0.3, &sys, rule).unwrap();
        let (r2, f2) = apply_operator(&v2, -1.0, &sys, rule).unwrap();
        let (rc, fc) = apply_operator(&combo, 2.0 * 0.3 + 0.5, &sys, rule).unwrap();
        for i in 0..32 {
            assert!((rc[i] - (2.0 * r1[i] - 0.5 * r2[i])).abs() < 1e-12);
        }
        assert!((fc - (2.0 * f1 - 0.5 * f2)).abs() < 1e-12);
    }

    #[test]
    fn steady_circle_solution() {
        let (r, sigma) = (2.0, 0.47);
        let sys = circle_system(r, r * 2f64.sqrt(), sigma, 256);
        let sol = solve(&sys, &FluxPhase::transient(&sys), &SolverConfig::default(), None).unwrap();
        assert!(sol.max_abs_v() <= 1e-8, "max |V| = {}", sol.max_abs_v());
        let expect = sigma / r - r * r * r.ln() + r * r / 4.0;
        assert!((sol.w_inf - expect).abs() < 1e-8);
        assert!(sol.residual <= 1e-10);
    }

    #[test]
    fn growing_circle_velocity() {
        let sys = circle_system(2.0, 10.0, 0.47, 128);
        let sol = solve(&sys, &FluxPhase::transient(&sys), &SolverConfig::default(), None).unwrap();
        assert!(sol.v.iter().all(|v| (v - 11.5).abs() < 1e-9), "{:?}", &sol.v[..4]);
        let flux: f64 = sol.v.iter().sum::<f64>() * 4.0 * PI / 128.0 * 2.0 / 2.0;
        assert!((flux - 46.0 * PI).abs() <= 1e-10 * 46.0 * PI * 10.0);
    }

    #[test]
    fn solution_independent_of_resolution() {
        let sys_a = circle_system(1.5, 3.0, 0.47, 128);
        let sys_b = circle_system(1.5, 3.0, 0.47, 512);
        let cfg = SolverConfig::default();
        let a = solve(&sys_a, &FluxPhase::transient(&sys_a), &cfg, None).unwrap();
        let b = solve(&sys_b, &FluxPhase::transient(&sys_b), &cfg, None).unwrap();
        for (i, va) in a.v.iter().enumerate() {
            assert!((va - b.v[4 * i]).abs() < 1e-9);
        }
        let spread = a.v.iter().fold(f64::MIN, |m, v| m.max(*v)) - a.v.iter().fold(f64::MAX, |m, v| m.min(*v));
        assert!(spread < 1e-9);
    }

    #[test]
    fn warm_start_reuses_previous_solution() {
        let sys = circle_system(2.0, 5.0, 0.47, 64);
        let cfg = SolverConfig::default();
        let first = solve(&sys, &FluxPhase::transient(&sys), &cfg, None).unwrap();
        let again = solve(&sys, &FluxPhase::transient(&sys), &cfg, Some(&first)).unwrap();
        assert_eq!(again.iterations, 0);
    }
}
