//! Single- and double-layer potentials of `G(x, x') = (1/2π) ln|x - x'|`
//! on equal-arclength curves.
//!
//! The self-interaction of the single layer splits the kernel as
//! `ln|x - x'| = ln|2 sin((α-α')/2)| + ln(|x - x'| / |2 sin((α-α')/2)|)`:
//! the first part is integrated exactly in Fourier space, the smooth
//! remainder by a periodic rule. Cross-curve interactions and the double
//! layer have smooth periodic integrands and use the trapezoid rule.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{dist, CurveGeometry, Point};
use crate::spectral::{self, node};

/// Quadrature for smooth periodic integrands with a removable diagonal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SmoothRule {
    /// Nodes of opposite parity to the target, weight `2h`.
    #[default]
    AlternatingPoint,
    /// All nodes, weight `h`, with the diagonal limit filled in.
    Trapezoid,
}

impl SmoothRule {
    /// Weight of source `j` for target `i`, in units of `h`.
    #[inline]
    fn weight(self, i: usize, j: usize) -> f64 {
        match self {
            SmoothRule::Trapezoid => 1.0,
            SmoothRule::AlternatingPoint => {
                if (i + j) % 2 == 1 {
                    2.0
                } else {
                    0.0
                }
            }
        }
    }
}

fn check_len(density: &[f64], geom: &CurveGeometry) -> Result<()> {
    if density.len() != geom.n() {
        return Err(Error::LengthMismatch {
            expected: geom.n(),
            found: density.len(),
        });
    }
    Ok(())
}

/// Self single layer of one curve with the smooth remainder tabulated.
#[derive(Clone, Debug)]
pub struct SelfSingleLayer {
    n: usize,
    s_alpha: f64,
    remainder: Vec<f64>,
}

impl SelfSingleLayer {
    pub fn new(geom: &CurveGeometry, rule: SmoothRule) -> Self {
        let n = geom.n();
        let h = 2.0 * PI / n as f64;
        let scale = geom.s_alpha * h / (2.0 * PI);
        let mut remainder = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let w = rule.weight(i, j);
                if w == 0.0 {
                    continue;
                }
                let value = if i == j {
                    geom.s_alpha.ln()
                } else {
                    let half = 0.5 * (node(i, n) - node(j, n));
                    (dist(geom.points[i], geom.points[j]) / (2.0 * half.sin().abs())).ln()
                };
                remainder[i * n + j] = w * scale * value;
            }
        }
        Self {
            n,
            s_alpha: geom.s_alpha,
            remainder,
        }
    }

    pub fn apply(&self, density: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = spectral::log_sine_convolution(density)
            .into_iter()
            .map(|v| v * self.s_alpha / (2.0 * PI))
            .collect();
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.remainder[i * self.n..(i + 1) * self.n];
            *o += row.iter().zip(density).map(|(k, d)| k * d).sum::<f64>();
        }
        out
    }
}

/// `∫_Γ density G(x_i, x') ds'` at the nodes of the same curve.
pub fn single_layer_self(density: &[f64], geom: &CurveGeometry, rule: SmoothRule) -> Result<Vec<f64>> {
    check_len(density, geom)?;
    Ok(SelfSingleLayer::new(geom, rule).apply(density))
}

/// Values at off-curve targets plus a flag raised when some target lies
/// within a tenth of the node spacing of the source curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossEvaluation {
    pub values: Vec<f64>,
    pub near_singular: bool,
}

pub fn near_singular(source: &CurveGeometry, targets: &[Point]) -> bool {
    let limit = 0.1 * source.spacing();
    targets
        .iter()
        .any(|t| source.points.iter().any(|p| dist(*t, *p) < limit))
}

/// Single layer of `source` evaluated at points off the curve.
pub fn single_layer_cross(density: &[f64], source: &CurveGeometry, targets: &[Point]) -> Result<CrossEvaluation> {
    check_len(density, source)?;
    let w = source.weight() / (2.0 * PI);
    let values = targets
        .iter()
        .map(|t| {
            source
                .points
                .iter()
                .zip(density)
                .map(|(p, d)| d * dist(*t, *p).ln())
                .sum::<f64>()
                * w
        })
        .collect();
    Ok(CrossEvaluation {
        values,
        near_singular: near_singular(source, targets),
    })
}

#[derive(Clone, Copy, Debug)]
pub enum Targets<'a> {
    /// The source curve's own nodes.
    SelfNodes,
    Points(&'a [Point]),
}

/// `∂G/∂n'` times the trapezoid weight, for a target off the source node.
#[inline]
pub(crate) fn double_layer_kernel(target: Point, src: Point, normal: Point) -> f64 {
    let dx = src[0] - target[0];
    let dy = src[1] - target[1];
    (dx * normal[0] + dy * normal[1]) / (2.0 * PI * (dx * dx + dy * dy))
}

/// `∫_Γ density ∂G/∂n(x') ds'`.
///
/// On the curve itself the diagonal kernel value is `κ/(4π)`.
pub fn double_layer(density: &[f64], source: &CurveGeometry, targets: Targets<'_>, rule: SmoothRule) -> Result<Vec<f64>> {
    check_len(density, source)?;
    let h = 2.0 * PI / source.n() as f64;
    match targets {
        Targets::SelfNodes => {
            let n = source.n();
            Ok((0..n)
                .map(|i| {
                    let mut acc = 0.0;
                    for j in 0..n {
                        let w = rule.weight(i, j);
                        if w == 0.0 {
                            continue;
                        }
                        let k = if i == j {
                            source.kappa[i] / (4.0 * PI)
                        } else {
                            double_layer_kernel(source.points[i], source.points[j], source.normals[j])
                        };
                        acc += w * k * density[j];
                    }
                    acc * source.s_alpha * h
                })
                .collect())
        }
        Targets::Points(points) => points
            .iter()
            .map(|t| {
                let mut acc = 0.0;
                for ((p, nrm), d) in source.points.iter().zip(&source.normals).zip(density) {
                    if dist(*t, *p) == 0.0 {
                        return Err(Error::CoincidentTarget(*t));
                    }
                    acc += double_layer_kernel(*t, *p, *nrm) * d;
                }
                Ok(acc * source.s_alpha * h)
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{resample_equal_arclength, Ellipse, InterfaceCurve};

    fn circle(r: f64, n: usize) -> CurveGeometry {
        InterfaceCurve::circle([0.4, -0.3], r, n).unwrap().geometry()
    }

    #[test]
    fn unit_density_on_circle() {
        for rule in [SmoothRule::AlternatingPoint, SmoothRule::Trapezoid] {
            let g = circle(2.0, 64);
            let v = single_layer_self(&vec![1.0; 64], &g, rule).unwrap();
            let expect = 2.0 * 2.0f64.ln();
            assert!(v.iter().all(|x| (x - expect).abs() < 1e-12), "{rule:?}");
        }
    }

    #[test]
    fn cosine_density_on_circle() {
        let r = 1.7;
        let g = circle(r, 64);
        for k in [1usize, 3, 7] {
            let f: Vec<f64> = (0..64).map(|j| (k as f64 * node(j, 64)).cos()).collect();
            let v = single_layer_self(&f, &g, SmoothRule::AlternatingPoint).unwrap();
            for (a, b) in v.iter().zip(&f) {
                assert!((a + r / (2.0 * k as f64) * b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_density() {
        let g = circle(1.0, 32);
        assert!(single_layer_self(&[0.0; 32], &g, SmoothRule::default()).unwrap().iter().all(|v| *v == 0.0));
        assert!(double_layer(&[0.0; 32], &g, Targets::SelfNodes, SmoothRule::default())
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn length_mismatch() {
        let g = circle(1.0, 32);
        assert!(matches!(
            single_layer_self(&[1.0; 16], &g, SmoothRule::default()),
            Err(Error::LengthMismatch { expected: 32, found: 16 })
        ));
    }

    #[test]
    fn cross_potential_of_uniform_circle() {
        let r = 1.5;
        let g = InterfaceCurve::circle([0.0, 0.0], r, 64).unwrap().geometry();
        let targets = [[3.0, 0.0], [0.0, -2.2], [0.5, 0.2], [-0.3, 0.0]];
        let e = single_layer_cross(&[1.0; 64], &g, &targets).unwrap();
        assert!(!e.near_singular);
        assert!((e.values[0] - r * 3.0f64.ln()).abs() < 1e-12);
        assert!((e.values[1] - r * 2.2f64.ln()).abs() < 1e-12);
        assert!((e.values[2] - r * r.ln()).abs() < 1e-12);
        assert!((e.values[3] - r * r.ln()).abs() < 1e-12);
        let zero = single_layer_cross(&[0.0; 64], &g, &targets).unwrap();
        assert!(zero.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cross_flags_near_targets() {
        let g = InterfaceCurve::circle([0.0, 0.0], 1.0, 32).unwrap().geometry();
        let close = [[1.0 + 0.01 * g.spacing(), 0.0]];
        assert!(single_layer_cross(&[1.0; 32], &g, &close).unwrap().near_singular);
    }

    #[test]
    fn gauss_identity_on_ellipse() {
        let e = resample_equal_arclength(
            &Ellipse {
                center: [1.0, 0.5],
                a: 1.5,
                b: 1.0,
                angle: 0.3,
            },
            256,
        )
        .unwrap()
        .geometry();
        for rule in [SmoothRule::AlternatingPoint, SmoothRule::Trapezoid] {
            let v = double_layer(&[1.0; 256], &e, Targets::SelfNodes, rule).unwrap();
            assert!(v.iter().all(|x| (x - 0.5).abs() < 1e-10), "{rule:?}");
        }
        let inside = double_layer(&[1.0; 256], &e, Targets::Points(&[[1.1, 0.4]]), SmoothRule::default()).unwrap();
        let outside = double_layer(&[1.0; 256], &e, Targets::Points(&[[4.0, 0.0]]), SmoothRule::default()).unwrap();
        assert!((inside[0] - 1.0).abs() < 1e-10);
        assert!(outside[0].abs() < 1e-10);
    }

    #[test]
    fn squared_radius_density_on_circle() {
        let r = 1.3;
        let g = InterfaceCurve::circle([0.0, 0.0], r, 64).unwrap().geometry();
        let dens: Vec<f64> = g.points.iter().map(|p| 0.5 * (p[0] * p[0] + p[1] * p[1])).collect();
        let v = double_layer(&dens, &g, Targets::SelfNodes, SmoothRule::default()).unwrap();
        assert!(v.iter().all(|x| (x - r * r / 4.0).abs() < 1e-12));
    }

    #[test]
    fn coincident_off_curve_target_is_rejected() {
        let g = circle(1.0, 16);
        let t = [g.points[3]];
        assert!(matches!(
            double_layer(&[1.0; 16], &g, Targets::Points(&t), SmoothRule::default()),
            Err(Error::CoincidentTarget(_))
        ));
    }
}
