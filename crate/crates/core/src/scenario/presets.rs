use std::f64::consts::{FRAC_PI_2, SQRT_2};

use super::{Domain, Scenario, Sigma};
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Built-in scenarios at desk scale.
pub const PRESETS: &[&str] = &[
    "steady_circle",
    "linear_validation",
    "two_ellipse",
    "three_ellipse",
    "four_ellipse",
    "seven_ellipse_a",
    "seven_ellipse_b",
    "twelve_ellipse",
];

fn ellipse(center: Point, a: f64, b: f64, angle: f64) -> Domain {
    Domain::Ellipse { center, a, b, angle }
}

/// Major axis along the line to the origin.
fn radial(center: Point, a: f64, b: f64) -> Domain {
    ellipse(center, a, b, center[1].atan2(center[0]))
}

/// Major axis perpendicular to the line to the origin.
fn tangential(center: Point, a: f64, b: f64) -> Domain {
    ellipse(center, a, b, center[1].atan2(center[0]) + FRAC_PI_2)
}

fn base(name: &str, domains: Vec<Domain>, r_inf: f64) -> Scenario {
    Scenario {
        name: name.to_string(),
        domains,
        r_inf,
        sigma: Sigma::Value(0.47),
        n: 128,
        dt: 1e-3,
        t_end: 2.0,
        gmres_tol: 1e-10,
        filter_tol: 1e-10,
        flux_tol: 1e-3,
        output_every: 10,
        out_dir: None,
    }
}

pub fn preset(name: &str) -> Result<Scenario> {
    const AXIS: [Point; 4] = [[2.0, 0.0], [0.0, 2.0], [-2.0, 0.0], [0.0, -2.0]];
    let s = match name {
        "steady_circle" => Scenario {
            n: 256,
            t_end: 1.0,
            ..base(
                name,
                vec![Domain::PerturbedCircle {
                    center: [0.0, 0.0],
                    radius: 2.0,
                    delta: 0.0,
                    mode: 4,
                }],
                2.0 * SQRT_2,
            )
        },
        "linear_validation" => Scenario {
            n: 512,
            dt: 2e-3,
            t_end: 1.0,
            output_every: 5,
            ..base(
                name,
                vec![Domain::PerturbedCircle {
                    center: [0.0, 0.0],
                    radius: 2.0,
                    delta: 0.01,
                    mode: 4,
                }],
                10.0,
            )
        },
        "two_ellipse" => base(name, AXIS[..2].iter().map(|c| radial(*c, 1.5, 1.0)).collect(), 4.0),
        "three_ellipse" => base(name, AXIS[..3].iter().map(|c| radial(*c, 1.5, 1.0)).collect(), 4.0),
        "four_ellipse" => base(name, AXIS.iter().map(|c| radial(*c, 1.5, 1.0)).collect(), 4.0),
        "seven_ellipse_a" => {
            let mut d: Vec<Domain> = [[0.0, 0.0], [2.5, 0.0], [5.0, 0.0], [-2.5, 0.0], [-5.0, 0.0]]
                .iter()
                .map(|c| ellipse(*c, 1.5, 0.9, FRAC_PI_2))
                .collect();
            d.push(ellipse([0.0, 4.0], 1.5, 0.9, 0.0));
            d.push(ellipse([0.0, -4.0], 1.5, 0.9, 0.0));
            Scenario {
                t_end: 6.0,
                ..base(name, d, 6.0)
            }
        }
        "seven_ellipse_b" => {
            let mut d = vec![ellipse([0.0, 0.0], 2.0, 1.4, FRAC_PI_2)];
            d.extend(
                [[2.7, 0.0], [5.0, 0.0], [-2.7, 0.0], [-5.0, 0.0]]
                    .iter()
                    .map(|c| ellipse(*c, 1.6, 0.9, FRAC_PI_2)),
            );
            d.push(ellipse([0.0, 4.2], 2.7, 1.6, 0.0));
            d.push(ellipse([0.0, -4.2], 2.7, 1.6, 0.0));
            Scenario {
                dt: 2.5e-4,
                t_end: 6.0,
                output_every: 40,
                ..base(name, d, 6.0)
            }
        }
        "twelve_ellipse" => {
            let inner: [Point; 4] = [[3.75, 0.0], [0.0, 4.0], [-3.75, 0.0], [0.0, -4.0]];
            let outer: [Point; 8] = [
                [7.5, 0.0],
                [5.0, 5.0],
                [0.0, 7.0],
                [-5.0, 5.0],
                [-7.5, 0.0],
                [-5.0, -5.0],
                [0.0, -7.0],
                [5.0, -5.0],
            ];
            let mut d: Vec<Domain> = inner.iter().map(|c| tangential(*c, 1.5, 0.9)).collect();
            for (i, c) in outer.iter().enumerate() {
                // D6, D8, D10, D12 are the smaller ones
                let a = if i % 2 == 1 { 1.2 } else { 1.5 };
                d.push(tangential(*c, a, 0.9));
            }
            base(name, d, 9.0)
        }
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    Ok(s)
}

/// Full resolution and horizon: `N = 512`, `Δt = 5e-4`, `t_end = 25`.
pub fn full_scale(mut s: Scenario) -> Scenario {
    s.n = 512;
    if s.name != "seven_ellipse_b" {
        s.dt = 5e-4;
    }
    if s.name != "linear_validation" {
        s.t_end = 25.0;
        s.output_every = (0.05 / s.dt).round() as usize;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn all_presets_build() {
        for name in PRESETS {
            let s = preset(name).unwrap();
            let sys = s.build_system().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(sys.m(), s.domains.len());
        }
    }

    #[test]
    fn four_ellipse_preset() {
        let s = preset("four_ellipse").unwrap();
        assert_eq!(s.domains.len(), 4);
        assert_eq!(s.r_inf, 4.0);
        assert_eq!(s.sigma_value(), 0.47);
        let sys = s.build_system().unwrap();
        assert!((sys.total_interior_area() - 6.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn twelve_ellipse_preset() {
        let s = preset("twelve_ellipse").unwrap();
        assert_eq!(s.domains.len(), 12);
        for (i, d) in s.domains.iter().enumerate() {
            let Domain::Ellipse { a, b, .. } = *d else { panic!() };
            let small = [5, 7, 9, 11].contains(&i);
            assert_eq!((a, b), if small { (1.2, 0.9) } else { (1.5, 0.9) }, "D{}", i + 1);
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(preset("nine_ellipse"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn full_scale_settings() {
        let s = full_scale(preset("four_ellipse").unwrap());
        assert_eq!((s.n, s.dt, s.t_end), (512, 5e-4, 25.0));
        let b = full_scale(preset("seven_ellipse_b").unwrap());
        assert_eq!(b.dt, 2.5e-4);
    }
}
