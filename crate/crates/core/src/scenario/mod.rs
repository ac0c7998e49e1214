//! Run configuration, presets, the simulation loop and convergence studies.

mod presets;
mod runner;
mod studies;

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dynamics::{DynamicsConfig, DEFAULT_FILTER_TOL, DEFAULT_FLUX_TOL};
use crate::error::{Error, Result};
use crate::geometry::{resample_equal_arclength, ClosedShape, Ellipse, InterfaceSystem, PerturbedCircle, Point};
use crate::linear::compute_sigma;

pub use presets::{full_scale, preset, PRESETS};
pub use runner::{run, write_snapshot, GmresStats, RunOptions, RunReport, TimeSeriesRecord};
pub use studies::{
    convergence_space, convergence_time, linear_compare, marker_deviation, mode_amplitudes, write_convergence_csv,
    write_linear_compare_csv, ConvergenceRow, LinearCompareRow,
};

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    Ellipse {
        center: Point,
        a: f64,
        b: f64,
        #[serde(default)]
        angle: f64,
    },
    PerturbedCircle {
        center: Point,
        radius: f64,
        #[serde(default)]
        delta: f64,
        #[serde(default = "default_mode")]
        mode: u32,
    },
}

fn default_mode() -> u32 {
    4
}

impl Domain {
    fn shape(&self) -> Box<dyn ClosedShape> {
        match *self {
            Domain::Ellipse { center, a, b, angle } => Box::new(Ellipse { center, a, b, angle }),
            Domain::PerturbedCircle {
                center,
                radius,
                delta,
                mode,
            } => Box::new(PerturbedCircle {
                center,
                radius,
                delta,
                mode,
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Sigma {
    Value(f64),
    Auto(AutoTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl Default for Sigma {
    fn default() -> Self {
        Sigma::Auto(AutoTag::Auto)
    }
}

impl Sigma {
    pub fn value(self) -> f64 {
        match self {
            Sigma::Value(v) => v,
            Sigma::Auto(_) => compute_sigma(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(rename = "domain")]
    pub domains: Vec<Domain>,
    pub r_inf: f64,
    #[serde(default)]
    pub sigma: Sigma,
    #[serde(default = "default_n")]
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_gmres_tol")]
    pub gmres_tol: f64,
    #[serde(default = "default_filter_tol")]
    pub filter_tol: f64,
    #[serde(default = "default_flux_tol")]
    pub flux_tol: f64,
    #[serde(default = "default_output_every")]
    pub output_every: usize,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_n() -> usize {
    128
}
fn default_gmres_tol() -> f64 {
    1e-10
}
fn default_filter_tol() -> f64 {
    DEFAULT_FILTER_TOL
}
fn default_flux_tol() -> f64 {
    DEFAULT_FLUX_TOL
}
fn default_output_every() -> usize {
    10
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    /// A preset name or a path to a TOML file.
    pub fn load(source: &str) -> Result<Self> {
        match preset(source) {
            Ok(s) => Ok(s),
            Err(Error::UnknownPreset(_)) if Path::new(source).exists() => Self::from_toml(&std::fs::read_to_string(source)?),
            Err(e) => Err(e),
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::spectral::check_grid(self.n).map_err(|_| Error::Config(format!("n = {} is not a power of two >= 8", self.n)))?;
        let positive = [
            ("dt", self.dt),
            ("t_end", self.t_end),
            ("r_inf", self.r_inf),
            ("gmres_tol", self.gmres_tol),
            ("filter_tol", self.filter_tol),
            ("flux_tol", self.flux_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if let Sigma::Value(v) = self.sigma {
            if !(v > 0.0) {
                return Err(Error::Config(format!("sigma must be positive, got {v}")));
            }
        }
        if self.output_every == 0 {
            return Err(Error::Config("output_every must be at least 1".into()));
        }
        if self.domains.is_empty() {
            return Err(Error::Config("at least one [[domain]] block is required".into()));
        }
        Ok(())
    }

    pub fn sigma_value(&self) -> f64 {
        self.sigma.value()
    }

    /// Resamples every domain and checks the layout.
    pub fn build_system(&self) -> Result<InterfaceSystem> {
        self.validate()?;
        let curves = self
            .domains
            .iter()
            .map(|d| resample_equal_arclength(d.shape().as_ref(), self.n))
            .collect::<Result<Vec<_>>>()?;
        InterfaceSystem::new(curves, self.r_inf, self.sigma_value())
    }

    pub fn dynamics_config(&self) -> DynamicsConfig {
        let mut cfg = DynamicsConfig::new(self.dt);
        cfg.filter_tol = self.filter_tol;
        cfg.flux_tol = self.flux_tol;
        cfg.solver.tol = self.gmres_tol;
        cfg
    }

    /// Number of steps needed to reach `t_end`.
    pub fn step_count(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FOUR: &str = r#"
        r_inf = 4.0
        sigma = 0.47
        n = 64
        dt = 1e-3
        t_end = 0.01
        output_every = 2

        [[domain]]
        kind = "ellipse"
        center = [2.0, 0.0]
        a = 1.5
        b = 1.0

        [[domain]]
        kind = "ellipse"
        center = [-2.0, 0.0]
        a = 1.5
        b = 1.0
        angle = 3.141592653589793
    "#;

    #[test]
    fn parses_toml() {
        let s = Scenario::from_toml(FOUR).unwrap();
        assert_eq!(s.domains.len(), 2);
        assert_eq!(s.sigma, Sigma::Value(0.47));
        assert_eq!(s.flux_tol, 1e-3);
        assert_eq!(s.gmres_tol, 1e-10);
        assert!(s.out_dir.is_none());
        let sys = s.build_system().unwrap();
        assert_eq!(sys.m(), 2);
        assert_eq!(s.step_count(), 10);
    }

    #[test]
    fn sigma_auto() {
        let text = FOUR.replace("sigma = 0.47", "sigma = \"auto\"");
        let s = Scenario::from_toml(&text).unwrap();
        assert!((s.sigma_value() - 2f64.sqrt() / 3.0).abs() < 1e-12);
        let missing = FOUR.replace("sigma = 0.47", "");
        assert_eq!(Scenario::from_toml(&missing).unwrap().sigma, Sigma::default());
        assert!(Scenario::from_toml(&FOUR.replace("sigma = 0.47", "sigma = \"big\"")).is_err());
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = FOUR.replace("n = 64", "n = 64\nspeed = 3");
        assert!(matches!(Scenario::from_toml(&bad), Err(Error::Toml(_))));
        let bad_domain = FOUR.replace("b = 1.0\n\n", "b = 1.0\n        radius = 2.0\n\n");
        assert!(Scenario::from_toml(&bad_domain).is_err());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(Scenario::from_toml(&FOUR.replace("n = 64", "n = 100")), Err(Error::Config(_))));
        assert!(matches!(Scenario::from_toml(&FOUR.replace("dt = 1e-3", "dt = -1.0")), Err(Error::Config(_))));
        assert!(matches!(
            Scenario::from_toml(&FOUR.replace("output_every = 2", "output_every = 0")),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn outside_disk_is_rejected() {
        let text = FOUR.replace("center = [2.0, 0.0]\n        a = 1.5", "center = [5.0, 0.0]\n        a = 2.0");
        let err = Scenario::from_toml(&text).unwrap().build_system().unwrap_err();
        assert!(err.to_string().contains("domain 1"), "{err}");
    }

    #[test]
    fn overlap_names_pair() {
        let text = FOUR.replace("[-2.0, 0.0]", "[0.0, 0.5]");
        let err = Scenario::from_toml(&text).unwrap().build_system().unwrap_err();
        assert!(err.to_string().contains("domains 1 and 2"), "{err}");
    }
}
