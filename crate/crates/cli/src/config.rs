//! Run configuration read from TOML.
//!
//! Physics parameters have no defaults. Numerical knobs default to
//! `rel_tol = 1e-8`, `abs_tol = 1e-10` and `alpha = π/4`.

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use comb_thermo_core::bands::CombSpec;
use comb_thermo_core::scattering::{Defect, DeltaPrimeDefect, PoschlTellerDefect};
use comb_thermo_core::thermo::{Method, Tolerances};

use crate::error::CliError;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Option<PotentialConfig>,
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub field: FieldConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub method: MethodConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    DeltaPrime { w0: f64, w1: f64 },
    PoschlTeller { epsilon: f64 },
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub a: f64,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(default)]
    pub mass: f64,
}

/// Inclusive arithmetic progression `start, start + step, …, stop`.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StepRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

/// `points` equally spaced values from `start` to `stop` inclusive.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PointRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub temperatures: Option<Vec<f64>>,
    pub t_range: Option<StepRange>,
    pub omega_max: Option<f64>,
    pub max_bands: Option<usize>,
    pub frequencies: Option<StepRange>,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    RealAxis,
    #[default]
    Rotated,
    Matsubara,
    All,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    #[serde(default)]
    pub name: MethodName,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self { name: MethodName::default(), alpha: default_alpha() }
    }
}

fn default_alpha() -> f64 {
    FRAC_PI_4
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { rel_tol: default_rel_tol(), abs_tol: default_abs_tol() }
    }
}

fn default_rel_tol() -> f64 {
    1e-8
}

fn default_abs_tol() -> f64 {
    1e-10
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    FreeEnergy,
    Entropy,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub quantity: Quantity,
    pub omega: PointRange,
    pub gamma: PointRange,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

impl StepRange {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let StepRange { start, stop, step } = *self;
        if !(start.is_finite() && stop.is_finite() && step > 0.0 && step.is_finite()) {
            return Err(CliError::config("range needs finite start/stop and a positive step"));
        }
        if stop < start {
            return Err(CliError::config("range stop lies below start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| start + step * i as f64).collect())
    }
}

impl PointRange {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let PointRange { start, stop, points } = *self;
        if !(start.is_finite() && stop.is_finite()) || points == 0 {
            return Err(CliError::config("grid axis needs finite bounds and points >= 1"));
        }
        if points == 1 {
            return Ok(vec![start]);
        }
        let d = (stop - start) / (points - 1) as f64;
        Ok((0..points).map(|i| if i + 1 == points { stop } else { start + d * i as f64 }).collect())
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks shared by every subcommand.
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.lattice.a > 0.0) || !self.lattice.a.is_finite() {
            return Err(CliError::config("lattice.a must be finite and positive"));
        }
        if !(self.field.mass >= 0.0) || !self.field.mass.is_finite() {
            return Err(CliError::config("field.mass must be finite and non-negative"));
        }
        let t = self.tolerances;
        if !(t.rel_tol > 0.0 && t.abs_tol > 0.0) || !(t.rel_tol.is_finite() && t.abs_tol.is_finite())
        {
            return Err(CliError::config("tolerances must be finite and positive"));
        }
        let alpha = self.method.alpha;
        if !(alpha > 0.0 && alpha < std::f64::consts::FRAC_PI_2) {
            return Err(CliError::config("method.alpha must lie in (0, pi/2)"));
        }
        if self.field.mass > 0.0 && self.method.name != MethodName::Rotated {
            return Err(CliError::config("a massive field supports method.name = \"rotated\" only"));
        }
        if self.grid.temperatures.is_some() && self.grid.t_range.is_some() {
            return Err(CliError::config("give grid.temperatures or grid.t_range, not both"));
        }
        if let Some(ts) = &self.grid.temperatures {
            check_temperatures(ts)?;
        }
        if let Some(r) = &self.grid.t_range {
            check_temperatures(&r.values()?)?;
        }
        if let Some(p) = &self.potential {
            self.build_comb(p)?;
        }
        Ok(())
    }

    pub fn defect(p: &PotentialConfig) -> Result<Defect, CliError> {
        let d: Defect = match *p {
            PotentialConfig::DeltaPrime { w0, w1 } => DeltaPrimeDefect::new(w0, w1)?.into(),
            PotentialConfig::PoschlTeller { epsilon } => PoschlTellerDefect::new(epsilon)?.into(),
        };
        Ok(d)
    }

    fn build_comb(&self, p: &PotentialConfig) -> Result<CombSpec, CliError> {
        CombSpec::new(Self::defect(p)?, self.lattice.a).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn potential(&self) -> Result<PotentialConfig, CliError> {
        self.potential.ok_or_else(|| CliError::config("missing [potential] section"))
    }

    pub fn comb(&self) -> Result<CombSpec, CliError> {
        self.build_comb(&self.potential()?)
    }

    pub fn temperatures(&self) -> Result<Vec<f64>, CliError> {
        match (&self.grid.temperatures, &self.grid.t_range) {
            (Some(ts), None) => Ok(ts.clone()),
            (None, Some(r)) => r.values(),
            _ => Err(CliError::config("give grid.temperatures or grid.t_range")),
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances::new(self.tolerances.rel_tol, self.tolerances.abs_tol)
    }

    /// The single representation requested, `None` for `all`.
    pub fn single_method(&self) -> Option<Method> {
        match self.method.name {
            MethodName::RealAxis => Some(Method::RealAxis),
            MethodName::Rotated => Some(Method::Rotated { alpha: self.method.alpha }),
            MethodName::Matsubara => Some(Method::Matsubara),
            MethodName::All => None,
        }
    }

    pub fn require_single_method(&self, command: &str) -> Result<Method, CliError> {
        self.single_method()
            .ok_or_else(|| CliError::config(format!("method.name = \"all\" is not supported by {command}")))
    }
}

fn check_temperatures(ts: &[f64]) -> Result<(), CliError> {
    if ts.is_empty() {
        return Err(CliError::config("temperature list is empty"));
    }
    if let Some(t) = ts.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
        return Err(CliError::config(format!("temperature {t} must be finite and positive")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "
[potential]
kind = \"delta_prime\"
w0 = 3.0
w1 = 2.0

[lattice]
a = 1.0

[grid]
temperatures = [0.5, 1.0]
";

    #[test]
    fn parses_defaults() {
        let c = RunConfig::from_toml(BASE).unwrap();
        assert_eq!(c.potential, Some(PotentialConfig::DeltaPrime { w0: 3.0, w1: 2.0 }));
        assert_eq!(c.tolerances, ToleranceConfig { rel_tol: 1e-8, abs_tol: 1e-10 });
        assert_eq!(c.method.alpha, FRAC_PI_4);
        assert_eq!(c.single_method(), Some(Method::Rotated { alpha: FRAC_PI_4 }));
        assert_eq!(c.output.format, Format::Csv);
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = format!("{BASE}\n[output]\npath = \"x\"\ncolour = 1\n");
        assert!(RunConfig::from_toml(&bad).is_err());
        let bad = BASE.replace("w1 = 2.0", "w1 = 2.0\nw2 = 1.0");
        assert!(RunConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn physics_parameters_have_no_defaults() {
        assert!(RunConfig::from_toml(&BASE.replace("w1 = 2.0\n", "")).is_err());
        assert!(RunConfig::from_toml(&BASE.replace("a = 1.0\n", "")).is_err());
    }

    #[test]
    fn wide_poschl_teller_is_a_config_error() {
        let text = BASE.replace("kind = \"delta_prime\"\nw0 = 3.0\nw1 = 2.0", "kind = \"poschl_teller\"\nepsilon = 1.5");
        let e = RunConfig::from_toml(&text).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("epsilon <= a"), "{e}");
    }

    #[test]
    fn ranges_expand_inclusively() {
        let r = StepRange { start: 0.1, stop: 5.0, step: 0.1 };
        let v = r.values().unwrap();
        assert_eq!(v.len(), 50);
        assert!((v[49] - 5.0).abs() < 1e-12);
        let p = PointRange { start: -0.9, stop: 0.9, points: 20 };
        let v = p.values().unwrap();
        assert_eq!((v.len(), v[0], v[19]), (20, -0.9, 0.9));
    }

    #[test]
    fn rejects_bad_numbers() {
        assert!(RunConfig::from_toml(&BASE.replace("[0.5, 1.0]", "[0.5, -1.0]")).is_err());
        assert!(RunConfig::from_toml(&format!("{BASE}[method]\nalpha = 1.6\n")).is_err());
        assert!(RunConfig::from_toml(&format!("{BASE}[tolerances]\nrel_tol = 0.0\n")).is_err());
        assert!(RunConfig::from_toml(&BASE.replace("w0 = 3.0", "w0 = -1.0")).is_err());
    }
}
