//! Experiment configuration. TOML is canonical; JSON is accepted.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::{LandauParams, Potential};
use crate::quad::{geomspace, QuadratureSpec};
use crate::regvar::{ConjugateOptions, SlowVarFn};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

/// A list of points, or `n` points from `lo` to `hi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Points(Vec<f64>),
    Range {
        lo: f64,
        hi: f64,
        n: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

impl Grid {
    pub fn log(lo: f64, hi: f64, n: usize) -> Self {
        Grid::Range {
            lo,
            hi,
            n,
            spacing: Spacing::Log,
        }
    }

    /// The points, checked to be finite and strictly increasing.
    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match *self {
            Grid::Points(ref v) => v.clone(),
            Grid::Range { lo, hi, n, spacing } => {
                if n == 0 || !(lo <= hi) || (n > 1 && lo == hi) {
                    return Err(Error::Config(format!(
                        "bad grid range [{lo}, {hi}] with {n} points"
                    )));
                }
                match spacing {
                    Spacing::Log if lo <= 0.0 => {
                        return Err(Error::Config(format!("log grid needs lo > 0, got {lo}")));
                    }
                    Spacing::Log => geomspace(lo, hi, n),
                    Spacing::Linear if n == 1 => vec![lo],
                    Spacing::Linear => (0..n)
                        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                        .collect(),
                }
            }
        };
        if pts.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        if pts.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("grid contains non-finite values".into()));
        }
        if pts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("grid must be strictly increasing".into()));
        }
        Ok(pts)
    }

    /// Points, which must all be positive.
    pub fn positive_points(&self) -> Result<Vec<f64>> {
        let p = self.points()?;
        if p[0] <= 0.0 {
            return Err(Error::Config(format!(
                "grid values must be positive, got {}",
                p[0]
            )));
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictSection {
    /// Energies above `ε₀` for the `{E, log_tail}` table.
    pub e_grid: Grid,
    /// Use the sharpened upper bound for definite Gaussian decay.
    pub sharp: bool,
    /// Set to false to declare the sub-Gaussian decay irregular.
    pub regular: bool,
    /// Times for the non-normative lower-bound table.
    pub conjecture_t_grid: Grid,
}

impl Default for PredictSection {
    fn default() -> Self {
        Self {
            e_grid: Grid::log(1e-12, 1e-1, 23),
            sharp: false,
            regular: true,
            conjecture_t_grid: Grid::log(1e-2, 1e6, 33),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsSection {
    /// Laplace times `t`.
    pub t_grid: Grid,
    pub table_points: usize,
}

impl Default for BoundsSection {
    fn default() -> Self {
        Self {
            t_grid: Grid::log(1e-2, 1e4, 25),
            table_points: crate::laplace::DEFAULT_TABLE_POINTS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub n_samples: usize,
    /// Sampling disk radius; chosen by the truncation rule when absent.
    pub radius: Option<f64>,
    /// Expected contribution of excluded impurities to `V(0)` in the truncation rule.
    pub delta: f64,
    pub mean_field_tail: bool,
    pub e_grid: Grid,
    pub t_grid: Grid,
    /// Energy window of the tail-exponent fit; by default the energies where `N_c`
    /// has relative standard error ≤ 10% and is at most 0.5.
    pub fit_window: Option<[f64; 2]>,
    /// Weyl probe at `weyl_factor · ρ∫U`.
    pub weyl_factor: f64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            radius: None,
            delta: 1e-6,
            mean_field_tail: false,
            e_grid: Grid::log(1e-2, 1e2, 41),
            t_grid: Grid::log(1e-3, 10.0, 9),
            fit_window: None,
            weyl_factor: 100.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TauberSection {
    pub gamma: f64,
    pub f: SlowVarFn,
    pub eta: f64,
    pub t_grid: Grid,
    pub tolerance: f64,
}

impl Default for TauberSection {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            f: SlowVarFn::Constant { c: 0.25 },
            eta: 0.0,
            t_grid: Grid::log(1e4, 1e6, 5),
            tolerance: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    /// Any of `abfall`, `faltung`, `conjugate`, `potter`, `staircase`, `conventions`.
    pub suites: Vec<String>,
    /// `ln t` probes of the abfall limit; only those with `F(t)² ≥ abfall_min_f_squared` count.
    pub abfall_ln_t: Vec<f64>,
    pub abfall_min_f_squared: f64,
    /// Defaults to 1e−6 for algebraic decay, 0.15 otherwise.
    pub abfall_tolerance: Option<f64>,
    pub faltung_model: Potential,
    pub faltung_radii: Vec<f64>,
    pub faltung_tolerances: Vec<f64>,
    pub conjugate_probe: f64,
    pub conjugate_tolerance: f64,
    pub conjugate_betas: Vec<f64>,
    /// Residual allowed for the fixed-point conjugate of `exp((log t)^{1/4})`.
    pub fixed_point_tolerance: f64,
    pub potter_a: f64,
    pub potter_delta: f64,
    /// Every ordered pair of points is tested.
    pub potter_grid: Grid,
    pub staircase_t_grid: Grid,
    pub staircase_tolerance: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            suites: [
                "abfall",
                "faltung",
                "conjugate",
                "potter",
                "staircase",
                "conventions",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            abfall_ln_t: vec![10.0, 20.0, 40.0, 80.0, 160.0],
            abfall_min_f_squared: 1e3,
            abfall_tolerance: None,
            faltung_model: Potential::StretchedGaussian {
                g: 1.0,
                lambda: 1.0,
                beta: 1.0,
            },
            faltung_radii: vec![20.0, 40.0],
            faltung_tolerances: vec![0.15, 0.08],
            conjugate_probe: 1e12,
            conjugate_tolerance: 0.1,
            conjugate_betas: vec![1.0, -1.0, 2.0, -2.0],
            fixed_point_tolerance: 1e-3,
            potter_a: 2.0,
            potter_delta: 0.1,
            potter_grid: Grid::log(1e6, 1e12, 7),
            staircase_t_grid: Grid::log(1e-2, 1e2, 9),
            staircase_tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegvarSection {
    pub f: SlowVarFn,
    pub probes: Vec<f64>,
    pub tolerance: f64,
    pub conjugate: ConjugateOptions,
}

impl Default for RegvarSection {
    fn default() -> Self {
        Self {
            f: SlowVarFn::IterLog {
                a0: 1.0,
                exps: vec![1.0],
            },
            probes: vec![1e30, 1e60, 1e100],
            tolerance: 0.1,
            conjugate: ConjugateOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub rho: f64,
    pub potential: Option<Potential>,
    pub landau: LandauParams,
    pub quadrature: QuadratureSpec,
    pub predict: PredictSection,
    pub bounds: BoundsSection,
    pub simulate: SimulateSection,
    pub tauber: TauberSection,
    pub verify: VerifySection,
    pub regvar: RegvarSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            rho: 1.0,
            potential: None,
            landau: LandauParams::default(),
            quadrature: QuadratureSpec::default(),
            predict: PredictSection::default(),
            bounds: BoundsSection::default(),
            simulate: SimulateSection::default(),
            tauber: TauberSection::default(),
            verify: VerifySection::default(),
            regvar: RegvarSection::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Config(format!("JSON: {e}")))?
        } else {
            toml::from_str(text).map_err(|e| Error::Config(format!("TOML: {e}")))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |e: Error| match e {
            Error::Config(s) => Error::Config(s),
            other => Error::Config(other.to_string()),
        };
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::Config(format!(
                "rho must be positive, got {}",
                self.rho
            )));
        }
        self.landau.validate().map_err(cfg)?;
        self.quadrature.validate().map_err(cfg)?;
        if let Some(p) = &self.potential {
            p.validate().map_err(cfg)?;
        }
        self.predict.e_grid.positive_points()?;
        self.predict.conjecture_t_grid.positive_points()?;
        self.bounds.t_grid.positive_points()?;
        self.simulate.e_grid.positive_points()?;
        self.simulate.t_grid.positive_points()?;
        self.tauber.t_grid.positive_points()?;
        self.verify.staircase_t_grid.positive_points()?;
        self.verify.potter_grid.positive_points()?;
        if self.simulate.n_samples == 0 {
            return Err(Error::Config("simulate.n_samples must be positive".into()));
        }
        if let Some(r) = self.simulate.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Config(format!(
                    "simulate.radius must be positive, got {r}"
                )));
            }
        }
        if let Some([lo, hi]) = self.simulate.fit_window {
            if !(lo > 0.0 && lo < hi) {
                return Err(Error::Config(format!(
                    "fit window must satisfy 0 < lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        if !(self.simulate.delta > 0.0) {
            return Err(Error::Config("simulate.delta must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.tauber.gamma) {
            return Err(Error::Config(format!(
                "tauber.gamma must lie in [0, 1), got {}",
                self.tauber.gamma
            )));
        }
        if self.verify.faltung_radii.len() != self.verify.faltung_tolerances.len() {
            return Err(Error::Config(
                "verify.faltung_radii and faltung_tolerances differ in length".into(),
            ));
        }
        if self.bounds.table_points < 4 {
            return Err(Error::Config(
                "bounds.table_points must be at least 4".into(),
            ));
        }
        const SUITES: [&str; 6] = [
            "abfall",
            "faltung",
            "conjugate",
            "potter",
            "staircase",
            "conventions",
        ];
        if let Some(s) = self
            .verify
            .suites
            .iter()
            .find(|s| !SUITES.contains(&s.as_str()))
        {
            return Err(Error::Config(format!("unknown verify suite {s:?}")));
        }
        self.verify.faltung_model.validate().map_err(cfg)?;
        Ok(())
    }

    pub fn require_potential(&self) -> Result<&Potential> {
        self.potential
            .as_ref()
            .ok_or_else(|| Error::Config("[potential] section is required".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_roundtrip() {
        let text = r#"
            seed = 7
            rho = 2.0
            [potential]
            family = "algebraic"
            g0 = 1.0
            alpha = 3.0
            [bounds]
            t_grid = { lo = 0.1, hi = 10.0, n = 3 }
            [tauber]
            gamma = 0.5
            f = { kind = "const", c = 0.25 }
            t_grid = [1e4, 1e5]
        "#;
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.bounds.t_grid.points().unwrap().len(), 3);
        assert_eq!(c.tauber.f, SlowVarFn::Constant { c: 0.25 });
        let again = ExperimentConfig::parse(&c.to_toml().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn json_accepted() {
        let c = ExperimentConfig::parse(
            r#"{"rho": 3.0, "potential": {"family": "gaussian", "g": 1.0, "lambda": 2.0}}"#,
        )
        .unwrap();
        assert_eq!(c.rho, 3.0);
        assert!(matches!(c.potential, Some(Potential::Gaussian { .. })));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse("rho = -1.0").is_err());
        assert!(ExperimentConfig::parse("bogus = 1").is_err());
        assert!(ExperimentConfig::parse("[bounds]\nt_grid = [3.0, 1.0]").is_err());
        assert!(ExperimentConfig::parse("[verify]\nsuites = [\"nope\"]").is_err());
        assert!(ExperimentConfig::parse(
            "[potential]\nfamily = \"gaussian\"\ng = 1.0\nlambda = -1.0"
        )
        .is_err());
    }

    #[test]
    fn linear_grid() {
        let g = Grid::Range {
            lo: 0.0,
            hi: 1.0,
            n: 5,
            spacing: Spacing::Linear,
        };
        assert_eq!(g.points().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(g.positive_points().is_err());
    }
}
