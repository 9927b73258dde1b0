//! Landau parameters and the catalogue of single-impurity potentials.

use std::f64::consts::{E, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::profile::{radial_moment, RadialProfile};
use crate::quad::{Estimate, QuadratureSpec};
use crate::regvar::{RegVarFn, SlowVarFn};
use crate::roots::illinois;
use crate::special::gamma;

/// Physical constants of the free Landau Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandauParams {
    pub mass: f64,
    pub charge: f64,
    pub field: f64,
    pub hbar: f64,
}

impl Default for LandauParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            charge: 1.0,
            field: 1.0,
            hbar: 1.0,
        }
    }
}

impl LandauParams {
    pub fn new(mass: f64, charge: f64, field: f64, hbar: f64) -> Result<Self> {
        let p = Self {
            mass,
            charge,
            field,
            hbar,
        };
        p.validate()?;
        Ok(p)
    }

    /// Units `m = ħ = |Q| = 1` with the field chosen to give magnetic length `ell`.
    pub fn with_magnetic_length(ell: f64) -> Result<Self> {
        ensure(ell > 0.0 && ell.is_finite(), || {
            format!("magnetic length must be positive, got {ell}")
        })?;
        Self::new(1.0, 1.0, 1.0 / (ell * ell), 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("charge", self.charge),
            ("field", self.field),
            ("hbar", self.hbar),
        ] {
            ensure(v > 0.0 && v.is_finite(), || {
                format!("{name} must be positive and finite, got {v}")
            })?;
        }
        Ok(())
    }

    /// `ℓ = sqrt(ħ / |Q| B)`
    pub fn magnetic_length(&self) -> f64 {
        (self.hbar / (self.charge * self.field)).sqrt()
    }

    /// `ε₀ = ħ |Q| B / 2m`
    pub fn lowest_level(&self) -> f64 {
        self.hbar * self.charge * self.field / (2.0 * self.mass)
    }

    /// `1 / (2π ℓ²)`
    pub fn degeneracy_per_area(&self) -> f64 {
        self.charge * self.field / (2.0 * PI * self.hbar)
    }

    /// `m / (2π ħ²)`, the free two-dimensional density of states.
    pub fn free_dos(&self) -> f64 {
        self.mass / (2.0 * PI * self.hbar * self.hbar)
    }
}

/// Default ceiling of the algebraic families, relative to `g0`.
pub const DEFAULT_CORE_CAP_FACTOR: f64 = 1e6;

/// A radial single-impurity potential.
///
/// The families are the leading long-distance forms, without correction terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    /// `g` on the disk of radius `radius`, zero outside.
    CompactDisk { g: f64, radius: f64 },
    /// `g exp(-r²/λ²)`
    Gaussian { g: f64, lambda: f64 },
    /// `g exp(-r² / (λ² log(r/μ)))` for `r > eμ`, constant inside.
    LogCorrectedGaussian { g: f64, lambda: f64, mu: f64 },
    /// `g exp(-(r/λ)^β)`, `0 < β < 2`
    StretchedGaussian { g: f64, lambda: f64, beta: f64 },
    /// `min(g0 r^{-α}, core_cap)`, `α > 2`
    Algebraic {
        g0: f64,
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        core_cap: Option<f64>,
    },
    /// `min(g0 r^{-α} |log(r/μ)|, core_cap)`, `α > 2`
    AlgebraicLog {
        g0: f64,
        mu: f64,
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        core_cap: Option<f64>,
    },
}

/// Classification by `limsup log U(x) / |x|²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum DecayClass {
    SuperGaussian,
    Gaussian { lambda: f64 },
    SubGaussian,
}

/// `U(x) ≈ 1 / F^{-1}(|x|)` with `F` regularly varying of index `1/α`.
#[derive(Clone, Debug)]
pub struct RegularDecayDescriptor {
    pub f: RegVarFn,
    /// `α ∈ (2, ∞]`; `f64::INFINITY` for the boundary case.
    pub alpha: f64,
}

impl RegularDecayDescriptor {
    pub fn new(f: RegVarFn, alpha: f64) -> Result<Self> {
        ensure(alpha > 2.0, || format!("alpha must exceed 2, got {alpha}"))?;
        let want = if alpha.is_infinite() {
            0.0
        } else {
            1.0 / alpha
        };
        ensure((f.index() - want).abs() < 1e-12, || {
            format!("index of F is {} but 1/alpha = {want}", f.index())
        })?;
        ensure(f.slow().is_some(), || {
            "F must be regularly varying with finite index".into()
        })?;
        Ok(Self { f, alpha })
    }

    pub fn alpha_is_infinite(&self) -> bool {
        self.alpha.is_infinite()
    }

    /// `π Γ((α−2)/α)`, which is `π` for `α = ∞`.
    pub fn limit_constant(&self) -> f64 {
        if self.alpha_is_infinite() {
            PI
        } else {
            PI * gamma((self.alpha - 2.0) / self.alpha).expect("alpha > 2")
        }
    }

    /// `ln F(t)` from `ln t`.
    pub fn ln_f_ln(&self, ln_t: f64) -> Result<f64> {
        self.f.ln_eval_ln(ln_t)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    ensure(v > 0.0 && v.is_finite(), || {
        format!("{name} must be positive and finite, got {v}")
    })
}

impl Potential {
    pub fn compact_disk(g: f64, radius: f64) -> Result<Self> {
        Self::CompactDisk { g, radius }.validated()
    }
    pub fn gaussian(g: f64, lambda: f64) -> Result<Self> {
        Self::Gaussian { g, lambda }.validated()
    }
    pub fn log_corrected_gaussian(g: f64, lambda: f64, mu: f64) -> Result<Self> {
        Self::LogCorrectedGaussian { g, lambda, mu }.validated()
    }
    pub fn stretched_gaussian(g: f64, lambda: f64, beta: f64) -> Result<Self> {
        Self::StretchedGaussian { g, lambda, beta }.validated()
    }
    pub fn algebraic(g0: f64, alpha: f64) -> Result<Self> {
        Self::Algebraic {
            g0,
            alpha,
            core_cap: None,
        }
        .validated()
    }
    pub fn algebraic_log(g0: f64, mu: f64, alpha: f64) -> Result<Self> {
        Self::AlgebraicLog {
            g0,
            mu,
            alpha,
            core_cap: None,
        }
        .validated()
    }

    /// Replaces the core cap of an algebraic family.
    pub fn with_core_cap(self, cap: f64) -> Result<Self> {
        match self {
            Self::Algebraic { g0, alpha, .. } => Self::Algebraic {
                g0,
                alpha,
                core_cap: Some(cap),
            }
            .validated(),
            Self::AlgebraicLog { g0, mu, alpha, .. } => Self::AlgebraicLog {
                g0,
                mu,
                alpha,
                core_cap: Some(cap),
            }
            .validated(),
            other => Err(Error::InvalidParameter(format!(
                "{} has no core cap",
                other.family_name()
            ))),
        }
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::CompactDisk { g, radius } => {
                positive("g", g)?;
                positive("radius", radius)
            }
            Self::Gaussian { g, lambda } => {
                positive("g", g)?;
                positive("lambda", lambda)
            }
            Self::LogCorrectedGaussian { g, lambda, mu } => {
                positive("g", g)?;
                positive("lambda", lambda)?;
                positive("mu", mu)
            }
            Self::StretchedGaussian { g, lambda, beta } => {
                positive("g", g)?;
                positive("lambda", lambda)?;
                ensure(beta > 0.0 && beta < 2.0, || {
                    format!("beta must lie in (0, 2), got {beta}")
                })
            }
            Self::Algebraic {
                g0,
                alpha,
                core_cap,
            } => {
                positive("g0", g0)?;
                ensure(alpha > 2.0 && alpha.is_finite(), || {
                    format!("alpha must exceed 2, got {alpha}")
                })?;
                if let Some(c) = core_cap {
                    positive("core_cap", c)?;
                }
                Ok(())
            }
            Self::AlgebraicLog {
                g0,
                mu,
                alpha,
                core_cap,
            } => {
                positive("g0", g0)?;
                positive("mu", mu)?;
                ensure(alpha > 2.0 && alpha.is_finite(), || {
                    format!("alpha must exceed 2, got {alpha}")
                })?;
                if let Some(c) = core_cap {
                    positive("core_cap", c)?;
                }
                Ok(())
            }
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::CompactDisk { .. } => "compact_disk",
            Self::Gaussian { .. } => "gaussian",
            Self::LogCorrectedGaussian { .. } => "log_corrected_gaussian",
            Self::StretchedGaussian { .. } => "stretched_gaussian",
            Self::Algebraic { .. } => "algebraic",
            Self::AlgebraicLog { .. } => "algebraic_log",
        }
    }

    /// The effective ceiling of an algebraic family.
    pub fn core_cap(&self) -> Option<f64> {
        match *self {
            Self::Algebraic { g0, core_cap, .. } | Self::AlgebraicLog { g0, core_cap, .. } => {
                Some(core_cap.unwrap_or(DEFAULT_CORE_CAP_FACTOR * g0))
            }
            _ => None,
        }
    }

    /// Radius inside which the core cap is active.
    pub fn cap_radius(&self) -> Option<f64> {
        let cap = self.core_cap()?;
        match *self {
            Self::Algebraic { g0, alpha, .. } => Some((g0 / cap).powf(1.0 / alpha)),
            Self::AlgebraicLog { g0, mu, alpha, .. } => {
                // g0 r^{-α} log(μ/r) is decreasing on (0, μ) from +∞ to 0
                let h = |s: f64| {
                    let r = mu * (-s).exp();
                    g0.ln() - alpha * r.ln() + s.ln() - cap.ln()
                };
                let mut hi = 1.0;
                while h(hi) < 0.0 && hi < 1e6 {
                    hi *= 2.0;
                }
                let s = illinois(h, 1e-300, hi, 1e-14).ok()?;
                Some(mu * (-s).exp())
            }
            _ => None,
        }
    }

    /// `U(r)`.
    pub fn evaluate(&self, r: f64) -> f64 {
        match *self {
            Self::CompactDisk { g, radius } => {
                if r <= radius {
                    g
                } else {
                    0.0
                }
            }
            Self::Algebraic { g0, alpha, .. } => {
                let cap = self.core_cap().unwrap();
                if r <= 0.0 {
                    cap
                } else {
                    (g0 * r.powf(-alpha)).min(cap)
                }
            }
            Self::AlgebraicLog { g0, mu, alpha, .. } => {
                let cap = self.core_cap().unwrap();
                if r <= 0.0 {
                    cap
                } else {
                    (g0 * r.powf(-alpha) * (r / mu).ln().abs()).min(cap)
                }
            }
            _ => self.ln_value(r).exp(),
        }
    }

    fn ln_value(&self, r: f64) -> f64 {
        match *self {
            Self::CompactDisk { g, radius } => {
                if r <= radius {
                    g.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Self::Gaussian { g, lambda } => g.ln() - (r / lambda).powi(2),
            Self::LogCorrectedGaussian { g, lambda, mu } => {
                let rr = r.max(E * mu);
                g.ln() - rr * rr / (lambda * lambda * (rr / mu).ln())
            }
            Self::StretchedGaussian { g, lambda, beta } => g.ln() - (r / lambda).powf(beta),
            Self::Algebraic { g0, alpha, .. } => {
                let cap = self.core_cap().unwrap();
                if r <= 0.0 {
                    cap.ln()
                } else {
                    (g0.ln() - alpha * r.ln()).min(cap.ln())
                }
            }
            Self::AlgebraicLog { g0, mu, alpha, .. } => {
                let cap = self.core_cap().unwrap();
                if r <= 0.0 {
                    return cap.ln();
                }
                let l = (r / mu).ln().abs();
                (g0.ln() - alpha * r.ln() + l.ln()).min(cap.ln())
            }
        }
    }

    pub fn classify_decay(&self) -> DecayClass {
        match *self {
            Self::CompactDisk { .. } => DecayClass::SuperGaussian,
            Self::Gaussian { lambda, .. } => DecayClass::Gaussian { lambda },
            _ => DecayClass::SubGaussian,
        }
    }

    /// The regular `(F, α)` descriptor of the sub-Gaussian families.
    pub fn regular_decay_of(&self) -> Option<RegularDecayDescriptor> {
        let built = match *self {
            Self::CompactDisk { .. } | Self::Gaussian { .. } => return None,
            // λ sqrt(log t · log sqrt(log t)) = (λ/√2) (log t)^{1/2} (log log t)^{1/2}
            Self::LogCorrectedGaussian { lambda, .. } => {
                SlowVarFn::iter_log(lambda / SQRT_2, vec![0.5, 0.5])
                    .and_then(|s| RegVarFn::regular(0.0, s))
                    .and_then(|f| RegularDecayDescriptor::new(f, f64::INFINITY))
            }
            Self::StretchedGaussian { lambda, beta, .. } => {
                SlowVarFn::iter_log(lambda, vec![1.0 / beta])
                    .and_then(|s| RegVarFn::regular(0.0, s))
                    .and_then(|f| RegularDecayDescriptor::new(f, f64::INFINITY))
            }
            Self::Algebraic { g0, alpha, .. } => SlowVarFn::constant(g0.powf(1.0 / alpha))
                .and_then(|s| RegVarFn::regular(1.0 / alpha, s))
                .and_then(|f| RegularDecayDescriptor::new(f, alpha)),
            Self::AlgebraicLog { g0, alpha, .. } => {
                SlowVarFn::iter_log((g0 / alpha).powf(1.0 / alpha), vec![1.0 / alpha])
                    .and_then(|s| RegVarFn::regular(1.0 / alpha, s))
                    .and_then(|f| RegularDecayDescriptor::new(f, alpha))
            }
        };
        Some(built.expect("catalogue descriptors are well formed"))
    }

    /// `∫ U d²x`, closed form where available.
    pub fn integral(&self, spec: &QuadratureSpec) -> Result<Estimate> {
        let exact = |value: f64| Ok(Estimate { value, error: 0.0 });
        match *self {
            Self::CompactDisk { g, radius } => exact(g * PI * radius * radius),
            Self::Gaussian { g, lambda } => exact(g * PI * lambda * lambda),
            Self::StretchedGaussian { g, lambda, beta } => {
                exact(2.0 * PI * g * lambda * lambda * gamma(2.0 / beta)? / beta)
            }
            Self::Algebraic { .. } => exact(self.tail_mass(0.0).unwrap()),
            _ => radial_moment(self, 1, spec),
        }
    }

    /// `∫ U² d²x`, closed form where available.
    pub fn integral_of_square(&self, spec: &QuadratureSpec) -> Result<Estimate> {
        let exact = |value: f64| Ok(Estimate { value, error: 0.0 });
        match *self {
            Self::CompactDisk { g, radius } => exact(g * g * PI * radius * radius),
            Self::Gaussian { g, lambda } => exact(g * g * PI * lambda * lambda / 2.0),
            Self::StretchedGaussian { g, lambda, beta } => {
                let l2 = lambda * 2f64.powf(-1.0 / beta);
                exact(2.0 * PI * g * g * l2 * l2 * gamma(2.0 / beta)? / beta)
            }
            Self::Algebraic { g0, alpha, .. } => {
                let cap = self.core_cap().unwrap();
                let rc = self.cap_radius().unwrap();
                exact(
                    cap * cap * PI * rc * rc
                        + 2.0 * PI * g0 * g0 * rc.powf(2.0 - 2.0 * alpha) / (2.0 * alpha - 2.0),
                )
            }
            _ => radial_moment(self, 2, spec),
        }
    }
}

impl RadialProfile for Potential {
    fn ln_eval(&self, r: f64) -> f64 {
        self.ln_value(r)
    }

    fn eval(&self, r: f64) -> f64 {
        self.evaluate(r)
    }

    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Self::CompactDisk { radius, .. } => vec![radius],
            Self::LogCorrectedGaussian { mu, .. } => vec![E * mu],
            Self::Algebraic { .. } => self.cap_radius().into_iter().collect(),
            Self::AlgebraicLog { mu, alpha, .. } => {
                let mut v: Vec<f64> = self.cap_radius().into_iter().collect();
                v.push(mu);
                v.push(mu * (1.0 / alpha).exp());
                v
            }
            _ => Vec::new(),
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            Self::CompactDisk { radius, .. } => radius,
            Self::Gaussian { lambda, .. } | Self::StretchedGaussian { lambda, .. } => lambda,
            Self::LogCorrectedGaussian { lambda, mu, .. } => lambda.max(E * mu),
            Self::Algebraic { g0, alpha, .. } => g0.powf(1.0 / alpha),
            Self::AlgebraicLog { g0, mu, alpha, .. } => {
                g0.powf(1.0 / alpha).max(mu * (1.0 / alpha).exp())
            }
        }
    }

    fn monotone_from(&self) -> f64 {
        match *self {
            Self::AlgebraicLog { mu, alpha, .. } => mu * (1.0 / alpha).exp(),
            _ => 0.0,
        }
    }

    fn tail_mass(&self, r: f64) -> Option<f64> {
        let r = r.max(0.0);
        match *self {
            Self::CompactDisk { g, radius } => Some(g * PI * (radius * radius - r * r).max(0.0)),
            Self::Gaussian { g, lambda } => {
                Some(g * PI * lambda * lambda * (-(r / lambda).powi(2)).exp())
            }
            Self::StretchedGaussian {
                g,
                lambda,
                beta: 1.0,
            } => {
                let x = r / lambda;
                Some(2.0 * PI * g * lambda * lambda * (-x).exp() * (1.0 + x))
            }
            Self::Algebraic { g0, alpha, .. } => {
                let cap = self.core_cap().unwrap();
                let rc = self.cap_radius().unwrap();
                let outer = |s: f64| 2.0 * PI * g0 * s.powf(2.0 - alpha) / (alpha - 2.0);
                Some(if r >= rc {
                    outer(r)
                } else {
                    cap * PI * (rc * rc - r * r) + outer(rc)
                })
            }
            Self::AlgebraicLog { g0, mu, alpha, .. } if r >= mu => {
                let k = alpha - 2.0;
                Some(2.0 * PI * g0 * r.powf(-k) * ((r / mu).ln() / k + 1.0 / (k * k)))
            }
            _ => None,
        }
    }
}

/// `max_r |F(1/U(r))/r − 1|`, evaluated in the log domain; infinite where `U(r) = 0`.
pub fn check_regular_decay(
    model: &Potential,
    descriptor: &RegularDecayDescriptor,
    radii: &[f64],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &r in radii {
        ensure(r > 0.0, || format!("radii must be positive, got {r}"))?;
        let ln_u = model.ln_eval(r);
        if ln_u == f64::NEG_INFINITY {
            return Ok(f64::INFINITY);
        }
        let ln_f = descriptor.ln_f_ln(-ln_u)?;
        worst = worst.max((ln_f - r.ln()).exp_m1().abs());
    }
    Ok(worst)
}

/// Per-radius deviations `|F(1/U(r))/r − 1|`.
pub fn regular_decay_deviations(
    model: &Potential,
    descriptor: &RegularDecayDescriptor,
    radii: &[f64],
) -> Result<Vec<f64>> {
    radii
        .iter()
        .map(|&r| check_regular_decay(model, descriptor, &[r]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::tail_mass as numeric_tail_mass;
    use crate::quad::QuadratureSpec;
    use proptest::prelude::*;

    fn catalogue() -> Vec<Potential> {
        vec![
            Potential::compact_disk(1.5, 2.0).unwrap(),
            Potential::gaussian(1.0, 1.0).unwrap(),
            Potential::log_corrected_gaussian(1.0, 1.0, 1.0).unwrap(),
            Potential::stretched_gaussian(1.0, 1.0, 1.0).unwrap(),
            Potential::stretched_gaussian(2.0, 0.7, 1.5).unwrap(),
            Potential::algebraic(1.0, 3.0).unwrap(),
            Potential::algebraic(2.0, 4.0).unwrap(),
            Potential::algebraic_log(1.0, 1.0, 3.0).unwrap(),
        ]
    }

    #[test]
    fn landau_identities() {
        let p = LandauParams::new(0.7, 1.3, 2.1, 0.9).unwrap();
        let ell = p.magnetic_length();
        assert!((p.lowest_level() - p.hbar * p.hbar / (2.0 * p.mass * ell * ell)).abs() < 1e-14);
        assert!((p.degeneracy_per_area() - 1.0 / (2.0 * PI * ell * ell)).abs() < 1e-14);
        let q = LandauParams::with_magnetic_length(2.0).unwrap();
        assert!((q.magnetic_length() - 2.0).abs() < 1e-15);
        assert!(LandauParams::new(1.0, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn evaluation_examples() {
        let a = Potential::algebraic(1.0, 3.0)
            .unwrap()
            .with_core_cap(1e6)
            .unwrap();
        assert!((a.evaluate(2.0) - 0.125).abs() < 1e-15);
        let s = Potential::stretched_gaussian(1.0, 1.0, 1.0).unwrap();
        assert!((s.evaluate(3.0) - (-3f64).exp()).abs() < 1e-15);
        let g = Potential::gaussian(2.0, 1.0).unwrap();
        assert_eq!(g.evaluate(0.0), 2.0);
        assert_eq!(a.evaluate(0.0), 1e6);
        assert_eq!(a.evaluate(1e-4), 1e6);
    }

    #[test]
    fn construction_rejects_bad_shapes() {
        assert!(Potential::stretched_gaussian(1.0, 1.0, 2.0).is_err());
        assert!(Potential::algebraic(1.0, 2.0).is_err());
        assert!(Potential::gaussian(0.0, 1.0).is_err());
        assert!(Potential::gaussian(1.0, 1.0)
            .unwrap()
            .with_core_cap(5.0)
            .is_err());
    }

    #[test]
    fn classification() {
        assert_eq!(
            Potential::gaussian(1.0, 2.0).unwrap().classify_decay(),
            DecayClass::Gaussian { lambda: 2.0 }
        );
        assert_eq!(
            Potential::compact_disk(1.0, 1.0).unwrap().classify_decay(),
            DecayClass::SuperGaussian
        );
        assert_eq!(
            Potential::stretched_gaussian(1.0, 1.0, 1.5)
                .unwrap()
                .classify_decay(),
            DecayClass::SubGaussian
        );
    }

    #[test]
    fn classification_matches_log_ratio() {
        for m in catalogue() {
            let s = m.scale();
            let ratios: Vec<f64> = [1e2, 1e3, 1e4]
                .iter()
                .map(|k| m.ln_eval(k * s) / (k * s).powi(2))
                .collect();
            match m.classify_decay() {
                DecayClass::SuperGaussian => {
                    assert!(ratios.iter().all(|r| *r == f64::NEG_INFINITY))
                }
                DecayClass::Gaussian { lambda } => {
                    let target = -1.0 / (lambda * lambda);
                    assert!(((ratios[2] - target) / target).abs() < 0.1);
                }
                DecayClass::SubGaussian => {
                    assert!(
                        ratios[2].abs() < ratios[0].abs() && ratios[2].abs() < 0.1,
                        "{m:?}: {ratios:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn descriptors_of_examples() {
        let d = Potential::algebraic(2.0, 4.0)
            .unwrap()
            .regular_decay_of()
            .unwrap();
        assert_eq!(d.alpha, 4.0);
        assert!((d.f.eval(8.0).unwrap() - 16f64.powf(0.25)).abs() < 1e-14);
        let d = Potential::stretched_gaussian(1.0, 3.0, 1.0)
            .unwrap()
            .regular_decay_of()
            .unwrap();
        assert!(d.alpha_is_infinite());
        assert!((d.f.eval(1e5).unwrap() - 3.0 * 1e5f64.ln()).abs() < 1e-12);
        assert!(Potential::gaussian(1.0, 1.0)
            .unwrap()
            .regular_decay_of()
            .is_none());
        assert!(Potential::compact_disk(1.0, 1.0)
            .unwrap()
            .regular_decay_of()
            .is_none());
        // (i): F(t) = λ sqrt(log t · log sqrt(log t))
        let d = Potential::log_corrected_gaussian(1.0, 2.0, 1.0)
            .unwrap()
            .regular_decay_of()
            .unwrap();
        let t: f64 = 1e30;
        let want = 2.0 * (t.ln() * t.ln().sqrt().ln()).sqrt();
        assert!((d.f.eval(t).unwrap() - want).abs() / want < 1e-13);
    }

    #[test]
    fn regular_decay_checks() {
        let a = Potential::algebraic(1.0, 3.0).unwrap();
        let d = a.regular_decay_of().unwrap();
        assert!(check_regular_decay(&a, &d, &[10.0, 100.0]).unwrap() < 1e-13);
        let s = Potential::stretched_gaussian(1.0, 1.0, 1.0).unwrap();
        let d = s.regular_decay_of().unwrap();
        assert!(check_regular_decay(&s, &d, &[50.0]).unwrap() < 1e-13);
        let al = Potential::algebraic_log(1.0, 1.0, 3.0).unwrap();
        let d = al.regular_decay_of().unwrap();
        let dev = regular_decay_deviations(&al, &d, &[1e3, 1e6]).unwrap();
        assert!(dev[1] < dev[0] && dev[1] < 0.05, "{dev:?}");
        let disk = Potential::compact_disk(1.0, 1.0).unwrap();
        let fake = a.regular_decay_of().unwrap();
        assert_eq!(
            check_regular_decay(&disk, &fake, &[2.0]).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn regular_decay_at_far_radius() {
        for m in catalogue() {
            if let Some(d) = m.regular_decay_of() {
                let dev = check_regular_decay(&m, &d, &[1e6 * m.scale()]).unwrap();
                assert!(dev <= 0.05, "{m:?}: {dev}");
            }
        }
    }

    #[test]
    fn integrals_match_quadrature() {
        let spec = QuadratureSpec::default();
        for m in catalogue() {
            let closed = m.integral(&spec).unwrap().value;
            let num = radial_moment(&m, 1, &spec).unwrap();
            assert!(
                (num.value - closed).abs() <= 1e-7 * closed,
                "{m:?}: {} vs {closed}",
                num.value
            );
            let closed2 = m.integral_of_square(&spec).unwrap().value;
            let num2 = radial_moment(&m, 2, &spec).unwrap();
            assert!(
                (num2.value - closed2).abs() <= 1e-7 * closed2,
                "{m:?}: {} vs {closed2}",
                num2.value
            );
        }
        let g = Potential::gaussian(1.0, 2.0).unwrap();
        assert!((g.integral(&spec).unwrap().value - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn closed_tail_masses_match_quadrature() {
        let spec = QuadratureSpec::default();
        for m in catalogue() {
            for r in [0.5, 3.0, 20.0] {
                if let Some(closed) = m.tail_mass(r) {
                    let f = crate::profile::FnProfile {
                        f: |s: f64| m.evaluate(s),
                        scale: m.scale(),
                        breakpoints: m.breakpoints(),
                    };
                    let num = numeric_tail_mass(&f, r, &spec).unwrap().value;
                    assert!(
                        (num - closed).abs() <= 1e-7 * closed.max(1e-300) + 1e-14,
                        "{m:?} r={r}: {num} vs {closed}"
                    );
                }
            }
        }
    }

    #[test]
    fn config_round_trip() {
        let m: Potential =
            toml::from_str("family = \"algebraic\"\ng0 = 1.0\nalpha = 3.0\n").unwrap();
        assert_eq!(m.core_cap(), Some(1e6));
        let j =
            serde_json::to_string(&Potential::stretched_gaussian(1.0, 2.0, 0.5).unwrap()).unwrap();
        assert!(j.contains("\"family\":\"stretched_gaussian\""));
        let back: Potential = serde_json::from_str(&j).unwrap();
        assert_eq!(back, Potential::stretched_gaussian(1.0, 2.0, 0.5).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn monotone_tail_and_nonnegative(idx in 0usize..8, r in 0.0f64..50.0, dr in 1e-3f64..5.0) {
            let m = &catalogue()[idx];
            let a = m.evaluate(r);
            prop_assert!(a >= 0.0);
            if r >= m.monotone_from() {
                prop_assert!(m.evaluate(r + dr) <= a * (1.0 + 1e-14));
            }
        }

        #[test]
        fn radial_cap_never_exceeded(g0 in 0.1f64..10.0, alpha in 2.1f64..8.0, r in 0.0f64..1.0) {
            let m = Potential::algebraic(g0, alpha).unwrap();
            prop_assert!(m.evaluate(r) <= 1e6 * g0 * (1.0 + 1e-14));
            let ml = Potential::algebraic_log(g0, 1.0, alpha).unwrap();
            prop_assert!(ml.evaluate(r) <= 1e6 * g0 * (1.0 + 1e-14));
        }
    }
}
