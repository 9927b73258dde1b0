//! Radially symmetric non-negative functions on the plane.

use std::f64::consts::PI;

use crate::error::{ensure, Result};
use crate::quad::{integrate_pieces, integrate_to_infinity, Estimate, QuadratureSpec};

/// A non-negative radial function `W(|x|)`.
///
/// Implementors provide `ln W`, so profiles can be evaluated where `W`
/// underflows or where only `ln t + ln W` is meaningful.
pub trait RadialProfile: Send + Sync {
    /// `ln W(r)`; `-inf` where `W` vanishes.
    fn ln_eval(&self, r: f64) -> f64;

    fn eval(&self, r: f64) -> f64 {
        self.ln_eval(r).exp()
    }

    /// Radii where `W` or its derivative jumps.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Characteristic length of the profile.
    fn scale(&self) -> f64;

    /// `W` is non-increasing on `[monotone_from, ∞)`.
    fn monotone_from(&self) -> f64 {
        0.0
    }

    /// Closed form of `2π ∫_r^∞ W(s) s ds`, when one is known.
    fn tail_mass(&self, _r: f64) -> Option<f64> {
        None
    }
}

impl<T: RadialProfile + ?Sized> RadialProfile for &T {
    fn ln_eval(&self, r: f64) -> f64 {
        (**self).ln_eval(r)
    }
    fn eval(&self, r: f64) -> f64 {
        (**self).eval(r)
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
    fn scale(&self) -> f64 {
        (**self).scale()
    }
    fn monotone_from(&self) -> f64 {
        (**self).monotone_from()
    }
    fn tail_mass(&self, r: f64) -> Option<f64> {
        (**self).tail_mass(r)
    }
}

/// `W(r) = coefficient · r^{-alpha}` on the whole half-line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLaw {
    pub coefficient: f64,
    pub alpha: f64,
}

impl PowerLaw {
    pub fn new(coefficient: f64, alpha: f64) -> Result<Self> {
        ensure(coefficient > 0.0, || {
            format!("power-law coefficient must be positive, got {coefficient}")
        })?;
        ensure(alpha > 2.0, || {
            format!("power law needs alpha > 2 to be integrable at infinity, got {alpha}")
        })?;
        Ok(Self { coefficient, alpha })
    }
}

impl RadialProfile for PowerLaw {
    fn ln_eval(&self, r: f64) -> f64 {
        self.coefficient.ln() - self.alpha * r.ln()
    }
    fn scale(&self) -> f64 {
        self.coefficient.powf(1.0 / self.alpha)
    }
    fn tail_mass(&self, r: f64) -> Option<f64> {
        (r > 0.0)
            .then(|| 2.0 * PI * self.coefficient * r.powf(2.0 - self.alpha) / (self.alpha - 2.0))
    }
}

/// `c · W(r)`.
#[derive(Clone, Copy, Debug)]
pub struct ScaledProfile<P> {
    pub factor: f64,
    pub inner: P,
}

impl<P: RadialProfile> RadialProfile for ScaledProfile<P> {
    fn ln_eval(&self, r: f64) -> f64 {
        self.factor.ln() + self.inner.ln_eval(r)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }
    fn scale(&self) -> f64 {
        self.inner.scale()
    }
    fn monotone_from(&self) -> f64 {
        self.inner.monotone_from()
    }
    fn tail_mass(&self, r: f64) -> Option<f64> {
        self.inner.tail_mass(r).map(|m| m * self.factor)
    }
}

/// A profile given by a closure; no closed-form metadata.
pub struct FnProfile<F> {
    pub f: F,
    pub scale: f64,
    pub breakpoints: Vec<f64>,
}

impl<F: Fn(f64) -> f64 + Send + Sync> RadialProfile for FnProfile<F> {
    fn ln_eval(&self, r: f64) -> f64 {
        (self.f)(r).ln()
    }
    fn eval(&self, r: f64) -> f64 {
        (self.f)(r)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }
    fn scale(&self) -> f64 {
        self.scale
    }
}

fn sorted_points_above(p: &dyn RadialProfile, from: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = p
        .breakpoints()
        .into_iter()
        .chain([p.scale(), p.monotone_from()])
        .filter(|&x| x.is_finite() && x > from)
        .collect();
    pts.push(from);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `2π ∫_0^∞ W(r)^k r dr` by quadrature.
pub fn radial_moment(p: &dyn RadialProfile, k: i32, spec: &QuadratureSpec) -> Result<Estimate> {
    let pts = sorted_points_above(p, 0.0);
    let g = |r: f64| {
        if r == 0.0 {
            return 0.0;
        }
        let v = (k as f64 * p.ln_eval(r)).exp();
        2.0 * PI * r * v
    };
    let last = *pts.last().unwrap();
    let head = if pts.len() > 1 {
        integrate_pieces(g, &pts, spec)?
    } else {
        Estimate::default()
    };
    let tail = integrate_to_infinity(g, last, spec)?;
    Ok(head + tail)
}

/// `2π ∫_r^∞ W(s) s ds`, closed form when available, otherwise by quadrature.
pub fn tail_mass(p: &dyn RadialProfile, r: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    if let Some(m) = p.tail_mass(r) {
        return Ok(Estimate {
            value: m,
            error: 0.0,
        });
    }
    let pts = sorted_points_above(p, r);
    let g = |s: f64| 2.0 * PI * s * p.eval(s);
    let last = *pts.last().unwrap();
    let head = if pts.len() > 1 {
        integrate_pieces(g, &pts, spec)?
    } else {
        Estimate::default()
    };
    let tail = integrate_to_infinity(g, last, spec)?;
    Ok(head + tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_tail_matches_quadrature() {
        let w = PowerLaw::new(2.0, 3.5).unwrap();
        let spec = QuadratureSpec::default();
        let closed = w.tail_mass(4.0).unwrap();
        let f = FnProfile {
            f: |r: f64| 2.0 * r.powf(-3.5),
            scale: 1.0,
            breakpoints: vec![],
        };
        let num = tail_mass(&f, 4.0, &spec).unwrap();
        assert!((num.value - closed).abs() / closed < 1e-9);
    }

    #[test]
    fn gaussian_moments() {
        let spec = QuadratureSpec::default();
        let f = FnProfile {
            f: |r: f64| (-r * r).exp(),
            scale: 1.0,
            breakpoints: vec![],
        };
        let m1 = radial_moment(&f, 1, &spec).unwrap();
        assert!((m1.value - PI).abs() < 1e-10);
        let m2 = radial_moment(&f, 2, &spec).unwrap();
        assert!((m2.value - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn scaled_profile_scales_mass() {
        let w = ScaledProfile {
            factor: 3.0,
            inner: PowerLaw::new(1.0, 4.0).unwrap(),
        };
        assert!((w.tail_mass(1.0).unwrap() - 3.0 * PI).abs() < 1e-14);
        assert!((w.eval(2.0) - 3.0 / 16.0).abs() < 1e-15);
    }
}
