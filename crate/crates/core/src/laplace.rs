//! Poisson Laplace functionals, the Gaussian convolution with the lowest
//! Landau-level density, and the two-sided bounds on the shifted
//! Laplace–Stieltjes transform of the integrated density of states.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::potentials::{LandauParams, RegularDecayDescriptor};
use crate::profile::{tail_mass, RadialProfile};
use crate::quad::{geomspace, integrate_pieces, Estimate, QuadratureSpec};
use crate::special::bessel_i0e;

pub use crate::special::gamma as gamma_function;

/// `L_W(t)` with its error budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceValue {
    pub value: f64,
    /// Quadrature error estimate plus the certified truncation remainder.
    pub error: f64,
    /// Radius beyond which the integrand was replaced by `t W(r)`.
    pub r_cut: f64,
    /// `t · 2π ∫_{r_cut}^∞ W(r) r dr`, included in `value`.
    pub tail: f64,
}

/// `π Γ((α−2)/α)`, or `π` when `α = ∞`.
pub fn abfall_constant(alpha: f64) -> Result<f64> {
    ensure(alpha > 2.0, || format!("alpha must exceed 2, got {alpha}"))?;
    if alpha.is_infinite() {
        return Ok(PI);
    }
    Ok(PI * gamma_function((alpha - 2.0) / alpha)?)
}

/// `L_W(t) = 2π ∫_0^∞ (1 − e^{−t W(r)}) r dr`.
pub fn laplace_functional(
    w: &dyn RadialProfile,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<LaplaceValue> {
    ensure(t > 0.0 && t.is_finite(), || {
        format!("t must be positive and finite, got {t}")
    })?;
    laplace_functional_ln(w, t.ln(), spec)
}

/// [`laplace_functional`] with the time given as `ln t`, usable far beyond `f64` range of `t`.
pub fn laplace_functional_ln(
    w: &dyn RadialProfile,
    ln_t: f64,
    spec: &QuadratureSpec,
) -> Result<LaplaceValue> {
    spec.validate()?;
    ensure(ln_t.is_finite(), || {
        format!("ln t must be finite, got {ln_t}")
    })?;
    let ln_tol = spec.abs_tol.ln();
    let small = |r: f64| ln_t + w.ln_eval(r) < ln_tol;

    let start = w.scale().max(w.monotone_from()).max(f64::MIN_POSITIVE);
    let mut r = start;
    let mut doublings = 0;
    while !small(r) {
        r *= 2.0;
        doublings += 1;
        if doublings > 1100 || !r.is_finite() {
            return Err(Error::NotDecaying(format!(
                "t W(r) stays above {} up to r = {r}",
                spec.abs_tol
            )));
        }
    }
    let r_cut = r * spec.tail_safety;

    let mut pts = vec![0.0, r_cut];
    pts.extend(
        w.breakpoints()
            .into_iter()
            .filter(|&b| b > 0.0 && b < r_cut),
    );
    let lo = 1e-3 * start.min(r_cut);
    let decades = ((r_cut / lo).log10().ceil() as usize).max(1);
    pts.extend(geomspace(lo, r_cut, decades + 1));
    if let Some(rh) = crossing_radius(w, ln_t, start, r) {
        pts.push(rh);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let integrand = |r: f64| {
        let x = (ln_t + w.ln_eval(r)).exp();
        2.0 * PI * r * -(-x).exp_m1()
    };
    let head = integrate_pieces(integrand, &pts, spec)?;

    // Beyond r_cut, 0 ≤ x − (1 − e^{−x}) ≤ x²/2 with x = t W ≤ t W(r_cut).
    let mass = tail_mass(w, r_cut, spec)?;
    let (tail, tail_err) = if mass.value > 0.0 {
        let tail = (ln_t + mass.value.ln()).exp();
        let x_cut = (ln_t + w.ln_eval(r_cut)).exp();
        let quad_err = (ln_t + mass.error.max(f64::MIN_POSITIVE).ln()).exp();
        (tail, 0.5 * tail * x_cut + quad_err)
    } else {
        (0.0, 0.0)
    };
    Ok(LaplaceValue {
        value: head.value + tail,
        error: head.error + tail_err,
        r_cut,
        tail,
    })
}

/// Radius in `[lo, hi]` where `t W(r) = 1`, on the monotone part of `W`.
fn crossing_radius(w: &dyn RadialProfile, ln_t: f64, lo: f64, hi: f64) -> Option<f64> {
    let g = |r: f64| ln_t + w.ln_eval(r);
    let mut a = lo.max(w.monotone_from()).max(1e-300);
    if !(g(a) > 0.0) {
        return None;
    }
    let mut b = hi;
    if !(g(b) < 0.0) {
        return None;
    }
    for _ in 0..200 {
        let m = (a * b).sqrt();
        if g(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b / a < 1.0 + 1e-10 {
            break;
        }
    }
    Some(0.5 * (a + b))
}

/// Half-width of the Gaussian window, in units of `ℓ`.
const WINDOW: f64 = 40.0;

/// `ln (|φ₀|² ∗ U)(x)` with `|φ₀|²(y) = e^{−|y|²/2ℓ²}/(2πℓ²)`, plus a relative error estimate.
///
/// The angular integral is done exactly through `I₀`:
/// `(|φ₀|² ∗ U)(x) = ∫_0^∞ U(s) (s/ℓ²) e^{−(x−s)²/2ℓ²} e^{−xs/ℓ²} I₀(xs/ℓ²) ds`.
/// The radial integrand is shifted by its maximum so deep tails do not underflow.
pub fn gaussian_convolve_ln(
    u: &dyn RadialProfile,
    ell: f64,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    ensure(ell > 0.0 && ell.is_finite(), || {
        format!("magnetic length must be positive, got {ell}")
    })?;
    ensure(x >= 0.0 && x.is_finite(), || {
        format!("radius must be non-negative, got {x}")
    })?;
    let l2 = ell * ell;
    let expo = |s: f64| -> f64 {
        if s <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let lu = u.ln_eval(s);
        if lu == f64::NEG_INFINITY {
            return lu;
        }
        lu + (s / l2).ln() - (x - s) * (x - s) / (2.0 * l2) + bessel_i0e(x * s / l2).ln()
    };

    let hi = x + WINDOW * ell;
    let mut pts = vec![0.0, hi];
    for k in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
        for s in [x - k * ell, x + k * ell] {
            if s > 0.0 && s < hi {
                pts.push(s);
            }
        }
    }
    pts.extend(u.breakpoints().into_iter().filter(|&b| b > 0.0 && b < hi));
    let lo = (1e-3 * ell).min(hi);
    pts.extend(geomspace(
        lo,
        hi,
        ((hi / lo).log10().ceil() as usize).max(1) * 2 + 1,
    ));
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    // Locate the maximum of the exponent on a fine scan around the candidate points.
    let mut shift = f64::NEG_INFINITY;
    for w in pts.windows(2) {
        for j in 0..=8 {
            let s = w[0] + (w[1] - w[0]) * j as f64 / 8.0;
            shift = shift.max(expo(s));
        }
    }
    if shift == f64::NEG_INFINITY {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    let est = integrate_pieces(|s| (expo(s) - shift).exp(), &pts, spec)?;
    if !(est.value > 0.0) {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    Ok((shift + est.value.ln(), est.error / est.value))
}

/// `(|φ₀|² ∗ U)(x)`.
pub fn gaussian_convolve(
    u: &dyn RadialProfile,
    ell: f64,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let (ln_v, rel) = gaussian_convolve_ln(u, ell, x, spec)?;
    let value = ln_v.exp();
    Ok(Estimate {
        value,
        error: rel * value,
    })
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
#[derive(Clone, Debug)]
struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Self { x, y, d }
    }

    fn eval(&self, xv: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.binary_search_by(|p| p.total_cmp(&xv)) {
            Ok(i) => return self.y[i],
            Err(0) => 0,
            Err(i) if i >= n => n - 2,
            Err(i) => i - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (xv - self.x[i]) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

/// Default number of tabulation radii for [`ConvolvedProfile`].
pub const DEFAULT_TABLE_POINTS: usize = 512;

/// `|φ₀|² ∗ U` tabulated on a geometric grid and interpolated in `(ln r, ln W)`.
#[derive(Clone, Debug)]
pub struct ConvolvedProfile {
    ell: f64,
    interp: MonotoneCubic,
    r_min: f64,
    r_max: f64,
    /// log-log slope used beyond `r_max`; at most −2.5 so the extension stays integrable
    tail_slope: f64,
    scale: f64,
    monotone_from: f64,
}

impl ConvolvedProfile {
    /// Tabulates the convolution far enough out that `t W < abs_tol` for every `t ≤ e^{ln_t_max}`.
    pub fn build(
        u: &dyn RadialProfile,
        ell: f64,
        ln_t_max: f64,
        spec: &QuadratureSpec,
        points: usize,
    ) -> Result<Self> {
        ensure(points >= 4, || {
            format!("need at least 4 tabulation points, got {points}")
        })?;
        let ln_tol = spec.abs_tol.ln();
        let mut r = u
            .scale()
            .max(ell)
            .max(u.monotone_from())
            .max(u.breakpoints().into_iter().fold(0.0, f64::max));
        let mut n = 0;
        loop {
            let (lv, _) = gaussian_convolve_ln(u, ell, r, spec)?;
            if ln_t_max + lv < ln_tol {
                break;
            }
            r *= 2.0;
            n += 1;
            if n > 200 {
                return Err(Error::NotDecaying(format!(
                    "convolution stays above tolerance up to r = {r}"
                )));
            }
        }
        let r_max = 2.0 * spec.tail_safety * r;
        let r_min = 1e-3 * ell;
        let grid = geomspace(r_min, r_max, points);
        let vals: Vec<f64> = grid
            .par_iter()
            .map(|&x| gaussian_convolve_ln(u, ell, x, spec).map(|v| v.0))
            .collect::<Result<_>>()?;
        if let Some(bad) = vals.iter().position(|v| !v.is_finite()) {
            return Err(Error::NotDecaying(format!(
                "convolution underflows at tabulation radius {}",
                grid[bad]
            )));
        }
        let ln_r: Vec<f64> = grid.iter().map(|r| r.ln()).collect();
        let k = points - 1;
        let slope = (vals[k] - vals[k - 1]) / (ln_r[k] - ln_r[k - 1]);
        Ok(Self {
            ell,
            interp: MonotoneCubic::new(ln_r, vals),
            r_min,
            r_max,
            tail_slope: slope.min(-2.5),
            scale: u.scale().max(ell),
            monotone_from: u.monotone_from() + 8.0 * ell,
        })
    }

    pub fn magnetic_length(&self) -> f64 {
        self.ell
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    fn ln_at_max(&self) -> f64 {
        self.interp.eval(self.r_max.ln())
    }
}

impl RadialProfile for ConvolvedProfile {
    fn ln_eval(&self, r: f64) -> f64 {
        if r <= self.r_min {
            self.interp.eval(self.r_min.ln())
        } else if r <= self.r_max {
            self.interp.eval(r.ln())
        } else {
            self.ln_at_max() + self.tail_slope * (r / self.r_max).ln()
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.r_max]
    }

    fn scale(&self) -> f64 {
        self.scale
    }

    fn monotone_from(&self) -> f64 {
        self.monotone_from
    }

    fn tail_mass(&self, r: f64) -> Option<f64> {
        if r < self.r_max {
            return None;
        }
        let s = self.tail_slope;
        let w_max = self.ln_at_max().exp();
        Some(2.0 * PI * w_max * self.r_max.powf(-s) * r.powf(s + 2.0) / (-s - 2.0))
    }
}

/// Two-sided bound on `Ñ(t)`, with the functionals used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichResult {
    pub t: f64,
    pub ln_t: f64,
    pub l_u: f64,
    pub l_conv: f64,
    pub lower: f64,
    pub upper: f64,
    pub ln_lower: f64,
    pub ln_upper: f64,
}

/// Evaluates the bounds on a range of `t` with a single tabulated convolution.
pub struct Sandwich<'a> {
    model: &'a dyn RadialProfile,
    landau: LandauParams,
    rho: f64,
    conv: ConvolvedProfile,
    ln_t_max: f64,
    spec: QuadratureSpec,
}

impl<'a> Sandwich<'a> {
    pub fn new(
        model: &'a dyn RadialProfile,
        landau: LandauParams,
        rho: f64,
        ln_t_max: f64,
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        Self::with_table_points(model, landau, rho, ln_t_max, spec, DEFAULT_TABLE_POINTS)
    }

    pub fn with_table_points(
        model: &'a dyn RadialProfile,
        landau: LandauParams,
        rho: f64,
        ln_t_max: f64,
        spec: &QuadratureSpec,
        points: usize,
    ) -> Result<Self> {
        landau.validate()?;
        ensure(rho > 0.0 && rho.is_finite(), || {
            format!("rho must be positive, got {rho}")
        })?;
        let conv =
            ConvolvedProfile::build(model, landau.magnetic_length(), ln_t_max, spec, points)?;
        Ok(Self {
            model,
            landau,
            rho,
            conv,
            ln_t_max,
            spec: *spec,
        })
    }

    pub fn convolved(&self) -> &ConvolvedProfile {
        &self.conv
    }

    pub fn at(&self, t: f64) -> Result<SandwichResult> {
        ensure(t > 0.0 && t.is_finite(), || {
            format!("t must be positive, got {t}")
        })?;
        self.at_ln(t.ln())
    }

    pub fn at_ln(&self, ln_t: f64) -> Result<SandwichResult> {
        ensure(ln_t <= self.ln_t_max + 1e-12, || {
            format!(
                "ln t = {ln_t} exceeds the tabulated range {}",
                self.ln_t_max
            )
        })?;
        let l_u = laplace_functional_ln(self.model, ln_t, &self.spec)?.value;
        let l_conv = laplace_functional_ln(&self.conv, ln_t, &self.spec)?.value;
        let ell = self.landau.magnetic_length();
        let ln_pref = -(2.0 * PI * ell * ell).ln();
        let x = 2.0 * ln_t.exp() * self.landau.lowest_level();
        // e^{tε₀} / (4πℓ² sinh tε₀) = 1 / (2πℓ² (1 − e^{−2tε₀}))
        let ln_upper = ln_pref - (-(-x).exp_m1()).ln() - self.rho * l_u;
        let ln_lower = ln_pref - self.rho * l_conv;
        Ok(SandwichResult {
            t: ln_t.exp(),
            ln_t,
            l_u,
            l_conv,
            lower: ln_lower.exp(),
            upper: ln_upper.exp(),
            ln_lower,
            ln_upper,
        })
    }
}

/// Bounds at a single `t`.
pub fn sandwich_bounds(
    model: &dyn RadialProfile,
    landau: &LandauParams,
    rho: f64,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<SandwichResult> {
    ensure(t > 0.0 && t.is_finite(), || {
        format!("t must be positive, got {t}")
    })?;
    Sandwich::new(model, *landau, rho, t.ln(), spec)?.at(t)
}

/// `L_W(t) / F(t)²` for each `ln t`.
pub fn abfall_limit_check_ln(
    model: &dyn RadialProfile,
    descriptor: &RegularDecayDescriptor,
    ln_ts: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<f64>> {
    ln_ts
        .iter()
        .map(|&u| {
            let l = laplace_functional_ln(model, u, spec)?.value;
            let ln_f = descriptor.ln_f_ln(u)?;
            Ok(l * (-2.0 * ln_f).exp())
        })
        .collect()
}

/// `L_W(t) / F(t)²` on a grid of `t`.
pub fn abfall_limit_check(
    model: &dyn RadialProfile,
    descriptor: &RegularDecayDescriptor,
    ts: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<f64>> {
    let lns: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    abfall_limit_check_ln(model, descriptor, &lns, spec)
}

/// `|F(1/(|φ₀|² ∗ U)(r))/r − 1|` per radius; `None` where the convolution underflows.
pub fn faltung_decay_check(
    model: &dyn RadialProfile,
    descriptor: &RegularDecayDescriptor,
    ell: f64,
    radii: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<Option<f64>>> {
    radii
        .iter()
        .map(|&r| {
            let (lv, _) = gaussian_convolve_ln(model, ell, r, spec)?;
            if !lv.is_finite() {
                return Ok(None);
            }
            let ln_f = descriptor.ln_f_ln(-lv)?;
            Ok(Some((ln_f - r.ln()).exp_m1().abs()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::Potential;
    use crate::profile::{FnProfile, PowerLaw, ScaledProfile};
    use crate::quad::integrate;
    use proptest::prelude::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn hard_disk_closed_form() {
        let w = Potential::compact_disk(1.0, 1.0).unwrap();
        for t in [0.1, 1.0, 7.0, 100.0] {
            let l = laplace_functional(&w, t, &spec()).unwrap();
            let want = PI * -(-t).exp_m1();
            assert!(
                (l.value - want).abs() < 1e-10,
                "t={t}: {} vs {want}",
                l.value
            );
        }
        let big = laplace_functional(&w, 1e6, &spec()).unwrap();
        assert!((big.value - PI).abs() < 1e-10);
    }

    #[test]
    fn power_law_closed_form() {
        // independent oracle: substitute u = t r^{-α}, giving (2π/α) t^{2/α} ∫ u^{-2/α-1}(1 − e^{-u}) du,
        // evaluated here by a separate quadrature rather than the Γ identity
        let oracle = |alpha: f64, t: f64| {
            let p = 2.0 / alpha;
            let g = |u: f64| u.powf(-p - 1.0) * -(-u).exp_m1();
            let s = QuadratureSpec {
                rel_tol: 1e-12,
                abs_tol: 1e-15,
                ..Default::default()
            };
            let a = integrate(g, 0.0, 1.0, &s).unwrap().value;
            let b = crate::quad::integrate_to_infinity(g, 1.0, &s)
                .unwrap()
                .value;
            2.0 * PI / alpha * t.powf(p) * (a + b)
        };
        for alpha in [3.0, 4.0, 6.0] {
            let w = PowerLaw::new(1.0, alpha).unwrap();
            for t in [0.1, 1.0, 10.0] {
                let got = laplace_functional(&w, t, &spec()).unwrap();
                let closed = abfall_constant(alpha).unwrap() * t.powf(2.0 / alpha);
                assert!(
                    (got.value - closed).abs() / closed < 1e-7,
                    "α={alpha} t={t}: {got:?} vs {closed} oracle {}",
                    oracle(alpha, t)
                );
                assert!((oracle(alpha, t) - closed).abs() / closed < 1e-9);
            }
        }
        let l = laplace_functional(&PowerLaw::new(1.0, 4.0).unwrap(), 1.0, &spec()).unwrap();
        assert!((l.value - 5.568_328).abs() < 1e-5);
    }

    #[test]
    fn scaling_identity() {
        let w = PowerLaw::new(1.0, 3.0).unwrap();
        let cw = ScaledProfile {
            factor: 3.0,
            inner: w,
        };
        let a = laplace_functional(&cw, 2.0, &spec()).unwrap();
        let b = laplace_functional(&w, 6.0, &spec()).unwrap();
        assert!((a.value - b.value).abs() <= a.error + b.error + 1e-8 * a.value);
        let g = Potential::gaussian(1.0, 1.0).unwrap();
        let cg = ScaledProfile {
            factor: 3.0,
            inner: g.clone(),
        };
        let a = laplace_functional(&cg, 2.0, &spec()).unwrap();
        let b = laplace_functional(&g, 6.0, &spec()).unwrap();
        assert!((a.value - b.value).abs() <= 1e-8 * a.value);
    }

    #[test]
    fn error_budget_covers_closed_form() {
        let w = PowerLaw::new(2.0, 3.0).unwrap();
        let l = laplace_functional(&w, 5.0, &spec()).unwrap();
        let closed = abfall_constant(3.0).unwrap() * (10f64).powf(2.0 / 3.0);
        assert!(l.tail > 0.0);
        assert!((l.value - closed).abs() <= l.error.max(1e-8 * closed));
    }

    #[test]
    fn abfall_constants() {
        assert!((abfall_constant(3.0).unwrap() - 8.416_134).abs() < 1e-5);
        assert_eq!(abfall_constant(f64::INFINITY).unwrap(), PI);
        assert!(abfall_constant(2.0).is_err());
        assert!((gamma_function(1.0 / 3.0).unwrap() - 2.678_939).abs() < 1e-6);
    }

    #[test]
    fn abfall_exact_for_power_law() {
        let a = Potential::algebraic(1.0, 4.0).unwrap();
        let d = a.regular_decay_of().unwrap();
        let w = PowerLaw::new(1.0, 4.0).unwrap();
        let ratios = abfall_limit_check(&w, &d, &[0.5, 10.0, 1e4], &spec()).unwrap();
        for r in ratios {
            assert!((r - PI.powf(1.5)).abs() < 1e-6);
        }
    }

    #[test]
    fn abfall_stretched_exponential_approaches_pi() {
        let m = Potential::stretched_gaussian(1.0, 1.0, 1.0).unwrap();
        let d = m.regular_decay_of().unwrap();
        let ratios = abfall_limit_check_ln(&m, &d, &[40.0, 100.0, 400.0], &spec()).unwrap();
        for w in ratios.windows(2) {
            assert!((w[1] - PI).abs() < (w[0] - PI).abs());
        }
        assert!((ratios[2] / PI - 1.0).abs() < 0.01, "{ratios:?}");
    }

    #[test]
    fn gaussian_gaussian_convolution() {
        let u = Potential::gaussian(1.0, 2.0).unwrap();
        let got = gaussian_convolve(&u, 1.0, 3.0, &spec()).unwrap();
        let want = 4.0 / 6.0 * (-9.0f64 / 6.0).exp();
        assert!((got.value - want).abs() < 1e-9, "{} vs {want}", got.value);
    }

    #[test]
    fn disk_convolution_at_origin() {
        for (r, ell) in [(1.0, 1.0), (2.5, 0.7)] {
            let u = Potential::compact_disk(1.0, r).unwrap();
            let got = gaussian_convolve(&u, ell, 0.0, &spec()).unwrap().value;
            let want = -(-r * r / (2.0 * ell * ell)).exp_m1();
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn convolution_matches_two_dimensional_quadrature() {
        // oracle: the explicit angular integral
        let u = Potential::stretched_gaussian(1.0, 1.0, 1.0).unwrap();
        let (x, ell) = (2.3, 0.8);
        let s = QuadratureSpec {
            rel_tol: 1e-10,
            ..Default::default()
        };
        let inner = |rad: f64| {
            let ang = integrate(
                |th: f64| {
                    (-(x * x + rad * rad - 2.0 * x * rad * th.cos()) / (2.0 * ell * ell)).exp()
                },
                0.0,
                PI,
                &s,
            )
            .unwrap()
            .value;
            2.0 * ang * rad * u.evaluate(rad) / (2.0 * PI * ell * ell)
        };
        let pts: Vec<f64> = (0..=30).map(|k| k as f64).collect();
        let oracle = integrate_pieces(inner, &pts, &s).unwrap().value;
        let got = gaussian_convolve(&u, ell, x, &spec()).unwrap().value;
        assert!((got - oracle).abs() / oracle < 1e-8);
    }

    #[test]
    fn convolution_preserves_mass() {
        let spec = spec();
        for u in [
            Potential::gaussian(1.0, 1.5).unwrap(),
            Potential::compact_disk(2.0, 1.0).unwrap(),
            Potential::stretched_gaussian(1.0, 1.0, 1.0).unwrap(),
        ] {
            let conv = ConvolvedProfile::build(&u, 1.0, 0.0, &spec, DEFAULT_TABLE_POINTS).unwrap();
            let m = crate::profile::radial_moment(&conv, 1, &spec)
                .unwrap()
                .value;
            let want = u.integral(&spec).unwrap().value;
            assert!((m - want).abs() / want < 1e-4, "{u:?}: {m} vs {want}");
        }
    }

    #[test]
    fn table_interpolates_direct_values() {
        let u = Potential::algebraic(1.0, 3.0).unwrap();
        let conv = ConvolvedProfile::build(&u, 1.0, 5.0, &spec(), DEFAULT_TABLE_POINTS).unwrap();
        for x in [0.05, 0.77, 3.3, 41.0, 900.0] {
            let direct = gaussian_convolve(&u, 1.0, x, &spec()).unwrap().value;
            let tab = conv.eval(x);
            assert!(
                (tab - direct).abs() / direct < 1e-4,
                "x={x}: {tab} vs {direct}"
            );
        }
        let fine =
            ConvolvedProfile::build(&u, 1.0, 5.0, &spec(), 4 * DEFAULT_TABLE_POINTS).unwrap();
        let direct = gaussian_convolve(&u, 1.0, 3.3, &spec()).unwrap().value;
        assert!((fine.eval(3.3) - direct).abs() < (conv.eval(3.3) - direct).abs());
    }

    #[test]
    fn faltung_examples() {
        let s = Potential::stretched_gaussian(1.0, 1.0, 1.0).unwrap();
        let d = s.regular_decay_of().unwrap();
        let dev = faltung_decay_check(&s, &d, 1.0, &[20.0, 40.0], &spec()).unwrap();
        let (a, b) = (dev[0].unwrap(), dev[1].unwrap());
        assert!(a <= 0.15 && b <= 0.08 && b < a, "{a} {b}");
        let al = Potential::algebraic(1.0, 3.0).unwrap();
        let d = al.regular_decay_of().unwrap();
        assert!(faltung_decay_check(&al, &d, 1.0, &[1e3], &spec()).unwrap()[0].unwrap() < 0.02);
        // ℓ → 0 reproduces the unconvolved check
        let tiny =
            faltung_decay_check(&s, &d_stretched(), 1e-3, &[50.0], &spec()).unwrap()[0].unwrap();
        let direct = crate::potentials::check_regular_decay(&s, &d_stretched(), &[50.0]).unwrap();
        assert!((tiny - direct).abs() < 1e-3);
    }

    fn d_stretched() -> RegularDecayDescriptor {
        Potential::stretched_gaussian(1.0, 1.0, 1.0)
            .unwrap()
            .regular_decay_of()
            .unwrap()
    }

    #[test]
    fn sandwich_prefactors() {
        let landau = LandauParams::default();
        let u = Potential::gaussian(1.0, 1.0).unwrap();
        let sw = Sandwich::new(&u, landau, 1.0, (1e4f64).ln(), &spec()).unwrap();
        let r = sw.at(1e4).unwrap();
        let pref = 1.0 / (2.0 * PI);
        assert!((r.ln_upper + r.l_u - pref.ln()).abs() < 1e-12);
        assert!((r.ln_lower + r.l_conv - pref.ln()).abs() < 1e-12);
        // finite where e^{tε₀}/sinh(tε₀) would overflow
        assert!(r.ln_upper.is_finite());
        let small = sw.at(1e-3).unwrap();
        let sinh_form =
            (1e-3 * 0.5f64).exp() / (4.0 * PI * (1e-3 * 0.5f64).sinh()) * (-small.l_u).exp();
        assert!((small.upper - sinh_form).abs() / sinh_form < 1e-12);
    }

    #[test]
    fn sandwich_ordering_on_catalogue() {
        let landau = LandauParams::default();
        let eps0 = landau.lowest_level();
        let models = [
            Potential::compact_disk(1.0, 1.0).unwrap(),
            Potential::gaussian(1.0, 1.0).unwrap(),
            Potential::log_corrected_gaussian(1.0, 1.0, 1.0).unwrap(),
            Potential::stretched_gaussian(1.0, 1.0, 1.0).unwrap(),
            Potential::algebraic(1.0, 3.0).unwrap(),
            Potential::algebraic_log(1.0, 1.0, 3.0).unwrap(),
        ];
        let ts: Vec<f64> = [1e-2, 1e-1, 1.0, 10.0, 1e2, 1e3, 1e4]
            .iter()
            .map(|k| k / eps0)
            .collect();
        for m in &models {
            let sw = Sandwich::new(m, landau, 1.0, ts.last().unwrap().ln(), &spec()).unwrap();
            for &t in &ts {
                let r = sw.at(t).unwrap();
                assert!(r.ln_lower <= r.ln_upper, "{m:?} t={t}: {r:?}");
                assert!(r.l_conv >= r.l_u * (1.0 - 1e-9));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn functional_monotone_and_concave(t in 0.05f64..50.0, idx in 0usize..3) {
            let w: Box<dyn RadialProfile> = match idx {
                0 => Box::new(Potential::gaussian(1.0, 1.0).unwrap()),
                1 => Box::new(Potential::algebraic(1.0, 3.5).unwrap()),
                _ => Box::new(Potential::stretched_gaussian(1.0, 1.0, 0.8).unwrap()),
            };
            let s = spec();
            let h = 0.1 * t;
            let a = laplace_functional(&*w, t - h, &s).unwrap().value;
            let b = laplace_functional(&*w, t, &s).unwrap().value;
            let c = laplace_functional(&*w, t + h, &s).unwrap().value;
            prop_assert!(a <= b && b <= c);
            prop_assert!(b >= 0.5 * (a + c) - 1e-7 * b);
        }

        #[test]
        fn functional_linear_bound(t in 0.01f64..100.0, g in 0.1f64..5.0) {
            let w = Potential::gaussian(g, 1.3).unwrap();
            let s = spec();
            let l = laplace_functional(&w, t, &s).unwrap().value;
            let mass = w.integral(&s).unwrap().value;
            prop_assert!(l <= t * mass * (1.0 + 1e-9));
        }

        #[test]
        fn scaling_holds(c in 0.2f64..5.0, t in 0.1f64..10.0) {
            let w = Potential::stretched_gaussian(1.0, 1.0, 1.2).unwrap();
            let cw = ScaledProfile { factor: c, inner: w.clone() };
            let s = spec();
            let a = laplace_functional(&cw, t, &s).unwrap().value;
            let b = laplace_functional(&w, c * t, &s).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-7 * a);
        }
    }

    #[test]
    fn fn_profile_without_tail_mass() {
        let w = FnProfile {
            f: |r: f64| 1.0 / (1.0 + r.powi(4)),
            scale: 1.0,
            breakpoints: vec![],
        };
        let l = laplace_functional(&w, 1e-3, &spec()).unwrap();
        // small t: L ≈ t ∫W = t π²/2
        let want = 1e-3 * PI * PI / 2.0;
        assert!((l.value - want).abs() / want < 1e-3);
    }
}
