//! Exponential Tauberian correspondence between the shifted Laplace–Stieltjes
//! transform `Ñ(t) = ∫ dN(η+E) e^{−tE}` and the low-energy fall-off of `N`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::quad::{geomspace, integrate_pieces, integrate_to_infinity, Estimate, QuadratureSpec};
use crate::regvar::SlowVarFn;

/// `log Ñ(t) ∼ −t^γ f(t)^{γ−1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceAsymptote {
    pub gamma: f64,
    pub f: SlowVarFn,
}

impl LaplaceAsymptote {
    pub fn new(gamma: f64, f: SlowVarFn) -> Result<Self> {
        ensure((0.0..1.0).contains(&gamma), || {
            format!("gamma must lie in [0, 1), got {gamma}")
        })?;
        Ok(Self { gamma, f })
    }

    /// The asymptotic `log Ñ(t)`, from `ln t`.
    pub fn log_transform_ln(&self, ln_t: f64) -> Result<f64> {
        let lf = self.f.ln_eval_ln(ln_t)?;
        Ok(-(self.gamma * ln_t + (self.gamma - 1.0) * lf).exp())
    }

    pub fn log_transform(&self, t: f64) -> Result<f64> {
        ensure(t > 0.0, || format!("t must be positive, got {t}"))?;
        self.log_transform_ln(t.ln())
    }
}

/// `log N(η+E) ∼ −(1−γ)(γ/E)^{γ/(1−γ)} f^#(E^{1/(γ−1)})`; for `γ = 0` this is `−f^#(1/E)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdosAsymptote {
    pub eta: f64,
    pub gamma: f64,
    pub f_sharp: SlowVarFn,
}

impl IdosAsymptote {
    pub fn new(eta: f64, gamma: f64, f_sharp: SlowVarFn) -> Result<Self> {
        ensure(eta.is_finite(), || format!("eta must be finite, got {eta}"))?;
        ensure((0.0..1.0).contains(&gamma), || {
            format!("gamma must lie in [0, 1), got {gamma}")
        })?;
        Ok(Self {
            eta,
            gamma,
            f_sharp,
        })
    }

    /// The asymptotic `log N(η+E)` for `E > 0`.
    pub fn log_idos(&self, e: f64) -> Result<f64> {
        ensure(e > 0.0, || {
            format!("energy above eta must be positive, got {e}")
        })?;
        let g = self.gamma;
        let ln_e = e.ln();
        let lfs = self.f_sharp.ln_eval_ln(ln_e / (g - 1.0))?;
        let power = if g == 0.0 {
            0.0
        } else {
            g / (1.0 - g) * (g.ln() - ln_e)
        };
        Ok(-((1.0 - g).ln() + power + lfs).exp())
    }

    /// `ln N(E)` of the distribution function that equals the exponential of the asymptote.
    ///
    /// Capped at 0 (so `N ≤ 1`) and set to 0 wherever the slowly varying factor is
    /// outside its domain, which for the supported factors happens only above the fall-off.
    pub fn synthetic_ln_n(&self) -> impl Fn(f64) -> f64 + '_ {
        move |e: f64| {
            let x = e - self.eta;
            if x <= 0.0 {
                return f64::NEG_INFINITY;
            }
            self.log_idos(x).map(|v| v.min(0.0)).unwrap_or(0.0)
        }
    }
}

/// Laplace side to IDOS side for `γ ∈ (0, 1)`.
pub fn forward(la: &LaplaceAsymptote, eta: f64) -> Result<IdosAsymptote> {
    ensure(la.gamma > 0.0 && la.gamma < 1.0, || {
        format!(
            "forward needs gamma in (0, 1), got {}; use forward_gamma0",
            la.gamma
        )
    })?;
    IdosAsymptote::new(eta, la.gamma, la.f.de_bruijn_conjugate()?)
}

/// IDOS side to Laplace side for `γ ∈ (0, 1)`.
pub fn backward(ia: &IdosAsymptote) -> Result<LaplaceAsymptote> {
    ensure(ia.gamma > 0.0 && ia.gamma < 1.0, || {
        format!(
            "backward needs gamma in (0, 1), got {}; use backward_gamma0",
            ia.gamma
        )
    })?;
    LaplaceAsymptote::new(ia.gamma, ia.f_sharp.de_bruijn_conjugate()?)
}

/// `lim f(t) log Ñ(t) = −1` to `log N(η+E) ∼ −f^#(1/E)`.
pub fn forward_gamma0(f: &SlowVarFn, eta: f64) -> Result<IdosAsymptote> {
    IdosAsymptote::new(eta, 0.0, f.de_bruijn_conjugate()?)
}

pub fn backward_gamma0(ia: &IdosAsymptote) -> Result<LaplaceAsymptote> {
    ensure(ia.gamma == 0.0, || {
        format!("backward_gamma0 needs gamma = 0, got {}", ia.gamma)
    })?;
    LaplaceAsymptote::new(0.0, ia.f_sharp.de_bruijn_conjugate()?)
}

/// Scan of the scaled integrand `x ↦ ln N(η + x/t) − x`.
const SCAN_LO: f64 = 1e-12;
const SCAN_HI: f64 = 1e8;
const SCAN_POINTS: usize = 481;
/// Integrand decades below the peak at which the explicit pieces stop.
const CUTOFF: f64 = 60.0;

/// `ln Ñ(t)` for `Ñ(t) = t ∫_η^∞ N(E) e^{−t(E−η)} dE = ∫_0^∞ N(η + x/t) e^{−x} dx`.
///
/// `ln_n` is `ln N` at absolute energies; `jumps` lists energies where `N` is
/// discontinuous. The returned error is on `ln Ñ`.
pub fn numeric_laplace_stieltjes_ln(
    ln_n: &dyn Fn(f64) -> f64,
    eta: f64,
    t: f64,
    jumps: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    ensure(t > 0.0 && t.is_finite(), || {
        format!("t must be positive and finite, got {t}")
    })?;
    spec.validate()?;
    let h = |x: f64| ln_n(eta + x / t) - x;
    let scan = geomspace(SCAN_LO, SCAN_HI, SCAN_POINTS);
    let vals: Vec<f64> = scan.iter().map(|&x| h(x)).collect();
    if vals.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("ln N returned NaN".into()));
    }
    let (imax, &shift) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty scan");
    if shift == f64::NEG_INFINITY {
        return Ok(Estimate {
            value: f64::NEG_INFINITY,
            error: 0.0,
        });
    }
    let cut = (imax..scan.len())
        .find(|&i| vals[i] < shift - CUTOFF)
        .ok_or_else(|| {
            Error::Divergent(format!("N(η + E) e^{{−tE}} does not decay for t = {t}"))
        })?;
    let x_cut = scan[cut];
    let mut pts: Vec<f64> = vec![0.0];
    pts.extend(scan[..=cut].iter().copied());
    pts.extend(
        jumps
            .iter()
            .map(|e| t * (e - eta))
            .filter(|&x| x > 0.0 && x < x_cut),
    );
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let g = |x: f64| (h(x) - shift).exp();
    let head = integrate_pieces(g, &pts, spec)?;
    let tail = integrate_to_infinity(g, x_cut, spec)?;
    let total = head + tail;
    if !(total.value > 0.0) {
        return Ok(Estimate {
            value: f64::NEG_INFINITY,
            error: 0.0,
        });
    }
    Ok(Estimate {
        value: shift + total.value.ln(),
        error: total.error / total.value,
    })
}

/// `Ñ(t)` for a distribution function given directly.
pub fn numeric_laplace_stieltjes(
    n: &dyn Fn(f64) -> f64,
    eta: f64,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let ln_n = |e: f64| n(e).ln();
    Ok(numeric_laplace_stieltjes_ln(&ln_n, eta, t, &[], spec)?
        .value
        .exp())
}

/// Numeric transform against the asymptote on a `t` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    pub gamma: f64,
    pub f: SlowVarFn,
    pub t_grid: Vec<f64>,
    /// `log Ñ_num(t)` per grid point.
    pub log_transform: Vec<f64>,
    /// `|log Ñ_num(t) / (−t^γ f(t)^{γ−1}) − 1|`
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Builds `N` as the exponential of the IDOS asymptote of `la`, transforms it
/// numerically and compares with the Laplace-side asymptote.
pub fn roundtrip_check(
    la: &LaplaceAsymptote,
    eta: f64,
    t_grid: &[f64],
    tolerance: f64,
    spec: &QuadratureSpec,
) -> Result<RoundTripReport> {
    ensure(!t_grid.is_empty(), || "empty t grid".into())?;
    let ia = if la.gamma == 0.0 {
        forward_gamma0(&la.f, eta)?
    } else {
        forward(la, eta)?
    };
    let ln_n = ia.synthetic_ln_n();
    let mut log_transform = Vec::with_capacity(t_grid.len());
    let mut deviations = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let num = numeric_laplace_stieltjes_ln(&ln_n, eta, t, &[], spec)?.value;
        let asym = la.log_transform(t)?;
        log_transform.push(num);
        deviations.push((num / asym - 1.0).abs());
    }
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    Ok(RoundTripReport {
        gamma: la.gamma,
        f: la.f.clone(),
        t_grid: t_grid.to_vec(),
        log_transform,
        deviations,
        max_deviation,
        tolerance,
        pass: max_deviation <= tolerance,
    })
}

/// Both sides of `N(η+E) ≤ e^{s E} Ñ(s)` with `s = ε f^#(1/E)/E`, as logarithms.
pub fn chernoff_sides(
    ln_n: &dyn Fn(f64) -> f64,
    eta: f64,
    f_sharp: &SlowVarFn,
    eps: f64,
    e: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    ensure(eps > 0.0 && e > 0.0, || {
        format!("need eps, E > 0; got {eps}, {e}")
    })?;
    let fs = f_sharp.ln_eval_ln(-e.ln())?.exp();
    let s = eps * fs / e;
    let rhs = eps * fs + numeric_laplace_stieltjes_ln(ln_n, eta, s, &[], spec)?.value;
    Ok((ln_n(eta + e), rhs))
}
