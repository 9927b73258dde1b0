//! Globally adaptive Gauss-Kronrod quadrature.
//!
//! A 7-point Gauss / 15-point Kronrod pair is applied on every subinterval; the
//! interval with the largest error estimate is bisected until the summed error
//! meets `max(abs_tol, rel_tol * |value|)`. Semi-infinite ranges are mapped onto
//! `[0, 1)` through `x = c * exp(s / (1 - s))`, which keeps algebraic tails
//! integrable after the change of variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod abscissae XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and limits for every improper integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Factor applied to the truncation radius once the integrand bound drops
    /// below `abs_tol`.
    pub tail_safety: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 4000,
            tail_safety: 2.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.tail_safety >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerances must be positive and tail_safety >= 1, got {self:?}"
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParameter(
                "max_subdivisions must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Same spec with both tolerances multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..*self
        }
    }
}

/// An integral value together with its (estimated or certified) absolute error.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn contains(&self, x: f64) -> bool {
        (self.value - x).abs() <= self.error
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * resabs;
        if min_err > err {
            err = min_err;
        }
    }
    err
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();
    let fc = f(center);

    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let err = rescale_error(
        (res_k - res_g) * half,
        res_abs * abs_half,
        res_asc * abs_half,
    );
    (value, err)
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    integrate_pieces(f, &[a, b], spec)
}

/// Integrates `f` over the union of the consecutive intervals delimited by
/// `points` (sorted ascending). Interior points act as forced breakpoints.
pub fn integrate_pieces<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if points.len() < 2 {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let mut heap = BinaryHeap::new();
    let mut settled = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let (value, error) = gk15(&f, a, b);
        heap.push(Segment { a, b, value, error });
    }

    let mut subdivisions = heap.len();
    loop {
        let (value, error) = heap
            .iter()
            .chain(settled.iter())
            .fold((0.0, 0.0), |(v, e), s: &Segment| (v + s.value, e + s.error));
        if !value.is_finite() {
            return Err(Error::Divergent(format!(
                "non-finite integral estimate on [{}, {}]",
                points[0],
                points[points.len() - 1]
            )));
        }
        let tol = spec.abs_tol.max(spec.rel_tol * value.abs());
        if error <= tol {
            return Ok(Estimate { value, error });
        }
        let Some(worst) = heap.pop() else {
            // Every remaining segment is at the resolution limit.
            return Ok(Estimate { value, error });
        };
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::QuadratureFailed {
                value,
                error,
                subdivisions,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        if (worst.b - worst.a) <= 64.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE)
            || mid <= worst.a
            || mid >= worst.b
        {
            settled.push(worst);
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        subdivisions += 1;
    }
}

/// Integrates `f` over `[a, ∞)`.
///
/// The finite part `[a, c]` (with `c = max(a, 1)`) is integrated directly, the
/// remainder through `x = c * exp(s / (1 - s))`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let c = if a > 0.0 { a } else { 1.0 };
    let head = if a < c {
        integrate(&f, a, c, spec)?
    } else {
        Estimate {
            value: 0.0,
            error: 0.0,
        }
    };
    let mapped = |s: f64| {
        let u = s / (1.0 - s);
        let x = c * u.exp();
        if !x.is_finite() {
            return 0.0;
        }
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v * x / ((1.0 - s) * (1.0 - s))
        }
    };
    let tail = integrate_pieces(mapped, &[0.0, 0.25, 0.5, 0.75, 0.9, 1.0], spec)?;
    Ok(head + tail)
}

/// Geometric sequence of `n` points from `lo` to `hi` inclusive.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (l0, l1) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kronrod_weights_sum_to_interval_length() {
        let s: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        assert!((s - 2.0).abs() < 1e-14);
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((g - 2.0).abs() < 1e-14);
    }

    #[test]
    fn polynomials_are_exact() {
        let spec = QuadratureSpec::default();
        for deg in 0..=20 {
            let est = integrate(|x: f64| x.powi(deg), 0.0, 1.0, &spec).unwrap();
            assert!(
                (est.value - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14,
                "degree {deg}"
            );
        }
    }

    #[test]
    fn smooth_and_oscillatory() {
        let spec = QuadratureSpec::default();
        let est = integrate(|x: f64| x.sin(), 0.0, 5.0 * PI, &spec).unwrap();
        assert!((est.value - 2.0).abs() < 1e-10);
        let est = integrate(|x: f64| (-x * x).exp(), -10.0, 10.0, &spec).unwrap();
        assert!((est.value - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn endpoint_singularity() {
        let spec = QuadratureSpec::default();
        let est = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &spec).unwrap();
        assert!((est.value - 2.0).abs() < 1e-7, "{est:?}");
    }

    #[test]
    fn semi_infinite_tails() {
        let spec = QuadratureSpec::default();
        let est = integrate_to_infinity(|x: f64| (-x).exp(), 0.0, &spec).unwrap();
        assert!((est.value - 1.0).abs() < 1e-9);
        // slow algebraic tail: ∫_1^∞ x^{-1.2} dx = 5
        let est = integrate_to_infinity(|x: f64| x.powf(-1.2), 1.0, &spec).unwrap();
        assert!((est.value - 5.0).abs() < 1e-6, "{est:?}");
        let est = integrate_to_infinity(|x: f64| 1.0 / (x * x), 1000.0, &spec).unwrap();
        assert!((est.value - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn step_with_breakpoint() {
        let spec = QuadratureSpec::default();
        let est = integrate_pieces(
            |x: f64| if x <= 1.0 { 1.0 } else { 0.0 },
            &[0.0, 1.0, 3.0],
            &spec,
        )
        .unwrap();
        assert!((est.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exhausting_subdivisions_is_an_error() {
        let spec = QuadratureSpec {
            max_subdivisions: 3,
            rel_tol: 1e-14,
            abs_tol: 1e-300,
            ..Default::default()
        };
        let r = integrate(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0, &spec);
        assert!(matches!(r, Err(Error::QuadratureFailed { .. })));
    }

    #[test]
    fn geomspace_endpoints() {
        let g = geomspace(1e-3, 1e3, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[6], 1e3);
        assert!((g[3] - 1.0).abs() < 1e-12);
    }
}
