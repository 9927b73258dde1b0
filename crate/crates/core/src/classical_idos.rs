//! Monte Carlo for the Poissonian potential at the origin and the classical
//! integrated density of states `N_c(E) = (m/2πħ²) E[(E − V(0))₊]`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::laplace::laplace_functional;
use crate::potentials::LandauParams;
use crate::profile::{radial_moment, tail_mass, RadialProfile};
use crate::quad::QuadratureSpec;

/// Samples handled by one parallel task.
const BLOCK: usize = 4096;

/// Below this expected count the disk is treated as empty.
const MIN_EXPECTED_COUNT: f64 = 1e-30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonConfig {
    /// Mean impurity concentration.
    pub rho: f64,
    /// Radius of the sampling disk.
    pub radius: f64,
    pub seed: u64,
    pub n_samples: usize,
    /// Add the mean `ρ·2π∫_R^∞ U r dr` of the excluded impurities to every `V(0)`.
    #[serde(default)]
    pub mean_field_tail: bool,
}

impl PoissonConfig {
    pub fn new(rho: f64, radius: f64, seed: u64, n_samples: usize) -> Result<Self> {
        let c = Self {
            rho,
            radius,
            seed,
            n_samples,
            mean_field_tail: false,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_mean_field_tail(mut self, on: bool) -> Self {
        self.mean_field_tail = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.rho > 0.0 && self.rho.is_finite(), || {
            format!("rho must be positive, got {}", self.rho)
        })?;
        ensure(self.radius > 0.0 && self.radius.is_finite(), || {
            format!("radius must be positive, got {}", self.radius)
        })?;
        ensure(self.n_samples > 0, || "n_samples must be positive".into())?;
        ensure(self.expected_count().is_finite(), || {
            "expected point count overflows".into()
        })
    }

    /// `ρ π R²`.
    pub fn expected_count(&self) -> f64 {
        self.rho * PI * self.radius * self.radius
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonSample {
    pub points: Vec<[f64; 2]>,
    pub v_origin: f64,
}

/// Smallest `R` with `ρ·2π∫_R^∞ U r dr < δ`, doubled.
pub fn truncation_radius(
    model: &dyn RadialProfile,
    rho: f64,
    delta: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    ensure(rho > 0.0, || format!("rho must be positive, got {rho}"))?;
    ensure(delta > 0.0, || {
        format!("delta must be positive, got {delta}")
    })?;
    let excess = |r: f64| -> Result<f64> { Ok(rho * tail_mass(model, r, spec)?.value) };
    let r_min = model.scale().max(model.monotone_from()).max(1e-12);
    if excess(r_min)? < delta {
        return Ok(2.0 * r_min);
    }
    let mut hi = r_min;
    let mut n = 0;
    while excess(hi)? >= delta {
        hi *= 2.0;
        n += 1;
        if n > 200 || !hi.is_finite() {
            return Err(Error::Divergent(format!(
                "impurity tail mass does not fall below {delta}"
            )));
        }
    }
    let mut lo = hi / 2.0;
    while hi / lo > 1.0 + 1e-12 {
        let m = 0.5 * (lo + hi);
        if excess(m)? < delta {
            hi = m;
        } else {
            lo = m;
        }
    }
    Ok(2.0 * hi)
}

/// The generator for sample `index`: a ChaCha8 stream keyed by `(seed, index)`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws impurities in the disk; calls `visit(x, y, r, mark)` for each, with `mark` uniform on [0,1).
fn draw_points<F: FnMut(f64, f64, f64, f64)>(config: &PoissonConfig, index: u64, mut visit: F) {
    let mut rng = sample_rng(config.seed, index);
    let mean = config.expected_count();
    if mean < MIN_EXPECTED_COUNT {
        return;
    }
    let count = Poisson::new(mean)
        .expect("positive finite mean")
        .sample(&mut rng) as u64;
    for _ in 0..count {
        let r = config.radius * rng.random::<f64>().sqrt();
        let th = 2.0 * PI * rng.random::<f64>();
        let mark = rng.random::<f64>();
        visit(r * th.cos(), r * th.sin(), r, mark);
    }
}

fn mean_field_offset(
    config: &PoissonConfig,
    model: &dyn RadialProfile,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if config.mean_field_tail {
        Ok(config.rho * tail_mass(model, config.radius, spec)?.value)
    } else {
        Ok(0.0)
    }
}

/// Sample `index` of the field, with all impurity positions.
pub fn sample_field(
    config: &PoissonConfig,
    model: &dyn RadialProfile,
    index: u64,
    spec: &QuadratureSpec,
) -> Result<PoissonSample> {
    config.validate()?;
    let mut points = Vec::new();
    let mut v = mean_field_offset(config, model, spec)?;
    draw_points(config, index, |x, y, r, _| {
        points.push([x, y]);
        v += model.eval(r);
    });
    Ok(PoissonSample {
        points,
        v_origin: v,
    })
}

/// `V(0)` for every sample, in sample order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSamples {
    pub rho: f64,
    /// Deterministic mean-field part included in every value.
    pub offset: f64,
    pub values: Vec<f64>,
}

/// `V(0)` for all samples of `config`, in parallel blocks.
pub fn sample_potentials(
    config: &PoissonConfig,
    model: &dyn RadialProfile,
    spec: &QuadratureSpec,
) -> Result<PotentialSamples> {
    Ok(sample_potentials_thinned(config, model, &[1.0], spec)?.remove(0))
}

/// `V(0)` at the thinned concentrations `fraction · ρ`, from one coupled set of samples.
///
/// An impurity survives at fraction `p` when its mark is below `p`, so the
/// potentials are pathwise non-decreasing in the fraction.
pub fn sample_potentials_thinned(
    config: &PoissonConfig,
    model: &dyn RadialProfile,
    fractions: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<PotentialSamples>> {
    config.validate()?;
    ensure(!fractions.is_empty(), || {
        "no thinning fractions given".into()
    })?;
    for &p in fractions {
        ensure(p > 0.0 && p <= 1.0, || {
            format!("thinning fraction must lie in (0, 1], got {p}")
        })?;
    }
    let offset = mean_field_offset(config, model, spec)?;
    let k = fractions.len();
    let n = config.n_samples;
    let blocks: Vec<Vec<f64>> = (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(n);
            let mut out = vec![0.0; (hi - lo) * k];
            for (i, idx) in (lo..hi).enumerate() {
                let row = &mut out[i * k..(i + 1) * k];
                draw_points(config, idx as u64, |_, _, r, mark| {
                    let u = model.eval(r);
                    for (slot, &p) in row.iter_mut().zip(fractions) {
                        if mark < p {
                            *slot += u;
                        }
                    }
                });
            }
            out
        })
        .collect();
    let mut res: Vec<PotentialSamples> = fractions
        .iter()
        .map(|&p| PotentialSamples {
            rho: p * config.rho,
            offset: p * offset,
            values: Vec::with_capacity(n),
        })
        .collect();
    for block in blocks {
        for row in block.chunks(k) {
            for (j, v) in row.iter().enumerate() {
                let off = res[j].offset;
                res[j].values.push(v + off);
            }
        }
    }
    Ok(res)
}

/// Running count, mean and second central moment; merging is Chan's pairwise update.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        Moments {
            count: self.count + other.count,
            mean: self.mean + d * other.count as f64 / n,
            m2: self.m2 + other.m2 + d * d * self.count as f64 * other.count as f64 / n,
        }
    }

    pub fn from_values(xs: &[f64]) -> Moments {
        xs.chunks(BLOCK)
            .map(|c| {
                let mut m = Moments::default();
                c.iter().for_each(|&x| m.push(x));
                m
            })
            .fold(Moments::default(), |a, b| a.merge(&b))
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        self.m2 / (self.count - 1) as f64
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Sample mean and variance of `V(0)` against `ρ∫U` and `ρ∫U²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampbellCheck {
    pub mean: f64,
    pub mean_stderr: f64,
    pub target_mean: f64,
    pub variance: f64,
    pub variance_stderr: f64,
    pub target_variance: f64,
}

impl CampbellCheck {
    pub fn mean_z(&self) -> f64 {
        (self.mean - self.target_mean) / self.mean_stderr
    }

    pub fn variance_z(&self) -> f64 {
        (self.variance - self.target_variance) / self.variance_stderr
    }
}

/// Compares the samples with the Campbell moments.
///
/// With a mean-field tail the excluded impurities enter only through their mean,
/// so the variance target is taken over the sampling disk.
pub fn campbell_check(
    samples: &PotentialSamples,
    config: &PoissonConfig,
    model: &dyn RadialProfile,
    spec: &QuadratureSpec,
) -> Result<CampbellCheck> {
    ensure(samples.values.len() >= 2, || {
        "need at least two samples".into()
    })?;
    let m = Moments::from_values(&samples.values);
    let n = m.count as f64;
    let var = m.variance();
    let m4 = samples
        .values
        .iter()
        .map(|v| (v - m.mean).powi(4))
        .sum::<f64>()
        / n;
    let rho = samples.rho;
    let target_mean = rho * radial_moment(model, 1, spec)?.value;
    let sq_all = radial_moment(model, 2, spec)?.value;
    let sq_out = {
        let sq = SquaredProfile(model);
        tail_mass(&sq, config.radius, spec)?.value
    };
    let target_variance = rho
        * if config.mean_field_tail {
            sq_all - sq_out
        } else {
            sq_all
        };
    let target_mean = if config.mean_field_tail {
        target_mean
    } else {
        target_mean - rho * tail_mass(model, config.radius, spec)?.value
    };
    Ok(CampbellCheck {
        mean: m.mean,
        mean_stderr: m.stderr(),
        target_mean,
        variance: var,
        variance_stderr: ((m4 - var * var).max(0.0) / n).sqrt(),
        target_variance,
    })
}

struct SquaredProfile<'a>(&'a dyn RadialProfile);

impl RadialProfile for SquaredProfile<'_> {
    fn ln_eval(&self, r: f64) -> f64 {
        2.0 * self.0.ln_eval(r)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints()
    }
    fn scale(&self) -> f64 {
        self.0.scale()
    }
    fn monotone_from(&self) -> f64 {
        self.0.monotone_from()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdosEstimate {
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_samples: usize,
}

/// `N_c` on an energy grid, all grid points from the same samples.
pub fn estimate_nc(
    samples: &PotentialSamples,
    landau: &LandauParams,
    energies: &[f64],
) -> Result<IdosEstimate> {
    landau.validate()?;
    ensure(!samples.values.is_empty(), || "no samples".into())?;
    ensure(energies.iter().all(|e| *e > 0.0 && e.is_finite()), || {
        "energies must be positive".into()
    })?;
    ensure(energies.windows(2).all(|w| w[0] < w[1]), || {
        "energies must be increasing".into()
    })?;
    let dos = landau.free_dos();
    let mut values = Vec::with_capacity(energies.len());
    let mut stderr = Vec::with_capacity(energies.len());
    for &e in energies {
        let xs: Vec<f64> = samples
            .values
            .iter()
            .map(|v| dos * (e - v).max(0.0))
            .collect();
        let m = Moments::from_values(&xs);
        values.push(m.mean.max(0.0));
        stderr.push(m.stderr());
    }
    // The per-sample integrand is monotone in E; removes rounding-level inversions in the means.
    for i in 1..values.len() {
        if values[i] < values[i - 1] {
            values[i] = values[i - 1];
        }
    }
    Ok(IdosEstimate {
        energies: energies.to_vec(),
        values,
        stderr,
        n_samples: samples.values.len(),
    })
}

/// Samples and estimates `N_c` in one call.
pub fn estimate_nc_from_config(
    config: &PoissonConfig,
    model: &dyn RadialProfile,
    landau: &LandauParams,
    energies: &[f64],
    spec: &QuadratureSpec,
) -> Result<IdosEstimate> {
    let s = sample_potentials(config, model, spec)?;
    estimate_nc(&s, landau, energies)
}

/// Exponential-formula check at one `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckRow {
    pub t: f64,
    /// `exp(−ρ L_U(t))`
    pub predicted: f64,
    /// Empirical mean of `e^{−t V(0)}` divided by `predicted`.
    pub ratio: f64,
    pub stderr: f64,
    /// Predicted value below [`RARE_EVENT_LEVEL`]; no ratio is formed.
    pub skipped: bool,
}

pub const RARE_EVENT_LEVEL: f64 = 1e-6;

impl CrosscheckRow {
    /// `|ratio − 1| ≤ k · stderr`; skipped rows pass.
    pub fn within(&self, k: f64) -> bool {
        self.skipped || (self.ratio - 1.0).abs() <= k * self.stderr
    }
}

/// Empirical `E[e^{−tV(0)}]` against `exp(−ρ L_U(t))`.
pub fn laplace_mc_crosscheck(
    samples: &PotentialSamples,
    model: &dyn RadialProfile,
    ts: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<CrosscheckRow>> {
    ts.iter()
        .map(|&t| {
            let predicted = (-samples.rho * laplace_functional(model, t, spec)?.value).exp();
            if predicted < RARE_EVENT_LEVEL {
                return Ok(CrosscheckRow {
                    t,
                    predicted,
                    ratio: f64::NAN,
                    stderr: f64::NAN,
                    skipped: true,
                });
            }
            let xs: Vec<f64> = samples.values.iter().map(|v| (-t * v).exp()).collect();
            let m = Moments::from_values(&xs);
            Ok(CrosscheckRow {
                t,
                predicted,
                ratio: m.mean / predicted,
                stderr: m.stderr() / predicted,
                skipped: false,
            })
        })
        .collect()
}

/// Least-squares line through `(ln(1/E), ln(−ln N_c(E)))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Energy range where `N_c` is resolved: positive, relative standard error at most
/// `max_rel_stderr`, and at most `max_value` (above it `ln(−ln N_c)` flattens out).
pub fn resolved_window(
    estimate: &IdosEstimate,
    max_rel_stderr: f64,
    max_value: f64,
) -> Option<(f64, f64)> {
    let ok: Vec<f64> = (0..estimate.energies.len())
        .filter(|&i| {
            let v = estimate.values[i];
            v > 0.0 && v <= max_value && estimate.stderr[i] <= max_rel_stderr * v
        })
        .map(|i| estimate.energies[i])
        .collect();
    Some((*ok.first()?, *ok.last()?))
}

pub fn tail_exponent_fit(estimate: &IdosEstimate, window: (f64, f64)) -> Result<TailFit> {
    let (lo, hi) = window;
    let pts: Vec<(f64, f64)> = estimate
        .energies
        .iter()
        .zip(&estimate.values)
        .filter(|(e, n)| **e >= lo && **e <= hi && **n > 0.0 && **n < 1.0)
        .map(|(e, n)| ((1.0 / e).ln(), (-n.ln()).ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} usable points in [{lo}, {hi}], need 4",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    ensure(sxx > 0.0, || "energies in the window coincide".into())?;
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    Ok(TailFit {
        slope,
        intercept: my - slope * mx,
        r2,
        points: pts.len(),
    })
}
