//! C ABI for the `lifshitz` crate.
//!
//! Every fallible function returns a [`LifshitzStatus`]; on failure the message is
//! available from [`lifshitz_last_error_message`] on the same thread. Objects are
//! opaque handles created by `*_new`/constructor functions and released with the
//! matching `*_free`. Panics never cross the boundary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lifshitz::classical_idos::{estimate_nc, sample_potentials, PoissonConfig, PotentialSamples};
use lifshitz::laplace::{laplace_functional, Sandwich};
use lifshitz::potentials::{LandauParams, Potential};
use lifshitz::quad::QuadratureSpec;
use lifshitz::tails::{lifshitz_constant, predict, AsymptoticTail, Prediction, TailClass};
use lifshitz::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LifshitzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfScope = 3,
    NumericalFailure = 4,
    ConfigError = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Magnetic parameters; `ε₀ = ħ|Q|B/2m`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LifshitzLandau {
    pub mass: f64,
    pub charge: f64,
    pub field: f64,
    pub hbar: f64,
}

/// Sandwich bounds on the Laplace transform at one `t`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LifshitzBounds {
    pub t: f64,
    pub l_u: f64,
    pub l_conv: f64,
    pub lower: f64,
    pub upper: f64,
    pub ln_lower: f64,
    pub ln_upper: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LifshitzPredictionKind {
    Tail = 0,
    Bracket = 1,
    OutOfScope = 2,
}

/// `log N(ε₀+E) ∼ −amplitude · E^e_power · |log E|^log_e_power · S(E^slow_arg_power)`.
///
/// `slow_is_unity` is false when `S` is not identically 1; it is then only
/// reachable through [`lifshitz_predict_log_tail`] or the JSON form.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LifshitzTail {
    pub super_gaussian: bool,
    pub amplitude: f64,
    pub e_power: f64,
    pub log_e_power: f64,
    pub slow_arg_power: f64,
    pub slow_is_unity: bool,
}

/// An impurity potential.
pub struct LifshitzPotential(Potential);

/// Tabulated sandwich bounds for one potential.
pub struct LifshitzSandwich {
    // declared before `model` so it is dropped first
    sandwich: Sandwich<'static>,
    _model: Box<Potential>,
}

/// Monte Carlo samples of `V(0)`.
pub struct LifshitzSamples(PotentialSamples);

struct Failure(LifshitzStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidParameter(_) | Error::BelowThreshold { .. } => {
                LifshitzStatus::InvalidArgument
            }
            Error::OutOfScope(_) => LifshitzStatus::OutOfScope,
            Error::Config(_) | Error::NotSerializable(_) => LifshitzStatus::ConfigError,
            _ => LifshitzStatus::NumericalFailure,
        };
        Failure(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> LifshitzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            LifshitzStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            LifshitzStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(LifshitzStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn landau_of(l: &LifshitzLandau) -> Result<LandauParams, Failure> {
    Ok(LandauParams::new(l.mass, l.charge, l.field, l.hbar)?)
}

fn tail_of(t: &AsymptoticTail) -> LifshitzTail {
    LifshitzTail {
        super_gaussian: t.class == TailClass::SuperGaussian,
        amplitude: t.amplitude,
        e_power: t.e_power,
        log_e_power: t.log_e_power,
        slow_arg_power: t.slow_arg_power,
        slow_is_unity: t
            .slow
            .approx_eq(&lifshitz::regvar::SlowVarFn::Constant { c: 1.0 }, 0.0),
    }
}

fn emit(p: *mut *mut LifshitzPotential, model: Result<Potential, Error>) -> LifshitzStatus {
    guard(|| {
        let slot = unsafe { out(p, "out")? };
        *slot = Box::into_raw(Box::new(LifshitzPotential(model?)));
        Ok(())
    })
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lifshitz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn lifshitz_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static description of a status code; takes the integer so that any value is safe.
#[no_mangle]
pub extern "C" fn lifshitz_status_string(status: i32) -> *const c_char {
    let s: &'static [u8] = match status {
        0 => b"ok\0",
        1 => b"null pointer\0",
        2 => b"invalid argument\0",
        3 => b"out of theorem scope\0",
        4 => b"numerical failure\0",
        5 => b"configuration error\0",
        6 => b"buffer too small\0",
        7 => b"internal panic\0",
        _ => b"unknown status\0",
    };
    s.as_ptr().cast()
}

/// Default parameters: `m = |Q| = B = ħ = 1`.
#[no_mangle]
pub extern "C" fn lifshitz_landau_default() -> LifshitzLandau {
    let d = LandauParams::default();
    LifshitzLandau {
        mass: d.mass,
        charge: d.charge,
        field: d.field,
        hbar: d.hbar,
    }
}

/// Lowest Landau level `ε₀`.
///
/// # Safety
/// `landau` and `out_value` must be valid pointers or null.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_landau_lowest_level(
    landau: *const LifshitzLandau,
    out_value: *mut f64,
) -> LifshitzStatus {
    guard(|| {
        let l = landau_of(deref(landau, "landau")?)?;
        *out(out_value, "out_value")? = l.lowest_level();
        Ok(())
    })
}

/// Potential from its JSON form, e.g. `{"family": "gaussian", "g": 1, "lambda": 1}`.
///
/// # Safety
/// `json` must be a NUL-terminated string or null; `out_potential` a valid pointer or null.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_potential_from_json(
    json: *const c_char,
    out_potential: *mut *mut LifshitzPotential,
) -> LifshitzStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| {
            Failure(
                LifshitzStatus::ConfigError,
                format!("json is not UTF-8: {e}"),
            )
        })?;
        let model: Potential = serde_json::from_str(text)
            .map_err(|e| Failure(LifshitzStatus::ConfigError, e.to_string()))?;
        model.validate()?;
        *out(out_potential, "out_potential")? = Box::into_raw(Box::new(LifshitzPotential(model)));
        Ok(())
    })
}

/// `g` on the disk of radius `radius`.
///
/// # Safety
/// `out_potential` must be a valid pointer or null.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_potential_compact_disk(
    g: f64,
    radius: f64,
    out_potential: *mut *mut LifshitzPotential,
) -> LifshitzStatus {
    emit(out_potential, Potential::compact_disk(g, radius))
}

/// `g exp(−r²/λ²)`.
///
/// # Safety
/// `out_potential` must be a valid pointer or null.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_potential_gaussian(
    g: f64,
    lambda: f64,
    out_potential: *mut *mut LifshitzPotential,
) -> LifshitzStatus {
    emit(out_potential, Potential::gaussian(g, lambda))
}

/// `g exp(−(r/λ)^β)`, `0 < β < 2`.
///
/// # Safety
/// `out_potential` must be a valid pointer or null.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_potential_stretched_gaussian(
    g: f64,
    lambda: f64,
    beta: f64,
    out_potential: *mut *mut LifshitzPotential,
) -> LifshitzStatus {
    emit(
        out_potential,
        Potential::stretched_gaussian(g, lambda, beta),
    )
}

/// `g0 r^{−α}`, `α > 2`.
///
/// # Safety
/// `out_potential` must be a valid pointer or null.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_potential_algebraic(
    g0: f64,
    alpha: f64,
    out_potential: *mut *mut LifshitzPotential,
) -> LifshitzStatus {
    emit(out_potential, Potential::algebraic(g0, alpha))
}

/// Releases a potential; null is ignored.
///
/// # Safety
/// `potential` must come from a constructor of this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_potential_free(potential: *mut LifshitzPotential) {
    if !potential.is_null() {
        drop(Box::from_raw(potential));
    }
}

/// `U(r)`.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_potential_evaluate(
    potential: *const LifshitzPotential,
    r: f64,
    out_value: *mut f64,
) -> LifshitzStatus {
    guard(|| {
        let p = deref(potential, "potential")?;
        if !(r >= 0.0) {
            return Err(Failure(
                LifshitzStatus::InvalidArgument,
                format!("r must be non-negative, got {r}"),
            ));
        }
        *out(out_value, "out_value")? = p.0.evaluate(r);
        Ok(())
    })
}

/// `L_U(t) = 2π∫(1 − e^{−tU(r)}) r dr` with its error estimate.
///
/// # Safety
/// Pointers must be valid or null; `out_error` may be null.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_laplace_functional(
    potential: *const LifshitzPotential,
    t: f64,
    out_value: *mut f64,
    out_error: *mut f64,
) -> LifshitzStatus {
    guard(|| {
        let p = deref(potential, "potential")?;
        let v = laplace_functional(&p.0, t, &QuadratureSpec::default())?;
        *out(out_value, "out_value")? = v.value;
        if let Some(e) = out_error.as_mut() {
            *e = v.error;
        }
        Ok(())
    })
}

/// Tabulates the convolved profile once for all `t ≤ t_max`.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_sandwich_new(
    potential: *const LifshitzPotential,
    landau: *const LifshitzLandau,
    rho: f64,
    t_max: f64,
    out_sandwich: *mut *mut LifshitzSandwich,
) -> LifshitzStatus {
    guard(|| {
        let p = deref(potential, "potential")?;
        let l = landau_of(deref(landau, "landau")?)?;
        let slot = out(out_sandwich, "out_sandwich")?;
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Failure(
                LifshitzStatus::InvalidArgument,
                format!("t_max must be positive, got {t_max}"),
            ));
        }
        let model = Box::new(p.0.clone());
        // The heap allocation behind `model` lives in the same handle and outlives `sandwich`.
        let model_ref: &'static Potential = &*(model.as_ref() as *const Potential);
        let sandwich = Sandwich::new(model_ref, l, rho, t_max.ln(), &QuadratureSpec::default())?;
        *slot = Box::into_raw(Box::new(LifshitzSandwich {
            sandwich,
            _model: model,
        }));
        Ok(())
    })
}

/// Bounds at `t ≤ t_max`.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_sandwich_at(
    sandwich: *const LifshitzSandwich,
    t: f64,
    out_bounds: *mut LifshitzBounds,
) -> LifshitzStatus {
    guard(|| {
        let s = deref(sandwich, "sandwich")?;
        let r = s.sandwich.at(t)?;
        *out(out_bounds, "out_bounds")? = LifshitzBounds {
            t: r.t,
            l_u: r.l_u,
            l_conv: r.l_conv,
            lower: r.lower,
            upper: r.upper,
            ln_lower: r.ln_lower,
            ln_upper: r.ln_upper,
        };
        Ok(())
    })
}

/// # Safety
/// `sandwich` must come from [`lifshitz_sandwich_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_sandwich_free(sandwich: *mut LifshitzSandwich) {
    if !sandwich.is_null() {
        drop(Box::from_raw(sandwich));
    }
}

fn prediction(
    potential: *const LifshitzPotential,
    landau: *const LifshitzLandau,
    rho: f64,
    sharp: bool,
) -> Result<Prediction, Failure> {
    let p = unsafe { deref(potential, "potential")? };
    let l = landau_of(unsafe { deref(landau, "landau")? })?;
    Ok(predict(&p.0, &l, rho, sharp, true)?)
}

/// Classifies the potential and predicts the tail. A single tail is written to
/// both `out_lower` and `out_upper`; a Gaussian bracket to each side. Out of
/// scope returns `OutOfScope` with `out_kind` set.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_predict(
    potential: *const LifshitzPotential,
    landau: *const LifshitzLandau,
    rho: f64,
    sharp: bool,
    out_kind: *mut LifshitzPredictionKind,
    out_lower: *mut LifshitzTail,
    out_upper: *mut LifshitzTail,
) -> LifshitzStatus {
    guard(|| {
        let kind = out(out_kind, "out_kind")?;
        let lower = out(out_lower, "out_lower")?;
        let upper = out(out_upper, "out_upper")?;
        match prediction(potential, landau, rho, sharp)? {
            Prediction::Tail { tail } => {
                *kind = LifshitzPredictionKind::Tail;
                *lower = tail_of(&tail);
                *upper = *lower;
            }
            Prediction::Bracket { bracket } => {
                *kind = LifshitzPredictionKind::Bracket;
                *lower = tail_of(&bracket.lower);
                *upper = tail_of(&bracket.upper);
            }
            Prediction::OutOfScope { reason } => {
                *kind = LifshitzPredictionKind::OutOfScope;
                return Err(Failure(LifshitzStatus::OutOfScope, reason));
            }
        }
        Ok(())
    })
}

/// The predicted `log N(ε₀+E)` at `0 < E < 1`, both sides of a bracket.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_predict_log_tail(
    potential: *const LifshitzPotential,
    landau: *const LifshitzLandau,
    rho: f64,
    e: f64,
    out_lower: *mut f64,
    out_upper: *mut f64,
) -> LifshitzStatus {
    guard(|| {
        let lo = out(out_lower, "out_lower")?;
        let hi = out(out_upper, "out_upper")?;
        match prediction(potential, landau, rho, false)? {
            Prediction::Tail { tail } => {
                *lo = tail.log_tail(e)?;
                *hi = *lo;
            }
            Prediction::Bracket { bracket } => {
                *lo = bracket.lower.log_tail(e)?;
                *hi = bracket.upper.log_tail(e)?;
            }
            Prediction::OutOfScope { reason } => {
                return Err(Failure(LifshitzStatus::OutOfScope, reason))
            }
        }
        Ok(())
    })
}

/// The prediction as JSON. Writes at most `capacity` bytes including the NUL and
/// stores the required size in `out_needed`; returns `BufferTooSmall` if it did not fit.
///
/// # Safety
/// `buffer` must hold `capacity` bytes or be null with `capacity == 0`.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_predict_json(
    potential: *const LifshitzPotential,
    landau: *const LifshitzLandau,
    rho: f64,
    sharp: bool,
    buffer: *mut c_char,
    capacity: usize,
    out_needed: *mut usize,
) -> LifshitzStatus {
    guard(|| {
        let needed = out(out_needed, "out_needed")?;
        let pred = prediction(potential, landau, rho, sharp)?;
        let text = serde_json::to_string(&pred)
            .map_err(|e| Failure(LifshitzStatus::NumericalFailure, e.to_string()))?;
        *needed = text.len() + 1;
        if capacity < *needed {
            return Err(Failure(
                LifshitzStatus::BufferTooSmall,
                format!("need {} bytes", *needed),
            ));
        }
        if buffer.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(text.as_ptr(), buffer.cast::<u8>(), text.len());
        *buffer.add(text.len()) = 0;
        Ok(())
    })
}

/// `C(α, ρ)` of the power-law tail.
///
/// # Safety
/// `out_value` must be a valid pointer or null.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_constant_c(
    alpha: f64,
    rho: f64,
    out_value: *mut f64,
) -> LifshitzStatus {
    guard(|| {
        *out(out_value, "out_value")? = lifshitz_constant(alpha, rho)?;
        Ok(())
    })
}

/// Draws `n_samples` values of `V(0)` on the disk of radius `radius`.
/// Deterministic in `seed` regardless of thread count.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_samples_new(
    potential: *const LifshitzPotential,
    rho: f64,
    radius: f64,
    seed: u64,
    n_samples: usize,
    mean_field_tail: bool,
    out_samples: *mut *mut LifshitzSamples,
) -> LifshitzStatus {
    guard(|| {
        let p = deref(potential, "potential")?;
        let slot = out(out_samples, "out_samples")?;
        let cfg =
            PoissonConfig::new(rho, radius, seed, n_samples)?.with_mean_field_tail(mean_field_tail);
        let s = sample_potentials(&cfg, &p.0, &QuadratureSpec::default())?;
        *slot = Box::into_raw(Box::new(LifshitzSamples(s)));
        Ok(())
    })
}

/// Number of samples held.
///
/// # Safety
/// `samples` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_samples_len(samples: *const LifshitzSamples) -> usize {
    samples.as_ref().map_or(0, |s| s.0.values.len())
}

/// Copies the sampled `V(0)` into `values`, which holds `len` doubles.
///
/// # Safety
/// `values` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_samples_values(
    samples: *const LifshitzSamples,
    values: *mut f64,
    len: usize,
) -> LifshitzStatus {
    guard(|| {
        let s = deref(samples, "samples")?;
        if len < s.0.values.len() {
            return Err(Failure(
                LifshitzStatus::BufferTooSmall,
                format!("need {} values", s.0.values.len()),
            ));
        }
        if values.is_null() {
            return Err(null("values"));
        }
        ptr::copy_nonoverlapping(s.0.values.as_ptr(), values, s.0.values.len());
        Ok(())
    })
}

/// Classical IDOS `N_c(E)` and its standard error at `n` increasing energies.
///
/// # Safety
/// `energies`, `out_values` and `out_stderr` must each hold `n` doubles;
/// `out_stderr` may be null.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_samples_idos(
    samples: *const LifshitzSamples,
    landau: *const LifshitzLandau,
    energies: *const f64,
    n: usize,
    out_values: *mut f64,
    out_stderr: *mut f64,
) -> LifshitzStatus {
    guard(|| {
        let s = deref(samples, "samples")?;
        let l = landau_of(deref(landau, "landau")?)?;
        if energies.is_null() {
            return Err(null("energies"));
        }
        if out_values.is_null() {
            return Err(null("out_values"));
        }
        let es = std::slice::from_raw_parts(energies, n);
        let est = estimate_nc(&s.0, &l, es)?;
        ptr::copy_nonoverlapping(est.values.as_ptr(), out_values, n);
        if !out_stderr.is_null() {
            ptr::copy_nonoverlapping(est.stderr.as_ptr(), out_stderr, n);
        }
        Ok(())
    })
}

/// # Safety
/// `samples` must come from [`lifshitz_samples_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lifshitz_samples_free(samples: *mut LifshitzSamples) {
    if !samples.is_null() {
        drop(Box::from_raw(samples));
    }
}
