//! C ABI over the selftrig library.
//!
//! Every fallible function returns a [`SelftrigStatus`]. On failure the
//! message is kept per thread and can be read with
//! [`selftrig_last_error_message`]. Matrices are passed row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use selftrig::cli::design_report;
use selftrig::config::ExperimentConfig;
use selftrig::design::{feasibility_check, DecayExponent, DesignParams, LinearSystem};
use selftrig::report::{self, DesignReport};
use selftrig::scheduler::{self, precompute};
use selftrig::sim::{self, DisturbanceKind, DisturbanceSpec, VerifyOptions};
use selftrig::{Error, Matrix};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelftrigStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Design = 4,
    Simulation = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Design handle. Create with `selftrig_design_new` or
/// `selftrig_design_from_config`, release with `selftrig_design_free`.
pub struct SelftrigDesign {
    report: DesignReport,
}

/// Result of one Γ_d evaluation.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SelftrigDecision {
    pub n_k: usize,
    pub tau_k: f64,
    pub evaluations: usize,
    pub op_count: usize,
}

/// Summary of a self-triggered simulation.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SelftrigRunStats {
    pub executions: usize,
    pub min_tau: f64,
    pub mean_tau: f64,
    pub max_tau: f64,
    pub eiss_violations: usize,
    pub lemma2_violations: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> SelftrigStatus {
    match e {
        Error::Simulation(_) => SelftrigStatus::Simulation,
        Error::Dimension(_) | Error::OutOfRange(_) => SelftrigStatus::InvalidArgument,
        Error::Config(_) | Error::Io { .. } | Error::Json { .. } => SelftrigStatus::Config,
        _ => SelftrigStatus::Design,
    }
}

struct Fail(SelftrigStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SelftrigStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SelftrigStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SelftrigStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            SelftrigStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn matrix(p: *const f64, rows: usize, cols: usize, what: &str) -> Result<Matrix, Fail> {
    let data = slice(p, rows * cols, what)?;
    Ok(Matrix::from_vec(rows, cols, data.to_vec())?)
}

unsafe fn handle<'a>(h: *const SelftrigDesign) -> Result<&'a SelftrigDesign, Fail> {
    h.as_ref().ok_or_else(|| null("design handle"))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed(report: DesignReport) -> *mut SelftrigDesign {
    Box::into_raw(Box::new(SelftrigDesign { report }))
}

/// Designs a self-triggered implementation for ẋ = Ax + BKx(t_k).
///
/// `a` is m×m, `b` is m×l, `k` is l×m. `q` may be null for the identity.
/// `tau_min <= 0` selects the largest certified value. `decay_exponent` is
/// 1 or 2.
///
/// # Safety
/// Matrix pointers must reference arrays of the stated sizes; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn selftrig_design_new(
    a: *const f64,
    b: *const f64,
    k: *const f64,
    m: usize,
    l: usize,
    q: *const f64,
    lambda_ratio: f64,
    delta: f64,
    tau_max: f64,
    tau_min: f64,
    decay_exponent: u32,
    out: *mut *mut SelftrigDesign,
) -> SelftrigStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        if m == 0 || l == 0 {
            return Err(Fail(SelftrigStatus::InvalidArgument, "m and l must be positive".into()));
        }
        let decay = match decay_exponent {
            1 => DecayExponent::One,
            2 => DecayExponent::Two,
            d => {
                return Err(Fail(
                    SelftrigStatus::InvalidArgument,
                    format!("decay_exponent must be 1 or 2, got {d}"),
                ))
            }
        };
        let sys = LinearSystem::new(matrix(a, m, m, "a")?, matrix(b, m, l, "b")?, matrix(k, l, m, "k")?)?;
        let q = if q.is_null() { None } else { Some(matrix(q, m, m, "q")?) };
        let params = DesignParams {
            q: q.clone(),
            lambda_ratio,
            delta,
            tau_max,
            tau_min: (tau_min > 0.0).then_some(tau_min),
            decay,
        };
        let d = selftrig::design::design(&sys, &params)?;
        let tables = precompute(&d.system, &d.cert, &d.trigger)?;
        let source = if q.is_some() { "explicit" } else { "identity" };
        let rep = DesignReport::new(&d, tables, String::new(), source, lambda_ratio)?;
        out.write(boxed(rep));
        Ok(())
    })
}

/// Designs from a JSON experiment configuration given as text.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn selftrig_design_from_config(
    config_json: *const c_char,
    out: *mut *mut SelftrigDesign,
) -> SelftrigStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        if config_json.is_null() {
            return Err(null("config_json"));
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|_| Fail(SelftrigStatus::InvalidArgument, "config is not UTF-8".into()))?;
        let cfg = ExperimentConfig::from_json(text)?;
        out.write(boxed(design_report(&cfg)?));
        Ok(())
    })
}

/// # Safety
/// `design` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn selftrig_design_free(design: *mut SelftrigDesign) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}

/// # Safety
/// `design` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn selftrig_design_dim(design: *const SelftrigDesign) -> usize {
    design.as_ref().map_or(0, |d| d.report.m)
}

fn get(design: *const SelftrigDesign, f: impl Fn(&DesignReport) -> f64) -> f64 {
    // SAFETY: callers pass null or a live handle
    unsafe { design.as_ref() }.map_or(f64::NAN, |d| f(&d.report))
}

/// τ*_min; NaN for a null handle.
///
/// # Safety
/// `design` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn selftrig_design_tau_star(design: *const SelftrigDesign) -> f64 {
    get(design, |r| r.tau_star)
}

/// τ_min; NaN for a null handle.
///
/// # Safety
/// `design` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn selftrig_design_tau_min(design: *const SelftrigDesign) -> f64 {
    get(design, |r| r.trigger.tau_min)
}

/// τ_max; NaN for a null handle.
///
/// # Safety
/// `design` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn selftrig_design_tau_max(design: *const SelftrigDesign) -> f64 {
    get(design, |r| r.trigger.tau_max)
}

/// Δ; NaN for a null handle.
///
/// # Safety
/// `design` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn selftrig_design_delta(design: *const SelftrigDesign) -> f64 {
    get(design, |r| r.trigger.delta)
}

/// λ; NaN for a null handle.
///
/// # Safety
/// `design` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn selftrig_design_lambda(design: *const SelftrigDesign) -> f64 {
    get(design, |r| r.lambda)
}

/// λ_o; NaN for a null handle.
///
/// # Safety
/// `design` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn selftrig_design_lambda_o(design: *const SelftrigDesign) -> f64 {
    get(design, |r| r.lambda_o)
}

/// σ; NaN for a null handle.
///
/// # Safety
/// `design` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn selftrig_design_sigma(design: *const SelftrigDesign) -> f64 {
    get(design, |r| r.gains.sigma)
}

/// Coefficient of ‖δ‖∞ in the gain γ; NaN for a null handle.
///
/// # Safety
/// `design` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn selftrig_design_gamma_total_coeff(design: *const SelftrigDesign) -> f64 {
    get(design, |r| r.gains.gamma_total_coeff)
}

/// Writes N_min and N_max.
///
/// # Safety
/// `design` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn selftrig_design_grid(
    design: *const SelftrigDesign,
    n_min: *mut usize,
    n_max: *mut usize,
) -> SelftrigStatus {
    guard(|| {
        let d = handle(design)?;
        write_out(n_min, d.report.trigger.n_min, "n_min")?;
        write_out(n_max, d.report.trigger.n_max, "n_max")
    })
}

/// Copies P (m×m, row-major) into `out`, which holds `len` doubles.
///
/// # Safety
/// `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn selftrig_design_p(design: *const SelftrigDesign, out: *mut f64, len: usize) -> SelftrigStatus {
    guard(|| {
        let d = handle(design)?;
        let p = d.report.p.as_slice();
        if len < p.len() {
            return Err(Fail(SelftrigStatus::BufferTooSmall, format!("need {} doubles", p.len())));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        std::ptr::copy_nonoverlapping(p.as_ptr(), out, p.len());
        Ok(())
    })
}

/// Serializes the design report as JSON into `buf` (NUL-terminated).
/// `needed` receives the required size including the terminator, so a
/// first call with `buf_len = 0` can size the buffer.
///
/// # Safety
/// `buf` must hold `buf_len` writable bytes (or be null when `buf_len` is 0).
#[no_mangle]
pub unsafe extern "C" fn selftrig_design_to_json(
    design: *const SelftrigDesign,
    buf: *mut c_char,
    buf_len: usize,
    needed: *mut usize,
) -> SelftrigStatus {
    guard(|| {
        let d = handle(design)?;
        let json = report::to_json(&d.report)?;
        let n = json.len() + 1;
        if !needed.is_null() {
            needed.write(n);
        }
        if buf_len < n {
            return Err(Fail(SelftrigStatus::BufferTooSmall, format!("need {n} bytes")));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        std::ptr::copy_nonoverlapping(json.as_ptr().cast::<c_char>(), buf, json.len());
        buf.add(json.len()).write(0);
        Ok(())
    })
}

fn decision(d: scheduler::TriggerDecision) -> SelftrigDecision {
    SelftrigDecision {
        n_k: d.n_k,
        tau_k: d.tau_k,
        evaluations: d.evaluations,
        op_count: d.op_count,
    }
}

/// Next inter-execution time for the measured state `x` (length m).
///
/// # Safety
/// `x` must hold m doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn selftrig_gamma_d(
    design: *const SelftrigDesign,
    x: *const f64,
    len: usize,
    out: *mut SelftrigDecision,
) -> SelftrigStatus {
    guard(|| {
        let d = handle(design)?;
        let x = slice(x, len, "x")?;
        let r = scheduler::gamma_d(x, &d.report.tables)?;
        write_out(out, decision(r), "out")
    })
}

/// As `selftrig_gamma_d`, through the packed monomial tables.
///
/// # Safety
/// As `selftrig_gamma_d`.
#[no_mangle]
pub unsafe extern "C" fn selftrig_gamma_d_veronese(
    design: *const SelftrigDesign,
    x: *const f64,
    len: usize,
    out: *mut SelftrigDecision,
) -> SelftrigStatus {
    guard(|| {
        let d = handle(design)?;
        let x = slice(x, len, "x")?;
        let r = scheduler::gamma_d_veronese(x, &d.report.tables)?;
        write_out(out, decision(r), "out")
    })
}

/// xᵀQ_n x for 0 ≤ n ≤ N_max.
///
/// # Safety
/// `x` must hold m doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn selftrig_h_d(
    design: *const SelftrigDesign,
    x: *const f64,
    len: usize,
    n: usize,
    out: *mut f64,
) -> SelftrigStatus {
    guard(|| {
        let d = handle(design)?;
        let x = slice(x, len, "x")?;
        write_out(out, scheduler::h_d(x, n, &d.report.tables)?, "out")
    })
}

/// Whether a platform with instruction time `tau_c` can run the trigger.
///
/// # Safety
/// `feasible` must be writable.
#[no_mangle]
pub unsafe extern "C" fn selftrig_feasibility(
    design: *const SelftrigDesign,
    tau_c: f64,
    feasible: *mut bool,
) -> SelftrigStatus {
    guard(|| {
        let d = handle(design)?;
        let f = feasibility_check(d.report.m, tau_c, &d.report.trigger)?;
        write_out(feasible, f.feasible, "feasible")
    })
}

/// Simulates the self-triggered loop from `x0` over [0, t_end].
/// `disturbance_kind`: 0 zero, 1 constant, 2 sinusoid, 3 bounded noise.
///
/// # Safety
/// `x0` must hold m doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn selftrig_simulate(
    design: *const SelftrigDesign,
    x0: *const f64,
    len: usize,
    t_end: f64,
    integrator_divisor: usize,
    disturbance_kind: u32,
    amplitude: f64,
    frequency: f64,
    seed: u64,
    out: *mut SelftrigRunStats,
) -> SelftrigStatus {
    guard(|| {
        let d = handle(design)?;
        let x0 = slice(x0, len, "x0")?;
        let kind = match disturbance_kind {
            0 => DisturbanceKind::Zero,
            1 => DisturbanceKind::Constant,
            2 => DisturbanceKind::Sinusoid,
            3 => DisturbanceKind::BoundedNoise,
            k => {
                return Err(Fail(
                    SelftrigStatus::InvalidArgument,
                    format!("unknown disturbance kind {k}"),
                ))
            }
        };
        let dist = DisturbanceSpec { kind, amplitude, frequency, seed };
        let rep = &d.report;
        let cert = rep.cert();
        let (traj, log) =
            sim::run_self_triggered(&rep.system, &cert, &rep.tables, &dist, x0, t_end, integrator_divisor)?;
        let v = sim::verify(&rep.system, &traj, &log, &rep.gains, &cert, &dist, &VerifyOptions::default())?;
        let stats = SelftrigRunStats {
            executions: log.total_executions,
            min_tau: log.min_tau,
            mean_tau: log.mean_tau,
            max_tau: log.max_tau,
            eiss_violations: v.eiss.violations,
            lemma2_violations: v.lemma2.violations,
        };
        write_out(out, stats, "out")
    })
}

/// Copies the last error message of the calling thread into `buf`
/// (NUL-terminated, truncated to fit). Returns the full message length.
///
/// # Safety
/// `buf` must hold `buf_len` writable bytes or be null.
#[no_mangle]
pub unsafe extern "C" fn selftrig_last_error_message(buf: *mut c_char, buf_len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && buf_len > 0 {
            let n = msg.len().min(buf_len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            buf.add(n).write(0);
        }
        msg.len()
    })
}

/// Static, NUL-terminated version string.
#[no_mangle]
pub extern "C" fn selftrig_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
