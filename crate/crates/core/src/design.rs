//! Offline design: Lyapunov certificate, minimum inter-execution time,
//! trigger parameters and EISS gains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, det, expm, induced_norm2, lyap_solve, sqrtm_spd, sym_eig, Matrix};

/// Default fraction of the certified decay rate enforced by the trigger.
pub const DEFAULT_LAMBDA_RATIO: f64 = 0.8;

/// Relative Richardson tolerance for the ∫|e^{Ar}|dr quadrature.
const QUADRATURE_RTOL: f64 = 1e-6;
const QUADRATURE_MAX_REFINEMENTS: usize = 12;

/// Plant and feedback: ẋ = A x + B u, u = K x(t_k).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSystem {
    a: Matrix,
    b: Matrix,
    k: Matrix,
}

impl LinearSystem {
    /// Validates dimensions and that A + BK is Hurwitz.
    pub fn new(a: Matrix, b: Matrix, k: Matrix) -> Result<Self> {
        let sys = Self::new_unchecked(a, b, k)?;
        lyap_solve(&sys.closed_loop(), &Matrix::identity(sys.m()))?;
        Ok(sys)
    }

    /// Dimension checks only; the closed loop may be unstable.
    pub fn new_unchecked(a: Matrix, b: Matrix, k: Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dim(format!("A must be square, got {}x{}", a.rows(), a.cols())));
        }
        let m = a.rows();
        if b.rows() != m {
            return Err(Error::dim(format!("B has {} rows, expected {m}", b.rows())));
        }
        let l = b.cols();
        if k.rows() != l || k.cols() != m {
            return Err(Error::dim(format!(
                "K is {}x{}, expected {l}x{m}",
                k.rows(),
                k.cols()
            )));
        }
        Ok(Self { a, b, k })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn k(&self) -> &Matrix {
        &self.k
    }

    /// State dimension.
    pub fn m(&self) -> usize {
        self.a.rows()
    }

    /// Input dimension.
    pub fn l(&self) -> usize {
        self.b.cols()
    }

    pub fn bk(&self) -> Matrix {
        &self.b * &self.k
    }

    pub fn closed_loop(&self) -> Matrix {
        &self.a + &self.bk()
    }
}

/// V(x) = (xᵀPx)^{1/2} together with its certified and enforced decay rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovCert {
    pub p: Matrix,
    pub p_half: Matrix,
    /// Tight decay rate of V along the continuous closed loop.
    pub lambda_o: f64,
    /// Rate enforced by the trigger, 0 < lambda < lambda_o.
    pub lambda: f64,
    pub q: Matrix,
}

impl LyapunovCert {
    pub fn v(&self, x: &[f64]) -> f64 {
        self.p.quad_form(x).max(0.0).sqrt()
    }

    pub fn p_eigen_bounds(&self) -> Result<(f64, f64)> {
        let e = sym_eig(&self.p)?;
        Ok((e.min(), e.max()))
    }
}

/// Builds the certificate: P solves (A+BK)ᵀP + P(A+BK) = −Q,
/// λ_o = ½ λ_min(P^{-1/2} Q P^{-1/2}) and λ = lambda_ratio · λ_o.
pub fn make_certificate(sys: &LinearSystem, q: &Matrix, lambda_ratio: f64) -> Result<LyapunovCert> {
    if !(lambda_ratio > 0.0 && lambda_ratio < 1.0) {
        return Err(Error::Config(format!(
            "lambda_ratio must lie in (0,1), got {lambda_ratio}"
        )));
    }
    let p = lyap_solve(&sys.closed_loop(), q)?;
    let p_half = sqrtm_spd(&p)?;
    let p_inv_half = sym_eig(&p)?.map(|v| 1.0 / v.sqrt());
    let scaled = (&(&p_inv_half * q) * &p_inv_half).symmetrize();
    let lambda_o = 0.5 * sym_eig(&scaled)?.min();
    if lambda_o <= 0.0 {
        return Err(Error::NotHurwitz(format!("non-positive decay rate {lambda_o}")));
    }
    Ok(LyapunovCert {
        p,
        p_half,
        lambda_o,
        lambda: lambda_ratio * lambda_o,
        q: q.clone(),
    })
}

/// F = [A+BK, BK; −A−BK, −BK], the 2m×2m generator of (ξ, ξ(t_k) − ξ).
pub fn build_f(sys: &LinearSystem) -> Matrix {
    let m = sys.m();
    let bk = sys.bk();
    let acl = &sys.a + &bk;
    let mut f = Matrix::zeros(2 * m, 2 * m);
    f.set_block(0, 0, &acl);
    f.set_block(0, m, &bk);
    f.set_block(m, 0, &-&acl);
    f.set_block(m, m, &-&bk);
    f
}

/// C = [I 0], m×2m.
fn c_matrix(m: usize) -> Matrix {
    let mut c = Matrix::zeros(m, 2 * m);
    c.set_block(0, 0, &Matrix::identity(m));
    c
}

/// Exponent `k` of the decay factor e^{−kλτ} used in M(τ).
///
/// `Two` matches the squared form of the triggering function,
/// ξᵀPξ ≤ xᵀPx·e^{−2λτ}; `One` reproduces the factor written as e^{−λτ}.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum DecayExponent {
    One,
    #[default]
    Two,
}

impl DecayExponent {
    pub fn factor(self) -> f64 {
        match self {
            DecayExponent::One => 1.0,
            DecayExponent::Two => 2.0,
        }
    }
}

impl TryFrom<u8> for DecayExponent {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(DecayExponent::One),
            2 => Ok(DecayExponent::Two),
            other => Err(format!("decay_exponent must be 1 or 2, got {other}")),
        }
    }
}

impl From<DecayExponent> for u8 {
    fn from(d: DecayExponent) -> u8 {
        match d {
            DecayExponent::One => 1,
            DecayExponent::Two => 2,
        }
    }
}

/// M(τ) = C(e^{Fᵀτ}CᵀPCe^{Fτ} − CᵀPC e^{−kλτ})Cᵀ.
pub fn m_of_tau(
    sys: &LinearSystem,
    cert: &LyapunovCert,
    tau: f64,
    decay: DecayExponent,
) -> Result<Matrix> {
    let m = sys.m();
    let c = c_matrix(m);
    let ct = c.transpose();
    let eft = expm(&build_f(sys), tau)?;
    // C e^{Fτ} Cᵀ is the held-input transition matrix from ξ(t_k).
    let transition = &(&c * &eft) * &ct;
    let grow = &(&transition.transpose() * &cert.p) * &transition;
    let shrink = cert.p.scale((-decay.factor() * cert.lambda * tau).exp());
    Ok((&grow - &shrink).symmetrize())
}

/// det M(τ) / det P. Same zeros and sign as det M(τ), invariant under P → cP.
fn normalized_det(
    sys: &LinearSystem,
    cert: &LyapunovCert,
    det_p: f64,
    tau: f64,
    decay: DecayExponent,
) -> Result<f64> {
    Ok(det(&m_of_tau(sys, cert, tau, decay)?)? / det_p)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinTimeOptions {
    pub grid_step: f64,
    pub tau_cap: f64,
    pub tol: f64,
    pub decay: DecayExponent,
}

impl MinTimeOptions {
    /// Grid step Δ/100, cap 10/λ, tolerance 1e-9.
    pub fn for_delta(delta: f64, cert: &LyapunovCert) -> Self {
        Self {
            grid_step: delta / 100.0,
            tau_cap: 10.0 / cert.lambda,
            tol: 1e-9,
            decay: DecayExponent::Two,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinTime {
    pub tau: f64,
    /// No root below the cap; `tau` then equals the cap.
    pub no_root: bool,
    pub det_evaluations: usize,
}

/// Smallest τ > 0 with det M(τ) = 0.
///
/// Scans det M on a uniform grid starting at `grid_step`, bisects the first
/// sign change, and treats a grid-local minimum of |det M| below √tol as a
/// candidate tangential root (refined by golden-section search and accepted
/// when it reaches `tol`). The returned value is the lower end of the final
/// bracket, so it never exceeds the true root by more than rounding.
pub fn min_time(sys: &LinearSystem, cert: &LyapunovCert, opts: &MinTimeOptions) -> Result<MinTime> {
    if !(opts.grid_step > 0.0 && opts.tau_cap > opts.grid_step && opts.tol > 0.0) {
        return Err(Error::Config(format!(
            "invalid min_time options: grid_step={}, tau_cap={}, tol={}",
            opts.grid_step, opts.tau_cap, opts.tol
        )));
    }
    let det_p = det(&cert.p)?;
    let mut evals = 0usize;
    let mut eval = |tau: f64| -> Result<f64> {
        evals += 1;
        normalized_det(sys, cert, det_p, tau, opts.decay)
    };
    let tangent_threshold = opts.tol.sqrt();

    let mut prev_tau = opts.grid_step;
    let mut prev = eval(prev_tau)?;
    if prev == 0.0 {
        return Ok(MinTime { tau: prev_tau, no_root: false, det_evaluations: evals });
    }
    // (tau, value) two grid points back, for local-minimum detection
    let mut before: Option<(f64, f64)> = None;
    let mut i = 1usize;
    loop {
        i += 1;
        let tau = opts.grid_step * i as f64;
        if tau > opts.tau_cap {
            break;
        }
        let cur = eval(tau)?;
        if cur == 0.0 {
            return Ok(MinTime { tau, no_root: false, det_evaluations: evals });
        }
        if cur.signum() != prev.signum() {
            let (mut lo, mut hi) = (prev_tau, tau);
            let lo_sign = prev.signum();
            while hi - lo > opts.tol {
                let mid = 0.5 * (lo + hi);
                let v = eval(mid)?;
                if v == 0.0 {
                    lo = mid;
                    break;
                }
                if v.signum() == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(MinTime { tau: lo, no_root: false, det_evaluations: evals });
        }
        if let Some((t0, v0)) = before {
            if prev.abs() < v0.abs() && prev.abs() < cur.abs() && prev.abs() < tangent_threshold {
                if let Some(root) = golden_min_abs(&mut eval, t0, tau, opts.tol)? {
                    return Ok(MinTime { tau: root, no_root: false, det_evaluations: evals });
                }
            }
        }
        before = Some((prev_tau, prev));
        prev_tau = tau;
        prev = cur;
    }
    Ok(MinTime {
        tau: opts.tau_cap,
        no_root: true,
        det_evaluations: evals,
    })
}

/// Golden-section minimization of |f| on [a, b]; returns the minimizer when
/// the minimum reaches `tol`.
fn golden_min_abs(
    f: &mut impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<Option<f64>> {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c)?.abs();
    let mut fd = f(d)?.abs();
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c)?.abs();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d)?.abs();
        }
    }
    let (x, fx) = if fc < fd { (c, fc) } else { (d, fd) };
    Ok((fx <= tol).then_some(x))
}

/// Sampling step, execution-time bounds and their grid indices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriggerConfig {
    pub delta: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub n_min: usize,
    pub n_max: usize,
}

/// ⌊x⌋ tolerant of x landing a few ulps below an integer (3.0/0.1 = 29.999…).
fn grid_floor(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as usize
    } else {
        x.floor() as usize
    }
}

/// τ_min = Δ⌊τ*/Δ⌋, N_min, N_max = ⌊τ_max/Δ⌋ and τ_max snapped to N_max·Δ.
pub fn choose_trigger(tau_star: f64, delta: f64, tau_max: f64) -> Result<TriggerConfig> {
    choose_trigger_with(tau_star, delta, tau_max, None)
}

/// As [`choose_trigger`], with an optional explicit τ_min that must not exceed
/// τ*. An explicit value is also snapped down to the Δ grid.
pub fn choose_trigger_with(
    tau_star: f64,
    delta: f64,
    tau_max: f64,
    tau_min: Option<f64>,
) -> Result<TriggerConfig> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Config(format!("delta must be positive, got {delta}")));
    }
    if !(tau_star > 0.0 && tau_star.is_finite()) {
        return Err(Error::Config(format!("tau_star must be positive, got {tau_star}")));
    }
    if delta > tau_star {
        return Err(Error::Config(format!(
            "sampling step delta={delta} exceeds tau*_min={tau_star}; reduce delta"
        )));
    }
    if !(tau_max >= delta && tau_max.is_finite()) {
        return Err(Error::Config(format!(
            "tau_max={tau_max} must be finite and at least delta={delta}"
        )));
    }
    let upper = match tau_min {
        Some(t) if t > tau_star => {
            return Err(Error::Config(format!(
                "tau_min={t} exceeds tau*_min={tau_star}; the stability guarantee requires tau_min <= tau*_min"
            )))
        }
        Some(t) if t < delta => {
            return Err(Error::Config(format!("tau_min={t} is below delta={delta}")))
        }
        Some(t) => t,
        None => tau_star,
    };
    let mut n_min = grid_floor(upper / delta).max(1);
    // never round above the certified bound
    while n_min > 1 && n_min as f64 * delta > tau_star {
        n_min -= 1;
    }
    let n_max = grid_floor(tau_max / delta);
    if n_max < n_min {
        return Err(Error::Config(format!(
            "tau_max={tau_max} is below tau_min={}",
            n_min as f64 * delta
        )));
    }
    Ok(TriggerConfig {
        delta,
        tau_min: n_min as f64 * delta,
        tau_max: n_max as f64 * delta,
        n_min,
        n_max,
    })
}

/// G = [A'+A'ᵀ, (BK)'; (BK)'ᵀ, 0] with X' = P^{1/2} X P^{-1/2}, and its
/// extreme eigenvalues ρ = λ_max(G), μ = λ_min(G).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GMatrix {
    pub g: Matrix,
    pub rho: f64,
    pub mu: f64,
}

pub fn build_g(sys: &LinearSystem, cert: &LyapunovCert) -> Result<GMatrix> {
    let m = sys.m();
    let p_inv_half = sym_eig(&cert.p)?.map(|v| 1.0 / v.sqrt());
    let a_t = &(&cert.p_half * sys.a()) * &p_inv_half;
    let bk_t = &(&cert.p_half * &sys.bk()) * &p_inv_half;
    let mut g = Matrix::zeros(2 * m, 2 * m);
    g.set_block(0, 0, &(&a_t + &a_t.transpose()));
    g.set_block(0, m, &bk_t);
    g.set_block(m, 0, &bk_t.transpose());
    let g = g.symmetrize();
    let e = sym_eig(&g)?;
    Ok(GMatrix {
        rho: e.max(),
        mu: e.min(),
        g,
    })
}

/// ∫₀ᵀ |e^{Ar}| dr by composite Simpson with step ≤ `max_step`, refined by
/// halving until two successive estimates agree to 1e-6 relative.
pub fn exp_norm_integral(a: &Matrix, t: f64, max_step: f64) -> Result<f64> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Config(format!("integration horizon must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if !(max_step > 0.0) {
        return Err(Error::Config(format!("quadrature step must be positive, got {max_step}")));
    }
    let simpson = |n: usize| -> Result<f64> {
        let h = t / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * induced_norm2(&expm(a, h * i as f64)?)?;
        }
        Ok(acc * h / 3.0)
    };
    let mut n = ((t / max_step).ceil() as usize).max(2);
    if n % 2 == 1 {
        n += 1;
    }
    let mut coarse = simpson(n)?;
    for _ in 0..QUADRATURE_MAX_REFINEMENTS {
        n *= 2;
        let fine = simpson(n)?;
        if (fine - coarse).abs() <= QUADRATURE_RTOL * fine.abs() {
            return Ok(fine);
        }
        coarse = fine;
    }
    Ok(coarse)
}

/// Coefficient c of γ_{P,T}(s) = c·s, c = λ_max(P)/λ_min(P)^{1/2} · ∫₀ᵀ|e^{Ar}|dr.
pub fn gamma_pt(p_like: &Matrix, a: &Matrix, t: f64, max_step: f64) -> Result<f64> {
    let e = sym_eig(p_like)?;
    if e.min() <= 0.0 {
        return Err(Error::NotSpd { min_eigenvalue: e.min() });
    }
    Ok(e.max() / e.min().sqrt() * exp_norm_integral(a, t, max_step)?)
}

/// g(Δ, N_max) = ρ_P (e^{(ρ+2λ)μΔ/(μ−ρ)} + e^{2λ(N_max−1)Δ}(e^{(ρ+2λ)μΔ/(μ−ρ)} − e^{2λμΔ/(μ−ρ)}))^{1/2}
pub fn g_factor(rho_p: f64, rho: f64, mu: f64, lambda: f64, delta: f64, n_max: usize) -> Result<f64> {
    if mu == rho {
        return Err(Error::DegenerateG(rho));
    }
    let base = mu * delta / (mu - rho);
    let e_full = ((rho + 2.0 * lambda) * base).exp();
    let e_decay = (2.0 * lambda * base).exp();
    let growth = (2.0 * lambda * (n_max as f64 - 1.0) * delta).exp();
    Ok(rho_p * (e_full + growth * (e_full - e_decay)).sqrt())
}

/// Gains of the EISS estimate |ξ(t)| ≤ σ|x|e^{−λt} + γ(‖δ‖∞), with
/// γ(s) = gamma_total_coeff · s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EissGains {
    pub sigma: f64,
    pub lambda: f64,
    pub rho_p: f64,
    pub g_value: f64,
    pub rho: f64,
    pub mu: f64,
    /// γ_{P,T} coefficient at T = N_max·Δ.
    pub gamma_p_coeff: f64,
    /// γ_{I,T} coefficient at T = N_max·Δ.
    pub gamma_i_coeff: f64,
    pub gamma_total_coeff: f64,
    pub lambda_min_p: f64,
    pub tau_min: f64,
}

impl EissGains {
    pub fn beta(&self, s: f64, t: f64) -> f64 {
        self.sigma * s * (-self.lambda * t).exp()
    }

    pub fn gamma(&self, s: f64) -> f64 {
        self.gamma_total_coeff * s
    }

    pub fn bound(&self, x0_norm: f64, t: f64, dist_norm: f64) -> f64 {
        self.beta(x0_norm, t) + self.gamma(dist_norm)
    }
}

pub fn eiss_gains(sys: &LinearSystem, cert: &LyapunovCert, trig: &TriggerConfig) -> Result<EissGains> {
    let (lmin, lmax) = cert.p_eigen_bounds()?;
    let rho_p = (lmax / lmin).sqrt();
    let gm = build_g(sys, cert)?;
    let g_value = g_factor(rho_p, gm.rho, gm.mu, cert.lambda, trig.delta, trig.n_max)?;
    let horizon = trig.n_max as f64 * trig.delta;
    let step = trig.delta / 4.0;
    let integral = exp_norm_integral(sys.a(), horizon, step)?;
    let gamma_p_coeff = lmax / lmin.sqrt() * integral;
    let gamma_i_coeff = integral;
    let gamma_total_coeff = gamma_p_coeff * lmin.powf(-0.5) * g_value
        / (1.0 - (-cert.lambda * trig.tau_min).exp())
        + gamma_i_coeff;
    Ok(EissGains {
        sigma: rho_p * g_value,
        lambda: cert.lambda,
        rho_p,
        g_value,
        rho: gm.rho,
        mu: gm.mu,
        gamma_p_coeff,
        gamma_i_coeff,
        gamma_total_coeff,
        lambda_min_p: lmin,
        tau_min: trig.tau_min,
    })
}

/// Platform feasibility of the triggering computation for an instruction
/// time τ_c: (3/2)(m²+m)τ_c ≤ τ_min and (m²+m)τ_c ≤ Δ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub m: usize,
    pub tau_c: f64,
    pub execution_time: f64,
    pub tau_min: f64,
    pub execution_ok: bool,
    pub step_time: f64,
    pub delta: f64,
    pub step_ok: bool,
    pub feasible: bool,
    pub max_tau_c: f64,
}

pub fn feasibility_check(m: usize, tau_c: f64, trig: &TriggerConfig) -> Result<FeasibilityReport> {
    if !(tau_c > 0.0 && tau_c.is_finite()) {
        return Err(Error::Config(format!("tau_c must be positive, got {tau_c}")));
    }
    let ops = (m * m + m) as f64;
    // compare against the division form so that the exact boundary passes
    let limit_exec = trig.tau_min / (1.5 * ops);
    let limit_step = trig.delta / ops;
    let execution_ok = tau_c <= limit_exec;
    let step_ok = tau_c <= limit_step;
    Ok(FeasibilityReport {
        m,
        tau_c,
        execution_time: 1.5 * ops * tau_c,
        tau_min: trig.tau_min,
        execution_ok,
        step_time: ops * tau_c,
        delta: trig.delta,
        step_ok,
        feasible: execution_ok && step_ok,
        max_tau_c: limit_exec.min(limit_step),
    })
}

/// Everything the offline stage produces for one configuration.
#[derive(Clone, Debug)]
pub struct Design {
    pub system: LinearSystem,
    pub cert: LyapunovCert,
    pub tau_star: MinTime,
    pub trigger: TriggerConfig,
    pub gains: EissGains,
    pub decay: DecayExponent,
}

/// Design parameters beyond the system itself.
#[derive(Clone, Debug)]
pub struct DesignParams {
    pub q: Option<Matrix>,
    pub lambda_ratio: f64,
    pub delta: f64,
    pub tau_max: f64,
    pub tau_min: Option<f64>,
    pub decay: DecayExponent,
}

/// Runs the whole offline pipeline.
pub fn design(sys: &LinearSystem, params: &DesignParams) -> Result<Design> {
    let q = params.q.clone().unwrap_or_else(|| Matrix::identity(sys.m()));
    let cert = make_certificate(sys, &q, params.lambda_ratio)?;
    let mut opts = MinTimeOptions::for_delta(params.delta, &cert);
    opts.decay = params.decay;
    let tau_star = min_time(sys, &cert, &opts)?;
    // with no root the certified bound is the cap itself, clipped to tau_max
    let certified = if tau_star.no_root {
        tau_star.tau.min(params.tau_max)
    } else {
        tau_star.tau
    };
    let trigger = choose_trigger_with(certified, params.delta, params.tau_max, params.tau_min)?;
    let gains = eiss_gains(sys, &cert, &trigger)?;
    Ok(Design {
        system: sys.clone(),
        cert,
        tau_star,
        trigger,
        gains,
        decay: params.decay,
    })
}

/// P^{-1/2}
pub fn inv_sqrt(p: &Matrix) -> Result<Matrix> {
    let e = linalg::sym_eig(p)?;
    if e.min() <= 0.0 {
        return Err(Error::NotSpd { min_eigenvalue: e.min() });
    }
    Ok(e.map(|v| 1.0 / v.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ẋ = u, u = −x(t_k).
    fn scalar() -> LinearSystem {
        LinearSystem::new(Matrix::scalar(0.0), Matrix::scalar(1.0), Matrix::scalar(-1.0)).unwrap()
    }

    fn double_integrator() -> LinearSystem {
        LinearSystem::new(
            Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap(),
            Matrix::from_rows(&[[0.0], [1.0]]).unwrap(),
            Matrix::from_rows(&[[-1.0, -2.0]]).unwrap(),
        )
        .unwrap()
    }

    /// Root of τ − 1 = e^{−λτ} on (1, 3) by bisection; independent of M(τ).
    fn scalar_root(lambda: f64) -> f64 {
        let f = |t: f64| (1.0 - t).abs() - (-lambda * t).exp();
        let (mut lo, mut hi) = (1.0, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn scalar_root_oracle_values() {
        // frozen from the bisection oracle above
        assert!((scalar_root(0.5) - 1.4776700622632155).abs() < 1e-12);
        assert!((scalar_root(0.25) - 1.6602920666258032).abs() < 1e-12);
        assert!((scalar_root(0.75) - 1.3604683098035313).abs() < 1e-12);
    }

    #[test]
    fn scalar_certificate() {
        let cert = make_certificate(&scalar(), &Matrix::scalar(1.0), 0.5).unwrap();
        assert!((cert.p[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((cert.lambda_o - 1.0).abs() < 1e-14);
        assert!((cert.lambda - 0.5).abs() < 1e-14);
    }

    #[test]
    fn isotropic_certificate() {
        let sys = LinearSystem::new(
            Matrix::zeros(2, 2),
            Matrix::identity(2),
            Matrix::identity(2).scale(-1.0),
        )
        .unwrap();
        let cert = make_certificate(&sys, &Matrix::identity(2), 0.8).unwrap();
        assert!((&cert.p - &Matrix::identity(2).scale(0.5)).max_abs() < 1e-15);
        assert!((cert.lambda_o - 1.0).abs() < 1e-14);
    }

    #[test]
    fn certificate_rejects_bad_inputs() {
        let unstable =
            LinearSystem::new_unchecked(Matrix::scalar(1.0), Matrix::scalar(0.0), Matrix::scalar(0.0))
                .unwrap();
        assert!(matches!(
            make_certificate(&unstable, &Matrix::scalar(1.0), 0.5),
            Err(Error::NotHurwitz(_))
        ));
        assert!(LinearSystem::new(Matrix::scalar(1.0), Matrix::scalar(0.0), Matrix::scalar(0.0)).is_err());
        assert!(make_certificate(&scalar(), &Matrix::scalar(1.0), 1.0).is_err());
        assert!(make_certificate(&scalar(), &Matrix::scalar(1.0), 0.0).is_err());
    }

    #[test]
    fn dimension_checks() {
        let e = LinearSystem::new_unchecked(
            Matrix::zeros(2, 2),
            Matrix::zeros(3, 1),
            Matrix::zeros(1, 2),
        );
        assert!(matches!(e, Err(Error::Dimension(_))));
        let e = LinearSystem::new_unchecked(Matrix::zeros(2, 2), Matrix::zeros(2, 1), Matrix::zeros(2, 1));
        assert!(matches!(e, Err(Error::Dimension(_))));
    }

    #[test]
    fn f_blocks() {
        let f = build_f(&scalar());
        assert_eq!(f, Matrix::from_rows(&[[-1.0, -1.0], [1.0, 1.0]]).unwrap());

        let a = Matrix::from_rows(&[[0.5, 1.0], [-2.0, 0.25]]).unwrap();
        let sys = LinearSystem::new_unchecked(a.clone(), Matrix::zeros(2, 1), Matrix::zeros(1, 2)).unwrap();
        let f = build_f(&sys);
        assert_eq!(f.block(0, 0, 2, 2), a);
        assert_eq!(f.block(2, 0, 2, 2), a.scale(-1.0));
        assert_eq!(f.block(0, 2, 2, 2), Matrix::zeros(2, 2));
        assert_eq!(f.block(2, 2, 2, 2), Matrix::zeros(2, 2));

        let f = build_f(&double_integrator());
        let bk = Matrix::from_rows(&[[0.0, 0.0], [-1.0, -2.0]]).unwrap();
        assert_eq!(f.block(0, 2, 2, 2), bk);
        assert_eq!(f.block(2, 2, 2, 2), bk.scale(-1.0));
    }

    #[test]
    fn m_of_tau_scalar() {
        let sys = scalar();
        let cert = make_certificate(&sys, &Matrix::scalar(1.0), 0.5).unwrap();
        let m0 = m_of_tau(&sys, &cert, 0.0, DecayExponent::Two).unwrap();
        assert_eq!(m0.max_abs(), 0.0);
        let m1 = m_of_tau(&sys, &cert, 1.0, DecayExponent::Two).unwrap();
        assert!((m1[(0, 0)] - 0.5 * (0.0 - (-1.0f64).exp())).abs() < 1e-14);
        let root = scalar_root(0.5);
        let mr = m_of_tau(&sys, &cert, root, DecayExponent::Two).unwrap();
        assert!(mr[(0, 0)].abs() < 1e-12);
        // exponent one: 0.5((1-τ)² − e^{-0.5τ})
        let m1 = m_of_tau(&sys, &cert, 0.5, DecayExponent::One).unwrap();
        assert!((m1[(0, 0)] - 0.5 * (0.25 - (-0.25f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn min_time_scalar() {
        let sys = scalar();
        let cert = make_certificate(&sys, &Matrix::scalar(1.0), 0.5).unwrap();
        let r = min_time(&sys, &cert, &MinTimeOptions::for_delta(0.1, &cert)).unwrap();
        assert!(!r.no_root);
        assert!((r.tau - scalar_root(0.5)).abs() < 1e-6, "{}", r.tau);
        assert!(r.tau <= scalar_root(0.5) + 1e-12);
    }

    #[test]
    fn min_time_decreases_with_lambda() {
        let sys = scalar();
        let taus: Vec<f64> = [0.25, 0.5, 0.75]
            .iter()
            .map(|&ratio| {
                let cert = make_certificate(&sys, &Matrix::scalar(1.0), ratio).unwrap();
                let t = min_time(&sys, &cert, &MinTimeOptions::for_delta(0.1, &cert)).unwrap().tau;
                assert!((t - scalar_root(ratio)).abs() < 1e-6);
                t
            })
            .collect();
        assert!(taus[0] > taus[1] && taus[1] > taus[2]);
    }

    #[test]
    fn min_time_no_root_hits_cap() {
        // A+BK = -I with B K = 0 block: F is block triangular and M(τ) < 0 for all τ
        let sys = LinearSystem::new(
            Matrix::identity(2).scale(-1.0),
            Matrix::zeros(2, 1),
            Matrix::zeros(1, 2),
        )
        .unwrap();
        let cert = make_certificate(&sys, &Matrix::identity(2), 0.5).unwrap();
        let opts = MinTimeOptions { grid_step: 0.01, tau_cap: 2.0, tol: 1e-9, decay: DecayExponent::Two };
        let r = min_time(&sys, &cert, &opts).unwrap();
        assert!(r.no_root);
        assert_eq!(r.tau, 2.0);
    }

    #[test]
    fn min_time_invariant_under_p_scaling() {
        let sys = double_integrator();
        let cert = make_certificate(&sys, &Matrix::identity(2), 0.8).unwrap();
        let mut scaled = cert.clone();
        scaled.p = cert.p.scale(7.5);
        let opts = MinTimeOptions::for_delta(0.05, &cert);
        let a = min_time(&sys, &cert, &opts).unwrap();
        let b = min_time(&sys, &scaled, &opts).unwrap();
        assert!((a.tau - b.tau).abs() < 1e-9);
    }

    #[test]
    fn choose_trigger_examples() {
        let t = choose_trigger(1.4785, 0.1, 3.0).unwrap();
        assert_eq!((t.n_min, t.n_max), (14, 30));
        assert!((t.tau_min - 1.4).abs() < 1e-12);
        assert!((t.tau_max - 3.0).abs() < 1e-12);

        let t = choose_trigger(1.0, 1.0, 1.0).unwrap();
        assert_eq!((t.n_min, t.n_max), (1, 1));
        assert_eq!(t.tau_min, 1.0);

        let t = choose_trigger(1.4785, 0.3, 2.0).unwrap();
        assert_eq!((t.n_min, t.n_max), (4, 6));
        assert!((t.tau_min - 1.2).abs() < 1e-12);
        assert!((t.tau_max - 1.8).abs() < 1e-12);
    }

    #[test]
    fn choose_trigger_errors() {
        let e = choose_trigger(1.0, 1.5, 3.0).unwrap_err();
        assert!(matches!(e, Error::Config(ref s) if s.contains("reduce delta")));
        assert!(choose_trigger(1.0, 0.1, 0.05).is_err());
        assert!(choose_trigger(1.0, 0.1, 0.5).is_err());
        assert!(choose_trigger_with(1.0, 0.1, 3.0, Some(1.2)).is_err());
        let t = choose_trigger_with(1.0, 0.1, 3.0, Some(0.55)).unwrap();
        assert_eq!(t.n_min, 5);
    }

    #[test]
    fn tau_min_never_exceeds_tau_star() {
        for i in 1..200 {
            let delta = 0.01 * i as f64;
            let tau_star = delta * 7.0;
            let t = choose_trigger(tau_star, delta, 10.0 * tau_star).unwrap();
            assert!(t.tau_min <= tau_star);
        }
    }

    #[test]
    fn g_matrix_scalar() {
        let sys = scalar();
        let cert = make_certificate(&sys, &Matrix::scalar(1.0), 0.5).unwrap();
        let g = build_g(&sys, &cert).unwrap();
        assert!((&g.g - &Matrix::from_rows(&[[0.0, -1.0], [-1.0, 0.0]]).unwrap()).max_abs() < 1e-14);
        assert!((g.rho - 1.0).abs() < 1e-14);
        assert!((g.mu + 1.0).abs() < 1e-14);
    }

    #[test]
    fn g_matrix_block_structure() {
        let a = Matrix::from_rows(&[[-1.0, 0.3], [0.3, -2.0]]).unwrap();
        let sys = LinearSystem::new(a.clone(), Matrix::zeros(2, 1), Matrix::zeros(1, 2)).unwrap();
        let cert = make_certificate(&sys, &Matrix::identity(2), 0.5).unwrap();
        let g = build_g(&sys, &cert).unwrap();
        assert!(g.g.block(0, 2, 2, 2).max_abs() < 1e-15);
        assert!(g.g.block(2, 2, 2, 2).max_abs() == 0.0);
        assert!(g.mu <= 0.0);

        let g = build_g(&double_integrator(), &make_certificate(&double_integrator(), &Matrix::identity(2), 0.8).unwrap()).unwrap();
        assert!(g.mu < 0.0 && g.rho > 0.0);
    }

    #[test]
    fn gamma_pt_examples() {
        assert_eq!(gamma_pt(&Matrix::identity(1), &Matrix::scalar(0.0), 0.0, 0.01).unwrap(), 0.0);
        let c = gamma_pt(&Matrix::identity(1), &Matrix::scalar(0.0), 2.0, 0.025).unwrap();
        assert!((c - 2.0).abs() < 1e-12);
        // (0.5/√0.5)(1 − e^{-1}), exact scalar integral
        let c = gamma_pt(&Matrix::scalar(0.5), &Matrix::scalar(-1.0), 1.0, 0.025).unwrap();
        let exact = 0.5 / 0.5f64.sqrt() * (1.0 - (-1.0f64).exp());
        assert!((c - exact).abs() < 1e-7 * exact, "{c} vs {exact}");
        assert!((exact - 0.44697673367510304).abs() < 1e-15);
    }

    #[test]
    fn g_limit_is_rho_p() {
        let g = g_factor(1.7, 2.0, -1.0, 0.4, 1e-9, 1).unwrap();
        assert!((g - 1.7).abs() < 1e-6);
        assert!(matches!(g_factor(1.0, 0.0, 0.0, 0.1, 0.1, 3), Err(Error::DegenerateG(_))));
    }

    #[test]
    fn g_nondecreasing_in_n_max() {
        let mut prev = 0.0;
        for n in 1..=50 {
            let g = g_factor(1.3, 1.5, -0.8, 0.4, 0.1, n).unwrap();
            assert!(g >= prev);
            prev = g;
        }
    }

    #[test]
    fn scalar_gains_are_consistent() {
        let sys = scalar();
        let cert = make_certificate(&sys, &Matrix::scalar(1.0), 0.5).unwrap();
        let trig = choose_trigger(1.4776700622632155, 0.1, 3.0).unwrap();
        let gains = eiss_gains(&sys, &cert, &trig).unwrap();
        assert!((gains.rho_p - 1.0).abs() < 1e-14);
        assert!(gains.g_value >= gains.rho_p);
        assert!(gains.sigma >= gains.rho_p);
        // A = 0: ∫₀³ 1 dr = 3, λ_M/λ_m^{1/2} = 0.5/√0.5
        assert!((gains.gamma_i_coeff - 3.0).abs() < 1e-12);
        assert!((gains.gamma_p_coeff - 3.0 * 0.5f64.sqrt()).abs() < 1e-12);
        let expect_total = gains.gamma_p_coeff / 0.5f64.sqrt() * gains.g_value
            / (1.0 - (-0.5 * trig.tau_min).exp())
            + 3.0;
        assert!((gains.gamma_total_coeff - expect_total).abs() < 1e-12);
    }

    #[test]
    fn feasibility_examples() {
        let trig = TriggerConfig { delta: 0.1, tau_min: 1.4, tau_max: 3.0, n_min: 14, n_max: 30 };
        let r = feasibility_check(2, 1e-6, &trig).unwrap();
        assert!(r.feasible && r.execution_ok && r.step_ok);
        assert!((r.execution_time - 9e-6).abs() < 1e-18);
        assert!((r.step_time - 6e-6).abs() < 1e-18);

        let r = feasibility_check(2, 0.1 / 6.0, &trig).unwrap();
        assert!(r.step_ok && r.feasible);

        let r = feasibility_check(2, 1.0, &trig).unwrap();
        assert!(!r.feasible);
        assert!((r.max_tau_c - 0.1 / 6.0).abs() < 1e-18);
        assert!(feasibility_check(2, 0.0, &trig).is_err());
    }
}
