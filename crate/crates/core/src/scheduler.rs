//! Runtime triggering.
//!
//! The discrete triggering function is evaluated in squared form,
//! h_d(x, n) = xᵀ Q_n x with Q_n = Λ_nᵀ P Λ_n − e^{−2λnΔ} P, where
//! Λ_n = e^{AnΔ} + Φ(nΔ) B K is the held-input transition over n steps.
//! Its sign agrees with V(Λ_n x) − V(x) e^{−λnΔ} because both terms of the
//! latter are nonnegative.

use serde::{Deserialize, Serialize};

use crate::design::{LinearSystem, LyapunovCert, TriggerConfig};
use crate::error::{Error, Result};
use crate::linalg::{expm, Matrix};

/// Precomputed quadratic forms for one design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriggerTables {
    pub m: usize,
    pub delta: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub tau_min: f64,
    /// Q_0 … Q_{N_max}.
    pub q_forms: Vec<Matrix>,
    /// Λ_0 … Λ_{N_max}.
    pub transitions: Vec<Matrix>,
    /// Packed coefficients for n = N_min+1 … N_max (q = N_max − N_min vectors
    /// of length m(m+1)/2). The form at N_min needs no run-time check since
    /// τ_min ≤ τ*_min already certifies it.
    pub veronese: Option<Vec<Vec<f64>>>,
}

/// Where the direct evaluator starts its scan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanStart {
    /// Every s = 1 … N_max.
    #[default]
    Full,
    /// Skip s ≤ N_min, which the design certifies.
    AfterNMin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriggerDecision {
    pub n_k: usize,
    pub tau_k: f64,
    /// Number of quadratic forms evaluated.
    pub evaluations: usize,
    /// Scalar multiplications, additions and comparisons performed.
    pub op_count: usize,
}

/// Λ(t) = e^{At} + Φ(t)BK with Φ(t) = ∫₀ᵗ e^{As} ds, both read off
/// exp([[A, I], [0, 0]] t).
pub fn held_transition(sys: &LinearSystem, t: f64) -> Result<Matrix> {
    let m = sys.m();
    let mut aug = Matrix::zeros(2 * m, 2 * m);
    aug.set_block(0, 0, sys.a());
    aug.set_block(0, m, &Matrix::identity(m));
    let e = expm(&aug, t)?;
    let phi = e.block(0, m, m, m);
    Ok(&e.block(0, 0, m, m) + &(&phi * &sys.bk()))
}

pub fn veronese_len(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Upper-triangular packing of a symmetric form; off-diagonal entries doubled
/// so that xᵀQx = Σ coeff·z with z = (x_i x_j)_{i≤j}.
pub fn pack_veronese(q: &Matrix) -> Vec<f64> {
    let m = q.rows();
    let mut out = Vec::with_capacity(veronese_len(m));
    for i in 0..m {
        for j in i..m {
            out.push(if i == j { q[(i, i)] } else { 2.0 * q[(i, j)] });
        }
    }
    out
}

pub fn precompute(
    sys: &LinearSystem,
    cert: &LyapunovCert,
    trig: &TriggerConfig,
) -> Result<TriggerTables> {
    let mut q_forms = Vec::with_capacity(trig.n_max + 1);
    let mut transitions = Vec::with_capacity(trig.n_max + 1);
    for n in 0..=trig.n_max {
        let t = n as f64 * trig.delta;
        let lam = if n == 0 {
            Matrix::identity(sys.m())
        } else {
            held_transition(sys, t)?
        };
        let grow = &(&lam.transpose() * &cert.p) * &lam;
        let q = (&grow - &cert.p.scale((-2.0 * cert.lambda * t).exp())).symmetrize();
        q_forms.push(q);
        transitions.push(lam);
    }
    let veronese = Some(
        q_forms[trig.n_min + 1..]
            .iter()
            .map(pack_veronese)
            .collect(),
    );
    Ok(TriggerTables {
        m: sys.m(),
        delta: trig.delta,
        n_min: trig.n_min,
        n_max: trig.n_max,
        tau_min: trig.tau_min,
        q_forms,
        transitions,
        veronese,
    })
}

impl TriggerTables {
    /// q = N_max − N_min.
    pub fn q(&self) -> usize {
        self.n_max - self.n_min
    }

    fn tau_for(&self, n_k: usize) -> f64 {
        self.tau_min.max(n_k as f64 * self.delta)
    }

    fn check_state(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.m {
            return Err(Error::dim(format!("state has {} entries, expected {}", x.len(), self.m)));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("trigger state"));
        }
        Ok(())
    }

    /// Same design with a smaller N_max.
    pub fn truncated(&self, n_max: usize) -> Result<TriggerTables> {
        if n_max < self.n_min || n_max > self.n_max {
            return Err(Error::OutOfRange(format!(
                "N_max {n_max} outside [{}, {}]",
                self.n_min, self.n_max
            )));
        }
        let mut t = self.clone();
        t.n_max = n_max;
        t.q_forms.truncate(n_max + 1);
        t.transitions.truncate(n_max + 1);
        if let Some(v) = t.veronese.as_mut() {
            v.truncate(n_max - self.n_min);
        }
        Ok(t)
    }
}

/// h_d(x, n) = xᵀ Q_n x.
pub fn h_d(x: &[f64], n: usize, tables: &TriggerTables) -> Result<f64> {
    tables.check_state(x)?;
    let q = tables.q_forms.get(n).ok_or_else(|| {
        Error::OutOfRange(format!("sample index {n} exceeds N_max = {}", tables.n_max))
    })?;
    Ok(q.quad_form(x))
}

/// Γ_d(x) = max{τ_min, n_k Δ}, with n_k the largest n ≤ N_max such that
/// h_d(x, s) ≤ 0 for all s ≤ n. Scans forward and stops at the first
/// violation.
pub fn gamma_d(x: &[f64], tables: &TriggerTables) -> Result<TriggerDecision> {
    gamma_d_with(x, tables, ScanStart::Full)
}

pub fn gamma_d_with(x: &[f64], tables: &TriggerTables, start: ScanStart) -> Result<TriggerDecision> {
    tables.check_state(x)?;
    let m = tables.m;
    let first = match start {
        ScanStart::Full => 1,
        ScanStart::AfterNMin => tables.n_min + 1,
    };
    let mut n_k = tables.n_max;
    let mut evaluations = 0;
    for s in first..=tables.n_max {
        evaluations += 1;
        if tables.q_forms[s].quad_form(x) > 0.0 {
            n_k = s - 1;
            break;
        }
    }
    Ok(TriggerDecision {
        n_k,
        tau_k: tables.tau_for(n_k),
        evaluations,
        // m² + m multiply-adds per form plus the comparison
        op_count: evaluations * (2 * (m * m + m) + 1),
    })
}

/// Veronese-embedded evaluation: builds z = (x_i x_j)_{i≤j} once, then one
/// dot product and one comparison per form for n = N_min+1 … N_max.
///
/// Worst case (no violation) costs exactly q + (2q+1)·m(m+1)/2 operations:
/// m(m+1)/2 products for z, then 2·m(m+1)/2 + 1 per form.
pub fn gamma_d_veronese(x: &[f64], tables: &TriggerTables) -> Result<TriggerDecision> {
    tables.check_state(x)?;
    let coeffs = tables
        .veronese
        .as_ref()
        .ok_or_else(|| Error::Config("Veronese tables were not precomputed".into()))?;
    let m = tables.m;
    let len = veronese_len(m);
    let mut ops = 0usize;

    let mut z = Vec::with_capacity(len);
    for i in 0..m {
        for j in i..m {
            z.push(x[i] * x[j]);
            ops += 1;
        }
    }

    let mut n_k = tables.n_max;
    let mut evaluations = 0;
    for (offset, c) in coeffs.iter().enumerate() {
        evaluations += 1;
        let mut acc = 0.0;
        for (ci, zi) in c.iter().zip(&z) {
            acc += ci * zi;
            ops += 2;
        }
        ops += 1;
        if acc > 0.0 {
            n_k = tables.n_min + offset;
            break;
        }
    }
    Ok(TriggerDecision {
        n_k,
        tau_k: tables.tau_for(n_k),
        evaluations,
        op_count: ops,
    })
}

/// Remark-style worst-case operation count q + (2q+1)·m(m+1)/2.
pub fn veronese_worst_case_ops(m: usize, q: usize) -> usize {
    q + (2 * q + 1) * veronese_len(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{choose_trigger, make_certificate};

    const TAU_STAR_SCALAR: f64 = 1.4776700622632155;

    fn scalar_tables() -> TriggerTables {
        let sys =
            LinearSystem::new(Matrix::scalar(0.0), Matrix::scalar(1.0), Matrix::scalar(-1.0)).unwrap();
        let cert = make_certificate(&sys, &Matrix::scalar(1.0), 0.5).unwrap();
        let trig = choose_trigger(TAU_STAR_SCALAR, 0.1, 3.0).unwrap();
        precompute(&sys, &cert, &trig).unwrap()
    }

    #[test]
    fn zeroth_form_vanishes() {
        let t = scalar_tables();
        assert_eq!(t.transitions[0], Matrix::identity(1));
        assert!(t.q_forms[0].max_abs() <= 1e-12);
        assert_eq!(h_d(&[3.0], 0, &t).unwrap(), 0.0);
        assert_eq!(h_d(&[0.0], 7, &t).unwrap(), 0.0);
    }

    #[test]
    fn scalar_forms_closed_form() {
        let t = scalar_tables();
        // Λ_n = 1 − nΔ, Q_n = 0.5((1 − nΔ)² − e^{−nΔ})
        for n in 0..=t.n_max {
            let s = n as f64 * 0.1;
            assert!((t.transitions[n][(0, 0)] - (1.0 - s)).abs() < 1e-13);
            let q = 0.5 * ((1.0 - s).powi(2) - (-s).exp());
            assert!((t.q_forms[n][(0, 0)] - q).abs() < 1e-13);
        }
        assert!((t.q_forms[1][(0, 0)] + 0.04741870901797973).abs() < 1e-15);
        assert!((h_d(&[2.0], 1, &t).unwrap() + 4.0 * 0.04741870901797973).abs() < 1e-14);
    }

    #[test]
    fn h_d_index_out_of_range() {
        let t = scalar_tables();
        assert!(matches!(h_d(&[1.0], 31, &t), Err(Error::OutOfRange(_))));
        assert!(matches!(h_d(&[1.0, 2.0], 1, &t), Err(Error::Dimension(_))));
    }

    #[test]
    fn scalar_decision() {
        let t = scalar_tables();
        for x in [1.0, -0.3, 25.0] {
            let d = gamma_d(&[x], &t).unwrap();
            assert_eq!(d.n_k, 14);
            assert!((d.tau_k - 1.4).abs() < 1e-12);
            assert_eq!(d.evaluations, 15);
        }
        let d = gamma_d(&[0.0], &t).unwrap();
        assert_eq!(d.n_k, 30);
        assert!((d.tau_k - 3.0).abs() < 1e-12);
    }

    #[test]
    fn skip_to_n_min_agrees() {
        let t = scalar_tables();
        let full = gamma_d(&[1.0], &t).unwrap();
        let fast = gamma_d_with(&[1.0], &t, ScanStart::AfterNMin).unwrap();
        assert_eq!(full.n_k, fast.n_k);
        assert!(fast.evaluations < full.evaluations);
    }

    #[test]
    fn veronese_packing_matches_quad_form() {
        let q = Matrix::from_rows(&[[1.0, -0.5, 2.0], [-0.5, 3.0, 0.25], [2.0, 0.25, -1.0]]).unwrap();
        let c = pack_veronese(&q);
        let x = [0.3, -1.2, 2.5];
        let z = [x[0] * x[0], x[0] * x[1], x[0] * x[2], x[1] * x[1], x[1] * x[2], x[2] * x[2]];
        let dot: f64 = c.iter().zip(&z).map(|(a, b)| a * b).sum();
        assert!((dot - q.quad_form(&x)).abs() < 1e-13);
    }

    #[test]
    fn veronese_scalar() {
        let t = scalar_tables();
        assert_eq!(t.veronese.as_ref().unwrap().len(), t.q());
        let d = gamma_d_veronese(&[1.0], &t).unwrap();
        assert_eq!(d.n_k, 14);
        let d = gamma_d_veronese(&[0.0], &t).unwrap();
        assert_eq!(d.n_k, 30);
        assert_eq!(d.op_count, veronese_worst_case_ops(1, 16));
    }

    #[test]
    fn worst_case_formula_instance() {
        assert_eq!(veronese_worst_case_ops(2, 16), 115);
    }

    #[test]
    fn missing_veronese_is_config_error() {
        let mut t = scalar_tables();
        t.veronese = None;
        assert!(matches!(gamma_d_veronese(&[1.0], &t), Err(Error::Config(_))));
    }

    #[test]
    fn truncation_prefix() {
        let t = scalar_tables();
        for n_max in [14, 15, 20] {
            let tt = t.truncated(n_max).unwrap();
            assert_eq!(gamma_d(&[1.0], &tt).unwrap().n_k, 14usize.min(n_max));
        }
        assert!(t.truncated(5).is_err());
    }
}
