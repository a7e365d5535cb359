//! Report documents and trace files.
//!
//! JSON documents are written by serde_json, which emits the shortest
//! decimal that parses back to the same `f64`. CSV traces print every number
//! in scientific notation with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::{
    feasibility_check, DecayExponent, Design, EissGains, FeasibilityReport, LinearSystem,
    LyapunovCert, MinTime, TriggerConfig,
};
use crate::error::{Error, Result};
use crate::linalg::{norm2, Matrix};
use crate::scheduler::TriggerTables;
use crate::sim::{ExecutionLog, Trajectory};

pub const TOOL_VERSION: &str = concat!("selftrig ", env!("CARGO_PKG_VERSION"));

/// Instruction times tabulated in every design report.
pub const FEASIBILITY_TAU_C: [f64; 5] = [1e-9, 1e-8, 1e-7, 1e-6, 1e-5];

/// 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// How the certificate was obtained, for auditability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateNotes {
    pub q_source: String,
    pub lambda_o_rule: String,
    pub lambda_ratio: f64,
    pub decay_exponent: DecayExponent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub tool_version: String,
    pub config_hash: String,
    pub m: usize,
    pub l: usize,
    pub system: LinearSystem,
    pub tau_star: f64,
    pub tau_star_no_root: bool,
    pub trigger: TriggerConfig,
    pub lambda_o: f64,
    pub lambda: f64,
    #[serde(rename = "Q")]
    pub q: Matrix,
    #[serde(rename = "P")]
    pub p: Matrix,
    #[serde(rename = "P_half")]
    pub p_half: Matrix,
    pub gains: EissGains,
    pub feasibility: Vec<FeasibilityReport>,
    pub notes: CertificateNotes,
    pub tables: TriggerTables,
}

impl DesignReport {
    pub fn new(
        design: &Design,
        tables: TriggerTables,
        config_hash: String,
        q_source: &str,
        lambda_ratio: f64,
    ) -> Result<Self> {
        let m = design.system.m();
        let feasibility = FEASIBILITY_TAU_C
            .iter()
            .map(|&tc| feasibility_check(m, tc, &design.trigger))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tool_version: TOOL_VERSION.into(),
            config_hash,
            m,
            l: design.system.l(),
            system: design.system.clone(),
            tau_star: design.tau_star.tau,
            tau_star_no_root: design.tau_star.no_root,
            trigger: design.trigger,
            lambda_o: design.cert.lambda_o,
            lambda: design.cert.lambda,
            q: design.cert.q.clone(),
            p: design.cert.p.clone(),
            p_half: design.cert.p_half.clone(),
            gains: design.gains.clone(),
            feasibility,
            notes: CertificateNotes {
                q_source: q_source.into(),
                lambda_o_rule: "lambda_o = 0.5 * lambda_min(P^-1/2 Q P^-1/2)".into(),
                lambda_ratio,
                decay_exponent: design.decay,
            },
            tables,
        })
    }

    pub fn cert(&self) -> LyapunovCert {
        LyapunovCert {
            p: self.p.clone(),
            p_half: self.p_half.clone(),
            lambda_o: self.lambda_o,
            lambda: self.lambda,
            q: self.q.clone(),
        }
    }

    pub fn min_time(&self) -> MinTime {
        MinTime {
            tau: self.tau_star,
            no_root: self.tau_star_no_root,
            det_evaluations: 0,
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            context: format!("reading design {}", path.display()),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            context: format!("parsing design {}", path.display()),
            source,
        })
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        context: "serializing report".into(),
        source,
    })?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| Error::Io {
                context: format!("creating {}", parent.display()),
                source,
            })?;
        }
    }
    std::fs::write(path, contents).map_err(|source| Error::Io {
        context: format!("writing {}", path.display()),
        source,
    })
}

/// t, x_1..x_m, u_1..u_l, V, eiss_bound
pub fn trajectory_csv(traj: &Trajectory, bound_curve: &[f64]) -> String {
    let m = traj.states.first().map(Vec::len).unwrap_or(0);
    let l = traj.inputs.first().map(Vec::len).unwrap_or(0);
    let mut out = String::from("t");
    for i in 1..=m {
        let _ = write!(out, ",x_{i}");
    }
    for i in 1..=l {
        let _ = write!(out, ",u_{i}");
    }
    out.push_str(",V,eiss_bound\n");
    for (i, t) in traj.times.iter().enumerate() {
        out.push_str(&fmt_num(*t));
        for v in traj.states[i].iter().chain(&traj.inputs[i]) {
            out.push(',');
            out.push_str(&fmt_num(*v));
        }
        out.push(',');
        out.push_str(&fmt_num(traj.v_values[i]));
        out.push(',');
        out.push_str(&fmt_num(bound_curve.get(i).copied().unwrap_or(f64::NAN)));
        out.push('\n');
    }
    out
}

/// k, t_k, x_1..x_m, n_k, tau_k
pub fn events_csv(log: &ExecutionLog) -> String {
    let m = log.events.first().map(|e| e.x.len()).unwrap_or(0);
    let mut out = String::from("k,t_k");
    for i in 1..=m {
        let _ = write!(out, ",x_{i}");
    }
    out.push_str(",n_k,tau_k\n");
    for e in &log.events {
        let _ = write!(out, "{},{}", e.k, fmt_num(e.t_k));
        for v in &e.x {
            out.push(',');
            out.push_str(&fmt_num(*v));
        }
        let _ = writeln!(out, ",{},{}", e.n_k, fmt_num(e.tau_k));
    }
    out
}

/// |x(t)| along a trajectory.
pub fn state_norms(traj: &Trajectory) -> Vec<f64> {
    traj.states.iter().map(|x| norm2(x)).collect()
}
