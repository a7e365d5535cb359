#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use selftrig::design::{design, make_certificate, min_time, Design, DesignParams, LinearSystem, MinTimeOptions};
use selftrig::scheduler::{precompute, TriggerTables};
use selftrig::Matrix;

pub const FIXTURE_SEED: u64 = 0x5e1f_7219;

pub struct Fixture {
    pub name: String,
    pub system: LinearSystem,
    pub params: DesignParams,
}

impl Fixture {
    pub fn design(&self) -> Design {
        design(&self.system, &self.params).unwrap_or_else(|e| panic!("{}: {e}", self.name))
    }

    pub fn build(&self) -> (Design, TriggerTables) {
        let d = self.design();
        let t = precompute(&d.system, &d.cert, &d.trigger).unwrap();
        (d, t)
    }
}

pub fn params(delta: f64, tau_max: f64) -> DesignParams {
    DesignParams {
        q: None,
        lambda_ratio: 0.8,
        delta,
        tau_max,
        tau_min: None,
        decay: Default::default(),
    }
}

pub fn scalar() -> LinearSystem {
    LinearSystem::new(Matrix::scalar(0.0), Matrix::scalar(1.0), Matrix::scalar(-1.0)).unwrap()
}

pub fn double_integrator() -> LinearSystem {
    LinearSystem::new(
        Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap(),
        Matrix::from_rows(&[[0.0], [1.0]]).unwrap(),
        Matrix::from_rows(&[[-1.0, -2.0]]).unwrap(),
    )
    .unwrap()
}

pub fn triple_integrator() -> LinearSystem {
    LinearSystem::new(
        Matrix::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]]).unwrap(),
        Matrix::from_rows(&[[0.0], [0.0], [1.0]]).unwrap(),
        Matrix::from_rows(&[[-1.0, -3.0, -3.0]]).unwrap(),
    )
    .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, r: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(-r..r)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

/// Random stabilized system: B = I + small perturbation, K = B⁻¹(H − A) with
/// H = −diag(0.5..2) + skew part, so A + BK = H is Hurwitz.
pub fn random_system(rng: &mut ChaCha8Rng, m: usize) -> LinearSystem {
    loop {
        let a = uniform(rng, m, m, 1.0);
        let b = &Matrix::identity(m) + &uniform(rng, m, m, 0.3);
        let s = uniform(rng, m, m, 0.5);
        let skew = &s - &s.transpose();
        let d: Vec<f64> = (0..m).map(|_| -rng.gen_range(0.5..2.0)).collect();
        let h = &Matrix::diag(&d) + &skew;
        let Ok(lu) = selftrig::linalg::Lu::new(&b) else { continue };
        let Ok(k) = lu.solve(&(&h - &a)) else { continue };
        if let Ok(sys) = LinearSystem::new(a, b, k) {
            return sys;
        }
    }
}

/// Δ = 0.1 when τ* allows it, otherwise a step that keeps about ten grid
/// points below τ*. τ_max is at least 3 and at least 1.5 τ*.
pub fn fixture_for(name: String, system: LinearSystem) -> Fixture {
    let cert = make_certificate(&system, &Matrix::identity(system.m()), 0.8).unwrap();
    let tau_star = min_time(&system, &cert, &MinTimeOptions::for_delta(0.01, &cert)).unwrap().tau;
    let (delta, tau_max) = if tau_star >= 0.5 {
        (0.1, (15.0 * tau_star).ceil().max(30.0) / 10.0)
    } else {
        let d = tau_star / 10.5;
        (d, 30.0 * d)
    };
    Fixture { name, system, params: params(delta, tau_max) }
}

/// Scalar, double and triple integrator, then 17 seeded random systems with
/// m cycling through 1, 2, 3.
pub fn fixtures() -> Vec<Fixture> {
    let mut out = vec![
        fixture_for("scalar".into(), scalar()),
        fixture_for("double_integrator".into(), double_integrator()),
        fixture_for("triple_integrator".into(), triple_integrator()),
    ];
    let mut r = rng(FIXTURE_SEED);
    for i in 0..17 {
        let m = 1 + i % 3;
        out.push(fixture_for(format!("random_{i:02}_m{m}"), random_system(&mut r, m)));
    }
    out
}

pub fn unit_vector(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let n = selftrig::linalg::norm2(&v);
        if n > 1e-8 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}
