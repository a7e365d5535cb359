mod common;

use selftrig::design::make_certificate;
use selftrig::linalg::{expm, sym_eig};
use selftrig::scheduler::held_transition;
use selftrig::sim::{integrate_held, run_periodic, run_self_triggered, DisturbanceKind, DisturbanceSpec};
use selftrig::{Error, Matrix};

#[test]
fn double_integrator_lambda_o_matches_simulated_decay_rate() {
    let sys = common::double_integrator();
    let cert = make_certificate(&sys, &Matrix::identity(2), 0.8).unwrap();
    // λ_o = 1/(2 λ_max(P)) with P = [[1.5, 0.5], [0.5, 0.5]]
    let expected = 0.5 / (1.0 + 0.5f64.sqrt());
    assert!((cert.lambda_o - expected).abs() < 1e-12);

    let acl = sys.closed_loop();
    let e = sym_eig(&cert.p).unwrap();
    let slowest: Vec<f64> = (0..2).map(|r| e.eigenvectors[(r, 1)]).collect();
    // initial decay rate of V along the top eigenvector of P is exactly λ_o
    let h = 1e-6;
    let xh = expm(&acl, h).unwrap().matvec(&slowest);
    let rate = -(cert.v(&xh) / cert.v(&slowest)).ln() / h;
    assert!((rate - cert.lambda_o).abs() < 1e-5, "rate {rate}");

    // and no direction decays slower over a horizon
    let mut r = common::rng(11);
    for _ in 0..200 {
        let x = common::unit_vector(&mut r, 2);
        for k in 1..=50 {
            let t = 0.1 * k as f64;
            let xt = expm(&acl, t).unwrap().matvec(&x);
            assert!(cert.v(&xt) <= cert.v(&x) * (-cert.lambda_o * t).exp() * (1.0 + 1e-12));
        }
    }
}

#[test]
fn rk4_matches_exact_held_flow() {
    let sys = common::triple_integrator();
    let x = [1.0, -0.5, 0.25];
    let u = sys.k().matvec(&x);
    let steps = 40;
    let dt = 0.025;
    let path = integrate_held(&sys, &x, &u, &DisturbanceSpec::zero(), 0.0, dt, steps).unwrap();
    assert_eq!(path.len(), steps + 1);
    let exact = held_transition(&sys, steps as f64 * dt).unwrap().matvec(&x);
    for (a, b) in path[steps].iter().zip(&exact) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn rk4_converges_at_fourth_order_under_disturbance() {
    let sys = common::double_integrator();
    let dist = DisturbanceSpec { kind: DisturbanceKind::Sinusoid, amplitude: 0.5, frequency: 0.7, seed: 0 };
    let x = [1.0, 0.0];
    let u = [0.3];
    let end = |n: usize| integrate_held(&sys, &x, &u, &dist, 0.0, 1.0 / n as f64, n).unwrap()[n].clone();
    let (a, b, c) = (end(10), end(20), end(40));
    let e1 = (a[0] - c[0]).abs();
    let e2 = (b[0] - c[0]).abs();
    assert!(e1 / e2 > 12.0, "ratio {}", e1 / e2);
}

#[test]
fn self_triggered_run_logs_consistent_events() {
    let f = common::fixture_for("di".into(), common::double_integrator());
    let (d, tables) = f.build();
    let (traj, log) =
        run_self_triggered(&d.system, &d.cert, &tables, &DisturbanceSpec::zero(), &[2.0, -1.0], 20.0, 20).unwrap();
    assert_eq!(log.total_executions, log.events.len());
    for w in log.events.windows(2) {
        assert_eq!(w[1].t_k, w[0].t_k + w[0].tau_k);
        assert_eq!(traj.states[w[1].grid_index], w[1].x);
        assert!(w[0].tau_k >= tables.tau_min);
    }
    // input held between executions
    for w in log.events.windows(2) {
        let u = d.system.k().matvec(&w[0].x);
        for i in w[0].grid_index..w[1].grid_index {
            assert_eq!(traj.inputs[i], u);
        }
    }
    assert!((traj.times.last().unwrap() - 20.0).abs() < 1e-9);
}

#[test]
fn periodic_run_uses_constant_period() {
    let sys = common::scalar();
    let cert = make_certificate(&sys, &Matrix::scalar(1.0), 0.5).unwrap();
    let (_, log) = run_periodic(&sys, &cert, &DisturbanceSpec::zero(), &[1.0], 1.25, 10.0, 0.01).unwrap();
    assert_eq!(log.total_executions, 8);
    assert!(log.events.iter().all(|e| e.tau_k == 1.25 && e.n_k == 0));
}

#[test]
fn noise_is_seeded_and_bounded() {
    let a = DisturbanceSpec { kind: DisturbanceKind::BoundedNoise, amplitude: 0.4, frequency: 3.0, seed: 5 };
    let b = DisturbanceSpec { seed: 6, ..a };
    let mut differs = false;
    for i in 0..500 {
        let t = i as f64 * 0.013;
        let v = a.value(t, 3);
        assert_eq!(v, a.value(t, 3));
        assert!(selftrig::linalg::norm2(&v) <= 0.4 + 1e-15);
        differs |= v != b.value(t, 3);
    }
    assert!(differs);
    assert_eq!(a.sup_norm(), 0.4);
}

#[test]
fn unstable_loop_reports_blow_up() {
    let sys = selftrig::design::LinearSystem::new_unchecked(Matrix::scalar(0.0), Matrix::scalar(1.0), Matrix::scalar(50.0))
        .unwrap();
    let err = integrate_held(&sys, &[1.0], &[1e149], &DisturbanceSpec::zero(), 0.0, 1.0, 100).unwrap_err();
    assert!(matches!(err, Error::Simulation(_)));
    assert_eq!(err.exit_code(), 4);
}
