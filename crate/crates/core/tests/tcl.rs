use std::f64::consts::FRAC_PI_4;

use chiral_core::quantum::{hermitian_eigenvalues, r, CMat, DensityMatrix, C64};
use chiral_core::tcl::*;
use proptest::prelude::*;

fn entry(pair: (usize, usize), xi: i32, a: &str, b: &str, chi: i32, sign: i32) -> TableEntry {
    TableEntry {
        pair,
        xi_units: xi,
        alpha: a.into(),
        beta: b.into(),
        chi_units: chi,
        sign,
    }
}

/// Reference term table with the 1/2 factors absorbed and the sign carried on alpha.
fn reference_table() -> Vec<TableEntry> {
    let mut t = vec![
        entry((1, 1), 0, "A", "A", 0, 1),
        entry((1, 1), 0, "A", "B", 2, -1),
        entry((1, 1), 0, "A", "B+", -2, 1),
        entry((1, 1), 2, "B", "B+", 0, 1),
        entry((1, 1), 2, "B", "A", 2, 1),
        entry((1, 1), 2, "B", "B", 4, -1),
        entry((1, 1), -2, "B+", "B", 0, 1),
        entry((1, 1), -2, "B+", "A", -2, -1),
        entry((1, 1), -2, "B+", "B+", -4, -1),
        entry((1, 2), 0, "s2-", "A", 0, 1),
        entry((1, 2), 0, "s2-", "B", 2, -1),
        entry((1, 2), 0, "s2-", "B+", -2, 1),
        entry((2, 1), 0, "A", "s2+", 0, 1),
        entry((2, 1), 2, "B", "s2+", 2, 1),
        entry((2, 1), -2, "B+", "s2+", -2, -1),
        entry((2, 2), 0, "s2-", "s2+", 0, 1),
    ];
    t.sort();
    t
}

fn random_state(seed: &[f64]) -> CMat {
    let a = CMat::from_fn(4, 4, |i, j| C64::new(seed[(4 * i + j) % seed.len()], seed[(4 * j + i + 3) % seed.len()]));
    let m = &a * a.adjoint();
    let tr = m.trace();
    m / tr
}

#[test]
fn term_table_regenerated() {
    let omega = 0.063;
    let terms = derive_generator_terms(omega, 0.0).unwrap();
    assert_eq!(table_entries(&terms, omega).unwrap(), reference_table());
}

#[test]
fn term_table_holds_for_other_drives() {
    for omega in [0.01, 0.2, 1.3] {
        let terms = derive_generator_terms(omega, 0.0).unwrap();
        assert_eq!(table_entries(&terms, omega).unwrap(), reference_table());
    }
}

#[test]
fn secular_filter_keeps_zero_chi_rows() {
    let terms = derive_generator_terms(0.063, 0.0).unwrap();
    let kept = table_entries(&secular_filter(&terms), 0.063).unwrap();
    let want: Vec<TableEntry> = reference_table().into_iter().filter(|e| e.chi_units == 0).collect();
    assert_eq!(kept, want);
    assert_eq!(kept.len(), 6);
}

#[test]
fn generator_matches_double_commutator() {
    let mut cfg = TclConfig::new(0.063, 0.021, 0.14, 0.30, 2, FRAC_PI_4);
    cfg.t_max = 8.0;
    let engine = TclEngine::new(&cfg).unwrap();
    let states = [
        random_state(&[0.3, -0.2, 0.8, 0.1, 0.5, -0.7, 0.2, 0.9, -0.4]),
        random_state(&[1.0, 0.1, -0.3, 0.6, 0.2, 0.0, -0.5, 0.4, 0.7, 0.3, -0.1]),
    ];
    for rho in &states {
        for t in [0.7, 3.1, 7.5] {
            let a = engine.rhs_exact(t, rho).unwrap();
            let b = double_commutator_generator(&cfg, t, rho, 64).unwrap();
            let err = (&a - &b).iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(err < 1e-8, "t={t}: {err:e}");
        }
    }
}

#[test]
fn tabulated_generator_on_grid_matches_exact() {
    let mut cfg = TclConfig::new(0.063, 0.0, 0.14, 0.30, 1, FRAC_PI_4);
    cfg.t_max = 5.0;
    let engine = TclEngine::new(&cfg).unwrap();
    let rho = random_state(&[0.4, 0.1, -0.6, 0.3, 0.9]);
    for t in [0.05, 1.0, 4.95] {
        let a = engine.rhs(t, &rho).unwrap();
        let b = engine.rhs_exact(t, &rho).unwrap();
        assert!((a - b).norm() < 1e-9);
    }
}

#[test]
fn derivative_is_hermitian_and_traceless() {
    let mut cfg = TclConfig::new(0.063, 0.0, 0.14, 0.30, 1, FRAC_PI_4);
    cfg.t_max = 10.0;
    let engine = TclEngine::new(&cfg).unwrap();
    let rho = random_state(&[0.2, 0.7, -0.3, 0.5, 0.1, -0.8]);
    for t in [0.0, 2.5, 9.0] {
        let d = engine.rhs(t, &rho).unwrap();
        assert!((&d - d.adjoint()).norm() < 1e-12);
        assert!(d.trace().norm() < 1e-12);
    }
    let zero = tcl2_rhs(0.0, &DensityMatrix::maximally_mixed(4), &cfg).unwrap();
    assert!(zero.norm() < 1e-15);
    assert!(tcl2_rhs(50.0, &DensityMatrix::maximally_mixed(4), &cfg).is_err());
}

#[test]
fn secular_generator_preserves_dressed_diagonal_states() {
    // one emitter coupled: dressed eigenbasis of sigma_x on emitter 1, bare basis on emitter 2
    let mut cfg = TclConfig::new(0.063, 0.0, 0.14, 0.0, 1, FRAC_PI_4).with_mode(TclMode::Secular);
    cfg.t_max = 1.0;
    let engine = TclEngine::new(&cfg).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = CMat::from_row_slice(2, 2, &[r(s), r(s), r(s), r(-s)]);
    let u = chiral_core::quantum::kron(&plus, &chiral_core::quantum::eye(2));
    let diag = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![r(0.4), r(0.3), r(0.2), r(0.1)]));
    let rho = &u * diag * u.adjoint();
    let d = engine.rhs(0.5, &rho).unwrap();
    let in_dressed = u.adjoint() * d * &u;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                assert!(in_dressed[(i, j)].norm() < 1e-10);
            }
        }
    }
}

#[test]
fn secular_rates_are_psd() {
    let cfg = TclConfig::new(0.063, 0.0, 0.14, 0.30, 1, FRAC_PI_4).with_mode(TclMode::Secular);
    let engine = TclEngine::new(&cfg).unwrap();
    for (_, g) in engine.secular_rate_matrices().unwrap() {
        assert!(hermitian_eigenvalues(&g)[0] > -1e-10);
    }
}

#[test]
fn decoupled_bath_gives_rabi_oscillation() {
    let mut cfg = TclConfig::new(0.2, 0.0, 0.0, 0.0, 1, FRAC_PI_4);
    cfg.t_max = 20.0;
    let traj = integrate_tcl(&cfg).unwrap();
    let pe1: Vec<f64> = traj
        .states
        .iter()
        .map(|s| s.population(2) + s.population(3))
        .collect();
    for (t, p) in traj.times.iter().zip(&pe1) {
        assert!((p - (0.2 * t).sin().powi(2)).abs() < 1e-9);
    }
    assert!(traj.series("concurrence").unwrap().iter().all(|c| *c < 1e-6));
}

#[test]
fn no_drive_no_entanglement_from_ground() {
    let mut cfg = TclConfig::new(0.0, 0.0, 0.14, 0.30, 3, FRAC_PI_4);
    cfg.t_max = 30.0;
    let traj = integrate_tcl(&cfg).unwrap();
    assert!(traj.series("concurrence").unwrap().iter().all(|c| *c == 0.0));
}

#[test]
fn optimizer_degenerate_box_and_argmax() {
    let mut base = TclConfig::new(0.063, 0.0, 0.14, 0.30, 1, FRAC_PI_4);
    base.t_max = 40.0;
    base.dt = 0.1;
    let point = [
        Bounds::point(0.063),
        Bounds::point(0.0),
        Bounds::point(0.14),
        Bounds::point(0.30),
    ];
    let single = optimize_parameters(&base, point, 2).unwrap();
    assert_eq!(single.surface.len(), 1);
    let direct = TclEngine::new(&base).unwrap().peak().unwrap().first_peak_concurrence;
    assert!((single.best.value - direct).abs() < 1e-14);

    let bounds = [
        Bounds::new(0.05, 0.08, 2),
        Bounds::point(0.0),
        Bounds::new(0.12, 0.16, 2),
        Bounds::point(0.30),
    ];
    let opt = optimize_parameters(&base, bounds, 1).unwrap();
    assert!(opt.surface.iter().all(|p| p.value <= opt.best.value));
}

#[test]
fn blp_identical_states_vanish() {
    let mut cfg = TclConfig::new(0.063, 0.0, 0.14, 0.30, 1, FRAC_PI_4);
    cfg.t_max = 10.0;
    let b = blp_witness(&cfg, ("gg", "gg")).unwrap();
    assert!(b.distance.iter().all(|d| *d == 0.0));
    assert_eq!(b.positive_integral, 0.0);
}

#[test]
fn bad_initial_label_rejected() {
    let mut cfg = TclConfig::new(0.063, 0.0, 0.14, 0.30, 1, FRAC_PI_4);
    cfg.initial = "xx".into();
    assert!(integrate_tcl(&cfg).is_err());
}

#[test]
fn distance_sweep_without_drive_is_zero() {
    let mut base = TclConfig::new(0.0, 0.0, 0.14, 0.30, 1, FRAC_PI_4);
    base.t_max = 20.0;
    base.dt = 0.1;
    let s = distance_sweep(&base, &[0.0], &[1, 4]).unwrap();
    assert!(s.cmax.iter().flatten().all(|c| *c == 0.0));
    assert!(distance_sweep(&base, &[0.0], &[0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn components_sum_to_sigma_minus(omega in -2.0f64..2.0) {
        let terms = derive_generator_terms(omega, 0.0).unwrap();
        // emitter-1 alpha operators of the (2,1) pair are exactly the components of sigma_1^-
        let sum = terms
            .iter()
            .filter(|t| t.pair == (1, 0))
            .fold(CMat::zeros(4, 4), |a, t| a + &t.alpha_op);
        let want = chiral_core::quantum::on_qubit(&chiral_core::quantum::sigma_minus(), 0);
        prop_assert!((sum - want).norm() < 1e-12);
    }

    #[test]
    fn trace_preserved_along_run(omega in 0.0f64..0.15, g2 in 0.0f64..0.4, d in 1i64..6) {
        let mut cfg = TclConfig::new(omega, 0.0, 0.14, g2, d, FRAC_PI_4);
        cfg.t_max = 15.0;
        cfg.dt = 0.1;
        let traj = integrate_tcl(&cfg).unwrap();
        for v in traj.series("trace_drift").unwrap() {
            prop_assert!(v.abs() < 1e-10);
        }
        for c in traj.series("concurrence").unwrap() {
            prop_assert!((0.0..=1.0).contains(c));
        }
    }
}
