use lagrange::dynamics::*;
use lagrange::linear_stability::{build_variational, spectral_verdict, VariationalKind};
use lagrange::nbody::*;

fn system_for(values: Vec<f64>) -> (Masses, CentralConfigAnalysis) {
    let m = Masses::normalized(values).unwrap();
    let r = equilateral_configuration(&m).unwrap();
    let a = analyze_central_config(&r, &m).unwrap();
    (m, a)
}

/// Splits 1 - m1 into m2 >= m3 so the triple has the requested beta.
fn masses_for(beta: f64, m1: f64) -> Vec<f64> {
    let rest = 1.0 - m1;
    let disc = rest * rest - 4.0 * (beta - m1 * rest);
    assert!(disc >= 0.0, "no mass split at beta={beta}, m1={m1}");
    let m2 = (rest + disc.sqrt()) / 2.0;
    vec![m1, m2, rest - m2]
}

#[test]
fn the_relative_equilibrium_is_a_fixed_point_of_the_reduced_flow() {
    let (m, a) = system_for(vec![0.98, 0.01, 0.01]);
    let sys = ReducedSystem::new(&a, &m);
    let d = sys.rhs(&ReducedState::equilibrium()).unwrap();
    assert!(d.displacement() < 1e-13, "residual {}", d.displacement());
    assert!(d.theta.abs() < 1e-13);
}

#[test]
fn the_flow_linearization_matches_the_variational_matrix() {
    let (m, a) = system_for(vec![0.5, 0.3, 0.2]);
    let sys = ReducedSystem::new(&a, &m);
    let vm = build_variational(&a, a.omega(), VariationalKind::Orbital).unwrap();
    assert_eq!(vm.matrix.nrows(), 6);

    let h = 1e-5;
    for j in 0..6 {
        let mut plus = [0.0f64; 7];
        plus[j] = h;
        let mut minus = [0.0f64; 7];
        minus[j] = -h;
        let dp = sys.rhs(&state_from(&plus)).unwrap();
        let dm = sys.rhs(&state_from(&minus)).unwrap();
        let dpv = state_to(&dp);
        let dmv = state_to(&dm);
        for i in 0..6 {
            let fd = (dpv[i] - dmv[i]) / (2.0 * h);
            assert!(
                (fd - vm.matrix[(i, j)]).abs() < 1e-6,
                "entry ({i},{j}): fd {fd} vs {}",
                vm.matrix[(i, j)]
            );
        }
    }
}

fn state_from(v: &[f64; 7]) -> ReducedState {
    ReducedState {
        z5: v[0],
        z6: v[1],
        zdot5: v[2],
        zdot6: v[3],
        r: v[4],
        upsilon: v[5],
        theta: v[6],
    }
}

fn state_to(s: &ReducedState) -> [f64; 6] {
    [s.z5, s.z6, s.zdot5, s.zdot6, s.r, s.upsilon]
}

#[test]
fn the_homothetic_submanifold_obeys_the_kepler_radial_law() {
    // With the shape frozen at the central configuration the radial pair
    // closes on itself: Upsilon' = omega^2 / R^3 - omega^2 / R^2.
    let (m, a) = system_for(vec![0.6, 0.25, 0.15]);
    let sys = ReducedSystem::new(&a, &m);
    let w = a.omega();
    for r in [-0.4, -0.1, 0.0, 0.3, 1.5] {
        let s = ReducedState {
            r,
            upsilon: 0.07,
            ..ReducedState::equilibrium()
        };
        let d = sys.rhs(&s).unwrap();
        assert!(d.z5.abs() < 1e-15 && d.z6.abs() < 1e-15);
        assert!(d.zdot5.abs() < 1e-13 && d.zdot6.abs() < 1e-13);
        assert_eq!(d.r, 0.07);
        let rr = r + 1.0;
        let expected = w * w / rr.powi(3) - w * w / (rr * rr);
        assert!(
            (d.upsilon - expected).abs() < 1e-13 * w * w,
            "r={r}: {} vs {expected}",
            d.upsilon
        );
    }
}

#[test]
fn the_equilibrium_stays_put_under_integration() {
    let (m, a) = system_for(vec![0.98, 0.01, 0.01]);
    let sys = ReducedSystem::new(&a, &m);
    let tr = integrate(&sys, &ReducedState::equilibrium(), 10.0, 1e-10).unwrap();
    assert!(tr.final_state().displacement() < 1e-12);
    assert!(tr.energy_drift < 1e-13);
    assert!(tr.momentum_drift < 1e-13);
}

#[test]
fn a_small_perturbation_at_low_beta_stays_bounded_with_tiny_energy_drift() {
    let (m, a) = system_for(vec![0.98, 0.01, 0.01]);
    let sys = ReducedSystem::new(&a, &m);
    let s0 = ReducedState {
        z5: 1e-3,
        z6: 5e-4,
        r: 1e-3,
        ..ReducedState::equilibrium()
    };
    let tr = integrate(&sys, &s0, 200.0, 1e-10).unwrap();
    // The slow modes trade position for velocity at rates bounded by the
    // frequencies, so the excursion stays within a modest multiple.
    assert!(
        tr.max_displacement() < 20.0 * s0.displacement(),
        "max {}",
        tr.max_displacement()
    );
    assert!(tr.energy_drift < 1e-10, "drift {}", tr.energy_drift);
    assert!(tr.momentum_drift < 1e-10);
}

#[test]
fn the_growth_rate_above_the_stability_threshold_matches_the_spectrum() {
    let (m, a) = system_for(masses_for(0.05, 0.9476));
    let sys = ReducedSystem::new(&a, &m);
    let vm = build_variational(&a, a.omega(), VariationalKind::MomentumReduced).unwrap();
    let verdict = spectral_verdict(&vm).unwrap();
    assert!(!verdict.spectrally_stable);
    let rate = verdict.max_real_part;

    let s0 = ReducedState {
        z5: 1e-9,
        z6: -7e-10,
        zdot5: 4e-10,
        ..ReducedState::equilibrium()
    };
    // Let the unstable mode dominate, then read the slope of log |x|.
    let t1 = 120.0;
    let t2 = 280.0;
    let tr1 = integrate(&sys, &s0, t1, 1e-12).unwrap();
    let d1 = tr1.final_state().displacement();
    let tr2 = integrate(&sys, tr1.final_state(), t2 - t1, 1e-12).unwrap();
    let d2 = tr2.final_state().displacement();
    assert!(d2 < 1e-3, "still in the linear regime: {d2}");
    let measured = (d2 / d1).ln() / (t2 - t1);
    assert!(
        (measured - rate).abs() < 0.1 * rate,
        "measured {measured} vs spectral {rate}"
    );
}

#[test]
fn the_flow_is_retraced_by_integrating_backwards() {
    let (m, a) = system_for(vec![0.9, 0.06, 0.04]);
    let sys = ReducedSystem::new(&a, &m);
    let s0 = ReducedState {
        z5: 5e-3,
        z6: -2e-3,
        zdot5: 1e-3,
        r: 4e-3,
        upsilon: -1e-3,
        ..ReducedState::equilibrium()
    };
    let fwd = integrate(&sys, &s0, 10.0, 1e-12).unwrap();
    let back = integrate(&sys, fwd.final_state(), -10.0, 1e-12).unwrap();
    let s = back.final_state();
    for (got, want) in state_to(s).iter().zip(state_to(&s0)) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
    assert!((s.theta - s0.theta).abs() < 1e-6);
}

#[test]
fn the_csv_export_lists_every_accepted_step() {
    let (m, a) = system_for(vec![0.98, 0.01, 0.01]);
    let sys = ReducedSystem::new(&a, &m);
    let s0 = ReducedState {
        z5: 1e-3,
        ..ReducedState::equilibrium()
    };
    let tr = integrate(&sys, &s0, 1.0, 1e-10).unwrap();
    let csv = tr.to_csv(&sys).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,z5,z6,Z5,Z6,r,Upsilon,energy,momentum");
    assert_eq!(lines.len(), tr.times.len() + 1);
    assert!(lines[1].starts_with("0"));
}

#[test]
fn leaving_the_chart_or_collapsing_the_radius_is_reported() {
    let (m, a) = system_for(vec![0.98, 0.01, 0.01]);
    let sys = ReducedSystem::new(&a, &m);
    let far = ReducedState {
        z5: 0.6,
        ..ReducedState::equilibrium()
    };
    assert!(matches!(
        sys.rhs(&far),
        Err(lagrange::Error::ChartExit { .. })
    ));
    let squeezed = ReducedState {
        r: -0.95,
        ..ReducedState::equilibrium()
    };
    assert!(matches!(
        sys.rhs(&squeezed),
        Err(lagrange::Error::RadialCollapse { .. })
    ));
}
