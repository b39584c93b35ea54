use lagrange::classifier::{
    convexity_class, degeneracy_tests, diophantine_scan, f_dqc, nearest_resonant_beta,
    region_membership, resonances_up_to, steepness_radius, ConvexityClass, ConvexityData,
};
use lagrange::hamiltonian::MassParameters;
use lagrange::nbody::Masses;
use lagrange::normal_form::closed_form_omegas;
use lagrange::Error;
use nalgebra::{Matrix3, Vector3};

fn params(m1: f64, m2: f64, m3: f64) -> MassParameters {
    let m = Masses::new(vec![m1, m2, m3]).unwrap();
    MassParameters::new(&m).unwrap()
}

fn params_for(beta: f64, m1: f64) -> Option<MassParameters> {
    let s = 1.0 - m1;
    let p = beta - m1 * s;
    let disc = s * s - 4.0 * p;
    if p <= 0.0 || disc < 0.0 {
        return None;
    }
    let d = disc.sqrt();
    let m = Masses::new(vec![m1, (s + d) / 2.0, (s - d) / 2.0]).ok()?;
    MassParameters::new(&m).ok()
}

#[test]
fn membership_flags_match_the_reference_points() {
    let heavy = region_membership(&params(0.98, 0.01, 0.01));
    assert!(heavy.in_omega && heavy.in_omega_ss && heavy.in_omega_ps);

    let equal = region_membership(&params(
        1.0 / 3.0 + 1e-6,
        1.0 / 3.0,
        1.0 / 3.0 - 1e-6,
    ));
    assert!(equal.in_omega);
    assert!(!equal.in_omega_ss && !equal.in_omega_ps);

    let resonant = params_for(1.0 / 36.0, 0.9715).unwrap();
    let r = region_membership(&resonant);
    assert!(r.in_omega_ss && !r.in_omega_ps);
}

#[test]
fn the_regions_nest_on_a_mass_space_grid() {
    let mut seen_ps = 0;
    for i in 1..50 {
        // mu in (0, 0.05): the heavy-mass side where all regions live.
        let mu = 0.05 * i as f64 / 50.0;
        for j in 0..50 {
            // y spans (1 - mu, 1 - 3 mu / 4], the mass-split window.
            let y = 1.0 - mu + (mu / 4.0) * (j as f64 + 0.5) / 50.0;
            let Some(p) = params_for(y * mu, 1.0 - mu) else {
                continue;
            };
            let r = region_membership(&p);
            assert!(!r.in_omega_ss || r.in_omega);
            assert!(!r.in_omega_ps || r.in_omega_ss);
            assert!(!r.in_omega_dqc || r.in_omega_ps);
            assert!(!r.in_omega_qc || r.in_omega_dqc);
            seen_ps += usize::from(r.in_omega_ps);
        }
    }
    assert!(seen_ps > 100, "grid missed the stable region: {seen_ps}");
}

#[test]
fn determinant_and_polynomial_degeneracy_routes_agree() {
    // Value agreement away from the zero loci, where relative comparison
    // is meaningful.
    let points = [
        (0.98, 0.01, 0.01),
        (0.97, 0.02, 0.01),
        (0.99, 0.008, 0.002),
        (0.985, 0.012, 0.003),
        (0.975, 0.015, 0.01),
    ];
    for (m1, m2, m3) in points {
        let p = params(m1, m2, m3);
        let fs = p.frequencies().unwrap();
        let w = closed_form_omegas(&p).unwrap();
        let d = degeneracy_tests(&w, &fs, &p).unwrap();
        let r3 = ((d.det3 - d.det3_from_f) / d.det3).abs();
        let r4 = ((d.det4 - d.det4_from_f) / d.det4).abs();
        assert!(r3 < 1e-6, "det3 routes differ by {r3} at ({m1},{m2},{m3})");
        assert!(r4 < 1e-6, "det4 routes differ by {r4} at ({m1},{m2},{m3})");

        let c = ConvexityData::new(&w, &fs);
        let lhs = c.a0 * c.a2 - c.a1 * c.a1;
        let scale = (c.a0 * c.a2).abs() + c.a1 * c.a1;
        assert!(
            (lhs + d.det4).abs() < 1e-8 * scale,
            "a0 a2 - a1^2 = {lhs} vs -det4 = {}",
            -d.det4
        );
    }

    // Sign agreement also holds at skewed mass splits near the zero loci.
    for (m1, m2, m3) in [(0.995, 0.004, 0.001), (0.988, 0.0119, 0.0001)] {
        let p = params(m1, m2, m3);
        let fs = p.frequencies().unwrap();
        let w = closed_form_omegas(&p).unwrap();
        let d = degeneracy_tests(&w, &fs, &p).unwrap();
        assert_eq!(
            d.det3 > 0.0,
            d.det3_from_f > 0.0,
            "det3 sign flip at ({m1},{m2},{m3})"
        );
        assert_eq!(
            d.det4 > 0.0,
            d.det4_from_f > 0.0,
            "det4 sign flip at ({m1},{m2},{m3})"
        );
    }
}

/// Midpoint of the (narrow) heavy-mass window that admits a real mass split
/// at the given beta.
fn mid_m1(beta: f64) -> f64 {
    let s_lo = (2.0 - (4.0 - 12.0 * beta).sqrt()) / 3.0;
    let s_hi = (1.0 - (1.0 - 4.0 * beta).sqrt()) / 2.0;
    1.0 - 0.5 * (s_lo + s_hi)
}

#[test]
fn the_printed_resonant_betas_are_recovered() {
    for (beta, expected_k) in lagrange::classifier::RESONANT_BETAS {
        let Some(p) = params_for(beta, mid_m1(beta)) else {
            panic!("no mass split at beta = {beta}");
        };
        let fs = p.frequencies().unwrap();
        let hits = resonances_up_to(&fs, 4, 1e-12 / fs.omega0);
        assert!(
            hits.iter().any(|h| h.k == expected_k),
            "beta = {beta}: expected {expected_k:?} among {hits:?}"
        );
    }
}

#[test]
fn a_generic_frequency_vector_has_no_low_order_resonances() {
    let fs = params(0.98, 0.01, 0.01).frequencies().unwrap();
    let hits = resonances_up_to(&fs, 10, 1e-9);
    assert!(hits.is_empty(), "unexpected hits: {hits:?}");
}

#[test]
fn the_nearest_resonant_beta_of_an_exact_resonance_is_itself() {
    let (root, hit) = nearest_resonant_beta(1.0 / 36.0, 4).unwrap();
    assert!((root - 1.0 / 36.0).abs() < 1e-12);
    assert_eq!(hit.order, 3);
    assert!(hit.residual < 1e-10);
}

#[test]
fn convexity_class_follows_the_dqc_polynomial_sign() {
    let points = [
        (0.98, 0.01, 0.01),
        (0.97, 0.02, 0.01),
        (0.99, 0.008, 0.002),
        (0.988, 0.0119, 0.0001),
        (0.995, 0.004, 0.001),
    ];
    for (m1, m2, m3) in points {
        let p = params(m1, m2, m3);
        let fs = p.frequencies().unwrap();
        let w = closed_form_omegas(&p).unwrap();
        let class = convexity_class(&w, &fs).unwrap();
        assert_ne!(class, ConvexityClass::Convex, "convex at ({m1},{m2},{m3})");
        let dqc_holds = f_dqc(&p).unwrap() > 0.0;
        assert_eq!(
            class != ConvexityClass::None,
            dqc_holds,
            "class {class:?} vs f_dqc sign at ({m1},{m2},{m3})"
        );
    }
}

#[test]
fn a_point_in_the_low_beta_band_is_quasi_convex() {
    let p = params(0.995, 0.004, 0.001);
    assert!(p.beta < 1.0 / 75.0);
    let fs = p.frequencies().unwrap();
    let w = closed_form_omegas(&p).unwrap();
    assert_eq!(
        convexity_class(&w, &fs).unwrap(),
        ConvexityClass::QuasiConvex
    );
    assert!(region_membership(&p).in_omega_qc);
}

#[test]
fn the_steepness_radius_encloses_no_critical_point() {
    let p = params(0.98, 0.01, 0.01);
    let r = steepness_radius(&p).unwrap();
    assert!(r > 0.0);

    // The unique critical point of the quadratic model solves W rho = -varpi;
    // it must sit outside the steepness ball.
    let fs = p.frequencies().unwrap();
    let w = closed_form_omegas(&p).unwrap();
    let mat = Matrix3::from_fn(|i, j| w[i][j]);
    let s = fs.signed();
    let rho = mat
        .lu()
        .solve(&-Vector3::new(s[0], s[1], s[2]))
        .expect("nondegenerate twist");
    assert!(rho.norm() > r, "critical point at {} inside {r}", rho.norm());
}

#[test]
fn the_steepness_radius_shrinks_with_the_smallest_mass() {
    let wide = steepness_radius(&params(0.98, 0.01, 0.01)).unwrap();
    let thin = steepness_radius(&params(0.98, 0.0199, 0.0001)).unwrap();
    assert!(thin < wide / 10.0, "thin {thin} vs wide {wide}");
}

#[test]
fn steepness_requires_the_stable_region() {
    let m = Masses::new(vec![1.0 / 3.0 + 1e-6, 1.0 / 3.0, 1.0 / 3.0 - 1e-6]).unwrap();
    let p = MassParameters::new(&m).unwrap();
    assert!(matches!(
        steepness_radius(&p),
        Err(Error::OutOfRegion { .. })
    ));
}

#[test]
fn diophantine_margins_behave_at_resonant_and_generic_points() {
    let resonant = params_for(1.0 / 36.0, 0.9715).unwrap();
    let fs = resonant.frequencies().unwrap();
    let verdict = diophantine_scan(&fs, 1e-12, 7.0, 3);
    assert!(!verdict.holds);
    assert_eq!(verdict.worst.order, 3);
    assert!(verdict.margin < 1e-10);

    let generic = params(0.98, 0.01, 0.01).frequencies().unwrap();
    let verdict = diophantine_scan(&generic, 0.01, 7.0, 30);
    assert!(verdict.holds, "margin {}", verdict.margin);
}
