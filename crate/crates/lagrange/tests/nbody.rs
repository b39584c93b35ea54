use approx::assert_relative_eq;
use lagrange::nbody::*;

fn masses() -> Masses {
    Masses::normalized(vec![0.5, 0.3, 0.2]).unwrap()
}

fn beta(m: &Masses) -> f64 {
    let v = m.values();
    v[0] * v[1] + v[1] * v[2] + v[0] * v[2]
}

#[test]
fn equilateral_is_a_unit_central_configuration() {
    let m = masses();
    let r = equilateral_configuration(&m).unwrap();
    assert_relative_eq!(mass_norm(&r, &m).unwrap(), 1.0, epsilon = 1e-14);
    assert!(r.is_centered(&m, 1e-14));
    assert!(central_config_residual(&r, &m).unwrap() < 1e-13);
    // Unit moment of inertia forces side length beta^{-1/2}.
    let side = 1.0 / beta(&m).sqrt();
    for (j, k) in [(0, 1), (1, 2), (0, 2)] {
        let (xj, yj) = r.body(j);
        let (xk, yk) = r.body(k);
        let d = ((xj - xk).powi(2) + (yj - yk).powi(2)).sqrt();
        assert_relative_eq!(d, side, epsilon = 1e-12);
    }
}

#[test]
fn equilateral_spectrum_matches_closed_forms() {
    let m = masses();
    let b = beta(&m);
    let alpha = (1.0 - 3.0 * b).sqrt();
    let lambda = b.powf(1.5);
    let r = equilateral_configuration(&m).unwrap();
    let a = analyze_central_config(&r, &m).unwrap();
    assert_relative_eq!(a.lambda, lambda, epsilon = 1e-13);
    assert_relative_eq!(a.eigenvalues[0], lambda, epsilon = 1e-13);
    assert_relative_eq!(a.eigenvalues[1], lambda, epsilon = 1e-13);
    assert!(a.eigenvalues[2].abs() < 1e-13 && a.eigenvalues[3].abs() < 1e-13);
    assert_relative_eq!(
        a.reduced_eigenvalues()[0],
        1.5 * (1.0 - alpha) * lambda,
        epsilon = 1e-11
    );
    assert_relative_eq!(
        a.reduced_eigenvalues()[1],
        1.5 * (1.0 + alpha) * lambda,
        epsilon = 1e-11
    );
}

#[test]
fn eigenbasis_is_mass_orthonormal_and_diagonalizes() {
    let m = masses();
    let r = equilateral_configuration(&m).unwrap();
    let a = analyze_central_config(&r, &m).unwrap();
    for j in 0..6 {
        for k in 0..6 {
            let g = mass_inner_product(&a.eigenvector(j), &a.eigenvector(k), &m).unwrap();
            let want = if j == k { 1.0 } else { 0.0 };
            assert!((g - want).abs() < 1e-12, "gram[{j}][{k}] = {g}");
        }
    }
    // D E_j = lambda_j E_j with D = lambda I + M^{-1} B - 3 lambda r r^T M.
    let b = hessian_of_force_function(&r, &m);
    let md = m.metric_diagonal();
    for j in 0..6 {
        let e = a.eigenvector(j);
        let rte: f64 = r
            .coords()
            .iter()
            .zip(e.coords().iter())
            .zip(md.iter())
            .map(|((x, y), w)| x * y * w)
            .sum();
        let be = &b * e.coords();
        for i in 0..6 {
            let de = a.lambda * e.coords()[i] + be[i] / md[i]
                - 3.0 * a.lambda * r.coords()[i] * rte;
            assert!(
                (de - a.eigenvalues[j] * e.coords()[i]).abs() < 1e-10,
                "eigen residual at ({j}, {i})"
            );
        }
    }
}

#[test]
fn rotation_coupling_matrix_is_the_standard_symplectic_unit() {
    let m = masses();
    let r = equilateral_configuration(&m).unwrap();
    let a = analyze_central_config(&r, &m).unwrap();
    assert!(a.q[(0, 0)].abs() < 1e-12);
    assert!(a.q[(1, 1)].abs() < 1e-12);
    assert_relative_eq!(a.q[(0, 1)], -1.0, epsilon = 1e-12);
    assert_relative_eq!(a.q[(1, 0)], 1.0, epsilon = 1e-12);
}

#[test]
fn euler_configuration_is_central() {
    for values in [vec![1.0, 1.0, 1.0], vec![3.0, 1.0, 0.5], vec![0.1, 2.0, 1.3]] {
        let m = Masses::normalized(values).unwrap();
        let r = euler_configuration(&m).unwrap();
        assert_relative_eq!(mass_norm(&r, &m).unwrap(), 1.0, epsilon = 1e-12);
        assert!(
            central_config_residual(&r, &m).unwrap() < 1e-11,
            "residual {}",
            central_config_residual(&r, &m).unwrap()
        );
        let a = analyze_central_config(&r, &m).unwrap();
        // Collinear configurations are saddles of the restricted potential.
        assert!(a.reduced_eigenvalues()[0] < 0.0);
    }
}

#[test]
fn third_directional_derivative_matches_finite_differences() {
    let m = masses();
    let r = equilateral_configuration(&m).unwrap();
    let a = Configuration::new(vec![0.3, -0.1, 0.2, 0.4, -0.5, 0.1]).unwrap();
    let b = Configuration::new(vec![-0.2, 0.7, 0.1, -0.3, 0.2, 0.2]).unwrap();
    let c = Configuration::new(vec![0.1, 0.1, -0.4, 0.2, 0.3, -0.6]).unwrap();
    let exact = third_directional_derivative(&r, &m, &a, &b, &c);
    let h = 1e-3;
    let f = |s: f64, t: f64, u: f64| -> f64 {
        let coords = r.coords() + a.coords() * s + b.coords() * t + c.coords() * u;
        force_function(&Configuration::from_vector(coords), &m).unwrap()
    };
    let mut fd = 0.0;
    for (ss, sw) in [(h, 1.0), (-h, -1.0)] {
        for (ts, tw) in [(h, 1.0), (-h, -1.0)] {
            for (us, uw) in [(h, 1.0), (-h, -1.0)] {
                fd += sw * tw * uw * f(ss, ts, us);
            }
        }
    }
    fd /= 8.0 * h * h * h;
    assert_relative_eq!(exact, fd, epsilon = 1e-5, max_relative = 1e-5);
}

#[test]
fn reduced_potential_gradient_matches_finite_differences() {
    let m = masses();
    let r = equilateral_configuration(&m).unwrap();
    let a = analyze_central_config(&r, &m).unwrap();
    let z = [0.05, -0.03];
    let g = reduced_potential_gradient(&a, &m, &z).unwrap();
    let h = 1e-6;
    for k in 0..2 {
        let mut zp = z;
        let mut zm = z;
        zp[k] += h;
        zm[k] -= h;
        let fd = (reduced_potential(&a, &m, &zp).unwrap()
            - reduced_potential(&a, &m, &zm).unwrap())
            / (2.0 * h);
        assert_relative_eq!(g[k], fd, epsilon = 1e-7, max_relative = 1e-7);
    }
}

#[test]
fn reduced_potential_quadratic_part_reproduces_the_spectrum() {
    let m = masses();
    let r = equilateral_configuration(&m).unwrap();
    let a = analyze_central_config(&r, &m).unwrap();
    let u0 = reduced_potential(&a, &m, &[0.0, 0.0]).unwrap();
    assert_relative_eq!(u0, a.lambda, epsilon = 1e-14);
    let h = 1e-4;
    for k in 0..2 {
        let mut zp = [0.0, 0.0];
        let mut zm = [0.0, 0.0];
        zp[k] = h;
        zm[k] = -h;
        let second = (reduced_potential(&a, &m, &zp).unwrap()
            + reduced_potential(&a, &m, &zm).unwrap()
            - 2.0 * u0)
            / (h * h);
        assert_relative_eq!(
            second,
            a.reduced_eigenvalues()[k],
            epsilon = 1e-6,
            max_relative = 1e-6
        );
    }
}

#[test]
fn cubic_taylor_tensor_matches_chart_finite_differences() {
    let m = masses();
    let r = equilateral_configuration(&m).unwrap();
    let a = analyze_central_config(&r, &m).unwrap();
    let taylor = force_taylor(&a, &r, &m).unwrap();
    // Along a single chart axis the z3 correction contributes nothing at
    // third order (the mixed second differential against E3 vanishes), so
    // the chart third derivative equals the ambient one.
    let h = 1e-2;
    for k in 0..2 {
        let u = |t: f64| -> f64 {
            let mut z = [0.0, 0.0];
            z[k] = t;
            reduced_potential(&a, &m, &z).unwrap()
        };
        let diff3 = |h: f64| {
            (u(2.0 * h) - 2.0 * u(h) + 2.0 * u(-h) - u(-2.0 * h)) / (2.0 * h * h * h)
        };
        // Richardson step kills the O(h^2) truncation error.
        let fd = (4.0 * diff3(h / 2.0) - diff3(h)) / 3.0;
        assert_relative_eq!(fd, taylor.cubic[k][k][k], epsilon = 5e-6, max_relative = 5e-6);
    }
}

#[test]
fn mass_validation_rejects_bad_input() {
    assert!(Masses::new(vec![1.0, -1.0, 0.5]).is_err());
    assert!(Masses::new(vec![1.0]).is_err());
    let m = Masses::new(vec![1.0, 1.0, 1.0]).unwrap();
    assert!(m.require_normalized().is_err());
    let r = equilateral_configuration(&Masses::normalized(vec![1.0, 1.0, 1.0]).unwrap()).unwrap();
    assert!(analyze_central_config(&r, &m).is_err());
}
