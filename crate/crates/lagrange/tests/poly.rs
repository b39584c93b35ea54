use lagrange::poly::{Chart, Polynomial, NVARS};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn random_poly(rng: &mut ChaCha8Rng, chart: Chart, terms: usize, max_deg: u8) -> Polynomial {
    let mut p = Polynomial::zero(chart);
    for _ in 0..terms {
        let mut e = [0u8; NVARS];
        for x in e.iter_mut() {
            *x = rng.gen_range(0..=max_deg);
        }
        p.add_term(e, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    }
    p
}

fn random_point(rng: &mut ChaCha8Rng) -> [Complex<f64>; NVARS] {
    std::array::from_fn(|_| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
}

#[test]
fn product_evaluates_like_the_factors() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let a = random_poly(&mut rng, Chart::PQ, 8, 2);
        let b = random_poly(&mut rng, Chart::PQ, 8, 2);
        let ab = a.mul_trunc(&b, 64);
        let x = random_point(&mut rng);
        let lhs = ab.evaluate(&x);
        let rhs = a.evaluate(&x) * b.evaluate(&x);
        assert!((lhs - rhs).norm() < 1e-12, "{lhs} vs {rhs}");
    }
}

#[test]
fn truncation_drops_exactly_the_high_degrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_poly(&mut rng, Chart::XY, 20, 3);
    let t = a.truncate_degree(4);
    assert!(t.degree() <= 4);
    for (e, coeff) in a.iter() {
        let d: usize = e.iter().map(|&x| x as usize).sum();
        if d <= 4 {
            assert_eq!(t.coefficient(e), *coeff);
        } else {
            assert_eq!(t.coefficient(e), c(0.0, 0.0));
        }
    }
    // Homogeneous parts rebuild the whole polynomial.
    let mut rebuilt = Polynomial::zero(Chart::XY);
    for d in 0..=a.degree() {
        rebuilt = rebuilt.add(&a.homogeneous_part(d));
    }
    assert_eq!(rebuilt, a);
}

#[test]
fn differentiation_satisfies_the_product_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_poly(&mut rng, Chart::UV, 6, 2);
    let b = random_poly(&mut rng, Chart::UV, 6, 2);
    let ab = a.mul_trunc(&b, 64);
    for var in 0..NVARS {
        let lhs = ab.differentiate(var);
        let rhs = a
            .differentiate(var)
            .mul_trunc(&b, 64)
            .add(&a.mul_trunc(&b.differentiate(var), 64));
        let diff = lhs.sub(&rhs);
        assert!(diff.max_coeff_norm() < 1e-12);
    }
}

#[test]
fn substitution_agrees_with_pointwise_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = random_poly(&mut rng, Chart::PQ, 6, 2);
    let images: [Polynomial; NVARS] =
        std::array::from_fn(|_| random_poly(&mut rng, Chart::ZetaEta, 3, 1));
    let q = p.substitute(&images, 64);
    assert_eq!(q.chart, Chart::ZetaEta);
    let x = random_point(&mut rng);
    let y: [Complex<f64>; NVARS] = std::array::from_fn(|i| images[i].evaluate(&x));
    let lhs = q.evaluate(&x);
    let rhs = p.evaluate(&y);
    assert!((lhs - rhs).norm() < 1e-10, "{lhs} vs {rhs}");
}

#[test]
fn linear_composition_is_a_special_substitution() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = random_poly(&mut rng, Chart::XY, 8, 2);
    let mut a = [[c(0.0, 0.0); NVARS]; NVARS];
    for row in a.iter_mut() {
        for v in row.iter_mut() {
            *v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let q = p.compose_linear(&a, Chart::ZetaEta, 64);
    let x = random_point(&mut rng);
    let y: [Complex<f64>; NVARS] = std::array::from_fn(|i| {
        (0..NVARS).map(|j| a[i][j] * x[j]).sum()
    });
    assert!((q.evaluate(&x) - p.evaluate(&y)).norm() < 1e-11);
}

#[test]
fn cancelling_terms_disappear() {
    let mut p = Polynomial::zero(Chart::PQ);
    p.add_term([1, 0, 0, 0, 0, 0], c(2.0, 1.0));
    p.add_term([1, 0, 0, 0, 0, 0], c(-2.0, -1.0));
    assert!(p.is_empty());
    p.add_term([0, 0, 1, 0, 0, 0], c(1.0, 0.0));
    p.add_term([0, 0, 0, 0, 0, 2], c(1e-20, 0.0));
    let pruned = p.pruned(1e-15);
    assert_eq!(pruned.len(), 1);
}

#[test]
fn json_form_is_deterministic_and_ordered() {
    let mut p = Polynomial::zero(Chart::UV);
    p.add_term([0, 0, 0, 0, 0, 2], c(3.0, 0.0));
    p.add_term([2, 0, 0, 0, 0, 0], c(1.0, -1.0));
    p.add_term([0, 1, 0, 1, 0, 0], c(0.5, 0.25));
    let v = p.to_json();
    let s = serde_json::to_string(&v).unwrap();
    assert_eq!(
        s,
        r#"{"0 0 0 0 0 2":[3.0,0.0],"0 1 0 1 0 0":[0.5,0.25],"2 0 0 0 0 0":[1.0,-1.0]}"#
    );
}
