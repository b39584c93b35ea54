//! Birkhoff normalization of the reduced Hamiltonian to degree 4: the
//! generating forms S3, S4, the twist matrix of the resulting integrable
//! part, and its closed-form counterpart.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hamiltonian::{
    assemble_hamiltonian, complexify, to_diagonal_real, FrequencySet, MassParameters,
};
use crate::poly::{Chart, Polynomial, NVARS};

/// Relative threshold under which a denominator <l - k, frequencies> is
/// treated as a resonance.
pub const RESONANCE_TOL: f64 = 1e-8;
const REALITY_TOL: f64 = 1e-9;

/// Degree-4 Birkhoff normal form data at one mass triple.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub frequencies: FrequencySet,
    /// Symmetric twist matrix: H = w0 r0 - w1 r1 + w2 r2
    /// + (1/2) sum omegas[j][k] r_j r_k in action variables.
    pub omegas: [[f64; 3]; 3],
    /// Generating form of degree 3 in (u, eta).
    pub s3: Polynomial,
    /// Generating form of degree 4 in (u, eta); resonant slots are zero.
    pub s4: Polynomial,
    /// Largest coefficient of the defect of the normalization identity.
    pub residual: f64,
    /// The truncated Hamiltonian in the complex diagonal chart.
    pub h_complex: Polynomial,
}

impl NormalForm {
    /// Value of the normal form on actions (r0, r1, r2).
    pub fn action_value(&self, r: [f64; 3]) -> f64 {
        let s = self.frequencies.signed();
        let mut v = s[0] * r[0] + s[1] * r[1] + s[2] * r[2];
        for j in 0..3 {
            for k in 0..3 {
                v += 0.5 * self.omegas[j][k] * r[j] * r[k];
            }
        }
        v
    }

    /// Gradient of the normal form: the frequency map.
    pub fn frequency_map(&self, r: [f64; 3]) -> [f64; 3] {
        let s = self.frequencies.signed();
        std::array::from_fn(|j| {
            s[j] + (0..3).map(|k| self.omegas[j][k] * r[k]).sum::<f64>()
        })
    }
}

fn exponent_split(e: &[u8; NVARS]) -> ([i64; 3], [i64; 3]) {
    (
        [e[0] as i64, e[1] as i64, e[2] as i64],
        [e[3] as i64, e[4] as i64, e[5] as i64],
    )
}

/// Solves the order-d homological equation: for every monomial u^k eta^l of
/// `rhs`, the generator coefficient is -c / (i <l - k, signed frequencies>).
/// Monomials with k = l are skipped (they stay in the normal form).
fn solve_homological(rhs: &Polynomial, f: &FrequencySet) -> Result<Polynomial> {
    let signed = f.signed();
    let mut s = Polynomial::zero(Chart::UV);
    for (e, c) in rhs.iter() {
        let (k, l) = exponent_split(e);
        if k == l {
            continue;
        }
        let d = [l[0] - k[0], l[1] - k[1], l[2] - k[2]];
        let den = d[0] as f64 * signed[0] + d[1] as f64 * signed[1] + d[2] as f64 * signed[2];
        if den.abs() < RESONANCE_TOL * f.omega0 {
            return Err(Error::Resonance {
                k0: d[0],
                k1: d[1],
                k2: d[2],
                residual: den.abs(),
            });
        }
        s.add_term(*e, -c / Complex::new(0.0, den));
    }
    Ok(s)
}

/// Verifies a generator against its homological equation: the defect of
/// i sum_j s_j w_j (l_j - k_j) * s_{k,l} + rhs_{k,l} restricted to the
/// non-resonant monomials, relative to the size of rhs.
fn homological_residual(s: &Polynomial, rhs: &Polynomial, f: &FrequencySet) -> f64 {
    let signed = f.signed();
    let mut worst: f64 = 0.0;
    for (e, c) in rhs.iter() {
        let (k, l) = exponent_split(e);
        if k == l {
            continue;
        }
        let den = (0..3)
            .map(|j| (l[j] - k[j]) as f64 * signed[j])
            .sum::<f64>();
        let defect = Complex::new(0.0, den) * s.coefficient(e) + c;
        worst = worst.max(defect.norm());
    }
    worst / rhs.max_coeff_norm().max(1e-300)
}

/// The twist matrix read off the resonant degree-4 monomials of `g4`.
fn resonant_twist(g4: &Polynomial) -> Result<[[f64; 3]; 3]> {
    let scale = g4.max_coeff_norm().max(1.0);
    let mut w = [[0.0; 3]; 3];
    let names = [["w00", "w01", "w02"], ["w01", "w11", "w12"], ["w02", "w12", "w22"]];
    for j in 0..3 {
        for k in j..3 {
            let mut e = [0u8; NVARS];
            e[j] += 1;
            e[j + 3] += 1;
            e[k] += 1;
            e[k + 3] += 1;
            let c = g4.coefficient(&e);
            if c.im.abs() > REALITY_TOL * scale {
                return Err(Error::NonRealNormalForm {
                    name: names[j][k],
                    imag: c.im,
                });
            }
            // (u_j eta_j)^2 carries -w_jj/2; u_j eta_j u_k eta_k carries -w_jk.
            let v = if j == k { -2.0 * c.re } else { -c.re };
            w[j][k] = v;
            w[k][j] = v;
        }
    }
    Ok(w)
}

/// Runs the full normalization pipeline at one mass triple.
pub fn birkhoff_normal_form(params: &MassParameters) -> Result<NormalForm> {
    let f = params.frequencies()?;
    let h_pq = assemble_hamiltonian(params)?;
    let h_xy = to_diagonal_real(&h_pq, params, 4)?;
    let hc = complexify(&h_xy, 4)?;

    // Reinterpret the complex chart as (u, eta) and solve order 3.
    let h3 = reslot(&hc.homogeneous_part(3));
    let h4 = reslot(&hc.homogeneous_part(4));
    let s3 = solve_homological(&h3, &f)?;

    // Degree-4 part of H3(u + dS3/deta, eta), then the order-4 equation.
    let images: [Polynomial; NVARS] = std::array::from_fn(|i| {
        if i < 3 {
            Polynomial::variable(Chart::UV, i).add(&s3.differentiate(i + 3))
        } else {
            Polynomial::variable(Chart::UV, i)
        }
    });
    let h3_shift = h3.substitute(&images, 4).homogeneous_part(4);
    let g4 = h3_shift.add(&h4);
    let omegas = resonant_twist(&g4)?;
    let s4 = solve_homological(&g4, &f)?;

    let mut nf = NormalForm {
        frequencies: f,
        omegas,
        s3,
        s4,
        residual: 0.0,
        h_complex: hc,
    };
    nf.residual = normalization_residual(&nf);
    Ok(nf)
}

/// Relabels a polynomial in the complex diagonal chart as one in the
/// normal-form chart (same slot layout, new variable names).
fn reslot(h: &Polynomial) -> Polynomial {
    let mut out = Polynomial::zero(Chart::UV);
    for (e, c) in h.iter() {
        out.add_term(*e, *c);
    }
    out
}

/// The integrable part as a polynomial in (u, v).
pub fn normal_form_polynomial(nf: &NormalForm) -> Polynomial {
    let mut h = Polynomial::zero(Chart::UV);
    h.add_term([0; 6], nf.h_complex.coefficient(&[0; 6]));
    let signed = nf.frequencies.signed();
    for j in 0..3 {
        let mut e = [0u8; NVARS];
        e[j] = 1;
        e[j + 3] = 1;
        h.add_term(e, Complex::new(0.0, signed[j]));
    }
    for j in 0..3 {
        for k in j..3 {
            let mut e = [0u8; NVARS];
            e[j] += 1;
            e[j + 3] += 1;
            e[k] += 1;
            e[k + 3] += 1;
            let c = if j == k { -0.5 * nf.omegas[j][j] } else { -nf.omegas[j][k] };
            h.add_term(e, Complex::new(c, 0.0));
        }
    }
    h
}

/// Largest coefficient of H(u + dS/deta, eta) - N(u, eta + dS/du) through
/// degree 4, relative to the size of H: the end-to-end check that S3, S4 and
/// the twist matrix satisfy the normalization identity.
pub fn normalization_residual(nf: &NormalForm) -> f64 {
    let s = nf.s3.add(&nf.s4);
    let zeta_images: [Polynomial; NVARS] = std::array::from_fn(|i| {
        if i < 3 {
            Polynomial::variable(Chart::UV, i).add(&s.differentiate(i + 3))
        } else {
            Polynomial::variable(Chart::UV, i)
        }
    });
    let lhs = reslot(&nf.h_complex).substitute(&zeta_images, 4);
    let eta_images: [Polynomial; NVARS] = std::array::from_fn(|i| {
        if i >= 3 {
            Polynomial::variable(Chart::UV, i).add(&s.differentiate(i - 3))
        } else {
            Polynomial::variable(Chart::UV, i)
        }
    });
    let rhs = normal_form_polynomial(nf).substitute(&eta_images, 4);
    let defect = lhs.sub(&rhs).truncate_degree(4);
    defect.max_coeff_norm() / nf.h_complex.max_coeff_norm().max(1e-300)
}

/// Residuals of the two homological equations, relative to their right-hand
/// sides; both should sit at rounding level.
pub fn homological_residuals(nf: &NormalForm) -> (f64, f64) {
    let f = &nf.frequencies;
    let h3 = reslot(&nf.h_complex.homogeneous_part(3));
    let r3 = homological_residual(&nf.s3, &h3, f);
    let images: [Polynomial; NVARS] = std::array::from_fn(|i| {
        if i < 3 {
            Polynomial::variable(Chart::UV, i).add(&nf.s3.differentiate(i + 3))
        } else {
            Polynomial::variable(Chart::UV, i)
        }
    });
    let g4 = h3
        .substitute(&images, 4)
        .homogeneous_part(4)
        .add(&reslot(&nf.h_complex.homogeneous_part(4)));
    let r4 = homological_residual(&nf.s4, &g4, f);
    (r3, r4)
}

/// The twist matrix from the published closed forms, for cross-validation
/// against the polynomial pipeline.
pub fn closed_form_omegas(params: &MassParameters) -> Result<[[f64; 3]; 3]> {
    let f = params.frequencies()?;
    let g = f.gamma;
    let beta = params.beta;
    let (m1, m2, m3) = (params.m1, params.m2, params.m3);
    let mmm = m1 * m2 * m3;

    let w00 = -3.0;
    let w01 = -(g + 1.0).sqrt() * (21.0 * g.powi(3) - 40.0 * g * g + 15.0 * g + 4.0)
        / (12.0 * 6f64.sqrt() * beta.sqrt() * g * (2.0 * g - 1.0));
    let w02 = -(g + 1.0).sqrt() * (21.0 * g * g + 19.0 * g - 4.0)
        / (4.0 * 2f64.sqrt() * g * (2.0 * g + 1.0));
    let w11 = (g - 1.0)
        * (1211.0 * g.powi(4) - 1336.0 * g.powi(3) + 279.0 * g * g + 158.0 * g - 76.0)
        / (72.0 * g * g * (10.0 * g * g - 11.0 * g + 3.0))
        - 3.0 * beta.powi(3) * (31.0 * g * g + 286.0 * g - 236.0)
            / (8.0 * (g - 1.0) * g * g * (5.0 * g - 3.0) * mmm);
    let w22 = -(g + 1.0)
        * (1211.0 * g.powi(4) + 1336.0 * g.powi(3) + 279.0 * g * g - 158.0 * g - 76.0)
        / (72.0 * g * g * (10.0 * g * g + 11.0 * g + 3.0))
        - 3.0 * beta.powi(3) * (31.0 * g * g - 286.0 * g - 236.0)
            / (8.0 * g * g * (g + 1.0) * (5.0 * g + 3.0) * mmm);
    let w12 = (3.0 * beta).sqrt()
        / (4.0 * (18225.0 * beta * beta - 1107.0 * beta + 16.0) * mmm)
        * ((360855.0 * beta * beta - 32265.0 * beta + 624.0) * m1.powi(3)
            + (-360855.0 * beta * beta + 32265.0 * beta - 624.0) * m1 * m1
            + 3.0 * beta * (120285.0 * beta * beta - 10755.0 * beta + 208.0) * m1
            - 4.0 * beta * beta * (432.0 * beta + 43.0));

    Ok([[w00, w01, w02], [w01, w11, w12], [w02, w12, w22]])
}
