//! The reduced Hamiltonian of the planar three-body problem near the
//! equilateral relative equilibrium: mass parameters, the quartic Taylor
//! expansion in canonical coordinates, the real symplectic transform that
//! diagonalizes the quadratic part, and its complexification.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::nbody::{reduced_potential, CentralConfigAnalysis, Masses};
use crate::poly::{Chart, Polynomial, NVARS};

/// Derived quantities of a normalized mass triple.
#[derive(Debug, Clone, Copy)]
pub struct MassParameters {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    /// beta = m1 m2 + m2 m3 + m3 m1, in (0, 1/3].
    pub beta: f64,
    /// alpha = sqrt(1 - 3 beta).
    pub alpha: f64,
    /// kappa^2 = 4 beta m3 (2 - 6 beta + alpha - 3 alpha m2) / (3 m1 m2).
    pub kappa: f64,
}

impl MassParameters {
    pub fn new(m: &Masses) -> Result<Self> {
        m.require_normalized()?;
        if m.n_bodies() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: m.n_bodies(),
            });
        }
        let [m1, m2, m3] = [m.values()[0], m.values()[1], m.values()[2]];
        let beta = m1 * m2 + m2 * m3 + m3 * m1;
        let alpha = (1.0 - 3.0 * beta).max(0.0).sqrt();
        let kappa_sq = 4.0 * beta * m3 * (2.0 - 6.0 * beta + alpha - 3.0 * alpha * m2)
            / (3.0 * m1 * m2);
        if kappa_sq <= 0.0 {
            return Err(Error::KappaVanishes);
        }
        Ok(Self {
            m1,
            m2,
            m3,
            beta,
            alpha,
            kappa: kappa_sq.sqrt(),
        })
    }

    /// gamma = sqrt(1 - 27 beta); real only below the critical mass ratio.
    pub fn gamma(&self) -> Result<f64> {
        let d = 1.0 - 27.0 * self.beta;
        if d <= 0.0 {
            return Err(Error::FrequencyCollision { beta: self.beta });
        }
        Ok(d.sqrt())
    }

    pub fn frequencies(&self) -> Result<FrequencySet> {
        let gamma = self.gamma()?;
        let omega0 = self.beta.powf(0.75);
        let mu1 = ((1.0 - gamma) / 2.0).sqrt();
        let mu2 = ((1.0 + gamma) / 2.0).sqrt();
        Ok(FrequencySet {
            omega0,
            omega1: mu1 * omega0,
            omega2: mu2 * omega0,
            mu1,
            mu2,
            gamma,
        })
    }
}

/// The three elliptic frequencies of the linearized flow and their ratios.
#[derive(Debug, Clone, Copy)]
pub struct FrequencySet {
    pub omega0: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub gamma: f64,
}

impl FrequencySet {
    /// The frequency vector with the signs of the quadratic normal form.
    pub fn signed(&self) -> [f64; 3] {
        [self.omega0, -self.omega1, self.omega2]
    }

    /// <k, signed frequencies>.
    pub fn combination(&self, k: [i64; 3]) -> f64 {
        let s = self.signed();
        k[0] as f64 * s[0] + k[1] as f64 * s[1] + k[2] as f64 * s[2]
    }
}

/// Cubic and quartic Taylor coefficients of the restricted potential in the
/// eigenbasis chart: U = lambda + (l5 q1^2 + l6 q2^2)/2 + a30 q1^3 + ... .
#[derive(Debug, Clone, Copy)]
pub struct PotentialCoeffs {
    pub a30: f64,
    pub a21: f64,
    pub a12: f64,
    pub a03: f64,
    pub a40: f64,
    pub a31: f64,
    pub a22: f64,
    pub a13: f64,
    pub a04: f64,
}

pub fn potential_coeffs(p: &MassParameters) -> Result<PotentialCoeffs> {
    let (m1, m2, m3) = (p.m1, p.m2, p.m3);
    let (beta, alpha, kappa) = (p.beta, p.alpha, p.kappa);
    let s3 = 3f64.sqrt();

    let a3012 = m3 * beta.powi(3) * (alpha - 1.0).powi(2) * (alpha - 3.0 * m1 + 1.0)
        * (3.0 * alpha * (2.0 * alpha - 1.0)
            + (2.0 - 5.0 * alpha) * (m2 - m3)
            + 3.0 * m1 * (3.0 * alpha - 2.0 * m2 + 2.0 * m3))
        / (36.0 * s3 * kappa.powi(3) * m1 * m1 * m2 * m2);
    let a30 = (13.0 * alpha + 5.0) * a3012;
    let a12 = -3.0 * (9.0 * alpha + 5.0) * a3012;

    let a2103 = -m3 * beta.powi(3) * (alpha + 1.0).powi(2) * (alpha + 3.0 * m1 - 1.0)
        * (10.0 * alpha * alpha + alpha - 9.0 * alpha * m2 + 9.0 * alpha * m3
            - 3.0 * (alpha - 4.0) * m1
            - 18.0 * m1 * m1
            - 2.0)
        / (108.0 * kappa.powi(3) * m1 * m1 * m2 * m2);
    let a21 = -3.0 * (9.0 * alpha - 5.0) * a2103;
    let a03 = (13.0 * alpha - 5.0) * a2103;

    let a4004 = (m1
        * (8.0 - 13.0 * alpha * alpha - 4.0 * alpha + 3.0 * (4.0 * alpha - 1.0) * (m2 - m3))
        + (alpha - 1.0)
            * (1.0 - 8.0 * alpha * alpha + alpha + (7.0 * alpha - 1.0) * (m2 - m3))
        + 3.0 * (4.0 * alpha - 7.0) * m1 * m1
        + 18.0 * m1.powi(3))
        * beta.powf(3.5)
        * m3
        / (1296.0 * kappa.powi(4) * m1.powi(3) * m2.powi(4));
    let a2 = alpha * alpha;
    let a40 = (-(a2 - 1.0).powi(2) * (40.0 * alpha.powi(3) - 123.0 * a2 + 35.0)
        - 27.0 * (41.0 * a2 * a2 + 8.0 * alpha.powi(3) + 50.0 * a2 - 35.0) * m1 * m2 * m3)
        * a4004;
    let a04 = ((a2 - 1.0).powi(2) * (40.0 * alpha.powi(3) + 123.0 * a2 - 35.0)
        - 27.0 * (41.0 * a2 * a2 - 8.0 * alpha.powi(3) + 50.0 * a2 - 35.0) * m1 * m2 * m3)
        * a4004;

    // Evaluated as a polynomial in m2*m3: the direct rational form in beta
    // cancels catastrophically when m2*m3 is small.
    let pr = m2 * m3;
    let c1 = -m1 * m1 * (1.0 - m1).powi(2) * (64.0 - 297.0 * m1 * (1.0 - m1));
    let c2 = m1 * (((891.0 * m1 - 891.0) * m1 * m1 + 393.0 * m1 - 265.0) * m1 + 96.0);
    let c3 = (-1782.0 * m1 + 891.0) * m1 * m1 - 393.0 * m1 - 64.0;
    let c4 = 297.0 * (3.0 * m1 + 1.0);
    let a22 = 54.0 * a4004 * (((c4 * pr + c3) * pr + c2) * pr + c1);

    let a13 = (beta + m3 * (3.0 * m3 - 2.0))
        * (alpha + 3.0 * m1 - 1.0)
        * (8.0 * a2 - alpha - 7.0 * alpha * (m2 - m3)
            + m1 * (3.0 * alpha - 3.0 * (m2 - m3) + 6.0)
            - 9.0 * m1 * m1
            + (m2 - m3)
            - 1.0)
        * 35.0
        * beta.powf(5.5)
        * m3
        / (4.0 * s3 * kappa.powi(4) * m1.powi(3) * m2.powi(3));
    let a31 = -a13;

    Ok(PotentialCoeffs {
        a30,
        a21,
        a12,
        a03,
        a40,
        a31,
        a22,
        a13,
        a04,
    })
}

fn real_term(p: &mut Polynomial, e: [u8; NVARS], c: f64) {
    p.add_term(e, Complex::new(c, 0.0));
}

/// The quartic Taylor expansion of the reduced rotating-frame Hamiltonian in
/// canonical variables (p0, p1, p2, q0, q1, q2), constant term included.
pub fn assemble_hamiltonian(params: &MassParameters) -> Result<Polynomial> {
    let w = params.beta.powf(0.75); // omega_0
    let alpha = params.alpha;
    let a = potential_coeffs(params)?;
    let mut h = Polynomial::zero(Chart::PQ);

    // Variable slots: 0..2 = p0, p1, p2; 3..5 = q0, q1, q2.
    real_term(&mut h, [0; 6], -1.5 * w * w);

    // H2
    real_term(&mut h, [2, 0, 0, 0, 0, 0], 0.5);
    real_term(&mut h, [0, 2, 0, 0, 0, 0], 0.5);
    real_term(&mut h, [0, 0, 2, 0, 0, 0], 0.5);
    real_term(&mut h, [0, 1, 0, 0, 0, 1], w);
    real_term(&mut h, [0, 0, 1, 0, 1, 0], -w);
    real_term(&mut h, [0, 0, 0, 2, 0, 0], 0.5 * w * w);
    real_term(&mut h, [0, 0, 0, 0, 2, 0], 0.25 * (3.0 * alpha - 1.0) * w * w);
    real_term(&mut h, [0, 0, 0, 0, 0, 2], -0.25 * (3.0 * alpha + 1.0) * w * w);

    // H3
    real_term(&mut h, [0, 0, 1, 1, 1, 0], 2.0 * w);
    real_term(&mut h, [0, 1, 0, 1, 0, 1], -2.0 * w);
    real_term(&mut h, [0, 0, 2, 1, 0, 0], -1.0);
    real_term(&mut h, [0, 2, 0, 1, 0, 0], -1.0);
    real_term(&mut h, [0, 0, 0, 3, 0, 0], -w * w);
    real_term(&mut h, [0, 0, 0, 0, 0, 3], -a.a03);
    real_term(&mut h, [0, 0, 0, 0, 1, 2], -a.a12);
    real_term(&mut h, [0, 0, 0, 0, 2, 1], -a.a21);
    real_term(&mut h, [0, 0, 0, 0, 3, 0], -a.a30);
    real_term(&mut h, [0, 0, 0, 1, 2, 0], -0.25 * w * w * (3.0 * alpha + 1.0));
    real_term(&mut h, [0, 0, 0, 1, 0, 2], -0.25 * w * w * (1.0 - 3.0 * alpha));

    // H4
    real_term(&mut h, [0, 2, 0, 2, 0, 0], 1.5);
    real_term(&mut h, [0, 0, 2, 2, 0, 0], 1.5);
    real_term(&mut h, [0, 2, 0, 0, 2, 0], -0.5);
    real_term(&mut h, [0, 0, 2, 0, 2, 0], 0.5);
    real_term(&mut h, [0, 2, 0, 0, 0, 2], 0.5);
    real_term(&mut h, [0, 0, 2, 0, 0, 2], -0.5);
    real_term(&mut h, [0, 0, 1, 2, 1, 0], -3.0 * w);
    real_term(&mut h, [0, 1, 0, 2, 0, 1], 3.0 * w);
    real_term(&mut h, [0, 0, 1, 0, 3, 0], -w);
    real_term(&mut h, [0, 1, 0, 0, 0, 3], w);
    real_term(&mut h, [0, 0, 1, 0, 1, 2], -w);
    real_term(&mut h, [0, 1, 0, 0, 2, 1], w);
    real_term(&mut h, [0, 0, 0, 4, 0, 0], 1.5 * w * w);
    real_term(&mut h, [0, 1, 1, 0, 1, 1], -2.0);
    real_term(&mut h, [0, 0, 0, 1, 2, 1], a.a21);
    real_term(&mut h, [0, 0, 0, 1, 3, 0], a.a30);
    real_term(&mut h, [0, 0, 0, 0, 3, 1], -a.a31);
    real_term(&mut h, [0, 0, 0, 1, 0, 3], a.a03);
    real_term(&mut h, [0, 0, 0, 1, 1, 2], a.a12);
    real_term(&mut h, [0, 0, 0, 0, 1, 3], -a.a13);
    real_term(&mut h, [0, 0, 0, 0, 0, 4], 0.5 * w * w - a.a04);
    real_term(&mut h, [0, 0, 0, 0, 4, 0], 0.5 * w * w - a.a40);
    real_term(&mut h, [0, 0, 0, 0, 2, 2], w * w - a.a22);
    real_term(&mut h, [0, 0, 0, 2, 2, 0], 0.75 * w * w * (alpha + 1.0));
    real_term(&mut h, [0, 0, 0, 2, 0, 2], -0.75 * w * w * (alpha - 1.0));

    Ok(h)
}

/// The real symplectic matrix taking (x0, x1, x2, y0, y1, y2) to
/// (p0, p1, p2, q0, q1, q2) and turning the quadratic part into
/// w0 (x0^2+y0^2)/2 - w1 (x1^2+y1^2)/2 + w2 (x2^2+y2^2)/2.
pub fn diagonalizing_transform(params: &MassParameters) -> Result<[[f64; 6]; 6]> {
    let f = params.frequencies()?;
    let (w0, w1, w2, g) = (f.omega0, f.omega1, f.omega2, f.gamma);
    let alpha = params.alpha;
    let s2 = 2f64.sqrt();
    let c1 = (g * w1 / (4.0 - 3.0 * alpha - g)).sqrt();
    let c2 = (g * w2 / (4.0 - 3.0 * alpha + g)).sqrt();
    let mut t = [[0.0; 6]; 6];
    // p0 = sqrt(w0) x0, q0 = y0 / sqrt(w0).
    t[0][0] = w0.sqrt();
    t[3][3] = 1.0 / w0.sqrt();
    // p1 = w0 (3a - g) / (4 sqrt(2) c1) x1 + w0 (3a + g) / (4 sqrt(2) c2) y2.
    t[1][1] = w0 * (3.0 * alpha - g) / (4.0 * s2 * c1);
    t[1][5] = w0 * (3.0 * alpha + g) / (4.0 * s2 * c2);
    // p2 = (g - 3a) c2 / (sqrt(2) g) x2 - (3a + g) c1 / (sqrt(2) g) y1.
    t[2][2] = (g - 3.0 * alpha) * c2 / (s2 * g);
    t[2][4] = -(3.0 * alpha + g) * c1 / (s2 * g);
    // q1 = -2 sqrt(2) c2 / (g w0) x2 - 2 sqrt(2) c1 / (g w0) y1.
    t[4][2] = -2.0 * s2 * c2 / (g * w0);
    t[4][4] = -2.0 * s2 * c1 / (g * w0);
    // q2 = x1 / (sqrt(2) c1) + y2 / (sqrt(2) c2).
    t[5][1] = 1.0 / (s2 * c1);
    t[5][5] = 1.0 / (s2 * c2);
    Ok(t)
}

/// Applies the diagonalizing transform to a polynomial in the (p, q) chart.
pub fn to_diagonal_real(h: &Polynomial, params: &MassParameters, cap: usize) -> Result<Polynomial> {
    if h.chart != Chart::PQ {
        return Err(Error::ChartMismatch {
            expected: Chart::PQ,
            got: h.chart,
        });
    }
    let t = diagonalizing_transform(params)?;
    let mut a = [[Complex::new(0.0, 0.0); NVARS]; NVARS];
    for i in 0..NVARS {
        for j in 0..NVARS {
            a[i][j] = Complex::new(t[i][j], 0.0);
        }
    }
    Ok(h.compose_linear(&a, Chart::XY, cap).pruned(1e-13))
}

/// x_j = (zeta_j + i eta_j) / sqrt(2), y_j = (eta_j + i zeta_j) / sqrt(2).
pub fn complexify(h: &Polynomial, cap: usize) -> Result<Polynomial> {
    if h.chart != Chart::XY {
        return Err(Error::ChartMismatch {
            expected: Chart::XY,
            got: h.chart,
        });
    }
    let mut a = [[Complex::new(0.0, 0.0); NVARS]; NVARS];
    let r = Complex::new(1.0 / 2f64.sqrt(), 0.0);
    let ir = Complex::new(0.0, 1.0 / 2f64.sqrt());
    for j in 0..3 {
        a[j][j] = r;
        a[j][j + 3] = ir;
        a[j + 3][j + 3] = r;
        a[j + 3][j] = ir;
    }
    Ok(h.compose_linear(&a, Chart::ZetaEta, cap).pruned(1e-13))
}

/// Largest violation of the reality condition f_{k,l} = i^{|k+l|}
/// conj(f_{l,k}) over the coefficients of a polynomial in the complex chart.
pub fn reality_defect(h: &Polynomial) -> f64 {
    let mut worst: f64 = 0.0;
    for (e, c) in h.iter() {
        let mut swapped = [0u8; NVARS];
        for j in 0..3 {
            swapped[j] = e[j + 3];
            swapped[j + 3] = e[j];
        }
        let total: u32 = e.iter().map(|&x| x as u32).sum();
        let other = h.coefficient(&swapped);
        let phase = Complex::new(0.0, 1.0).powu(total);
        worst = worst.max((c - phase * other.conj()).norm());
    }
    worst
}

/// Evaluates the reduced rotating-frame Hamiltonian exactly (no Taylor
/// truncation) at canonical coordinates p = (p0, p1, p2), q = (q0, q1, q2),
/// with the angular momentum fixed at its equilibrium value omega.
pub fn exact_hamiltonian(
    analysis: &CentralConfigAnalysis,
    m: &Masses,
    p: [f64; 3],
    q: [f64; 3],
) -> Result<f64> {
    let omega = analysis.omega();
    let rho = 1.0 + q[0];
    if rho <= 0.0 {
        return Err(Error::RadialCollapse { r: q[0] });
    }
    let z = [q[1], q[2]];
    let z3 = crate::nbody::chart_z3(&z)?;
    // Kinetic block for (dz5, dz6, dtheta): G = [I + z z^T / z3^2, Qz; ..., 1]
    // with Qz = (-z6, z5); momenta are rho^2 G (velocities).
    let mut g = DMatrix::zeros(3, 3);
    g[(0, 0)] = 1.0 + z[0] * z[0] / (z3 * z3);
    g[(0, 1)] = z[0] * z[1] / (z3 * z3);
    g[(1, 0)] = g[(0, 1)];
    g[(1, 1)] = 1.0 + z[1] * z[1] / (z3 * z3);
    g[(0, 2)] = -z[1];
    g[(2, 0)] = -z[1];
    g[(1, 2)] = z[0];
    g[(2, 1)] = z[0];
    g[(2, 2)] = 1.0;
    let v = DVector::from_vec(vec![p[1], p[2], omega]);
    let sol = g.lu().solve(&v).ok_or(Error::EigenFailure)?;
    let kinetic = 0.5 * p[0] * p[0] + v.dot(&sol) / (2.0 * rho * rho);
    let u = reduced_potential(analysis, m, &z)?;
    Ok(kinetic - u / rho - omega * omega)
}
