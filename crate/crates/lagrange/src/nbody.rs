//! Planar N-body machinery in the mass metric: configurations, the force
//! function, central-configuration verification, and the linearization of
//! the gradient together with its mass-orthonormal eigenbasis.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const CENTRAL_CONFIG_TOL: f64 = 1e-9;
const DEGENERACY_TOL: f64 = 1e-9;

/// Positive point masses. Total mass is expected to be normalized to 1 by
/// the operations that rely on the closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct Masses {
    values: Vec<f64>,
}

impl Masses {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: values.len(),
            });
        }
        if values.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::NonPositiveMass);
        }
        Ok(Self { values })
    }

    /// Masses with total rescaled to 1.
    pub fn normalized(values: Vec<f64>) -> Result<Self> {
        let m = Self::new(values)?;
        let total: f64 = m.values.iter().sum();
        Ok(Self {
            values: m.values.into_iter().map(|v| v / total).collect(),
        })
    }

    pub fn require_normalized(&self) -> Result<()> {
        let total: f64 = self.values.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::UnnormalizedMasses { total });
        }
        Ok(())
    }

    pub fn n_bodies(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// diag(m_1, m_1, ..., m_N, m_N)
    pub fn metric_diagonal(&self) -> DVector<f64> {
        let mut d = DVector::zeros(2 * self.values.len());
        for (j, &m) in self.values.iter().enumerate() {
            d[2 * j] = m;
            d[2 * j + 1] = m;
        }
        d
    }
}

/// A planar configuration stored as (x_1, y_1, ..., x_N, y_N).
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    coords: DVector<f64>,
}

impl Configuration {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() % 2 != 0 || coords.len() < 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: coords.len(),
            });
        }
        Ok(Self {
            coords: DVector::from_vec(coords),
        })
    }

    pub fn from_vector(coords: DVector<f64>) -> Self {
        Self { coords }
    }

    pub fn n_bodies(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn body(&self, j: usize) -> (f64, f64) {
        (self.coords[2 * j], self.coords[2 * j + 1])
    }

    /// The generator of translations along x: (1, 0, 1, 0, ...).
    pub fn translation_x(n_bodies: usize) -> Self {
        let mut v = DVector::zeros(2 * n_bodies);
        for j in 0..n_bodies {
            v[2 * j] = 1.0;
        }
        Self { coords: v }
    }

    /// The generator of translations along y: (0, 1, 0, 1, ...).
    pub fn translation_y(n_bodies: usize) -> Self {
        let mut v = DVector::zeros(2 * n_bodies);
        for j in 0..n_bodies {
            v[2 * j + 1] = 1.0;
        }
        Self { coords: v }
    }

    /// Rotate every body by 90 degrees: r -> r^perp.
    pub fn perp(&self) -> Self {
        let mut v = DVector::zeros(self.coords.len());
        for j in 0..self.n_bodies() {
            v[2 * j] = -self.coords[2 * j + 1];
            v[2 * j + 1] = self.coords[2 * j];
        }
        Self { coords: v }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coords: &self.coords * s,
        }
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        let n = self.n_bodies();
        let mut min = f64::INFINITY;
        for k in 0..n {
            for j in (k + 1)..n {
                let (xk, yk) = self.body(k);
                let (xj, yj) = self.body(j);
                let d = ((xj - xk).powi(2) + (yj - yk).powi(2)).sqrt();
                if d < min {
                    min = d;
                }
            }
        }
        min
    }

    pub fn is_centered(&self, m: &Masses, tol: f64) -> bool {
        let e1 = Self::translation_x(self.n_bodies());
        let e2 = Self::translation_y(self.n_bodies());
        mass_inner_product(self, &e1, m).map(|v| v.abs() <= tol).unwrap_or(false)
            && mass_inner_product(self, &e2, m).map(|v| v.abs() <= tol).unwrap_or(false)
    }
}

/// The equilateral configuration with unit mass-norm whose center of mass
/// is at the origin, oriented as in the closed-form eigenvector formulas.
pub fn equilateral_configuration(m: &Masses) -> Result<Configuration> {
    if m.n_bodies() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: m.n_bodies(),
        });
    }
    let [m1, m2, m3] = [m.values[0], m.values[1], m.values[2]];
    let beta = m1 * m2 + m2 * m3 + m3 * m1;
    let s = 2.0 * beta.sqrt();
    Configuration::new(vec![
        -3f64.sqrt() * m3 / s,
        (2.0 * m2 + m3) / s,
        -3f64.sqrt() * m3 / s,
        -(2.0 * m1 + m3) / s,
        3f64.sqrt() * (m1 + m2) / s,
        -(m1 - m2) / s,
    ])
}

/// The collinear (Euler) configuration for body order 1-2-3 along the
/// x-axis, centered and scaled to unit mass-norm. The spacing ratio is
/// found by bisection on the difference of the implied multipliers.
pub fn euler_configuration(m: &Masses) -> Result<Configuration> {
    if m.n_bodies() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: m.n_bodies(),
        });
    }
    // Positions 0, 1, 1 + t before centering; residual is the mismatch of
    // lambda between the two outer bodies.
    let residual = |t: f64| -> f64 {
        let c = collinear_from_ratio(m, t);
        let g = euclidean_gradient(&c, m);
        let lam = |k: usize| -> f64 {
            let (x, _) = c.body(k);
            -g[2 * k] / (m.values[k] * x)
        };
        lam(0) - lam(2)
    };
    let (mut lo, mut hi) = (1e-6, 1e6);
    let (flo, fhi) = (residual(lo), residual(hi));
    if flo * fhi > 0.0 {
        return Err(Error::InvalidConfiguration {
            condition: "Euler spacing root bracket",
        });
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if residual(mid) * flo <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let c = collinear_from_ratio(m, (lo * hi).sqrt());
    let norm = mass_inner_product(&c, &c, m)?.sqrt();
    Ok(c.scale(1.0 / norm))
}

fn collinear_from_ratio(m: &Masses, t: f64) -> Configuration {
    let xs = [0.0, 1.0, 1.0 + t];
    let total = m.total();
    let xc: f64 = xs.iter().zip(m.values()).map(|(x, mm)| x * mm).sum::<f64>() / total;
    Configuration::new(vec![xs[0] - xc, 0.0, xs[1] - xc, 0.0, xs[2] - xc, 0.0]).unwrap()
}

/// <a, b> = a^T M b
pub fn mass_inner_product(a: &Configuration, b: &Configuration, m: &Masses) -> Result<f64> {
    if a.coords.len() != b.coords.len() || a.coords.len() != 2 * m.n_bodies() {
        return Err(Error::DimensionMismatch {
            expected: 2 * m.n_bodies(),
            got: a.coords.len(),
        });
    }
    let d = m.metric_diagonal();
    Ok(a.coords.iter().zip(b.coords.iter()).zip(d.iter()).map(|((x, y), w)| x * y * w).sum())
}

pub fn mass_norm(a: &Configuration, m: &Masses) -> Result<f64> {
    Ok(mass_inner_product(a, a, m)?.sqrt())
}

pub fn moment_of_inertia(r: &Configuration, m: &Masses) -> Result<f64> {
    mass_inner_product(r, r, m)
}

/// U(r) = sum m_k m_j / r_jk
pub fn force_function(r: &Configuration, m: &Masses) -> Result<f64> {
    let n = r.n_bodies();
    if n != m.n_bodies() {
        return Err(Error::DimensionMismatch {
            expected: 2 * m.n_bodies(),
            got: 2 * n,
        });
    }
    let mut u = 0.0;
    for k in 0..n {
        for j in (k + 1)..n {
            let (xk, yk) = r.body(k);
            let (xj, yj) = r.body(j);
            let d = ((xj - xk).powi(2) + (yj - yk).powi(2)).sqrt();
            if d == 0.0 {
                return Err(Error::Collision { i: k, j });
            }
            u += m.values[k] * m.values[j] / d;
        }
    }
    Ok(u)
}

/// Euclidean gradient of U with respect to the 2N coordinates.
pub fn euclidean_gradient(r: &Configuration, m: &Masses) -> DVector<f64> {
    let n = r.n_bodies();
    let mut g = DVector::zeros(2 * n);
    for k in 0..n {
        for j in 0..n {
            if j == k {
                continue;
            }
            let (xk, yk) = r.body(k);
            let (xj, yj) = r.body(j);
            let (dx, dy) = (xj - xk, yj - yk);
            let d3 = (dx * dx + dy * dy).powf(1.5);
            // d/dr_k of m_k m_j / |r_j - r_k| = m_k m_j (r_j - r_k) / |.|^3
            g[2 * k] += m.values[k] * m.values[j] * dx / d3;
            g[2 * k + 1] += m.values[k] * m.values[j] * dy / d3;
        }
    }
    g
}

/// Gradient in the mass metric: M^{-1} times the Euclidean gradient.
pub fn mass_gradient(r: &Configuration, m: &Masses) -> DVector<f64> {
    let g = euclidean_gradient(r, m);
    let d = m.metric_diagonal();
    DVector::from_iterator(g.len(), g.iter().zip(d.iter()).map(|(gi, wi)| gi / wi))
}

/// || grad U + lambda r || in the mass metric, with lambda = U(r)/I(r).
pub fn central_config_residual(r: &Configuration, m: &Masses) -> Result<f64> {
    let u = force_function(r, m)?;
    let i = moment_of_inertia(r, m)?;
    let lambda = u / i;
    let grad = mass_gradient(r, m);
    let res = &grad + r.coords() * lambda;
    let d = m.metric_diagonal();
    Ok(res
        .iter()
        .zip(d.iter())
        .map(|(x, w)| x * x * w)
        .sum::<f64>()
        .sqrt())
}

/// Spectrum and mass-orthonormal eigenbasis of the linearization of grad U
/// at a unit-norm central configuration, with the four symmetry directions
/// pinned to the first columns, plus the rotation coupling matrix Q.
#[derive(Debug, Clone)]
pub struct CentralConfigAnalysis {
    pub lambda: f64,
    /// 2N eigenvalues ordered (lambda, lambda, 0, 0, lambda_5 <= ...).
    pub eigenvalues: Vec<f64>,
    /// Columns are the mass-orthonormal eigenvectors E_1..E_{2N}.
    pub basis: DMatrix<f64>,
    /// q_jk = <E_j, E_k^perp> for j, k >= 5 (0-based rows/cols from index 4).
    pub q: DMatrix<f64>,
}

impl CentralConfigAnalysis {
    /// Reduced eigenvalues lambda_5..lambda_{2N}.
    pub fn reduced_eigenvalues(&self) -> &[f64] {
        &self.eigenvalues[4..]
    }

    pub fn eigenvector(&self, j: usize) -> Configuration {
        Configuration::from_vector(self.basis.column(j).into_owned())
    }

    pub fn reduced_dim(&self) -> usize {
        self.eigenvalues.len() - 4
    }

    /// Angular rate omega with lambda = omega^2 (rho = 1).
    pub fn omega(&self) -> f64 {
        self.lambda.sqrt()
    }
}

pub fn analyze_central_config(r: &Configuration, m: &Masses) -> Result<CentralConfigAnalysis> {
    m.require_normalized()?;
    let n = m.n_bodies();
    let dim = 2 * n;
    let norm = mass_norm(r, m)?;
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfiguration {
            condition: "unit mass-norm (||r|| = 1)",
        });
    }
    let res = central_config_residual(r, m)?;
    if res > CENTRAL_CONFIG_TOL {
        return Err(Error::NotCentral {
            residual: res,
            tol: CENTRAL_CONFIG_TOL,
        });
    }
    let u = force_function(r, m)?;
    let lambda = u; // I(r) = 1

    // Mass-symmetrized linearization S = M^{1/2} D M^{-1/2}
    //   = lambda I + M^{-1/2} B M^{-1/2} - 3 lambda (M^{1/2} r)(M^{1/2} r)^T.
    let b = hessian_of_force_function(r, m);
    let sqrt_m: Vec<f64> = m.metric_diagonal().iter().map(|w| w.sqrt()).collect();
    let mut s = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        for c in 0..dim {
            s[(a, c)] = b[(a, c)] / (sqrt_m[a] * sqrt_m[c]);
        }
    }
    let w3 = DVector::from_iterator(dim, r.coords().iter().enumerate().map(|(i, x)| x * sqrt_m[i]));
    for a in 0..dim {
        s[(a, a)] += lambda;
        for c in 0..dim {
            s[(a, c)] -= 3.0 * lambda * w3[a] * w3[c];
        }
    }

    // Known eigendirections in the symmetrized frame.
    let e1 = Configuration::translation_x(n);
    let e2 = Configuration::translation_y(n);
    let known = [
        e1.coords().clone(),
        e2.coords().clone(),
        r.coords().clone(),
        r.perp().coords().clone(),
    ];
    let mut w_known: Vec<DVector<f64>> = known
        .iter()
        .map(|v| {
            let w = DVector::from_iterator(dim, v.iter().enumerate().map(|(i, x)| x * sqrt_m[i]));
            let nrm = w.norm();
            w / nrm
        })
        .collect();
    // Orthonormalize (E1, E2 are orthogonal to r, r^perp already; E1 vs E2 too).
    for i in 0..4 {
        for j in 0..i {
            let proj = w_known[j].dot(&w_known[i]);
            let prev = w_known[j].clone();
            w_known[i] -= prev * proj;
        }
        let nrm = w_known[i].norm();
        w_known[i] /= nrm;
    }

    // Orthonormal basis of the complement of the four symmetry directions.
    let mut comp: Vec<DVector<f64>> = Vec::with_capacity(dim - 4);
    for i in 0..dim {
        let mut v = DVector::zeros(dim);
        v[i] = 1.0;
        for w in w_known.iter().chain(comp.iter()) {
            let proj = w.dot(&v);
            v -= w * proj;
        }
        let nrm = v.norm();
        if nrm > 1e-8 {
            v /= nrm;
            comp.push(v);
            if comp.len() == dim - 4 {
                break;
            }
        }
    }
    if comp.len() != dim - 4 {
        return Err(Error::EigenFailure);
    }

    // Reduced symmetric eigenproblem on the complement.
    let red = dim - 4;
    let mut c_mat = DMatrix::zeros(dim, red);
    for (j, v) in comp.iter().enumerate() {
        c_mat.set_column(j, v);
    }
    let reduced = c_mat.transpose() * &s * &c_mat;
    let reduced_sym = (reduced.clone() + reduced.transpose()) * 0.5;
    let eig = reduced_sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..red).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());

    let mut eigenvalues = vec![lambda, lambda, 0.0, 0.0];
    let mut basis = DMatrix::zeros(dim, dim);
    // Pin the symmetry block: E1, E2, E3 = r, E4 = r^perp (mass-normalized).
    for (col, v) in known.iter().enumerate() {
        let cfg = Configuration::from_vector(v.clone());
        let nrm = mass_norm(&cfg, m)?;
        basis.set_column(col, &(v / nrm));
    }
    for (idx, &k) in order.iter().enumerate() {
        let lam_k = eig.eigenvalues[k];
        if lam_k.abs() < DEGENERACY_TOL {
            return Err(Error::DegenerateCentralConfig { kernel_dim: 3 });
        }
        eigenvalues.push(lam_k);
        let w = &c_mat * eig.eigenvectors.column(k);
        // Un-weight back to the mass metric.
        let mut v = DVector::zeros(dim);
        for i in 0..dim {
            v[i] = w[i] / sqrt_m[i];
        }
        basis.set_column(4 + idx, &v);
    }

    // Sign conventions: for the three-body equilateral case align E5 with the
    // closed-form eigenvector and take E6 = E5^perp; otherwise make the
    // largest-magnitude component positive.
    if n == 3 && red == 2 {
        if let Some(e5_ref) = equilateral_e5_reference(r, m) {
            let e5 = basis.column(4).into_owned();
            let dot: f64 = e5
                .iter()
                .zip(e5_ref.iter())
                .zip(m.metric_diagonal().iter())
                .map(|((a, b), w)| a * b * w)
                .sum();
            if dot < 0.0 {
                let flipped = -&e5;
                basis.set_column(4, &flipped);
            }
            let e5_cfg = Configuration::from_vector(basis.column(4).into_owned());
            let e6_candidate = e5_cfg.perp();
            // E5^perp is an eigenvector here; keep it as E6 after aligning sign.
            let e6 = basis.column(5).into_owned();
            let dot6: f64 = e6
                .iter()
                .zip(e6_candidate.coords().iter())
                .zip(m.metric_diagonal().iter())
                .map(|((a, b), w)| a * b * w)
                .sum();
            if dot6.abs() > 0.5 {
                basis.set_column(5, e6_candidate.coords());
            } else if largest_component_sign(&basis.column(5).into_owned()) < 0.0 {
                let flipped = -basis.column(5).into_owned();
                basis.set_column(5, &flipped);
            }
        }
    } else {
        for col in 4..dim {
            if largest_component_sign(&basis.column(col).into_owned()) < 0.0 {
                let flipped = -basis.column(col).into_owned();
                basis.set_column(col, &flipped);
            }
        }
    }

    // Q matrix: q_jk = <E_j, E_k^perp>.
    let mut q = DMatrix::zeros(red, red);
    for j in 0..red {
        let ej = Configuration::from_vector(basis.column(4 + j).into_owned());
        for k in 0..red {
            let ek = Configuration::from_vector(basis.column(4 + k).into_owned());
            q[(j, k)] = mass_inner_product(&ej, &ek.perp(), m)?;
        }
    }

    Ok(CentralConfigAnalysis {
        lambda,
        eigenvalues,
        basis,
        q,
    })
}

fn largest_component_sign(v: &DVector<f64>) -> f64 {
    let mut best = 0usize;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    v[best].signum()
}

/// The closed-form eigenvector direction for lambda_5 at the equilateral
/// configuration, used only to pin signs. Returns None away from that case.
fn equilateral_e5_reference(r: &Configuration, m: &Masses) -> Option<DVector<f64>> {
    let expected = equilateral_configuration(m).ok()?;
    let diff: f64 = r
        .coords()
        .iter()
        .zip(expected.coords().iter())
        .map(|(a, b)| (a - b).abs())
        .sum();
    if diff > 1e-8 {
        return None;
    }
    let [m1, m2, m3] = [m.values[0], m.values[1], m.values[2]];
    let beta = m1 * m2 + m2 * m3 + m3 * m1;
    let alpha = (1.0 - 3.0 * beta).max(0.0).sqrt();
    let kappa_sq = 4.0 * beta * m3 * (2.0 - 6.0 * beta + alpha - 3.0 * alpha * m2) / (3.0 * m1 * m2);
    if kappa_sq <= 0.0 {
        return None;
    }
    let kappa = kappa_sq.sqrt();
    let s3 = 3f64.sqrt();
    Some(DVector::from_vec(vec![
        (m1 - m3) * m3 / (kappa * m1),
        (3.0 * m2 - 2.0 * alpha - 1.0) * m3 / (s3 * kappa * m1),
        (m2 - alpha - m1) * m3 / (kappa * m2),
        (alpha + 3.0 * m3 - 1.0) * m3 / (s3 * kappa * m2),
        (alpha - m2 + m3) / kappa,
        (alpha + 3.0 * m1 - 1.0) / (s3 * kappa),
    ]))
}

/// Hessian B of the force function at r, a 2N x 2N matrix of 2x2 blocks.
pub fn hessian_of_force_function(r: &Configuration, m: &Masses) -> DMatrix<f64> {
    let n = r.n_bodies();
    let mut b = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let (xj, yj) = r.body(j);
            let (xk, yk) = r.body(k);
            let (dx, dy) = (xk - xj, yk - yj);
            let r2 = dx * dx + dy * dy;
            let r3 = r2.powf(1.5);
            let coef = m.values[j] * m.values[k] / r3;
            // B_jk = m_j m_k / r^3 [I - 3 d d^T / r^2]
            let bxx = coef * (1.0 - 3.0 * dx * dx / r2);
            let bxy = coef * (-3.0 * dx * dy / r2);
            let byy = coef * (1.0 - 3.0 * dy * dy / r2);
            b[(2 * j, 2 * k)] = bxx;
            b[(2 * j, 2 * k + 1)] = bxy;
            b[(2 * j + 1, 2 * k)] = bxy;
            b[(2 * j + 1, 2 * k + 1)] = byy;
            b[(2 * j, 2 * j)] -= bxx;
            b[(2 * j, 2 * j + 1)] -= bxy;
            b[(2 * j + 1, 2 * j)] -= bxy;
            b[(2 * j + 1, 2 * j + 1)] -= byy;
        }
    }
    b
}

/// Taylor data of the restricted force function U(z) at the central
/// configuration: the multiplier, the quadratic eigenvalues, and the cubic
/// tensor from analytic third directional derivatives.
#[derive(Debug, Clone)]
pub struct ForceTaylorData {
    pub lambda: f64,
    pub quad: Vec<f64>,
    /// a[i][j][k] = d^3 U |_{E3} (E_{i+5}, E_{j+5}, E_{k+5}), fully symmetric.
    pub cubic: Vec<Vec<Vec<f64>>>,
}

pub fn force_taylor(
    analysis: &CentralConfigAnalysis,
    r: &Configuration,
    m: &Masses,
) -> Result<ForceTaylorData> {
    let red = analysis.reduced_dim();
    let dirs: Vec<Configuration> = (0..red).map(|j| analysis.eigenvector(4 + j)).collect();
    let mut cubic = vec![vec![vec![0.0; red]; red]; red];
    for i in 0..red {
        for j in i..red {
            for k in j..red {
                let v = third_directional_derivative(r, m, &dirs[i], &dirs[j], &dirs[k]);
                for perm in [
                    (i, j, k),
                    (i, k, j),
                    (j, i, k),
                    (j, k, i),
                    (k, i, j),
                    (k, j, i),
                ] {
                    cubic[perm.0][perm.1][perm.2] = v;
                }
            }
        }
    }
    Ok(ForceTaylorData {
        lambda: analysis.lambda,
        quad: analysis.reduced_eigenvalues().to_vec(),
        cubic,
    })
}

/// d^3 U (a, b, c) at r: exact third differential of the 1/r_jk kernel.
pub fn third_directional_derivative(
    r: &Configuration,
    m: &Masses,
    a: &Configuration,
    b: &Configuration,
    c: &Configuration,
) -> f64 {
    let n = r.n_bodies();
    let mut total = 0.0;
    for k in 0..n {
        for j in (k + 1)..n {
            let (xk, yk) = r.body(k);
            let (xj, yj) = r.body(j);
            let d = (xj - xk, yj - yk);
            let da = (a.body(j).0 - a.body(k).0, a.body(j).1 - a.body(k).1);
            let db = (b.body(j).0 - b.body(k).0, b.body(j).1 - b.body(k).1);
            let dc = (c.body(j).0 - c.body(k).0, c.body(j).1 - c.body(k).1);
            let r2 = d.0 * d.0 + d.1 * d.1;
            let r5 = r2.powf(2.5);
            let r7 = r2.powf(3.5);
            let dot = |u: (f64, f64), v: (f64, f64)| u.0 * v.0 + u.1 * v.1;
            // d^3 (1/|d|)(a,b,c) = -15 (d.a)(d.b)(d.c)/|d|^7
            //   + 3 [(a.b)(d.c) + (a.c)(d.b) + (b.c)(d.a)] / |d|^5
            let term = -15.0 * dot(d, da) * dot(d, db) * dot(d, dc) / r7
                + 3.0 * (dot(da, db) * dot(d, dc) + dot(da, dc) * dot(d, db) + dot(db, dc) * dot(d, da))
                    / r5;
            total += m.values[k] * m.values[j] * term;
        }
    }
    total
}

/// U(z) = force function evaluated at z_3 E_3 + sum z_j E_j on the unit
/// sphere chart, z_3 = sqrt(1 - |z|^2).
pub fn reduced_potential(
    analysis: &CentralConfigAnalysis,
    m: &Masses,
    z: &[f64],
) -> Result<f64> {
    let cfg = chart_configuration(analysis, z)?;
    force_function(&cfg, m)
}

/// Gradient of U(z) with respect to the chart coordinates z_5..z_{2N}.
pub fn reduced_potential_gradient(
    analysis: &CentralConfigAnalysis,
    m: &Masses,
    z: &[f64],
) -> Result<Vec<f64>> {
    let cfg = chart_configuration(analysis, z)?;
    let g = euclidean_gradient(&cfg, m);
    let z3 = chart_z3(z)?;
    let e3 = analysis.eigenvector(2);
    let ge3: f64 = g.dot(e3.coords());
    let mut out = Vec::with_capacity(z.len());
    for (j, &zj) in z.iter().enumerate() {
        let ej = analysis.eigenvector(4 + j);
        out.push(g.dot(ej.coords()) - (zj / z3) * ge3);
    }
    Ok(out)
}

pub fn chart_z3(z: &[f64]) -> Result<f64> {
    let s: f64 = z.iter().map(|v| v * v).sum();
    if s >= 1.0 {
        return Err(Error::ChartExit { z_norm_sq: s });
    }
    Ok((1.0 - s).sqrt())
}

pub fn chart_configuration(
    analysis: &CentralConfigAnalysis,
    z: &[f64],
) -> Result<Configuration> {
    if z.len() != analysis.reduced_dim() {
        return Err(Error::DimensionMismatch {
            expected: analysis.reduced_dim(),
            got: z.len(),
        });
    }
    let z3 = chart_z3(z)?;
    let mut v = analysis.basis.column(2) * z3;
    for (j, &zj) in z.iter().enumerate() {
        v += analysis.basis.column(4 + j) * zj;
    }
    Ok(Configuration::from_vector(v))
}
