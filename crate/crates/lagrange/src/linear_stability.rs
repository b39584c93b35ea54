//! Variational equations at a relative equilibrium in the moving frame and
//! the associated spectral / linear stability tests.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::nbody::{CentralConfigAnalysis, Masses};

pub const SPECTRAL_REL_TOL: f64 = 1e-9;
const DIAG_COND_LIMIT: f64 = 1e8;

/// Reduction level of the variational equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariationalKind {
    /// (z, Z, r, Upsilon, theta, Theta): dimension 2(2N-4) + 4.
    Full,
    /// Angular momentum eliminated, (z, Z, r, Upsilon, theta): 2(2N-4) + 3.
    MomentumReduced,
    /// Orbital distance only, (z, Z, r, Upsilon): 2(2N-4) + 2.
    Orbital,
}

#[derive(Debug, Clone)]
pub struct VariationalMatrix {
    pub kind: VariationalKind,
    pub matrix: DMatrix<f64>,
    pub omega: f64,
    pub rho: f64,
}

#[derive(Debug, Clone)]
pub struct SpectralVerdict {
    pub eigenvalues: Vec<Complex<f64>>,
    pub spectrally_stable: bool,
    pub linearly_stable: bool,
    pub max_real_part: f64,
}

/// Assemble the variational matrix at the relative equilibrium (rho = 1).
pub fn build_variational(
    analysis: &CentralConfigAnalysis,
    omega: f64,
    kind: VariationalKind,
) -> Result<VariationalMatrix> {
    let lambda = analysis.lambda;
    if (omega * omega - lambda).abs() > 1e-9 * lambda.max(1.0) {
        return Err(Error::OmegaLambdaMismatch {
            omega_sq: omega * omega,
            lambda,
        });
    }
    let n = analysis.reduced_dim();
    let extra = match kind {
        VariationalKind::Full => 4,
        VariationalKind::MomentumReduced => 3,
        VariationalKind::Orbital => 2,
    };
    let dim = 2 * n + extra;
    let mut a = DMatrix::zeros(dim, dim);
    // z-block: dz = Z, dZ = Lambda z - 2 omega Q Z  (rho = 1).
    for j in 0..n {
        a[(j, n + j)] = 1.0;
        a[(n + j, j)] = analysis.reduced_eigenvalues()[j];
        for k in 0..n {
            a[(n + j, n + k)] = -2.0 * omega * analysis.q[(j, k)];
        }
    }
    let r0 = 2 * n;
    match kind {
        VariationalKind::Full => {
            // dr = Upsilon; dUpsilon = 3 w^2 r + 2 w Theta;
            // dtheta = Theta; dTheta = -2 w Upsilon.
            a[(r0, r0 + 1)] = 1.0;
            a[(r0 + 1, r0)] = 3.0 * omega * omega;
            a[(r0 + 1, r0 + 3)] = 2.0 * omega;
            a[(r0 + 2, r0 + 3)] = 1.0;
            a[(r0 + 3, r0 + 1)] = -2.0 * omega;
        }
        VariationalKind::MomentumReduced => {
            // dr = Upsilon; dUpsilon = -w^2 r; dtheta = -2 w r.
            a[(r0, r0 + 1)] = 1.0;
            a[(r0 + 1, r0)] = -omega * omega;
            a[(r0 + 2, r0)] = -2.0 * omega;
        }
        VariationalKind::Orbital => {
            a[(r0, r0 + 1)] = 1.0;
            a[(r0 + 1, r0)] = -omega * omega;
        }
    }
    Ok(VariationalMatrix {
        kind,
        matrix: a,
        omega,
        rho: 1.0,
    })
}

/// Eigenvalues of the variational matrix plus the stability verdicts.
pub fn spectral_verdict(vm: &VariationalMatrix) -> Result<SpectralVerdict> {
    verdict_of_matrix(&vm.matrix)
}

pub fn verdict_of_matrix(a: &DMatrix<f64>) -> Result<SpectralVerdict> {
    let norm = a.norm();
    let eigenvalues: Vec<Complex<f64>> = a.complex_eigenvalues().iter().copied().collect();
    let max_real_part = eigenvalues
        .iter()
        .map(|e| e.re.abs())
        .fold(0.0f64, f64::max);
    let spectrally_stable = max_real_part <= SPECTRAL_REL_TOL * norm.max(1e-300);
    let linearly_stable = spectrally_stable && diagonalizable(a, &eigenvalues, norm);
    Ok(SpectralVerdict {
        eigenvalues,
        spectrally_stable,
        linearly_stable,
        max_real_part,
    })
}

/// Assembles an eigenvector matrix from SVD null spaces per eigenvalue
/// cluster; diagonalizable iff it is complete and well conditioned.
fn diagonalizable(a: &DMatrix<f64>, eigenvalues: &[Complex<f64>], norm: f64) -> bool {
    let dim = a.nrows();
    let ac = a.map(|x| Complex::new(x, 0.0));
    let cluster_tol = 1e-7 * norm.max(1.0);
    let mut remaining: Vec<Complex<f64>> = eigenvalues.to_vec();
    let mut vectors: Vec<DVector<Complex<f64>>> = Vec::with_capacity(dim);
    while let Some(&mu) = remaining.first() {
        let cluster: Vec<Complex<f64>> = remaining
            .iter()
            .copied()
            .filter(|e| (e - mu).norm() <= cluster_tol)
            .collect();
        remaining.retain(|e| (e - mu).norm() > cluster_tol);
        let algebraic = cluster.len();
        let center = cluster.iter().sum::<Complex<f64>>() / algebraic as f64;
        let mut shifted = ac.clone();
        for i in 0..dim {
            shifted[(i, i)] -= center;
        }
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let null_tol = (1e-8 * smax.max(1.0)).max(10.0 * cluster_tol);
        let mut geometric = 0;
        for (i, s) in svd.singular_values.iter().enumerate() {
            if *s <= null_tol {
                geometric += 1;
                vectors.push(v_t.row(i).transpose().map(|x| x.conj()));
            }
        }
        if geometric < algebraic {
            return false;
        }
    }
    if vectors.len() != dim {
        return false;
    }
    let mut v = DMatrix::zeros(dim, dim);
    for (j, col) in vectors.iter().enumerate() {
        v.set_column(j, col);
    }
    let svd = v.svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    smin > 0.0 && smax / smin < DIAG_COND_LIMIT
}

/// Coefficients of f(y) = |y I - 2 w sqrt(y) Q - Lambda| viewed as a monic
/// polynomial in y = x^2, lowest degree first.
pub fn characteristic_even_poly(vm: &VariationalMatrix) -> Vec<f64> {
    let n = (vm.matrix.nrows()
        - match vm.kind {
            VariationalKind::Full => 4,
            VariationalKind::MomentumReduced => 3,
            VariationalKind::Orbital => 2,
        })
        / 2;
    let lambda_block = vm.matrix.view((n, 0), (n, n)).into_owned();
    let coriolis = vm.matrix.view((n, n), (n, n)).into_owned(); // -2 w Q
    // p(x) = det(x^2 I - 2 w x Q - Lambda) is even; sample in y = x^2 and
    // solve the Vandermonde system for the n+1 coefficients.
    let scale = (lambda_block.norm() + vm.omega * vm.omega).max(1.0).sqrt();
    let points: Vec<f64> = (1..=n + 1).map(|i| i as f64 * scale).collect();
    let mut vand = DMatrix::zeros(n + 1, n + 1);
    let mut rhs = DVector::zeros(n + 1);
    for (row, &x) in points.iter().enumerate() {
        let y = x * x;
        let mut m = DMatrix::from_diagonal_element(n, n, y);
        m += &coriolis * x; // x * (-2 w Q) with sign matching det(x^2I - 2wxQ - L)
        m -= &lambda_block;
        rhs[row] = m.determinant();
        let mut p = 1.0;
        for col in 0..=n {
            vand[(row, col)] = p;
            p *= y;
        }
    }
    let coeffs = vand.lu().solve(&rhs).expect("Vandermonde solve");
    let mut out: Vec<f64> = coeffs.iter().copied().collect();
    // Normalize leading coefficient to exactly 1.
    let lead = out[n];
    for c in out.iter_mut() {
        *c /= lead;
    }
    out
}

/// Gascheau-Routh condition: beta = m1 m2 + m2 m3 + m3 m1 <= (sum m)^2 / 27.
pub fn routh_criterion(m: &Masses) -> Result<bool> {
    if m.n_bodies() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: m.n_bodies(),
        });
    }
    let v = m.values();
    let beta = v[0] * v[1] + v[1] * v[2] + v[0] * v[2];
    let total = m.total();
    Ok(beta <= total * total / 27.0 + 1e-15)
}
