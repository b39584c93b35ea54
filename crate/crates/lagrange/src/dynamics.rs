//! Direct integration of the reduced equations of motion in the moving-frame
//! chart, with the exact energy as the quality gate.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::hamiltonian::exact_hamiltonian;
use crate::nbody::{
    chart_z3, reduced_potential, reduced_potential_gradient, CentralConfigAnalysis, Masses,
};

/// Abort threshold on |z|^2: far beyond any stability probe but well inside
/// the chart.
pub const CHART_EXIT_LIMIT: f64 = 0.25;
/// Abort threshold on the radial offset: r below -1 + margin means the
/// triangle has nearly collapsed to the origin.
pub const RADIAL_MARGIN: f64 = 0.9;

/// Point of the reduced phase space: shape coordinates and velocities, the
/// radial pair, and the passive phase. The angular momentum is fixed at
/// omega by the reduction and is not part of the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub z5: f64,
    pub z6: f64,
    pub zdot5: f64,
    pub zdot6: f64,
    pub r: f64,
    pub upsilon: f64,
    pub theta: f64,
}

impl ReducedState {
    pub fn equilibrium() -> Self {
        ReducedState {
            z5: 0.0,
            z6: 0.0,
            zdot5: 0.0,
            zdot6: 0.0,
            r: 0.0,
            upsilon: 0.0,
            theta: 0.0,
        }
    }

    fn to_vec(self) -> [f64; 7] {
        [
            self.z5,
            self.z6,
            self.zdot5,
            self.zdot6,
            self.r,
            self.upsilon,
            self.theta,
        ]
    }

    fn from_vec(v: &[f64; 7]) -> Self {
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

    /// Distance to the relative equilibrium orbit: the phase is excluded.
    pub fn displacement(&self) -> f64 {
        (self.z5 * self.z5
            + self.z6 * self.z6
            + self.zdot5 * self.zdot5
            + self.zdot6 * self.zdot6
            + self.r * self.r
            + self.upsilon * self.upsilon)
            .sqrt()
    }
}

/// The reduced system at one mass triple: the central-configuration data and
/// the angular rate fix all coefficients.
pub struct ReducedSystem<'a> {
    pub analysis: &'a CentralConfigAnalysis,
    pub masses: &'a Masses,
    pub omega: f64,
}

impl<'a> ReducedSystem<'a> {
    pub fn new(analysis: &'a CentralConfigAnalysis, masses: &'a Masses) -> Self {
        let omega = analysis.omega();
        ReducedSystem {
            analysis,
            masses,
            omega,
        }
    }

    /// Time derivative of the reduced state. The shape accelerations appear
    /// on both sides of the equations of motion; their coefficients form
    /// the 2x2 system M zddot = g solved here, with
    /// M = I + z z^T / z3^2 - (Qz)(Qz)^T.
    pub fn rhs(&self, s: &ReducedState) -> Result<ReducedState> {
        let w = self.omega;
        let z = [s.z5, s.z6];
        let zd = [s.zdot5, s.zdot6];
        let norm_sq = z[0] * z[0] + z[1] * z[1];
        if norm_sq >= CHART_EXIT_LIMIT {
            return Err(Error::ChartExit { z_norm_sq: norm_sq });
        }
        let rr = s.r + 1.0;
        if rr <= 1.0 - RADIAL_MARGIN {
            return Err(Error::RadialCollapse { r: s.r });
        }

        let z3_sq = 1.0 - norm_sq;
        let z3 = z3_sq.sqrt();
        let dot_zz = z[0] * zd[0] + z[1] * zd[1];
        let z3dot = -dot_zz / z3;
        let zd_sq = zd[0] * zd[0] + zd[1] * zd[1];
        // Qz = (-z6, z5) and QZ = (-zdot6, zdot5); their pairing
        // qzz = <Qz, zdot> is the shape angular rate.
        let qz = [-z[1], z[0]];
        let qzd = [-zd[1], zd[0]];
        let qzz = qz[0] * zd[0] + qz[1] * zd[1];
        // Residual angle rate seen by the shape equations.
        let d = w / (rr * rr) - qzz;

        let u = reduced_potential(self.analysis, self.masses, &z)?;
        let grad = reduced_potential_gradient(self.analysis, self.masses, &z)?;

        let mut g = Vector2::zeros();
        for k in 0..2 {
            g[k] = -(z[k] * zd_sq / z3_sq + 3.0 * z[k] * dot_zz * dot_zz / (z3_sq * z3_sq)
                - (2.0 * w * s.upsilon / (rr * rr * rr)) * qz[k]
                + 2.0 * d * qzd[k])
                + grad[k] / (rr * rr * rr)
                - (2.0 * s.upsilon / rr) * (z[k] * dot_zz / z3_sq + zd[k] + d * qz[k]);
        }
        let m = Matrix2::new(
            1.0 + z[0] * z[0] / z3_sq - qz[0] * qz[0],
            z[0] * z[1] / z3_sq - qz[0] * qz[1],
            z[0] * z[1] / z3_sq - qz[0] * qz[1],
            1.0 + z[1] * z[1] / z3_sq - qz[1] * qz[1],
        );
        let zdd = m.lu().solve(&g).ok_or(Error::EigenFailure)?;

        let upsilon_dot = rr * (z3dot * z3dot + zd_sq + w * w / rr.powi(4) - qzz * qzz)
            - u / (rr * rr);
        let theta_dot = w / (rr * rr) - qzz - w;

        Ok(ReducedState {
            z5: zd[0],
            z6: zd[1],
            zdot5: zdd[0],
            zdot6: zdd[1],
            r: s.upsilon,
            upsilon: upsilon_dot,
            theta: theta_dot,
        })
    }

    /// Exact energy and angular momentum of the state, through the Legendre
    /// transform of the moving-frame kinetic metric. The momentum returns
    /// omega identically: it is the eliminated constraint.
    pub fn conserved_quantities(&self, s: &ReducedState) -> Result<(f64, f64)> {
        let w = self.omega;
        let z = [s.z5, s.z6];
        let zd = [s.zdot5, s.zdot6];
        let rr = s.r + 1.0;
        let z3 = chart_z3(&z)?;
        let z3_sq = z3 * z3;
        let qzz = -z[1] * zd[0] + z[0] * zd[1];
        // Inertial angle rate recovered from the fixed momentum.
        let angle_rate = w / (rr * rr) - qzz;

        // Momenta p = rho^2 G (zdot, angle_rate) for the kinetic metric
        // G = [I + z z^T / z3^2, Qz; (Qz)^T, 1].
        let g11 = 1.0 + z[0] * z[0] / z3_sq;
        let g12 = z[0] * z[1] / z3_sq;
        let g22 = 1.0 + z[1] * z[1] / z3_sq;
        let p1 = rr * rr * (g11 * zd[0] + g12 * zd[1] - z[1] * angle_rate);
        let p2 = rr * rr * (g12 * zd[0] + g22 * zd[1] + z[0] * angle_rate);
        let momentum = rr * rr * (-z[1] * zd[0] + z[0] * zd[1] + angle_rate);

        let energy = exact_hamiltonian(
            self.analysis,
            self.masses,
            [s.upsilon, p1, p2],
            [s.r, z[0], z[1]],
        )?;
        Ok((energy, momentum))
    }
}

/// Integrated orbit with the conservation extremes observed along it.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ReducedState>,
    /// Largest |H(t) - H(0)| over the run.
    pub energy_drift: f64,
    /// Largest |J(t) - omega| over the run.
    pub momentum_drift: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &ReducedState {
        self.states.last().expect("nonempty trajectory")
    }

    pub fn max_displacement(&self) -> f64 {
        self.states
            .iter()
            .map(ReducedState::displacement)
            .fold(0.0, f64::max)
    }

    /// CSV rows t, z5, z6, Z5, Z6, r, Upsilon, energy, momentum.
    pub fn to_csv(&self, sys: &ReducedSystem) -> Result<String> {
        let mut out = String::from("t,z5,z6,Z5,Z6,r,Upsilon,energy,momentum\n");
        for (t, s) in self.times.iter().zip(&self.states) {
            let (e, j) = sys.conserved_quantities(s)?;
            out.push_str(&format!(
                "{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{e:.16e},{j:.16e}\n",
                s.z5, s.z6, s.zdot5, s.zdot6, s.r, s.upsilon
            ));
        }
        Ok(out)
    }
}

// Coefficients of the embedded 13-stage Runge-Kutta 7(8) pair. The system
// is autonomous, so the stage nodes are not needed.
const STAGES: usize = 13;

fn a_matrix() -> [[f64; STAGES]; STAGES] {
    let mut a = [[0.0; STAGES]; STAGES];
    a[1][0] = 2.0 / 27.0;
    a[2][0] = 1.0 / 36.0;
    a[2][1] = 1.0 / 12.0;
    a[3][0] = 1.0 / 24.0;
    a[3][2] = 1.0 / 8.0;
    a[4][0] = 5.0 / 12.0;
    a[4][2] = -25.0 / 16.0;
    a[4][3] = 25.0 / 16.0;
    a[5][0] = 1.0 / 20.0;
    a[5][3] = 1.0 / 4.0;
    a[5][4] = 1.0 / 5.0;
    a[6][0] = -25.0 / 108.0;
    a[6][3] = 125.0 / 108.0;
    a[6][4] = -65.0 / 27.0;
    a[6][5] = 125.0 / 54.0;
    a[7][0] = 31.0 / 300.0;
    a[7][4] = 61.0 / 225.0;
    a[7][5] = -2.0 / 9.0;
    a[7][6] = 13.0 / 900.0;
    a[8][0] = 2.0;
    a[8][3] = -53.0 / 6.0;
    a[8][4] = 704.0 / 45.0;
    a[8][5] = -107.0 / 9.0;
    a[8][6] = 67.0 / 90.0;
    a[8][7] = 3.0;
    a[9][0] = -91.0 / 108.0;
    a[9][3] = 23.0 / 108.0;
    a[9][4] = -976.0 / 135.0;
    a[9][5] = 311.0 / 54.0;
    a[9][6] = -19.0 / 60.0;
    a[9][7] = 17.0 / 6.0;
    a[9][8] = -1.0 / 12.0;
    a[10][0] = 2383.0 / 4100.0;
    a[10][3] = -341.0 / 164.0;
    a[10][4] = 4496.0 / 1025.0;
    a[10][5] = -301.0 / 82.0;
    a[10][6] = 2133.0 / 4100.0;
    a[10][7] = 45.0 / 82.0;
    a[10][8] = 45.0 / 164.0;
    a[10][9] = 18.0 / 41.0;
    a[11][0] = 3.0 / 205.0;
    a[11][5] = -6.0 / 41.0;
    a[11][6] = -3.0 / 205.0;
    a[11][7] = -3.0 / 41.0;
    a[11][8] = 3.0 / 41.0;
    a[11][9] = 6.0 / 41.0;
    a[12][0] = -1777.0 / 4100.0;
    a[12][3] = -341.0 / 164.0;
    a[12][4] = 4496.0 / 1025.0;
    a[12][5] = -289.0 / 82.0;
    a[12][6] = 2193.0 / 4100.0;
    a[12][7] = 51.0 / 82.0;
    a[12][8] = 33.0 / 164.0;
    a[12][9] = 12.0 / 41.0;
    a[12][11] = 1.0;
    a
}

const B8: [f64; STAGES] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    0.0,
    41.0 / 840.0,
    41.0 / 840.0,
];

/// Integrates the reduced system from `s0` for a (possibly negative) span
/// `t_span`, holding the local error per unit time at `tol`.
pub fn integrate(
    sys: &ReducedSystem,
    s0: &ReducedState,
    t_span: f64,
    tol: f64,
) -> Result<Trajectory> {
    let a = a_matrix();
    let dir = t_span.signum();
    let t_end = t_span;
    let mut t = 0.0f64;
    let mut y = s0.to_vec();
    let mut h = dir * 0.05;

    let mut times = vec![0.0];
    let mut states = vec![*s0];
    let (e0, j0) = sys.conserved_quantities(s0)?;
    let mut energy_drift = 0.0f64;
    let mut momentum_drift = 0.0f64;

    let mut k = [[0.0f64; 7]; STAGES];
    while (t_end - t) * dir > 0.0 {
        if h.abs() < 1e-14 * t_end.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }

        let mut failed = None;
        for i in 0..STAGES {
            let mut yi = y;
            for (j, yj) in yi.iter_mut().enumerate() {
                let mut acc = 0.0;
                for l in 0..i {
                    acc += a[i][l] * k[l][j];
                }
                *yj += h * acc;
            }
            match sys.rhs(&ReducedState::from_vec(&yi)) {
                Ok(d) => k[i] = d.to_vec(),
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = failed {
            // A stage left the admissible set: retry smaller, or give up at
            // underflow scale.
            h *= 0.5;
            if h.abs() < 1e-14 {
                return Err(e);
            }
            continue;
        }

        let mut y8 = y;
        for (j, yj) in y8.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..STAGES {
                acc += B8[i] * k[i][j];
            }
            *yj += h * acc;
        }
        // Fehlberg error estimate: the order-7 and order-8 weights differ
        // only in stages 0, 10, 11, 12.
        let mut err = 0.0f64;
        for j in 0..7 {
            let e = h * 41.0 / 840.0 * (k[0][j] + k[10][j] - k[11][j] - k[12][j]);
            err = err.max(e.abs());
        }

        let budget = tol * h.abs();
        if err <= budget {
            t += h;
            y = y8;
            let s = ReducedState::from_vec(&y);
            let (e, j) = sys.conserved_quantities(&s)?;
            energy_drift = energy_drift.max((e - e0).abs());
            momentum_drift = momentum_drift.max((j - j0).abs());
            times.push(t);
            states.push(s);
        }
        let ratio = if err == 0.0 {
            5.0
        } else {
            (0.9 * (budget / err).powf(1.0 / 8.0)).clamp(0.2, 5.0)
        };
        h *= ratio;
    }

    Ok(Trajectory {
        times,
        states,
        energy_drift,
        momentum_drift,
    })
}
