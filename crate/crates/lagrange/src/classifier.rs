//! Decision procedures over the mass space: region membership, resonance
//! enumeration, (iso)energetic degeneracy, convexity classes of the truncated
//! normal form, and the steepness radius.

use nalgebra::{Matrix3, Matrix4};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{FrequencySet, MassParameters};
use crate::nbody::Masses;

/// Splits 1 - m1 into m2 >= m3 > 0 so the triple has the requested beta.
pub fn split_masses(beta: f64, m1: f64) -> Result<Masses> {
    let rest = 1.0 - m1;
    let disc = rest * rest - 4.0 * (beta - m1 * rest);
    if !(0.0 < m1 && m1 < 1.0) || disc < 0.0 || beta <= m1 * rest {
        return Err(Error::OutOfRegion {
            region: "mass space (no positive split of 1 - m1 at this beta)",
        });
    }
    let m2 = (rest + disc.sqrt()) / 2.0;
    Masses::normalized(vec![m1, m2, rest - m2])
}

/// Midpoint of the m1 window admitting a positive mass split at `beta`; the
/// canonical representative of a beta value in the dominant-mass regime.
pub fn mid_m1(beta: f64) -> f64 {
    let s_lo = (2.0 - (4.0 - 12.0 * beta).sqrt()) / 3.0;
    let s_hi = (1.0 - (1.0 - 4.0 * beta).sqrt()) / 2.0;
    1.0 - (s_lo + s_hi) / 2.0
}

/// The five resonant values of beta excluded from the perpetually-stable
/// region: the order-3 and order-4 resonances of the elliptic frequencies.
pub const RESONANT_BETAS: [(f64, [i64; 3]); 5] = [
    (1.0 / 75.0, [0, 3, 1]),
    (32.0 / 2187.0, [1, 3, 0]),
    (16.0 / 675.0, [0, 2, 1]),
    (1.0 / 36.0, [1, 2, 0]),
    (64.0 / 1875.0, [1, -1, -2]),
];

const BETA_SS: f64 = 1.0 / 27.0;
/// Lower endpoint of the heavy-mass interval of the spectrally stable
/// region: (sqrt(69) + 9) / 18.
pub fn m1_spectral_bound() -> f64 {
    (69f64.sqrt() + 9.0) / 18.0
}

/// Membership flags for the nested mass-space regions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegionMembership {
    /// Positive normalized masses with a real mass split: the full space.
    pub in_omega: bool,
    /// Spectral stability: beta <= 1/27 and a dominant first mass.
    pub in_omega_ss: bool,
    /// Spectral stability minus the five low-order resonant beta values.
    pub in_omega_ps: bool,
    /// Quasi-convex truncated normal form.
    pub in_omega_qc: bool,
    /// Directionally quasi-convex truncated normal form.
    pub in_omega_dqc: bool,
}

/// An integer frequency combination k with small signed residual
/// k0 w0 - k1 w1 + k2 w2.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResonanceHit {
    pub k: [i64; 3],
    pub order: u32,
    pub residual: f64,
}

impl ResonanceHit {
    fn new(k: [i64; 3], fs: &FrequencySet) -> Self {
        ResonanceHit {
            k,
            order: (k[0].unsigned_abs() + k[1].unsigned_abs() + k[2].unsigned_abs()) as u32,
            residual: fs.combination(k).abs(),
        }
    }
}

/// The quadratic form of the normal form restricted to the zero-energy
/// plane of the linear frequencies.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvexityData {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

impl ConvexityData {
    pub fn new(w: &[[f64; 3]; 3], fs: &FrequencySet) -> Self {
        let (mu1, mu2) = (fs.mu1, fs.mu2);
        ConvexityData {
            a0: w[0][0] * mu1 * mu1 + 2.0 * w[0][1] * mu1 + w[1][1],
            a1: -w[0][0] * mu1 * mu2 + w[0][2] * mu1 - w[0][1] * mu2 + w[1][2],
            a2: w[0][0] * mu2 * mu2 - 2.0 * w[0][2] * mu2 + w[2][2],
        }
    }

    /// The restricted form along the ray q1 = x q2.
    pub fn h(&self, x: f64) -> f64 {
        self.a0 + 2.0 * self.a1 * x + self.a2 * x * x
    }
}

/// Convexity class of the truncated normal form at zero action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityClass {
    Convex,
    QuasiConvex,
    DirectionallyQuasiConvex,
    None,
}

/// Degeneracy data computed twice: determinants of the twist matrix, and the
/// printed resultant polynomials with their prefactors.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DegeneracyTests {
    /// det of the 3x3 twist matrix.
    pub det3: f64,
    /// det of the twist matrix bordered by the signed frequency vector.
    pub det4: f64,
    pub f_deg: f64,
    pub f_isodeg: f64,
    /// det3 predicted from f_deg through the closed-form prefactor.
    pub det3_from_f: f64,
    /// det4 predicted from f_isodeg through the closed-form prefactor.
    pub det4_from_f: f64,
}

fn near_resonant_beta(beta: f64) -> Option<[i64; 3]> {
    RESONANT_BETAS
        .iter()
        .find(|(b, _)| (beta - b).abs() <= 1e-12 * b)
        .map(|(_, k)| *k)
}

/// Evaluates the five nested region tests at one mass triple.
pub fn region_membership(mp: &MassParameters) -> RegionMembership {
    let (beta, m1) = (mp.beta, mp.m1);
    let in_omega = beta - m1 * (1.0 - m1) > 0.0 && 4.0 * beta <= 1.0 + 2.0 * m1 - 3.0 * m1 * m1;
    let in_omega_ss = in_omega && beta > 0.0 && beta <= BETA_SS && m1 > m1_spectral_bound() && m1 < 1.0;
    let in_omega_ps = in_omega_ss && beta < BETA_SS && near_resonant_beta(beta).is_none();

    let (in_omega_qc, in_omega_dqc) = if in_omega_ps {
        let qc_band = (beta > 0.0 && beta < 1.0 / 75.0)
            || (beta > 1.0 / 36.0 && beta < 64.0 / 1875.0);
        (
            qc_band && f_isodeg(beta, m1) > 0.0,
            f_dqc(mp).map(|v| v > 0.0).unwrap_or(false),
        )
    } else {
        (false, false)
    };

    RegionMembership {
        in_omega,
        in_omega_ss,
        in_omega_ps,
        in_omega_qc,
        in_omega_dqc,
    }
}

/// Double-double value: an unevaluated sum hi + lo carrying roughly twice
/// the f64 precision. The degeneracy polynomials below cancel by up to ten
/// decimal digits near their zero loci, which plain f64 cannot absorb.
#[derive(Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Dd {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    fn add(self, other: Dd) -> Self {
        let s = Self::two_sum(self.hi, other.hi);
        let lo = s.lo + self.lo + other.lo;
        let hi = s.hi + lo;
        Dd {
            hi,
            lo: lo - (hi - s.hi),
        }
    }

    fn mul(self, other: Dd) -> Self {
        let p = Self::two_prod(self.hi, other.hi);
        let lo = p.lo + self.hi * other.lo + self.lo * other.hi;
        let hi = p.hi + lo;
        Dd {
            hi,
            lo: lo - (hi - p.hi),
        }
    }

    fn mul_f64(self, c: f64) -> Self {
        self.mul(Dd::from(c))
    }
}

/// Evaluates sum coeffs[i] * x^i in double-double arithmetic; the
/// coefficients must be exactly representable.
fn dd_poly(coeffs: &[f64], x: Dd) -> Dd {
    let mut acc = Dd::from(*coeffs.last().expect("nonempty"));
    for c in coeffs.iter().rev().skip(1) {
        acc = acc.mul(x).add(Dd::from(*c));
    }
    acc
}

/// Resultant polynomial whose zero locus is the degenerate set of the twist
/// matrix.
pub fn f_deg(beta: f64, m1: f64) -> f64 {
    let b = Dd::from(beta);
    let b2 = b.mul(b);
    let b3 = b2.mul(b);
    let b4 = b2.mul(b2);
    let one_36b = dd_poly(&[1.0, -36.0], b);
    let two_thirds = {
        let hi = 2.0 / 3.0;
        Dd {
            hi,
            lo: (2.0 - 3.0 * hi) / 3.0,
        }
    };
    let c0 = one_36b
        .mul(one_36b)
        .mul(two_thirds)
        .mul(dd_poly(&[-47632.0, -9896841.0, 178185258.0, 52542675.0], b))
        .mul(b4);
    let c1 = dd_poly(
        &[
            -59392.0,
            6417616.0,
            -243771759.0,
            4055047758.0,
            -40790893923.0,
            397050199920.0,
        ],
        b,
    )
    .mul_f64(-11.0)
    .mul(b3);
    let c2 = dd_poly(
        &[
            -1857536.0,
            250520816.0,
            -13039336341.0,
            327340481715.0,
            -3995019640449.0,
            19309935720393.0,
            5465578392450.0,
        ],
        b,
    )
    .mul(b2);
    let c3 = dd_poly(
        &[
            2408448.0,
            -359200768.0,
            20645100208.0,
            -562788423405.0,
            7048034089254.0,
            -29436067209393.0,
            -15298708984020.0,
        ],
        b,
    )
    .mul(b);
    let split = dd_poly(&[m1 * m1 - 2.0 * m1 + 1.0, 2.0], b);
    let c4 = dd_poly(
        &[
            -401408.0,
            59975680.0,
            -3452615664.0,
            94244985459.0,
            -1182106602432.0,
            4980794507091.0,
            1821859464150.0,
        ],
        b,
    )
    .mul_f64(3.0)
    .mul(split);
    let m = Dd::from(m1);
    c0.add(m.mul(c1.add(m.mul(c2.add(m.mul(c3.add(m.mul(c4))))))))
        .hi
}

/// Resultant polynomial for isoenergetic degeneracy: the bordered
/// determinant vanishes exactly on its zero locus.
pub fn f_isodeg(beta: f64, m1: f64) -> f64 {
    let b = Dd::from(beta);
    let b2 = b.mul(b);
    let b3 = b2.mul(b);
    let b4 = b2.mul(b2);
    let one_36b = dd_poly(&[1.0, -36.0], b);
    let c0 = one_36b
        .mul(one_36b)
        .mul(dd_poly(&[-47632.0, -9896841.0, 178185258.0, 52542675.0], b))
        .mul(b4);
    let c1 = dd_poly(
        &[
            -163328.0,
            17908688.0,
            -701681085.0,
            12399204438.0,
            -129174146793.0,
            1114633724580.0,
        ],
        b,
    )
    .mul_f64(-6.0)
    .mul(b3);
    let c2 = dd_poly(
        &[
            -928768.0,
            125103520.0,
            -6502400730.0,
            162904807989.0,
            -1979796586608.0,
            9467506918989.0,
            2856548519100.0,
        ],
        b,
    )
    .mul_f64(3.0)
    .mul(b2);
    let c3 = dd_poly(
        &[
            -150528.0,
            22280704.0,
            -1270282468.0,
            34351179507.0,
            -427262272146.0,
            1777266330759.0,
            992795560920.0,
        ],
        b,
    )
    .mul_f64(-24.0)
    .mul(b);
    let split = dd_poly(&[m1 * m1 - 2.0 * m1 + 1.0, 2.0], b);
    let c4 = dd_poly(
        &[
            -200704.0,
            29762048.0,
            -1699679520.0,
            46035466371.0,
            -573816097674.0,
            2412746489943.0,
            952182839700.0,
        ],
        b,
    )
    .mul_f64(9.0)
    .mul(split);
    let m = Dd::from(m1);
    c0.add(m.mul(c1.add(m.mul(c2.add(m.mul(c3.add(m.mul(c4))))))))
        .hi
}

/// Sign-equivalent of the directional quasi-convexity test a0 h(mu1/mu2) > 0.
pub fn f_dqc(mp: &MassParameters) -> Result<f64> {
    let g = mp.gamma()?;
    let b = mp.beta;
    let mmm = mp.m1 * mp.m2 * mp.m3;
    let g2 = g * g;
    let g3 = g2 * g;
    let g4 = g2 * g2;
    let first = (236.0 - 62.0 * g4 - 479.0 * g3 + 1299.0 * g2 - 994.0 * g) * (g + 1.0).powi(2)
        / mmm
        + 729.0 * (76.0 - 401.0 * g3 + 81.0 * g2 - 18.0 * g);
    let second = 3.0 * b * (16.0 - 469476.0 * b * b * b + 71469.0 * b * b - 2199.0 * b) / mmm
        + (1509030.0 * b * b * b + 2316519.0 * b * b - 133983.0 * b + 1936.0);
    Ok(first * second)
}

/// Runs the dual-route degeneracy computation: determinants of the twist
/// matrix on one side, the printed polynomials with their prefactors on the
/// other. The two routes must agree wherever the formulas are finite.
pub fn degeneracy_tests(
    w: &[[f64; 3]; 3],
    fs: &FrequencySet,
    mp: &MassParameters,
) -> Result<DegeneracyTests> {
    let g = mp.gamma()?;
    let m3x3 = Matrix3::from_fn(|r, c| w[r][c]);
    let det3 = m3x3.determinant();
    // Border with the frequency direction (1, -mu1, mu2): this is the
    // normalization for which -det4 equals a0 a2 - a1^2 of the restricted
    // quadratic form.
    let s = fs.signed();
    let mut m4 = Matrix4::zeros();
    for r in 0..3 {
        for c in 0..3 {
            m4[(r, c)] = w[r][c];
        }
        m4[(r, 3)] = s[r] / fs.omega0;
        m4[(3, r)] = s[r] / fs.omega0;
    }
    let det4 = m4.determinant();

    let (beta, m1) = (mp.beta, mp.m1);
    let fd = f_deg(beta, m1);
    let fi = f_isodeg(beta, m1);
    let msq = (mp.m1 * mp.m2 * mp.m3).powi(2);
    let shared = (16.0 - 675.0 * beta).powi(2) * (1.0 - 36.0 * beta).powi(2) * msq;
    let det3_from_f = -27.0 * beta * fd / (128.0 * shared * g.powi(4));
    let det4_from_f = -27.0 * beta * fi / (576.0 * shared * (1.0 - 27.0 * beta).powi(2));

    Ok(DegeneracyTests {
        det3,
        det4,
        f_deg: fd,
        f_isodeg: fi,
        det3_from_f,
        det4_from_f,
    })
}

/// Classifies the truncated normal form at zero action by the convexity
/// case analysis on the restricted quadratic form.
pub fn convexity_class(w: &[[f64; 3]; 3], fs: &FrequencySet) -> Result<ConvexityClass> {
    let det2 = w[0][0] * w[1][1] - w[0][1] * w[0][1];
    let det3 = Matrix3::from_fn(|r, c| w[r][c]).determinant();
    if det2 > 0.0 && det3 < 0.0 {
        return Ok(ConvexityClass::Convex);
    }

    let data = ConvexityData::new(w, fs);
    let (a0, a1, a2) = (data.a0, data.a1, data.a2);
    if a0 * a2 - a1 * a1 > 0.0 {
        return Ok(ConvexityClass::QuasiConvex);
    }

    if a0 == 0.0 {
        return Err(Error::ConvexityInapplicable);
    }
    let slope = fs.mu1 / fs.mu2;
    let dqc = if a2 == 0.0 {
        a0 * (a0 + 2.0 * a1 * slope) > 0.0
    } else {
        let vertex = -a1 / a2;
        if (0.0..=slope).contains(&vertex) {
            a0 * data.h(slope) > 0.0 && a0 * data.h(vertex) > 0.0
        } else {
            a0 * data.h(slope) > 0.0
        }
    };
    if dqc {
        Ok(ConvexityClass::DirectionallyQuasiConvex)
    } else {
        Ok(ConvexityClass::None)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Reduces k to its primitive representative with a canonical sign: divided
/// by the gcd, first nonzero entry positive.
fn primitive(k: [i64; 3]) -> [i64; 3] {
    let g = gcd(gcd(k[0], k[1]), k[2]);
    let mut p = [k[0] / g, k[1] / g, k[2] / g];
    if let Some(first) = p.iter().find(|v| **v != 0) {
        if *first < 0 {
            p = [-p[0], -p[1], -p[2]];
        }
    }
    p
}

/// All primitive integer combinations of order up to `max_order` whose
/// signed frequency residual is at most tol * w0.
pub fn resonances_up_to(fs: &FrequencySet, max_order: u32, tol: f64) -> Vec<ResonanceHit> {
    let n = max_order as i64;
    let mut hits: Vec<ResonanceHit> = Vec::new();
    for k0 in -n..=n {
        for k1 in -(n - k0.abs())..=(n - k0.abs()) {
            let rest = n - k0.abs() - k1.abs();
            for k2 in -rest..=rest {
                let k = [k0, k1, k2];
                if k == [0, 0, 0] || primitive(k) != k {
                    continue;
                }
                let residual = fs.combination(k).abs();
                if residual <= tol * fs.omega0 {
                    hits.push(ResonanceHit::new(k, fs));
                }
            }
        }
    }
    hits.sort_by(|a, b| {
        a.order
            .cmp(&b.order)
            .then(a.residual.partial_cmp(&b.residual).unwrap())
    });
    hits
}

fn mu_pair(beta: f64) -> (f64, f64) {
    let g = (1.0 - 27.0 * beta).sqrt();
    (((1.0 - g) / 2.0).sqrt(), ((1.0 + g) / 2.0).sqrt())
}

/// Signed residual of k at a given beta, in units of w0.
fn relation_value(k: [i64; 3], beta: f64) -> f64 {
    let (mu1, mu2) = mu_pair(beta);
    k[0] as f64 - k[1] as f64 * mu1 + k[2] as f64 * mu2
}

/// Among all relations of order at most `max_order`, the resonant beta in
/// (0, 1/27) closest to `beta`, found by bracketing sign changes of each
/// relation along the beta axis.
pub fn nearest_resonant_beta(beta: f64, max_order: u32) -> Result<(f64, ResonanceHit)> {
    const LO: f64 = 1e-8;
    const HI: f64 = 1.0 / 27.0 - 1e-8;
    const SAMPLES: usize = 128;

    let n = max_order as i64;
    let mut best: Option<(f64, [i64; 3])> = None;
    let mut consider = |root: f64, k: [i64; 3]| {
        if best.is_none() || (root - beta).abs() < (best.unwrap().0 - beta).abs() {
            best = Some((root, k));
        }
    };

    for k0 in -n..=n {
        for k1 in -(n - k0.abs())..=(n - k0.abs()) {
            let rest = n - k0.abs() - k1.abs();
            for k2 in -rest..=rest {
                let k = [k0, k1, k2];
                if k == [0, 0, 0] || primitive(k) != k {
                    continue;
                }
                let mut prev_b = LO;
                let mut prev_v = relation_value(k, prev_b);
                for i in 1..=SAMPLES {
                    let b = LO + (HI - LO) * i as f64 / SAMPLES as f64;
                    let v = relation_value(k, b);
                    if prev_v == 0.0 {
                        consider(prev_b, k);
                    } else if prev_v * v < 0.0 {
                        let (mut lo, mut hi) = (prev_b, b);
                        let (mut flo, _) = (prev_v, v);
                        for _ in 0..200 {
                            let mid = 0.5 * (lo + hi);
                            let fm = relation_value(k, mid);
                            if fm == 0.0 {
                                lo = mid;
                                hi = mid;
                                break;
                            }
                            if flo * fm < 0.0 {
                                hi = mid;
                            } else {
                                lo = mid;
                                flo = fm;
                            }
                        }
                        consider(0.5 * (lo + hi), k);
                    }
                    prev_b = b;
                    prev_v = v;
                }
            }
        }
    }

    let (root, k) = best.ok_or(Error::NoResonantBeta {
        max_order: max_order as usize,
    })?;
    let (mu1, mu2) = mu_pair(root);
    let w0 = root.powf(0.75);
    let order = (k[0].unsigned_abs() + k[1].unsigned_abs() + k[2].unsigned_abs()) as u32;
    let residual =
        (k[0] as f64 * w0 - k[1] as f64 * mu1 * w0 + k[2] as f64 * mu2 * w0).abs();
    Ok((root, ResonanceHit { k, order, residual }))
}

/// Outcome of a finite-order Diophantine check |<k, frequencies>| >= c/|k|^upsilon.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiophantineVerdict {
    /// The combination minimizing |<k, frequencies>| * |k|^upsilon.
    pub worst: ResonanceHit,
    /// min over k of |<k, frequencies>| * |k|^upsilon; the condition holds
    /// for every c below this margin.
    pub margin: f64,
    pub holds: bool,
}

/// Scans all combinations up to `max_order` for the finite-order
/// Diophantine condition with constants (c, upsilon).
pub fn diophantine_scan(
    fs: &FrequencySet,
    c: f64,
    upsilon: f64,
    max_order: u32,
) -> DiophantineVerdict {
    let n = max_order as i64;
    let mut worst: Option<ResonanceHit> = None;
    let mut margin = f64::INFINITY;
    for k0 in -n..=n {
        for k1 in -(n - k0.abs())..=(n - k0.abs()) {
            let rest = n - k0.abs() - k1.abs();
            for k2 in -rest..=rest {
                let k = [k0, k1, k2];
                if k == [0, 0, 0] || primitive(k) != k {
                    continue;
                }
                let hit = ResonanceHit::new(k, fs);
                let weighted = hit.residual * (hit.order as f64).powf(upsilon);
                if weighted < margin {
                    margin = weighted;
                    worst = Some(hit);
                }
            }
        }
    }
    DiophantineVerdict {
        worst: worst.expect("max_order >= 1 yields at least one combination"),
        margin,
        holds: margin >= c,
    }
}

/// Radius of the ball around zero action on which the truncated normal form
/// is steep, per the critical-point bound on the twist matrix.
pub fn steepness_radius(mp: &MassParameters) -> Result<f64> {
    let membership = region_membership(mp);
    if !membership.in_omega_ps {
        return Err(Error::OutOfRegion {
            region: "perpetual-stability region",
        });
    }
    let b = mp.beta;
    let msq = (mp.m1 * mp.m2 * mp.m3).powi(2);
    let denom = 5.0
        + 9.0 / ((1.0 - 36.0 * b).powi(2) * (1.0 - 27.0 * b))
        + 1e6
            / ((27.0 * b - 1.0).powi(2)
                * (36.0 * b - 1.0).powi(2)
                * (675.0 * b - 16.0).powi(2)
                * msq);
    Ok(b.powf(0.75) / denom.sqrt())
}

/// Finds a zero of `f` between `a` and `b` by bisection; the endpoints must
/// bracket a sign change.
pub fn bisect_zero(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Option<f64> {
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo);
    if flo == 0.0 {
        return Some(lo);
    }
    if flo * f(hi) > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    Some(0.5 * (lo + hi))
}
