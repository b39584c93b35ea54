//! Sparse polynomials in six phase-space variables with complex
//! coefficients, used for the Hamiltonian expansions and the Birkhoff
//! normalization.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use serde::Serialize;

pub const NVARS: usize = 6;
pub const PRUNE_TOL: f64 = 1e-15;

/// Which set of canonical variables the six slots refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Chart {
    /// (p0, p1, p2, q0, q1, q2): momenta first.
    PQ,
    /// (x0, x1, x2, y0, y1, y2): real diagonalizing variables.
    XY,
    /// (zeta0, zeta1, zeta2, eta0, eta1, eta2): complex diagonal variables.
    ZetaEta,
    /// (u0, u1, u2, v0, v1, v2): normal-form variables.
    UV,
}

pub type Exponents = [u8; NVARS];

/// Sparse polynomial keyed by exponent vectors. The key order of the
/// underlying map makes iteration (and hence serialization and arithmetic)
/// deterministic.
#[derive(Clone, PartialEq)]
pub struct Polynomial {
    pub chart: Chart,
    terms: BTreeMap<Exponents, Complex<f64>>,
}

impl Polynomial {
    pub fn zero(chart: Chart) -> Self {
        Polynomial {
            chart,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(chart: Chart, c: Complex<f64>) -> Self {
        let mut p = Self::zero(chart);
        p.add_term([0; NVARS], c);
        p
    }

    pub fn variable(chart: Chart, idx: usize) -> Self {
        assert!(idx < NVARS);
        let mut e = [0u8; NVARS];
        e[idx] = 1;
        let mut p = Self::zero(chart);
        p.add_term(e, Complex::new(1.0, 0.0));
        p
    }

    pub fn add_term(&mut self, e: Exponents, c: Complex<f64>) {
        if c.norm() == 0.0 {
            return;
        }
        let entry = self.terms.entry(e).or_insert(Complex::new(0.0, 0.0));
        *entry += c;
        if entry.norm() == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn coefficient(&self, e: &Exponents) -> Complex<f64> {
        self.terms.get(e).copied().unwrap_or(Complex::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Exponents, &Complex<f64>)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest |Im c| over all coefficients.
    pub fn max_imag(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// Terms of total degree exactly `d`.
    pub fn homogeneous_part(&self, d: usize) -> Polynomial {
        let mut out = Self::zero(self.chart);
        for (e, c) in &self.terms {
            if e.iter().map(|&x| x as usize).sum::<usize>() == d {
                out.add_term(*e, *c);
            }
        }
        out
    }

    pub fn truncate_degree(&self, cap: usize) -> Polynomial {
        let mut out = Self::zero(self.chart);
        for (e, c) in &self.terms {
            if e.iter().map(|&x| x as usize).sum::<usize>() <= cap {
                out.add_term(*e, *c);
            }
        }
        out
    }

    /// Drops coefficients below `tol` relative to the largest coefficient.
    pub fn pruned(&self, tol: f64) -> Polynomial {
        let scale = self.max_coeff_norm().max(1.0);
        let mut out = Self::zero(self.chart);
        for (e, c) in &self.terms {
            if c.norm() > tol * scale {
                out.add_term(*e, *c);
            }
        }
        out
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.chart, other.chart, "chart mismatch in add");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, *c);
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(Complex::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex<f64>) -> Polynomial {
        let mut out = Self::zero(self.chart);
        for (e, v) in &self.terms {
            out.add_term(*e, v * c);
        }
        out
    }

    /// Product truncated at total degree `cap`.
    pub fn mul_trunc(&self, other: &Polynomial, cap: usize) -> Polynomial {
        assert_eq!(self.chart, other.chart, "chart mismatch in mul");
        let mut out = Self::zero(self.chart);
        for (ea, ca) in &self.terms {
            let da: usize = ea.iter().map(|&x| x as usize).sum();
            for (eb, cb) in &other.terms {
                let db: usize = eb.iter().map(|&x| x as usize).sum();
                if da + db > cap {
                    continue;
                }
                let mut e = [0u8; NVARS];
                for i in 0..NVARS {
                    e[i] = ea[i] + eb[i];
                }
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn differentiate(&self, var: usize) -> Polynomial {
        assert!(var < NVARS);
        let mut out = Self::zero(self.chart);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut en = *e;
            en[var] -= 1;
            out.add_term(en, c * e[var] as f64);
        }
        out
    }

    /// Substitutes variable `i` by `images[i]`, truncating at `cap`. All
    /// images must share a chart, which becomes the result chart.
    pub fn substitute(&self, images: &[Polynomial; NVARS], cap: usize) -> Polynomial {
        let chart = images[0].chart;
        for im in images.iter() {
            assert_eq!(im.chart, chart, "chart mismatch in substitute");
        }
        let mut out = Polynomial::zero(chart);
        for (e, c) in &self.terms {
            let mut term = Polynomial::constant(chart, *c);
            for (i, &exp) in e.iter().enumerate() {
                for _ in 0..exp {
                    term = term.mul_trunc(&images[i], cap);
                    if term.is_empty() {
                        break;
                    }
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Linear change of variables x_i = sum_j a[i][j] * new_j.
    pub fn compose_linear(
        &self,
        a: &[[Complex<f64>; NVARS]; NVARS],
        new_chart: Chart,
        cap: usize,
    ) -> Polynomial {
        let mut images: Vec<Polynomial> = Vec::with_capacity(NVARS);
        for row in a.iter() {
            let mut img = Polynomial::zero(new_chart);
            for (j, &c) in row.iter().enumerate() {
                if c.norm() != 0.0 {
                    let mut e = [0u8; NVARS];
                    e[j] = 1;
                    img.add_term(e, c);
                }
            }
            images.push(img);
        }
        let arr: [Polynomial; NVARS] = images.try_into().ok().expect("six images");
        self.substitute(&arr, cap)
    }

    pub fn evaluate(&self, x: &[Complex<f64>; NVARS]) -> Complex<f64> {
        let mut acc = Complex::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = *c;
            for (i, &exp) in e.iter().enumerate() {
                for _ in 0..exp {
                    t *= x[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// Deterministic JSON form: exponent vector key "e0e1e2e3e4e5" (space
    /// separated) mapped to [re, im].
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (e, c) in &self.terms {
            let key = e
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            map.insert(key, serde_json::json!([c.re, c.im]));
        }
        serde_json::Value::Object(map)
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{:?};", self.chart)?;
        for (e, c) in &self.terms {
            write!(f, " {:?}:{:+.6e}{:+.6e}i", e, c.re, c.im)?;
        }
        write!(f, "]")
    }
}
