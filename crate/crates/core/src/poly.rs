//! Sparse real polynomials in the six coordinates `(x1, x2, x3, xt1, xt2, xt3)`.
//!
//! Every structure in this crate (Poisson tensors, Hamiltonians, Casimirs,
//! metric tensors, the vector fields built from them) is polynomial, so
//! derivatives are taken symbolically here instead of by finite differences.
//! Brackets of brackets, analytic Jacobians of generated flows, and the
//! linearizations of the delay systems all go through this type.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Number of variables: three current and three delayed coordinates.
pub const NVARS: usize = 6;

pub type Exponents = [u8; NVARS];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    terms: BTreeMap<Exponents, f64>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Poly::zero();
        p.add_term([0; NVARS], c);
        p
    }

    /// The coordinate function `z_i` (0..3 current, 3..6 delayed).
    pub fn var(i: usize) -> Self {
        assert!(i < NVARS, "variable index {i} out of range");
        let mut e = [0; NVARS];
        e[i] = 1;
        let mut p = Poly::zero();
        p.add_term(e, 1.0);
        p
    }

    /// `sum_i c_i z_i`.
    pub fn linear(coeffs: &[f64; NVARS]) -> Self {
        let mut p = Poly::zero();
        for (i, &c) in coeffs.iter().enumerate() {
            let mut e = [0; NVARS];
            e[i] = 1;
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exps: Exponents, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        let slot = self.terms.entry(exps).or_insert(0.0);
        *slot += coeff;
        if *slot == 0.0 {
            self.terms.remove(&exps);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&d| d as u32).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &f64)> {
        self.terms.iter()
    }

    /// True when the polynomial mentions any delayed coordinate.
    pub fn uses_delayed(&self) -> bool {
        self.terms.keys().any(|e| e[3..].iter().any(|&d| d > 0))
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, c * s);
        }
        out
    }

    pub fn partial(&self, var: usize) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut d = *e;
            d[var] -= 1;
            out.add_term(d, c * e[var] as f64);
        }
        out
    }

    /// Gradient with respect to the current coordinates `x1..x3`.
    pub fn grad_x(&self) -> [Poly; 3] {
        [self.partial(0), self.partial(1), self.partial(2)]
    }

    /// Gradient with respect to the delayed coordinates.
    pub fn grad_xt(&self) -> [Poly; 3] {
        [self.partial(3), self.partial(4), self.partial(5)]
    }

    pub fn eval(&self, z: &[f64; NVARS]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(z)
                    .fold(*c, |acc, (&d, &v)| if d == 0 { acc } else { acc * v.powi(d as i32) })
            })
            .sum()
    }

    /// Largest absolute coefficient, zero for the zero polynomial.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

/// Joins current and delayed coordinates into one evaluation point.
pub fn point(x: &crate::StateVec, xt: &crate::StateVec) -> [f64; NVARS] {
    [x[0], x[1], x[2], xt[0], xt[1], xt[2]]
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, *c);
        }
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -*c);
        }
        out
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let mut e = [0u8; NVARS];
                for i in 0..NVARS {
                    e[i] = ea[i] + eb[i];
                }
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [&str; NVARS] = ["x1", "x2", "x3", "xt1", "xt2", "xt3"];
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &d) in e.iter().enumerate() {
                match d {
                    0 => {}
                    1 => write!(f, "*{}", NAMES[i])?,
                    _ => write!(f, "*{}^{}", NAMES[i], d)?,
                }
            }
        }
        Ok(())
    }
}

/// Sum of products of polynomial rows and columns: `sum_k a[k] * b[k]`.
pub fn dot(a: &[Poly; 3], b: &[Poly; 3]) -> Poly {
    &(&(&a[0] * &b[0]) + &(&a[1] * &b[1])) + &(&a[2] * &b[2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_and_eval() {
        let x1 = Poly::var(0);
        let x2 = Poly::var(1);
        let p = &(&x1 * &x1) * &x2; // x1^2 x2
        let z = [2.0, 3.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(p.eval(&z), 12.0);
        assert_eq!(p.partial(0).eval(&z), 12.0);
        assert_eq!(p.partial(1).eval(&z), 4.0);
        assert!(p.partial(2).is_zero());
        assert_eq!(p.degree(), 3);
    }

    #[test]
    fn cancellation_removes_terms() {
        let x3 = Poly::var(2);
        let d = &x3 - &x3;
        assert!(d.is_zero());
        assert!(!Poly::var(4).partial(4).uses_delayed());
        assert!(Poly::var(4).uses_delayed());
    }
}
