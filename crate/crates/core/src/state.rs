//! Phase-space points and the 3x3 matrices that act on them.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat3 = Matrix3<f64>;

/// A point `(x1, x2, x3)` of the phase space.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StateVec(pub [f64; 3]);

impl StateVec {
    pub const ZERO: StateVec = StateVec([0.0; 3]);

    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        StateVec([x1, x2, x3])
    }

    /// Like [`StateVec::new`] but rejects NaN and infinities.
    pub fn checked(x1: f64, x2: f64, x3: f64) -> Result<Self> {
        StateVec::new(x1, x2, x3).ensure_finite("state vector")
    }

    pub fn x1(&self) -> f64 {
        self.0[0]
    }

    pub fn x2(&self) -> f64 {
        self.0[1]
    }

    pub fn x3(&self) -> f64 {
        self.0[2]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(self, what: &'static str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite(what))
        }
    }

    pub fn dot(&self, other: &StateVec) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.0[0], self.0[1], self.0[2])
    }

    /// `a*self + b*other`, the building block of every explicit scheme here.
    pub fn axpby(self, a: f64, other: StateVec, b: f64) -> StateVec {
        StateVec([
            a * self.0[0] + b * other.0[0],
            a * self.0[1] + b * other.0[1],
            a * self.0[2] + b * other.0[2],
        ])
    }
}

impl From<[f64; 3]> for StateVec {
    fn from(v: [f64; 3]) -> Self {
        StateVec(v)
    }
}

impl From<Vector3<f64>> for StateVec {
    fn from(v: Vector3<f64>) -> Self {
        StateVec([v[0], v[1], v[2]])
    }
}

impl Index<usize> for StateVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for StateVec {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for StateVec {
    type Output = StateVec;
    fn add(self, rhs: StateVec) -> StateVec {
        self.axpby(1.0, rhs, 1.0)
    }
}

impl AddAssign for StateVec {
    fn add_assign(&mut self, rhs: StateVec) {
        *self = *self + rhs;
    }
}

impl Sub for StateVec {
    type Output = StateVec;
    fn sub(self, rhs: StateVec) -> StateVec {
        self.axpby(1.0, rhs, -1.0)
    }
}

impl Neg for StateVec {
    type Output = StateVec;
    fn neg(self) -> StateVec {
        StateVec([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<f64> for StateVec {
    type Output = StateVec;
    fn mul(self, s: f64) -> StateVec {
        StateVec([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Mul<StateVec> for f64 {
    type Output = StateVec;
    fn mul(self, v: StateVec) -> StateVec {
        v * self
    }
}

impl fmt::Display for StateVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

/// `M v` for a 3x3 matrix.
pub fn mat_vec(m: &Mat3, v: &StateVec) -> StateVec {
    StateVec::from(m * v.to_vector())
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &Mat3, b: &Mat3) -> f64 {
    (a - b).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checked_rejects_nan() {
        assert!(StateVec::checked(0.0, f64::NAN, 1.0).is_err());
        assert!(StateVec::checked(0.0, 1.0, f64::INFINITY).is_err());
        assert!(StateVec::checked(0.0, 1.0, 2.0).is_ok());
    }

    #[test]
    fn arithmetic() {
        let a = StateVec::new(1.0, 2.0, 3.0);
        let b = StateVec::new(-1.0, 0.5, 2.0);
        assert_eq!(a + b, StateVec::new(0.0, 2.5, 5.0));
        assert_eq!(a - b, StateVec::new(2.0, 1.5, 1.0));
        assert_eq!(2.0 * a, StateVec::new(2.0, 4.0, 6.0));
        assert_eq!(a.dot(&b), -1.0 + 1.0 + 6.0);
        assert_eq!(b.sup_norm(), 2.0);
    }
}
