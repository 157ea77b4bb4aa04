//! Linear Poisson tensors, quadratic Hamiltonians and Casimirs, and the
//! bracket identities they satisfy.
//!
//! A [`PoissonTensor`] stores only its three upper-triangular entries, each a
//! linear form in the current and delayed coordinates, so skew-symmetry holds
//! by construction. A [`QuadraticFn`] is `1/2 z^T Q z + b.z + c` over the six
//! coordinates `z = (x, xt)`; its gradient is the affine map `Q z + b`, exact.
//!
//! The Jacobi identity is checked by expanding the inner bracket as a
//! polynomial and differentiating it symbolically, so no nested finite
//! differences are involved.

use serde::Serialize;

use crate::dynamics::{Rabinovich, VectorField};
use crate::error::{Error, Result};
use crate::poly::{self, Poly, NVARS};
use crate::state::{mat_vec, Mat3, StateVec};

/// `sum_i c_i z_i` over `(x1, x2, x3, xt1, xt2, xt3)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct LinearForm(pub [f64; NVARS]);

impl LinearForm {
    pub fn x(i: usize, c: f64) -> Self {
        let mut f = LinearForm::default();
        f.0[i] = c;
        f
    }

    pub fn xt(i: usize, c: f64) -> Self {
        LinearForm::x(3 + i, c)
    }

    pub fn eval(&self, z: &[f64; NVARS]) -> f64 {
        self.0.iter().zip(z).map(|(c, v)| c * v).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        LinearForm(self.0.map(|c| c * s))
    }

    pub fn plus(&self, other: &LinearForm) -> Self {
        LinearForm(std::array::from_fn(|i| self.0[i] + other.0[i]))
    }

    pub fn uses_delayed(&self) -> bool {
        self.0[3..].iter().any(|&c| c != 0.0)
    }

    pub fn to_poly(&self) -> Poly {
        Poly::linear(&self.0)
    }
}

const UPPER: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// A 3x3 skew tensor field with entries linear in `(x, xt)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoissonTensor {
    name: String,
    /// Entries (1,2), (1,3), (2,3).
    upper: [LinearForm; 3],
}

impl PoissonTensor {
    pub fn from_upper(name: impl Into<String>, e12: LinearForm, e13: LinearForm, e23: LinearForm) -> Self {
        PoissonTensor {
            name: name.into(),
            upper: [e12, e13, e23],
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Entry `(i, j)` as a linear form; `entry(j, i) == -entry(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> LinearForm {
        if i == j {
            return LinearForm::default();
        }
        let (a, b, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        let k = UPPER.iter().position(|&p| p == (a, b)).expect("indices in 0..3");
        self.upper[k].scale(sign)
    }

    pub fn uses_delayed(&self) -> bool {
        self.upper.iter().any(LinearForm::uses_delayed)
    }

    /// `sum_k w_k P_k`, entrywise on the linear forms.
    pub fn combination(name: impl Into<String>, parts: &[(f64, &PoissonTensor)]) -> Self {
        let mut upper = [LinearForm::default(); 3];
        for (w, p) in parts {
            for (u, e) in upper.iter_mut().zip(&p.upper) {
                *u = u.plus(&e.scale(*w));
            }
        }
        PoissonTensor {
            name: name.into(),
            upper,
        }
    }

    pub fn eval(&self, x: &StateVec, xt: Option<&StateVec>) -> Result<Mat3> {
        let z = point(x, xt, self.uses_delayed())?;
        Ok(self.eval_at(&z))
    }

    pub(crate) fn eval_at(&self, z: &[f64; NVARS]) -> Mat3 {
        let [a, b, c] = self.upper.map(|f| f.eval(z));
        #[rustfmt::skip]
        let m = Mat3::new(
            0.0, a, b,
            -a, 0.0, c,
            -b, -c, 0.0,
        );
        m
    }

    pub fn to_poly(&self) -> [[Poly; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.entry(i, j).to_poly()))
    }
}

fn point(x: &StateVec, xt: Option<&StateVec>, needs_delay: bool) -> Result<[f64; NVARS]> {
    match xt {
        Some(xt) => Ok(poly::point(x, xt)),
        None if needs_delay => Err(Error::MissingDelayedState),
        None => Ok(poly::point(x, &StateVec::ZERO)),
    }
}

pub fn tensor_eval(p: &PoissonTensor, x: &StateVec, xt: Option<&StateVec>) -> Result<Mat3> {
    p.eval(x, xt)
}

/// `1/2 z^T Q z + b.z + c` with `z = (x, xt)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadraticFn {
    name: String,
    q: [[f64; NVARS]; NVARS],
    b: [f64; NVARS],
    c: f64,
}

impl QuadraticFn {
    /// From a symmetric coefficient matrix.
    #[allow(clippy::needless_range_loop)]
    pub fn from_matrix(name: impl Into<String>, q: [[f64; NVARS]; NVARS]) -> Result<Self> {
        for i in 0..NVARS {
            for j in 0..i {
                if q[i][j] != q[j][i] {
                    return Err(Error::domain(format!("Q is not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(QuadraticFn {
            name: name.into(),
            q,
            b: [0.0; NVARS],
            c: 0.0,
        })
    }

    /// From a polynomial of degree at most two.
    pub fn from_poly(name: impl Into<String>, p: &Poly) -> Result<Self> {
        let mut q = [[0.0; NVARS]; NVARS];
        let mut b = [0.0; NVARS];
        let mut c = 0.0;
        for (e, &coeff) in p.terms() {
            let idx: Vec<usize> = e
                .iter()
                .enumerate()
                .flat_map(|(i, &d)| std::iter::repeat_n(i, d as usize))
                .collect();
            match idx.as_slice() {
                [] => c += coeff,
                [i] => b[*i] += coeff,
                [i, j] if i == j => q[*i][*i] += 2.0 * coeff,
                [i, j] => {
                    q[*i][*j] += coeff;
                    q[*j][*i] += coeff;
                }
                _ => return Err(Error::domain(format!("polynomial of degree {} is not quadratic", p.degree()))),
            }
        }
        Ok(QuadraticFn {
            name: name.into(),
            q,
            b,
            c,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix(&self) -> &[[f64; NVARS]; NVARS] {
        &self.q
    }

    pub fn uses_delayed(&self) -> bool {
        (3..NVARS).any(|i| self.b[i] != 0.0 || self.q[i].iter().any(|&v| v != 0.0))
    }

    pub fn value(&self, x: &StateVec, xt: &StateVec) -> f64 {
        self.value_at(&poly::point(x, xt))
    }

    fn value_at(&self, z: &[f64; NVARS]) -> f64 {
        let mut quad = 0.0;
        for i in 0..NVARS {
            let row: f64 = (0..NVARS).map(|j| self.q[i][j] * z[j]).sum();
            quad += z[i] * row;
        }
        0.5 * quad + self.b.iter().zip(z).map(|(b, v)| b * v).sum::<f64>() + self.c
    }

    /// Full gradient `Q z + b` over all six coordinates.
    pub fn gradient_at(&self, z: &[f64; NVARS]) -> [f64; NVARS] {
        std::array::from_fn(|i| (0..NVARS).map(|j| self.q[i][j] * z[j]).sum::<f64>() + self.b[i])
    }

    /// Gradient with respect to the current coordinates.
    pub fn grad_x(&self, x: &StateVec, xt: &StateVec) -> StateVec {
        let g = self.gradient_at(&poly::point(x, xt));
        StateVec::new(g[0], g[1], g[2])
    }

    /// Gradient with respect to the delayed coordinates.
    pub fn grad_xt(&self, x: &StateVec, xt: &StateVec) -> StateVec {
        let g = self.gradient_at(&poly::point(x, xt));
        StateVec::new(g[3], g[4], g[5])
    }

    pub fn to_poly(&self) -> Poly {
        let mut p = Poly::constant(self.c);
        for i in 0..NVARS {
            let mut e = [0u8; NVARS];
            e[i] = 1;
            p.add_term(e, self.b[i]);
            for j in i..NVARS {
                let mut e = [0u8; NVARS];
                e[i] += 1;
                e[j] += 1;
                let coeff = if i == j { 0.5 * self.q[i][i] } else { self.q[i][j] };
                p.add_term(e, coeff);
            }
        }
        p
    }

    /// `s * self` under a new name.
    pub fn scaled(&self, name: impl Into<String>, s: f64) -> Self {
        QuadraticFn {
            name: name.into(),
            q: self.q.map(|row| row.map(|v| v * s)),
            b: self.b.map(|v| v * s),
            c: self.c * s,
        }
    }

    /// `sum_k w_k f_k` under a new name.
    pub fn combination(name: impl Into<String>, parts: &[(f64, &QuadraticFn)]) -> Self {
        let mut out = QuadraticFn {
            name: name.into(),
            q: [[0.0; NVARS]; NVARS],
            b: [0.0; NVARS],
            c: 0.0,
        };
        for (w, f) in parts {
            for i in 0..NVARS {
                for j in 0..NVARS {
                    out.q[i][j] += w * f.q[i][j];
                }
                out.b[i] += w * f.b[i];
            }
            out.c += w * f.c;
        }
        out
    }
}

fn var(i: usize) -> Poly {
    Poly::var(i)
}

fn sq(i: usize) -> Poly {
    &var(i) * &var(i)
}

fn quad(name: &str, p: Poly) -> QuadraticFn {
    QuadraticFn::from_poly(name, &p).expect("built-in functions are quadratic")
}

/// The coordinate function `x_i` (0-based).
pub fn coordinate(i: usize) -> QuadraticFn {
    quad(["x1", "x2", "x3"][i], var(i))
}

/// `1/2 (x1^2 + x2^2)`.
pub fn h1() -> QuadraticFn {
    quad("h1", (sq(0) + sq(1)).scale(0.5))
}

/// `x2^2 + x3^2`.
pub fn h2() -> QuadraticFn {
    quad("h2", sq(1) + sq(2))
}

/// `x1^2 - x3^2`.
pub fn h3() -> QuadraticFn {
    quad("h3", sq(0) - sq(2))
}

/// `1/2 (x2^2 + x3^2)`, Casimir of `P1`.
pub fn c1() -> QuadraticFn {
    quad("c1", (sq(1) + sq(2)).scale(0.5))
}

/// `x1^2 + x2^2`, Casimir of `P2`.
pub fn c2() -> QuadraticFn {
    quad("c2", sq(0) + sq(1))
}

/// `x1^2 + x2^2`, Casimir of `P3`.
pub fn c3() -> QuadraticFn {
    quad("c3", sq(0) + sq(1))
}

/// The alternative listing used alongside the metriplectic realizations:
/// `h2 = h3 = 1/2 (x1^2 + x2^2)` and `c2 = c3 = 1/2 (x2^2 + x3^2)`.
/// Kept under distinct names; [`hamiltonian_field`] with these and `P2`/`P3`
/// does not reproduce the classical field.
pub fn metriplectic_listing() -> [(QuadraticFn, QuadraticFn); 2] {
    [
        (h1().scaled("h2_alt", 1.0), c1().scaled("c2_alt", 1.0)),
        (h1().scaled("h3_alt", 1.0), c1().scaled("c3_alt", 1.0)),
    ]
}

/// `P1 = [[0, x3, -x2], [-x3, 0, 0], [x2, 0, 0]]`.
pub fn p1() -> PoissonTensor {
    PoissonTensor::from_upper("P1", LinearForm::x(2, 1.0), LinearForm::x(1, -1.0), LinearForm::default())
}

/// `P2 = [[0, 0, x2/2], [0, 0, -x1/2], [-x2/2, x1/2, 0]]`.
pub fn p2() -> PoissonTensor {
    PoissonTensor::from_upper("P2", LinearForm::default(), LinearForm::x(1, 0.5), LinearForm::x(0, -0.5))
}

/// `P3 = -P2`.
pub fn p3() -> PoissonTensor {
    PoissonTensor::from_upper("P3", LinearForm::default(), LinearForm::x(1, -0.5), LinearForm::x(0, 0.5))
}

/// The pencil `alpha P1 + beta P2 + gamma P3`, `alpha != 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PoissonPencil {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl PoissonPencil {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if alpha == 0.0 || !alpha.is_finite() || !beta.is_finite() || !gamma.is_finite() {
            return Err(Error::domain(format!(
                "pencil needs finite coefficients with alpha != 0, got ({alpha}, {beta}, {gamma})"
            )));
        }
        Ok(PoissonPencil { alpha, beta, gamma })
    }

    pub fn coefficients(&self) -> (f64, f64, f64) {
        (self.alpha, self.beta, self.gamma)
    }

    pub fn tensor(&self) -> PoissonTensor {
        PoissonTensor::combination(
            format!("P[{},{},{}]", self.alpha, self.beta, self.gamma),
            &[(self.alpha, &p1()), (self.beta, &p2()), (self.gamma, &p3())],
        )
    }

    /// `(1/(2 alpha)) (x1^2 + x2^2)`.
    pub fn hamiltonian(&self) -> QuadraticFn {
        h1().scaled("h_alpha", 1.0 / self.alpha)
    }

    /// `-(1/alpha)(beta/2 - gamma/2) x1^2 + (1/alpha)(alpha - beta/2 + gamma/2) x2^2 + x3^2`.
    pub fn casimir(&self) -> QuadraticFn {
        let (a, b, g) = (self.alpha, self.beta, self.gamma);
        let p = sq(0).scale(-(b / 2.0 - g / 2.0) / a) + sq(1).scale((a - b / 2.0 + g / 2.0) / a) + sq(2);
        quad("c_pencil", p)
    }
}

fn grad_pair(f: &QuadraticFn, x: &StateVec, xt: Option<&StateVec>) -> Result<(StateVec, [f64; NVARS])> {
    let z = point(x, xt, f.uses_delayed())?;
    let g = f.gradient_at(&z);
    Ok((StateVec::new(g[0], g[1], g[2]), z))
}

/// `grad f^T P grad g`, gradients in the current coordinates.
pub fn bracket(
    p: &PoissonTensor,
    f: &QuadraticFn,
    g: &QuadraticFn,
    x: &StateVec,
    xt: Option<&StateVec>,
) -> Result<f64> {
    let m = p.eval(x, xt)?;
    let (df, _) = grad_pair(f, x, xt)?;
    let (dg, _) = grad_pair(g, x, xt)?;
    Ok(df.dot(&mat_vec(&m, &dg)))
}

/// The bracket `{f, g}` as a polynomial in `(x, xt)`.
pub fn bracket_poly(p: &[[Poly; 3]; 3], f: &Poly, g: &Poly) -> Poly {
    let df = f.grad_x();
    let dg = g.grad_x();
    let mut out = Poly::zero();
    for i in 0..3 {
        for j in 0..3 {
            if p[i][j].is_zero() {
                continue;
            }
            out = &out + &(&(&df[i] * &p[i][j]) * &dg[j]);
        }
    }
    out
}

/// `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}` at `(x, xt)`, with every bracket
/// expanded symbolically.
pub fn jacobi_residual(
    p: &PoissonTensor,
    f: &QuadraticFn,
    g: &QuadraticFn,
    h: &QuadraticFn,
    x: &StateVec,
    xt: Option<&StateVec>,
) -> Result<f64> {
    let needs = p.uses_delayed() || [f, g, h].iter().any(|q| q.uses_delayed());
    let z = point(x, xt, needs)?;
    let pp = p.to_poly();
    let (fp, gp, hp) = (f.to_poly(), g.to_poly(), h.to_poly());
    let cyc = |a: &Poly, b: &Poly, c: &Poly| bracket_poly(&pp, a, &bracket_poly(&pp, b, c)).eval(&z);
    Ok(cyc(&fp, &gp, &hp) + cyc(&gp, &hp, &fp) + cyc(&hp, &fp, &gp))
}

/// `P(x) grad c(x)`; zero exactly where `c` is a Casimir.
pub fn casimir_residual(p: &PoissonTensor, c: &QuadraticFn, x: &StateVec, xt: Option<&StateVec>) -> Result<StateVec> {
    hamiltonian_field(p, c, x, xt)
}

/// `P(x) grad h(x)`.
pub fn hamiltonian_field(p: &PoissonTensor, h: &QuadraticFn, x: &StateVec, xt: Option<&StateVec>) -> Result<StateVec> {
    let m = p.eval(x, xt)?;
    let (dh, _) = grad_pair(h, x, xt)?;
    Ok(mat_vec(&m, &dh))
}

/// Largest pairwise sup-norm gap among `P1 grad h1`, `P2 grad h2`,
/// `P3 grad h3` and the classical field at `x`.
pub fn tri_hamiltonian_gap(x: &StateVec) -> f64 {
    let fields = [
        hamiltonian_field(&p1(), &h1(), x, None),
        hamiltonian_field(&p2(), &h2(), x, None),
        hamiltonian_field(&p3(), &h3(), x, None),
        Ok(Rabinovich.eval(x)),
    ]
    .map(|r| r.expect("classical tensors need no delayed state"));
    let mut gap = 0.0_f64;
    for i in 0..fields.len() {
        for j in i + 1..fields.len() {
            gap = gap.max((fields[i] - fields[j]).sup_norm());
        }
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::max_abs_diff;

    fn x123() -> StateVec {
        StateVec::new(1.0, 2.0, 3.0)
    }

    #[test]
    fn tensors_at_sample_point() {
        let m1 = tensor_eval(&p1(), &x123(), None).unwrap();
        assert_eq!(m1, Mat3::new(0.0, 3.0, -2.0, -3.0, 0.0, 0.0, 2.0, 0.0, 0.0));
        let m2 = tensor_eval(&p2(), &x123(), None).unwrap();
        assert_eq!(m2, Mat3::new(0.0, 0.0, 1.0, 0.0, 0.0, -0.5, -1.0, 0.5, 0.0));
        let m3 = tensor_eval(&p3(), &x123(), None).unwrap();
        assert_eq!(m3, -m2);
    }

    #[test]
    fn pencil_degenerates_to_p1() {
        let pencil = PoissonPencil::new(1.0, 0.0, 0.0).unwrap().tensor();
        for x in [x123(), StateVec::new(-0.4, 7.0, 0.1)] {
            assert_eq!(pencil.eval(&x, None).unwrap(), p1().eval(&x, None).unwrap());
        }
        assert!(PoissonPencil::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn pencil_matches_printed_matrix() {
        let (a, b, g) = (1.7, -0.6, 2.3);
        let x = StateVec::new(0.9, -1.1, 0.4);
        let m = PoissonPencil::new(a, b, g).unwrap().tensor().eval(&x, None).unwrap();
        let k = a - b / 2.0 + g / 2.0;
        let l = b / 2.0 - g / 2.0;
        #[rustfmt::skip]
        let printed = Mat3::new(
            0.0, a * x.x3(), -k * x.x2(),
            -a * x.x3(), 0.0, -l * x.x1(),
            k * x.x2(), l * x.x1(), 0.0,
        );
        assert!(max_abs_diff(&m, &printed) < 1e-15);
    }

    #[test]
    fn delay_tensor_requires_delayed_state() {
        let p = PoissonTensor::from_upper("P", LinearForm::xt(2, 1.0), LinearForm::default(), LinearForm::default());
        assert!(matches!(p.eval(&x123(), None), Err(Error::MissingDelayedState)));
        assert!(p.eval(&x123(), Some(&x123())).is_ok());
    }

    #[test]
    fn bracket_examples() {
        let x = StateVec::new(0.3, -2.0, 1.4);
        assert_eq!(bracket(&p1(), &h1(), &h1(), &x, None).unwrap(), 0.0);
        assert_eq!(bracket(&p1(), &h1(), &c1(), &x, None).unwrap(), 0.0);
        let ab = bracket(&p1(), &h2(), &h3(), &x, None).unwrap();
        let ba = bracket(&p1(), &h3(), &h2(), &x, None).unwrap();
        assert_eq!(ab, -ba);
    }

    #[test]
    fn jacobi_on_coordinates() {
        let (a, b, c) = (coordinate(0), coordinate(1), coordinate(2));
        for x in [x123(), StateVec::new(-3.0, 0.2, 4.4)] {
            assert_eq!(jacobi_residual(&p1(), &a, &b, &c, &x, None).unwrap(), 0.0);
            assert_eq!(jacobi_residual(&p1(), &h1(), &h1(), &c, &x, None).unwrap(), 0.0);
        }
    }

    #[test]
    fn casimirs_vanish() {
        let x = StateVec::new(1.3, -0.7, 2.9);
        assert_eq!(casimir_residual(&p1(), &c1(), &x, None).unwrap(), StateVec::ZERO);
        assert_eq!(casimir_residual(&p2(), &c2(), &x, None).unwrap(), StateVec::ZERO);
        assert_eq!(casimir_residual(&p3(), &c3(), &x, None).unwrap(), StateVec::ZERO);
    }

    #[test]
    fn three_realizations_at_sample_point() {
        let want = StateVec::new(6.0, -3.0, 2.0);
        assert_eq!(hamiltonian_field(&p1(), &h1(), &x123(), None).unwrap(), want);
        assert_eq!(hamiltonian_field(&p2(), &h2(), &x123(), None).unwrap(), want);
        assert_eq!(hamiltonian_field(&p3(), &h3(), &x123(), None).unwrap(), want);
        assert_eq!(tri_hamiltonian_gap(&StateVec::ZERO), 0.0);
    }

    #[test]
    fn alternative_listing_does_not_reproduce_the_field() {
        let [(h2a, c2a), _] = metriplectic_listing();
        let f = hamiltonian_field(&p2(), &h2a, &x123(), None).unwrap();
        assert_ne!(f, Rabinovich.eval(&x123()));
        assert_eq!(casimir_residual(&p1(), &c2a, &x123(), None).unwrap(), StateVec::ZERO);
    }

    #[test]
    fn quadratic_round_trip_through_poly() {
        let f = PoissonPencil::new(2.0, 1.0, -3.0).unwrap().casimir();
        let back = QuadraticFn::from_poly("c", &f.to_poly()).unwrap();
        assert_eq!(back.matrix(), f.matrix());
        let x = StateVec::new(0.5, 1.5, -2.5);
        assert!((back.value(&x, &x) - f.value(&x, &x)).abs() < 1e-15);
        let cubic = &(&Poly::var(0) * &Poly::var(1)) * &Poly::var(2);
        assert!(QuadraticFn::from_poly("cubic", &cubic).is_err());
    }

    #[test]
    fn from_matrix_requires_symmetry() {
        let mut q = [[0.0; NVARS]; NVARS];
        q[0][1] = 1.0;
        assert!(QuadraticFn::from_matrix("q", q).is_err());
        q[1][0] = 1.0;
        let f = QuadraticFn::from_matrix("q", q).unwrap();
        // 1/2 z^T Q z = x1 x2
        assert_eq!(f.value(&x123(), &StateVec::ZERO), 2.0);
    }
}
