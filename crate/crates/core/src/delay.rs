//! Distributed-delay Rabinovich systems.
//!
//! The delayed state is `xt(t) = int_0^inf k(s) x(t - s) ds` for one of four
//! kernels. The Hamiltonian delay system is `x' = P(xt, x) grad_x h(xt, x)`
//! with `P = sum eps_i P_i` and `h = sum delta_i h_i`; the revised system adds
//! the metric leg `g(xt, x) grad_xt l(xt, x)` with `l = sum eps_i l_i`.
//!
//! Integration strategy depends on the kernel: method of steps with cubic
//! Hermite history for the point delay, the linear chain trick for the
//! exponential (one auxiliary block) and Erlang (two blocks) kernels, and
//! trapezoid quadrature over the stored history for the uniform window.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{MonitorSeries, Trajectory, VectorField};
use crate::error::{Error, Result};
use crate::poisson::{LinearForm, PoissonTensor, QuadraticFn};
use crate::poly::{self, Poly};
use crate::quad::{gauss_legendre, trapezoid};
use crate::state::{mat_vec, Mat3, StateVec};

/// Tail mass left out when an unbounded kernel is truncated.
pub const TAIL_MASS: f64 = 1e-10;

/// A delay distribution density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    /// `1/tau` on `[a, a + tau]`.
    Uniform { a: f64, tau: f64 },
    /// `alpha exp(-alpha s)`.
    Exponential { alpha: f64 },
    /// `alpha^2 s exp(-alpha s)`.
    Erlang { alpha: f64 },
    /// Point mass at `s = tau`.
    Dirac { tau: f64 },
}

impl Kernel {
    pub fn uniform(a: f64, tau: f64) -> Result<Self> {
        Kernel::Uniform { a, tau }.validated()
    }

    pub fn exponential(alpha: f64) -> Result<Self> {
        Kernel::Exponential { alpha }.validated()
    }

    pub fn erlang(alpha: f64) -> Result<Self> {
        Kernel::Erlang { alpha }.validated()
    }

    pub fn dirac(tau: f64) -> Result<Self> {
        Kernel::Dirac { tau }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Kernel::Uniform { a, tau } => a >= 0.0 && a.is_finite() && tau > 0.0 && tau.is_finite(),
            Kernel::Exponential { alpha } | Kernel::Erlang { alpha } => alpha > 0.0 && alpha.is_finite(),
            Kernel::Dirac { tau } => tau > 0.0 && tau.is_finite(),
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::domain(format!("invalid kernel parameters: {self:?}")))
        }
    }

    pub fn density(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::domain(format!("kernel density needs s >= 0, got {s}")));
        }
        Ok(match *self {
            Kernel::Uniform { a, tau } => {
                if s >= a && s <= a + tau {
                    1.0 / tau
                } else {
                    0.0
                }
            }
            Kernel::Exponential { alpha } => alpha * (-alpha * s).exp(),
            Kernel::Erlang { alpha } => alpha * alpha * s * (-alpha * s).exp(),
            Kernel::Dirac { .. } => return Err(Error::DiracDensity),
        })
    }

    /// `int_0^inf k(s) exp(-lambda s) ds` in closed form.
    pub fn laplace(&self, lambda: Complex64) -> Result<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        if lambda == Complex64::new(0.0, 0.0) {
            return Ok(one);
        }
        match *self {
            Kernel::Dirac { tau } => Ok((-lambda * tau).exp()),
            Kernel::Exponential { alpha } => {
                check_half_plane(lambda, alpha)?;
                Ok(alpha / (alpha + lambda))
            }
            Kernel::Erlang { alpha } => {
                check_half_plane(lambda, alpha)?;
                let r = alpha / (alpha + lambda);
                Ok(r * r)
            }
            Kernel::Uniform { a, tau } => {
                let z = lambda * tau;
                // (1 - e^{-z}) / z, by series near the removable singularity
                let window = if z.norm() < 1e-3 {
                    one - z / 2.0 + z * z / 6.0 - z * z * z / 24.0 + z * z * z * z / 120.0
                } else {
                    (one - (-z).exp()) / z
                };
                Ok((-lambda * a).exp() * window)
            }
        }
    }

    /// Support used for quadrature: exact for the uniform window, truncated at
    /// tail mass [`TAIL_MASS`] for the exponential and Erlang kernels.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Kernel::Uniform { a, tau } => (a, a + tau),
            Kernel::Exponential { alpha } => (0.0, -(TAIL_MASS.ln()) / alpha),
            Kernel::Erlang { alpha } => (0.0, erlang_tail_point() / alpha),
            Kernel::Dirac { tau } => (tau, tau),
        }
    }

    /// `int k(s) f(s) ds` by quadrature over [`Kernel::support`]; the point
    /// mass is applied by sifting.
    pub fn integrate<T, F>(&self, f: F, panels: usize, zero: T) -> T
    where
        T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
        F: Fn(f64) -> T,
    {
        let (lo, hi) = self.support();
        match *self {
            Kernel::Dirac { tau } => f(tau),
            Kernel::Uniform { tau, .. } => gauss_legendre(|s| f(s) * (1.0 / tau), lo, hi, panels, zero),
            _ => gauss_legendre(
                |s| f(s) * self.density(s).expect("non-dirac kernel"),
                lo,
                hi,
                panels,
                zero,
            ),
        }
    }

    /// True when the kernel reaches back an unbounded time.
    pub fn is_unbounded(&self) -> bool {
        matches!(self, Kernel::Exponential { .. } | Kernel::Erlang { .. })
    }
}

fn check_half_plane(lambda: Complex64, alpha: f64) -> Result<()> {
    if lambda.re > -alpha {
        Ok(())
    } else {
        Err(Error::LaplaceDivergent {
            re: lambda.re,
            bound: -alpha,
        })
    }
}

/// `u` with `(1 + u) exp(-u) = TAIL_MASS`, by Newton from the exponential guess.
fn erlang_tail_point() -> f64 {
    let mut u = -(TAIL_MASS.ln());
    for _ in 0..50 {
        let g = (1.0 + u).ln() - u - TAIL_MASS.ln();
        let dg = 1.0 / (1.0 + u) - 1.0;
        let next = u - g / dg;
        if (next - u).abs() < 1e-14 * u {
            return next;
        }
        u = next;
    }
    u
}

pub fn kernel_density(k: &Kernel, s: f64) -> Result<f64> {
    k.density(s)
}

pub fn kernel_laplace(k: &Kernel, lambda: Complex64) -> Result<Complex64> {
    k.laplace(lambda)
}

/// Simplex weights for the tensor blend (`eps`) and the Hamiltonian blend (`delta`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlendWeights {
    eps: [f64; 4],
    delta: [f64; 4],
}

const SIMPLEX_TOL: f64 = 1e-12;

fn check_simplex(name: &str, w: &[f64; 4]) -> Result<()> {
    if w.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::domain(format!("{name} weights must be finite and non-negative: {w:?}")));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::domain(format!("{name} weights must sum to 1, got {sum}")));
    }
    Ok(())
}

impl BlendWeights {
    pub fn new(eps: [f64; 4], delta: [f64; 4]) -> Result<Self> {
        check_simplex("eps", &eps)?;
        check_simplex("delta", &delta)?;
        Ok(BlendWeights { eps, delta })
    }

    /// `eps = delta = (1, 0, 0, 0)`: no delayed terms anywhere.
    pub fn undelayed() -> Self {
        BlendWeights {
            eps: [1.0, 0.0, 0.0, 0.0],
            delta: [1.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn eps(&self) -> [f64; 4] {
        self.eps
    }

    pub fn delta(&self) -> [f64; 4] {
        self.delta
    }

    /// `[a1..a5] = [e0+e1, e0+e2, e1+e2, e1+e3, e2+e3]`.
    pub fn alphas(&self) -> [f64; 5] {
        let e = self.eps;
        [e[0] + e[1], e[0] + e[2], e[1] + e[2], e[1] + e[3], e[2] + e[3]]
    }

    /// `[b1..b4] = [d0+d1, d0+d2, d1+d3, d2+d3]`.
    pub fn betas(&self) -> [f64; 4] {
        let d = self.delta;
        [d[0] + d[1], d[0] + d[2], d[1] + d[3], d[2] + d[3]]
    }
}

/// The four tensors `P_0(x)`, `P_1(xt, x)`, `P_2(xt, x)`, `P_3(xt, x)`.
pub fn delay_tensors() -> [PoissonTensor; 4] {
    let z = LinearForm::default();
    let (x2, x3) = (LinearForm::x(1, -1.0), LinearForm::x(2, 1.0));
    let (xt2, xt3) = (LinearForm::xt(1, -1.0), LinearForm::xt(2, 1.0));
    [
        PoissonTensor::from_upper("P0", x3, x2, z),
        PoissonTensor::from_upper("P1", x3, xt2, z),
        PoissonTensor::from_upper("P2", xt3, x2, z),
        PoissonTensor::from_upper("P3", xt3, xt2, z),
    ]
}

fn q(name: &str, p: Poly) -> QuadraticFn {
    QuadraticFn::from_poly(name, &p).expect("quadratic by construction")
}

/// `h_0 .. h_3` of the Hamiltonian blend.
pub fn delay_hamiltonians() -> [QuadraticFn; 4] {
    let v = Poly::var;
    let half_sq = |i: usize| (&v(i) * &v(i)).scale(0.5);
    let cross = |i: usize| &v(3 + i) * &v(i);
    [
        q("h0", half_sq(0) + half_sq(1)),
        q("h1", cross(0) + half_sq(1)),
        q("h2", half_sq(0) + cross(1)),
        q("h3", cross(0) + cross(1)),
    ]
}

/// `l_0 .. l_3`, the Casimir family of the blended tensor.
pub fn delay_casimirs() -> [QuadraticFn; 4] {
    let v = Poly::var;
    let half_sq = |i: usize| (&v(i) * &v(i)).scale(0.5);
    let cross = |i: usize| &v(3 + i) * &v(i);
    [
        q("l0", half_sq(1) + half_sq(2)),
        q("l1", cross(1) + half_sq(2)),
        q("l2", half_sq(1) + cross(2)),
        q("l3", cross(1) + cross(2)),
    ]
}

impl BlendWeights {
    /// `P(xt, x) = sum eps_i P_i`.
    pub fn tensor(&self) -> PoissonTensor {
        let ts = delay_tensors();
        let parts: Vec<_> = self.eps.iter().copied().zip(ts.iter()).collect();
        PoissonTensor::combination("P_blend", &parts)
    }

    /// `h(xt, x) = sum delta_i h_i`.
    pub fn hamiltonian(&self) -> QuadraticFn {
        let hs = delay_hamiltonians();
        let parts: Vec<_> = self.delta.iter().copied().zip(hs.iter()).collect();
        QuadraticFn::combination("h_blend", &parts)
    }

    /// `l(xt, x) = sum eps_i l_i`.
    pub fn casimir(&self) -> QuadraticFn {
        let ls = delay_casimirs();
        let parts: Vec<_> = self.eps.iter().copied().zip(ls.iter()).collect();
        QuadraticFn::combination("l_blend", &parts)
    }
}

/// A vector field depending on the current and the delayed state.
pub trait DelayField: Sync {
    fn name(&self) -> &str;

    fn eval(&self, x: &StateVec, xt: &StateVec) -> StateVec;

    /// Polynomial components in `(x, xt)`, when available.
    fn polynomial(&self) -> Option<&[Poly; 3]> {
        None
    }
}

/// Treats an ordinary vector field as a delay field that ignores `xt`.
pub struct Undelayed<F>(pub F);

impl<F: VectorField> DelayField for Undelayed<F> {
    fn name(&self) -> &str {
        self.0.name()
    }
    fn eval(&self, x: &StateVec, _xt: &StateVec) -> StateVec {
        self.0.eval(x)
    }
}

/// Wraps a closure as a delay field.
pub struct FnDelayField<F> {
    name: String,
    f: F,
}

impl<F: Fn(&StateVec, &StateVec) -> StateVec + Sync> FnDelayField<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnDelayField { name: name.into(), f }
    }
}

impl<F: Fn(&StateVec, &StateVec) -> StateVec + Sync> DelayField for FnDelayField<F> {
    fn name(&self) -> &str {
        &self.name
    }
    fn eval(&self, x: &StateVec, xt: &StateVec) -> StateVec {
        (self.f)(x, xt)
    }
}

/// `x' = P(xt, x) grad_x h(xt, x)` from the blends.
#[derive(Clone, Debug)]
pub struct DelayHamiltonian {
    weights: BlendWeights,
    tensor: PoissonTensor,
    hamiltonian: QuadraticFn,
    poly: [Poly; 3],
}

impl DelayHamiltonian {
    pub fn new(weights: BlendWeights) -> Self {
        let tensor = weights.tensor();
        let hamiltonian = weights.hamiltonian();
        let pp = tensor.to_poly();
        let dh = hamiltonian.to_poly().grad_x();
        let poly = std::array::from_fn(|i| poly::dot(&pp[i], &dh));
        DelayHamiltonian {
            weights,
            tensor,
            hamiltonian,
            poly,
        }
    }

    pub fn weights(&self) -> &BlendWeights {
        &self.weights
    }

    pub fn tensor(&self) -> &PoissonTensor {
        &self.tensor
    }

    pub fn hamiltonian(&self) -> &QuadraticFn {
        &self.hamiltonian
    }
}

impl DelayField for DelayHamiltonian {
    fn name(&self) -> &str {
        "delay"
    }

    fn eval(&self, x: &StateVec, xt: &StateVec) -> StateVec {
        let p = self.tensor.eval(x, Some(xt)).expect("delayed state supplied");
        mat_vec(&p, &self.hamiltonian.grad_x(x, xt))
    }

    fn polynomial(&self) -> Option<&[Poly; 3]> {
        Some(&self.poly)
    }
}

pub fn delay_hamiltonian_field(x: &StateVec, xt: &StateVec, w: &BlendWeights) -> StateVec {
    DelayHamiltonian::new(*w).eval(x, xt)
}

/// The same field written out with the `alpha`/`beta` shorthands.
pub fn delay_hamiltonian_expanded(x: &StateVec, xt: &StateVec, w: &BlendWeights) -> StateVec {
    let [a1, a2, _a3, a4, a5] = w.alphas();
    let [b1, b2, b3, b4] = w.betas();
    let p12 = a1 * x[2] + a5 * xt[2];
    let p13 = a2 * x[1] + a4 * xt[1];
    let dh1 = b2 * x[0] + b3 * xt[0];
    let dh2 = b1 * x[1] + b4 * xt[1];
    StateVec::new(p12 * dh2, -p12 * dh1, p13 * dh1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RevisedMode {
    /// Built from the blends: `P grad_x h + g grad_xt l`.
    Constructed,
    /// The printed right-hand side, verbatim except for a closing parenthesis.
    Literal,
}

/// The revised delay system with its metric leg.
#[derive(Clone, Debug)]
pub struct RevisedDelay {
    weights: BlendWeights,
    mode: RevisedMode,
    base: DelayHamiltonian,
    casimir: QuadraticFn,
    poly: [Poly; 3],
}

impl RevisedDelay {
    pub fn new(weights: BlendWeights, mode: RevisedMode) -> Self {
        let base = DelayHamiltonian::new(weights);
        let casimir = weights.casimir();
        let poly = match mode {
            RevisedMode::Constructed => {
                let d = base.hamiltonian.to_poly().grad_x();
                let v = casimir.to_poly().grad_xt();
                let dd = poly::dot(&d, &d);
                let dv = poly::dot(&d, &v);
                std::array::from_fn(|i| &(&base.poly[i] + &(&d[i] * &dv)) - &(&dd * &v[i]))
            }
            RevisedMode::Literal => literal_revised_poly(&weights),
        };
        RevisedDelay {
            weights,
            mode,
            base,
            casimir,
            poly,
        }
    }

    pub fn mode(&self) -> RevisedMode {
        self.mode
    }

    pub fn weights(&self) -> &BlendWeights {
        &self.weights
    }

    /// `g(xt, x) = d d^T - |d|^2 I` with `d = grad_x h(xt, x)`.
    pub fn metric(&self, x: &StateVec, xt: &StateVec) -> Mat3 {
        let d = self.base.hamiltonian.grad_x(x, xt);
        let dd = d.dot(&d);
        Mat3::from_fn(|i, j| d[i] * d[j] - if i == j { dd } else { 0.0 })
    }
}

fn literal_revised_poly(w: &BlendWeights) -> [Poly; 3] {
    let [a1, a2, a3, a4, _a5] = w.alphas();
    let [b1, b2, b3, b4] = w.betas();
    let v = Poly::var;
    let lin = |c1: f64, i: usize, c2: f64, j: usize| &v(i).scale(c1) + &v(j).scale(c2);
    let u = lin(a1, 2, a4, 5); // a1 x3 + a4 xt3
    let p = lin(b1, 1, b4, 4); // b1 x2 + b4 xt2
    let r = lin(b2, 0, b3, 3); // b2 x1 + b3 xt1
    let s = lin(a2, 1, a3, 4); // a2 x2 + a3 xt2
    let x3 = v(2);
    let f1 = &(&u * &p) + &(&(&r * &p) * &x3.scale(a2));
    let f2 = -(&(&u * &r) + &(&r * &x3.scale(a3)));
    let f3 = &(&(&s * &r) - &(&r * &x3.scale(a4))) - &(&(&p * &p) * &x3.scale(a3));
    [f1, f2, f3]
}

impl DelayField for RevisedDelay {
    fn name(&self) -> &str {
        match self.mode {
            RevisedMode::Constructed => "delay-revised",
            RevisedMode::Literal => "delay-revised-literal",
        }
    }

    fn eval(&self, x: &StateVec, xt: &StateVec) -> StateVec {
        match self.mode {
            RevisedMode::Constructed => {
                let leg = mat_vec(&self.metric(x, xt), &self.casimir.grad_xt(x, xt));
                self.base.eval(x, xt) + leg
            }
            RevisedMode::Literal => {
                let z = poly::point(x, xt);
                StateVec(std::array::from_fn(|i| self.poly[i].eval(&z)))
            }
        }
    }

    fn polynomial(&self) -> Option<&[Poly; 3]> {
        Some(&self.poly)
    }
}

pub fn revised_delay_field(x: &StateVec, xt: &StateVec, w: &BlendWeights, mode: RevisedMode) -> StateVec {
    RevisedDelay::new(*w, mode).eval(x, xt)
}

/// `A = dX/dx` and `B = dX/dxt` of a polynomial delay field at `(x0, x0)`.
pub fn linearize(field: &dyn DelayField, x0: &StateVec) -> Option<(Mat3, Mat3)> {
    let comps = field.polynomial()?;
    let z = poly::point(x0, x0);
    let a = Mat3::from_fn(|i, j| comps[i].partial(j).eval(&z));
    let b = Mat3::from_fn(|i, j| comps[i].partial(3 + j).eval(&z));
    Some((a, b))
}

/// The initial function on `(-inf, 0]`.
#[derive(Clone)]
pub enum InitialFunction {
    Constant(StateVec),
    Closure(Arc<dyn Fn(f64) -> StateVec + Send + Sync>),
    /// Samples with strictly increasing times, the last at `t = 0`.
    Sampled(Vec<(f64, StateVec)>),
}

impl std::fmt::Debug for InitialFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitialFunction::Constant(x) => write!(f, "Constant({x})"),
            InitialFunction::Closure(_) => write!(f, "Closure(..)"),
            InitialFunction::Sampled(s) => write!(f, "Sampled({} points)", s.len()),
        }
    }
}

impl InitialFunction {
    pub fn closure(f: impl Fn(f64) -> StateVec + Send + Sync + 'static) -> Self {
        InitialFunction::Closure(Arc::new(f))
    }

    pub fn eval(&self, s: f64) -> Result<StateVec> {
        match self {
            InitialFunction::Constant(x) => Ok(*x),
            InitialFunction::Closure(f) => Ok(f(s)),
            InitialFunction::Sampled(samples) => {
                let (first, last) = match (samples.first(), samples.last()) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(Error::InsufficientHistory { earliest: s }),
                };
                if s < first.0 {
                    return Err(Error::InsufficientHistory { earliest: s });
                }
                if s >= last.0 {
                    return Ok(last.1);
                }
                let k = samples.partition_point(|(t, _)| *t <= s) - 1;
                let (t0, x0) = samples[k];
                let (t1, x1) = samples[k + 1];
                let th = (s - t0) / (t1 - t0);
                Ok(x0.axpby(1.0 - th, x1, th))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interpolation {
    Linear,
    CubicHermite,
}

/// Past states: the initial function before the first stored sample, stored
/// samples (with derivatives for Hermite interpolation) afterwards.
#[derive(Clone, Debug)]
pub struct History {
    phi: InitialFunction,
    times: Vec<f64>,
    states: Vec<StateVec>,
    derivs: Vec<StateVec>,
    order: Interpolation,
    step_hint: f64,
}

impl History {
    pub fn new(phi: InitialFunction, order: Interpolation) -> Self {
        History {
            phi,
            times: Vec::new(),
            states: Vec::new(),
            derivs: Vec::new(),
            order,
            step_hint: 1e-3,
        }
    }

    pub fn constant(x: StateVec) -> Self {
        History::new(InitialFunction::Constant(x), Interpolation::CubicHermite)
    }

    pub fn phi(&self) -> &InitialFunction {
        &self.phi
    }

    /// Quadrature resolution for standalone delayed-state evaluation.
    pub fn with_step_hint(mut self, h: f64) -> Self {
        self.step_hint = h;
        self
    }

    pub fn step_hint(&self) -> f64 {
        self.step_hint
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn latest(&self) -> Option<f64> {
        self.times.last().copied()
    }

    /// Appends a sample; times must strictly increase.
    pub fn push(&mut self, t: f64, x: StateVec, dx: StateVec) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::domain(format!("history times must increase: {t} after {last}")));
            }
        }
        self.times.push(t);
        self.states.push(x);
        self.derivs.push(dx);
        Ok(())
    }

    pub fn at(&self, s: f64) -> Result<StateVec> {
        let (Some(&first), Some(&last)) = (self.times.first(), self.times.last()) else {
            return self.phi.eval(s);
        };
        if s < first {
            return self.phi.eval(s);
        }
        if s > last + 1e-12 * last.abs().max(1.0) {
            return Err(Error::domain(format!("history queried at t = {s} beyond its end {last}")));
        }
        if s >= last {
            return Ok(*self.states.last().expect("nonempty"));
        }
        let k = self.times.partition_point(|&t| t <= s) - 1;
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let h = t1 - t0;
        let th = (s - t0) / h;
        let (y0, y1) = (self.states[k], self.states[k + 1]);
        Ok(match self.order {
            Interpolation::Linear => y0.axpby(1.0 - th, y1, th),
            Interpolation::CubicHermite => {
                let th2 = th * th;
                let th3 = th2 * th;
                let h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
                let h10 = th3 - 2.0 * th2 + th;
                let h01 = -2.0 * th3 + 3.0 * th2;
                let h11 = th3 - th2;
                y0 * h00 + self.derivs[k] * (h10 * h) + y1 * h01 + self.derivs[k + 1] * (h11 * h)
            }
        })
    }
}

/// `xt(t) = int_0^inf k(s) x(t - s) ds` from stored history.
pub fn delayed_state(hist: &History, k: &Kernel, t: f64) -> Result<StateVec> {
    let h = hist.step_hint();
    match *k {
        Kernel::Dirac { tau } => hist.at(t - tau),
        Kernel::Uniform { a, tau } => {
            let n = ((tau / h).ceil() as usize).max(2);
            let lo = t - a - tau;
            hist.at(lo)?;
            let sum = trapezoid(|u| hist.at(u).unwrap_or(StateVec([f64::NAN; 3])), lo, t - a, n);
            (sum * (1.0 / tau)).ensure_finite("uniform delayed state")
        }
        Kernel::Exponential { .. } | Kernel::Erlang { .. } => {
            let (_, smax) = k.support();
            hist.at(t - smax)?;
            let panels = ((smax / h).ceil() as usize).clamp(64, 200_000);
            let v = k.integrate(
                |s| hist.at(t - s).unwrap_or(StateVec([f64::NAN; 3])),
                panels,
                StateVec::ZERO,
            );
            v.ensure_finite("delayed state")
        }
    }
}

/// Output of a delay integration.
#[derive(Clone, Debug)]
pub struct DdeSolution {
    pub trajectory: Trajectory,
    /// The delayed state `xt(t_k)` seen by the field at every grid time.
    pub delayed: Vec<StateVec>,
    pub history: History,
}

fn monitor_series(monitors: &[QuadraticFn], states: &[StateVec], delayed: &[StateVec]) -> Vec<MonitorSeries> {
    monitors
        .iter()
        .map(|q| MonitorSeries {
            name: q.name().to_string(),
            values: states.iter().zip(delayed).map(|(x, xt)| q.value(x, xt)).collect(),
        })
        .collect()
}

fn integration_error(step: usize, e: Error) -> Error {
    match e {
        Error::Integration { .. } => e,
        other => Error::Integration {
            step,
            reason: other.to_string(),
        },
    }
}

/// Integrates `x' = F(x, xt)` with `x(s) = phi(s)` for `s <= 0` on `[0, t_end]`.
pub fn integrate_dde(
    field: &dyn DelayField,
    kernel: &Kernel,
    phi: InitialFunction,
    dt: f64,
    t_end: f64,
    monitors: &[QuadraticFn],
) -> Result<DdeSolution> {
    let kernel = kernel.validated()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!("dt must be positive, got {dt}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::domain(format!("t_end must be positive, got {t_end}")));
    }
    if let Kernel::Dirac { tau } = kernel {
        if dt > tau / 2.0 {
            return Err(Error::domain(format!("dt = {dt} too large for delay tau = {tau}; need dt <= tau/2")));
        }
    }
    let n = crate::dynamics::steps_for(t_end, dt);
    let x0 = phi.eval(0.0)?.ensure_finite("initial function at t = 0")?;
    let mut hist = History::new(phi.clone(), Interpolation::CubicHermite).with_step_hint(dt);
    let mut states = Vec::with_capacity(n + 1);
    let mut delayed = Vec::with_capacity(n + 1);

    match kernel {
        Kernel::Exponential { alpha } | Kernel::Erlang { alpha } => {
            let stages = if matches!(kernel, Kernel::Exponential { .. }) { 1 } else { 2 };
            chain_integrate(field, &kernel, alpha, stages, &phi, x0, dt, n, &mut hist, &mut states, &mut delayed)?;
        }
        Kernel::Dirac { .. } | Kernel::Uniform { .. } => {
            history_integrate(field, &kernel, x0, dt, n, &mut hist, &mut states, &mut delayed)?;
        }
    }

    let mons = monitor_series(monitors, &states, &delayed);
    let trajectory = Trajectory::new(0.0, dt, states, mons)?;
    Ok(DdeSolution {
        trajectory,
        delayed,
        history: hist,
    })
}

/// Initial chain values `y_j(0) = int (alpha s)^{j} alpha e^{-alpha s} / j! phi(-s) ds`.
fn chain_initial(phi: &InitialFunction, alpha: f64, stages: usize) -> Result<Vec<StateVec>> {
    let mut out = Vec::with_capacity(stages);
    for j in 0..stages {
        let kern = if j == 0 {
            Kernel::Exponential { alpha }
        } else {
            Kernel::Erlang { alpha }
        };
        let (_, smax) = kern.support();
        let panels = ((smax * alpha * 40.0).ceil() as usize).max(400);
        let failure = std::cell::RefCell::new(None);
        let v = kern.integrate(
            |s| match phi.eval(-s) {
                Ok(x) => x,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e.to_string());
                    StateVec([f64::NAN; 3])
                }
            },
            panels,
            StateVec::ZERO,
        );
        if !v.is_finite() {
            return Err(Error::Integration {
                step: 0,
                reason: format!(
                    "cannot initialize chain variables from the initial function{}",
                    failure.into_inner().map(|f| format!(": {f}")).unwrap_or_default()
                ),
            });
        }
        out.push(v);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn chain_integrate(
    field: &dyn DelayField,
    kernel: &Kernel,
    alpha: f64,
    stages: usize,
    phi: &InitialFunction,
    x0: StateVec,
    dt: f64,
    n: usize,
    hist: &mut History,
    states: &mut Vec<StateVec>,
    delayed: &mut Vec<StateVec>,
) -> Result<()> {
    let _ = kernel;
    // blocks: [x, y_1, .., y_stages]; xt = y_stages
    let mut y = vec![x0];
    y.extend(chain_initial(phi, alpha, stages)?);
    let rhs = |b: &[StateVec]| -> Vec<StateVec> {
        let xt = b[stages];
        let mut d = Vec::with_capacity(b.len());
        d.push(field.eval(&b[0], &xt));
        for j in 1..=stages {
            d.push((b[j - 1] - b[j]) * alpha);
        }
        d
    };
    let axpy = |b: &[StateVec], k: &[StateVec], h: f64| -> Vec<StateVec> {
        b.iter().zip(k).map(|(u, v)| u.axpby(1.0, *v, h)).collect()
    };
    for step in 0..=n {
        let k1 = rhs(&y);
        states.push(y[0]);
        delayed.push(y[stages]);
        hist.push(step as f64 * dt, y[0], k1[0])?;
        if step == n {
            break;
        }
        let k2 = rhs(&axpy(&y, &k1, 0.5 * dt));
        let k3 = rhs(&axpy(&y, &k2, 0.5 * dt));
        let k4 = rhs(&axpy(&y, &k3, dt));
        for (j, b) in y.iter_mut().enumerate() {
            *b += (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]) * (dt / 6.0);
        }
        if !y.iter().all(StateVec::is_finite) {
            return Err(Error::Integration {
                step: step + 1,
                reason: "state became non-finite".into(),
            });
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn history_integrate(
    field: &dyn DelayField,
    kernel: &Kernel,
    x0: StateVec,
    dt: f64,
    n: usize,
    hist: &mut History,
    states: &mut Vec<StateVec>,
    delayed: &mut Vec<StateVec>,
) -> Result<()> {
    let mut x = x0;
    for step in 0..=n {
        let t = step as f64 * dt;
        // xt at the grid point needs only the past (or x itself for a = 0)
        let xt0 = stage_delayed(hist, kernel, t, t, x, x, dt).map_err(|e| integration_error(step, e))?;
        let k1 = field.eval(&x, &xt0);
        states.push(x);
        delayed.push(xt0);
        hist.push(t, x, k1)?;
        if step == n {
            break;
        }
        let stage = |c: f64, xs: StateVec| -> Result<StateVec> {
            let xt = stage_delayed(hist, kernel, t, t + c * dt, x, xs, dt).map_err(|e| integration_error(step + 1, e))?;
            Ok(field.eval(&xs, &xt))
        };
        let k2 = stage(0.5, x.axpby(1.0, k1, 0.5 * dt))?;
        let k3 = stage(0.5, x.axpby(1.0, k2, 0.5 * dt))?;
        let k4 = stage(1.0, x.axpby(1.0, k3, dt))?;
        x += (k1 + 2.0 * (k2 + k3) + k4) * (dt / 6.0);
        if !x.is_finite() {
            return Err(Error::Integration {
                step: step + 1,
                reason: "state became non-finite".into(),
            });
        }
    }
    Ok(())
}

/// Delayed state at a stage time `ts >= tn`, where history is known up to
/// `tn` and the stage value `xs` stands in for `x(ts)`.
fn stage_delayed(
    hist: &History,
    kernel: &Kernel,
    tn: f64,
    ts: f64,
    xn: StateVec,
    xs: StateVec,
    dt: f64,
) -> Result<StateVec> {
    let lookup = |u: f64| -> Result<StateVec> {
        if u <= tn || ts <= tn {
            if (hist.is_empty() && u >= 0.0) || hist.latest().is_some_and(|l| u > l) {
                Ok(xn)
            } else {
                hist.at(u)
            }
        } else {
            let th = ((u - tn) / (ts - tn)).clamp(0.0, 1.0);
            Ok(xn.axpby(1.0 - th, xs, th))
        }
    };
    match *kernel {
        Kernel::Dirac { tau } => lookup(ts - tau),
        Kernel::Uniform { a, tau } => {
            let panels = ((tau / dt).ceil() as usize).max(2);
            let lo = ts - a - tau;
            let hi = ts - a;
            let h = (hi - lo) / panels as f64;
            let mut acc = (lookup(lo)? + lookup(hi)?) * 0.5;
            for k in 1..panels {
                acc += lookup(lo + k as f64 * h)?;
            }
            Ok(acc * (h / tau))
        }
        _ => unreachable!("chain kernels are integrated separately"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate_rk4, Rabinovich};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn densities() {
        let u = Kernel::uniform(1.0, 2.0).unwrap();
        assert_eq!(u.density(1.5).unwrap(), 0.5);
        assert_eq!(u.density(0.5).unwrap(), 0.0);
        assert_eq!(u.density(4.0).unwrap(), 0.0);
        assert_eq!(Kernel::exponential(2.0).unwrap().density(0.0).unwrap(), 2.0);
        let e = Kernel::erlang(1.0).unwrap().density(1.0).unwrap();
        assert!((e - (-1.0f64).exp()).abs() < 1e-16);
        assert!(matches!(Kernel::dirac(1.0).unwrap().density(1.0), Err(Error::DiracDensity)));
        assert!(u.density(-1.0).is_err());
    }

    #[test]
    fn kernel_validation() {
        assert!(Kernel::uniform(-1.0, 1.0).is_err());
        assert!(Kernel::uniform(0.0, 0.0).is_err());
        assert!(Kernel::exponential(0.0).is_err());
        assert!(Kernel::erlang(-2.0).is_err());
        assert!(Kernel::dirac(0.0).is_err());
    }

    #[test]
    fn laplace_examples() {
        let tau = 0.7;
        let lam = Complex64::new(0.3, -1.1);
        let d = Kernel::dirac(tau).unwrap().laplace(lam).unwrap();
        assert!((d - (-lam * tau).exp()).norm() < 1e-15);
        for k in [
            Kernel::dirac(1.0).unwrap(),
            Kernel::uniform(0.5, 2.0).unwrap(),
            Kernel::exponential(3.0).unwrap(),
            Kernel::erlang(3.0).unwrap(),
        ] {
            assert_eq!(k.laplace(c(0.0)).unwrap(), c(1.0));
        }
        assert_eq!(Kernel::exponential(2.0).unwrap().laplace(c(2.0)).unwrap(), c(0.5));
        assert!(matches!(
            Kernel::exponential(2.0).unwrap().laplace(c(-2.5)),
            Err(Error::LaplaceDivergent { .. })
        ));
    }

    #[test]
    fn uniform_laplace_is_continuous_at_the_series_switch() {
        let k = Kernel::uniform(0.2, 1.0).unwrap();
        let below = k.laplace(c(0.999e-3)).unwrap();
        let above = k.laplace(c(1.001e-3)).unwrap();
        assert!((below - above).norm() < 1e-5);
        let tiny = k.laplace(c(1e-9)).unwrap();
        assert!((tiny - c(1.0)).norm() < 1e-8);
    }

    #[test]
    fn blend_weights() {
        assert!(BlendWeights::new([0.5, 0.5, 0.1, 0.0], [1.0, 0.0, 0.0, 0.0]).is_err());
        assert!(BlendWeights::new([1.5, -0.5, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]).is_err());
        let w = BlendWeights::new([0.1, 0.2, 0.3, 0.4], [0.4, 0.3, 0.2, 0.1]).unwrap();
        let a = w.alphas();
        let b = w.betas();
        assert!((a[0] + a[4] - 1.0).abs() < 1e-15);
        assert!((a[1] + a[3] - 1.0).abs() < 1e-15);
        assert!((b[0] + b[3] - 1.0).abs() < 1e-15);
        assert!((b[1] + b[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn delayed_state_examples() {
        let x0 = StateVec::new(1.0, -2.0, 0.5);
        let hist = History::constant(x0);
        for k in [
            Kernel::dirac(0.4).unwrap(),
            Kernel::uniform(0.1, 0.5).unwrap(),
            Kernel::exponential(2.0).unwrap(),
            Kernel::erlang(2.0).unwrap(),
        ] {
            let v = delayed_state(&hist, &k, 0.0).unwrap();
            assert!((v - x0).sup_norm() < 1e-9, "{k:?}: {v}");
        }
        let ramp = History::new(
            InitialFunction::closure(|s| StateVec::new(s, 0.0, 0.0)),
            Interpolation::CubicHermite,
        );
        let v = delayed_state(&ramp, &Kernel::dirac(1.0).unwrap(), 0.0).unwrap();
        assert_eq!(v, StateVec::new(-1.0, 0.0, 0.0));
        let expo = History::new(
            InitialFunction::closure(|s| StateVec::new(s.exp(), 0.0, 0.0)),
            Interpolation::CubicHermite,
        );
        for alpha in [0.5, 2.0, 7.0] {
            let v = delayed_state(&expo, &Kernel::exponential(alpha).unwrap(), 0.0).unwrap();
            assert!((v.x1() - alpha / (alpha + 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn sampled_history_reports_earliest_time() {
        let phi = InitialFunction::Sampled(vec![(-1.0, StateVec::ZERO), (0.0, StateVec::new(1.0, 0.0, 0.0))]);
        let hist = History::new(phi, Interpolation::Linear);
        assert_eq!(hist.at(-0.5).unwrap(), StateVec::new(0.5, 0.0, 0.0));
        match delayed_state(&hist, &Kernel::dirac(2.0).unwrap(), 0.0) {
            Err(Error::InsufficientHistory { earliest }) => assert_eq!(earliest, -2.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn history_rejects_non_increasing_times() {
        let mut h = History::constant(StateVec::ZERO);
        h.push(0.0, StateVec::ZERO, StateVec::ZERO).unwrap();
        assert!(h.push(0.0, StateVec::ZERO, StateVec::ZERO).is_err());
        assert!(h.at(1.0).is_err());
    }

    #[test]
    fn undelayed_blend_is_classical() {
        let w = BlendWeights::undelayed();
        let x = StateVec::new(1.0, 2.0, 3.0);
        let xt = StateVec::new(-4.0, 0.5, 9.0);
        assert_eq!(delay_hamiltonian_field(&x, &xt, &w), Rabinovich.eval(&x));
        assert_eq!(revised_delay_field(&x, &xt, &w, RevisedMode::Constructed), Rabinovich.eval(&x));
        assert_ne!(revised_delay_field(&x, &xt, &w, RevisedMode::Literal), Rabinovich.eval(&x));
    }

    #[test]
    fn expanded_form_matches_construction() {
        let w = BlendWeights::new([0.1, 0.2, 0.3, 0.4], [0.25, 0.15, 0.5, 0.1]).unwrap();
        let x = StateVec::new(0.3, -1.2, 2.0);
        let xt = StateVec::new(1.1, 0.4, -0.7);
        let a = delay_hamiltonian_field(&x, &xt, &w);
        let b = delay_hamiltonian_expanded(&x, &xt, &w);
        assert!((a - b).sup_norm() < 1e-15);
        // with xt = x the blend collapses to the classical field
        let same = delay_hamiltonian_field(&x, &x, &w);
        assert!((same - Rabinovich.eval(&x)).sup_norm() < 1e-15);
    }

    #[test]
    fn polynomial_forms_match_evaluation() {
        let w = BlendWeights::new([0.1, 0.2, 0.3, 0.4], [0.25, 0.15, 0.5, 0.1]).unwrap();
        let x = StateVec::new(0.3, -1.2, 2.0);
        let xt = StateVec::new(1.1, 0.4, -0.7);
        let z = poly::point(&x, &xt);
        let fields: [&dyn DelayField; 3] = [
            &DelayHamiltonian::new(w),
            &RevisedDelay::new(w, RevisedMode::Constructed),
            &RevisedDelay::new(w, RevisedMode::Literal),
        ];
        for f in fields {
            let p = f.polynomial().unwrap();
            let pv = StateVec(std::array::from_fn(|i| p[i].eval(&z)));
            assert!((pv - f.eval(&x, &xt)).sup_norm() < 1e-14, "{}", f.name());
        }
    }

    #[test]
    fn equilibria_of_both_legs() {
        let w = BlendWeights::new([0.1, 0.2, 0.3, 0.4], [0.25, 0.15, 0.5, 0.1]).unwrap();
        let e = StateVec::new(0.0, 0.0, 1.3);
        assert_eq!(revised_delay_field(&e, &e, &w, RevisedMode::Constructed), StateVec::ZERO);
        let e = StateVec::new(0.0, 0.0, 0.0);
        assert_eq!(revised_delay_field(&e, &e, &w, RevisedMode::Literal), StateVec::ZERO);
    }

    #[test]
    fn constant_history_at_equilibrium_stays_put() {
        let w = BlendWeights::new([0.1, 0.2, 0.3, 0.4], [0.25, 0.15, 0.5, 0.1]).unwrap();
        let f = DelayHamiltonian::new(w);
        let e = StateVec::new(1.4, 0.0, 0.0);
        for k in [
            Kernel::dirac(0.05).unwrap(),
            Kernel::uniform(0.0, 0.05).unwrap(),
            Kernel::exponential(5.0).unwrap(),
            Kernel::erlang(5.0).unwrap(),
        ] {
            let sol = integrate_dde(&f, &k, InitialFunction::Constant(e), 0.01, 1.0, &[]).unwrap();
            assert!(sol.trajectory.states.iter().all(|x| (*x - e).sup_norm() < 1e-14), "{k:?}");
        }
    }

    #[test]
    fn dirac_with_ignored_delay_is_plain_rk4() {
        let x0 = StateVec::new(1.0, 2.0, 3.0);
        let sol = integrate_dde(
            &Undelayed(Rabinovich),
            &Kernel::dirac(0.5).unwrap(),
            InitialFunction::Constant(x0),
            1e-3,
            2.0,
            &[],
        )
        .unwrap();
        let plain = integrate_rk4(&Rabinovich, x0, 1e-3, 2000, &[]).unwrap();
        assert!(sol.trajectory.sup_distance(&plain) < 1e-10);
    }

    #[test]
    fn dirac_needs_resolved_lag() {
        let r = integrate_dde(
            &Undelayed(Rabinovich),
            &Kernel::dirac(0.01).unwrap(),
            InitialFunction::Constant(StateVec::ZERO),
            0.01,
            1.0,
            &[],
        );
        assert!(r.is_err());
    }

    #[test]
    fn unbounded_initial_function_is_rejected() {
        let phi = InitialFunction::closure(|s| StateVec::new((-s).exp().powi(40), 0.0, 0.0));
        let r = integrate_dde(
            &Undelayed(Rabinovich),
            &Kernel::exponential(0.5).unwrap(),
            phi,
            1e-2,
            1.0,
            &[],
        );
        assert!(matches!(r, Err(Error::Integration { step: 0, .. })), "{r:?}");
    }

    #[test]
    fn linear_scalar_dde_against_method_of_steps() {
        // x' = -x(t - 1), x = 1 on [-1, 0]: x(t) = 1 - t on [0, 1],
        // x(t) = 1 - t + (t - 1)^2 / 2 on [1, 2].
        let f = FnDelayField::new("lin", |_x: &StateVec, xt: &StateVec| -*xt);
        let sol = integrate_dde(
            &f,
            &Kernel::dirac(1.0).unwrap(),
            InitialFunction::Constant(StateVec::new(1.0, 0.0, 0.0)),
            1e-2,
            2.0,
            &[],
        )
        .unwrap();
        for (k, x) in sol.trajectory.states.iter().enumerate() {
            let t = sol.trajectory.time(k);
            let exact = if t <= 1.0 { 1.0 - t } else { 1.0 - t + (t - 1.0).powi(2) / 2.0 };
            assert!((x.x1() - exact).abs() < 1e-10, "t={t}");
        }
    }
}
