//! The classical Rabinovich flow `x1' = x2 x3, x2' = -x1 x3, x3' = x1 x2`,
//! its equilibrium families, Jacobians, a fixed-step RK4 integrator, the
//! closed-form heteroclinic connections and a small-oscillation period probe.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poisson::QuadraticFn;
use crate::poly::{Poly, NVARS};
use crate::state::{Mat3, StateVec};

/// Default step for every fixed-step integrator in the crate.
pub const DEFAULT_DT: f64 = 1e-3;

/// An autonomous vector field on R^3.
pub trait VectorField: Sync {
    fn name(&self) -> &str;

    fn eval(&self, x: &StateVec) -> StateVec;

    /// Exact partial derivatives, when the field knows them.
    fn analytic_jacobian(&self, _x: &StateVec) -> Option<Mat3> {
        None
    }
}

impl<T: VectorField + ?Sized> VectorField for &T {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn eval(&self, x: &StateVec) -> StateVec {
        (**self).eval(x)
    }
    fn analytic_jacobian(&self, x: &StateVec) -> Option<Mat3> {
        (**self).analytic_jacobian(x)
    }
}

impl<T: VectorField + ?Sized> VectorField for Box<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn eval(&self, x: &StateVec) -> StateVec {
        (**self).eval(x)
    }
    fn analytic_jacobian(&self, x: &StateVec) -> Option<Mat3> {
        (**self).analytic_jacobian(x)
    }
}

/// The classical Rabinovich system.
#[derive(Clone, Copy, Debug, Default)]
pub struct Rabinovich;

impl VectorField for Rabinovich {
    fn name(&self) -> &str {
        "rabinovich"
    }

    fn eval(&self, x: &StateVec) -> StateVec {
        let [x1, x2, x3] = x.0;
        StateVec::new(x2 * x3, -x1 * x3, x1 * x2)
    }

    fn analytic_jacobian(&self, x: &StateVec) -> Option<Mat3> {
        let [x1, x2, x3] = x.0;
        #[rustfmt::skip]
        let j = Mat3::new(
            0.0, x3, x2,
            -x3, 0.0, -x1,
            x2, x1, 0.0,
        );
        Some(j)
    }
}

/// Checked evaluation of the classical field.
pub fn rabinovich_field(x: &StateVec) -> Result<StateVec> {
    let x = x.ensure_finite("rabinovich_field input")?;
    Ok(Rabinovich.eval(&x))
}

/// Wraps a closure as a vector field without analytic derivatives.
pub struct FnField<F> {
    name: String,
    f: F,
}

impl<F: Fn(&StateVec) -> StateVec + Sync> FnField<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnField { name: name.into(), f }
    }
}

impl<F: Fn(&StateVec) -> StateVec + Sync> VectorField for FnField<F> {
    fn name(&self) -> &str {
        &self.name
    }
    fn eval(&self, x: &StateVec) -> StateVec {
        (self.f)(x)
    }
}

/// A polynomial vector field in the current coordinates; the Jacobian is
/// obtained by symbolic differentiation.
#[derive(Clone, Debug)]
pub struct PolyField {
    name: String,
    components: [Poly; 3],
    jacobian: [[Poly; 3]; 3],
}

impl PolyField {
    pub fn new(name: impl Into<String>, components: [Poly; 3]) -> Result<Self> {
        if components.iter().any(Poly::uses_delayed) {
            return Err(Error::domain("PolyField components must not use delayed coordinates"));
        }
        let jacobian = std::array::from_fn(|i| std::array::from_fn(|j| components[i].partial(j)));
        Ok(PolyField {
            name: name.into(),
            components,
            jacobian,
        })
    }

    pub fn components(&self) -> &[Poly; 3] {
        &self.components
    }
}

fn lift(x: &StateVec) -> [f64; NVARS] {
    [x[0], x[1], x[2], 0.0, 0.0, 0.0]
}

impl VectorField for PolyField {
    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, x: &StateVec) -> StateVec {
        let z = lift(x);
        StateVec(std::array::from_fn(|i| self.components[i].eval(&z)))
    }

    fn analytic_jacobian(&self, x: &StateVec) -> Option<Mat3> {
        let z = lift(x);
        Some(Mat3::from_fn(|i, j| self.jacobian[i][j].eval(&z)))
    }
}

/// The three one-parameter equilibrium families of the classical system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    E1,
    E2,
    E3,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::E1, Family::E2, Family::E3];

    pub fn axis(self) -> usize {
        match self {
            Family::E1 => 0,
            Family::E2 => 1,
            Family::E3 => 2,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Family::E1 => "E1",
            Family::E2 => "E2",
            Family::E3 => "E3",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumFamily {
    pub family: Family,
    pub m: f64,
}

impl EquilibriumFamily {
    pub fn new(family: Family, m: f64) -> Self {
        EquilibriumFamily { family, m }
    }
}

/// E1 -> (m,0,0), E2 -> (0,m,0), E3 -> (0,0,m).
pub fn equilibrium_point(fam: EquilibriumFamily) -> StateVec {
    let mut x = StateVec::ZERO;
    x[fam.family.axis()] = fam.m;
    x
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JacobianMode {
    Analytic,
    FiniteDifference,
}

/// Default central-difference step at `x`.
pub fn fd_step(x: &StateVec) -> f64 {
    1e-6 * x.norm().max(1.0)
}

pub fn jacobian(field: &dyn VectorField, x: &StateVec, mode: JacobianMode) -> Result<Mat3> {
    let x = x.ensure_finite("jacobian point")?;
    let jac = match mode {
        JacobianMode::Analytic => field
            .analytic_jacobian(&x)
            .ok_or_else(|| Error::NoAnalyticJacobian(field.name().to_string()))?,
        JacobianMode::FiniteDifference => fd_jacobian(|p| field.eval(p), &x, fd_step(&x)),
    };
    if jac.iter().all(|v| v.is_finite()) {
        Ok(jac)
    } else {
        Err(Error::NonFinite("jacobian"))
    }
}

/// Central-difference Jacobian of an arbitrary map.
pub fn fd_jacobian(f: impl Fn(&StateVec) -> StateVec, x: &StateVec, h: f64) -> Mat3 {
    let mut jac = Mat3::zeros();
    for j in 0..3 {
        let mut xp = *x;
        let mut xm = *x;
        xp[j] += h;
        xm[j] -= h;
        let d = (f(&xp) - f(&xm)) * (0.5 / h);
        for i in 0..3 {
            jac[(i, j)] = d[i];
        }
    }
    jac
}

/// A named scalar series sampled alongside the states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorSeries {
    pub name: String,
    pub values: Vec<f64>,
}

/// A fixed-step trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t0: f64,
    pub dt: f64,
    pub states: Vec<StateVec>,
    pub monitors: Vec<MonitorSeries>,
}

impl Trajectory {
    pub fn new(t0: f64, dt: f64, states: Vec<StateVec>, monitors: Vec<MonitorSeries>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::domain(format!("dt must be positive, got {dt}")));
        }
        if states.is_empty() {
            return Err(Error::domain("trajectory needs at least one state"));
        }
        if let Some(bad) = monitors.iter().find(|m| m.values.len() != states.len()) {
            return Err(Error::domain(format!(
                "monitor `{}` has {} samples for {} states",
                bad.name,
                bad.values.len(),
                states.len()
            )));
        }
        Ok(Trajectory {
            t0,
            dt,
            states,
            monitors,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn last(&self) -> &StateVec {
        self.states.last().expect("trajectory is nonempty")
    }

    pub fn monitor(&self, name: &str) -> Option<&[f64]> {
        self.monitors
            .iter()
            .find(|m| m.name == name)
            .map(|m| m.values.as_slice())
    }

    /// `max_k |v_k - v_0| / max(|v_0|, tiny)` for a monitor.
    pub fn relative_drift(&self, name: &str) -> Option<f64> {
        self.monitor(name).map(relative_drift)
    }

    /// Sup-norm distance between two trajectories on their common prefix.
    pub fn sup_distance(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| (*a - *b).sup_norm())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.states.iter().map(StateVec::sup_norm).fold(0.0, f64::max)
    }
}

pub fn relative_drift(values: &[f64]) -> f64 {
    let Some(&v0) = values.first() else {
        return 0.0;
    };
    let scale = v0.abs().max(f64::MIN_POSITIVE);
    values.iter().map(|v| (v - v0).abs()).fold(0.0, f64::max) / scale
}

/// One classical RK4 step.
pub fn rk4_step(field: &dyn VectorField, x: &StateVec, dt: f64) -> StateVec {
    let k1 = field.eval(x);
    let k2 = field.eval(&x.axpby(1.0, k1, 0.5 * dt));
    let k3 = field.eval(&x.axpby(1.0, k2, 0.5 * dt));
    let k4 = field.eval(&x.axpby(1.0, k3, dt));
    *x + (k1 + 2.0 * (k2 + k3) + k4) * (dt / 6.0)
}

fn monitor_series(monitors: &[QuadraticFn], states: &[StateVec]) -> Vec<MonitorSeries> {
    monitors
        .iter()
        .map(|q| MonitorSeries {
            name: q.name().to_string(),
            values: states.iter().map(|x| q.value(x, x)).collect(),
        })
        .collect()
}

/// Fixed-step fourth-order Runge-Kutta. Returns `n_steps + 1` states; monitors
/// are evaluated with the delayed argument equal to the current state.
pub fn integrate_rk4(
    field: &dyn VectorField,
    x0: StateVec,
    dt: f64,
    n_steps: usize,
    monitors: &[QuadraticFn],
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!("dt must be positive, got {dt}")));
    }
    if n_steps == 0 {
        return Err(Error::domain("n_steps must be at least 1"));
    }
    let x0 = x0.ensure_finite("initial state")?;
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(x0);
    let mut x = x0;
    for step in 1..=n_steps {
        x = rk4_step(field, &x, dt);
        if !x.is_finite() {
            return Err(Error::Integration {
                step,
                reason: "state became non-finite".into(),
            });
        }
        states.push(x);
    }
    let monitors = monitor_series(monitors, &states);
    Trajectory::new(0.0, dt, states, monitors)
}

/// Number of steps covering `[0, t_end]` at step `dt`.
pub fn steps_for(t_end: f64, dt: f64) -> usize {
    (t_end / dt).round().max(1.0) as usize
}

fn sech(v: f64) -> f64 {
    1.0 / v.cosh()
}

/// Sign triples `(s1, s2, s3)` for which `(s1 m sech(mt), s2 m tanh(mt),
/// s3 m sech(mt))` solves the classical system.
///
/// Substituting gives, with `S = sech(mt)` and `T = tanh(mt)`,
/// `x' = m^2 (-s1 S T, s2 S^2, -s3 S T)` against the field
/// `m^2 (s2 s3 T S, -s1 s3 S^2, s1 s2 S T)`; the triple is valid when the
/// three coefficient pairs match.
pub fn heteroclinic_sign_triples() -> &'static [[i8; 3]] {
    static VALID: OnceLock<Vec<[i8; 3]>> = OnceLock::new();
    VALID.get_or_init(|| {
        let mut out = Vec::new();
        for bits in 0..8u8 {
            let s: [i8; 3] = std::array::from_fn(|i| if bits >> (2 - i) & 1 == 1 { -1 } else { 1 });
            let [s1, s2, s3] = s;
            let lhs = [-s1, s2, -s3];
            let rhs = [s2 * s3, -s1 * s3, s1 * s2];
            if lhs == rhs {
                out.push(s);
            }
        }
        out
    })
}

/// Closed-form heteroclinic orbit between `(0, -m, 0)` and `(0, m, 0)`.
pub fn heteroclinic_orbit(m: f64, signs: [i8; 3], t: f64) -> Result<StateVec> {
    if m == 0.0 || !m.is_finite() {
        return Err(Error::domain(format!("heteroclinic orbit needs finite m != 0, got {m}")));
    }
    let valid = heteroclinic_sign_triples();
    if !valid.contains(&signs) {
        return Err(Error::InvalidSigns {
            given: signs,
            valid: valid.to_vec(),
        });
    }
    let s = sech(m * t);
    let th = (m * t).tanh();
    let [s1, s2, s3] = signs.map(f64::from);
    Ok(StateVec::new(s1 * m * s, s2 * m * th, s3 * m * s))
}

/// Time derivative of the closed-form orbit, used to form ODE residuals.
pub fn heteroclinic_velocity(m: f64, signs: [i8; 3], t: f64) -> Result<StateVec> {
    heteroclinic_orbit(m, signs, t)?;
    let s = sech(m * t);
    let th = (m * t).tanh();
    let [s1, s2, s3] = signs.map(f64::from);
    let m2 = m * m;
    Ok(StateVec::new(-s1 * m2 * s * th, s2 * m2 * s * s, -s3 * m2 * s * th))
}

/// Dominant period of `x3(t)` from upward zero crossings, linearly
/// interpolated between RK4 samples.
pub fn measure_period(x0: StateVec, dt: f64, t_end: f64) -> Result<f64> {
    let traj = integrate_rk4(&Rabinovich, x0, dt, steps_for(t_end, dt), &[])?;
    let mut crossings = Vec::new();
    for (k, w) in traj.states.windows(2).enumerate() {
        let (a, b) = (w[0].x3(), w[1].x3());
        if a < 0.0 && b >= 0.0 {
            let frac = a / (a - b);
            crossings.push(traj.time(k) + frac * dt);
        }
    }
    if crossings.len() < 2 {
        return Err(Error::NoOscillation(t_end));
    }
    let n = crossings.len() - 1;
    Ok((crossings[n] - crossings[0]) / n as f64)
}

/// Measured small-oscillation period against the linearized prediction
/// `2 pi/|m|` and the printed claim `pi/|m|`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PeriodComparison {
    pub m: f64,
    pub measured: f64,
    pub linearized: f64,
    pub printed_claim: f64,
}

impl PeriodComparison {
    pub fn new(m: f64, measured: f64) -> Self {
        PeriodComparison {
            m,
            measured,
            linearized: 2.0 * PI / m.abs(),
            printed_claim: PI / m.abs(),
        }
    }

    pub fn relative_error_to_linearized(&self) -> f64 {
        (self.measured - self.linearized).abs() / self.linearized
    }

    /// Measured period divided by the printed `pi/|m|`; close to 2.
    pub fn factor_over_printed(&self) -> f64 {
        self.measured / self.printed_claim
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_examples() {
        assert_eq!(rabinovich_field(&StateVec::ZERO).unwrap(), StateVec::ZERO);
        assert_eq!(
            rabinovich_field(&StateVec::new(1.0, 2.0, 3.0)).unwrap(),
            StateVec::new(6.0, -3.0, 2.0)
        );
        for m in [-3.0, 0.5, 7.0] {
            assert_eq!(rabinovich_field(&StateVec::new(m, 0.0, 0.0)).unwrap(), StateVec::ZERO);
        }
        assert!(matches!(
            rabinovich_field(&StateVec::new(f64::NAN, 0.0, 0.0)),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn equilibrium_examples() {
        assert_eq!(
            equilibrium_point(EquilibriumFamily::new(Family::E1, 2.0)),
            StateVec::new(2.0, 0.0, 0.0)
        );
        assert_eq!(
            equilibrium_point(EquilibriumFamily::new(Family::E2, -1.0)),
            StateVec::new(0.0, -1.0, 0.0)
        );
        assert_eq!(equilibrium_point(EquilibriumFamily::new(Family::E3, 0.0)), StateVec::ZERO);
        for fam in Family::ALL {
            let p = equilibrium_point(EquilibriumFamily::new(fam, 1.7));
            assert_eq!(Rabinovich.eval(&p), StateVec::ZERO);
        }
    }

    #[test]
    fn jacobian_by_hand() {
        let m = 1.5;
        let j = jacobian(&Rabinovich, &StateVec::new(0.0, m, 0.0), JacobianMode::Analytic).unwrap();
        assert_eq!(j, Mat3::new(0.0, 0.0, m, 0.0, 0.0, 0.0, m, 0.0, 0.0));
        let j = jacobian(&Rabinovich, &StateVec::new(0.0, 0.0, m), JacobianMode::Analytic).unwrap();
        assert_eq!(j, Mat3::new(0.0, m, 0.0, -m, 0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn closure_field_has_no_analytic_jacobian() {
        let f = FnField::new("custom", |x: &StateVec| *x);
        let err = jacobian(&f, &StateVec::ZERO, JacobianMode::Analytic).unwrap_err();
        assert!(matches!(err, Error::NoAnalyticJacobian(_)));
        let j = jacobian(&f, &StateVec::new(1.0, 2.0, 3.0), JacobianMode::FiniteDifference).unwrap();
        assert!(crate::state::max_abs_diff(&j, &Mat3::identity()) < 1e-9);
    }

    #[test]
    fn poly_field_matches_hand_coded() {
        let (x1, x2, x3) = (Poly::var(0), Poly::var(1), Poly::var(2));
        let pf = PolyField::new("rab", [&x2 * &x3, -(&x1 * &x3), &x1 * &x2]).unwrap();
        let p = StateVec::new(0.3, -1.2, 2.5);
        assert_eq!(pf.eval(&p), Rabinovich.eval(&p));
        assert_eq!(pf.analytic_jacobian(&p), Rabinovich.analytic_jacobian(&p));
        assert!(PolyField::new("bad", [Poly::var(3), Poly::zero(), Poly::zero()]).is_err());
    }

    #[test]
    fn rk4_equilibrium_is_constant() {
        let x0 = StateVec::new(1.3, 0.0, 0.0);
        let tr = integrate_rk4(&Rabinovich, x0, 0.01, 500, &[]).unwrap();
        assert!(tr.states.iter().all(|x| *x == x0));
        assert_eq!(tr.len(), 501);
    }

    #[test]
    fn rk4_rejects_bad_inputs_and_reports_step() {
        assert!(integrate_rk4(&Rabinovich, StateVec::ZERO, 0.0, 10, &[]).is_err());
        assert!(integrate_rk4(&Rabinovich, StateVec::ZERO, 0.1, 0, &[]).is_err());
        let blowup = FnField::new("blowup", |x: &StateVec| *x * 1e200);
        match integrate_rk4(&blowup, StateVec::new(1.0, 1.0, 1.0), 1.0, 10, &[]) {
            Err(Error::Integration { step, .. }) => assert!(step >= 1),
            other => panic!("expected integration error, got {other:?}"),
        }
    }

    #[test]
    fn sign_triples_are_the_negative_product_ones() {
        let valid = heteroclinic_sign_triples();
        assert_eq!(valid.len(), 4);
        for s in valid {
            assert_eq!(s[0] * s[1] * s[2], -1);
        }
        assert!(!valid.contains(&[1, 1, 1]));
    }

    #[test]
    fn heteroclinic_errors() {
        assert!(heteroclinic_orbit(0.0, [1, 1, -1], 0.0).is_err());
        match heteroclinic_orbit(1.0, [1, 1, 1], 0.0) {
            Err(Error::InvalidSigns { valid, .. }) => assert_eq!(valid.len(), 4),
            other => panic!("expected InvalidSigns, got {other:?}"),
        }
    }

    #[test]
    fn heteroclinic_at_zero_lies_on_plane() {
        for s in heteroclinic_sign_triples() {
            let p = heteroclinic_orbit(1.0, *s, 0.0).unwrap();
            assert_eq!(p.x2(), 0.0);
            assert_eq!(p.x1().abs(), 1.0);
            assert_eq!(p.x3().abs(), p.x1().abs());
        }
    }

    #[test]
    fn heteroclinic_asymptotics() {
        for s in heteroclinic_sign_triples() {
            for t in [-30.0, 30.0] {
                let p = heteroclinic_orbit(1.0, *s, t).unwrap();
                let target = StateVec::new(0.0, f64::from(s[1]) * t.signum(), 0.0);
                assert!((p - target).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn period_needs_oscillation() {
        assert!(matches!(
            measure_period(StateVec::new(1.0, 0.0, 0.0), 1e-2, 20.0),
            Err(Error::NoOscillation(_))
        ));
    }

    #[test]
    fn trajectory_invariants() {
        let s = vec![StateVec::ZERO; 3];
        let bad = vec![MonitorSeries {
            name: "h1".into(),
            values: vec![0.0; 2],
        }];
        assert!(Trajectory::new(0.0, 0.1, s.clone(), bad).is_err());
        assert!(Trajectory::new(0.0, -0.1, s.clone(), vec![]).is_err());
        assert!(Trajectory::new(0.0, 0.1, vec![], vec![]).is_err());
        assert!(Trajectory::new(0.0, 0.1, s, vec![]).is_ok());
    }
}
