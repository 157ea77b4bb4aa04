//! Caputo fractional systems and the Adams-Bashforth-Moulton scheme.
//!
//! `D^alpha x = F(x)` with `0 < alpha <= 1` is solved in its Volterra form
//! `x(t) = x(0) + I^alpha F(x)(t)`. Each step predicts with the product
//! rectangle weights `b` and corrects once with the product trapezoid weights
//! `a` (PECE). The full memory is kept, so a run of `n` steps costs `O(n^2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::delay::{BlendWeights, DelayField, InitialFunction, RevisedDelay, RevisedMode};
use crate::dynamics::{Family, MonitorSeries, Trajectory, VectorField};
use crate::error::{Error, Result};
use crate::poisson::QuadraticFn;
use crate::state::StateVec;

/// `Gamma(x)`.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Fractional order in `(0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(FracOrder(alpha))
        } else {
            Err(Error::domain(format!("fractional order must lie in (0, 1], got {alpha}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `(x + 1)^p - x^p` without cancellation for large `x`.
fn first_difference(x: f64, p: f64) -> f64 {
    if x == 0.0 || p == 1.0 {
        1.0
    } else {
        x.powf(p) * (p * (1.0 / x).ln_1p()).exp_m1()
    }
}

/// `(x + 2)^p + x^p - 2 (x + 1)^p`. For large `x` the difference is written as
/// `int_0^2 p (p - 1) (x + v)^(p - 2) min(v, 2 - v) dv`, which has no
/// cancellation and is integrated to rounding accuracy by Gauss-Legendre.
fn second_difference(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        2.0
    } else if x < 64.0 {
        (x + 2.0).powf(p) + x.powf(p) - 2.0 * (x + 1.0).powf(p)
    } else {
        let g = |v: f64| (x + v).powf(p - 2.0);
        let left = crate::quad::gauss_legendre(|v| g(v) * v, 0.0, 1.0, 1, 0.0);
        let right = crate::quad::gauss_legendre(|v| g(v) * (2.0 - v), 1.0, 2.0, 1, 0.0);
        p * (p - 1.0) * (left + right)
    }
}

/// Predictor and corrector weights for a fixed order and step.
///
/// Both families depend on `(i, j)` only through the lag `j - i`, apart from
/// the first corrector weight; rows are served from lag tables.
#[derive(Clone, Debug)]
pub struct AbmWeights {
    alpha: f64,
    dt: f64,
    h_alpha: f64,
    b_lag: Vec<f64>,
    a_lag: Vec<f64>,
}

impl AbmWeights {
    pub fn new(alpha: FracOrder, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::domain(format!("dt must be positive, got {dt}")));
        }
        let a = alpha.value();
        Ok(AbmWeights {
            alpha: a,
            dt,
            h_alpha: dt.powf(a),
            b_lag: Vec::new(),
            a_lag: Vec::new(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Extends the lag tables to cover lags `0..=max_lag`.
    pub fn reserve(&mut self, max_lag: usize) {
        let (a, ha) = (self.alpha, self.h_alpha);
        let c_b = ha / a;
        let c_a = ha / (a * (a + 1.0));
        for d in self.b_lag.len()..=max_lag {
            self.b_lag.push(c_b * first_difference(d as f64, a));
        }
        for d in self.a_lag.len()..=max_lag {
            self.a_lag.push(c_a * second_difference(d as f64, a + 1.0));
        }
    }

    /// `b(i, j+1)` for `0 <= i <= j`.
    pub fn b(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i <= j);
        let d = j - i;
        self.b_lag
            .get(d)
            .copied()
            .unwrap_or_else(|| self.h_alpha / self.alpha * first_difference(d as f64, self.alpha))
    }

    /// `a(i, j+1)` for `0 <= i <= j + 1`.
    pub fn a(&self, i: usize, j: usize) -> f64 {
        let (a, ha) = (self.alpha, self.h_alpha);
        let c = ha / (a * (a + 1.0));
        if i == j + 1 {
            c
        } else if i == 0 {
            let jf = j as f64;
            c * (jf.powf(a + 1.0) - (jf - a) * (jf + 1.0).powf(a))
        } else {
            debug_assert!(i <= j);
            let d = j - i;
            self.a_lag
                .get(d)
                .copied()
                .unwrap_or_else(|| c * second_difference(d as f64, a + 1.0))
        }
    }
}

/// Weight rows for step `j -> j+1`: `a(0..=j+1, j+1)` and `b(0..=j, j+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightRow {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn abm_weights(alpha: FracOrder, dt: f64, j: usize) -> Result<WeightRow> {
    let w = AbmWeights::new(alpha, dt)?;
    Ok(WeightRow {
        a: (0..=j + 1).map(|i| w.a(i, j)).collect(),
        b: (0..=j).map(|i| w.b(i, j)).collect(),
    })
}

/// The weight formulas evaluated literally, without the cancellation-free
/// rewriting. Reference for tests.
pub fn abm_weights_printed(alpha: FracOrder, dt: f64, j: usize) -> WeightRow {
    let a = alpha.value();
    let ha = dt.powf(a);
    let c = ha / (a * (a + 1.0));
    let jf = j as f64;
    let b = (0..=j)
        .map(|i| {
            let i = i as f64;
            ha * ((jf - i + 1.0).powf(a) - (jf - i).powf(a)) / a
        })
        .collect();
    let mut av = vec![c * (jf.powf(a + 1.0) - (jf - a) * (jf + 1.0).powf(a))];
    for k in 1..=j {
        // a(k, j+1) with k = i + 1
        let i = (k - 1) as f64;
        av.push(c * ((jf - i + 1.0).powf(a + 1.0) + (jf - i - 1.0).powf(a + 1.0) - 2.0 * (jf - i).powf(a + 1.0)));
    }
    av.push(c);
    WeightRow { a: av, b }
}

/// `I^beta f(t) = (1/Gamma(beta)) int_0^t (t - s)^(beta - 1) f(s) ds` by the
/// product rectangle rule on `n` panels (the predictor weights).
pub fn rl_integral(f: impl Fn(f64) -> f64, beta: f64, t: f64, n: usize) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!("integral order must be positive, got {beta}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("upper limit must be positive, got {t}")));
    }
    let n = n.max(1);
    let h = t / n as f64;
    let c = h.powf(beta) / beta;
    let mut acc = 0.0;
    for i in 0..n {
        acc += c * first_difference((n - 1 - i) as f64, beta) * f(i as f64 * h);
    }
    Ok(acc / gamma(beta))
}

/// Output of a fractional integration.
#[derive(Clone, Debug)]
pub struct FracTrajectory {
    pub trajectory: Trajectory,
    pub alpha: FracOrder,
    /// Field values `F(x_k)` at every grid point; the scheme's memory.
    pub memory: Vec<StateVec>,
    /// Delayed states seen by the field, when a delay was present.
    pub delayed: Option<Vec<StateVec>>,
}

impl FracTrajectory {
    /// Recomputes the corrector for step `j -> j+1` from the stored memory with
    /// freshly evaluated weights and returns its distance to the stored state.
    pub fn recompute_gap(&self, j: usize, predictor_field: StateVec) -> Result<f64> {
        let states = &self.trajectory.states;
        if j + 1 >= states.len() {
            return Err(Error::domain(format!("step {j} outside the run")));
        }
        let w = AbmWeights::new(self.alpha, self.trajectory.dt)?;
        let mut acc = predictor_field * w.a(j + 1, j);
        for k in 0..=j {
            acc += self.memory[k] * w.a(k, j);
        }
        let x = states[0] + acc * (1.0 / gamma(self.alpha.value()));
        Ok((x - states[j + 1]).sup_norm())
    }
}

/// Stored predictor field values, kept for the consistency check.
struct Memory {
    f: [Vec<f64>; 3],
}

impl Memory {
    fn with_capacity(n: usize) -> Self {
        Memory {
            f: std::array::from_fn(|_| Vec::with_capacity(n)),
        }
    }

    fn push(&mut self, v: StateVec) {
        for c in 0..3 {
            self.f[c].push(v[c]);
        }
    }

    fn get(&self, k: usize) -> StateVec {
        StateVec(std::array::from_fn(|c| self.f[c][k]))
    }

    /// `sum_{k=lo}^{j} w[j - k] f_k` per component.
    fn lag_sum(&self, w: &[f64], lo: usize, j: usize) -> StateVec {
        StateVec(std::array::from_fn(|c| {
            let f = &self.f[c][lo..=j];
            let w = &w[..=j - lo];
            f.iter().zip(w.iter().rev()).map(|(a, b)| a * b).sum()
        }))
    }
}

fn check_setup(alpha: FracOrder, dt: f64, n: usize) -> Result<()> {
    let _ = alpha;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!("dt must be positive, got {dt}")));
    }
    if n == 0 {
        return Err(Error::domain("step count must be positive"));
    }
    Ok(())
}

/// One PECE step from `j` to `j + 1` given the memory up to `j`.
fn pece_step(
    w: &AbmWeights,
    mem: &Memory,
    x0: StateVec,
    j: usize,
    inv_gamma: f64,
    eval_at_next: impl FnOnce(StateVec) -> Result<StateVec>,
) -> Result<(StateVec, StateVec)> {
    let pred = x0 + mem.lag_sum(&w.b_lag, 0, j) * inv_gamma;
    let fp = eval_at_next(pred)?;
    let mut corr = mem.get(0) * w.a(0, j) + fp * w.a(j + 1, j);
    if j >= 1 {
        corr += mem.lag_sum(&w.a_lag, 1, j);
    }
    Ok((pred, x0 + corr * inv_gamma))
}

fn non_finite(step: usize) -> Error {
    Error::Integration {
        step,
        reason: "state became non-finite".into(),
    }
}

/// ABM for `D^alpha x = F(x)`, `x(0) = x0`, `n` steps of size `dt`.
pub fn integrate_abm(
    field: &dyn VectorField,
    x0: StateVec,
    alpha: FracOrder,
    dt: f64,
    n: usize,
    monitors: &[QuadraticFn],
) -> Result<FracTrajectory> {
    check_setup(alpha, dt, n)?;
    let x0 = x0.ensure_finite("initial state")?;
    let mut w = AbmWeights::new(alpha, dt)?;
    w.reserve(n);
    let inv_gamma = 1.0 / gamma(alpha.value());
    let mut mem = Memory::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    states.push(x0);
    mem.push(field.eval(&x0));
    for j in 0..n {
        let (_, x) = pece_step(&w, &mem, x0, j, inv_gamma, |p| Ok(field.eval(&p)))?;
        if !x.is_finite() {
            return Err(non_finite(j + 1));
        }
        states.push(x);
        mem.push(field.eval(&x));
    }
    let memory: Vec<StateVec> = (0..=n).map(|k| mem.get(k)).collect();
    let mons = monitors
        .iter()
        .map(|q| MonitorSeries {
            name: q.name().to_string(),
            values: states.iter().map(|x| q.value(x, x)).collect(),
        })
        .collect();
    Ok(FracTrajectory {
        trajectory: Trajectory::new(0.0, dt, states, mons)?,
        alpha,
        memory,
        delayed: None,
    })
}

/// Cubic Lagrange interpolation of the grid `states` (spacing `dt`) at `s`,
/// falling back to `phi` for `s < 0`.
#[allow(clippy::needless_range_loop)]
fn grid_lookup(states: &[StateVec], dt: f64, phi: &InitialFunction, s: f64) -> Result<StateVec> {
    if s < 0.0 {
        return phi.eval(s);
    }
    let last = states.len() - 1;
    let u = s / dt;
    if u > last as f64 + 1e-9 {
        return Err(Error::domain(format!("delayed lookup at t = {s} ahead of the computed grid")));
    }
    let deg = last.min(3);
    if deg == 0 {
        return Ok(states[0]);
    }
    let k = (u.floor() as usize).min(last);
    // nodes k-1..k+2 clamped into the grid; short grids use every node
    let start = if deg == 3 { k.saturating_sub(1).min(last - 3) } else { 0 };
    let mut out = StateVec::ZERO;
    for p in start..=start + deg {
        let mut l = 1.0;
        for q in start..=start + deg {
            if q != p {
                l *= (u - q as f64) / (p as f64 - q as f64);
            }
        }
        out += states[p] * l;
    }
    Ok(out)
}

/// ABM for `D^alpha x = F(x, x(t - tau))` with `x = phi` on `[-tau, 0]`.
pub fn integrate_abm_delay(
    field: &dyn DelayField,
    phi: InitialFunction,
    tau: f64,
    alpha: FracOrder,
    dt: f64,
    n: usize,
    monitors: &[QuadraticFn],
) -> Result<FracTrajectory> {
    check_setup(alpha, dt, n)?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::domain(format!("delay must be positive, got {tau}")));
    }
    if dt > tau / 2.0 {
        return Err(Error::domain(format!("dt = {dt} too large for delay tau = {tau}; need dt <= tau/2")));
    }
    let x0 = phi.eval(0.0)?.ensure_finite("initial function at t = 0")?;
    let mut w = AbmWeights::new(alpha, dt)?;
    w.reserve(n);
    let inv_gamma = 1.0 / gamma(alpha.value());
    let mut mem = Memory::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut delayed = Vec::with_capacity(n + 1);
    let wrap = |step: usize| move |e: Error| Error::Integration { step, reason: e.to_string() };

    states.push(x0);
    let xt0 = phi.eval(-tau).map_err(wrap(0))?;
    delayed.push(xt0);
    mem.push(field.eval(&x0, &xt0));
    for j in 0..n {
        let t_next = (j + 1) as f64 * dt;
        let xt = grid_lookup(&states, dt, &phi, t_next - tau).map_err(wrap(j + 1))?;
        let (_, x) = pece_step(&w, &mem, x0, j, inv_gamma, |p| Ok(field.eval(&p, &xt)))?;
        if !x.is_finite() {
            return Err(non_finite(j + 1));
        }
        states.push(x);
        delayed.push(xt);
        mem.push(field.eval(&x, &xt));
    }
    let memory: Vec<StateVec> = (0..=n).map(|k| mem.get(k)).collect();
    let mons = monitors
        .iter()
        .map(|q| MonitorSeries {
            name: q.name().to_string(),
            values: states.iter().zip(&delayed).map(|(x, xt)| q.value(x, xt)).collect(),
        })
        .collect();
    Ok(FracTrajectory {
        trajectory: Trajectory::new(0.0, dt, states, mons)?,
        alpha,
        memory,
        delayed: Some(delayed),
    })
}

/// The six printed update equations, hard-wired to the classical products
/// and evaluated with the literal weight formulas. Reference for tests.
pub fn abm_printed_classical(x0: StateVec, alpha: FracOrder, dt: f64, n: usize) -> Vec<StateVec> {
    let g = 1.0 / gamma(alpha.value());
    let mut x1 = vec![x0[0]];
    let mut x2 = vec![x0[1]];
    let mut x3 = vec![x0[2]];
    for j in 0..n {
        let row = abm_weights_printed(alpha, dt, j);
        let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
        for k in 0..=j {
            s1 += row.b[k] * x2[k] * x3[k];
            s2 += row.b[k] * x1[k] * x3[k];
            s3 += row.b[k] * x1[k] * x2[k];
        }
        let x1p = x1[0] + g * s1;
        let x2p = x2[0] - g * s2;
        let x3p = x3[0] + g * s3;
        let (mut c1, mut c2, mut c3) = (0.0, 0.0, 0.0);
        for k in 0..=j {
            c1 += row.a[k] * x2[k] * x3[k];
            c2 += -row.a[k] * x1[k] * x3[k];
            c3 += row.a[k] * x1[k] * x2[k];
        }
        let e = row.a[j + 1];
        x1.push(x1[0] + g * (c1 + e * x2p * x3p));
        x2.push(x2[0] + g * (c2 - e * x1p * x3p));
        x3.push(x3[0] + g * (c3 + e * x1p * x2p));
    }
    (0..=n).map(|k| StateVec::new(x1[k], x2[k], x3[k])).collect()
}

/// Right-hand side of the fractional revised delay system.
pub fn fractional_field_500(x: &StateVec, xt: &StateVec, w: &BlendWeights, mode: RevisedMode) -> StateVec {
    RevisedDelay::new(*w, mode).eval(x, xt)
}

/// Printed characteristic function of the fractional classical system at an
/// equilibrium, as a function of `mu = lambda^alpha`.
pub fn printed_char_fn_500(fam: Family, m: f64, lambda: Complex64, alpha: FracOrder) -> Complex64 {
    let mu = lambda.powf(alpha.value());
    let m2 = m * m;
    match fam {
        Family::E1 => mu * (-mu * mu + m2 * (m + 1.0)),
        Family::E2 => mu * (mu * mu + lambda * lambda * m2 - m2),
        Family::E3 => mu * (mu * mu + m2),
    }
}

/// Characteristic function of the linearized fractional classical system:
/// `det(mu I - J)` with `mu = lambda^alpha`.
pub fn computed_char_fn_500(fam: Family, m: f64, lambda: Complex64, alpha: FracOrder) -> Complex64 {
    let mu = lambda.powf(alpha.value());
    let m2 = m * m;
    match fam {
        Family::E1 | Family::E3 => mu * (mu * mu + m2),
        Family::E2 => mu * (mu * mu - m2),
    }
}
