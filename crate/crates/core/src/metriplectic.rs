//! Metriplectic revisions of the classical flow: `x' = P grad h + g grad l`,
//! with `g` generated from `h` alone (first kind, `l = h`) or from `h` and a
//! Casimir `c` (second kind, `l = c`), plus the two printed revised systems
//! kept verbatim as fixtures.
//!
//! First kind: `g = dh dh^T - |dh|^2 I`, so `g dh = 0` identically and `h` is
//! conserved by the whole flow.
//!
//! Second kind: `g = dh dc^T - (dh.dc) I`. This is not symmetric. It gives
//! `dc.g dc = 0` (so `c` stays a conserved quantity) and
//! `dh.g dc = |dh|^2 |dc|^2 - (dh.dc)^2 >= 0` (so `h` never decreases).

use serde::Serialize;

use crate::dynamics::{equilibrium_point, EquilibriumFamily, Family, PolyField, VectorField};
use crate::error::{Error, Result};
use crate::poisson::{PoissonTensor, QuadraticFn};
use crate::poly::{Poly, NVARS};
use crate::state::{mat_vec, Mat3, StateVec};

fn outer_minus_trace(a: &StateVec, b: &StateVec) -> Mat3 {
    let dot = a.dot(b);
    Mat3::from_fn(|i, j| a[i] * b[j] - if i == j { dot } else { 0.0 })
}

fn grad(f: &QuadraticFn, x: &StateVec) -> StateVec {
    f.grad_x(x, x)
}

/// `g_ii = -sum_{k != i} (dh_k)^2`, `g_ij = dh_i dh_j`.
pub fn build_metric_first_kind(h: &QuadraticFn, x: &StateVec) -> Mat3 {
    let d = grad(h, x);
    outer_minus_trace(&d, &d)
}

/// `g_ii = -sum_{k != i} dh_k dc_k`, `g_ij = dh_i dc_j`, as written (non-symmetric).
pub fn build_metric_second_kind(h: &QuadraticFn, c: &QuadraticFn, x: &StateVec) -> Mat3 {
    outer_minus_trace(&grad(h, x), &grad(c, x))
}

/// `(g + g^T)/2` of the second-kind metric.
pub fn build_metric_second_kind_symmetrized(h: &QuadraticFn, c: &QuadraticFn, x: &StateVec) -> Mat3 {
    let g = build_metric_second_kind(h, c, x);
    (g + g.transpose()) * 0.5
}

/// The two printed metric tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LiteralMetric {
    /// `g11 = -x2^2, g22 = -x1^2, g33 = 0, g12 = g21 = x1 x2`, others zero.
    G38,
    /// `g11 = -x2^2, g12 = x1 x2, g13 = x1 x3, g23 = x2 x3`, others zero.
    G10,
}

impl LiteralMetric {
    pub fn poly(self) -> [[Poly; 3]; 3] {
        let v = Poly::var;
        let mut g: [[Poly; 3]; 3] = Default::default();
        match self {
            LiteralMetric::G38 => {
                g[0][0] = -(&v(1) * &v(1));
                g[1][1] = -(&v(0) * &v(0));
                g[0][1] = &v(0) * &v(1);
                g[1][0] = &v(0) * &v(1);
            }
            LiteralMetric::G10 => {
                g[0][0] = -(&v(1) * &v(1));
                g[0][1] = &v(0) * &v(1);
                g[0][2] = &v(0) * &v(2);
                g[1][2] = &v(1) * &v(2);
            }
        }
        g
    }

    pub fn eval(self, x: &StateVec) -> Mat3 {
        let z = lift(x);
        let g = self.poly();
        Mat3::from_fn(|i, j| g[i][j].eval(&z))
    }
}

fn lift(x: &StateVec) -> [f64; NVARS] {
    [x[0], x[1], x[2], 0.0, 0.0, 0.0]
}

/// How the metric leg is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MetricSpec {
    FirstKind,
    SecondKind,
    SecondKindSymmetrized,
    Literal(LiteralMetric),
}

/// `x' = P grad h + g grad l`.
#[derive(Clone, Debug)]
pub struct MetriplecticSystem {
    name: String,
    poisson: PoissonTensor,
    metric: MetricSpec,
    hamiltonian: QuadraticFn,
    metric_leg: QuadraticFn,
    poly: PolyField,
}

impl MetriplecticSystem {
    /// First kind: the metric leg is driven by `h` itself.
    pub fn first_kind(poisson: PoissonTensor, h: QuadraticFn) -> Result<Self> {
        let leg = h.clone();
        Self::build("metriplectic-first", poisson, MetricSpec::FirstKind, h, leg)
    }

    /// Second kind: the metric leg is driven by the Casimir `c`.
    pub fn second_kind(poisson: PoissonTensor, h: QuadraticFn, c: QuadraticFn) -> Result<Self> {
        Self::build("metriplectic-second", poisson, MetricSpec::SecondKind, h, c)
    }

    pub fn second_kind_symmetrized(poisson: PoissonTensor, h: QuadraticFn, c: QuadraticFn) -> Result<Self> {
        Self::build(
            "metriplectic-second-sym",
            poisson,
            MetricSpec::SecondKindSymmetrized,
            h,
            c,
        )
    }

    /// A printed metric table applied to `leg`.
    pub fn with_literal_metric(
        poisson: PoissonTensor,
        table: LiteralMetric,
        h: QuadraticFn,
        leg: QuadraticFn,
    ) -> Result<Self> {
        let name = match table {
            LiteralMetric::G38 => "table-g38",
            LiteralMetric::G10 => "table-g10",
        };
        Self::build(name, poisson, MetricSpec::Literal(table), h, leg)
    }

    fn build(
        name: &str,
        poisson: PoissonTensor,
        metric: MetricSpec,
        hamiltonian: QuadraticFn,
        metric_leg: QuadraticFn,
    ) -> Result<Self> {
        if poisson.uses_delayed() || hamiltonian.uses_delayed() || metric_leg.uses_delayed() {
            return Err(Error::domain("metriplectic systems live on R^3; delayed coordinates are not allowed"));
        }
        let pp = poisson.to_poly();
        let hp = hamiltonian.to_poly();
        let lp = metric_leg.to_poly();
        let dh = hp.grad_x();
        let dl = lp.grad_x();
        let g = metric_poly(metric, &dh, &dl);
        let components = std::array::from_fn(|i| {
            let mut c = Poly::zero();
            for j in 0..3 {
                c = &c + &(&pp[i][j] * &dh[j]);
                c = &c + &(&g[i][j] * &dl[j]);
            }
            c
        });
        let poly = PolyField::new(name, components)?;
        Ok(MetriplecticSystem {
            name: name.to_string(),
            poisson,
            metric,
            hamiltonian,
            metric_leg,
            poly,
        })
    }

    pub fn metric_spec(&self) -> MetricSpec {
        self.metric
    }

    pub fn hamiltonian(&self) -> &QuadraticFn {
        &self.hamiltonian
    }

    pub fn metric_leg(&self) -> &QuadraticFn {
        &self.metric_leg
    }

    pub fn poisson(&self) -> &PoissonTensor {
        &self.poisson
    }

    pub fn metric(&self, x: &StateVec) -> Mat3 {
        match self.metric {
            MetricSpec::FirstKind => build_metric_first_kind(&self.hamiltonian, x),
            MetricSpec::SecondKind => build_metric_second_kind(&self.hamiltonian, &self.metric_leg, x),
            MetricSpec::SecondKindSymmetrized => {
                build_metric_second_kind_symmetrized(&self.hamiltonian, &self.metric_leg, x)
            }
            MetricSpec::Literal(t) => t.eval(x),
        }
    }

    /// The conservative leg `P grad h`.
    pub fn poisson_part(&self, x: &StateVec) -> StateVec {
        let p = self.poisson.eval(x, None).expect("no delayed coordinates");
        mat_vec(&p, &grad(&self.hamiltonian, x))
    }

    /// The metric leg `g grad l`.
    pub fn metric_part(&self, x: &StateVec) -> StateVec {
        mat_vec(&self.metric(x), &grad(&self.metric_leg, x))
    }

    /// The polynomial form of the generated field.
    pub fn polynomial(&self) -> &PolyField {
        &self.poly
    }
}

fn metric_poly(spec: MetricSpec, dh: &[Poly; 3], dl: &[Poly; 3]) -> [[Poly; 3]; 3] {
    let outer = |a: &[Poly; 3], b: &[Poly; 3]| -> [[Poly; 3]; 3] {
        let dot = crate::poly::dot(a, b);
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let p = &a[i] * &b[j];
                if i == j {
                    &p - &dot
                } else {
                    p
                }
            })
        })
    };
    match spec {
        MetricSpec::FirstKind => outer(dh, dh),
        MetricSpec::SecondKind => outer(dh, dl),
        MetricSpec::SecondKindSymmetrized => {
            let g = outer(dh, dl);
            std::array::from_fn(|i| std::array::from_fn(|j| (&g[i][j] + &g[j][i]).scale(0.5)))
        }
        MetricSpec::Literal(t) => t.poly(),
    }
}

impl VectorField for MetriplecticSystem {
    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, x: &StateVec) -> StateVec {
        self.poisson_part(x) + self.metric_part(x)
    }

    fn analytic_jacobian(&self, x: &StateVec) -> Option<Mat3> {
        self.poly.analytic_jacobian(x)
    }
}

pub fn metriplectic_field(sys: &MetriplecticSystem, x: &StateVec) -> StateVec {
    sys.eval(x)
}

/// Printed first-kind revised system:
/// `(x2 x3 + x1 x2 (x1 - x2), -x1 x3 + x1^2, x1 x2)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Literal38;

impl VectorField for Literal38 {
    fn name(&self) -> &str {
        "literal38"
    }

    fn eval(&self, x: &StateVec) -> StateVec {
        let [x1, x2, x3] = x.0;
        StateVec::new(x2 * x3 + x1 * x2 * (x1 - x2), -x1 * x3 + x1 * x1, x1 * x2)
    }

    fn analytic_jacobian(&self, x: &StateVec) -> Option<Mat3> {
        let [x1, x2, x3] = x.0;
        #[rustfmt::skip]
        let j = Mat3::new(
            2.0 * x1 * x2 - x2 * x2, x3 + x1 * x1 - 2.0 * x1 * x2, x2,
            2.0 * x1 - x3, 0.0, -x1,
            x2, x1, 0.0,
        );
        Some(j)
    }
}

/// Printed second-kind revised system:
/// `(x2 x3 + x1 (x2^2 + x3^2), -x1 x3 + x2 x3, x1 x2)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Literal10;

impl VectorField for Literal10 {
    fn name(&self) -> &str {
        "literal10"
    }

    fn eval(&self, x: &StateVec) -> StateVec {
        let [x1, x2, x3] = x.0;
        StateVec::new(x2 * x3 + x1 * (x2 * x2 + x3 * x3), -x1 * x3 + x2 * x3, x1 * x2)
    }

    fn analytic_jacobian(&self, x: &StateVec) -> Option<Mat3> {
        let [x1, x2, x3] = x.0;
        #[rustfmt::skip]
        let j = Mat3::new(
            x2 * x2 + x3 * x3, x3 + 2.0 * x1 * x2, x2 + 2.0 * x1 * x3,
            -x3, x3, x2 - x1,
            x2, x1, 0.0,
        );
        Some(j)
    }
}

pub fn literal_system_38(x: &StateVec) -> StateVec {
    Literal38.eval(x)
}

pub fn literal_system_10(x: &StateVec) -> StateVec {
    Literal10.eval(x)
}

/// Monic cubic `lambda^3 + c[1] lambda^2 + c[2] lambda + c[3]` (`c[0] == 1`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CharPoly {
    pub coeffs: [f64; 4],
}

impl CharPoly {
    /// `det(lambda I - J)`.
    pub fn of_matrix(j: &Mat3) -> Self {
        let tr = j.trace();
        let minors = j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)] + j[(0, 0)] * j[(2, 2)]
            - j[(0, 2)] * j[(2, 0)]
            + j[(1, 1)] * j[(2, 2)]
            - j[(1, 2)] * j[(2, 1)];
        CharPoly {
            // + 0.0 keeps negated zeros out of reports
            coeffs: [1.0, -tr + 0.0, minors, -j.determinant() + 0.0],
        }
    }

    /// Normalizes any nonzero leading coefficient to 1.
    pub fn monic(raw: [f64; 4]) -> Self {
        CharPoly {
            coeffs: raw.map(|c| c / raw[0] + 0.0),
        }
    }

    pub fn max_gap(&self, other: &CharPoly) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Stationarity threshold for a family point with parameter `m`.
fn stationary_tol(m: f64) -> f64 {
    1e-12 * (1.0 + m.abs()).powi(3)
}

/// Characteristic polynomial of the analytic Jacobian at a family point.
pub fn char_poly_at_equilibrium(field: &dyn VectorField, fam: EquilibriumFamily) -> Result<CharPoly> {
    let x = equilibrium_point(fam);
    let residual = field.eval(&x).sup_norm();
    if !(residual <= stationary_tol(fam.m)) {
        return Err(Error::NotStationary { residual });
    }
    let j = crate::dynamics::jacobian(field, &x, crate::dynamics::JacobianMode::Analytic)?;
    Ok(CharPoly::of_matrix(&j))
}

/// The printed systems whose linearizations are listed alongside them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PrintedSystem {
    Literal38,
    Literal10,
}

/// The printed Jacobian ("matrix of the linear part") at each family point.
pub fn printed_jacobian(sys: PrintedSystem, fam: Family, m: f64) -> Mat3 {
    let m2 = m * m;
    #[rustfmt::skip]
    let j = match (sys, fam) {
        (PrintedSystem::Literal38, Family::E1) => Mat3::new(
            0.0, m2, 0.0,
            0.0, 0.0, m2 + m,
            0.0, m, 0.0),
        (PrintedSystem::Literal38, Family::E2) => Mat3::new(
            -m2, 0.0, m,
            0.0, 0.0, 0.0,
            m, 0.0, 0.0),
        (PrintedSystem::Literal38, Family::E3) => Mat3::new(
            0.0, m, 0.0,
            -m, 0.0, 0.0,
            0.0, 0.0, 0.0),
        (PrintedSystem::Literal10, Family::E1) => Mat3::new(
            0.0, 0.0, 0.0,
            0.0, 0.0, -m,
            0.0, m, 0.0),
        (PrintedSystem::Literal10, Family::E2) => Mat3::new(
            m2, 0.0, m,
            0.0, 0.0, m,
            m, 0.0, 0.0),
        (PrintedSystem::Literal10, Family::E3) => Mat3::new(
            m2, m, 0.0,
            -m, m, 0.0,
            0.0, 0.0, 0.0),
    };
    j
}

/// The printed characteristic equation at each family point, made monic.
pub fn printed_char_poly(sys: PrintedSystem, fam: Family, m: f64) -> CharPoly {
    let m2 = m * m;
    match (sys, fam) {
        // lambda (-lambda^2 + m^2 (m + 1))
        (PrintedSystem::Literal38, Family::E1) => CharPoly::monic([-1.0, 0.0, m2 * (m + 1.0), 0.0]),
        // -lambda (lambda^2 + m^2 lambda - m^2)
        (PrintedSystem::Literal38, Family::E2) => CharPoly::monic([-1.0, -m2, m2, 0.0]),
        // lambda (lambda^2 + m^2)
        (PrintedSystem::Literal38, Family::E3) => CharPoly::monic([1.0, 0.0, m2, 0.0]),
        // lambda (lambda^2 + m^2)
        (PrintedSystem::Literal10, Family::E1) => CharPoly::monic([1.0, 0.0, m2, 0.0]),
        // lambda (lambda^2 - lambda m^2 - m^2)
        (PrintedSystem::Literal10, Family::E2) => CharPoly::monic([1.0, -m2, -m2, 0.0]),
        // lambda (lambda^2 - lambda (m + m^2) + m^2)
        (PrintedSystem::Literal10, Family::E3) => CharPoly::monic([1.0, -(m + m2), m2, 0.0]),
    }
}

/// Computed against printed characteristic data at one family point.
#[derive(Clone, Debug, Serialize)]
pub struct CharPolyComparison {
    pub family: Family,
    pub m: f64,
    /// `None` when the point is not stationary for the field.
    pub computed: Option<CharPoly>,
    pub stationarity_residual: f64,
    pub printed: CharPoly,
    pub coeff_gap: Option<f64>,
    pub jacobian_gap: f64,
}

pub fn compare_with_printed(sys: PrintedSystem, fam: Family, m: f64) -> CharPolyComparison {
    let field: &dyn VectorField = match sys {
        PrintedSystem::Literal38 => &Literal38,
        PrintedSystem::Literal10 => &Literal10,
    };
    let eq = EquilibriumFamily::new(fam, m);
    let x = equilibrium_point(eq);
    let computed = char_poly_at_equilibrium(field, eq).ok();
    let printed = printed_char_poly(sys, fam, m);
    let j = field.analytic_jacobian(&x).expect("literal systems carry jacobians");
    CharPolyComparison {
        family: fam,
        m,
        computed,
        stationarity_residual: field.eval(&x).sup_norm(),
        printed,
        coeff_gap: computed.map(|c| c.max_gap(&printed)),
        jacobian_gap: crate::state::max_abs_diff(&j, &printed_jacobian(sys, fam, m)),
    }
}
