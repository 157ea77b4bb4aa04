use std::path::Path;

use num_complex::Complex64;
use proptest::prelude::*;

use rabinovich::delay::{
    delay_hamiltonian_field, kernel_laplace, revised_delay_field, BlendWeights, Kernel, RevisedMode,
};
use rabinovich::dynamics::{
    equilibrium_point, heteroclinic_orbit, heteroclinic_sign_triples, heteroclinic_velocity, rk4_step,
    EquilibriumFamily, Family, MonitorSeries, Rabinovich, Trajectory, VectorField,
};
use rabinovich::fractional::{abm_weights, integrate_abm, FracOrder};
use rabinovich::io::{parse_csv, trajectory_csv};
use rabinovich::metriplectic::{build_metric_first_kind, build_metric_second_kind, CharPoly};
use rabinovich::poisson::{
    c1, casimir_residual, coordinate, h1, h3, jacobi_residual, p1, tri_hamiltonian_gap, PoissonPencil,
};
use rabinovich::poly::{dot, Poly};
use rabinovich::stability::{classify_spectral, cubic_roots, matignon_check};
use rabinovich::state::{mat_vec, Mat3};
use rabinovich::StateVec;

fn state(r: f64) -> impl Strategy<Value = StateVec> {
    prop::array::uniform3(-r..r).prop_map(|a| StateVec::new(a[0], a[1], a[2]))
}

fn simplex() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(0.0..1.0f64).prop_filter("nonzero mass", |w| w.iter().sum::<f64>() > 1e-3).prop_map(|mut w| {
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        w[0] = 1.0 - w[1] - w[2] - w[3];
        w
    })
}

fn weights() -> impl Strategy<Value = BlendWeights> {
    (simplex(), simplex()).prop_map(|(e, d)| BlendWeights::new(e, d).unwrap())
}

fn pencil() -> impl Strategy<Value = PoissonPencil> {
    (0.5..2.0f64, any::<bool>(), -2.0..2.0f64, -2.0..2.0f64)
        .prop_map(|(a, neg, b, g)| PoissonPencil::new(if neg { -a } else { a }, b, g).unwrap())
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::E1), Just(Family::E2), Just(Family::E3)]
}

#[test]
fn level_set_tangency_is_an_exact_identity() {
    let p = p1().to_poly();
    let dh = h1().to_poly().grad_x();
    let field: [Poly; 3] = std::array::from_fn(|i| dot(&p[i], &dh));
    for q in [h1(), c1(), h3()] {
        assert!(dot(&q.to_poly().grad_x(), &field).is_zero(), "{}", q.name());
    }
}

proptest! {
    #[test]
    fn field_is_tangent_to_level_sets(x in state(1e3), y in state(5.0)) {
        // Products of three coordinates near 1e3 carry rounding near 1e-7, so the
        // wide box is checked relative to the size of the terms that cancel.
        let (f, fy) = (Rabinovich.eval(&x), Rabinovich.eval(&y));
        for q in [h1(), c1(), h3()] {
            let g = q.grad_x(&x, &x);
            let scale = g.sup_norm() * f.sup_norm();
            prop_assert!(g.dot(&f).abs() <= 1e-12 * scale.max(1.0), "{}: {}", q.name(), g.dot(&f));
            prop_assert!(q.grad_x(&y, &y).dot(&fy).abs() < 1e-12);
        }
    }

    #[test]
    fn tri_hamiltonian(x in state(5.0)) {
        prop_assert!(tri_hamiltonian_gap(&x) < 1e-12);
    }

    #[test]
    fn pencil_is_skew_poisson_with_casimir(p in pencil(), x in state(5.0)) {
        let t = p.tensor();
        let m = t.eval(&x, None).unwrap();
        prop_assert_eq!(m, -m.transpose());
        let [a, b, c] = [coordinate(0), coordinate(1), coordinate(2)];
        prop_assert!(jacobi_residual(&t, &a, &b, &c, &x, None).unwrap().abs() < 1e-10);
        prop_assert!(casimir_residual(&t, &p.casimir(), &x, None).unwrap().sup_norm() < 1e-13);
    }

    #[test]
    fn first_kind_metric_annihilates_gradient(x in state(5.0)) {
        let dh = h1().grad_x(&x, &x);
        prop_assert!(mat_vec(&build_metric_first_kind(&h1(), &x), &dh).sup_norm() < 1e-12);
    }

    #[test]
    fn second_kind_metric_is_cauchy_schwarz(x in state(5.0)) {
        let (dh, dc) = (h1().grad_x(&x, &x), c1().grad_x(&x, &x));
        let lhs = dh.dot(&mat_vec(&build_metric_second_kind(&h1(), &c1(), &x), &dc));
        let rhs = dh.dot(&dh) * dc.dot(&dc) - dh.dot(&dc).powi(2);
        let scale = dh.dot(&dh) * dc.dot(&dc);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0));
        prop_assert!(lhs >= -1e-12 * scale.max(1.0));
    }

    #[test]
    fn delayed_casimir_identity(w in weights(), x in state(5.0), xt in state(5.0)) {
        let p = w.tensor().eval(&x, Some(&xt)).unwrap();
        let dl = w.casimir().grad_x(&x, &xt);
        prop_assert!(mat_vec(&p.transpose(), &dl).sup_norm() < 1e-12);
    }

    #[test]
    fn equal_arguments_collapse_to_classical(w in weights(), x in state(5.0)) {
        prop_assert!((delay_hamiltonian_field(&x, &x, &w) - Rabinovich.eval(&x)).sup_norm() < 1e-12);
    }

    #[test]
    fn blend_coefficients(w in weights()) {
        let (e, a, b) = (w.eps(), w.alphas(), w.betas());
        prop_assert!((e.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(a, [e[0] + e[1], e[0] + e[2], e[1] + e[2], e[1] + e[3], e[2] + e[3]]);
        prop_assert!(b.iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn laplace_at_zero_is_one(a in 0.0..2.0f64, width in 0.01..3.0f64, rate in 0.05..50.0f64) {
        for k in [
            Kernel::uniform(a, a + width).unwrap(),
            Kernel::exponential(rate).unwrap(),
            Kernel::erlang(rate).unwrap(),
            Kernel::dirac(a).unwrap(),
        ] {
            prop_assert_eq!(kernel_laplace(&k, Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn abm_weights_positive(alpha in 0.01..=1.0f64, dt in 1e-4..0.1f64, j in 0usize..=10_000) {
        let row = abm_weights(FracOrder::new(alpha).unwrap(), dt, j).unwrap();
        prop_assert_eq!(row.a.len(), j + 2);
        prop_assert!(row.a.iter().chain(&row.b).all(|v| *v > 0.0 && v.is_finite()));
    }

    #[test]
    fn equilibria_are_fixed(fam in family(), m in -5.0..5.0f64, alpha in 0.1..=1.0f64, w in weights()) {
        let e = equilibrium_point(EquilibriumFamily::new(fam, m));
        prop_assert_eq!(Rabinovich.eval(&e), StateVec::new(0.0, 0.0, 0.0));
        prop_assert_eq!(rk4_step(&Rabinovich, &e, 1e-2), e);
        prop_assert!(revised_delay_field(&e, &e, &w, RevisedMode::Constructed).sup_norm() == 0.0);
        let run = integrate_abm(&Rabinovich, e, FracOrder::new(alpha).unwrap(), 1e-2, 20, &[]).unwrap();
        prop_assert!(run.trajectory.states.iter().all(|x| *x == e));
    }

    #[test]
    fn heteroclinic_solves_the_ode(m in 0.01..5.0f64, neg in any::<bool>(), k in 0usize..4, t in -5.0..5.0f64) {
        let m = if neg { -m } else { m };
        let s = heteroclinic_sign_triples()[k];
        let x = heteroclinic_orbit(m, s, t).unwrap();
        let v = heteroclinic_velocity(m, s, t).unwrap();
        prop_assert!((Rabinovich.eval(&x) - v).sup_norm() < 1e-12);
    }

    #[test]
    fn cubic_roots_are_roots(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64) {
        let p = CharPoly { coeffs: [1.0, a, b, c] };
        for z in cubic_roots(&p) {
            let val = ((z + a) * z + b) * z + c;
            prop_assert!(val.norm() < 1e-9 * (1.0 + z.norm().powi(3)), "root {z} leaves {val}");
        }
    }

    #[test]
    fn matignon_at_unit_order_matches_spectral(entries in prop::array::uniform9(-2.0..2.0f64)) {
        let a = Mat3::from_row_slice(&entries);
        let spectral = classify_spectral(&a);
        prop_assume!(spectral.eigenvalues.iter().all(|z| z.re.abs() > 1e-9));
        prop_assert_eq!(matignon_check(&a, FracOrder::new(1.0).unwrap()).classification, spectral.classification);
    }

    #[test]
    fn csv_round_trip_is_bit_exact(rows in prop::collection::vec(prop::array::uniform4(prop::num::f64::NORMAL | prop::num::f64::ZERO), 1..40)) {
        let states: Vec<StateVec> = rows.iter().map(|r| StateVec::new(r[0], r[1], r[2])).collect();
        let monitor = MonitorSeries { name: "h1".into(), values: rows.iter().map(|r| r[3]).collect() };
        let traj = Trajectory::new(0.0, 1e-3, states, vec![monitor]).unwrap();
        let back = parse_csv(&trajectory_csv(&traj), Path::new("mem.csv")).unwrap();
        for (p, q) in traj.states.iter().zip(&back.states) {
            for i in 0..3 {
                prop_assert_eq!(p[i].to_bits(), q[i].to_bits());
            }
        }
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back.monitors[0].values), bits(&traj.monitors[0].values));
    }
}
