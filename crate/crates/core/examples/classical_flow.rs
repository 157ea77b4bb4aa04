//! RK4 on the classical system: conserved quantities, a heteroclinic orbit
//! and the small-oscillation period near the first equilibrium family.

use rabinovich::dynamics::{
    heteroclinic_orbit, heteroclinic_sign_triples, integrate_rk4, measure_period, rk4_step, PeriodComparison,
    Rabinovich,
};
use rabinovich::poisson::{c1, h1, h3};
use rabinovich::StateVec;

fn main() -> rabinovich::Result<()> {
    let traj = integrate_rk4(&Rabinovich, StateVec::new(1.0, 2.0, 3.0), 1e-3, 100_000, &[h1(), c1(), h3()])?;
    for name in ["h1", "c1", "h3"] {
        println!("relative drift of {name} over T = 100: {:.2e}", traj.relative_drift(name).unwrap());
    }

    let (m, signs) = (1.0, heteroclinic_sign_triples()[0]);
    let mut x = heteroclinic_orbit(m, signs, -5.0)?;
    let mut gap: f64 = 0.0;
    for k in 1..=100_000 {
        x = rk4_step(&Rabinovich, &x, 1e-4);
        gap = gap.max((x - heteroclinic_orbit(m, signs, -5.0 + k as f64 * 1e-4)?).sup_norm());
    }
    println!("heteroclinic orbit {signs:?}: RK4 stays within {gap:.2e} of the closed form on [-5, 5]");

    let p = PeriodComparison::new(m, measure_period(StateVec::new(m, 1e-3, 1e-3), 1e-3, 40.0)?);
    println!(
        "period near (1, 0, 0): measured {:.6}, 2 pi/|m| = {:.6}, ratio to pi/|m| = {:.4}",
        p.measured,
        p.linearized,
        p.factor_over_printed()
    );
    Ok(())
}
