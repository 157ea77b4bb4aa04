//! Caputo-fractional classical system by the Adams-Bashforth-Moulton scheme
//! from (0.001, 0.001, 6), at order 0.8 and at the unit-order limit.

use rabinovich::dynamics::{integrate_rk4, Rabinovich};
use rabinovich::fractional::{integrate_abm, rl_integral, FracOrder};
use rabinovich::poisson::h1;
use rabinovich::StateVec;

fn main() -> rabinovich::Result<()> {
    let x0 = StateVec::new(0.001, 0.001, 6.0);
    let n = 10_000;
    for alpha in [0.8, 1.0] {
        let run = integrate_abm(&Rabinovich, x0, FracOrder::new(alpha)?, 1e-3, n, &[h1()])?;
        println!(
            "alpha = {alpha}: x(10) = {}, sup norm {:.6}, h1 drift {:.3e}",
            run.trajectory.last(),
            run.trajectory.sup_norm(),
            run.trajectory.relative_drift("h1").unwrap()
        );
    }
    let rk = integrate_rk4(&Rabinovich, x0, 1e-3, n, &[])?;
    let unit = integrate_abm(&Rabinovich, x0, FracOrder::new(1.0)?, 1e-3, n, &[])?;
    println!("unit order against RK4: {:.2e}", unit.trajectory.sup_distance(&rk));

    let beta: f64 = 0.5;
    let t: f64 = 2.0;
    println!(
        "I^0.5 of 1 at t = 2: {:.15} (closed form {:.15})",
        rl_integral(|_| 1.0, beta, t, 100)?,
        t.powf(beta) / rabinovich::fractional::gamma(beta + 1.0)
    );
    Ok(())
}
