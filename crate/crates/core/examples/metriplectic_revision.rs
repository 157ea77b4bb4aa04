//! Second-kind metriplectic revision of the classical field: the Casimir c1
//! is kept while h1 grows along the flow.

use rabinovich::dynamics::integrate_rk4;
use rabinovich::metriplectic::{compare_with_printed, MetriplecticSystem, PrintedSystem};
use rabinovich::dynamics::Family;
use rabinovich::poisson::{c1, h1, p1};
use rabinovich::StateVec;

fn main() -> rabinovich::Result<()> {
    let sys = MetriplecticSystem::second_kind(p1(), h1(), c1())?;
    let traj = integrate_rk4(&sys, StateVec::new(0.3, 0.2, 0.1), 1e-3, 20_000, &[h1(), c1()])?;
    let h = traj.monitor("h1").unwrap();
    println!("c1 relative drift: {:.2e}", traj.relative_drift("c1").unwrap());
    println!("h1: {:.6} -> {:.6}", h[0], h[h.len() - 1]);
    println!("final state {}", traj.last());

    for fam in [Family::E1, Family::E2, Family::E3] {
        let c = compare_with_printed(PrintedSystem::Literal10, fam, 1.0);
        println!(
            "printed second-kind system at {fam}: computed {:?}, printed {:?}",
            c.computed.map(|p| p.coeffs),
            c.printed.coeffs
        );
    }
    Ok(())
}
