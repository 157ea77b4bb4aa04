//! Distributed-delay Hamiltonian blend under each kernel, from a constant
//! history.

use rabinovich::delay::{integrate_dde, BlendWeights, DelayHamiltonian, InitialFunction, Kernel};
use rabinovich::dynamics::{integrate_rk4, Rabinovich};
use rabinovich::poisson::h1;
use rabinovich::StateVec;

fn main() -> rabinovich::Result<()> {
    let w = BlendWeights::new([0.4, 0.3, 0.2, 0.1], [0.4, 0.3, 0.2, 0.1])?;
    let field = DelayHamiltonian::new(w);
    let x0 = StateVec::new(1.0, 0.5, 0.2);
    let classical = integrate_rk4(&Rabinovich, x0, 1e-3, 10_000, &[])?;
    let kernels = [
        Kernel::dirac(0.5)?,
        Kernel::uniform(0.1, 0.5)?,
        Kernel::exponential(4.0)?,
        Kernel::erlang(4.0)?,
        Kernel::exponential(50.0)?,
    ];
    for k in kernels {
        let sol = integrate_dde(&field, &k, InitialFunction::Constant(x0), 1e-3, 10.0, &[h1()])?;
        println!(
            "{k:?}: x(10) = {}, sup distance to the undelayed run {:.3e}, h1 drift {:.2e}",
            sol.trajectory.last(),
            sol.trajectory.sup_distance(&classical),
            sol.trajectory.relative_drift("h1").unwrap()
        );
    }
    Ok(())
}
