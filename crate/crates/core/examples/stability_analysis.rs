//! Equilibrium verdicts, Matignon's sector test and the delayed
//! characteristic roots at the third equilibrium family.

use rabinovich::delay::{BlendWeights, DelayHamiltonian, Kernel};
use rabinovich::dynamics::{equilibrium_point, jacobian, EquilibriumFamily, Family, JacobianMode, Rabinovich};
use rabinovich::fractional::FracOrder;
use rabinovich::stability::{classify_spectral, matignon_check, scan_roots, LinearizationPair, Region};

fn main() -> rabinovich::Result<()> {
    for m in [-1.0, 0.5, 2.0] {
        for fam in [Family::E1, Family::E2, Family::E3] {
            let x = equilibrium_point(EquilibriumFamily::new(fam, m));
            let j = jacobian(&Rabinovich, &x, JacobianMode::Analytic)?;
            println!("m = {m:>4} {fam}: {}", classify_spectral(&j).classification);
        }
    }

    let e3 = equilibrium_point(EquilibriumFamily::new(Family::E3, 1.0));
    let j = jacobian(&Rabinovich, &e3, JacobianMode::Analytic)?;
    println!("alpha = 0.8 at E3: {}", matignon_check(&j, FracOrder::new(0.8)?).evidence);

    let w = BlendWeights::new([0.4, 0.3, 0.2, 0.1], [0.4, 0.3, 0.2, 0.1])?;
    let lin = LinearizationPair::of_delay_field(&DelayHamiltonian::new(w), &e3)?;
    for tau in [0.1, 0.5, 1.0] {
        let scan = scan_roots(&lin, &Kernel::dirac(tau)?, FracOrder::new(1.0)?, Region::new(-2.0, 2.0, 0.05, 4.0)?, 41)?;
        println!("point delay {tau}: roots {:?}", scan.roots);
    }
    Ok(())
}
