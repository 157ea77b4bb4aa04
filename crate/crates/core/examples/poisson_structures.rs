//! The three Poisson realizations of the classical field, their Casimirs and
//! the Jacobi identity for a member of the pencil.

use rabinovich::poisson::{c1, c2, c3, coordinate, casimir_residual, jacobi_residual, p1, p2, p3, tri_hamiltonian_gap, PoissonPencil};
use rabinovich::StateVec;

fn main() -> rabinovich::Result<()> {
    let x = StateVec::new(0.7, -1.3, 2.2);
    println!("tri-Hamiltonian gap at {x}: {:.1e}", tri_hamiltonian_gap(&x));
    for (p, c) in [(p1(), c1()), (p2(), c2()), (p3(), c3())] {
        println!("{} grad {}: sup norm {:.1e}", p.name(), c.name(), casimir_residual(&p, &c, &x, None)?.sup_norm());
    }

    let pencil = PoissonPencil::new(1.5, -0.4, 2.0)?;
    let t = pencil.tensor();
    let (f, g, h) = (coordinate(0), coordinate(1), coordinate(2));
    println!("{}: Jacobi residual {:.1e}", t.name(), jacobi_residual(&t, &f, &g, &h, &x, None)?.abs());
    println!("pencil Casimir residual {:.1e}", casimir_residual(&t, &pencil.casimir(), &x, None)?.sup_norm());
    Ok(())
}
