//! Solves the implicit equation Q(V, x) = 0 for each ILF family and samples two conditions.
//!
//! `cargo run --release --example ilf_solver`

use hypex::ilf::{check_c4_c5, shell_samples, IlfCandidate, IlfSolver};
use hypex::lmi::fixtures::example_p;
use hypex::Vector;

fn main() -> hypex::Result<()> {
    let p = example_p();
    let x = Vector::from_vec(vec![0.3, -0.2, 0.1]);
    for c in [
        IlfCandidate::finite_time(p.clone(), 0.5)?,
        IlfCandidate::hyper(p.clone(), 0.2)?,
        IlfCandidate::quadratic(p.clone())?,
        IlfCandidate::nearly_fixed(p.clone(), 1.0)?,
    ] {
        let mut solver = IlfSolver::with_defaults(c.clone());
        let cold = solver.solve(&x)?;
        // A nearby state reuses the previous root as the bracket.
        let warm = solver.solve(&(&x * 0.99))?;
        println!(
            "{:?}: V = {:.6e} ({} iterations), warm restart {} iterations, Q = {:.1e}",
            c.variant(),
            cold.v,
            cold.iterations,
            warm.iterations,
            c.q_eval(cold.v, &x)?
        );
    }

    let inner = IlfCandidate::hyper(p.clone(), 0.2)?;
    let outer = IlfCandidate::nearly_fixed(p, 1.0)?;
    let samples: Vec<(f64, Vector)> = shell_samples(3, 200, 1e-3, 1e1, 5)
        .into_iter()
        .enumerate()
        .map(|(i, x)| (0.05 + 0.01 * i as f64, x))
        .collect();
    let (c4, c5) = check_c4_c5(&inner, &outer, &samples)?;
    print!("{}{}", c4.to_text(), c5.to_text());
    Ok(())
}
