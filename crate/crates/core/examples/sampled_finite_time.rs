//! Finite-time ILF control with V recomputed once per second and held in between.
//!
//! `cargo run --release --example sampled_finite_time`

use hypex::control::{ControlVariant, Controller, ControllerSpec, Sampling};
use hypex::lmi::build_chain;
use hypex::lmi::fixtures::{example_k, example_p, FINITE_TIME_MU};
use hypex::sim::{integrate_with, SimConfig};
use hypex::Vector;

fn main() -> hypex::Result<()> {
    let plant = build_chain(3)?;
    let spec = ControllerSpec::new(ControlVariant::FiniteTimeIlf, example_p(), example_k(), FINITE_TIME_MU)?
        .with_sampling(Sampling::Sampled { period: 1.0 })?;
    let mut controller = Controller::new(spec)?;
    let traj = integrate_with(&plant, &mut controller, &SimConfig::new(Vector::from_vec(vec![1.0, 0.0, 0.0]), 15.0))?;

    for row in controller.ledger() {
        println!("t = {:>4.1}  V = {:.4e}{}", row.t, row.v, if row.clamped { "  (clamped)" } else { "" });
    }
    println!("final ‖x‖ = {:.3e}", traj.norms.last().copied().unwrap_or(f64::NAN));
    Ok(())
}
