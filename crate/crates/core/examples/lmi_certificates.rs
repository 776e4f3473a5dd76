//! Checks the example gains against both LMIs and searches the largest witnesses.
//!
//! `cargo run --release --example lmi_certificates`

use hypex::lmi::fixtures::{example_k, example_p, FINITE_TIME_MU, HYPER_MU};
use hypex::lmi::{
    build_chain, max_a_search, max_gamma_search, sym_eigs, verify_hyper_lmi, GainCertificate, LmiKind,
};

fn main() -> hypex::Result<()> {
    let plant = build_chain(3)?;
    let p = example_p();
    println!("eig(P) = {:?}", sym_eigs(&p, 1e-14)?);

    let cert = GainCertificate::from_gains(p, example_k(), HYPER_MU, 0.4, LmiKind::Hyper)?;
    let report = verify_hyper_lmi(&cert, &plant)?;
    println!("hyper LMI at γ = 0.4: feasible = {}, λmax = {:.3e}", report.feasible, report.lhs_max);

    let a = max_a_search(&cert.x, &cert.y, &plant, FINITE_TIME_MU, 1e-9)?;
    let gamma = max_gamma_search(&cert.x, &cert.y, &plant, HYPER_MU, 1e-9)?;
    println!("largest a = {:?}, largest γ = {:?}", a.value(), gamma.value());
    Ok(())
}
