//! Nested-exponential rates, the comparison ODE and the decay classifier.
//!
//! `cargo run --release --example rate_functions`

use hypex::ratefn::{classify_decay, envelope, integrate_comparison, rho, sigma_product, RateProfile};

fn main() -> hypex::Result<()> {
    let profile = RateProfile::new(vec![1.0, 1.0])?;
    for t in [0.0, 0.5, 1.0, 2.0, 3.0] {
        println!(
            "t = {t:.1}  ρ₁ = {:>9.4}  envelope = {:.3e}",
            rho(&profile, 1, t)?,
            envelope(&profile, 1.0, t)?
        );
    }
    for s in [1.0, 1e-2, 1e-6] {
        println!("σ₁σ₂({s:e}) = {:.4}", sigma_product(&profile, s)?);
    }

    let series = integrate_comparison(&profile, 1.0, 3.0, 1e-4)?;
    println!("comparison ODE, max relative error {:.2e}", series.max_relative_error(&profile)?);

    // The decay classifier tells e^{−t} apart from e^{−(e^t − 1)}.
    let times: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.003).collect();
    let exp: Vec<f64> = times.iter().map(|t| (-t).exp()).collect();
    let hyper: Vec<f64> = times.iter().map(|t| (-t.exp_m1()).exp()).collect();
    println!("e^-t: {}", classify_decay(&times, &exp, 0.5)?.classification);
    println!("e^-(e^t-1): {}", classify_decay(&times, &hyper, 0.5)?.classification);
    Ok(())
}
