//! Best-effort gain synthesis for the hyperexponential LMI by derivative-free pattern search.
//!
//! This is not an SDP solver: it minimizes `λ_max` of the LMI left-hand side over the
//! free entries of `(X, Y)` with penalties keeping `X` and `XH + HX` away from
//! singularity, and only hands back certificates that pass [`verify_hyper_lmi`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eigen::{lambda_max, lambda_min, symmetrize};
use super::plant::PlantConfig;
use super::verify::{hyper_lhs, verify_hyper_lmi, weight_matrix, GainCertificate, LmiKind};
use crate::error::{domain, Result};
use crate::{Matrix, RowVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    pub seed: u64,
    /// Maximum number of objective evaluations.
    pub budget: usize,
    /// Lower bound imposed on `λ_min(X)` and `λ_min(XH + HX)`.
    pub delta: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self { seed: 7, budget: 20_000, delta: 1e-3 }
    }
}

#[derive(Debug, Clone)]
pub enum SynthesisOutcome {
    Found(GainCertificate),
    /// Budget exhausted; `best_lhs_max` is the smallest `λ_max(lhs)` reached.
    NotFound { best_lhs_max: f64, evaluations: usize },
}

impl SynthesisOutcome {
    pub fn certificate(&self) -> Option<&GainCertificate> {
        match self {
            SynthesisOutcome::Found(c) => Some(c),
            SynthesisOutcome::NotFound { .. } => None,
        }
    }
}

pub fn synthesize_gains(
    plant: &PlantConfig,
    mu: f64,
    gamma_target: f64,
    options: &SynthesisOptions,
) -> Result<SynthesisOutcome> {
    if !plant.is_controllable() {
        return Err(domain("plant is not controllable"));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(domain(format!("μ must lie in (0, 1], got {mu}")));
    }
    if !(gamma_target > 0.0) {
        return Err(domain("γ target must be positive"));
    }
    let n = plant.n();
    let h = weight_matrix(n, mu)?;
    let dim = n * (n + 1) / 2 + n;

    let unpack = |theta: &[f64]| -> (Matrix, RowVector) {
        let mut x = Matrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                x[(i, j)] = theta[k];
                x[(j, i)] = theta[k];
                k += 1;
            }
        }
        (x, RowVector::from_iterator(n, theta[k..].iter().copied()))
    };

    let evaluations = std::cell::Cell::new(0usize);
    let objective = |theta: &[f64]| -> Result<(f64, f64)> {
        evaluations.set(evaluations.get() + 1);
        let (x, y) = unpack(theta);
        let lhs = lambda_max(&symmetrize(&hyper_lhs(plant, &x, &y, mu, gamma_target)?))?;
        let x_min = lambda_min(&x)?;
        let s_min = lambda_min(&symmetrize(&(&x * &h + &h * &x)))?;
        let penalty = (options.delta - x_min).max(0.0) + (options.delta - s_min).max(0.0);
        Ok((lhs / x.norm().max(options.delta) + 10.0 * penalty, lhs))
    };

    // Start from X = I, Y = 0.
    let mut theta = vec![0.0; dim];
    {
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                if i == j {
                    theta[k] = 1.0;
                }
                k += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let (mut best, mut best_lhs) = objective(&theta)?;
    let mut step = 1.0;

    let try_accept = |theta: &[f64]| -> Result<Option<GainCertificate>> {
        let (x, y) = unpack(theta);
        let Ok(cert) = GainCertificate::from_xy(x, y, mu, gamma_target, LmiKind::Hyper) else {
            return Ok(None);
        };
        let report = verify_hyper_lmi(&cert, plant)?;
        Ok((report.feasible && report.lhs_max <= 0.0).then_some(cert))
    };

    while evaluations.get() < options.budget && step > 1e-12 {
        if let Some(cert) = try_accept(&theta)? {
            return Ok(SynthesisOutcome::Found(cert));
        }
        let mut improved = false;
        for i in 0..dim {
            for sign in [1.0, -1.0] {
                let mut trial = theta.clone();
                trial[i] += sign * step;
                let (f, lhs) = objective(&trial)?;
                if f < best {
                    theta = trial;
                    best = f;
                    best_lhs = lhs;
                    improved = true;
                    break;
                }
            }
        }
        // Random direction helps escape the coordinate-aligned stalls.
        let dir: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let trial: Vec<f64> = theta.iter().zip(&dir).map(|(t, d)| t + step * d).collect();
        let (f, lhs) = objective(&trial)?;
        if f < best {
            theta = trial;
            best = f;
            best_lhs = lhs;
            improved = true;
        }
        if !improved {
            step *= 0.5;
        }
    }
    if let Some(cert) = try_accept(&theta)? {
        return Ok(SynthesisOutcome::Found(cert));
    }
    Ok(SynthesisOutcome::NotFound { best_lhs_max: best_lhs, evaluations: evaluations.get() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmi::{build_chain, max_gamma_search};

    #[test]
    fn scalar_plant() {
        let plant = build_chain(1).unwrap();
        let out = synthesize_gains(&plant, 1.0, 1.0, &SynthesisOptions::default()).unwrap();
        let cert = out.certificate().expect("scalar LMI 2Y + 2γX ≤ 0 is solvable");
        assert!(verify_hyper_lmi(cert, &plant).unwrap().feasible);
        assert!(cert.y[0] <= -cert.x[(0, 0)]);
    }

    #[test]
    fn third_order_small_gamma() {
        let plant = build_chain(3).unwrap();
        let out = synthesize_gains(&plant, 0.2, 0.05, &SynthesisOptions::default()).unwrap();
        let cert = out.certificate().expect("small γ should be reachable");
        assert!(verify_hyper_lmi(cert, &plant).unwrap().feasible);
        let g = max_gamma_search(&cert.x, &cert.y, &plant, 0.2, 1e-9).unwrap().value().unwrap();
        assert!(g >= 0.05 - 1e-9);
    }

    #[test]
    fn unreachable_gamma_reports_not_found() {
        let plant = build_chain(3).unwrap();
        let opts = SynthesisOptions { budget: 2_000, ..Default::default() };
        let out = synthesize_gains(&plant, 0.2, 1e6, &opts).unwrap();
        assert!(matches!(out, SynthesisOutcome::NotFound { .. }));
    }
}
