//! Typed experiment computations. [`super::run`] wraps these with file output.

use rayon::prelude::*;

use super::config::Config;
use crate::control::{ControlVariant, Controller, ControllerSpec, LedgerRow, Sampling};
use crate::error::{Error, Result};
use crate::ilf::conditions::{
    alpha1_hat, default_samples, hyper_c6_profile, hyper_c6_rate, quadratic_decay_rate,
    NestedDiagnostics,
};
use crate::ilf::{
    check_c4_c5, check_differential_conditions, check_norm_bounds, quad_form,
    solve_ilf_bisection, nested_level_diagnostics, ConditionReport, DifferentialRegime,
    IlfCandidate, NormRegime,
};
use crate::lmi::{
    build_chain, max_a_search, max_gamma_search, verify_finite_time_lmi, verify_hyper_lmi,
    GainCertificate, LmiKind, LmiReport, PlantConfig,
};
use crate::ratefn::{
    active_len, classify_decay, integrate_comparison, reference_curves, ComparisonSeries,
    DecayClass, DecayReport, RateProfile, ReferenceCurves,
};
use crate::sim::{integrate, integrate_with, NoiseConfig, SimConfig, Trajectory};
use crate::{Matrix, RowVector, Vector};

/// Steady-state residual: median `‖x‖` over this final fraction of the horizon.
pub const TAIL_FRACTION: f64 = 0.2;

fn witness(search: crate::lmi::WitnessSearch, what: &str) -> Result<f64> {
    search.value().ok_or_else(|| Error::Domain(format!("no feasible {what} for the given gains")))
}

fn plant_for(p: &Matrix) -> Result<PlantConfig> {
    build_chain(p.nrows())
}

// ---------------------------------------------------------------- fig1-rates

pub fn fig1_rates(cfg: &Config) -> Result<ReferenceCurves> {
    let (t_end, step) = (cfg.f64("t_end")?, cfg.f64("step")?);
    let count = (t_end / step).round() as usize;
    let grid: Vec<f64> = (0..=count).map(|k| k as f64 * step).collect();
    Ok(reference_curves(&grid))
}

/// `(ordering holds, FTS vanishes after 1.25)` at tolerance `1e−12`.
pub fn fig1_checks(c: &ReferenceCurves) -> (bool, bool) {
    let tol = 1e-12;
    let ordered = (0..c.t.len()).all(|k| c.hes2[k] <= c.hes1[k] + tol && c.hes1[k] <= c.es[k] + tol);
    let fts_zero = c.t.iter().zip(&c.fts).filter(|(t, _)| **t > 1.25).all(|(_, f)| f.abs() <= tol);
    (ordered, fts_zero)
}

// ---------------------------------------------------------------- comparison-ode

pub struct ComparisonResult {
    pub profile: RateProfile,
    pub series: ComparisonSeries,
    pub max_relative_error: f64,
}

pub fn comparison_ode(cfg: &Config) -> Result<ComparisonResult> {
    let profile = RateProfile::new(cfg.list("alpha")?)?;
    let series = integrate_comparison(&profile, cfg.f64("y0")?, cfg.f64("horizon")?, cfg.f64("step")?)?;
    let max_relative_error = series.max_relative_error(&profile)?;
    Ok(ComparisonResult { profile, series, max_relative_error })
}

// ---------------------------------------------------------------- lmi-verify

pub struct LmiWitnesses {
    pub a: f64,
    pub gamma: f64,
    pub finite_time: LmiReport,
    pub hyper: LmiReport,
    pub finite_time_mu: f64,
    pub hyper_mu: f64,
}

pub fn lmi_witnesses(p: &Matrix, k: &RowVector, ft_mu: f64, hyper_mu: f64, tol: f64) -> Result<LmiWitnesses> {
    let plant = plant_for(p)?;
    let ft = GainCertificate::from_gains(p.clone(), k.clone(), ft_mu, tol, LmiKind::FiniteTime)?;
    let a = witness(max_a_search(&ft.x, &ft.y, &plant, ft_mu, tol)?, "a")?;
    let hy = GainCertificate::from_gains(p.clone(), k.clone(), hyper_mu, tol, LmiKind::Hyper)?;
    let gamma = witness(max_gamma_search(&hy.x, &hy.y, &plant, hyper_mu, tol)?, "γ")?;
    let finite_time = verify_finite_time_lmi(&ft.with_witness(a), &plant)?;
    let hyper = verify_hyper_lmi(&hy.with_witness(gamma), &plant)?;
    Ok(LmiWitnesses { a, gamma, finite_time, hyper, finite_time_mu: ft_mu, hyper_mu })
}

pub fn lmi_verify(cfg: &Config) -> Result<LmiWitnesses> {
    lmi_witnesses(
        &cfg.matrix("p")?,
        &cfg.row("k")?,
        cfg.f64("ft_mu")?,
        cfg.f64("hyper_mu")?,
        cfg.f64("witness_tol")?,
    )
}

// ---------------------------------------------------------------- ex1-sampled-finite-time

pub struct Example1Result {
    pub trajectory: Trajectory,
    pub ledger: Vec<LedgerRow>,
    pub a: f64,
    pub v_min: f64,
    pub nested: NestedDiagnostics,
    /// Samples before the state first drops below the norm floor or the solver clamps.
    pub active_len: usize,
    pub decay: DecayReport,
    /// `V_{i+1} < V_i` whenever `V_i ≥ 10 v_min`.
    pub ledger_decreasing: bool,
}

pub fn example1(cfg: &Config) -> Result<Example1Result> {
    let p = cfg.matrix("p")?;
    let k = cfg.row("k")?;
    let mu = cfg.f64("mu")?;
    let plant = plant_for(&p)?;
    let spec = ControllerSpec::new(ControlVariant::FiniteTimeIlf, p.clone(), k.clone(), mu)?
        .with_sampling(Sampling::Sampled { period: cfg.f64("period")? })?
        .with_v_min(cfg.f64("v_min")?)?;
    let v_min = spec.v_min;
    let mut sim = SimConfig::new(cfg.vector("x0")?, cfg.f64("horizon")?);
    sim.dt = cfg.f64("dt")?;
    sim.norm_floor = cfg.f64("norm_floor")?;
    let mut controller = Controller::new(spec)?;
    let trajectory = integrate_with(&plant, &mut controller, &sim)?;
    let ledger = controller.ledger().to_vec();

    let ft = GainCertificate::from_gains(p.clone(), k, mu, 1e-9, LmiKind::FiniteTime)?;
    let a = witness(max_a_search(&ft.x, &ft.y, &plant, mu, cfg.f64("witness_tol")?)?, "a")?;

    let sample_times: Vec<f64> = ledger.iter().map(|r| r.t).collect();
    let nested = nested_level_diagnostics(
        &trajectory.times,
        &trajectory.states,
        &trajectory.v_values,
        &p,
        mu,
        a,
        &sample_times,
        10.0 * v_min,
    )?;
    let ledger_decreasing =
        ledger.windows(2).filter(|w| w[0].v >= 10.0 * v_min).all(|w| w[1].v < w[0].v);

    let clamp_at = trajectory.clamped.iter().position(|c| *c).unwrap_or(trajectory.len());
    let active = active_len(&trajectory.norms, sim.norm_floor * (1.0 + 1e-12)).min(clamp_at);
    let decay = classify_decay(
        &trajectory.times[..active],
        &trajectory.norms[..active],
        cfg.f64("window")?,
    )?;
    Ok(Example1Result { trajectory, ledger, a, v_min, nested, active_len: active, decay, ledger_decreasing })
}

// ---------------------------------------------------------------- ex2-hyper

pub struct Example2Result {
    pub trajectory: Trajectory,
    /// First sample inside the unit ellipsoid `xᵀPx < 1`.
    pub entry: Option<usize>,
    /// End (exclusive) of the segment before the norm floor or the `v_min` clamp.
    pub active_end: usize,
    /// `V` strictly decreasing on `[entry, active_end)`.
    pub v_decreasing: bool,
    pub decay: DecayReport,
}

pub fn example2(cfg: &Config) -> Result<Example2Result> {
    let p = cfg.matrix("p")?;
    let plant = plant_for(&p)?;
    let spec = ControllerSpec::new(ControlVariant::HyperIlf, p.clone(), cfg.row("k")?, cfg.f64("mu")?)?
        .with_v_min(cfg.f64("v_min")?)?;
    let mut sim = SimConfig::new(cfg.vector("x0")?, cfg.f64("horizon")?);
    sim.dt = cfg.f64("dt")?;
    sim.norm_floor = cfg.f64("norm_floor")?;
    let trajectory = integrate(&plant, &spec, &sim)?;

    let entry = trajectory.states.iter().position(|x| quad_form(&p, x) < 1.0);
    let clamp_at = trajectory.clamped.iter().position(|c| *c).unwrap_or(trajectory.len());
    let active_end = active_len(&trajectory.norms, sim.norm_floor * (1.0 + 1e-12)).min(clamp_at);
    let start = entry.unwrap_or(active_end).min(active_end);
    let v = &trajectory.v_values[start..active_end];
    let v_decreasing = entry.is_some() && v.windows(2).all(|w| w[1] < w[0]);
    let decay = classify_decay(
        &trajectory.times[start..active_end],
        &trajectory.norms[start..active_end],
        cfg.f64("window")?,
    )?;
    Ok(Example2Result { trajectory, entry, active_end, v_decreasing, decay })
}

// ---------------------------------------------------------------- compare-noise / compare-delay

fn comparator_specs(cfg: &Config) -> Result<(ControllerSpec, ControllerSpec)> {
    let p = cfg.matrix("p")?;
    let k = cfg.row("k")?;
    let hyper = ControllerSpec::new(ControlVariant::HyperIlf, p.clone(), k.clone(), cfg.f64("hyper_mu")?)?;
    let ft = ControllerSpec::new(ControlVariant::FiniteTimeIlf, p, k, cfg.f64("ft_mu")?)?;
    Ok((hyper, ft))
}

fn base_sim(cfg: &Config) -> Result<SimConfig> {
    let mut sim = SimConfig::new(cfg.vector("x0")?, cfg.f64("horizon")?);
    sim.dt = cfg.f64("dt")?;
    Ok(sim)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedResidual {
    pub seed: u64,
    pub hyper: f64,
    pub finite_time: f64,
}

impl PairedResidual {
    pub fn hyper_wins(&self) -> bool {
        self.hyper <= self.finite_time
    }
}

pub struct NoiseComparison {
    pub pairs: Vec<PairedResidual>,
    pub wins: usize,
    pub required_wins: usize,
    /// Trajectories for the first seed, kept for plotting.
    pub first: (Trajectory, Trajectory),
}

pub fn compare_noise(cfg: &Config) -> Result<NoiseComparison> {
    let (hyper, ft) = comparator_specs(cfg)?;
    let plant = plant_for(&hyper.p)?;
    let sim = base_sim(cfg)?;
    let base_seed = cfg.u64("seed")?;
    let seeds = cfg.usize("seeds")?;
    let power = cfg.f64("noise_power")?;
    let interval = cfg.f64("noise_interval")?;
    let runs: Vec<(u64, Trajectory, Trajectory)> = (0..seeds as u64)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed + i;
            let mut s = sim.clone();
            s.noise = Some(NoiseConfig { power, sample_interval: interval, seed });
            Ok((seed, integrate(&plant, &hyper, &s)?, integrate(&plant, &ft, &s)?))
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<PairedResidual> = runs
        .iter()
        .map(|(seed, h, f)| PairedResidual {
            seed: *seed,
            hyper: h.tail_median_norm(TAIL_FRACTION),
            finite_time: f.tail_median_norm(TAIL_FRACTION),
        })
        .collect();
    let wins = pairs.iter().filter(|p| p.hyper_wins()).count();
    let first = runs
        .into_iter()
        .next()
        .map(|(_, h, f)| (h, f))
        .ok_or_else(|| Error::Config("seeds must be at least 1".into()))?;
    Ok(NoiseComparison { pairs, wins, required_wins: cfg.usize("required_wins")?, first })
}

pub struct DelayComparison {
    pub hyper: Trajectory,
    pub finite_time: Trajectory,
    pub hyper_residual: f64,
    pub finite_time_residual: f64,
    pub hyper_max: f64,
    pub finite_time_max: f64,
    pub bound: f64,
    pub delay_steps: usize,
    pub delay_rounded: bool,
}

impl DelayComparison {
    pub fn bounded(&self) -> bool {
        self.hyper_max <= self.bound && self.finite_time_max <= self.bound
    }

    pub fn hyper_wins(&self) -> bool {
        self.hyper_residual <= self.finite_time_residual
    }
}

pub fn compare_delay(cfg: &Config) -> Result<DelayComparison> {
    let (hyper, ft) = comparator_specs(cfg)?;
    let plant = plant_for(&hyper.p)?;
    let mut sim = base_sim(cfg)?;
    sim.delay_tau = cfg.f64("delay_tau")?;
    let (h, f) = rayon::join(|| integrate(&plant, &hyper, &sim), || integrate(&plant, &ft, &sim));
    let (h, f) = (h?, f?);
    Ok(DelayComparison {
        hyper_residual: h.tail_median_norm(TAIL_FRACTION),
        finite_time_residual: f.tail_median_norm(TAIL_FRACTION),
        hyper_max: h.max_norm(),
        finite_time_max: f.max_norm(),
        bound: 10.0 * sim.x0.norm(),
        delay_steps: sim.delay_steps(),
        delay_rounded: sim.delay_rounded(),
        hyper: h,
        finite_time: f,
    })
}

// ---------------------------------------------------------------- certify-conditions

pub struct Certification {
    pub gamma: f64,
    pub c1: f64,
    pub c2: f64,
    pub alpha1_hat: f64,
    pub k_reference: f64,
    pub reports: Vec<ConditionReport>,
}

impl Certification {
    pub fn report(&self, id: crate::ilf::ConditionId) -> Option<&ConditionReport> {
        self.reports.iter().find(|r| r.condition_id == id)
    }
}

pub fn certify_conditions(cfg: &Config) -> Result<Certification> {
    let p = cfg.matrix("p")?;
    let k = cfg.row("k")?;
    let mu = cfg.f64("mu")?;
    let plant = plant_for(&p)?;
    let samples = default_samples(p.nrows(), cfg.u64("seed")?);

    let cert = GainCertificate::from_gains(p.clone(), k.clone(), mu, 1e-9, LmiKind::Hyper)?;
    let gamma = witness(max_gamma_search(&cert.x, &cert.y, &plant, mu, cfg.f64("witness_tol")?)?, "γ")?;

    let q1 = IlfCandidate::hyper(p.clone(), mu)?;
    let q2 = IlfCandidate::quadratic(p.clone())?;

    // C4 is probed at a log grid of V values crossed with the state samples.
    let pairs: Vec<(f64, Vector)> = samples
        .iter()
        .enumerate()
        .map(|(i, x)| (10f64.powf(-8.0 + 12.0 * (i % 25) as f64 / 24.0), x.clone()))
        .collect();
    let (c4, c5) = check_c4_c5(&q1, &q2, &pairs)?;

    let c1 = hyper_c6_rate(gamma, mu)?;
    let spec = ControllerSpec::new(ControlVariant::HyperIlf, p.clone(), k.clone(), mu)?;
    let b = plant.b.column(0).into_owned();
    let field = |x: &Vector| -> Result<Vector> {
        let v = solve_ilf_bisection(&q1, x, q1.default_v_min(), spec.bisect_precision)?.v;
        let u = crate::control::u_hyper(&spec, v, x).u;
        Ok(&plant.a * x + &b * u)
    };
    let c6 = check_differential_conditions(
        &q1,
        field,
        &DifferentialRegime::C6 { c1, profile: hyper_c6_profile(c1)? },
        &samples,
    )?;

    let a_cl = &plant.a + &plant.b * &k;
    let c2 = quadratic_decay_rate(&p, &a_cl)?;
    let linear = |x: &Vector| Ok(&a_cl * x);
    let c7 = check_differential_conditions(&q2, linear, &DifferentialRegime::C7 { c2 }, &samples)?;

    let ln_em1 = (std::f64::consts::E - 1.0).ln();
    let c9 = check_norm_bounds(&q1, NormRegime::C9 { alpha_r: ln_em1 }, &samples)?;
    let c10 = check_norm_bounds(&q2, NormRegime::C10, &samples)?;

    let lambda_min = crate::lmi::sym_eigs(&p, crate::lmi::eigen::DEFAULT_TOL)?[0];
    Ok(Certification {
        gamma,
        c1,
        c2,
        alpha1_hat: alpha1_hat(mu),
        k_reference: lambda_min.sqrt() / 2.2,
        reports: vec![c4, c5, c6, c7, c9, c10],
    })
}

/// Convenience for callers that only need the classification.
pub fn is_hyperexponential(report: &DecayReport) -> bool {
    report.classification == DecayClass::Hyperexponential
}
