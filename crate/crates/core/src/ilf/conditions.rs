//! Numerical samplers for the Lyapunov-type conditions attached to an ILF design.
//!
//! Every checker evaluates the inequality at a finite sample set and reports the worst
//! slack. Holding on a sample set is evidence, not proof.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::candidate::{IlfCandidate, IlfVariant};
use super::dilation::varrho;
use super::solver::{solve_ilf_bisection, DEFAULT_PRECISION};
use crate::error::{domain, Error, Result};
use crate::ratefn::{sigma_product, RateProfile};
use crate::{Matrix, Vector};

/// Allowed negative slack in the differential conditions.
pub const DIFFERENTIAL_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConditionId {
    C4,
    C5,
    C6,
    C7,
    C8,
    C9,
    C10,
    Beta,
    Nested,
}

impl std::fmt::Display for ConditionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConditionId::C4 => "C4",
            ConditionId::C5 => "C5",
            ConditionId::C6 => "C6",
            ConditionId::C7 => "C7",
            ConditionId::C8 => "C8",
            ConditionId::C9 => "C9",
            ConditionId::C10 => "C10",
            ConditionId::Beta => "beta",
            ConditionId::Nested => "nested",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub condition_id: ConditionId,
    pub holds: bool,
    /// Worst-case slack; its required sign depends on the condition.
    pub margin: f64,
    pub estimated_constants: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    pub sample_count: usize,
    /// Samples left out because they fell on the other branch or hit the `v_min` clamp.
    pub skipped: usize,
    pub worst_sample: Option<Vector>,
}

impl ConditionReport {
    fn new(condition_id: ConditionId) -> Self {
        Self {
            condition_id,
            holds: false,
            margin: f64::NAN,
            estimated_constants: BTreeMap::new(),
            flags: BTreeMap::new(),
            sample_count: 0,
            skipped: 0,
            worst_sample: None,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let verdict = if self.holds { "holds" } else { "fails" };
        let _ = writeln!(out, "{}: {verdict}", self.condition_id);
        let _ = writeln!(out, "  margin   {:.6e}", self.margin);
        let _ = writeln!(out, "  samples  {} ({} skipped)", self.sample_count, self.skipped);
        for (k, v) in &self.estimated_constants {
            let _ = writeln!(out, "  {k:<8} {v:.6e}");
        }
        for (k, v) in &self.flags {
            let _ = writeln!(out, "  {k:<8} {v}");
        }
        if let Some(x) = &self.worst_sample {
            let xs: Vec<String> = x.iter().map(|v| format!("{v:.4e}")).collect();
            let _ = writeln!(out, "  worst    ({})", xs.join(", "));
        }
        out
    }

    /// Rows `condition,holds,margin,constant_name,constant_value`; one row per constant,
    /// or a single row with empty constant columns.
    pub fn csv_rows(&self) -> Vec<String> {
        let head = format!("{},{},{:e}", self.condition_id, self.holds, self.margin);
        if self.estimated_constants.is_empty() {
            return vec![format!("{head},,")];
        }
        self.estimated_constants.iter().map(|(k, v)| format!("{head},{k},{v:e}")).collect()
    }
}

pub const CSV_HEADER: &str = "condition,holds,margin,constant_name,constant_value";

/// `count` points with log-spaced radii in `[r_min, r_max]` and uniformly random directions.
pub fn shell_samples(n: usize, count: usize, r_min: f64, r_max: f64, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l0, l1) = (r_min.ln(), r_max.ln());
    (0..count)
        .map(|k| {
            let frac = if count > 1 { k as f64 / (count - 1) as f64 } else { 0.5 };
            let r = (l0 + frac * (l1 - l0)).exp();
            loop {
                let d = Vector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(&mut rng)));
                let norm = d.norm();
                if norm > 1e-8 {
                    break d * (r / norm);
                }
            }
        })
        .collect()
}

/// The default set: 500 points on shells `‖x‖ ∈ [1e−4, 1e2]`.
pub fn default_samples(n: usize, seed: u64) -> Vec<Vector> {
    shell_samples(n, 500, 1e-4, 1e2, seed)
}

/// C4 (`∂Q/∂V < 0` for both candidates) and C5 (`Q₁(1, x) = Q₂(1, x)`).
///
/// The C4 margin is the smallest `−V ∂Q/∂V / (Q + 1)` over samples and both candidates,
/// a scale-free log-derivative that must be positive. The C5 margin is the largest
/// `|Q₁(1, x) − Q₂(1, x)|`, which must vanish.
pub fn check_c4_c5(
    c1: &IlfCandidate,
    c2: &IlfCandidate,
    samples: &[(f64, Vector)],
) -> Result<(ConditionReport, ConditionReport)> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples".into()));
    }
    let mut c4 = ConditionReport::new(ConditionId::C4);
    let mut c5 = ConditionReport::new(ConditionId::C5);
    let mut worst4 = f64::INFINITY;
    let mut worst5 = 0.0f64;
    for (v, x) in samples {
        for c in [c1, c2] {
            let slope = c.dq_dv_fd(*v, x)?;
            let level = c.level(*v, x)?;
            let slack = -v * slope / level;
            if !(slack >= worst4) {
                worst4 = slack;
                c4.worst_sample = Some(x.clone());
            }
        }
        let gap = (c1.q_eval(1.0, x)? - c2.q_eval(1.0, x)?).abs();
        if !(gap <= worst5) {
            worst5 = gap;
            c5.worst_sample = Some(x.clone());
        }
    }
    c4.margin = worst4;
    c4.holds = worst4 > 0.0;
    c4.sample_count = samples.len();
    c5.margin = worst5;
    c5.holds = worst5 == 0.0;
    c5.sample_count = samples.len();
    Ok((c4, c5))
}

#[derive(Debug, Clone, PartialEq)]
pub enum DifferentialRegime {
    /// `∂Q/∂x·f ≤ c₁ V ∏σᵢ(V) ∂Q/∂V` on `V ∈ (0, 1]`.
    C6 { c1: f64, profile: RateProfile },
    /// `∂Q/∂x·f ≤ c₂ V ∂Q/∂V` on `V ≥ 1`.
    C7 { c2: f64 },
}

/// Margin is the smallest `(rhs − lhs)/|rhs|`; holds when it is at least `−1e−8`.
/// The ratio `lhs/rhs` at the worst sample is reported as `worst_ratio`.
pub fn check_differential_conditions(
    c: &IlfCandidate,
    closed_loop_field: impl Fn(&Vector) -> Result<Vector>,
    regime: &DifferentialRegime,
    samples: &[Vector],
) -> Result<ConditionReport> {
    let id = match regime {
        DifferentialRegime::C6 { .. } => ConditionId::C6,
        DifferentialRegime::C7 { .. } => ConditionId::C7,
    };
    let mut report = ConditionReport::new(id);
    let mut worst = f64::INFINITY;
    let mut worst_ratio = f64::NAN;
    for x in samples {
        let sol = solve_ilf_bisection(c, x, c.default_v_min(), DEFAULT_PRECISION)?;
        let on_branch = match regime {
            DifferentialRegime::C6 { .. } => sol.v <= 1.0,
            DifferentialRegime::C7 { .. } => sol.v >= 1.0,
        };
        if sol.clamped || !on_branch {
            report.skipped += 1;
            continue;
        }
        let v = sol.v;
        let lhs = c.grad_x_fd(v, x)?.dot(&closed_loop_field(x)?);
        let scale = match regime {
            DifferentialRegime::C6 { c1, profile } => c1 * v * sigma_product(profile, v)?,
            DifferentialRegime::C7 { c2 } => c2 * v,
        };
        let rhs = scale * c.dq_dv_fd(v, x)?;
        let slack = (rhs - lhs) / rhs.abs().max(f64::MIN_POSITIVE);
        report.sample_count += 1;
        if !(slack >= worst) {
            worst = slack;
            worst_ratio = lhs / rhs;
            report.worst_sample = Some(x.clone());
        }
    }
    if report.sample_count == 0 {
        return Err(Error::InsufficientData(format!("no samples on the {id} branch")));
    }
    report.margin = worst;
    report.holds = worst >= -DIFFERENTIAL_SLACK;
    report.estimated_constants.insert("worst_ratio".into(), worst_ratio);
    match regime {
        DifferentialRegime::C6 { c1, .. } => report.estimated_constants.insert("c1".into(), *c1),
        DifferentialRegime::C7 { c2 } => report.estimated_constants.insert("c2".into(), *c2),
    };
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormRegime {
    /// `k₁‖x‖^a ≤ V ≤ k₂‖x‖^a` on every sample.
    C8 { a: f64 },
    /// `α_r / (−ln V + 1) ≥ k‖x‖` on `V ≤ 1`.
    C9 { alpha_r: f64 },
    /// `k₁‖x‖ ≤ V ≤ k₂‖x‖` on `V ≥ 1`.
    C10,
}

/// Estimates the constants of a norm-bound condition. The margin is the infimum
/// (`k̂` for C9, `k̂₁` otherwise); the condition holds when it is positive and the
/// supremum is finite.
pub fn check_norm_bounds(
    c: &IlfCandidate,
    regime: NormRegime,
    samples: &[Vector],
) -> Result<ConditionReport> {
    let id = match regime {
        NormRegime::C8 { .. } => ConditionId::C8,
        NormRegime::C9 { .. } => ConditionId::C9,
        NormRegime::C10 => ConditionId::C10,
    };
    let mut report = ConditionReport::new(id);
    let (mut inf, mut sup) = (f64::INFINITY, 0.0f64);
    for x in samples {
        let sol = solve_ilf_bisection(c, x, c.default_v_min(), DEFAULT_PRECISION)?;
        let v = sol.v;
        let keep = !sol.clamped
            && match regime {
                NormRegime::C8 { .. } => true,
                NormRegime::C9 { .. } => v <= 1.0,
                NormRegime::C10 => v >= 1.0,
            };
        if !keep {
            report.skipped += 1;
            continue;
        }
        let r = x.norm();
        let value = match regime {
            NormRegime::C8 { a } => v / r.powf(a),
            NormRegime::C9 { alpha_r } => alpha_r / ((-v.ln() + 1.0) * r),
            NormRegime::C10 => v / r,
        };
        report.sample_count += 1;
        if value < inf {
            inf = value;
            report.worst_sample = Some(x.clone());
        }
        sup = sup.max(value);
    }
    if report.sample_count == 0 {
        return Err(Error::InsufficientData(format!("no samples left for {id}")));
    }
    report.margin = inf;
    match regime {
        NormRegime::C9 { alpha_r } => {
            report.holds = inf > 0.0;
            report.estimated_constants.insert("k".into(), inf);
            report.estimated_constants.insert("alpha_r".into(), alpha_r);
        }
        NormRegime::C8 { a } => {
            report.holds = inf > 0.0 && sup.is_finite();
            report.estimated_constants.insert("k1".into(), inf);
            report.estimated_constants.insert("k2".into(), sup);
            report.estimated_constants.insert("a".into(), a);
        }
        NormRegime::C10 => {
            report.holds = inf > 0.0 && sup.is_finite();
            report.estimated_constants.insert("k1".into(), inf);
            report.estimated_constants.insert("k2".into(), sup);
        }
    }
    Ok(report)
}

/// Fraction of non-monotone consecutive pairs tolerated by [`beta_margin`].
pub const BETA_NONMONOTONE_ALLOWANCE: f64 = 0.05;

/// Empirical `β̂(V⁻¹) = −V̇/V` along a sampled `V(t)` series.
///
/// The margin is `min(min β̂, allowance − non-monotone fraction)`; the condition holds
/// when it is nonnegative. The `growth` flag compares the last and first deciles.
pub fn beta_margin(times: &[f64], v_series: &[f64]) -> Result<ConditionReport> {
    if times.len() != v_series.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), got: v_series.len() });
    }
    if v_series.len() < 3 {
        return Err(Error::InsufficientData("need at least 3 points".into()));
    }
    if v_series.iter().any(|v| !(*v > 0.0)) {
        return Err(domain("V series must be strictly positive"));
    }
    // Central differences of ln V on the interior points.
    let mut pairs: Vec<(f64, f64)> = (1..v_series.len() - 1)
        .map(|k| {
            let slope = (v_series[k + 1].ln() - v_series[k - 1].ln()) / (times[k + 1] - times[k - 1]);
            (1.0 / v_series[k], -slope)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let betas: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let scale = betas.iter().fold(0.0f64, |m, b| m.max(b.abs())).max(f64::MIN_POSITIVE);
    let drops = betas.windows(2).filter(|w| w[1] < w[0] - 1e-6 * scale).count();
    let nonmonotone = drops as f64 / (betas.len() - 1).max(1) as f64;
    let min_beta = betas.iter().copied().fold(f64::INFINITY, f64::min);
    let decile = (betas.len() / 10).max(1);
    let first = betas[..decile].iter().sum::<f64>() / decile as f64;
    let last = betas[betas.len() - decile..].iter().sum::<f64>() / decile as f64;

    let mut report = ConditionReport::new(ConditionId::Beta);
    report.sample_count = betas.len();
    report.margin = min_beta.min(BETA_NONMONOTONE_ALLOWANCE - nonmonotone);
    report.holds = report.margin >= 0.0;
    report.estimated_constants.insert("beta_min".into(), min_beta);
    report.estimated_constants.insert("beta_first".into(), first);
    report.estimated_constants.insert("beta_last".into(), last);
    report.estimated_constants.insert("nonmonotone".into(), nonmonotone);
    report.flags.insert("nondecreasing".into(), nonmonotone <= BETA_NONMONOTONE_ALLOWANCE);
    report.flags.insert("growth".into(), last > first * (1.0 + 1e-6) + 1e-12);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NestedLevel {
    pub t: f64,
    /// Held `V_i`.
    pub v: f64,
    /// `Ṽ_i = x(t_{i+1})ᵀ P_i x(t_{i+1})` at the end of the hold interval.
    pub v_tilde: f64,
    /// `c_i = a Ṽ_i^{−μ}`.
    pub c: f64,
    /// `a V_i^{−μ}`, the rate the hold-interval estimate actually guarantees.
    pub c_held: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NestedDiagnostics {
    pub levels: Vec<NestedLevel>,
    /// `V_i` strictly decreasing over the levels with `V_i ≥ min_level`.
    pub v_decreasing: bool,
    /// `c_i` strictly increasing over the same levels.
    pub c_increasing: bool,
}

impl NestedDiagnostics {
    pub fn report(&self) -> ConditionReport {
        let mut r = ConditionReport::new(ConditionId::Nested);
        r.sample_count = self.levels.len();
        r.holds = self.v_decreasing && self.c_increasing;
        r.margin = self
            .levels
            .windows(2)
            .map(|w| w[1].c - w[0].c)
            .fold(f64::INFINITY, f64::min);
        r.flags.insert("v_decreasing".into(), self.v_decreasing);
        r.flags.insert("c_increasing".into(), self.c_increasing);
        if let Some(last) = self.levels.last() {
            r.estimated_constants.insert("c_last".into(), last.c);
        }
        r
    }
}

/// Sampled-controller diagnostics. `sample_times` are the update instants `t_i`; each hold
/// interval ends at the next sample time (the last one at the end of the trajectory).
/// Levels below `min_level` (the solver clamp) are kept in the list but excluded from the
/// monotonicity flags.
#[allow(clippy::too_many_arguments)]
pub fn nested_level_diagnostics(
    times: &[f64],
    states: &[Vector],
    v_values: &[f64],
    p: &Matrix,
    mu: f64,
    a: f64,
    sample_times: &[f64],
    min_level: f64,
) -> Result<NestedDiagnostics> {
    if sample_times.is_empty() {
        return Err(Error::InsufficientData("no sample times".into()));
    }
    if times.is_empty() || states.len() != times.len() || v_values.len() != times.len() {
        return Err(Error::Contract("trajectory columns have mismatched lengths".into()));
    }
    let n = p.nrows();
    let dil = super::dilation::Dilation::descending(n, mu)?;
    let find = |t: f64| -> Result<usize> {
        let k = times.partition_point(|s| *s < t);
        let tol = 1e-9 * t.abs().max(1.0);
        [k.saturating_sub(1), k]
            .into_iter()
            .filter(|&i| i < times.len() && (times[i] - t).abs() <= tol)
            .next()
            .ok_or(Error::MissingSample(t))
    };
    let mut levels = Vec::with_capacity(sample_times.len());
    for (i, &t) in sample_times.iter().enumerate() {
        let k = find(t)?;
        let end = match sample_times.get(i + 1) {
            Some(&t_next) => find(t_next)?,
            None => times.len() - 1,
        };
        let v = v_values[k];
        let z = dil.apply_ln(-v.ln(), &states[end]);
        let v_tilde = super::candidate::quad_form(p, &z);
        levels.push(NestedLevel {
            t,
            v,
            v_tilde,
            c: a * v_tilde.powf(-mu),
            c_held: a * v.powf(-mu),
        });
    }
    let active: Vec<&NestedLevel> = levels.iter().filter(|l| l.v > min_level).collect();
    let v_decreasing = active.windows(2).all(|w| w[1].v < w[0].v);
    let c_increasing = active.windows(2).all(|w| w[1].c > w[0].c);
    Ok(NestedDiagnostics { levels, v_decreasing, c_increasing })
}

/// `α̂₁(μ) = inf_{V∈(0,1]} [ϱ^μ(V) − ln((−ln V + ln(e−1))/ln(e−1))]` on a log grid down to
/// `1e−300`.
pub fn alpha1_hat(mu: f64) -> f64 {
    let ln_em1 = (std::f64::consts::E - 1.0).ln();
    log_grid(1e-300, 1.0, 4000)
        .map(|v| {
            let rho = varrho(v).expect("grid is positive");
            rho.powf(mu) - ((-v.ln() + ln_em1) / ln_em1).ln()
        })
        .fold(f64::INFINITY, f64::min)
}

/// The rate profile `(c₁, 1, ln(e−1))` used for the hyperexponential C6 check.
pub fn hyper_c6_profile(c1: f64) -> Result<RateProfile> {
    RateProfile::new(vec![c1, 1.0, (std::f64::consts::E - 1.0).ln()])
}

/// `c₁ = γ · inf_V ϱ^{1+μ}(V)(V + e − 1)/((e − 1)σ₁(V)σ₂(V))` with the profile of
/// [`hyper_c6_profile`]. With this `c₁` the LMI bound implies C6 for the hyper law.
pub fn hyper_c6_rate(gamma: f64, mu: f64) -> Result<f64> {
    let em1 = std::f64::consts::E - 1.0;
    let profile = hyper_c6_profile(1.0)?;
    let ratio = |ln_v: f64| -> f64 {
        let v = ln_v.exp().min(1.0);
        let rho = varrho(v).expect("positive grid");
        let prod = sigma_product(&profile, v).expect("V in (0, 1]");
        rho.powf(1.0 + mu) * (v + em1) / (em1 * prod)
    };
    let (lo, hi) = (1e-300f64.ln(), 0.0);
    let count = 4000;
    let step = (hi - lo) / (count - 1) as f64;
    let best = (0..count)
        .map(|k| lo + step * k as f64)
        .min_by(|a, b| ratio(*a).total_cmp(&ratio(*b)))
        .expect("nonempty grid");
    // Golden-section refinement on the neighbouring grid cells.
    let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    while b - a > 1e-12 * (1.0 + a.abs()) {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if ratio(c) < ratio(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let inf = ratio(best).min(ratio(a)).min(ratio(b)).min(ratio(lo)).min(ratio(hi));
    Ok(gamma * inf)
}

fn log_grid(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..count).map(move |k| {
        if k + 1 == count {
            hi
        } else {
            (l0 + (l1 - l0) * k as f64 / (count - 1) as f64).exp()
        }
    })
}

/// Largest `c₂` with `xᵀ(P A_cl)x ≤ −c₂ xᵀPx`, i.e. minus the top generalized eigenvalue
/// of `(sym(P A_cl), P)`. This is the C7 constant for the quadratic candidate.
pub fn quadratic_decay_rate(p: &Matrix, a_cl: &Matrix) -> Result<f64> {
    let chol = nalgebra::Cholesky::new(p.clone()).ok_or_else(|| domain("P is not positive definite"))?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| domain("Cholesky factor is singular"))?;
    let pa = p * a_cl;
    let s = (&pa + pa.transpose()) * 0.5;
    let m = crate::lmi::eigen::symmetrize(&(&l_inv * s * l_inv.transpose()));
    Ok(-crate::lmi::eigen::lambda_max(&m)?)
}

/// Whether a candidate dilates through `ϱ`; used to pick branch-appropriate checks.
pub fn is_hyper(c: &IlfCandidate) -> bool {
    c.variant() == IlfVariant::HyperQ1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmi::fixtures::{example_k, example_p};
    use crate::lmi::{build_chain, max_gamma_search, GainCertificate, LmiKind};
    use approx::assert_relative_eq;

    #[test]
    fn c4_c5_for_hyper_quadratic_pair() {
        let p = example_p();
        let c1 = IlfCandidate::hyper(p.clone(), 0.2).unwrap();
        let c2 = IlfCandidate::quadratic(p).unwrap();
        let xs = default_samples(3, 1);
        let samples: Vec<(f64, Vector)> =
            xs.iter().enumerate().map(|(i, x)| (10f64.powf(-6.0 + 8.0 * (i % 17) as f64 / 16.0), x.clone())).collect();
        let (c4, c5) = check_c4_c5(&c1, &c2, &samples).unwrap();
        assert!(c4.holds, "{}", c4.to_text());
        assert_eq!(c5.margin, 0.0);
        assert!(c5.holds);
    }

    #[test]
    fn norm_bounds_for_quadratic_hit_rayleigh_limits() {
        let p = example_p();
        let c = IlfCandidate::quadratic(p.clone()).unwrap();
        let eig = crate::lmi::sym_eigen(&p, 1e-14).unwrap();
        let mut xs: Vec<Vector> = (0..3).map(|i| eig.vectors.column(i).into_owned() * 3.0).collect();
        xs.extend(shell_samples(3, 200, 1.5, 50.0, 3));
        let r = check_norm_bounds(&c, NormRegime::C10, &xs).unwrap();
        assert_relative_eq!(r.estimated_constants["k1"], eig.values[0].sqrt(), max_relative = 1e-10);
        assert_relative_eq!(r.estimated_constants["k2"], eig.values[2].sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn scalar_c8() {
        let c = IlfCandidate::finite_time(Matrix::identity(1, 1), 1.0).unwrap();
        let xs = shell_samples(1, 50, 1e-3, 1e3, 5);
        let r = check_norm_bounds(&c, NormRegime::C8 { a: 1.0 }, &xs).unwrap();
        assert_relative_eq!(r.estimated_constants["k1"], 1.0, max_relative = 1e-11);
        assert_relative_eq!(r.estimated_constants["k2"], 1.0, max_relative = 1e-11);
    }

    #[test]
    fn c7_for_linear_loop() {
        let plant = build_chain(3).unwrap();
        let p = example_p();
        let a_cl = &plant.a + &plant.b * example_k();
        let c2 = quadratic_decay_rate(&p, &a_cl).unwrap();
        assert!(c2 > 0.0);
        let c = IlfCandidate::quadratic(p).unwrap();
        let xs = default_samples(3, 9);
        let field = |x: &Vector| Ok(&a_cl * x);
        let r = check_differential_conditions(&c, field, &DifferentialRegime::C7 { c2 }, &xs).unwrap();
        assert!(r.holds, "{}", r.to_text());
        let tighter = DifferentialRegime::C7 { c2: c2 * 1.05 };
        assert!(!check_differential_conditions(&c, field, &tighter, &xs).unwrap().holds);
    }

    #[test]
    fn open_loop_fails_c7() {
        let plant = build_chain(3).unwrap();
        let c = IlfCandidate::quadratic(example_p()).unwrap();
        let xs = default_samples(3, 2);
        let field = |x: &Vector| Ok(&plant.a * x);
        let r = check_differential_conditions(&c, field, &DifferentialRegime::C7 { c2: 0.01 }, &xs).unwrap();
        assert!(!r.holds);
    }

    #[test]
    fn beta_examples() {
        let t: Vec<f64> = (0..400).map(|k| k as f64 * 0.01).collect();
        let flat: Vec<f64> = t.iter().map(|t| (-t).exp()).collect();
        let r = beta_margin(&t, &flat).unwrap();
        assert!(r.holds && !r.flags["growth"]);
        assert_relative_eq!(r.estimated_constants["beta_min"], 1.0, max_relative = 1e-4);

        let hyper: Vec<f64> = t.iter().map(|t| (-(t.exp() - 1.0)).exp()).collect();
        let r = beta_margin(&t, &hyper).unwrap();
        assert!(r.holds && r.flags["growth"]);

        let rising: Vec<f64> = t.iter().map(|t| 1.0 + t).collect();
        assert!(!beta_margin(&t, &rising).unwrap().holds);
    }

    #[test]
    fn beta_matches_closed_form_for_hyperexponential_series() {
        // V = e^{−(e^t − 1)} gives β(V⁻¹) = ln V⁻¹ + 1
        let t: Vec<f64> = (0..300).map(|k| k as f64 * 0.01).collect();
        let v: Vec<f64> = t.iter().map(|t| (-(t.exp() - 1.0)).exp()).collect();
        let r = beta_margin(&t, &v).unwrap();
        let expected_last = (t[t.len() - 2].exp() - 1.0) + 1.0;
        assert!(r.estimated_constants["beta_last"] < expected_last * 1.001);
        assert!(r.estimated_constants["beta_min"] > 1.0);
    }

    #[test]
    fn alpha1_hat_sign_depends_on_mu() {
        assert!(alpha1_hat(0.2) < 0.0);
        assert!(alpha1_hat(1.0) > 0.0);
    }

    #[test]
    fn c6_for_hyper_closed_loop() {
        let plant = build_chain(3).unwrap();
        let p = example_p();
        let k = example_k();
        let cert = GainCertificate::from_gains(p.clone(), k.clone(), 0.2, 0.0, LmiKind::Hyper).unwrap();
        let gamma = max_gamma_search(&cert.x, &cert.y, &plant, 0.2, 1e-9).unwrap().value().unwrap();
        let c1 = hyper_c6_rate(gamma, 0.2).unwrap();
        let c = IlfCandidate::hyper(p.clone(), 0.2).unwrap();
        let d = c.dilation().unwrap().clone();
        let field = |x: &Vector| -> Result<Vector> {
            let v = solve_ilf_bisection(&c, x, c.default_v_min(), DEFAULT_PRECISION)?.v;
            let rho = varrho(v)?;
            let u = rho.powf(0.2 - 1.0) * (&k * d.apply_ln(rho.ln(), x))[0];
            Ok(&plant.a * x + &plant.b * u)
        };
        let regime = DifferentialRegime::C6 { c1, profile: hyper_c6_profile(c1).unwrap() };
        let r = check_differential_conditions(&c, field, &regime, &default_samples(3, 11)).unwrap();
        assert!(r.holds, "{}", r.to_text());
        assert!(r.sample_count > 100);
    }

    #[test]
    fn nested_single_sample_and_missing_time() {
        let times = vec![0.0, 0.5, 1.0];
        let states = vec![Vector::from_vec(vec![1.0]); 3];
        let vs = vec![1.0; 3];
        let p = Matrix::identity(1, 1);
        let d = nested_level_diagnostics(&times, &states, &vs, &p, 0.5, 1.0, &[0.0], 0.0).unwrap();
        assert_eq!(d.levels.len(), 1);
        assert!(d.v_decreasing && d.c_increasing);
        let err = nested_level_diagnostics(&times, &states, &vs, &p, 0.5, 1.0, &[0.25], 0.0);
        assert_eq!(err.unwrap_err(), Error::MissingSample(0.25));
    }
}
