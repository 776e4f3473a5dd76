//! Nested-exponential rate functions.
//!
//! A [`RateProfile`] `α = (α₀, …, α_r)` parameterizes
//!
//! ```text
//! ρ₀(t) = α₀ t,        ρᵢ(t) = αᵢ (exp ρᵢ₋₁(t) − exp ρᵢ₋₁(0))
//! σ₁(s) = −ln s + α_r, σᵢ(s) = ln(σᵢ₋₁(s) / α_{r−i+2}) + α_{r−i+1}
//! ```
//!
//! `y₀ e^{−ρ_r(t)}` solves the scalar comparison equation
//! `ẏ = −α₀ y ∏ σᵢ(y / y₀)`, which is what [`integrate_comparison`] integrates.

use crate::error::{domain, Error, Result};

/// Below this argument `σ` saturates to `+∞`.
pub const SIGMA_SATURATION_LN: f64 = -700.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RateProfile {
    alphas: Vec<f64>,
}

impl RateProfile {
    /// `alphas = (α₀, …, α_r)`; the degree is `alphas.len() - 1`.
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(domain("rate profile needs at least α₀"));
        }
        if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(domain(format!("rate profile entries must be positive, got {a}")));
        }
        Ok(Self { alphas })
    }

    pub fn degree(&self) -> usize {
        self.alphas.len() - 1
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.alphas[i]
    }
}

/// `ρ_{level,α}(t)`.
pub fn rho(profile: &RateProfile, level: usize, t: f64) -> Result<f64> {
    if level > profile.degree() {
        return Err(Error::Contract(format!(
            "rho level {level} exceeds degree {}",
            profile.degree()
        )));
    }
    let mut value = profile.alpha(0) * t;
    for i in 1..=level {
        // ρᵢ₋₁(0) = 0 for every i, so the recursion reduces to αᵢ·expm1(ρᵢ₋₁).
        value = profile.alpha(i) * value.exp_m1();
    }
    Ok(value)
}

/// `σ^α_{level}(s)` for `s ∈ (0, 1]`.
pub fn sigma(profile: &RateProfile, level: usize, s: f64) -> Result<f64> {
    let r = profile.degree();
    if level < 1 || level > r {
        return Err(Error::Contract(format!("sigma level {level} outside [1, {r}]")));
    }
    if !(s > 0.0 && s <= 1.0) {
        return Err(domain(format!("sigma argument must lie in (0, 1], got {s}")));
    }
    let ln_s = s.ln();
    if ln_s < SIGMA_SATURATION_LN {
        return Ok(f64::INFINITY);
    }
    let mut value = -ln_s + profile.alpha(r);
    for i in 2..=level {
        let arg = (value / profile.alpha(r - i + 2)).max(f64::EPSILON);
        value = arg.ln() + profile.alpha(r - i + 1);
    }
    Ok(value)
}

/// `∏_{i=1}^{r} σᵢ(s)`; equals 1 for degree 0.
pub fn sigma_product(profile: &RateProfile, s: f64) -> Result<f64> {
    let mut prod = 1.0;
    for i in 1..=profile.degree() {
        prod *= sigma(profile, i, s)?;
    }
    Ok(prod)
}

/// `C e^{−ρ_r(t)}`.
pub fn envelope(profile: &RateProfile, c: f64, t: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(domain(format!("envelope constant must be positive, got {c}")));
    }
    if !(t >= 0.0) {
        return Err(domain(format!("envelope time must be nonnegative, got {t}")));
    }
    Ok(c * (-rho(profile, profile.degree(), t)?).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ComparisonSeries {
    /// Largest relative deviation from the closed form `y₀ e^{−ρ_r(t)}`.
    pub fn max_relative_error(&self, profile: &RateProfile) -> Result<f64> {
        let y0 = self.values[0];
        let mut worst: f64 = 0.0;
        for (&t, &y) in self.times.iter().zip(&self.values) {
            let exact = envelope(profile, y0, t)?;
            worst = worst.max(((y - exact) / exact).abs());
        }
        Ok(worst)
    }
}

/// Classical RK4 on `ẏ = −α₀ y ∏ σᵢ(y / y₀)`.
pub fn integrate_comparison(
    profile: &RateProfile,
    y0: f64,
    horizon: f64,
    step: f64,
) -> Result<ComparisonSeries> {
    if !(y0 > 0.0 && horizon > 0.0 && step > 0.0) {
        return Err(domain("comparison ODE needs y0, horizon and step positive"));
    }
    let steps = (horizon / step).round().max(1.0) as usize;
    let h = horizon / steps as f64;
    let a0 = profile.alpha(0);

    let rhs = |t: f64, y: f64| -> Result<f64> {
        if !(y > 0.0 && y <= y0) || !y.is_finite() {
            return Err(Error::IntegrationFailure {
                t,
                reason: format!("y = {y} left (0, y0]"),
            });
        }
        Ok(-a0 * y * sigma_product(profile, y / y0)?)
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut y = y0;
    times.push(0.0);
    values.push(y);
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = rhs(t, y)?;
        let k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)?;
        let k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)?;
        let k4 = rhs(t + h, y + h * k3)?;
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !(y > 0.0 && y < y0) {
            return Err(Error::IntegrationFailure {
                t: t + h,
                reason: format!("y = {y} is not strictly decreasing inside (0, y0)"),
            });
        }
        times.push((k + 1) as f64 * h);
        values.push(y);
    }
    Ok(ComparisonSeries { times, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayClass {
    Exponential,
    Hyperexponential,
    Inconclusive,
}

impl std::fmt::Display for DecayClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecayClass::Exponential => "Exponential",
            DecayClass::Hyperexponential => "Hyperexponential",
            DecayClass::Inconclusive => "Inconclusive",
        })
    }
}

/// Cutoffs that turn the asymptotic notion into a finite-data test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayThresholds {
    /// Minimum fraction of consecutive window pairs with increasing rate.
    pub monotone_fraction: f64,
    /// Required ratio between last and first window rate.
    pub growth_factor: f64,
    pub norm_floor: f64,
    /// Rates are "flat" when their spread is below this fraction of their mean magnitude.
    pub flat_tolerance: f64,
    /// Relative difference below which two consecutive rates count as tied.
    pub tie_tolerance: f64,
}

impl Default for DecayThresholds {
    fn default() -> Self {
        Self {
            monotone_fraction: 0.9,
            growth_factor: 2.0,
            norm_floor: 1e-12,
            flat_tolerance: 0.1,
            tie_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub window_times: Vec<f64>,
    pub instantaneous_rates: Vec<f64>,
    pub classification: DecayClass,
    pub monotone_fraction: f64,
}

pub fn classify_decay(times: &[f64], norms: &[f64], window: f64) -> Result<DecayReport> {
    classify_decay_with(times, norms, window, &DecayThresholds::default())
}

/// Per-window least-squares slope of `−ln‖x‖` against `t`, then a growth test on the slopes.
///
/// Windows tile `[t₀, t_end]` with length `window`; a trailing window shorter than half
/// the length is dropped. Tied consecutive rates count half toward the monotone fraction,
/// so a flat series scores 0.5.
pub fn classify_decay_with(
    times: &[f64],
    norms: &[f64],
    window: f64,
    thresholds: &DecayThresholds,
) -> Result<DecayReport> {
    if times.len() != norms.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            got: norms.len(),
        });
    }
    if !(window > 0.0) {
        return Err(domain("window must be positive"));
    }
    if times.len() < 6 {
        return Err(Error::InsufficientData(format!("{} samples", times.len())));
    }
    if let Some(n) = norms.iter().find(|n| !(n.is_finite() && **n >= 0.0)) {
        return Err(domain(format!("norm series contains {n}")));
    }

    let t0 = times[0];
    let index_of = |t: f64| ((t - t0) / window + 1e-9).floor() as usize;
    let mut window_times = Vec::new();
    let mut rates = Vec::new();
    let mut start = 0usize;
    while start < times.len() {
        let w = index_of(times[start]);
        let mut end = start + 1;
        while end < times.len() && index_of(times[end]) == w {
            end += 1;
        }
        let lo = t0 + w as f64 * window;
        let covered = times[end - 1] - lo;
        if end - start >= 2 && covered >= 0.5 * window {
            let (tc, slope) = ols(
                &times[start..end],
                norms[start..end]
                    .iter()
                    .map(|n| -n.max(thresholds.norm_floor).ln()),
            );
            window_times.push(tc);
            rates.push(slope);
        }
        start = end;
    }
    if rates.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} windows of length {window}; need at least 3",
            rates.len()
        )));
    }

    let pairs = rates.len() - 1;
    let mut score = 0.0;
    for pair in rates.windows(2) {
        let scale = pair[0].abs().max(pair[1].abs()).max(1e-12);
        let diff = pair[1] - pair[0];
        if diff.abs() <= thresholds.tie_tolerance * scale {
            score += 0.5;
        } else if diff > 0.0 {
            score += 1.0;
        }
    }
    let monotone_fraction = score / pairs as f64;

    let first = rates[0];
    let last = *rates.last().unwrap();
    let grows = last > 0.0 && (first <= 0.0 || last >= thresholds.growth_factor * first);
    let (min, max) = rates
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    let mean_mag = rates.iter().map(|r| r.abs()).sum::<f64>() / rates.len() as f64;
    let flat = max - min <= thresholds.flat_tolerance * mean_mag.max(1e-9);

    let classification = if monotone_fraction >= thresholds.monotone_fraction && grows {
        DecayClass::Hyperexponential
    } else if flat {
        DecayClass::Exponential
    } else {
        DecayClass::Inconclusive
    };

    Ok(DecayReport {
        window_times,
        instantaneous_rates: rates,
        classification,
        monotone_fraction,
    })
}

/// Least-squares slope of `ys` against `ts`; returns (mean t, slope).
fn ols(ts: &[f64], ys: impl Iterator<Item = f64>) -> (f64, f64) {
    let ys: Vec<f64> = ys.collect();
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, y) in ts.iter().zip(&ys) {
        sxy += (t - tm) * (y - ym);
        sxx += (t - tm) * (t - tm);
    }
    (tm, sxy / sxx)
}

/// Number of leading samples whose norm stays at or above `floor`.
pub fn active_len(norms: &[f64], floor: f64) -> usize {
    norms.iter().position(|&n| n < floor).unwrap_or(norms.len())
}

/// The four display curves of the convergence-rate comparison figure.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCurves {
    pub t: Vec<f64>,
    pub es: Vec<f64>,
    pub hes1: Vec<f64>,
    pub hes2: Vec<f64>,
    pub fts: Vec<f64>,
}

/// Finite-time display curve `(1 − 0.8t)^{1.25}` on `[0, 1.25]`, zero afterwards.
pub fn finite_time_curve(t: f64) -> f64 {
    if t >= 1.25 {
        0.0
    } else {
        (1.0 - 0.8 * t).max(0.0).powf(1.25)
    }
}

pub fn reference_curves(grid: &[f64]) -> ReferenceCurves {
    let profile = RateProfile::new(vec![1.0, 1.0, 1.0]).expect("static profile");
    let curve = |level: usize| -> Vec<f64> {
        grid.iter()
            .map(|&t| (-rho(&profile, level, t).expect("level ≤ 2")).exp())
            .collect()
    };
    ReferenceCurves {
        t: grid.to_vec(),
        es: curve(0),
        hes1: curve(1),
        hes2: curve(2),
        fts: grid.iter().map(|&t| finite_time_curve(t)).collect(),
    }
}

impl ReferenceCurves {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,es,hes1,hes2,fts\n");
        for i in 0..self.t.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.t[i], self.es[i], self.hes1[i], self.hes2[i], self.fts[i]
            ));
        }
        out
    }
}
