//! Fixed-step RK4 simulation of `ẋ = Ax + Bu` under an ILF controller.
//!
//! Per step: measure (`x` plus optional noise), compute the control, push it through
//! the delay line, then integrate with the delayed control held constant over `dt`.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::control::{ControlOutput, Controller, ControllerSpec};
use crate::error::{domain, Error, Result};
use crate::lmi::PlantConfig;
use crate::{Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub power: f64,
    /// Hold time of each noise sample, s.
    pub sample_interval: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn new(power: f64, seed: u64) -> Self {
        Self { power, sample_interval: 0.01, seed }
    }

    /// Per-component standard deviation `√(power / sample_interval)`.
    pub fn std_dev(&self) -> f64 {
        (self.power / self.sample_interval).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    /// Input delay, s. Rounded to a whole number of steps.
    pub delay_tau: f64,
    pub noise: Option<NoiseConfig>,
    pub x0: Vector,
    /// Logging floor for `‖x‖`; dynamics are never clamped.
    pub norm_floor: f64,
}

impl SimConfig {
    pub fn new(x0: Vector, horizon: f64) -> Self {
        Self { dt: 1e-3, horizon, delay_tau: 0.0, noise: None, x0, norm_floor: 1e-12 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(domain(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(domain(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.delay_tau >= 0.0) {
            return Err(domain(format!("delay must be nonnegative, got {}", self.delay_tau)));
        }
        if let Some(n) = &self.noise {
            if !(n.power >= 0.0) {
                return Err(domain("noise power must be nonnegative"));
            }
            if !(n.sample_interval >= self.dt) {
                return Err(domain("noise sample interval must be at least dt"));
            }
        }
        if !(self.norm_floor > 0.0) {
            return Err(domain("norm floor must be positive"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn delay_steps(&self) -> usize {
        (self.delay_tau / self.dt).round() as usize
    }

    /// `delay_tau` is not a whole number of steps and was rounded.
    pub fn delay_rounded(&self) -> bool {
        (self.delay_steps() as f64 * self.dt - self.delay_tau).abs() > 1e-9 * self.dt
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    pub measured: Vec<Vector>,
    /// Control entering the plant (after the delay line).
    pub controls: Vec<f64>,
    pub v_values: Vec<f64>,
    /// `max(‖x‖, norm_floor)`.
    pub norms: Vec<f64>,
    /// The controller's `V` was clamped at `v_min` at this step.
    pub clamped: Vec<bool>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `t,x1..xn,u,V,norm`.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |x| x.len());
        let mut out = String::from("t");
        for i in 1..=n {
            let _ = write!(out, ",x{i}");
        }
        out.push_str(",u,V,norm\n");
        for k in 0..self.len() {
            let _ = write!(out, "{}", self.times[k]);
            for xi in self.states[k].iter() {
                let _ = write!(out, ",{xi:e}");
            }
            let _ = writeln!(out, ",{:e},{:e},{:e}", self.controls[k], self.v_values[k], self.norms[k]);
        }
        out
    }

    /// Median of `‖x‖` over the final `fraction` of the horizon.
    pub fn tail_median_norm(&self, fraction: f64) -> f64 {
        let t_end = *self.times.last().unwrap_or(&0.0);
        let t0 = t_end * (1.0 - fraction);
        let mut tail: Vec<f64> = self
            .times
            .iter()
            .zip(&self.states)
            .filter(|(t, _)| **t >= t0 - 1e-12)
            .map(|(_, x)| x.norm())
            .collect();
        if tail.is_empty() {
            return f64::NAN;
        }
        tail.sort_by(f64::total_cmp);
        let m = tail.len();
        if m % 2 == 1 {
            tail[m / 2]
        } else {
            0.5 * (tail[m / 2 - 1] + tail[m / 2])
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.states.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

/// Piecewise-constant Gaussian measurement noise, resampled every `sample_interval`.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    rng: ChaCha8Rng,
    normal: Normal<f64>,
    interval: f64,
    index: Option<u64>,
    current: Vector,
}

impl NoiseSource {
    pub fn new(n: usize, config: &NoiseConfig) -> Result<Self> {
        let normal = Normal::new(0.0, config.std_dev()).map_err(|e| domain(e.to_string()))?;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            normal,
            interval: config.sample_interval,
            index: None,
            current: Vector::zeros(n),
        })
    }

    /// The noise vector active at time `t`. Call with nondecreasing `t`.
    pub fn sample(&mut self, t: f64) -> &Vector {
        let idx = (t / self.interval + 1e-9).floor().max(0.0) as u64;
        if self.index != Some(idx) {
            for v in self.current.iter_mut() {
                *v = self.normal.sample(&mut self.rng);
            }
            self.index = Some(idx);
        }
        &self.current
    }
}

/// `x + w(t)`.
pub fn apply_noise(x: &Vector, source: &mut NoiseSource, t: f64) -> Vector {
    x + source.sample(t)
}

/// Integer-step delay with zero initial history.
#[derive(Debug, Clone)]
pub struct DelayLine {
    buf: VecDeque<f64>,
}

impl DelayLine {
    pub fn new(capacity: usize) -> Self {
        Self { buf: std::iter::repeat_n(0.0, capacity).collect() }
    }

    pub fn capacity(&self) -> usize {
        self.buf.len()
    }

    /// Pushes `u(t)` and returns `u(t − capacity·dt)`.
    pub fn push_pop(&mut self, u: f64) -> f64 {
        self.buf.push_back(u);
        self.buf.pop_front().expect("nonempty after push")
    }
}

/// One classical RK4 step of `ẋ = Ax + bu` with `u` held constant.
pub fn rk4_step(a: &Matrix, b: &Vector, x: &Vector, u: f64, dt: f64) -> Vector {
    let f = |y: &Vector| a * y + b * u;
    let k1 = f(x);
    let k2 = f(&(x + &k1 * (0.5 * dt)));
    let k3 = f(&(x + &k2 * (0.5 * dt)));
    let k4 = f(&(x + &k3 * dt));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Runs a fresh [`Controller`] built from `spec`.
pub fn integrate(plant: &PlantConfig, spec: &ControllerSpec, config: &SimConfig) -> Result<Trajectory> {
    let mut controller = Controller::new(spec.clone())?;
    integrate_with(plant, &mut controller, config)
}

/// Runs with a caller-owned controller so that its ledger can be inspected afterwards.
pub fn integrate_with(
    plant: &PlantConfig,
    controller: &mut Controller,
    config: &SimConfig,
) -> Result<Trajectory> {
    config.validate()?;
    let n = plant.n();
    if config.x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: config.x0.len() });
    }
    if controller.spec().n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: controller.spec().n() });
    }
    let b = plant.b.column(0).into_owned();
    let steps = config.steps();
    let mut noise = config.noise.as_ref().map(|c| NoiseSource::new(n, c)).transpose()?;
    let mut delay = DelayLine::new(config.delay_steps());
    let mut traj = Trajectory::default();
    let mut x = config.x0.clone();
    for k in 0..=steps {
        let t = k as f64 * config.dt;
        let measured = match noise.as_mut() {
            Some(src) => apply_noise(&x, src, t),
            None => x.clone(),
        };
        let ControlOutput { u, v, clamped, .. } = controller
            .control(t, &measured)
            .map_err(|e| Error::IntegrationFailure { t, reason: e.to_string() })?;
        let applied = delay.push_pop(u);
        traj.times.push(t);
        traj.norms.push(x.norm().max(config.norm_floor));
        traj.states.push(x.clone());
        traj.measured.push(measured);
        traj.controls.push(applied);
        traj.v_values.push(v);
        traj.clamped.push(clamped);
        if k == steps {
            break;
        }
        x = rk4_step(&plant.a, &b, &x, applied, config.dt);
        if x.iter().any(|xi| !xi.is_finite()) {
            return Err(Error::IntegrationFailure {
                t: t + config.dt,
                reason: "state became non-finite".into(),
            });
        }
    }
    Ok(traj)
}
