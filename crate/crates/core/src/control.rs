//! ILF feedback laws for a single-input chain and their sampled-time realization.
//!
//! The pure laws take a precomputed `V`; [`Controller`] owns the solvers, holds `V`
//! between sampling instants and keeps the `(t_i, V_i)` ledger.

use std::fmt;

use crate::error::{domain, Error, Result};
use crate::ilf::{quad_form, varrho, Dilation, IlfCandidate, IlfSolver};
use crate::{Matrix, RowVector, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlVariant {
    /// `u = V^{1−μ} K D(V⁻¹) x`.
    FiniteTimeIlf,
    /// `u = ϱ^{μ−1}(V) K D(ϱ(V)) x` inside the unit ellipsoid, `Kx` outside.
    HyperIlf,
    /// `u = K D(ϱ(V)) x` inside, `V^{1+ν} K D̄(V⁻¹) x` outside.
    CombinedNearlyFixed,
    /// `u = Kx`.
    LinearOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling {
    /// `V` is re-solved at every integration step.
    Continuous,
    /// `V` is solved at `t_i = i · period` and held in between.
    Sampled { period: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerSpec {
    pub variant: ControlVariant,
    pub p: Matrix,
    pub k: RowVector,
    pub mu: f64,
    /// Ascending weight step, used by [`ControlVariant::CombinedNearlyFixed`] only.
    pub nu: f64,
    pub sampling: Sampling,
    pub v_min: f64,
    pub bisect_precision: f64,
}

impl ControllerSpec {
    /// Continuous sampling, `ν = 1`, and the default `v_min` of the variant's inner ILF.
    pub fn new(variant: ControlVariant, p: Matrix, k: RowVector, mu: f64) -> Result<Self> {
        let v_min = match variant {
            ControlVariant::HyperIlf | ControlVariant::CombinedNearlyFixed => 1e-300,
            _ => 1e-9,
        };
        let spec = Self {
            variant,
            p,
            k,
            mu,
            nu: 1.0,
            sampling: Sampling::Continuous,
            v_min,
            bisect_precision: crate::ilf::solver::DEFAULT_PRECISION,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Result<Self> {
        self.sampling = sampling;
        self.validate()?;
        Ok(self)
    }

    pub fn with_nu(mut self, nu: f64) -> Result<Self> {
        self.nu = nu;
        self.validate()?;
        Ok(self)
    }

    pub fn with_v_min(mut self, v_min: f64) -> Result<Self> {
        self.v_min = v_min;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.p.nrows();
        if self.k.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.k.len() });
        }
        if let Sampling::Sampled { period } = self.sampling {
            if !(period > 0.0 && period.is_finite()) {
                return Err(domain(format!("sampling period must be positive, got {period}")));
            }
        }
        if !(self.v_min > 0.0) || !(self.bisect_precision > 0.0) {
            return Err(domain("v_min and bisection precision must be positive"));
        }
        // Constructing the candidates checks P and the dilation parameters.
        self.inner_candidate()?;
        self.outer_candidate()?;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    /// The ILF solved inside the unit ellipsoid (everywhere for the finite-time law).
    pub fn inner_candidate(&self) -> Result<Option<IlfCandidate>> {
        Ok(match self.variant {
            ControlVariant::FiniteTimeIlf => Some(IlfCandidate::finite_time(self.p.clone(), self.mu)?),
            ControlVariant::HyperIlf | ControlVariant::CombinedNearlyFixed => {
                Some(IlfCandidate::hyper(self.p.clone(), self.mu)?)
            }
            ControlVariant::LinearOnly => {
                IlfCandidate::quadratic(self.p.clone())?;
                None
            }
        })
    }

    /// The ILF solved outside the unit ellipsoid when it is not a closed form.
    pub fn outer_candidate(&self) -> Result<Option<IlfCandidate>> {
        Ok(match self.variant {
            ControlVariant::CombinedNearlyFixed => Some(IlfCandidate::nearly_fixed(self.p.clone(), self.nu)?),
            _ => None,
        })
    }

    fn kx(&self, x: &Vector) -> f64 {
        self.k.dot(&x.transpose())
    }

    fn descending(&self) -> Dilation {
        Dilation::descending(self.n(), self.mu).expect("validated")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `xᵀPx < 1` (or the finite-time law, which has a single branch).
    Inner,
    /// `xᵀPx ≥ 1`.
    Outer,
    /// Plain `Kx`: the linear controller, or the finite-time law after a `v_min` clamp.
    Linear,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Inner => "inner",
            Branch::Outer => "outer",
            Branch::Linear => "linear",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub u: f64,
    /// `V` used by the law after clamping.
    pub v: f64,
    pub clamped: bool,
    pub branch: Branch,
}

fn clamp_v(spec: &ControllerSpec, v: f64) -> (f64, bool) {
    if v < spec.v_min || v.is_nan() {
        (spec.v_min, true)
    } else {
        (v, false)
    }
}

/// `V^{1−μ} K D(V⁻¹) x`; `V` below `v_min` is raised to `v_min` and flagged.
pub fn u_finite_time(spec: &ControllerSpec, v: f64, x: &Vector) -> ControlOutput {
    let (v, clamped) = clamp_v(spec, v);
    let z = spec.descending().apply_ln(-v.ln(), x);
    let u = ((1.0 - spec.mu) * v.ln()).exp() * spec.kx(&z);
    ControlOutput { u, v, clamped, branch: Branch::Inner }
}

/// `ϱ^{μ−1}(V) K D(ϱ(V)) x` for `xᵀPx < 1`, `Kx` otherwise.
pub fn u_hyper(spec: &ControllerSpec, v: f64, x: &Vector) -> ControlOutput {
    if quad_form(&spec.p, x) >= 1.0 {
        return ControlOutput { u: spec.kx(x), v: v.max(1.0), clamped: false, branch: Branch::Outer };
    }
    let (v, clamped) = clamp_v(spec, v);
    let rho = varrho(v).expect("clamped V is positive");
    let z = spec.descending().apply_ln(rho.ln(), x);
    let u = rho.powf(spec.mu - 1.0) * spec.kx(&z);
    ControlOutput { u, v, clamped, branch: Branch::Inner }
}

/// `K D(ϱ(V)) x` for `xᵀPx < 1`, `V^{1+ν} K D̄(V⁻¹) x` otherwise. `V` must come from the
/// hyper ILF inside and from the ascending-weight ILF outside.
pub fn u_combined(spec: &ControllerSpec, v: f64, x: &Vector) -> ControlOutput {
    let (v, clamped) = clamp_v(spec, v);
    if quad_form(&spec.p, x) >= 1.0 {
        let d = Dilation::ascending(spec.n(), spec.nu).expect("validated");
        let z = d.apply_ln(-v.ln(), x);
        let u = ((1.0 + spec.nu) * v.ln()).exp() * spec.kx(&z);
        return ControlOutput { u, v, clamped, branch: Branch::Outer };
    }
    let rho = varrho(v).expect("clamped V is positive");
    let z = spec.descending().apply_ln(rho.ln(), x);
    ControlOutput { u: spec.kx(&z), v, clamped, branch: Branch::Inner }
}

/// Both inner-branch formulas at the same state, `(K D(ϱ)x · ϱ^{μ−1}, K D(ϱ)x)`.
/// The hyper law carries the prefactor and the combined law does not.
pub fn inner_branch_pair(spec: &ControllerSpec, v: f64, x: &Vector) -> (f64, f64) {
    let (v, _) = clamp_v(spec, v);
    let rho = varrho(v).expect("clamped V is positive");
    let plain = spec.kx(&spec.descending().apply_ln(rho.ln(), x));
    (rho.powf(spec.mu - 1.0) * plain, plain)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    pub v: f64,
    pub clamped: bool,
    pub branch: Branch,
    /// The solve at this instant failed and the previous `V` was kept.
    pub held_after_failure: bool,
}

pub const LEDGER_HEADER: &str = "t_i,V_i,clamped,branch";

/// A controller instance with its own warm-start state. Use one per simulation.
#[derive(Debug, Clone)]
pub struct Controller {
    spec: ControllerSpec,
    inner: Option<IlfSolver>,
    outer: Option<IlfSolver>,
    held: Option<(f64, bool)>,
    next_sample: usize,
    ledger: Vec<LedgerRow>,
}

impl Controller {
    pub fn new(spec: ControllerSpec) -> Result<Self> {
        spec.validate()?;
        let solver = |c: Option<IlfCandidate>| -> Result<Option<IlfSolver>> {
            c.map(|c| IlfSolver::new(c, spec.v_min, spec.bisect_precision)).transpose()
        };
        let inner = solver(spec.inner_candidate()?)?;
        let outer = solver(spec.outer_candidate()?)?;
        Ok(Self { spec, inner, outer, held: None, next_sample: 0, ledger: Vec::new() })
    }

    pub fn spec(&self) -> &ControllerSpec {
        &self.spec
    }

    /// One row per sampling instant (per call for continuous sampling).
    pub fn ledger(&self) -> &[LedgerRow] {
        &self.ledger
    }

    pub fn ledger_csv(&self) -> String {
        let mut out = String::from(LEDGER_HEADER);
        out.push('\n');
        for r in &self.ledger {
            out.push_str(&format!("{},{:e},{},{}\n", r.t, r.v, r.clamped, r.branch));
        }
        out
    }

    /// Solves the merged `V(x)`: the inner ILF inside the unit ellipsoid, and the outer
    /// one (or `√(xᵀPx)`) outside. The finite-time law uses its single ILF everywhere.
    fn solve_v(&mut self, x: &Vector) -> Result<(f64, bool)> {
        let xpx = quad_form(&self.spec.p, x);
        match self.spec.variant {
            ControlVariant::LinearOnly => Ok((xpx.sqrt(), false)),
            ControlVariant::FiniteTimeIlf => {
                let s = self.inner.as_mut().expect("inner solver").solve(x)?;
                Ok((s.v, s.clamped))
            }
            ControlVariant::HyperIlf | ControlVariant::CombinedNearlyFixed if xpx < 1.0 => {
                let s = self.inner.as_mut().expect("inner solver").solve(x)?;
                Ok((s.v.min(1.0), s.clamped))
            }
            ControlVariant::HyperIlf => Ok((xpx.sqrt(), false)),
            ControlVariant::CombinedNearlyFixed => {
                let s = self.outer.as_mut().expect("outer solver").solve(x)?;
                Ok((s.v.max(1.0), s.clamped))
            }
        }
    }

    fn law(&self, v: f64, clamped_solve: bool, x: &Vector) -> ControlOutput {
        let spec = &self.spec;
        match spec.variant {
            ControlVariant::LinearOnly => {
                ControlOutput { u: spec.kx(x), v, clamped: false, branch: Branch::Linear }
            }
            ControlVariant::FiniteTimeIlf if clamped_solve => {
                ControlOutput { u: spec.kx(x), v: spec.v_min, clamped: true, branch: Branch::Linear }
            }
            ControlVariant::FiniteTimeIlf => u_finite_time(spec, v, x),
            ControlVariant::HyperIlf => {
                let mut out = u_hyper(spec, v, x);
                out.clamped |= clamped_solve;
                out
            }
            ControlVariant::CombinedNearlyFixed => {
                let mut out = u_combined(spec, v, x);
                out.clamped |= clamped_solve;
                out
            }
        }
    }

    /// Control for the measured state at time `t`. Call with nondecreasing `t`.
    pub fn control(&mut self, t: f64, x: &Vector) -> Result<ControlOutput> {
        if x.len() != self.spec.n() {
            return Err(Error::DimensionMismatch { expected: self.spec.n(), got: x.len() });
        }
        if x.iter().all(|xi| *xi == 0.0) {
            return Ok(ControlOutput { u: 0.0, v: self.spec.v_min, clamped: true, branch: Branch::Linear });
        }
        let due = match self.spec.sampling {
            Sampling::Continuous => true,
            Sampling::Sampled { period } => {
                let t_next = self.next_sample as f64 * period;
                t >= t_next - 1e-9 * period.max(t.abs())
            }
        };
        if due {
            let (held, failed) = match self.solve_v(x) {
                Ok(sol) => (sol, false),
                Err(e) => match (self.spec.sampling, self.held) {
                    (Sampling::Sampled { .. }, Some(prev)) => (prev, true),
                    _ => return Err(e),
                },
            };
            self.held = Some(held);
            if let Sampling::Sampled { period } = self.spec.sampling {
                while self.next_sample as f64 * period <= t + 1e-9 * period.max(t.abs()) {
                    self.next_sample += 1;
                }
                let branch = self.law(held.0, held.1, x).branch;
                self.ledger.push(LedgerRow { t, v: held.0, clamped: held.1, branch, held_after_failure: failed });
            }
        }
        let (v, clamped) = self.held.expect("solved at the first call");
        Ok(self.law(v, clamped, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilf::solve_ilf_bisection;
    use crate::lmi::fixtures::{example_k, example_p};
    use approx::assert_relative_eq;

    fn spec(variant: ControlVariant, mu: f64) -> ControllerSpec {
        ControllerSpec::new(variant, example_p(), example_k(), mu).unwrap()
    }

    fn unit_point(dir: &[f64]) -> Vector {
        let d = Vector::from_row_slice(dir);
        let s = quad_form(&example_p(), &d).sqrt();
        d / s
    }

    #[test]
    fn finite_time_at_unit_v_is_linear() {
        let s = spec(ControlVariant::FiniteTimeIlf, 0.5);
        let x = Vector::from_vec(vec![0.2, -0.3, 0.1]);
        assert_relative_eq!(u_finite_time(&s, 1.0, &x).u, (example_k() * &x)[0], max_relative = 1e-15);
    }

    #[test]
    fn scalar_finite_time_is_a_relay() {
        let s = ControllerSpec::new(
            ControlVariant::FiniteTimeIlf,
            Matrix::identity(1, 1),
            RowVector::from_vec(vec![-3.0]),
            1.0,
        )
        .unwrap();
        for xv in [-5.0, -0.01, 0.3, 70.0] {
            let x = Vector::from_vec(vec![xv]);
            let out = u_finite_time(&s, xv.abs(), &x);
            assert_relative_eq!(out.u, -3.0 * xv.signum(), max_relative = 1e-14);
        }
    }

    #[test]
    fn hyper_continuity_at_unit_ellipsoid() {
        let s = spec(ControlVariant::HyperIlf, 0.2);
        let x = unit_point(&[0.4, 1.0, -0.2]);
        let kx = (example_k() * &x)[0];
        assert_eq!(u_hyper(&s, 1.0, &x).u, kx);
        let inside = &x * (1.0 - 1e-12);
        let c = IlfCandidate::hyper(example_p(), 0.2).unwrap();
        let v = solve_ilf_bisection(&c, &inside, 1e-300, 1e-12).unwrap().v;
        assert_relative_eq!(u_hyper(&s, v, &inside).u, kx, max_relative = 1e-9);
        let far = &x * 2.0;
        assert_eq!(u_hyper(&s, 123.0, &far).u, (example_k() * &far)[0]);
    }

    #[test]
    fn combined_continuity_and_scalar_outer_branch() {
        let s = spec(ControlVariant::CombinedNearlyFixed, 0.2);
        let x = unit_point(&[1.0, 0.1, 0.3]);
        let kx = (example_k() * &x)[0];
        assert_relative_eq!(u_combined(&s, 1.0, &x).u, kx, max_relative = 1e-15);
        assert_relative_eq!(u_combined(&s, 1.0, &(&x * (1.0 - 1e-15))).u, kx, max_relative = 1e-12);

        // n = 1, ν = 1: D̄(λ) = λ, so V = |x| and u = V² K V⁻¹ x.
        let s1 = ControllerSpec::new(
            ControlVariant::CombinedNearlyFixed,
            Matrix::identity(1, 1),
            RowVector::from_vec(vec![-1.5]),
            1.0,
        )
        .unwrap();
        let out = u_combined(&s1, 2.0, &Vector::from_vec(vec![2.0]));
        assert_eq!(out.branch, Branch::Outer);
        assert_relative_eq!(out.u, 4.0 * -1.5, max_relative = 1e-15);
    }

    #[test]
    fn inner_branch_prefactor_differs() {
        let s = spec(ControlVariant::HyperIlf, 0.2);
        let x = Vector::from_vec(vec![0.05, 0.0, 0.0]);
        let c = IlfCandidate::hyper(example_p(), 0.2).unwrap();
        let v = solve_ilf_bisection(&c, &x, 1e-300, 1e-12).unwrap().v;
        let (with, without) = inner_branch_pair(&s, v, &x);
        let rho = varrho(v).unwrap();
        assert_relative_eq!(with / without, rho.powf(-0.8), max_relative = 1e-12);
        assert_relative_eq!(u_hyper(&s, v, &x).u, with, max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(ControllerSpec::new(ControlVariant::HyperIlf, example_p(), RowVector::zeros(2), 0.2).is_err());
        let s = spec(ControlVariant::HyperIlf, 0.2);
        assert!(s.with_sampling(Sampling::Sampled { period: 0.0 }).is_err());
        assert!(spec(ControlVariant::CombinedNearlyFixed, 0.2).with_nu(-1.0).is_err());
    }

    #[test]
    fn sampled_controller_holds_v_between_instants() {
        let s = spec(ControlVariant::FiniteTimeIlf, 0.5).with_sampling(Sampling::Sampled { period: 1.0 }).unwrap();
        let mut c = Controller::new(s).unwrap();
        let x = Vector::from_vec(vec![1.0, 0.0, 0.0]);
        let first = c.control(0.0, &x).unwrap();
        let later = c.control(0.5, &(&x * 0.5)).unwrap();
        assert_eq!(first.v, later.v);
        c.control(1.0, &x).unwrap();
        c.control(2.0, &x).unwrap();
        let ledger = c.ledger();
        assert_eq!(ledger.len(), 3);
        assert!(ledger.iter().all(|r| r.v == ledger[0].v));
    }

    #[test]
    fn finite_time_clamp_switches_to_linear() {
        let s = spec(ControlVariant::FiniteTimeIlf, 0.5);
        let mut c = Controller::new(s).unwrap();
        let x = Vector::from_vec(vec![1e-30, 0.0, 0.0]);
        let out = c.control(0.0, &x).unwrap();
        assert!(out.clamped);
        assert_eq!(out.branch, Branch::Linear);
        assert_eq!(out.u, (example_k() * &x)[0]);
    }

    #[test]
    fn continuous_matches_fresh_solve() {
        let s = spec(ControlVariant::HyperIlf, 0.2);
        let mut c = Controller::new(s.clone()).unwrap();
        let cand = IlfCandidate::hyper(example_p(), 0.2).unwrap();
        for k in 0..20 {
            let x = Vector::from_vec(vec![0.3 * 0.8f64.powi(k), -0.1 * 0.7f64.powi(k), 0.05]);
            let out = c.control(k as f64 * 1e-3, &x).unwrap();
            let v = solve_ilf_bisection(&cand, &x, 1e-300, 1e-12).unwrap().v;
            assert_relative_eq!(out.v, v, max_relative = 1e-11);
        }
    }
}
