use super::dilation::{varrho, varrho_derivative, Dilation, DilationKind};
use crate::error::{domain, Error, Result};
use crate::lmi::eigen::{sym_eigs, DEFAULT_TOL};
use crate::{Matrix, Vector};

/// Relative step for every finite-difference derivative in this module.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IlfVariant {
    /// `xᵀD(V⁻¹)PD(V⁻¹)x − 1`, descending weights
    FiniteTimeQ,
    /// `xᵀD(ϱ(V))PD(ϱ(V))x − 1`, descending weights
    HyperQ1,
    /// `xᵀPx / V² − 1`
    QuadraticQ2,
    /// `xᵀD̄(V⁻¹)PD̄(V⁻¹)x − 1`, ascending weights
    NearlyFixedQ2bar,
}

/// An implicit Lyapunov function `Q(V, x)`; `V(x)` is the root of `Q(·, x) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct IlfCandidate {
    variant: IlfVariant,
    p: Matrix,
    dilation: Option<Dilation>,
}

impl IlfCandidate {
    pub fn new(variant: IlfVariant, p: Matrix, dilation: Option<Dilation>) -> Result<Self> {
        let n = p.nrows();
        if n == 0 || p.ncols() != n {
            return Err(domain("P must be square and nonempty"));
        }
        let eigs = sym_eigs(&p, 1e-12).map_err(|_| domain("P must be symmetric"))?;
        if eigs[0] <= 0.0 {
            return Err(domain(format!("P must be positive definite, λ_min = {}", eigs[0])));
        }
        match (variant, &dilation) {
            (IlfVariant::QuadraticQ2, _) => {}
            (IlfVariant::FiniteTimeQ | IlfVariant::HyperQ1, Some(d))
                if matches!(d.kind(), DilationKind::Descending { .. }) => {}
            (IlfVariant::NearlyFixedQ2bar, Some(d))
                if matches!(d.kind(), DilationKind::Ascending { .. }) => {}
            _ => {
                return Err(domain(format!("{variant:?} requires a matching dilation")));
            }
        }
        if let Some(d) = &dilation {
            if d.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: d.n() });
            }
        }
        let dilation = if variant == IlfVariant::QuadraticQ2 { None } else { dilation };
        Ok(Self { variant, p, dilation })
    }

    pub fn finite_time(p: Matrix, mu: f64) -> Result<Self> {
        let d = Dilation::descending(p.nrows(), mu)?;
        Self::new(IlfVariant::FiniteTimeQ, p, Some(d))
    }

    pub fn hyper(p: Matrix, mu: f64) -> Result<Self> {
        let d = Dilation::descending(p.nrows(), mu)?;
        Self::new(IlfVariant::HyperQ1, p, Some(d))
    }

    pub fn quadratic(p: Matrix) -> Result<Self> {
        Self::new(IlfVariant::QuadraticQ2, p, None)
    }

    pub fn nearly_fixed(p: Matrix, nu: f64) -> Result<Self> {
        let d = Dilation::ascending(p.nrows(), nu)?;
        Self::new(IlfVariant::NearlyFixedQ2bar, p, Some(d))
    }

    pub fn variant(&self) -> IlfVariant {
        self.variant
    }

    pub fn p(&self) -> &Matrix {
        &self.p
    }

    pub fn dilation(&self) -> Option<&Dilation> {
        self.dilation.as_ref()
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    /// Lower clamp for the bisection solver. The hyper family dilates by `ϱ(V) ≈ ln(1/V)`,
    /// which stays bounded down to the smallest normal doubles.
    pub fn default_v_min(&self) -> f64 {
        match self.variant {
            IlfVariant::HyperQ1 => 1e-300,
            _ => 1e-9,
        }
    }

    /// `ln λ(V)`, the log of the dilation argument: `−ln V` or `ln ϱ(V)`.
    fn ln_lambda(&self, v: f64) -> f64 {
        match self.variant {
            IlfVariant::HyperQ1 => varrho(v).expect("V > 0 checked").ln(),
            _ => -v.ln(),
        }
    }

    /// The state mapped onto the unit level set, `Q(V, x) = zᵀPz − 1`.
    pub fn scaled_state(&self, v: f64, x: &Vector) -> Result<Vector> {
        self.check(v, x)?;
        Ok(match &self.dilation {
            None => x / v,
            Some(d) => d.apply_ln(self.ln_lambda(v), x),
        })
    }

    pub fn q_eval(&self, v: f64, x: &Vector) -> Result<f64> {
        Ok(self.level(v, x)? - 1.0)
    }

    /// `Q(V, x) + 1 = zᵀPz`. Differences are taken on this so that they do not cancel
    /// against the constant when `Q ≈ −1`.
    pub fn level(&self, v: f64, x: &Vector) -> Result<f64> {
        let z = self.scaled_state(v, x)?;
        Ok(quad_form(&self.p, &z))
    }

    fn check(&self, v: f64, x: &Vector) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::Contract(format!(
                "state has dimension {}, candidate expects {}",
                x.len(),
                self.n()
            )));
        }
        if !(v > 0.0) {
            return Err(domain(format!("V must be positive, got {v}")));
        }
        Ok(())
    }

    /// `xᵀPx`.
    pub fn xpx(&self, x: &Vector) -> f64 {
        quad_form(&self.p, x)
    }

    /// `∂Q/∂V` by central differences with step `FD_STEP · V`.
    pub fn dq_dv_fd(&self, v: f64, x: &Vector) -> Result<f64> {
        let h = FD_STEP * v;
        Ok((self.level(v + h, x)? - self.level(v - h, x)?) / (2.0 * h))
    }

    /// Hand-derived `∂Q₁/∂V = −(e−1)/(V(V+e−1)ϱ(V)) · zᵀ(PH + HP)z`, `z = D(ϱ(V))x`.
    /// Only defined for [`IlfVariant::HyperQ1`].
    pub fn dq_dv_closed_form(&self, v: f64, x: &Vector) -> Result<f64> {
        if self.variant != IlfVariant::HyperQ1 {
            return Err(Error::Contract("closed-form ∂Q/∂V is only provided for HyperQ1".into()));
        }
        let z = self.scaled_state(v, x)?;
        let h = self.dilation.as_ref().unwrap().weight_matrix();
        let s = &self.p * &h + &h * &self.p;
        Ok(varrho_derivative(v) / varrho(v)? * quad_form(&s, &z))
    }

    /// `∂Q/∂x` by central differences with step `FD_STEP · ‖x‖` per coordinate.
    pub fn grad_x_fd(&self, v: f64, x: &Vector) -> Result<Vector> {
        self.check(v, x)?;
        let h = FD_STEP * x.norm().max(f64::MIN_POSITIVE);
        let mut grad = Vector::zeros(x.len());
        for i in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            grad[i] = (self.level(v, &xp)? - self.level(v, &xm)?) / (2.0 * h);
        }
        Ok(grad)
    }
}

/// `zᵀMz`, symmetric summation so that equal inputs give bit-equal outputs.
pub fn quad_form(m: &Matrix, z: &Vector) -> f64 {
    let n = z.len();
    let mut s = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += m[(i, j)] * z[j];
        }
        s += z[i] * row;
    }
    s
}

/// Eigenvalue bounds `(λ_min, λ_max)` of a symmetric matrix.
pub fn eig_bounds(m: &Matrix) -> Result<(f64, f64)> {
    let e = sym_eigs(m, DEFAULT_TOL)?;
    Ok((e[0], *e.last().unwrap()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmi::fixtures::example_p;
    use approx::assert_relative_eq;

    fn v3(a: f64, b: f64, c: f64) -> Vector {
        Vector::from_vec(vec![a, b, c])
    }

    #[test]
    fn hyper_at_one_is_quadratic_form() {
        let c = IlfCandidate::hyper(example_p(), 0.2).unwrap();
        let x = v3(0.3, -0.2, 0.7);
        assert_eq!(c.q_eval(1.0, &x).unwrap(), c.xpx(&x) - 1.0);
    }

    #[test]
    fn quadratic_root() {
        let c = IlfCandidate::quadratic(example_p()).unwrap();
        let x = v3(0.3, -0.2, 0.7);
        let v = c.xpx(&x).sqrt();
        assert!(c.q_eval(v, &x).unwrap().abs() < 1e-14);
    }

    #[test]
    fn scalar_finite_time() {
        let c = IlfCandidate::finite_time(Matrix::identity(1, 1), 1.0).unwrap();
        let x = Vector::from_vec(vec![-2.5]);
        assert_relative_eq!(c.q_eval(1.7, &x).unwrap(), 6.25 / (1.7 * 1.7) - 1.0, max_relative = 1e-14);
        assert!(c.q_eval(2.5, &x).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let indefinite = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, -0.5, 2.0]));
        assert!(IlfCandidate::hyper(indefinite, 0.2).is_err());
        let d = Dilation::ascending(3, 1.0).unwrap();
        assert!(IlfCandidate::new(IlfVariant::HyperQ1, example_p(), Some(d)).is_err());
        let c = IlfCandidate::quadratic(example_p()).unwrap();
        assert!(matches!(c.q_eval(1.0, &Vector::zeros(2)), Err(Error::Contract(_))));
    }

    #[test]
    fn closed_form_derivative_matches_differences() {
        let c = IlfCandidate::hyper(example_p(), 0.2).unwrap();
        let x = v3(0.1, 0.05, -0.2);
        for v in [1e-6, 1e-2, 0.5, 1.0, 3.0] {
            assert_relative_eq!(
                c.dq_dv_closed_form(v, &x).unwrap(),
                c.dq_dv_fd(v, &x).unwrap(),
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn gradient_matches_closed_form() {
        // ∂Q/∂x = 2 D P D x for every dilated family
        let c = IlfCandidate::finite_time(example_p(), 0.5).unwrap();
        let x = v3(0.4, -0.1, 0.3);
        let v = 0.7;
        let d = c.dilation().unwrap().matrix(1.0 / v).unwrap();
        let exact = (&d * example_p() * &d * &x) * 2.0;
        let fd = c.grad_x_fd(v, &x).unwrap();
        assert!((fd - &exact).norm() < 1e-7 * exact.norm());
    }
}
