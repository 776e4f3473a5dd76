use super::eigen::{lambda_max, lambda_min, symmetrize};
use super::plant::PlantConfig;
use crate::error::{domain, Error, Result};
use crate::ilf::Dilation;
use crate::{Matrix, RowVector};

/// Relative slack for the non-strict "≤ 0" test, scaled by `‖X‖_F`.
pub const PSD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmiKind {
    /// `AX + XAᵀ + BY + YᵀBᵀ + aX ≤ 0, XH + HX > 0, X > 0`
    FiniteTime,
    /// `AX + XAᵀ + BY + YᵀBᵀ + γ(XH + HX) ≤ 0, XH + HX > 0, X > 0`
    Hyper,
}

/// `X = P⁻¹`, `Y = KX` together with the homogeneity degree and the decay witness
/// (`a` for [`LmiKind::FiniteTime`], `γ` for [`LmiKind::Hyper`]).
#[derive(Debug, Clone, PartialEq)]
pub struct GainCertificate {
    pub x: Matrix,
    pub y: RowVector,
    pub p: Matrix,
    pub k: RowVector,
    pub mu: f64,
    pub gamma_or_a: f64,
    pub which: LmiKind,
}

impl GainCertificate {
    pub fn from_gains(p: Matrix, k: RowVector, mu: f64, witness: f64, which: LmiKind) -> Result<Self> {
        check_shapes(&p, &k)?;
        let x = symmetrize(&invert(&p)?);
        let y = &k * &x;
        Ok(Self { x, y, p, k, mu, gamma_or_a: witness, which })
    }

    pub fn from_xy(x: Matrix, y: RowVector, mu: f64, witness: f64, which: LmiKind) -> Result<Self> {
        check_shapes(&x, &y)?;
        let p = symmetrize(&invert(&x)?);
        let k = &y * &p;
        Ok(Self { x, y, p, k, mu, gamma_or_a: witness, which })
    }

    /// `(‖KX − Y‖_F, ‖PX − I‖_F)`.
    pub fn consistency_residuals(&self) -> (f64, f64) {
        let n = self.x.nrows();
        (
            (&self.k * &self.x - &self.y).norm(),
            (&self.p * &self.x - Matrix::identity(n, n)).norm(),
        )
    }

    pub fn with_witness(&self, witness: f64) -> Self {
        Self { gamma_or_a: witness, ..self.clone() }
    }
}

fn check_shapes(m: &Matrix, row: &RowVector) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(domain("gain matrix must be square"));
    }
    if row.len() != m.nrows() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: row.len() });
    }
    Ok(())
}

fn invert(m: &Matrix) -> Result<Matrix> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| domain("matrix is singular"))
}

/// Outcome of an LMI feasibility check. The three margins are
/// `λ_max(lhs)`, `λ_min(XH + HX)` and `λ_min(X)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmiReport {
    pub feasible: bool,
    pub lhs_max: f64,
    pub sym_min: f64,
    pub x_min: f64,
    pub tolerance: f64,
}

impl LmiReport {
    pub fn margins(&self) -> [f64; 3] {
        [self.lhs_max, self.sym_min, self.x_min]
    }
}

/// `H = diag{1 + (n − i)μ}`.
pub fn weight_matrix(n: usize, mu: f64) -> Result<Matrix> {
    Ok(Dilation::descending(n, mu)?.weight_matrix())
}

fn closed_loop_part(plant: &PlantConfig, x: &Matrix, y: &RowVector) -> Result<Matrix> {
    let n = plant.n();
    if x.nrows() != n || x.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.nrows() });
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    let ax = &plant.a * x;
    let by = &plant.b * y;
    Ok(&ax + ax.transpose() + &by + by.transpose())
}

pub fn finite_time_lhs(plant: &PlantConfig, x: &Matrix, y: &RowVector, a: f64) -> Result<Matrix> {
    Ok(closed_loop_part(plant, x, y)? + x * a)
}

pub fn hyper_lhs(plant: &PlantConfig, x: &Matrix, y: &RowVector, mu: f64, gamma: f64) -> Result<Matrix> {
    let h = weight_matrix(plant.n(), mu)?;
    Ok(closed_loop_part(plant, x, y)? + (x * &h + &h * x) * gamma)
}

fn report(lhs: &Matrix, x: &Matrix, mu: f64) -> Result<LmiReport> {
    let h = weight_matrix(x.nrows(), mu)?;
    let tolerance = PSD_TOLERANCE * x.norm();
    let lhs_max = lambda_max(&symmetrize(lhs))?;
    let sym_min = lambda_min(&symmetrize(&(x * &h + &h * x)))?;
    let x_min = lambda_min(&symmetrize(x))?;
    Ok(LmiReport {
        feasible: lhs_max <= tolerance && sym_min > 0.0 && x_min > 0.0,
        lhs_max,
        sym_min,
        x_min,
        tolerance,
    })
}

pub fn verify_finite_time_lmi(cert: &GainCertificate, plant: &PlantConfig) -> Result<LmiReport> {
    if cert.which != LmiKind::FiniteTime {
        return Err(Error::Contract("certificate is not a finite-time certificate".into()));
    }
    report(&finite_time_lhs(plant, &cert.x, &cert.y, cert.gamma_or_a)?, &cert.x, cert.mu)
}

pub fn verify_hyper_lmi(cert: &GainCertificate, plant: &PlantConfig) -> Result<LmiReport> {
    if cert.which != LmiKind::Hyper {
        return Err(Error::Contract("certificate is not a hyperexponential certificate".into()));
    }
    if !(cert.gamma_or_a > 0.0) {
        return Err(domain("γ must be positive"));
    }
    report(&hyper_lhs(plant, &cert.x, &cert.y, cert.mu, cert.gamma_or_a)?, &cert.x, cert.mu)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WitnessSearch {
    /// Largest feasible value found (itself feasible), within the requested tolerance.
    Feasible(f64),
    Infeasible,
}

impl WitnessSearch {
    pub fn value(&self) -> Option<f64> {
        match self {
            WitnessSearch::Feasible(v) => Some(*v),
            WitnessSearch::Infeasible => None,
        }
    }
}

/// Largest `γ` for which `(X, Y)` satisfies the hyperexponential LMI.
pub fn max_gamma_search(
    x: &Matrix,
    y: &RowVector,
    plant: &PlantConfig,
    mu: f64,
    tol: f64,
) -> Result<WitnessSearch> {
    let cert = GainCertificate::from_xy(x.clone(), y.clone(), mu, tol, LmiKind::Hyper)?;
    bisect_witness(tol, |g| Ok(verify_hyper_lmi(&cert.with_witness(g), plant)?.feasible))
}

/// Largest `a` for which `(X, Y)` satisfies the finite-time LMI.
pub fn max_a_search(
    x: &Matrix,
    y: &RowVector,
    plant: &PlantConfig,
    mu: f64,
    tol: f64,
) -> Result<WitnessSearch> {
    let cert = GainCertificate::from_xy(x.clone(), y.clone(), mu, tol, LmiKind::FiniteTime)?;
    bisect_witness(tol, |a| Ok(verify_finite_time_lmi(&cert.with_witness(a), plant)?.feasible))
}

/// Feasibility is monotone in the witness because the witness multiplies a positive
/// definite term, so doubling then bisecting brackets the threshold.
fn bisect_witness(tol: f64, feasible: impl Fn(f64) -> Result<bool>) -> Result<WitnessSearch> {
    if !(tol > 0.0) {
        return Err(domain("search tolerance must be positive"));
    }
    if !feasible(tol)? {
        return Ok(WitnessSearch::Infeasible);
    }
    let mut lo = tol;
    let mut hi = 2.0 * tol.max(0.5);
    while feasible(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e15 {
            return Ok(WitnessSearch::Feasible(lo));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(WitnessSearch::Feasible(lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmi::{build_chain, fixtures};

    fn example_cert(mu: f64, witness: f64, which: LmiKind) -> GainCertificate {
        GainCertificate::from_gains(fixtures::example_p(), fixtures::example_k(), mu, witness, which)
            .unwrap()
    }

    #[test]
    fn certificate_consistency() {
        let c = example_cert(0.5, 1.0, LmiKind::FiniteTime);
        let (ky, px) = c.consistency_residuals();
        assert!(ky < 1e-10 && px < 1e-10);
    }

    #[test]
    fn example_gains_feasible_for_finite_time() {
        let plant = build_chain(3).unwrap();
        let c = example_cert(0.5, 1.0, LmiKind::FiniteTime);
        let a = max_a_search(&c.x, &c.y, &plant, 0.5, 1e-9).unwrap().value().unwrap();
        assert!(a > 0.0);
        let r = verify_finite_time_lmi(&c.with_witness(a), &plant).unwrap();
        assert!(r.feasible, "{r:?}");
    }

    #[test]
    fn example_gains_feasible_for_hyper() {
        let plant = build_chain(3).unwrap();
        let c = example_cert(0.2, 1.0, LmiKind::Hyper);
        let g = max_gamma_search(&c.x, &c.y, &plant, 0.2, 1e-9).unwrap().value().unwrap();
        assert!(g > 0.0);
        assert!(verify_hyper_lmi(&c.with_witness(g), &plant).unwrap().feasible);
        assert!(!verify_hyper_lmi(&c.with_witness(g + 1e-6), &plant).unwrap().feasible);
        // μ = 1 changes H and so the margin
        let g1 = max_gamma_search(&c.x, &c.y, &plant, 1.0, 1e-9).unwrap().value().unwrap();
        assert!((g1 - g).abs() > 1e-3);
    }

    #[test]
    fn open_chain_infeasible() {
        let plant = build_chain(3).unwrap();
        let k = RowVector::zeros(3);
        let c = GainCertificate::from_gains(fixtures::example_p(), k, 0.5, 0.1, LmiKind::FiniteTime).unwrap();
        let r = verify_finite_time_lmi(&c, &plant).unwrap();
        assert!(!r.feasible);
        assert!(r.lhs_max > 0.0);
        let y0 = RowVector::zeros(3);
        assert_eq!(
            max_gamma_search(&c.x, &y0, &plant, 0.2, 1e-6).unwrap(),
            WitnessSearch::Infeasible
        );
    }

    #[test]
    fn large_gamma_becomes_infeasible() {
        let plant = build_chain(3).unwrap();
        let c = example_cert(0.2, 1e3, LmiKind::Hyper);
        assert!(!verify_hyper_lmi(&c, &plant).unwrap().feasible);
    }

    #[test]
    fn kind_mismatch_is_contract_error() {
        let plant = build_chain(3).unwrap();
        let c = example_cert(0.2, 0.1, LmiKind::Hyper);
        assert!(matches!(verify_finite_time_lmi(&c, &plant), Err(Error::Contract(_))));
    }
}
