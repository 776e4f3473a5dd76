use crate::error::{domain, Result};
use crate::{Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DilationKind {
    /// `qᵢ = 1 + (n − i)μ`, `μ ∈ (0, 1]`
    Descending { mu: f64 },
    /// `pᵢ = 1 + (i − 1)ν`, `ν > 0`
    Ascending { nu: f64 },
}

/// Weighted dilation `D(λ) = diag{λ^{wᵢ}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dilation {
    exponents: Vec<f64>,
    kind: DilationKind,
}

impl Dilation {
    pub fn descending(n: usize, mu: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("dilation dimension must be positive"));
        }
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(domain(format!("μ must lie in (0, 1], got {mu}")));
        }
        let exponents = (1..=n).map(|i| 1.0 + (n - i) as f64 * mu).collect();
        Ok(Self { exponents, kind: DilationKind::Descending { mu } })
    }

    pub fn ascending(n: usize, nu: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("dilation dimension must be positive"));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(domain(format!("ν must be positive, got {nu}")));
        }
        let exponents = (1..=n).map(|i| 1.0 + (i - 1) as f64 * nu).collect();
        Ok(Self { exponents, kind: DilationKind::Ascending { nu } })
    }

    pub fn n(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn kind(&self) -> DilationKind {
        self.kind
    }

    /// `H = diag{wᵢ}`.
    pub fn weight_matrix(&self) -> Matrix {
        Matrix::from_diagonal(&Vector::from_vec(self.exponents.clone()))
    }

    /// `D(λ)`.
    pub fn matrix(&self, lambda: f64) -> Result<Matrix> {
        check_lambda(lambda)?;
        let ln = lambda.ln();
        Ok(Matrix::from_diagonal(&Vector::from_iterator(
            self.n(),
            self.exponents.iter().map(|w| (w * ln).exp()),
        )))
    }

    /// `D(λ)x` given `ln λ`; avoids forming `λ` when it is extreme.
    pub fn apply_ln(&self, ln_lambda: f64, x: &Vector) -> Vector {
        Vector::from_iterator(
            self.n(),
            self.exponents.iter().zip(x.iter()).map(|(w, xi)| xi * (w * ln_lambda).exp()),
        )
    }

    pub fn apply(&self, lambda: f64, x: &Vector) -> Result<Vector> {
        check_lambda(lambda)?;
        Ok(self.apply_ln(lambda.ln(), x))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(domain(format!("dilation parameter must be positive, got {lambda}")));
    }
    Ok(())
}

pub fn dilation_matrix(d: &Dilation, lambda: f64) -> Result<Matrix> {
    d.matrix(lambda)
}

const E_MINUS_ONE: f64 = std::f64::consts::E - 1.0;

/// `ϱ(V) = ln((V + e − 1)/V)`.
pub fn varrho(v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(domain(format!("ϱ needs V > 0, got {v}")));
    }
    if v == 1.0 {
        return Ok(1.0);
    }
    Ok((E_MINUS_ONE / v).ln_1p())
}

/// `dϱ/dV = −(e − 1) / (V (V + e − 1))`.
pub fn varrho_derivative(v: f64) -> f64 {
    -E_MINUS_ONE / (v * (v + E_MINUS_ONE))
}
