use crate::error::{domain, Result};
use crate::Matrix;

/// Single-input linear plant `ẋ = Ax + Bu`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantConfig {
    pub a: Matrix,
    pub b: Matrix,
}

impl PlantConfig {
    pub fn new(a: Matrix, b: Matrix) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n || b.nrows() != n || b.ncols() != 1 {
            return Err(domain(format!(
                "plant needs square A and n×1 B, got A {}×{} and B {}×{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(Self { a, b })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// `[B, AB, …, Aⁿ⁻¹B]`.
    pub fn controllability_matrix(&self) -> Matrix {
        let n = self.n();
        let mut c = Matrix::zeros(n, n);
        let mut col = self.b.clone();
        for j in 0..n {
            c.set_column(j, &col.column(0));
            col = &self.a * col;
        }
        c
    }

    pub fn controllability_rank(&self) -> usize {
        self.controllability_matrix().rank(1e-10)
    }

    pub fn is_controllable(&self) -> bool {
        self.controllability_rank() == self.n()
    }
}

/// Chain of `n` integrators: ones on the superdiagonal of A, `B = eₙ`.
pub fn build_chain(n: usize) -> Result<PlantConfig> {
    if n < 1 {
        return Err(domain("integrator chain needs n ≥ 1"));
    }
    let a = Matrix::from_fn(n, n, |i, j| if j == i + 1 { 1.0 } else { 0.0 });
    let mut b = Matrix::zeros(n, 1);
    b[(n - 1, 0)] = 1.0;
    Ok(PlantConfig { a, b })
}
