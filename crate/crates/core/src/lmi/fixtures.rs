//! Gain matrices printed for the third-order integrator chain example
//! (shared by the finite-time and hyperexponential designs).

use crate::{Matrix, RowVector};

pub fn example_p() -> Matrix {
    Matrix::from_row_slice(
        3,
        3,
        &[
            3.3119, 3.2943, 0.8806, //
            3.2943, 5.2366, 1.4426, //
            0.8806, 1.4426, 0.9682,
        ],
    )
}

pub fn example_k() -> RowVector {
    RowVector::from_row_slice(&[-4.2618, -7.7818, -3.2635])
}

/// μ used with the finite-time law in the sampled example.
pub const FINITE_TIME_MU: f64 = 0.5;
/// μ used with the hyperexponential law.
pub const HYPER_MU: f64 = 0.2;
