//! Boundary controllability toolkit for the Gear–Grimshaw coupled KdV system
//!
//! ```text
//! u_t + u u_x + u_xxx + a v_xxx + a1 v v_x + a2 (uv)_x = 0
//! c v_t + r v_x + v v_x + ab u_xxx + v_xxx + a2 b u u_x + a1 b (uv)_x = 0
//! ```
//!
//! posed on `(0, L) × (0, T)` with the Neumann-type boundary inputs
//! `u_xx(0)=h0, u_x(L)=h1, u_xx(L)=h2` and `v_xx(0)=g0, v_x(L)=g1, v_xx(L)=g2`.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: physical parameters, grids, states, inner products and the
//!   diagonalising change of variables.
//! - [`fd`], [`banded`], [`linalg`]: finite-difference weights, banded LU with
//!   transpose solves, Krylov helpers (CG, Lanczos, tridiagonal eigenvalues).
//! - [`timefrac`]: fractional powers of `−∂ₜ²` and `H^s(0,T)` norms via FFT.
//! - [`evolution`]: Crank–Nicolson solvers for the forward linear/nonlinear
//!   system and the backward adjoint system, plus the exact discrete transpose
//!   of the control-to-final-state map.
//! - [`hum`]: duality pairing, Gramian, HUM conjugate gradient, observability
//!   estimates, one-control certificate and the nonlinear fixed-point loop.
//! - [`critical`]: the critical-length set, its verification and two
//!   independent kernel oracles.
//!
//! Numerical kernels are generic over the scalar type through [`Real`]
//! (implemented for `f32` and `f64`); the aliases at the crate root fix the
//! scalar to `f64`, which is what every tolerance in the test-suite assumes.

// Guards are written as `!(x > 0)` on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod critical;
pub mod error;
pub mod evolution;
pub mod fd;
pub mod hum;
pub mod linalg;
pub mod model;
pub mod sampling;
pub mod timefrac;

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

pub use error::{GgError, Result};

/// Floating-point scalar accepted by the numerical kernels: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + NumAssign + rustfft::FftNum + Debug + Display + Default + Sum + 'static
{
    /// Converts an `f64` constant into the scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Converts an index or count into the scalar type.
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("representable count")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Physical coefficients in double precision.
pub type Params = model::SystemParams<f64>;
/// Validated coefficients in double precision.
pub type Validated = model::ValidatedParams<f64>;
/// Space-time grid in double precision.
pub type Grid = model::SpaceTimeGrid<f64>;
/// State `(u, v)` in double precision.
pub type State = model::StatePair<f64>;
/// Time-indexed states in double precision.
pub type Traj = model::Trajectory<f64>;
/// Boundary inputs in double precision.
pub type Boundary = evolution::BoundaryData<f64>;
/// Adjoint boundary traces in double precision.
pub type Traces = evolution::AdjointTraces<f64>;
/// Sampled time series in double precision.
pub type Series = timefrac::TimeSeries<f64>;
