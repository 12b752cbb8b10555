//! Control synthesis by the Hilbert Uniqueness Method.
//!
//! For a configuration with active channels `𝒜`, the adjoint solution from
//! final data `(φ¹, ψ¹)` produces one boundary series per channel (its
//! *pairing coefficient*, see [`AdjointTraces::pairing_coefficients`]). The
//! control on channel `ch ∈ 𝒜` is that coefficient, smoothed by `(1 − ∂ₜ²)^{1/3}`
//! on the second-derivative channels `h0, h2, g0, g2`. The duality identity then
//! turns `⟨Γ(φ¹,ψ¹), (φ¹,ψ¹)⟩` into a sum of squares — one per active channel —
//! which is what makes the Gramian `Γ` positive.
//!
//! - [`gramian`]: the Gramian operator, duality diagnostics, observability tools.
//! - [`solve`]: control problems, conjugate-gradient HUM and the one-control certificate.
//! - [`nonlinear`]: the fixed-point loop producing controls for the nonlinear system.

pub mod gramian;
pub mod nonlinear;
pub mod solve;

pub use gramian::{
    continuous_gramian_apply, duality_gap, gramian_apply, gramian_min_eigenvalue, modal_observability_gramian,
    observability_ratio, DualityReport, Gramian, ModalObservability,
};
pub use nonlinear::{nonlinear_control, nonlinear_control_with, NonlinearControlOutcome};
pub use solve::{
    hum_solve, hum_solve_report, one_control_certificate, one_control_certificate_with, ControlProblem, HumOptions,
    HumSolution, OneControlCert,
};

use serde::{Deserialize, Serialize};

use crate::evolution::{AdjointTraces, BoundaryData, Channel, ControlConfig};
use crate::model::{SpaceTimeGrid, ValidatedParams};
use crate::timefrac::{apply_symbol, Symbol};
use crate::Real;

/// Smoothing applied to the second-derivative channels during synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Multiplier {
    /// `(1 − ∂ₜ²)^{1/3}`, symbol `(1 + ω²)^{1/3}` — the Riesz map `H^{−1/3} → H^{1/3}`;
    /// it keeps the zero frequency, so the Gramian stays coercive.
    #[default]
    Bessel,
    /// `(−∂ₜ²)^{1/3}`, symbol `|ω|^{2/3}`; it annihilates constants in time.
    Homogeneous,
}

impl Multiplier {
    /// Fourier symbol of the multiplier.
    pub fn symbol<T: Real>(self) -> Symbol<T> {
        let g = T::lit(1.0 / 3.0);
        match self {
            Multiplier::Bessel => Symbol::Bessel(g),
            Multiplier::Homogeneous => Symbol::Homogeneous(g),
        }
    }

    /// Embedding constant `β` with `‖f‖_{L²} ≤ β‖f‖_{H^{1/3}}` for the norm the
    /// multiplier induces (`1` for the Bessel symbol, which dominates `1`).
    pub fn embedding_constant(self) -> f64 {
        1.0
    }
}

/// Applies the multiplier to the fractional channels of `coef` and zeroes the inactive ones.
pub fn controls_from_coefficients<T: Real>(
    cfg: ControlConfig,
    coef: &BoundaryData<T>,
    horizon: T,
    mult: Multiplier,
) -> BoundaryData<T> {
    let mut out = BoundaryData::zeros(coef.h0.len() - 1);
    for ch in cfg.active() {
        let src = coef.channel(ch);
        *out.channel_mut(ch) =
            if ch.is_fractional() { apply_symbol(src, horizon, mult.symbol()) } else { src.to_vec() };
    }
    out
}

/// Controls of configuration `cfg` built from adjoint traces with the default
/// (Bessel) multiplier; inactive channels are zero.
///
/// For `C3`: `h0 = R(φ(0) + (ab/c)ψ(0))`, `h1 = φ_x(L) + (ab/c)ψ_x(L)`,
/// `g0 = R(aφ(0) + ψ(0)/c)`, `g1 = aφ_x(L) + ψ_x(L)/c`; the other configurations
/// select their channels from the same list, with
/// `h2 = −R(φ(L) + (ab/c)ψ(L))` and `g2 = −R(aφ(L) + ψ(L)/c)`.
pub fn synthesize_controls<T: Real>(
    cfg: ControlConfig,
    traces: &AdjointTraces<T>,
    p: &ValidatedParams<T>,
    grid: &SpaceTimeGrid<T>,
) -> BoundaryData<T> {
    synthesize_controls_with(cfg, traces, p, grid, Multiplier::default())
}

/// [`synthesize_controls`] with an explicit multiplier.
pub fn synthesize_controls_with<T: Real>(
    cfg: ControlConfig,
    traces: &AdjointTraces<T>,
    p: &ValidatedParams<T>,
    grid: &SpaceTimeGrid<T>,
    mult: Multiplier,
) -> BoundaryData<T> {
    controls_from_coefficients(cfg, &traces.pairing_coefficients(p), grid.horizon, mult)
}

/// Observation functional `Σ_{ch active} ⟨coef_ch, R coef_ch⟩_{L²(0,T)}`, the
/// sum of squares `⟨Γ(φ¹,ψ¹), (φ¹,ψ¹)⟩` reduces to through the duality identity.
pub fn observation_energy<T: Real>(
    cfg: ControlConfig,
    coef: &BoundaryData<T>,
    grid: &SpaceTimeGrid<T>,
    mult: Multiplier,
) -> T {
    cross_energy(cfg, coef, coef, grid, mult)
}

/// Bilinear form behind [`observation_energy`].
pub(crate) fn cross_energy<T: Real>(
    cfg: ControlConfig,
    a: &BoundaryData<T>,
    b: &BoundaryData<T>,
    grid: &SpaceTimeGrid<T>,
    mult: Multiplier,
) -> T {
    let rb = controls_from_coefficients(cfg, b, grid.horizon, mult);
    let w = grid.time_weights();
    Channel::ALL
        .into_iter()
        .filter(|&ch| cfg.is_active(ch))
        .map(|ch| w.iter().zip(a.channel(ch)).zip(rb.channel(ch)).map(|((w, x), y)| *w * *x * *y).sum::<T>())
        .sum()
}
