//! The Gramian `Γ: (φ¹,ψ¹) ↦ (u(T), v(T))`, duality diagnostics and
//! observability estimates.
//!
//! [`Gramian`] composes the exact discrete transpose `Mᵀ` of the
//! control-to-final-state map `M`, the channel smoothing `R` and `M` itself:
//! `Γ = M·mask·R·Mᵀ`. Because `R` is self-adjoint in the time-trapezoid product
//! and `Mᵀ` is the transpose in the space/time trapezoid products, `Γ` is
//! self-adjoint and positive semidefinite in the space-trapezoid product.
//!
//! On an inactive channel the boundary row of the scheme forces the discrete
//! boundary relation `B_ch w = 0` at every step, so the range of `M` lies in
//! `{w : B_ch w = 0}`. Its orthogonal complement, spanned by `W⁻¹B_chᵀ`, is
//! the kernel of `Γ`; the operator is applied on the reachable subspace and
//! targets are projected onto it.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::evolution::{
    build_discrete_adjoint, forward_boundary_stencil, interleaved_weights, solve_adjoint_backward,
    solve_linear_forward, BoundaryData, Channel, ControlConfig, DiscreteAdjoint,
};
use crate::linalg::{lanczos, winner};
use crate::model::{l2_inner, x_norm, SpaceTimeGrid, StatePair, ValidatedParams};
use crate::sampling::{rng, smooth_state};
use crate::{Real, Result};

use super::{controls_from_coefficients, cross_energy, synthesize_controls_with, Multiplier};

/// Gramian of one control configuration built on the exact discrete transpose.
#[derive(Debug, Clone)]
pub struct Gramian<T> {
    adj: DiscreteAdjoint<T>,
    mult: Multiplier,
    weights: Vec<T>,
    kernel: Vec<Vec<T>>,
}

impl<T: Real> Gramian<T> {
    /// Builds the operator (one banded factorisation).
    pub fn new(p: &ValidatedParams<T>, grid: &SpaceTimeGrid<T>, cfg: ControlConfig, mult: Multiplier) -> Result<Self> {
        let adj = build_discrete_adjoint(p, grid, cfg)?;
        let weights = interleaved_weights(grid);
        let mut kernel: Vec<Vec<T>> = Vec::new();
        for ch in Channel::ALL.into_iter().filter(|&c| !cfg.is_active(c)) {
            let mut z = vec![T::zero(); weights.len()];
            for (k, c) in forward_boundary_stencil(ch, grid.nx, grid.dx()) {
                z[k] += c / weights[k];
            }
            for _ in 0..2 {
                for b in &kernel {
                    let c = winner(&weights, b, &z);
                    z.iter_mut().zip(b).for_each(|(x, y)| *x -= c * *y);
                }
            }
            let n = winner(&weights, &z, &z).sqrt();
            z.iter_mut().for_each(|x| *x /= n);
            kernel.push(z);
        }
        Ok(Self { adj, mult, weights, kernel })
    }

    /// Configuration of the operator.
    pub fn config(&self) -> ControlConfig {
        self.adj.config()
    }

    /// Grid of the operator.
    pub fn grid(&self) -> &SpaceTimeGrid<T> {
        self.adj.grid()
    }

    /// Space-trapezoid weights of the interleaved unknowns.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Multiplier used on the fractional channels.
    pub fn multiplier(&self) -> Multiplier {
        self.mult
    }

    /// Handle of the control-to-final-state map and its transpose.
    pub fn discrete_adjoint(&self) -> &DiscreteAdjoint<T> {
        &self.adj
    }

    /// Orthogonal projection onto the reachable subspace, in place (interleaved vector).
    pub fn project(&self, x: &mut [T]) {
        for b in &self.kernel {
            let c = winner(&self.weights, b, x);
            x.iter_mut().zip(b).for_each(|(v, z)| *v -= c * *z);
        }
    }

    /// Controls `mask·R·Mᵀ y` associated with final adjoint data `y` (interleaved).
    pub fn controls_interleaved(&self, y: &[T]) -> Result<BoundaryData<T>> {
        let mut z = y.to_vec();
        self.project(&mut z);
        let coef = self.adj.apply_transpose_all(&StatePair::from_interleaved(&z))?;
        Ok(controls_from_coefficients(self.config(), &coef, self.grid().horizon, self.mult))
    }

    /// Controls associated with final adjoint data `y`.
    pub fn controls(&self, y: &StatePair<T>) -> Result<BoundaryData<T>> {
        y.check(self.grid().nodes())?;
        self.controls_interleaved(&y.to_interleaved())
    }

    /// `Γ y` on interleaved vectors.
    pub fn apply_interleaved(&self, y: &[T]) -> Result<Vec<T>> {
        let controls = self.controls_interleaved(y)?;
        let zero = vec![T::zero(); y.len()];
        let mut out = self.adj.solver().final_interleaved(&zero, &controls);
        self.project(&mut out);
        Ok(out)
    }

    /// `Γ y`.
    pub fn apply(&self, y: &StatePair<T>) -> Result<StatePair<T>> {
        y.check(self.grid().nodes())?;
        Ok(StatePair::from_interleaved(&self.apply_interleaved(&y.to_interleaved())?))
    }
}

/// `Γ(φ¹,ψ¹)` for configuration `cfg` with the default multiplier.
pub fn gramian_apply<T: Real>(
    cfg: ControlConfig,
    phi1: &StatePair<T>,
    p: &ValidatedParams<T>,
    grid: &SpaceTimeGrid<T>,
) -> Result<StatePair<T>> {
    Gramian::new(p, grid, cfg, Multiplier::default())?.apply(phi1)
}

/// The same composition with the independently discretised adjoint system
/// supplying the traces: adjoint solve → synthesis → forward solve. It agrees
/// with [`gramian_apply`] up to discretisation error but is not exactly symmetric.
pub fn continuous_gramian_apply<T: Real>(
    cfg: ControlConfig,
    phi1: &StatePair<T>,
    p: &ValidatedParams<T>,
    grid: &SpaceTimeGrid<T>,
    mult: Multiplier,
) -> Result<StatePair<T>> {
    let (_, tr) = solve_adjoint_backward(p, grid, phi1)?;
    let controls = synthesize_controls_with(cfg, &tr, p, grid, mult);
    let traj = solve_linear_forward(p, grid, &StatePair::zeros(grid.nodes()), &controls, None)?;
    Ok(traj.final_state().clone())
}

/// Both sides of the duality identity for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityReport<T> {
    /// `∫(u(T)φ¹ + v(T)ψ¹)` for the forward solution from zero initial data.
    pub lhs: T,
    /// `Σ_{ch active} ∫₀ᵀ input_ch · coefficient_ch dt` with adjoint traces.
    pub rhs: T,
    /// `|lhs − rhs|`.
    pub gap: T,
    /// `gap / max(|lhs|, |rhs|)` (zero when both vanish).
    pub relative: T,
}

/// Evaluates the duality identity: the forward solution driven by the active
/// channels of `bd` paired with `phi1`, against the boundary pairing of `bd`
/// with the traces of the adjoint solution from `phi1`.
pub fn duality_gap<T: Real>(
    cfg: ControlConfig,
    bd: &BoundaryData<T>,
    phi1: &StatePair<T>,
    p: &ValidatedParams<T>,
    grid: &SpaceTimeGrid<T>,
) -> Result<DualityReport<T>> {
    let inputs = bd.masked(cfg);
    let traj = solve_linear_forward(p, grid, &StatePair::zeros(grid.nodes()), &inputs, None)?;
    let lhs = l2_inner(traj.final_state(), phi1, grid)?;
    let (_, tr) = solve_adjoint_backward(p, grid, phi1)?;
    let rhs = inputs.inner(&tr.pairing_coefficients(p), grid);
    let gap = (lhs - rhs).abs();
    let scale = lhs.abs().max(rhs.abs());
    let relative = if scale > T::zero() { gap / scale } else { T::zero() };
    Ok(DualityReport { lhs, rhs, gap, relative })
}

/// Lanczos estimate `(λ_min, λ_max)` of the Gramian on the reachable subspace,
/// started from a seeded Gaussian vector.
pub fn gramian_min_eigenvalue<T: Real>(gram: &Gramian<T>, steps: usize, seed: u64) -> Result<(T, T)> {
    let mut r = rng(seed);
    let start: Vec<T> = (0..gram.weights().len()).map(|_| T::lit(r.sample(StandardNormal))).collect();
    let mut failure = None;
    let outcome = lanczos(
        |y| match gram.apply_interleaved(y) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                vec![T::zero(); y.len()]
            }
        },
        &start,
        gram.weights(),
        steps,
        Some(&|x: &mut Vec<T>| gram.project(x)),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let o = outcome.ok_or_else(|| crate::GgError::InvalidArgument("Lanczos start vector vanished".into()))?;
    Ok((o.min_ritz, o.max_ritz))
}

/// Empirical lower bound of the observability constant: the minimum over
/// `samples` random smooth final data of
/// `Σ_{ch active}⟨coef_ch, R coef_ch⟩ / ‖(φ¹,ψ¹)‖²_𝒳`, with coefficients from
/// the adjoint solver. Degree-0 homogeneous in the data.
pub fn observability_ratio<T: Real>(
    cfg: ControlConfig,
    p: &ValidatedParams<T>,
    grid: &SpaceTimeGrid<T>,
    samples: usize,
    seed: u64,
    mult: Multiplier,
) -> Result<T> {
    let mut r = rng(seed);
    let mut best = T::infinity();
    for _ in 0..samples {
        let y = smooth_state(grid, &mut r, 8);
        best = best.min(observation_quotient(cfg, &y, p, grid, mult)?);
    }
    Ok(best)
}

/// `Σ_{ch active}⟨coef_ch, R coef_ch⟩ / ‖y‖²_𝒳` for one final datum `y`.
pub fn observation_quotient<T: Real>(
    cfg: ControlConfig,
    y: &StatePair<T>,
    p: &ValidatedParams<T>,
    grid: &SpaceTimeGrid<T>,
    mult: Multiplier,
) -> Result<T> {
    let (_, tr) = solve_adjoint_backward(p, grid, y)?;
    let coef = tr.pairing_coefficients(p);
    Ok(cross_energy(cfg, &coef, &coef, grid, mult) / x_norm(y, p, grid)?.powi(2))
}

/// Observability Gramian compressed onto resolved modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalObservability<T> {
    /// Number of cosine modes per component.
    pub modes: usize,
    /// Eigenvalues in increasing order.
    pub eigenvalues: Vec<T>,
}

impl<T: Real> ModalObservability<T> {
    /// Smallest eigenvalue.
    pub fn min(&self) -> T {
        self.eigenvalues[0]
    }
}

/// Observability Gramian `G_ij = Σ_{ch active}⟨coef_ch(e_i), R coef_ch(e_j)⟩`
/// on the first `modes` cosine modes `cos(kπx/L)` of each component,
/// orthonormalised in `L²`. Traces come from the adjoint solver, so the
/// matrix reflects the continuous observation operator on well-resolved data
/// and is free of grid-scale modes.
pub fn modal_observability_gramian<T: Real>(
    cfg: ControlConfig,
    p: &ValidatedParams<T>,
    grid: &SpaceTimeGrid<T>,
    modes: usize,
    mult: Multiplier,
) -> Result<ModalObservability<T>> {
    if modes == 0 || 2 * modes > grid.nodes() {
        return Err(crate::GgError::InvalidArgument(format!("modes must lie in 1..={}", grid.nodes() / 2)));
    }
    let w = interleaved_weights(grid);
    let pi = T::lit(std::f64::consts::PI);
    let xs = grid.xs();
    let mut basis: Vec<Vec<T>> = Vec::new();
    for q in 0..2 {
        for k in 0..modes {
            let mut v = vec![T::zero(); w.len()];
            for (j, x) in xs.iter().enumerate() {
                v[2 * j + q] = (T::of(k) * pi * *x / grid.length).cos();
            }
            for _ in 0..2 {
                for b in &basis {
                    let c = winner(&w, b, &v);
                    v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * *y);
                }
            }
            let n = winner(&w, &v, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    let mut coefs = Vec::with_capacity(basis.len());
    for b in &basis {
        let (_, tr) = solve_adjoint_backward(p, grid, &StatePair::from_interleaved(b))?;
        coefs.push(tr.pairing_coefficients(p));
    }
    let n = basis.len();
    let mut g = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = cross_energy(cfg, &coefs[i], &coefs[j], grid, mult).to_f64().unwrap_or(f64::NAN);
        }
    }
    let sym = (&g + g.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    Ok(ModalObservability { modes, eigenvalues: ev.into_iter().map(T::lit).collect() })
}
