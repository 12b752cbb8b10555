//! Exact algebraic transpose of the discrete control-to-final-state map.
//!
//! For zero initial state the Crank–Nicolson scheme defines a linear map
//! `M: g ↦ w^{nt}` from the sampled inputs to the final state. With the
//! space-trapezoid product `⟨·,·⟩_W` on states and the time-trapezoid product
//! `⟨·,·⟩_D` on inputs, the transpose `Mᵀ = D⁻¹ M' W` (`M'` the plain matrix
//! transpose) is evaluated by one backward sweep with `A⁻ᵀ` and `Eᵀ`:
//! `λ = W y`, then for `n = nt, …, 1`: `μ = A⁻ᵀ λ`, `gⁿ = Gᵀ μ`, `λ = Eᵀ μ`.
//! The input value at `t₀` never enters the scheme, so its transpose vanishes.

use crate::model::{SpaceTimeGrid, StatePair, ValidatedParams};
use crate::{Real, Result};

use super::forward::ForwardSolver;
use super::{interleaved_weights, BoundaryData, Channel, ControlConfig};

/// Handle applying `M` and its transpose for one control configuration.
#[derive(Debug, Clone)]
pub struct DiscreteAdjoint<T> {
    solver: ForwardSolver<T>,
    cfg: ControlConfig,
    space_w: Vec<T>,
    time_w: Vec<T>,
}

impl<T: Real> DiscreteAdjoint<T> {
    /// Builds the handle (factorises the forward matrices once).
    pub fn new(p: &ValidatedParams<T>, grid: &SpaceTimeGrid<T>, cfg: ControlConfig) -> Result<Self> {
        Ok(Self {
            solver: ForwardSolver::new(p, grid)?,
            cfg,
            space_w: interleaved_weights(grid),
            time_w: grid.time_weights(),
        })
    }

    /// Configuration whose inactive channels are masked.
    pub fn config(&self) -> ControlConfig {
        self.cfg
    }

    /// Grid of the underlying solver.
    pub fn grid(&self) -> &SpaceTimeGrid<T> {
        self.solver.grid()
    }

    /// Forward solver shared by the handle.
    pub fn solver(&self) -> &ForwardSolver<T> {
        &self.solver
    }

    /// `M(mask g)`: final state from zero initial data.
    pub fn apply(&self, bd: &BoundaryData<T>) -> Result<StatePair<T>> {
        let nodes = self.grid().nodes();
        self.solver.final_state(&StatePair::zeros(nodes), &bd.masked(self.cfg))
    }

    /// `Mᵀ y` on all six channels (no mask).
    pub fn apply_transpose_all(&self, y: &StatePair<T>) -> Result<BoundaryData<T>> {
        let g = self.grid();
        y.check(g.nodes())?;
        let nt = g.nt;
        let mut out = BoundaryData::zeros(nt);
        let mut lam: Vec<T> = y.to_interleaved().iter().zip(&self.space_w).map(|(a, w)| *a * *w).collect();
        for n in (1..=nt).rev() {
            self.solver.lu.solve_transpose_in_place(&mut lam);
            for ch in Channel::ALL {
                out.channel_mut(ch)[n] = lam[self.solver.bc_rows[ch.index()]] / self.time_w[n];
            }
            lam = self.solver.explicit.mul_transpose(&lam);
        }
        Ok(out)
    }

    /// `mask Mᵀ y`, the transpose of [`DiscreteAdjoint::apply`].
    pub fn apply_transpose(&self, y: &StatePair<T>) -> Result<BoundaryData<T>> {
        Ok(self.apply_transpose_all(y)?.masked(self.cfg))
    }
}

/// Builds the exact discrete transpose handle for `cfg`.
pub fn build_discrete_adjoint<T: Real>(
    p: &ValidatedParams<T>,
    grid: &SpaceTimeGrid<T>,
    cfg: ControlConfig,
) -> Result<DiscreteAdjoint<T>> {
    DiscreteAdjoint::new(p, grid, cfg)
}
