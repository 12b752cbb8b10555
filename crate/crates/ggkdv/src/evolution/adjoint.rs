//! Backward Crank–Nicolson solver for the adjoint system and trace extraction.
//!
//! The adjoint system reads
//! `φ_t + φ_xxx + (ab/c)ψ_xxx = 0`, `ψ_t + (r/c)ψ_x + aφ_xxx + (1/c)ψ_xxx = 0`
//! with `φ_x = ψ_x = 0` at `x = 0`, and at both ends
//! `φ_xx + (ab/c)ψ_xx = 0`, `aφ_xx + ψ_xx/c + (r/c)ψ = 0`.
//! It is integrated backward from the final data at `t = T`.

use crate::banded::{BandedLu, SparseRows};
use crate::fd::{apply, stencil};
use crate::model::{SpaceTimeGrid, StatePair, Trajectory, ValidatedParams};
use crate::{Real, Result};

use super::forward::dispersive_operator;
use super::{ix, AdjointTraces};

/// Factorised backward stepper for the adjoint system.
#[derive(Debug, Clone)]
pub struct AdjointSolver<T> {
    params: ValidatedParams<T>,
    grid: SpaceTimeGrid<T>,
    lu: BandedLu<T>,
    explicit: SparseRows<T>,
}

/// Rows `(row, entries)` that impose the adjoint boundary conditions.
fn boundary_rows<T: Real>(p: &ValidatedParams<T>, nx: usize, dx: T) -> Vec<(usize, Vec<(usize, T)>)> {
    let a = p.get().a;
    let k = p.ab_c();
    let ic = p.inv_c();
    let rc = p.r_c();
    let first0 = stencil(0, 0, 2, 1, dx);
    let second0 = stencil(0, 0, 3, 2, dx);
    let second_l = stencil(nx, nx - 3, nx, 2, dx);
    let comb = |st: &[(usize, T)], cu: T, cv: T| -> Vec<(usize, T)> {
        st.iter().map(|&(m, w)| (ix(m, 0), cu * w)).chain(st.iter().map(|&(m, w)| (ix(m, 1), cv * w))).collect()
    };
    let with_psi = |mut e: Vec<(usize, T)>, j: usize| {
        e.push((ix(j, 1), rc));
        e
    };
    vec![
        (ix(0, 0), first0.iter().map(|&(m, w)| (ix(m, 0), w)).collect()),
        (ix(0, 1), first0.iter().map(|&(m, w)| (ix(m, 1), w)).collect()),
        (ix(1, 0), comb(&second0, T::one(), k)),
        (ix(1, 1), with_psi(comb(&second0, a, ic), 0)),
        (ix(nx, 0), comb(&second_l, T::one(), k)),
        (ix(nx, 1), with_psi(comb(&second_l, a, ic), nx)),
    ]
}

impl<T: Real> AdjointSolver<T> {
    /// Assembles and factorises `A = I − (dt/2)K*` with boundary rows, and `E = I + (dt/2)K*`.
    pub fn new(p: &ValidatedParams<T>, grid: &SpaceTimeGrid<T>) -> Result<Self> {
        let n = 2 * grid.nodes();
        let half_dt = grid.dt() * T::lit(0.5);
        let k = dispersive_operator(p, grid, true);
        let id = SparseRows::identity(n);
        let mut implicit = id.combine(T::one(), &k, -half_dt);
        let mut explicit = id.combine(T::one(), &k, half_dt);
        for (row, entries) in boundary_rows(p, grid.nx, grid.dx()) {
            implicit.set_row(row, entries);
            explicit.set_row(row, Vec::new());
        }
        let lu = BandedLu::factor(&implicit)?;
        Ok(Self { params: *p, grid: *grid, lu, explicit })
    }

    /// Backward trajectory (indexed forward in time, `states[nt]` = final data) and its traces.
    pub fn solve(&self, final_data: &StatePair<T>) -> Result<(Trajectory<T>, AdjointTraces<T>)> {
        final_data.check(self.grid.nodes())?;
        let nt = self.grid.nt;
        let mut w = final_data.to_interleaved();
        let mut rev = Vec::with_capacity(nt + 1);
        rev.push(final_data.clone());
        for _ in 0..nt {
            let mut rhs = self.explicit.mul(&w);
            self.lu.solve_in_place(&mut rhs);
            w = rhs;
            rev.push(StatePair::from_interleaved(&w));
        }
        rev.reverse();
        let traj = Trajectory { states: rev, times: self.grid.ts() };
        let traces = extract_traces(&traj, &self.grid);
        Ok((traj, traces))
    }

    /// Parameters the solver was built with.
    pub fn params(&self) -> &ValidatedParams<T> {
        &self.params
    }
}

/// Boundary traces of a trajectory: values at both ends, `∂ₓ` at `L` by the
/// three-point one-sided stencil, `∂ₓ²` at both ends by four-point one-sided stencils.
pub fn extract_traces<T: Real>(traj: &Trajectory<T>, grid: &SpaceTimeGrid<T>) -> AdjointTraces<T> {
    let nx = grid.nx;
    let dx = grid.dx();
    let d_l = stencil(nx, nx - 2, nx, 1, dx);
    let dd0 = stencil(0, 0, 3, 2, dx);
    let dd_l = stencil(nx, nx - 3, nx, 2, dx);
    let collect = |f: &dyn Fn(&StatePair<T>) -> T| -> Vec<T> { traj.states.iter().map(f).collect() };
    AdjointTraces {
        phi0: collect(&|s| s.u[0]),
        psi0: collect(&|s| s.v[0]),
        phi_l: collect(&|s| s.u[nx]),
        psi_l: collect(&|s| s.v[nx]),
        dphi_l: collect(&|s| apply(&d_l, &s.u)),
        dpsi_l: collect(&|s| apply(&d_l, &s.v)),
        d2phi0: collect(&|s| apply(&dd0, &s.u)),
        d2psi0: collect(&|s| apply(&dd0, &s.v)),
        d2phi_l: collect(&|s| apply(&dd_l, &s.u)),
        d2psi_l: collect(&|s| apply(&dd_l, &s.v)),
    }
}

/// Largest residual of the six adjoint boundary relations over the time levels
/// `0..nt` (the final level carries unconstrained data), measured with
/// five-point one-sided stencils that are more accurate than those imposed by
/// the scheme, so the value measures the truncation error of the boundary closure.
pub fn boundary_residual<T: Real>(p: &ValidatedParams<T>, grid: &SpaceTimeGrid<T>, traj: &Trajectory<T>) -> T {
    let nx = grid.nx;
    let dx = grid.dx();
    let a = p.get().a;
    let (k, ic, rc) = (p.ab_c(), p.inv_c(), p.r_c());
    let d0 = stencil(0, 0, 4, 1, dx);
    let dd0 = stencil(0, 0, 4, 2, dx);
    let dd_l = stencil(nx, nx - 4, nx, 2, dx);
    let mut worst = T::zero();
    for s in &traj.states[..traj.states.len() - 1] {
        let (pxx0, sxx0) = (apply(&dd0, &s.u), apply(&dd0, &s.v));
        let (pxxl, sxxl) = (apply(&dd_l, &s.u), apply(&dd_l, &s.v));
        let res = [
            apply(&d0, &s.u),
            apply(&d0, &s.v),
            pxx0 + k * sxx0,
            pxxl + k * sxxl,
            a * pxx0 + ic * sxx0 + rc * s.v[0],
            a * pxxl + ic * sxxl + rc * s.v[nx],
        ];
        worst = res.iter().fold(worst, |m, r| m.max(r.abs()));
    }
    worst
}

/// Solves the adjoint system backward from `(φ¹, ψ¹)` at `t = T`.
pub fn solve_adjoint_backward<T: Real>(
    p: &ValidatedParams<T>,
    grid: &SpaceTimeGrid<T>,
    final_data: &StatePair<T>,
) -> Result<(Trajectory<T>, AdjointTraces<T>)> {
    AdjointSolver::new(p, grid)?.solve(final_data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_params, SystemParams};

    #[test]
    fn zero_final_data_gives_zero_traces() {
        let p = validate_params(&SystemParams::<f64>::default()).unwrap();
        let g = SpaceTimeGrid::<f64>::new(3.0, 0.5, 24, 24).unwrap();
        let (tr, traces) = solve_adjoint_backward(&p, &g, &StatePair::zeros(25)).unwrap();
        assert!(tr.states.iter().all(|s| s.max_abs() == 0.0));
        assert!(traces.phi0.iter().chain(&traces.d2psi_l).all(|x| *x == 0.0));
        assert_eq!(traces.dphi_l.len(), 25);
    }

    #[test]
    fn final_level_is_the_data() {
        let p = validate_params(&SystemParams::<f64>::default()).unwrap();
        let g = SpaceTimeGrid::<f64>::new(3.0, 0.5, 24, 30).unwrap();
        let fin = StatePair::from_fn(&g, |x| (x - 1.5).powi(2), |x| x.cos());
        let (tr, _) = solve_adjoint_backward(&p, &g, &fin).unwrap();
        assert_eq!(tr.final_state(), &fin);
        assert_eq!(tr.states.len(), 31);
    }
}
