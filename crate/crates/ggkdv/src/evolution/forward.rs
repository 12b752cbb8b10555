//! Crank–Nicolson forward solvers.

use crate::banded::{BandedLu, SparseRows};
use crate::fd::{d1, d3, stencil};
use crate::model::{SpaceTimeGrid, StatePair, Trajectory, ValidatedParams};
use crate::{GgError, Real, Result};

use super::{ix, BoundaryData, Channel, SourcePair};

/// Spatial operator `K` of `w_t + K w = 0` on the interior rows `j = 1..nx−1`.
///
/// For the forward system the `u` row couples `[1, a]` and the `v` row
/// `[ab/c, 1/c]` through the third derivative; for the adjoint system the
/// couplings are transposed (`[1, ab/c]` and `[a, 1/c]`). Both carry
/// `(r/c)∂ₓ` on the second component.
pub(crate) fn dispersive_operator<T: Real>(
    p: &ValidatedParams<T>,
    grid: &SpaceTimeGrid<T>,
    adjoint: bool,
) -> SparseRows<T> {
    let nx = grid.nx;
    let dx = grid.dx();
    let a = p.get().a;
    let (c01, c10) = if adjoint { (p.ab_c(), a) } else { (a, p.ab_c()) };
    let c11 = p.inv_c();
    let rc = p.r_c();
    let mut k = SparseRows::zeros(2 * (nx + 1));
    for j in 1..nx {
        for (m, w) in d3(j, nx, dx) {
            k.add(ix(j, 0), ix(m, 0), w);
            k.add(ix(j, 0), ix(m, 1), c01 * w);
            k.add(ix(j, 1), ix(m, 0), c10 * w);
            k.add(ix(j, 1), ix(m, 1), c11 * w);
        }
        for (m, w) in d1(j, dx) {
            k.add(ix(j, 1), ix(m, 1), rc * w);
        }
    }
    k
}

/// Row of the implicit matrix that carries the boundary condition of `ch`.
pub(crate) fn boundary_row(ch: Channel, nx: usize) -> usize {
    let q = ch.component();
    match ch {
        Channel::H0 | Channel::G0 => ix(0, q),
        Channel::H1 | Channel::G1 => ix(nx, q),
        Channel::H2 | Channel::G2 => ix(nx - 1, q),
    }
}

/// Stencil of the boundary condition of `ch` (`u_xx(0)`, `u_x(L)`, `u_xx(L)`, …).
pub(crate) fn boundary_stencil<T: Real>(ch: Channel, nx: usize, dx: T) -> Vec<(usize, T)> {
    let q = ch.component();
    let st = match ch {
        Channel::H0 | Channel::G0 => stencil(0, 0, 3, 2, dx),
        Channel::H1 | Channel::G1 => stencil(nx, nx - 2, nx, 1, dx),
        Channel::H2 | Channel::G2 => stencil(nx, nx - 3, nx, 2, dx),
    };
    st.into_iter().map(|(m, w)| (ix(m, q), w)).collect()
}

/// Options of the nonlinear forward solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearOptions<T> {
    /// Include the self-interaction terms `u u_x` (first equation) and
    /// `v v_x` (second equation). Disabling them gives the variant in which
    /// the nonlinearity is `a1 v v_x + a2 (uv)_x` and `(a2 b u u_x + a1 b (uv)_x)/c`.
    pub self_terms: bool,
    /// Per-step Picard tolerance on the max-norm increment (relative to `max(1, ‖w‖∞)`).
    pub picard_tol: T,
    /// Maximum Picard iterations per step.
    pub picard_max_iter: usize,
}

impl<T: Real> Default for NonlinearOptions<T> {
    fn default() -> Self {
        Self { self_terms: true, picard_tol: T::lit(1e-10), picard_max_iter: 50 }
    }
}

/// Factorised Crank–Nicolson stepper for the forward system.
///
/// `A w^{n+1} = E w^n + G g^{n+1}` with `A = I + (dt/2)K`, `E = I − (dt/2)K`
/// on PDE rows; boundary rows of `A` hold the boundary stencils, the same
/// rows of `E` vanish, and `G` injects the input value at `t_{n+1}`.
#[derive(Debug, Clone)]
pub struct ForwardSolver<T> {
    pub(crate) params: ValidatedParams<T>,
    pub(crate) grid: SpaceTimeGrid<T>,
    pub(crate) lu: BandedLu<T>,
    pub(crate) explicit: SparseRows<T>,
    pub(crate) bc_rows: [usize; 6],
}

impl<T: Real> ForwardSolver<T> {
    /// Assembles and factorises the stepping matrices.
    pub fn new(p: &ValidatedParams<T>, grid: &SpaceTimeGrid<T>) -> Result<Self> {
        let n = 2 * grid.nodes();
        let half_dt = grid.dt() * T::lit(0.5);
        let k = dispersive_operator(p, grid, false);
        let id = SparseRows::identity(n);
        let mut implicit = id.combine(T::one(), &k, half_dt);
        let mut explicit = id.combine(T::one(), &k, -half_dt);
        let mut bc_rows = [0; 6];
        for ch in Channel::ALL {
            let row = boundary_row(ch, grid.nx);
            bc_rows[ch.index()] = row;
            implicit.set_row(row, boundary_stencil(ch, grid.nx, grid.dx()));
            explicit.set_row(row, Vec::new());
        }
        let lu = BandedLu::factor(&implicit)?;
        Ok(Self { params: *p, grid: *grid, lu, explicit, bc_rows })
    }

    /// Grid the solver was built for.
    pub fn grid(&self) -> &SpaceTimeGrid<T> {
        &self.grid
    }

    /// Rows `2j + q` that carry the PDE (`j = 1..nx−2`).
    fn is_pde_row(&self, row: usize) -> bool {
        !self.bc_rows.contains(&row)
    }

    fn rhs(&self, w: &[T], bd: &BoundaryData<T>, n_next: usize) -> Vec<T> {
        let mut rhs = self.explicit.mul(w);
        for ch in Channel::ALL {
            rhs[self.bc_rows[ch.index()]] = bd.channel(ch)[n_next];
        }
        rhs
    }

    fn add_source(&self, rhs: &mut [T], src: &SourcePair<T>, n: usize) {
        let half_dt = self.grid.dt() * T::lit(0.5);
        for j in 0..self.grid.nodes() {
            for (q, field) in [&src.f, &src.s].into_iter().enumerate() {
                let row = ix(j, q);
                if self.is_pde_row(row) && j > 0 {
                    rhs[row] += half_dt * (field[n][j] + field[n + 1][j]);
                }
            }
        }
    }

    fn check(&self, init: &StatePair<T>, bd: &BoundaryData<T>) -> Result<()> {
        init.check(self.grid.nodes())?;
        bd.check(self.grid.nt)
    }

    /// Full trajectory of the linear system.
    pub fn run(&self, init: &StatePair<T>, bd: &BoundaryData<T>, src: Option<&SourcePair<T>>) -> Result<Trajectory<T>> {
        self.check(init, bd)?;
        if let Some(s) = src {
            s.check(&self.grid)?;
        }
        let mut w = init.to_interleaved();
        let mut states = Vec::with_capacity(self.grid.nt + 1);
        states.push(init.clone());
        for n in 0..self.grid.nt {
            let mut rhs = self.rhs(&w, bd, n + 1);
            if let Some(s) = src {
                self.add_source(&mut rhs, s, n);
            }
            self.lu.solve_in_place(&mut rhs);
            w = rhs;
            states.push(StatePair::from_interleaved(&w));
        }
        Ok(Trajectory { states, times: self.grid.ts() })
    }

    /// Final state of the linear system without storing the trajectory.
    pub fn final_state(&self, init: &StatePair<T>, bd: &BoundaryData<T>) -> Result<StatePair<T>> {
        self.check(init, bd)?;
        Ok(StatePair::from_interleaved(&self.final_interleaved(&init.to_interleaved(), bd)))
    }

    pub(crate) fn final_interleaved(&self, w0: &[T], bd: &BoundaryData<T>) -> Vec<T> {
        let mut w = w0.to_vec();
        for n in 0..self.grid.nt {
            let mut rhs = self.rhs(&w, bd, n + 1);
            self.lu.solve_in_place(&mut rhs);
            w = rhs;
        }
        w
    }

    /// Nonlinear flux divergence `∂ₓF(w)` on PDE rows (zero elsewhere).
    fn nonlinear_term(&self, w: &[T], self_terms: bool) -> Vec<T> {
        let q = self.params.get();
        let nodes = self.grid.nodes();
        let half = T::lit(0.5);
        let s = if self_terms { T::one() } else { T::zero() };
        let ic = self.params.inv_c();
        let mut fu = vec![T::zero(); nodes];
        let mut fv = vec![T::zero(); nodes];
        for j in 0..nodes {
            let (u, v) = (w[ix(j, 0)], w[ix(j, 1)]);
            fu[j] = s * half * u * u + q.a1 * half * v * v + q.a2 * u * v;
            fv[j] = ic * (s * half * v * v + q.a2 * q.b * half * u * u + q.a1 * q.b * u * v);
        }
        let dx = self.grid.dx();
        let mut out = vec![T::zero(); 2 * nodes];
        for j in 1..self.grid.nx {
            let st = d1(j, dx);
            for (qq, flux) in [&fu, &fv].into_iter().enumerate() {
                let row = ix(j, qq);
                if self.is_pde_row(row) {
                    out[row] = st.iter().map(|&(m, c)| c * flux[m]).sum();
                }
            }
        }
        out
    }

    /// Full trajectory of the nonlinear system (Picard iteration per step on the
    /// midpoint nonlinearity, linear part as in [`ForwardSolver::run`]).
    pub fn run_nonlinear(
        &self,
        init: &StatePair<T>,
        bd: &BoundaryData<T>,
        opts: &NonlinearOptions<T>,
    ) -> Result<Trajectory<T>> {
        self.check(init, bd)?;
        let dt = self.grid.dt();
        let half = T::lit(0.5);
        let mut w = init.to_interleaved();
        let mut states = Vec::with_capacity(self.grid.nt + 1);
        states.push(init.clone());
        for n in 0..self.grid.nt {
            let base = self.rhs(&w, bd, n + 1);
            let mut guess = w.clone();
            let mut converged = false;
            let mut last = T::zero();
            for _ in 0..opts.picard_max_iter {
                let mid: Vec<T> = w.iter().zip(&guess).map(|(a, b)| half * (*a + *b)).collect();
                let nl = self.nonlinear_term(&mid, opts.self_terms);
                let mut rhs = base.clone();
                for (r, v) in rhs.iter_mut().zip(&nl) {
                    *r -= dt * *v;
                }
                self.lu.solve_in_place(&mut rhs);
                let inc = rhs.iter().zip(&guess).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
                let scale = rhs.iter().fold(T::one(), |m, a| m.max(a.abs()));
                guess = rhs;
                last = inc;
                if !inc.is_finite() {
                    break;
                }
                if inc <= opts.picard_tol * scale {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(GgError::PicardDivergence {
                    step: n,
                    residual: last.to_f64().unwrap_or(f64::NAN),
                    iterations: opts.picard_max_iter,
                });
            }
            w = guess;
            states.push(StatePair::from_interleaved(&w));
        }
        Ok(Trajectory { states, times: self.grid.ts() })
    }
}

/// Solves the forward linear system with Crank–Nicolson.
pub fn solve_linear_forward<T: Real>(
    p: &ValidatedParams<T>,
    grid: &SpaceTimeGrid<T>,
    init: &StatePair<T>,
    bd: &BoundaryData<T>,
    src: Option<&SourcePair<T>>,
) -> Result<Trajectory<T>> {
    ForwardSolver::new(p, grid)?.run(init, bd, src)
}

/// Solves the forward nonlinear system (IMEX Crank–Nicolson with Picard iteration).
pub fn solve_nonlinear_forward<T: Real>(
    p: &ValidatedParams<T>,
    grid: &SpaceTimeGrid<T>,
    init: &StatePair<T>,
    bd: &BoundaryData<T>,
    opts: &NonlinearOptions<T>,
) -> Result<Trajectory<T>> {
    ForwardSolver::new(p, grid)?.run_nonlinear(init, bd, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_params, x_norm, SystemParams};

    fn setup(nx: usize, nt: usize) -> (ValidatedParams<f64>, SpaceTimeGrid<f64>) {
        (
            validate_params(&SystemParams::<f64>::default()).unwrap(),
            SpaceTimeGrid::<f64>::new(std::f64::consts::PI, 0.5, nx, nt).unwrap(),
        )
    }

    #[test]
    fn zero_data_gives_zero_trajectory() {
        let (p, g) = setup(20, 20);
        let tr = solve_linear_forward(&p, &g, &StatePair::zeros(21), &BoundaryData::zeros(20), None).unwrap();
        assert!(tr.states.iter().all(|s| s.max_abs() == 0.0));
        let nl = solve_nonlinear_forward(
            &p,
            &g,
            &StatePair::zeros(21),
            &BoundaryData::zeros(20),
            &NonlinearOptions::default(),
        )
        .unwrap();
        assert!(nl.states.iter().all(|s| s.max_abs() == 0.0));
    }

    #[test]
    fn boundary_rows_hold_the_inputs() {
        let (p, g) = setup(32, 40);
        let mut bd = BoundaryData::zeros(40);
        for (n, t) in g.ts().into_iter().enumerate() {
            bd.h1[n] = (3.0 * t).sin();
            bd.g0[n] = t * t;
        }
        let tr = solve_linear_forward(&p, &g, &StatePair::zeros(33), &bd, None).unwrap();
        let dx = g.dx();
        let last = tr.final_state();
        let ux: f64 = boundary_stencil(Channel::H1, 32, dx).iter().map(|&(k, w)| w * last.to_interleaved()[k]).sum();
        let vxx: f64 = boundary_stencil(Channel::G0, 32, dx).iter().map(|&(k, w)| w * last.to_interleaved()[k]).sum();
        assert!((ux - bd.h1[40]).abs() < 1e-9);
        assert!((vxx - bd.g0[40]).abs() < 1e-9);
    }

    #[test]
    fn sine_initial_state_stays_bounded() {
        let (p, g) = setup(64, 128);
        let l = g.length;
        let init = StatePair::from_fn(&g, |x| (2.0 * std::f64::consts::PI * x / l).sin(), |_| 0.0);
        let tr = solve_linear_forward(&p, &g, &init, &BoundaryData::zeros(128), None).unwrap();
        let e0 = x_norm(&init, &p, &g).unwrap();
        let e1 = x_norm(tr.final_state(), &p, &g).unwrap();
        assert!(e1 < 1.05 * e0, "{e0} -> {e1}");
    }
}
