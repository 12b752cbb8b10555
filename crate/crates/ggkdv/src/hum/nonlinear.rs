//! Fixed-point construction of controls for the nonlinear system.
//!
//! Each outer step solves a linear HUM problem whose target is corrected by
//! the nonlinear drift `ν` — the part of the final state produced by the
//! nonlinear terms along the current iterate (nonlinear minus linear final
//! state under the same controls). With `z₀ = target` and
//! `z_{k+1} = target − ν_k`, a fixed point steers the nonlinear system exactly.

use crate::evolution::{ForwardSolver, NonlinearOptions};
use crate::model::{x_norm, StatePair};
use crate::{GgError, Real, Result};

use super::solve::{hum_solve_report, relative_x_error, ControlProblem, HumOptions, HumSolution};

/// Consecutive non-contracting outer iterations tolerated before giving up.
const MAX_NON_CONTRACTING: usize = 5;

/// Result of [`nonlinear_control`].
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearControlOutcome<T> {
    /// Last iterate: controls, the nonlinear trajectory they produce and its relative final error.
    pub solution: HumSolution<T>,
    /// Outer iterations performed.
    pub outer_iterations: usize,
    /// Relative final 𝒳-error of the nonlinear trajectory after each outer iteration.
    pub error_history: Vec<T>,
    /// `‖ν‖_𝒳` after each outer iteration.
    pub drift_history: Vec<T>,
    /// Whether the error tolerance was met.
    pub converged: bool,
}

impl<T: Real> NonlinearControlOutcome<T> {
    /// Drift of the first outer iteration.
    pub fn first_drift(&self) -> T {
        self.drift_history.first().copied().unwrap_or_else(T::zero)
    }
}

/// Nonlinear control with default inner options (CG tolerance `1e−8`, at
/// most 200 iterations, full nonlinearity).
pub fn nonlinear_control<T: Real>(
    prob: &ControlProblem<T>,
    delta: T,
    tol: T,
    maxit_outer: usize,
) -> Result<NonlinearControlOutcome<T>> {
    nonlinear_control_with(prob, delta, tol, maxit_outer, &HumOptions::default(), &NonlinearOptions::default())
}

/// Nonlinear control with explicit inner options.
///
/// Requires `‖init‖_𝒳 + ‖target‖_𝒳 ≤ delta`; fails with
/// [`GgError::OuterDivergence`] after five consecutive iterations without a
/// decrease of the final error.
pub fn nonlinear_control_with<T: Real>(
    prob: &ControlProblem<T>,
    delta: T,
    tol: T,
    maxit_outer: usize,
    hum: &HumOptions<T>,
    nl: &NonlinearOptions<T>,
) -> Result<NonlinearControlOutcome<T>> {
    let (p, g) = (&prob.params, &prob.grid);
    let size = x_norm(&prob.init, p, g)? + x_norm(&prob.target, p, g)?;
    if size > delta {
        return Err(GgError::Precondition(format!(
            "data size ‖init‖ + ‖target‖ = {size} exceeds the smallness bound delta = {delta}"
        )));
    }
    let solver = ForwardSolver::new(p, g)?;
    let mut corrected = prob.clone();
    let mut warm: Option<StatePair<T>> = None;
    let mut errors = Vec::new();
    let mut drifts = Vec::new();
    let mut stalled = 0;
    let mut last: Option<HumSolution<T>> = None;
    for k in 0..maxit_outer.max(1) {
        let mut sol = hum_solve_report(&corrected, hum, warm.as_ref())?;
        warm = Some(sol.adjoint_final.clone());
        let traj = solver.run_nonlinear(&prob.init, &sol.controls, nl)?;
        let drift = traj.final_state().axpy(-T::one(), sol.trajectory.final_state());
        let err = relative_x_error(traj.final_state(), &prob.target, p, g)?;
        drifts.push(x_norm(&drift, p, g)?);
        if let Some(&prev) = errors.last() {
            stalled = if err < prev { 0 } else { stalled + 1 };
        }
        errors.push(err);
        sol.trajectory = traj;
        sol.final_error = err;
        if err <= tol {
            return Ok(NonlinearControlOutcome {
                solution: sol,
                outer_iterations: k + 1,
                error_history: errors,
                drift_history: drifts,
                converged: true,
            });
        }
        if stalled >= MAX_NON_CONTRACTING || !err.is_finite() {
            return Err(GgError::OuterDivergence { iteration: k, error: err.to_f64().unwrap_or(f64::NAN) });
        }
        corrected.target = prob.target.axpy(-T::one(), &drift);
        last = Some(sol);
    }
    Ok(NonlinearControlOutcome {
        solution: last.expect("at least one outer iteration"),
        outer_iterations: errors.len(),
        error_history: errors,
        drift_history: drifts,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::ControlConfig;
    use crate::model::{validate_params, SpaceTimeGrid, SystemParams};

    #[test]
    fn linear_degeneration_converges_in_one_iteration() {
        let base = SystemParams::<f64> { a1: 0.0, a2: 0.0, ..SystemParams::default() };
        let p = validate_params(&base).unwrap();
        let g = SpaceTimeGrid::<f64>::new(3.0, 1.0, 30, 60).unwrap();
        let target = StatePair::from_fn(&g, |x| 1e-4 * (x * 1.1).sin(), |x| 1e-4 * x * (3.0 - x) / 9.0);
        let prob = ControlProblem::new(p, g, ControlConfig::C3, StatePair::zeros(31), target).unwrap();
        let nl = NonlinearOptions { self_terms: false, ..NonlinearOptions::default() };
        let hum = HumOptions { tol: 1e-6, maxit: 80, ..HumOptions::default() };
        let lin = hum_solve_report(&prob, &hum, None).unwrap();
        let out = nonlinear_control_with(&prob, 1.0, lin.final_error * 1.000001 + 1e-15, 5, &hum, &nl).unwrap();
        assert_eq!(out.outer_iterations, 1);
        assert_eq!(out.first_drift(), 0.0);
        assert_eq!(out.solution.controls, lin.controls);
    }

    #[test]
    fn oversized_data_is_rejected() {
        let p = validate_params(&SystemParams::<f64>::default()).unwrap();
        let g = SpaceTimeGrid::<f64>::new(3.0, 1.0, 20, 20).unwrap();
        let target = StatePair::from_fn(&g, |_| 1.0, |_| 0.0);
        let prob = ControlProblem::new(p, g, ControlConfig::C3, StatePair::zeros(21), target).unwrap();
        assert!(matches!(nonlinear_control(&prob, 1e-3, 1e-2, 3), Err(GgError::Precondition(_))));
    }
}
