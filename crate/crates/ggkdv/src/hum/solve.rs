//! Control problems, the conjugate-gradient HUM solver and the one-control certificate.

use serde::{Deserialize, Serialize};

use crate::critical::{is_critical, GeneratorTuple};
use crate::evolution::{hidden_regularity_estimate, BoundaryData, ControlConfig, ForwardSolver};
use crate::linalg::conjugate_gradient;
use crate::model::{x_norm, SpaceTimeGrid, StatePair, SystemParams, Trajectory, ValidatedParams};
use crate::{GgError, Real, Result};

use super::gramian::Gramian;
use super::Multiplier;

/// Relative distance to a critical length below which a control problem of
/// `C1`/`C2` carries a warning.
pub const CRITICAL_WARNING_TOL: f64 = 1e-6;

/// Certificate for the one-control configurations: the smallness condition
/// `β C_T (L + r/c) / T < 1` and the resulting constant `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneControlCert<T> {
    /// Hidden-regularity constant used (supplied or estimated).
    pub c_t: T,
    /// Embedding constant `β`.
    pub beta: T,
    /// `β C_T (L + r/c) / T`.
    pub condition_value: T,
    /// `(1/(a²b)) / (1 − condition_value)` when the condition holds (and `a ≠ 0`).
    pub k: Option<T>,
}

impl<T: Real> OneControlCert<T> {
    /// True when `condition_value < 1`.
    pub fn passes(&self) -> bool {
        self.condition_value < T::one()
    }
}

/// Evaluates the certificate from given constants.
pub fn one_control_certificate_with<T: Real>(
    p: &ValidatedParams<T>,
    length: T,
    horizon: T,
    c_t: T,
    beta: T,
) -> OneControlCert<T> {
    let q = p.get();
    let condition_value = beta * c_t / horizon * (length + q.r / q.c);
    let a2b = q.a * q.a * q.b;
    let k = if condition_value < T::one() && a2b > T::zero() {
        Some(T::one() / a2b / (T::one() - condition_value))
    } else {
        None
    };
    OneControlCert { c_t, beta, condition_value, k }
}

/// Certificate on a grid; `C_T` is estimated with
/// [`hidden_regularity_estimate`] from `samples` draws when not supplied,
/// and `β = 1` (the embedding constant of the Bessel norm).
pub fn one_control_certificate<T: Real>(
    p: &ValidatedParams<T>,
    grid: &SpaceTimeGrid<T>,
    c_t: Option<T>,
    samples: usize,
    seed: u64,
) -> Result<OneControlCert<T>> {
    let c_t = match c_t {
        Some(c) => c,
        None => hidden_regularity_estimate(p, grid, samples.max(1), seed)?,
    };
    let beta = T::lit(Multiplier::Bessel.embedding_constant());
    Ok(one_control_certificate_with(p, grid.length, grid.horizon, c_t, beta))
}

/// Steering problem: drive `init` to `target` in time `T` with the inputs of `cfg`.
#[derive(Debug, Clone)]
pub struct ControlProblem<T> {
    /// Coefficients.
    pub params: ValidatedParams<T>,
    /// Grid.
    pub grid: SpaceTimeGrid<T>,
    /// Active inputs.
    pub cfg: ControlConfig,
    /// Initial state `(u⁰, v⁰)`.
    pub init: StatePair<T>,
    /// Target state `(u¹, v¹)`.
    pub target: StatePair<T>,
    /// One-control certificate (required by `C5`/`C6`).
    pub certificate: Option<OneControlCert<T>>,
    /// Non-fatal diagnostics (e.g. proximity to a critical length).
    pub warnings: Vec<String>,
}

impl<T: Real> ControlProblem<T> {
    /// Checks shapes and records a warning when `cfg ∈ {C1, C2}` and `L` lies
    /// within a relative `1e−6` of a critical length.
    pub fn new(
        params: ValidatedParams<T>,
        grid: SpaceTimeGrid<T>,
        cfg: ControlConfig,
        init: StatePair<T>,
        target: StatePair<T>,
    ) -> Result<Self> {
        init.check(grid.nodes())?;
        target.check(grid.nodes())?;
        let mut prob = Self { params, grid, cfg, init, target, certificate: None, warnings: Vec::new() };
        if let Some(gen) = prob.critical_generator(CRITICAL_WARNING_TOL) {
            prob.warnings.push(format!(
                "L = {} is within {CRITICAL_WARNING_TOL:e} (relative) of the critical length generated by {gen}; \
                 the discrete Gramian is ill-conditioned",
                prob.grid.length
            ));
        }
        Ok(prob)
    }

    /// Attaches a one-control certificate.
    pub fn with_certificate(mut self, cert: OneControlCert<T>) -> Self {
        self.certificate = Some(cert);
        self
    }

    /// Generator of a critical length within `rel_tol` of `L` when `cfg` has critical lengths.
    pub fn critical_generator(&self, rel_tol: f64) -> Option<GeneratorTuple> {
        if !self.cfg.has_critical_lengths() {
            return None;
        }
        let q = self.params.get();
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        let p64 = SystemParams { a: f(q.a), a1: f(q.a1), a2: f(q.a2), b: f(q.b), c: f(q.c), r: f(q.r) };
        is_critical(&p64, f(self.grid.length), rel_tol)
    }

    /// Fails with [`GgError::Precondition`] when a one-control configuration
    /// lacks a passing certificate.
    pub fn check_preconditions(&self) -> Result<()> {
        if self.cfg.is_one_control() {
            match &self.certificate {
                Some(c) if c.passes() => {}
                Some(c) => {
                    return Err(GgError::Precondition(format!(
                        "one-control certificate fails: condition value {} >= 1",
                        c.condition_value
                    )))
                }
                None => {
                    return Err(GgError::Precondition(format!(
                        "configuration {:?} requires a one-control certificate",
                        self.cfg
                    )))
                }
            }
        }
        Ok(())
    }
}

/// Options of the HUM solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HumOptions<T> {
    /// Relative residual tolerance of conjugate gradient.
    pub tol: T,
    /// Maximum CG iterations.
    pub maxit: usize,
    /// Smoothing of the second-derivative channels.
    pub multiplier: Multiplier,
}

impl<T: Real> Default for HumOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-8), maxit: 200, multiplier: Multiplier::Bessel }
    }
}

/// Controls and diagnostics returned by the HUM solver.
#[derive(Debug, Clone, PartialEq)]
pub struct HumSolution<T> {
    /// Boundary inputs (inactive channels zero).
    pub controls: BoundaryData<T>,
    /// Trajectory of an independent forward solve driven by `controls`.
    pub trajectory: Trajectory<T>,
    /// CG iterations performed.
    pub cg_iterations: usize,
    /// `‖w(T) − target‖_𝒳 / ‖target‖_𝒳` of that trajectory (absolute when the target vanishes).
    pub final_error: T,
    /// Smallest Ritz value of the Gramian recovered from the CG coefficients.
    pub gramian_min_eig_estimate: T,
    /// Relative residual after each CG iteration (entry 0 is the start).
    pub cg_history: Vec<T>,
    /// Whether CG met its tolerance.
    pub converged: bool,
    /// Final adjoint datum `(φ¹, ψ¹)` solving `Γ(φ¹, ψ¹) = target − free evolution`.
    pub adjoint_final: StatePair<T>,
}

impl<T: Real> HumSolution<T> {
    /// Final CG relative residual.
    pub fn relative_residual(&self) -> T {
        self.cg_history.last().copied().unwrap_or_else(T::zero)
    }
}

/// Relative 𝒳-error of `state` with respect to `target`.
pub(crate) fn relative_x_error<T: Real>(
    state: &StatePair<T>,
    target: &StatePair<T>,
    p: &ValidatedParams<T>,
    g: &SpaceTimeGrid<T>,
) -> Result<T> {
    let err = x_norm(&state.axpy(-T::one(), target), p, g)?;
    let scale = x_norm(target, p, g)?;
    Ok(if scale > T::zero() { err / scale } else { err })
}

/// Runs HUM and returns the solution whether or not CG met its tolerance.
///
/// The right-hand side is `target − (free evolution of init)`, projected onto
/// the reachable subspace; `warm_start` seeds CG with a previous adjoint datum.
pub fn hum_solve_report<T: Real>(
    prob: &ControlProblem<T>,
    opts: &HumOptions<T>,
    warm_start: Option<&StatePair<T>>,
) -> Result<HumSolution<T>> {
    prob.check_preconditions()?;
    let gram = Gramian::new(&prob.params, &prob.grid, prob.cfg, opts.multiplier)?;
    let solver = gram.discrete_adjoint().solver();
    let free = solver.final_state(&prob.init, &BoundaryData::zeros(prob.grid.nt))?;
    let mut rhs = prob.target.axpy(-T::one(), &free).to_interleaved();
    gram.project(&mut rhs);
    let x0 = warm_start.map(|s| s.to_interleaved());
    let mut failure = None;
    let cg = conjugate_gradient(
        |y| match gram.apply_interleaved(y) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                vec![T::zero(); y.len()]
            }
        },
        &rhs,
        x0.as_deref(),
        gram.weights(),
        opts.tol,
        opts.maxit,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let controls = gram.controls_interleaved(&cg.x)?;
    let trajectory = verify_controls(&prob.params, &prob.grid, &prob.init, &controls)?;
    let final_error = relative_x_error(trajectory.final_state(), &prob.target, &prob.params, &prob.grid)?;
    Ok(HumSolution {
        controls,
        final_error,
        gramian_min_eig_estimate: cg.min_ritz().unwrap_or_else(T::zero),
        cg_iterations: cg.iterations,
        converged: cg.converged,
        cg_history: cg.history.clone(),
        adjoint_final: StatePair::from_interleaved(&cg.x),
        trajectory,
    })
}

/// Independent forward solve (fresh factorisation) of the controlled system.
pub fn verify_controls<T: Real>(
    p: &ValidatedParams<T>,
    grid: &SpaceTimeGrid<T>,
    init: &StatePair<T>,
    controls: &BoundaryData<T>,
) -> Result<Trajectory<T>> {
    ForwardSolver::new(p, grid)?.run(init, controls, None)
}

/// HUM with CG tolerance `tol` and at most `maxit` iterations; fails with
/// [`GgError::CgStagnation`] (carrying the Gramian min-eigenvalue estimate)
/// when the tolerance is not met.
pub fn hum_solve<T: Real>(prob: &ControlProblem<T>, tol: T, maxit: usize) -> Result<HumSolution<T>> {
    let opts = HumOptions { tol, maxit, ..HumOptions::default() };
    let sol = hum_solve_report(prob, &opts, None)?;
    if sol.converged {
        Ok(sol)
    } else {
        Err(GgError::CgStagnation {
            iterations: sol.cg_iterations,
            relative_residual: sol.relative_residual().to_f64().unwrap_or(f64::NAN),
            min_eig_estimate: sol.gramian_min_eig_estimate.to_f64().unwrap_or(f64::NAN),
        })
    }
}
