//! Physical parameters, grids, state containers, inner products and the
//! diagonalising change of variables.

use serde::{Deserialize, Serialize};

use crate::{GgError, Real, Result};

/// Coefficients `a, a1, a2, b, c, r` of the coupled system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams<T> {
    /// Dispersive coupling `a`.
    pub a: T,
    /// Nonlinear coefficient `a1`.
    pub a1: T,
    /// Nonlinear coefficient `a2`.
    pub a2: T,
    /// Positive coefficient `b`.
    pub b: T,
    /// Positive coefficient `c`.
    pub c: T,
    /// Positive coefficient `r`.
    pub r: T,
}

impl<T: Real> Default for SystemParams<T> {
    /// The reference set `a = 0.5, a1 = a2 = 1, b = c = r = 1` (`1 − a²b = 0.75`).
    fn default() -> Self {
        Self { a: T::lit(0.5), a1: T::one(), a2: T::one(), b: T::one(), c: T::one(), r: T::one() }
    }
}

impl<T: Real> SystemParams<T> {
    /// `1 − a²b`, positive for admissible parameters.
    pub fn gap(&self) -> T {
        T::one() - self.a * self.a * self.b
    }
}

/// Parameters that passed [`validate_params`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedParams<T>(SystemParams<T>);

impl<T: Real> ValidatedParams<T> {
    /// The validated coefficients.
    pub fn get(&self) -> &SystemParams<T> {
        &self.0
    }

    /// `ab/c`, the coupling of `v_xxx` into the `u` equation after division by `c`.
    pub fn ab_c(&self) -> T {
        self.0.a * self.0.b / self.0.c
    }

    /// `1/c`.
    pub fn inv_c(&self) -> T {
        T::one() / self.0.c
    }

    /// `r/c`.
    pub fn r_c(&self) -> T {
        self.0.r / self.0.c
    }

    /// Returns a copy with the nonlinear coefficients replaced.
    pub fn with_nonlinear(&self, a1: T, a2: T) -> Self {
        Self(SystemParams { a1, a2, ..self.0 })
    }
}

/// Checks `b > 0`, `c > 0`, `r > 0` and `1 − a²b > 0`.
///
/// Every failed inequality is listed in the returned
/// [`GgError::CoefficientViolation`].
pub fn validate_params<T: Real>(p: &SystemParams<T>) -> Result<ValidatedParams<T>> {
    let mut violations = Vec::new();
    let all = [p.a, p.a1, p.a2, p.b, p.c, p.r];
    if all.iter().any(|x| !x.is_finite()) {
        violations.push("all coefficients must be finite".to_string());
    }
    if !(p.b > T::zero()) {
        violations.push(format!("b > 0 fails (b = {})", p.b));
    }
    if !(p.c > T::zero()) {
        violations.push(format!("c > 0 fails (c = {})", p.c));
    }
    if !(p.r > T::zero()) {
        violations.push(format!("r > 0 fails (r = {})", p.r));
    }
    if !(p.gap() > T::zero()) {
        violations.push(format!("1 - a^2 b > 0 fails (1 - a^2 b = {})", p.gap()));
    }
    if violations.is_empty() {
        Ok(ValidatedParams(*p))
    } else {
        Err(GgError::CoefficientViolation { violations })
    }
}

/// Change of variables that diagonalises the dispersive matrix
/// `[[1, a], [ab/c, 1/c]]`.
///
/// Columns of `from_diag` are `(2a, (1/c − 1) ± λ)`, so
/// `u = 2a·ũ + 2a·ṽ`, `v = ((1/c−1)+λ)ũ + ((1/c−1)−λ)ṽ`.
/// The reported `alpha_plus`/`alpha_minus` follow the convention
/// `α± = −½((1/c − 1) ± λ)`; the diagonal entries of the transformed matrix
/// are `eig_plus = ½(1 + 1/c + λ)` and `eig_minus = ½(1 + 1/c − λ)`, which
/// relate through `eig_∓ = α± + 1/c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalForm<T> {
    /// `λ = √((1/c − 1)² + 4a²b/c)`.
    pub lambda: T,
    /// `α₊ = −½((1/c − 1) + λ)`.
    pub alpha_plus: T,
    /// `α₋ = −½((1/c − 1) − λ)`.
    pub alpha_minus: T,
    /// Eigenvalue of the dispersive matrix attached to the first column.
    pub eig_plus: T,
    /// Eigenvalue of the dispersive matrix attached to the second column.
    pub eig_minus: T,
    /// Inverse transform: `(ũ, ṽ) = to_diag · (u, v)`.
    pub to_diag: [[T; 2]; 2],
    /// Forward transform: `(u, v) = from_diag · (ũ, ṽ)`.
    pub from_diag: [[T; 2]; 2],
}

impl<T: Real> DiagonalForm<T> {
    /// The dispersive matrix `[[1, a], [ab/c, 1/c]]` being diagonalised.
    pub fn dispersive_matrix(p: &ValidatedParams<T>) -> [[T; 2]; 2] {
        let q = p.get();
        [[T::one(), q.a], [p.ab_c(), p.inv_c()]]
    }

    /// `to_diag · M · from_diag` for an arbitrary 2×2 matrix `M`.
    pub fn conjugate(&self, m: &[[T; 2]; 2]) -> [[T; 2]; 2] {
        mat_mul(&mat_mul(&self.to_diag, m), &self.from_diag)
    }
}

/// 2×2 matrix product.
pub fn mat_mul<T: Real>(x: &[[T; 2]; 2], y: &[[T; 2]; 2]) -> [[T; 2]; 2] {
    let mut out = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

/// Builds the [`DiagonalForm`]; requires `a ≠ 0`.
pub fn diagonalize<T: Real>(p: &ValidatedParams<T>) -> Result<DiagonalForm<T>> {
    let q = p.get();
    if q.a == T::zero() {
        return Err(GgError::DegenerateDiagonalization);
    }
    let half = T::lit(0.5);
    let d = p.inv_c() - T::one();
    let lambda = (d * d + T::lit(4.0) * q.a * q.a * q.b / q.c).sqrt();
    let two_a = T::lit(2.0) * q.a;
    let from_diag = [[two_a, two_a], [d + lambda, d - lambda]];
    let det = two_a * (d - lambda) - two_a * (d + lambda);
    let to_diag = [[from_diag[1][1] / det, -from_diag[0][1] / det], [-from_diag[1][0] / det, from_diag[0][0] / det]];
    Ok(DiagonalForm {
        lambda,
        alpha_plus: -half * (d + lambda),
        alpha_minus: -half * (d - lambda),
        eig_plus: half * (T::one() + p.inv_c() + lambda),
        eig_minus: half * (T::one() + p.inv_c() - lambda),
        to_diag,
        from_diag,
    })
}

/// Uniform space-time grid with nodes `x_j = j·dx`, `t_n = n·dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid<T> {
    /// Domain length `L`.
    pub length: T,
    /// Time horizon `T`.
    pub horizon: T,
    /// Number of spatial cells (`nx + 1` nodes).
    pub nx: usize,
    /// Number of time steps (`nt + 1` time levels).
    pub nt: usize,
}

impl<T: Real> SpaceTimeGrid<T> {
    /// Creates a grid, requiring `nx, nt ≥ 8` and positive finite `L`, `T`.
    pub fn new(length: T, horizon: T, nx: usize, nt: usize) -> Result<Self> {
        if !(length.is_finite() && length > T::zero()) {
            return Err(GgError::InvalidGrid(format!("L must be positive, got {length}")));
        }
        if !(horizon.is_finite() && horizon > T::zero()) {
            return Err(GgError::InvalidGrid(format!("T must be positive, got {horizon}")));
        }
        if nx < 8 || nt < 8 {
            return Err(GgError::InvalidGrid(format!("need nx, nt >= 8, got nx = {nx}, nt = {nt}")));
        }
        Ok(Self { length, horizon, nx, nt })
    }

    /// Spatial step `L/nx`.
    pub fn dx(&self) -> T {
        self.length / T::of(self.nx)
    }

    /// Time step `T/nt`.
    pub fn dt(&self) -> T {
        self.horizon / T::of(self.nt)
    }

    /// Number of spatial nodes `nx + 1`.
    pub fn nodes(&self) -> usize {
        self.nx + 1
    }

    /// Node coordinates `x_j`.
    pub fn xs(&self) -> Vec<T> {
        let dx = self.dx();
        (0..=self.nx).map(|j| T::of(j) * dx).collect()
    }

    /// Time levels `t_n`.
    pub fn ts(&self) -> Vec<T> {
        let dt = self.dt();
        (0..=self.nt).map(|n| T::of(n) * dt).collect()
    }

    /// Composite trapezoid weights in space.
    pub fn space_weights(&self) -> Vec<T> {
        trapezoid_weights(self.nx, self.dx())
    }

    /// Composite trapezoid weights in time.
    pub fn time_weights(&self) -> Vec<T> {
        trapezoid_weights(self.nt, self.dt())
    }

    /// Same grid with a different length.
    pub fn with_length(&self, length: T) -> Result<Self> {
        Self::new(length, self.horizon, self.nx, self.nt)
    }
}

/// Trapezoid weights `h·(½, 1, …, 1, ½)` for `n` intervals.
pub fn trapezoid_weights<T: Real>(n: usize, h: T) -> Vec<T> {
    let mut w = vec![h; n + 1];
    w[0] = h * T::lit(0.5);
    w[n] = h * T::lit(0.5);
    w
}

/// Node values of `(u, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatePair<T> {
    /// First component.
    pub u: Vec<T>,
    /// Second component.
    pub v: Vec<T>,
}

impl<T: Real> StatePair<T> {
    /// Zero state with `n` nodes per component.
    pub fn zeros(n: usize) -> Self {
        Self { u: vec![T::zero(); n], v: vec![T::zero(); n] }
    }

    /// Samples `(f(x), g(x))` at the grid nodes.
    pub fn from_fn(grid: &SpaceTimeGrid<T>, f: impl Fn(T) -> T, g: impl Fn(T) -> T) -> Self {
        let xs = grid.xs();
        Self { u: xs.iter().map(|&x| f(x)).collect(), v: xs.iter().map(|&x| g(x)).collect() }
    }

    /// Number of nodes per component.
    pub fn len(&self) -> usize {
        self.u.len()
    }

    /// True when there are no nodes.
    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Checks that both components have `n` entries.
    pub fn check(&self, n: usize) -> Result<()> {
        for len in [self.u.len(), self.v.len()] {
            if len != n {
                return Err(GgError::ShapeMismatch { expected: n, found: len });
            }
        }
        Ok(())
    }

    /// Interleaved layout `[u0, v0, u1, v1, …]` used by the solvers.
    pub fn to_interleaved(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(2 * self.u.len());
        for (a, b) in self.u.iter().zip(&self.v) {
            out.push(*a);
            out.push(*b);
        }
        out
    }

    /// Inverse of [`StatePair::to_interleaved`].
    pub fn from_interleaved(x: &[T]) -> Self {
        Self { u: x.iter().step_by(2).copied().collect(), v: x.iter().skip(1).step_by(2).copied().collect() }
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: T, other: &Self) -> Self {
        Self {
            u: self.u.iter().zip(&other.u).map(|(a, b)| *a + s * *b).collect(),
            v: self.v.iter().zip(&other.v).map(|(a, b)| *a + s * *b).collect(),
        }
    }

    /// `s·self`.
    pub fn scaled(&self, s: T) -> Self {
        Self { u: self.u.iter().map(|a| s * *a).collect(), v: self.v.iter().map(|a| s * *a).collect() }
    }

    /// Largest absolute nodal value.
    pub fn max_abs(&self) -> T {
        self.u.iter().chain(&self.v).fold(T::zero(), |m, x| m.max(x.abs()))
    }
}

/// Time-indexed sequence of states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    /// States at each time level.
    pub states: Vec<StatePair<T>>,
    /// Time stamps, `0, dt, …, T`.
    pub times: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    /// State at the final time.
    pub fn final_state(&self) -> &StatePair<T> {
        self.states.last().expect("trajectory has at least one state")
    }
}

fn weighted<T: Real>(s1: &StatePair<T>, s2: &StatePair<T>, g: &SpaceTimeGrid<T>, wv: T) -> Result<T> {
    let n = g.nodes();
    s1.check(n)?;
    s2.check(n)?;
    let w = g.space_weights();
    let mut acc = T::zero();
    for j in 0..n {
        acc += w[j] * (s1.u[j] * s2.u[j] + wv * s1.v[j] * s2.v[j]);
    }
    Ok(acc)
}

/// Energy inner product `∫u₁u₂ + (b/c)∫v₁v₂` (composite trapezoid).
pub fn x_inner<T: Real>(
    s1: &StatePair<T>,
    s2: &StatePair<T>,
    p: &ValidatedParams<T>,
    g: &SpaceTimeGrid<T>,
) -> Result<T> {
    weighted(s1, s2, g, p.get().b / p.get().c)
}

/// Energy norm induced by [`x_inner`].
pub fn x_norm<T: Real>(s: &StatePair<T>, p: &ValidatedParams<T>, g: &SpaceTimeGrid<T>) -> Result<T> {
    Ok(x_inner(s, s, p, g)?.max(T::zero()).sqrt())
}

/// Plain `L²×L²` inner product `∫u₁u₂ + ∫v₁v₂` (composite trapezoid).
pub fn l2_inner<T: Real>(s1: &StatePair<T>, s2: &StatePair<T>, g: &SpaceTimeGrid<T>) -> Result<T> {
    weighted(s1, s2, g, T::one())
}

/// Norm induced by [`l2_inner`].
pub fn l2_norm<T: Real>(s: &StatePair<T>, g: &SpaceTimeGrid<T>) -> Result<T> {
    Ok(l2_inner(s, s, g)?.max(T::zero()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> ValidatedParams<f64> {
        validate_params(&SystemParams::<f64>::default()).unwrap()
    }

    #[test]
    fn default_params_are_admissible() {
        let p = defaults();
        assert!((p.get().gap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn violations_are_listed() {
        let p = SystemParams::<f64> { a: 2.0, ..SystemParams::<f64>::default() };
        match validate_params(&p) {
            Err(GgError::CoefficientViolation { violations }) => {
                assert_eq!(violations.len(), 1);
                assert!(violations[0].contains("-3"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let p = SystemParams::<f64> { c: -1.0, ..SystemParams::<f64>::default() };
        assert!(matches!(validate_params(&p), Err(GgError::CoefficientViolation { .. })));
    }

    #[test]
    fn diagonal_form_reference_values() {
        let d = diagonalize(&defaults()).unwrap();
        assert!((d.lambda - 1.0).abs() < 1e-15);
        assert!((d.alpha_plus + 0.5).abs() < 1e-15);
        assert!((d.alpha_minus - 0.5).abs() < 1e-15);

        let p = validate_params(&SystemParams::<f64> { c: 2.0, ..SystemParams::<f64>::default() }).unwrap();
        let d = diagonalize(&p).unwrap();
        let lam = 0.75f64.sqrt();
        assert!((d.lambda - lam).abs() < 1e-15);
        assert!((d.alpha_plus + 0.5 * (-0.5 + lam)).abs() < 1e-15);
        assert!((d.alpha_minus + 0.5 * (-0.5 - lam)).abs() < 1e-15);
    }

    #[test]
    fn diagonal_form_rejects_zero_coupling() {
        let p = validate_params(&SystemParams::<f64> { a: 0.0, ..SystemParams::<f64>::default() }).unwrap();
        assert_eq!(diagonalize(&p), Err(GgError::DegenerateDiagonalization));
    }

    #[test]
    fn transform_diagonalises_dispersive_matrix() {
        let p = defaults();
        let d = diagonalize(&p).unwrap();
        let id = mat_mul(&d.to_diag, &d.from_diag);
        assert!((id[0][0] - 1.0).abs() < 1e-12 && id[0][1].abs() < 1e-12);
        assert!(id[1][0].abs() < 1e-12 && (id[1][1] - 1.0).abs() < 1e-12);
        let m = d.conjugate(&DiagonalForm::dispersive_matrix(&p));
        assert!(m[0][1].abs() < 1e-10 && m[1][0].abs() < 1e-10);
        assert!((m[0][0] - d.eig_plus).abs() < 1e-12);
        assert!((m[1][1] - d.eig_minus).abs() < 1e-12);
    }

    #[test]
    fn inner_product_reference_values() {
        let p = defaults();
        let g = SpaceTimeGrid::<f64>::new(2.0, 1.0, 10, 10).unwrap();
        let z = StatePair::zeros(11);
        assert_eq!(x_inner(&z, &z, &p, &g).unwrap(), 0.0);
        let one = StatePair { u: vec![1.0; 11], v: vec![0.0; 11] };
        assert!((x_inner(&one, &one, &p, &g).unwrap() - 2.0).abs() < 1e-14);
        let both = StatePair { u: vec![1.0; 11], v: vec![1.0; 11] };
        assert!((l2_inner(&both, &both, &g).unwrap() - 4.0).abs() < 1e-14);

        let p = validate_params(&SystemParams::<f64> { c: 2.0, ..SystemParams::<f64>::default() }).unwrap();
        let g = SpaceTimeGrid::<f64>::new(3.0, 1.0, 12, 10).unwrap();
        let v = StatePair { u: vec![0.0; 13], v: vec![1.0; 13] };
        assert!((x_inner(&v, &v, &p, &g).unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let p = defaults();
        let g = SpaceTimeGrid::<f64>::new(1.0, 1.0, 10, 10).unwrap();
        let bad = StatePair::<f64>::zeros(5);
        assert_eq!(x_inner(&bad, &bad, &p, &g), Err(GgError::ShapeMismatch { expected: 11, found: 5 }));
    }

    #[test]
    fn interleaving_round_trips() {
        let s = StatePair { u: vec![1.0, 2.0, 3.0], v: vec![4.0, 5.0, 6.0] };
        assert_eq!(s.to_interleaved(), vec![1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
        assert_eq!(StatePair::from_interleaved(&s.to_interleaved()), s);
    }

    #[test]
    fn generic_over_f32() {
        let p = validate_params(&SystemParams::<f32>::default()).unwrap();
        let d = diagonalize(&p).unwrap();
        assert!((d.lambda - 1.0).abs() < 1e-6);
    }
}
