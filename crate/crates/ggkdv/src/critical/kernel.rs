//! Discrete kernel detection for the spectral boundary-value problems.
//!
//! At spectral parameter `λ` the adjoint generator reads
//!
//! ```text
//! λφ + φ''' + (ab/c)ψ''' = 0,
//! λψ + (r/c)ψ' + aφ''' + ψ'''/c = 0,
//! ```
//!
//! closed either by the overdetermined two-point conditions (at both `x = 0`
//! and `x = L`: `aφ + ψ/c = 0`, `φ' = ψ' = 0`, `φ'' + (ab/c)ψ'' = 0`,
//! `aφ'' + ψ''/c + (r/c)ψ = 0`) or by the Cauchy data `φ = φ' = φ'' = ψ = ψ' = ψ'' = 0`
//! at `x = 0`. A nontrivial kernel of the two-point problem signals a critical length;
//! the Cauchy problem never has one.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fd::{d1, d3, stencil};
use crate::model::SystemParams;
use crate::{GgError, Result};

/// Boundary conditions closing the spectral problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelVariant {
    /// Five conditions at each end (ten in total).
    TwoPoint,
    /// All of `φ, φ', φ'', ψ, ψ', ψ''` vanish at `x = 0`.
    Cauchy,
}

/// Smallest singular value of the discretised problem at one `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    /// Spectral parameter.
    pub lambda: Complex64,
    /// Smallest singular value of the row-equilibrated boundary operator.
    pub sigma_min: f64,
}

/// Minimum grid resolution accepted by [`ode_kernel_scan`].
pub const MIN_KERNEL_NX: usize = 64;

/// Smallest singular value of the discrete boundary-value operator for each
/// `λ` in `lambdas`.
///
/// The interior equations are imposed at nodes `1..=nx−2` (five-point third
/// derivatives, one-sided at node 1), which leaves a six-dimensional discrete
/// solution space — the same dimension as for the differential system. That
/// space is parametrised by the Cauchy data `(φ, φ', φ'', ψ, ψ', ψ'')(0)`, and
/// the boundary conditions of the chosen variant are applied to it. The
/// resulting rectangular matrix (`10 × 6` or `6 × 6`) has its rows scaled to
/// unit norm; its smallest singular value vanishes exactly when the discrete
/// problem has a nontrivial kernel.
pub fn ode_kernel_scan(
    p: &SystemParams<f64>,
    length: f64,
    lambdas: &[Complex64],
    variant: KernelVariant,
    nx: usize,
) -> Result<Vec<ScanPoint>> {
    if nx < MIN_KERNEL_NX {
        return Err(GgError::InvalidArgument(format!("kernel scan needs nx ≥ {MIN_KERNEL_NX}, got {nx}")));
    }
    if !(length > 0.0) || !length.is_finite() {
        return Err(GgError::InvalidArgument(format!("length must be positive, got {length}")));
    }
    lambdas
        .iter()
        .map(|&lambda| {
            let m = boundary_operator(p, length, lambda, variant, nx)?;
            let sv = m.svd(false, false).singular_values;
            let sigma_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
            Ok(ScanPoint { lambda, sigma_min })
        })
        .collect()
}

/// Unknown index of `φ` (`q = 0`) or `ψ` (`q = 1`) at node `j`.
fn ix(j: usize, q: usize) -> usize {
    2 * j + q
}

type SparseRow = Vec<(usize, Complex64)>;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn scaled(st: &[(usize, f64)], q: usize, s: f64) -> SparseRow {
    st.iter().map(|&(k, w)| (ix(k, q), re(s * w))).collect()
}

/// Interior equations at nodes `1..=nx−2`.
fn interior_rows(p: &SystemParams<f64>, dx: f64, lambda: Complex64, nx: usize) -> Vec<SparseRow> {
    let (a, c, r) = (p.a, p.c, p.r);
    let ab_c = a * p.b / c;
    let mut rows = Vec::with_capacity(2 * (nx - 2));
    for j in 1..nx - 1 {
        let st3 = d3::<f64>(j, nx, dx);
        let mut row_u = vec![(ix(j, 0), lambda)];
        row_u.extend(scaled(&st3, 0, 1.0));
        row_u.extend(scaled(&st3, 1, ab_c));
        rows.push(row_u);
        let mut row_v = vec![(ix(j, 1), lambda)];
        row_v.extend(scaled(&d1::<f64>(j, dx), 1, r / c));
        row_v.extend(scaled(&st3, 0, a));
        row_v.extend(scaled(&st3, 1, 1.0 / c));
        rows.push(row_v);
    }
    rows
}

/// Value, first and second derivative of component `q` at end node `e`.
fn cauchy_rows(e: usize, nx: usize, dx: f64) -> [[SparseRow; 3]; 2] {
    let (lo, hi) = if e == 0 { (0, 4) } else { (nx - 4, nx) };
    let s1 = stencil::<f64>(e, lo, hi, 1, dx);
    let s2 = stencil::<f64>(e, lo, hi, 2, dx);
    [0, 1].map(|q| [vec![(ix(e, q), re(1.0))], scaled(&s1, q, 1.0), scaled(&s2, q, 1.0)])
}

/// The five two-point conditions at end node `e`.
fn two_point_rows(p: &SystemParams<f64>, e: usize, nx: usize, dx: f64) -> Vec<SparseRow> {
    let (a, c, r) = (p.a, p.c, p.r);
    let ab_c = a * p.b / c;
    let [[phi, phi1, phi2], [psi, psi1, psi2]] = cauchy_rows(e, nx, dx);
    let combine = |x: &SparseRow, sx: f64, y: &SparseRow, sy: f64| -> SparseRow {
        x.iter().map(|&(k, v)| (k, v * sx)).chain(y.iter().map(|&(k, v)| (k, v * sy))).collect()
    };
    let mut last = combine(&phi2, a, &psi2, 1.0 / c);
    last.extend(psi.iter().map(|&(k, v)| (k, v * (r / c))));
    vec![combine(&phi, a, &psi, 1.0 / c), phi1, psi1, combine(&phi2, 1.0, &psi2, ab_c), last]
}

fn densify(rows: &[SparseRow], ncols: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::<Complex64>::zeros(rows.len(), ncols);
    for (i, row) in rows.iter().enumerate() {
        for &(k, v) in row {
            m[(i, k)] += v;
        }
    }
    m
}

fn boundary_operator(
    p: &SystemParams<f64>,
    length: f64,
    lambda: Complex64,
    variant: KernelVariant,
    nx: usize,
) -> Result<DMatrix<Complex64>> {
    let dx = length / nx as f64;
    let ncols = 2 * (nx + 1);
    // Discrete solutions with unit Cauchy data at x = 0.
    let mut square = interior_rows(p, dx, lambda, nx);
    let n_int = square.len();
    square.extend(cauchy_rows(0, nx, dx).into_iter().flatten());
    let mut rhs = DMatrix::<Complex64>::zeros(ncols, 6);
    for k in 0..6 {
        rhs[(n_int + k, k)] = re(1.0);
    }
    let basis = densify(&square, ncols).lu().solve(&rhs).ok_or(GgError::SingularSystem { column: 0 })?;
    let bc = match variant {
        KernelVariant::TwoPoint => {
            let mut rows = two_point_rows(p, 0, nx, dx);
            rows.extend(two_point_rows(p, nx, nx, dx));
            rows
        }
        KernelVariant::Cauchy => cauchy_rows(0, nx, dx).into_iter().flatten().collect(),
    };
    let mut m = densify(&bc, ncols) * basis;
    for i in 0..m.nrows() {
        let norm = m.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            m.row_mut(i).unscale_mut(norm);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn median(mut v: Vec<f64>) -> f64 {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    }

    fn lambdas() -> Vec<Complex64> {
        (-10..=10).map(|k| Complex64::new(0.0, 0.2 * k as f64)).collect()
    }

    #[test]
    fn two_point_kernel_appears_at_first_critical_length() {
        let p = SystemParams::<f64>::default();
        let l = 2.0 * std::f64::consts::PI * (p.gap() / p.r).sqrt();
        let scan = ode_kernel_scan(&p, l, &lambdas(), KernelVariant::TwoPoint, 96).unwrap();
        let med = median(scan.iter().map(|s| s.sigma_min).collect());
        let at_zero = scan[10].sigma_min;
        assert!(at_zero <= 0.1 * med, "σ(0) = {at_zero}, median = {med}");
    }

    #[test]
    fn no_dip_at_non_critical_length() {
        let p = SystemParams::<f64>::default();
        let scan = ode_kernel_scan(&p, 3.0, &lambdas(), KernelVariant::TwoPoint, 64).unwrap();
        let med = median(scan.iter().map(|s| s.sigma_min).collect());
        assert!(scan.iter().all(|s| s.sigma_min >= 0.5 * med));
    }

    #[test]
    fn cauchy_problem_has_no_kernel() {
        let p = SystemParams::<f64>::default();
        let scan = ode_kernel_scan(&p, 5.0, &lambdas(), KernelVariant::Cauchy, 64).unwrap();
        assert!(scan.iter().all(|s| (s.sigma_min - 1.0).abs() < 1e-6));
        let med = median(scan.iter().map(|s| s.sigma_min).collect());
        assert!(scan.iter().all(|s| s.sigma_min >= 0.5 * med));
    }

    #[test]
    fn coarse_grids_are_rejected() {
        let p = SystemParams::<f64>::default();
        assert!(ode_kernel_scan(&p, 5.0, &lambdas(), KernelVariant::Cauchy, 32).is_err());
    }
}
