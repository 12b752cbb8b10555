//! Roots of the spectral polynomial and the root-sharing test.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::SystemParams;
use crate::{GgError, Result};

/// Relative residual above which computed roots are rejected.
const ROOT_RESIDUAL_TOL: f64 = 1e-8;

/// Below this modulus `p` is treated as zero and the reduced polynomial is used.
const ZERO_P: f64 = 1e-14;

/// Coefficients (highest degree first) of
/// `P(ξ) = (1 − a²b)ξ⁶ − rξ⁴ − (c+1)pξ³ + rpξ + cp²`.
pub fn spectral_polynomial(p: &SystemParams<f64>, pval: Complex64) -> [Complex64; 7] {
    let re = |x: f64| Complex64::new(x, 0.0);
    [re(p.gap()), re(0.0), re(-p.r), -pval * (p.c + 1.0), re(0.0), pval * p.r, pval * pval * p.c]
}

fn horner(coef: &[Complex64], z: Complex64) -> Complex64 {
    coef.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Relative residual `|P(z)| / Σ|c_k||z|^k`.
fn relative_residual(coef: &[Complex64], z: Complex64) -> f64 {
    let scale = coef.iter().fold(0.0, |acc, c| acc * z.norm() + c.norm());
    if scale == 0.0 {
        0.0
    } else {
        horner(coef, z).norm() / scale
    }
}

/// Parlett–Reinsch balancing by powers of two (similarity, eigenvalues unchanged).
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let (mut cc, mut rr) = (c, r);
            while cc < rr / radix {
                f *= radix;
                cc *= radix;
                rr /= radix;
            }
            while cc >= rr * radix {
                f /= radix;
                cc /= radix;
                rr *= radix;
            }
            if (cc + rr) < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Roots of a polynomial (coefficients highest degree first) as eigenvalues of
/// the balanced companion matrix.
///
/// Fails with [`GgError::RootConditioning`] when a computed root leaves a
/// relative residual above `1e−8`.
pub fn polynomial_roots(coef: &[Complex64]) -> Result<Vec<Complex64>> {
    let first = coef.iter().position(|c| c.norm() > 0.0);
    let Some(first) = first else {
        return Err(GgError::InvalidArgument("zero polynomial".into()));
    };
    let coef = &coef[first..];
    let deg = coef.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coef[0];
    let mut m = DMatrix::<Complex64>::zeros(deg, deg);
    for j in 0..deg {
        m[(0, j)] = -coef[j + 1] / lead;
    }
    for i in 1..deg {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    balance(&mut m);
    let roots: Vec<Complex64> = m
        .schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .ok_or(GgError::RootConditioning { residual: f64::NAN })?;
    let worst = roots.iter().map(|&z| relative_residual(coef, z)).fold(0.0, f64::max);
    if !(worst <= ROOT_RESIDUAL_TOL) {
        return Err(GgError::RootConditioning { residual: worst });
    }
    Ok(roots)
}

/// Outcome of [`root_sharing_oracle`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSharing {
    /// Distinct roots used (six, or `{0, ±√(r/(1 − a²b))}` when `p = 0`).
    pub roots: Vec<Complex64>,
    /// `e^{−iLξ_j}` for each root.
    pub phases: Vec<Complex64>,
    /// `max_j |e^{−iLξ_j} − e^{−iLξ_0}|`.
    pub spread: f64,
    /// Whether `spread ≤ tol`.
    pub shared: bool,
}

/// Tests whether all roots of `P(·; p)` share the value `e^{−iLξ}`.
///
/// For `p = 0`, `P = ξ⁴((1 − a²b)ξ² − r)` has a fourfold root at the origin;
/// the test then runs on the distinct roots `{0, ±√(r/(1 − a²b))}`.
pub fn root_sharing_oracle(p: &SystemParams<f64>, pval: Complex64, length: f64, tol: f64) -> Result<RootSharing> {
    let roots = if pval.norm() <= ZERO_P {
        let reduced = [Complex64::new(p.gap(), 0.0), Complex64::new(0.0, 0.0), Complex64::new(-p.r, 0.0)];
        let mut r = vec![Complex64::new(0.0, 0.0)];
        r.extend(polynomial_roots(&reduced)?);
        r
    } else {
        polynomial_roots(&spectral_polynomial(p, pval))?
    };
    let phases: Vec<Complex64> = roots.iter().map(|&z| (Complex64::new(0.0, -length) * z).exp()).collect();
    let spread = phases.iter().map(|&e| (e - phases[0]).norm()).fold(0.0, f64::max);
    Ok(RootSharing { roots, phases, spread, shared: spread <= tol })
}
