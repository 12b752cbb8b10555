//! Matrix-free Krylov tools in a weighted inner product `⟨x, y⟩_w = Σ wᵢxᵢyᵢ`:
//! conjugate gradient, symmetric Lanczos with full reorthogonalisation, and
//! Sturm-bisection eigenvalues of symmetric tridiagonal matrices.

use crate::Real;

/// Weighted inner product `Σ wᵢ xᵢ yᵢ`.
pub fn winner<T: Real>(w: &[T], x: &[T], y: &[T]) -> T {
    w.iter().zip(x).zip(y).map(|((a, b), c)| *a * *b * *c).sum()
}

/// Weighted norm.
pub fn wnorm<T: Real>(w: &[T], x: &[T]) -> T {
    winner(w, x, x).max(T::zero()).sqrt()
}

fn axpy<T: Real>(y: &mut [T], a: T, x: &[T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * *xi;
    }
}

/// Outcome of [`conjugate_gradient`].
#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome<T> {
    /// Approximate solution.
    pub x: Vec<T>,
    /// Iterations performed.
    pub iterations: usize,
    /// Relative residual `‖b − Ax‖/‖b‖` after each iteration (entry 0 is the start).
    pub history: Vec<T>,
    /// True when the tolerance was met.
    pub converged: bool,
    /// Diagonal of the Lanczos tridiagonal matrix implied by the CG coefficients.
    pub lanczos_diag: Vec<T>,
    /// Off-diagonal of that tridiagonal matrix.
    pub lanczos_off: Vec<T>,
}

impl<T: Real> CgOutcome<T> {
    /// Smallest Ritz value of the operator implied by the CG run.
    pub fn min_ritz(&self) -> Option<T> {
        tridiagonal_extreme(&self.lanczos_diag, &self.lanczos_off).map(|e| e.0)
    }

    /// Largest Ritz value of the operator implied by the CG run.
    pub fn max_ritz(&self) -> Option<T> {
        tridiagonal_extreme(&self.lanczos_diag, &self.lanczos_off).map(|e| e.1)
    }

    /// Final relative residual.
    pub fn relative_residual(&self) -> T {
        *self.history.last().expect("history holds the initial residual")
    }
}

/// Conjugate gradient for `A x = b` with `A` self-adjoint positive
/// (semi)definite in the `w`-inner product. Stops when the relative residual
/// drops below `tol` or after `maxit` iterations.
pub fn conjugate_gradient<T: Real>(
    mut apply: impl FnMut(&[T]) -> Vec<T>,
    b: &[T],
    x0: Option<&[T]>,
    w: &[T],
    tol: T,
    maxit: usize,
) -> CgOutcome<T> {
    let n = b.len();
    let bnorm = wnorm(w, b);
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![T::zero(); n]);
    let mut r = b.to_vec();
    if x0.is_some() {
        let ax = apply(&x);
        axpy(&mut r, -T::one(), &ax);
    }
    let mut out = CgOutcome {
        x: Vec::new(),
        iterations: 0,
        history: Vec::new(),
        converged: false,
        lanczos_diag: Vec::new(),
        lanczos_off: Vec::new(),
    };
    if bnorm == T::zero() {
        out.x = vec![T::zero(); n];
        out.history.push(T::zero());
        out.converged = true;
        return out;
    }
    let mut rr = winner(w, &r, &r);
    out.history.push(rr.sqrt() / bnorm);
    if rr.sqrt() / bnorm <= tol {
        out.x = x;
        out.converged = true;
        return out;
    }
    let mut p = r.clone();
    let mut prev: Option<(T, T)> = None; // (alpha, beta) of previous step
    for it in 0..maxit {
        let ap = apply(&p);
        let pap = winner(w, &p, &ap);
        if !(pap > T::zero()) {
            break;
        }
        let alpha = rr / pap;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        let rr_new = winner(w, &r, &r);
        let beta = rr_new / rr;
        // Lanczos tridiagonal entries from the CG recurrences.
        let diag = match prev {
            None => T::one() / alpha,
            Some((a0, b0)) => T::one() / alpha + b0 / a0,
        };
        if let Some((a0, b0)) = prev {
            out.lanczos_off.push(b0.sqrt() / a0);
        }
        out.lanczos_diag.push(diag);
        prev = Some((alpha, beta));
        rr = rr_new;
        out.iterations = it + 1;
        let rel = rr.sqrt() / bnorm;
        out.history.push(rel);
        if rel <= tol {
            out.converged = true;
            break;
        }
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = *ri + beta * *pi;
        }
    }
    out.x = x;
    out
}

/// Result of [`lanczos`].
#[derive(Debug, Clone, PartialEq)]
pub struct LanczosOutcome<T> {
    /// Smallest Ritz value.
    pub min_ritz: T,
    /// Largest Ritz value.
    pub max_ritz: T,
    /// Steps performed (may stop early on an invariant subspace).
    pub steps: usize,
    /// Tridiagonal diagonal.
    pub diag: Vec<T>,
    /// Tridiagonal off-diagonal.
    pub off: Vec<T>,
}

/// Symmetric Lanczos with full reorthogonalisation in the `w`-inner product.
///
/// `project`, when given, is applied to every Krylov vector; it must be a
/// `w`-orthogonal projector commuting with the operator (used to keep the
/// iteration inside a known invariant subspace).
pub fn lanczos<T: Real>(
    mut apply: impl FnMut(&[T]) -> Vec<T>,
    start: &[T],
    w: &[T],
    steps: usize,
    project: Option<&dyn Fn(&mut Vec<T>)>,
) -> Option<LanczosOutcome<T>> {
    let mut q = start.to_vec();
    if let Some(pr) = project {
        pr(&mut q);
    }
    let nq = wnorm(w, &q);
    if !(nq > T::zero()) {
        return None;
    }
    q.iter_mut().for_each(|x| *x /= nq);
    let mut basis: Vec<Vec<T>> = vec![q];
    let mut diag = Vec::new();
    let mut off = Vec::new();
    for k in 0..steps {
        let mut z = apply(&basis[k]);
        if let Some(pr) = project {
            pr(&mut z);
        }
        let a = winner(w, &basis[k], &z);
        diag.push(a);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = winner(w, b, &z);
                axpy(&mut z, -c, b);
            }
        }
        let beta = wnorm(w, &z);
        let scale = diag.iter().fold(T::zero(), |m, d| m.max(d.abs()));
        if k + 1 == steps || !(beta > scale * T::epsilon() * T::lit(100.0)) {
            break;
        }
        off.push(beta);
        z.iter_mut().for_each(|x| *x /= beta);
        basis.push(z);
    }
    let (lo, hi) = tridiagonal_extreme(&diag, &off)?;
    Some(LanczosOutcome { min_ritz: lo, max_ritz: hi, steps: diag.len(), diag, off })
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`
/// (Sturm sequence count).
fn sturm_count<T: Real>(diag: &[T], off: &[T], x: T) -> usize {
    let mut count = 0;
    let mut q = T::one();
    let tiny = T::min_positive_value().sqrt();
    for i in 0..diag.len() {
        let o2 = if i == 0 { T::zero() } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { T::zero() } else { o2 / q };
        if q == T::zero() {
            q = -tiny;
        }
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

/// `k`-th smallest eigenvalue (0-based) of a symmetric tridiagonal matrix.
pub fn tridiagonal_eigenvalue<T: Real>(diag: &[T], off: &[T], k: usize) -> Option<T> {
    let n = diag.len();
    if n == 0 || k >= n || off.len() + 1 != n {
        return None;
    }
    // Gershgorin interval
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { T::zero() } + if i + 1 < n { off[i].abs() } else { T::zero() };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let span = (hi - lo).max(T::min_positive_value());
    lo -= span * T::lit(1e-12);
    hi += span * T::lit(1e-12);
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(T::lit(0.5) * (lo + hi))
}

/// Smallest and largest eigenvalue of a symmetric tridiagonal matrix.
pub fn tridiagonal_extreme<T: Real>(diag: &[T], off: &[T]) -> Option<(T, T)> {
    let n = diag.len();
    Some((tridiagonal_eigenvalue(diag, off, 0)?, tridiagonal_eigenvalue(diag, off, n - 1)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| 2.0 * x[i] - if i > 0 { x[i - 1] } else { 0.0 } - if i + 1 < n { x[i + 1] } else { 0.0 })
            .collect()
    }

    #[test]
    fn tridiagonal_eigenvalues_of_laplacian() {
        let n = 20;
        let d = vec![2.0; n];
        let o = vec![-1.0; n - 1];
        for k in [0, 5, n - 1] {
            let exact = 2.0 - 2.0 * (((k + 1) as f64) * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            let got = tridiagonal_eigenvalue(&d, &o, k).unwrap();
            assert!((got - exact).abs() < 1e-12, "k={k}: {got} vs {exact}");
        }
    }

    #[test]
    fn cg_solves_spd_system_and_reports_ritz_values() {
        let n = 30;
        let w = vec![1.0; n];
        let b: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let out = conjugate_gradient(laplacian, &b, None, &w, 1e-12, 200);
        assert!(out.converged);
        let r = laplacian(&out.x);
        let err: f64 = r.iter().zip(&b).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9);
        let lmin = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!(out.min_ritz().unwrap() >= lmin * (1.0 - 1e-8));
    }

    #[test]
    fn cg_error_energy_norm_is_nonincreasing() {
        let n = 25;
        let w = vec![1.0; n];
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();
        let b = laplacian(&xs);
        let mut last = f64::INFINITY;
        for k in 0..15 {
            let out = conjugate_gradient(laplacian, &b, None, &w, 0.0, k);
            let e: Vec<f64> = out.x.iter().zip(&xs).map(|(a, c)| a - c).collect();
            let energy = winner(&w, &e, &laplacian(&e));
            assert!(energy <= last * (1.0 + 1e-12));
            last = energy;
        }
    }

    #[test]
    fn lanczos_finds_extreme_eigenvalues() {
        let n = 40;
        let w = vec![1.0; n];
        let start: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.37).sin()).collect();
        let out = lanczos(laplacian, &start, &w, n, None).unwrap();
        let lmin = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((out.min_ritz - lmin).abs() < 1e-10);
        assert!((out.max_ritz - (4.0 - lmin)).abs() < 1e-10);
    }
}
