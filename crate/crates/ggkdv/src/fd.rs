//! Finite-difference weights on arbitrary node sets (Fornberg's algorithm)
//! and the uniform-grid stencils used by the solvers.

use crate::Real;

/// Weights `w_i` such that `f^{(m)}(z) ≈ Σ w_i f(x_i)`, exact for polynomials
/// of degree `< x.len()`.
pub fn fornberg<T: Real>(z: T, x: &[T], m: usize) -> Vec<T> {
    let n = x.len();
    assert!(n > m, "need more nodes than the derivative order");
    let mut c = vec![vec![T::zero(); m + 1]; n];
    let mut c1 = T::one();
    let mut c4 = x[0] - z;
    c[0][0] = T::one();
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (T::of(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - T::of(k) * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Stencil `(node, weight)` for the `m`-th derivative at node `j` using the
/// uniform nodes `first..=last` with spacing `dx`.
pub fn stencil<T: Real>(j: usize, first: usize, last: usize, m: usize, dx: T) -> Vec<(usize, T)> {
    let offsets: Vec<T> = (first..=last).map(|k| T::of(k) - T::of(j)).collect();
    let scale = dx.powi(m as i32);
    fornberg(T::zero(), &offsets, m).into_iter().enumerate().map(|(i, w)| (first + i, w / scale)).collect()
}

/// Third-derivative stencil at node `j`: centered five points in the
/// interior, one-sided five points next to either end.
pub fn d3<T: Real>(j: usize, nx: usize, dx: T) -> Vec<(usize, T)> {
    if j >= 2 && j + 2 <= nx {
        stencil(j, j - 2, j + 2, 3, dx)
    } else if j < 2 {
        stencil(j, 0, 4, 3, dx)
    } else {
        stencil(j, nx - 4, nx, 3, dx)
    }
}

/// Centered first-derivative stencil at an interior node.
pub fn d1<T: Real>(j: usize, dx: T) -> Vec<(usize, T)> {
    stencil(j, j - 1, j + 1, 1, dx)
}

/// Applies a stencil to nodal values.
pub fn apply<T: Real>(st: &[(usize, T)], f: &[T]) -> T {
    st.iter().map(|&(k, w)| w * f[k]).sum()
}
