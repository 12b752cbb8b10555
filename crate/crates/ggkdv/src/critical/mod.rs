//! Critical lengths of the configurations controlled through
//! `(h0, h1, h2)`, `(0, g1, 0)` or `(0, h1, 0)`, `(g0, g1, g2)`.
//!
//! For these configurations exact controllability fails exactly on the set
//!
//! ```text
//! F_r = { 2πk √((1 − a²b)/r) : k ≥ 1 } ∪ { π √((1 − a²b) α(k,l,m,n,s) / (3r)) : k,l,m,n,s ≥ 1 }
//! ```
//!
//! The second family comes from requiring that the six roots of
//! `P(ξ) = (1 − a²b)ξ⁶ − rξ⁴ − (c+1)pξ³ + rpξ + cp²` be equally spaced by
//! multiples of `2π/L`: `ξ_j = ξ₀ + (2π/L)(partial sums of k, l, m, n, s)`.
//! Matching the first two symmetric functions of the roots fixes
//! `ξ₀ = −π(5k+4l+3m+2n+s)/(3L)` and `L`.
//!
//! This module works in `f64` throughout: the enumeration is combinatorial
//! and the oracles rely on dense complex eigen/singular-value decompositions.
//!
//! - [`alpha_quadratic`] evaluates the quadratic form `α` as stated with the
//!   set; [`alpha_from_root_spacing`] evaluates `5S² − 12η` from the root
//!   spacing directly. The two differ in the `ls` coefficient (3 vs 4).
//! - [`verify_tuple`] rebuilds the six roots and reports all symmetric-function residuals.
//! - [`root_sharing_oracle`] and [`ode_kernel_scan`] are independent checks.

mod kernel;
mod roots;

pub use kernel::{ode_kernel_scan, KernelVariant, ScanPoint, MIN_KERNEL_NX};
pub use roots::{polynomial_roots, root_sharing_oracle, spectral_polynomial};

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::SystemParams;

/// Generator of a critical length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorTuple {
    /// `2πk √((1 − a²b)/r)`.
    F1 {
        /// Index `k ≥ 1`.
        k: u32,
    },
    /// `π √((1 − a²b) α(k,l,m,n,s) / (3r))`.
    F2 {
        /// Indices `(k, l, m, n, s)`, all `≥ 1`.
        indices: [u32; 5],
    },
}

impl GeneratorTuple {
    /// Family label (`"F1"` or `"F2"`).
    pub fn family(&self) -> &'static str {
        match self {
            GeneratorTuple::F1 { .. } => "F1",
            GeneratorTuple::F2 { .. } => "F2",
        }
    }

    /// Indices as a list.
    pub fn indices(&self) -> Vec<u32> {
        match self {
            GeneratorTuple::F1 { k } => vec![*k],
            GeneratorTuple::F2 { indices } => indices.to_vec(),
        }
    }
}

impl fmt::Display for GeneratorTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices().iter().map(|i| i.to_string()).collect();
        write!(f, "{}({})", self.family(), idx.join(","))
    }
}

/// Which quadratic form defines the second family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AlphaForm {
    /// The form stated with the set ([`alpha_quadratic`]).
    #[default]
    Stated,
    /// `5S² − 12η` from the root spacing ([`alpha_from_root_spacing`]).
    RootSpacing,
}

impl AlphaForm {
    /// Evaluates the selected form.
    pub fn eval(self, idx: [u32; 5]) -> i64 {
        match self {
            AlphaForm::Stated => alpha_quadratic(idx),
            AlphaForm::RootSpacing => alpha_from_root_spacing(idx),
        }
    }
}

/// `α(k,l,m,n,s) = 5k² + 8l² + 9m² + 8n² + 5s² + 8kl + 6km + 4kn + 2ks + 12ml + 8ln + 3ls + 12mn + 6ms + 8ns`.
pub fn alpha_quadratic(idx: [u32; 5]) -> i64 {
    let [k, l, m, n, s] = idx.map(i64::from);
    5 * k * k
        + 8 * l * l
        + 9 * m * m
        + 8 * n * n
        + 5 * s * s
        + 8 * k * l
        + 6 * k * m
        + 4 * k * n
        + 2 * k * s
        + 12 * m * l
        + 8 * l * n
        + 3 * l * s
        + 12 * m * n
        + 6 * m * s
        + 8 * n * s
}

/// Symmetric coefficient matrix `Q` with `α = ½ vᵀQv`, read off the stated form
/// (diagonal `2×` square coefficients, off-diagonal the cross coefficients).
pub fn alpha_matrix() -> [[i64; 5]; 5] {
    [[10, 8, 6, 4, 2], [8, 16, 12, 8, 3], [6, 12, 18, 12, 6], [4, 8, 12, 16, 8], [2, 3, 6, 8, 10]]
}

/// `½ vᵀQv` with [`alpha_matrix`]; an independent evaluation of [`alpha_quadratic`].
pub fn alpha_matrix_oracle(idx: [u32; 5]) -> i64 {
    let q = alpha_matrix();
    let v = idx.map(i64::from);
    let mut acc = 0;
    for i in 0..5 {
        for j in 0..5 {
            acc += v[i] * q[i][j] * v[j];
        }
    }
    acc / 2
}

/// `5S² − 12η` with `S = 5k+4l+3m+2n+s` and
/// `η = k(10k+10l+9m+7n+4s) + l(6k+6l+6m+5n+3s) + m(3k+3l+3m+3n+2s) + n(k+l+m+n+s)`:
/// the value forced by the second symmetric function of equally spaced roots.
pub fn alpha_from_root_spacing(idx: [u32; 5]) -> i64 {
    let [k, l, m, n, s] = idx.map(i64::from);
    let sum = 5 * k + 4 * l + 3 * m + 2 * n + s;
    let eta = k * (10 * k + 10 * l + 9 * m + 7 * n + 4 * s)
        + l * (6 * k + 6 * l + 6 * m + 5 * n + 3 * s)
        + m * (3 * k + 3 * l + 3 * m + 3 * n + 2 * s)
        + n * (k + l + m + n + s);
    5 * sum * sum - 12 * eta
}

/// `1 − a²b`.
fn gap(p: &SystemParams<f64>) -> f64 {
    p.gap()
}

/// Length generated by a tuple with the given form of `α`.
pub fn generator_length(p: &SystemParams<f64>, gen: GeneratorTuple, form: AlphaForm) -> f64 {
    match gen {
        GeneratorTuple::F1 { k } => 2.0 * std::f64::consts::PI * f64::from(k) * (gap(p) / p.r).sqrt(),
        GeneratorTuple::F2 { indices } => {
            std::f64::consts::PI * (gap(p) * form.eval(indices) as f64 / (3.0 * p.r)).sqrt()
        }
    }
}

/// Signed residuals of the six symmetric functions of the constructed roots
/// against the monic coefficients of `P(ξ)/(1 − a²b)`, for one branch of `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricResiduals {
    /// `e₁` (the roots must sum to zero).
    pub e1: Complex64,
    /// `e₂ + r/(1 − a²b)`.
    pub e2: Complex64,
    /// `e₃ − (c+1)p/(1 − a²b)`.
    pub e3: Complex64,
    /// `e₄`.
    pub e4: Complex64,
    /// `e₅ + rp/(1 − a²b)`.
    pub e5: Complex64,
    /// `e₆ − cp²/(1 − a²b)`.
    pub e6: Complex64,
}

/// Verification record of one critical length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalLength {
    /// Length `L`.
    pub value: f64,
    /// Generators mapping to this length (several when values coincide).
    pub generators: Vec<GeneratorTuple>,
    /// `ξ₀ = −π(5k+4l+3m+2n+s)/(3L)` (second family only).
    pub xi0: Option<f64>,
    /// The six roots `ξ₀ … ξ₅` (second family only).
    pub roots: Vec<f64>,
    /// Principal branch `p = √((1 − a²b)ξ₀⋯ξ₅ / c)` (second family only).
    pub p: Option<Complex64>,
    /// Residuals for `p` and for `−p` (second family only).
    pub residuals: Vec<SymmetricResiduals>,
}

impl CriticalLength {
    /// First generator.
    pub fn gen(&self) -> GeneratorTuple {
        self.generators[0]
    }

    /// `|e₂ + r/(1 − a²b)| / (r/(1 − a²b))` (zero for the first family).
    pub fn e2_relative(&self, p: &SystemParams<f64>) -> f64 {
        self.residuals.first().map(|r| r.e2.norm() / (p.r / gap(p))).unwrap_or(0.0)
    }
}

/// Rebuilds a critical length from its generator with the stated form of `α`.
pub fn verify_tuple(p: &SystemParams<f64>, gen: GeneratorTuple) -> CriticalLength {
    verify_tuple_with(p, gen, AlphaForm::Stated)
}

/// [`verify_tuple`] with a chosen form of `α`.
///
/// Roots are `ξ_j = (π/(3L))·n_j` with integers `n_j = 6c_j − S` (`c_j` the
/// partial sums `0, k, k+l, …`), so `Σ n_j = 0` holds exactly and `e₁`
/// vanishes identically; the other symmetric functions are accumulated in
/// integers and scaled once.
pub fn verify_tuple_with(p: &SystemParams<f64>, gen: GeneratorTuple, form: AlphaForm) -> CriticalLength {
    let value = generator_length(p, gen, form);
    let GeneratorTuple::F2 { indices } = gen else {
        return CriticalLength {
            value,
            generators: vec![gen],
            xi0: None,
            roots: Vec::new(),
            p: None,
            residuals: Vec::new(),
        };
    };
    let idx = indices.map(i128::from);
    let s_total = 5 * idx[0] + 4 * idx[1] + 3 * idx[2] + 2 * idx[3] + idx[4];
    let mut partial = [0i128; 6];
    for j in 1..6 {
        partial[j] = partial[j - 1] + idx[j - 1];
    }
    let n: Vec<i128> = partial.iter().map(|c| 6 * c - s_total).collect();
    // elementary symmetric polynomials of the integers n_j
    let mut e = [0i128; 7];
    e[0] = 1;
    for &x in &n {
        for k in (1..7).rev() {
            e[k] += e[k - 1] * x;
        }
    }
    let unit = std::f64::consts::PI / (3.0 * value);
    let roots: Vec<f64> = n.iter().map(|&x| unit * x as f64).collect();
    let es: Vec<f64> = (0..7).map(|k| e[k] as f64 * unit.powi(k as i32)).collect();
    let g = gap(p);
    let pp = Complex64::new(g * es[6] / p.c, 0.0).sqrt();
    let residuals = [pp, -pp]
        .into_iter()
        .map(|pv| SymmetricResiduals {
            e1: Complex64::new(es[1], 0.0),
            e2: Complex64::new(es[2] + p.r / g, 0.0),
            e3: Complex64::new(es[3], 0.0) - pv * ((p.c + 1.0) / g),
            e4: Complex64::new(es[4], 0.0),
            e5: Complex64::new(es[5], 0.0) + pv * (p.r / g),
            e6: Complex64::new(es[6], 0.0) - pv * pv * (p.c / g),
        })
        .collect();
    CriticalLength { value, generators: vec![gen], xi0: Some(roots[0]), roots, p: Some(pp), residuals }
}

/// Sorted, deduplicated critical lengths up to a bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalSet {
    /// Strictly increasing lengths.
    pub lengths: Vec<CriticalLength>,
}

impl CriticalSet {
    /// Values only.
    pub fn values(&self) -> Vec<f64> {
        self.lengths.iter().map(|c| c.value).collect()
    }

    /// Whether the set is empty.
    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }
}

/// Relative tolerance under which two lengths are merged.
pub const DEDUP_TOL: f64 = 1e-9;

/// All critical lengths `≤ l_max` with the stated form of `α`.
pub fn enumerate_critical_lengths(p: &SystemParams<f64>, l_max: f64) -> CriticalSet {
    enumerate_critical_lengths_with(p, l_max, AlphaForm::Stated)
}

/// [`enumerate_critical_lengths`] with a chosen form of `α`.
///
/// Both forms have positive coefficients, so `α` increases in every index
/// and the enumeration stops at `α ≤ 3r·l_max²/((1 − a²b)π²)`; with
/// `α ≥ 5k²` (and likewise for the other squares) every index is bounded.
pub fn enumerate_critical_lengths_with(p: &SystemParams<f64>, l_max: f64, form: AlphaForm) -> CriticalSet {
    let mut found: Vec<CriticalLength> = Vec::new();
    if !(l_max > 0.0) || !(gap(p) > 0.0) || !(p.r > 0.0) {
        return CriticalSet { lengths: found };
    }
    let step = 2.0 * std::f64::consts::PI * (gap(p) / p.r).sqrt();
    let mut k = 1u32;
    while f64::from(k) * step <= l_max * (1.0 + DEDUP_TOL) {
        found.push(verify_tuple_with(p, GeneratorTuple::F1 { k }, form));
        k += 1;
    }
    let alpha_max = 3.0 * p.r * l_max * l_max / (gap(p) * std::f64::consts::PI.powi(2));
    let bound = (alpha_max / 5.0).sqrt().floor() as u32 + 1;
    for k in 1..=bound {
        for l in 1..=bound {
            for m in 1..=bound {
                for n in 1..=bound {
                    for s in 1..=bound {
                        let idx = [k, l, m, n, s];
                        if form.eval(idx) as f64 > alpha_max * (1.0 + DEDUP_TOL) {
                            break;
                        }
                        let gen = GeneratorTuple::F2 { indices: idx };
                        if generator_length(p, gen, form) <= l_max * (1.0 + DEDUP_TOL) {
                            found.push(verify_tuple_with(p, gen, form));
                        }
                    }
                }
            }
        }
    }
    found.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut merged: Vec<CriticalLength> = Vec::new();
    for c in found {
        match merged.last_mut() {
            Some(last) if (c.value - last.value).abs() <= DEDUP_TOL * last.value => {
                last.generators.extend(c.generators);
            }
            _ => merged.push(c),
        }
    }
    CriticalSet { lengths: merged }
}

/// Generator of the critical length nearest to `length` when it lies within
/// `rel_tol` (relative), with the stated form of `α`.
pub fn is_critical(p: &SystemParams<f64>, length: f64, rel_tol: f64) -> Option<GeneratorTuple> {
    if !(length > 0.0) {
        return None;
    }
    let set = enumerate_critical_lengths(p, length * (1.0 + rel_tol) * (1.0 + 1e-12));
    set.lengths
        .iter()
        .filter(|c| (c.value - length).abs() <= rel_tol * c.value.max(length))
        .min_by(|a, b| (a.value - length).abs().total_cmp(&(b.value - length).abs()))
        .map(|c| c.gen())
}
