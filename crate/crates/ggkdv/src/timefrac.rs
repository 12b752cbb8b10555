//! Fractional powers of `−∂ₜ²` and fractional Sobolev norms on `(0, T)`.
//!
//! A series sampled at `t_n = n·dt`, `n = 0..nt`, is extended evenly to the
//! `2·nt` periodic samples `f_0, …, f_nt, f_{nt−1}, …, f_1`, transformed by an
//! FFT, multiplied by a real even symbol of the angular frequency
//! `ω_m = 2π·min(m, 2nt − m)/(2T)`, transformed back and restricted to the
//! original nodes. The even extension avoids the endpoint jump a periodic
//! wrap would create. Because the extension doubles the interior samples,
//! the plain Euclidean product on the extension equals `2/dt` times the
//! trapezoid product on `(0, T)`; every multiplier is therefore self-adjoint
//! for trapezoid weights and Parseval holds with them.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::model::trapezoid_weights;
use crate::{GgError, Real, Result};

/// Uniformly sampled values on `[0, T]` (`nt + 1` samples).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    /// Samples at `t_n = n·T/nt`.
    pub values: Vec<T>,
    /// Horizon `T`.
    pub horizon: T,
}

impl<T: Real> TimeSeries<T> {
    /// Wraps samples; requires at least two finite values and `T > 0`.
    pub fn new(values: Vec<T>, horizon: T) -> Result<Self> {
        if values.len() < 2 {
            return Err(GgError::InvalidArgument("a time series needs at least two samples".into()));
        }
        if !(horizon > T::zero()) {
            return Err(GgError::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GgError::InvalidArgument("time series contains non-finite samples".into()));
        }
        Ok(Self { values, horizon })
    }

    /// Number of steps `nt`.
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    /// Sampling step.
    pub fn dt(&self) -> T {
        self.horizon / T::of(self.steps())
    }

    /// Trapezoid inner product with another series on the same grid.
    pub fn inner(&self, other: &Self) -> T {
        let w = trapezoid_weights(self.steps(), self.dt());
        w.iter().zip(&self.values).zip(&other.values).map(|((a, b), c)| *a * *b * *c).sum()
    }
}

/// Symbol of a real even Fourier multiplier in the angular frequency `ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Symbol<T> {
    /// `|ω|^{2γ}`: the fractional power `(−∂ₜ²)^γ`.
    Homogeneous(T),
    /// `(1 + ω²)^γ`: the Bessel potential, the Riesz map `H^{−γ} → H^{γ}`.
    Bessel(T),
}

impl<T: Real> Symbol<T> {
    /// Multiplier value at angular frequency `ω ≥ 0`.
    pub fn eval(&self, omega: T) -> T {
        match *self {
            Symbol::Homogeneous(g) => {
                if g == T::zero() {
                    T::one()
                } else if omega == T::zero() {
                    T::zero()
                } else {
                    omega.powf(T::lit(2.0) * g)
                }
            }
            Symbol::Bessel(g) => (T::one() + omega * omega).powf(g),
        }
    }
}

/// Angular frequency of FFT bin `m` on the extended grid of length `2·nt`.
pub fn angular_frequency<T: Real>(m: usize, nt: usize, horizon: T) -> T {
    let n = 2 * nt;
    let k = m.min(n - m);
    T::lit(2.0 * std::f64::consts::PI) * T::of(k) / (T::lit(2.0) * horizon)
}

fn extended_spectrum<T: Real>(values: &[T]) -> Vec<Complex<T>> {
    let nt = values.len() - 1;
    let mut buf: Vec<Complex<T>> = Vec::with_capacity(2 * nt);
    buf.extend(values.iter().map(|&v| Complex::new(v, T::zero())));
    buf.extend(values[1..nt].iter().rev().map(|&v| Complex::new(v, T::zero())));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Applies a multiplier to raw samples over a horizon `T`.
pub fn apply_symbol<T: Real>(values: &[T], horizon: T, symbol: Symbol<T>) -> Vec<T> {
    let nt = values.len() - 1;
    if let Symbol::Homogeneous(g) = symbol {
        if g == T::zero() {
            return values.to_vec();
        }
    }
    let mut spec = extended_spectrum(values);
    for (m, z) in spec.iter_mut().enumerate() {
        *z *= symbol.eval(angular_frequency(m, nt, horizon));
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(spec.len()).process(&mut spec);
    let scale = T::one() / T::of(spec.len());
    spec[..=nt].iter().map(|z| z.re * scale).collect()
}

/// `(−∂ₜ²)^γ` as the multiplier `|ω|^{2γ}`; `γ = 0` returns the input unchanged.
pub fn frac_neg_laplacian<T: Real>(ts: &TimeSeries<T>, gamma: T) -> Result<TimeSeries<T>> {
    if !(gamma >= T::zero() && gamma <= T::one()) {
        return Err(GgError::InvalidArgument(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    Ok(TimeSeries { values: apply_symbol(&ts.values, ts.horizon, Symbol::Homogeneous(gamma)), horizon: ts.horizon })
}

/// Bessel potential `(1 − ∂ₜ²)^γ` as the multiplier `(1 + ω²)^γ`.
pub fn bessel_potential<T: Real>(ts: &TimeSeries<T>, gamma: T) -> TimeSeries<T> {
    TimeSeries { values: apply_symbol(&ts.values, ts.horizon, Symbol::Bessel(gamma)), horizon: ts.horizon }
}

/// `‖(1 + ω²)^{s/2} f̂‖`, normalised so that `s = 0` is the trapezoid `L²(0,T)` norm.
pub fn sobolev_norm<T: Real>(ts: &TimeSeries<T>, s: T) -> Result<T> {
    if !(s >= -T::one() && s <= T::one()) {
        return Err(GgError::InvalidArgument(format!("s must lie in [-1, 1], got {s}")));
    }
    Ok(symbol_norm(&ts.values, ts.horizon, Symbol::Bessel(s)))
}

/// `(dt/(2N)·Σ σ(ω_m)|f̂_m|²)^{1/2}` for a nonnegative symbol `σ`.
pub fn symbol_norm<T: Real>(values: &[T], horizon: T, symbol: Symbol<T>) -> T {
    let nt = values.len() - 1;
    let spec = extended_spectrum(values);
    let n = spec.len();
    let dt = horizon / T::of(nt);
    let mut acc = T::zero();
    for (m, z) in spec.iter().enumerate() {
        acc += symbol.eval(angular_frequency(m, nt, horizon)) * z.norm_sqr();
    }
    (acc * dt / (T::lit(2.0) * T::of(n))).max(T::zero()).sqrt()
}
