//! Deterministic random test data: smooth states, compactly supported
//! boundary inputs and bump-shaped final data, all driven by a seeded
//! ChaCha generator so that every estimator is reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::evolution::{BoundaryData, Channel, ControlConfig};
use crate::model::{SpaceTimeGrid, StatePair};
use crate::Real;

/// Seeded generator used throughout the crate.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Random cosine series `Σ_{k<modes} ξ_k/(1+k)·cos(kπx/L)` in each component.
pub fn smooth_state<T: Real>(grid: &SpaceTimeGrid<T>, rng: &mut ChaCha8Rng, modes: usize) -> StatePair<T> {
    let l = grid.length.to_f64().unwrap_or(1.0);
    let cu: Vec<f64> = (0..modes).map(|k| normal(rng) / (1.0 + k as f64)).collect();
    let cv: Vec<f64> = (0..modes).map(|k| normal(rng) / (1.0 + k as f64)).collect();
    let eval = |c: &[f64], x: f64| -> f64 {
        c.iter().enumerate().map(|(k, a)| a * (k as f64 * std::f64::consts::PI * x / l).cos()).sum()
    };
    let xs = grid.xs();
    StatePair {
        u: xs.iter().map(|x| T::lit(eval(&cu, x.to_f64().unwrap_or(0.0)))).collect(),
        v: xs.iter().map(|x| T::lit(eval(&cv, x.to_f64().unwrap_or(0.0)))).collect(),
    }
}

/// Two Gaussian bumps of width `L/10` centred at random points of `[0.3L, 0.7L]`
/// (one per component); they are negligible near both ends.
pub fn bump_state<T: Real>(grid: &SpaceTimeGrid<T>, rng: &mut ChaCha8Rng) -> StatePair<T> {
    let l = grid.length.to_f64().unwrap_or(1.0);
    let c1 = rng.random_range(0.3..0.7) * l;
    let c2 = rng.random_range(0.3..0.7) * l;
    let a1 = 1.0 + 0.5 * normal(rng).tanh();
    let a2 = -0.7 * (1.0 + 0.5 * normal(rng).tanh());
    let w = l / 10.0;
    let xs = grid.xs();
    StatePair {
        u: xs.iter().map(|x| T::lit(a1 * (-((x.to_f64().unwrap() - c1) / w).powi(2)).exp())).collect(),
        v: xs.iter().map(|x| T::lit(a2 * (-((x.to_f64().unwrap() - c2) / w).powi(2)).exp())).collect(),
    }
}

/// Smooth inputs `sin⁴(πt/T)·Σ_{k<4} ξ_k cos(kπt/T)` on every active channel of `cfg`
/// (zero on the others); they vanish to fourth order at both ends of `[0, T]`.
pub fn smooth_boundary<T: Real>(grid: &SpaceTimeGrid<T>, cfg: ControlConfig, rng: &mut ChaCha8Rng) -> BoundaryData<T> {
    let horizon = grid.horizon.to_f64().unwrap_or(1.0);
    let mut bd = BoundaryData::zeros(grid.nt);
    let ts = grid.ts();
    for ch in Channel::ALL {
        if !cfg.is_active(ch) {
            continue;
        }
        let co: Vec<f64> = (0..4).map(|_| normal(rng)).collect();
        let series = bd.channel_mut(ch);
        for (n, t) in ts.iter().enumerate() {
            let t = t.to_f64().unwrap_or(0.0);
            let window = (std::f64::consts::PI * t / horizon).sin().powi(4);
            let s: f64 =
                co.iter().enumerate().map(|(k, a)| a * (k as f64 * std::f64::consts::PI * t / horizon).cos()).sum();
            series[n] = T::lit(window * s);
        }
    }
    bd
}
