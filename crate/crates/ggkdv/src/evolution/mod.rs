//! Time stepping of the forward linear and nonlinear systems and of the
//! backward adjoint system, with boundary-trace extraction.
//!
//! Unknowns are interleaved node by node (`[u₀, v₀, u₁, v₁, …]`), which keeps
//! the Crank–Nicolson matrices banded. Interior rows carry the PDE with a
//! five-point third-derivative stencil and a centered first derivative;
//! boundary rows carry one-sided second-order stencils of the boundary
//! conditions.

mod adjoint;
mod estimates;
mod forward;
mod transpose;

pub use adjoint::{boundary_residual, extract_traces, solve_adjoint_backward, AdjointSolver};
pub use estimates::{
    energy_estimate, energy_estimate_from_final, hidden_regularity_estimate, trace_norm_max, EnergyEstimate,
};
pub(crate) use forward::boundary_stencil as forward_boundary_stencil;
pub use forward::{solve_linear_forward, solve_nonlinear_forward, ForwardSolver, NonlinearOptions};
pub use transpose::{build_discrete_adjoint, DiscreteAdjoint};

use serde::{Deserialize, Serialize};

use crate::model::{trapezoid_weights, SpaceTimeGrid, ValidatedParams};
use crate::{GgError, Real, Result};

/// One of the six boundary inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    /// `u_xx(0, t)`.
    H0,
    /// `u_x(L, t)`.
    H1,
    /// `u_xx(L, t)`.
    H2,
    /// `v_xx(0, t)`.
    G0,
    /// `v_x(L, t)`.
    G1,
    /// `v_xx(L, t)`.
    G2,
}

impl Channel {
    /// All channels in the order `h0, h1, h2, g0, g1, g2`.
    pub const ALL: [Channel; 6] = [Channel::H0, Channel::H1, Channel::H2, Channel::G0, Channel::G1, Channel::G2];

    /// Position in [`Channel::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Lower-case name (`"h0"`, …).
    pub fn name(self) -> &'static str {
        ["h0", "h1", "h2", "g0", "g1", "g2"][self.index()]
    }

    /// `0` for the `u` channels, `1` for the `v` channels.
    pub fn component(self) -> usize {
        self.index() / 3
    }

    /// Second-derivative channels, whose controls live in `H^{−1/3}(0,T)`.
    pub fn is_fractional(self) -> bool {
        matches!(self, Channel::H0 | Channel::H2 | Channel::G0 | Channel::G2)
    }
}

/// Active-control configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ControlConfig {
    /// `(0, h1, 0)`, `(g0, g1, g2)`.
    C1,
    /// `(h0, h1, h2)`, `(0, g1, 0)`.
    C2,
    /// `(h0, h1, 0)`, `(g0, g1, 0)`.
    C3,
    /// `(0, h1, h2)`, `(0, g1, g2)`.
    C4,
    /// `h1` only.
    C5,
    /// `g1` only.
    C6,
}

impl ControlConfig {
    /// All configurations.
    pub const ALL: [ControlConfig; 6] = [
        ControlConfig::C1,
        ControlConfig::C2,
        ControlConfig::C3,
        ControlConfig::C4,
        ControlConfig::C5,
        ControlConfig::C6,
    ];

    /// Active mask in channel order `h0, h1, h2, g0, g1, g2`.
    pub fn mask(self) -> [bool; 6] {
        match self {
            ControlConfig::C1 => [false, true, false, true, true, true],
            ControlConfig::C2 => [true, true, true, false, true, false],
            ControlConfig::C3 => [true, true, false, true, true, false],
            ControlConfig::C4 => [false, true, true, false, true, true],
            ControlConfig::C5 => [false, true, false, false, false, false],
            ControlConfig::C6 => [false, false, false, false, true, false],
        }
    }

    /// Whether `ch` is a control input for this configuration.
    pub fn is_active(self, ch: Channel) -> bool {
        self.mask()[ch.index()]
    }

    /// Active channels in order.
    pub fn active(self) -> Vec<Channel> {
        Channel::ALL.into_iter().filter(|&c| self.is_active(c)).collect()
    }

    /// Configurations driven by a single input (`C5`, `C6`).
    pub fn is_one_control(self) -> bool {
        matches!(self, ControlConfig::C5 | ControlConfig::C6)
    }

    /// Configurations whose controllability fails on a set of critical lengths (`C1`, `C2`).
    pub fn has_critical_lengths(self) -> bool {
        matches!(self, ControlConfig::C1 | ControlConfig::C2)
    }

    /// Parses `"C1"` … `"C6"` (case-insensitive).
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "C1" => Some(ControlConfig::C1),
            "C2" => Some(ControlConfig::C2),
            "C3" => Some(ControlConfig::C3),
            "C4" => Some(ControlConfig::C4),
            "C5" => Some(ControlConfig::C5),
            "C6" => Some(ControlConfig::C6),
            _ => None,
        }
    }
}

/// The six boundary inputs sampled at `t_n`, `n = 0..nt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData<T> {
    /// `u_xx(0, ·)`.
    pub h0: Vec<T>,
    /// `u_x(L, ·)`.
    pub h1: Vec<T>,
    /// `u_xx(L, ·)`.
    pub h2: Vec<T>,
    /// `v_xx(0, ·)`.
    pub g0: Vec<T>,
    /// `v_x(L, ·)`.
    pub g1: Vec<T>,
    /// `v_xx(L, ·)`.
    pub g2: Vec<T>,
}

impl<T: Real> BoundaryData<T> {
    /// Homogeneous inputs for `nt` steps.
    pub fn zeros(nt: usize) -> Self {
        let z = vec![T::zero(); nt + 1];
        Self { h0: z.clone(), h1: z.clone(), h2: z.clone(), g0: z.clone(), g1: z.clone(), g2: z }
    }

    /// Series of one channel.
    pub fn channel(&self, ch: Channel) -> &[T] {
        match ch {
            Channel::H0 => &self.h0,
            Channel::H1 => &self.h1,
            Channel::H2 => &self.h2,
            Channel::G0 => &self.g0,
            Channel::G1 => &self.g1,
            Channel::G2 => &self.g2,
        }
    }

    /// Mutable series of one channel.
    pub fn channel_mut(&mut self, ch: Channel) -> &mut Vec<T> {
        match ch {
            Channel::H0 => &mut self.h0,
            Channel::H1 => &mut self.h1,
            Channel::H2 => &mut self.h2,
            Channel::G0 => &mut self.g0,
            Channel::G1 => &mut self.g1,
            Channel::G2 => &mut self.g2,
        }
    }

    /// Checks every series has `nt + 1` samples.
    pub fn check(&self, nt: usize) -> Result<()> {
        for ch in Channel::ALL {
            let len = self.channel(ch).len();
            if len != nt + 1 {
                return Err(GgError::ShapeMismatch { expected: nt + 1, found: len });
            }
        }
        Ok(())
    }

    /// Copy with inactive channels of `cfg` set to zero.
    pub fn masked(&self, cfg: ControlConfig) -> Self {
        let mut out = self.clone();
        for ch in Channel::ALL {
            if !cfg.is_active(ch) {
                out.channel_mut(ch).iter_mut().for_each(|x| *x = T::zero());
            }
        }
        out
    }

    /// True when every channel inactive for `cfg` vanishes identically.
    pub fn respects(&self, cfg: ControlConfig) -> bool {
        Channel::ALL.into_iter().filter(|&c| !cfg.is_active(c)).all(|c| self.channel(c).iter().all(|x| *x == T::zero()))
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: T, other: &Self) -> Self {
        let mut out = self.clone();
        for ch in Channel::ALL {
            for (a, b) in out.channel_mut(ch).iter_mut().zip(other.channel(ch)) {
                *a += s * *b;
            }
        }
        out
    }

    /// Trapezoid-in-time inner product summed over all channels.
    pub fn inner(&self, other: &Self, grid: &SpaceTimeGrid<T>) -> T {
        let w = grid.time_weights();
        Channel::ALL
            .into_iter()
            .map(|ch| w.iter().zip(self.channel(ch)).zip(other.channel(ch)).map(|((a, b), c)| *a * *b * *c).sum::<T>())
            .sum()
    }

    /// Largest absolute sample.
    pub fn max_abs(&self) -> T {
        Channel::ALL.into_iter().flat_map(|ch| self.channel(ch).iter()).fold(T::zero(), |m, x| m.max(x.abs()))
    }
}

/// Boundary traces of an adjoint solution, one sample per time level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjointTraces<T> {
    /// `φ(0, ·)`.
    pub phi0: Vec<T>,
    /// `ψ(0, ·)`.
    pub psi0: Vec<T>,
    /// `φ(L, ·)`.
    pub phi_l: Vec<T>,
    /// `ψ(L, ·)`.
    pub psi_l: Vec<T>,
    /// `φ_x(L, ·)`.
    pub dphi_l: Vec<T>,
    /// `ψ_x(L, ·)`.
    pub dpsi_l: Vec<T>,
    /// `φ_xx(0, ·)`.
    pub d2phi0: Vec<T>,
    /// `ψ_xx(0, ·)`.
    pub d2psi0: Vec<T>,
    /// `φ_xx(L, ·)`.
    pub d2phi_l: Vec<T>,
    /// `ψ_xx(L, ·)`.
    pub d2psi_l: Vec<T>,
}

impl<T: Real> AdjointTraces<T> {
    /// Series paired with each input channel in the duality identity
    /// `∫(u(T)φ¹ + v(T)ψ¹) = Σ_ch ∫₀ᵀ input_ch · coefficient_ch dt` (zero initial state):
    ///
    /// - `h0`: `φ(0) + (ab/c)ψ(0)`;  `h1`: `φ_x(L) + (ab/c)ψ_x(L)`;  `h2`: `−(φ(L) + (ab/c)ψ(L))`
    /// - `g0`: `aφ(0) + ψ(0)/c`;  `g1`: `aφ_x(L) + ψ_x(L)/c`;  `g2`: `−(aφ(L) + ψ(L)/c)`
    pub fn pairing_coefficients(&self, p: &ValidatedParams<T>) -> BoundaryData<T> {
        let a = p.get().a;
        let k = p.ab_c();
        let ic = p.inv_c();
        let comb = |x: &[T], y: &[T], s: T, alpha: T, beta: T| -> Vec<T> {
            x.iter().zip(y).map(|(f, g)| s * (alpha * *f + beta * *g)).collect()
        };
        let one = T::one();
        BoundaryData {
            h0: comb(&self.phi0, &self.psi0, one, one, k),
            h1: comb(&self.dphi_l, &self.dpsi_l, one, one, k),
            h2: comb(&self.phi_l, &self.psi_l, -one, one, k),
            g0: comb(&self.phi0, &self.psi0, one, a, ic),
            g1: comb(&self.dphi_l, &self.dpsi_l, one, a, ic),
            g2: comb(&self.phi_l, &self.psi_l, -one, a, ic),
        }
    }
}

/// Right-hand sides `(f, s)` of the two equations, one profile per time level.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcePair<T> {
    /// Source of the `u` equation, `[time][node]`.
    pub f: Vec<Vec<T>>,
    /// Source of the `v` equation, `[time][node]`.
    pub s: Vec<Vec<T>>,
}

impl<T: Real> SourcePair<T> {
    /// Checks the `(nt+1) × (nx+1)` shape.
    pub fn check(&self, grid: &SpaceTimeGrid<T>) -> Result<()> {
        for field in [&self.f, &self.s] {
            if field.len() != grid.nt + 1 {
                return Err(GgError::ShapeMismatch { expected: grid.nt + 1, found: field.len() });
            }
            for row in field {
                if row.len() != grid.nodes() {
                    return Err(GgError::ShapeMismatch { expected: grid.nodes(), found: row.len() });
                }
            }
        }
        Ok(())
    }
}

/// Interleaved index of node `j`, component `q` (`0` for `u`/`φ`, `1` for `v`/`ψ`).
#[inline]
pub(crate) fn ix(j: usize, q: usize) -> usize {
    2 * j + q
}

/// Spatial trapezoid weights repeated for both interleaved components.
pub(crate) fn interleaved_weights<T: Real>(grid: &SpaceTimeGrid<T>) -> Vec<T> {
    trapezoid_weights(grid.nx, grid.dx()).into_iter().flat_map(|w| [w, w]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masks_match_configuration_list() {
        assert_eq!(ControlConfig::C1.active(), vec![Channel::H1, Channel::G0, Channel::G1, Channel::G2]);
        assert_eq!(ControlConfig::C2.active(), vec![Channel::H0, Channel::H1, Channel::H2, Channel::G1]);
        assert_eq!(ControlConfig::C3.active(), vec![Channel::H0, Channel::H1, Channel::G0, Channel::G1]);
        assert_eq!(ControlConfig::C4.active(), vec![Channel::H1, Channel::H2, Channel::G1, Channel::G2]);
        assert_eq!(ControlConfig::C5.active(), vec![Channel::H1]);
        assert_eq!(ControlConfig::C6.active(), vec![Channel::G1]);
    }

    #[test]
    fn masking_zeroes_inactive_channels() {
        let mut bd = BoundaryData::<f64>::zeros(4);
        for ch in Channel::ALL {
            bd.channel_mut(ch).iter_mut().for_each(|x| *x = 1.0);
        }
        let m = bd.masked(ControlConfig::C5);
        assert!(m.respects(ControlConfig::C5));
        assert!(!bd.respects(ControlConfig::C5));
        assert_eq!(m.h1, vec![1.0; 5]);
    }
}
