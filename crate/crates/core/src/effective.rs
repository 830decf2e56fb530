//! Second-order reduction of the full system to the sender/receiver pair.
//!
//! With the terminals tuned away from every channel eigenvalue and coupled
//! weakly, eliminating the channel to second order leaves a 2×2 Hamiltonian
//!
//! ```text
//! H_sr = | h_s  -J' |        h_ν = ω_ν - g_ν² Σ_k a_νk² / (E_k - ω_ν)
//!        | -J'  h_r |        J'  = (g_s g_r / 2) Σ_k a_sk a_rk [1/(E_k-ω_s) + 1/(E_k-ω_r)]
//! ```
//!
//! where a_sk, a_rk are the channel eigenvector amplitudes on the first and
//! last channel site. The detuning Δ = h_s − h_r controls how complete the
//! resulting Rabi oscillation is.

use crate::error::{Error, Result};
use crate::hamiltonian::ChainSpec;
use crate::spectral::EigenSystem;

/// Default resonance guard, in units of J.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;

/// Renormalized two-site parameters plus resonance diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveTwoSite {
    pub h_s: f64,
    pub h_r: f64,
    /// Effective sender-receiver coupling J'.
    pub j_eff: f64,
    /// Detuning Δ = h_s − h_r.
    pub delta: f64,
    /// min_k |E_k − ω_s|.
    pub min_gap_s: f64,
    /// min_k |E_k − ω_r|.
    pub min_gap_r: f64,
}

impl EffectiveTwoSite {
    /// Eigenvalues of the 2×2 Hamiltonian, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mid = 0.5 * (self.h_s + self.h_r);
        let rad = (0.25 * self.delta * self.delta + self.j_eff * self.j_eff).sqrt();
        [mid - rad, mid + rad]
    }

    /// The perturbative picture is only trustworthy when each terminal sits
    /// at least ~10 couplings away from the nearest channel level.
    pub fn weak_coupling_ok(&self, g_s: f64, g_r: f64) -> bool {
        self.min_gap_s >= 10.0 * g_s && self.min_gap_r >= 10.0 * g_r
    }
}

/// Reduce with the default resonance guard of `DEFAULT_GAP_TOL`·J.
pub fn reduce(channel_eigs: &EigenSystem, spec: &ChainSpec) -> Result<EffectiveTwoSite> {
    reduce_with_tol(channel_eigs, spec, DEFAULT_GAP_TOL * spec.j)
}

/// Evaluate the second-order formulas from the channel decomposition.
///
/// Fails with `ResonantLevel` when either terminal frequency lies within
/// `gap_tol` of a channel eigenvalue (the sums diverge there).
pub fn reduce_with_tol(
    channel_eigs: &EigenSystem,
    spec: &ChainSpec,
    gap_tol: f64,
) -> Result<EffectiveTwoSite> {
    spec.validate()?;
    if channel_eigs.dim() != spec.n {
        return Err(Error::InvalidInput(format!(
            "expected the N-site channel decomposition (N = {}), got dimension {}",
            spec.n,
            channel_eigs.dim()
        )));
    }

    let min_gap = |omega: f64| {
        channel_eigs
            .energies
            .iter()
            .map(|e| (e - omega).abs())
            .fold(f64::INFINITY, f64::min)
    };
    let min_gap_s = min_gap(spec.omega_s);
    let min_gap_r = min_gap(spec.omega_r);
    for (gap, terminal) in [(min_gap_s, "s"), (min_gap_r, "r")] {
        if gap <= gap_tol {
            return Err(Error::ResonantLevel { terminal, gap, gap_tol });
        }
    }

    let last = spec.n - 1;
    let mut shift_s = 0.0;
    let mut shift_r = 0.0;
    let mut cross = 0.0;
    for (k, v) in channel_eigs.vectors.iter().enumerate() {
        let a_s = v[0];
        let a_r = v[last];
        let e_k = channel_eigs.energies[k];
        shift_s += a_s * a_s / (e_k - spec.omega_s);
        shift_r += a_r * a_r / (e_k - spec.omega_r);
        cross += a_s * a_r * (1.0 / (e_k - spec.omega_s) + 1.0 / (e_k - spec.omega_r));
    }

    let h_s = spec.omega_s - spec.g_s * spec.g_s * shift_s;
    let h_r = spec.omega_r - spec.g_r * spec.g_r * shift_r;
    Ok(EffectiveTwoSite {
        h_s,
        h_r,
        j_eff: 0.5 * spec.g_s * spec.g_r * cross,
        delta: h_s - h_r,
        min_gap_s,
        min_gap_r,
    })
}

/// First maximum of the two-level transfer amplitude: returns
/// (f_max, t_first) with f_max = 2|J'|/√(4J'² + Δ²) and
/// t_first = π/√(4J'² + Δ²).
pub fn two_level_max(eff: &EffectiveTwoSite) -> Result<(f64, f64)> {
    if eff.j_eff == 0.0 {
        return Err(Error::NullDynamics);
    }
    let rabi = (4.0 * eff.j_eff * eff.j_eff + eff.delta * eff.delta).sqrt();
    Ok((2.0 * eff.j_eff.abs() / rabi, std::f64::consts::PI / rabi))
}

/// |Δ/J'|; the key figure of merit for transfer quality.
pub fn detuning_ratio(eff: &EffectiveTwoSite) -> Result<f64> {
    if eff.j_eff == 0.0 {
        return Err(Error::NullDynamics);
    }
    Ok((eff.delta / eff.j_eff).abs())
}
