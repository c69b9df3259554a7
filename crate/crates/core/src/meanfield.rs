//! Single-site mean-field rate picture of the blockade-limited relaxation.
//!
//! A site sees its neighbours through the shift `Δ_eff = V(⟨Q_{j−1}⟩ + ⟨Q_{j+1}⟩)`.
//! Eliminating the coherences of the local two-level system leaves a rate
//! equation for the populations with the effective rate
//! `γ_mf = Ω² γ / (Δ_eff² + γ²/4)`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::basis::ChainParams;
use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanFieldParams {
    pub omega: f64,
    pub gamma: f64,
    pub v: f64,
    /// Excitation probability of each neighbour.
    pub q: f64,
}

impl MeanFieldParams {
    /// Homogeneous neighbours at the infinite-temperature value `q = 1/2`.
    pub fn thermal(omega: f64, gamma: f64, v: f64) -> Self {
        Self { omega, gamma, v, q: 0.5 }
    }

    pub fn from_chain(chain: &ChainParams) -> Self {
        Self::thermal(chain.omega, chain.gamma, chain.v)
    }

    /// `V (q_left + q_right) = 2 V q`.
    pub fn delta_eff(&self) -> f64 {
        2.0 * self.v * self.q
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter { field: "gamma", reason: "must be positive".into() });
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::InvalidParameter { field: "q", reason: "must lie in [0, 1]".into() });
        }
        Ok(())
    }
}

/// `Ω² γ / (Δ_eff² + γ²/4)`.
pub fn gamma_mf(params: &MeanFieldParams) -> Result<f64> {
    params.validate()?;
    let delta = params.delta_eff();
    Ok(params.omega * params.omega * params.gamma / (delta * delta + params.gamma * params.gamma / 4.0))
}

/// Strong-interaction limit `Ω² γ / V²`.
pub fn gamma_mf_limit(params: &MeanFieldParams) -> Result<f64> {
    params.validate()?;
    if params.v == 0.0 {
        return Err(Error::InvalidParameter { field: "v", reason: "limit form needs V ≠ 0".into() });
    }
    Ok(params.omega * params.omega * params.gamma / (params.v * params.v))
}

/// `τ = 1/γ_mf`.
pub fn decay_time(params: &MeanFieldParams) -> Result<f64> {
    let rate = gamma_mf(params)?;
    if rate > 0.0 {
        Ok(1.0 / rate)
    } else {
        Err(Error::InvalidParameter { field: "omega", reason: "zero drive gives no decay".into() })
    }
}

/// Stationary coherences `(ρ_gr, ρ_rg)` for the populations `(ρ_rr, ρ_gg)`.
pub fn stationary_coherences(params: &MeanFieldParams, rho_rr: f64, rho_gg: f64) -> (C64, C64) {
    let i_omega = C64::new(0.0, params.omega);
    let delta = params.delta_eff();
    let imbalance = rho_rr - rho_gg;
    let gr = i_omega / C64::new(-params.gamma / 2.0, delta) * imbalance;
    let rg = i_omega / C64::new(params.gamma / 2.0, delta) * imbalance;
    (gr, rg)
}

/// `ρ_rr(t) = ½ + (ρ_rr(0) − ½) e^{−2 γ_mf t}`, the solution of
/// `dρ_rr/dt = −γ_mf (ρ_rr − ρ_gg)` with `ρ_gg = 1 − ρ_rr`.
pub fn rate_equation_evolve(params: &MeanFieldParams, rho_rr_0: f64, t_grid: &[f64]) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&rho_rr_0) {
        return Err(Error::InvalidParameter { field: "rho_rr_0", reason: "must lie in [0, 1]".into() });
    }
    let rate = gamma_mf(params)?;
    Ok(t_grid
        .iter()
        .map(|&t| 0.5 + (rho_rr_0 - 0.5) * (-2.0 * rate * t).exp())
        .collect())
}
