//! Parameter containers and derived coefficients shared by all other modules.
//!
//! One round of the game multiplies a winner's wealth by 1+gamma and divides
//! a loser's by 1+gamma; the density of agents then evolves by the operator
//! W, and W_kappa = (1/kappa) W adds dissipation. In log-wealth coordinates
//! the invariance condition becomes a three-term recurrence with step
//! lambda = log(1+gamma) and coefficients (a, b) below.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The triple (p, gamma, kappa) defining one-class dynamics.
///
/// Invariants (enforced by [`validate_params`]): 0 < p < 1, gamma > 0,
/// kappa >= 1, all finite. `low_p_warning` is set when p <= 1/2: the model
/// assumes agents bet only with a positive expectation of gain, but every
/// formula stays valid below that threshold, so such parameters are accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Probability of winning a bet.
    pub p: f64,
    /// Wagered fraction of current wealth.
    pub gamma: f64,
    /// Dissipative coefficient; kappa = 1 is the wealth-preserving case.
    pub kappa: f64,
    /// Set iff p <= 1/2.
    pub low_p_warning: bool,
}

/// Coefficients of the log-domain functional equation
/// a F(x + lambda) - F(x) + b F(x - lambda) = 0.
///
/// a = (1-p)(1+gamma)/kappa, b = p/(kappa(1+gamma)), lambda = log(1+gamma).
/// The product a*b = p(1-p)/kappa^2 exactly, an identity tests hold to 1e-14.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedCoefficients {
    pub lambda: f64,
    /// Forward (loss) coefficient (1-p)(1+gamma)/kappa.
    pub a: f64,
    /// Backward (win) coefficient p/(kappa(1+gamma)).
    pub b: f64,
}

/// Validates (p, gamma, kappa) and builds a [`ModelParams`].
///
/// # Errors
///
/// [`Error::NonFinite`] for NaN/infinite inputs; [`Error::OutOfRange`] for
/// p outside (0,1), gamma <= 0, or kappa < 1.
pub fn validate_params(p: f64, gamma: f64, kappa: f64) -> Result<ModelParams> {
    if !p.is_finite() {
        return Err(Error::NonFinite("p".into()));
    }
    if !gamma.is_finite() {
        return Err(Error::NonFinite("gamma".into()));
    }
    if !kappa.is_finite() {
        return Err(Error::NonFinite("kappa".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRange("p out of range (0,1)".into()));
    }
    if gamma <= 0.0 {
        return Err(Error::OutOfRange("gamma out of range (0,inf)".into()));
    }
    if kappa < 1.0 {
        return Err(Error::OutOfRange("kappa out of range [1,inf)".into()));
    }
    Ok(ModelParams {
        p,
        gamma,
        kappa,
        low_p_warning: p <= 0.5,
    })
}

impl ModelParams {
    /// Shorthand for [`validate_params`].
    pub fn new(p: f64, gamma: f64, kappa: f64) -> Result<Self> {
        validate_params(p, gamma, kappa)
    }
}

/// Computes (lambda, a, b) for valid params.
///
/// lambda uses `ln_1p` so small gamma loses no precision.
pub fn derive_coefficients(params: &ModelParams) -> DerivedCoefficients {
    let one_plus = 1.0 + params.gamma;
    DerivedCoefficients {
        lambda: params.gamma.ln_1p(),
        a: (1.0 - params.p) * one_plus / params.kappa,
        b: params.p / (params.kappa * one_plus),
    }
}
