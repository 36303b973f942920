//! Scripted experiments: the confiscation/stability run, convergence-rate
//! measurement, and the summability equivalence check.

use crate::closed_form::pareto_exponent;
use crate::error::{Error, Result};
use crate::estimators::loglog_slope;
use crate::log_grid::{
    discrete_l1, iterate, pareto_fixed_point, snap_floor, ConvergenceTrace, GridDistribution,
    SolutionBranch,
};
use crate::model::{validate_params, ModelParams};
use serde::{Deserialize, Serialize};

/// Per-step ratio agreement demanded before truncation allowances.
const RATIO_TOL: f64 = 1e-9;
/// Agreement demanded between the recovered tail exponent and alpha.
const SLOPE_TOL: f64 = 1e-4;
/// Half-width of the slope-recovery window, in whole periods, around the cut.
const WINDOW_PERIODS: usize = 4;

/// Outcome flags of a confiscation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    /// Distances decay with a consistent per-step ratio strictly below 1.
    pub geometric: bool,
    /// Every per-step ratio equals 1/kappa within tolerance.
    pub ratios_match_inv_kappa: bool,
    /// The perturbed density's tail exponent is back within
    /// [`SLOPE_TOL`] of alpha.
    pub tail_slope_recovered: bool,
    /// Tail exponent read off the perturbed density, when measurable (the
    /// hole can zero out cells in the window early in the run).
    pub recovered_alpha: Option<f64>,
    /// Closed-form alpha the tail must return to.
    pub expected_alpha: f64,
    /// Human-readable one-liner.
    pub description: String,
}

/// Record of one confiscation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Confiscation threshold actually used.
    pub x_c: f64,
    /// L1 distances d_0 .. d_n between perturbed and invariant densities.
    pub d: Vec<f64>,
    /// Per-step ratios d_{k+1}/d_k.
    pub ratios: Vec<f64>,
    /// Fitted geometric rate.
    pub rate: f64,
    /// Analytic bound on the invariant tail mass beyond the grid; infinite
    /// in the critical diagnostic mode (alpha = 1 has no summable tail).
    pub epsilon: f64,
    pub verdict: StabilityVerdict,
}

/// Wealth threshold x_c such that cells with x > x_c hold at least `fraction`
/// of the grid's weighted mass. Returned as the midpoint (in log-wealth)
/// below the first cell of that tail block, so the block is unambiguous.
pub fn tail_mass_threshold(g: &GridDistribution, fraction: f64) -> Result<f64> {
    if !(fraction.is_finite() && 0.0 < fraction && fraction < 1.0) {
        return Err(Error::OutOfRange(format!(
            "tail fraction must lie in (0,1), got {fraction}"
        )));
    }
    let total = discrete_l1(g);
    if total <= 0.0 {
        return Err(Error::NonPositiveDensity);
    }
    let h = g.step;
    let mut acc = 0.0;
    for i in (0..g.len()).rev() {
        acc += h * g.values[i].abs() * g.x_at(i);
        if acc >= fraction * total {
            return Ok((g.log_x(i) - h / 2.0).exp());
        }
    }
    // fraction < 1 and the full sum equals total, so the loop always exits.
    unreachable!("accumulated mass never reached the requested fraction")
}

/// Remove all wealth above `x_c` from the invariant density and watch the
/// perturbation decay.
///
/// Builds the (constant-modulation) fixed point f0 on the grid, forms the
/// one-signed perturbation delta_0 = f0 restricted to x > x_c, and iterates
/// the operator on delta_n. Linearity makes this equivalent to evolving the
/// full truncated density; because delta_0 does not change sign, the L1
/// distance contracts by exactly 1/kappa each step, not merely at most.
/// After the distance has decayed, the perturbed density f0 - delta_n is
/// examined on a whole-period window straddling the cut and its tail
/// exponent is compared with alpha.
///
/// `allow_critical` unlocks the kappa = 1 diagnostic mode in which the
/// distance is conserved instead of contracting.
#[allow(clippy::too_many_arguments)]
pub fn confiscation_experiment(
    params: &ModelParams,
    m: usize,
    x_min: f64,
    x_max: f64,
    x_c: f64,
    n_steps: usize,
    allow_critical: bool,
    cell_cap: usize,
) -> Result<StabilityReport> {
    validate_params(params.p, params.gamma, params.kappa)?;
    if params.kappa == 1.0 && !allow_critical {
        return Err(Error::NotDissipative);
    }
    if n_steps < 4 {
        return Err(Error::OutOfRange(
            "confiscation run needs at least 4 steps".into(),
        ));
    }
    let report = pareto_exponent(params)?;
    let modulation = vec![1.0; m];
    let f0 = pareto_fixed_point(
        params,
        m,
        x_min,
        x_max,
        &modulation,
        1.0,
        SolutionBranch::Sound,
    )?;
    if !x_c.is_finite() || x_c < f0.x_at(0) || x_c >= f0.x_at(f0.len() - 1) {
        return Err(Error::OutOfRange(format!(
            "x_c = {x_c} outside the grid's wealth range [{}, {})",
            f0.x_at(0),
            f0.x_at(f0.len() - 1)
        )));
    }

    // First cell strictly above the threshold, as a global index.
    let j_cut = snap_floor(x_c.ln() / f0.step) + 1;
    let half_window = (WINDOW_PERIODS * m) as i64;
    if j_cut - half_window < f0.base_index {
        return Err(Error::OutOfRange(format!(
            "x_c = {x_c} sits less than {WINDOW_PERIODS} periods above x_min; \
             no room for the recovery window"
        )));
    }

    let mut delta0 = f0.clone();
    for i in 0..delta0.len() {
        if delta0.base_index + (i as i64) < j_cut {
            delta0.values[i] = 0.0;
        }
    }
    let d0 = discrete_l1(&delta0);
    debug_assert!(d0 > 0.0, "x_c below the top cell leaves mass to remove");

    // Invariant mass the finite grid cannot represent: integral of x^rho0
    // beyond the last cell. Infinite at the critical point (alpha = 1).
    let x_top = f0.x_at(f0.len() - 1);
    let epsilon = x_top.powf(report.rho0 + 1.0) / (report.alpha - 1.0);
    let eps_rel = if (epsilon / d0).is_finite() {
        epsilon / d0
    } else {
        0.0
    };

    let (delta_n, trace) = iterate(&delta0, params, n_steps, cell_cap)?;
    let (rate, max_dev) = measure_convergence_rate(&trace)?;

    let ratio_tol = RATIO_TOL + eps_rel;
    let inv_kappa = 1.0 / params.kappa;
    let ratios_match_inv_kappa = trace
        .ratios
        .iter()
        .all(|r| (r - inv_kappa).abs() <= ratio_tol);
    let geometric = max_dev <= ratio_tol && rate < 1.0 - 1e-12;

    // Perturbed density on the grown support; f0 is analytic so extending it
    // under the spread-out delta_n is exact.
    let mut perturbed = delta_n.clone();
    for i in 0..perturbed.len() {
        let f0_val = (report.rho0 * perturbed.log_x(i)).exp();
        perturbed.values[i] = f0_val - delta_n.values[i];
    }
    let lo = (j_cut - half_window - perturbed.base_index) as usize;
    let hi = (j_cut + half_window - perturbed.base_index) as usize;
    let recovered_alpha = match loglog_slope(&perturbed, lo..hi) {
        Ok(est) => Some(est.alpha_hat),
        Err(Error::NonPositiveDensity) => None,
        Err(e) => return Err(e),
    };
    let tail_slope_recovered =
        recovered_alpha.is_some_and(|a| (a - report.alpha).abs() <= SLOPE_TOL);

    let description = format!(
        "{}, rate={rate}",
        if geometric { "geometric" } else { "non-geometric" }
    );
    Ok(StabilityReport {
        x_c,
        d: trace.distances,
        ratios: trace.ratios,
        rate,
        epsilon,
        verdict: StabilityVerdict {
            geometric,
            ratios_match_inv_kappa,
            tail_slope_recovered,
            recovered_alpha,
            expected_alpha: report.alpha,
            description,
        },
    })
}

/// Three readings of the summability condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub x0: f64,
    pub alpha: f64,
    pub rho0: f64,
    /// The tail count integral of x^rho0 from x0 converges (rho0 < -1).
    pub tail_count_summable: bool,
    /// alpha > 1.
    pub alpha_above_one: bool,
    /// kappa > 1.
    pub dissipative: bool,
    /// All three booleans agree.
    pub consistent: bool,
    /// Value of the tail count integral (unit amplitude) when it converges.
    pub tail_count_integral: Option<f64>,
    /// Value of the tail wealth integral of x * x^rho0 when it converges
    /// (alpha > 2); reported for reference, not part of the equivalence.
    pub tail_wealth_integral: Option<f64>,
}

/// Check that "the tail is summable", "alpha > 1" and "kappa > 1" are the
/// same statement for these parameters.
pub fn equivalence_check(params: &ModelParams, x0: f64) -> Result<EquivalenceReport> {
    validate_params(params.p, params.gamma, params.kappa)?;
    if !x0.is_finite() || x0 <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "tail start x0 must be finite and positive, got {x0}"
        )));
    }
    let rep = pareto_exponent(params)?;
    let tail_count_summable = rep.rho0 < -1.0;
    let alpha_above_one = rep.alpha > 1.0;
    let dissipative = params.kappa > 1.0;
    let consistent =
        tail_count_summable == alpha_above_one && alpha_above_one == dissipative;
    let tail_count_integral = tail_count_summable
        .then(|| x0.powf(rep.rho0 + 1.0) / (rep.alpha - 1.0));
    let tail_wealth_integral =
        (rep.alpha > 2.0).then(|| x0.powf(rep.rho0 + 2.0) / (rep.alpha - 2.0));
    Ok(EquivalenceReport {
        x0,
        alpha: rep.alpha,
        rho0: rep.rho0,
        tail_count_summable,
        alpha_above_one,
        dissipative,
        consistent,
        tail_count_integral,
        tail_wealth_integral,
    })
}

/// Fit a geometric rate to a recorded trace: exp(mean of log ratios), plus
/// the largest deviation of any single ratio from the fit.
///
/// # Errors
///
/// [`Error::InsufficientData`] with fewer than 3 positive distances, or when
/// the distance collapses to exact zero mid-trace.
pub fn measure_convergence_rate(trace: &ConvergenceTrace) -> Result<(f64, f64)> {
    let positive = trace.distances.iter().filter(|d| **d > 0.0).count();
    if positive < 3 {
        return Err(Error::InsufficientData(format!(
            "rate fit needs >= 3 positive distances, got {positive}"
        )));
    }
    if trace.ratios.is_empty() || trace.ratios.iter().any(|r| *r <= 0.0) {
        return Err(Error::InsufficientData(
            "distance collapsed to zero; no geometric rate to fit".into(),
        ));
    }
    let mean_log =
        trace.ratios.iter().map(|r| r.ln()).sum::<f64>() / trace.ratios.len() as f64;
    let rate = mean_log.exp();
    let max_dev = trace
        .ratios
        .iter()
        .map(|r| (r - rate).abs())
        .fold(0.0, f64::max);
    Ok((rate, max_dev))
}
