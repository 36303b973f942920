//! Multi-class extension: the characteristic Dirichlet polynomial and the
//! real-root location of its tail exponent.
//!
//! With classes (p_i, q_i, gamma_i) and overall dissipation kappa, a power
//! law f(x) = x^rho is invariant exactly when
//!
//!   D(rho) = (1/kappa) sum_i [ p_i (1+gamma_i)^(-rho-1)
//!                            + q_i (1+gamma_i)^(rho+1) ] = 1.
//!
//! D is a finite sum of exponentials in rho with positive weights, hence
//! strictly convex with at most two real roots; the smaller one is the tail
//! exponent rho0, alpha = -rho0. The win-term coefficient follows the
//! single-class equation (p_i/(kappa(1+gamma_i))), under which a one-entry
//! mix reduces exactly to the one-class quadratic — the anchor every root
//! here is tested against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One population class: win weight, loss weight, wager fraction.
///
/// p_i and q_i are weights of the categorical step distribution, not
/// conditional probabilities; validation constrains their total across
/// classes, not per class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
}

/// A validated multi-class parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMix {
    pub entries: Vec<ClassEntry>,
    pub kappa: f64,
}

/// Weight-sum tolerance: |sum_i (p_i + q_i) - 1| must stay within this.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

impl ClassMix {
    /// Validates entries (p_i, q_i >= 0, gamma_i > 0, weights summing to 1
    /// within [`WEIGHT_SUM_TOL`], kappa >= 1) and builds the mix.
    ///
    /// # Errors
    ///
    /// [`Error::NonFinite`] or [`Error::OutOfRange`] describing the first
    /// offending field.
    pub fn new(entries: Vec<ClassEntry>, kappa: f64) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::OutOfRange("mix needs at least one class".into()));
        }
        if !kappa.is_finite() {
            return Err(Error::NonFinite("kappa".into()));
        }
        if kappa < 1.0 {
            return Err(Error::OutOfRange("kappa out of range [1,inf)".into()));
        }
        let mut weight_sum = 0.0;
        for (i, e) in entries.iter().enumerate() {
            if !(e.p.is_finite() && e.q.is_finite() && e.gamma.is_finite()) {
                return Err(Error::NonFinite(format!("class {i}")));
            }
            if e.p < 0.0 || e.q < 0.0 {
                return Err(Error::OutOfRange(format!("class {i}: negative weight")));
            }
            if e.gamma <= 0.0 {
                return Err(Error::OutOfRange(format!(
                    "class {i}: gamma out of range (0,inf)"
                )));
            }
            weight_sum += e.p + e.q;
        }
        if (weight_sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::OutOfRange(format!(
                "class weights sum to {weight_sum}, expected 1"
            )));
        }
        Ok(ClassMix { entries, kappa })
    }

    /// The one-entry mix equivalent to single-class params (p, 1-p, gamma).
    pub fn single(params: &crate::model::ModelParams) -> Self {
        ClassMix {
            entries: vec![ClassEntry {
                p: params.p,
                q: 1.0 - params.p,
                gamma: params.gamma,
            }],
            kappa: params.kappa,
        }
    }
}

/// Evaluates D(rho). f(x) = x^rho is invariant under the mix operator iff
/// this returns exactly 1.
pub fn characteristic_value(mix: &ClassMix, rho: f64) -> f64 {
    let mut sum = 0.0;
    for e in &mix.entries {
        let base = 1.0 + e.gamma;
        sum += e.p * base.powf(-rho - 1.0) + e.q * base.powf(rho + 1.0);
    }
    sum / mix.kappa
}

/// Tail root of D(rho) = 1 with its certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletRoot {
    /// Smallest real solution of D(rho) = 1.
    pub rho0: f64,
    /// alpha = -rho0.
    pub alpha: f64,
    /// |D(rho0) - 1| at the returned root; <= 1e-12 on every tested mix.
    pub residual: f64,
}

// Search walls: |rho| beyond this overflows every practical mix anyway.
const RHO_WALL: f64 = 800.0;
const ROOT_TOL: f64 = 1e-12;

/// Locates the tail root of D(rho) = 1: golden-section descent to the
/// minimizer of the convex D, then bisection on the decreasing side.
///
/// When the minimum touches 1 within 1e-12 the minimizer itself is the
/// (double) root — this is how balanced symmetric mixes at kappa = 1 return
/// alpha = 1. Mixes whose D never rises above 1 to the left (all win weights
/// zero) take their single crossing on the increasing side instead.
///
/// # Errors
///
/// [`Error::NoRoot`] when min D > 1 + 1e-12. Unreachable for validated
/// mixes — min D <= D(-1) = sum(p_i+q_i)/kappa <= 1 — but kept as a guard
/// for hand-built [`ClassMix`] values that skirt [`ClassMix::new`].
/// [`Error::NoNegativeRoot`] when the located root is >= 0 (loss-dominated
/// mixes whose unique crossing sits at nonnegative rho).
pub fn find_tail_root(mix: &ClassMix) -> Result<DirichletRoot> {
    let d = |rho: f64| characteristic_value(mix, rho);

    let (rho_min, d_min) = minimize_convex(&d);
    if d_min > 1.0 + ROOT_TOL {
        return Err(Error::NoRoot);
    }
    let rho0 = if (d_min - 1.0).abs() <= ROOT_TOL {
        rho_min
    } else {
        // Expand left of the minimizer looking for D > 1.
        let mut hi = rho_min;
        let mut step = 1.0;
        let mut lo = hi - step;
        while lo > -RHO_WALL && d(lo) < 1.0 {
            hi = lo;
            step *= 2.0;
            lo = hi - step;
        }
        if lo <= -RHO_WALL && d(lo) < 1.0 {
            // No left crossing (no win weight): the only root is where the
            // increasing side passes 1.
            let mut lo_r = rho_min;
            let mut step_r = 1.0;
            let mut hi_r = lo_r + step_r;
            while d(hi_r) < 1.0 {
                lo_r = hi_r;
                step_r *= 2.0;
                hi_r = lo_r + step_r;
                if hi_r > RHO_WALL {
                    return Err(Error::NoRoot);
                }
            }
            bisect_crossing(&d, lo_r, hi_r, false)
        } else {
            bisect_crossing(&d, lo, hi, true)
        }
    };
    if rho0 >= 0.0 {
        return Err(Error::NoNegativeRoot);
    }
    Ok(DirichletRoot {
        rho0,
        alpha: -rho0,
        residual: (d(rho0) - 1.0).abs(),
    })
}

/// Golden-section minimum of a strictly convex function, with outward
/// bracket expansion capped at the search walls. Returns (argmin, min).
/// If the function decreases monotonically into a wall, returns the wall.
fn minimize_convex(f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let mut mid = -1.0;
    let mut f_mid = f(mid);
    // Expand left.
    let mut lo = mid - 1.0;
    let mut step = 1.0;
    while lo > -RHO_WALL && f(lo) < f_mid {
        f_mid = f(lo);
        mid = lo;
        step *= 2.0;
        lo = mid - step;
    }
    lo = lo.max(-RHO_WALL);
    // Expand right.
    let mut hi = mid + 1.0;
    step = 1.0;
    while hi < RHO_WALL && f(hi) < f_mid {
        f_mid = f(hi);
        mid = hi;
        step *= 2.0;
        hi = mid + step;
    }
    hi = hi.min(RHO_WALL);

    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = hi - (hi - lo) * INV_PHI;
    let mut e = lo + (hi - lo) * INV_PHI;
    let mut fc = f(c);
    let mut fe = f(e);
    for _ in 0..200 {
        if hi - lo < 1e-12 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if fc <= fe {
            hi = e;
            e = c;
            fe = fc;
            c = hi - (hi - lo) * INV_PHI;
            fc = f(c);
        } else {
            lo = c;
            c = e;
            fc = fe;
            e = lo + (hi - lo) * INV_PHI;
            fe = f(e);
        }
    }
    let arg = 0.5 * (lo + hi);
    (arg, f(arg))
}

/// Bisects f = 1 on [lo, hi]. `decreasing` states the side: f passes 1 from
/// above when true. Runs to fp-width exhaustion so the certificate
/// |f(root) - 1| lands at the attainable minimum.
fn bisect_crossing(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, decreasing: bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let above = f(mid) > 1.0;
        if above == decreasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
