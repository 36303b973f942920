//! Discretization on a logarithmic wealth grid.
//!
//! The redistribution operator maps the point mass at `x` to the pair
//! `x/(1+gamma)` and `x*(1+gamma)`, i.e. it shifts log-wealth by exactly
//! `-lambda` and `+lambda` with `lambda = log(1+gamma)`. On a grid whose step
//! divides `lambda` the operator is therefore an *exact* pair of integer
//! shifts: no interpolation, no discretization error in the dynamics. The only
//! approximation anywhere in this module is the placement of the requested
//! wealth window onto lattice points.
//!
//! Cell `i` of a [`GridDistribution`] lives at `x_i = exp((base_index + i) *
//! step)`. Densities are nonnegative; signed difference grids (used by the
//! stability experiment) carry `is_density = false`.

use crate::error::{Error, Result};
use crate::model::{derive_coefficients, validate_params, ModelParams};
use crate::numeric::neumaier_sum;
use serde::{Deserialize, Serialize};

use crate::closed_form::pareto_exponent;
use crate::dirichlet::ClassMix;

/// Hard ceiling on cells allocated by [`iterate`] unless the caller raises it.
pub const DEFAULT_CELL_CAP: usize = 1_000_000;

/// Ceiling on cells for a single [`make_grid`] call; wider windows are
/// almost certainly a mistyped bound rather than a real request.
const MAKE_GRID_CAP: usize = 100_000_000;

/// Lattice snapping tolerance: a window endpoint within this relative
/// distance of a lattice point is treated as sitting on it.
const SNAP_TOL: f64 = 1e-9;

/// Relative tolerance for deciding that two grids (or a grid and a parameter
/// set) share the same lattice geometry.
const ALIGN_TOL: f64 = 1e-12;

/// A function sampled on a logarithmic lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDistribution {
    /// Global index of the first cell; cell `i` sits at log-wealth
    /// `(base_index + i) * step`. Kept global so that shifts performed by the
    /// operator preserve each cell's absolute position.
    pub base_index: i64,
    /// Lattice spacing in log-wealth.
    pub step: f64,
    /// Cells per multiplicative period: `step * m == lambda`.
    pub m: usize,
    /// Log of the wealth multiplier the grid was built for.
    pub lambda: f64,
    /// Sampled values, one per cell.
    pub values: Vec<f64>,
    /// True for (nonnegative) densities, false for signed difference grids.
    pub is_density: bool,
}

impl GridDistribution {
    /// Number of cells.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True when the grid has no cells.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Log-wealth of cell `i`.
    pub fn log_x(&self, i: usize) -> f64 {
        (self.base_index + i as i64) as f64 * self.step
    }

    /// Wealth coordinate of cell `i`.
    pub fn x_at(&self, i: usize) -> f64 {
        self.log_x(i).exp()
    }
}

/// Round `t` to the nearest integer when it is within [`SNAP_TOL`] of one,
/// otherwise take the floor. Keeps `x_min` exactly on the lattice when the
/// caller passes a wealth that is a power of `1+gamma`.
pub(crate) fn snap_floor(t: f64) -> i64 {
    let r = t.round();
    if (t - r).abs() <= SNAP_TOL * t.abs().max(1.0) {
        r as i64
    } else {
        t.floor() as i64
    }
}

fn snap_ceil(t: f64) -> i64 {
    let r = t.round();
    if (t - r).abs() <= SNAP_TOL * t.abs().max(1.0) {
        r as i64
    } else {
        t.ceil() as i64
    }
}

/// Build a zero-initialized grid covering `[x_min, x_max]` with `m` cells per
/// factor of `e^lambda`.
pub fn make_grid_with_lambda(
    lambda: f64,
    m: usize,
    x_min: f64,
    x_max: f64,
) -> Result<GridDistribution> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "lambda must be finite and positive, got {lambda}"
        )));
    }
    if m == 0 {
        return Err(Error::OutOfRange("cells per period must be >= 1".into()));
    }
    if !x_min.is_finite() || !x_max.is_finite() {
        return Err(Error::NonFinite("grid bounds".into()));
    }
    if x_min <= 0.0 || x_min >= x_max {
        return Err(Error::OutOfRange(format!(
            "need 0 < x_min < x_max, got [{x_min}, {x_max}]"
        )));
    }
    let h = lambda / m as f64;
    let j_lo = snap_floor(x_min.ln() / h);
    let j_hi = snap_ceil(x_max.ln() / h);
    let cells = (j_hi - j_lo + 1) as usize;
    if cells > MAKE_GRID_CAP {
        return Err(Error::ResourceLimit {
            needed: cells,
            cap: MAKE_GRID_CAP,
        });
    }
    Ok(GridDistribution {
        base_index: j_lo,
        step: h,
        m,
        lambda,
        values: vec![0.0; cells],
        is_density: true,
    })
}

/// Build a zero-initialized grid matched to `params`' multiplier.
pub fn make_grid(params: &ModelParams, m: usize, x_min: f64, x_max: f64) -> Result<GridDistribution> {
    validate_params(params.p, params.gamma, params.kappa)?;
    let c = derive_coefficients(params);
    make_grid_with_lambda(c.lambda, m, x_min, x_max)
}

/// Discrete weighted L1 norm `h * sum_i |f_i| * x_i`, the lattice analogue of
/// `integral |f(x)| x d(log x) = integral |f| dx`.
pub fn discrete_l1(g: &GridDistribution) -> f64 {
    let h = g.step;
    h * neumaier_sum((0..g.len()).map(|i| g.values[i].abs() * g.x_at(i)))
}

/// Check that `g` was built on the lattice implied by `lambda`.
fn check_alignment(g: &GridDistribution, lambda: f64, what: &str) -> Result<()> {
    let span = g.step * g.m as f64;
    if (g.lambda - lambda).abs() > ALIGN_TOL * lambda || (span - lambda).abs() > ALIGN_TOL * lambda
    {
        return Err(Error::AlignmentMismatch(format!(
            "{what}: grid period {span:.17e} (lambda {:.17e}) vs required {lambda:.17e}",
            g.lambda
        )));
    }
    Ok(())
}

/// One application of the dissipative redistribution operator.
///
/// Support grows by `m` cells on each side; `base_index` drops by `m` so
/// every retained cell keeps its absolute position. The output at global
/// index `G` is `b * f(G - m) + a * f(G + m)`. For nonnegative input the
/// weighted mass of each cell is split into `b * (1+gamma)` and
/// `a / (1+gamma)` portions, which sum to exactly `1/kappa`, so
/// `discrete_l1(out) == discrete_l1(in) / kappa` up to rounding.
pub fn apply_operator(g: &GridDistribution, params: &ModelParams) -> Result<GridDistribution> {
    validate_params(params.p, params.gamma, params.kappa)?;
    let c = derive_coefficients(params);
    check_alignment(g, c.lambda, "apply_operator")?;

    let m = g.m;
    let len = g.len();
    let new_len = len + 2 * m;
    let mut values = vec![0.0f64; new_len];
    for (j, out) in values.iter_mut().enumerate() {
        // Output cell j is global base - m + j; it receives the upward shift
        // from global position (base - m + j) - m = old local j - 2m and the
        // downward shift from old local j.
        let up = if j >= 2 * m && j - 2 * m < len {
            g.values[j - 2 * m]
        } else {
            0.0
        };
        let down = if j < len { g.values[j] } else { 0.0 };
        *out = c.b * up + c.a * down;
    }
    Ok(GridDistribution {
        base_index: g.base_index - m as i64,
        step: g.step,
        m,
        lambda: g.lambda,
        values,
        is_density: g.is_density,
    })
}

/// Which root of the characteristic equation a fixed-point grid realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionBranch {
    /// The decaying root `rho_0 < 0`: the physical Pareto-tail solution.
    Sound,
    /// The second root `rho_1`: grows relative to the sound branch and is
    /// useful only for exercising the operator algebra.
    Growing,
}

/// Sample `scale * x^rho * M(log x)` on a grid, where `M` is a positive
/// `lambda`-periodic modulation given by one value per sub-cell.
///
/// The modulation index is taken from the *global* cell index mod `m`, so the
/// sampled function is a genuine function of position: applying the operator
/// (which shifts by whole multiples of `m`) reproduces it exactly on interior
/// cells, for any modulation.
pub fn pareto_fixed_point(
    params: &ModelParams,
    m: usize,
    x_min: f64,
    x_max: f64,
    modulation: &[f64],
    scale: f64,
    branch: SolutionBranch,
) -> Result<GridDistribution> {
    if modulation.len() != m {
        return Err(Error::OutOfRange(format!(
            "modulation needs exactly m = {m} entries, got {}",
            modulation.len()
        )));
    }
    for (i, &v) in modulation.iter().enumerate() {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::OutOfRange(format!(
                "modulation[{i}] must be finite and positive, got {v}"
            )));
        }
    }
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "scale must be finite and positive, got {scale}"
        )));
    }
    let report = pareto_exponent(params)?;
    let rho = match branch {
        SolutionBranch::Sound => report.rho0,
        SolutionBranch::Growing => report.rho1,
    };
    let mut grid = make_grid(params, m, x_min, x_max)?;
    for i in 0..grid.len() {
        let global = grid.base_index + i as i64;
        let phase = global.rem_euclid(m as i64) as usize;
        grid.values[i] = scale * (rho * grid.log_x(i)).exp() * modulation[phase];
    }
    Ok(grid)
}

/// Relative L1 defect of `g` as a fixed point of the operator on interior
/// cells (those whose operator image does not depend on values outside the
/// grid). Absolute defect when the interior mass vanishes.
///
/// The dissipation factor is part of the operator's coefficients, so the
/// power-law solutions satisfy `W f = f` as written; no rescaling is applied
/// before comparing.
pub fn residual(g: &GridDistribution, params: &ModelParams) -> Result<f64> {
    let m = g.m;
    if g.len() < 2 * m + 1 {
        return Err(Error::EmptyInterior);
    }
    let out = apply_operator(g, params)?;
    let h = g.step;
    // Interior in input-local indices; the image of input cell i sits at
    // output-local i + m.
    let interior = m..g.len() - m;
    let num = h * neumaier_sum(
        interior
            .clone()
            .map(|i| (out.values[i + m] - g.values[i]).abs() * g.x_at(i)),
    );
    let den = h * neumaier_sum(interior.map(|i| g.values[i].abs() * g.x_at(i)));
    if den == 0.0 {
        Ok(num)
    } else {
        Ok(num / den)
    }
}

/// Distances and per-step contraction ratios recorded by [`iterate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    /// `distances[k] = discrete_l1(g_k)`, length `steps + 1`.
    pub distances: Vec<f64>,
    /// `ratios[k] = distances[k+1] / distances[k]`, skipping zero
    /// denominators.
    pub ratios: Vec<f64>,
    /// Number of operator applications performed.
    pub steps: usize,
    /// Caller-supplied truncation allowance; [`iterate`] itself reports 0.
    pub epsilon: f64,
}

/// Apply the operator `n` times, recording the L1 norm before and after every
/// step. `cell_cap` bounds the final support size (the support grows by `2m`
/// cells per step).
pub fn iterate(
    g0: &GridDistribution,
    params: &ModelParams,
    n: usize,
    cell_cap: usize,
) -> Result<(GridDistribution, ConvergenceTrace)> {
    validate_params(params.p, params.gamma, params.kappa)?;
    let c = derive_coefficients(params);
    check_alignment(g0, c.lambda, "iterate")?;
    let needed = g0.len() + 2 * g0.m * n;
    if needed > cell_cap {
        return Err(Error::ResourceLimit {
            needed,
            cap: cell_cap,
        });
    }
    let mut g = g0.clone();
    let mut distances = Vec::with_capacity(n + 1);
    distances.push(discrete_l1(&g));
    for _ in 0..n {
        g = apply_operator(&g, params)?;
        distances.push(discrete_l1(&g));
    }
    let mut ratios = Vec::with_capacity(n);
    for k in 0..n {
        if distances[k] > 0.0 {
            ratios.push(distances[k + 1] / distances[k]);
        }
    }
    let trace = ConvergenceTrace {
        distances,
        ratios,
        steps: n,
        epsilon: 0.0,
    };
    Ok((g, trace))
}

/// Per-class integer shift counts for a mix on a shared lattice.
///
/// Each class moves log-wealth by `log(1 + gamma_i)`; the mix is
/// representable on a grid of step `h` only when every such move is a whole
/// number of cells. Returns one shift count per class, or
/// [`Error::AlignmentMismatch`] naming the first incommensurate class.
pub fn mix_shifts(mix: &ClassMix, step: f64) -> Result<Vec<usize>> {
    let mut shifts = Vec::with_capacity(mix.entries.len());
    for (i, e) in mix.entries.iter().enumerate() {
        let lambda_i = e.gamma.ln_1p();
        let s = lambda_i / step;
        let r = s.round();
        if (s - r).abs() > ALIGN_TOL * s.max(1.0) || r < 1.0 {
            return Err(Error::AlignmentMismatch(format!(
                "class {i} (gamma = {}) moves {s:.17e} cells per step; \
                 mixes need whole positive cell counts",
                e.gamma
            )));
        }
        shifts.push(r as usize);
    }
    Ok(shifts)
}

/// One application of the multi-class redistribution operator.
///
/// Class `i` contributes an upward shift by `s_i` cells with weight
/// `p_i / (kappa (1+gamma_i))` and a downward shift with weight
/// `q_i (1+gamma_i) / kappa`; the support pads by the largest shift on both
/// sides. Weighted mass again contracts by exactly `1/kappa` for nonnegative
/// input.
pub fn apply_mix_operator(g: &GridDistribution, mix: &ClassMix) -> Result<GridDistribution> {
    let shifts = mix_shifts(mix, g.step)?;
    let pad = *shifts.iter().max().expect("mix has at least one class") as i64;
    let len = g.len() as i64;
    let new_len = (len + 2 * pad) as usize;
    let mut values = vec![0.0f64; new_len];
    let old = |i: i64| -> f64 {
        if (0..len).contains(&i) {
            g.values[i as usize]
        } else {
            0.0
        }
    };
    for (j, out) in values.iter_mut().enumerate() {
        // Output cell j is global base - pad + j.
        let mut acc = 0.0;
        for (e, &s) in mix.entries.iter().zip(&shifts) {
            let s = s as i64;
            let up_weight = e.p / (mix.kappa * (1.0 + e.gamma));
            let down_weight = e.q * (1.0 + e.gamma) / mix.kappa;
            acc += up_weight * old(j as i64 - pad - s);
            acc += down_weight * old(j as i64 - pad + s);
        }
        *out = acc;
    }
    Ok(GridDistribution {
        base_index: g.base_index - pad,
        step: g.step,
        m: g.m,
        lambda: g.lambda,
        values,
        is_density: g.is_density,
    })
}

/// Cell-wise sum of two grids on the same lattice, over the union of their
/// supports.
pub fn add(x: &GridDistribution, y: &GridDistribution) -> Result<GridDistribution> {
    let scale = x.step.max(y.step);
    if (x.step - y.step).abs() > ALIGN_TOL * scale
        || (x.lambda - y.lambda).abs() > ALIGN_TOL * x.lambda.max(y.lambda)
        || x.m != y.m
    {
        return Err(Error::AlignmentMismatch(format!(
            "add: steps {:.17e} vs {:.17e}, m {} vs {}",
            x.step, y.step, x.m, y.m
        )));
    }
    let base = x.base_index.min(y.base_index);
    let end = (x.base_index + x.len() as i64).max(y.base_index + y.len() as i64);
    let mut values = vec![0.0f64; (end - base) as usize];
    for (i, &v) in x.values.iter().enumerate() {
        values[(x.base_index - base) as usize + i] += v;
    }
    for (i, &v) in y.values.iter().enumerate() {
        values[(y.base_index - base) as usize + i] += v;
    }
    Ok(GridDistribution {
        base_index: base,
        step: x.step,
        m: x.m,
        lambda: x.lambda,
        values,
        is_density: x.is_density && y.is_density,
    })
}
