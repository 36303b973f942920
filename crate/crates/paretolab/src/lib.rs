//! Numerics for a dissipative multiplicative wealth model.
//!
//! Agents repeatedly stake a fixed fraction of their wealth on biased
//! multiplicative bets while a global dissipation factor `kappa >= 1`
//! drains total mass each round. The stationary wealth density develops
//! a Pareto tail `f(x) ~ x^{-(1+alpha)}`; this crate computes the tail
//! exponent in closed form, evolves densities on logarithmic grids where
//! the evolution operator acts by exact integer shifts, runs deterministic
//! parallel Monte Carlo populations, and fits tail indices from either
//! samples (Hill) or gridded densities (log-log regression).
//!
//! The modules are layered bottom-up:
//!
//! - [`model`]: parameter validation and the `(lambda, a, b)` coefficients
//!   shared by every downstream computation.
//! - [`closed_form`]: characteristic roots of `a y^2 - y + b = 0` and the
//!   Pareto exponent, evaluated cancellation-free.
//! - [`dirichlet`]: heterogeneous-class mixtures and the root of their
//!   generalized Dirichlet characteristic function.
//! - [`log_grid`]: densities on `log`-spaced grids, the shift operator,
//!   power-law fixed points, and iteration traces.
//! - [`monte_carlo`]: counter-based per-agent RNG streams; results are
//!   independent of thread count.
//! - [`estimators`]: Hill estimator and log-log slope regression.
//! - [`experiments`]: confiscation/stability runs and the closed-form
//!   vs operator equivalence check.
//! - [`io`]: CSV and JSON readers/writers that round-trip `f64` exactly.

pub mod closed_form;
pub mod dirichlet;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod io;
pub mod log_grid;
pub mod model;
pub mod monte_carlo;

mod numeric;

pub use closed_form::{
    alpha_printed_forms, characteristic_roots, dalpha_dkappa_fd, exponent_sweep, pareto_exponent,
    ExponentReport, SweepParameter, SweepPoint,
};
pub use dirichlet::{characteristic_value, find_tail_root, ClassEntry, ClassMix, DirichletRoot};
pub use error::{Error, Result};
pub use estimators::{default_hill_k, hill_estimator, loglog_slope, TailEstimate};
pub use experiments::{
    confiscation_experiment, equivalence_check, measure_convergence_rate, tail_mass_threshold,
    EquivalenceReport, StabilityReport, StabilityVerdict,
};
pub use log_grid::{
    add, apply_mix_operator, apply_operator, discrete_l1, iterate, make_grid,
    make_grid_with_lambda, mix_shifts, pareto_fixed_point, residual, ConvergenceTrace,
    GridDistribution, SolutionBranch, DEFAULT_CELL_CAP,
};
pub use model::{derive_coefficients, validate_params, DerivedCoefficients, ModelParams};
pub use monte_carlo::{mc_step, mc_step_mix, run_mc, run_mc_mix, AgentPopulation};
