//! Agent-level stochastic realization of the dynamics.
//!
//! Dissipation is realized as kill-and-reinject: each step an agent is killed
//! with probability 1 - 1/kappa and respawned at a fixed wealth, otherwise it
//! bets and its wealth is multiplied or divided by 1 + gamma. The expected
//! agent density above the reinjection point then evolves by the dissipative
//! operator plus a point source, so the stationary tail carries the same
//! x^rho0 law the grid and closed forms produce.
//!
//! Randomness is counter-based: the draw for (agent, step) is a pure function
//! of (seed, agent index, step index) — one RNG stream per agent, two 64-bit
//! draws per step (kill, then bet; both consumed even when the kill hits).
//! Results are therefore bit-identical no matter how agents are scheduled
//! across threads.

use crate::dirichlet::ClassMix;
use crate::error::{Error, Result};
use crate::estimators::{default_hill_k, hill_estimator, TailEstimate};
use crate::model::{validate_params, ModelParams};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

/// A fixed-size population of agents, wealths stored as logarithms so that
/// hundreds of multiplicative steps neither overflow nor lose precision.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentPopulation {
    log_wealths: Vec<f64>,
    seed: u64,
    step_count: u64,
    reinject_at: f64,
}

/// Words of ChaCha output consumed per agent per step: two u64 draws.
const WORDS_PER_STEP: u128 = 4;

fn unit(x: u64) -> f64 {
    // 53 high bits -> [0, 1) with the usual equidistant grid.
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn agent_rng(seed: u64, agent: usize) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(agent as u64);
    rng
}

fn check_reinject(reinject_at: f64) -> Result<()> {
    if !reinject_at.is_finite() || reinject_at <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "reinjection wealth must be finite and positive, got {reinject_at}"
        )));
    }
    Ok(())
}

/// One agent-step in log-wealth space. Both draws are always consumed so the
/// stream position stays a pure function of the step index.
#[inline]
fn advance(
    lw: f64,
    u_kill: f64,
    u_bet: f64,
    kill_prob: f64,
    p: f64,
    lambda: f64,
    ln_reinject: f64,
) -> f64 {
    if u_kill < kill_prob {
        ln_reinject
    } else if u_bet < p {
        lw + lambda
    } else {
        lw - lambda
    }
}

/// Per-class bet outcomes, cumulative over the interleaved categorical
/// distribution (p1, q1, p2, q2, ...). A single-class mix reduces to exactly
/// the scalar comparison `u < p`, so scalar and mix runs agree bit for bit.
fn bet_table(mix: &ClassMix) -> Vec<(f64, f64)> {
    let mut table = Vec::with_capacity(2 * mix.entries.len());
    let mut cum = 0.0;
    for e in &mix.entries {
        let lambda_i = e.gamma.ln_1p();
        cum += e.p;
        table.push((cum, lambda_i));
        cum += e.q;
        table.push((cum, -lambda_i));
    }
    table
}

#[inline]
fn advance_mix(
    lw: f64,
    u_kill: f64,
    u_bet: f64,
    kill_prob: f64,
    table: &[(f64, f64)],
    ln_reinject: f64,
) -> f64 {
    if u_kill < kill_prob {
        return ln_reinject;
    }
    for &(threshold, delta) in table {
        if u_bet < threshold {
            return lw + delta;
        }
    }
    // Weights sum to 1 within validation tolerance; a draw past the last
    // threshold lands in the final class's loss branch.
    lw + table.last().expect("nonempty mix").1
}

impl AgentPopulation {
    /// A population of `n_agents` agents, all starting at the reinjection
    /// wealth, with no steps taken.
    pub fn new(n_agents: usize, seed: u64, reinject_at: f64) -> Result<Self> {
        if n_agents == 0 {
            return Err(Error::OutOfRange("population must be nonempty".into()));
        }
        check_reinject(reinject_at)?;
        Ok(AgentPopulation {
            log_wealths: vec![reinject_at.ln(); n_agents],
            seed,
            step_count: 0,
            reinject_at,
        })
    }

    pub fn len(&self) -> usize {
        self.log_wealths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_wealths.is_empty()
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Current wealths in currency units.
    pub fn wealths(&self) -> Vec<f64> {
        self.log_wealths.iter().map(|lw| lw.exp()).collect()
    }
}

/// Advance every agent by one step under single-class dynamics.
///
/// Uses the draws for step index `pop.step_count()`, so interleaving calls
/// with [`run_mc`] on the same seed replays the identical trajectory.
pub fn mc_step(pop: &AgentPopulation, params: &ModelParams) -> Result<AgentPopulation> {
    validate_params(params.p, params.gamma, params.kappa)?;
    let kill_prob = 1.0 - 1.0 / params.kappa;
    let lambda = params.gamma.ln_1p();
    let ln_reinject = pop.reinject_at.ln();
    let word_pos = pop.step_count as u128 * WORDS_PER_STEP;
    let log_wealths: Vec<f64> = pop
        .log_wealths
        .par_iter()
        .enumerate()
        .map(|(i, &lw)| {
            let mut rng = agent_rng(pop.seed, i);
            rng.set_word_pos(word_pos);
            let u_kill = unit(rng.next_u64());
            let u_bet = unit(rng.next_u64());
            advance(lw, u_kill, u_bet, kill_prob, params.p, lambda, ln_reinject)
        })
        .collect();
    Ok(AgentPopulation {
        log_wealths,
        seed: pop.seed,
        step_count: pop.step_count + 1,
        reinject_at: pop.reinject_at,
    })
}

/// Advance every agent by one step under multi-class dynamics: each agent
/// draws its class and outcome from the interleaved categorical distribution.
pub fn mc_step_mix(pop: &AgentPopulation, mix: &ClassMix) -> Result<AgentPopulation> {
    let kill_prob = 1.0 - 1.0 / mix.kappa;
    let table = bet_table(mix);
    let ln_reinject = pop.reinject_at.ln();
    let word_pos = pop.step_count as u128 * WORDS_PER_STEP;
    let log_wealths: Vec<f64> = pop
        .log_wealths
        .par_iter()
        .enumerate()
        .map(|(i, &lw)| {
            let mut rng = agent_rng(pop.seed, i);
            rng.set_word_pos(word_pos);
            let u_kill = unit(rng.next_u64());
            let u_bet = unit(rng.next_u64());
            advance_mix(lw, u_kill, u_bet, kill_prob, &table, ln_reinject)
        })
        .collect();
    Ok(AgentPopulation {
        log_wealths,
        seed: pop.seed,
        step_count: pop.step_count + 1,
        reinject_at: pop.reinject_at,
    })
}

fn check_run_lengths(n_steps: usize, burn_in: usize) -> Result<()> {
    if n_steps <= burn_in {
        return Err(Error::OutOfRange(format!(
            "n_steps ({n_steps}) must exceed burn_in ({burn_in})"
        )));
    }
    Ok(())
}

/// Run the single-class simulation and estimate the stationary tail.
///
/// All agents start at `reinject_at`; `burn_in` declares how many steps are
/// regarded as transient and must be strictly less than `n_steps` — the
/// samples are the final-state wealths, read once the tail has formed.
/// Returns the wealths (agent order, deterministic for a fixed seed
/// regardless of thread count) and a Hill estimate on the top `hill_k`
/// (default: top 1%) order statistics.
///
/// # Errors
///
/// [`Error::StationarityUnavailable`] at kappa = 1: without dissipation the
/// invariant density has alpha = 1 and is non-normalizable, so a stationary
/// tail estimate does not exist.
pub fn run_mc(
    params: &ModelParams,
    n_agents: usize,
    n_steps: usize,
    burn_in: usize,
    seed: u64,
    reinject_at: f64,
    hill_k: Option<usize>,
) -> Result<(Vec<f64>, TailEstimate)> {
    validate_params(params.p, params.gamma, params.kappa)?;
    if params.kappa == 1.0 {
        return Err(Error::StationarityUnavailable);
    }
    check_run_lengths(n_steps, burn_in)?;
    check_reinject(reinject_at)?;
    if n_agents == 0 {
        return Err(Error::OutOfRange("population must be nonempty".into()));
    }
    let kill_prob = 1.0 - 1.0 / params.kappa;
    let lambda = params.gamma.ln_1p();
    let ln_reinject = reinject_at.ln();
    let wealths: Vec<f64> = (0..n_agents)
        .into_par_iter()
        .map(|i| {
            let mut rng = agent_rng(seed, i);
            let mut lw = ln_reinject;
            for _ in 0..n_steps {
                let u_kill = unit(rng.next_u64());
                let u_bet = unit(rng.next_u64());
                lw = advance(lw, u_kill, u_bet, kill_prob, params.p, lambda, ln_reinject);
            }
            lw.exp()
        })
        .collect();
    let k = hill_k.unwrap_or_else(|| default_hill_k(n_agents));
    let estimate = hill_estimator(&wealths, k)?;
    Ok((wealths, estimate))
}

/// Multi-class analogue of [`run_mc`]. A one-class mix reproduces the
/// single-class run bit for bit.
pub fn run_mc_mix(
    mix: &ClassMix,
    n_agents: usize,
    n_steps: usize,
    burn_in: usize,
    seed: u64,
    reinject_at: f64,
    hill_k: Option<usize>,
) -> Result<(Vec<f64>, TailEstimate)> {
    if mix.kappa == 1.0 {
        return Err(Error::StationarityUnavailable);
    }
    check_run_lengths(n_steps, burn_in)?;
    check_reinject(reinject_at)?;
    if n_agents == 0 {
        return Err(Error::OutOfRange("population must be nonempty".into()));
    }
    let kill_prob = 1.0 - 1.0 / mix.kappa;
    let table = bet_table(mix);
    let ln_reinject = reinject_at.ln();
    let wealths: Vec<f64> = (0..n_agents)
        .into_par_iter()
        .map(|i| {
            let mut rng = agent_rng(seed, i);
            let mut lw = ln_reinject;
            for _ in 0..n_steps {
                let u_kill = unit(rng.next_u64());
                let u_bet = unit(rng.next_u64());
                lw = advance_mix(lw, u_kill, u_bet, kill_prob, &table, ln_reinject);
            }
            lw.exp()
        })
        .collect();
    let k = hill_k.unwrap_or_else(|| default_hill_k(n_agents));
    let estimate = hill_estimator(&wealths, k)?;
    Ok((wealths, estimate))
}
