//! Seeded simulation of the induced walk.
//!
//! Randomness comes from ChaCha8. Trial `i` of a run with seed `s` draws from
//! the generator seeded with `s` (via `seed_from_u64`) and switched to stream
//! `i`, so trials are independent of each other and of scheduling. Per-trial
//! results are reduced in trial order, which makes an [`Estimate`]
//! bit-identical between sequential and parallel execution.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::network::{Network, VertexId};
use crate::par::{map_indexed, Execution};
use crate::pendant::AugmentedNetwork;

pub const DEFAULT_STEP_CAP: u64 = 10_000_000;

/// Source of uniforms for one trial.
#[derive(Debug, Clone)]
pub struct WalkRng(ChaCha8Rng);

impl WalkRng {
    pub fn new(seed: u64) -> Self {
        WalkRng::for_trial(seed, 0)
    }

    pub fn for_trial(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        WalkRng(rng)
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn next_unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// One move of the walk from vertex index `i`, by inverse CDF over the
/// stored neighbor order.
pub fn step_index(net: &Network, i: usize, rng: &mut WalkRng) -> usize {
    let cumulative = net.cumulative_conductance(i);
    let threshold = rng.next_unit() * cumulative[cumulative.len() - 1];
    let k = cumulative
        .partition_point(|&c| c <= threshold)
        .min(cumulative.len() - 1);
    net.neighbors(i)[k].0
}

/// Moves from `current` to a neighbor `z` with probability `C_yz / C_y`.
pub fn step(net: &Network, current: &VertexId, rng: &mut WalkRng) -> Result<VertexId> {
    let i = net.index_of(current)?;
    Ok(net.label(step_index(net, i, rng)).clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    HitTarget,
    CapReached,
}

/// A recorded walk `X_0, X_1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkTrace {
    pub start: VertexId,
    pub steps: Vec<VertexId>,
    pub terminal_reason: Termination,
}

/// Walks from `start` until the first time `j ≥ 1` it stands on `target`, or
/// until `step_cap` moves have been made.
pub fn sample_walk(
    net: &Network,
    start: &VertexId,
    target: &VertexId,
    step_cap: u64,
    rng: &mut WalkRng,
) -> Result<WalkTrace> {
    let (mut at, t) = (net.index_of(start)?, net.index_of(target)?);
    let mut steps = vec![start.clone()];
    let mut terminal_reason = Termination::CapReached;
    for _ in 0..step_cap {
        at = step_index(net, at, rng);
        steps.push(net.label(at).clone());
        if at == t {
            terminal_reason = Termination::HitTarget;
            break;
        }
    }
    Ok(WalkTrace {
        start: start.clone(),
        steps,
        terminal_reason,
    })
}

fn first_passage(
    net: &Network,
    start: usize,
    target: usize,
    cap: u64,
    rng: &mut WalkRng,
) -> Option<u64> {
    let mut at = start;
    for j in 1..=cap {
        at = step_index(net, at, rng);
        if at == target {
            return Some(j);
        }
    }
    None
}

/// Trial count, seed, per-trial step cap and execution mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub trials: u64,
    pub seed: u64,
    pub step_cap: u64,
    pub execution: Execution,
}

impl SimParams {
    pub fn new(trials: u64, seed: u64) -> Self {
        SimParams {
            trials,
            seed,
            step_cap: DEFAULT_STEP_CAP,
            execution: Execution::default(),
        }
    }

    pub fn with_step_cap(mut self, step_cap: u64) -> Self {
        self.step_cap = step_cap;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.step_cap == 0 {
            return Err(Error::InvalidArgument("step cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// Monte Carlo point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`; 0 for a single trial.
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
    pub capped_trials: u64,
}

impl Estimate {
    fn from_counts(counts: &[u64], seed: u64) -> Self {
        let n = counts.len() as f64;
        let sum: u128 = counts.iter().map(|&c| c as u128).sum();
        let mean = sum as f64 / n;
        let std_error = if counts.len() > 1 {
            let ss: f64 = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum();
            (ss / (n - 1.0)).sqrt() / n.sqrt()
        } else {
            0.0
        };
        Estimate {
            mean,
            std_error,
            trials: counts.len() as u64,
            seed,
            capped_trials: 0,
        }
    }

    /// `|mean - reference| ≤ k · std_error`.
    pub fn within(&self, reference: f64, k: f64) -> bool {
        (self.mean - reference).abs() <= k * self.std_error
    }
}

fn run_trials<F>(params: &SimParams, trial: F) -> Result<Vec<u64>>
where
    F: Fn(&mut WalkRng) -> Option<u64> + Sync + Send,
{
    params.validate()?;
    let n = usize::try_from(params.trials)
        .map_err(|_| Error::InvalidArgument("too many trials".into()))?;
    let outcomes = map_indexed(params.execution, n, |i| {
        trial(&mut WalkRng::for_trial(params.seed, i as u64))
    });
    let capped = outcomes.iter().filter(|o| o.is_none()).count() as u64;
    if capped > 0 {
        return Err(Error::CapExceeded {
            capped,
            trials: params.trials,
            step_cap: params.step_cap,
        });
    }
    Ok(outcomes.into_iter().flatten().collect())
}

/// Estimates `E_z[T_z^+]`.
pub fn estimate_return_time(net: &Network, z: &VertexId, params: &SimParams) -> Result<Estimate> {
    let zi = net.index_of(z)?;
    let counts = run_trials(params, |rng| {
        first_passage(net, zi, zi, params.step_cap, rng)
    })?;
    Ok(Estimate::from_counts(&counts, params.seed))
}

/// Estimates `E_x[T_y]`; exactly 0 when `x = y`.
pub fn estimate_hitting_time(
    net: &Network,
    x: &VertexId,
    y: &VertexId,
    params: &SimParams,
) -> Result<Estimate> {
    let (xi, yi) = (net.index_of(x)?, net.index_of(y)?);
    if xi == yi {
        params.validate()?;
        return Ok(Estimate {
            mean: 0.0,
            std_error: 0.0,
            trials: params.trials,
            seed: params.seed,
            capped_trials: 0,
        });
    }
    let counts = run_trials(params, |rng| {
        first_passage(net, xi, yi, params.step_cap, rng)
    })?;
    Ok(Estimate::from_counts(&counts, params.seed))
}

/// Outcome of one walk from the anchor until it first reaches the pendant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExcursionTrial {
    /// Times the walk stood on the anchor, including time 0.
    pub visits: u64,
    /// Completed round trips anchor -> anchor inside the base network.
    pub excursions: u64,
    pub steps: u64,
}

/// Runs one excursion trial on `aug`, or `None` if `step_cap` is reached.
pub fn excursion_trial(
    aug: &AugmentedNetwork,
    step_cap: u64,
    rng: &mut WalkRng,
) -> Option<ExcursionTrial> {
    let g = aug.network();
    let anchor = g
        .index_of(aug.anchor())
        .expect("anchor is in the augmented network");
    let pendant = g
        .index_of(aug.pendant())
        .expect("pendant is in the augmented network");
    let mut at = anchor;
    let mut visits = 1;
    for steps in 1..=step_cap {
        at = step_index(g, at, rng);
        if at == pendant {
            return Some(ExcursionTrial {
                visits,
                excursions: visits - 1,
                steps,
            });
        }
        if at == anchor {
            visits += 1;
        }
    }
    None
}

/// Excursion-count estimate plus the empirical count distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcursionStats {
    pub estimate: Estimate,
    /// Chance of stepping to the pendant on each anchor visit, `c / (C_z + c)`.
    pub success_probability: f64,
    /// Number of trials that completed each excursion count.
    pub counts: BTreeMap<u64, u64>,
}

/// Pearson goodness-of-fit result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareFit {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

impl ChiSquareFit {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value >= significance
    }
}

impl ExcursionStats {
    /// Fits the counts to `Geometric(success_probability)` on `{0, 1, ...}`.
    ///
    /// Leading bins are kept while their expected count is at least 5; the
    /// rest are pooled into a tail bin. `None` if fewer than two bins result.
    pub fn chi_square_geometric(&self) -> Option<ChiSquareFit> {
        let n = self.estimate.trials as f64;
        let p = self.success_probability;
        let q = 1.0 - p;
        let mut bins: Vec<(f64, f64)> = Vec::new();
        let mut k = 0u64;
        loop {
            let expected = n * p * q.powi(k as i32);
            let tail_after = n * q.powi(k as i32 + 1);
            if expected < 5.0 || tail_after < 5.0 {
                break;
            }
            let observed = self.counts.get(&k).copied().unwrap_or(0) as f64;
            bins.push((observed, expected));
            k += 1;
        }
        let tail_observed = self.counts.range(k..).map(|(_, &c)| c).sum::<u64>() as f64;
        bins.push((tail_observed, n * q.powi(k as i32)));
        if bins.len() < 2 {
            return None;
        }
        let statistic = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
        let degrees_of_freedom = bins.len() - 1;
        let dist = ChiSquared::new(degrees_of_freedom as f64).ok()?;
        Some(ChiSquareFit {
            statistic,
            degrees_of_freedom,
            p_value: dist.sf(statistic),
        })
    }
}

/// Counts excursions from the anchor before the walk first reaches the
/// pendant. The mean converges to `C_z / c`.
pub fn estimate_excursions(aug: &AugmentedNetwork, params: &SimParams) -> Result<ExcursionStats> {
    let counts = run_trials(params, |rng| {
        excursion_trial(aug, params.step_cap, rng).map(|t| t.excursions)
    })?;
    let mut histogram = BTreeMap::new();
    for &c in &counts {
        *histogram.entry(c).or_insert(0) += 1;
    }
    let cz = aug.base().vertex_conductance(aug.anchor())?;
    let c = aug.pendant_conductance();
    Ok(ExcursionStats {
        estimate: Estimate::from_counts(&counts, params.seed),
        success_probability: c / (cz + c),
        counts: histogram,
    })
}
