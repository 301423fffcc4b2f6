//! Randomized construction guided by trails and relaxation values.
//!
//! A move assigns path `p` to commodity `c` in period `t`. Ants assign moves
//! period by period, commodities by decreasing demand. Trails start from the
//! relaxed routing; attractiveness comes from the relaxed cost of completing
//! the current prefix after the move.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evaluate::{install_capacities, sp_baseline, RoutingState, Solution};
use crate::instance::Instance;
use crate::relaxation::{lower_bound, nominal_lp_optimum, LpSolution, PrefixLp};
use crate::uncertainty::MultibandSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbabilityRule {
    /// `α τ + (1 - α) η`
    Linear,
    /// `τ^β + η^δ`
    Canonical { beta: f64, delta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColonyConfig {
    pub alpha: f64,
    /// Ants per batch.
    pub ants: usize,
    /// Width ψ of the moving average of solution values.
    pub window: usize,
    /// Wall-clock budget; `None` runs until `max_batches`.
    pub time_limit: Option<Duration>,
    pub max_batches: Option<usize>,
    pub seed: u64,
    pub rule: ProbabilityRule,
    /// Smallest trail value; defaults to `0.1 / max_c |P_c|`.
    pub tau_floor: Option<f64>,
    pub eta_floor: f64,
    pub workers: usize,
}

impl Default for ColonyConfig {
    fn default() -> Self {
        ColonyConfig {
            alpha: 0.5,
            ants: 200,
            window: 20,
            time_limit: Some(Duration::from_secs(10)),
            max_batches: None,
            seed: 1,
            rule: ProbabilityRule::Linear,
            tau_floor: None,
            eta_floor: 0.05,
            workers: 1,
        }
    }
}

impl ColonyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config("alpha must lie in [0, 1]".into()));
        }
        if self.ants == 0 || self.window == 0 || self.workers == 0 {
            return Err(Error::Config("ants, window and workers must be at least 1".into()));
        }
        if !(self.eta_floor > 0.0 && self.eta_floor <= 1.0) {
            return Err(Error::Config("eta floor must lie in (0, 1]".into()));
        }
        if let Some(f) = self.tau_floor {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::Config("tau floor must be positive".into()));
            }
        }
        if let ProbabilityRule::Canonical { beta, delta } = self.rule {
            if !(beta >= 0.0 && delta >= 0.0 && beta.is_finite() && delta.is_finite()) {
                return Err(Error::Config("probability exponents must be finite and non-negative".into()));
            }
        }
        if self.time_limit.is_none() && self.max_batches.is_none() {
            return Err(Error::Config("the colony needs a time limit or a batch limit".into()));
        }
        Ok(())
    }
}

/// Trail value per move, `tau[c][p][t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrailMatrix {
    pub tau: Vec<Vec<Vec<f64>>>,
    /// Values before any update, the reinforcement unit of each move.
    pub initial: Vec<Vec<Vec<f64>>>,
    pub floor: f64,
}

impl TrailMatrix {
    pub fn get(&self, c: usize, p: usize, t: usize) -> f64 {
        self.tau[c][p][t]
    }

    pub fn min(&self) -> f64 {
        self.tau.iter().flatten().flatten().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovingAverage {
    width: usize,
    values: VecDeque<f64>,
}

impl MovingAverage {
    pub fn new(width: usize) -> Self {
        MovingAverage {
            width: width.max(1),
            values: VecDeque::new(),
        }
    }

    pub fn push(&mut self, v: f64) {
        if self.values.len() == self.width {
            self.values.pop_front();
        }
        self.values.push_back(v);
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Mean of the window, `None` when empty.
    pub fn mean(&self) -> Option<f64> {
        if self.values.is_empty() {
            None
        } else {
            Some(self.values.iter().sum::<f64>() / self.values.len() as f64)
        }
    }
}

pub fn default_tau_floor(instance: &Instance) -> f64 {
    0.1 / instance.max_paths().max(1) as f64
}

/// Trails from the relaxed routing: 1 on `p*`, the floor elsewhere.
pub fn init_trails(instance: &Instance, lp: &LpSolution, floor: f64) -> TrailMatrix {
    let tau: Vec<Vec<Vec<f64>>> = (0..instance.num_commodities())
        .map(|c| {
            (0..instance.paths[c].len())
                .map(|p| {
                    (0..instance.periods)
                        .map(|t| {
                            let x = if lp.routing.get(c, t) == Some(p) { 1.0 } else { 0.0 };
                            f64::max(x, floor)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    TrailMatrix {
        initial: tau.clone(),
        tau,
        floor,
    }
}

pub fn move_probabilities(tau: &[f64], eta: &[f64], alpha: f64, rule: ProbabilityRule) -> Result<Vec<f64>> {
    if tau.is_empty() || tau.len() != eta.len() {
        return Err(Error::Probability("need one trail and one attractiveness per candidate".into()));
    }
    if tau.iter().chain(eta).any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Probability("trails and attractiveness must be finite and non-negative".into()));
    }
    let weights: Vec<f64> = tau
        .iter()
        .zip(eta)
        .map(|(&t, &h)| match rule {
            ProbabilityRule::Linear => alpha * t + (1.0 - alpha) * h,
            ProbabilityRule::Canonical { beta, delta } => t.powf(beta) + h.powf(delta),
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Probability("all move weights are zero".into()));
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Maps relaxed values to attractiveness: the smallest value gets 1, the
/// largest gets `floor`, linearly in between; all 1 when values coincide
/// up to rounding.
pub fn attractiveness_from_values(values: &[f64], floor: f64) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi - lo > 1e-12 * hi.abs().max(1.0)) {
        return vec![1.0; values.len()];
    }
    values
        .iter()
        .map(|&v| floor + (1.0 - floor) * (hi - v) / (hi - lo))
        .collect()
}

/// Attractiveness of every candidate path of (c, t) after `partial`, which
/// must be a construction prefix ending just before (c, t).
pub fn attractiveness(
    instance: &Instance,
    partial: &RoutingState,
    c: usize,
    t: usize,
    eta_floor: f64,
) -> Result<Vec<f64>> {
    let values = (0..instance.paths[c].len())
        .map(|p| {
            let mut next = partial.clone();
            next.set(c, t, p);
            crate::relaxation::fixed_prefix_lp_value(instance, &next)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(attractiveness_from_values(&values, eta_floor))
}

fn sample(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// One ant: a complete routing built in construction order.
pub fn construct_routing(
    instance: &Instance,
    lp: &LpSolution,
    trails: &TrailMatrix,
    cfg: &ColonyConfig,
    rng: &mut impl Rng,
) -> RoutingState {
    let mut routing = RoutingState::for_instance(instance);
    let mut prefix = PrefixLp::new(instance, lp);
    let mut values = Vec::new();
    let mut tau = Vec::new();
    for t in 0..instance.periods {
        for c in instance.construction_order(t) {
            let n = instance.paths[c].len();
            let p = if n == 1 {
                0
            } else {
                let base = prefix.value();
                values.clear();
                tau.clear();
                for p in 0..n {
                    values.push(base + prefix.move_delta(c, t, p));
                    tau.push(trails.tau[c][p][t]);
                }
                let eta = attractiveness_from_values(&values, cfg.eta_floor);
                let probs = move_probabilities(&tau, &eta, cfg.alpha, cfg.rule)
                    .expect("trails stay above a positive floor");
                sample(&probs, rng.gen::<f64>())
            };
            prefix.commit(c, t, p);
            routing.set(c, t, p);
        }
    }
    routing
}

/// Reinforces the moves of each ant by `τ(0)·(1 - (z - LB)/(z̄ - LB))`.
///
/// `z̄` is the moving average before this batch (seeded with the batch when
/// empty). Returns `false` without touching the trails when `z̄ <= LB`.
pub fn pheromone_update(
    trails: &mut TrailMatrix,
    batch: &[(&RoutingState, f64)],
    lb: f64,
    avg: &mut MovingAverage,
) -> bool {
    if batch.is_empty() {
        return true;
    }
    let seeded = avg.is_empty();
    if seeded {
        for &(_, z) in batch {
            avg.push(z);
        }
    }
    let zbar = avg.mean().expect("non-empty window");
    let updated = zbar > lb;
    if updated {
        let mut delta: Vec<Vec<Vec<f64>>> = trails
            .tau
            .iter()
            .map(|row| row.iter().map(|v| vec![0.0; v.len()]).collect())
            .collect();
        for &(routing, z) in batch {
            let factor = 1.0 - (z - lb) / (zbar - lb);
            for (c, row) in delta.iter_mut().enumerate() {
                for t in 0..routing.periods() {
                    if let Some(p) = routing.get(c, t) {
                        row[p][t] += trails.initial[c][p][t] * factor;
                    }
                }
            }
        }
        for (tc, dc) in trails.tau.iter_mut().zip(&delta) {
            for (tp, dp) in tc.iter_mut().zip(dc) {
                for (v, d) in tp.iter_mut().zip(dp) {
                    let next = *v + d;
                    *v = if next.is_finite() { next.max(trails.floor) } else { trails.floor };
                }
            }
        }
    }
    if !seeded {
        for &(_, z) in batch {
            avg.push(z);
        }
    }
    updated
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColonyResult {
    pub best: Solution,
    pub baseline: Solution,
    pub lower_bound: f64,
    pub batches: usize,
    pub ants_built: usize,
    /// Best value after each batch.
    pub trace: Vec<f64>,
    /// Set once the moving average reached the lower bound.
    pub converged: bool,
    pub elapsed: Duration,
}

fn ant_rng(seed: u64, batch: usize, ant: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((batch as u64) << 32) | ant as u64);
    rng
}

pub fn run_colony(instance: &Instance, mb: &MultibandSet, cfg: &ColonyConfig) -> Result<ColonyResult> {
    cfg.validate()?;
    let start = Instant::now();
    let deadline = cfg.time_limit.map(|d| start + d);
    let expired = || deadline.is_some_and(|d| Instant::now() >= d);
    let lp = nominal_lp_optimum(instance)?;
    let lb = lower_bound(instance, mb, &lp);
    let floor = cfg.tau_floor.unwrap_or_else(|| default_tau_floor(instance));
    let mut trails = init_trails(instance, &lp, floor);
    let baseline = sp_baseline(instance, mb);
    let mut best = baseline.clone();
    let mut avg = MovingAverage::new(cfg.window);
    let mut trace = Vec::new();
    let mut batches = 0;
    let mut ants_built = 0;
    let mut converged = false;
    let pool = if cfg.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| Error::Config(format!("cannot start workers: {e}")))?,
        )
    } else {
        None
    };

    let build = |b: usize, a: usize, trails: &TrailMatrix| -> Option<Solution> {
        if expired() {
            return None;
        }
        let mut rng = ant_rng(cfg.seed, b, a);
        let routing = construct_routing(instance, &lp, trails, cfg, &mut rng);
        Some(install_capacities(&routing, instance, mb))
    };

    while !expired() && cfg.max_batches.is_none_or(|m| batches < m) {
        let solutions: Vec<Solution> = match &pool {
            Some(pool) => pool.install(|| {
                (0..cfg.ants)
                    .into_par_iter()
                    .map(|a| build(batches, a, &trails))
                    .collect::<Vec<_>>()
            }),
            None => {
                let mut out = Vec::with_capacity(cfg.ants);
                for a in 0..cfg.ants {
                    match build(batches, a, &trails) {
                        Some(s) => out.push(Some(s)),
                        None => break,
                    }
                }
                out
            }
        }
        .into_iter()
        .flatten()
        .collect();
        if solutions.is_empty() {
            break;
        }
        ants_built += solutions.len();
        for s in &solutions {
            if s.cost < best.cost {
                best = s.clone();
            }
        }
        let batch: Vec<(&RoutingState, f64)> = solutions.iter().map(|s| (&s.routing, s.cost)).collect();
        if !pheromone_update(&mut trails, &batch, lb, &mut avg) {
            converged = true;
        }
        batches += 1;
        trace.push(best.cost);
    }

    Ok(ColonyResult {
        best,
        baseline,
        lower_bound: lb,
        batches,
        ants_built,
        trace,
        converged,
        elapsed: start.elapsed(),
    })
}
