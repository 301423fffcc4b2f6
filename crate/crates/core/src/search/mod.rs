//! Relaxation-induced neighbourhood fixing, exact search over path
//! assignments, a brute-force oracle, and the hybrid colony pipeline.

mod bnb;
mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

pub use bnb::{branch_and_bound, node_bound, BnbResult, SearchStatus};
pub use oracle::{oracle_enumerate, routing_count, DEFAULT_ORACLE_CAP};

use crate::ants::{run_colony, ColonyConfig, ColonyResult};
use crate::error::{Error, Result};
use crate::evaluate::Solution;
use crate::instance::Instance;
use crate::relaxation::{nominal_lp_optimum, LpSolution};
use crate::uncertainty::MultibandSet;

/// Path variables pinned by the neighbourhood rules.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixingSet {
    /// `(c, p, t)` triples whose path variable is fixed to zero.
    pub zero: BTreeSet<(usize, usize, usize)>,
    /// `(c, t)` pairs fixed to a single path.
    pub one: BTreeMap<(usize, usize), usize>,
}

impl FixingSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.zero.is_empty() && self.one.is_empty()
    }

    /// Paths of `c` still open at period `t`.
    pub fn allowed(&self, instance: &Instance, c: usize, t: usize) -> Vec<usize> {
        if let Some(&p) = self.one.get(&(c, t)) {
            return vec![p];
        }
        (0..instance.paths[c].len())
            .filter(|&p| !self.zero.contains(&(c, p, t)))
            .collect()
    }

    pub fn validate(&self, instance: &Instance) -> Result<()> {
        let bad = |m: String| Err(Error::InconsistentFixing(m));
        for &(c, p, t) in &self.zero {
            if c >= instance.num_commodities() || t >= instance.periods || p >= instance.paths[c].len() {
                return bad(format!("zero fixing ({c}, {p}, {t}) is out of range"));
            }
        }
        for (&(c, t), &p) in &self.one {
            if c >= instance.num_commodities() || t >= instance.periods || p >= instance.paths[c].len() {
                return bad(format!("one fixing ({c}, {t}) -> {p} is out of range"));
            }
            if self.zero.contains(&(c, p, t)) {
                return bad(format!("path {p} of commodity {c} at t={t} is fixed to both 0 and 1"));
            }
        }
        for c in 0..instance.num_commodities() {
            for t in 0..instance.periods {
                if self.allowed(instance, c, t).is_empty() {
                    return bad(format!("every path of commodity {c} at t={t} is fixed to 0"));
                }
            }
        }
        Ok(())
    }
}

/// Fixes `x` where the incumbent and the relaxation agree to within `eps`.
///
/// The closed-form relaxation is 0/1, so for `eps < 1` a path is fixed to one
/// exactly when both route over it, and fixed to zero when neither does.
pub fn rins_fix(instance: &Instance, incumbent: &Solution, lp: &LpSolution, eps: f64) -> Result<FixingSet> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Config(format!("fixing tolerance must lie in [0, 1), got {eps}")));
    }
    let mut fixing = FixingSet::empty();
    for c in 0..instance.num_commodities() {
        for t in 0..instance.periods {
            let inc = incumbent.routing.get(c, t);
            let relax = lp.routing.get(c, t);
            for p in 0..instance.paths[c].len() {
                let xbar = if inc == Some(p) { 1.0 } else { 0.0 };
                let xlr = if relax == Some(p) { 1.0 } else { 0.0 };
                if xbar == 0.0 && xlr <= eps {
                    fixing.zero.insert((c, p, t));
                } else if xbar == 1.0 && xlr >= 1.0 - eps {
                    fixing.one.insert((c, t), p);
                }
            }
            if let Some(&p) = fixing.one.get(&(c, t)) {
                for q in (0..instance.paths[c].len()).filter(|&q| q != p) {
                    fixing.zero.insert((c, q, t));
                }
            }
        }
    }
    Ok(fixing)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridConfig {
    pub colony: ColonyConfig,
    pub epsilon: f64,
    /// Budget of the exact neighbourhood search; zero skips it.
    pub rins_time: Duration,
}

impl Default for HybridConfig {
    fn default() -> Self {
        HybridConfig {
            colony: ColonyConfig::default(),
            epsilon: 0.1,
            rins_time: Duration::from_secs(10),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridReport {
    pub colony: ColonyResult,
    pub best: Solution,
    pub aco: f64,
    pub aco_rins: f64,
    pub sp: f64,
    pub lower_bound: f64,
    pub fixed_one: usize,
    pub fixed_zero: usize,
    pub search_status: Option<SearchStatus>,
    pub search_nodes: u64,
    pub colony_time: Duration,
    pub rins_time: Duration,
}

pub fn solve_hybrid(instance: &Instance, mb: &MultibandSet, cfg: &HybridConfig) -> Result<HybridReport> {
    let colony = run_colony(instance, mb, &cfg.colony)?;
    let colony_time = colony.elapsed;
    let aco = colony.best.cost;
    let start = Instant::now();
    let lp = nominal_lp_optimum(instance)?;
    let fixing = rins_fix(instance, &colony.best, &lp, cfg.epsilon)?;
    let (best, status, nodes) = if cfg.rins_time.is_zero() {
        (colony.best.clone(), None, 0)
    } else {
        let r = branch_and_bound(instance, mb, &fixing, Some(cfg.rins_time), Some(&colony.best))?;
        (r.best, Some(r.status), r.nodes)
    };
    Ok(HybridReport {
        aco,
        aco_rins: best.cost,
        sp: colony.baseline.cost,
        lower_bound: colony.lower_bound,
        fixed_one: fixing.one.len(),
        fixed_zero: fixing.zero.len(),
        search_status: status,
        search_nodes: nodes,
        colony_time,
        rins_time: start.elapsed(),
        best,
        colony,
    })
}
