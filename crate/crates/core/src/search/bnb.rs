//! Depth-first branch-and-bound over the free path assignments.
//!
//! Node bound. Let `L` be the loads forced by the assigned (c, t) and `F` the
//! cost of fractional capacity for loads, installed above the running
//! maximum. `F` is convex and non-decreasing in the loads, and the integer
//! installation cost of any completion is at least `F` of its loads and at
//! least the integer cost of `L`. With `g` a subgradient of `F` at `L`, every
//! completion therefore costs at least
//!
//! ```text
//! max( C_int(L),  F(L) + Σ_{free (c,t)} Δ[c][t] · min_{p allowed} Σ_{e∈p} g[e][t] )
//! ```
//!
//! When no band forces deviations, worst-case loads grow as commodities are
//! added, so `L` is the partial worst-case load and `Δ` the nominal demand.
//! Otherwise `L` and `Δ` use each demand's smallest realization.

use std::time::{Duration, Instant};

use super::FixingSet;
use crate::error::Result;
use crate::evaluate::{install_capacities, install_edge, load_of, modules, RoutingState, Solution};
use crate::instance::Instance;
use crate::uncertainty::MultibandSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    Optimal,
    TimeLimit,
}

impl SearchStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchStatus::Optimal => "optimal",
            SearchStatus::TimeLimit => "time_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbResult {
    pub best: Solution,
    /// Proved lower bound over the searched neighbourhood.
    pub bound: f64,
    pub status: SearchStatus,
    pub nodes: u64,
}

struct Search<'a> {
    instance: &'a Instance,
    mb: &'a MultibandSet,
    robust: bool,
    slots: Vec<(usize, usize)>,
    allowed: Vec<Vec<usize>>,
    /// Contribution of each (c, t) to the bound loads.
    delta: Vec<Vec<f64>>,
    members: Vec<Vec<Vec<usize>>>,
    loads: Vec<Vec<f64>>,
    routing: RoutingState,
    best: Solution,
    nodes: u64,
    deadline: Option<Instant>,
    timed_out: bool,
    grad: Vec<Vec<f64>>,
}

impl<'a> Search<'a> {
    fn load(&self, e: usize, t: usize) -> f64 {
        if self.robust {
            load_of(self.instance, self.mb, t, &self.members[e][t])
        } else {
            self.members[e][t].iter().map(|&c| self.delta[c][t]).sum()
        }
    }

    fn assign(&mut self, c: usize, t: usize, p: usize) {
        self.routing.set(c, t, p);
        for i in 0..self.instance.paths[c][p].len() {
            let e = self.instance.paths[c][p][i];
            let m = &mut self.members[e][t];
            let pos = m.partition_point(|&x| x < c);
            m.insert(pos, c);
            self.loads[e][t] = self.load(e, t);
        }
    }

    fn unassign(&mut self, c: usize, t: usize, p: usize, saved: &[f64]) {
        self.routing.unset(c, t);
        for (i, &e) in self.instance.paths[c][p].iter().enumerate() {
            let m = &mut self.members[e][t];
            let pos = m.partition_point(|&x| x < c);
            m.remove(pos);
            self.loads[e][t] = saved[i];
        }
    }

    fn bound(&mut self, next_slot: usize) -> f64 {
        let inst = self.instance;
        let phi = inst.module_size;
        let mut integral = 0.0;
        let mut frac = 0.0;
        for e in 0..inst.num_edges() {
            let row = &self.loads[e];
            let req: Vec<u64> = row.iter().map(|&l| modules(l, phi)).collect();
            integral += install_edge(inst, e, &req).1;
            let g = &mut self.grad[e];
            g.iter_mut().for_each(|v| *v = 0.0);
            let mut level = 0.0f64;
            let mut arg = 0;
            for t in 0..inst.periods {
                if row[t] > level {
                    frac += inst.cost[e][t] * (row[t] - level) / phi;
                }
                if row[t] >= level {
                    level = row[t];
                    arg = t;
                }
                let step = inst.cost[e][t] - inst.cost[e].get(t + 1).copied().unwrap_or(0.0);
                g[arg] += step / phi;
            }
        }
        let mut rest = 0.0;
        for (s, &(c, t)) in self.slots.iter().enumerate().skip(next_slot) {
            let d = self.delta[c][t];
            if d == 0.0 {
                continue;
            }
            let cheapest = self.allowed[s]
                .iter()
                .map(|&p| inst.paths[c][p].iter().map(|&e| self.grad[e][t]).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            rest += d * cheapest;
        }
        integral.max(frac + rest)
    }

    fn expired(&mut self) -> bool {
        if !self.timed_out && self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.timed_out = true;
        }
        self.timed_out
    }

    fn prune(&self, bound: f64) -> bool {
        bound * (1.0 - 1e-12) >= self.best.cost
    }

    fn dfs(&mut self, slot: usize) {
        self.nodes += 1;
        if self.expired() {
            return;
        }
        if slot == self.slots.len() {
            let s = install_capacities(&self.routing, self.instance, self.mb);
            if s.cost < self.best.cost {
                self.best = s;
            }
            return;
        }
        let (c, t) = self.slots[slot];
        let choices = self.allowed[slot].clone();
        for p in choices {
            let saved: Vec<f64> = self.instance.paths[c][p].iter().map(|&e| self.loads[e][t]).collect();
            self.assign(c, t, p);
            let go = self.allowed[slot].len() == 1 || {
                let b = self.bound(slot + 1);
                !self.prune(b)
            };
            if go {
                self.dfs(slot + 1);
            }
            self.unassign(c, t, p, &saved);
            if self.timed_out {
                return;
            }
        }
    }
}

/// Exact search over the routings allowed by `fixing`. Starts from
/// `incumbent` when given, otherwise from the first allowed path everywhere.
pub fn branch_and_bound(
    instance: &Instance,
    mb: &MultibandSet,
    fixing: &FixingSet,
    time_limit: Option<Duration>,
    incumbent: Option<&Solution>,
) -> Result<BnbResult> {
    fixing.validate(instance)?;
    let start = Instant::now();
    let slots: Vec<(usize, usize)> = (0..instance.periods)
        .flat_map(|t| instance.construction_order(t).into_iter().map(move |c| (c, t)))
        .collect();
    let allowed: Vec<Vec<usize>> = slots.iter().map(|&(c, t)| fixing.allowed(instance, c, t)).collect();
    let best = match incumbent {
        Some(s) => s.clone(),
        None => {
            let mut r = RoutingState::for_instance(instance);
            for (s, &(c, t)) in slots.iter().enumerate() {
                r.set(c, t, allowed[s][0]);
            }
            install_capacities(&r, instance, mb)
        }
    };
    let robust = !mb.rule.forces_deviation();
    let delta = (0..instance.num_commodities())
        .map(|c| {
            (0..instance.periods)
                .map(|t| {
                    if robust {
                        instance.demand[c][t]
                    } else {
                        mb.low_demand(instance, c, t)
                    }
                })
                .collect()
        })
        .collect();
    let mut search = Search {
        instance,
        mb,
        robust,
        slots,
        allowed,
        delta,
        members: vec![vec![Vec::new(); instance.periods]; instance.num_edges()],
        loads: vec![vec![0.0; instance.periods]; instance.num_edges()],
        routing: RoutingState::for_instance(instance),
        best,
        nodes: 0,
        deadline: time_limit.map(|d| start + d),
        timed_out: false,
        grad: vec![vec![0.0; instance.periods]; instance.num_edges()],
    };
    let root = search.bound(0);
    if !search.prune(root) {
        search.dfs(0);
    }
    let (status, bound) = if search.timed_out {
        (SearchStatus::TimeLimit, root.min(search.best.cost))
    } else {
        (SearchStatus::Optimal, search.best.cost)
    };
    Ok(BnbResult {
        best: search.best,
        bound,
        status,
        nodes: search.nodes,
    })
}

/// Root bound of the search, exposed for soundness checks: the bound of the
/// node reached by assigning `partial` (a construction-order prefix).
pub fn node_bound(instance: &Instance, mb: &MultibandSet, fixing: &FixingSet, partial: &RoutingState) -> f64 {
    let slots: Vec<(usize, usize)> = (0..instance.periods)
        .flat_map(|t| instance.construction_order(t).into_iter().map(move |c| (c, t)))
        .collect();
    let allowed: Vec<Vec<usize>> = slots.iter().map(|&(c, t)| fixing.allowed(instance, c, t)).collect();
    let robust = !mb.rule.forces_deviation();
    let delta = (0..instance.num_commodities())
        .map(|c| {
            (0..instance.periods)
                .map(|t| if robust { instance.demand[c][t] } else { mb.low_demand(instance, c, t) })
                .collect()
        })
        .collect();
    let dummy = Solution {
        routing: RoutingState::for_instance(instance),
        installs: Vec::new(),
        cost: f64::INFINITY,
    };
    let mut search = Search {
        instance,
        mb,
        robust,
        slots,
        allowed,
        delta,
        members: vec![vec![Vec::new(); instance.periods]; instance.num_edges()],
        loads: vec![vec![0.0; instance.periods]; instance.num_edges()],
        routing: RoutingState::for_instance(instance),
        best: dummy,
        nodes: 0,
        deadline: None,
        timed_out: false,
        grad: vec![vec![0.0; instance.periods]; instance.num_edges()],
    };
    let mut next = 0;
    for i in 0..search.slots.len() {
        let (c, t) = search.slots[i];
        match partial.get(c, t) {
            Some(p) => {
                search.assign(c, t, p);
                next = i + 1;
            }
            None => break,
        }
    }
    search.bound(next)
}
