//! Closed-form nominal LP relaxation.
//!
//! With fractional capacities and a routing that keeps every commodity on one
//! path, loads never decrease over time and the relaxed cost separates by
//! commodity: each demand increment `d[t] - d[t-1]` pays the module cost of
//! its path at period `t`, divided by the module size. Each commodity thus has
//! a best single path `p*`, and routing everything on `p*` gives the
//! relaxation value.

use crate::error::{Error, Result};
use crate::evaluate::RoutingState;
use crate::instance::{CommodityIdx, EdgeIdx, Instance};
use crate::uncertainty::MultibandSet;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Fractional cost of routing every commodity on its `p*`.
    pub value: f64,
    /// A lower bound on every integer solution, `<= value`; equal to `value`
    /// when all periods rank the paths of each commodity alike.
    pub bound: f64,
    /// `p*` per commodity.
    pub paths: Vec<usize>,
    pub routing: RoutingState,
    /// Fractional new modules `capacities[e][t]`.
    pub capacities: Vec<Vec<f64>>,
}

/// Cost of fractional capacity on edge `e` covering `row[t]`, installing
/// only above the running maximum.
pub fn edge_fractional_cost(instance: &Instance, e: EdgeIdx, row: &[f64]) -> f64 {
    let mut level = 0.0f64;
    let mut cost = 0.0;
    for (t, &l) in row.iter().enumerate() {
        if l > level {
            cost += instance.cost[e][t] * (l - level) / instance.module_size;
            level = l;
        }
    }
    cost
}

/// Fractional-capacity cost of loads `[e][t]`.
pub fn fractional_cost(instance: &Instance, loads: &[Vec<f64>]) -> f64 {
    loads
        .iter()
        .enumerate()
        .map(|(e, row)| edge_fractional_cost(instance, e, row))
        .sum()
}

/// Nominal loads `[e][t]` of the assigned part of a routing, summed in
/// commodity order.
pub fn nominal_loads(instance: &Instance, routing: &RoutingState) -> Vec<Vec<f64>> {
    let mut loads = vec![vec![0.0; instance.periods]; instance.num_edges()];
    for c in 0..instance.num_commodities() {
        for t in 0..instance.periods {
            if let Some(p) = routing.get(c, t) {
                for &e in &instance.paths[c][p] {
                    loads[e][t] += instance.demand[c][t];
                }
            }
        }
    }
    loads
}

/// Relaxed cost of keeping commodity `c` on path `p` in every period.
pub fn single_path_cost(instance: &Instance, c: CommodityIdx, p: usize) -> f64 {
    let path = &instance.paths[c][p];
    let mut prev = 0.0;
    let mut cost = 0.0;
    for t in 0..instance.periods {
        let d = instance.demand[c][t];
        cost += (d - prev) / instance.module_size * instance.path_cost(path, t);
        prev = d;
    }
    cost
}

/// Index of the smallest `key(p)` over `P[c]`, ties by edge sequence.
fn argmin_path(instance: &Instance, c: CommodityIdx, key: impl Fn(usize) -> f64) -> usize {
    (0..instance.paths[c].len())
        .min_by(|&a, &b| {
            key(a)
                .total_cmp(&key(b))
                .then_with(|| instance.paths[c][a].cmp(&instance.paths[c][b]))
        })
        .expect("non-empty path set")
}

pub fn nominal_lp_optimum(instance: &Instance) -> Result<LpSolution> {
    if let Some(c) = instance.paths.iter().position(Vec::is_empty) {
        return Err(Error::EmptyPathSet(instance.network.commodities[c].id.clone()));
    }
    let nc = instance.num_commodities();
    let periods = instance.periods;
    let paths: Vec<usize> = (0..nc)
        .map(|c| argmin_path(instance, c, |p| single_path_cost(instance, c, p)))
        .collect();
    let routing = RoutingState::constant(&paths, periods);
    let loads = nominal_loads(instance, &routing);
    let value = fractional_cost(instance, &loads);
    let capacities = loads
        .iter()
        .map(|row| {
            let mut level = 0.0f64;
            row.iter()
                .map(|&l| {
                    let add = (l - level).max(0.0) / instance.module_size;
                    level = level.max(l);
                    add
                })
                .collect()
        })
        .collect();

    // Summation by parts: any capacity plan pays Σ_t (γ[t] - γ[t+1]) times
    // its cumulative level, which is at least the load of period t.
    let mut bound = 0.0;
    for c in 0..nc {
        for t in 0..periods {
            let d = instance.demand[c][t];
            if d == 0.0 {
                continue;
            }
            let best = instance.paths[c]
                .iter()
                .map(|path| {
                    path.iter()
                        .map(|&e| instance.cost[e][t] - instance.cost[e].get(t + 1).copied().unwrap_or(0.0))
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min);
            bound += d * best / instance.module_size;
        }
    }

    Ok(LpSolution {
        value,
        bound: bound.min(value),
        paths,
        routing,
        capacities,
    })
}

/// A lower bound on the robust optimum. Without forced downward deviations
/// every worst-case load is at least the nominal load and the nominal bound
/// applies; otherwise each demand is replaced by its smallest realization.
pub fn lower_bound(instance: &Instance, mb: &MultibandSet, lp: &LpSolution) -> f64 {
    if !mb.rule.forces_negative() {
        return lp.bound;
    }
    let mut low = instance.clone();
    for c in 0..instance.num_commodities() {
        for t in 0..instance.periods {
            low.demand[c][t] = mb.low_demand(instance, c, t);
        }
    }
    nominal_lp_optimum(&low).map_or(0.0, |l| l.bound.min(lp.bound))
}

/// Checks that `partial` assigns every (c, t) with t < τ, a prefix of the
/// construction order at τ and nothing later. Returns τ and the prefix
/// length, or `(periods, 0)` for a complete routing.
pub fn prefix_position(instance: &Instance, partial: &RoutingState) -> Result<(usize, usize)> {
    let nc = instance.num_commodities();
    if partial.num_commodities() != nc || (nc > 0 && partial.periods() != instance.periods) {
        return Err(Error::MalformedPrefix("routing dimensions do not match the instance".into()));
    }
    let mut frontier = None;
    for t in 0..instance.periods {
        let order = instance.construction_order(t);
        let filled = order.iter().take_while(|&&c| partial.get(c, t).is_some()).count();
        if let Some(&c) = order[filled..].iter().find(|&&c| partial.get(c, t).is_some()) {
            return Err(Error::MalformedPrefix(format!(
                "{} is assigned at t={} before earlier commodities in construction order",
                instance.network.commodities[c].id,
                t + 1
            )));
        }
        match frontier {
            Some(_) if filled > 0 => {
                return Err(Error::MalformedPrefix(format!(
                    "period t={} is assigned before an earlier period is complete",
                    t + 1
                )))
            }
            None if filled < nc => frontier = Some((t, filled)),
            _ => {}
        }
    }
    for c in 0..nc {
        for t in 0..instance.periods {
            if let Some(p) = partial.get(c, t) {
                if p >= instance.paths[c].len() {
                    return Err(Error::MalformedPrefix(format!(
                        "{} has no path {} at t={}",
                        instance.network.commodities[c].id,
                        p + 1,
                        t + 1
                    )));
                }
            }
        }
    }
    Ok(frontier.unwrap_or((instance.periods, 0)))
}

/// Fractional cost of the prefix completed with `p*` for every unassigned
/// (c, t).
pub fn fixed_prefix_lp_value(instance: &Instance, partial: &RoutingState) -> Result<f64> {
    prefix_position(instance, partial)?;
    let lp = nominal_lp_optimum(instance)?;
    let mut full = partial.clone();
    for c in 0..instance.num_commodities() {
        for t in 0..instance.periods {
            if full.get(c, t).is_none() {
                full.set(c, t, lp.paths[c]);
            }
        }
    }
    Ok(fractional_cost(instance, &nominal_loads(instance, &full)))
}

/// Incremental form of [`fixed_prefix_lp_value`] for construction in
/// Algorithm-2 order: starts from the all-`p*` routing, and each step moves
/// one (c, t) from `p*` to its chosen path.
#[derive(Debug, Clone)]
pub struct PrefixLp<'a> {
    instance: &'a Instance,
    star: &'a [usize],
    loads: Vec<Vec<f64>>,
    row_cost: Vec<f64>,
    value: f64,
    scratch: Vec<f64>,
}

impl<'a> PrefixLp<'a> {
    pub fn new(instance: &'a Instance, lp: &'a LpSolution) -> Self {
        let loads = nominal_loads(instance, &lp.routing);
        let row_cost: Vec<f64> = loads
            .iter()
            .enumerate()
            .map(|(e, row)| edge_fractional_cost(instance, e, row))
            .collect();
        let value = row_cost.iter().sum();
        PrefixLp {
            instance,
            star: &lp.paths,
            loads,
            row_cost,
            value,
            scratch: vec![0.0; instance.periods],
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    fn edge_delta(&mut self, e: EdgeIdx, t: usize, change: f64) -> f64 {
        self.scratch.copy_from_slice(&self.loads[e]);
        self.scratch[t] += change;
        edge_fractional_cost(self.instance, e, &self.scratch) - self.row_cost[e]
    }

    /// Change in value if (c, t), currently on `p*`, moved to path `p`.
    pub fn move_delta(&mut self, c: CommodityIdx, t: usize, p: usize) -> f64 {
        let s = self.star[c];
        if p == s {
            return 0.0;
        }
        let d = self.instance.demand[c][t];
        let (from, to) = (&self.instance.paths[c][s], &self.instance.paths[c][p]);
        let mut delta = 0.0;
        for &e in from.iter().filter(|e| !to.contains(e)) {
            delta += self.edge_delta(e, t, -d);
        }
        for &e in to.iter().filter(|e| !from.contains(e)) {
            delta += self.edge_delta(e, t, d);
        }
        delta
    }

    /// Moves (c, t) from `p*` to `p`.
    pub fn commit(&mut self, c: CommodityIdx, t: usize, p: usize) {
        let s = self.star[c];
        if p == s {
            return;
        }
        let d = self.instance.demand[c][t];
        let inst = self.instance;
        let (from, to) = (&inst.paths[c][s], &inst.paths[c][p]);
        for (&e, sign) in from
            .iter()
            .filter(|e| !to.contains(e))
            .map(|e| (e, -1.0))
            .chain(to.iter().filter(|e| !from.contains(e)).map(|e| (e, 1.0)))
        {
            self.loads[e][t] += sign * d;
            let c_new = edge_fractional_cost(inst, e, &self.loads[e]);
            self.value += c_new - self.row_cost[e];
            self.row_cost[e] = c_new;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::{install_capacities, RoutingState};
    use crate::instance::fixtures::{single_edge, small};
    use crate::uncertainty::{build_multiband, BandSpec};
    use rand::{Rng, SeedableRng};

    /// Every assignment of one path per commodity, constant over time.
    fn pure_routings(inst: &Instance) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for c in 0..inst.num_commodities() {
            out = out
                .into_iter()
                .flat_map(|r: Vec<usize>| {
                    (0..inst.paths[c].len()).map(move |p| {
                        let mut r = r.clone();
                        r.push(p);
                        r
                    })
                })
                .collect();
        }
        out
    }

    /// Every complete routing, one path per (c, t).
    fn all_routings(inst: &Instance) -> Vec<RoutingState> {
        let slots: Vec<(usize, usize)> = (0..inst.num_commodities())
            .flat_map(|c| (0..inst.periods).map(move |t| (c, t)))
            .collect();
        let mut out = vec![RoutingState::for_instance(inst)];
        for &(c, t) in &slots {
            out = out
                .into_iter()
                .flat_map(|r| {
                    (0..inst.paths[c].len()).map(move |p| {
                        let mut r = r.clone();
                        r.set(c, t, p);
                        r
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn increments_pay_their_period_price() {
        let inst = single_edge(&[vec![10.0, 20.0]], vec![2.0, 2.0], 10.0);
        let lp = nominal_lp_optimum(&inst).unwrap();
        assert_eq!(lp.value, 4.0);
        assert_eq!(lp.bound, 4.0);
        assert_eq!(lp.capacities, vec![vec![1.0, 1.0]]);
    }

    #[test]
    fn zero_demand_costs_nothing() {
        let inst = single_edge(&[vec![0.0, 0.0], vec![0.0, 0.0]], vec![2.0, 1.0], 10.0);
        let lp = nominal_lp_optimum(&inst).unwrap();
        assert_eq!((lp.value, lp.bound), (0.0, 0.0));
    }

    #[test]
    fn empty_path_set_is_an_error() {
        let mut inst = single_edge(&[vec![1.0]], vec![1.0], 1.0);
        inst.paths[0].clear();
        assert_eq!(nominal_lp_optimum(&inst), Err(Error::EmptyPathSet("c1".into())));
    }

    #[test]
    fn flow_never_shrinks_on_the_relaxed_routing() {
        for seed in 0..20 {
            let inst = small(seed, 5, 4, 3, 3);
            let lp = nominal_lp_optimum(&inst).unwrap();
            for c in 0..inst.num_commodities() {
                for t in 1..inst.periods {
                    assert_eq!(lp.routing.get(c, t), lp.routing.get(c, t - 1));
                    assert!(inst.demand[c][t - 1] <= inst.demand[c][t]);
                }
            }
        }
    }

    #[test]
    fn optimum_over_pure_routings_and_below_every_integer_solution() {
        for seed in 0..25 {
            let inst = small(seed, 5, 4, 3, 2);
            let mb = build_multiband(&inst, &BandSpec::nominal()).unwrap();
            let lp = nominal_lp_optimum(&inst).unwrap();
            let best = pure_routings(&inst)
                .iter()
                .map(|p| fractional_cost(&inst, &nominal_loads(&inst, &RoutingState::constant(p, inst.periods))))
                .fold(f64::INFINITY, f64::min);
            assert!((lp.value - best).abs() <= 1e-9 * best.max(1.0), "{} vs {best}", lp.value);
            assert!((lp.value - lp.bound).abs() <= 1e-9 * best.max(1.0));
            for r in all_routings(&inst) {
                assert!(lp.bound <= install_capacities(&r, &inst, &mb).cost + 1e-9);
            }
        }
    }

    #[test]
    fn empty_and_complete_prefixes() {
        let inst = small(4, 6, 4, 3, 3);
        let lp = nominal_lp_optimum(&inst).unwrap();
        let empty = RoutingState::for_instance(&inst);
        assert_eq!(fixed_prefix_lp_value(&inst, &empty).unwrap(), lp.value);
        let r = RoutingState::from_paths(
            &(0..4)
                .map(|c| (0..3).map(|t| (c + t) % inst.paths[c].len()).collect())
                .collect::<Vec<_>>(),
        );
        assert_eq!(
            fixed_prefix_lp_value(&inst, &r).unwrap(),
            fractional_cost(&inst, &nominal_loads(&inst, &r))
        );
    }

    #[test]
    fn prefix_off_the_relaxed_path_costs_at_least_the_optimum() {
        for seed in 0..30 {
            let inst = small(seed, 6, 3, 2, 3);
            let lp = nominal_lp_optimum(&inst).unwrap();
            let first = inst.construction_order(0)[0];
            for p in 0..inst.paths[first].len() {
                let mut r = RoutingState::for_instance(&inst);
                r.set(first, 0, p);
                let v = fixed_prefix_lp_value(&inst, &r).unwrap();
                assert!(v >= lp.bound - 1e-9);
                // the best completion at fractional capacity is no cheaper than the bound
                let best = all_routings(&inst)
                    .into_iter()
                    .filter(|x| x.get(first, 0) == Some(p))
                    .map(|x| fractional_cost(&inst, &nominal_loads(&inst, &x)))
                    .fold(f64::INFINITY, f64::min);
                assert!(best >= lp.bound - 1e-9 && v >= best - 1e-9);
            }
        }
    }

    #[test]
    fn malformed_prefixes_are_rejected() {
        let inst = small(2, 5, 3, 2, 2);
        let order = inst.construction_order(0);
        let mut r = RoutingState::for_instance(&inst);
        r.set(order[1], 0, 0);
        assert!(matches!(fixed_prefix_lp_value(&inst, &r), Err(Error::MalformedPrefix(_))));
        let mut r = RoutingState::for_instance(&inst);
        r.set(inst.construction_order(1)[0], 1, 0);
        assert!(matches!(fixed_prefix_lp_value(&inst, &r), Err(Error::MalformedPrefix(_))));
    }

    #[test]
    fn incremental_values_track_full_recomputation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for seed in 0..20 {
            let inst = small(seed, 7, 6, 3, 4);
            let lp = nominal_lp_optimum(&inst).unwrap();
            let mut inc = PrefixLp::new(&inst, &lp);
            let mut partial = RoutingState::for_instance(&inst);
            assert!((inc.value() - lp.value).abs() < 1e-9);
            for t in 0..inst.periods {
                for c in inst.construction_order(t) {
                    let p = rng.gen_range(0..inst.paths[c].len());
                    let predicted = inc.value() + inc.move_delta(c, t, p);
                    inc.commit(c, t, p);
                    partial.set(c, t, p);
                    let full = fixed_prefix_lp_value(&inst, &partial).unwrap();
                    assert!((predicted - full).abs() < 1e-9 * full.max(1.0));
                    assert!((inc.value() - full).abs() < 1e-9 * full.max(1.0));
                }
            }
        }
    }
}
