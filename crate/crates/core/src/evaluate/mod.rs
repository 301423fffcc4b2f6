//! Worst-case evaluation of a fixed routing.
//!
//! For every edge and period the commodities whose chosen path uses the edge
//! form one robust capacity constraint. Its worst-case deviation is found by
//! [`transport::solve`] with the band counts of the constraint's profile; the
//! minimum-cost installation then follows by installing each module as late
//! as possible, which is optimal because module costs never increase.

mod transport;

pub use transport::{solve as solve_transport, Transport};

use crate::instance::{CommodityIdx, EdgeIdx, Instance};
use crate::uncertainty::{MultibandSet, Profile};

/// One path index per (commodity, period), possibly partial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RoutingState {
    assign: Vec<Vec<Option<usize>>>,
}

impl RoutingState {
    pub fn empty(commodities: usize, periods: usize) -> Self {
        RoutingState {
            assign: vec![vec![None; periods]; commodities],
        }
    }

    pub fn for_instance(instance: &Instance) -> Self {
        Self::empty(instance.num_commodities(), instance.periods)
    }

    /// Complete routing from `paths[c][t]`.
    pub fn from_paths(paths: &[Vec<usize>]) -> Self {
        RoutingState {
            assign: paths
                .iter()
                .map(|row| row.iter().map(|&p| Some(p)).collect())
                .collect(),
        }
    }

    /// Path `p[c]` for every period.
    pub fn constant(p: &[usize], periods: usize) -> Self {
        RoutingState {
            assign: p.iter().map(|&p| vec![Some(p); periods]).collect(),
        }
    }

    pub fn get(&self, c: CommodityIdx, t: usize) -> Option<usize> {
        self.assign[c][t]
    }

    pub fn set(&mut self, c: CommodityIdx, t: usize, p: usize) {
        self.assign[c][t] = Some(p);
    }

    pub fn unset(&mut self, c: CommodityIdx, t: usize) {
        self.assign[c][t] = None;
    }

    pub fn num_commodities(&self) -> usize {
        self.assign.len()
    }

    pub fn periods(&self) -> usize {
        self.assign.first().map_or(0, Vec::len)
    }

    pub fn assigned(&self) -> usize {
        self.assign.iter().flatten().filter(|a| a.is_some()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.assign.iter().flatten().all(Option::is_some)
    }

    /// `paths[c][t]`, or `None` if some (c, t) is unassigned.
    pub fn paths(&self) -> Option<Vec<Vec<usize>>> {
        self.assign
            .iter()
            .map(|row| row.iter().copied().collect::<Option<Vec<_>>>())
            .collect()
    }
}

/// A complete routing with its installation plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub routing: RoutingState,
    /// New modules `installs[e][t]`.
    pub installs: Vec<Vec<u64>>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DevResult {
    pub value: f64,
    /// Commodities crossing the constraint, ascending.
    pub members: Vec<CommodityIdx>,
    /// Band position assigned to each member.
    pub band: Vec<usize>,
    pub profile: Profile,
}

/// Commodities whose path at `t` uses `e`, ascending.
pub fn members(instance: &Instance, routing: &RoutingState, e: EdgeIdx, t: usize) -> Vec<CommodityIdx> {
    (0..instance.num_commodities())
        .filter(|&c| {
            routing
                .get(c, t)
                .is_some_and(|p| instance.paths[c][p].contains(&e))
        })
        .collect()
}

/// Member lists `[e][t]` of every constraint.
pub fn all_members(instance: &Instance, routing: &RoutingState) -> Vec<Vec<Vec<CommodityIdx>>> {
    let mut out = vec![vec![Vec::new(); instance.periods]; instance.num_edges()];
    for c in 0..instance.num_commodities() {
        for t in 0..instance.periods {
            if let Some(p) = routing.get(c, t) {
                for &e in &instance.paths[c][p] {
                    out[e][t].push(c);
                }
            }
        }
    }
    out
}

/// Worst-case deviation of a constraint at period `t` with the given members.
pub fn dev_of(mb: &MultibandSet, t: usize, members: &[CommodityIdx]) -> DevResult {
    let profile = mb.profile(members.len());
    let values: Vec<&[f64]> = members.iter().map(|&c| mb.delta(c, t)).collect();
    let tr = transport::solve(&values, &profile.theta, mb.zero());
    DevResult {
        value: tr.value,
        members: members.to_vec(),
        band: tr.band,
        profile,
    }
}

pub fn dev(e: EdgeIdx, t: usize, routing: &RoutingState, instance: &Instance, mb: &MultibandSet) -> DevResult {
    dev_of(mb, t, &members(instance, routing, e, t))
}

/// Nominal load plus worst-case deviation, floored at 0.
pub fn load_of(instance: &Instance, mb: &MultibandSet, t: usize, members: &[CommodityIdx]) -> f64 {
    if members.is_empty() {
        return 0.0;
    }
    let nominal: f64 = members.iter().map(|&c| instance.demand[c][t]).sum();
    (nominal + dev_of(mb, t, members).value).max(0.0)
}

pub fn worst_load(e: EdgeIdx, t: usize, routing: &RoutingState, instance: &Instance, mb: &MultibandSet) -> f64 {
    load_of(instance, mb, t, &members(instance, routing, e, t))
}

/// Worst-case loads `[e][t]` of all constraints.
pub fn worst_loads(instance: &Instance, mb: &MultibandSet, routing: &RoutingState) -> Vec<Vec<f64>> {
    all_members(instance, routing)
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(t, m)| load_of(instance, mb, t, m))
                .collect()
        })
        .collect()
}

/// Modules needed to carry `load`, ignoring relative rounding noise.
pub fn modules(load: f64, module_size: f64) -> u64 {
    let r = load / module_size;
    if r <= 0.0 {
        return 0;
    }
    (r - 1e-9 * r.max(1.0)).ceil().max(0.0) as u64
}

/// Delayed installation for per-period requirements `req[t]` on edge `e`:
/// returns new modules per period and their cost.
pub fn install_edge(instance: &Instance, e: EdgeIdx, req: &[u64]) -> (Vec<u64>, f64) {
    let mut installed = 0;
    let mut cost = 0.0;
    let y = req
        .iter()
        .enumerate()
        .map(|(t, &r)| {
            let add = r.saturating_sub(installed);
            installed += add;
            cost += instance.cost[e][t] * add as f64;
            add
        })
        .collect();
    (y, cost)
}

/// Minimum-cost installation for worst-case loads `[e][t]`.
pub fn install_for_loads(instance: &Instance, loads: &[Vec<f64>]) -> (Vec<Vec<u64>>, f64) {
    let mut cost = 0.0;
    let installs = loads
        .iter()
        .enumerate()
        .map(|(e, row)| {
            let req: Vec<u64> = row.iter().map(|&l| modules(l, instance.module_size)).collect();
            let (y, c) = install_edge(instance, e, &req);
            cost += c;
            y
        })
        .collect();
    (installs, cost)
}

/// Completes a routing to its cheapest feasible installation.
pub fn install_capacities(routing: &RoutingState, instance: &Instance, mb: &MultibandSet) -> Solution {
    assert!(routing.is_complete(), "install_capacities needs a complete routing");
    let loads = worst_loads(instance, mb, routing);
    let (installs, cost) = install_for_loads(instance, &loads);
    Solution {
        routing: routing.clone(),
        installs,
        cost,
    }
}

pub fn solution_cost(instance: &Instance, s: &Solution) -> f64 {
    let mut cost = 0.0;
    for (e, row) in s.installs.iter().enumerate() {
        for (t, &y) in row.iter().enumerate() {
            cost += instance.cost[e][t] * y as f64;
        }
    }
    cost
}

/// Every commodity on its first (shortest) path in every period.
pub fn sp_baseline(instance: &Instance, mb: &MultibandSet) -> Solution {
    let routing = RoutingState::constant(&vec![0; instance.num_commodities()], instance.periods);
    install_capacities(&routing, instance, mb)
}

/// Checks assignments and cumulative capacity; returns one message per
/// violation.
pub fn check_feasible(s: &Solution, instance: &Instance, mb: &MultibandSet) -> (bool, Vec<String>) {
    let mut out = Vec::new();
    let nc = instance.num_commodities();
    if s.routing.num_commodities() != nc || (nc > 0 && s.routing.periods() != instance.periods) {
        out.push("routing dimensions do not match the instance".to_string());
        return (false, out);
    }
    for c in 0..nc {
        for t in 0..instance.periods {
            match s.routing.get(c, t) {
                None => out.push(format!("unassigned: {}, t={}", instance.network.commodities[c].id, t + 1)),
                Some(p) if p >= instance.paths[c].len() => {
                    out.push(format!("unknown path: {}, t={}", instance.network.commodities[c].id, t + 1))
                }
                Some(_) => {}
            }
        }
    }
    if s.installs.len() != instance.num_edges() || s.installs.iter().any(|r| r.len() != instance.periods) {
        out.push("installation dimensions do not match the instance".to_string());
    }
    if !out.is_empty() {
        return (false, out);
    }
    let loads = worst_loads(instance, mb, &s.routing);
    for e in 0..instance.num_edges() {
        let mut cumulative = 0;
        for t in 0..instance.periods {
            cumulative += s.installs[e][t];
            if cumulative < modules(loads[e][t], instance.module_size) {
                out.push(format!(
                    "capacity short: {}, t={} (load {}, capacity {})",
                    instance.network.edges[e].id,
                    t + 1,
                    loads[e][t],
                    cumulative as f64 * instance.module_size
                ));
            }
        }
    }
    (out.is_empty(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::single_edge;
    use crate::uncertainty::{build_multiband, BandSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn example3(mu: f64) -> (Instance, MultibandSet, RoutingState) {
        let inst = single_edge(&[vec![200.0], vec![300.0]], vec![1.0], 100.0);
        let mb = build_multiband(&inst, &BandSpec::interval(0.1, mu)).unwrap();
        let r = RoutingState::constant(&[0, 0], 1);
        (inst, mb, r)
    }

    #[test]
    fn both_demands_deviate() {
        let (inst, mb, r) = example3(1.0);
        let d = dev(0, 0, &r, &inst, &mb);
        assert_eq!(d.value, 50.0);
        assert_eq!(d.profile.get(1), 2);
        assert_eq!(worst_load(0, 0, &r, &inst, &mb), 550.0);
    }

    #[test]
    fn one_demand_deviates() {
        let (inst, mb, r) = example3(0.5);
        let d = dev(0, 0, &r, &inst, &mb);
        assert_eq!(d.value, 30.0);
        assert_eq!(d.band, vec![1, 2]);
        assert_eq!(worst_load(0, 0, &r, &inst, &mb), 530.0);
    }

    #[test]
    fn empty_constraint() {
        let (inst, mb, _) = example3(1.0);
        let r = RoutingState::empty(2, 1);
        assert_eq!(dev(0, 0, &r, &inst, &mb).value, 0.0);
        assert_eq!(worst_load(0, 0, &r, &inst, &mb), 0.0);
    }

    #[test]
    fn delayed_install() {
        let inst = single_edge(&[vec![250.0, 240.0, 400.0]], vec![2.0, 1.0, 1.0], 100.0);
        let mb = build_multiband(&inst, &BandSpec::nominal()).unwrap();
        let r = RoutingState::constant(&[0], 3);
        let s = install_capacities(&r, &inst, &mb);
        assert_eq!(s.installs, vec![vec![3, 0, 1]]);
        assert_eq!(s.cost, 7.0);
        assert_eq!(solution_cost(&inst, &s), 7.0);
    }

    #[test]
    fn delayed_install_is_minimal_over_all_schedules() {
        let req = [3u64, 3, 4];
        let gamma = [2.0, 1.0, 1.0];
        let mut best = f64::INFINITY;
        // cumulative levels m1 <= m2 <= m3 <= 4 covering req
        for m1 in 0..=4u64 {
            for m2 in m1..=4 {
                for m3 in m2..=4 {
                    if m1 >= req[0] && m2 >= req[1] && m3 >= req[2] {
                        let c = gamma[0] * m1 as f64 + gamma[1] * (m2 - m1) as f64 + gamma[2] * (m3 - m2) as f64;
                        best = best.min(c);
                    }
                }
            }
        }
        let inst = single_edge(&[vec![1.0; 3]], gamma.to_vec(), 1.0);
        assert_eq!(install_edge(&inst, 0, &req).1, best);
    }

    #[test]
    fn zero_loads_install_nothing() {
        let inst = single_edge(&[vec![0.0, 0.0]], vec![3.0, 2.0], 10.0);
        let mb = build_multiband(&inst, &BandSpec::default()).unwrap();
        let s = sp_baseline(&inst, &mb);
        assert_eq!(s.installs, vec![vec![0, 0]]);
        assert_eq!(s.cost, 0.0);
    }

    #[test]
    fn modules_ignore_rounding_noise() {
        assert_eq!(modules(300.00000000000006, 100.0), 3);
        assert_eq!(modules(300.1, 100.0), 4);
        assert_eq!(modules(0.0, 100.0), 0);
        assert_eq!(modules(1e-3, 100.0), 1);
    }

    #[test]
    fn decremented_install_is_infeasible() {
        let (inst, mb, r) = example3(1.0);
        let mut s = install_capacities(&r, &inst, &mb);
        assert!(check_feasible(&s, &inst, &mb).0);
        s.installs[0][0] -= 1;
        let (ok, v) = check_feasible(&s, &inst, &mb);
        assert!(!ok);
        assert!(v[0].starts_with("capacity short: ab, t=1"), "{v:?}");
    }

    #[test]
    fn network_without_commodities_is_feasible() {
        let inst = single_edge(&[], vec![1.0], 1.0);
        let mb = build_multiband(&inst, &BandSpec::default()).unwrap();
        let s = sp_baseline(&inst, &mb);
        assert!(check_feasible(&s, &inst, &mb).0);
    }

    /// Exhaustive maximum over all band assignments with exact counts.
    fn brute_dev(mb: &MultibandSet, t: usize, members: &[usize]) -> f64 {
        let k = mb.num_bands();
        let theta = mb.profile(members.len()).theta;
        let n = members.len();
        let mut best = f64::NEG_INFINITY;
        for code in 0..k.pow(n as u32) {
            let mut x = code;
            let mut count = vec![0; k];
            let mut v = 0.0;
            for &c in members {
                let b = x % k;
                x /= k;
                count[b] += 1;
                v += mb.delta(c, t)[b];
            }
            if count == theta {
                best = best.max(v);
            }
        }
        best
    }

    fn random_case(rng: &mut impl Rng) -> (Instance, MultibandSet) {
        let n = rng.gen_range(0..=6);
        let demands: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(1..=40) as f64]).collect();
        let inst = single_edge(&demands, vec![1.0], 10.0);
        let spec = BandSpec {
            fractions: vec![-0.5, -0.25, 0.0, 0.25, 0.5],
            lower: vec![rng.gen_range(0.0..0.3), 0.0, 0.0, rng.gen_range(0.0..0.3), 0.0],
            upper: vec![0.5, rng.gen_range(0.0..1.0), 1.0, 0.6, rng.gen_range(0.0..0.5)],
        };
        (inst.clone(), build_multiband(&inst, &spec).unwrap())
    }

    #[test]
    fn dev_matches_exhaustive_assignment() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let (inst, mb) = random_case(&mut rng);
            let all: Vec<usize> = (0..inst.num_commodities()).collect();
            let d = dev_of(&mb, 0, &all);
            assert_eq!(d.value, brute_dev(&mb, 0, &all));
            let witness: f64 = d.members.iter().zip(&d.band).map(|(&c, &b)| mb.delta(c, 0)[b]).sum();
            assert_eq!(witness, d.value);
        }
    }

    #[test]
    fn dev_is_homogeneous() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let (inst, mb) = random_case(&mut rng);
            let mut scaled = mb.clone();
            for row in scaled.bands.delta.iter_mut().flatten() {
                for v in row.iter_mut() {
                    *v *= 4.0;
                }
            }
            let all: Vec<usize> = (0..inst.num_commodities()).collect();
            assert_eq!(dev_of(&scaled, 0, &all).value, 4.0 * dev_of(&mb, 0, &all).value);
        }
    }

    proptest! {
        #[test]
        fn delayed_install_never_costs_more_than_naive(
            req in prop::collection::vec(0u64..20, 1..6),
            steps in prop::collection::vec(0.0f64..3.0, 1..6),
        ) {
            let t = req.len().min(steps.len());
            let req = &req[..t];
            let mut gamma = vec![20.0];
            for s in &steps[1..t] {
                let last = *gamma.last().unwrap();
                gamma.push((last - s).max(0.0));
            }
            let inst = single_edge(&[vec![1.0; t]], gamma.clone(), 1.0);
            let naive: f64 = (0..t)
                .map(|i| gamma[i] * req[i].saturating_sub(if i == 0 { 0 } else { req[i - 1] }) as f64)
                .sum();
            prop_assert!(install_edge(&inst, 0, req).1 <= naive);
        }
    }
}
