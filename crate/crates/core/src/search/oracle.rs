use crate::error::{Error, Result};
use crate::evaluate::{install_capacities, RoutingState, Solution};
use crate::instance::Instance;
use crate::uncertainty::MultibandSet;

pub const DEFAULT_ORACLE_CAP: f64 = 1e7;

/// Number of complete routings, `Π_c |P_c|^|T|`.
pub fn routing_count(instance: &Instance) -> f64 {
    instance
        .paths
        .iter()
        .map(|p| (p.len() as f64).powi(instance.periods as i32))
        .product()
}

/// Evaluates every complete routing and returns the cheapest; among equal
/// costs the lexicographically smallest routing (commodity-major) wins.
pub fn oracle_enumerate(instance: &Instance, mb: &MultibandSet, cap: f64) -> Result<Solution> {
    let count = routing_count(instance);
    if count > cap {
        return Err(Error::OracleCap { routings: count, cap });
    }
    if let Some(c) = instance.paths.iter().position(Vec::is_empty) {
        return Err(Error::EmptyPathSet(instance.network.commodities[c].id.clone()));
    }
    let slots: Vec<(usize, usize)> = (0..instance.num_commodities())
        .flat_map(|c| (0..instance.periods).map(move |t| (c, t)))
        .collect();
    let mut digits = vec![0usize; slots.len()];
    let mut routing = RoutingState::for_instance(instance);
    for &(c, t) in &slots {
        routing.set(c, t, 0);
    }
    let mut best: Option<Solution> = None;
    loop {
        let s = install_capacities(&routing, instance, mb);
        if best.as_ref().map_or(true, |b| s.cost < b.cost) {
            best = Some(s);
        }
        // odometer, last slot fastest
        let mut i = slots.len();
        loop {
            if i == 0 {
                return Ok(best.expect("at least one routing"));
            }
            i -= 1;
            let (c, t) = slots[i];
            digits[i] += 1;
            if digits[i] < instance.paths[c].len() {
                routing.set(c, t, digits[i]);
                break;
            }
            digits[i] = 0;
            routing.set(c, t, 0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::sp_baseline;
    use crate::instance::fixtures::{single_edge, small};
    use crate::instance::{BaseNetwork, Commodity, Edge};
    use crate::uncertainty::{build_multiband, BandSpec};

    #[test]
    fn cheaper_parallel_edge_wins() {
        let e = |id: &str, c| Edge {
            id: id.into(),
            endpoints: (0, 1),
            module_cost: c,
            module_capacity: 10.0,
        };
        let net = BaseNetwork {
            vertices: vec!["s".into(), "t".into()],
            edges: vec![e("x", 5.0), e("y", 3.0)],
            commodities: vec![Commodity {
                id: "c".into(),
                source: 0,
                target: 1,
                demand: 4.0,
            }],
        };
        let inst = Instance {
            name: "parallel".into(),
            network: net,
            periods: 1,
            demand: vec![vec![4.0]],
            cost: vec![vec![5.0], vec![3.0]],
            module_size: 10.0,
            paths: vec![vec![vec![0], vec![1]]],
        };
        let mb = build_multiband(&inst, &BandSpec::nominal()).unwrap();
        let s = oracle_enumerate(&inst, &mb, DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(s.cost, 3.0);
        assert_eq!(s.routing.get(0, 0), Some(1));
    }

    #[test]
    fn zero_demand_costs_nothing() {
        let inst = single_edge(&[vec![0.0, 0.0]], vec![1.0, 1.0], 1.0);
        let mb = build_multiband(&inst, &BandSpec::default()).unwrap();
        assert_eq!(oracle_enumerate(&inst, &mb, DEFAULT_ORACLE_CAP).unwrap().cost, 0.0);
    }

    #[test]
    fn cap_is_enforced() {
        let inst = small(1, 6, 5, 3, 3);
        let mb = build_multiband(&inst, &BandSpec::default()).unwrap();
        assert!(matches!(oracle_enumerate(&inst, &mb, 10.0), Err(Error::OracleCap { .. })));
    }

    #[test]
    fn never_worse_than_baseline() {
        for seed in 0..15 {
            let inst = small(seed, 5, 3, 2, 3);
            let mb = build_multiband(&inst, &BandSpec::default()).unwrap();
            let o = oracle_enumerate(&inst, &mb, DEFAULT_ORACLE_CAP).unwrap();
            assert!(o.cost <= sp_baseline(&inst, &mb).cost);
        }
    }
}
