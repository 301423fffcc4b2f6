use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BaseNetwork, Commodity, Edge};

/// Shape of a random test network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticShape {
    pub vertices: usize,
    pub commodities: usize,
    /// Probability of each extra edge beyond a random spanning tree.
    pub density: f64,
    pub module_capacity: f64,
    pub max_cost: u32,
    pub max_demand: u32,
}

impl Default for SyntheticShape {
    fn default() -> Self {
        SyntheticShape {
            vertices: 6,
            commodities: 4,
            density: 0.35,
            module_capacity: 10.0,
            max_cost: 9,
            max_demand: 30,
        }
    }
}

/// A connected random network with integer costs and demands.
pub fn random_network(seed: u64, shape: &SyntheticShape) -> BaseNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nv = shape.vertices.max(2);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for v in 1..nv {
        edges.push((rng.gen_range(0..v), v));
    }
    for a in 0..nv {
        for b in a + 1..nv {
            if !edges.contains(&(a, b)) && rng.gen_bool(shape.density) {
                edges.push((a, b));
            }
        }
    }
    let edges = edges
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| Edge {
            id: format!("e{}", i + 1),
            endpoints: (a, b),
            module_cost: rng.gen_range(1..=shape.max_cost.max(1)) as f64,
            module_capacity: shape.module_capacity,
        })
        .collect();
    let commodities = (0..shape.commodities)
        .map(|i| {
            let s = rng.gen_range(0..nv);
            let mut t = rng.gen_range(0..nv - 1);
            if t >= s {
                t += 1;
            }
            Commodity {
                id: format!("d{}", i + 1),
                source: s,
                target: t,
                demand: rng.gen_range(1..=shape.max_demand.max(1)) as f64,
            }
        })
        .collect();
    BaseNetwork {
        vertices: (0..nv).map(|v| format!("v{}", v + 1)).collect(),
        edges,
        commodities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::enumerate_paths;

    #[test]
    fn networks_are_valid_and_connected() {
        for seed in 0..100 {
            let shape = SyntheticShape {
                vertices: 2 + (seed as usize % 7),
                ..Default::default()
            };
            let net = random_network(seed, &shape);
            assert!(net.validate().is_empty());
            let w: Vec<f64> = net.edges.iter().map(|e| e.module_cost).collect();
            assert!(enumerate_paths(&net, 3, &w).is_ok());
        }
    }

    #[test]
    fn seed_determines_network() {
        let s = SyntheticShape::default();
        assert_eq!(random_network(9, &s), random_network(9, &s));
        assert_ne!(random_network(9, &s), random_network(10, &s));
    }
}
