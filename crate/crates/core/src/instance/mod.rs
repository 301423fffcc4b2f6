//! Networks, multiperiod instances and their admissible path sets.
//!
//! A [`BaseNetwork`] is what an SNDlib file describes: an undirected graph with
//! one module type per edge and a single demand value per commodity. An
//! [`Instance`] adds the time horizon: per-period nominal demands, per-period
//! module costs, the global module size and the preset path sets.

mod growth;
mod native;
mod paths;
mod sndlib;
mod synthetic;

pub use growth::{expand_multiperiod, GrowthConfig};
pub use native::{read_instance, write_instance};
pub use paths::{enumerate_paths, path_weight};
pub use sndlib::parse_sndlib;
pub use synthetic::{random_network, SyntheticShape};

/// Index of a vertex in [`BaseNetwork::vertices`].
pub type VertexIdx = usize;
/// Index of an edge in [`BaseNetwork::edges`].
pub type EdgeIdx = usize;
/// Index of a commodity in [`BaseNetwork::commodities`].
pub type CommodityIdx = usize;

/// A path is the sequence of edges traversed from the commodity source.
pub type Path = Vec<EdgeIdx>;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub endpoints: (VertexIdx, VertexIdx),
    /// Cost of one capacity module in the base period.
    pub module_cost: f64,
    /// Capacity of one module as read from the source data.
    pub module_capacity: f64,
}

impl Edge {
    /// The endpoint opposite to `v`, or `None` if `v` is not incident.
    pub fn opposite(&self, v: VertexIdx) -> Option<VertexIdx> {
        match self.endpoints {
            (a, b) if a == v => Some(b),
            (a, b) if b == v => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Commodity {
    pub id: String,
    pub source: VertexIdx,
    pub target: VertexIdx,
    pub demand: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BaseNetwork {
    pub vertices: Vec<String>,
    pub edges: Vec<Edge>,
    pub commodities: Vec<Commodity>,
}

impl BaseNetwork {
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let nv = self.vertices.len();
        for e in &self.edges {
            let (a, b) = e.endpoints;
            if a >= nv || b >= nv {
                out.push(format!("edge endpoint missing: {}", e.id));
            } else if a == b {
                out.push(format!("self-loop edge: {}", e.id));
            }
            if !(e.module_cost > 0.0 && e.module_cost.is_finite()) {
                out.push(format!("non-positive module cost: {}", e.id));
            }
        }
        for c in &self.commodities {
            if c.source >= nv || c.target >= nv {
                out.push(format!("commodity endpoint missing: {}", c.id));
            }
            if !(c.demand > 0.0 && c.demand.is_finite()) {
                out.push(format!("non-positive base demand: {}", c.id));
            }
        }
        out
    }

    /// Vertex sequence of `path` starting at `source`, or `None` if the edges
    /// do not form a walk from `source`.
    pub fn walk(&self, source: VertexIdx, path: &[EdgeIdx]) -> Option<Vec<VertexIdx>> {
        let mut verts = Vec::with_capacity(path.len() + 1);
        verts.push(source);
        let mut at = source;
        for &e in path {
            at = self.edges.get(e)?.opposite(at)?;
            verts.push(at);
        }
        Some(verts)
    }
}

/// A multiperiod instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub network: BaseNetwork,
    pub periods: usize,
    /// Nominal demand `demand[c][t]`.
    pub demand: Vec<Vec<f64>>,
    /// Module cost `cost[e][t]`.
    pub cost: Vec<Vec<f64>>,
    /// Capacity of one module, shared by every edge.
    pub module_size: f64,
    /// Admissible paths `paths[c]`, in preference order.
    pub paths: Vec<Vec<Path>>,
}

impl Instance {
    pub fn num_commodities(&self) -> usize {
        self.network.commodities.len()
    }

    pub fn num_edges(&self) -> usize {
        self.network.edges.len()
    }

    /// Sum of module costs along `path` in period `t`.
    pub fn path_cost(&self, path: &[EdgeIdx], t: usize) -> f64 {
        path.iter().map(|&e| self.cost[e][t]).sum()
    }

    pub fn max_paths(&self) -> usize {
        self.paths.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Commodities of period `t` in construction order: descending nominal
    /// demand, ties by commodity index.
    pub fn construction_order(&self, t: usize) -> Vec<CommodityIdx> {
        let mut order: Vec<CommodityIdx> = (0..self.num_commodities()).collect();
        order.sort_by(|&a, &b| {
            self.demand[b][t]
                .partial_cmp(&self.demand[a][t])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        order
    }

    /// Returns one description per violated invariant; empty iff the
    /// instance is well formed.
    pub fn validate(&self) -> Vec<String> {
        let mut out = self.network.validate();
        let nc = self.num_commodities();
        let ne = self.num_edges();
        let periods = self.periods;
        if periods == 0 {
            out.push("periods must be at least 1".to_string());
        }
        if !(self.module_size > 0.0 && self.module_size.is_finite()) {
            out.push(format!("non-positive module size: {}", self.module_size));
        }
        if self.demand.len() != nc {
            out.push(format!("demand rows: expected {nc}, found {}", self.demand.len()));
        }
        if self.cost.len() != ne {
            out.push(format!("cost rows: expected {ne}, found {}", self.cost.len()));
        }
        if self.paths.len() != nc {
            out.push(format!("path sets: expected {nc}, found {}", self.paths.len()));
        }
        for (c, row) in self.demand.iter().enumerate() {
            let id = self.commodity_label(c);
            if row.len() != periods {
                out.push(format!("demand periods: {id} has {} values", row.len()));
                continue;
            }
            if row.iter().any(|d| !d.is_finite() || *d < 0.0) {
                out.push(format!("invalid demand value: {id}"));
            }
            for t in 1..periods {
                if row[t] < row[t - 1] {
                    out.push(format!("demand decreasing: {id}, t={}", t + 1));
                }
            }
        }
        for (e, row) in self.cost.iter().enumerate() {
            let id = self
                .network
                .edges
                .get(e)
                .map_or_else(|| e.to_string(), |x| x.id.clone());
            if row.len() != periods {
                out.push(format!("cost periods: {id} has {} values", row.len()));
                continue;
            }
            if row.iter().any(|g| !g.is_finite() || *g < 0.0) {
                out.push(format!("invalid cost value: {id}"));
            }
            for t in 1..periods {
                if row[t] > row[t - 1] {
                    out.push(format!("cost increasing: {id}, t={}", t + 1));
                }
            }
        }
        for (c, set) in self.paths.iter().enumerate() {
            let id = self.commodity_label(c);
            if set.is_empty() {
                out.push(format!("empty path set: {id}"));
            }
            let Some(com) = self.network.commodities.get(c) else {
                continue;
            };
            for (p, path) in set.iter().enumerate() {
                match self.network.walk(com.source, path) {
                    None => out.push(format!("path is not a walk: {id}, p={}", p + 1)),
                    Some(verts) => {
                        if verts.last() != Some(&com.target) {
                            out.push(format!("path does not reach target: {id}, p={}", p + 1));
                        }
                        let mut seen = verts.clone();
                        seen.sort_unstable();
                        seen.dedup();
                        if seen.len() != verts.len() {
                            out.push(format!("path repeats a vertex: {id}, p={}", p + 1));
                        }
                    }
                }
            }
        }
        out
    }

    fn commodity_label(&self, c: usize) -> String {
        self.network
            .commodities
            .get(c)
            .map_or_else(|| c.to_string(), |x| x.id.clone())
    }
}

/// Free-standing form of [`Instance::validate`].
pub fn validate(instance: &Instance) -> Vec<String> {
    instance.validate()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Single edge `a-b` carrying the given commodities `(demand per period)`.
    pub fn single_edge(demands: &[Vec<f64>], cost: Vec<f64>, module_size: f64) -> Instance {
        let periods = cost.len();
        let network = BaseNetwork {
            vertices: vec!["a".into(), "b".into()],
            edges: vec![Edge {
                id: "ab".into(),
                endpoints: (0, 1),
                module_cost: cost[0],
                module_capacity: module_size,
            }],
            commodities: demands
                .iter()
                .enumerate()
                .map(|(i, d)| Commodity {
                    id: format!("c{}", i + 1),
                    source: 0,
                    target: 1,
                    demand: d[0],
                })
                .collect(),
        };
        Instance {
            name: "single-edge".into(),
            network,
            periods,
            demand: demands.to_vec(),
            cost: vec![cost],
            module_size,
            paths: vec![vec![vec![0]]; demands.len()],
        }
    }

    /// Small random instance with exactly representable costs.
    pub fn small(seed: u64, vertices: usize, commodities: usize, periods: usize, k: usize) -> Instance {
        let shape = SyntheticShape {
            vertices,
            commodities,
            ..Default::default()
        };
        let cfg = GrowthConfig {
            periods,
            demand_growth: if seed % 2 == 0 { 1.5 } else { 2.0 },
            cost_discount: if seed % 3 == 0 { 1.0 } else { 0.5 },
            paths_per_commodity: k,
            jitter: 0.0,
            seed,
            module_size: None,
        };
        let mut inst = expand_multiperiod(&random_network(seed, &shape), &cfg).expect("valid random instance");
        inst.name = format!("small-{seed}");
        inst
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::single_edge;

    #[test]
    fn well_formed_instance_has_no_violations() {
        let inst = single_edge(&[vec![1.0, 2.0]], vec![3.0, 2.0], 10.0);
        assert!(inst.validate().is_empty());
    }

    #[test]
    fn decreasing_demand_is_reported_with_period() {
        let inst = single_edge(&[vec![5.0, 4.0]], vec![1.0, 1.0], 10.0);
        assert_eq!(inst.validate(), vec!["demand decreasing: c1, t=2".to_string()]);
    }

    #[test]
    fn increasing_cost_is_reported_with_period() {
        let inst = single_edge(&[vec![1.0, 1.0]], vec![1.0, 2.0], 10.0);
        assert_eq!(inst.validate(), vec!["cost increasing: ab, t=2".to_string()]);
    }

    #[test]
    fn broken_paths_are_reported() {
        let mut inst = single_edge(&[vec![1.0]], vec![1.0], 10.0);
        inst.paths[0] = vec![vec![0, 0], vec![]];
        let v = inst.validate();
        assert!(v.iter().any(|s| s.contains("repeats a vertex")), "{v:?}");
        assert!(v.iter().any(|s| s.contains("does not reach target")), "{v:?}");
    }

    #[test]
    fn construction_order_is_by_demand_then_index() {
        let inst = single_edge(&[vec![2.0], vec![5.0], vec![2.0]], vec![1.0], 1.0);
        assert_eq!(inst.construction_order(0), vec![1, 0, 2]);
    }
}
