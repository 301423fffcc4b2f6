use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{enumerate_paths, BaseNetwork, Instance};
use crate::error::{Error, Result};

/// Parameters turning a single-period network into a multiperiod instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthConfig {
    pub periods: usize,
    /// Per-period demand multiplier, at least 1.
    pub demand_growth: f64,
    /// Per-period module cost multiplier in (0, 1].
    pub cost_discount: f64,
    /// Admissible paths per commodity.
    pub paths_per_commodity: usize,
    /// Relative jitter applied to each demand increment, in [0, 1).
    pub jitter: f64,
    pub seed: u64,
    /// Overrides the module size otherwise taken from the first edge.
    pub module_size: Option<f64>,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            periods: 5,
            demand_growth: 1.2,
            cost_discount: 0.9,
            paths_per_commodity: 5,
            jitter: 0.0,
            seed: 1,
            module_size: None,
        }
    }
}

impl GrowthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.periods == 0 {
            return Err(Error::Config("periods must be at least 1".into()));
        }
        if !(self.demand_growth >= 1.0 && self.demand_growth.is_finite()) {
            return Err(Error::Config("demand growth must be a finite factor >= 1".into()));
        }
        if !(self.cost_discount > 0.0 && self.cost_discount <= 1.0) {
            return Err(Error::Config("cost discount must lie in (0, 1]".into()));
        }
        if self.paths_per_commodity == 0 {
            return Err(Error::Config("paths per commodity must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return Err(Error::Config("jitter must lie in [0, 1)".into()));
        }
        if let Some(phi) = self.module_size {
            if !(phi > 0.0 && phi.is_finite()) {
                return Err(Error::Config("module size must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Expands `base` over `cfg.periods` periods.
///
/// Demand of period t+1 is demand of period t times `1 + (g - 1)(1 + j u)`
/// with `u` uniform in [-1, 1): jitter perturbs the growth increment only, so
/// demands never decrease. Costs are discounted geometrically. Paths are
/// the k shortest by base module cost.
pub fn expand_multiperiod(base: &BaseNetwork, cfg: &GrowthConfig) -> Result<Instance> {
    cfg.validate()?;
    let problems = base.validate();
    if !problems.is_empty() {
        return Err(Error::Validation(problems.join("; ")));
    }
    let module_size = match cfg.module_size {
        Some(phi) => phi,
        None => base
            .edges
            .first()
            .map(|e| e.module_capacity)
            .ok_or_else(|| Error::Validation("network has no edges".into()))?,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let demand = base
        .commodities
        .iter()
        .map(|c| {
            let mut row = Vec::with_capacity(cfg.periods);
            row.push(c.demand);
            for t in 1..cfg.periods {
                let u: f64 = rng.gen_range(-1.0..1.0);
                let factor = 1.0 + (cfg.demand_growth - 1.0) * (1.0 + cfg.jitter * u);
                row.push(row[t - 1] * factor);
            }
            row
        })
        .collect();
    let cost = base
        .edges
        .iter()
        .map(|e| {
            let mut row = Vec::with_capacity(cfg.periods);
            row.push(e.module_cost);
            for t in 1..cfg.periods {
                row.push(row[t - 1] * cfg.cost_discount);
            }
            row
        })
        .collect();
    let weight: Vec<f64> = base.edges.iter().map(|e| e.module_cost).collect();
    let paths = enumerate_paths(base, cfg.paths_per_commodity, &weight)?;

    Ok(Instance {
        name: String::new(),
        network: base.clone(),
        periods: cfg.periods,
        demand,
        cost,
        module_size,
        paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Commodity, Edge};
    use proptest::prelude::*;

    fn triangle() -> BaseNetwork {
        let e = |id: &str, a, b, c| Edge {
            id: id.into(),
            endpoints: (a, b),
            module_cost: c,
            module_capacity: 10.0,
        };
        BaseNetwork {
            vertices: vec!["s".into(), "a".into(), "t".into()],
            edges: vec![e("sa", 0, 1, 1.0), e("at", 1, 2, 1.0), e("st", 0, 2, 3.0)],
            commodities: vec![
                Commodity {
                    id: "st".into(),
                    source: 0,
                    target: 2,
                    demand: 100.0,
                },
                Commodity {
                    id: "sa".into(),
                    source: 0,
                    target: 1,
                    demand: 7.0,
                },
            ],
        }
    }

    #[test]
    fn identity_growth_repeats_base() {
        let cfg = GrowthConfig {
            periods: 4,
            demand_growth: 1.0,
            cost_discount: 1.0,
            jitter: 0.0,
            ..Default::default()
        };
        let inst = expand_multiperiod(&triangle(), &cfg).unwrap();
        assert_eq!(inst.demand[0], vec![100.0; 4]);
        assert_eq!(inst.cost[2], vec![3.0; 4]);
        assert_eq!(inst.module_size, 10.0);
    }

    #[test]
    fn geometric_growth() {
        let cfg = GrowthConfig {
            periods: 3,
            demand_growth: 2.0,
            cost_discount: 0.5,
            ..Default::default()
        };
        let inst = expand_multiperiod(&triangle(), &cfg).unwrap();
        assert_eq!(inst.demand[0], vec![100.0, 200.0, 400.0]);
        assert_eq!(inst.cost[2], vec![3.0, 1.5, 0.75]);
        assert_eq!(inst.paths[0][0], vec![0, 1]);
    }

    #[test]
    fn same_seed_same_instance() {
        let cfg = GrowthConfig {
            jitter: 0.7,
            seed: 99,
            ..Default::default()
        };
        let a = expand_multiperiod(&triangle(), &cfg).unwrap();
        let b = expand_multiperiod(&triangle(), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn module_size_override() {
        let cfg = GrowthConfig {
            module_size: Some(2.5),
            ..Default::default()
        };
        assert_eq!(expand_multiperiod(&triangle(), &cfg).unwrap().module_size, 2.5);
    }

    proptest! {
        #[test]
        fn expansion_always_validates(
            seed in any::<u64>(),
            periods in 1usize..8,
            growth in 1.0f64..3.0,
            discount in 0.05f64..=1.0,
            jitter in 0.0f64..0.99,
        ) {
            let cfg = GrowthConfig {
                periods,
                demand_growth: growth,
                cost_discount: discount,
                paths_per_commodity: 2,
                jitter,
                seed,
                module_size: None,
            };
            let inst = expand_multiperiod(&triangle(), &cfg).unwrap();
            prop_assert!(inst.validate().is_empty(), "{:?}", inst.validate());
        }
    }
}
