use std::time::Duration;

use mpnd_core::ants::ColonyConfig;
use mpnd_core::evaluate::{check_feasible, sp_baseline};
use mpnd_core::instance::{expand_multiperiod, random_network, read_instance, write_instance, GrowthConfig, SyntheticShape};
use mpnd_core::reformulate::{emit_robust, LpModel, ModelStats};
use mpnd_core::relaxation::nominal_lp_optimum;
use mpnd_core::search::{oracle_enumerate, solve_hybrid, HybridConfig, DEFAULT_ORACLE_CAP};
use mpnd_core::uncertainty::{build_multiband, BandSpec};

fn instance(seed: u64) -> mpnd_core::instance::Instance {
    let shape = SyntheticShape {
        vertices: 6,
        commodities: 4,
        ..Default::default()
    };
    let growth = GrowthConfig {
        periods: 2,
        paths_per_commodity: 3,
        seed,
        ..Default::default()
    };
    expand_multiperiod(&random_network(seed, &shape), &growth).unwrap()
}

#[test]
fn end_to_end_on_random_instances() {
    for seed in 0..6 {
        let inst = read_instance(&write_instance(&instance(seed))).unwrap();
        let mb = build_multiband(&inst, &BandSpec::default()).unwrap();
        let cfg = HybridConfig {
            colony: ColonyConfig {
                ants: 30,
                max_batches: Some(10),
                time_limit: None,
                seed,
                ..Default::default()
            },
            rins_time: Duration::from_secs(5),
            ..Default::default()
        };
        let rep = solve_hybrid(&inst, &mb, &cfg).unwrap();
        let oracle = oracle_enumerate(&inst, &mb, DEFAULT_ORACLE_CAP).unwrap();
        let lp = nominal_lp_optimum(&inst).unwrap();
        assert!(check_feasible(&rep.best, &inst, &mb).0);
        assert!(oracle.cost <= rep.aco_rins && rep.aco_rins <= rep.aco && rep.aco <= rep.sp);
        assert_eq!(rep.sp, sp_baseline(&inst, &mb).cost);
        assert!(lp.value <= oracle.cost * (1.0 + 1e-9));
        assert!(rep.lower_bound <= oracle.cost * (1.0 + 1e-9));

        let (text, stats) = emit_robust(&inst, &mb, false);
        assert_eq!(ModelStats::recount(&LpModel::parse(&text).unwrap()), stats);
    }
}
