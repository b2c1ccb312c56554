use bbm_core::{PruneRule, RunConfig};
use bbm_simulate::{simulate_replica, SimOptions};
use proptest::prelude::*;

fn config(d: usize, t: f64, seed: u64, prune: bool) -> RunConfig {
    let cfg = RunConfig::new(d, t, seed).with_observation_times(vec![t / 3.0, t / 2.0]);
    if prune {
        cfg.with_pruning(PruneRule::linear_front(1.0))
    } else {
        cfg
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn outputs_are_consistent(d in 1usize..=3, t in 0.1f64..3.0, seed: u64, replica in 0u64..1000, prune: bool) {
        let cfg = config(d, t, seed, prune);
        let out = simulate_replica(&cfg, replica, &SimOptions::default()).unwrap();
        out.genealogy.validate().unwrap();
        prop_assert_eq!(out.snapshots.len(), 3);
        for s in &out.snapshots {
            s.validate_against(&out.genealogy).unwrap();
            prop_assert!(s.ids().windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(s.dim(), d);
        }
        let last = out.final_snapshot();
        prop_assert_eq!(last.len(), out.genealogy.alive_at_horizon().len());
        prop_assert_eq!(out.genealogy.len(), 1 + 2 * out.genealogy.branch_count());
    }

    #[test]
    fn replicas_are_reproducible(d in 1usize..=3, t in 0.1f64..2.0, seed: u64, replica in 0u64..1000) {
        let cfg = config(d, t, seed, false);
        let a = simulate_replica(&cfg, replica, &SimOptions::default()).unwrap();
        let b = simulate_replica(&cfg, replica, &SimOptions::default()).unwrap();
        prop_assert_eq!(&a.genealogy, &b.genealogy);
        prop_assert_eq!(a.final_snapshot().coords(), b.final_snapshot().coords());
    }

    #[test]
    fn pruned_snapshots_respect_the_rule(d in 1usize..=3, t in 0.5f64..3.0, seed: u64) {
        let cfg = config(d, t, seed, true);
        let rule = cfg.prune_rule();
        let out = simulate_replica(&cfg, 0, &SimOptions::default()).unwrap();
        for s in &out.snapshots[..out.snapshots.len() - 1] {
            for r in s.norms() {
                prop_assert!(!rule.kills(r, s.time));
            }
        }
    }
}
