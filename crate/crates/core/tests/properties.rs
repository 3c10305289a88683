//! Property tests for the structural invariants: distances, policy bounds,
//! clipping, the ES update as a convex combination, and buffer FIFO order.

use proptest::prelude::*;

use drift_es::es::{es_update, recombination_weights, EsState, RankedPopulation};
use drift_es::genome::{l2_distance, Genome, PolicyArchitecture};
use drift_es::injection::clip_deviation;
use drift_es::td3::{ReplayBuffer, Transition};

fn genome_strategy(dim: usize) -> impl Strategy<Value = Genome> {
    prop::collection::vec(-10.0..10.0f64, dim).prop_map(|v| Genome::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn l2_distance_triangle_inequality(
        a in genome_strategy(12),
        b in genome_strategy(12),
        c in genome_strategy(12),
    ) {
        let ab = l2_distance(&a, &b).unwrap();
        let bc = l2_distance(&b, &c).unwrap();
        let ac = l2_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!((l2_distance(&a, &b).unwrap() - l2_distance(&b, &a).unwrap()).abs() == 0.0);
    }

    #[test]
    fn policy_output_strictly_inside_unit_box(
        // Ranges keep pre-activations below where f64 tanh rounds to 1.0.
        params in prop::collection::vec(-0.5..0.5f64, 3 * 4 + 4 + 4 * 2 + 2),
        obs in prop::collection::vec(-1.0..1.0f64, 3),
    ) {
        let arch = PolicyArchitecture::with_hidden(3, 2, vec![4]);
        let g = Genome::new(params).unwrap();
        let a = drift_es::genome::policy_forward(&arch, &g, &obs).unwrap();
        prop_assert!(a.iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn clip_never_exceeds_radius(
        actor in genome_strategy(8),
        center in genome_strategy(8),
        max_norm in 0.01..20.0f64,
    ) {
        let out = clip_deviation(&actor, &center, max_norm).unwrap();
        let norm = l2_distance(&out, &center).unwrap();
        prop_assert!(norm <= max_norm * (1.0 + 1e-9));
        let again = clip_deviation(&out, &center, max_norm).unwrap();
        prop_assert!(out.params().iter().zip(again.params()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn es_update_stays_in_convex_hull(
        center in genome_strategy(5),
        deviations in prop::collection::vec(prop::collection::vec(-4.0..4.0f64, 5), 6),
        fitnesses in prop::collection::vec(-100.0..100.0f64, 6),
    ) {
        // The update is a convex combination of the center and population,
        // so every coordinate stays inside the population's bounding box.
        let es = EsState::new(center.clone(), 1.0, 6, 3).unwrap();
        let genomes: Vec<Genome> = deviations.into_iter().map(|d| Genome::new(d).unwrap()).collect();
        let pop = RankedPopulation::new(genomes.clone(), fitnesses).unwrap();
        let w = recombination_weights(6, 3).unwrap();
        let updated = es_update(&es, &pop, &w).unwrap();
        for j in 0..5 {
            let mut lo = center.params()[j];
            let mut hi = lo;
            for g in &genomes {
                lo = lo.min(g.params()[j]);
                hi = hi.max(g.params()[j]);
            }
            prop_assert!(updated.center.params()[j] >= lo - 1e-9);
            prop_assert!(updated.center.params()[j] <= hi + 1e-9);
        }
    }

    #[test]
    fn buffer_keeps_newest_in_fifo_order(
        capacity in 1..12usize,
        n in 0..40usize,
    ) {
        let mut buf = ReplayBuffer::new(capacity, 1, 1);
        for i in 0..n {
            buf.push(Transition {
                state: vec![0.0],
                action: vec![0.0],
                reward: i as f64,
                next_state: vec![0.0],
                done: false,
            }).unwrap();
        }
        prop_assert_eq!(buf.len(), n.min(capacity));
        let rewards: Vec<f64> = buf.iter_fifo().map(|t| t.reward).collect();
        let expect: Vec<f64> = (n.saturating_sub(capacity)..n).map(|i| i as f64).collect();
        prop_assert_eq!(rewards, expect);
    }
}
