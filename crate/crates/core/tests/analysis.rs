mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synthprune::analysis::*;
use synthprune::compression::init_subnetwork_mask;
use synthprune::network::{forward, Architecture, ConnectionMask};

use common::*;

fn small_arch() -> impl proptest::strategy::Strategy<Value = Architecture> {
    prop::collection::vec(1usize..=6, 2..=3).prop_map(|mut w| {
        w.push(1);
        Architecture::new(w).unwrap()
    })
}

#[test]
fn matrix_matches_pairwise_recomputation() {
    let a = Architecture::new(vec![6, 5, 4, 1]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let masks: Vec<ConnectionMask> = (0..3).map(|_| random_mask(&mut rng, &a, 0.5)).collect();
    let labels: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
    let m = similarity_matrix(&masks, &labels).unwrap();
    for i in 0..3 {
        assert_eq!(m.values[i][i], 1.0);
        for j in 0..3 {
            assert_eq!(m.values[i][j], m.values[j][i]);
            if i != j {
                assert_eq!(m.values[i][j], mask_similarity(&masks[i], &masks[j]).unwrap());
            }
        }
    }
    let other = ConnectionMask::full(&Architecture::new(vec![2, 2, 1]).unwrap());
    assert!(similarity_matrix(&[masks[0].clone(), other], &labels[..2]).is_err());
}

#[test]
fn walk_masks_of_two_seeds() {
    let a = Architecture::default();
    let (m1, m2) = (init_subnetwork_mask(&a, 1), init_subnetwork_mask(&a, 2));
    let s = mask_similarity(&m1, &m2).unwrap();
    assert!((0.0..=1.0).contains(&s));
    assert_eq!(s, mask_similarity(&m2, &m1).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn redundancy_matches_path_enumeration(arch in small_arch(), seed in any::<u64>(), p in 0.1f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = random_mask(&mut rng, &arch, p);
        prop_assert_eq!(find_redundant(&mask), redundant_oracle(&mask));
    }

    #[test]
    fn dag_prune_fixed_point(arch in small_arch(), seed in any::<u64>(), p in 0.1f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = random_mask(&mut rng, &arch, p);
        let once = dag_prune(&mask);
        prop_assert_eq!(&dag_prune(&once), &once);
        prop_assert!(find_redundant(&once).is_empty());
        let kept = on_some_path(&mask);
        prop_assert!(kept.iter().all(|c| once.get(*c)));
        prop_assert_eq!(once.enabled_count(), kept.len());
    }

    #[test]
    fn network_prune_preserves_output(arch in small_arch(), seed in any::<u64>(), p in 0.1f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = random_mask(&mut rng, &arch, p);
        let net = random_net(&mut rng, &arch, mask);
        let batch = random_batch(&mut rng, arch.input_width(), 8);
        let (pruned, removed) = dag_prune_network(&net);
        let (before, after) = (forward(&net, &batch).unwrap(), forward(&pruned, &batch).unwrap());
        prop_assert_eq!(before.scores(), after.scores());
        let redundant = find_redundant(net.mask());
        prop_assert!(removed.iter().all(|c| redundant.contains(c)));
        let (again, none) = dag_prune_network(&pruned);
        prop_assert!(none.is_empty());
        prop_assert_eq!(again, pruned);
    }

    #[test]
    fn similarity_symmetric_and_identity(arch in small_arch(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_mask(&mut rng, &arch, 0.5);
        let b = random_mask(&mut rng, &arch, 0.5);
        let s = mask_similarity(&a, &b).unwrap();
        prop_assert_eq!(s, mask_similarity(&b, &a).unwrap());
        prop_assert_eq!(s == 1.0, a == b);
        prop_assert_eq!(mask_similarity(&a, &a).unwrap(), 1.0);
    }
}
