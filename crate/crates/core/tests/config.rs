//! Configurations of neighboring pairs and their classification.

use kempeflip::config::{
    classify_state, count_states, extract_configurations, extremal_counts, extremal_size, gamma, is_extremal,
    Configuration, NeighboringPair, Special, StateLabel,
};
use kempeflip::harness::{construct_g1, construct_g2, random_neighboring_pair};
use kempeflip::{Coloring, Error, Graph, Preset};
use proptest::prelude::*;

#[test]
fn neighboring_pairs_differ_at_exactly_one_vertex() {
    let graph = Graph::path(3);
    let sigma = Coloring::new(vec![0, 1, 0], 3).unwrap();
    assert!(matches!(NeighboringPair::new(&graph, sigma.clone(), sigma.clone()), Err(Error::NotNeighboring(0))));
    let far = Coloring::new(vec![1, 0, 0], 3).unwrap();
    assert!(matches!(NeighboringPair::new(&graph, sigma.clone(), far), Err(Error::NotNeighboring(2))));
    let tau = Coloring::new(vec![0, 2, 0], 3).unwrap();
    let pair = NeighboringPair::new(&graph, sigma, tau).unwrap();
    assert_eq!((pair.v(), pair.sigma_v(), pair.tau_v()), (1, 1, 2));
}

#[test]
fn single_neighbor_construction_has_size_one_extremal_colors() {
    for delta in [2, 3, 8] {
        let inst = construct_g1(delta, delta + 3).unwrap();
        assert_eq!(inst.graph.n(), 1 + 2 * delta);
        let pair = inst.pair().unwrap();
        let configs = extract_configurations(&pair);
        let ordinary: Vec<_> = configs.values().filter(|c| c.special == Special::None).collect();
        assert_eq!(ordinary.len(), delta);
        for cfg in ordinary {
            assert_eq!(cfg.symmetry_class(), Configuration::parse("3,2;[2];[1]").unwrap().symmetry_class());
            assert_eq!(extremal_size(cfg), Some(1));
            assert_eq!(classify_state(cfg), StateLabel::Sing);
        }
        assert_eq!(extremal_counts(&configs), (delta, 0));
        assert_eq!(gamma(&pair, &Preset::VigodaEq11.params::<f64>()), 1.0);
    }
}

#[test]
fn paired_construction_has_bad_colors() {
    for delta in [2, 6, 8] {
        let inst = construct_g2(delta, delta + 3).unwrap();
        assert_eq!(inst.graph.n(), 1 + 3 * delta);
        let pair = inst.pair().unwrap();
        let configs = extract_configurations(&pair);
        for cfg in configs.values().filter(|c| c.special == Special::None) {
            assert!(cfg.is_bad_shape(), "{cfg}");
            assert_eq!(extremal_size(cfg), Some(2));
        }
        assert_eq!(count_states(&pair), (0, delta / 2, 0));
        assert_eq!(extremal_counts(&configs), (0, delta / 2));
    }
}

#[test]
fn constructions_are_proper_and_neighboring() {
    for inst in [construct_g1(6, 11).unwrap(), construct_g2(6, 11).unwrap()] {
        assert!(kempeflip::graph::is_proper(&inst.graph, &inst.sigma));
        assert!(kempeflip::graph::is_proper(&inst.graph, &inst.tau));
        assert_eq!(kempeflip::graph::hamming(&inst.sigma, &inst.tau), 1);
        assert_eq!(inst.graph.max_degree(), 6);
    }
    assert!(construct_g2(3, 10).is_err());
    assert!(construct_g1(6, 7).is_err());
}

#[test]
fn canonical_text_round_trips() {
    for text in ["3,2;[2];[1]", "7,3;[3,3];[1,1]", "5,4;[2,1,1];[1,2,0]"] {
        let cfg = Configuration::parse(text).unwrap();
        assert_eq!(cfg.canonical(), text);
        assert_eq!(cfg.mirror().mirror(), cfg);
    }
    assert!(Configuration::parse("3,2;[2]").is_err());
    assert!(Configuration::parse("3,2;[2,1];[1]").is_err());
}

#[test]
fn symmetry_classes_identify_mirrors_and_reorderings() {
    let a = Configuration::parse("7,3;[3,3];[1,1]").unwrap();
    let b = Configuration::parse("3,7;[1,1];[3,3]").unwrap();
    assert_eq!(a.symmetry_class(), b.symmetry_class());
    let c = Configuration::parse("4,4;[2,1];[1,2]").unwrap();
    let d = Configuration::parse("4,4;[1,2];[2,1]").unwrap();
    assert_eq!(c.symmetry_class(), d.symmetry_class());
    assert!(is_extremal(&Configuration::parse("2,3;[1];[2]").unwrap()));
    assert!(!is_extremal(&Configuration::parse("4,2;[3];[1]").unwrap()));
}

proptest! {
    #[test]
    fn configurations_account_for_every_neighbor(seed in 0u64..10_000, n in 3usize..12, delta in 1usize..5, k in 3usize..9) {
        let inst = random_neighboring_pair(n, delta, k, seed).unwrap();
        let pair = inst.pair().unwrap();
        let configs = extract_configurations(&pair);
        let v = pair.v();
        for (&c, cfg) in &configs {
            prop_assert_eq!(cfg.color, c);
            prop_assert_eq!(cfg.a.len(), cfg.b.len());
            // Each neighbor colored c contributes one index.
            prop_assert_eq!(cfg.m(), pair.delta(c));
            match cfg.special {
                Special::None => {
                    prop_assert_eq!(cfg.big_a, 1 + cfg.a.iter().sum::<usize>());
                    prop_assert_eq!(cfg.big_b, 1 + cfg.b.iter().sum::<usize>());
                }
                Special::SigmaV => prop_assert_eq!(c, pair.sigma_v()),
                Special::TauV => prop_assert_eq!(c, pair.tau_v()),
            }
        }
        let total: usize = configs.values().map(|c| c.m()).sum();
        prop_assert_eq!(total, inst.graph.degree(v));
    }
}
