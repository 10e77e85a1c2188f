//! The greedy coupling: exact distribution, marginals, sampler and the
//! variable-length runs.

use std::collections::HashMap;

use kempeflip::chains::{flip_step, seeded_rng};
use kempeflip::config::StateLabel;
use kempeflip::coupling::{
    apply_outcome, expected_hamming_change, greedy_coupling_distribution, is_terminating_pair, mixing_bound,
    next_stage, run_variable_length, CouplingSampler, Move, RunOptions, Stage,
};
use kempeflip::graph::hamming;
use kempeflip::harness::{construct_g1, construct_g2, random_neighboring_pair};
use kempeflip::scalar::Scalar;
use kempeflip::{Coloring, Preset, Rational};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_mass_is_one(seed in 0u64..100_000, n in 2usize..9, delta in 1usize..5, k in 3usize..9) {
        let inst = random_neighboring_pair(n, delta, k, seed).unwrap();
        let pair = inst.pair().unwrap();
        for preset in Preset::ALL {
            let dist = greedy_coupling_distribution::<Rational>(&pair, &preset.exact());
            prop_assert_eq!(dist.total_mass(), Rational::from_i64(1));
            prop_assert!(dist.noop >= Rational::from_i64(0));
            prop_assert!(dist.outcomes.iter().all(|o| o.mass > Rational::from_i64(0)));
        }
    }

    #[test]
    fn terminating_outcomes_match_the_literal_test(seed in 0u64..100_000, n in 2usize..8, k in 3usize..7) {
        let inst = random_neighboring_pair(n, 3, k, seed).unwrap();
        let pair = inst.pair().unwrap();
        let dist = greedy_coupling_distribution::<f64>(&pair, &Preset::VigodaEq11.params());
        for o in &dist.outcomes {
            prop_assert_eq!(o.is_terminating(), is_terminating_pair(&pair, o.s_sigma.as_ref(), o.s_tau.as_ref()));
        }
    }

    #[test]
    fn identity_moves_keep_the_distance(seed in 0u64..100_000, n in 2usize..8, k in 3usize..7) {
        let inst = random_neighboring_pair(n, 3, k, seed).unwrap();
        let pair = inst.pair().unwrap();
        let dist = greedy_coupling_distribution::<f64>(&pair, &Preset::CmEq12.params());
        for o in dist.outcomes.iter().filter(|o| o.kind == Move::Identity) {
            let (s, t) = apply_outcome(&pair, o);
            prop_assert_eq!(hamming(&s, &t), 1);
        }
    }
}

#[test]
fn marginals_match_the_single_chain_step() {
    // Monte Carlo check of the σ marginal against the chain's own sampler.
    let inst = construct_g1(3, 6).unwrap();
    let pair = inst.pair().unwrap();
    let p = Preset::VigodaEq11.params::<f64>();
    let (left, _) = greedy_coupling_distribution(&pair, &p).marginals(&pair);
    let mut rng = seeded_rng(8, 0);
    let trials = 300_000;
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    for _ in 0..trials {
        *counts.entry(flip_step(&inst.graph, &inst.sigma, &p, &mut rng).as_slice().to_vec()).or_default() += 1;
    }
    for (state, &mass) in &left {
        let freq = counts.get(state).copied().unwrap_or(0) as f64 / trials as f64;
        let se = (mass * (1.0 - mass) / trials as f64).sqrt().max(1e-6);
        assert!((freq - mass).abs() < 5.0 * se, "{state:?}: {freq} vs {mass}");
    }
}

#[test]
fn sampler_reproduces_the_joint_law() {
    let inst = construct_g2(2, 6).unwrap();
    let pair = inst.pair().unwrap();
    let p = Preset::CmEq12.params::<f64>();
    let dist = greedy_coupling_distribution::<f64>(&pair, &p);
    let mut exact: HashMap<(Coloring, Coloring), f64> = HashMap::new();
    *exact.entry((pair.sigma().clone(), pair.tau().clone())).or_default() += dist.noop;
    for o in &dist.outcomes {
        *exact.entry(apply_outcome(&pair, o)).or_default() += o.mass;
    }
    let mut sampler = CouplingSampler::new(&inst.graph);
    let mut rng = seeded_rng(21, 0);
    let trials = 400_000;
    let mut counts: HashMap<(Coloring, Coloring), usize> = HashMap::new();
    for _ in 0..trials {
        let (s, t, _) = sampler.step(&pair, &p, &mut rng);
        *counts.entry((s, t)).or_default() += 1;
    }
    for key in counts.keys() {
        assert!(exact.contains_key(key), "sampled an impossible pair");
    }
    for (key, &mass) in &exact {
        let freq = counts.get(key).copied().unwrap_or(0) as f64 / trials as f64;
        let se = (mass * (1.0 - mass) / trials as f64).sqrt().max(1e-6);
        assert!((freq - mass).abs() < 5.0 * se, "{freq} vs {mass}");
    }
}

#[test]
fn expected_change_is_exact_in_rationals() {
    let inst = construct_g1(6, 11).unwrap();
    let pair = inst.pair().unwrap();
    let exact = expected_hamming_change(&pair, &Preset::VigodaEq11.exact());
    assert_eq!(exact, Rational::from_i64(0));
    let float = expected_hamming_change(&pair, &Preset::VigodaEq11.params::<f64>());
    assert!(float.abs() < 1e-15);
}

#[test]
fn stage_transitions() {
    use Stage::*;
    assert_eq!(next_stage(Bad, true, false, Some(StateLabel::Good)), Good);
    assert_eq!(next_stage(Bad, true, true, Some(StateLabel::Good)), BadEnd);
    assert_eq!(next_stage(Bad, false, false, Some(StateLabel::Good)), BadEnd);
    assert_eq!(next_stage(Bad, true, false, Some(StateLabel::Bad)), BadEnd);
    assert_eq!(next_stage(Good, false, true, None), GoodEnd);
    assert_eq!(next_stage(Good, false, false, Some(StateLabel::Good)), Good);
    assert_eq!(next_stage(Good, false, false, Some(StateLabel::Sing)), BadEnd);
    assert_eq!(next_stage(GoodEnd, false, false, None), GoodEnd);
    assert_eq!(next_stage(BadEnd, false, true, None), BadEnd);
}

#[test]
fn variable_length_runs_stop_when_the_distance_changes() {
    let inst = construct_g2(6, 11).unwrap();
    let pair = inst.pair().unwrap();
    let p = Preset::CmEq12.params::<f64>();
    let options = RunOptions { tracked_color: Some(2), step_cap: 1_000_000, record: true };
    for stream in 0..50 {
        let trace = run_variable_length(&pair, &p, &mut seeded_rng(3, stream), &options).unwrap();
        assert!(!trace.truncated);
        assert_ne!(trace.final_hamming, 1);
        assert_eq!(trace.steps.len() as u64, trace.t_stop);
        let last = trace.steps.last().unwrap();
        assert_eq!(hamming(&last.sigma, &last.tau), trace.final_hamming);
        assert!(trace.steps[..trace.steps.len() - 1].iter().all(|s| hamming(&s.sigma, &s.tau) == 1));
        assert_eq!(trace.stages[0], Stage::Bad);
        assert!(trace.first_terminating.is_some_and(|t| t <= trace.t_stop));
    }
    let again = run_variable_length(&pair, &p, &mut seeded_rng(3, 7), &options).unwrap();
    let once = run_variable_length(&pair, &p, &mut seeded_rng(3, 7), &options).unwrap();
    assert_eq!(again.t_stop, once.t_stop);
    assert_eq!(again.stages, once.stages);
}

#[test]
fn variable_length_runs_need_enough_colors() {
    let inst = construct_g1(4, 6).unwrap();
    let pair = inst.pair().unwrap();
    let result =
        run_variable_length(&pair, &Preset::VigodaEq11.params(), &mut seeded_rng(0, 0), &RunOptions::default());
    assert!(result.is_err());
}

#[test]
fn mixing_bound_formula() {
    // 2⌈2·2·13/0.5⌉·⌈ln(40)/0.5⌉ = 2·104·8.
    assert_eq!(mixing_bound(0.5, 13.0, 2.0, 10.0, 0.25).unwrap(), 1664.0);
    assert!(mixing_bound(0.0, 1.0, 1.0, 10.0, 0.25).is_err());
    assert!(mixing_bound(0.5, 1.0, 1.0, 10.0, 0.0).is_err());
}
