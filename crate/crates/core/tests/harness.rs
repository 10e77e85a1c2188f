//! Generators, sweeps and the experiment runner.

use kempeflip::chains::{seeded_rng, ChainKind};
use kempeflip::graph::is_proper;
use kempeflip::harness::{
    barrier_sweep, connected_graphs, construct_g2, contraction_check, default_k, greedy_coloring, monotone_vectors,
    neighboring_pairs_up_to_colors, random_graph, random_lists, random_neighboring_pair, run_experiment, stage_csv,
    stage_statistics, ExperimentConfig, ExperimentKind, GraphSpec, ParamSpec, SummaryValue,
};
use kempeflip::{Graph, Preset};

#[test]
fn connected_graph_counts_match_the_known_sequence() {
    // Connected graphs up to isomorphism on 2, 3, 4, 5 vertices: 1, 2, 6, 21.
    let graphs = connected_graphs(5, 4);
    let count = |n: usize| graphs.iter().filter(|g| g.n() == n).count();
    assert_eq!([count(2), count(3), count(4), count(5)], [1, 2, 6, 21]);
    // Degree at most two leaves paths and cycles.
    let thin = connected_graphs(5, 2);
    assert_eq!(thin.iter().filter(|g| g.n() == 5).count(), 2);
}

#[test]
fn neighboring_pairs_are_reduced_by_color_symmetry() {
    let pairs = neighboring_pairs_up_to_colors(&Graph::path(2), 3);
    for (s, t) in &pairs {
        assert_eq!(kempeflip::graph::hamming(s, t), 1);
    }
    // σ = 00 admits one new color at either end, σ = 01 admits two.
    assert_eq!(pairs.len(), 6);
    assert!(pairs.iter().any(|(s, t)| !is_proper(&Graph::path(2), s) && is_proper(&Graph::path(2), t)));
}

#[test]
fn random_graphs_respect_the_degree_cap() {
    let mut rng = seeded_rng(5, 0);
    for i in 0..1000 {
        let n = 2 + i % 30;
        let delta = 1 + i % 6;
        let g = random_graph(n, delta, &mut rng);
        assert_eq!(g.n(), n);
        assert!(g.max_degree() <= delta);
    }
    let a = random_neighboring_pair(20, 4, 9, 11).unwrap();
    let b = random_neighboring_pair(20, 4, 9, 11).unwrap();
    assert_eq!((a.graph.edges(), a.sigma, a.tau), (b.graph.edges(), b.sigma, b.tau));
}

#[test]
fn default_colors_sit_just_below_the_threshold() {
    assert_eq!(default_k(6), 11);
    assert_eq!(default_k(12), 22);
    assert!(greedy_coloring(&Graph::path(4), 1, false).is_err());
    let lists = random_lists(6, 5, 3, &mut seeded_rng(0, 0)).unwrap();
    assert!(random_lists(6, 2, 3, &mut seeded_rng(0, 0)).is_err());
    assert_eq!(lists.len(), 6);
}

#[test]
fn no_monotone_vector_contracts_on_both_constructions() {
    let vectors = monotone_vectors(120, 4);
    assert_eq!(vectors.len(), 120);
    let rows = barrier_sweep(12, 21, &vectors).unwrap();
    assert!(rows.iter().all(|r| !r.both_contract()));
    // The first three rows are the presets in their declared order.
    assert_eq!(rows[0].params, Preset::ALL[0].params::<f64>().values()[1..].to_vec());
}

#[test]
fn stage_table_renders_as_csv() {
    let inst = construct_g2(4, 8).unwrap();
    let pair = inst.pair().unwrap();
    let stats = stage_statistics(&pair, &Preset::VigodaEq11.params(), 1, 200, 3, 1_000_000).unwrap();
    let text = stage_csv(&stats);
    let mut reader = csv_lines(&text);
    assert_eq!(reader.next().unwrap(), "transition,count,trials,freq,stderr,paper_bound");
    let names: Vec<String> = reader.map(|l| l.split(',').next().unwrap().to_string()).collect();
    assert_eq!(names, ["Bad->Good", "Good->GoodEnd", "Good->BadEnd", "T_stop"]);
    assert!(stage_statistics(&pair, &Preset::VigodaEq11.params(), 1, 0, 3, 10).is_err());
}

fn csv_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().filter(|l| !l.is_empty())
}

#[test]
fn contraction_holds_on_small_graphs() {
    let graphs = connected_graphs(4, 3);
    let report = contraction_check(&graphs, &Preset::DppObs51.params()).unwrap();
    assert_eq!(report.graphs, graphs.len());
    assert!(report.max_excess <= 1e-9, "{report:?}");
    assert!(report.max_decomposition_error <= 1e-10);
}

fn small(kind: ExperimentKind, graph: GraphSpec) -> ExperimentConfig {
    ExperimentConfig { kind, graph, trials: 20, steps: 50, sizes: vec![6, 8], ..Default::default() }
}

#[test]
fn every_experiment_kind_runs() {
    let cases = [
        small(ExperimentKind::Sample, GraphSpec::Path { n: 3 }),
        small(ExperimentKind::ListSample, GraphSpec::Path { n: 3 }),
        small(ExperimentKind::Couple, GraphSpec::G2 { delta: 4 }),
        small(ExperimentKind::Stages, GraphSpec::G2 { delta: 4 }),
        small(ExperimentKind::Mixing, GraphSpec::Random { n: 8, delta: 3 }),
        small(ExperimentKind::Construct, GraphSpec::G1 { delta: 3 }),
        small(ExperimentKind::Contract, GraphSpec::Random { n: 6, delta: 3 }),
        ExperimentConfig { kind: ExperimentKind::VerifyLp, lp: "lp3".into(), ..Default::default() },
    ];
    for cfg in &cases {
        let result = run_experiment(cfg).unwrap_or_else(|e| panic!("{:?}: {e}", cfg.kind));
        assert!(!result.header.is_empty());
        assert!(result.rows.iter().all(|r| r.len() == result.header.len()), "{:?}", cfg.kind);
        assert_eq!(result.summary.get("seed"), Some(&SummaryValue::Integer(0)));
    }
}

#[test]
fn experiment_summaries_carry_the_key_numbers() {
    let lp =
        run_experiment(&ExperimentConfig { kind: ExperimentKind::VerifyLp, lp: "lp4".into(), ..Default::default() })
            .unwrap();
    assert_eq!(lp.summary["objective_exact"], SummaryValue::Text("161/88".into()));
    assert_eq!(lp.summary["dpp_feasible"], SummaryValue::Flag(false));

    let built = run_experiment(&ExperimentConfig {
        kind: ExperimentKind::Construct,
        graph: GraphSpec::G1 { delta: 6 },
        k: Some(11),
        ..Default::default()
    })
    .unwrap();
    match built.summary["nk_expected_change"] {
        SummaryValue::Number(x) => assert!(x.abs() < 1e-12),
        ref other => panic!("{other:?}"),
    }

    let sampled = run_experiment(&ExperimentConfig {
        kind: ExperimentKind::Sample,
        graph: GraphSpec::Path { n: 3 },
        k: Some(3),
        chain: ChainKind::Glauber,
        trials: 50,
        steps: 40,
        ..Default::default()
    })
    .unwrap();
    assert_eq!(sampled.summary["proper_fraction"], SummaryValue::Number(1.0));
    assert_eq!(sampled.preset, "vigoda_eq11");
}

#[test]
fn experiments_are_deterministic() {
    let cfg = small(ExperimentKind::Couple, GraphSpec::G2 { delta: 4 });
    assert_eq!(run_experiment(&cfg).unwrap().rows, run_experiment(&cfg).unwrap().rows);
}

#[test]
fn bad_configurations_are_rejected() {
    let odd = ExperimentConfig { graph: GraphSpec::G2 { delta: 3 }, ..Default::default() };
    assert!(run_experiment(&odd).is_err());
    let params = ExperimentConfig { params: ParamSpec::Text("1 2\n".into()), ..Default::default() };
    assert!(run_experiment(&params).is_err());
    let lp = ExperimentConfig { kind: ExperimentKind::VerifyLp, lp: "lp7".into(), ..Default::default() };
    assert!(run_experiment(&lp).is_err());
}

#[test]
fn configs_round_trip_through_json() {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::Stages,
        graph: GraphSpec::Random { n: 12, delta: 3 },
        k: Some(7),
        params: ParamSpec::Preset(Preset::CmEq12),
        ..Default::default()
    };
    let text = serde_json::to_string(&cfg).unwrap();
    assert!(text.contains("\"type\":\"random\""));
    assert!(text.contains("cm_eq12"));
    let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
    let partial: ExperimentConfig = serde_json::from_str(r#"{"kind":"verify-lp","lp":"lp3"}"#).unwrap();
    assert_eq!(partial.kind, ExperimentKind::VerifyLp);
    assert_eq!(partial.trials, ExperimentConfig::default().trials);
}
