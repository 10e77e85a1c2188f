//! Chain kernels, samplers and exact stationarity.

use kempeflip::chains::{
    flip_matrix_by_components, flip_step, glauber_step, run_flip_chain, seeded_rng, transition_matrix, tv_decay,
    uniform_over_proper, ChainKind, FlipSampler, StateSpace,
};
use kempeflip::graph::{is_proper, kempe_component};
use kempeflip::{Coloring, Error, FlipParams, Graph, ListAssignment, Preset};

fn triangle_with_tail() -> Graph {
    Graph::from_edges(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]).unwrap()
}

#[test]
fn kernel_rows_are_distributions() {
    let graph = triangle_with_tail();
    let p = Preset::VigodaEq11.params::<f64>();
    for kind in [ChainKind::Glauber, ChainKind::Flip] {
        let matrix = transition_matrix(&graph, 4, kind, Some(&p), None, 1 << 20).unwrap();
        assert_eq!(matrix.dim(), 256);
        assert!(matrix.max_row_sum_error() < 1e-12, "{kind}");
        assert!(matrix.min_entry() >= 0.0);
    }
}

#[test]
fn both_flip_formulations_agree() {
    // Anchor sampling with acceptance p_α/α against one draw per distinct
    // component with acceptance p_α.
    let graph = triangle_with_tail();
    for preset in Preset::ALL {
        let p = preset.params::<f64>();
        let anchored = transition_matrix(&graph, 4, ChainKind::Flip, Some(&p), None, 1 << 20).unwrap();
        let by_components = flip_matrix_by_components(&graph, 4, &p, 1 << 20).unwrap();
        assert!(anchored.max_abs_difference(&by_components) < 1e-15, "{preset}");
    }
}

#[test]
fn single_site_flips_are_glauber_moves_on_proper_colorings() {
    // With p = (1) only single-vertex components flip; from a proper
    // coloring this recolors v to a color unused around it, exactly like the
    // heat-bath move.
    let graph = Graph::path(3);
    let flip = transition_matrix(&graph, 3, ChainKind::Flip, Some(&FlipParams::single_site()), None, 1 << 20).unwrap();
    let glauber = transition_matrix(&graph, 3, ChainKind::Glauber, None, None, 1 << 20).unwrap();
    let space = flip.space();
    for i in 0..space.size() {
        if is_proper(&graph, &space.coloring(i)) {
            for j in 0..space.size() {
                assert!((flip.get(i, j) - glauber.get(i, j)).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn uniform_over_proper_is_stationary() {
    let graph = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    let p = Preset::DppObs51.params::<f64>();
    for kind in [ChainKind::Glauber, ChainKind::Flip] {
        let matrix = transition_matrix(&graph, 3, kind, Some(&p), None, 1 << 20).unwrap();
        let pi = uniform_over_proper(&graph, matrix.space());
        let next = matrix.push_forward(&pi);
        let drift: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        assert!(drift < 1e-14, "{kind}: {drift}");
    }
}

#[test]
fn list_chains_stay_in_the_lists() {
    let graph = Graph::path(3);
    let lists = ListAssignment::new(vec![vec![0, 1, 2], vec![1, 2, 3], vec![0, 2, 3]]);
    let p = Preset::VigodaEq11.params::<f64>();
    for kind in [ChainKind::ListGlauber, ChainKind::ListFlip] {
        let matrix = transition_matrix(&graph, 4, kind, Some(&p), Some(&lists), 1 << 20).unwrap();
        assert_eq!(matrix.dim(), 27);
        assert!(matrix.max_row_sum_error() < 1e-12);
        let pi = matrix.stationary_default().unwrap();
        let uniform = uniform_over_proper(&graph, matrix.space());
        let tv = kempeflip::chains::total_variation(&pi, &uniform);
        assert!(tv < 1e-10, "{kind}: {tv}");
    }
}

#[test]
fn list_chains_require_lists() {
    let graph = Graph::path(2);
    let err = transition_matrix(&graph, 3, ChainKind::ListGlauber, None, None, 1 << 20).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)));
}

#[test]
fn state_cap_is_enforced() {
    let err = StateSpace::full(20, 5, 1 << 20).unwrap_err();
    assert!(matches!(err, Error::StateCapExceeded { .. }));
}

#[test]
fn tv_decay_is_monotone() {
    let graph = Graph::path(3);
    let p = Preset::VigodaEq11.params::<f64>();
    let matrix = transition_matrix(&graph, 3, ChainKind::Flip, Some(&p), None, 1 << 20).unwrap();
    let start = matrix.space().index_of(&Coloring::new(vec![0, 1, 0], 3).unwrap()).unwrap();
    let decay = tv_decay(&matrix, start, 60).unwrap();
    assert!(decay.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    assert!(decay[60] < 0.05);
}

#[test]
fn samplers_are_deterministic_per_seed() {
    let graph = triangle_with_tail();
    let p = Preset::CmEq12.params::<f64>();
    let start = Coloring::new(vec![0, 1, 2, 0], 5).unwrap();
    let a = run_flip_chain(&graph, &start, &p, 500, &mut seeded_rng(9, 3));
    let b = run_flip_chain(&graph, &start, &p, 500, &mut seeded_rng(9, 3));
    assert_eq!(a, b);
    assert!(is_proper(&graph, &a));
}

#[test]
fn buffered_sampler_matches_the_reference_step() {
    let graph = triangle_with_tail();
    let p = Preset::VigodaEq11.params::<f64>();
    let mut sigma = Coloring::new(vec![0, 1, 2, 0], 5).unwrap();
    let mut colors = sigma.as_slice().to_vec();
    let mut rng_a = seeded_rng(4, 0);
    let mut rng_b = seeded_rng(4, 0);
    let mut sampler = FlipSampler::new(&graph);
    for _ in 0..2000 {
        sigma = flip_step(&graph, &sigma, &p, &mut rng_a);
        sampler.step(&mut colors, 5, &p, &mut rng_b);
        assert_eq!(sigma.as_slice(), colors.as_slice());
    }
}

#[test]
fn empirical_flip_frequencies_follow_the_kernel() {
    // One step from a fixed coloring, repeated: the frequency of the move
    // flipping S(0, 1) matches its kernel entry.
    let graph = Graph::path(3);
    let p = Preset::VigodaEq11.params::<f64>();
    let sigma = Coloring::new(vec![0, 1, 2], 3).unwrap();
    let matrix = transition_matrix(&graph, 3, ChainKind::Flip, Some(&p), None, 1 << 20).unwrap();
    let target = kempeflip::graph::flip(&sigma, &kempe_component(&graph, &sigma, 0, 1));
    let space = matrix.space();
    let exact = matrix.get(space.index_of(&sigma).unwrap(), space.index_of(&target).unwrap());
    let mut rng = seeded_rng(1, 0);
    let trials = 200_000;
    let hits = (0..trials).filter(|_| flip_step(&graph, &sigma, &p, &mut rng) == target).count();
    let freq = hits as f64 / trials as f64;
    let se = (exact * (1.0 - exact) / trials as f64).sqrt();
    assert!((freq - exact).abs() < 5.0 * se, "{freq} vs {exact}");
}

#[test]
fn glauber_never_creates_conflicts() {
    let graph = triangle_with_tail();
    let mut sigma = Coloring::new(vec![0, 1, 2, 0], 4).unwrap();
    let mut rng = seeded_rng(2, 0);
    for _ in 0..1000 {
        sigma = glauber_step(&graph, &sigma, &mut rng);
        assert!(is_proper(&graph, &sigma));
    }
}
