//! Adversarial constructions, random instances and experiment drivers.
//!
//! Every stochastic driver derives one random stream per trial from
//! `(seed, trial)`, so results do not depend on the number of worker threads.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chains::{
    list_flip_step, list_glauber_step, run_flip_chain, seeded_rng, total_variation, uniform_over_proper, ChainKind,
    FlipSampler, StateSpace, DEFAULT_STATE_CAP,
};
use crate::config::{
    classify_state, color_state, count_states, extract_configurations, gamma, NeighboringPair, StateLabel,
};
use crate::coupling::{expected_hamming_change, mixing_bound, run_variable_length, RunOptions, Stage};
use crate::error::{Error, Result};
use crate::graph::{is_proper, load_graph, Color, Coloring, Graph, ListAssignment, Vertex};
use crate::lp::{
    build_lp, complete_assignment, h_value, solve_lp, verify_dpp_feasibility, LpInstance, LpKind, LpStatus, TagKind,
};
use crate::metrics::{nabla, MetricParams, DELTA, EPSILON_0};
use crate::params::{FlipParams, Preset};
use crate::scalar::Rational;

/// A graph with two colorings that differ at one vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    /// The graph.
    pub graph: Graph,
    /// First coloring.
    pub sigma: Coloring,
    /// Second coloring.
    pub tau: Coloring,
}

impl Instance {
    /// The pair as a [`NeighboringPair`].
    pub fn pair(&self) -> Result<NeighboringPair<'_>> {
        NeighboringPair::new(&self.graph, self.sigma.clone(), self.tau.clone())
    }
}

fn check_palette(max_degree: usize, k: usize) -> Result<()> {
    if max_degree == 0 {
        return Err(Error::InvalidArgument("Δ must be at least 1".into()));
    }
    if k < max_degree + 2 {
        return Err(Error::InvalidArgument(format!(
            "the construction needs k ≥ Δ + 2 colors (Δ = {max_degree}, k = {k})"
        )));
    }
    Ok(())
}

/// The height-two tree in which every color around the root has
/// configuration `(3,2;(2),(1))`.
///
/// Vertex 0 is the root `v` with `σ(v) = 0` and `τ(v) = 1`; its children
/// `1..=Δ` get the distinct colors `2..Δ+2`, and each child has one leaf
/// colored `σ(v)`. `n = 1 + 2Δ`.
pub fn construct_g1(max_degree: usize, k: usize) -> Result<Instance> {
    check_palette(max_degree, k)?;
    let n = 1 + 2 * max_degree;
    let mut edges = Vec::with_capacity(2 * max_degree);
    let mut colors = vec![0; n];
    for (i, color) in colors.iter_mut().enumerate().take(max_degree + 1).skip(1) {
        edges.push((0, i));
        edges.push((i, max_degree + i));
        *color = i + 1;
    }
    finish(n, &edges, colors, k)
}

/// The height-two tree in which every color around the root has
/// configuration `(7,3;(3,3),(1,1))`.
///
/// Children `2j − 1` and `2j` share the color `j + 1`, and each child has two
/// leaves colored `σ(v)`. `Δ` must be even; `n = 1 + 3Δ`.
pub fn construct_g2(max_degree: usize, k: usize) -> Result<Instance> {
    if max_degree % 2 == 1 {
        return Err(Error::InvalidArgument(format!("the paired construction needs an even Δ, got {max_degree}")));
    }
    check_palette(max_degree, k)?;
    let n = 1 + 3 * max_degree;
    let mut edges = Vec::with_capacity(3 * max_degree);
    let mut colors = vec![0; n];
    for (i, color) in colors.iter_mut().enumerate().take(max_degree + 1).skip(1) {
        edges.push((0, i));
        let first_leaf = max_degree + 2 * i - 1;
        edges.push((i, first_leaf));
        edges.push((i, first_leaf + 1));
        *color = i.div_ceil(2) + 1;
    }
    finish(n, &edges, colors, k)
}

fn finish(n: usize, edges: &[(Vertex, Vertex)], colors: Vec<Color>, k: usize) -> Result<Instance> {
    let graph = Graph::from_edges(n, edges)?;
    let sigma = Coloring::new(colors.clone(), k)?;
    let mut tau_colors = colors;
    tau_colors[0] = 1;
    let tau = Coloring::new(tau_colors, k)?;
    Ok(Instance { graph, sigma, tau })
}

/// `k = ⌈(11/6 − ε₀)Δ⌉`.
pub fn default_k(max_degree: usize) -> usize {
    ((11.0 / 6.0 - EPSILON_0) * max_degree as f64).ceil() as usize
}

/// Random graph on `n` vertices with maximum degree at most `max_degree`:
/// `n·Δ` uniformly random vertex pairs are proposed and each is kept when it
/// is new and both endpoints still have spare degree.
pub fn random_graph<R: Rng + ?Sized>(n: usize, max_degree: usize, rng: &mut R) -> Graph {
    let mut degree = vec![0usize; n];
    let mut edges = BTreeSet::new();
    if n >= 2 {
        for _ in 0..n * max_degree {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u == v || degree[u] >= max_degree || degree[v] >= max_degree {
                continue;
            }
            if edges.insert((u.min(v), u.max(v))) {
                degree[u] += 1;
                degree[v] += 1;
            }
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    Graph::from_edges(n, &edges).expect("generated edges are valid")
}

/// A random graph (see [`random_graph`]) with a uniformly random, possibly
/// improper, coloring `σ` and a copy `τ` recolored at one random vertex.
pub fn random_neighboring_pair(n: usize, max_degree: usize, k: usize, seed: u64) -> Result<Instance> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if k < 2 {
        return Err(Error::InvalidArgument("k must be at least 2".into()));
    }
    let mut rng = seeded_rng(seed, 0);
    let graph = random_graph(n, max_degree, &mut rng);
    random_pair_on(graph, k, &mut rng)
}

/// Uniformly random colorings of `graph` differing at one random vertex.
pub fn random_pair_on<R: Rng + ?Sized>(graph: Graph, k: usize, rng: &mut R) -> Result<Instance> {
    if k < 2 || graph.n() == 0 {
        return Err(Error::InvalidArgument("need k ≥ 2 and a non-empty graph".into()));
    }
    let n = graph.n();
    let colors: Vec<Color> = (0..n).map(|_| rng.gen_range(0..k)).collect();
    let v = rng.gen_range(0..n);
    let mut other = colors.clone();
    let shift = rng.gen_range(1..k);
    other[v] = (colors[v] + shift) % k;
    Ok(Instance { graph, sigma: Coloring::new(colors, k)?, tau: Coloring::new(other, k)? })
}

/// Greedy proper coloring in the given vertex order, choosing the smallest
/// (or, with `reverse`, the largest) color not used by a colored neighbor.
pub fn greedy_coloring(graph: &Graph, k: usize, reverse: bool) -> Result<Coloring> {
    let mut colors: Vec<Option<Color>> = vec![None; graph.n()];
    for u in 0..graph.n() {
        let used: BTreeSet<Color> = graph.neighbors(u).iter().filter_map(|&w| colors[w]).collect();
        let mut palette: Box<dyn Iterator<Item = Color>> =
            if reverse { Box::new((0..k).rev()) } else { Box::new(0..k) };
        let c = palette
            .find(|c| !used.contains(c))
            .ok_or_else(|| Error::InvalidArgument(format!("{k} colors do not suffice greedily at vertex {u}")))?;
        colors[u] = Some(c);
    }
    Coloring::new(colors.into_iter().map(|c| c.expect("all colored")).collect(), k)
}

/// Greedy proper list coloring, choosing the first list color not used by a
/// colored neighbor.
pub fn greedy_list_coloring(graph: &Graph, lists: &ListAssignment) -> Result<Coloring> {
    let mut colors: Vec<Option<Color>> = vec![None; graph.n()];
    for u in 0..graph.n() {
        let used: BTreeSet<Color> = graph.neighbors(u).iter().filter_map(|&w| colors[w]).collect();
        let c = lists
            .list(u)
            .iter()
            .copied()
            .find(|c| !used.contains(c))
            .ok_or_else(|| Error::InvalidArgument(format!("the list of vertex {u} is exhausted")))?;
        colors[u] = Some(c);
    }
    Coloring::new(colors.into_iter().map(|c| c.expect("all colored")).collect(), lists.palette())
}

/// Random lists of `size` distinct colors from `0..k` for every vertex.
pub fn random_lists<R: Rng + ?Sized>(n: usize, k: usize, size: usize, rng: &mut R) -> Result<ListAssignment> {
    if size == 0 || size > k {
        return Err(Error::InvalidArgument(format!("list size {size} must lie in 1..={k}")));
    }
    let palette: Vec<Color> = (0..k).collect();
    let mut lists: Vec<Vec<Color>> = (0..n).map(|_| palette.choose_multiple(rng, size).copied().collect()).collect();
    // Make sure the palette size is visible to the assignment.
    if let Some(first) = lists.first_mut() {
        if !first.contains(&(k - 1)) && size == k {
            first.push(k - 1);
        }
    }
    Ok(ListAssignment::new(lists))
}

/// One row of a stage-statistics table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRow {
    /// Transition name, e.g. `Bad->Good`.
    pub transition: String,
    /// Number of observed transitions.
    pub count: u64,
    /// Number of opportunities (trials or steps).
    pub trials: u64,
    /// Estimated probability (or mean, for `T_stop`).
    pub freq: f64,
    /// Standard error of `freq`.
    pub stderr: f64,
    /// The analytic bound the estimate is compared against.
    pub paper_bound: f64,
}

/// Monte Carlo statistics of the stage process of one tracked color.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageStatistics {
    /// Table rows: `Bad->Good`, `Good->GoodEnd`, `Good->BadEnd`, `T_stop`.
    pub rows: Vec<StageRow>,
    /// Runs that hit the step cap.
    pub truncated: u64,
    /// Largest Hamming distance observed when a run stopped.
    pub max_final_hamming: usize,
}

impl StageStatistics {
    /// Row by transition name.
    pub fn row(&self, transition: &str) -> Option<&StageRow> {
        self.rows.iter().find(|r| r.transition == transition)
    }
}

#[derive(Default)]
struct StageTally {
    bad_starts: u64,
    bad_to_good: u64,
    good_exposure: u64,
    good_to_good_end: u64,
    good_to_bad_end: u64,
    t_sum: f64,
    t_sq_sum: f64,
    truncated: u64,
    max_final: usize,
}

impl StageTally {
    fn merge(mut self, other: StageTally) -> StageTally {
        self.bad_starts += other.bad_starts;
        self.bad_to_good += other.bad_to_good;
        self.good_exposure += other.good_exposure;
        self.good_to_good_end += other.good_to_good_end;
        self.good_to_bad_end += other.good_to_bad_end;
        self.t_sum += other.t_sum;
        self.t_sq_sum += other.t_sq_sum;
        self.truncated += other.truncated;
        self.max_final = self.max_final.max(other.max_final);
        self
    }
}

fn binomial_row(transition: &str, count: u64, trials: u64, bound: f64) -> StageRow {
    let freq = if trials == 0 { 0.0 } else { count as f64 / trials as f64 };
    let stderr = if trials == 0 { 0.0 } else { (freq * (1.0 - freq) / trials as f64).sqrt() };
    StageRow { transition: transition.to_string(), count, trials, freq, stderr, paper_bound: bound }
}

/// Runs `trials` variable-length couplings from `pair`, tracking the stage
/// of `tracked`, and tabulates the one-step `Bad→Good` frequency, the
/// per-step `Good→GoodEnd` and `Good→BadEnd` frequencies and the mean
/// stopping time, each against its analytic bound.
pub fn stage_statistics(
    pair: &NeighboringPair<'_>,
    p: &FlipParams,
    tracked: Color,
    trials: u64,
    seed: u64,
    step_cap: u64,
) -> Result<StageStatistics> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let options = RunOptions { tracked_color: Some(tracked), step_cap, record: false };
    let tally = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<StageTally> {
            let mut rng = seeded_rng(seed, trial);
            let trace = run_variable_length(pair, p, &mut rng, &options)?;
            let mut tally = StageTally {
                t_sum: trace.t_stop as f64,
                t_sq_sum: (trace.t_stop as f64).powi(2),
                ..Default::default()
            };
            tally.truncated = u64::from(trace.truncated);
            tally.max_final = trace.final_hamming;
            let stages = &trace.stages;
            if stages.first() == Some(&Stage::Bad) {
                tally.bad_starts = 1;
                tally.bad_to_good = u64::from(stages.get(1) == Some(&Stage::Good));
            }
            for window in stages.windows(2) {
                if window[0] == Stage::Good {
                    tally.good_exposure += 1;
                    match window[1] {
                        Stage::GoodEnd => tally.good_to_good_end += 1,
                        Stage::BadEnd => tally.good_to_bad_end += 1,
                        _ => {}
                    }
                }
            }
            Ok(tally)
        })
        .try_reduce(StageTally::default, |a, b| Ok(a.merge(b)))?;

    let graph = pair.graph();
    let (n, k, d) = (graph.n() as f64, pair.k() as f64, graph.max_degree() as f64);
    let nk = n * k;
    let mean = tally.t_sum / trials as f64;
    let variance = (tally.t_sq_sum / trials as f64 - mean * mean).max(0.0);
    let rows = vec![
        binomial_row("Bad->Good", tally.bad_to_good, tally.bad_starts, 4.0 * (k - d - 1.0) / nk),
        binomial_row("Good->GoodEnd", tally.good_to_good_end, tally.good_exposure, (k - d - 2.0) / nk),
        binomial_row("Good->BadEnd", tally.good_to_bad_end, tally.good_exposure, 5.0 / n),
        StageRow {
            transition: "T_stop".into(),
            count: tally.t_sum as u64,
            trials,
            freq: mean,
            stderr: (variance / trials as f64).sqrt(),
            paper_bound: nk / (k - d - 2.0),
        },
    ];
    Ok(StageStatistics { rows, truncated: tally.truncated, max_final_hamming: tally.max_final })
}

/// Renders rows as CSV with columns
/// `transition,count,trials,freq,stderr,paper_bound`.
pub fn stage_csv(stats: &StageStatistics) -> String {
    let mut out = String::from("transition,count,trials,freq,stderr,paper_bound\n");
    for r in &stats.rows {
        out.push_str(&format!("{},{},{},{},{},{}\n", r.transition, r.count, r.trials, r.freq, r.stderr, r.paper_bound));
    }
    out
}

/// One flip-parameter vector of a barrier sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierRow {
    /// `p_1..p_6`.
    pub params: Vec<f64>,
    /// `nk·E[d_H' − 1]` on the single-neighbor construction.
    pub g1: f64,
    /// `nk·E[d_H' − 1]` on the paired construction.
    pub g2: f64,
}

impl BarrierRow {
    /// `true` when both constructions contract.
    pub fn both_contract(&self) -> bool {
        self.g1 < 0.0 && self.g2 < 0.0
    }
}

/// Monotone vectors `1 = p_1 ≥ … ≥ p_6 ≥ 0`: the three presets, a grid over
/// `(p_2, p_3)` with geometric tails, and random sorted draws, `count` in
/// total (at least the presets and the grid).
pub fn monotone_vectors(count: usize, seed: u64) -> Vec<FlipParams> {
    let mut out: Vec<FlipParams> = Preset::ALL.iter().map(|p| p.params::<f64>()).collect();
    for i in 0..=10 {
        for j in 0..=i {
            let p2 = 0.5 * i as f64 / 10.0;
            let p3 = p2 * j as f64 / 10.0;
            let tail = [1.0, p2, p3, p3 * 0.6, p3 * 0.35, p3 * 0.15];
            out.push(FlipParams::new(tail.to_vec()).expect("monotone by construction"));
        }
    }
    let mut rng = seeded_rng(seed, 0);
    while out.len() < count {
        let mut tail: Vec<f64> = (0..5).map(|_| rng.gen::<f64>()).collect();
        tail.sort_by(|a, b| b.total_cmp(a));
        tail.insert(0, 1.0);
        out.push(FlipParams::new(tail).expect("sorted draws are monotone"));
    }
    out
}

/// Evaluates the exact expected Hamming change on both constructions for
/// every vector of `vectors`.
pub fn barrier_sweep(max_degree: usize, k: usize, vectors: &[FlipParams]) -> Result<Vec<BarrierRow>> {
    let g1 = construct_g1(max_degree, k)?;
    let g2 = construct_g2(max_degree, k)?;
    let (p1, p2) = (g1.pair()?, g2.pair()?);
    let scale1 = (g1.graph.n() * k) as f64;
    let scale2 = (g2.graph.n() * k) as f64;
    Ok(vectors
        .par_iter()
        .map(|p| BarrierRow {
            params: (1..=6).map(|a| p.get(a)).collect(),
            g1: scale1 * expected_hamming_change(&p1, p),
            g2: scale2 * expected_hamming_change(&p2, p),
        })
        .collect())
}

/// All connected graphs on `2..=max_n` vertices with maximum degree at most
/// `max_degree`, one per isomorphism class.
pub fn connected_graphs(max_n: usize, max_degree: usize) -> Vec<Graph> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let perms = permutations(n);
        let mut seen = BTreeSet::new();
        for mask in 0u64..(1u64 << slots.len()) {
            let edges: Vec<(usize, usize)> =
                slots.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
            let graph = Graph::from_edges(n, &edges).expect("valid edges");
            if graph.max_degree() > max_degree || !graph.is_connected() {
                continue;
            }
            let canonical = perms
                .iter()
                .map(|perm| {
                    let mut relabeled: Vec<(usize, usize)> =
                        edges.iter().map(|&(u, v)| (perm[u].min(perm[v]), perm[u].max(perm[v]))).collect();
                    relabeled.sort_unstable();
                    relabeled
                })
                .min()
                .expect("at least one permutation");
            if seen.insert(canonical) {
                out.push(graph);
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for perm in permutations(n - 1) {
        for slot in 0..n {
            let mut p = perm.clone();
            p.insert(slot, n - 1);
            out.push(p);
        }
    }
    out
}

/// One neighboring pair `(σ, τ)` per orbit under permutations of the colors:
/// `σ` ranges over colorings whose colors appear in first-use order, and
/// `τ(v)` over the colors used by `σ` plus the first unused one.
pub fn neighboring_pairs_up_to_colors(graph: &Graph, k: usize) -> Vec<(Coloring, Coloring)> {
    fn grow(prefix: &mut Vec<Color>, n: usize, k: usize, out: &mut Vec<Vec<Color>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |&m| m + 1).min(k - 1);
        for c in 0..=next {
            prefix.push(c);
            grow(prefix, n, k, out);
            prefix.pop();
        }
    }
    let n = graph.n();
    let mut colorings = Vec::new();
    grow(&mut Vec::new(), n, k, &mut colorings);
    let mut out = Vec::new();
    for colors in colorings {
        let used = colors.iter().max().map_or(0, |&m| m + 1);
        let candidates = used.min(k - 1) + 1;
        for v in 0..n {
            for c in 0..candidates.min(k) {
                if c == colors[v] {
                    continue;
                }
                let mut other = colors.clone();
                other[v] = c;
                out.push((
                    Coloring::new(colors.clone(), k).expect("below k"),
                    Coloring::new(other, k).expect("below k"),
                ));
            }
        }
    }
    out
}

/// The bound `(11/6 − δ/318)Δ − k` on `∇`.
pub fn contraction_bound(k: usize, max_degree: usize) -> f64 {
    (11.0 / 6.0 - DELTA / 318.0) * max_degree as f64 - k as f64
}

/// Result of an exhaustive contraction check.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    /// Graphs examined.
    pub graphs: usize,
    /// Neighboring pairs examined.
    pub pairs: usize,
    /// Largest `∇ − bound` seen (non-positive means the bound held).
    pub max_excess: f64,
    /// Largest `|∇ − ∇_H − ∇_B|`.
    pub max_decomposition_error: f64,
    /// The pair attaining `max_excess`, as `edges | σ | τ`.
    pub worst: Option<String>,
}

/// Checks `∇ ≤ (11/6 − δ/318)Δ − k` with `k = 2Δ` and `η = δΔ/(53k)` for every
/// neighboring pair (up to color permutation) of every graph.
pub fn contraction_check(graphs: &[Graph], p: &FlipParams) -> Result<ContractionReport> {
    let per_graph = graphs
        .par_iter()
        .map(|graph| -> Result<ContractionReport> {
            let delta = graph.max_degree();
            let k = 2 * delta;
            let mp = MetricParams::for_degree(k, delta)?;
            let bound = contraction_bound(k, delta);
            let mut report = ContractionReport { graphs: 1, max_excess: f64::NEG_INFINITY, ..Default::default() };
            for (sigma, tau) in neighboring_pairs_up_to_colors(graph, k) {
                let pair = NeighboringPair::new(graph, sigma, tau)?;
                let value = nabla(&pair, p, &mp, DEFAULT_STATE_CAP)?;
                report.pairs += 1;
                let excess = value.total - bound;
                if excess > report.max_excess {
                    report.max_excess = excess;
                    report.worst = Some(format!("{:?} | {} | {}", graph.edges(), pair.sigma(), pair.tau()));
                }
                let error = (value.total - value.hamming - value.extremal).abs();
                report.max_decomposition_error = report.max_decomposition_error.max(error);
            }
            Ok(report)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = ContractionReport { max_excess: f64::NEG_INFINITY, ..Default::default() };
    for r in per_graph {
        total.graphs += r.graphs;
        total.pairs += r.pairs;
        total.max_decomposition_error = total.max_decomposition_error.max(r.max_decomposition_error);
        if r.max_excess > total.max_excess {
            total.max_excess = r.max_excess;
            total.worst = r.worst;
        }
    }
    Ok(total)
}

/// Steps until two flip chains, started from different proper colorings and
/// driven by the same random choices, agree; `None` if `cap` is reached.
pub fn coalescence_time(
    graph: &Graph,
    k: usize,
    p: &FlipParams,
    seed: u64,
    stream: u64,
    cap: u64,
) -> Result<Option<u64>> {
    let mut a = greedy_coloring(graph, k, false)?.as_slice().to_vec();
    let mut b = greedy_coloring(graph, k, true)?.as_slice().to_vec();
    let mut rng_a = seeded_rng(seed, stream);
    let mut rng_b = rng_a.clone();
    let mut sampler_a = FlipSampler::new(graph);
    let mut sampler_b = FlipSampler::new(graph);
    for t in 0..cap {
        if a == b {
            return Ok(Some(t));
        }
        sampler_a.step(&mut a, k, p, &mut rng_a);
        sampler_b.step(&mut b, k, p, &mut rng_b);
    }
    Ok(if a == b { Some(cap) } else { None })
}

/// Coalescence statistics at one graph size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingRow {
    /// Number of vertices.
    pub n: usize,
    /// Colors.
    pub k: usize,
    /// Mean coalescence time over the runs that coalesced.
    pub mean: f64,
    /// Standard error of `mean`.
    pub stderr: f64,
    /// Runs that did not coalesce within the cap.
    pub censored: u64,
    /// `mean / (n ln n)`, for eyeballing the growth rate.
    pub per_n_log_n: f64,
    /// The variable-length path-coupling bound at `ε = 1/4`.
    pub bound: f64,
}

/// Mean coalescence time of the shared-randomness coupling on random graphs
/// of each size, with `k = default_k(Δ)` unless given.
pub fn mixing_estimate(
    sizes: &[usize],
    max_degree: usize,
    k: Option<usize>,
    p: &FlipParams,
    trials: u64,
    seed: u64,
    cap: u64,
) -> Result<Vec<MixingRow>> {
    let k = k.unwrap_or_else(|| default_k(max_degree).max(max_degree + 3));
    let lambda_star = 1.833239;
    let alpha = (k as f64 - lambda_star * max_degree as f64) / (k as f64 - max_degree as f64 - 2.0);
    sizes
        .iter()
        .map(|&n| {
            let mut rng = seeded_rng(seed, n as u64);
            let graph = random_graph(n, max_degree, &mut rng);
            let times: Vec<Option<u64>> = (0..trials)
                .into_par_iter()
                .map(|trial| coalescence_time(&graph, k, p, seed, trial, cap))
                .collect::<Result<_>>()?;
            let done: Vec<f64> = times.iter().flatten().map(|&t| t as f64).collect();
            let mean = if done.is_empty() { f64::NAN } else { done.iter().sum::<f64>() / done.len() as f64 };
            let var = if done.len() < 2 {
                0.0
            } else {
                done.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (done.len() - 1) as f64
            };
            let bound =
                if alpha > 0.0 { mixing_bound(alpha, 13.0, 2.21 * n as f64, n as f64, 0.25)? } else { f64::INFINITY };
            Ok(MixingRow {
                n,
                k,
                mean,
                stderr: (var / done.len().max(1) as f64).sqrt(),
                censored: (times.len() - done.len()) as u64,
                per_n_log_n: mean / (n as f64 * (n as f64).ln()),
                bound,
            })
        })
        .collect()
}

/// What an experiment does.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Run a chain and report the empirical law of the final state.
    Sample,
    /// Solve a program of the family and report its optimum and tight rows.
    VerifyLp,
    /// Run variable-length couplings and report stopping times.
    Couple,
    /// Tabulate stage transitions of a tracked color.
    Stages,
    /// Estimate coalescence times over graph sizes.
    Mixing,
    /// Build a construction and report its configurations.
    Construct,
    /// Report the metric drift over sampled neighboring pairs.
    Contract,
    /// Run a list chain with random lists.
    ListSample,
}

/// Where the graph comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum GraphSpec {
    /// The single-neighbor tree.
    G1 {
        /// `Δ`.
        delta: usize,
    },
    /// The paired tree (`Δ` even).
    G2 {
        /// `Δ`.
        delta: usize,
    },
    /// A random bounded-degree graph.
    Random {
        /// Vertices.
        n: usize,
        /// Degree cap.
        delta: usize,
    },
    /// A path.
    Path {
        /// Vertices.
        n: usize,
    },
    /// An edge-list document.
    EdgeList {
        /// The document text.
        text: String,
    },
}

impl GraphSpec {
    fn degree_hint(&self) -> Option<usize> {
        match self {
            GraphSpec::G1 { delta } | GraphSpec::G2 { delta } | GraphSpec::Random { delta, .. } => Some(*delta),
            GraphSpec::Path { .. } | GraphSpec::EdgeList { .. } => None,
        }
    }
}

/// Which flip parameters to use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamSpec {
    /// A named preset.
    Preset(Preset),
    /// A parameter document (`α p_α` per line).
    Text(String),
}

impl ParamSpec {
    fn exact(&self) -> Result<FlipParams<Rational>> {
        match self {
            ParamSpec::Preset(p) => Ok(p.exact()),
            ParamSpec::Text(t) => FlipParams::parse(t),
        }
    }

    fn label(&self) -> String {
        match self {
            ParamSpec::Preset(p) => p.name().to_string(),
            ParamSpec::Text(_) => "custom".to_string(),
        }
    }
}

/// Full description of an experiment run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Experiment to run.
    pub kind: ExperimentKind,
    /// Graph source.
    pub graph: GraphSpec,
    /// Number of colors; defaults to `⌈(11/6 − ε₀)Δ⌉` (at least `Δ + 3`).
    pub k: Option<usize>,
    /// Flip parameters.
    pub params: ParamSpec,
    /// Independent trials.
    pub trials: u64,
    /// Seed of all randomness.
    pub seed: u64,
    /// Step cap for coupling and coalescence runs.
    pub step_cap: u64,
    /// Chain steps per trial for the sampling experiments.
    pub steps: u64,
    /// Chain used by the sampling experiments.
    pub chain: ChainKind,
    /// Program for `verify-lp` (`lp1` … `lp5`, `lp5:<gamma>`).
    pub lp: String,
    /// List size for `list-sample`; defaults to `Δ + 2`.
    pub list_size: Option<usize>,
    /// Graph sizes for `mixing`.
    pub sizes: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::Couple,
            graph: GraphSpec::G2 { delta: 6 },
            k: None,
            params: ParamSpec::Preset(Preset::VigodaEq11),
            trials: 1000,
            seed: 0,
            step_cap: 10_000_000,
            steps: 1000,
            chain: ChainKind::Flip,
            lp: "lp2".into(),
            list_size: None,
            sizes: vec![8, 16, 32],
        }
    }
}

/// A scalar in an experiment summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SummaryValue {
    /// Integer.
    Integer(i64),
    /// Real number.
    Number(f64),
    /// Boolean.
    Flag(bool),
    /// Text.
    Text(String),
}

impl From<f64> for SummaryValue {
    fn from(x: f64) -> Self {
        SummaryValue::Number(x)
    }
}

impl From<usize> for SummaryValue {
    fn from(x: usize) -> Self {
        SummaryValue::Integer(x as i64)
    }
}

impl From<u64> for SummaryValue {
    fn from(x: u64) -> Self {
        SummaryValue::Integer(x as i64)
    }
}

impl From<bool> for SummaryValue {
    fn from(x: bool) -> Self {
        SummaryValue::Flag(x)
    }
}

impl From<String> for SummaryValue {
    fn from(x: String) -> Self {
        SummaryValue::Text(x)
    }
}

impl From<&str> for SummaryValue {
    fn from(x: &str) -> Self {
        SummaryValue::Text(x.to_string())
    }
}

/// The outcome of [`run_experiment`]: a summary plus a table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    /// The configuration that produced this result.
    pub config: ExperimentConfig,
    /// Parameter label (preset name or `custom`).
    pub preset: String,
    /// Wall-clock time in milliseconds.
    pub elapsed_ms: u128,
    /// Named scalar results.
    pub summary: BTreeMap<String, SummaryValue>,
    /// Table header.
    pub header: Vec<String>,
    /// Table rows, as text.
    pub rows: Vec<Vec<String>>,
}

impl ExperimentResult {
    fn new(config: &ExperimentConfig, header: &[&str]) -> Self {
        Self {
            config: config.clone(),
            preset: config.params.label(),
            elapsed_ms: 0,
            summary: BTreeMap::new(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn put(&mut self, key: &str, value: impl Into<SummaryValue>) {
        self.summary.insert(key.to_string(), value.into());
    }
}

/// The graph of a non-construction source.
fn build_graph(spec: &GraphSpec, seed: u64) -> Result<Graph> {
    Ok(match spec {
        GraphSpec::G1 { .. } | GraphSpec::G2 { .. } => unreachable!("constructions are built with k"),
        GraphSpec::Random { n, delta } => random_graph(*n, *delta, &mut seeded_rng(seed, u64::MAX)),
        GraphSpec::Path { n } => Graph::path(*n),
        GraphSpec::EdgeList { text } => load_graph(text)?,
    })
}

/// The graph (and, for the constructions, the built-in pair) of a config.
fn resolve(cfg: &ExperimentConfig) -> Result<(Instance, usize)> {
    let delta_hint = cfg.graph.degree_hint();
    match &cfg.graph {
        GraphSpec::G1 { delta } | GraphSpec::G2 { delta } => {
            let g1 = matches!(cfg.graph, GraphSpec::G1 { .. });
            // Children of the root carry one or two leaves, so the maximum
            // degree is at least 2 (resp. 3) even for tiny Δ.
            let degree = (*delta).max(if g1 { 2 } else { 3 });
            let k = cfg.k.unwrap_or_else(|| default_k(degree).max(degree + 3));
            let inst = if g1 { construct_g1(*delta, k)? } else { construct_g2(*delta, k)? };
            Ok((inst, k))
        }
        spec => {
            let graph = build_graph(spec, cfg.seed)?;
            let delta = delta_hint.unwrap_or(graph.max_degree()).max(graph.max_degree()).max(1);
            let k = cfg.k.unwrap_or_else(|| default_k(delta).max(delta + 3));
            let inst = random_pair_on(graph, k, &mut seeded_rng(cfg.seed, u64::MAX - 1))?;
            Ok((inst, k))
        }
    }
}

fn tracked_color(pair: &NeighboringPair<'_>) -> Option<Color> {
    let configs = extract_configurations(pair);
    let by_state = |wanted: StateLabel| configs.iter().find(|(_, cfg)| classify_state(cfg) == wanted).map(|(&c, _)| c);
    by_state(StateLabel::Bad).or_else(|| by_state(StateLabel::Good))
}

/// Runs an experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    let exact = cfg.params.exact()?;
    let p = exact.convert::<f64>();
    let mut result = match cfg.kind {
        ExperimentKind::VerifyLp => verify_lp_experiment(cfg, &exact)?,
        ExperimentKind::Mixing => {
            let delta = cfg.graph.degree_hint().unwrap_or(3);
            let rows = mixing_estimate(&cfg.sizes, delta, cfg.k, &p, cfg.trials, cfg.seed, cfg.step_cap)?;
            let mut r =
                ExperimentResult::new(cfg, &["n", "k", "mean", "stderr", "censored", "mean_over_n_ln_n", "bound"]);
            for row in rows {
                r.rows.push(vec![
                    row.n.to_string(),
                    row.k.to_string(),
                    row.mean.to_string(),
                    row.stderr.to_string(),
                    row.censored.to_string(),
                    row.per_n_log_n.to_string(),
                    row.bound.to_string(),
                ]);
            }
            r.put("delta", delta);
            r
        }
        _ => {
            let (inst, k) = resolve(cfg)?;
            instance_experiment(cfg, &inst, k, &p)?
        }
    };
    result.put("seed", cfg.seed);
    result.elapsed_ms = start.elapsed().as_millis();
    Ok(result)
}

/// Largest configuration size `n_max` of the programs built by `verify-lp`.
pub const LP_N_MAX: usize = 6;
/// Neighbor-multiplicity cutoff `m*` of the programs built by `verify-lp`.
pub const LP_M_STAR: usize = 3;

/// The program a `verify-lp` experiment solves.
pub fn experiment_program(cfg: &ExperimentConfig) -> Result<LpInstance> {
    build_lp(cfg.lp.parse()?, LP_N_MAX, LP_M_STAR)
}

fn verify_lp_experiment(cfg: &ExperimentConfig, exact: &FlipParams<Rational>) -> Result<ExperimentResult> {
    let kind: LpKind = cfg.lp.parse()?;
    let lp = build_lp(kind.clone(), LP_N_MAX, LP_M_STAR)?;
    let mut r = ExperimentResult::new(cfg, &["tag", "kind"]);
    r.put("program", kind.name());
    r.put("rows", lp.len());
    if matches!(kind, LpKind::Lp3 | LpKind::Lp4) {
        let sol = solve_lp::<Rational>(&lp);
        r.put("status", format!("{:?}", sol.status));
        r.put("objective_exact", sol.objective.to_string());
        r.put("objective", crate::scalar::Scalar::to_f64(&sol.objective));
        let values: Vec<String> =
            (1..=6).filter_map(|a| sol.value(&lp, &format!("p{a}"))).map(|v| v.to_string()).collect();
        r.put("p", values.join(" "));
    } else {
        let sol = solve_lp::<f64>(&lp);
        r.put("status", format!("{:?}", sol.status));
        r.put("objective", sol.objective);
        r.put("duality_gap", sol.duality_gap);
        let values: Vec<String> =
            (1..=6).filter_map(|a| sol.value(&lp, &format!("p{a}"))).map(|v| format!("{v:.6}")).collect();
        r.put("p", values.join(" "));
    }
    match complete_assignment::<f64>(&lp, exact) {
        Ok(at) if at.status == LpStatus::Optimal => {
            r.put("objective_at_params", at.objective);
            let mut classes = BTreeSet::new();
            for tag in &at.tight {
                if tag.kind == TagKind::Config {
                    if let Ok(cfg) = crate::config::Configuration::parse(&tag.label) {
                        classes.insert(cfg.symmetry_class());
                    }
                }
                r.rows.push(vec![tag.to_string(), format!("{:?}", tag.kind)]);
            }
            r.put("tight_configurations_up_to_symmetry", classes.len());
        }
        Ok(at) => r.put("objective_at_params", format!("{:?}", at.status)),
        Err(e) => r.put("objective_at_params", e.to_string()),
    }
    if matches!(kind, LpKind::Lp4) {
        let report = verify_dpp_feasibility(exact);
        r.put("dpp_feasible", report.passed);
        r.put("dpp_size_two_equalities", report.m2_equalities.join(" "));
    }
    Ok(r)
}

fn instance_experiment(cfg: &ExperimentConfig, inst: &Instance, k: usize, p: &FlipParams) -> Result<ExperimentResult> {
    let graph = &inst.graph;
    let mut r;
    match cfg.kind {
        ExperimentKind::Construct => {
            let pair = inst.pair()?;
            r = ExperimentResult::new(cfg, &["color", "configuration", "H", "state"]);
            for (c, config) in extract_configurations(&pair) {
                r.rows.push(vec![
                    c.to_string(),
                    config.canonical(),
                    h_value(&config, p).to_string(),
                    format!("{:?}", color_state(&pair, c)),
                ]);
            }
            let (sing, bad, good) = count_states(&pair);
            r.put("n", graph.n());
            r.put("k", k);
            r.put("max_degree", graph.max_degree());
            r.put("nk_expected_change", (graph.n() * k) as f64 * expected_hamming_change(&pair, p));
            r.put("gamma", gamma(&pair, p));
            r.put("n_sing", sing);
            r.put("n_bad", bad);
            r.put("n_good", good);
            r.put("edges", graph.to_edge_list());
            r.put("sigma", inst.sigma.to_string());
            r.put("tau", inst.tau.to_string());
        }
        ExperimentKind::Couple => {
            let pair = inst.pair()?;
            let options = RunOptions { tracked_color: None, step_cap: cfg.step_cap, record: false };
            let traces = (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_variable_length(&pair, p, &mut seeded_rng(cfg.seed, t), &options))
                .collect::<Result<Vec<_>>>()?;
            r = ExperimentResult::new(cfg, &["trial", "t_stop", "final_hamming", "truncated"]);
            let mut sum = 0.0;
            let mut width = 0;
            for (t, trace) in traces.iter().enumerate() {
                sum += trace.t_stop as f64;
                width = width.max(trace.final_hamming);
                r.rows.push(vec![
                    t.to_string(),
                    trace.t_stop.to_string(),
                    trace.final_hamming.to_string(),
                    trace.truncated.to_string(),
                ]);
            }
            let (n, d) = (graph.n() as f64, graph.max_degree() as f64);
            r.put("mean_t_stop", sum / cfg.trials.max(1) as f64);
            r.put("t_stop_bound", n * k as f64 / (k as f64 - d - 2.0));
            r.put("max_final_hamming", width);
        }
        ExperimentKind::Stages => {
            let pair = inst.pair()?;
            let tracked = tracked_color(&pair)
                .ok_or_else(|| Error::InvalidArgument("no color is in state Bad or Good around v".into()))?;
            let stats = stage_statistics(&pair, p, tracked, cfg.trials, cfg.seed, cfg.step_cap)?;
            r = ExperimentResult::new(cfg, &["transition", "count", "trials", "freq", "stderr", "paper_bound"]);
            for row in &stats.rows {
                r.rows.push(vec![
                    row.transition.clone(),
                    row.count.to_string(),
                    row.trials.to_string(),
                    row.freq.to_string(),
                    row.stderr.to_string(),
                    row.paper_bound.to_string(),
                ]);
            }
            r.put("tracked_color", tracked);
            r.put("truncated", stats.truncated);
            r.put("max_final_hamming", stats.max_final_hamming);
        }
        ExperimentKind::Contract => {
            let delta = graph.max_degree().max(1);
            let mp = MetricParams::for_degree(k, delta)?;
            let bound = contraction_bound(k, delta);
            r = ExperimentResult::new(cfg, &["trial", "nabla", "nabla_h", "nabla_b", "bound"]);
            let mut rng = seeded_rng(cfg.seed, 1);
            let mut worst = f64::NEG_INFINITY;
            for t in 0..cfg.trials {
                let sample = if t == 0 { inst.clone() } else { random_pair_on(graph.clone(), k, &mut rng)? };
                let pair = sample.pair()?;
                let value = nabla(&pair, p, &mp, DEFAULT_STATE_CAP)?;
                worst = worst.max(value.total);
                r.rows.push(vec![
                    t.to_string(),
                    value.total.to_string(),
                    value.hamming.to_string(),
                    value.extremal.to_string(),
                    bound.to_string(),
                ]);
            }
            r.put("eta", mp.eta());
            r.put("max_nabla", worst);
            r.put("bound", bound);
        }
        ExperimentKind::Sample | ExperimentKind::ListSample => {
            let lists = if cfg.kind == ExperimentKind::ListSample || cfg.chain.needs_lists() {
                let size = cfg.list_size.unwrap_or(graph.max_degree() + 2).min(k);
                Some(random_lists(graph.n(), k, size, &mut seeded_rng(cfg.seed, u64::MAX - 2))?)
            } else {
                None
            };
            let chain = match (&lists, cfg.chain) {
                (Some(_), ChainKind::Glauber | ChainKind::ListGlauber) => ChainKind::ListGlauber,
                (Some(_), _) => ChainKind::ListFlip,
                (None, kind) => kind,
            };
            let start = match &lists {
                Some(l) => greedy_list_coloring(graph, l)?,
                None => greedy_coloring(graph, k, false)?,
            };
            let finals = (0..cfg.trials)
                .into_par_iter()
                .map(|t| -> Result<Coloring> {
                    let mut rng = seeded_rng(cfg.seed, t);
                    let mut sigma = start.clone();
                    match chain {
                        ChainKind::Flip => sigma = run_flip_chain(graph, &sigma, p, cfg.steps, &mut rng),
                        ChainKind::Glauber => {
                            for _ in 0..cfg.steps {
                                sigma = crate::chains::glauber_step(graph, &sigma, &mut rng);
                            }
                        }
                        ChainKind::ListFlip => {
                            let l = lists.as_ref().expect("list chain has lists");
                            for _ in 0..cfg.steps {
                                sigma = list_flip_step(graph, &sigma, l, p, &mut rng)?;
                            }
                        }
                        ChainKind::ListGlauber => {
                            let l = lists.as_ref().expect("list chain has lists");
                            for _ in 0..cfg.steps {
                                sigma = list_glauber_step(graph, &sigma, l, &mut rng)?;
                            }
                        }
                    }
                    Ok(sigma)
                })
                .collect::<Result<Vec<_>>>()?;
            r = ExperimentResult::new(cfg, &["trial", "coloring", "proper"]);
            let mut proper = 0usize;
            for (t, sigma) in finals.iter().enumerate() {
                let ok = is_proper(graph, sigma);
                proper += usize::from(ok);
                r.rows.push(vec![t.to_string(), sigma.to_string(), ok.to_string()]);
            }
            r.put("chain", chain.name());
            r.put("proper_fraction", proper as f64 / finals.len().max(1) as f64);
            let space = match &lists {
                Some(l) => StateSpace::lists(l, k, 1 << 16),
                None => StateSpace::full(graph.n(), k, 1 << 16),
            };
            if let Ok(space) = space {
                let target = uniform_over_proper(graph, &space);
                let mut empirical = vec![0.0; space.size()];
                for sigma in &finals {
                    if let Some(i) = space.index_of(sigma) {
                        empirical[i] += 1.0 / finals.len() as f64;
                    }
                }
                r.put("empirical_tv_to_uniform", total_variation(&empirical, &target));
            }
        }
        ExperimentKind::VerifyLp | ExperimentKind::Mixing => unreachable!("handled without an instance"),
    }
    Ok(r)
}
