//! The greedy one-step coupling of two flip-dynamics copies started from a
//! neighboring pair, the variable-length coupling built on it, stage tracking
//! for a single color, and the path-coupling mixing bound.
//!
//! Flips that do not touch the disagreement vertex and are components in both
//! colorings are coupled with themselves. Every other flip is a component
//! through `v` or a component `S_σ(u, τ(v))` / `S_τ(u, σ(v))` grown from a
//! neighbor `u` of `v`; these are grouped by the color of `u` and coupled with
//! the largest-component matching described on [`greedy_coupling_distribution`].

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{bucket_for_color, buckets, classify_state, Bucket, NeighboringPair, Special, StateLabel};
use crate::error::{Error, Result};
use crate::graph::{
    component_into, flip_in_place, hamming, kempe_component_with, Color, Coloring, ComponentScratch, Graph,
    KempeComponent, Vertex,
};
use crate::params::FlipParams;
use crate::scalar::{min_of, Scalar};

/// Which part of the coupling produced an outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    /// A flip that is the same component in both colorings.
    Identity,
    /// `δ_c = 0`: both copies recolor `v` alone.
    Coalesce,
    /// The component of `v` in σ paired with the largest `a`-component.
    LargestSigma,
    /// The largest `b`-component paired with the component of `v` in τ.
    LargestTau,
    /// Matched remainders `S_σ(u_i, τ(v))` and `S_τ(u_i, σ(v))`.
    Paired,
    /// Unmatched remainder of `S_τ(u_i, σ(v))`.
    TauOnly,
    /// Unmatched remainder of `S_σ(u_i, τ(v))`.
    SigmaOnly,
}

/// One joint outcome: the component flipped in each copy (or none) and its mass.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledFlip<T> {
    /// Flip applied to σ.
    pub s_sigma: Option<KempeComponent>,
    /// Flip applied to τ.
    pub s_tau: Option<KempeComponent>,
    /// Probability of the outcome.
    pub mass: T,
    /// Producing move.
    pub kind: Move,
    /// The color bucket for disagreement outcomes.
    pub color: Option<Color>,
}

impl<T> CoupledFlip<T> {
    /// `true` when at least one side flips a component of the disagreement
    /// family, which is exactly when the pair is terminating.
    pub fn is_terminating(&self) -> bool {
        self.kind != Move::Identity
    }
}

/// The explicit joint distribution of one coupled step.
#[derive(Clone, Debug)]
pub struct CouplingDistribution<T> {
    /// All outcomes with positive mass.
    pub outcomes: Vec<CoupledFlip<T>>,
    /// Mass of the joint no-op.
    pub noop: T,
}

impl<T: Scalar> CouplingDistribution<T> {
    /// Sum of the outcome masses plus the no-op mass.
    pub fn total_mass(&self) -> T {
        self.outcomes.iter().fold(self.noop.clone(), |acc, o| acc + o.mass.clone())
    }

    /// Total mass of terminating outcomes.
    pub fn terminating_mass(&self) -> T {
        self.outcomes.iter().filter(|o| o.is_terminating()).fold(T::zero(), |acc, o| acc + o.mass.clone())
    }

    /// Marginal laws of σ' and τ' as maps from color vectors to probability.
    pub fn marginals(&self, pair: &NeighboringPair<'_>) -> (BTreeMap<Vec<Color>, T>, BTreeMap<Vec<Color>, T>) {
        let mut left: BTreeMap<Vec<Color>, T> = BTreeMap::new();
        let mut right: BTreeMap<Vec<Color>, T> = BTreeMap::new();
        let add = |map: &mut BTreeMap<Vec<Color>, T>, key: Vec<Color>, mass: T| {
            let slot = map.entry(key).or_insert_with(T::zero);
            *slot = slot.clone() + mass;
        };
        add(&mut left, pair.sigma().as_slice().to_vec(), self.noop.clone());
        add(&mut right, pair.tau().as_slice().to_vec(), self.noop.clone());
        for o in &self.outcomes {
            let (s, t) = apply_outcome(pair, o);
            add(&mut left, s.as_slice().to_vec(), o.mass.clone());
            add(&mut right, t.as_slice().to_vec(), o.mass.clone());
        }
        (left, right)
    }
}

/// Applies the flips of an outcome to copies of σ and τ.
pub fn apply_outcome<T>(pair: &NeighboringPair<'_>, outcome: &CoupledFlip<T>) -> (Coloring, Coloring) {
    let mut sigma = pair.sigma().clone();
    let mut tau = pair.tau().clone();
    if let Some(s) = &outcome.s_sigma {
        sigma = crate::graph::flip(&sigma, s);
    }
    if let Some(s) = &outcome.s_tau {
        tau = crate::graph::flip(&tau, s);
    }
    (sigma, tau)
}

fn scaled<T: Scalar>(p: &FlipParams<T>, alpha: usize, nk: &T) -> T {
    p.get(alpha) / nk.clone()
}

fn check_nonnegative<T: Scalar>(value: &T, what: &str) {
    assert!(
        !(value.below_zero() && !value.is_negligible()),
        "negative coupling mass for {what}: {value:?} (flip parameters must be non-increasing)"
    );
}

fn non_empty(s: &KempeComponent) -> Option<KempeComponent> {
    (!s.is_empty()).then(|| s.clone())
}

fn push<T: Scalar>(out: &mut Vec<CoupledFlip<T>>, flip: CoupledFlip<T>) {
    if flip.mass.above_zero() {
        out.push(flip);
    }
}

/// Outcomes of one color bucket with `δ_c > 0`.
fn bucket_outcomes<T: Scalar>(bucket: &Bucket, p: &FlipParams<T>, nk: &T, out: &mut Vec<CoupledFlip<T>>) {
    let cfg = bucket.configuration();
    let color = Some(bucket.color);
    let (a_max, i_max) = (cfg.a_max(), cfg.i_max());
    let (b_max, j_max) = (cfg.b_max(), cfg.j_max());
    let p_a = scaled(p, cfg.big_a, nk);
    let p_b = scaled(p, cfg.big_b, nk);
    let with_sigma = bucket.special != Special::SigmaV;
    let with_tau = bucket.special != Special::TauV;

    if with_sigma {
        let partner = if a_max > 0 { non_empty(&bucket.a_sets[i_max]) } else { None };
        push(
            out,
            CoupledFlip {
                s_sigma: Some(bucket.sigma_root.clone()),
                s_tau: partner,
                mass: p_a.clone(),
                kind: Move::LargestSigma,
                color,
            },
        );
    }
    if with_tau {
        let partner = if b_max > 0 { non_empty(&bucket.b_sets[j_max]) } else { None };
        push(
            out,
            CoupledFlip {
                s_sigma: partner,
                s_tau: Some(bucket.tau_root.clone()),
                mass: p_b.clone(),
                kind: Move::LargestTau,
                color,
            },
        );
    }
    for i in 0..cfg.m() {
        let mut q = scaled(p, cfg.a[i], nk);
        if with_sigma && i == i_max && a_max > 0 {
            q = q - p_a.clone();
        }
        let mut q_prime = scaled(p, cfg.b[i], nk);
        if with_tau && i == j_max && b_max > 0 {
            q_prime = q_prime - p_b.clone();
        }
        check_nonnegative(&q, "q_i");
        check_nonnegative(&q_prime, "q'_i");
        let both = min_of(&q, &q_prime);
        if both.above_zero() {
            push(
                out,
                CoupledFlip {
                    s_sigma: non_empty(&bucket.b_sets[i]),
                    s_tau: non_empty(&bucket.a_sets[i]),
                    mass: both.clone(),
                    kind: Move::Paired,
                    color,
                },
            );
        }
        let only_tau = q - both.clone();
        if only_tau.above_zero() {
            push(
                out,
                CoupledFlip {
                    s_sigma: None,
                    s_tau: non_empty(&bucket.a_sets[i]),
                    mass: only_tau,
                    kind: Move::TauOnly,
                    color,
                },
            );
        }
        let only_sigma = q_prime - both;
        if only_sigma.above_zero() {
            push(
                out,
                CoupledFlip {
                    s_sigma: non_empty(&bucket.b_sets[i]),
                    s_tau: None,
                    mass: only_sigma,
                    kind: Move::SigmaOnly,
                    color,
                },
            );
        }
    }
}

/// Outcomes involving the disagreement family, including the coalescing
/// outcomes of colors absent from the neighborhood of `v`.
pub fn disagreement_outcomes<T: Scalar>(
    pair: &NeighboringPair<'_>,
    p: &FlipParams<T>,
    scratch: &mut ComponentScratch,
) -> Vec<CoupledFlip<T>> {
    let k = pair.k();
    let nk = T::from_i64((pair.graph().n() * k) as i64);
    let (v, s, t) = (pair.v(), pair.sigma_v(), pair.tau_v());
    let mut out = Vec::new();
    let all = buckets(pair, scratch);
    let mut present = vec![false; k];
    for bucket in &all {
        present[bucket.color] = true;
        bucket_outcomes(bucket, p, &nk, &mut out);
    }
    let unit = scaled(p, 1, &nk);
    for c in (0..k).filter(|&c| !present[c]) {
        let lone = |base: Color| KempeComponent { vertices: vec![v], anchor: (v, c), colors: (base, c) };
        let (s_sigma, s_tau) = if c == s {
            (None, Some(lone(t)))
        } else if c == t {
            (Some(lone(s)), None)
        } else {
            (Some(lone(s)), Some(lone(t)))
        };
        push(&mut out, CoupledFlip { s_sigma, s_tau, mass: unit.clone(), kind: Move::Coalesce, color: Some(c) });
    }
    out
}

/// `true` when the σ-component `S` (not containing `v`) belongs to the
/// disagreement family: its color pair contains `τ(v)` and it holds a
/// neighbor of `v` whose color is the other color of the pair.
fn in_family_without_v(pair: &NeighboringPair<'_>, vertices: &[Vertex], colors: (Color, Color)) -> bool {
    let t = pair.tau_v();
    if colors.0 != t && colors.1 != t {
        return false;
    }
    let (graph, v, sigma) = (pair.graph(), pair.v(), pair.sigma());
    vertices.iter().any(|&u| sigma.get(u) != t && graph.has_edge(u, v))
}

/// Distinct σ-components that are shared with τ: they avoid `v` and are not
/// grown from a neighbor of `v` with color pair containing `τ(v)`.
pub fn shared_components(pair: &NeighboringPair<'_>, scratch: &mut ComponentScratch) -> Vec<KempeComponent> {
    let graph = pair.graph();
    let v = pair.v();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for w in 0..graph.n() {
        for c in 0..pair.k() {
            let s = kempe_component_with(graph, pair.sigma(), w, c, scratch);
            if s.is_empty() || s.contains(v) || in_family_without_v(pair, &s.vertices, s.colors) {
                continue;
            }
            if seen.insert(s.flip_key()) {
                out.push(s);
            }
        }
    }
    out
}

/// The full joint distribution of the greedy coupling.
///
/// Per color `c ∉ {σ(v), τ(v)}` with `δ_c > 0` the outcomes are
/// `(S_σ(v,c), a_imax)` with mass `p_A`, `(b_jmax, S_τ(v,c))` with mass `p_B`,
/// and for each index `i` the masses `q_i = p_{a_i} − p_A·1[i = i_max]` and
/// `q'_i = p_{b_i} − p_B·1[i = j_max]` split into a matched part
/// `min(q_i, q'_i)` and two unmatched parts. The subtraction is skipped when
/// the maximum is zero. For `c = τ(v)` only the σ side has a component
/// through `v`, so the outcomes are `(S_σ(v,τ(v)), a_imax)` and `(∅, a_j)`;
/// `c = σ(v)` is symmetric. Colors absent around `v` coalesce. All masses are
/// divided by `nk`; the remaining mass is the joint no-op.
pub fn greedy_coupling_distribution<T: Scalar>(
    pair: &NeighboringPair<'_>,
    p: &FlipParams<T>,
) -> CouplingDistribution<T> {
    let mut scratch = ComponentScratch::new(pair.graph().n());
    let mut outcomes = disagreement_outcomes(pair, p, &mut scratch);
    let nk = T::from_i64((pair.graph().n() * pair.k()) as i64);
    for s in shared_components(pair, &mut scratch) {
        let mass = scaled(p, s.size(), &nk);
        if mass.above_zero() {
            outcomes.push(CoupledFlip {
                s_sigma: Some(s.clone()),
                s_tau: Some(s),
                mass,
                kind: Move::Identity,
                color: None,
            });
        }
    }
    let used = outcomes.iter().fold(T::zero(), |acc, o| acc + o.mass.clone());
    let noop = T::one() - used;
    check_nonnegative(&noop, "the joint no-op");
    CouplingDistribution { outcomes, noop }
}

/// Exact `E[d_H(σ', τ') − 1]` under the greedy coupling, obtained by applying
/// every outcome.
pub fn expected_hamming_change<T: Scalar>(pair: &NeighboringPair<'_>, p: &FlipParams<T>) -> T {
    let mut scratch = ComponentScratch::new(pair.graph().n());
    // Identity-coupled flips never change the distance, so only the
    // disagreement outcomes contribute.
    let mut total = T::zero();
    for o in disagreement_outcomes(pair, p, &mut scratch) {
        let (s, t) = apply_outcome(pair, &o);
        let change = hamming(&s, &t) as i64 - 1;
        total = total + o.mass * T::from_i64(change);
    }
    total
}

/// Literal terminating test for a pair of flips: `S = S_σ(v,c)` or
/// `S' = S_τ(v,c)` for some `c`, or `S = S_σ(u,τ(v))` or `S' = S_τ(u,σ(v))` for
/// some neighbor `u` of `v`. Empty flips never match.
pub fn is_terminating_pair(
    pair: &NeighboringPair<'_>,
    s: Option<&KempeComponent>,
    s_prime: Option<&KempeComponent>,
) -> bool {
    let graph = pair.graph();
    let mut scratch = ComponentScratch::new(graph.n());
    let (v, sv, tv) = (pair.v(), pair.sigma_v(), pair.tau_v());
    let matches = |x: &KempeComponent, candidate: KempeComponent| !candidate.is_empty() && x.same_flip(&candidate);
    if let Some(x) = s.filter(|x| !x.is_empty()) {
        if (0..pair.k()).any(|c| matches(x, kempe_component_with(graph, pair.sigma(), v, c, &mut scratch))) {
            return true;
        }
        if graph
            .neighbors(v)
            .iter()
            .any(|&u| matches(x, kempe_component_with(graph, pair.sigma(), u, tv, &mut scratch)))
        {
            return true;
        }
    }
    if let Some(x) = s_prime.filter(|x| !x.is_empty()) {
        if (0..pair.k()).any(|c| matches(x, kempe_component_with(graph, pair.tau(), v, c, &mut scratch))) {
            return true;
        }
        if graph.neighbors(v).iter().any(|&u| matches(x, kempe_component_with(graph, pair.tau(), u, sv, &mut scratch)))
        {
            return true;
        }
    }
    false
}

/// Exact probability that the coupled flips form a terminating pair.
pub fn terminating_probability<T: Scalar>(pair: &NeighboringPair<'_>, p: &FlipParams<T>) -> T {
    let mut scratch = ComponentScratch::new(pair.graph().n());
    disagreement_outcomes(pair, p, &mut scratch).into_iter().fold(T::zero(), |acc, o| acc + o.mass)
}

/// Result of one sampled coupled step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    /// The producing move.
    pub kind: Move,
    /// `true` when the flips form a terminating pair.
    pub terminating: bool,
}

/// Fast sampler of coupled steps on raw color vectors.
///
/// The disagreement outcomes are materialized each step; shared flips are
/// drawn by rejection from uniformly chosen anchors, which avoids listing
/// them.
pub struct CouplingSampler<'g> {
    graph: &'g Graph,
    scratch: ComponentScratch,
    buffer: Vec<Vertex>,
    neighbor_masks: Vec<u128>,
    masks_valid: bool,
    cache: Option<StepCache>,
}

/// Per-pair quantities reused while the pair does not change.
struct StepCache {
    sigma: Vec<Color>,
    tau: Vec<Color>,
    outcomes: Vec<CoupledFlip<f64>>,
    family_mass: f64,
    shared_mass: f64,
}

impl<'g> CouplingSampler<'g> {
    /// Sampler bound to `graph`.
    pub fn new(graph: &'g Graph) -> Self {
        Self {
            graph,
            scratch: ComponentScratch::new(graph.n()),
            buffer: Vec::with_capacity(graph.n()),
            neighbor_masks: vec![0; graph.n()],
            masks_valid: false,
            cache: None,
        }
    }

    fn refresh_masks(&mut self, colors: &[Color]) -> bool {
        self.masks_valid = false;
        for u in 0..self.graph.n() {
            let mut mask = 0u128;
            for &w in self.graph.neighbors(u) {
                if colors[w] >= 128 {
                    return false;
                }
                mask |= 1u128 << colors[w];
            }
            self.neighbor_masks[u] = mask;
        }
        self.masks_valid = true;
        true
    }

    /// `true` when the σ-anchor `(w, c)` is a shared flip, together with `α`.
    fn classify_anchor(&mut self, pair: &NeighboringPair<'_>, w: Vertex, c: Color) -> (bool, usize) {
        let colors = pair.sigma().as_slice();
        let (v, t) = (pair.v(), pair.tau_v());
        if c == colors[w] {
            return (false, 0);
        }
        let simple = self.masks_valid && c < 128 && self.neighbor_masks[w] & (1u128 << c) == 0;
        if simple {
            // S = {w}: it belongs to the family exactly when w = v, or when w
            // neighbors v and the pair is {σ(w), τ(v)} with c = τ(v).
            let family = w == v || (c == t && self.graph.has_edge(w, v));
            return (!family, 1);
        }
        component_into(self.graph, colors, w, c, &mut self.scratch, &mut self.buffer);
        let alpha = self.buffer.len();
        if self.buffer.binary_search(&v).is_ok() {
            return (false, alpha);
        }
        let family = in_family_without_v(pair, &self.buffer, (colors[w], c));
        (!family, alpha)
    }

    /// Total mass of shared flips: the sum over shared anchors of `p_α/α`,
    /// divided by `nk`.
    pub fn shared_mass(&mut self, pair: &NeighboringPair<'_>, p: &FlipParams) -> f64 {
        let n = self.graph.n();
        let k = pair.k();
        if !self.refresh_masks(pair.sigma().as_slice()) {
            let mut scratch = ComponentScratch::new(n);
            return shared_components(pair, &mut scratch).iter().map(|s| p.get(s.size())).sum::<f64>() / (n * k) as f64;
        }
        let mut total = 0.0;
        for w in 0..n {
            for c in 0..k {
                let (shared, alpha) = self.classify_anchor(pair, w, c);
                if shared {
                    total += p.acceptance(alpha);
                }
            }
        }
        total / (n * k) as f64
    }

    /// Draws one coupled step and applies it to `sigma` and `tau`.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        pair: &NeighboringPair<'_>,
        p: &FlipParams,
        rng: &mut R,
    ) -> (Coloring, Coloring, StepOutcome) {
        let fresh =
            self.cache.as_ref().is_some_and(|c| c.sigma == pair.sigma().as_slice() && c.tau == pair.tau().as_slice());
        if !fresh {
            let outcomes = disagreement_outcomes::<f64>(pair, p, &mut self.scratch);
            let family_mass = outcomes.iter().map(|o| o.mass).sum();
            let shared_mass = self.shared_mass(pair, p);
            self.cache = Some(StepCache {
                sigma: pair.sigma().as_slice().to_vec(),
                tau: pair.tau().as_slice().to_vec(),
                outcomes,
                family_mass,
                shared_mass,
            });
        }
        let cache = self.cache.take().expect("cache was just filled");
        let result = self.draw(pair, p, rng, &cache);
        self.cache = Some(cache);
        result
    }

    fn draw<R: Rng + ?Sized>(
        &mut self,
        pair: &NeighboringPair<'_>,
        p: &FlipParams,
        rng: &mut R,
        cache: &StepCache,
    ) -> (Coloring, Coloring, StepOutcome) {
        let outcomes = &cache.outcomes;
        let family_mass = cache.family_mass;
        let shared = cache.shared_mass;
        let u: f64 = rng.gen();
        let mut sigma = pair.sigma().clone();
        let mut tau = pair.tau().clone();
        if u < family_mass {
            let mut acc = 0.0;
            let mut chosen = outcomes.last().expect("family mass is positive");
            for o in outcomes {
                acc += o.mass;
                if u < acc {
                    chosen = o;
                    break;
                }
            }
            let (s, t) = apply_outcome(pair, chosen);
            return (s, t, StepOutcome { kind: chosen.kind, terminating: true });
        }
        if u < family_mass + shared {
            let n = self.graph.n();
            let k = pair.k();
            loop {
                let w = rng.gen_range(0..n);
                let c = rng.gen_range(0..k);
                let accept: f64 = rng.gen();
                let (is_shared, alpha) = self.classify_anchor(pair, w, c);
                if is_shared && accept < p.acceptance(alpha) {
                    let s = kempe_component_with(self.graph, pair.sigma(), w, c, &mut self.scratch);
                    let mut sc = sigma.as_slice().to_vec();
                    let mut tc = tau.as_slice().to_vec();
                    flip_in_place(&mut sc, &s);
                    flip_in_place(&mut tc, &s);
                    sigma = Coloring::new(sc, k).expect("palette preserved");
                    tau = Coloring::new(tc, k).expect("palette preserved");
                    break;
                }
            }
        }
        (sigma, tau, StepOutcome { kind: Move::Identity, terminating: false })
    }
}

/// Draws one coupled step from the explicit distribution.
pub fn sample_coupled_step<R: Rng + ?Sized>(
    pair: &NeighboringPair<'_>,
    p: &FlipParams,
    rng: &mut R,
) -> (Coloring, Coloring) {
    let dist = greedy_coupling_distribution::<f64>(pair, p);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for o in &dist.outcomes {
        acc += o.mass;
        if u < acc {
            return apply_outcome(pair, o);
        }
    }
    (pair.sigma().clone(), pair.tau().clone())
}

/// Stages of the tracked color in the variable-length coupling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    /// State Bad, before any step.
    Bad,
    /// State Good, still looking for a good ending.
    Good,
    /// Reached a terminating pair from state Good.
    GoodEnd,
    /// Gave up on this run (absorbing until the stage process ends).
    BadEnd,
}

/// Next stage after one coupled step.
///
/// `first_step` marks the first step after the start. `state` is the state
/// of the tracked color after the step when the result is still a
/// neighboring pair.
pub fn next_stage(prev: Stage, first_step: bool, terminating: bool, state: Option<StateLabel>) -> Stage {
    let good_after = state == Some(StateLabel::Good);
    match prev {
        Stage::GoodEnd => Stage::GoodEnd,
        Stage::BadEnd => Stage::BadEnd,
        Stage::Bad => {
            if first_step && !terminating && good_after {
                Stage::Good
            } else {
                Stage::BadEnd
            }
        }
        Stage::Good => {
            if terminating {
                Stage::GoodEnd
            } else if good_after {
                Stage::Good
            } else {
                Stage::BadEnd
            }
        }
    }
}

/// Initial stage from the state of the tracked color.
pub fn initial_stage(state: StateLabel) -> Stage {
    match state {
        StateLabel::Bad => Stage::Bad,
        StateLabel::Good => Stage::Good,
        StateLabel::Sing | StateLabel::NotPresent => Stage::BadEnd,
    }
}

/// One recorded step of a variable-length run.
#[derive(Clone, Debug)]
pub struct TraceStep {
    /// σ after the step.
    pub sigma: Coloring,
    /// τ after the step.
    pub tau: Coloring,
    /// Move that produced the step.
    pub kind: Move,
    /// Whether the step was a terminating pair.
    pub terminating: bool,
    /// Stage of the tracked color after the step, while the stage process runs.
    pub stage: Option<Stage>,
}

/// Summary of a variable-length coupling run.
#[derive(Clone, Debug, Default)]
pub struct CouplingTrace {
    /// Recorded steps (empty unless recording was requested).
    pub steps: Vec<TraceStep>,
    /// First step at which `d_H` changed.
    pub t_stop: u64,
    /// `d_H` at `t_stop`.
    pub final_hamming: usize,
    /// `true` when the step cap was reached first.
    pub truncated: bool,
    /// Stage sequence of the tracked color up to the first terminating pair,
    /// starting with the initial stage.
    pub stages: Vec<Stage>,
    /// Step of the first terminating pair.
    pub first_terminating: Option<u64>,
}

/// Options for [`run_variable_length`].
#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Color whose stage is tracked.
    pub tracked_color: Option<Color>,
    /// Stop after this many steps.
    pub step_cap: u64,
    /// Keep every intermediate pair.
    pub record: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { tracked_color: None, step_cap: 10_000_000, record: false }
    }
}

/// Runs the greedy coupling until the Hamming distance changes.
pub fn run_variable_length<R: Rng + ?Sized>(
    pair: &NeighboringPair<'_>,
    p: &FlipParams,
    rng: &mut R,
    options: &RunOptions,
) -> Result<CouplingTrace> {
    let graph = pair.graph();
    if pair.k() <= graph.max_degree() + 2 {
        return Err(Error::InvalidArgument(format!(
            "variable-length coupling needs k > Δ + 2 (k = {}, Δ = {})",
            pair.k(),
            graph.max_degree()
        )));
    }
    let mut sampler = CouplingSampler::new(graph);
    let mut scratch = ComponentScratch::new(graph.n());
    let mut current = pair.clone();
    let mut trace = CouplingTrace::default();
    let mut stage = options.tracked_color.map(|c| {
        let state = bucket_for_color(&current, c, &mut scratch)
            .map_or(StateLabel::NotPresent, |b| classify_state(&b.configuration()));
        initial_stage(state)
    });
    if let Some(s) = stage {
        trace.stages.push(s);
    }
    for t in 1..=options.step_cap {
        let (sigma, tau, outcome) = sampler.step(&current, p, rng);
        let distance = hamming(&sigma, &tau);
        let stage_running = trace.first_terminating.is_none();
        if let (Some(prev), true) = (stage, stage_running) {
            let state = if distance == 1 {
                let next = NeighboringPair::new(graph, sigma.clone(), tau.clone())?;
                let c = options.tracked_color.expect("stage implies a tracked color");
                Some(
                    bucket_for_color(&next, c, &mut scratch)
                        .map_or(StateLabel::NotPresent, |b| classify_state(&b.configuration())),
                )
            } else {
                None
            };
            let next = next_stage(prev, t == 1, outcome.terminating, state);
            trace.stages.push(next);
            stage = Some(next);
        }
        if outcome.terminating && trace.first_terminating.is_none() {
            trace.first_terminating = Some(t);
        }
        if options.record {
            trace.steps.push(TraceStep {
                sigma: sigma.clone(),
                tau: tau.clone(),
                kind: outcome.kind,
                terminating: outcome.terminating,
                stage: if stage_running { stage } else { None },
            });
        }
        if distance != 1 {
            trace.t_stop = t;
            trace.final_hamming = distance;
            return Ok(trace);
        }
        current = NeighboringPair::new(graph, sigma, tau)?;
    }
    trace.truncated = true;
    trace.t_stop = options.step_cap;
    trace.final_hamming = 1;
    Ok(trace)
}

/// The variable-length path-coupling bound `2⌈2βW/α⌉·⌈ln(n/ε)/α⌉`.
pub fn mixing_bound(alpha: f64, w: f64, beta: f64, n: f64, epsilon: f64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    if !(n > 0.0 && epsilon > 0.0) {
        return Err(Error::InvalidArgument("n and epsilon must be positive".into()));
    }
    let first = (2.0 * beta * w / alpha).ceil();
    let second = ((n / epsilon).ln() / alpha).ceil();
    Ok(2.0 * first * second)
}
