//! Glauber dynamics, flip dynamics and their list-coloring variants as
//! single-step kernels, plus exact transition matrices on tiny instances.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    component_into, component_size, flip_in_place, kempe_component_with, Color, Coloring, ComponentScratch, Graph,
    KempeComponent, ListAssignment, Vertex,
};
use crate::params::FlipParams;

/// Deterministic random source used by every stochastic operation.
pub type ChainRng = ChaCha8Rng;

/// Seeds a generator; `stream` selects an independent substream so parallel
/// workers can share one seed.
pub fn seeded_rng(seed: u64, stream: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The four chains of the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    /// Single-site heat-bath recoloring with a uniform proposal from `[k]`.
    Glauber,
    /// Flip dynamics: flip `S_σ(v, c)` with probability `p_α / α`.
    Flip,
    /// Glauber dynamics for list colorings.
    ListGlauber,
    /// Flip dynamics restricted to flippable components.
    ListFlip,
}

impl ChainKind {
    /// `true` for the list variants.
    pub fn needs_lists(self) -> bool {
        matches!(self, ChainKind::ListGlauber | ChainKind::ListFlip)
    }

    /// Textual name.
    pub fn name(self) -> &'static str {
        match self {
            ChainKind::Glauber => "glauber",
            ChainKind::Flip => "flip",
            ChainKind::ListGlauber => "list_glauber",
            ChainKind::ListFlip => "list_flip",
        }
    }
}

impl FromStr for ChainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [ChainKind::Glauber, ChainKind::Flip, ChainKind::ListGlauber, ChainKind::ListFlip]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown chain `{s}`")))
    }
}

impl fmt::Display for ChainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn color_blocked(graph: &Graph, colors: &[Color], v: Vertex, c: Color) -> bool {
    graph.neighbors(v).iter().any(|&w| colors[w] == c)
}

/// One Glauber step: pick `(v, c)` uniformly and recolor `v` to `c` unless a
/// neighbor already has `c`.
pub fn glauber_step<R: Rng + ?Sized>(graph: &Graph, sigma: &Coloring, rng: &mut R) -> Coloring {
    let mut out = sigma.clone();
    let v = rng.gen_range(0..graph.n());
    let c = rng.gen_range(0..sigma.k());
    if !color_blocked(graph, sigma.as_slice(), v, c) {
        out.set(v, c);
    }
    out
}

/// One flip-dynamics step: pick `(v, c)` uniformly, let `α = |S_σ(v, c)|`
/// and flip with probability `p_α / α` using a single uniform variate.
pub fn flip_step<R: Rng + ?Sized>(graph: &Graph, sigma: &Coloring, p: &FlipParams, rng: &mut R) -> Coloring {
    let mut sampler = FlipSampler::new(graph);
    let mut colors = sigma.as_slice().to_vec();
    sampler.step(&mut colors, sigma.k(), p, rng);
    Coloring::new(colors, sigma.k()).expect("flips preserve the palette")
}

/// Allocation-free flip dynamics on a raw color vector.
#[derive(Clone, Debug)]
pub struct FlipSampler<'g> {
    graph: &'g Graph,
    scratch: ComponentScratch,
    buffer: Vec<Vertex>,
}

impl<'g> FlipSampler<'g> {
    /// Sampler bound to `graph`.
    pub fn new(graph: &'g Graph) -> Self {
        Self { graph, scratch: ComponentScratch::new(graph.n()), buffer: Vec::with_capacity(graph.n()) }
    }

    /// Advances `colors` by one step. Returns `true` when a flip happened.
    pub fn step<R: Rng + ?Sized>(&mut self, colors: &mut [Color], k: usize, p: &FlipParams, rng: &mut R) -> bool {
        let v = rng.gen_range(0..self.graph.n());
        let c = rng.gen_range(0..k);
        let u: f64 = rng.gen();
        let base = colors[v];
        if c == base {
            return false;
        }
        component_into(self.graph, colors, v, c, &mut self.scratch, &mut self.buffer);
        if u >= p.acceptance(self.buffer.len()) {
            return false;
        }
        for &w in &self.buffer {
            colors[w] = if colors[w] == base { c } else { base };
        }
        true
    }
}

/// `true` when every vertex of `S` has both swapped colors in its list.
pub fn is_flippable(component: &KempeComponent, lists: &ListAssignment) -> bool {
    let (a, b) = component.colors;
    component.vertices.iter().all(|&u| lists.contains(u, a) && lists.contains(u, b))
}

/// One list flip step: `v` uniform, `c` uniform from `L(v)`; the component is
/// flipped with probability `p_α / α` only when it is flippable.
pub fn list_flip_step<R: Rng + ?Sized>(
    graph: &Graph,
    sigma: &Coloring,
    lists: &ListAssignment,
    p: &FlipParams,
    rng: &mut R,
) -> Result<Coloring> {
    lists.check_coloring(sigma)?;
    let v = rng.gen_range(0..graph.n());
    let list = lists.list(v);
    let c = list[rng.gen_range(0..list.len())];
    let u: f64 = rng.gen();
    let mut scratch = ComponentScratch::new(graph.n());
    let component = kempe_component_with(graph, sigma, v, c, &mut scratch);
    let mut out = sigma.clone();
    if is_flippable(&component, lists) && u < p.acceptance(component.size()) {
        let mut colors = out.as_slice().to_vec();
        flip_in_place(&mut colors, &component);
        out = Coloring::new(colors, sigma.k())?;
    }
    Ok(out)
}

/// One list Glauber step: `v` uniform, `c` uniform from `L(v)`, recolor when
/// no neighbor has `c`; otherwise `σ(v)` is kept.
pub fn list_glauber_step<R: Rng + ?Sized>(
    graph: &Graph,
    sigma: &Coloring,
    lists: &ListAssignment,
    rng: &mut R,
) -> Result<Coloring> {
    lists.check_coloring(sigma)?;
    let v = rng.gen_range(0..graph.n());
    let list = lists.list(v);
    let c = list[rng.gen_range(0..list.len())];
    let mut out = sigma.clone();
    if !color_blocked(graph, sigma.as_slice(), v, c) {
        out.set(v, c);
    }
    Ok(out)
}

/// Default cap on the number of enumerated states.
pub const DEFAULT_STATE_CAP: u128 = 1 << 20;

/// Enumerable state space: every vertex ranges over its own allowed colors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSpace {
    allowed: Vec<Vec<Color>>,
    k: usize,
    size: usize,
}

impl StateSpace {
    /// All colorings `[k]^V`.
    pub fn full(n: usize, k: usize, cap: u128) -> Result<Self> {
        Self::from_allowed(vec![(0..k).collect(); n], k, cap)
    }

    /// All `L`-colorings.
    pub fn lists(lists: &ListAssignment, k: usize, cap: u128) -> Result<Self> {
        let allowed = (0..lists.len()).map(|u| lists.list(u).to_vec()).collect();
        Self::from_allowed(allowed, k.max(lists.palette()), cap)
    }

    fn from_allowed(allowed: Vec<Vec<Color>>, k: usize, cap: u128) -> Result<Self> {
        let mut states: u128 = 1;
        for list in &allowed {
            states = states.saturating_mul(list.len() as u128);
        }
        if states > cap {
            return Err(Error::StateCapExceeded { states, cap });
        }
        Ok(Self { allowed, k, size: states as usize })
    }

    /// Number of states.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.allowed.len()
    }

    /// Palette size of the colorings.
    pub fn k(&self) -> usize {
        self.k
    }

    /// The coloring with mixed-radix index `index` (vertex 0 least significant).
    pub fn coloring(&self, mut index: usize) -> Coloring {
        let mut colors = Vec::with_capacity(self.n());
        for list in &self.allowed {
            colors.push(list[index % list.len()]);
            index /= list.len();
        }
        Coloring::new(colors, self.k).expect("allowed colors are below k")
    }

    /// Index of a coloring, or `None` if it is not in the space.
    pub fn index_of(&self, sigma: &Coloring) -> Option<usize> {
        let mut index = 0;
        for (u, list) in self.allowed.iter().enumerate().rev() {
            let pos = list.binary_search(&sigma.get(u)).ok()?;
            index = index * list.len() + pos;
        }
        Some(index)
    }

    /// Index for a raw color slice known to be in the space.
    pub fn index_of_slice(&self, colors: &[Color]) -> Option<usize> {
        let mut index = 0;
        for (u, list) in self.allowed.iter().enumerate().rev() {
            let pos = list.binary_search(&colors[u]).ok()?;
            index = index * list.len() + pos;
        }
        Some(index)
    }
}

/// Row-stochastic kernel over an enumerated state space. Rows are stored
/// sparsely since each state has at most `nk + 1` successors.
#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    space: StateSpace,
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransitionMatrix {
    /// The state space.
    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    /// Number of states.
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Sparse row `i` as sorted `(column, probability)` pairs.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.rows[i].binary_search_by_key(&j, |&(col, _)| col) {
            Ok(pos) => self.rows[i][pos].1,
            Err(_) => 0.0,
        }
    }

    /// Dense row `i`.
    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for &(j, w) in &self.rows[i] {
            out[j] = w;
        }
        out
    }

    /// Largest deviation of a row sum from one.
    pub fn max_row_sum_error(&self) -> f64 {
        self.rows.iter().map(|r| (r.iter().map(|e| e.1).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Smallest entry, used to audit nonnegativity.
    pub fn min_entry(&self) -> f64 {
        self.rows.iter().flatten().map(|e| e.1).fold(f64::INFINITY, f64::min)
    }

    /// Largest absolute entrywise difference from another kernel on the same space.
    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
            for &(j, w) in self.row(i) {
                *merged.entry(j).or_default() += w;
            }
            for &(j, w) in other.row(i) {
                *merged.entry(j).or_default() -= w;
            }
            worst = merged.values().fold(worst, |acc, d| acc.max(d.abs()));
        }
        worst
    }

    /// One step of the distribution: returns `μ P`.
    pub fn push_forward(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (i, row) in self.rows.iter().enumerate() {
            let mass = mu[i];
            if mass == 0.0 {
                continue;
            }
            for &(j, w) in row {
                out[j] += mass * w;
            }
        }
        out
    }

    /// Stationary distribution by power iteration from the uniform vector,
    /// stopping when successive iterates differ by less than `tol` in L1.
    pub fn stationary(&self, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
        let dim = self.dim();
        let mut mu = vec![1.0 / dim as f64; dim];
        for _ in 0..max_iter {
            let next = self.push_forward(&mu);
            let diff: f64 = next.iter().zip(&mu).map(|(a, b)| (a - b).abs()).sum();
            mu = next;
            if diff < tol {
                return Ok(mu);
            }
        }
        Err(Error::Invariant(format!("power iteration did not reach {tol} in {max_iter} iterations")))
    }

    /// Stationary distribution with the default tolerance `1e-13` and cap `10^6`.
    pub fn stationary_default(&self) -> Result<Vec<f64>> {
        self.stationary(1e-13, 1_000_000)
    }
}

/// Total-variation distance between two distributions on the same space.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Uniform distribution over the proper colorings of a state space.
pub fn uniform_over_proper(graph: &Graph, space: &StateSpace) -> Vec<f64> {
    let proper: Vec<bool> = (0..space.size()).map(|i| crate::graph::is_proper(graph, &space.coloring(i))).collect();
    let count = proper.iter().filter(|&&b| b).count();
    proper.iter().map(|&b| if b { 1.0 / count as f64 } else { 0.0 }).collect()
}

/// Exact one-step kernel of a chain. List chains require `lists`; the flip
/// chains require `p`.
pub fn transition_matrix(
    graph: &Graph,
    k: usize,
    kind: ChainKind,
    p: Option<&FlipParams>,
    lists: Option<&ListAssignment>,
    cap: u128,
) -> Result<TransitionMatrix> {
    let space = match (kind.needs_lists(), lists) {
        (true, Some(l)) => StateSpace::lists(l, k, cap)?,
        (true, None) => return Err(Error::InvalidArgument(format!("{kind} requires a list assignment"))),
        (false, _) => StateSpace::full(graph.n(), k, cap)?,
    };
    let needs_p = matches!(kind, ChainKind::Flip | ChainKind::ListFlip);
    if needs_p && p.is_none() {
        return Err(Error::InvalidArgument(format!("{kind} requires flip parameters")));
    }
    let n = graph.n();
    let mut scratch = ComponentScratch::new(n);
    let mut buffer = Vec::new();
    let mut rows = Vec::with_capacity(space.size());
    for index in 0..space.size() {
        let sigma = space.coloring(index);
        let colors = sigma.as_slice();
        let mut row: HashMap<usize, f64> = HashMap::new();
        let mut stay = 1.0;
        for v in 0..n {
            let choices: Vec<Color> = match kind {
                ChainKind::Glauber | ChainKind::Flip => (0..k).collect(),
                _ => lists.expect("checked above").list(v).to_vec(),
            };
            let weight = 1.0 / (n as f64 * choices.len() as f64);
            for &c in &choices {
                match kind {
                    ChainKind::Glauber | ChainKind::ListGlauber => {
                        if c != colors[v] && !color_blocked(graph, colors, v, c) {
                            let mut next = colors.to_vec();
                            next[v] = c;
                            let j = space.index_of_slice(&next).expect("recoloring stays in the space");
                            *row.entry(j).or_default() += weight;
                            stay -= weight;
                        }
                    }
                    ChainKind::Flip | ChainKind::ListFlip => {
                        if c == colors[v] {
                            continue;
                        }
                        component_into(graph, colors, v, c, &mut scratch, &mut buffer);
                        if kind == ChainKind::ListFlip {
                            let l = lists.expect("checked above");
                            let base = colors[v];
                            if !buffer.iter().all(|&u| l.contains(u, base) && l.contains(u, c)) {
                                continue;
                            }
                        }
                        let accept = p.expect("checked above").acceptance(buffer.len());
                        if accept == 0.0 {
                            continue;
                        }
                        let mut next = colors.to_vec();
                        let base = colors[v];
                        for &w in &buffer {
                            next[w] = if next[w] == base { c } else { base };
                        }
                        let j = space.index_of_slice(&next).expect("flips stay in the space");
                        *row.entry(j).or_default() += weight * accept;
                        stay -= weight * accept;
                    }
                }
            }
        }
        *row.entry(index).or_default() += stay;
        let mut row: Vec<(usize, f64)> = row.into_iter().filter(|&(_, w)| w != 0.0).collect();
        row.sort_unstable_by_key(|e| e.0);
        rows.push(row);
    }
    Ok(TransitionMatrix { space, rows })
}

/// Flip-dynamics kernel built from the second formulation: every distinct
/// component (vertex set plus color pair) is selected with probability
/// `1/nk` and flipped with probability `p_α`.
pub fn flip_matrix_by_components(graph: &Graph, k: usize, p: &FlipParams, cap: u128) -> Result<TransitionMatrix> {
    let space = StateSpace::full(graph.n(), k, cap)?;
    let n = graph.n();
    let weight = 1.0 / (n * k) as f64;
    let mut scratch = ComponentScratch::new(n);
    let mut rows = Vec::with_capacity(space.size());
    for index in 0..space.size() {
        let sigma = space.coloring(index);
        let mut distinct: BTreeMap<(Vec<Vertex>, (Color, Color)), KempeComponent> = BTreeMap::new();
        for v in 0..n {
            for c in 0..k {
                let s = kempe_component_with(graph, &sigma, v, c, &mut scratch);
                if !s.is_empty() {
                    distinct.entry(s.flip_key()).or_insert(s);
                }
            }
        }
        let mut row: HashMap<usize, f64> = HashMap::new();
        let mut stay = 1.0;
        for s in distinct.values() {
            let mass = weight * p.get(s.size());
            if mass == 0.0 {
                continue;
            }
            let mut next = sigma.as_slice().to_vec();
            flip_in_place(&mut next, s);
            let j = space.index_of_slice(&next).expect("flips stay in the space");
            *row.entry(j).or_default() += mass;
            stay -= mass;
        }
        *row.entry(index).or_default() += stay;
        let mut row: Vec<(usize, f64)> = row.into_iter().filter(|&(_, w)| w != 0.0).collect();
        row.sort_unstable_by_key(|e| e.0);
        rows.push(row);
    }
    Ok(TransitionMatrix { space, rows })
}

/// Exact total-variation distance to stationarity after `0..=steps` steps
/// from the point mass at `start`.
pub fn tv_decay(matrix: &TransitionMatrix, start: usize, steps: usize) -> Result<Vec<f64>> {
    let pi = matrix.stationary_default()?;
    let mut mu = vec![0.0; matrix.dim()];
    mu[start] = 1.0;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(total_variation(&mu, &pi));
    for _ in 0..steps {
        mu = matrix.push_forward(&mu);
        out.push(total_variation(&mu, &pi));
    }
    Ok(out)
}

/// Runs `steps` flip-dynamics steps from `sigma` and returns the final state.
pub fn run_flip_chain<R: Rng + ?Sized>(
    graph: &Graph,
    sigma: &Coloring,
    p: &FlipParams,
    steps: u64,
    rng: &mut R,
) -> Coloring {
    let mut sampler = FlipSampler::new(graph);
    let mut colors = sigma.as_slice().to_vec();
    for _ in 0..steps {
        sampler.step(&mut colors, sigma.k(), p, rng);
    }
    Coloring::new(colors, sigma.k()).expect("flips preserve the palette")
}

/// Size of `S_σ(v, c)`, re-exported for callers that only need α.
pub fn anchor_size(graph: &Graph, sigma: &Coloring, v: Vertex, c: Color) -> usize {
    let mut scratch = ComponentScratch::new(graph.n());
    component_size(graph, sigma.as_slice(), v, c, &mut scratch)
}
