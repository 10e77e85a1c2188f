//! The weighted metric that discounts non-extremal disagreements, its exact
//! evaluation on small state spaces, and the one-step drift quantities
//! `∇`, `∇_H` and `∇_B`.
//!
//! Two colorings differing at one vertex `v` are joined by an edge of weight
//! `ω = 1 − η(1 − γ)`, where `γ` is the fraction of `v`'s neighbors taking
//! part in extremal configurations. The metric `d` is the induced shortest
//! path distance over all `k^n` colorings, proper or not.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::config::{extract_configurations, extremal_size, gamma_of, NeighboringPair};
use crate::coupling::{apply_outcome, greedy_coupling_distribution};
use crate::error::{Error, Result};
use crate::graph::{flip, hamming, Color, Coloring, Graph, KempeComponent, Vertex};
use crate::params::FlipParams;
use crate::scalar::Rational;

/// `δ = 11/6 − 161/88 = 1/264`.
pub fn delta() -> Rational {
    Rational::new(1.into(), 264.into())
}

/// `δ` in floating point.
pub const DELTA: f64 = 1.0 / 264.0;

/// `ε₀ = 1/84000`, the margin below `11/6` used for the default `k`.
pub const EPSILON_0: f64 = 1.0 / 84000.0;

/// Parameters of the weighted metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricParams {
    eta: f64,
}

impl MetricParams {
    /// Fails unless `0 < η < 1/2`.
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 0.5) {
            return Err(Error::InvalidParams(format!("eta must lie in (0, 1/2), got {eta}")));
        }
        Ok(Self { eta })
    }

    /// Parameters with `η = δΔ/(53k)`.
    pub fn for_degree(k: usize, max_degree: usize) -> Result<Self> {
        Self::new(default_eta(k, max_degree)?)
    }

    /// `η`.
    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// `η = δΔ/(53k)`.
pub fn default_eta(k: usize, max_degree: usize) -> Result<f64> {
    if k == 0 || max_degree == 0 {
        return Err(Error::InvalidParams("k and Δ must be positive".into()));
    }
    Ok(DELTA * max_degree as f64 / (53.0 * k as f64))
}

/// `ω(σ, τ) = 1 − η(1 − γ)` for a neighboring pair.
pub fn edge_weight(pair: &NeighboringPair<'_>, mp: &MetricParams) -> f64 {
    let gamma = gamma_of(&extract_configurations(pair), pair.graph().max_degree());
    1.0 - mp.eta * (1.0 - gamma)
}

fn weight_between(graph: &Graph, k: usize, a: &[Color], b: &[Color], mp: &MetricParams) -> f64 {
    let sigma = Coloring::new(a.to_vec(), k).expect("colors below k");
    let tau = Coloring::new(b.to_vec(), k).expect("colors below k");
    let pair = NeighboringPair::new(graph, sigma, tau).expect("endpoints differ at one vertex");
    edge_weight(&pair, mp)
}

#[derive(PartialEq)]
struct Entry(f64, u64);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Shortest weighted path between two colorings over the full graph of all
/// `k^n` colorings, by Dijkstra's algorithm. Refuses state spaces larger than
/// `cap`.
pub fn exact_metric(graph: &Graph, sigma: &Coloring, tau: &Coloring, mp: &MetricParams, cap: u128) -> Result<f64> {
    let (n, k) = (graph.n(), sigma.k());
    if tau.len() != n || sigma.len() != n {
        return Err(Error::SizeMismatch { expected: n, found: sigma.len().min(tau.len()) });
    }
    let states = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if states > cap {
        return Err(Error::StateCapExceeded { states, cap });
    }
    let start = sigma.index();
    let goal = tau.index();
    let mut best: HashMap<u64, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(start, 0.0);
    heap.push(Entry(0.0, start));
    while let Some(Entry(dist, index)) = heap.pop() {
        if index == goal {
            return Ok(dist);
        }
        if best.get(&index).is_some_and(|&b| dist > b) {
            continue;
        }
        let here = Coloring::from_index(index, n, k);
        let mut there = here.as_slice().to_vec();
        for u in 0..n {
            let original = there[u];
            for c in 0..k {
                if c == original {
                    continue;
                }
                there[u] = c;
                let next = Coloring::new(there.clone(), k).expect("colors below k").index();
                let candidate = dist + weight_between(graph, k, here.as_slice(), &there, mp);
                if best.get(&next).map_or(true, |&b| candidate < b) {
                    best.insert(next, candidate);
                    heap.push(Entry(candidate, next));
                }
            }
            there[u] = original;
        }
    }
    Err(Error::Invariant("the coloring graph is connected".into()))
}

/// Shortest path restricted to paths that recolor each disagreeing vertex
/// once, directly to its target color, by dynamic programming over subsets
/// of the disagreement set. This equals [`exact_metric`] whenever
/// `η ≤ 1/(d_H + 1)`, because any other path has at least `d_H + 1` edges.
pub fn monotone_metric(graph: &Graph, sigma: &Coloring, tau: &Coloring, mp: &MetricParams) -> f64 {
    let k = sigma.k();
    let diff: Vec<Vertex> = (0..sigma.len()).filter(|&u| sigma.get(u) != tau.get(u)).collect();
    let j = diff.len();
    assert!(j < 25, "disagreement set too large for subset enumeration");
    let full = (1usize << j) - 1;
    let mut dist = vec![f64::INFINITY; full + 1];
    dist[0] = 0.0;
    let coloring_of = |mask: usize| {
        let mut colors = sigma.as_slice().to_vec();
        for (bit, &u) in diff.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                colors[u] = tau.get(u);
            }
        }
        colors
    };
    for mask in 0..full {
        if dist[mask].is_infinite() {
            continue;
        }
        let here = coloring_of(mask);
        for (bit, &u) in diff.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                continue;
            }
            let mut there = here.clone();
            there[u] = tau.get(u);
            let next = mask | 1 << bit;
            let candidate = dist[mask] + weight_between(graph, k, &here, &there, mp);
            if candidate < dist[next] {
                dist[next] = candidate;
            }
        }
    }
    dist[full]
}

/// `d(σ, τ)`, using the subset recursion when it is provably exact and the
/// full shortest-path search otherwise.
pub fn metric_distance(graph: &Graph, sigma: &Coloring, tau: &Coloring, mp: &MetricParams, cap: u128) -> Result<f64> {
    let d_h = hamming(sigma, tau);
    if mp.eta * (d_h as f64 + 1.0) <= 1.0 {
        Ok(monotone_metric(graph, sigma, tau, mp))
    } else {
        exact_metric(graph, sigma, tau, mp, cap)
    }
}

/// `d_B = d_H − d`.
pub fn d_b(graph: &Graph, sigma: &Coloring, tau: &Coloring, mp: &MetricParams, cap: u128) -> Result<f64> {
    Ok(hamming(sigma, tau) as f64 - metric_distance(graph, sigma, tau, mp, cap)?)
}

/// The drift of a neighboring pair under the greedy coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nabla {
    /// `∇ = nk·E[d(σ', τ') − d(σ, τ)]`.
    pub total: f64,
    /// `∇_H = nk·E[d_H(σ', τ') − 1]`.
    pub hamming: f64,
    /// `∇_B = −nk·E[d_B(σ', τ') − d_B(σ, τ)]`.
    pub extremal: f64,
}

/// Exact `∇`, `∇_H` and `∇_B`, evaluating `d` after every coupling outcome.
pub fn nabla(pair: &NeighboringPair<'_>, p: &FlipParams, mp: &MetricParams, cap: u128) -> Result<Nabla> {
    let graph = pair.graph();
    let scale = (graph.n() * pair.k()) as f64;
    let d0 = edge_weight(pair, mp);
    let b0 = 1.0 - d0;
    let dist = greedy_coupling_distribution::<f64>(pair, p);
    let mut out = Nabla { total: 0.0, hamming: 0.0, extremal: 0.0 };
    for outcome in &dist.outcomes {
        let (sigma, tau) = apply_outcome(pair, outcome);
        let d_h = hamming(&sigma, &tau) as f64;
        let d = metric_distance(graph, &sigma, &tau, mp, cap)?;
        out.total += outcome.mass * (d - d0);
        out.hamming += outcome.mass * (d_h - 1.0);
        out.extremal -= outcome.mass * ((d_h - d) - b0);
    }
    out.total *= scale;
    out.hamming *= scale;
    out.extremal *= scale;
    Ok(out)
}

/// The contribution `ξ(v, c, S)` of color `c` to `γ(σ_S, τ_S) − γ(σ, τ)`
/// (before normalizing by `Δ`) when a component `S` avoiding `v` is flipped
/// in both colorings.
pub fn xi_contribution(pair: &NeighboringPair<'_>, c: Color, component: &KempeComponent) -> Result<i32> {
    if component.contains(pair.v()) {
        return Err(Error::InvalidArgument("the component must avoid the disagreement vertex".into()));
    }
    let graph = pair.graph();
    let before = extract_configurations(pair).get(&c).and_then(extremal_size);
    let flipped = NeighboringPair::new(graph, flip(pair.sigma(), component), flip(pair.tau(), component))?;
    let after = extract_configurations(&flipped).get(&c).and_then(extremal_size);
    Ok(match (before, after) {
        (Some(i), None) => -(i as i32),
        (None, Some(i)) => i as i32,
        (Some(2), Some(1)) => -1,
        (Some(1), Some(2)) => 1,
        _ => 0,
    })
}
