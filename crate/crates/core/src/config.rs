//! Per-color configurations of a neighboring coloring pair.
//!
//! For a pair `(σ, τ)` that differ only at `v`, every color `c` seen around
//! `v` is summarized by `(A, B; a, b)`: `A = |S_σ(v, c)|`, `B = |S_τ(v, c)|`,
//! and for the `c`-colored neighbors `u_1 < ... < u_m` of `v`,
//! `a_i = |S_τ(u_i, σ(v))|` and `b_i = |S_σ(u_i, τ(v))|`. Components shared by
//! several neighbors are counted once, at the smallest index.
//!
//! The two colors `σ(v)` and `τ(v)` are handled separately. For `c = τ(v)`
//! the configuration stores `A = |S_σ(v, τ(v))|` and the sizes
//! `a_j = |S_τ(y_j, σ(v))|` of the `τ(v)`-colored neighbors, with `B = 0` and
//! `b = 0`. For `c = σ(v)` the roles are mirrored. Any component that reaches
//! `v` is zeroed there because it coincides with the component of `v` itself.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chains::is_flippable;
use crate::error::{Error, Result};
use crate::graph::{
    hamming, kempe_component_with, Color, Coloring, ComponentScratch, Graph, KempeComponent, ListAssignment, Vertex,
};
use crate::params::FlipParams;
use crate::scalar::Scalar;

/// Two colorings that differ exactly at the vertex `v`.
#[derive(Clone, Debug)]
pub struct NeighboringPair<'g> {
    graph: &'g Graph,
    sigma: Coloring,
    tau: Coloring,
    v: Vertex,
}

impl<'g> NeighboringPair<'g> {
    /// Locates the unique disagreement vertex; fails unless `d_H(σ, τ) = 1`.
    pub fn new(graph: &'g Graph, sigma: Coloring, tau: Coloring) -> Result<Self> {
        if sigma.len() != graph.n() {
            return Err(Error::SizeMismatch { expected: graph.n(), found: sigma.len() });
        }
        if tau.len() != graph.n() {
            return Err(Error::SizeMismatch { expected: graph.n(), found: tau.len() });
        }
        if sigma.k() != tau.k() {
            return Err(Error::InvalidArgument("colorings use different palettes".into()));
        }
        let distance = hamming(&sigma, &tau);
        if distance != 1 {
            return Err(Error::NotNeighboring(distance));
        }
        let v = (0..graph.n()).find(|&u| sigma.get(u) != tau.get(u)).expect("distance is one");
        Ok(Self { graph, sigma, tau, v })
    }

    /// The underlying graph.
    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    /// The coloring σ.
    pub fn sigma(&self) -> &Coloring {
        &self.sigma
    }

    /// The coloring τ.
    pub fn tau(&self) -> &Coloring {
        &self.tau
    }

    /// The disagreement vertex.
    pub fn v(&self) -> Vertex {
        self.v
    }

    /// Number of colors.
    pub fn k(&self) -> usize {
        self.sigma.k()
    }

    /// `σ(v)`.
    pub fn sigma_v(&self) -> Color {
        self.sigma.get(self.v)
    }

    /// `τ(v)`.
    pub fn tau_v(&self) -> Color {
        self.tau.get(self.v)
    }

    /// `δ_c`: the number of neighbors of `v` colored `c`.
    pub fn delta(&self, c: Color) -> usize {
        self.graph.neighbors(self.v).iter().filter(|&&u| self.sigma.get(u) == c).count()
    }
}

/// Locates the disagreement vertex of two colorings; same as
/// [`NeighboringPair::new`].
pub fn make_neighboring_pair<'g>(graph: &'g Graph, sigma: Coloring, tau: Coloring) -> Result<NeighboringPair<'g>> {
    NeighboringPair::new(graph, sigma, tau)
}

/// Which of the two disagreement colors a configuration describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Special {
    /// `c ∉ {σ(v), τ(v)}`.
    None,
    /// `c = σ(v)`.
    SigmaV,
    /// `c = τ(v)`.
    TauV,
}

/// The tuple `(A, B; a, b)` attached to a color.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    /// The color `c`.
    pub color: Color,
    /// Whether `c` is one of the disagreement colors.
    pub special: Special,
    /// `A`.
    pub big_a: usize,
    /// `B`.
    pub big_b: usize,
    /// `a_1..a_m`.
    pub a: Vec<usize>,
    /// `b_1..b_m`.
    pub b: Vec<usize>,
}

fn arg_max(values: &[usize]) -> (usize, usize) {
    let mut best = (0, 0);
    for (i, &x) in values.iter().enumerate() {
        if x > best.1 {
            best = (i, x);
        }
    }
    best
}

impl Configuration {
    /// A non-special configuration with `A = 1 + Σa` and `B = 1 + Σb`.
    pub fn template(a: Vec<usize>, b: Vec<usize>) -> Self {
        assert_eq!(a.len(), b.len(), "a and b must have equal length");
        let big_a = 1 + a.iter().sum::<usize>();
        let big_b = 1 + b.iter().sum::<usize>();
        Self { color: 0, special: Special::None, big_a, big_b, a, b }
    }

    /// A configuration with explicit `A` and `B`.
    pub fn with_sizes(big_a: usize, big_b: usize, a: Vec<usize>, b: Vec<usize>) -> Self {
        assert_eq!(a.len(), b.len(), "a and b must have equal length");
        Self { color: 0, special: Special::None, big_a, big_b, a, b }
    }

    /// The size `m = δ_c`.
    pub fn m(&self) -> usize {
        self.a.len()
    }

    /// `a_max`.
    pub fn a_max(&self) -> usize {
        arg_max(&self.a).1
    }

    /// Zero-based `i_max`, the smallest maximizing index.
    pub fn i_max(&self) -> usize {
        arg_max(&self.a).0
    }

    /// `b_max`.
    pub fn b_max(&self) -> usize {
        arg_max(&self.b).1
    }

    /// Zero-based `j_max`, the smallest maximizing index.
    pub fn j_max(&self) -> usize {
        arg_max(&self.b).0
    }

    /// The mirror `(B, A; b, a)`.
    pub fn mirror(&self) -> Self {
        let special = match self.special {
            Special::None => Special::None,
            Special::SigmaV => Special::TauV,
            Special::TauV => Special::SigmaV,
        };
        Self { color: self.color, special, big_a: self.big_b, big_b: self.big_a, a: self.b.clone(), b: self.a.clone() }
    }

    /// Canonical text `A,B;[a...];[b...]`.
    pub fn canonical(&self) -> String {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        format!("{},{};[{}];[{}]", self.big_a, self.big_b, join(&self.a), join(&self.b))
    }

    /// Parses the canonical text form into a non-special configuration.
    pub fn parse(text: &str) -> Result<Self> {
        let err = || Error::Parse { line: 1, message: format!("`{text}` is not `A,B;[a...];[b...]`") };
        let mut parts = text.trim().split(';');
        let head = parts.next().ok_or_else(err)?;
        let (a_text, b_text) = (parts.next().ok_or_else(err)?, parts.next().ok_or_else(err)?);
        let (big_a, big_b) = head.split_once(',').ok_or_else(err)?;
        let vector = |t: &str| -> Result<Vec<usize>> {
            let inner = t.trim().strip_prefix('[').and_then(|s| s.strip_suffix(']')).ok_or_else(err)?;
            if inner.trim().is_empty() {
                return Ok(Vec::new());
            }
            inner.split(',').map(|x| x.trim().parse().map_err(|_| err())).collect()
        };
        let a = vector(a_text)?;
        let b = vector(b_text)?;
        if a.len() != b.len() {
            return Err(err());
        }
        Ok(Self::with_sizes(big_a.trim().parse().map_err(|_| err())?, big_b.trim().parse().map_err(|_| err())?, a, b))
    }

    /// Representative of the symmetry class under simultaneous permutation of
    /// the indices and under mirroring. Used to compare configurations "up to
    /// symmetry".
    pub fn symmetry_class(&self) -> String {
        let sorted = |cfg: &Configuration| {
            let mut pairs: Vec<(usize, usize)> = cfg.a.iter().copied().zip(cfg.b.iter().copied()).collect();
            pairs.sort_unstable();
            let a = pairs.iter().map(|p| p.0).collect();
            let b = pairs.iter().map(|p| p.1).collect();
            Configuration::with_sizes(cfg.big_a, cfg.big_b, a, b).canonical()
        };
        let one = sorted(self);
        let two = sorted(&self.mirror());
        one.min(two)
    }

    fn sizes_match(&self, big_a: usize, big_b: usize, a: &[usize], b: &[usize]) -> bool {
        let multiset = |v: &[usize]| {
            let mut v = v.to_vec();
            v.sort_unstable();
            v
        };
        self.big_a == big_a
            && self.big_b == big_b
            && multiset(&self.a) == multiset(a)
            && multiset(&self.b) == multiset(b)
    }

    /// `true` for `(7,3;(3,3),(1,1))` and its mirror.
    pub fn is_bad_shape(&self) -> bool {
        self.special == Special::None
            && (self.sizes_match(7, 3, &[3, 3], &[1, 1]) || self.sizes_match(3, 7, &[1, 1], &[3, 3]))
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// `true` when the configuration is one of the four canonical extremal ones:
/// `(3,2;(2),(1))`, `(2,3;(1),(2))`, `(7,3;(3,3),(1,1))` and
/// `(3,7;(1,1),(3,3))`, with size-two vectors compared as multisets.
pub fn is_extremal(cfg: &Configuration) -> bool {
    extremal_size(cfg).is_some()
}

/// `Some(1)` or `Some(2)` for extremal configurations, `None` otherwise.
pub fn extremal_size(cfg: &Configuration) -> Option<usize> {
    if cfg.special != Special::None {
        return None;
    }
    if cfg.sizes_match(3, 2, &[2], &[1]) || cfg.sizes_match(2, 3, &[1], &[2]) {
        Some(1)
    } else if cfg.is_bad_shape() {
        Some(2)
    } else {
        None
    }
}

/// Per-color state of a neighboring pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateLabel {
    /// `δ_c = 1` and `c ∉ {σ(v), τ(v)}`.
    Sing,
    /// The configuration is `(7,3;(3,3),(1,1))` or its mirror.
    Bad,
    /// Any other present color.
    Good,
    /// `δ_c = 0`.
    NotPresent,
}

/// Classifies a configuration.
pub fn classify_state(cfg: &Configuration) -> StateLabel {
    match cfg.special {
        Special::SigmaV | Special::TauV if cfg.m() > 0 => StateLabel::Good,
        _ if cfg.m() == 0 => StateLabel::NotPresent,
        Special::None if cfg.m() == 1 => StateLabel::Sing,
        Special::None if cfg.is_bad_shape() => StateLabel::Bad,
        _ => StateLabel::Good,
    }
}

/// The actual components behind one configuration.
#[derive(Clone, Debug)]
pub struct Bucket {
    /// The color `c`.
    pub color: Color,
    /// Special flag.
    pub special: Special,
    /// `U_c` in ascending order.
    pub neighbors: Vec<Vertex>,
    /// σ-side component through `v` (`S_σ(v, c)`); empty for `c = σ(v)`.
    pub sigma_root: KempeComponent,
    /// τ-side component through `v` (`S_τ(v, c)`); empty for `c = τ(v)`.
    pub tau_root: KempeComponent,
    /// τ-side components `S_τ(u_i, σ(v))`, zeroed ones empty.
    pub a_sets: Vec<KempeComponent>,
    /// σ-side components `S_σ(u_i, τ(v))`, zeroed ones empty.
    pub b_sets: Vec<KempeComponent>,
}

impl Bucket {
    /// The numeric configuration.
    pub fn configuration(&self) -> Configuration {
        Configuration {
            color: self.color,
            special: self.special,
            big_a: self.sigma_root.size(),
            big_b: self.tau_root.size(),
            a: self.a_sets.iter().map(KempeComponent::size).collect(),
            b: self.b_sets.iter().map(KempeComponent::size).collect(),
        }
    }
}

fn zero_duplicates(sets: &mut [KempeComponent], exclude_vertex: Option<Vertex>) {
    for i in 0..sets.len() {
        let reaches = exclude_vertex.is_some_and(|v| sets[i].contains(v));
        let repeated = (0..i).any(|j| !sets[j].is_empty() && sets[j].same_flip(&sets[i]));
        if reaches || repeated {
            let anchor = sets[i].anchor;
            sets[i] = KempeComponent::empty(anchor.0, sets[i].colors.0);
        }
    }
}

/// Builds the buckets of every color with `δ_c > 0`, in increasing color order.
pub fn buckets(pair: &NeighboringPair<'_>, scratch: &mut ComponentScratch) -> Vec<Bucket> {
    let mut by_color: BTreeMap<Color, Vec<Vertex>> = BTreeMap::new();
    for &u in pair.graph().neighbors(pair.v()) {
        by_color.entry(pair.sigma().get(u)).or_default().push(u);
    }
    by_color.into_iter().map(|(c, neighbors)| build_bucket(pair, c, neighbors, scratch)).collect()
}

/// The bucket of a single color, or `None` when `δ_c = 0`.
pub fn bucket_for_color(pair: &NeighboringPair<'_>, c: Color, scratch: &mut ComponentScratch) -> Option<Bucket> {
    let neighbors: Vec<Vertex> =
        pair.graph().neighbors(pair.v()).iter().copied().filter(|&u| pair.sigma().get(u) == c).collect();
    if neighbors.is_empty() {
        None
    } else {
        Some(build_bucket(pair, c, neighbors, scratch))
    }
}

fn build_bucket(
    pair: &NeighboringPair<'_>,
    c: Color,
    neighbors: Vec<Vertex>,
    scratch: &mut ComponentScratch,
) -> Bucket {
    let graph = pair.graph();
    let (sigma, tau, v) = (pair.sigma(), pair.tau(), pair.v());
    let (s, t) = (pair.sigma_v(), pair.tau_v());
    if c == t {
        let mut a_sets: Vec<_> = neighbors.iter().map(|&y| kempe_component_with(graph, tau, y, s, scratch)).collect();
        zero_duplicates(&mut a_sets, Some(v));
        let b_sets = neighbors.iter().map(|&y| KempeComponent::empty(y, t)).collect();
        Bucket {
            color: c,
            special: Special::TauV,
            sigma_root: kempe_component_with(graph, sigma, v, t, scratch),
            tau_root: KempeComponent::empty(v, t),
            a_sets,
            b_sets,
            neighbors,
        }
    } else if c == s {
        let mut b_sets: Vec<_> = neighbors.iter().map(|&x| kempe_component_with(graph, sigma, x, t, scratch)).collect();
        zero_duplicates(&mut b_sets, Some(v));
        let a_sets = neighbors.iter().map(|&x| KempeComponent::empty(x, s)).collect();
        Bucket {
            color: c,
            special: Special::SigmaV,
            sigma_root: KempeComponent::empty(v, s),
            tau_root: kempe_component_with(graph, tau, v, s, scratch),
            a_sets,
            b_sets,
            neighbors,
        }
    } else {
        let mut a_sets: Vec<_> = neighbors.iter().map(|&u| kempe_component_with(graph, tau, u, s, scratch)).collect();
        let mut b_sets: Vec<_> = neighbors.iter().map(|&u| kempe_component_with(graph, sigma, u, t, scratch)).collect();
        zero_duplicates(&mut a_sets, None);
        zero_duplicates(&mut b_sets, None);
        Bucket {
            color: c,
            special: Special::None,
            sigma_root: kempe_component_with(graph, sigma, v, c, scratch),
            tau_root: kempe_component_with(graph, tau, v, c, scratch),
            a_sets,
            b_sets,
            neighbors,
        }
    }
}

/// Configurations of every color with `δ_c > 0`, keyed by color.
pub fn extract_configurations(pair: &NeighboringPair<'_>) -> BTreeMap<Color, Configuration> {
    let mut scratch = ComponentScratch::new(pair.graph().n());
    buckets(pair, &mut scratch).into_iter().map(|b| (b.color, b.configuration())).collect()
}

/// List-coloring variant: any component that is not flippable under `lists`
/// contributes size zero.
pub fn list_extract_configurations(
    pair: &NeighboringPair<'_>,
    lists: &ListAssignment,
) -> Result<BTreeMap<Color, Configuration>> {
    lists.check_coloring(pair.sigma())?;
    lists.check_coloring(pair.tau())?;
    let mut scratch = ComponentScratch::new(pair.graph().n());
    let size = |s: &KempeComponent| if is_flippable(s, lists) { s.size() } else { 0 };
    Ok(buckets(pair, &mut scratch)
        .into_iter()
        .map(|b| {
            let cfg = Configuration {
                color: b.color,
                special: b.special,
                big_a: size(&b.sigma_root),
                big_b: size(&b.tau_root),
                a: b.a_sets.iter().map(size).collect(),
                b: b.b_sets.iter().map(size).collect(),
            };
            (b.color, cfg)
        })
        .collect())
}

/// Tallies `(N_sing, N_bad, N_good)` over the colors present around `v`.
pub fn count_states(pair: &NeighboringPair<'_>) -> (usize, usize, usize) {
    let mut counts = (0, 0, 0);
    for cfg in extract_configurations(pair).values() {
        match classify_state(cfg) {
            StateLabel::Sing => counts.0 += 1,
            StateLabel::Bad => counts.1 += 1,
            StateLabel::Good => counts.2 += 1,
            StateLabel::NotPresent => {}
        }
    }
    counts
}

/// State of a single color (`NotPresent` when `δ_c = 0`).
pub fn color_state(pair: &NeighboringPair<'_>, c: Color) -> StateLabel {
    let mut scratch = ComponentScratch::new(pair.graph().n());
    bucket_for_color(pair, c, &mut scratch).map_or(StateLabel::NotPresent, |b| classify_state(&b.configuration()))
}

/// Counts `(|C¹|, |C²|)`: colors whose configuration is extremal of size one
/// and of size two.
pub fn extremal_counts(configs: &BTreeMap<Color, Configuration>) -> (usize, usize) {
    let mut counts = (0, 0);
    for cfg in configs.values() {
        match extremal_size(cfg) {
            Some(1) => counts.0 += 1,
            Some(2) => counts.1 += 1,
            _ => {}
        }
    }
    counts
}

/// `γ = (|C¹| + 2|C²|) / Δ`.
///
/// The extremal set is the canonical one of [`is_extremal`]; the parameters
/// are accepted for interface symmetry with the metric code.
pub fn gamma<T: Scalar>(pair: &NeighboringPair<'_>, _p: &FlipParams<T>) -> f64 {
    gamma_of(&extract_configurations(pair), pair.graph().max_degree())
}

/// `γ` computed from already extracted configurations.
pub fn gamma_of(configs: &BTreeMap<Color, Configuration>, max_degree: usize) -> f64 {
    if max_degree == 0 {
        return 0.0;
    }
    let (one, two) = extremal_counts(configs);
    (one + 2 * two) as f64 / max_degree as f64
}
