//! Graphs, colorings, list assignments and Kempe components.
//!
//! A Kempe component `S_σ(v, c)` is the set of vertices reachable from `v`
//! along paths whose colors alternate between `σ(v)` and `c`. Only edges whose
//! endpoints carry different colors are traversed, so the definition also
//! behaves sensibly on improper colorings. On proper colorings it coincides
//! with the connected component of `v` in the subgraph induced by the two
//! color classes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vertex index in `0..n`.
pub type Vertex = usize;

/// A color index in `0..k`.
pub type Color = usize;

/// Static undirected simple graph stored as sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    adjacency: Vec<Vec<Vertex>>,
    max_degree: usize,
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges are merged.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for (index, &(u, v)) in edges.iter().enumerate() {
            let line = index + 1;
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { line, vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop { line, vertex: u });
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Ok(Self::from_adjacency_unchecked(adjacency))
    }

    fn from_adjacency_unchecked(mut adjacency: Vec<Vec<Vertex>>) -> Self {
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        Self { adjacency, max_degree }
    }

    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Self { adjacency: vec![Vec::new(); n], max_degree: 0 }
    }

    /// Path on `n` vertices `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges).expect("path edges are valid")
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    /// Maximum degree Δ.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adjacency[v]
    }

    /// Degree of `v`.
    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency[v].len()
    }

    /// `true` when `u` and `v` are adjacent.
    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Number of edges.
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, list) in self.adjacency.iter().enumerate() {
            out.extend(list.iter().filter(|&&v| u < v).map(|&v| (u, v)));
        }
        out
    }

    /// `true` when the graph is connected (the empty graph counts as connected).
    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in self.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    /// Serializes to the edge-list text format read by [`load_graph`].
    pub fn to_edge_list(&self) -> String {
        let edges = self.edges();
        let mut out = format!("{} {}\n", self.n(), edges.len());
        for (u, v) in edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

/// Parses the edge-list format: a header line `n m` followed by `m` lines `u v`.
///
/// Blank lines and lines starting with `#` are ignored.
pub fn load_graph(text: &str) -> Result<Graph> {
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) =
        lines.next().ok_or_else(|| Error::Parse { line: 1, message: "missing header line `n m`".into() })?;
    let (n, m) = parse_pair(header_line, header)?;

    let mut adjacency = vec![Vec::new(); n];
    let mut count = 0;
    for (line, body) in lines {
        let (u, v) = parse_pair(line, body)?;
        for w in [u, v] {
            if w >= n {
                return Err(Error::VertexOutOfRange { line, vertex: w, n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop { line, vertex: u });
        }
        adjacency[u].push(v);
        adjacency[v].push(u);
        count += 1;
    }
    if count != m {
        return Err(Error::Parse {
            line: header_line,
            message: format!("header announces {m} edges but {count} were listed"),
        });
    }
    Ok(Graph::from_adjacency_unchecked(adjacency))
}

fn parse_pair(line: usize, body: &str) -> Result<(usize, usize)> {
    let mut parts = body.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        let token = parts.next().ok_or_else(|| Error::Parse { line, message: format!("missing {what}") })?;
        token.parse().map_err(|_| Error::Parse { line, message: format!("`{token}` is not a non-negative integer") })
    };
    let a = next("first field")?;
    let b = next("second field")?;
    if parts.next().is_some() {
        return Err(Error::Parse { line, message: "expected exactly two fields".into() });
    }
    Ok((a, b))
}

/// A vertex coloring with colors in `0..k`; properness is not required.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coloring {
    colors: Vec<Color>,
    k: usize,
}

impl Coloring {
    /// Validates that every entry is below `k`.
    pub fn new(colors: Vec<Color>, k: usize) -> Result<Self> {
        if let Some((vertex, &color)) = colors.iter().enumerate().find(|(_, &c)| c >= k) {
            return Err(Error::ColorOutOfRange { vertex, color, k });
        }
        Ok(Self { colors, k })
    }

    /// Decodes the coloring with index `index` in base-`k` (vertex 0 is the
    /// least significant digit).
    pub fn from_index(mut index: u64, n: usize, k: usize) -> Self {
        let mut colors = Vec::with_capacity(n);
        for _ in 0..n {
            colors.push((index % k as u64) as Color);
            index /= k as u64;
        }
        Self { colors, k }
    }

    /// Base-`k` index of the coloring, the inverse of [`Coloring::from_index`].
    pub fn index(&self) -> u64 {
        self.colors.iter().rev().fold(0u64, |acc, &c| acc * self.k as u64 + c as u64)
    }

    /// Parses whitespace-separated colors.
    pub fn parse(text: &str, k: usize) -> Result<Self> {
        let colors = text
            .split_whitespace()
            .map(|t| t.parse::<Color>().map_err(|_| Error::Parse { line: 1, message: format!("`{t}` is not a color") }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(colors, k)
    }

    /// Number of colors.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.colors.len()
    }

    /// `true` for the coloring of the empty graph.
    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// Color of `v`.
    pub fn get(&self, v: Vertex) -> Color {
        self.colors[v]
    }

    /// Recolors `v`. Panics if `c >= k`.
    pub fn set(&mut self, v: Vertex, c: Color) {
        assert!(c < self.k, "color {c} not below k = {}", self.k);
        self.colors[v] = c;
    }

    /// The underlying color vector.
    pub fn as_slice(&self) -> &[Color] {
        &self.colors
    }
}

impl fmt::Display for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for c in &self.colors {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
            first = false;
        }
        Ok(())
    }
}

/// Number of vertices on which two colorings differ.
pub fn hamming(a: &Coloring, b: &Coloring) -> usize {
    a.as_slice().iter().zip(b.as_slice()).filter(|(x, y)| x != y).count()
}

/// Per-vertex color lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListAssignment {
    lists: Vec<Vec<Color>>,
    palette: usize,
}

impl ListAssignment {
    /// Builds a list assignment; lists are sorted and deduplicated. The
    /// palette is one more than the largest color mentioned.
    pub fn new(mut lists: Vec<Vec<Color>>) -> Self {
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
        }
        let palette = lists.iter().flatten().max().map_or(0, |&c| c + 1);
        Self { lists, palette }
    }

    /// Every vertex receives the full palette `0..k`.
    pub fn full(n: usize, k: usize) -> Self {
        Self { lists: vec![(0..k).collect(); n], palette: k }
    }

    /// The list of `u`, sorted.
    pub fn list(&self, u: Vertex) -> &[Color] {
        &self.lists[u]
    }

    /// `true` when `c ∈ L(u)`.
    pub fn contains(&self, u: Vertex, c: Color) -> bool {
        self.lists[u].binary_search(&c).is_ok()
    }

    /// Number of vertices covered.
    pub fn len(&self) -> usize {
        self.lists.len()
    }

    /// `true` when there are no vertices.
    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// One more than the largest color in any list.
    pub fn palette(&self) -> usize {
        self.palette
    }

    /// Common list size when all lists have the same length.
    pub fn uniform_size(&self) -> Option<usize> {
        let first = self.lists.first()?.len();
        self.lists.iter().all(|l| l.len() == first).then_some(first)
    }

    /// Checks `σ(u) ∈ L(u)` for every vertex.
    pub fn check_coloring(&self, sigma: &Coloring) -> Result<()> {
        if sigma.len() != self.len() {
            return Err(Error::SizeMismatch { expected: self.len(), found: sigma.len() });
        }
        for u in 0..sigma.len() {
            if !self.contains(u, sigma.get(u)) {
                return Err(Error::NotListColoring { vertex: u, color: sigma.get(u) });
            }
        }
        Ok(())
    }
}

/// A Kempe component `S_σ(v, c)` together with its anchor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KempeComponent {
    /// Vertices in ascending order; empty when `c = σ(v)`.
    pub vertices: Vec<Vertex>,
    /// The anchor `(v, c)` that produced the component.
    pub anchor: (Vertex, Color),
    /// The swapped colors `(σ(v), c)`.
    pub colors: (Color, Color),
}

impl KempeComponent {
    /// The empty component anchored at `(v, σ(v))`.
    pub fn empty(v: Vertex, color: Color) -> Self {
        Self { vertices: Vec::new(), anchor: (v, color), colors: (color, color) }
    }

    /// Number of vertices α.
    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    /// `true` for the empty component.
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// `true` when `u` belongs to the component.
    pub fn contains(&self, u: Vertex) -> bool {
        self.vertices.binary_search(&u).is_ok()
    }

    /// The swapped colors as an unordered pair `(min, max)`.
    pub fn color_pair(&self) -> (Color, Color) {
        let (a, b) = self.colors;
        (a.min(b), a.max(b))
    }

    /// Two components describe the same flip when they share the vertex set
    /// and the unordered color pair. Anchors are ignored.
    pub fn same_flip(&self, other: &Self) -> bool {
        self.vertices == other.vertices && (self.is_empty() || self.color_pair() == other.color_pair())
    }

    /// Key identifying the flip irrespective of its anchor.
    pub fn flip_key(&self) -> (Vec<Vertex>, (Color, Color)) {
        if self.is_empty() {
            (Vec::new(), (0, 0))
        } else {
            (self.vertices.clone(), self.color_pair())
        }
    }
}

/// Reusable buffers for repeated component extraction on one graph.
#[derive(Clone, Debug, Default)]
pub struct ComponentScratch {
    stamp: Vec<u32>,
    epoch: u32,
    queue: Vec<Vertex>,
}

impl ComponentScratch {
    /// Scratch space for graphs with `n` vertices.
    pub fn new(n: usize) -> Self {
        Self { stamp: vec![0; n], epoch: 0, queue: Vec::with_capacity(n) }
    }

    fn next_epoch(&mut self, n: usize) {
        if self.stamp.len() < n {
            self.stamp.resize(n, 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }
}

/// Writes the sorted vertex set of `S(v, c)` under `colors` into `out`.
///
/// This is the allocation-free core used by the simulation hot paths.
pub fn component_into(
    graph: &Graph,
    colors: &[Color],
    v: Vertex,
    c: Color,
    scratch: &mut ComponentScratch,
    out: &mut Vec<Vertex>,
) {
    out.clear();
    let base = colors[v];
    if c == base {
        return;
    }
    scratch.next_epoch(graph.n());
    let epoch = scratch.epoch;
    scratch.queue.clear();
    scratch.queue.push(v);
    scratch.stamp[v] = epoch;
    let mut head = 0;
    while head < scratch.queue.len() {
        let u = scratch.queue[head];
        head += 1;
        let cu = colors[u];
        let other = if cu == base { c } else { base };
        for &w in graph.neighbors(u) {
            if colors[w] == other && scratch.stamp[w] != epoch {
                scratch.stamp[w] = epoch;
                scratch.queue.push(w);
            }
        }
    }
    out.extend_from_slice(&scratch.queue);
    out.sort_unstable();
}

/// Size of `S(v, c)` under `colors` without materializing the set.
pub fn component_size(graph: &Graph, colors: &[Color], v: Vertex, c: Color, scratch: &mut ComponentScratch) -> usize {
    let base = colors[v];
    if c == base {
        return 0;
    }
    scratch.next_epoch(graph.n());
    let epoch = scratch.epoch;
    scratch.queue.clear();
    scratch.queue.push(v);
    scratch.stamp[v] = epoch;
    let mut head = 0;
    while head < scratch.queue.len() {
        let u = scratch.queue[head];
        head += 1;
        let other = if colors[u] == base { c } else { base };
        for &w in graph.neighbors(u) {
            if colors[w] == other && scratch.stamp[w] != epoch {
                scratch.stamp[w] = epoch;
                scratch.queue.push(w);
            }
        }
    }
    scratch.queue.len()
}

/// Extracts `S_σ(v, c)`. Returns the empty component when `c = σ(v)`.
pub fn kempe_component(graph: &Graph, sigma: &Coloring, v: Vertex, c: Color) -> KempeComponent {
    let mut scratch = ComponentScratch::new(graph.n());
    kempe_component_with(graph, sigma, v, c, &mut scratch)
}

/// [`kempe_component`] with caller-provided scratch space.
pub fn kempe_component_with(
    graph: &Graph,
    sigma: &Coloring,
    v: Vertex,
    c: Color,
    scratch: &mut ComponentScratch,
) -> KempeComponent {
    let base = sigma.get(v);
    if c == base {
        return KempeComponent::empty(v, base);
    }
    let mut vertices = Vec::new();
    component_into(graph, sigma.as_slice(), v, c, scratch, &mut vertices);
    KempeComponent { vertices, anchor: (v, c), colors: (base, c) }
}

/// Swaps the two colors of `component` on its vertices in place.
pub fn flip_in_place(colors: &mut [Color], component: &KempeComponent) {
    let (a, b) = component.colors;
    for &u in &component.vertices {
        let cu = colors[u];
        if cu == a {
            colors[u] = b;
        } else if cu == b {
            colors[u] = a;
        }
    }
}

/// Returns `σ` with the colors of `component` swapped on its vertices.
pub fn flip(sigma: &Coloring, component: &KempeComponent) -> Coloring {
    let mut out = sigma.clone();
    flip_in_place(&mut out.colors, component);
    out
}

/// `true` when no edge is monochromatic.
pub fn is_proper(graph: &Graph, sigma: &Coloring) -> bool {
    (0..graph.n()).all(|u| graph.neighbors(u).iter().all(|&w| sigma.get(w) != sigma.get(u)))
}

/// Colors not used by any neighbor of `v`.
pub fn available_colors(graph: &Graph, sigma: &Coloring, v: Vertex) -> Vec<Color> {
    let mut blocked = vec![false; sigma.k()];
    for &w in graph.neighbors(v) {
        blocked[sigma.get(w)] = true;
    }
    (0..sigma.k()).filter(|&c| !blocked[c]).collect()
}

/// The multiset of all `S_σ(v, c)`, one entry per anchor, `nk` entries in
/// total, ordered by vertex then color.
pub fn enumerate_components(graph: &Graph, sigma: &Coloring) -> Vec<KempeComponent> {
    let mut scratch = ComponentScratch::new(graph.n());
    let mut out = Vec::with_capacity(graph.n() * sigma.k());
    for v in 0..graph.n() {
        for c in 0..sigma.k() {
            out.push(kempe_component_with(graph, sigma, v, c, &mut scratch));
        }
    }
    out
}
