//! Undirected simple graphs with 1-based vertex labels, deterministic
//! generators for the benchmark instances, and DIMACS/JSON file I/O.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SplitMix64;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("missing `p edge <n> <m>` problem line")]
    MissingProblemLine,
    #[error("malformed DIMACS line {line}: {text:?}")]
    MalformedLine { line: usize, text: String },
    #[error("edge probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not congruent to 1 mod 4")]
    NotOneModFour(u64),
    #[error("circulant offset {offset} outside 1..={max}")]
    OffsetOutOfRange { offset: usize, max: usize },
    #[error("invalid JSON graph: {0}")]
    Json(#[from] serde_json::Error),
}

/// Undirected simple graph. Vertices are 1..=n; edges are stored canonically
/// as pairs (i, j) with i < j, sorted and deduplicated.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    name: String,
    /// Adjacency bitset, row per vertex (0-based), `words_per_row` u64 each.
    adj: Vec<u64>,
    words_per_row: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph({:?}, n={}, m={})", self.name, self.n, self.m())
    }
}

impl Graph {
    /// Builds a graph from an edge list. Pairs may come in any order and
    /// orientation; duplicates are removed. Self-loops and out-of-range
    /// endpoints are rejected.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        name: impl Into<String>,
    ) -> Result<Self, GraphError> {
        let mut canonical = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            for v in [a, b] {
                if v < 1 || v > n {
                    return Err(GraphError::VertexOutOfRange { vertex: v, n });
                }
            }
            canonical.insert((a.min(b), a.max(b)));
        }
        let words_per_row = n.div_ceil(64).max(1);
        let mut adj = vec![0u64; n * words_per_row];
        for &(i, j) in &canonical {
            adj[(i - 1) * words_per_row + (j - 1) / 64] |= 1u64 << ((j - 1) % 64);
            adj[(j - 1) * words_per_row + (i - 1) / 64] |= 1u64 << ((i - 1) % 64);
        }
        Ok(Self {
            n,
            edges: canonical.into_iter().collect(),
            name: name.into(),
            adj,
            words_per_row,
        })
    }

    /// Edgeless graph on n vertices.
    pub fn empty(n: usize) -> Self {
        Self::new(n, [], format!("empty{n}")).unwrap()
    }

    /// Complete graph on n vertices.
    pub fn complete(n: usize) -> Self {
        let edges = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j)));
        Self::new(n, edges, format!("complete{n}")).unwrap()
    }

    /// Cycle 1-2-…-n-1.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3);
        let edges = (1..n).map(|i| (i, i + 1)).chain([(n, 1)]);
        Self::new(n, edges, format!("cycle{n}")).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    /// Canonical sorted edge list with 1-based endpoints, i < j.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        assert!(i >= 1 && i <= self.n && j >= 1 && j <= self.n);
        if i == j {
            return false;
        }
        self.adj[(i - 1) * self.words_per_row + (j - 1) / 64] >> ((j - 1) % 64) & 1 == 1
    }

    pub fn degree(&self, i: usize) -> usize {
        assert!(i >= 1 && i <= self.n);
        let row = &self.adj[(i - 1) * self.words_per_row..i * self.words_per_row];
        row.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Adjacency row of vertex i as a bitset over 0-based vertex indices.
    pub(crate) fn adj_row(&self, i: usize) -> &[u64] {
        &self.adj[(i - 1) * self.words_per_row..i * self.words_per_row]
    }

    pub(crate) fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    /// Complement graph: same vertices, pair {i,j} is an edge iff it is not
    /// an edge here.
    pub fn complement(&self) -> Self {
        let edges = (1..=self.n)
            .flat_map(|i| (i + 1..=self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| !self.has_edge(i, j));
        Self::new(self.n, edges, format!("co-{}", self.name)).unwrap()
    }

    /// Subgraph induced by `subset`, vertices relabeled 1..k in the sorted
    /// order of the subset.
    pub fn induced(&self, subset: &VertexSubset) -> Result<Self, GraphError> {
        for &v in subset.members() {
            if v < 1 || v > self.n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n: self.n });
            }
        }
        let members = subset.members();
        let mut edges = Vec::new();
        for (a, &va) in members.iter().enumerate() {
            for (b, &vb) in members.iter().enumerate().skip(a + 1) {
                if self.has_edge(va, vb) {
                    edges.push((a + 1, b + 1));
                }
            }
        }
        Self::new(members.len(), edges, format!("{}[{}]", self.name, subset))
    }
}

/// Sorted set of distinct vertices of some graph, 1-based.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexSubset {
    members: Vec<usize>,
}

impl VertexSubset {
    /// Sorts and deduplicates. Zero is rejected; upper bounds are checked by
    /// the operations that take a graph.
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        let mut members: Vec<usize> = members.into_iter().collect();
        assert!(members.iter().all(|&v| v >= 1), "vertices are 1-based");
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

impl fmt::Debug for VertexSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for VertexSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.members.iter().map(|v| v.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// All order-k subsets of 1..=n in lexicographic order.
pub fn all_subsets_of_order(n: usize, k: usize) -> Vec<VertexSubset> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut current: Vec<usize> = (1..=k).collect();
    loop {
        out.push(VertexSubset::new(current.iter().copied()));
        // next combination
        let mut i = k;
        while i > 0 && current[i - 1] == n - (k - i) {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        current[i - 1] += 1;
        for j in i..k {
            current[j] = current[j - 1] + 1;
        }
    }
    out
}

/// Number of order-k subsets of an n-set, saturating at usize::MAX.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

// ---------------------------------------------------------------------------
// DIMACS edge format
// ---------------------------------------------------------------------------

/// Result of parsing a DIMACS file: the graph plus non-fatal warnings
/// (published instances frequently misstate the edge count).
pub struct DimacsFile {
    pub graph: Graph,
    pub warnings: Vec<String>,
}

/// Parses the DIMACS edge format: comment lines starting with `c`, one
/// problem line `p edge <n> <m>`, then `e <i> <j>` lines with 1-based
/// endpoints. A mismatch between declared and actual edge count is a
/// warning, not an error.
pub fn parse_dimacs(input: &str) -> Result<DimacsFile, GraphError> {
    let mut declared: Option<(usize, usize)> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (idx, raw) in input.lines().enumerate() {
        let line = raw.trim();
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let malformed = || GraphError::MalformedLine {
            line: lineno,
            text: raw.to_string(),
        };
        if let Some(rest) = line.strip_prefix('p') {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 || (parts[0] != "edge" && parts[0] != "col") {
                return Err(malformed());
            }
            let n = parts[1].parse().map_err(|_| malformed())?;
            let m = parts[2].parse().map_err(|_| malformed())?;
            declared = Some((n, m));
        } else if let Some(rest) = line.strip_prefix('e') {
            let (n, _) = declared.ok_or(GraphError::MissingProblemLine)?;
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(malformed());
            }
            let i: usize = parts[0].parse().map_err(|_| malformed())?;
            let j: usize = parts[1].parse().map_err(|_| malformed())?;
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            for v in [i, j] {
                if v < 1 || v > n {
                    return Err(GraphError::VertexOutOfRange { vertex: v, n });
                }
            }
            edges.push((i, j));
        } else {
            return Err(malformed());
        }
    }
    let (n, m_declared) = declared.ok_or(GraphError::MissingProblemLine)?;
    let graph = Graph::new(n, edges, "dimacs")?;
    let mut warnings = Vec::new();
    if graph.m() != m_declared {
        warnings.push(format!(
            "problem line declares {} edges, file contains {} after deduplication",
            m_declared,
            graph.m()
        ));
    }
    Ok(DimacsFile { graph, warnings })
}

// ---------------------------------------------------------------------------
// JSON graph format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GraphJson {
    name: String,
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// `{"name":…, "n":…, "edges":[[i,j],…]}` with 1-based sorted pairs.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphJson {
            name: self.name.clone(),
            n: self.n,
            edges: self.edges.clone(),
        })
        .expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let parsed: GraphJson = serde_json::from_str(text)?;
        Self::new(parsed.n, parsed.edges, parsed.name)
    }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// G(n, p) in the Erdős–Rényi model. Pairs (i, j), i < j, are visited in
/// lexicographic order; each becomes an edge iff the next SplitMix64 draw in
/// [0,1) is below p. Identical (n, p, seed) always yields identical graphs.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::BadProbability(p));
    }
    let mut rng = SplitMix64::new(seed);
    let mut edges = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            if rng.next_f64() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges, format!("G_{n}_{p}_s{seed}"))
}

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Paley graph on a prime q ≡ 1 (mod 4): vertex v represents residue v−1,
/// and u ~ v iff u − v is a nonzero quadratic residue mod q. The graph is
/// (q−1)/2-regular with q(q−1)/4 edges.
pub fn paley(q: u64) -> Result<Graph, GraphError> {
    if !is_prime(q) {
        return Err(GraphError::NotPrime(q));
    }
    if q % 4 != 1 {
        return Err(GraphError::NotOneModFour(q));
    }
    let mut residues = vec![false; q as usize];
    for x in 1..q {
        residues[((x * x) % q) as usize] = true;
    }
    let mut edges = Vec::new();
    for u in 0..q as usize {
        for v in u + 1..q as usize {
            if residues[v - u] {
                edges.push((u + 1, v + 1));
            }
        }
    }
    Graph::new(q as usize, edges, format!("Paley{q}"))
}

/// The 64-vertex benchmark graph whose complement is the DIMACS clique
/// instance hamming6-4: vertices are the 6-bit strings, adjacent iff their
/// Hamming distance is 1, 2, or 3. Has 1312 edges.
pub fn hamming_complement_6_4() -> Graph {
    let mut edges = Vec::new();
    for u in 0usize..64 {
        for v in u + 1..64 {
            let d = (u ^ v).count_ones();
            if (1..=3).contains(&d) {
                edges.push((u + 1, v + 1));
            }
        }
    }
    Graph::new(64, edges, "hamming6_4").unwrap()
}

/// Circulant graph: u ~ v iff the circular distance min(|u−v|, n−|u−v|) is
/// in the connection set. Offsets must lie in 1..=n/2.
pub fn circulant(n: usize, connections: &[usize]) -> Result<Graph, GraphError> {
    let max = n / 2;
    let conn: BTreeSet<usize> = connections.iter().copied().collect();
    for &c in &conn {
        if c < 1 || c > max {
            return Err(GraphError::OffsetOutOfRange { offset: c, max });
        }
    }
    let mut edges = Vec::new();
    for u in 1..=n {
        for v in u + 1..=n {
            let d = (v - u).min(n - (v - u));
            if conn.contains(&d) {
                edges.push((u, v));
            }
        }
    }
    let spec: Vec<String> = conn.iter().map(|c| c.to_string()).collect();
    Graph::new(n, edges, format!("C{n}({})", spec.join(",")))
}
