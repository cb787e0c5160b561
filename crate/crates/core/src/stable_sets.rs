//! Stable set enumeration, an exact branch-and-bound for the stability
//! number, and the stable set matrices ssᵀ used by the exact subgraph
//! machinery.

use thiserror::Error;

use crate::graph::Graph;

use crate::linalg::Mat;

#[derive(Debug, Error)]
pub enum StableSetError {
    #[error("graph order {0} too large for stable set enumeration (max {MAX_ENUM_VERTICES})")]
    TooManyVertices(usize),
    #[error("stable set count exceeds cap {0}")]
    CapExceeded(usize),
    #[error("graph order {0} too large for exact alpha (max {MAX_ALPHA_VERTICES})")]
    TooLargeForAlpha(usize),
    #[error("branch and bound exceeded the node budget {0}")]
    SearchBudgetExceeded(u64),
}

/// Enumeration is over bitmasks of the vertex set, so the order is hard
/// capped; output size is separately capped (default 2²²).
pub const MAX_ENUM_VERTICES: usize = 25;
pub const DEFAULT_ENUM_CAP: usize = 1 << 22;
pub const MAX_ALPHA_VERTICES: usize = 70;
/// Node budget for the branch and bound; the benchmark instances stay far
/// below it and anything above signals a graph this oracle cannot handle.
pub const ALPHA_NODE_BUDGET: u64 = 2_000_000_000;

/// All stable sets of a graph of order k, as bitmasks (bit v−1 ⇔ vertex v).
///
/// The empty set always comes first; the rest follow in increasing order of
/// the mask value, i.e. lexicographically by incidence vector read from
/// vertex 1 upward.
#[derive(Clone, Debug)]
pub struct StableSetFamily {
    order: usize,
    members: Vec<u32>,
}

impl StableSetFamily {
    /// Vertex count of the underlying graph.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of stable sets, t.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn masks(&self) -> &[u32] {
        &self.members
    }

    /// 0/1 incidence vector of member i.
    pub fn incidence(&self, i: usize) -> Vec<f64> {
        let mask = self.members[i];
        (0..self.order)
            .map(|v| ((mask >> v) & 1) as f64)
            .collect()
    }

    /// Cardinality of member i.
    pub fn cardinality(&self, i: usize) -> usize {
        self.members[i].count_ones() as usize
    }

    /// Member sets as sorted 1-based index lists (debug/JSON dumps).
    pub fn index_sets(&self) -> Vec<Vec<usize>> {
        self.members
            .iter()
            .map(|&m| (0..self.order).filter(|v| (m >> v) & 1 == 1).map(|v| v + 1).collect())
            .collect()
    }

    /// JSON dump of the member sets, e.g. `[[],[1],[2],[1,3]]`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.index_sets()).expect("serialization cannot fail")
    }
}

/// Enumerates all stable sets with the default output cap.
pub fn enumerate_stable_sets(g: &Graph) -> Result<StableSetFamily, StableSetError> {
    enumerate_stable_sets_capped(g, DEFAULT_ENUM_CAP)
}

/// Enumerates all stable sets of g, empty set first, deterministic order.
pub fn enumerate_stable_sets_capped(
    g: &Graph,
    cap: usize,
) -> Result<StableSetFamily, StableSetError> {
    let k = g.n();
    if k > MAX_ENUM_VERTICES {
        return Err(StableSetError::TooManyVertices(k));
    }
    let adj: Vec<u32> = (1..=k).map(|v| adj_mask32(g, v)).collect();
    // stable[m] via the lowest set bit: m is stable iff m minus its lowest
    // vertex is stable and that vertex has no neighbor inside m.
    let total = 1usize << k;
    let mut stable = vec![false; total];
    stable[0] = true;
    let mut members = vec![0u32];
    for m in 1..total {
        let v = m.trailing_zeros() as usize;
        let rest = m & (m - 1);
        if stable[rest] && (adj[v] & m as u32) == 0 {
            stable[m] = true;
            members.push(m as u32);
            if members.len() > cap {
                return Err(StableSetError::CapExceeded(cap));
            }
        }
    }
    Ok(StableSetFamily { order: k, members })
}

fn adj_mask32(g: &Graph, v: usize) -> u32 {
    debug_assert!(g.n() <= 32);
    let row = g.adj_row(v);
    row[0] as u32
}

/// The i-th stable set matrix s sᵀ for every member; the first is the zero
/// matrix (empty set), every output is 0/1, PSD and of rank ≤ 1 with the
/// incidence vector on the diagonal.
pub fn stable_set_matrices(f: &StableSetFamily) -> Vec<Mat> {
    f.masks()
        .iter()
        .map(|&mask| outer_product(mask, f.order(), 1.0))
        .collect()
}

/// Trace-normalized stable set matrices: the zero matrix for the empty set,
/// then (1/sᵀs)·ssᵀ for each nonempty member, so every nonzero output has
/// trace exactly 1.
pub fn scaled_stable_set_matrices(f: &StableSetFamily) -> Vec<Mat> {
    f.masks()
        .iter()
        .map(|&mask| {
            let card = mask.count_ones();
            if card == 0 {
                Mat::zeros(f.order(), f.order())
            } else {
                outer_product(mask, f.order(), 1.0 / card as f64)
            }
        })
        .collect()
}

fn outer_product(mask: u32, k: usize, scale: f64) -> Mat {
    let mut m = Mat::zeros(k, k);
    for i in 0..k {
        if (mask >> i) & 1 == 0 {
            continue;
        }
        for j in 0..k {
            if (mask >> j) & 1 == 1 {
                m.set(i, j, scale);
            }
        }
    }
    m
}

// ---------------------------------------------------------------------------
// Exact stability number
// ---------------------------------------------------------------------------

/// Exact α(G) by branch and bound with a greedy clique-cover upper bound.
/// Independent of all SDP machinery; this is the oracle the bound tests are
/// checked against.
pub fn alpha_bruteforce(g: &Graph) -> Result<usize, StableSetError> {
    let n = g.n();
    if n > MAX_ALPHA_VERTICES {
        return Err(StableSetError::TooLargeForAlpha(n));
    }
    if n == 0 {
        return Ok(0);
    }
    let words = g.words_per_row();
    let adj: Vec<Vec<u64>> = (1..=n).map(|v| g.adj_row(v).to_vec()).collect();
    let mut cand = vec![u64::MAX; words];
    mask_tail(&mut cand, n);
    let mut best = 0usize;
    let mut nodes = 0u64;
    branch(&adj, n, words, &mut cand, 0, &mut best, &mut nodes)?;
    Ok(best)
}

fn mask_tail(words: &mut [u64], n: usize) {
    let full_words = n / 64;
    if full_words < words.len() {
        let rem = n % 64;
        words[full_words] = if rem == 0 { 0 } else { (1u64 << rem) - 1 };
        for w in words.iter_mut().skip(full_words + 1) {
            *w = 0;
        }
    }
}

fn popcount(words: &[u64]) -> usize {
    words.iter().map(|w| w.count_ones() as usize).sum()
}

fn branch(
    adj: &[Vec<u64>],
    n: usize,
    words: usize,
    cand: &mut [u64],
    size: usize,
    best: &mut usize,
    nodes: &mut u64,
) -> Result<(), StableSetError> {
    *nodes += 1;
    if *nodes > ALPHA_NODE_BUDGET {
        return Err(StableSetError::SearchBudgetExceeded(ALPHA_NODE_BUDGET));
    }
    let count = popcount(cand);
    if count == 0 {
        if size > *best {
            *best = size;
        }
        return Ok(());
    }
    if size + count <= *best {
        return Ok(());
    }
    if size + clique_cover_bound(adj, n, cand) <= *best {
        return Ok(());
    }
    // pivot: candidate vertex with largest degree inside the candidate set
    let mut pivot = usize::MAX;
    let mut best_deg = 0usize;
    for v in iter_bits(cand, n) {
        let deg = (0..words).map(|w| (adj[v][w] & cand[w]).count_ones() as usize).sum();
        if pivot == usize::MAX || deg > best_deg {
            best_deg = deg;
            pivot = v;
        }
    }
    // include pivot: drop its closed neighborhood
    let mut incl: Vec<u64> = cand.to_vec();
    for w in 0..words {
        incl[w] &= !adj[pivot][w];
    }
    incl[pivot / 64] &= !(1u64 << (pivot % 64));
    branch(adj, n, words, &mut incl, size + 1, best, nodes)?;
    // exclude pivot
    cand[pivot / 64] &= !(1u64 << (pivot % 64));
    branch(adj, n, words, cand, size, best, nodes)
}

/// Greedy clique cover of the candidate subgraph; the number of cliques
/// bounds α of that subgraph from above.
fn clique_cover_bound(adj: &[Vec<u64>], n: usize, cand: &[u64]) -> usize {
    let words = cand.len();
    let mut remaining = cand.to_vec();
    let mut cliques = 0usize;
    while popcount(&remaining) > 0 {
        // start a clique at the first remaining vertex; grow greedily with
        // vertices adjacent to all current clique members
        let v = first_bit(&remaining, n).unwrap();
        let mut common: Vec<u64> = (0..words).map(|w| adj[v][w] & remaining[w]).collect();
        remaining[v / 64] &= !(1u64 << (v % 64));
        while let Some(u) = first_bit(&common, n) {
            remaining[u / 64] &= !(1u64 << (u % 64));
            for w in 0..words {
                common[w] &= adj[u][w] & remaining[w];
            }
        }
        cliques += 1;
    }
    cliques
}

fn first_bit(words: &[u64], n: usize) -> Option<usize> {
    for (wi, &w) in words.iter().enumerate() {
        if w != 0 {
            let v = wi * 64 + w.trailing_zeros() as usize;
            return (v < n).then_some(v);
        }
    }
    None
}

fn iter_bits<'a>(words: &'a [u64], n: usize) -> impl Iterator<Item = usize> + 'a {
    words
        .iter()
        .enumerate()
        .flat_map(|(wi, &w)| {
            let mut w = w;
            let mut out = Vec::new();
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                out.push(wi * 64 + b);
                w &= w - 1;
            }
            out
        })
        .filter(move |&v| v < n)
}

/// Plain exhaustive maximum over all stable sets, the second-level oracle.
/// Recursion only prunes on stability, so it visits every stable set.
pub fn alpha_exhaustive(g: &Graph) -> Result<usize, StableSetError> {
    let n = g.n();
    if n > 30 {
        return Err(StableSetError::TooLargeForAlpha(n));
    }
    let adj: Vec<u64> = (1..=n).map(|v| g.adj_row(v)[0]).collect();
    fn rec(adj: &[u64], n: usize, v: usize, chosen: u64, size: usize, best: &mut usize) {
        if size > *best {
            *best = size;
        }
        if v == n {
            return;
        }
        // remaining vertices cannot beat best
        if size + (n - v) <= *best {
            return;
        }
        if adj[v] & chosen == 0 {
            rec(adj, n, v + 1, chosen | (1 << v), size + 1, best);
        }
        rec(adj, n, v + 1, chosen, size, best);
    }
    let mut best = 0;
    rec(&adj, n, 0, 0, 0, &mut best);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{erdos_renyi, hamming_complement_6_4, paley, Graph, VertexSubset};

    #[test]
    fn p3_enumeration() {
        let g = Graph::new(3, [(1, 2), (2, 3)], "P3").unwrap();
        let f = enumerate_stable_sets(&g).unwrap();
        // ∅, {1}, {2}, {3}, {1,3}
        assert_eq!(f.masks(), &[0b000, 0b001, 0b010, 0b100, 0b101]);
        assert_eq!(f.len(), 5);
    }

    #[test]
    fn k3_enumeration() {
        let f = enumerate_stable_sets(&Graph::complete(3)).unwrap();
        assert_eq!(f.masks(), &[0, 1, 2, 4]);
    }

    #[test]
    fn empty_graph_has_all_subsets() {
        let f = enumerate_stable_sets(&Graph::empty(6)).unwrap();
        assert_eq!(f.len(), 64);
        assert_eq!(f.masks()[0], 0);
    }

    #[test]
    fn cap_is_enforced() {
        let g = Graph::empty(12);
        assert!(matches!(
            enumerate_stable_sets_capped(&g, 100),
            Err(StableSetError::CapExceeded(100))
        ));
    }

    #[test]
    fn members_are_stable_and_distinct() {
        let g = erdos_renyi(14, 0.35, 4).unwrap();
        let f = enumerate_stable_sets(&g).unwrap();
        for i in 0..f.len() {
            let mask = f.masks()[i];
            for (a, b) in g.edges() {
                assert!((mask >> (a - 1)) & (mask >> (b - 1)) & 1 == 0);
            }
        }
        let mut sorted = f.masks().to_vec();
        sorted.dedup();
        assert_eq!(sorted.len(), f.len());
    }

    #[test]
    fn restriction_coherence() {
        // the restriction to I of any stable set of g is a stable set of G_I
        let g = erdos_renyi(12, 0.4, 9).unwrap();
        let subset = VertexSubset::new([2, 3, 5, 8, 11]);
        let sub = g.induced(&subset).unwrap();
        let f_g = enumerate_stable_sets(&g).unwrap();
        let f_sub = enumerate_stable_sets(&sub).unwrap();
        for &mask in f_g.masks() {
            let mut restricted = 0u32;
            for (pos, &v) in subset.members().iter().enumerate() {
                if (mask >> (v - 1)) & 1 == 1 {
                    restricted |= 1 << pos;
                }
            }
            assert!(f_sub.masks().contains(&restricted));
        }
    }

    #[test]
    fn alpha_small_cases() {
        assert_eq!(alpha_bruteforce(&Graph::cycle(5)).unwrap(), 2);
        assert_eq!(alpha_bruteforce(&Graph::complete(7)).unwrap(), 1);
        assert_eq!(alpha_bruteforce(&Graph::empty(9)).unwrap(), 9);
    }

    #[test]
    fn alpha_matches_enumeration() {
        for seed in 0..8 {
            let g = erdos_renyi(15, 0.3 + 0.05 * seed as f64, seed).unwrap();
            let f = enumerate_stable_sets(&g).unwrap();
            let max_card = (0..f.len()).map(|i| f.cardinality(i)).max().unwrap();
            assert_eq!(alpha_bruteforce(&g).unwrap(), max_card);
            assert_eq!(alpha_exhaustive(&g).unwrap(), max_card);
        }
    }

    #[test]
    fn alpha_hamming_is_4() {
        assert_eq!(alpha_bruteforce(&hamming_complement_6_4()).unwrap(), 4);
    }

    #[test]
    fn alpha_paley61_is_5() {
        assert_eq!(alpha_bruteforce(&paley(61).unwrap()).unwrap(), 5);
    }

    #[test]
    fn matrices_are_outer_products() {
        let g = Graph::new(3, [(1, 2), (2, 3)], "P3").unwrap();
        let f = enumerate_stable_sets(&g).unwrap();
        let ms = stable_set_matrices(&f);
        // first is the zero matrix
        assert_eq!(ms[0].max_abs(), 0.0);
        // s = (1,0,1) → [[1,0,1],[0,0,0],[1,0,1]]
        let idx = f.masks().iter().position(|&m| m == 0b101).unwrap();
        let m = &ms[idx];
        for (i, j, want) in [
            (0, 0, 1.0),
            (0, 1, 0.0),
            (0, 2, 1.0),
            (1, 1, 0.0),
            (2, 2, 1.0),
        ] {
            assert_eq!(m.get(i, j), want);
            assert_eq!(m.get(j, i), want);
        }
        // trace equals cardinality
        for i in 0..f.len() {
            assert_eq!(ms[i].trace() as usize, f.cardinality(i));
        }
    }

    #[test]
    fn scaled_matrices_have_unit_trace() {
        let g = Graph::new(3, [(1, 2), (2, 3)], "P3").unwrap();
        let f = enumerate_stable_sets(&g).unwrap();
        let ms = scaled_stable_set_matrices(&f);
        assert_eq!(ms[0].max_abs(), 0.0);
        for (i, m) in ms.iter().enumerate().skip(1) {
            assert!((m.trace() - 1.0).abs() < 1e-12, "member {i}");
        }
        let idx = f.masks().iter().position(|&m| m == 0b101).unwrap();
        assert_eq!(ms[idx].get(0, 0), 0.5);
        assert_eq!(ms[idx].get(0, 2), 0.5);
        assert_eq!(ms[idx].get(1, 1), 0.0);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn enumeration_invariants(
                edges in proptest::collection::vec((1usize..=10, 1usize..=10), 0..18),
            ) {
                let edges: Vec<_> = edges.into_iter().filter(|(a, b)| a != b).collect();
                let g = Graph::new(10, edges, "p").unwrap();
                let f = enumerate_stable_sets(&g).unwrap();
                // empty set first, strictly increasing masks, all stable
                prop_assert_eq!(f.masks()[0], 0);
                for w in f.masks().windows(2) {
                    prop_assert!(w[0] < w[1]);
                }
                for &mask in f.masks() {
                    for &(a, b) in g.edges() {
                        prop_assert_eq!((mask >> (a - 1)) & (mask >> (b - 1)) & 1, 0);
                    }
                }
                // α equals the largest member cardinality
                let max_card = (0..f.len()).map(|i| f.cardinality(i)).max().unwrap();
                prop_assert_eq!(alpha_bruteforce(&g).unwrap(), max_card);
            }
        }
    }
}
