//! H-representations of the squared stable set polytope STAB²(K̄_k) of
//! edgeless graphs, hand-coded facet systems for orders 2 and 3, and
//! membership/projection oracles for STAB² and its scaled variant SSTAB².
//!
//! Because a matrix with zeros on all edge positions lies in STAB²(G) iff it
//! lies in STAB² of the edgeless graph of the same order, the edgeless
//! systems are the only ones ever needed for inequality-mode exact subgraph
//! constraints.

mod dd;
mod project;

pub use dd::affine_independent_count;
pub use project::{project_onto_stab2, project_onto_stab2_with_tol, MembershipResult, TOL_MEMBER};

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::OnceLock;


use thiserror::Error;

use crate::graph::Graph;
use crate::linalg::{svec_index, svec_len, Mat};
use crate::stable_sets::enumerate_stable_sets;

#[derive(Debug, Error)]
pub enum PolytopeError {
    #[error("facet enumeration supports orders 2..=6, got {0}")]
    UnsupportedOrder(usize),
    #[error("order-6 enumeration (116764 facets) must be requested explicitly; it can take hours")]
    LongRunGated,
}

/// A linear inequality ⟨A, X⟩ ≤ b over symmetric k×k matrices with integer
/// data. Coefficients are stored packed over the upper triangle; the entry
/// for (i, j), i < j, is the total coefficient of X_ij (the symmetric pair
/// counted once), so evaluation reads only the upper triangle of X.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LinearInequality {
    order: usize,
    coeffs: Vec<i64>,
    rhs: i64,
}

impl LinearInequality {
    /// Canonicalizes on construction: divides all data by their gcd. The
    /// orientation is semantic (≤ with the valid side up) and never flipped.
    pub fn new(order: usize, coeffs: Vec<i64>, rhs: i64) -> Self {
        assert_eq!(coeffs.len(), svec_len(order));
        let mut g = rhs.unsigned_abs();
        for &c in &coeffs {
            g = gcd_u64(g, c.unsigned_abs());
        }
        if g > 1 {
            let g = g as i64;
            return Self {
                order,
                coeffs: coeffs.into_iter().map(|c| c / g).collect(),
                rhs: rhs / g,
            };
        }
        Self { order, coeffs, rhs }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rhs(&self) -> i64 {
        self.rhs
    }

    /// Total coefficient of X_ij (0-based, any order of i and j).
    pub fn coeff(&self, i: usize, j: usize) -> i64 {
        self.coeffs[svec_index(i.min(j), i.max(j))]
    }

    /// Packed upper-triangle coefficients in svec index order.
    pub fn packed_coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// ⟨A, X⟩ for a symmetric X (reads the upper triangle once per entry).
    pub fn eval(&self, x: &Mat) -> f64 {
        debug_assert_eq!(x.n_rows(), self.order);
        let mut s = 0.0;
        for j in 0..self.order {
            for i in 0..=j {
                let c = self.coeffs[svec_index(i, j)];
                if c != 0 {
                    s += c as f64 * x.get(i, j);
                }
            }
        }
        s
    }

    /// max(0, ⟨A, X⟩ − b).
    pub fn violation(&self, x: &Mat) -> f64 {
        (self.eval(x) - self.rhs as f64).max(0.0)
    }

    /// Whether this inequality holds for a 0/1 stable-set outer product
    /// given as a vertex vector in packed upper-triangle coordinates.
    fn holds_on_packed(&self, vertex: &[i64]) -> bool {
        let lhs: i64 = self
            .coeffs
            .iter()
            .zip(vertex)
            .map(|(&c, &v)| c * v)
            .sum();
        lhs <= self.rhs
    }
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FacetSource {
    Enumerated,
    HandCoded,
}

/// Complete facet list of STAB²(K̄_k) as inequalities over Sym(k).
#[derive(Clone, Debug)]
pub struct FacetSystem {
    pub order: usize,
    pub inequalities: Vec<LinearInequality>,
    pub source: FacetSource,
}

impl FacetSystem {
    pub fn len(&self) -> usize {
        self.inequalities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inequalities.is_empty()
    }

    /// Canonical key set for equality-up-to-scaling-and-order comparisons.
    /// Inequalities are already gcd-reduced, so equal facets have equal data.
    pub fn canonical_set(&self) -> BTreeSet<(Vec<i64>, i64)> {
        self.inequalities
            .iter()
            .map(|f| (f.coeffs.clone(), f.rhs))
            .collect()
    }

    /// Largest violation of any inequality by X (0 when X satisfies all).
    pub fn max_violation(&self, x: &Mat) -> f64 {
        self.inequalities
            .iter()
            .map(|f| f.violation(x))
            .fold(0.0, f64::max)
    }

    /// PORTA-style `.ieq` text: DIM, a VALID point, and one line per
    /// inequality over variables x1..xd in packed upper-triangle order.
    pub fn to_ieq(&self) -> String {
        let d = svec_len(self.order);
        let mut out = String::new();
        let _ = writeln!(out, "DIM = {d}");
        let _ = writeln!(out);
        let _ = writeln!(out, "VALID");
        let _ = writeln!(out, "{}", vec!["0"; d].join(" "));
        let _ = writeln!(out);
        let _ = writeln!(out, "INEQUALITIES_SECTION");
        for (idx, f) in self.inequalities.iter().enumerate() {
            let mut terms = String::new();
            for (pos, &c) in f.coeffs.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                if terms.is_empty() {
                    let _ = write!(terms, "{}x{}", fmt_leading(c), pos + 1);
                } else {
                    let _ = write!(terms, " {}x{}", fmt_signed(c), pos + 1);
                }
            }
            if terms.is_empty() {
                terms.push('0');
            }
            let _ = writeln!(out, "( {:3}) {} <= {}", idx + 1, terms, f.rhs);
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "END");
        out
    }
}

fn fmt_leading(c: i64) -> String {
    match c {
        1 => String::new(),
        -1 => "-".to_string(),
        _ => format!("{c}"),
    }
}

fn fmt_signed(c: i64) -> String {
    match c {
        1 => "+".to_string(),
        -1 => "-".to_string(),
        _ if c > 0 => format!("+{c}"),
        _ => format!("{c}"),
    }
}

// ---------------------------------------------------------------------------
// Hand-coded systems for orders 1..3
// ---------------------------------------------------------------------------

/// The four facets of STAB²(K̄₂) embedded at positions (i, j), 0-based,
/// within Sym(k): 0 ≤ X_ij, X_ij ≤ X_ii, X_ij ≤ X_jj and
/// X_ii + X_jj ≤ 1 + X_ij.
pub fn esc2_inequalities(i: usize, j: usize, k: usize) -> Vec<LinearInequality> {
    assert!(i != j && i < k && j < k);
    let d = svec_len(k);
    let mk = |entries: &[(usize, usize, i64)], rhs: i64| {
        let mut coeffs = vec![0i64; d];
        for &(a, b, c) in entries {
            coeffs[svec_index(a.min(b), a.max(b))] += c;
        }
        LinearInequality::new(k, coeffs, rhs)
    };
    vec![
        mk(&[(i, j, -1)], 0),
        mk(&[(i, j, 1), (i, i, -1)], 0),
        mk(&[(i, j, 1), (j, j, -1)], 0),
        mk(&[(i, i, 1), (j, j, 1), (i, j, -1)], 1),
    ]
}

/// The sixteen facets of STAB²(K̄₃) embedded at positions (i, j, l): the
/// pairwise systems on all three pairs plus the four triangle facets.
pub fn esc3_inequalities(i: usize, j: usize, l: usize, k: usize) -> Vec<LinearInequality> {
    assert!(i != j && i != l && j != l && i < k && j < k && l < k);
    let d = svec_len(k);
    let mk = |entries: &[(usize, usize, i64)], rhs: i64| {
        let mut coeffs = vec![0i64; d];
        for &(a, b, c) in entries {
            coeffs[svec_index(a.min(b), a.max(b))] += c;
        }
        LinearInequality::new(k, coeffs, rhs)
    };
    let mut out = Vec::with_capacity(16);
    out.extend(esc2_inequalities(i, j, k));
    out.extend(esc2_inequalities(i, l, k));
    out.extend(esc2_inequalities(j, l, k));
    out.push(mk(&[(i, j, 1), (i, l, 1), (i, i, -1), (j, l, -1)], 0));
    out.push(mk(&[(i, j, 1), (j, l, 1), (j, j, -1), (i, l, -1)], 0));
    out.push(mk(&[(i, l, 1), (j, l, 1), (l, l, -1), (i, j, -1)], 0));
    out.push(mk(
        &[(i, i, 1), (j, j, 1), (l, l, 1), (i, j, -1), (i, l, -1), (j, l, -1)],
        1,
    ));
    out
}

/// STAB²(K̄₁) = [0, 1]: used for inequality-mode constraints of order 1.
pub fn facets_order1() -> Vec<LinearInequality> {
    vec![
        LinearInequality::new(1, vec![-1], 0),
        LinearInequality::new(1, vec![1], 1),
    ]
}

// ---------------------------------------------------------------------------
// Facet enumeration
// ---------------------------------------------------------------------------

/// The 2^k extreme points of STAB²(K̄_k) in packed upper-triangle
/// coordinates: entry (i, j) of ssᵀ is s_i s_j.
pub fn stab2_empty_vertices(k: usize) -> Vec<Vec<i64>> {
    let d = svec_len(k);
    (0u32..1 << k)
        .map(|mask| {
            let mut v = vec![0i64; d];
            for j in 0..k {
                if (mask >> j) & 1 == 0 {
                    continue;
                }
                for i in 0..=j {
                    if (mask >> i) & 1 == 1 {
                        v[svec_index(i, j)] = 1;
                    }
                }
            }
            v
        })
        .collect()
}

/// Complete facet system of STAB²(K̄_k) for 2 ≤ k ≤ 5, computed by double
/// description over exact integers and memoized. The facet counts are
/// 4, 16, 56 and 368. Use [`facets_stab2_empty_gated`] for k = 6.
pub fn facets_stab2_empty(k: usize) -> Result<&'static FacetSystem, PolytopeError> {
    static CACHE: [OnceLock<FacetSystem>; 4] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    if !(2..=5).contains(&k) {
        return Err(if k == 6 {
            PolytopeError::LongRunGated
        } else {
            PolytopeError::UnsupportedOrder(k)
        });
    }
    Ok(CACHE[k - 2].get_or_init(|| enumerate_facets(k)))
}

/// Like [`facets_stab2_empty`] but allowing the long-running k = 6 case
/// (116764 facets) when `allow_order6` is set. Not memoized for k = 6.
pub fn facets_stab2_empty_gated(
    k: usize,
    allow_order6: bool,
) -> Result<FacetSystem, PolytopeError> {
    match k {
        2..=5 => Ok(facets_stab2_empty(k)?.clone()),
        6 if allow_order6 => Ok(enumerate_facets(6)),
        6 => Err(PolytopeError::LongRunGated),
        _ => Err(PolytopeError::UnsupportedOrder(k)),
    }
}

fn enumerate_facets(k: usize) -> FacetSystem {
    let vertices = stab2_empty_vertices(k);
    let raw = dd::facet_enumeration(&vertices, svec_len(k));
    let inequalities: Vec<LinearInequality> = raw
        .into_iter()
        .map(|f| {
            let coeffs: Vec<i64> = f
                .coeffs
                .iter()
                .map(|c| i64::try_from(c).expect("facet coefficients fit in i64"))
                .collect();
            let rhs = i64::try_from(&f.rhs).expect("facet rhs fits in i64");
            LinearInequality::new(k, coeffs, rhs)
        })
        .collect();
    // every extreme point satisfies every facet
    debug_assert!(inequalities
        .iter()
        .all(|f| vertices.iter().all(|v| f.holds_on_packed(v))));
    FacetSystem {
        order: k,
        inequalities,
        source: FacetSource::Enumerated,
    }
}

/// Facet certificate: for every facet, the extreme points satisfying it with
/// equality must contain at least k(k+1)/2 affinely independent ones
/// (tightness on a (d−1)-dimensional face). Returns the smallest such count.
pub fn facet_certificate_min_rank(system: &FacetSystem) -> usize {
    let vertices = stab2_empty_vertices(system.order);
    system
        .inequalities
        .iter()
        .map(|f| {
            let tight: Vec<Vec<i64>> = vertices
                .iter()
                .filter(|v| {
                    let lhs: i64 = f.coeffs.iter().zip(v.iter()).map(|(&c, &x)| c * x).sum();
                    lhs == f.rhs
                })
                .cloned()
                .collect();
            affine_independent_count(&tight)
        })
        .min()
        .unwrap_or(0)
}

/// Membership in STAB²(G) for a matrix with zeros on the edges of g, checked
/// through the facet system of the edgeless graph of the same order.
pub fn inside_by_facets(x: &Mat, g: &Graph, tol: f64) -> Result<bool, PolytopeError> {
    let k = g.n();
    let system = facets_stab2_empty(k)?;
    for (a, b) in g.edges() {
        debug_assert!(x.get(a - 1, b - 1).abs() <= 1e-9);
    }
    Ok(system.max_violation(x) <= tol)
}

/// Convenience: the exact stable-set family of a graph, needed all over the
/// projection and model code.
pub fn family_of(g: &Graph) -> crate::stable_sets::StableSetFamily {
    enumerate_stable_sets(g).expect("order small enough for enumeration")
}
