//! Block-structured SDP models: the two Lovász theta formulations and their
//! augmentation with exact subgraph constraints (convex-combination or
//! facet-inequality representation) and scaled exact subgraph constraints.
//!
//! Problems are stored in pure equality form over a product of PSD blocks
//! and one shared nonnegative block: inequalities get a dedicated slack
//! entry on construction. Coefficient entries follow the SDPA convention:
//! an entry (i, j, v) with i ≤ j stands for the symmetric matrix with
//! A_ij = A_ji = v, so ⟨A, X⟩ picks up 2v·X_ij off the diagonal.

use std::collections::BTreeSet;
use std::ops::Range;

use thiserror::Error;

use crate::graph::{Graph, VertexSubset};
use crate::linalg::Mat;
use crate::polytope::{facets_order1, facets_stab2_empty, LinearInequality};
use crate::stable_sets::{
    enumerate_stable_sets, scaled_stable_set_matrices, stable_set_matrices, StableSetError,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("subset {0} out of range for a graph of order {1}")]
    SubsetOutOfRange(VertexSubset, usize),
    #[error("facet mode supports subset orders up to 5, got {0}")]
    FacetOrderTooLarge(usize),
    #[error("scaled constraints require the convex-combination (lambda) representation")]
    ScaledNeedsLambda,
    #[error("stable set enumeration failed: {0}")]
    StableSets(#[from] StableSetError),
    #[error("facet system unavailable: {0}")]
    Polytope(#[from] crate::polytope::PolytopeError),
    #[error("trace {0} below tolerance; cannot normalize")]
    TraceTooSmall(f64),
    #[error("input is not feasible: {0}")]
    InfeasibleInput(String),
}

/// One cone block of the problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeBlock {
    /// Symmetric PSD block of the given order.
    Psd(usize),
    /// Componentwise nonnegative block of the given length.
    NonNeg(usize),
}

impl ConeBlock {
    pub fn dim(&self) -> usize {
        match *self {
            ConeBlock::Psd(d) | ConeBlock::NonNeg(d) => d,
        }
    }
}

/// A sparse coefficient entry: block index, position (row ≤ col for PSD
/// blocks, row == col for the nonnegative block), value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoeffEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub entries: Vec<CoeffEntry>,
    pub rhs: f64,
}

/// Which base formulation a problem was built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormulationTag {
    /// Order n+1 matrix with the corner entry pinned to 1 and the diagonal
    /// linked to the first row; n+m+1 equality constraints.
    ThetaExtended,
    /// Order n matrix with trace pinned to 1; m+1 equality constraints.
    ThetaTrace,
}

/// How an exact subgraph constraint is represented in the SDP.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EscMode {
    /// t_I new nonnegative variables λ, one simplex equality and one
    /// coupling equality per upper-triangle entry of X_I.
    Lambda,
    /// The facet inequalities of STAB² of the edgeless graph of the same
    /// order, one slack variable each.
    Facets,
}

/// Selection of subsets to constrain plus the representation.
#[derive(Clone, Debug)]
pub struct EscSelection {
    pub subsets: Vec<VertexSubset>,
    pub mode: EscMode,
    /// Use the trace-scaled polytope SSTAB² instead of STAB².
    pub scaled: bool,
}

impl EscSelection {
    pub fn lambda(subsets: Vec<VertexSubset>) -> Self {
        Self {
            subsets,
            mode: EscMode::Lambda,
            scaled: false,
        }
    }

    pub fn facets(subsets: Vec<VertexSubset>) -> Self {
        Self {
            subsets,
            mode: EscMode::Facets,
            scaled: false,
        }
    }

    pub fn scaled(subsets: Vec<VertexSubset>) -> Self {
        Self {
            subsets,
            mode: EscMode::Lambda,
            scaled: true,
        }
    }
}

/// Bookkeeping for one added exact subgraph constraint, enabling λ and
/// binding-facet read-back from a solved problem.
#[derive(Clone, Debug)]
pub struct EscRecord {
    pub subset: VertexSubset,
    pub mode: EscMode,
    pub scaled: bool,
    /// Offsets of the λ variables in the nonnegative block (lambda mode).
    pub lambda_vars: Option<Range<usize>>,
    /// Offsets of the slack variables in the nonnegative block (facet mode).
    pub slack_vars: Option<Range<usize>>,
    /// Indices of the constraints this ESC appended.
    pub constraints: Range<usize>,
}

/// A conic program in equality form: maximize ⟨C, X⟩ subject to
/// ⟨A_i, X⟩ = b_i over a product of PSD blocks and a nonnegative block.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub name: String,
    pub blocks: Vec<ConeBlock>,
    pub objective: Vec<CoeffEntry>,
    pub constraints: Vec<Constraint>,
    pub formulation: FormulationTag,
    pub escs: Vec<EscRecord>,
}

impl SdpProblem {
    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Index of the shared nonnegative block, creating it if absent.
    fn nonneg_block(&mut self) -> usize {
        if let Some(idx) = self
            .blocks
            .iter()
            .position(|b| matches!(b, ConeBlock::NonNeg(_)))
        {
            idx
        } else {
            self.blocks.push(ConeBlock::NonNeg(0));
            self.blocks.len() - 1
        }
    }

    fn grow_nonneg(&mut self, by: usize) -> Range<usize> {
        let idx = self.nonneg_block();
        let ConeBlock::NonNeg(len) = &mut self.blocks[idx] else {
            unreachable!()
        };
        let start = *len;
        *len += by;
        start..*len
    }

    /// Structural validation: entries in range, row ≤ col, PSD/NonNeg shape.
    pub fn validate(&self) -> Result<(), String> {
        let check = |e: &CoeffEntry, what: &str| -> Result<(), String> {
            let block = self
                .blocks
                .get(e.block)
                .ok_or_else(|| format!("{what}: block {} out of range", e.block))?;
            match block {
                ConeBlock::Psd(d) => {
                    if e.row > e.col || e.col >= *d {
                        return Err(format!("{what}: bad PSD entry ({}, {})", e.row, e.col));
                    }
                }
                ConeBlock::NonNeg(d) => {
                    if e.row != e.col || e.row >= *d {
                        return Err(format!("{what}: bad NonNeg entry ({}, {})", e.row, e.col));
                    }
                }
            }
            Ok(())
        };
        for e in &self.objective {
            check(e, "objective")?;
        }
        for (i, c) in self.constraints.iter().enumerate() {
            for e in &c.entries {
                check(e, &format!("constraint {i}"))?;
            }
        }
        Ok(())
    }

    /// ⟨C, X⟩ for given block values (PSD blocks as matrices, nonneg as
    /// diagonal vectors in a Mat of width 1? — no: nonneg values are passed
    /// as flat vectors inside `BlockValues`).
    pub fn objective_value(&self, values: &[BlockValues]) -> f64 {
        eval_entries(&self.objective, values)
    }

    pub fn constraint_value(&self, i: usize, values: &[BlockValues]) -> f64 {
        eval_entries(&self.constraints[i].entries, values)
    }
}

/// Values for one cone block.
#[derive(Clone, Debug)]
pub enum BlockValues {
    Psd(Mat),
    NonNeg(Vec<f64>),
}

impl BlockValues {
    pub fn as_psd(&self) -> &Mat {
        match self {
            BlockValues::Psd(m) => m,
            BlockValues::NonNeg(_) => panic!("expected PSD block"),
        }
    }

    pub fn as_nonneg(&self) -> &[f64] {
        match self {
            BlockValues::NonNeg(v) => v,
            BlockValues::Psd(_) => panic!("expected NonNeg block"),
        }
    }
}

fn eval_entries(entries: &[CoeffEntry], values: &[BlockValues]) -> f64 {
    let mut s = 0.0;
    for e in entries {
        match &values[e.block] {
            BlockValues::Psd(m) => {
                s += if e.row == e.col {
                    e.value * m.get(e.row, e.col)
                } else {
                    2.0 * e.value * m.get(e.row, e.col)
                };
            }
            BlockValues::NonNeg(v) => s += e.value * v[e.row],
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Base formulations
// ---------------------------------------------------------------------------

/// Theta via the order-(n+1) formulation: maximize Σ x over
/// diag(X) = x, X_ij = 0 on edges, [[1, xᵀ], [x, X]] ⪰ 0.
/// Constraint order: corner pin, n diagonal links, m edges — n+m+1 total.
pub fn build_theta_nplus1(g: &Graph) -> SdpProblem {
    let n = g.n();
    let mut constraints = Vec::with_capacity(n + g.m() + 1);
    // corner Y₀₀ = 1
    constraints.push(Constraint {
        entries: vec![CoeffEntry {
            block: 0,
            row: 0,
            col: 0,
            value: 1.0,
        }],
        rhs: 1.0,
    });
    // diagonal links Y_ii − Y₀i = 0
    for i in 1..=n {
        constraints.push(Constraint {
            entries: vec![
                CoeffEntry {
                    block: 0,
                    row: i,
                    col: i,
                    value: 1.0,
                },
                CoeffEntry {
                    block: 0,
                    row: 0,
                    col: i,
                    value: -0.5,
                },
            ],
            rhs: 0.0,
        });
    }
    // edge zeros Y_ij = 0
    for &(a, b) in g.edges() {
        constraints.push(Constraint {
            entries: vec![CoeffEntry {
                block: 0,
                row: a,
                col: b,
                value: 0.5,
            }],
            rhs: 0.0,
        });
    }
    // objective Σ Y₀i
    let objective = (1..=n)
        .map(|i| CoeffEntry {
            block: 0,
            row: 0,
            col: i,
            value: 0.5,
        })
        .collect();
    SdpProblem {
        name: format!("{}-extended", g.name()),
        blocks: vec![ConeBlock::Psd(n + 1)],
        objective,
        constraints,
        formulation: FormulationTag::ThetaExtended,
        escs: Vec::new(),
    }
}

/// Theta via the order-n formulation: maximize ⟨J, X⟩ over trace(X) = 1,
/// X_ij = 0 on edges, X ⪰ 0. Constraint order: trace pin, m edges — m+1.
pub fn build_theta_n(g: &Graph) -> SdpProblem {
    let n = g.n();
    let mut constraints = Vec::with_capacity(g.m() + 1);
    constraints.push(Constraint {
        entries: (0..n)
            .map(|i| CoeffEntry {
                block: 0,
                row: i,
                col: i,
                value: 1.0,
            })
            .collect(),
        rhs: 1.0,
    });
    for &(a, b) in g.edges() {
        constraints.push(Constraint {
            entries: vec![CoeffEntry {
                block: 0,
                row: a - 1,
                col: b - 1,
                value: 0.5,
            }],
            rhs: 0.0,
        });
    }
    let mut objective = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            objective.push(CoeffEntry {
                block: 0,
                row: i,
                col: j,
                value: 1.0,
            });
        }
    }
    SdpProblem {
        name: format!("{}-trace", g.name()),
        blocks: vec![ConeBlock::Psd(n)],
        objective,
        constraints,
        formulation: FormulationTag::ThetaTrace,
        escs: Vec::new(),
    }
}

// ---------------------------------------------------------------------------
// Exact subgraph constraints
// ---------------------------------------------------------------------------

/// Returns a copy of `p` augmented with the selected exact subgraph
/// constraints. Duplicate subsets are silently dropped (first occurrence
/// wins); nested subsets are all kept.
pub fn add_escs(p: &SdpProblem, g: &Graph, sel: &EscSelection) -> Result<SdpProblem, ModelError> {
    if sel.scaled && sel.mode != EscMode::Lambda {
        return Err(ModelError::ScaledNeedsLambda);
    }
    let mut out = p.clone();
    let mut seen: BTreeSet<Vec<usize>> = out
        .escs
        .iter()
        .map(|r| r.subset.members().to_vec())
        .collect();
    for subset in &sel.subsets {
        if !seen.insert(subset.members().to_vec()) {
            continue;
        }
        if subset
            .members()
            .iter()
            .any(|&v| v < 1 || v > g.n())
        {
            return Err(ModelError::SubsetOutOfRange(subset.clone(), g.n()));
        }
        match sel.mode {
            EscMode::Lambda => add_lambda_esc(&mut out, g, subset, sel.scaled)?,
            EscMode::Facets => add_facet_esc(&mut out, g, subset)?,
        }
    }
    Ok(out)
}

/// Position of X_ab (1-based graph vertices) inside the PSD block.
fn psd_pos(formulation: FormulationTag, a: usize, b: usize) -> (usize, usize) {
    let (a, b) = (a.min(b), a.max(b));
    match formulation {
        FormulationTag::ThetaExtended => (a, b), // offset by the corner row
        FormulationTag::ThetaTrace => (a - 1, b - 1),
    }
}

fn add_lambda_esc(
    out: &mut SdpProblem,
    g: &Graph,
    subset: &VertexSubset,
    scaled: bool,
) -> Result<(), ModelError> {
    let sub = g.induced(subset).map_err(|_| {
        ModelError::SubsetOutOfRange(subset.clone(), g.n())
    })?;
    let family = enumerate_stable_sets(&sub)?;
    let gens = if scaled {
        scaled_stable_set_matrices(&family)
    } else {
        stable_set_matrices(&family)
    };
    let t = family.len();
    let k = subset.order();
    let members = subset.members();
    let lambda_range = out.grow_nonneg(t);
    let nonneg = out.nonneg_block();
    let c_start = out.constraints.len();

    // simplex equality Σ λ = 1
    out.constraints.push(Constraint {
        entries: (lambda_range.clone())
            .map(|idx| CoeffEntry {
                block: nonneg,
                row: idx,
                col: idx,
                value: 1.0,
            })
            .collect(),
        rhs: 1.0,
    });
    // coupling equalities X_I(p,q) − Σ λ_i M_i(p,q) = 0, upper triangle only
    for p_idx in 0..k {
        for q_idx in p_idx..k {
            let (row, col) = psd_pos(out.formulation, members[p_idx], members[q_idx]);
            let mut entries = vec![CoeffEntry {
                block: 0,
                row,
                col,
                value: if row == col { 1.0 } else { 0.5 },
            }];
            for (i, gen) in gens.iter().enumerate() {
                let coeff = gen.get(p_idx, q_idx);
                if coeff != 0.0 {
                    entries.push(CoeffEntry {
                        block: nonneg,
                        row: lambda_range.start + i,
                        col: lambda_range.start + i,
                        value: -coeff,
                    });
                }
            }
            out.constraints.push(Constraint { entries, rhs: 0.0 });
        }
    }
    out.escs.push(EscRecord {
        subset: subset.clone(),
        mode: EscMode::Lambda,
        scaled,
        lambda_vars: Some(lambda_range),
        slack_vars: None,
        constraints: c_start..out.constraints.len(),
    });
    Ok(())
}

fn add_facet_esc(
    out: &mut SdpProblem,
    _g: &Graph,
    subset: &VertexSubset,
) -> Result<(), ModelError> {
    // the base model pins X to zero on edges, so the edgeless-graph facets
    // describe STAB²(G_I) exactly; the graph itself is not needed here
    let k = subset.order();
    if k > 5 {
        return Err(ModelError::FacetOrderTooLarge(k));
    }
    let facets: Vec<LinearInequality> = if k == 1 {
        facets_order1()
    } else {
        facets_stab2_empty(k)?.inequalities.clone()
    };
    let members = subset.members();
    let slack_range = out.grow_nonneg(facets.len());
    let nonneg = out.nonneg_block();
    let c_start = out.constraints.len();
    for (f_idx, facet) in facets.iter().enumerate() {
        // ⟨A, X_I⟩ + slack = rhs; facet coefficients are totals per entry,
        // so off-diagonal SDP entries carry half.
        let mut entries = Vec::new();
        for q_idx in 0..k {
            for p_idx in 0..=q_idx {
                let c = facet.coeff(p_idx, q_idx);
                if c == 0 {
                    continue;
                }
                let (row, col) = psd_pos(out.formulation, members[p_idx], members[q_idx]);
                let value = if row == col {
                    c as f64
                } else {
                    c as f64 / 2.0
                };
                entries.push(CoeffEntry {
                    block: 0,
                    row,
                    col,
                    value,
                });
            }
        }
        entries.push(CoeffEntry {
            block: nonneg,
            row: slack_range.start + f_idx,
            col: slack_range.start + f_idx,
            value: 1.0,
        });
        out.constraints.push(Constraint {
            entries,
            rhs: facet.rhs() as f64,
        });
    }
    out.escs.push(EscRecord {
        subset: subset.clone(),
        mode: EscMode::Facets,
        scaled: false,
        lambda_vars: None,
        slack_vars: Some(slack_range),
        constraints: c_start..out.constraints.len(),
    });
    Ok(())
}

// ---------------------------------------------------------------------------
// Solution extraction and the two transformations between the formulations
// ---------------------------------------------------------------------------

/// λ coefficients of a registered subgraph constraint, read back from
/// solved block values. None for facet-mode records.
pub fn esc_lambda(p: &SdpProblem, blocks: &[BlockValues], esc: usize) -> Option<Vec<f64>> {
    let rec = &p.escs[esc];
    let range = rec.lambda_vars.clone()?;
    let nonneg_idx = p
        .blocks
        .iter()
        .position(|b| matches!(b, ConeBlock::NonNeg(_)))?;
    Some(blocks[nonneg_idx].as_nonneg()[range].to_vec())
}

/// Splits an extended-formulation PSD block into (x, X): x is the first row
/// of the order-(n+1) matrix, X the trailing n×n principal submatrix.
pub fn split_extended(big: &Mat) -> (Vec<f64>, Mat) {
    let n = big.n_rows() - 1;
    let x: Vec<f64> = (1..=n).map(|i| big.get(0, i)).collect();
    let x_mat = Mat::from_fn(n, n, |i, j| big.get(i + 1, j + 1));
    (x, x_mat)
}

/// Feasible-point transport from the extended formulation to the trace one:
/// X ↦ X / trace(X). For an optimal input the image is optimal and its
/// objective ⟨J, X'⟩ is at least 1ᵀx.
pub fn gruber_rendl_down(_x: &[f64], big_x: &Mat, tol: f64) -> Result<Mat, ModelError> {
    let tr = big_x.trace();
    if tr <= tol {
        return Err(ModelError::TraceTooSmall(tr));
    }
    let mut out = big_x.clone();
    out.scale(1.0 / tr);
    Ok(out)
}

/// Inverse transport: X ↦ ⟨J, X⟩·X with x recovered as the diagonal.
/// Rejects inputs whose trace or edge residuals exceed 1e−5.
pub fn gruber_rendl_up(x_prime: &Mat, g: &Graph) -> Result<(Vec<f64>, Mat), ModelError> {
    let n = g.n();
    assert_eq!(x_prime.n_rows(), n);
    let tr = x_prime.trace();
    if (tr - 1.0).abs() > 1e-5 {
        return Err(ModelError::InfeasibleInput(format!(
            "trace residual {:.3e}",
            (tr - 1.0).abs()
        )));
    }
    for &(a, b) in g.edges() {
        let v = x_prime.get(a - 1, b - 1).abs();
        if v > 1e-5 {
            return Err(ModelError::InfeasibleInput(format!(
                "edge ({a},{b}) residual {v:.3e}"
            )));
        }
    }
    let all_ones = Mat::from_fn(n, n, |_, _| 1.0);
    let scale = all_ones.frob_inner(x_prime);
    let mut big = x_prime.clone();
    big.scale(scale);
    let x = (0..n).map(|i| big.get(i, i)).collect();
    Ok((x, big))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{all_subsets_of_order, erdos_renyi, Graph};

    #[test]
    fn extended_constraint_count() {
        let g = Graph::cycle(5);
        let p = build_theta_nplus1(&g);
        assert_eq!(p.n_constraints(), 5 + 5 + 1);
        assert_eq!(p.blocks, vec![ConeBlock::Psd(6)]);
        p.validate().unwrap();
    }

    #[test]
    fn extended_count_formula_matches_hamming() {
        let g = crate::graph::hamming_complement_6_4();
        let p = build_theta_nplus1(&g);
        assert_eq!(p.n_constraints(), 64 + 1312 + 1);
    }

    #[test]
    fn trace_constraint_count() {
        let g = Graph::cycle(5);
        let p = build_theta_n(&g);
        assert_eq!(p.n_constraints(), 5 + 1);
        assert_eq!(p.blocks, vec![ConeBlock::Psd(5)]);
        p.validate().unwrap();
    }

    #[test]
    fn counts_on_random_graphs() {
        for seed in 0..50 {
            let n = 4 + (seed as usize % 9);
            let g = erdos_renyi(n, 0.5, seed).unwrap();
            assert_eq!(build_theta_nplus1(&g).n_constraints(), n + g.m() + 1);
            assert_eq!(build_theta_n(&g).n_constraints(), g.m() + 1);
        }
    }

    #[test]
    fn lambda_esc_adds_expected_counts() {
        for seed in 50..100 {
            let n = 5 + (seed as usize % 6);
            let g = erdos_renyi(n, 0.4, seed).unwrap();
            let base = build_theta_nplus1(&g);
            let k = 2 + (seed as usize % 3);
            let subset = VertexSubset::new((1..=k).collect::<Vec<_>>());
            let sub = g.induced(&subset).unwrap();
            let t = enumerate_stable_sets(&sub).unwrap().len();
            let p = add_escs(&base, &g, &EscSelection::lambda(vec![subset])).unwrap();
            assert_eq!(
                p.n_constraints(),
                base.n_constraints() + 1 + k * (k + 1) / 2
            );
            let nonneg_len = p
                .blocks
                .iter()
                .find_map(|b| match b {
                    ConeBlock::NonNeg(d) => Some(*d),
                    _ => None,
                })
                .unwrap();
            assert_eq!(nonneg_len, t);
            p.validate().unwrap();
        }
    }

    #[test]
    fn order1_esc_counts() {
        // 2 λ variables (∅ and the singleton), simplex + one coupling row
        let g = Graph::cycle(5);
        let base = build_theta_nplus1(&g);
        let p = add_escs(
            &base,
            &g,
            &EscSelection::lambda(vec![VertexSubset::new([3])]),
        )
        .unwrap();
        assert_eq!(p.n_constraints(), base.n_constraints() + 2);
        let rec = &p.escs[0];
        assert_eq!(rec.lambda_vars.clone().unwrap().len(), 2);
    }

    #[test]
    fn duplicate_subsets_are_dropped() {
        let g = Graph::cycle(5);
        let base = build_theta_n(&g);
        let s = VertexSubset::new([1, 2, 3]);
        let p = add_escs(
            &base,
            &g,
            &EscSelection::lambda(vec![s.clone(), s.clone(), VertexSubset::new([3, 2, 1])]),
        )
        .unwrap();
        assert_eq!(p.escs.len(), 1);
    }

    #[test]
    fn nested_subsets_are_kept() {
        let g = Graph::cycle(6);
        let base = build_theta_n(&g);
        let p = add_escs(
            &base,
            &g,
            &EscSelection::lambda(vec![
                VertexSubset::new([1, 2]),
                VertexSubset::new([1, 2, 3]),
            ]),
        )
        .unwrap();
        assert_eq!(p.escs.len(), 2);
    }

    #[test]
    fn facet_esc_counts() {
        let g = Graph::cycle(6);
        let base = build_theta_n(&g);
        let subsets = vec![VertexSubset::new([1, 3]), VertexSubset::new([2, 4, 6])];
        let p = add_escs(&base, &g, &EscSelection::facets(subsets)).unwrap();
        // 4 facets for the pair, 16 for the triple, one slack each
        assert_eq!(p.n_constraints(), base.n_constraints() + 4 + 16);
        let nonneg_len = p
            .blocks
            .iter()
            .find_map(|b| match b {
                ConeBlock::NonNeg(d) => Some(*d),
                _ => None,
            })
            .unwrap();
        assert_eq!(nonneg_len, 20);
        p.validate().unwrap();
    }

    #[test]
    fn facet_mode_rejects_large_orders() {
        let g = Graph::cycle(8);
        let base = build_theta_n(&g);
        let s = VertexSubset::new([1, 2, 3, 4, 5, 6]);
        assert!(matches!(
            add_escs(&base, &g, &EscSelection::facets(vec![s])),
            Err(ModelError::FacetOrderTooLarge(6))
        ));
    }

    #[test]
    fn scaled_facets_rejected() {
        let g = Graph::cycle(5);
        let base = build_theta_n(&g);
        let mut sel = EscSelection::facets(vec![VertexSubset::new([1, 2])]);
        sel.scaled = true;
        assert!(matches!(
            add_escs(&base, &g, &sel),
            Err(ModelError::ScaledNeedsLambda)
        ));
    }

    #[test]
    fn subset_out_of_range_rejected() {
        let g = Graph::cycle(5);
        let base = build_theta_n(&g);
        let s = VertexSubset::new([4, 9]);
        assert!(add_escs(&base, &g, &EscSelection::lambda(vec![s])).is_err());
    }

    #[test]
    fn level_subset_counts() {
        assert_eq!(all_subsets_of_order(64, 2).len(), 2016);
    }

    #[test]
    fn objective_evaluation_trace_form() {
        let g = Graph::cycle(5);
        let p = build_theta_n(&g);
        let x = Mat::scaled_identity(5, 0.2);
        let vals = vec![BlockValues::Psd(x)];
        assert!((p.objective_value(&vals) - 1.0).abs() < 1e-12);
        assert!((p.constraint_value(0, &vals) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_transport_round_trip() {
        // X = ssᵀ for a stable set of size γ maps down to ssᵀ/γ and back
        let g = Graph::cycle(5);
        let n = g.n();
        let s = [1.0, 0.0, 1.0, 0.0, 0.0]; // stable in C5
        let big = Mat::from_fn(n, n, |i, j| s[i] * s[j]);
        let x: Vec<f64> = (0..n).map(|i| big.get(i, i)).collect();
        let down = gruber_rendl_down(&x, &big, 1e-9).unwrap();
        assert!((down.trace() - 1.0).abs() < 1e-12);
        let all_ones = Mat::from_fn(n, n, |_, _| 1.0);
        assert!((all_ones.frob_inner(&down) - 2.0).abs() < 1e-12);
        let (x_up, big_up) = gruber_rendl_up(&down, &g).unwrap();
        let mut diff = big_up.clone();
        diff.add_scaled(&big, -1.0);
        assert!(diff.max_abs() < 1e-12);
        assert!((x_up[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_rejected_by_down_transform() {
        let big = Mat::zeros(4, 4);
        assert!(matches!(
            gruber_rendl_down(&[0.0; 4], &big, 1e-9),
            Err(ModelError::TraceTooSmall(_))
        ));
    }

    #[test]
    fn up_transform_rejects_infeasible() {
        let g = Graph::cycle(5);
        // edge entry nonzero
        let mut x = Mat::scaled_identity(5, 0.2);
        x.set(0, 1, 0.3);
        x.set(1, 0, 0.3);
        assert!(gruber_rendl_up(&x, &g).is_err());
        // trace off
        let x = Mat::scaled_identity(5, 0.5);
        assert!(gruber_rendl_up(&x, &g).is_err());
    }

    #[test]
    fn up_transform_on_empty_graph() {
        let g = Graph::empty(4);
        let x = Mat::from_fn(4, 4, |_, _| 0.25);
        let (x_up, big) = gruber_rendl_up(&x, &g).unwrap();
        // ⟨J, X⟩ = 4, so X* = J and x* = 1
        assert!(x_up.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!((big.get(1, 2) - 1.0).abs() < 1e-12);
    }
}
