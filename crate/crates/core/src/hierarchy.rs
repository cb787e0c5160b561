//! Bounds from the exact subgraph hierarchies: single bound computation for
//! a chosen subset family, full hierarchy levels, the iterative
//! violated-subgraph cutting-plane search, and the three-way comparison of
//! the hierarchies on a shared subset family.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{all_subsets_of_order, binomial, Graph, VertexSubset};
use crate::linalg::Mat;
use crate::model::{
    add_escs, build_theta_n, build_theta_nplus1, esc_lambda, split_extended, EscMode,
    EscSelection, FormulationTag, ModelError, SdpProblem,
};
use crate::polytope::project_onto_stab2;
use crate::rng::SplitMix64;
use crate::solver::{solve, Solution, SolveStatus, SolverError, SolverSettings};
use crate::stable_sets::enumerate_stable_sets;

#[derive(Debug, Error)]
pub enum HierarchyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("level {k} would need {needed} subsets, above the cap {cap}; use the search instead")]
    LevelTooLarge { k: usize, needed: usize, cap: usize },
    #[error("search order {0} too large (stable set enumeration per subgraph caps at 8)")]
    SearchOrderTooLarge(usize),
    #[error("scaled constraints require lambda mode")]
    ScaledNeedsLambda,
}

/// Which hierarchy a bound belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Hierarchy {
    /// Exact subgraph constraints on the order-(n+1) theta formulation.
    Esh,
    /// The same constraints on the order-n trace formulation.
    Cesh,
    /// Trace-scaled constraints on the order-n formulation.
    Sesh,
}

impl Hierarchy {
    pub fn base_formulation(self) -> FormulationTag {
        match self {
            Hierarchy::Esh => FormulationTag::ThetaExtended,
            Hierarchy::Cesh | Hierarchy::Sesh => FormulationTag::ThetaTrace,
        }
    }

    pub fn scaled(self) -> bool {
        matches!(self, Hierarchy::Sesh)
    }
}

impl fmt::Display for Hierarchy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hierarchy::Esh => write!(f, "ESH"),
            Hierarchy::Cesh => write!(f, "CESH"),
            Hierarchy::Sesh => write!(f, "SESH"),
        }
    }
}

/// One cutting-plane round in a bound trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct RoundStat {
    pub round: usize,
    pub bound: f64,
    pub escs_added: usize,
    pub escs_total: usize,
    pub solve_seconds: f64,
}

/// A computed upper bound with its provenance.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub hierarchy: Hierarchy,
    pub graph_name: String,
    pub n: usize,
    pub m: usize,
    /// Number of subgraph constraints, total and split by subset order.
    pub subset_count: usize,
    pub subsets_by_order: BTreeMap<usize, usize>,
    /// The certified upper bound: the dual objective of the relaxation,
    /// which dominates the optimum (and hence α) up to the dual residual.
    pub bound: f64,
    /// Exact stability number when the caller supplied one.
    pub alpha_lb: Option<usize>,
    pub solver_status: String,
    pub solver_iterations: usize,
    pub solve_seconds: f64,
    pub trajectory: Vec<RoundStat>,
}

impl BoundReport {
    /// Rounds whose bound dropped below an integer the previous rounds sat
    /// above; in branch-and-bound terms these are where ⌊bound⌋ decreased.
    pub fn floor_improvements(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        let mut prev_floor: Option<f64> = None;
        for r in &self.trajectory {
            let fl = r.bound.floor();
            if let Some(pf) = prev_floor {
                if fl < pf {
                    out.push((r.round, r.bound));
                }
            }
            prev_floor = Some(fl.min(prev_floor.unwrap_or(f64::INFINITY)));
        }
        out
    }
}

fn status_str(s: SolveStatus) -> String {
    match s {
        SolveStatus::Optimal => "optimal".into(),
        SolveStatus::MaxIter => "max_iter".into(),
        SolveStatus::InfeasibleSuspect => "infeasible_suspect".into(),
        SolveStatus::NumericalFailure => "numerical_failure".into(),
    }
}

fn subsets_histogram(subsets: &[VertexSubset]) -> BTreeMap<usize, usize> {
    let mut by_order = BTreeMap::new();
    for s in subsets {
        *by_order.entry(s.order()).or_insert(0) += 1;
    }
    by_order
}

fn base_model(g: &Graph, hierarchy: Hierarchy) -> SdpProblem {
    match hierarchy.base_formulation() {
        FormulationTag::ThetaExtended => build_theta_nplus1(g),
        FormulationTag::ThetaTrace => build_theta_n(g),
    }
}

fn build_model(
    g: &Graph,
    hierarchy: Hierarchy,
    subsets: &[VertexSubset],
    mode: EscMode,
) -> Result<SdpProblem, HierarchyError> {
    if hierarchy.scaled() && mode != EscMode::Lambda {
        return Err(HierarchyError::ScaledNeedsLambda);
    }
    let base = base_model(g, hierarchy);
    if subsets.is_empty() {
        return Ok(base);
    }
    let sel = EscSelection {
        subsets: subsets.to_vec(),
        mode,
        scaled: hierarchy.scaled(),
    };
    Ok(add_escs(&base, g, &sel)?)
}

/// Builds the chosen base formulation, adds the selected constraints, solves
/// and reports. Solver trouble is reported through the status field, not as
/// an error.
pub fn compute_bound(
    g: &Graph,
    hierarchy: Hierarchy,
    subsets: &[VertexSubset],
    mode: EscMode,
    settings: &SolverSettings,
    alpha_lb: Option<usize>,
) -> Result<BoundReport, HierarchyError> {
    let problem = build_model(g, hierarchy, subsets, mode)?;
    let t0 = Instant::now();
    let sol = solve(&problem, settings)?;
    let seconds = t0.elapsed().as_secs_f64();
    Ok(BoundReport {
        hierarchy,
        graph_name: g.name().to_string(),
        n: g.n(),
        m: g.m(),
        subset_count: problem.escs.len(),
        subsets_by_order: subsets_histogram(subsets),
        bound: sol.dual_objective,
        alpha_lb,
        solver_status: status_str(sol.status),
        solver_iterations: sol.iterations,
        solve_seconds: seconds,
        trajectory: vec![RoundStat {
            round: 0,
            bound: sol.dual_objective,
            escs_added: subsets.len(),
            escs_total: problem.escs.len(),
            solve_seconds: seconds,
        }],
    })
}

pub const DEFAULT_LEVEL_CAP: usize = 200_000;

/// The k-th hierarchy level: every order-k subset is constrained.
pub fn compute_level(
    g: &Graph,
    hierarchy: Hierarchy,
    k: usize,
    mode: EscMode,
    settings: &SolverSettings,
    alpha_lb: Option<usize>,
) -> Result<BoundReport, HierarchyError> {
    compute_level_capped(g, hierarchy, k, mode, settings, alpha_lb, DEFAULT_LEVEL_CAP)
}

#[allow(clippy::too_many_arguments)]
pub fn compute_level_capped(
    g: &Graph,
    hierarchy: Hierarchy,
    k: usize,
    mode: EscMode,
    settings: &SolverSettings,
    alpha_lb: Option<usize>,
    cap: usize,
) -> Result<BoundReport, HierarchyError> {
    let needed = binomial(g.n(), k);
    if needed > cap {
        return Err(HierarchyError::LevelTooLarge { k, needed, cap });
    }
    // orders 0 and 1 add nothing the PSD constraint does not already give;
    // order-1 subsets are still passed through so the model records them
    let subsets = if k == 0 {
        Vec::new()
    } else {
        all_subsets_of_order(g.n(), k)
    };
    compute_bound(g, hierarchy, &subsets, mode, settings, alpha_lb)
}

// ---------------------------------------------------------------------------
// Cutting-plane search
// ---------------------------------------------------------------------------

/// Violated-subgraph search configuration. Defaults follow the ten-round,
/// at-most-200-per-round protocol.
#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Subgraph order k of the constraints to separate.
    pub order: usize,
    pub rounds: usize,
    pub max_per_round: usize,
    /// Random candidates sampled per round; 0 means the default 50·n.
    pub candidate_budget: usize,
    /// Projection distance above which a subgraph counts as violated.
    pub tol_viol: f64,
    pub seed: u64,
}

impl SearchConfig {
    pub fn new(order: usize) -> Self {
        Self {
            order,
            rounds: 10,
            max_per_round: 200,
            candidate_budget: 0,
            tol_viol: 1e-4,
            seed: 20,
        }
    }
}

pub const MAX_SEARCH_ORDER: usize = 8;

/// Iteratively solves the current relaxation, scores candidate subgraphs by
/// the Frobenius projection distance of the current submatrix onto the
/// (scaled) squared stable set polytope, adds the most violated ones and
/// repeats. Deterministic for a fixed seed. Stops early on a round without
/// violated candidates.
pub fn cutting_plane_search(
    g: &Graph,
    hierarchy: Hierarchy,
    cfg: &SearchConfig,
    settings: &SolverSettings,
    alpha_lb: Option<usize>,
) -> Result<(Vec<VertexSubset>, BoundReport), HierarchyError> {
    let k = cfg.order;
    if k > MAX_SEARCH_ORDER {
        return Err(HierarchyError::SearchOrderTooLarge(k));
    }
    assert!(cfg.rounds >= 1 && cfg.max_per_round >= 1);
    let n = g.n();
    let budget = if cfg.candidate_budget == 0 {
        50 * n
    } else {
        cfg.candidate_budget
    };
    let mut accumulated: Vec<VertexSubset> = Vec::new();
    let mut in_j: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut last_added: Vec<VertexSubset> = Vec::new();
    let mut trajectory: Vec<RoundStat> = Vec::new();
    let mut rng = SplitMix64::new(cfg.seed);
    let mut last_solution: Option<Solution> = None;
    let mut total_seconds = 0.0;

    for round in 1..=cfg.rounds {
        let problem = build_model(g, hierarchy, &accumulated, EscMode::Lambda)?;
        let t0 = Instant::now();
        let sol = solve(&problem, settings)?;
        let seconds = t0.elapsed().as_secs_f64();
        total_seconds += seconds;
        trajectory.push(RoundStat {
            round,
            bound: sol.dual_objective,
            escs_added: last_added.len(),
            escs_total: accumulated.len(),
            solve_seconds: seconds,
        });
        let x = current_x(&problem, &sol);
        last_solution = Some(sol);

        if k > n {
            break;
        }
        // candidate pool: random subsets, single-vertex swaps of the last
        // additions, and windows over the most fractional diagonal entries
        let mut pool: BTreeSet<Vec<usize>> = BTreeSet::new();
        for _ in 0..budget {
            pool.insert(rng.subset(n, k));
        }
        for subset in &last_added {
            for &v in subset.members() {
                for u in neighbors_of_subset(g, subset) {
                    if subset.contains(u) {
                        continue;
                    }
                    let mut swapped: Vec<usize> =
                        subset.members().iter().copied().filter(|&w| w != v).collect();
                    swapped.push(u);
                    swapped.sort_unstable();
                    swapped.dedup();
                    if swapped.len() == k {
                        pool.insert(swapped);
                    }
                }
            }
        }
        for w in fractional_windows(&x, k) {
            pool.insert(w);
        }
        // score candidates not already in J
        let mut violated: Vec<(f64, Vec<usize>)> = Vec::new();
        for cand in pool {
            if in_j.contains(&cand) {
                continue;
            }
            let subset = VertexSubset::new(cand.iter().copied());
            let sub = g.induced(&subset)?;
            let family = enumerate_stable_sets(&sub).map_err(ModelError::from)?;
            let xi = submatrix(&x, subset.members());
            let result = project_onto_stab2(&xi, &family, hierarchy.scaled());
            if result.distance > cfg.tol_viol {
                violated.push((result.distance, subset.members().to_vec()));
            }
        }
        if violated.is_empty() {
            last_added.clear();
            break;
        }
        violated.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.cmp(&b.1)));
        violated.truncate(cfg.max_per_round);
        last_added = violated
            .into_iter()
            .map(|(_, members)| {
                in_j.insert(members.clone());
                VertexSubset::new(members)
            })
            .collect();
        accumulated.extend(last_added.iter().cloned());
    }

    // the last round may have added constraints that were never solved with
    if !last_added.is_empty() {
        let problem = build_model(g, hierarchy, &accumulated, EscMode::Lambda)?;
        let t0 = Instant::now();
        let sol = solve(&problem, settings)?;
        let seconds = t0.elapsed().as_secs_f64();
        total_seconds += seconds;
        trajectory.push(RoundStat {
            round: trajectory.len() + 1,
            bound: sol.dual_objective,
            escs_added: last_added.len(),
            escs_total: accumulated.len(),
            solve_seconds: seconds,
        });
        last_solution = Some(sol);
    }

    let sol = last_solution.expect("at least one solve");
    let report = BoundReport {
        hierarchy,
        graph_name: g.name().to_string(),
        n,
        m: g.m(),
        subset_count: accumulated.len(),
        subsets_by_order: subsets_histogram(&accumulated),
        bound: sol.dual_objective,
        alpha_lb,
        solver_status: status_str(sol.status),
        solver_iterations: sol.iterations,
        solve_seconds: total_seconds,
        trajectory,
    };
    Ok((accumulated, report))
}

/// X part of the current iterate: the trailing principal submatrix for the
/// extended formulation, the whole block for the trace one.
fn current_x(problem: &SdpProblem, sol: &Solution) -> Mat {
    let big = sol.blocks[0].as_psd();
    match problem.formulation {
        FormulationTag::ThetaExtended => split_extended(big).1,
        FormulationTag::ThetaTrace => big.clone(),
    }
}

fn submatrix(x: &Mat, members: &[usize]) -> Mat {
    Mat::from_fn(members.len(), members.len(), |i, j| {
        x.get(members[i] - 1, members[j] - 1)
    })
}

fn neighbors_of_subset(g: &Graph, subset: &VertexSubset) -> Vec<usize> {
    let mut out = BTreeSet::new();
    for &v in subset.members() {
        for u in 1..=g.n() {
            if g.has_edge(v, u) {
                out.insert(u);
            }
        }
    }
    out.into_iter().collect()
}

/// Sliding windows of width k over the vertices ranked by how fractional
/// their diagonal entry is.
fn fractional_windows(x: &Mat, k: usize) -> Vec<Vec<usize>> {
    let n = x.n_rows();
    if k > n {
        return Vec::new();
    }
    let mut ranked: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let d = x.get(i, i);
            (d.min(1.0 - d).max(0.0), i + 1)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.cmp(&b.1)));
    let windows = (2 * k).min(n - k + 1);
    (0..windows)
        .map(|off| {
            let mut w: Vec<usize> = ranked[off..off + k].iter().map(|&(_, v)| v).collect();
            w.sort_unstable();
            w
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Three-way comparison and the constructive transform check
// ---------------------------------------------------------------------------

/// Bounds from all three hierarchies on the same subset family, with the
/// ordering and equivalence checks evaluated (never silently clamped).
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub esh: BoundReport,
    pub cesh: BoundReport,
    pub sesh: BoundReport,
    /// z_ESH ≤ z_CESH + 1e−6.
    pub ordering_holds: bool,
    /// |z_SESH − z_CESH| ≤ 1e−5.
    pub scaled_matches: bool,
    pub diagnostics: Vec<String>,
}

pub fn compare_formulations(
    g: &Graph,
    subsets: &[VertexSubset],
    mode: EscMode,
    settings: &SolverSettings,
    alpha_lb: Option<usize>,
) -> Result<ComparisonReport, HierarchyError> {
    let esh = compute_bound(g, Hierarchy::Esh, subsets, mode, settings, alpha_lb)?;
    let cesh = compute_bound(g, Hierarchy::Cesh, subsets, mode, settings, alpha_lb)?;
    // the scaled polytope has no precomputed facet systems
    let sesh = compute_bound(
        g,
        Hierarchy::Sesh,
        subsets,
        EscMode::Lambda,
        settings,
        alpha_lb,
    )?;
    let ordering_holds = esh.bound <= cesh.bound + 1e-6;
    let scaled_matches = (sesh.bound - cesh.bound).abs() <= 1e-5;
    let mut diagnostics = Vec::new();
    if !ordering_holds {
        diagnostics.push(format!(
            "ordering violated: ESH {} > CESH {}",
            esh.bound, cesh.bound
        ));
    }
    if !scaled_matches {
        diagnostics.push(format!(
            "scaled mismatch: SESH {} vs CESH {}",
            sesh.bound, cesh.bound
        ));
    }
    Ok(ComparisonReport {
        esh,
        cesh,
        sesh,
        ordering_holds,
        scaled_matches,
        diagnostics,
    })
}

/// Residuals of the scaling transport from an extended-formulation optimum
/// to a trace-formulation feasible point, including the shifted per-subset
/// λ reconstruction (extra mass goes to the empty set coefficient).
#[derive(Clone, Debug)]
pub struct TransformCheck {
    /// Objective of the transported point (must be ≥ the input bound − tol).
    pub objective: f64,
    pub gamma: f64,
    pub trace_residual: f64,
    pub max_edge_residual: f64,
    /// Worst violation of λ̃ ≥ 0 over all subsets.
    pub min_lambda: f64,
    /// Worst |Σλ̃ − 1| over all subsets.
    pub max_simplex_residual: f64,
    /// Worst entry of |X'_I − Σ λ̃_i S_i| over all subsets.
    pub max_coupling_residual: f64,
}

/// Applies X ↦ X/γ to a solved extended-formulation problem with λ-mode
/// subgraph constraints and verifies, from scratch, that the image is
/// feasible for the trace formulation with the same constraints.
pub fn verify_down_transform(
    g: &Graph,
    problem: &SdpProblem,
    sol: &Solution,
) -> Result<TransformCheck, HierarchyError> {
    assert_eq!(problem.formulation, FormulationTag::ThetaExtended);
    let big = sol.blocks[0].as_psd();
    let (x_vec, x_mat) = split_extended(big);
    let gamma: f64 = x_vec.iter().sum();
    let down = crate::model::gruber_rendl_down(&x_vec, &x_mat, 1e-12)?;
    let n = g.n();
    let all_ones = Mat::from_fn(n, n, |_, _| 1.0);
    let objective = all_ones.frob_inner(&down);
    let trace_residual = (down.trace() - 1.0).abs();
    let mut max_edge_residual = 0.0f64;
    for &(a, b) in g.edges() {
        max_edge_residual = max_edge_residual.max(down.get(a - 1, b - 1).abs());
    }
    let mut min_lambda = f64::INFINITY;
    let mut max_simplex_residual = 0.0f64;
    let mut max_coupling_residual = 0.0f64;
    for (esc_idx, rec) in problem.escs.iter().enumerate() {
        let Some(lambda) = esc_lambda(problem, &sol.blocks, esc_idx) else {
            continue;
        };
        // shifted coefficients: divide by γ, move the missing mass to the
        // empty set (whose stable set matrix is zero)
        let mut shifted: Vec<f64> = lambda.iter().map(|l| l / gamma).collect();
        shifted[0] += (gamma - 1.0) / gamma;
        min_lambda = min_lambda.min(shifted.iter().cloned().fold(f64::INFINITY, f64::min));
        max_simplex_residual =
            max_simplex_residual.max((shifted.iter().sum::<f64>() - 1.0).abs());
        let sub = g.induced(&rec.subset)?;
        let family = enumerate_stable_sets(&sub).map_err(ModelError::from)?;
        let gens = crate::stable_sets::stable_set_matrices(&family);
        let members = rec.subset.members();
        let mut recon = Mat::zeros(members.len(), members.len());
        for (l, gen) in shifted.iter().zip(&gens) {
            recon.add_scaled(gen, *l);
        }
        let xi = submatrix(&down, members);
        let mut diff = recon;
        diff.add_scaled(&xi, -1.0);
        max_coupling_residual = max_coupling_residual.max(diff.max_abs());
    }
    Ok(TransformCheck {
        objective,
        gamma,
        trace_residual,
        max_edge_residual,
        min_lambda,
        max_simplex_residual,
        max_coupling_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::erdos_renyi;
    use crate::stable_sets::alpha_bruteforce;

    fn settings() -> SolverSettings {
        SolverSettings::default()
    }

    #[test]
    fn full_subset_gives_alpha_c5() {
        let g = Graph::cycle(5);
        let full = VertexSubset::new(1..=5);
        for hierarchy in [Hierarchy::Esh, Hierarchy::Cesh, Hierarchy::Sesh] {
            let report = compute_bound(
                &g,
                hierarchy,
                &[full.clone()],
                EscMode::Lambda,
                &settings(),
                Some(2),
            )
            .unwrap();
            assert!(
                (report.bound - 2.0).abs() < 1e-5,
                "{hierarchy}: {}",
                report.bound
            );
        }
    }

    #[test]
    fn levels_zero_and_one_equal_theta() {
        for seed in [3u64, 14] {
            let g = erdos_renyi(8, 0.4, seed).unwrap();
            let theta = compute_level(&g, Hierarchy::Esh, 0, EscMode::Lambda, &settings(), None)
                .unwrap()
                .bound;
            for hierarchy in [Hierarchy::Esh, Hierarchy::Cesh, Hierarchy::Sesh] {
                for k in [0, 1] {
                    let b =
                        compute_level(&g, hierarchy, k, EscMode::Lambda, &settings(), None)
                            .unwrap()
                            .bound;
                    assert!(
                        (b - theta).abs() < 1e-5,
                        "{hierarchy} level {k}: {b} vs θ {theta}"
                    );
                }
            }
        }
    }

    #[test]
    fn level_n_is_alpha() {
        for seed in [5u64, 21] {
            let g = erdos_renyi(7, 0.45, seed).unwrap();
            let alpha = alpha_bruteforce(&g).unwrap() as f64;
            for hierarchy in [Hierarchy::Esh, Hierarchy::Cesh] {
                let b = compute_level(&g, hierarchy, g.n(), EscMode::Lambda, &settings(), None)
                    .unwrap()
                    .bound;
                assert!((b - alpha).abs() < 1e-5, "{hierarchy}: {b} vs α {alpha}");
            }
        }
    }

    #[test]
    fn level_cap_enforced() {
        let g = erdos_renyi(30, 0.3, 1).unwrap();
        assert!(matches!(
            compute_level_capped(
                &g,
                Hierarchy::Cesh,
                8,
                EscMode::Lambda,
                &settings(),
                None,
                10_000
            ),
            Err(HierarchyError::LevelTooLarge { .. })
        ));
    }

    #[test]
    fn representation_equivalence_small() {
        // λ and facet representations describe the same polytope
        for seed in [2u64, 9] {
            let g = erdos_renyi(9, 0.4, seed).unwrap();
            let subsets = vec![
                VertexSubset::new([1, 2, 3]),
                VertexSubset::new([2, 5, 7, 9]),
                VertexSubset::new([4, 6]),
            ];
            let a = compute_bound(&g, Hierarchy::Esh, &subsets, EscMode::Lambda, &settings(), None)
                .unwrap();
            let b = compute_bound(&g, Hierarchy::Esh, &subsets, EscMode::Facets, &settings(), None)
                .unwrap();
            assert!(
                (a.bound - b.bound).abs() < 1e-6,
                "λ {} vs facets {}",
                a.bound,
                b.bound
            );
        }
    }

    #[test]
    fn comparison_ordering_and_scaling() {
        let g = erdos_renyi(10, 0.5, 33).unwrap();
        let subsets = vec![
            VertexSubset::new([1, 2, 3]),
            VertexSubset::new([4, 5, 6]),
            VertexSubset::new([2, 7, 9]),
            VertexSubset::new([1, 8, 10]),
        ];
        let report = compare_formulations(&g, &subsets, EscMode::Lambda, &settings(), None).unwrap();
        assert!(report.ordering_holds, "{:?}", report.diagnostics);
        assert!(report.scaled_matches, "{:?}", report.diagnostics);
    }

    #[test]
    fn empty_selection_matches_theta_everywhere() {
        let g = erdos_renyi(9, 0.35, 4).unwrap();
        let report = compare_formulations(&g, &[], EscMode::Lambda, &settings(), None).unwrap();
        assert!((report.esh.bound - report.cesh.bound).abs() < 1e-6);
        assert!((report.sesh.bound - report.cesh.bound).abs() < 1e-6);
    }

    #[test]
    fn search_stops_immediately_on_perfect_graph() {
        // bipartite ⇒ perfect ⇒ θ = α and the optimum is a stable-set
        // convex combination already; no violated pair exists
        let g = Graph::new(6, [(1, 4), (1, 5), (2, 4), (2, 6), (3, 5), (3, 6)], "bip33").unwrap();
        let alpha = alpha_bruteforce(&g).unwrap();
        let cfg = SearchConfig::new(2);
        let (j, report) =
            cutting_plane_search(&g, Hierarchy::Esh, &cfg, &settings(), Some(alpha)).unwrap();
        assert!(j.is_empty(), "expected no violated subgraphs, got {j:?}");
        assert_eq!(report.trajectory.len(), 1);
        assert!((report.bound - alpha as f64).abs() < 1e-5);
    }

    #[test]
    fn search_closes_c5_at_full_order() {
        let g = Graph::cycle(5);
        let mut cfg = SearchConfig::new(5);
        cfg.rounds = 1;
        let (j, report) =
            cutting_plane_search(&g, Hierarchy::Esh, &cfg, &settings(), Some(2)).unwrap();
        assert_eq!(j.len(), 1);
        assert_eq!(j[0].members(), &[1, 2, 3, 4, 5]);
        assert!((report.bound - 2.0).abs() < 1e-5, "bound {}", report.bound);
        // trajectory: θ ≈ 2.236 then α = 2
        assert_eq!(report.trajectory.len(), 2);
        assert!(report.trajectory[0].bound > 2.2);
    }

    #[test]
    fn search_trajectory_is_monotone() {
        let g = erdos_renyi(12, 0.4, 8).unwrap();
        let mut cfg = SearchConfig::new(3);
        cfg.rounds = 4;
        cfg.max_per_round = 20;
        let (_, report) =
            cutting_plane_search(&g, Hierarchy::Cesh, &cfg, &settings(), None).unwrap();
        for w in report.trajectory.windows(2) {
            assert!(
                w[1].bound <= w[0].bound + 1e-6,
                "trajectory rose: {} -> {}",
                w[0].bound,
                w[1].bound
            );
        }
    }

    #[test]
    fn search_is_deterministic() {
        let g = erdos_renyi(11, 0.45, 10).unwrap();
        let mut cfg = SearchConfig::new(3);
        cfg.rounds = 2;
        cfg.max_per_round = 10;
        let (j1, r1) = cutting_plane_search(&g, Hierarchy::Esh, &cfg, &settings(), None).unwrap();
        let (j2, r2) = cutting_plane_search(&g, Hierarchy::Esh, &cfg, &settings(), None).unwrap();
        assert_eq!(j1, j2);
        assert_eq!(r1.bound.to_bits(), r2.bound.to_bits());
    }

    #[test]
    fn down_transform_verifies_on_esh_optimum() {
        let g = erdos_renyi(9, 0.45, 17).unwrap();
        let subsets = vec![VertexSubset::new([1, 2, 3]), VertexSubset::new([4, 5, 6, 7])];
        let problem = build_model(&g, Hierarchy::Esh, &subsets, EscMode::Lambda).unwrap();
        let sol = solve(&problem, &settings()).unwrap();
        let check = verify_down_transform(&g, &problem, &sol).unwrap();
        assert!(check.trace_residual < 1e-6);
        assert!(check.max_edge_residual < 1e-6);
        assert!(check.min_lambda > -1e-7);
        assert!(check.max_simplex_residual < 1e-6);
        assert!(check.max_coupling_residual < 1e-5);
        assert!(check.objective >= sol.objective - 1e-5);
    }

    #[test]
    fn paley61_optimum_lifts_to_extended() {
        // solving the trace formulation and scaling by ⟨J, X⟩ gives a
        // feasible extended pair with the same objective
        let g = crate::graph::paley(61).unwrap();
        let p = crate::model::build_theta_n(&g);
        let sol = solve(&p, &settings()).unwrap();
        let x = sol.blocks[0].as_psd().clone();
        let (x_vec, big) = crate::model::gruber_rendl_up(&x, &g).unwrap();
        let lifted: f64 = x_vec.iter().sum();
        assert!((lifted - 7.8102).abs() < 1e-3, "lifted objective {lifted}");
        // independent residuals of the lifted pair: diag links and edges
        for (i, &xi) in x_vec.iter().enumerate() {
            assert!((big.get(i, i) - xi).abs() < 1e-6);
        }
        for &(a, b) in g.edges() {
            assert!(big.get(a - 1, b - 1).abs() < 1e-6);
        }
    }

    #[test]
    fn floor_improvements_detected() {
        let report = BoundReport {
            hierarchy: Hierarchy::Esh,
            graph_name: "t".into(),
            n: 5,
            m: 5,
            subset_count: 1,
            subsets_by_order: BTreeMap::new(),
            bound: 2.0000001,
            alpha_lb: Some(2),
            solver_status: "optimal".into(),
            solver_iterations: 0,
            solve_seconds: 0.0,
            trajectory: vec![
                RoundStat { round: 1, bound: 2.236, escs_added: 0, escs_total: 0, solve_seconds: 0.0 },
                RoundStat { round: 2, bound: 2.0000001, escs_added: 1, escs_total: 1, solve_seconds: 0.0 },
                RoundStat { round: 3, bound: 1.9999999, escs_added: 0, escs_total: 1, solve_seconds: 0.0 },
            ],
        };
        let drops = report.floor_improvements();
        assert_eq!(drops.len(), 1);
        assert_eq!(drops[0].0, 3);
    }

    #[test]
    fn sandwich_on_random_bounds()  {
        for seed in [6u64, 19] {
            let g = erdos_renyi(8, 0.5, seed).unwrap();
            let alpha = alpha_bruteforce(&g).unwrap() as f64;
            let theta = compute_level(&g, Hierarchy::Cesh, 0, EscMode::Lambda, &settings(), None)
                .unwrap()
                .bound;
            for k in [2, 3] {
                for hierarchy in [Hierarchy::Esh, Hierarchy::Cesh, Hierarchy::Sesh] {
                    let b = compute_level(&g, hierarchy, k, EscMode::Lambda, &settings(), None)
                        .unwrap()
                        .bound;
                    assert!(b >= alpha - 1e-6, "{hierarchy} k={k}: {b} < α {alpha}");
                    assert!(b <= theta + 1e-6, "{hierarchy} k={k}: {b} > θ {theta}");
                }
            }
        }
    }
}
