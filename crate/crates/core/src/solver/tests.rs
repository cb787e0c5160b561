use super::*;
use crate::graph::{erdos_renyi, Graph};
use crate::model::{build_theta_n, build_theta_nplus1, Constraint, CoeffEntry, FormulationTag};

fn lp_problem(alpha: usize) -> SdpProblem {
    // max Σ i²μ_i  s.t.  Σ iμ_i = 1, Σ μ_i = 1, μ ≥ 0 over μ_0..μ_α
    let t = alpha + 1;
    let entry = |row: usize, value: f64| CoeffEntry {
        block: 0,
        row,
        col: row,
        value,
    };
    SdpProblem {
        name: format!("mu-lp-{alpha}"),
        blocks: vec![ConeBlock::NonNeg(t)],
        objective: (0..t).map(|i| entry(i, (i * i) as f64)).collect(),
        constraints: vec![
            Constraint {
                entries: (1..t).map(|i| entry(i, i as f64)).collect(),
                rhs: 1.0,
            },
            Constraint {
                entries: (0..t).map(|i| entry(i, 1.0)).collect(),
                rhs: 1.0,
            },
        ],
        formulation: FormulationTag::ThetaTrace,
        escs: Vec::new(),
    }
}

#[test]
fn mu_lp_recovers_alpha() {
    // closed form: μ_α = 1/α, μ_0 = (α−1)/α, everything else 0
    for alpha in 1..=10 {
        let sol = solve(&lp_problem(alpha), &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "alpha {alpha}");
        assert!(
            (sol.objective - alpha as f64).abs() < 1e-6,
            "alpha {alpha}: got {}",
            sol.objective
        );
        let mu = sol.blocks[0].as_nonneg();
        assert!((mu[alpha] - 1.0 / alpha as f64).abs() < 1e-5);
        if alpha > 1 {
            assert!((mu[0] - (alpha as f64 - 1.0) / alpha as f64).abs() < 1e-5);
        }
    }
}

#[test]
fn random_lps_match_vertex_enumeration() {
    // max cᵀμ s.t. aᵀμ = 1, 1ᵀμ = 1, μ ≥ 0: with two equality rows every
    // vertex of the feasible set has support ≤ 2, so exhaustive vertex
    // enumeration is an exact oracle.
    use crate::rng::SplitMix64;
    let mut rng = SplitMix64::new(99);
    for trial in 0..20 {
        let t = 4 + (trial % 5);
        let a: Vec<f64> = (0..t).map(|_| 0.25 + 2.0 * rng.next_f64()).collect();
        let c: Vec<f64> = (0..t).map(|_| rng.next_f64() * 3.0).collect();
        let mut best = f64::NEG_INFINITY;
        for i in 0..t {
            if (a[i] - 1.0).abs() < 1e-12 {
                best = best.max(c[i]);
            }
            for j in i + 1..t {
                let det = a[i] - a[j];
                if det.abs() < 1e-12 {
                    continue;
                }
                let mi = (1.0 - a[j]) / det;
                let mj = 1.0 - mi;
                if mi >= -1e-12 && mj >= -1e-12 {
                    best = best.max(c[i] * mi + c[j] * mj);
                }
            }
        }
        if best == f64::NEG_INFINITY {
            continue; // infeasible draw; skip
        }
        let entry = |row: usize, value: f64| CoeffEntry {
            block: 0,
            row,
            col: row,
            value,
        };
        let p = SdpProblem {
            name: format!("lp-{trial}"),
            blocks: vec![ConeBlock::NonNeg(t)],
            objective: (0..t).map(|i| entry(i, c[i])).collect(),
            constraints: vec![
                Constraint {
                    entries: (0..t).map(|i| entry(i, a[i])).collect(),
                    rhs: 1.0,
                },
                Constraint {
                    entries: (0..t).map(|i| entry(i, 1.0)).collect(),
                    rhs: 1.0,
                },
            ],
            formulation: FormulationTag::ThetaTrace,
            escs: Vec::new(),
        };
        let sol = solve(&p, &SolverSettings::default()).unwrap();
        assert!(
            (sol.objective - best).abs() < 1e-6,
            "trial {trial}: ipm {} vs oracle {best}",
            sol.objective
        );
    }
}

#[test]
fn theta_of_empty_and_complete() {
    for n in 1..=10 {
        let sol = solve(&build_theta_n(&Graph::empty(n)), &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(
            (sol.objective - n as f64).abs() < 1e-6,
            "empty n={n}: {}",
            sol.objective
        );
        let sol = solve(&build_theta_n(&Graph::complete(n)), &SolverSettings::default()).unwrap();
        assert!(
            (sol.objective - 1.0).abs() < 1e-6,
            "complete n={n}: {}",
            sol.objective
        );
    }
}

#[test]
fn theta_c5_closed_form_both_formulations() {
    // odd cycle: θ(C_n) = n cos(π/n) / (1 + cos(π/n))
    let n = 5.0f64;
    let expected = n * (std::f64::consts::PI / n).cos() / (1.0 + (std::f64::consts::PI / n).cos());
    let g = Graph::cycle(5);
    let a = solve(&build_theta_nplus1(&g), &SolverSettings::default()).unwrap();
    let b = solve(&build_theta_n(&g), &SolverSettings::default()).unwrap();
    assert!((a.objective - expected).abs() < 1e-4, "extended {}", a.objective);
    assert!((b.objective - expected).abs() < 1e-4, "trace {}", b.objective);
    assert!((a.objective - b.objective).abs() < 1e-5);
}

#[test]
fn weak_duality_along_iterates() {
    // conic weak duality ⟨X, Z⟩ ≥ 0 holds at every iterate; the objective
    // ordering pobj ≤ dobj only becomes meaningful once the iterate is
    // essentially feasible, and must hold there
    for seed in [5u64, 8, 13] {
        let g = erdos_renyi(9, 0.4, seed).unwrap();
        let sol = solve(&build_theta_nplus1(&g), &SolverSettings::default()).unwrap();
        for l in &sol.trace {
            assert!(l.mu >= 0.0, "iter {}: negative complementarity", l.iter);
            if l.primal_res <= 1e-8 && l.dual_res <= 1e-8 {
                let scale = 1.0 + l.primal_objective.abs() + l.dual_objective.abs();
                assert!(
                    l.primal_objective <= l.dual_objective + 1e-8 * scale,
                    "iter {}: pobj {} > dobj {}",
                    l.iter,
                    l.primal_objective,
                    l.dual_objective
                );
            }
        }
        assert!(sol.objective <= sol.dual_objective + 1e-8 * (1.0 + sol.objective.abs()));
    }
}

#[test]
fn gap_is_essentially_monotone() {
    let g = erdos_renyi(10, 0.45, 6).unwrap();
    let sol = solve(&build_theta_n(&g), &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    for w in sol.trace.windows(2) {
        assert!(
            w[1].rel_gap <= 1.1 * w[0].rel_gap + 1e-12,
            "gap jumped: {} -> {}",
            w[0].rel_gap,
            w[1].rel_gap
        );
    }
}

#[test]
fn deterministic_solves() {
    let g = erdos_renyi(11, 0.4, 9).unwrap();
    let p = build_theta_nplus1(&g);
    let a = solve(&p, &SolverSettings::default()).unwrap();
    let b = solve(&p, &SolverSettings::default()).unwrap();
    assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    assert_eq!(a.iterations, b.iterations);
    for (x, y) in a.trace.iter().zip(&b.trace) {
        assert_eq!(x.mu.to_bits(), y.mu.to_bits());
    }
}

#[test]
fn check_solution_on_hand_built_point() {
    // X = I/n is feasible for the trace formulation on any graph
    let g = erdos_renyi(7, 0.5, 2).unwrap();
    let p = build_theta_n(&g);
    let n = g.n();
    let x = Mat::scaled_identity(n, 1.0 / n as f64);
    let fake = Solution {
        status: SolveStatus::Optimal,
        blocks: vec![BlockValues::Psd(x.clone())],
        dual_y: vec![0.0; p.n_constraints()],
        dual_slack: vec![BlockValues::Psd(Mat::identity(n))],
        objective: 1.0,
        dual_objective: 0.0,
        gap: 0.0,
        iterations: 0,
        trace: Vec::new(),
        failure_reason: None,
    };
    let report = check_solution(&p, &fake);
    assert!(report.primal_residual_norm <= 1e-12);
    // perturb one edge entry: the report must flag that constraint
    let (a, b) = g.edges()[0];
    let mut bad = x;
    bad.add_at(a - 1, b - 1, 1e-3);
    bad.add_at(b - 1, a - 1, 1e-3);
    let fake_bad = Solution {
        blocks: vec![BlockValues::Psd(bad)],
        ..fake
    };
    let report = check_solution(&p, &fake_bad);
    let worst = report.worst_constraint.unwrap();
    // edge constraints start at index 1 (trace pin is 0)
    assert_eq!(worst, 1, "expected the first edge row to be flagged");
    assert!(report.constraint_residuals[worst].abs() > 1e-3 - 1e-9);
}

#[test]
fn optimal_c5_complementarity() {
    let g = Graph::cycle(5);
    let p = build_theta_n(&g);
    let sol = solve(&p, &SolverSettings::default()).unwrap();
    let report = check_solution(&p, &sol);
    assert!(report.complementarity <= 1e-7);
    assert!(report.primal_relative <= 1e-6);
    assert!(report.dual_relative <= 1e-6);
    // cone membership within the documented slack
    for (e, blk) in report.min_eigenvalues.iter().zip(&sol.blocks) {
        let scale = 1.0 + blk.as_psd().max_abs();
        assert!(*e >= -1e-8 * scale);
    }
    assert!(report.min_nonneg >= -1e-9);
}

#[test]
fn duplicate_rows_are_tolerated() {
    // the same edge row twice: presolve must keep the solve stable and
    // report zero dual on the dropped copy
    let g = Graph::cycle(5);
    let mut p = build_theta_n(&g);
    let dup = p.constraints[1].clone();
    p.constraints.push(dup);
    let sol = solve(&p, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    let expected = 5f64.sqrt();
    assert!((sol.objective - expected).abs() < 1e-4);
    assert_eq!(*sol.dual_y.last().unwrap(), 0.0);
}

#[test]
fn inconsistent_duplicates_rejected() {
    let g = Graph::cycle(5);
    let mut p = build_theta_n(&g);
    let mut dup = p.constraints[1].clone();
    dup.rhs = 0.5;
    p.constraints.push(dup);
    assert!(matches!(
        solve(&p, &SolverSettings::default()),
        Err(SolverError::InconsistentDuplicates(1, _))
    ));
}

#[test]
fn malformed_problems_rejected() {
    let g = Graph::cycle(5);
    let mut p = build_theta_n(&g);
    p.constraints.push(Constraint {
        entries: Vec::new(),
        rhs: 0.0,
    });
    assert!(matches!(
        solve(&p, &SolverSettings::default()),
        Err(SolverError::Malformed(_))
    ));
}

#[test]
fn iteration_log_lines_render() {
    let g = Graph::cycle(5);
    let sol = solve(&build_theta_n(&g), &SolverSettings::default()).unwrap();
    assert!(!sol.trace.is_empty());
    let line = sol.trace[0].line();
    assert!(line.contains("mu") && line.contains("gap"));
}
