//! Primal–dual interior-point solver for equality-constrained conic
//! programs over products of PSD blocks and a nonnegative block:
//!
//!   maximize ⟨C, X⟩  subject to  ⟨A_i, X⟩ = b_i,  X ∈ K.
//!
//! Path-following with the Mehrotra predictor–corrector and the HKM search
//! direction. The Schur complement is Cholesky-factored with escalating
//! diagonal regularization; heavily constrained problems with localized
//! nonnegative variables (λ and slack groups from exact subgraph
//! constraints) are solved through an equivalent block elimination instead
//! of the full dense system (see [`newton`]). Every operation runs in a
//! fixed order, so identical inputs and settings give identical iterates.
//!
//! Both theta formulations admit strictly feasible points, and so do their
//! λ-mode augmentations, which is what the models built by this crate
//! produce; no infeasibility certificates are attempted beyond a divergence
//! heuristic.

mod newton;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::linalg::{cholesky_in_place, chol_inverse, min_eigenvalue, Mat};
use crate::model::{BlockValues, ConeBlock, SdpProblem};
use newton::{make_plan, CompiledConstraint, Layout, Scaling};

#[derive(Clone, Debug)]
pub struct SolverSettings {
    /// Relative duality-gap tolerance.
    pub tol_gap: f64,
    /// Relative primal/dual residual tolerance.
    pub tol_feas: f64,
    pub max_iter: usize,
    /// Fraction-to-boundary step damping.
    pub step_frac: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol_gap: 1e-7,
            tol_feas: 1e-7,
            max_iter: 200,
            step_frac: 0.98,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    InfeasibleSuspect,
    NumericalFailure,
}

/// One line of the iteration log.
#[derive(Clone, Debug)]
pub struct IterLog {
    pub iter: usize,
    pub mu: f64,
    pub rel_gap: f64,
    pub primal_res: f64,
    pub dual_res: f64,
    pub alpha_p: f64,
    pub alpha_d: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

impl IterLog {
    pub fn line(&self) -> String {
        format!(
            "iter {:3}  mu {:10.3e}  gap {:10.3e}  pres {:10.3e}  dres {:10.3e}  ap {:6.4}  ad {:6.4}",
            self.iter, self.mu, self.rel_gap, self.primal_res, self.dual_res, self.alpha_p, self.alpha_d
        )
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub status: SolveStatus,
    /// Primal block values.
    pub blocks: Vec<BlockValues>,
    /// Multiplier per constraint (original indexing; duplicates dropped by
    /// the presolve carry zero).
    pub dual_y: Vec<f64>,
    /// Dual slack per block.
    pub dual_slack: Vec<BlockValues>,
    pub objective: f64,
    pub dual_objective: f64,
    /// Relative duality gap at the reported iterate.
    pub gap: f64,
    pub iterations: usize,
    pub trace: Vec<IterLog>,
    /// Present when the solve ended in a numerical failure.
    pub failure_reason: Option<String>,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("inconsistent duplicate constraints {0} and {1}: equal lhs, different rhs")]
    InconsistentDuplicates(usize, usize),
}

const ALPHA_TOP: f64 = 1.05;
const DIVERGENCE: f64 = 1e10;

struct State {
    x_psd: Vec<Mat>,
    x_diag: Vec<f64>,
    z_psd: Vec<Mat>,
    z_diag: Vec<f64>,
    y: Vec<f64>,
}

impl State {
    fn snapshot(&self) -> State {
        State {
            x_psd: self.x_psd.clone(),
            x_diag: self.x_diag.clone(),
            z_psd: self.z_psd.clone(),
            z_diag: self.z_diag.clone(),
            y: self.y.clone(),
        }
    }
}

pub fn solve(p: &SdpProblem, settings: &SolverSettings) -> Result<Solution, SolverError> {
    p.validate().map_err(SolverError::Malformed)?;
    if p.constraints.is_empty() {
        return Err(SolverError::Malformed("no constraints".into()));
    }
    if p.constraints.iter().any(|c| c.entries.is_empty()) {
        return Err(SolverError::Malformed("empty constraint row".into()));
    }

    // --- layout -----------------------------------------------------------
    let mut psd_dims = Vec::new();
    let mut psd_block_of = vec![usize::MAX; p.blocks.len()];
    let mut svec_offsets = Vec::new();
    let mut svec_total = 0usize;
    for (bi, b) in p.blocks.iter().enumerate() {
        match *b {
            ConeBlock::Psd(d) => {
                psd_block_of[bi] = psd_dims.len();
                svec_offsets.push(svec_total);
                svec_total += crate::linalg::svec_len(d);
                psd_dims.push(d);
            }
            ConeBlock::NonNeg(_) => {}
        }
    }
    // --- presolve 1: drop exact duplicate rows ------------------------------
    let mut canon: Vec<(Vec<(usize, usize, usize, u64)>, u64)> = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    for (ci, c) in p.constraints.iter().enumerate() {
        let mut key: Vec<(usize, usize, usize, u64)> = c
            .entries
            .iter()
            .map(|e| (e.block, e.row, e.col, e.value.to_bits()))
            .collect();
        key.sort_unstable();
        let key = (key, c.rhs.to_bits());
        if canon.contains(&key) {
            continue;
        }
        // same lhs, different rhs: catches inconsistent duplicates
        if let Some(prev) = canon.iter().position(|k| k.0 == key.0) {
            return Err(SolverError::InconsistentDuplicates(kept[prev], ci));
        }
        canon.push(key);
        kept.push(ci);
    }

    // --- presolve 2: slacks pinned by twin rows -----------------------------
    // A row that duplicates another row's PSD part plus a single private
    // nonnegative variable pins that variable to a constant (the facet rows
    // of edge pairs pin their slack to zero). Such variables have no
    // interior and stall the path following; fix them and drop the row.
    let is_diag_entry = |e: &crate::model::CoeffEntry| {
        matches!(p.blocks[e.block], ConeBlock::NonNeg(_))
    };
    // scale-normalized PSD key: entries sorted by position with values
    // divided by the first entry's value, plus that leading value, so rows
    // that are scalar multiples of each other share the key part
    let psd_key_of = |ci: usize| -> Option<(Vec<(usize, usize, usize, u64)>, f64)> {
        let mut entries: Vec<_> = p.constraints[ci]
            .entries
            .iter()
            .filter(|e| !is_diag_entry(e))
            .map(|e| (e.block, e.row, e.col, e.value))
            .collect();
        if entries.is_empty() {
            return None;
        }
        entries.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
        let lead = entries[0].3;
        let key = entries
            .into_iter()
            .map(|(b, r, c, v)| (b, r, c, (v / lead).to_bits()))
            .collect();
        Some((key, lead))
    };
    let mut occurrence: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &ci in &kept {
        for e in &p.constraints[ci].entries {
            if is_diag_entry(e) {
                *occurrence.entry((e.block, e.row)).or_insert(0) += 1;
            }
        }
    }
    let mut diag_free: BTreeMap<Vec<(usize, usize, usize, u64)>, (usize, f64)> = BTreeMap::new();
    for &ci in &kept {
        if p.constraints[ci].entries.iter().all(|e| !is_diag_entry(e)) {
            if let Some((key, lead)) = psd_key_of(ci) {
                diag_free.entry(key).or_insert((ci, lead));
            }
        }
    }
    let mut fixed: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut pinned_rows: Vec<usize> = Vec::new();
    for &ci in &kept {
        let diag_entries: Vec<&crate::model::CoeffEntry> = p.constraints[ci]
            .entries
            .iter()
            .filter(|e| is_diag_entry(e))
            .collect();
        if diag_entries.len() != 1 {
            continue;
        }
        let e = diag_entries[0];
        if occurrence[&(e.block, e.row)] != 1 || e.value == 0.0 {
            continue;
        }
        let Some((key, lead)) = psd_key_of(ci) else {
            continue;
        };
        let Some(&(twin, twin_lead)) = diag_free.get(&key) else {
            continue;
        };
        if twin == ci {
            continue;
        }
        let scale = lead / twin_lead;
        let value = (p.constraints[ci].rhs - scale * p.constraints[twin].rhs) / e.value;
        if value < -1e-9 {
            return Err(SolverError::Malformed(format!(
                "constraints {twin} and {ci} pin nonnegative variable ({}, {}) to {value:.3e}",
                e.block, e.row
            )));
        }
        fixed.insert((e.block, e.row), value.max(0.0));
        pinned_rows.push(ci);
    }
    kept.retain(|ci| !pinned_rows.contains(ci));
    let retained = kept;
    let m_dim = retained.len();

    // --- active diagonal indexing (fixed variables removed) -----------------
    let mut diag_index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut diag_total = 0usize;
    for (bi, blk) in p.blocks.iter().enumerate() {
        if let ConeBlock::NonNeg(d) = blk {
            for r in 0..*d {
                if !fixed.contains_key(&(bi, r)) {
                    diag_index.insert((bi, r), diag_total);
                    diag_total += 1;
                }
            }
        }
    }
    let layout = Layout {
        psd_dims: psd_dims.clone(),
        svec_offsets,
        svec_total,
        diag_total,
    };

    // --- compile ------------------------------------------------------------
    let compile = |ci: usize| -> CompiledConstraint {
        let c = &p.constraints[ci];
        let mut psd = Vec::new();
        let mut svec = Vec::new();
        let mut diag = Vec::new();
        let mut rhs = c.rhs;
        for e in &c.entries {
            match p.blocks[e.block] {
                ConeBlock::Psd(_) => {
                    let local = psd_block_of[e.block];
                    psd.push((local, e.row, e.col, e.value));
                    let gidx = layout.svec_offsets[local]
                        + crate::linalg::svec_index(e.row, e.col);
                    let v = if e.row == e.col {
                        e.value
                    } else {
                        crate::linalg::SQRT2 * e.value
                    };
                    svec.push((gidx, v));
                }
                ConeBlock::NonNeg(_) => match diag_index.get(&(e.block, e.row)) {
                    Some(&idx) => diag.push((idx, e.value)),
                    None => rhs -= e.value * fixed[&(e.block, e.row)],
                },
            }
        }
        CompiledConstraint {
            psd,
            svec,
            diag,
            rhs,
        }
    };
    let cons: Vec<CompiledConstraint> = retained.iter().map(|&ci| compile(ci)).collect();
    // objective compiled the same way (svec unused); fixed variables leave a
    // constant behind
    let mut obj_psd: Vec<Mat> = psd_dims.iter().map(|&d| Mat::zeros(d, d)).collect();
    let mut obj_diag = vec![0.0; diag_total];
    let mut obj_constant = 0.0;
    for e in &p.objective {
        match p.blocks[e.block] {
            ConeBlock::Psd(_) => {
                let local = psd_block_of[e.block];
                obj_psd[local].add_at(e.row, e.col, e.value);
                if e.row != e.col {
                    obj_psd[local].add_at(e.col, e.row, e.value);
                }
            }
            ConeBlock::NonNeg(_) => match diag_index.get(&(e.block, e.row)) {
                Some(&idx) => obj_diag[idx] += e.value,
                None => obj_constant += e.value * fixed[&(e.block, e.row)],
            },
        }
    }
    let b: Vec<f64> = cons.iter().map(|c| c.rhs).collect();
    let b_norm = (1.0 + b.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let c_norm = (1.0
        + obj_psd.iter().map(|m| m.frob_norm().powi(2)).sum::<f64>()
        + obj_diag.iter().map(|v| v * v).sum::<f64>())
    .sqrt();

    let plan = make_plan(&cons, &layout);

    let total_dim: usize = psd_dims.iter().sum::<usize>() + diag_total;
    let tau = 1.0 + b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut state = State {
        x_psd: psd_dims.iter().map(|&d| Mat::scaled_identity(d, tau)).collect(),
        x_diag: vec![tau; diag_total],
        z_psd: psd_dims.iter().map(|&d| Mat::scaled_identity(d, tau)).collect(),
        z_diag: vec![tau; diag_total],
        y: vec![0.0; m_dim],
    };

    let mut log = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let mut failure_reason = None;
    let mut best = state.snapshot();
    let mut best_score = f64::INFINITY;
    let mut iterations = 0;

    for iter in 0..settings.max_iter {
        iterations = iter;
        // residuals and diagnostics
        let rp: Vec<f64> = cons
            .iter()
            .map(|c| c.rhs - apply_row(c, &state.x_psd, &state.x_diag))
            .collect();
        let a_star = adjoint(&cons, &state.y, &psd_dims, diag_total);
        // Rd = C − A*(y) + Z
        let mut rd_psd: Vec<Mat> = Vec::with_capacity(psd_dims.len());
        for (bi, _) in psd_dims.iter().enumerate() {
            let mut r = obj_psd[bi].clone();
            r.add_scaled(&a_star.0[bi], -1.0);
            r.add_scaled(&state.z_psd[bi], 1.0);
            rd_psd.push(r);
        }
        let rd_diag: Vec<f64> = (0..diag_total)
            .map(|i| obj_diag[i] - a_star.1[i] + state.z_diag[i])
            .collect();

        let pobj =
            objective_of(&obj_psd, &obj_diag, &state.x_psd, &state.x_diag) + obj_constant;
        let dobj: f64 =
            b.iter().zip(&state.y).map(|(bi, yi)| bi * yi).sum::<f64>() + obj_constant;
        let comp = inner_state(&state);
        let mu = comp / total_dim as f64;
        // complementarity gap: the monotone path quantity; coincides with
        // the objective gap once the iterate is feasible
        let rel_gap = comp / (1.0 + pobj.abs() + dobj.abs());
        let obj_gap = (dobj - pobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let rp_rel = norm2(&rp) / b_norm;
        let rd_rel = (rd_psd.iter().map(|m| m.frob_norm().powi(2)).sum::<f64>()
            + rd_diag.iter().map(|v| v * v).sum::<f64>())
        .sqrt()
            / c_norm;

        let score = obj_gap.max(rp_rel).max(rd_rel);
        if score < best_score {
            best_score = score;
            best = state.snapshot();
        }

        if obj_gap <= settings.tol_gap && rp_rel <= settings.tol_feas && rd_rel <= settings.tol_feas
        {
            status = SolveStatus::Optimal;
            log.push(IterLog {
                iter,
                mu,
                rel_gap,
                primal_res: rp_rel,
                dual_res: rd_rel,
                alpha_p: 0.0,
                alpha_d: 0.0,
                primal_objective: pobj,
                dual_objective: dobj,
            });
            break;
        }
        if dobj.abs() > DIVERGENCE * b_norm {
            status = SolveStatus::InfeasibleSuspect;
            break;
        }

        // scaling state
        let mut zinv_psd = Vec::with_capacity(psd_dims.len());
        let mut chol_ok = true;
        for z in &state.z_psd {
            let mut l = z.clone();
            if cholesky_in_place(&mut l).is_err() {
                chol_ok = false;
                break;
            }
            zinv_psd.push(chol_inverse(&l));
        }
        if !chol_ok {
            status = SolveStatus::NumericalFailure;
            failure_reason = Some("dual slack block lost positive definiteness".into());
            break;
        }
        let w_diag: Vec<f64> = state
            .x_diag
            .iter()
            .zip(&state.z_diag)
            .map(|(x, z)| x / z)
            .collect();
        let scaling = Scaling {
            x_psd: &state.x_psd,
            zinv_psd: &zinv_psd,
            w_diag: &w_diag,
        };
        let factorization = match newton::factor(&cons, &layout, &plan, &scaling) {
            Ok(f) => f,
            Err(e) => {
                status = SolveStatus::NumericalFailure;
                failure_reason = Some(e.0);
                break;
            }
        };

        // helper closures for direction recovery
        let direction = |dy: &[f64],
                         sigma_mu: f64,
                         corr_psd: Option<&Vec<Mat>>,
                         corr_diag: Option<&Vec<f64>>|
         -> (Vec<Mat>, Vec<f64>, Vec<Mat>, Vec<f64>) {
            let a_dy = adjoint(&cons, dy, &psd_dims, diag_total);
            // dZ = A*(dy) − Rd
            let mut dz_psd = Vec::with_capacity(psd_dims.len());
            for bi in 0..psd_dims.len() {
                let mut dz = a_dy.0[bi].clone();
                dz.add_scaled(&rd_psd[bi], -1.0);
                dz_psd.push(dz);
            }
            let dz_diag: Vec<f64> = (0..diag_total)
                .map(|i| a_dy.1[i] - rd_diag[i])
                .collect();
            // dX = σμZ⁻¹ − X − (X dZ Z⁻¹)sym − corr
            let mut dx_psd = Vec::with_capacity(psd_dims.len());
            for bi in 0..psd_dims.len() {
                let mut dx = zinv_psd[bi].clone();
                dx.scale(sigma_mu);
                dx.add_scaled(&state.x_psd[bi], -1.0);
                let mut xdz = state.x_psd[bi].matmul(&dz_psd[bi]).matmul(&zinv_psd[bi]);
                xdz.symmetrize();
                dx.add_scaled(&xdz, -1.0);
                if let Some(corr) = corr_psd {
                    dx.add_scaled(&corr[bi], -1.0);
                }
                dx_psd.push(dx);
            }
            let dx_diag: Vec<f64> = (0..diag_total)
                .map(|i| {
                    let base = sigma_mu / state.z_diag[i]
                        - state.x_diag[i]
                        - w_diag[i] * dz_diag[i];
                    match corr_diag {
                        Some(c) => base - c[i],
                        None => base,
                    }
                })
                .collect();
            (dx_psd, dx_diag, dz_psd, dz_diag)
        };

        let newton_rhs = |sigma_mu: f64,
                          corr_psd: Option<&Vec<Mat>>,
                          corr_diag: Option<&Vec<f64>>|
         -> Vec<f64> {
            // F_psd = σμZ⁻¹ + (X Rd Z⁻¹)sym − corr, F_diag analog
            let mut f_psd = Vec::with_capacity(psd_dims.len());
            for bi in 0..psd_dims.len() {
                let mut f = state.x_psd[bi].matmul(&rd_psd[bi]).matmul(&zinv_psd[bi]);
                f.symmetrize();
                f.add_scaled(&zinv_psd[bi], sigma_mu);
                if let Some(corr) = corr_psd {
                    f.add_scaled(&corr[bi], -1.0);
                }
                f_psd.push(f);
            }
            let f_diag: Vec<f64> = (0..diag_total)
                .map(|i| {
                    let base = sigma_mu / state.z_diag[i] + w_diag[i] * rd_diag[i];
                    match corr_diag {
                        Some(c) => base - c[i],
                        None => base,
                    }
                })
                .collect();
            cons.iter()
                .map(|c| apply_row(c, &f_psd, &f_diag) )
                .zip(&b)
                .map(|(af, bi)| af - bi)
                .collect()
        };

        // predictor (affine scaling direction)
        let rhs_aff = newton_rhs(0.0, None, None);
        let dy_aff = factorization.solve(&cons, &layout, &rhs_aff);
        let (dxa_psd, dxa_diag, dza_psd, dza_diag) = direction(&dy_aff, 0.0, None, None);
        let ap_aff = max_step(&state.x_psd, &state.x_diag, &dxa_psd, &dxa_diag).min(1.0);
        let ad_aff = max_step(&state.z_psd, &state.z_diag, &dza_psd, &dza_diag).min(1.0);
        let mu_aff = {
            let mut s = 0.0;
            for bi in 0..psd_dims.len() {
                let mut xa = state.x_psd[bi].clone();
                xa.add_scaled(&dxa_psd[bi], ap_aff);
                let mut za = state.z_psd[bi].clone();
                za.add_scaled(&dza_psd[bi], ad_aff);
                s += xa.frob_inner(&za);
            }
            for i in 0..diag_total {
                s += (state.x_diag[i] + ap_aff * dxa_diag[i])
                    * (state.z_diag[i] + ad_aff * dza_diag[i]);
            }
            s / total_dim as f64
        };
        let sigma = (mu_aff / mu).powi(3).clamp(1e-8, 1.0);

        // corrector
        let corr_psd: Vec<Mat> = (0..psd_dims.len())
            .map(|bi| {
                let mut c = dxa_psd[bi].matmul(&dza_psd[bi]).matmul(&zinv_psd[bi]);
                c.symmetrize();
                c
            })
            .collect();
        let corr_diag: Vec<f64> = (0..diag_total)
            .map(|i| dxa_diag[i] * dza_diag[i] / state.z_diag[i])
            .collect();
        let rhs = newton_rhs(sigma * mu, Some(&corr_psd), Some(&corr_diag));
        let dy = factorization.solve(&cons, &layout, &rhs);
        let (dx_psd, dx_diag, dz_psd, dz_diag) =
            direction(&dy, sigma * mu, Some(&corr_psd), Some(&corr_diag));

        // direction quality: the linearized primal equation A(dX) = rp must
        // hold to reasonable accuracy or stepping would wreck feasibility
        let dir_res = {
            let mut worst = 0.0f64;
            for (c, &target) in cons.iter().zip(&rp) {
                let got = apply_row(c, &dx_psd, &dx_diag);
                worst = worst.max((got - target).abs());
            }
            worst / b_norm
        };
        if dir_res > 1e-4 {
            status = SolveStatus::NumericalFailure;
            failure_reason = Some(format!(
                "newton direction lost accuracy (residual {dir_res:.2e})"
            ));
            break;
        }

        let ap = (settings.step_frac * max_step(&state.x_psd, &state.x_diag, &dx_psd, &dx_diag))
            .min(1.0);
        let ad = (settings.step_frac * max_step(&state.z_psd, &state.z_diag, &dz_psd, &dz_diag))
            .min(1.0);
        log.push(IterLog {
            iter,
            mu,
            rel_gap,
            primal_res: rp_rel,
            dual_res: rd_rel,
            alpha_p: ap,
            alpha_d: ad,
            primal_objective: pobj,
            dual_objective: dobj,
        });
        if ap < 1e-10 && ad < 1e-10 {
            status = SolveStatus::NumericalFailure;
            failure_reason = Some("step lengths collapsed".into());
            break;
        }
        for bi in 0..psd_dims.len() {
            state.x_psd[bi].add_scaled(&dx_psd[bi], ap);
            state.z_psd[bi].add_scaled(&dz_psd[bi], ad);
        }
        for i in 0..diag_total {
            state.x_diag[i] += ap * dx_diag[i];
            state.z_diag[i] += ad * dz_diag[i];
        }
        for (yv, d) in state.y.iter_mut().zip(&dy) {
            *yv += ad * d;
        }
        iterations = iter + 1;
    }

    let reported = if status == SolveStatus::Optimal {
        state
    } else {
        best
    };

    // repackage into problem block order; rows dropped by the presolve carry
    // zero multipliers and fixed variables their pinned values
    let mut dual_full = vec![0.0; p.constraints.len()];
    for (pos, &ci) in retained.iter().enumerate() {
        dual_full[ci] = reported.y[pos];
    }
    let mut blocks_out = Vec::with_capacity(p.blocks.len());
    let mut slack_out = Vec::with_capacity(p.blocks.len());
    for (bi, blk) in p.blocks.iter().enumerate() {
        match *blk {
            ConeBlock::Psd(_) => {
                let local = psd_block_of[bi];
                blocks_out.push(BlockValues::Psd(reported.x_psd[local].clone()));
                slack_out.push(BlockValues::Psd(reported.z_psd[local].clone()));
            }
            ConeBlock::NonNeg(d) => {
                let mut x_full = vec![0.0; d];
                let mut z_full = vec![0.0; d];
                for r in 0..d {
                    match diag_index.get(&(bi, r)) {
                        Some(&idx) => {
                            x_full[r] = reported.x_diag[idx];
                            z_full[r] = reported.z_diag[idx];
                        }
                        None => {
                            x_full[r] = fixed[&(bi, r)];
                            // dual slack completion: z = (A*y) − c on this
                            // coordinate, consistent because the pinning row
                            // kept multiplier zero
                            let mut a_star_y = 0.0;
                            for (c, &yi) in p.constraints.iter().zip(&dual_full) {
                                if yi == 0.0 {
                                    continue;
                                }
                                for e in &c.entries {
                                    if e.block == bi && e.row == r {
                                        a_star_y += e.value * yi;
                                    }
                                }
                            }
                            let mut c_coeff = 0.0;
                            for e in &p.objective {
                                if e.block == bi && e.row == r {
                                    c_coeff += e.value;
                                }
                            }
                            z_full[r] = a_star_y - c_coeff;
                        }
                    }
                }
                blocks_out.push(BlockValues::NonNeg(x_full));
                slack_out.push(BlockValues::NonNeg(z_full));
            }
        }
    }
    let pobj = objective_of(&obj_psd, &obj_diag, &reported.x_psd, &reported.x_diag)
        + obj_constant;
    let dobj: f64 =
        b.iter().zip(&reported.y).map(|(bi, yi)| bi * yi).sum::<f64>() + obj_constant;
    Ok(Solution {
        status,
        blocks: blocks_out,
        dual_y: dual_full,
        dual_slack: slack_out,
        objective: pobj,
        dual_objective: dobj,
        gap: (dobj - pobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
        iterations,
        trace: log,
        failure_reason,
    })
}

fn apply_row(c: &CompiledConstraint, psd: &[Mat], diag: &[f64]) -> f64 {
    let mut s = 0.0;
    for &(b, r, cc, v) in &c.psd {
        s += if r == cc {
            v * psd[b].get(r, r)
        } else {
            2.0 * v * psd[b].get(r, cc)
        };
    }
    for &(d, v) in &c.diag {
        s += v * diag[d];
    }
    s
}

/// A*(y): per-block dense accumulation.
fn adjoint(
    cons: &[CompiledConstraint],
    y: &[f64],
    psd_dims: &[usize],
    diag_total: usize,
) -> (Vec<Mat>, Vec<f64>) {
    let mut psd: Vec<Mat> = psd_dims.iter().map(|&d| Mat::zeros(d, d)).collect();
    let mut diag = vec![0.0; diag_total];
    for (c, &yi) in cons.iter().zip(y) {
        if yi == 0.0 {
            continue;
        }
        for &(b, r, cc, v) in &c.psd {
            psd[b].add_at(r, cc, v * yi);
            if r != cc {
                psd[b].add_at(cc, r, v * yi);
            }
        }
        for &(d, v) in &c.diag {
            diag[d] += v * yi;
        }
    }
    (psd, diag)
}

fn objective_of(obj_psd: &[Mat], obj_diag: &[f64], x_psd: &[Mat], x_diag: &[f64]) -> f64 {
    let mut s = 0.0;
    for (c, x) in obj_psd.iter().zip(x_psd) {
        s += c.frob_inner(x);
    }
    for (c, x) in obj_diag.iter().zip(x_diag) {
        s += c * x;
    }
    s
}

fn inner_state(state: &State) -> f64 {
    let mut s = 0.0;
    for (x, z) in state.x_psd.iter().zip(&state.z_psd) {
        s += x.frob_inner(z);
    }
    for (x, z) in state.x_diag.iter().zip(&state.z_diag) {
        s += x * z;
    }
    s
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest α ≤ ALPHA_TOP with X + α dX in the cone, by bisection on the
/// Cholesky test per PSD block and the exact ratio test on the diagonal.
fn max_step(x_psd: &[Mat], x_diag: &[f64], dx_psd: &[Mat], dx_diag: &[f64]) -> f64 {
    let mut alpha: f64 = ALPHA_TOP;
    for (x, d) in x_diag.iter().zip(dx_diag) {
        if *d < 0.0 {
            alpha = alpha.min(-x / d);
        }
    }
    for (x, dx) in x_psd.iter().zip(dx_psd) {
        let psd_at = |a: f64| -> bool {
            let mut t = x.clone();
            t.add_scaled(dx, a);
            cholesky_in_place(&mut t).is_ok()
        };
        if psd_at(alpha) {
            continue;
        }
        let mut lo = 0.0;
        let mut hi = alpha;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if psd_at(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        alpha = lo;
    }
    alpha.max(0.0)
}

// ---------------------------------------------------------------------------
// Independent residual check
// ---------------------------------------------------------------------------

/// Residuals of a solution recomputed from scratch with compensated
/// summation; independent of the solver's internal bookkeeping.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    /// ⟨A_i, X⟩ − b_i per constraint (original indexing).
    pub constraint_residuals: Vec<f64>,
    pub primal_residual_norm: f64,
    pub primal_relative: f64,
    /// Frobenius norm of A*(y) − Z − C, all blocks combined.
    pub dual_residual_norm: f64,
    pub dual_relative: f64,
    /// (⟨X, Z⟩ + xᵀz) / total dimension.
    pub complementarity: f64,
    /// Minimum eigenvalue per PSD block.
    pub min_eigenvalues: Vec<f64>,
    /// Smallest entry of the nonnegative blocks (+∞ if none).
    pub min_nonneg: f64,
    /// Index of the constraint with the largest absolute residual.
    pub worst_constraint: Option<usize>,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

/// Neumaier compensated sum.
fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for t in terms {
        let new_sum = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - new_sum) + t;
        } else {
            comp += (t - new_sum) + sum;
        }
        sum = new_sum;
    }
    sum + comp
}

pub fn check_solution(p: &SdpProblem, sol: &Solution) -> ResidualReport {
    let values = &sol.blocks;
    let constraint_residuals: Vec<f64> = p
        .constraints
        .iter()
        .map(|c| {
            let terms = c.entries.iter().map(|e| match &values[e.block] {
                BlockValues::Psd(m) => {
                    if e.row == e.col {
                        e.value * m.get(e.row, e.col)
                    } else {
                        2.0 * e.value * m.get(e.row, e.col)
                    }
                }
                BlockValues::NonNeg(v) => e.value * v[e.row],
            });
            compensated_sum(terms) - c.rhs
        })
        .collect();
    let primal_residual_norm = norm2(&constraint_residuals);
    let b_norm = (1.0
        + p.constraints
            .iter()
            .map(|c| c.rhs * c.rhs)
            .sum::<f64>())
    .sqrt();

    // dual residual: A*(y) − Z − C blockwise
    let mut dual_sq = 0.0;
    let mut min_eigenvalues = Vec::new();
    let mut min_nonneg = f64::INFINITY;
    for (bi, blk) in p.blocks.iter().enumerate() {
        match blk {
            ConeBlock::Psd(d) => {
                let mut acc = Mat::zeros(*d, *d);
                for (c, &yi) in p.constraints.iter().zip(&sol.dual_y) {
                    if yi == 0.0 {
                        continue;
                    }
                    for e in &c.entries {
                        if e.block == bi {
                            acc.add_at(e.row, e.col, e.value * yi);
                            if e.row != e.col {
                                acc.add_at(e.col, e.row, e.value * yi);
                            }
                        }
                    }
                }
                for e in &p.objective {
                    if e.block == bi {
                        acc.add_at(e.row, e.col, -e.value);
                        if e.row != e.col {
                            acc.add_at(e.col, e.row, -e.value);
                        }
                    }
                }
                acc.add_scaled(sol.dual_slack[bi].as_psd(), -1.0);
                dual_sq += acc.frob_norm().powi(2);
                let x = sol.blocks[bi].as_psd();
                let scale = 1.0 + x.max_abs();
                min_eigenvalues.push(min_eigenvalue(x, 1e-12 * scale));
            }
            ConeBlock::NonNeg(d) => {
                let mut acc = vec![0.0; *d];
                for (c, &yi) in p.constraints.iter().zip(&sol.dual_y) {
                    if yi == 0.0 {
                        continue;
                    }
                    for e in &c.entries {
                        if e.block == bi {
                            acc[e.row] += e.value * yi;
                        }
                    }
                }
                for e in &p.objective {
                    if e.block == bi {
                        acc[e.row] -= e.value;
                    }
                }
                let z = sol.dual_slack[bi].as_nonneg();
                for (a, zv) in acc.iter().zip(z) {
                    dual_sq += (a - zv) * (a - zv);
                }
                for v in sol.blocks[bi].as_nonneg() {
                    min_nonneg = min_nonneg.min(*v);
                }
            }
        }
    }
    let c_norm = (1.0
        + p.objective
            .iter()
            .map(|e| e.value * e.value)
            .sum::<f64>())
    .sqrt();

    // complementarity
    let mut comp = 0.0;
    let mut total_dim = 0usize;
    for (bi, blk) in p.blocks.iter().enumerate() {
        match blk {
            ConeBlock::Psd(d) => {
                comp += sol.blocks[bi].as_psd().frob_inner(sol.dual_slack[bi].as_psd());
                total_dim += d;
            }
            ConeBlock::NonNeg(d) => {
                comp += sol.blocks[bi]
                    .as_nonneg()
                    .iter()
                    .zip(sol.dual_slack[bi].as_nonneg())
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
                total_dim += d;
            }
        }
    }

    let worst_constraint = constraint_residuals
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).unwrap())
        .map(|(i, _)| i);
    let dual_objective: f64 = p
        .constraints
        .iter()
        .zip(&sol.dual_y)
        .map(|(c, y)| c.rhs * y)
        .sum();
    ResidualReport {
        primal_residual_norm,
        primal_relative: primal_residual_norm / b_norm,
        dual_residual_norm: dual_sq.sqrt(),
        dual_relative: dual_sq.sqrt() / c_norm,
        complementarity: comp / total_dim.max(1) as f64,
        min_eigenvalues,
        min_nonneg,
        worst_constraint,
        primal_objective: p.objective_value(&sol.blocks),
        dual_objective,
        constraint_residuals,
    }
}

#[cfg(test)]
mod tests;
