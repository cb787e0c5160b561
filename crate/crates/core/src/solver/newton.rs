//! Per-iteration Newton system for the interior-point method.
//!
//! The Schur complement M_ij = Σ_psd tr(A_i X A_j Z⁻¹) + Σ_diag a_i a_j x/z
//! is solved through one of two exact routes chosen once per problem by a
//! flop-count model:
//!
//! * classic — assemble M densely and Cholesky-factor it (best when the
//!   constraint count is modest);
//! * structured — exploit that exact-subgraph λ/slack variables couple only
//!   small disjoint groups of constraints. Writing V for the map from
//!   constraint space to the concatenated svec space of the PSD blocks and
//!   K for the dense PSD-block operator with M_psd = Vᵀ K V, the system
//!   (S + Vᵀ K V) dy = r is eliminated in three blocks: the per-group parts
//!   S_c are inverted directly, the svec-space system Ĥ = K⁻¹ + Σ V_c S_c⁻¹
//!   V_cᵀ is factored densely (its order is svec-dimension, far below the
//!   constraint count for heavily constrained problems), and the remaining
//!   dense system has one row per constraint without diagonal variables.
//!   Both routes produce the same dy; iterative refinement against the
//!   unreduced operator guards the elimination.

use crate::linalg::{
    cholesky_in_place, chol_inverse, chol_solve_in_place, gram_transpose, svec_index, svec_len,
    trsm_lower, Mat, SQRT2,
};

/// One sparse constraint row, pre-compiled for fast application.
pub(super) struct CompiledConstraint {
    /// PSD part: (psd-block local index, row ≤ col, value).
    pub psd: Vec<(usize, usize, usize, f64)>,
    /// Same data as svec coordinates over the concatenated svec space.
    pub svec: Vec<(usize, f64)>,
    /// Diagonal (nonnegative) part: (global diag offset, value).
    pub diag: Vec<(usize, f64)>,
    pub rhs: f64,
}

pub(super) struct Layout {
    /// Dimensions of the PSD blocks (in problem block order).
    pub psd_dims: Vec<usize>,
    /// svec offset per PSD block.
    pub svec_offsets: Vec<usize>,
    pub svec_total: usize,
    /// Total length of the concatenated diagonal part.
    pub diag_total: usize,
}

/// Connected component of constraints sharing diagonal variables.
pub(super) struct DiagGroup {
    pub rows: Vec<usize>,
}

pub(super) enum Plan {
    Classic,
    Structured {
        groups: Vec<DiagGroup>,
        /// Constraints with no diagonal entries, solved in the dense tail
        /// system (one per base constraint).
        dense_rows: Vec<usize>,
    },
}

/// Below this constraint count the dense route is both fast and the most
/// robust against degenerate endgames, so it always wins.
const CLASSIC_PREFERRED: usize = 1500;

/// Picks the Newton route from problem shape alone (deterministic).
pub(super) fn make_plan(cons: &[CompiledConstraint], layout: &Layout) -> Plan {
    let m = cons.len() as f64;
    if cons.len() <= CLASSIC_PREFERRED {
        return Plan::Classic;
    }
    let n_svec = layout.svec_total as f64;
    let classic_cost = m * m * m / 3.0 + m * m * 2.0;
    // group constraints by shared diagonal variables (union-find)
    let groups = diag_groups(cons, layout.diag_total);
    let dense_rows: Vec<usize> = (0..cons.len())
        .filter(|&i| cons[i].diag.is_empty())
        .collect();
    let mb = dense_rows.len() as f64;
    let structured_cost =
        1.7 * n_svec * n_svec * n_svec + mb * n_svec * n_svec / 2.0 + mb * mb * n_svec / 2.0
            + mb * mb * mb / 3.0;
    let oversized_group = groups.iter().any(|g| g.rows.len() > 2000);
    if structured_cost < classic_cost && !oversized_group {
        Plan::Structured { groups, dense_rows }
    } else {
        Plan::Classic
    }
}

fn diag_groups(cons: &[CompiledConstraint], diag_total: usize) -> Vec<DiagGroup> {
    // union-find over constraints, keyed through shared diag variables
    let mut parent: Vec<usize> = (0..cons.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = i;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    let mut owner: Vec<Option<usize>> = vec![None; diag_total];
    for (ci, c) in cons.iter().enumerate() {
        for &(d, _) in &c.diag {
            match owner[d] {
                None => owner[d] = Some(ci),
                Some(prev) => {
                    let (a, b) = (find(&mut parent, prev), find(&mut parent, ci));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of: Vec<Option<usize>> = vec![None; cons.len()];
    for ci in 0..cons.len() {
        if cons[ci].diag.is_empty() {
            continue;
        }
        let root = find(&mut parent, ci);
        match group_of[root] {
            Some(g) => groups[g].push(ci),
            None => {
                group_of[root] = Some(groups.len());
                groups.push(vec![ci]);
            }
        }
    }
    groups.into_iter().map(|rows| DiagGroup { rows }).collect()
}

/// Iteration-state pieces the Newton factorization needs.
pub(super) struct Scaling<'a> {
    /// X per PSD block.
    pub x_psd: &'a [Mat],
    /// Z⁻¹ per PSD block.
    pub zinv_psd: &'a [Mat],
    /// x/z per diagonal entry.
    pub w_diag: &'a [f64],
}

pub(super) enum Factorization {
    Classic {
        /// Cholesky factor of M (+ regularization).
        l: Mat,
        /// Copy of M for refinement.
        m: Mat,
    },
    Structured {
        /// K per PSD block (kept for operator application).
        k_blocks: Vec<Mat>,
        /// Cholesky factor of Ĥ.
        h_hat_l: Mat,
        /// S_c for every group (part of the operator),
        group_s: Vec<Mat>,
        /// and its inverse for the groups that were eliminated. Groups whose
        /// scaling collapsed (λ or slacks pinned at the boundary) carry None
        /// and are solved in the dense tail instead.
        group_s_inv: Vec<Option<Mat>>,
        /// Cholesky factor of the dense tail system YᵀY + S_demoted.
        tail_l: Mat,
        groups_rows: Vec<Vec<usize>>,
        /// Structurally dense rows plus this iteration's demoted group rows.
        dense_rows: Vec<usize>,
    },
}

pub(super) struct NewtonError(pub String);

const REG_BASE: f64 = 1e-12;
const REG_RETRIES: usize = 3;
/// A group is eliminated only while ‖S_c⁻¹‖·‖K⁻¹‖⁻¹ stays below this.
const DEMOTE_RATIO: f64 = 1e10;

/// Cholesky of a copy with escalating diagonal regularization; keeps the
/// original for refinement.
fn chol_with_retries(m: &Mat, scale: f64) -> Result<Mat, NewtonError> {
    let n = m.n_rows();
    let mut reg = 0.0;
    for attempt in 0..=REG_RETRIES {
        let mut work = m.clone();
        if reg > 0.0 {
            for i in 0..n {
                work.add_at(i, i, reg);
            }
        }
        if cholesky_in_place(&mut work).is_ok() {
            return Ok(work);
        }
        reg = if attempt == 0 {
            REG_BASE * (1.0 + scale)
        } else {
            reg * 100.0
        };
    }
    Err(NewtonError(format!(
        "cholesky breakdown after {REG_RETRIES} regularization retries (order {n})"
    )))
}

pub(super) fn factor(
    cons: &[CompiledConstraint],
    layout: &Layout,
    plan: &Plan,
    scaling: &Scaling,
) -> Result<Factorization, NewtonError> {
    match plan {
        Plan::Classic => factor_classic(cons, layout, scaling),
        Plan::Structured { groups, dense_rows } => {
            factor_structured(cons, layout, scaling, groups, dense_rows)
        }
    }
}

fn factor_classic(
    cons: &[CompiledConstraint],
    layout: &Layout,
    scaling: &Scaling,
) -> Result<Factorization, NewtonError> {
    let m_dim = cons.len();
    let mut m = Mat::zeros(m_dim, m_dim);
    // PSD contribution: fill column j from W_j = X A_j Z⁻¹
    for (bi, &d) in layout.psd_dims.iter().enumerate() {
        let x = &scaling.x_psd[bi];
        let zi = &scaling.zinv_psd[bi];
        let mut w = Mat::zeros(d, d);
        for j in 0..m_dim {
            let entries: Vec<(usize, usize, f64)> = cons[j]
                .psd
                .iter()
                .filter(|e| e.0 == bi)
                .map(|e| (e.1, e.2, e.3))
                .collect();
            if entries.is_empty() {
                continue;
            }
            w.data_mut().fill(0.0);
            for &(r, c, v) in &entries {
                outer_into(&mut w, x, zi, r, c, v);
                if r != c {
                    outer_into(&mut w, x, zi, c, r, v);
                }
            }
            for i in 0..=j {
                if cons[i].psd.is_empty() {
                    continue;
                }
                let mut s = 0.0;
                for &(bb, r, c, v) in &cons[i].psd {
                    if bb != bi {
                        continue;
                    }
                    s += if r == c {
                        v * w.get(r, r)
                    } else {
                        v * (w.get(r, c) + w.get(c, r))
                    };
                }
                if s != 0.0 {
                    m.add_at(j, i, s);
                }
            }
        }
    }
    // diagonal contribution
    add_diag_products(&mut m, cons, scaling.w_diag, None);
    // mirror lower → upper
    for i in 0..m_dim {
        for j in 0..i {
            let v = m.get(i, j);
            m.set(j, i, v);
        }
    }
    let scale = m.max_abs();
    let l = chol_with_retries(&m, scale)?;
    Ok(Factorization::Classic { l, m })
}

/// M += A_diag W A_diagᵀ, optionally restricted to a row subset.
fn add_diag_products(
    m: &mut Mat,
    cons: &[CompiledConstraint],
    w_diag: &[f64],
    rows: Option<&[usize]>,
) {
    // group rows per diag variable
    let mut per_var: Vec<Vec<(usize, f64)>> = vec![Vec::new(); w_diag.len()];
    let row_iter: Vec<usize> = match rows {
        Some(r) => r.to_vec(),
        None => (0..cons.len()).collect(),
    };
    for (pos, &ci) in row_iter.iter().enumerate() {
        for &(d, v) in &cons[ci].diag {
            per_var[d].push((pos, v));
        }
    }
    for (d, touching) in per_var.iter().enumerate() {
        let w = w_diag[d];
        if w == 0.0 {
            continue;
        }
        for &(i, vi) in touching {
            for &(j, vj) in touching {
                if j <= i {
                    m.add_at(i, j, vi * vj * w);
                }
            }
        }
    }
    let n = m.n_rows();
    for i in 0..n {
        for j in 0..i {
            let v = m.get(i, j);
            m.set(j, i, v);
        }
    }
}

fn factor_structured(
    cons: &[CompiledConstraint],
    layout: &Layout,
    scaling: &Scaling,
    groups: &[DiagGroup],
    structural_dense: &[usize],
) -> Result<Factorization, NewtonError> {
    let n_svec = layout.svec_total;
    // K per PSD block, column by column
    let mut k_blocks = Vec::with_capacity(layout.psd_dims.len());
    for (bi, &d) in layout.psd_dims.iter().enumerate() {
        k_blocks.push(build_k_block(&scaling.x_psd[bi], &scaling.zinv_psd[bi], d));
    }
    // Ĥ starts as K⁻¹ (block diagonal)
    let mut h_hat = Mat::zeros(n_svec, n_svec);
    let mut h_scale = 1.0f64;
    for (bi, k) in k_blocks.iter().enumerate() {
        let scale = k.max_abs();
        let l = chol_with_retries(k, scale)?;
        let inv = chol_inverse(&l);
        let off = layout.svec_offsets[bi];
        let nb = inv.n_rows();
        for i in 0..nb {
            let row = inv.row(i);
            for (j, &v) in row.iter().enumerate() {
                h_hat.set(off + i, off + j, v);
            }
            h_scale = h_scale.max(inv.get(i, i));
        }
    }
    // Eliminate each group unless its scaling block has collapsed: inverting
    // a nearly singular S_c would poison Ĥ, so such groups are demoted to
    // the dense tail for this iteration.
    let mut group_s = Vec::with_capacity(groups.len());
    let mut group_s_inv: Vec<Option<Mat>> = Vec::with_capacity(groups.len());
    let mut demoted: Vec<usize> = Vec::new();
    for g in groups {
        let r = g.rows.len();
        let mut sc = Mat::zeros(r, r);
        add_diag_products(&mut sc, cons, scaling.w_diag, Some(&g.rows));
        let mut work = sc.clone();
        let keep = match cholesky_in_place(&mut work) {
            Err(_) => false,
            Ok(()) => {
                let min_pivot = (0..r).map(|i| work.get(i, i)).fold(f64::INFINITY, f64::min);
                // ‖S_c⁻¹‖ ≲ 1/min_pivot²; refuse when it would dwarf K⁻¹
                min_pivot * min_pivot * DEMOTE_RATIO * h_scale >= 1.0
            }
        };
        if keep {
            let inv = chol_inverse(&work);
            for (a_pos, &ca) in g.rows.iter().enumerate() {
                for (b_pos, &cb) in g.rows.iter().enumerate() {
                    let t = inv.get(a_pos, b_pos);
                    if t == 0.0 {
                        continue;
                    }
                    for &(pa, va) in &cons[ca].svec {
                        let w = t * va;
                        if w == 0.0 {
                            continue;
                        }
                        for &(pb, vb) in &cons[cb].svec {
                            h_hat.add_at(pa, pb, w * vb);
                        }
                    }
                }
            }
            group_s_inv.push(Some(inv));
        } else {
            demoted.extend(g.rows.iter().copied());
            group_s_inv.push(None);
        }
        group_s.push(sc);
    }
    let h_hat_l = chol_with_retries(&h_hat, h_hat.max_abs())?;
    drop(h_hat);
    // dense tail: structurally dense rows plus demoted ones
    let mut dense_rows: Vec<usize> = structural_dense.to_vec();
    dense_rows.extend(demoted.iter().copied());
    dense_rows.sort_unstable();
    let mb = dense_rows.len();
    let mut y_panel = Mat::zeros(n_svec, mb);
    for (col, &ci) in dense_rows.iter().enumerate() {
        for &(p, v) in &cons[ci].svec {
            y_panel.set(p, col, v);
        }
    }
    trsm_lower(&h_hat_l, &mut y_panel);
    let mut tail = gram_transpose(&y_panel);
    drop(y_panel);
    // demoted rows keep their diagonal-scaling contribution
    add_diag_products(&mut tail, cons, scaling.w_diag, Some(&dense_rows));
    let tail_l = if mb > 0 {
        chol_with_retries(&tail, tail.max_abs())?
    } else {
        Mat::zeros(0, 0)
    };
    Ok(Factorization::Structured {
        k_blocks,
        h_hat_l,
        group_s,
        group_s_inv,
        tail_l,
        groups_rows: groups.iter().map(|g| g.rows.clone()).collect(),
        dense_rows,
    })
}

/// Dense K for one PSD block: K svec(U) = svec((X U Z⁻¹ + Z⁻¹ U X)/2),
/// assembled one svec basis column at a time. Since X and Z⁻¹ are symmetric
/// the symmetrized product is just the symmetric part of X Ê Z⁻¹.
fn build_k_block(x: &Mat, zi: &Mat, d: usize) -> Mat {
    let n = svec_len(d);
    let mut k = Mat::zeros(n, n);
    let mut w = Mat::zeros(d, d);
    for j in 0..d {
        for i in 0..=j {
            let col_idx = svec_index(i, j);
            // Ê = e_i e_jᵀ (+ e_j e_iᵀ), scaled to unit svec norm
            w.data_mut().fill(0.0);
            if i == j {
                // W = X e_i e_iᵀ Z⁻¹ = X[:,i] ⊗ Z⁻¹[i,:]
                outer_into(&mut w, x, zi, i, i, 1.0);
            } else {
                let c = 1.0 / SQRT2;
                outer_into(&mut w, x, zi, i, j, c);
                outer_into(&mut w, x, zi, j, i, c);
            }
            // column = svec((W + Wᵀ)/2)
            for q in 0..d {
                for p in 0..=q {
                    let sym = 0.5 * (w.get(p, q) + w.get(q, p));
                    let v = if p == q { sym } else { SQRT2 * sym };
                    k.set(svec_index(p, q), col_idx, v);
                }
            }
        }
    }
    // exact symmetry
    k.symmetrize();
    k
}

/// W += v · X[:,r] ⊗ Z⁻¹[c,:]
fn outer_into(w: &mut Mat, x: &Mat, zi: &Mat, r: usize, c: usize, v: f64) {
    let d = w.n_rows();
    for p in 0..d {
        let xv = v * x.get(p, r);
        if xv == 0.0 {
            continue;
        }
        let wrow = w.row_mut(p);
        let zrow = zi.row(c);
        for (wv, &zv) in wrow.iter_mut().zip(zrow) {
            *wv += xv * zv;
        }
    }
}

impl Factorization {
    /// Solve M dy = r with iterative refinement against the unreduced
    /// operator; the factorization alone loses digits once the iterates
    /// approach the boundary.
    pub(super) fn solve(&self, cons: &[CompiledConstraint], layout: &Layout, r: &[f64]) -> Vec<f64> {
        let mut dy = self.solve_once(cons, layout, r);
        let scale: f64 = 1.0 + r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut prev_norm = f64::INFINITY;
        for _ in 0..5 {
            let mut residual = r.to_vec();
            self.apply_m(cons, layout, &dy, &mut residual);
            let rnorm: f64 = residual.iter().map(|v| v * v).sum::<f64>().sqrt();
            if rnorm <= 1e-12 * scale || rnorm >= 0.5 * prev_norm {
                break;
            }
            prev_norm = rnorm;
            let corr = self.solve_once(cons, layout, &residual);
            for (d, c) in dy.iter_mut().zip(&corr) {
                *d += c;
            }
        }
        dy
    }

    /// residual ← residual − M dy
    fn apply_m(&self, cons: &[CompiledConstraint], layout: &Layout, dy: &[f64], residual: &mut [f64]) {
        match self {
            Factorization::Classic { m, .. } => {
                let md = m.matvec(dy);
                for (r, v) in residual.iter_mut().zip(&md) {
                    *r -= v;
                }
            }
            Factorization::Structured {
                k_blocks,
                group_s,
                groups_rows,
                ..
            } => {
                // v = V dy over svec space
                let mut v = vec![0.0; layout.svec_total];
                for (ci, c) in cons.iter().enumerate() {
                    let d = dy[ci];
                    if d == 0.0 {
                        continue;
                    }
                    for &(p, val) in &c.svec {
                        v[p] += val * d;
                    }
                }
                // kv = K v (blockwise)
                let mut kv = vec![0.0; layout.svec_total];
                for (bi, k) in k_blocks.iter().enumerate() {
                    let off = layout.svec_offsets[bi];
                    let nb = k.n_rows();
                    let prod = k.matvec(&v[off..off + nb]);
                    kv[off..off + nb].copy_from_slice(&prod);
                }
                // residual -= Vᵀ kv + S dy
                for (ci, c) in cons.iter().enumerate() {
                    let mut s = 0.0;
                    for &(p, val) in &c.svec {
                        s += val * kv[p];
                    }
                    residual[ci] -= s;
                }
                for (g, rows) in group_s.iter().zip(groups_rows) {
                    for (a_pos, &ca) in rows.iter().enumerate() {
                        let mut s = 0.0;
                        for (b_pos, &cb) in rows.iter().enumerate() {
                            s += g.get(a_pos, b_pos) * dy[cb];
                        }
                        residual[ca] -= s;
                    }
                }
            }
        }
    }

    fn solve_once(&self, cons: &[CompiledConstraint], layout: &Layout, r: &[f64]) -> Vec<f64> {
        match self {
            Factorization::Classic { l, .. } => {
                let mut dy = r.to_vec();
                chol_solve_in_place(l, &mut dy);
                dy
            }
            Factorization::Structured {
                h_hat_l,
                group_s_inv,
                tail_l,
                groups_rows,
                dense_rows,
                ..
            } => {
                let n_svec = layout.svec_total;
                let mut dy = vec![0.0; cons.len()];
                // g = Σ_c V_c (S_c⁻¹ r_c) over the eliminated groups
                let mut g = vec![0.0; n_svec];
                for (inv, rows) in group_s_inv.iter().zip(groups_rows) {
                    let Some(inv) = inv else { continue };
                    let rc: Vec<f64> = rows.iter().map(|&ci| r[ci]).collect();
                    let u = inv.matvec(&rc);
                    for (pos, &ci) in rows.iter().enumerate() {
                        let uw = u[pos];
                        if uw == 0.0 {
                            continue;
                        }
                        for &(p, v) in &cons[ci].svec {
                            g[p] += v * uw;
                        }
                    }
                }
                // h = Ĥ⁻¹ g
                let mut h = g.clone();
                chol_solve_in_place(h_hat_l, &mut h);
                // tail solve: (YᵀY) dy_B = r_B − V_Bᵀ h
                if !dense_rows.is_empty() {
                    let mut rhs_b: Vec<f64> = dense_rows
                        .iter()
                        .map(|&ci| {
                            let mut s = r[ci];
                            for &(p, v) in &cons[ci].svec {
                                s -= v * h[p];
                            }
                            s
                        })
                        .collect();
                    chol_solve_in_place(tail_l, &mut rhs_b);
                    for (col, &ci) in dense_rows.iter().enumerate() {
                        dy[ci] = rhs_b[col];
                    }
                }
                // w = Ĥ⁻¹ (V_B dy_B + g)
                let mut vg = g;
                for &ci in dense_rows {
                    let d = dy[ci];
                    if d == 0.0 {
                        continue;
                    }
                    for &(p, v) in &cons[ci].svec {
                        vg[p] += v * d;
                    }
                }
                let mut w = vg;
                chol_solve_in_place(h_hat_l, &mut w);
                // dy_E = S_c⁻¹ (r_c − V_cᵀ w) for the eliminated groups
                for (inv, rows) in group_s_inv.iter().zip(groups_rows) {
                    let Some(inv) = inv else { continue };
                    let rhs: Vec<f64> = rows
                        .iter()
                        .map(|&ci| {
                            let mut s = r[ci];
                            for &(p, v) in &cons[ci].svec {
                                s -= v * w[p];
                            }
                            s
                        })
                        .collect();
                    let sol = inv.matvec(&rhs);
                    for (pos, &ci) in rows.iter().enumerate() {
                        dy[ci] = sol[pos];
                    }
                }
                dy
            }
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    /// Both Newton routes must produce the same dy for the same system.
    #[test]
    fn classic_and_structured_routes_agree() {
        let mut rng = SplitMix64::new(31);
        let d = 6usize;
        let n_svec = svec_len(d);
        let layout = Layout {
            psd_dims: vec![d],
            svec_offsets: vec![0],
            svec_total: n_svec,
            diag_total: 7,
        };
        // random SPD X and Z⁻¹
        let spd = |rng: &mut SplitMix64| {
            let mut a = Mat::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    a.set(i, j, rng.next_f64() - 0.5);
                }
            }
            let at = a.transpose();
            a = a.matmul(&at);
            for i in 0..d {
                a.add_at(i, i, d as f64);
            }
            a
        };
        let x = spd(&mut rng);
        let zinv = spd(&mut rng);
        let w_diag: Vec<f64> = (0..7).map(|_| 0.1 + rng.next_f64()).collect();
        // constraints: a few psd-only rows plus two diag groups
        let mut cons: Vec<CompiledConstraint> = Vec::new();
        let mut push = |psd: Vec<(usize, usize, f64)>, diag: Vec<(usize, f64)>| {
            let svec: Vec<(usize, f64)> = psd
                .iter()
                .map(|&(r, c, v)| {
                    (
                        svec_index(r.min(c), r.max(c)),
                        if r == c { v } else { SQRT2 * v },
                    )
                })
                .collect();
            cons.push(CompiledConstraint {
                psd: psd.into_iter().map(|(r, c, v)| (0, r.min(c), r.max(c), v)).collect(),
                svec,
                diag,
                rhs: 0.0,
            });
        };
        push(vec![(0, 0, 1.0), (1, 1, 1.0)], vec![]);
        push(vec![(0, 2, 0.5)], vec![]);
        push(vec![(3, 3, 1.0), (2, 4, -0.5)], vec![]);
        // group 1: vars 0..3
        push(vec![(1, 2, 0.5)], vec![(0, -1.0), (1, -1.0)]);
        push(vec![(4, 4, 1.0)], vec![(1, -0.5), (2, 1.0)]);
        push(vec![], vec![(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)]);
        push(vec![(5, 5, 1.0)], vec![(3, -1.0)]);
        // group 2: vars 4..6
        push(vec![(0, 5, 0.5)], vec![(4, -1.0), (5, -2.0)]);
        push(vec![], vec![(4, 1.0), (5, 1.0), (6, 1.0)]);
        push(vec![(2, 2, 1.0)], vec![(6, -1.0)]);

        let scaling = Scaling {
            x_psd: &[x],
            zinv_psd: &[zinv],
            w_diag: &w_diag,
        };
        let classic = factor(&cons, &layout, &Plan::Classic, &scaling)
            .unwrap_or_else(|e| panic!("classic factorization failed: {}", e.0));
        let groups = diag_groups(&cons, layout.diag_total);
        assert_eq!(groups.len(), 2);
        let dense_rows: Vec<usize> = (0..cons.len())
            .filter(|&i| cons[i].diag.is_empty())
            .collect();
        let plan = Plan::Structured { groups, dense_rows };
        let structured = factor(&cons, &layout, &plan, &scaling)
            .unwrap_or_else(|e| panic!("structured factorization failed: {}", e.0));
        let r: Vec<f64> = (0..cons.len()).map(|_| rng.next_f64() - 0.5).collect();
        let dy_classic = classic.solve(&cons, &layout, &r);
        let dy_structured = structured.solve(&cons, &layout, &r);
        for (a, b) in dy_classic.iter().zip(&dy_structured) {
            assert!(
                (a - b).abs() < 1e-8,
                "routes disagree: {dy_classic:?} vs {dy_structured:?}"
            );
        }
    }
}
