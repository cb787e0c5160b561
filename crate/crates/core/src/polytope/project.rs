//! Frobenius-distance projection onto STAB²/SSTAB² of a small graph: the
//! nearest convex combination of (scaled) stable set matrices, solved by
//! accelerated projected gradient over the simplex.

use crate::linalg::Mat;
use crate::stable_sets::StableSetFamily;

/// Default absolute membership tolerance on the Frobenius distance.
pub const TOL_MEMBER: f64 = 1e-7;

const MAX_ITER: usize = 5000;
const FW_GAP_TOL: f64 = 1e-10;

/// Outcome of a projection query.
#[derive(Clone, Debug)]
pub struct MembershipResult {
    /// distance ≤ tolerance.
    pub inside: bool,
    /// Frobenius distance from the query to the polytope (0 when inside,
    /// up to tolerance).
    pub distance: f64,
    /// Simplex coefficients of the nearest convex combination, indexed like
    /// the family members.
    pub lambda: Vec<f64>,
    pub iterations: usize,
    /// False when the iteration cap was hit before the duality gap closed;
    /// the best iterate found is still reported.
    pub converged: bool,
}

/// Projects `xq` onto conv{M_i} where M_i are the stable set matrices of the
/// family (`scaled = false`) or the trace-normalized ones plus the zero
/// matrix (`scaled = true`). Uses [`TOL_MEMBER`] for the inside test.
pub fn project_onto_stab2(xq: &Mat, family: &StableSetFamily, scaled: bool) -> MembershipResult {
    project_onto_stab2_with_tol(xq, family, scaled, TOL_MEMBER)
}

pub fn project_onto_stab2_with_tol(
    xq: &Mat,
    family: &StableSetFamily,
    scaled: bool,
    tol_member: f64,
) -> MembershipResult {
    let k = family.order();
    assert_eq!(xq.n_rows(), k, "query order must match the family");
    assert_eq!(xq.n_cols(), k);
    let t = family.len();
    let masks = family.masks();

    // Gram matrix of the generators via bit tricks:
    //   ⟨ssᵀ, uuᵀ⟩ = |s ∩ u|², scaled by 1/(|s||u|) in the scaled variant.
    let cards: Vec<f64> = masks.iter().map(|m| m.count_ones() as f64).collect();
    let weight = |i: usize| -> f64 {
        if !scaled || cards[i] == 0.0 {
            1.0
        } else {
            1.0 / cards[i]
        }
    };
    // the zero member has weight irrelevant (its matrix is zero either way)
    let mut gram = Mat::zeros(t, t);
    for i in 0..t {
        if cards[i] == 0.0 {
            continue;
        }
        for j in i..t {
            if cards[j] == 0.0 {
                continue;
            }
            let common = (masks[i] & masks[j]).count_ones() as f64;
            let v = common * common * weight(i) * weight(j);
            gram.set(i, j, v);
            gram.set(j, i, v);
        }
    }
    // linear term q_i = ⟨M_i, Xq⟩ = w_i · sᵀ Xq s
    let q: Vec<f64> = (0..t)
        .map(|i| {
            if cards[i] == 0.0 {
                return 0.0;
            }
            let mut s = 0.0;
            for a in 0..k {
                if (masks[i] >> a) & 1 == 0 {
                    continue;
                }
                for b in 0..k {
                    if (masks[i] >> b) & 1 == 1 {
                        s += xq.get(a, b);
                    }
                }
            }
            s * weight(i)
        })
        .collect();
    let c0 = xq.frob_inner(xq);

    // Lipschitz constant bound for ∇f = Gλ − q
    let lip = (0..t)
        .map(|i| gram.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
        .max(1e-12);

    let objective = |lam: &[f64]| -> f64 {
        let glam = gram.matvec(lam);
        let quad: f64 = lam.iter().zip(&glam).map(|(a, b)| a * b).sum();
        let lin: f64 = lam.iter().zip(&q).map(|(a, b)| a * b).sum();
        quad - 2.0 * lin + c0
    };

    // FISTA over the simplex
    let mut lam = vec![1.0 / t as f64; t];
    let mut prev = lam.clone();
    let mut y = lam.clone();
    let mut t_acc = 1.0f64;
    let mut iterations = 0;
    let mut converged = false;
    for it in 0..MAX_ITER {
        iterations = it + 1;
        // gradient at λ for the stopping test (Frank–Wolfe gap)
        let grad_at_lam: Vec<f64> = {
            let glam = gram.matvec(&lam);
            glam.iter().zip(&q).map(|(g, qi)| g - qi).collect()
        };
        let min_grad = grad_at_lam.iter().cloned().fold(f64::INFINITY, f64::min);
        let gap: f64 = grad_at_lam
            .iter()
            .zip(&lam)
            .map(|(g, l)| g * l)
            .sum::<f64>()
            - min_grad;
        if gap <= FW_GAP_TOL {
            converged = true;
            break;
        }
        let grad_y: Vec<f64> = {
            let gy = gram.matvec(&y);
            gy.iter().zip(&q).map(|(g, qi)| g - qi).collect()
        };
        let mut step: Vec<f64> = y
            .iter()
            .zip(&grad_y)
            .map(|(v, g)| v - g / lip)
            .collect();
        project_simplex(&mut step);
        prev.copy_from_slice(&lam);
        lam = step;
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_acc * t_acc).sqrt());
        let beta = (t_acc - 1.0) / t_next;
        for ((yv, l), p) in y.iter_mut().zip(&lam).zip(&prev) {
            *yv = l + beta * (l - p);
        }
        t_acc = t_next;
    }

    let dist2 = objective(&lam).max(0.0);
    let distance = dist2.sqrt();
    MembershipResult {
        inside: distance <= tol_member,
        distance,
        lambda: lam,
        iterations,
        converged,
    }
}

/// Euclidean projection onto the probability simplex (in place).
fn project_simplex(v: &mut [f64]) {
    let n = v.len();
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cum += u;
        let candidate = (cum - 1.0) / (i + 1) as f64;
        if u - candidate > 0.0 {
            tau = candidate;
        }
    }
    let mut total = 0.0;
    for x in v.iter_mut() {
        *x = (*x - tau).max(0.0);
        total += *x;
    }
    // renormalize away the last few ulps
    if total > 0.0 && (total - 1.0).abs() > 1e-15 {
        for x in v.iter_mut() {
            *x /= total;
        }
    }
    debug_assert!(n == 0 || (v.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}
