//! Double description in exact integer arithmetic: from the vertex list of a
//! full-dimensional polytope to its complete, irredundant facet list.
//!
//! The facets of P = conv(V) ⊂ R^d are exactly the extreme rays of the
//! pointed cone C = {(a₀, a) : a₀ + ⟨a, v⟩ ≥ 0 ∀ v ∈ V} ⊂ R^{d+1}: a ray
//! gives the valid inequality −⟨a, x⟩ ≤ a₀. The cone is described by one
//! inequality per vertex, so the classic double description insertion loop
//! applies directly. All arithmetic is over arbitrary-precision integers;
//! rays are gcd-reduced after every combination step.

use num_bigint::BigInt;
use num_integer::Integer;

/// A facet inequality Σ coeffs·x ≤ rhs with integer entries, gcd 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DdFacet {
    pub coeffs: Vec<BigInt>,
    pub rhs: BigInt,
}

struct Ray {
    v: Vec<BigInt>,
    /// Bit r set ⇔ this ray is tight on constraint row r (processed rows only).
    zeros: u128,
}

/// Enumerate the facets of conv(vertices). The vertex set must affinely span
/// R^d (full-dimensional polytope) and contain at most 128 points.
pub fn facet_enumeration(vertices: &[Vec<i64>], dim: usize) -> Vec<DdFacet> {
    assert!(!vertices.is_empty());
    assert!(vertices.len() <= 128, "bitset adjacency limited to 128 vertices");
    assert!(vertices.iter().all(|v| v.len() == dim));
    let cone_dim = dim + 1;
    // constraint rows of the cone: (1, v)
    let rows: Vec<Vec<BigInt>> = vertices
        .iter()
        .map(|v| {
            let mut r = Vec::with_capacity(cone_dim);
            r.push(BigInt::from(1));
            r.extend(v.iter().map(|&x| BigInt::from(x)));
            r
        })
        .collect();

    let basis = independent_rows(&rows, cone_dim);
    assert_eq!(
        basis.len(),
        cone_dim,
        "vertex set does not affinely span the space"
    );

    // Initial rays: scaled columns of the inverse of the basis matrix, so
    // that B·ray_i = |det|·e_i. Each starts tight on all basis rows but one.
    let b: Vec<Vec<BigInt>> = basis.iter().map(|&r| rows[r].clone()).collect();
    let adj = adjugate(&b);
    let det = determinant(&b);
    let sign = if det < BigInt::from(0) { -1 } else { 1 };
    let mut rays: Vec<Ray> = (0..cone_dim)
        .map(|i| {
            let mut v: Vec<BigInt> = (0..cone_dim).map(|j| &adj[j][i] * sign).collect();
            reduce(&mut v);
            let mut zeros = 0u128;
            for (bi, &r) in basis.iter().enumerate() {
                if bi != i {
                    zeros |= 1u128 << r;
                }
            }
            Ray { v, zeros }
        })
        .collect();

    let in_basis = |r: usize| basis.contains(&r);
    for r in 0..rows.len() {
        if in_basis(r) {
            continue;
        }
        rays = insert_constraint(rays, &rows[r], r, cone_dim);
    }

    let mut facets: Vec<DdFacet> = rays
        .into_iter()
        .map(|ray| {
            let rhs = ray.v[0].clone();
            let coeffs: Vec<BigInt> = ray.v[1..].iter().map(|c| -c).collect();
            DdFacet { coeffs, rhs }
        })
        .collect();
    facets.sort_by(|a, b| (&a.rhs, &a.coeffs).cmp(&(&b.rhs, &b.coeffs)));
    facets
}

fn insert_constraint(rays: Vec<Ray>, row: &[BigInt], row_idx: usize, cone_dim: usize) -> Vec<Ray> {
    let zero = BigInt::from(0);
    let signs: Vec<BigInt> = rays.iter().map(|ray| dot(row, &ray.v)).collect();
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut keep: Vec<Ray> = Vec::new();
    let mut kept_zero_sets: Vec<u128> = Vec::new();
    for (mut ray, s) in rays.into_iter().zip(signs.into_iter()) {
        if s > zero {
            plus.push((ray, s));
        } else if s < zero {
            minus.push((ray, s));
        } else {
            ray.zeros |= 1u128 << row_idx;
            kept_zero_sets.push(ray.zeros);
            keep.push(ray);
        }
    }
    if minus.is_empty() {
        for (ray, _) in plus {
            kept_zero_sets.push(ray.zeros);
            keep.push(ray);
        }
        return keep;
    }
    // Adjacency of a (+,−) pair: no third extreme ray is tight on every
    // constraint the pair is jointly tight on. The rank precondition
    // |common zeros| ≥ cone_dim − 2 filters most pairs cheaply.
    let min_common = cone_dim.saturating_sub(2) as u32;
    let all_zero_sets: Vec<u128> = plus
        .iter()
        .map(|(r, _)| r.zeros)
        .chain(minus.iter().map(|(r, _)| r.zeros))
        .chain(kept_zero_sets.iter().copied())
        .collect();
    let mut new_rays = Vec::new();
    for (pi, (rp, sp)) in plus.iter().enumerate() {
        for (mi, (rm, sm)) in minus.iter().enumerate() {
            let common = rp.zeros & rm.zeros;
            if common.count_ones() < min_common {
                continue;
            }
            let adjacent = all_zero_sets
                .iter()
                .enumerate()
                .all(|(oi, &z)| {
                    // skip the pair itself (positions: plus at pi, minus at |plus|+mi)
                    oi == pi || oi == plus.len() + mi || (z & common) != common
                });
            if !adjacent {
                continue;
            }
            // feasible combination tight on the new row: sp·v_m − sm·v_p
            let mut v: Vec<BigInt> = rp
                .v
                .iter()
                .zip(&rm.v)
                .map(|(vp, vm)| sp * vm - sm * vp)
                .collect();
            reduce(&mut v);
            new_rays.push(Ray {
                v,
                zeros: common | (1u128 << row_idx),
            });
        }
    }
    for (ray, _) in plus {
        keep.push(ray);
    }
    keep.extend(new_rays);
    keep
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn reduce(v: &mut [BigInt]) {
    let mut g = BigInt::from(0);
    for x in v.iter() {
        g = g.gcd(x);
    }
    if g > BigInt::from(1) {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
}

/// Greedily selects `target` linearly independent rows (indices).
fn independent_rows(rows: &[Vec<BigInt>], target: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut echelon: Vec<Vec<BigInt>> = Vec::new();
    for (idx, row) in rows.iter().enumerate() {
        if chosen.len() == target {
            break;
        }
        let mut work = row.clone();
        // eliminate against current echelon rows (fraction-free)
        for e in &echelon {
            let lead = e.iter().position(|x| *x != BigInt::from(0)).unwrap();
            if work[lead] == BigInt::from(0) {
                continue;
            }
            let (a, b) = (e[lead].clone(), work[lead].clone());
            for j in 0..work.len() {
                work[j] = &work[j] * &a - &e[j] * &b;
            }
        }
        if work.iter().any(|x| *x != BigInt::from(0)) {
            reduce(&mut work);
            echelon.push(work);
            chosen.push(idx);
        }
    }
    chosen
}

/// Bareiss fraction-free determinant.
fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = BigInt::from(1);
    let mut prev = BigInt::from(1);
    for k in 0..n {
        if a[k][k] == BigInt::from(0) {
            let swap = (k + 1..n).find(|&i| a[i][k] != BigInt::from(0));
            match swap {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::from(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = &num / &prev;
            }
            a[i][k] = BigInt::from(0);
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Classical adjugate via signed minors: adj[i][j] = (−1)^{i+j}·M_ji.
fn adjugate(m: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = m.len();
    let mut adj = vec![vec![BigInt::from(0); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<BigInt>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != i)
                        .map(|c| m[r][c].clone())
                        .collect()
                })
                .collect();
            let det = if minor.is_empty() {
                BigInt::from(1)
            } else {
                determinant(&minor)
            };
            adj[i][j] = if (i + j) % 2 == 0 { det } else { -det };
        }
    }
    adj
}

/// Exact affine rank of a point set (dimension of affine hull + 1 capped):
/// returns the number of affinely independent points found.
pub fn affine_independent_count(points: &[Vec<i64>]) -> usize {
    if points.is_empty() {
        return 0;
    }
    let base = &points[0];
    let diffs: Vec<Vec<BigInt>> = points[1..]
        .iter()
        .map(|p| {
            p.iter()
                .zip(base)
                .map(|(&a, &b)| BigInt::from(a - b))
                .collect()
        })
        .collect();
    if diffs.is_empty() {
        return 1;
    }
    let dim = diffs[0].len();
    independent_rows(&diffs, dim.min(diffs.len())).len() + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_has_four_facets() {
        let vertices = vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]];
        let facets = facet_enumeration(&vertices, 2);
        assert_eq!(facets.len(), 4);
        // each vertex satisfies every facet
        for f in &facets {
            for v in &vertices {
                let lhs: BigInt = f
                    .coeffs
                    .iter()
                    .zip(v)
                    .map(|(c, &x)| c * BigInt::from(x))
                    .sum();
                assert!(lhs <= f.rhs);
            }
        }
    }

    #[test]
    fn triangle_facets() {
        let vertices = vec![vec![0, 0], vec![2, 0], vec![0, 2]];
        let facets = facet_enumeration(&vertices, 2);
        assert_eq!(facets.len(), 3);
    }

    #[test]
    fn cube_3d() {
        let mut vertices = Vec::new();
        for m in 0..8 {
            vertices.push(vec![m & 1, (m >> 1) & 1, (m >> 2) & 1]);
        }
        let facets = facet_enumeration(&vertices, 3);
        assert_eq!(facets.len(), 6);
    }

    #[test]
    fn cross_polytope_3d() {
        // octahedron: 6 vertices, 8 facets
        let mut vertices = Vec::new();
        for d in 0..3 {
            for s in [-1i64, 1] {
                let mut v = vec![0i64; 3];
                v[d] = s;
                vertices.push(v);
            }
        }
        let facets = facet_enumeration(&vertices, 3);
        assert_eq!(facets.len(), 8);
    }

    #[test]
    fn segment_1d() {
        let facets = facet_enumeration(&[vec![0], vec![1]], 1);
        assert_eq!(facets.len(), 2);
    }

    #[test]
    fn affine_rank() {
        let pts = vec![vec![0, 0], vec![1, 0], vec![2, 0]];
        assert_eq!(affine_independent_count(&pts), 2);
        let pts = vec![vec![0, 0], vec![1, 0], vec![0, 1]];
        assert_eq!(affine_independent_count(&pts), 3);
    }

    #[test]
    fn determinant_and_adjugate() {
        let m: Vec<Vec<BigInt>> = vec![
            vec![BigInt::from(2), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(3)],
        ];
        assert_eq!(determinant(&m), BigInt::from(5));
        let adj = adjugate(&m);
        // M · adj = det · I
        for i in 0..2 {
            for j in 0..2 {
                let s: BigInt = (0..2).map(|k| &m[i][k] * &adj[k][j]).sum();
                let want = if i == j { BigInt::from(5) } else { BigInt::from(0) };
                assert_eq!(s, want);
            }
        }
    }
}
