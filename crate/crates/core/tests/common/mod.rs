//! Shared test oracles, independent of the library's reduction path.

#![allow(dead_code)]

use std::collections::HashMap;

use tdacloud_core::filtration::Filtration;
use tdacloud_core::persistence::BirthDeathPair;

/// Reference persistence: plain left-to-right column reduction over the
/// whole boundary matrix, no clearing, no dimension passes. Returns
/// (dim, birth, death) triples with zero-persistence pairs dropped,
/// sorted, with infinite deaths as f64::INFINITY.
pub fn naive_persistence(filtration: &Filtration) -> Vec<(usize, f64, f64)> {
    let simplices = &filtration.simplices;
    let m = simplices.len();
    let mut position: HashMap<[u32; 4], u32> = HashMap::with_capacity(m);
    for (pos, s) in simplices.iter().enumerate() {
        position.insert(padded_key(s.vertices()), pos as u32);
    }

    let mut owner_of_pivot: HashMap<u32, usize> = HashMap::new();
    let mut stored: HashMap<usize, Vec<u32>> = HashMap::new();
    let mut killed: Vec<Option<usize>> = vec![None; m];

    for pos in 0..m {
        let vs = simplices[pos].vertices();
        let mut col: Vec<u32> = if vs.len() == 1 {
            Vec::new()
        } else {
            (0..vs.len())
                .map(|skip| {
                    let facet: Vec<u32> = vs
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    position[&padded_key(&facet)]
                })
                .collect()
        };
        col.sort_unstable();
        loop {
            match col.last().copied() {
                None => break,
                Some(pivot) => match owner_of_pivot.get(&pivot) {
                    Some(&other) => {
                        col = xor(&col, &stored[&other]);
                    }
                    None => {
                        owner_of_pivot.insert(pivot, pos);
                        killed[pivot as usize] = Some(pos);
                        stored.insert(pos, col);
                        break;
                    }
                },
            }
        }
    }

    let mut out = Vec::new();
    for pos in 0..m {
        let dim = simplices[pos].dim();
        let birth = simplices[pos].value;
        match killed[pos] {
            Some(dpos) => {
                let death = simplices[dpos].value;
                // Same numerically-zero-persistence rule as the library.
                if death - birth
                    > tdacloud_core::persistence::ZERO_PERSISTENCE_REL_TOL
                        * death.abs().max(birth.abs())
                {
                    out.push((dim, birth, death));
                }
            }
            None => {
                // Essential iff this simplex's own column reduced to zero,
                // i.e. it never claimed a pivot.
                if !stored.contains_key(&pos) {
                    out.push((dim, birth, f64::INFINITY));
                }
            }
        }
    }
    out.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
    });
    out
}

fn padded_key(vertices: &[u32]) -> [u32; 4] {
    let mut key = [u32::MAX; 4];
    key[..vertices.len()].copy_from_slice(vertices);
    key
}

fn xor(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Betti numbers of the complex formed by the first `prefix` simplices,
/// from dense GF(2) boundary ranks: beta_d = n_d - rank d_d - rank d_(d+1).
pub fn betti_by_rank(filtration: &Filtration, prefix: usize) -> [i64; 3] {
    let simplices = &filtration.simplices[..prefix];
    let mut position: HashMap<[u32; 4], usize> = HashMap::new();
    for (pos, s) in simplices.iter().enumerate() {
        position.insert(padded_key(s.vertices()), pos);
    }

    // Boundary matrix of dimension d: columns indexed by d-simplices, rows
    // by (d-1)-simplices, as u64-packed bit rows per column.
    let rank_of_dim = |d: usize| -> i64 {
        let words = prefix.div_ceil(64);
        let mut cols: Vec<Vec<u64>> = Vec::new();
        for s in simplices.iter().filter(|s| s.dim() == d) {
            let mut col = vec![0u64; words];
            let vs = s.vertices();
            for skip in 0..vs.len() {
                let facet: Vec<u32> = vs
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                let row = position[&padded_key(&facet)];
                col[row / 64] ^= 1u64 << (row % 64);
            }
            cols.push(col);
        }
        // Gaussian elimination over GF(2).
        let mut rank = 0i64;
        let mut basis: Vec<Vec<u64>> = Vec::new();
        for mut col in cols {
            loop {
                let lead = col
                    .iter()
                    .enumerate()
                    .rev()
                    .find(|(_, &w)| w != 0)
                    .map(|(i, &w)| i * 64 + 63 - w.leading_zeros() as usize);
                match lead {
                    None => break,
                    Some(l) => {
                        if let Some(b) = basis.iter().find(|b| leading(b) == Some(l)) {
                            for (c, bw) in col.iter_mut().zip(b.iter()) {
                                *c ^= bw;
                            }
                        } else {
                            basis.push(col);
                            rank += 1;
                            break;
                        }
                    }
                }
            }
        }
        rank
    };

    let count = |d: usize| simplices.iter().filter(|s| s.dim() == d).count() as i64;
    let mut betti = [0i64; 3];
    for d in 0..3 {
        let rank_d = if d == 0 { 0 } else { rank_of_dim(d) };
        let rank_up = rank_of_dim(d + 1);
        betti[d] = count(d) - rank_d - rank_up;
    }
    betti
}

fn leading(col: &[u64]) -> Option<usize> {
    col.iter()
        .enumerate()
        .rev()
        .find(|(_, &w)| w != 0)
        .map(|(i, &w)| i * 64 + 63 - w.leading_zeros() as usize)
}

/// Multiset comparison of diagrams with a mixed absolute/relative
/// tolerance; unmatched pairs must be within 2*tol of the diagonal. Greedy
/// nearest matching is fine at test sizes.
pub fn diagrams_match(a: &[BirthDeathPair], b: &[BirthDeathPair], tol_abs: f64, tol_rel: f64) -> bool {
    let close = |x: f64, y: f64| -> bool {
        (x - y).abs() <= tol_abs + tol_rel * x.abs().max(y.abs())
    };
    let mut used = vec![false; b.len()];
    let mut leftovers_a = Vec::new();
    for pa in a {
        let mut found = false;
        for (j, pb) in b.iter().enumerate() {
            if !used[j] && close(pa.birth, pb.birth) && close(pa.death, pb.death) {
                used[j] = true;
                found = true;
                break;
            }
        }
        if !found {
            leftovers_a.push(pa);
        }
    }
    let near_diagonal = |p: &BirthDeathPair| -> bool {
        (p.death - p.birth).abs() <= 2.0 * (tol_abs + tol_rel * p.death.abs())
    };
    leftovers_a.iter().all(|p| near_diagonal(p))
        && b.iter()
            .zip(&used)
            .filter(|(_, &u)| !u)
            .all(|(p, _)| near_diagonal(p))
}

/// Sorted (dim, persistence) view of the finite pairs, descending
/// persistence, for dominance checks.
pub fn persistences_desc(
    pset: &tdacloud_core::persistence::PersistenceSet,
    dim: usize,
) -> Vec<f64> {
    let mut v: Vec<f64> = pset
        .finite_pairs(dim)
        .map(|p| p.death - p.birth)
        .collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}
