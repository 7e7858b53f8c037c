//! Persistent homology of a filtration by boundary-matrix reduction.
//!
//! Columns are GF(2) boundary vectors stored as sorted position lists.
//! Reduction runs top-down by dimension with the clearing (twist)
//! optimization: once a column of dimension d pairs with a pivot, the
//! pivot's own column in dimension d-1 is known to reduce to zero and is
//! skipped. Creators that never become pivots yield infinite-death pairs.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::filtration::{Filtration, ValueConvention};

/// Pairs whose persistence is this small relative to their values are
/// treated as zero-persistence and dropped: they arise when floating point
/// breaks what exact arithmetic would leave as a tie.
pub const ZERO_PERSISTENCE_REL_TOL: f64 = 1e-12;

/// A feature of homology dimension `dim` born at `birth` and dying at
/// `death` (`f64::INFINITY` for essential classes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BirthDeathPair {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

impl BirthDeathPair {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_finite(&self) -> bool {
        self.death.is_finite()
    }
}

/// Birth-death pairs per homology dimension 0..=2, zero-persistence pairs
/// dropped, each list sorted by (birth, death).
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceSet {
    pub by_dim: [Vec<BirthDeathPair>; 3],
    pub convention: ValueConvention,
}

impl PersistenceSet {
    pub fn pairs(&self, dim: usize) -> &[BirthDeathPair] {
        &self.by_dim[dim]
    }

    pub fn finite_pairs(&self, dim: usize) -> impl Iterator<Item = &BirthDeathPair> {
        self.by_dim[dim].iter().filter(|p| p.is_finite())
    }
}

/// The diagram chosen to represent a cloud: the highest homology dimension
/// (starting from 2) whose finite pair count reaches 2, falling back to
/// dimension 0. Infinite-death pairs are stripped.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedDiagram {
    pub dim: usize,
    pub pairs: Vec<BirthDeathPair>,
}

impl SelectedDiagram {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Computes persistence pairs of a valid filtration for homology dimensions
/// 0..=`max_hom_dim`.
pub fn compute_persistence(filtration: &Filtration, max_hom_dim: usize) -> Result<PersistenceSet> {
    if max_hom_dim > 2 {
        return Err(Error::Argument(format!(
            "max_hom_dim must be <= 2, got {max_hom_dim}"
        )));
    }
    filtration.validate()?;

    let simplices = &filtration.simplices;
    let m = simplices.len();
    let mut position: HashMap<[u32; 4], u32> = HashMap::with_capacity(m);
    for (pos, s) in simplices.iter().enumerate() {
        position.insert(s.key(), pos as u32);
    }
    let boundary = |pos: usize| -> Vec<u32> {
        let mut col: Vec<u32> = simplices[pos]
            .facet_keys()
            .iter()
            .map(|k| position[k])
            .collect();
        col.sort_unstable();
        col
    };

    let max_complex_dim = simplices.iter().map(|s| s.dim()).max().unwrap_or(0);
    // destroyer_of[creator] = destroyer position; cleared marks creators
    // paired during a higher-dimensional pass (their own column is skipped).
    let mut destroyer_of: Vec<Option<u32>> = vec![None; m];
    let mut cleared = vec![false; m];
    let mut creator = vec![false; m];
    for pos in 0..m {
        if simplices[pos].dim() == 0 {
            creator[pos] = true;
        }
    }

    for dim in (1..=max_complex_dim).rev() {
        // Reduced columns of this dimension that own a pivot.
        let mut owned: HashMap<u32, Vec<u32>> = HashMap::new();
        for pos in 0..m {
            if simplices[pos].dim() != dim || cleared[pos] {
                continue;
            }
            let mut col = boundary(pos);
            loop {
                match col.last() {
                    None => {
                        creator[pos] = true;
                        break;
                    }
                    Some(&pivot) => match owned.get(&pivot) {
                        Some(other) => col = xor_columns(&col, other),
                        None => {
                            destroyer_of[pivot as usize] = Some(pos as u32);
                            cleared[pivot as usize] = true;
                            owned.insert(pivot, col);
                            break;
                        }
                    },
                }
            }
        }
    }

    let mut by_dim: [Vec<BirthDeathPair>; 3] = Default::default();
    for pos in 0..m {
        let dim = simplices[pos].dim();
        if dim > max_hom_dim {
            continue;
        }
        let birth = simplices[pos].value;
        if let Some(dpos) = destroyer_of[pos] {
            let death = simplices[dpos as usize].value;
            if death - birth > ZERO_PERSISTENCE_REL_TOL * death.abs().max(birth.abs()) {
                by_dim[dim].push(BirthDeathPair { dim, birth, death });
            }
        } else if creator[pos] {
            by_dim[dim].push(BirthDeathPair {
                dim,
                birth,
                death: f64::INFINITY,
            });
        }
    }
    for list in &mut by_dim {
        list.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.death.total_cmp(&b.death)));
    }
    Ok(PersistenceSet {
        by_dim,
        convention: filtration.convention,
    })
}

fn xor_columns(a: &[u32], b: &[u32]) -> Vec<u32> {
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

/// Applies the dimension-fallback rule: strip infinite pairs, then take
/// dimension 2 if it has at least 2 finite pairs, else dimension 1 under
/// the same test, else dimension 0.
pub fn select_diagram(pset: &PersistenceSet) -> SelectedDiagram {
    for dim in [2usize, 1] {
        let finite: Vec<BirthDeathPair> = pset.finite_pairs(dim).copied().collect();
        if finite.len() >= 2 {
            return SelectedDiagram { dim, pairs: finite };
        }
    }
    SelectedDiagram {
        dim: 0,
        pairs: pset.finite_pairs(0).copied().collect(),
    }
}

/// CSV dump: header "dim,birth,death", one row per pair, dimensions
/// ascending, infinite deaths rendered as "inf".
pub fn diagram_to_csv(pset: &PersistenceSet) -> String {
    let mut out = String::from("dim,birth,death\n");
    for dim in 0..3 {
        for p in pset.pairs(dim) {
            let death = if p.death.is_finite() {
                format!("{}", p.death)
            } else {
                "inf".to_string()
            };
            out.push_str(&format!("{},{},{}\n", dim, p.birth, death));
        }
    }
    out
}
