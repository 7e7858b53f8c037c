//! Alpha filtration of a 3D point cloud.
//!
//! The simplices are the Delaunay tetrahedra and all of their faces. Each
//! simplex enters at the squared radius of its smallest empty circumscribing
//! ball: tetrahedra get their squared circumradius, and each lower face
//! either keeps its own squared circumradius (when its circumsphere is
//! empty, the Gabriel case) or inherits the minimum over its cofacets. The
//! assignment runs top-down by dimension, followed by a clamp pass that
//! pins the face <= coface invariant exactly in floating point.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::filtration::delaunay::delaunay3d;
use crate::filtration::predicates::{circumsphere_edge, circumsphere_tet, circumsphere_tri};
use crate::filtration::{Filtration, FiltrationBackend, Simplex, ValueConvention};
use crate::pointcloud::PointCloud;

const NO_VERTEX: u32 = u32::MAX;

/// Builds the 3D alpha filtration of the cloud (squared-circumradius
/// convention). Fails with a degenerate-input error on coplanar/collinear
/// clouds; callers should use the Rips backend for those.
pub fn build_alpha(cloud: &PointCloud) -> Result<Filtration> {
    let mesh = delaunay3d(&cloud.points)?;
    let pts = &mesh.points;

    // Enumerate the simplices of the Delaunay complex, dim 3 down to 1.
    let mut by_dim: [Vec<[u32; 4]>; 4] = Default::default();
    by_dim[3] = mesh.tetrahedra.iter().map(|t| *t).collect();
    let mut seen: HashMap<[u32; 4], ()> = HashMap::new();
    for dim in (1..=2).rev() {
        seen.clear();
        let parents: Vec<[u32; 4]> = by_dim[dim + 1].clone();
        for parent in parents {
            for facet in facet_keys(&parent, dim + 1) {
                if seen.insert(facet, ()).is_none() {
                    by_dim[dim].push(facet);
                }
            }
        }
        by_dim[dim].sort_unstable();
    }

    let point = |v: u32| &pts[v as usize];
    let own_value = |key: &[u32; 4], dim: usize| -> Option<f64> {
        match dim {
            3 => circumsphere_tet(point(key[0]), point(key[1]), point(key[2]), point(key[3]))
                .map(|(_, r2)| r2),
            2 => circumsphere_tri(point(key[0]), point(key[1]), point(key[2])).map(|(_, r2)| r2),
            1 => Some(circumsphere_edge(point(key[0]), point(key[1])).1),
            _ => Some(0.0),
        }
    };
    // Non-Gabriel: the opposite vertex lies inside the facet's circumsphere.
    let non_gabriel = |facet: &[u32; 4], dim: usize, opposite: u32| -> bool {
        let sphere = match dim {
            2 => circumsphere_tri(point(facet[0]), point(facet[1]), point(facet[2])),
            1 => Some(circumsphere_edge(point(facet[0]), point(facet[1]))),
            _ => None,
        };
        match sphere {
            Some((center, r2)) => {
                let d = point(opposite).sub(&center);
                d.dot(&d) < r2
            }
            // Numerically flat facet: treat as non-Gabriel so it inherits
            // from its cofacets.
            None => true,
        }
    };

    let mut values: HashMap<[u32; 4], f64> = HashMap::new();
    for dim in (1..=3).rev() {
        for key in &by_dim[dim] {
            let value = match values.get(key) {
                Some(&v) => v,
                None => {
                    let v = own_value(key, dim).ok_or_else(|| {
                        Error::Contract(format!(
                            "degenerate simplex {key:?} in the Delaunay complex"
                        ))
                    })?;
                    values.insert(*key, v);
                    v
                }
            };
            if dim == 1 {
                continue;
            }
            for facet in facet_keys(key, dim) {
                match values.get(&facet) {
                    Some(&fv) => {
                        if value < fv {
                            values.insert(facet, value);
                        }
                    }
                    None => {
                        let opposite = key
                            .iter()
                            .take(dim + 1)
                            .copied()
                            .find(|v| !facet.contains(v))
                            .expect("facet omits one vertex");
                        if non_gabriel(&facet, dim - 1, opposite) {
                            values.insert(facet, value);
                        }
                    }
                }
            }
        }
    }
    // Clamp pass: enforce face <= coface exactly, independent of the
    // iteration order above.
    for dim in (2..=3).rev() {
        for key in &by_dim[dim] {
            let value = values[key];
            for facet in facet_keys(key, dim) {
                let fv = values.get_mut(&facet).expect("facet assigned");
                if value < *fv {
                    *fv = value;
                }
            }
        }
    }

    let mut simplices: Vec<Simplex> = Vec::with_capacity(
        pts.len() + by_dim[1].len() + by_dim[2].len() + by_dim[3].len(),
    );
    for v in 0..pts.len() as u32 {
        simplices.push(Simplex::new(&[v], 0.0)?);
    }
    for dim in 1..=3 {
        for key in &by_dim[dim] {
            simplices.push(Simplex::new(&key[..=dim], values[key])?);
        }
    }
    Ok(Filtration::assemble(
        simplices,
        FiltrationBackend::Alpha,
        ValueConvention::SquaredCircumradius,
        mesh.duplicates_merged,
    ))
}

/// Facet keys of a padded simplex key of dimension `dim`.
fn facet_keys(key: &[u32; 4], dim: usize) -> Vec<[u32; 4]> {
    (0..=dim)
        .map(|skip| {
            let mut out = [NO_VERTEX; 4];
            let mut w = 0;
            for (i, &v) in key[..=dim].iter().enumerate() {
                if i != skip {
                    out[w] = v;
                    w += 1;
                }
            }
            out
        })
        .collect()
}
