//! Filtered simplicial complexes over point clouds.
//!
//! A [`Filtration`] is the ordered list of simplices whose growth persistent
//! homology tracks: faces before cofaces, values nondecreasing along faces.
//! Two builders are provided. [`build_rips`] constructs the Vietoris-Rips
//! filtration and doubles as an independently checkable oracle for small
//! instances; [`build_alpha`] constructs the 3D alpha filtration on top of a
//! Delaunay tetrahedralization and is the backend meant for real clouds.

mod alpha;
mod delaunay;
mod predicates;

pub use alpha::build_alpha;
pub use delaunay::{delaunay3d, TetMesh};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::pointcloud::PointCloud;

/// Hard ceiling on how many simplices a Rips build may produce.
pub const DEFAULT_SIMPLEX_CAP: usize = 50_000_000;

const NO_VERTEX: u32 = u32::MAX;

/// A simplex of dimension 0..=3 with its filtration value.
///
/// Vertices are stored strictly increasing, so the vertex list is a unique
/// key for the simplex within one filtration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simplex {
    verts: [u32; 4],
    dim: u8,
    pub value: f64,
}

impl Simplex {
    pub fn new(vertices: &[u32], value: f64) -> Result<Self> {
        if vertices.is_empty() || vertices.len() > 4 {
            return Err(Error::Argument(format!(
                "simplex must have 1..=4 vertices, got {}",
                vertices.len()
            )));
        }
        if !vertices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Argument(format!(
                "simplex vertices must be strictly increasing, got {vertices:?}"
            )));
        }
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::Argument(format!(
                "filtration value must be finite and >= 0, got {value}"
            )));
        }
        let mut verts = [NO_VERTEX; 4];
        verts[..vertices.len()].copy_from_slice(vertices);
        Ok(Simplex {
            verts,
            dim: (vertices.len() - 1) as u8,
            value,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn vertices(&self) -> &[u32] {
        &self.verts[..=self.dim as usize]
    }

    /// Unique lookup key: the padded vertex array.
    pub(crate) fn key(&self) -> [u32; 4] {
        self.verts
    }

    /// Keys of the (dim-1)-faces; empty for vertices.
    pub(crate) fn facet_keys(&self) -> Vec<[u32; 4]> {
        let d = self.dim as usize;
        if d == 0 {
            return Vec::new();
        }
        let vs = self.vertices();
        (0..=d)
            .map(|skip| {
                let mut key = [NO_VERTEX; 4];
                let mut w = 0;
                for (i, &v) in vs.iter().enumerate() {
                    if i != skip {
                        key[w] = v;
                        w += 1;
                    }
                }
                key
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiltrationBackend {
    Rips,
    Alpha,
}

impl FiltrationBackend {
    pub fn as_str(&self) -> &'static str {
        match self {
            FiltrationBackend::Rips => "rips",
            FiltrationBackend::Alpha => "alpha",
        }
    }
}

impl std::str::FromStr for FiltrationBackend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rips" => Ok(FiltrationBackend::Rips),
            "alpha" => Ok(FiltrationBackend::Alpha),
            other => Err(Error::Argument(format!("unknown backend {other:?}"))),
        }
    }
}

/// What a filtration value means: plain Euclidean distance (Rips) or
/// squared circumradius of the smallest empty circumscribing ball (alpha).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueConvention {
    Distance,
    SquaredCircumradius,
}

impl ValueConvention {
    pub fn as_str(&self) -> &'static str {
        match self {
            ValueConvention::Distance => "distance",
            ValueConvention::SquaredCircumradius => "squared_circumradius",
        }
    }
}

impl std::str::FromStr for ValueConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distance" => Ok(ValueConvention::Distance),
            "squared_circumradius" => Ok(ValueConvention::SquaredCircumradius),
            other => Err(Error::Argument(format!("unknown value convention {other:?}"))),
        }
    }
}

/// A filtered simplicial complex: simplices sorted by
/// (value, dimension, lexicographic vertices), faces before cofaces.
#[derive(Debug, Clone)]
pub struct Filtration {
    pub simplices: Vec<Simplex>,
    pub backend: FiltrationBackend,
    pub convention: ValueConvention,
    /// Number of exact duplicate input points merged away (alpha only).
    pub duplicates_merged: usize,
}

impl Filtration {
    pub(crate) fn assemble(
        mut simplices: Vec<Simplex>,
        backend: FiltrationBackend,
        convention: ValueConvention,
        duplicates_merged: usize,
    ) -> Filtration {
        simplices.sort_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then(a.dim.cmp(&b.dim))
                .then(a.verts.cmp(&b.verts))
        });
        Filtration {
            simplices,
            backend,
            convention,
            duplicates_merged,
        }
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Checks the structural invariant: every face of every simplex appears
    /// at an earlier position with a value no larger than the coface's.
    pub fn validate(&self) -> Result<()> {
        let mut seen: HashMap<[u32; 4], (usize, f64)> = HashMap::with_capacity(self.len());
        for (pos, s) in self.simplices.iter().enumerate() {
            for fk in s.facet_keys() {
                match seen.get(&fk) {
                    Some(&(fpos, fval)) => {
                        debug_assert!(fpos < pos);
                        if fval > s.value {
                            return Err(Error::Contract(format!(
                                "face value {fval} exceeds coface value {} at position {pos}",
                                s.value
                            )));
                        }
                    }
                    None => {
                        return Err(Error::Contract(format!(
                            "simplex {:?} at position {pos} has a missing or later face {:?}",
                            s.vertices(),
                            &fk[..s.dim as usize]
                        )));
                    }
                }
            }
            if seen.insert(s.key(), (pos, s.value)).is_some() {
                return Err(Error::Contract(format!(
                    "duplicate simplex {:?} at position {pos}",
                    s.vertices()
                )));
            }
        }
        Ok(())
    }

    /// Debug dump: one simplex per line, "dim value v0 v1 ...", stored order.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        for s in &self.simplices {
            out.push_str(&format!("{} {}", s.dim(), s.value));
            for v in s.vertices() {
                out.push_str(&format!(" {v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Threshold for the Rips filtration: a fixed radius, or the cloud diameter
/// (which makes the final complex complete).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RipsThreshold {
    Value(f64),
    Diameter,
}

/// Builds the Vietoris-Rips filtration up to `max_dim` (<= 3). Vertices
/// enter at 0, edges at their Euclidean length, higher simplices at the
/// maximum of their edge values.
///
/// Intended for small instances; the number of simplices grows as
/// n^(max_dim+1) and the build aborts with a resource error beyond
/// `simplex_cap`.
pub fn build_rips(
    cloud: &PointCloud,
    max_dim: usize,
    threshold: RipsThreshold,
    simplex_cap: usize,
) -> Result<Filtration> {
    if max_dim > 3 {
        return Err(Error::Argument(format!(
            "rips max_dim must be <= 3, got {max_dim}"
        )));
    }
    if cloud.is_empty() {
        return Err(Error::EmptyCloud(cloud.id.clone()));
    }
    let n = cloud.points.len();
    let threshold = match threshold {
        RipsThreshold::Value(t) => {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Argument(format!(
                    "rips threshold must be a positive real, got {t}"
                )));
            }
            t
        }
        RipsThreshold::Diameter => {
            let mut max = 0.0f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    max = max.max(cloud.points[i].dist(&cloud.points[j]));
                }
            }
            max
        }
    };

    let cap_guard = |count: usize| -> Result<()> {
        if count > simplex_cap {
            Err(Error::Resource(format!(
                "rips complex exceeds the cap of {simplex_cap} simplices; \
                 lower max_dim, shrink the threshold, or raise the cap"
            )))
        } else {
            Ok(())
        }
    };

    let mut simplices: Vec<Simplex> = Vec::new();
    for i in 0..n {
        simplices.push(Simplex::new(&[i as u32], 0.0)?);
    }
    cap_guard(simplices.len())?;

    // dist(i, j) for i < j, plus forward adjacency for clique expansion.
    let mut edge_value: HashMap<(u32, u32), f64> = HashMap::new();
    let mut forward: Vec<Vec<u32>> = vec![Vec::new(); n];
    if max_dim >= 1 {
        for i in 0..n {
            for j in (i + 1)..n {
                let d = cloud.points[i].dist(&cloud.points[j]);
                if d <= threshold {
                    let (i, j) = (i as u32, j as u32);
                    edge_value.insert((i, j), d);
                    forward[i as usize].push(j);
                    simplices.push(Simplex::new(&[i, j], d)?);
                }
            }
            cap_guard(simplices.len())?;
        }
    }
    let ev = |a: u32, b: u32| edge_value[&(a.min(b), a.max(b))];

    let mut triangles: Vec<[u32; 3]> = Vec::new();
    if max_dim >= 2 {
        for i in 0..n as u32 {
            for (a, &j) in forward[i as usize].iter().enumerate() {
                for &k in &forward[i as usize][a + 1..] {
                    if edge_value.contains_key(&(j, k)) {
                        let value = ev(i, j).max(ev(i, k)).max(ev(j, k));
                        simplices.push(Simplex::new(&[i, j, k], value)?);
                        triangles.push([i, j, k]);
                    }
                }
            }
            cap_guard(simplices.len())?;
        }
    }

    if max_dim >= 3 {
        for &[i, j, k] in &triangles {
            // Common forward neighbors of all three vertices.
            for &l in &forward[i as usize] {
                if l > k
                    && edge_value.contains_key(&(j, l))
                    && edge_value.contains_key(&(k, l))
                {
                    let value = ev(i, j)
                        .max(ev(i, k))
                        .max(ev(i, l))
                        .max(ev(j, k))
                        .max(ev(j, l))
                        .max(ev(k, l));
                    simplices.push(Simplex::new(&[i, j, k, l], value)?);
                }
            }
            cap_guard(simplices.len())?;
        }
    }

    Ok(Filtration::assemble(
        simplices,
        FiltrationBackend::Rips,
        ValueConvention::Distance,
        0,
    ))
}
