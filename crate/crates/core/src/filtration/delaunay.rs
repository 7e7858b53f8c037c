//! Incremental 3D Delaunay tetrahedralization.
//!
//! Bowyer-Watson insertion with a walking point locator. The convex hull is
//! closed off with ghost tetrahedra sharing a symbolic vertex at infinity,
//! so every face always has a neighbor and hull growth needs no special
//! casing. All orientation and in-sphere decisions use exact predicate
//! signs; a point in exactly degenerate position (cospherical or coplanar
//! ties that exact arithmetic cannot order) aborts the build, which is then
//! retried on a deterministically perturbed copy of the input. Inputs whose
//! affine hull is not 3-dimensional are rejected outright.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::filtration::predicates::{collinear, insphere_sign, orient_sign};
use crate::pointcloud::Point3;

/// Symbolic vertex at infinity.
const GHOST: u32 = u32::MAX;

/// Face opposite each tetrahedron slot, ordered so the face's positive
/// orientation side contains the opposite vertex.
const FACES: [[usize; 3]; 4] = [[1, 3, 2], [0, 2, 3], [0, 3, 1], [0, 1, 2]];

/// A Delaunay tetrahedralization over deduplicated input points.
#[derive(Debug, Clone)]
pub struct TetMesh {
    /// The points the mesh is built on, in first-seen order after exact
    /// deduplication. When tie-breaking perturbation was needed these are
    /// the perturbed coordinates, so the mesh is always self-consistent.
    pub points: Vec<Point3>,
    /// Finite tetrahedra with ascending vertex indices into `points`.
    pub tetrahedra: Vec<[u32; 4]>,
    /// Exact duplicate input points merged before triangulating.
    pub duplicates_merged: usize,
    /// True when exact degeneracies forced the tie-breaking perturbation.
    pub perturbation_applied: bool,
}

/// Computes the Delaunay tetrahedralization of `points`.
///
/// Exact duplicates are merged first. Fails with a degenerate-input error
/// when the points are all coplanar or collinear (callers should fall back
/// to the Rips backend for such clouds).
pub fn delaunay3d(points: &[Point3]) -> Result<TetMesh> {
    let (unique, duplicates_merged) = dedup_points(points);
    if unique.len() < 4 {
        return Err(Error::Degenerate(format!(
            "3D Delaunay needs at least 4 distinct points, got {}; use the rips backend",
            unique.len()
        )));
    }
    // Reject inputs that are exactly degenerate as a set: the perturbation
    // below is for breaking ties, not for inventing volume.
    if bootstrap_vertices(&unique).is_none() {
        return Err(Error::Degenerate(
            "all points are coplanar or collinear; use the rips backend".into(),
        ));
    }

    let diag = bbox_diagonal(&unique);
    let mut magnitude = 1e-9 * diag.max(f64::MIN_POSITIVE);
    for attempt in 0..4 {
        let (candidate, perturbed): (Vec<Point3>, bool) = if attempt == 0 {
            (unique.clone(), false)
        } else {
            (perturb(&unique, magnitude), true)
        };
        if attempt > 0 {
            magnitude *= 1024.0;
            if bootstrap_vertices(&candidate).is_none() {
                continue;
            }
        }
        match Triangulation::build(&candidate) {
            Ok(tri) => {
                let tetrahedra = tri.finite_tetrahedra();
                return Ok(TetMesh {
                    points: candidate,
                    tetrahedra,
                    duplicates_merged,
                    perturbation_applied: perturbed,
                });
            }
            Err(Degeneracy) => continue,
        }
    }
    Err(Error::Degenerate(
        "could not resolve degenerate point configuration; use the rips backend".into(),
    ))
}

fn dedup_points(points: &[Point3]) -> (Vec<Point3>, usize) {
    let mut seen: HashMap<(u64, u64, u64), ()> = HashMap::with_capacity(points.len());
    let mut unique = Vec::with_capacity(points.len());
    for p in points {
        let key = (p.x.to_bits(), p.y.to_bits(), p.z.to_bits());
        if seen.insert(key, ()).is_none() {
            unique.push(*p);
        }
    }
    let merged = points.len() - unique.len();
    (unique, merged)
}

fn bbox_diagonal(points: &[Point3]) -> f64 {
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        lo = Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    hi.sub(&lo).norm()
}

/// First four points in general position, index-ordered: the seed
/// tetrahedron for incremental insertion. None if the whole set is flat.
fn bootstrap_vertices(points: &[Point3]) -> Option<[u32; 4]> {
    let i0 = 0u32;
    let i1 = 1u32;
    let i2 = (2..points.len() as u32)
        .find(|&i| !collinear(&points[0], &points[1], &points[i as usize]))?;
    let i3 = (2..points.len() as u32).find(|&i| {
        i != i2
            && orient_sign(
                &points[0],
                &points[1],
                &points[i2 as usize],
                &points[i as usize],
            ) != 0
    })?;
    Some([i0, i1, i2, i3])
}

/// Deterministic index-ordered tie-breaking jitter.
fn perturb(points: &[Point3], magnitude: f64) -> Vec<Point3> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (dx, dy, dz) = hash_offsets(i as u64);
            Point3::new(
                p.x + magnitude * dx,
                p.y + magnitude * dy,
                p.z + magnitude * dz,
            )
        })
        .collect()
}

fn hash_offsets(index: u64) -> (f64, f64, f64) {
    let mut state = index.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut next = || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        // Map to [-1, 1) from the top 53 bits.
        (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    };
    (next(), next(), next())
}

/// Insertion hit an exact tie that cannot be resolved in place; the caller
/// retries on a perturbed copy.
#[derive(Debug)]
struct Degeneracy;

struct Tet {
    v: [u32; 4],
    nbr: [u32; 4],
    alive: bool,
}

impl Tet {
    fn is_ghost(&self) -> bool {
        self.v[3] == GHOST
    }

    fn slot_of_neighbor(&self, t: u32) -> usize {
        self.nbr.iter().position(|&x| x == t).expect("neighbor link")
    }
}

struct Triangulation<'a> {
    pts: &'a [Point3],
    tets: Vec<Tet>,
    recent: u32,
}

impl<'a> Triangulation<'a> {
    fn build(pts: &'a [Point3]) -> std::result::Result<Self, Degeneracy> {
        let seed = bootstrap_vertices(pts).ok_or(Degeneracy)?;
        let mut tri = Triangulation {
            pts,
            tets: Vec::with_capacity(pts.len() * 7),
            recent: 0,
        };
        tri.bootstrap(seed);
        let seeded: Vec<u32> = seed.to_vec();
        for i in 0..pts.len() as u32 {
            if !seeded.contains(&i) {
                tri.insert(i)?;
            }
        }
        Ok(tri)
    }

    fn point(&self, v: u32) -> &Point3 {
        &self.pts[v as usize]
    }

    fn orient(&self, a: u32, b: u32, c: u32, d: u32) -> i8 {
        orient_sign(self.point(a), self.point(b), self.point(c), self.point(d))
    }

    /// Strict conflict: p lies inside the open circumball of a finite
    /// tetrahedron, or strictly beyond the hull face of a ghost.
    fn in_conflict(&self, t: &Tet, p: u32) -> bool {
        if t.is_ghost() {
            // Ghost hull faces are stored with their positive side outward.
            self.orient(t.v[0], t.v[1], t.v[2], p) > 0
        } else {
            insphere_sign(
                self.point(t.v[0]),
                self.point(t.v[1]),
                self.point(t.v[2]),
                self.point(t.v[3]),
                self.point(p),
            ) > 0
        }
    }

    fn bootstrap(&mut self, seed: [u32; 4]) {
        let [a, b, c, d] = seed;
        let v = if self.orient(a, b, c, d) > 0 {
            [a, b, c, d]
        } else {
            [b, a, c, d]
        };
        debug_assert!(self.orient(v[0], v[1], v[2], v[3]) > 0);
        // Finite seed tetrahedron at index 0, four ghosts at 1..=4, ghost i
        // sitting beyond the face opposite slot i.
        self.tets.push(Tet {
            v,
            nbr: [1, 2, 3, 4],
            alive: true,
        });
        for slot in 0..4 {
            let f = FACES[slot].map(|s| v[s]);
            // The stored ghost face is reversed so its positive side points
            // out of the hull.
            self.tets.push(Tet {
                v: [f[0], f[2], f[1], GHOST],
                nbr: [0, 0, 0, 0],
                alive: true,
            });
        }
        for gi in 1..=4usize {
            let mut nbr = [0u32; 4];
            nbr[3] = 0; // hull face back to the finite seed
            for gslot in 0..3 {
                // The ghost face opposite this vertex consists of the other
                // two hull vertices plus GHOST; it is shared with the ghost
                // of the seed face that omits this vertex.
                let gv = self.tets[gi].v[gslot];
                let seed_slot = v.iter().position(|&x| x == gv).unwrap() as u32;
                nbr[gslot] = seed_slot + 1;
            }
            self.tets[gi].nbr = nbr;
        }
        self.recent = 0;
    }

    /// Walks from the most recent tetrahedron to one whose closed region
    /// contains p (finite) or that p is in conflict with (ghost).
    fn locate(&self, p: u32) -> u32 {
        let mut cur = self.recent;
        let mut steps = 0usize;
        let cap = 8 * self.tets.len() + 64;
        'walk: loop {
            steps += 1;
            if steps > cap {
                break;
            }
            let t = &self.tets[cur as usize];
            debug_assert!(t.alive);
            if t.is_ghost() {
                if self.in_conflict(t, p) {
                    return cur;
                }
                cur = t.nbr[3];
                continue;
            }
            for slot in 0..4 {
                let f = FACES[slot].map(|s| t.v[s]);
                if self.orient(f[0], f[1], f[2], p) < 0 {
                    cur = t.nbr[slot];
                    continue 'walk;
                }
            }
            return cur;
        }
        // Degenerate walk; deterministic exhaustive fallback.
        for (i, t) in self.tets.iter().enumerate() {
            if t.alive && self.in_conflict(t, p) {
                return i as u32;
            }
        }
        self.recent
    }

    fn insert(&mut self, p: u32) -> std::result::Result<(), Degeneracy> {
        let start = self.locate(p);
        if !self.in_conflict(&self.tets[start as usize], p) {
            // p duplicates a vertex, lies exactly on a circumsphere, or sits
            // exactly on the hull: ties only the perturbation can order.
            return Err(Degeneracy);
        }

        // Grow the conflict cavity by BFS over strict conflicts.
        let mut cavity: Vec<u32> = vec![start];
        let mut in_cavity: HashMap<u32, bool> = HashMap::new();
        in_cavity.insert(start, true);
        let mut stack = vec![start];
        // Boundary records: (inner tet, slot whose face is on the boundary).
        let mut boundary: Vec<(u32, usize)> = Vec::new();
        while let Some(ti) = stack.pop() {
            for slot in 0..4 {
                let ni = self.tets[ti as usize].nbr[slot];
                let known = in_cavity.get(&ni).copied();
                let conflict = match known {
                    Some(c) => c,
                    None => {
                        let c = self.in_conflict(&self.tets[ni as usize], p);
                        in_cavity.insert(ni, c);
                        if c {
                            cavity.push(ni);
                            stack.push(ni);
                        }
                        c
                    }
                };
                if !conflict {
                    boundary.push((ti, slot));
                }
            }
        }

        // Build one new tetrahedron per boundary face.
        let first_new = self.tets.len() as u32;
        let mut edge_links: HashMap<(u32, u32), Vec<(u32, usize)>> = HashMap::new();
        for &(ti, slot) in &boundary {
            let inner = &self.tets[ti as usize];
            let face = FACES[slot].map(|s| inner.v[s]);
            let outer = inner.nbr[slot];
            let outer_slot = self.tets[outer as usize].slot_of_neighbor(ti);

            let (verts, p_slot) = oriented_with_new_vertex(face, p);
            if verts[3] != GHOST {
                // A finite cell: its positive orientation is exactly the
                // strict visibility of the boundary face from p.
                if self.orient(verts[0], verts[1], verts[2], verts[3]) <= 0 {
                    return Err(Degeneracy);
                }
            }
            let new_idx = self.tets.len() as u32;
            let mut nbr = [u32::MAX; 4];
            nbr[p_slot] = outer;
            self.tets.push(Tet {
                v: verts,
                nbr,
                alive: true,
            });
            self.tets[outer as usize].nbr[outer_slot] = new_idx;

            // Sibling links pair up across cavity-boundary edges: for every
            // face of the new cell that contains p, key on the two other
            // vertices.
            for q_slot in 0..4 {
                if q_slot == p_slot {
                    continue;
                }
                let mut pair: Vec<u32> = (0..4)
                    .filter(|&s| s != q_slot && s != p_slot)
                    .map(|s| verts[s])
                    .collect();
                pair.sort_unstable();
                edge_links
                    .entry((pair[0], pair[1]))
                    .or_default()
                    .push((new_idx, q_slot));
            }
        }

        for (_, links) in edge_links {
            if links.len() != 2 {
                return Err(Degeneracy);
            }
            let (t1, s1) = links[0];
            let (t2, s2) = links[1];
            self.tets[t1 as usize].nbr[s1] = t2;
            self.tets[t2 as usize].nbr[s2] = t1;
        }

        for ti in cavity {
            self.tets[ti as usize].alive = false;
        }
        self.recent = first_new;
        Ok(())
    }

    fn finite_tetrahedra(&self) -> Vec<[u32; 4]> {
        let mut out: Vec<[u32; 4]> = self
            .tets
            .iter()
            .filter(|t| t.alive && !t.is_ghost())
            .map(|t| {
                let mut v = t.v;
                v.sort_unstable();
                v
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Structural health check used by tests: mutual adjacency, positive
    /// orientation of finite cells, outward ghost faces.
    #[cfg(test)]
    fn check_structure(&self) {
        for (i, t) in self.tets.iter().enumerate() {
            if !t.alive {
                continue;
            }
            if !t.is_ghost() {
                assert!(
                    self.orient(t.v[0], t.v[1], t.v[2], t.v[3]) > 0,
                    "tet {i} not positively oriented"
                );
            }
            for slot in 0..4 {
                let ni = t.nbr[slot] as usize;
                assert!(self.tets[ni].alive, "tet {i} points at a dead neighbor");
                let back = self.tets[ni].nbr.iter().filter(|&&b| b == i as u32).count();
                assert_eq!(back, 1, "adjacency between {i} and {ni} is not mutual");
                // Shared face must consist of the same three vertices.
                let mut mine: Vec<u32> = FACES[slot].map(|s| t.v[s]).to_vec();
                let nslot = self.tets[ni].slot_of_neighbor(i as u32);
                let mut theirs: Vec<u32> = FACES[nslot].map(|s| self.tets[ni].v[s]).to_vec();
                mine.sort_unstable();
                theirs.sort_unstable();
                assert_eq!(mine, theirs, "face mismatch between {i} and {ni}");
            }
            if t.is_ghost() {
                let fin = &self.tets[t.nbr[3] as usize];
                assert!(!fin.is_ghost(), "ghost {i} must face a finite tet");
                let apex = fin.v[fin.slot_of_neighbor(i as u32)];
                assert!(
                    self.orient(t.v[0], t.v[1], t.v[2], apex) < 0,
                    "ghost {i} hull face does not point outward"
                );
            }
        }
    }
}

/// Appends `p` to an oriented face triple, normalizing any GHOST vertex to
/// slot 3 while preserving the tuple's orientation class (each swap flips
/// orientation, so an odd number of swaps is compensated by swapping the
/// first two finite slots). Returns the vertex array and the slot of `p`.
fn oriented_with_new_vertex(face: [u32; 3], p: u32) -> ([u32; 4], usize) {
    let mut v = [face[0], face[1], face[2], p];
    let mut p_slot = 3;
    if let Some(g) = v.iter().position(|&x| x == GHOST) {
        if g != 3 {
            v.swap(g, 3);
            p_slot = g;
            // One transposition flipped orientation; swap two slots that
            // hold neither p nor GHOST to flip it back.
            let (s1, s2) = match p_slot {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            v.swap(s1, s2);
        }
    }
    (v, p_slot)
}
