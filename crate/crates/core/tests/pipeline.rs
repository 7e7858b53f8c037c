//! Cross-module properties: reduction equivalence against the naive
//! reference, rank-oracle consistency, isometry invariance, scaling
//! equivariance, and end-to-end retrieval behavior.

mod common;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tdacloud_core::filtration::{
    build_alpha, build_rips, RipsThreshold, DEFAULT_SIMPLEX_CAP,
};
use tdacloud_core::index::{build_index, query, PipelineConfig};
use tdacloud_core::persistence::{compute_persistence, select_diagram, BirthDeathPair};
use tdacloud_core::pointcloud::{synth_shape, Point3, PointCloud, SynthShape, Z_AXIS};

fn random_cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            Point3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )
        })
        .collect();
    PointCloud::new(format!("rand{seed}"), points).unwrap()
}

fn all_pairs(pset: &tdacloud_core::persistence::PersistenceSet) -> Vec<(usize, f64, f64)> {
    let mut out = Vec::new();
    for dim in 0..3 {
        for p in pset.pairs(dim) {
            out.push((dim, p.birth, p.death));
        }
    }
    out.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
    });
    out
}

#[test]
fn reduction_matches_naive_reference_on_random_clouds() {
    for seed in 0..50u64 {
        let n = 4 + (seed as usize % 9); // 4..=12 points
        let cloud = random_cloud(n, seed);
        let f = build_rips(&cloud, 3, RipsThreshold::Diameter, DEFAULT_SIMPLEX_CAP).unwrap();
        let fast = compute_persistence(&f, 2).unwrap();
        let reference: Vec<(usize, f64, f64)> = common::naive_persistence(&f)
            .into_iter()
            .filter(|&(dim, _, _)| dim <= 2)
            .collect();
        assert_eq!(
            all_pairs(&fast),
            reference,
            "reduction mismatch on seed {seed} (n={n})"
        );
    }
}

#[test]
fn betti_numbers_match_rank_oracle_at_value_boundaries() {
    // Zero-persistence pairs are dropped from diagrams, so alive-class
    // counts are only well-defined where the filtration value strictly
    // increases; compare at exactly those prefixes.
    for seed in [1u64, 5, 9] {
        let cloud = random_cloud(5, seed);
        let f = build_rips(&cloud, 3, RipsThreshold::Diameter, DEFAULT_SIMPLEX_CAP).unwrap();
        assert!(f.len() <= 50, "keep the rank oracle cheap");
        let pset = compute_persistence(&f, 2).unwrap();
        for prefix in 1..=f.len() {
            let threshold = f.simplices[prefix - 1].value;
            let is_boundary =
                prefix == f.len() || f.simplices[prefix].value > threshold;
            if !is_boundary {
                continue;
            }
            let betti = common::betti_by_rank(&f, prefix);
            for dim in 0..3 {
                let alive = pset
                    .pairs(dim)
                    .iter()
                    .filter(|p| p.birth <= threshold && threshold < p.death)
                    .count() as i64;
                assert_eq!(
                    alive, betti[dim],
                    "dim {dim} mismatch at prefix {prefix} (value {threshold}) seed {seed}"
                );
            }
        }
    }
}

#[test]
fn isometry_invariance_of_filtration_values() {
    let axis = {
        let v = Point3::new(0.3, -0.5, 0.81);
        v.mul(1.0 / v.norm())
    };
    for seed in [2u64, 7] {
        let cloud = random_cloud(40, seed);
        let moved = cloud
            .rotate(axis, 73.0)
            .unwrap()
            .translate(Point3::new(0.2, 0.2, 0.1))
            .unwrap();
        for (a, b) in [
            (
                build_rips(&cloud, 2, RipsThreshold::Diameter, DEFAULT_SIMPLEX_CAP).unwrap(),
                build_rips(&moved, 2, RipsThreshold::Diameter, DEFAULT_SIMPLEX_CAP).unwrap(),
            ),
            (build_alpha(&cloud).unwrap(), build_alpha(&moved).unwrap()),
        ] {
            let mut va: Vec<(usize, f64)> = a.simplices.iter().map(|s| (s.dim(), s.value)).collect();
            let mut vb: Vec<(usize, f64)> = b.simplices.iter().map(|s| (s.dim(), s.value)).collect();
            va.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
            vb.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
            assert_eq!(va.len(), vb.len());
            for (x, y) in va.iter().zip(&vb) {
                assert_eq!(x.0, y.0);
                assert!(
                    (x.1 - y.1).abs() <= 1e-9 * x.1.abs().max(1.0),
                    "value drift {} vs {}",
                    x.1,
                    y.1
                );
            }
        }
    }
}

#[test]
fn persistence_is_isometry_invariant_end_to_end() {
    let cloud = synth_shape(SynthShape::Torus { major: 1.0, minor: 0.3 }, 400, 3).unwrap();
    let moved = cloud
        .rotate(Z_AXIS, 45.0)
        .unwrap()
        .translate(Point3::new(0.2, 0.2, 0.1))
        .unwrap();
    let pa = compute_persistence(&build_alpha(&cloud).unwrap(), 2).unwrap();
    let pb = compute_persistence(&build_alpha(&moved).unwrap(), 2).unwrap();
    for dim in 0..3 {
        let a: Vec<BirthDeathPair> = pa.finite_pairs(dim).copied().collect();
        let b: Vec<BirthDeathPair> = pb.finite_pairs(dim).copied().collect();
        assert!(
            common::diagrams_match(&a, &b, 1e-9, 1e-9),
            "dim {dim} diagrams diverge under isometry"
        );
    }
}

#[test]
fn scaling_equivariance_rips_linear_alpha_squared() {
    for &s in &[0.95f64, 1.05] {
        let cloud = random_cloud(30, 11);
        let scaled = cloud.scale(s).unwrap();

        let pa = compute_persistence(
            &build_rips(&cloud, 2, RipsThreshold::Diameter, DEFAULT_SIMPLEX_CAP).unwrap(),
            2,
        )
        .unwrap();
        let pb = compute_persistence(
            &build_rips(&scaled, 2, RipsThreshold::Diameter, DEFAULT_SIMPLEX_CAP).unwrap(),
            2,
        )
        .unwrap();
        for dim in 0..3 {
            let mapped: Vec<BirthDeathPair> = pa
                .finite_pairs(dim)
                .map(|p| BirthDeathPair {
                    dim,
                    birth: p.birth * s,
                    death: p.death * s,
                })
                .collect();
            let b: Vec<BirthDeathPair> = pb.finite_pairs(dim).copied().collect();
            assert!(
                common::diagrams_match(&mapped, &b, 1e-12, 1e-9),
                "rips dim {dim} not linear under scale {s}"
            );
        }

        let cloud = synth_shape(SynthShape::Sphere { radius: 0.8 }, 150, 4).unwrap();
        let scaled = cloud.scale(s).unwrap();
        let pa = compute_persistence(&build_alpha(&cloud).unwrap(), 2).unwrap();
        let pb = compute_persistence(&build_alpha(&scaled).unwrap(), 2).unwrap();
        for dim in 0..3 {
            let mapped: Vec<BirthDeathPair> = pa
                .finite_pairs(dim)
                .map(|p| BirthDeathPair {
                    dim,
                    birth: p.birth * s * s,
                    death: p.death * s * s,
                })
                .collect();
            let b: Vec<BirthDeathPair> = pb.finite_pairs(dim).copied().collect();
            assert!(
                common::diagrams_match(&mapped, &b, 1e-12, 1e-9),
                "alpha dim {dim} not quadratic under scale {s}"
            );
        }
    }
}

#[test]
fn rotated_and_translated_queries_rank_their_source_first() {
    let mut clouds = Vec::new();
    for i in 0..6u64 {
        let mut c = synth_shape(
            SynthShape::Sphere { radius: 0.3 + 0.2 * i as f64 },
            200,
            i,
        )
        .unwrap();
        c.id = format!("s{i}");
        clouds.push(c);
    }
    for i in 0..4u64 {
        let mut c = synth_shape(
            SynthShape::Torus { major: 0.5 + 0.35 * i as f64, minor: 0.1 + 0.06 * i as f64 },
            300,
            20 + i,
        )
        .unwrap();
        c.id = format!("t{i}");
        clouds.push(c);
    }
    let config = PipelineConfig {
        normalize: false,
        downsample: 1000,
        ..PipelineConfig::default()
    };
    let (index, report) = build_index(&clouds, &config).unwrap();
    assert_eq!(report.skipped_count(), 0);
    for cloud in &clouds {
        for degrees in [45.0, 90.0, 135.0] {
            let q = cloud.rotate(Z_AXIS, degrees).unwrap();
            let (res, _) = query(&index, &q, 1).unwrap();
            assert_eq!(res.top().unwrap().0, cloud.id, "rotation {degrees}");
        }
        let q = cloud.translate(Point3::new(0.2, 0.2, 0.1)).unwrap();
        let (res, _) = query(&index, &q, 1).unwrap();
        assert_eq!(res.top().unwrap().0, cloud.id, "translation");
    }
}

#[test]
fn translated_queries_survive_normalization_pipeline() {
    // With normalization on, centering cancels translations outright.
    let mut clouds = Vec::new();
    for i in 0..5u64 {
        let mut c = synth_shape(
            SynthShape::Torus { major: 1.0 + 0.3 * i as f64, minor: 0.2 + 0.05 * i as f64 },
            300,
            i,
        )
        .unwrap();
        c.id = format!("t{i}");
        clouds.push(c);
    }
    let config = PipelineConfig {
        normalize: true,
        downsample: 1000,
        ..PipelineConfig::default()
    };
    let (index, _) = build_index(&clouds, &config).unwrap();
    for cloud in &clouds {
        let q = cloud.translate(Point3::new(0.2, 0.2, 0.1)).unwrap();
        let (res, _) = query(&index, &q, 1).unwrap();
        assert_eq!(res.top().unwrap().0, cloud.id);
    }
}

#[test]
fn query_does_not_mutate_index_and_is_repeatable() {
    let clouds: Vec<PointCloud> = (0..4u64)
        .map(|i| {
            let mut c = synth_shape(SynthShape::Sphere { radius: 0.4 + 0.3 * i as f64 }, 150, i).unwrap();
            c.id = format!("s{i}");
            c
        })
        .collect();
    let config = PipelineConfig {
        normalize: false,
        downsample: 500,
        ..PipelineConfig::default()
    };
    let (index, _) = build_index(&clouds, &config).unwrap();
    let before = format!("{:?}", index.entries.iter().map(|e| e.vector.as_slice()).collect::<Vec<_>>());
    let (r1, _) = query(&index, &clouds[2], 4).unwrap();
    let (r2, _) = query(&index, &clouds[2], 4).unwrap();
    assert_eq!(r1, r2);
    let after = format!("{:?}", index.entries.iter().map(|e| e.vector.as_slice()).collect::<Vec<_>>());
    assert_eq!(before, after);
}

#[test]
fn selected_diagram_prefers_dim2_on_closed_surfaces() {
    let sphere = synth_shape(SynthShape::Sphere { radius: 1.0 }, 200, 1).unwrap();
    let pset = compute_persistence(&build_alpha(&sphere).unwrap(), 2).unwrap();
    let sel = select_diagram(&pset);
    assert_eq!(sel.dim, 2);
    assert!(sel.len() >= 2);
    assert!(sel.pairs.iter().all(|p| p.is_finite()));
}
