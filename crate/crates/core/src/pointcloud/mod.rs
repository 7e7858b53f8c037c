//! 3D point clouds: loading, synthesis, preprocessing, and the query
//! perturbations used by the recognition evaluation protocol.

mod io;
mod synth;

pub use io::{detect_format, load_cloud, save_cloud, CloudFormat};
pub use synth::{synth_shape, SynthShape};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// A point in Euclidean 3-space. Coordinates are meters before
/// normalization and unitless afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ZERO: Point3 = Point3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn add(&self, o: &Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn sub(&self, o: &Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn mul(&self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn dot(&self, o: &Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Point3) -> Point3 {
        Point3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(&self, o: &Point3) -> f64 {
        self.sub(o).norm()
    }

    pub fn max_abs_coord(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }
}

/// An ordered set of 3D points with an identity and optional provenance.
///
/// The unit of ingestion, perturbation, and query. Invariants: at least one
/// point, all coordinates finite, non-empty id.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub id: String,
    pub points: Vec<Point3>,
    pub source: Option<String>,
}

impl PointCloud {
    /// Builds a cloud, validating the type invariants.
    pub fn new(id: impl Into<String>, points: Vec<Point3>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::Validation("cloud id must be non-empty".into()));
        }
        if points.is_empty() {
            return Err(Error::EmptyCloud(id));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::Validation(format!(
                "cloud {id:?}: point {i} has a non-finite coordinate"
            )));
        }
        Ok(PointCloud {
            id,
            points,
            source: None,
        })
    }

    fn with_points(&self, points: Vec<Point3>) -> PointCloud {
        PointCloud {
            id: self.id.clone(),
            points,
            source: self.source.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Keeps every k-th point with `k = floor(len / target)`, preserving
    /// order. Clouds already at or below `target` are returned unchanged;
    /// otherwise the result size lands in `[target, 2*target)`.
    pub fn downsample_uniform(&self, target: usize) -> Result<PointCloud> {
        if target == 0 {
            return Err(Error::Argument("downsample target must be >= 1".into()));
        }
        if self.points.len() <= target {
            return Ok(self.clone());
        }
        let k = self.points.len() / target;
        Ok(self.with_points(self.points.iter().copied().step_by(k).collect()))
    }

    /// Shifts to zero mean, then divides by the maximum absolute centered
    /// coordinate so every coordinate lies in [-1, 1]. Coincident clouds
    /// (zero spread) are centered with divisor 1.
    pub fn normalize(&self) -> PointCloud {
        let n = self.points.len() as f64;
        let mut mean = Point3::ZERO;
        for p in &self.points {
            mean = mean.add(p);
        }
        mean = mean.mul(1.0 / n);
        let centered: Vec<Point3> = self.points.iter().map(|p| p.sub(&mean)).collect();
        let max_abs = centered
            .iter()
            .map(Point3::max_abs_coord)
            .fold(0.0, f64::max);
        let divisor = if max_abs > 0.0 { max_abs } else { 1.0 };
        self.with_points(centered.iter().map(|p| p.mul(1.0 / divisor)).collect())
    }

    /// Adds i.i.d. Gaussian noise to each coordinate of a seeded random
    /// subset of `round(fraction * len)` points. Deterministic per seed.
    pub fn jitter(&self, fraction: f64, sigma: f64, seed: u64) -> Result<PointCloud> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::Argument(format!(
                "jitter fraction must be in [0,1], got {fraction}"
            )));
        }
        if !(sigma > 0.0) {
            return Err(Error::Argument(format!(
                "jitter sigma must be > 0, got {sigma}"
            )));
        }
        let count = (fraction * self.points.len() as f64).round() as usize;
        let count = count.min(self.points.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut chosen = sample(&mut rng, self.points.len(), count).into_vec();
        chosen.sort_unstable();
        let normal = Normal::new(0.0, sigma).expect("sigma validated above");
        let mut points = self.points.clone();
        for i in chosen {
            points[i].x += normal.sample(&mut rng);
            points[i].y += normal.sample(&mut rng);
            points[i].z += normal.sample(&mut rng);
        }
        Ok(self.with_points(points))
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scale(&self, factor: f64) -> Result<PointCloud> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Argument(format!(
                "scale factor must be a positive real, got {factor}"
            )));
        }
        Ok(self.with_points(self.points.iter().map(|p| p.mul(factor)).collect()))
    }

    /// Adds `offset` to every point.
    pub fn translate(&self, offset: Point3) -> Result<PointCloud> {
        if !offset.is_finite() {
            return Err(Error::Argument("translation offset must be finite".into()));
        }
        Ok(self.with_points(self.points.iter().map(|p| p.add(&offset)).collect()))
    }

    /// Rotates every point about the origin-anchored `axis` by `degrees`
    /// (Rodrigues formula). The axis must be unit length within 1e-9.
    pub fn rotate(&self, axis: Point3, degrees: f64) -> Result<PointCloud> {
        if (axis.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Argument(format!(
                "rotation axis must be unit length, got norm {}",
                axis.norm()
            )));
        }
        let theta = degrees.to_radians();
        let (sin, cos) = theta.sin_cos();
        let points = self
            .points
            .iter()
            .map(|p| {
                // v cosθ + (k × v) sinθ + k (k · v)(1 − cosθ)
                let kxv = axis.cross(p);
                let kdv = axis.dot(p);
                p.mul(cos)
                    .add(&kxv.mul(sin))
                    .add(&axis.mul(kdv * (1.0 - cos)))
            })
            .collect();
        Ok(self.with_points(points))
    }
}

/// One row of the query-modification protocol: which perturbation to apply
/// and with what parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum PerturbationSpec {
    Jitter { fraction: f64, sigma: f64, seed: u64 },
    Scale { factor: f64 },
    Translate { offset: Point3 },
    Rotate { axis: Point3, degrees: f64 },
}

impl PerturbationSpec {
    pub fn apply(&self, cloud: &PointCloud) -> Result<PointCloud> {
        match *self {
            PerturbationSpec::Jitter {
                fraction,
                sigma,
                seed,
            } => cloud.jitter(fraction, sigma, seed),
            PerturbationSpec::Scale { factor } => cloud.scale(factor),
            PerturbationSpec::Translate { offset } => cloud.translate(offset),
            PerturbationSpec::Rotate { axis, degrees } => cloud.rotate(axis, degrees),
        }
    }
}

impl std::fmt::Display for PerturbationSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PerturbationSpec::Jitter {
                fraction,
                sigma,
                seed,
            } => write!(f, "jitter fraction={fraction} sigma={sigma} seed={seed}"),
            PerturbationSpec::Scale { factor } => write!(f, "scale factor={factor}"),
            PerturbationSpec::Translate { offset } => {
                write!(f, "translate offset=[{},{},{}]", offset.x, offset.y, offset.z)
            }
            PerturbationSpec::Rotate { axis, degrees } => write!(
                f,
                "rotate axis=[{},{},{}] degrees={degrees}",
                axis.x, axis.y, axis.z
            ),
        }
    }
}

pub const Z_AXIS: Point3 = Point3 {
    x: 0.0,
    y: 0.0,
    z: 1.0,
};
