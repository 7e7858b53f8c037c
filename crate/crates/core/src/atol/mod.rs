//! ATOL vectorization: quantize the pooled diagram points of a database
//! into `b` centers, then turn any diagram into a fixed-length vector by
//! summing a laplacian contrast exp(-|x - c_i| / sigma_i) over its points.

mod exact_sum;
mod kmeans;

pub use kmeans::kmeans;

use exact_sum::ExactSum;

use crate::error::{Error, Result};
use crate::persistence::SelectedDiagram;

/// A fitted quantizer: `k <= budget` centers in the (birth, death) plane
/// with one positive scale each. Vectors are zero-padded up to `budget`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtolModel {
    pub budget: usize,
    pub centers: Vec<[f64; 2]>,
    pub scales: Vec<f64>,
    pub seed: u64,
}

impl AtolModel {
    pub fn k(&self) -> usize {
        self.centers.len()
    }
}

/// A descriptor vector of exactly `budget` nonnegative entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorVector(pub Vec<f64>);

impl DescriptorVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn euclidean_distance(&self, other: &DescriptorVector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Fits the quantizer on the pooled diagram points of all database
/// diagrams: deterministic k-means with `k = min(budget, distinct pooled
/// points)`, then `sigma_i = half the distance from center i to its nearest
/// other center` (for a single center: the largest distance to any pooled
/// point, or 1 if that is 0).
pub fn fit(diagrams: &[SelectedDiagram], budget: usize, seed: u64) -> Result<AtolModel> {
    if budget == 0 {
        return Err(Error::Argument("budget must be >= 1".into()));
    }
    let pooled: Vec<[f64; 2]> = diagrams
        .iter()
        .flat_map(|d| d.pairs.iter().map(|p| [p.birth, p.death]))
        .collect();
    if pooled.is_empty() {
        return Err(Error::Fit(
            "all diagrams are empty; nothing to quantize".into(),
        ));
    }
    let mut keys: Vec<(u64, u64)> = pooled
        .iter()
        .map(|p| (p[0].to_bits(), p[1].to_bits()))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let k = budget.min(keys.len());

    let centers = kmeans(&pooled, k, seed)?;
    // Identical centers would give a zero scale; collapse them (first wins).
    let centers = {
        let mut uniq: Vec<[f64; 2]> = Vec::with_capacity(centers.len());
        for c in centers {
            if !uniq.contains(&c) {
                uniq.push(c);
            }
        }
        uniq
    };

    let dist = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let scales: Vec<f64> = if centers.len() == 1 {
        let max_d = pooled
            .iter()
            .map(|p| dist(*p, centers[0]))
            .fold(0.0, f64::max);
        vec![if max_d > 0.0 { max_d } else { 1.0 }]
    } else {
        centers
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let nearest = centers
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, o)| dist(*c, *o))
                    .fold(f64::INFINITY, f64::min);
                0.5 * nearest
            })
            .collect()
    };
    debug_assert!(scales.iter().all(|&s| s > 0.0));
    Ok(AtolModel {
        budget,
        centers,
        scales,
        seed,
    })
}

/// Vectorizes a diagram: entry i (i < k) sums exp(-|x - c_i| / sigma_i)
/// over the diagram's (birth, death) points; entries past k are 0. The
/// per-entry sums are accumulated exactly and rounded once, so the result
/// depends only on the multiset of diagram points.
pub fn transform(model: &AtolModel, diagram: &SelectedDiagram) -> DescriptorVector {
    let mut values = vec![0.0f64; model.budget];
    for (i, (center, sigma)) in model.centers.iter().zip(&model.scales).enumerate() {
        let mut sum = ExactSum::new();
        for p in &diagram.pairs {
            let dx = p.birth - center[0];
            let dy = p.death - center[1];
            let d = (dx * dx + dy * dy).sqrt();
            sum.add((-d / sigma).exp());
        }
        values[i] = sum.value();
    }
    DescriptorVector(values)
}
