//! The descriptor database: per-cloud pipeline, ATOL fit, exact
//! nearest-neighbor retrieval, persistence to disk, and recall metrics.
//!
//! Build and query run the identical pipeline (downsample, optional
//! normalization, filtration, persistence, diagram selection, ATOL
//! transform); the query side always takes its configuration from the
//! index fingerprint so database and query can never drift apart.

mod metrics;
mod store;

pub use metrics::{recall_at_n, recall_top_percent, GroundTruth};
pub use store::{load_index, save_index};

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::atol::{self, AtolModel, DescriptorVector};
use crate::error::{Error, Result};
use crate::filtration::{
    build_alpha, build_rips, Filtration, FiltrationBackend, RipsThreshold, ValueConvention,
    DEFAULT_SIMPLEX_CAP,
};
use crate::persistence::{compute_persistence, select_diagram, SelectedDiagram};
use crate::pointcloud::PointCloud;

/// Rips complexes blow up combinatorially, so the pipeline caps them at
/// dimension 2; homology dimension 2 then has no finite pairs and diagram
/// selection falls through to dimension 1 or 0.
const RIPS_PIPELINE_MAX_DIM: usize = 2;

/// Pipeline settings; doubles as the index fingerprint that query-time
/// processing is pinned to.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub backend: FiltrationBackend,
    pub budget: usize,
    pub seed: u64,
    pub downsample: usize,
    pub normalize: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            backend: FiltrationBackend::Alpha,
            budget: 10,
            seed: 42,
            downsample: 10_000,
            normalize: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::Argument("budget must be >= 1".into()));
        }
        if self.downsample == 0 {
            return Err(Error::Argument("downsample target must be >= 1".into()));
        }
        Ok(())
    }

    pub fn convention(&self) -> ValueConvention {
        match self.backend {
            FiltrationBackend::Rips => ValueConvention::Distance,
            FiltrationBackend::Alpha => ValueConvention::SquaredCircumradius,
        }
    }

    /// Human-readable list of fields on which `requested` differs from this
    /// fingerprint; empty when they agree.
    pub fn fingerprint_mismatches(&self, requested: &PipelineConfig) -> Vec<String> {
        let mut out = Vec::new();
        if self.backend != requested.backend {
            out.push(format!(
                "backend: index={} requested={}",
                self.backend.as_str(),
                requested.backend.as_str()
            ));
        }
        if self.budget != requested.budget {
            out.push(format!(
                "budget: index={} requested={}",
                self.budget, requested.budget
            ));
        }
        if self.seed != requested.seed {
            out.push(format!("seed: index={} requested={}", self.seed, requested.seed));
        }
        if self.downsample != requested.downsample {
            out.push(format!(
                "downsample: index={} requested={}",
                self.downsample, requested.downsample
            ));
        }
        if self.normalize != requested.normalize {
            out.push(format!(
                "normalize: index={} requested={}",
                self.normalize, requested.normalize
            ));
        }
        out
    }
}

/// One database entry: a cloud id with its descriptor vector.
#[derive(Debug, Clone)]
pub struct IndexEntry {
    pub id: String,
    pub vector: DescriptorVector,
    pub selected_dim: usize,
    /// Source path of the cloud, when known (not persisted).
    pub source: Option<String>,
    /// Selected-diagram pair count at build time (not persisted).
    pub pair_count: usize,
}

/// The immutable descriptor database queries run against.
#[derive(Debug, Clone)]
pub struct DescriptorIndex {
    pub entries: Vec<IndexEntry>,
    pub model: AtolModel,
    pub config: PipelineConfig,
    pub convention: ValueConvention,
}

impl DescriptorIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains_id(&self, id: &str) -> bool {
        self.entries.iter().any(|e| e.id == id)
    }

    /// Equality on the persisted contract: entries (id, vector, dim),
    /// model, fingerprint, and convention.
    pub fn same_contents(&self, other: &DescriptorIndex) -> bool {
        self.config == other.config
            && self.convention == other.convention
            && self.model == other.model
            && self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| {
                    a.id == b.id && a.vector == b.vector && a.selected_dim == b.selected_dim
                })
    }
}

/// Per-cloud build outcome for the report.
#[derive(Debug, Clone)]
pub struct CloudReport {
    pub id: String,
    pub selected_dim: Option<usize>,
    pub pair_count: usize,
    pub millis: u128,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct BuildReport {
    pub clouds: Vec<CloudReport>,
}

impl BuildReport {
    pub fn skipped_count(&self) -> usize {
        self.clouds.iter().filter(|c| c.skipped.is_some()).count()
    }
}

/// Runs the per-cloud half of the pipeline: downsample, normalize (when
/// configured), filtration, persistence, diagram selection.
pub fn cloud_to_diagram(
    cloud: &PointCloud,
    config: &PipelineConfig,
) -> Result<(SelectedDiagram, Duration)> {
    let prepared = cloud.downsample_uniform(config.downsample)?;
    let prepared = if config.normalize {
        prepared.normalize()
    } else {
        prepared
    };
    let start = Instant::now();
    let filtration = build_filtration(&prepared, config.backend)?;
    let pset = compute_persistence(&filtration, 2)?;
    let persistence_time = start.elapsed();
    Ok((select_diagram(&pset), persistence_time))
}

fn build_filtration(cloud: &PointCloud, backend: FiltrationBackend) -> Result<Filtration> {
    match backend {
        FiltrationBackend::Alpha => build_alpha(cloud),
        FiltrationBackend::Rips => build_rips(
            cloud,
            RIPS_PIPELINE_MAX_DIM,
            RipsThreshold::Diameter,
            DEFAULT_SIMPLEX_CAP,
        ),
    }
}

/// Builds the database: per-cloud diagrams (in parallel), a single ATOL fit
/// over all selected diagrams, then one vector per cloud. Clouds that fail
/// the pipeline (degenerate geometry) are skipped and reported.
pub fn build_index(
    clouds: &[PointCloud],
    config: &PipelineConfig,
) -> Result<(DescriptorIndex, BuildReport)> {
    config.validate()?;
    if clouds.len() < 2 {
        return Err(Error::Argument(format!(
            "an index needs at least 2 clouds, got {}",
            clouds.len()
        )));
    }
    {
        let mut ids: Vec<&str> = clouds.iter().map(|c| c.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Validation(format!("duplicate cloud id {:?}", w[0])));
        }
        if let Some(bad) = clouds
            .iter()
            .find(|c| c.id.contains(',') || c.id.contains('\n'))
        {
            return Err(Error::Validation(format!(
                "cloud id {:?} contains characters not allowed in the index format",
                bad.id
            )));
        }
    }

    let outcomes: Vec<(Result<(SelectedDiagram, Duration)>, u128)> = clouds
        .par_iter()
        .map(|cloud| {
            let start = Instant::now();
            let outcome = cloud_to_diagram(cloud, config);
            (outcome, start.elapsed().as_millis())
        })
        .collect();

    let mut report = BuildReport::default();
    let mut kept: Vec<(usize, SelectedDiagram)> = Vec::new();
    for (i, (outcome, millis)) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok((diagram, _)) => {
                report.clouds.push(CloudReport {
                    id: clouds[i].id.clone(),
                    selected_dim: Some(diagram.dim),
                    pair_count: diagram.len(),
                    millis,
                    skipped: None,
                });
                kept.push((i, diagram));
            }
            Err(err) => {
                report.clouds.push(CloudReport {
                    id: clouds[i].id.clone(),
                    selected_dim: None,
                    pair_count: 0,
                    millis,
                    skipped: Some(err.to_string()),
                });
            }
        }
    }
    if kept.is_empty() {
        let reasons: Vec<String> = report
            .clouds
            .iter()
            .map(|c| format!("{}: {}", c.id, c.skipped.as_deref().unwrap_or("ok")))
            .collect();
        return Err(Error::Validation(format!(
            "all {} clouds failed the pipeline:\n{}",
            clouds.len(),
            reasons.join("\n")
        )));
    }

    let diagrams: Vec<SelectedDiagram> = kept.iter().map(|(_, d)| d.clone()).collect();
    let model = atol::fit(&diagrams, config.budget, config.seed)?;
    let entries: Vec<IndexEntry> = kept
        .iter()
        .map(|(i, diagram)| IndexEntry {
            id: clouds[*i].id.clone(),
            vector: atol::transform(&model, diagram),
            selected_dim: diagram.dim,
            source: clouds[*i].source.clone(),
            pair_count: diagram.len(),
        })
        .collect();

    let convention = config.convention();
    Ok((
        DescriptorIndex {
            entries,
            model,
            config: config.clone(),
            convention,
        },
        report,
    ))
}

/// Ranked retrieval for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalResult {
    pub query_id: String,
    /// (entry id, Euclidean distance), ascending distance, ties by id.
    pub ranked: Vec<(String, f64)>,
}

impl RetrievalResult {
    pub fn top(&self) -> Option<&(String, f64)> {
        self.ranked.first()
    }
}

/// Wall-time split of a query, for observing where time goes.
#[derive(Debug, Clone, Copy)]
pub struct QueryTiming {
    pub persistence: Duration,
    pub total: Duration,
}

impl QueryTiming {
    pub fn persistence_share(&self) -> f64 {
        if self.total.is_zero() {
            return 0.0;
        }
        self.persistence.as_secs_f64() / self.total.as_secs_f64()
    }
}

/// Runs the index's pipeline on the query cloud and ranks all database
/// entries by exact Euclidean distance.
pub fn query(
    index: &DescriptorIndex,
    cloud: &PointCloud,
    top_n: usize,
) -> Result<(RetrievalResult, QueryTiming)> {
    if top_n == 0 {
        return Err(Error::Argument("topN must be >= 1".into()));
    }
    if index.is_empty() {
        return Err(Error::Argument("cannot query an empty index".into()));
    }
    let start = Instant::now();
    let (diagram, persistence_time) = cloud_to_diagram(cloud, &index.config)?;
    if diagram.is_empty() {
        return Err(Error::Degenerate(format!(
            "query cloud {:?} yields an empty selected diagram",
            cloud.id
        )));
    }
    let vector = atol::transform(&index.model, &diagram);
    let mut ranked: Vec<(String, f64)> = index
        .entries
        .iter()
        .map(|e| (e.id.clone(), e.vector.euclidean_distance(&vector)))
        .collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(top_n.min(index.len()));
    let total = start.elapsed();
    Ok((
        RetrievalResult {
            query_id: cloud.id.clone(),
            ranked,
        },
        QueryTiming {
            persistence: persistence_time,
            total,
        },
    ))
}
