//! Recall metrics over ranked retrieval results.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::index::{DescriptorIndex, RetrievalResult};

/// Ground truth: each query id maps to its nonempty set of positive
/// database ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    positives: HashMap<String, HashSet<String>>,
}

impl GroundTruth {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, query_id: impl Into<String>, positive_id: impl Into<String>) {
        self.positives
            .entry(query_id.into())
            .or_default()
            .insert(positive_id.into());
    }

    pub fn positives(&self, query_id: &str) -> Option<&HashSet<String>> {
        self.positives.get(query_id)
    }

    pub fn len(&self) -> usize {
        self.positives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positives.is_empty()
    }

    /// Parses the CSV interchange format: one "query_id,positive_id" row
    /// per positive pair; an optional leading header row is skipped.
    pub fn parse_csv(text: &str, origin: &str) -> Result<GroundTruth> {
        let mut gt = GroundTruth::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if i == 0 && line == "query_id,positive_id" {
                continue;
            }
            let mut fields = line.split(',');
            match (fields.next(), fields.next(), fields.next()) {
                (Some(q), Some(p), None) if !q.is_empty() && !p.is_empty() => {
                    gt.add(q.trim(), p.trim());
                }
                _ => {
                    return Err(Error::Parse {
                        path: origin.to_string(),
                        line: i + 1,
                        msg: format!("expected \"query_id,positive_id\", got {line:?}"),
                    });
                }
            }
        }
        Ok(gt)
    }

    pub fn load_csv(path: &Path) -> Result<GroundTruth> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_csv(&text, &path.display().to_string())
    }

    pub fn to_csv(&self) -> String {
        let mut rows: Vec<(&str, &str)> = self
            .positives
            .iter()
            .flat_map(|(q, ps)| ps.iter().map(move |p| (q.as_str(), p.as_str())))
            .collect();
        rows.sort_unstable();
        let mut out = String::from("query_id,positive_id\n");
        for (q, p) in rows {
            out.push_str(q);
            out.push(',');
            out.push_str(p);
            out.push('\n');
        }
        out
    }

    /// Checks that every referenced positive id exists in the index.
    pub fn validate_against(&self, index: &DescriptorIndex) -> Result<()> {
        let known: HashSet<&str> = index.entries.iter().map(|e| e.id.as_str()).collect();
        let mut missing: Vec<&str> = self
            .positives
            .values()
            .flatten()
            .map(String::as_str)
            .filter(|id| !known.contains(id))
            .collect();
        missing.sort_unstable();
        missing.dedup();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::Eval(format!(
                "ground-truth positives missing from the index: {}",
                missing.join(", ")
            )))
        }
    }
}

/// Percentage of queries whose top-N retrieved ids intersect their positive
/// set. Every query must be covered by the ground truth.
pub fn recall_at_n(results: &[RetrievalResult], gt: &GroundTruth, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Argument("N must be >= 1".into()));
    }
    if results.is_empty() {
        return Err(Error::Argument("no retrieval results to evaluate".into()));
    }
    let mut missing: Vec<&str> = results
        .iter()
        .filter(|r| gt.positives(&r.query_id).is_none())
        .map(|r| r.query_id.as_str())
        .collect();
    if !missing.is_empty() {
        missing.sort_unstable();
        missing.dedup();
        return Err(Error::Eval(format!(
            "query ids missing from ground truth: {}",
            missing.join(", ")
        )));
    }
    let matched = results
        .iter()
        .filter(|r| {
            let positives = gt.positives(&r.query_id).expect("checked above");
            r.ranked
                .iter()
                .take(n)
                .any(|(id, _)| positives.contains(id))
        })
        .count();
    Ok(100.0 * matched as f64 / results.len() as f64)
}

/// Recall-1%: recall@N with N = max(1, ceil(0.01 * index_size)). The floor
/// of 1 keeps the metric defined for databases under 100 entries, where the
/// top 1% is represented by a single entry.
pub fn recall_top_percent(
    results: &[RetrievalResult],
    gt: &GroundTruth,
    index_size: usize,
) -> Result<f64> {
    recall_at_n(results, gt, top_percent_n(index_size))
}

/// The N used by Recall-1%.
pub fn top_percent_n(index_size: usize) -> usize {
    ((0.01 * index_size as f64).ceil() as usize).max(1)
}
