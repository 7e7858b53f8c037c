//! Index file format.
//!
//! ```text
//! TDACLOUD-INDEX v1
//! backend=alpha
//! convention=squared_circumradius
//! b=10
//! seed=42
//! downsample=10000
//! normalize=true
//! entry_count=10
//! model_k=10
//! checksum=<sha256 hex of the data section>
//!
//! <k model rows: "birth death sigma">
//! <entry rows: "id,dim,v1,...,vb">
//! ```
//!
//! All floats are written with 17 significant digits, which round-trips
//! 64-bit values exactly. The checksum covers everything after the blank
//! line, so truncated or corrupted data is rejected before parsing.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::atol::{AtolModel, DescriptorVector};
use crate::error::{Error, Result};
use crate::index::{DescriptorIndex, IndexEntry, PipelineConfig};

const MAGIC: &str = "TDACLOUD-INDEX v1";

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializes the index to its text format.
pub fn index_to_string(index: &DescriptorIndex) -> Result<String> {
    for e in &index.entries {
        if e.id.contains(',') || e.id.contains('\n') {
            return Err(Error::Validation(format!(
                "entry id {:?} cannot be stored in the index format",
                e.id
            )));
        }
        if e.vector.len() != index.model.budget {
            return Err(Error::Contract(format!(
                "entry {:?} vector length {} does not match budget {}",
                e.id,
                e.vector.len(),
                index.model.budget
            )));
        }
    }

    let mut data = String::new();
    for (center, sigma) in index.model.centers.iter().zip(&index.model.scales) {
        let _ = writeln!(data, "{} {} {}", f(center[0]), f(center[1]), f(*sigma));
    }
    for e in &index.entries {
        let _ = write!(data, "{},{}", e.id, e.selected_dim);
        for v in e.vector.as_slice() {
            let _ = write!(data, ",{}", f(*v));
        }
        data.push('\n');
    }
    let checksum = hex::encode(Sha256::digest(data.as_bytes()));

    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "backend={}", index.config.backend.as_str());
    let _ = writeln!(out, "convention={}", index.convention.as_str());
    let _ = writeln!(out, "b={}", index.config.budget);
    let _ = writeln!(out, "seed={}", index.config.seed);
    let _ = writeln!(out, "downsample={}", index.config.downsample);
    let _ = writeln!(out, "normalize={}", index.config.normalize);
    let _ = writeln!(out, "entry_count={}", index.entries.len());
    let _ = writeln!(out, "model_k={}", index.model.k());
    let _ = writeln!(out, "checksum={checksum}");
    out.push('\n');
    out.push_str(&data);
    Ok(out)
}

pub fn save_index(index: &DescriptorIndex, path: &Path) -> Result<()> {
    let text = index_to_string(index)?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses the index text format; the inverse of [`index_to_string`].
pub fn index_from_str(text: &str, origin: &str) -> Result<DescriptorIndex> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: origin.to_string(),
        line,
        msg,
    };

    let mut lines = text.lines().enumerate();
    let magic = lines.next();
    match magic {
        Some((_, m)) if m == MAGIC => {}
        Some((_, m)) => {
            return Err(Error::VersionMismatch { found: m.to_string() });
        }
        None => {
            return Err(Error::Truncated("empty file".into()));
        }
    }

    let mut header: Vec<(usize, String, String)> = Vec::new();
    let mut header_done = false;
    for (i, line) in lines.by_ref() {
        if line.is_empty() {
            header_done = true;
            break;
        }
        match line.split_once('=') {
            Some((k, v)) => header.push((i + 1, k.to_string(), v.to_string())),
            None => return Err(parse_err(i + 1, format!("expected key=value, got {line:?}"))),
        }
    }
    if !header_done {
        return Err(Error::Truncated("header not terminated by a blank line".into()));
    }
    let get = |key: &str| -> Result<&str> {
        header
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(_, _, v)| v.as_str())
            .ok_or_else(|| Error::Truncated(format!("missing header key {key}")))
    };
    let parse_usize = |key: &str| -> Result<usize> {
        get(key)?
            .parse()
            .map_err(|_| Error::Validation(format!("header {key}={:?} is not a count", get(key).unwrap())))
    };

    let config = PipelineConfig {
        backend: get("backend")?.parse()?,
        budget: parse_usize("b")?,
        seed: get("seed")?
            .parse()
            .map_err(|_| Error::Validation("header seed is not an integer".into()))?,
        downsample: parse_usize("downsample")?,
        normalize: match get("normalize")? {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::Validation(format!(
                    "header normalize={other:?} is not a boolean"
                )))
            }
        },
    };
    let convention: crate::filtration::ValueConvention = get("convention")?.parse()?;
    if convention != config.convention() {
        return Err(Error::Validation(format!(
            "convention {} does not match backend {}",
            convention.as_str(),
            config.backend.as_str()
        )));
    }
    let entry_count = parse_usize("entry_count")?;
    let model_k = parse_usize("model_k")?;
    let checksum = get("checksum")?.to_string();

    // Everything after the blank line, verified before parsing.
    let data_start = text
        .find("\n\n")
        .map(|i| i + 2)
        .ok_or_else(|| Error::Truncated("no data section".into()))?;
    let data = &text[data_start..];
    if hex::encode(Sha256::digest(data.as_bytes())) != checksum {
        return Err(Error::ChecksumMismatch);
    }

    let mut data_lines = data.lines().enumerate();
    let mut centers = Vec::with_capacity(model_k);
    let mut scales = Vec::with_capacity(model_k);
    for _ in 0..model_k {
        let (i, line) = data_lines
            .next()
            .ok_or_else(|| Error::Truncated("missing model rows".into()))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(i + 1, format!("model row needs 3 fields, got {}", fields.len())));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| parse_err(i + 1, format!("bad decimal {s:?}")))
        };
        centers.push([num(fields[0])?, num(fields[1])?]);
        scales.push(num(fields[2])?);
    }
    let model = AtolModel {
        budget: config.budget,
        centers,
        scales,
        seed: config.seed,
    };

    let mut entries = Vec::with_capacity(entry_count);
    for _ in 0..entry_count {
        let (i, line) = data_lines
            .next()
            .ok_or_else(|| Error::Truncated("missing entry rows".into()))?;
        let mut fields = line.split(',');
        let id = fields
            .next()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| parse_err(i + 1, "missing entry id".into()))?
            .to_string();
        let dim: usize = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(i + 1, "missing or bad selected dim".into()))?;
        let values: Vec<f64> = fields
            .map(|s| {
                s.parse()
                    .map_err(|_| parse_err(i + 1, format!("bad decimal {s:?}")))
            })
            .collect::<Result<_>>()?;
        if values.len() != config.budget {
            return Err(parse_err(
                i + 1,
                format!("entry has {} values, expected b={}", values.len(), config.budget),
            ));
        }
        entries.push(IndexEntry {
            id,
            vector: DescriptorVector(values),
            selected_dim: dim,
            source: None,
            pair_count: 0,
        });
    }
    if data_lines.next().is_some() {
        return Err(Error::Validation("trailing data after entries".into()));
    }

    let index = DescriptorIndex {
        entries,
        model,
        config,
        convention,
    };
    let mut ids: Vec<&str> = index.entries.iter().map(|e| e.id.as_str()).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Validation("duplicate entry ids in index file".into()));
    }
    Ok(index)
}

pub fn load_index(path: &Path) -> Result<DescriptorIndex> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    index_from_str(&text, &path.display().to_string())
}
