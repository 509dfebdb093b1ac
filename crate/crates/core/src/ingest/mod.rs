//! Photo corpora: manifest loading, tag canonicalisation and per-keyword statistics.
//!
//! A corpus is always held in canonical order (ascending `photo_id`), and every
//! photo's tags are sorted by keyword with at most one entry per keyword. All
//! downstream vectors, graphs and trees rely on that ordering for
//! reproducibility.

mod recognizer;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::geo::GeoPoint;

pub use recognizer::{FixtureRecognizer, PhotoAsset, RecognizeError, Recognizer};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("manifest must be a JSON array of photo records")]
    NotAnArray,
    #[error("malformed record {photo_id}: field `{field}`: {reason}")]
    Malformed {
        photo_id: String,
        field: String,
        reason: String,
    },
    #[error("duplicate photo_id {0}")]
    DuplicatePhotoId(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TagError {
    #[error("keyword is empty")]
    EmptyKeyword,
    #[error("confidence {0} outside [0, 1]")]
    Confidence(f64),
}

/// Lowercase, trim and collapse internal whitespace. `None` when nothing is left.
pub fn normalize_keyword(raw: &str) -> Option<String> {
    let joined = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    if joined.is_empty() {
        None
    } else {
        Some(joined.to_lowercase())
    }
}

/// One recognised keyword on one photo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagAssignment {
    pub keyword: String,
    pub confidence: f64,
}

impl TagAssignment {
    pub fn new(keyword: &str, confidence: f64) -> Result<Self, TagError> {
        let keyword = normalize_keyword(keyword).ok_or(TagError::EmptyKeyword)?;
        if !(0.0..=1.0).contains(&confidence) {
            return Err(TagError::Confidence(confidence));
        }
        Ok(Self { keyword, confidence })
    }
}

/// Sort by keyword and keep the highest confidence per keyword.
///
/// Zero-confidence tags are dropped: they contribute nothing to any inner
/// product and would otherwise count towards `appear` with no evidence.
pub fn canonical_tags(tags: impl IntoIterator<Item = TagAssignment>) -> Vec<TagAssignment> {
    let mut best: BTreeMap<String, f64> = BTreeMap::new();
    for tag in tags {
        if tag.confidence <= 0.0 {
            continue;
        }
        best.entry(tag.keyword)
            .and_modify(|c| *c = c.max(tag.confidence))
            .or_insert(tag.confidence);
    }
    best.into_iter()
        .map(|(keyword, confidence)| TagAssignment { keyword, confidence })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotoRecord {
    pub photo_id: String,
    pub uri: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taken_at: Option<DateTime<FixedOffset>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geo: Option<GeoPoint>,
    pub tags: Vec<TagAssignment>,
}

impl PhotoRecord {
    pub fn new(photo_id: impl Into<String>, uri: impl Into<String>, tags: Vec<TagAssignment>) -> Self {
        Self {
            photo_id: photo_id.into(),
            uri: uri.into(),
            taken_at: None,
            geo: None,
            tags: canonical_tags(tags),
        }
    }

    pub fn confidence(&self, keyword: &str) -> Option<f64> {
        self.tags
            .binary_search_by(|t| t.keyword.as_str().cmp(keyword))
            .ok()
            .map(|i| self.tags[i].confidence)
    }

    pub fn has_keyword(&self, keyword: &str) -> bool {
        self.confidence(keyword).is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordStats {
    pub keyword: String,
    /// Sum of this keyword's confidences over every photo carrying it.
    pub conf_total: f64,
    /// Number of photos carrying it.
    pub appear: usize,
}

/// Per-keyword totals, summed in ascending `photo_id` order regardless of
/// the order of `photos`.
pub fn compute_stats(photos: &[PhotoRecord]) -> BTreeMap<String, KeywordStats> {
    let mut ordered: Vec<&PhotoRecord> = photos.iter().collect();
    ordered.sort_by(|a, b| a.photo_id.cmp(&b.photo_id));

    let mut stats: BTreeMap<String, KeywordStats> = BTreeMap::new();
    for photo in ordered {
        for tag in &photo.tags {
            let entry = stats.entry(tag.keyword.clone()).or_insert_with(|| KeywordStats {
                keyword: tag.keyword.clone(),
                conf_total: 0.0,
                appear: 0,
            });
            entry.conf_total += tag.confidence;
            entry.appear += 1;
        }
    }
    stats
}

/// Photos plus their precomputed keyword statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotoCorpus {
    photos: Vec<PhotoRecord>,
    stats: BTreeMap<String, KeywordStats>,
}

impl PhotoCorpus {
    /// Canonicalise, check id uniqueness and compute statistics.
    pub fn new(mut photos: Vec<PhotoRecord>) -> Result<Self, IngestError> {
        let mut seen = HashSet::with_capacity(photos.len());
        for photo in &mut photos {
            if !seen.insert(photo.photo_id.clone()) {
                return Err(IngestError::DuplicatePhotoId(photo.photo_id.clone()));
            }
            photo.tags = canonical_tags(std::mem::take(&mut photo.tags));
        }
        photos.sort_by(|a, b| a.photo_id.cmp(&b.photo_id));
        let stats = compute_stats(&photos);
        Ok(Self { photos, stats })
    }

    pub fn empty() -> Self {
        Self {
            photos: Vec::new(),
            stats: BTreeMap::new(),
        }
    }

    /// Number of photos.
    pub fn n(&self) -> usize {
        self.photos.len()
    }

    /// Number of distinct keywords.
    pub fn m(&self) -> usize {
        self.stats.len()
    }

    pub fn photos(&self) -> &[PhotoRecord] {
        &self.photos
    }

    pub fn stats(&self) -> &BTreeMap<String, KeywordStats> {
        &self.stats
    }

    pub fn keyword_stats(&self, keyword: &str) -> Option<&KeywordStats> {
        self.stats.get(keyword)
    }

    pub fn photo(&self, photo_id: &str) -> Option<&PhotoRecord> {
        self.photos
            .binary_search_by(|p| p.photo_id.as_str().cmp(photo_id))
            .ok()
            .map(|i| &self.photos[i])
    }

    /// Drop keywords seen on fewer than `min_appear` photos, from the
    /// statistics and from every photo. Photos themselves are kept.
    pub fn filter_keywords(&self, min_appear: usize) -> PhotoCorpus {
        let photos: Vec<PhotoRecord> = self
            .photos
            .iter()
            .map(|photo| PhotoRecord {
                tags: photo
                    .tags
                    .iter()
                    .filter(|t| self.stats[&t.keyword].appear >= min_appear)
                    .cloned()
                    .collect(),
                ..photo.clone()
            })
            .collect();
        let stats = self
            .stats
            .iter()
            .filter(|(_, s)| s.appear >= min_appear)
            .map(|(k, s)| (k.clone(), s.clone()))
            .collect();
        PhotoCorpus { photos, stats }
    }

    /// Replace every photo's tags with the recognizer's output.
    pub fn retag(&self, recognizer: &dyn Recognizer) -> Result<PhotoCorpus, RecognizeError> {
        let photos = self
            .photos
            .iter()
            .map(|photo| {
                let asset = PhotoAsset {
                    photo_id: photo.photo_id.clone(),
                    uri: photo.uri.clone(),
                };
                let tags = recognizer.recognize(&asset)?;
                Ok(PhotoRecord {
                    tags: canonical_tags(tags),
                    ..photo.clone()
                })
            })
            .collect::<Result<Vec<_>, RecognizeError>>()?;
        let stats = compute_stats(&photos);
        Ok(PhotoCorpus { photos, stats })
    }

    pub fn from_manifest_str(text: &str) -> Result<Self, IngestError> {
        let value: Value = serde_json::from_str(text)?;
        let Value::Array(records) = value else {
            return Err(IngestError::NotAnArray);
        };
        let photos = records
            .iter()
            .enumerate()
            .map(|(index, record)| parse_record(index, record))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(photos)
    }

    /// The manifest representation of this corpus (canonical order).
    pub fn to_manifest_value(&self) -> Value {
        serde_json::to_value(&self.photos).expect("photo records serialize")
    }
}

/// Read a corpus manifest from disk.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<PhotoCorpus, IngestError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    PhotoCorpus::from_manifest_str(&text)
}

fn parse_record(index: usize, record: &Value) -> Result<PhotoRecord, IngestError> {
    let malformed = |id: &str, field: &str, reason: String| IngestError::Malformed {
        photo_id: id.to_string(),
        field: field.to_string(),
        reason,
    };
    let fallback_id = format!("#{index}");
    let Value::Object(obj) = record else {
        return Err(malformed(&fallback_id, "<record>", "expected an object".into()));
    };

    let photo_id = match obj.get("photo_id") {
        Some(Value::String(s)) if !s.trim().is_empty() => s.clone(),
        Some(_) => {
            return Err(malformed(
                &fallback_id,
                "photo_id",
                "expected a non-empty string".into(),
            ))
        }
        None => return Err(malformed(&fallback_id, "photo_id", "missing".into())),
    };
    let id = photo_id.as_str();

    let uri = match obj.get("uri") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(malformed(id, "uri", "expected a string".into())),
        None => return Err(malformed(id, "uri", "missing".into())),
    };

    let taken_at = match obj.get("taken_at") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(
            DateTime::parse_from_rfc3339(s)
                .map_err(|e| malformed(id, "taken_at", format!("not an ISO-8601 timestamp: {e}")))?,
        ),
        Some(_) => return Err(malformed(id, "taken_at", "expected a string".into())),
    };

    let geo = match obj.get("geo") {
        None | Some(Value::Null) => None,
        Some(Value::Object(g)) => {
            let coord = |key: &str| {
                g.get(key)
                    .and_then(Value::as_f64)
                    .ok_or_else(|| malformed(id, &format!("geo.{key}"), "expected a number".into()))
            };
            let point = GeoPoint::new(coord("lat")?, coord("lng")?).map_err(|e| malformed(id, "geo", e.to_string()))?;
            Some(point)
        }
        Some(_) => return Err(malformed(id, "geo", "expected an object".into())),
    };

    let tags = match obj.get("tags") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, item)| parse_tag(item).map_err(|reason| malformed(id, &format!("tags[{i}]"), reason)))
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(malformed(id, "tags", "expected an array".into())),
    };

    Ok(PhotoRecord {
        photo_id,
        uri,
        taken_at,
        geo,
        tags: canonical_tags(tags),
    })
}

/// Parse one `{"keyword", "confidence"}` object.
pub(crate) fn parse_tag(item: &Value) -> Result<TagAssignment, String> {
    let keyword = item
        .get("keyword")
        .and_then(Value::as_str)
        .ok_or("missing string `keyword`")?;
    let confidence = item
        .get("confidence")
        .and_then(Value::as_f64)
        .ok_or("missing numeric `confidence`")?;
    TagAssignment::new(keyword, confidence).map_err(|e| e.to_string())
}
