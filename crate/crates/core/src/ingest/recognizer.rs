//! Pluggable image recognizers that produce tags for photo assets.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::Value;
use thiserror::Error;

use super::{canonical_tags, TagAssignment};

#[derive(Debug, Error)]
pub enum RecognizeError {
    #[error("recognizer {recognizer} unavailable: {reason}")]
    Unavailable { recognizer: String, reason: String },
    #[error("asset {photo_id} unreadable: {reason}")]
    AssetUnreadable { photo_id: String, reason: String },
    #[error("response for {photo_id} has tag `{keyword}` without a confidence")]
    MissingConfidence { photo_id: String, keyword: String },
    #[error("response for {photo_id} has an invalid tag: {reason}")]
    InvalidTag { photo_id: String, reason: String },
}

/// What a recognizer needs to locate an image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhotoAsset {
    pub photo_id: String,
    pub uri: String,
}

pub trait Recognizer: Send + Sync {
    fn name(&self) -> &str;

    /// Tags for one asset, canonicalised (sorted, one per keyword, max confidence).
    fn recognize(&self, asset: &PhotoAsset) -> Result<Vec<TagAssignment>, RecognizeError>;
}

/// Reads tags from a sidecar JSON file: `{"<photo_id>": [{"keyword", "confidence"}...]}`.
#[derive(Debug, Clone, Default)]
pub struct FixtureRecognizer {
    entries: BTreeMap<String, Vec<Value>>,
}

impl FixtureRecognizer {
    pub fn from_json_str(text: &str) -> Result<Self, RecognizeError> {
        let unavailable = |reason: String| RecognizeError::Unavailable {
            recognizer: "fixture".into(),
            reason,
        };
        let value: Value = serde_json::from_str(text).map_err(|e| unavailable(e.to_string()))?;
        let Value::Object(map) = value else {
            return Err(unavailable("sidecar must be an object keyed by photo_id".into()));
        };
        let mut entries = BTreeMap::new();
        for (photo_id, tags) in map {
            let Value::Array(tags) = tags else {
                return Err(unavailable(format!("entry {photo_id} is not an array")));
            };
            entries.insert(photo_id, tags);
        }
        Ok(Self { entries })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, RecognizeError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| RecognizeError::Unavailable {
            recognizer: "fixture".into(),
            reason: format!("{}: {e}", path.display()),
        })?;
        Self::from_json_str(&text)
    }
}

impl Recognizer for FixtureRecognizer {
    fn name(&self) -> &str {
        "fixture"
    }

    fn recognize(&self, asset: &PhotoAsset) -> Result<Vec<TagAssignment>, RecognizeError> {
        let items = self
            .entries
            .get(&asset.photo_id)
            .ok_or_else(|| RecognizeError::AssetUnreadable {
                photo_id: asset.photo_id.clone(),
                reason: "no sidecar entry".into(),
            })?;
        let mut tags = Vec::with_capacity(items.len());
        for item in items {
            let keyword = item.get("keyword").and_then(Value::as_str).unwrap_or_default();
            let Some(confidence) = item.get("confidence").and_then(Value::as_f64) else {
                return Err(RecognizeError::MissingConfidence {
                    photo_id: asset.photo_id.clone(),
                    keyword: keyword.to_string(),
                });
            };
            let tag = TagAssignment::new(keyword, confidence).map_err(|e| RecognizeError::InvalidTag {
                photo_id: asset.photo_id.clone(),
                reason: e.to_string(),
            })?;
            tags.push(tag);
        }
        Ok(canonical_tags(tags))
    }
}
