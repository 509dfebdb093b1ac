//! HTTP adapters for hosted services: image tagging, geotagged photo search
//! and place search. None of these are exercised by the test suite; the
//! fixture implementations are the reference behaviour.
//!
//! All clients are blocking. Inside an async runtime, call them from a
//! blocking task.

use std::time::Duration;

use reqwest::blocking::Client;
use serde_json::Value;

use crate::ingest::{canonical_tags, PhotoAsset, RecognizeError, Recognizer, TagAssignment};
use crate::spots::{keyword_relevance, GeoPhoto, Provider, ProviderError, Spot, SpotDetails};

const TIMEOUT: Duration = Duration::from_secs(20);

fn client() -> Result<Client, reqwest::Error> {
    Client::builder().timeout(TIMEOUT).build()
}

fn get_json(client: &Client, provider: &str, url: &str, query: &[(&str, String)]) -> Result<Value, ProviderError> {
    let err = |e: reqwest::Error| ProviderError::new(provider, e.to_string());
    client
        .get(url)
        .query(query)
        .send()
        .and_then(|r| r.error_for_status())
        .map_err(err)?
        .json::<Value>()
        .map_err(err)
}

/// Tags images through an Azure Computer Vision `tag` endpoint.
///
/// `uri` must be an http(s) URL reachable by the service.
pub struct VisionRecognizer {
    endpoint: String,
    key: String,
    client: Client,
}

impl VisionRecognizer {
    pub const NAME: &'static str = "vision";

    /// `endpoint` is the resource root, e.g. `https://<name>.cognitiveservices.azure.com`.
    pub fn new(endpoint: impl Into<String>, key: impl Into<String>) -> Result<Self, RecognizeError> {
        let client = client().map_err(|e| RecognizeError::Unavailable {
            recognizer: Self::NAME.into(),
            reason: e.to_string(),
        })?;
        Ok(Self {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            key: key.into(),
            client,
        })
    }
}

impl Recognizer for VisionRecognizer {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn recognize(&self, asset: &PhotoAsset) -> Result<Vec<TagAssignment>, RecognizeError> {
        let unreadable = |reason: String| RecognizeError::AssetUnreadable {
            photo_id: asset.photo_id.clone(),
            reason,
        };
        let body: Value = self
            .client
            .post(format!("{}/vision/v3.2/tag", self.endpoint))
            .header("Ocp-Apim-Subscription-Key", &self.key)
            .json(&serde_json::json!({ "url": asset.uri }))
            .send()
            .and_then(|r| r.error_for_status())
            .and_then(|r| r.json())
            .map_err(|e| unreadable(e.to_string()))?;
        let items = body.get("tags").and_then(Value::as_array).cloned().unwrap_or_default();
        let mut tags = Vec::with_capacity(items.len());
        for item in &items {
            let keyword = item.get("name").and_then(Value::as_str).unwrap_or_default();
            let confidence =
                item.get("confidence")
                    .and_then(Value::as_f64)
                    .ok_or_else(|| RecognizeError::MissingConfidence {
                        photo_id: asset.photo_id.clone(),
                        keyword: keyword.to_string(),
                    })?;
            tags.push(
                TagAssignment::new(keyword, confidence).map_err(|e| RecognizeError::InvalidTag {
                    photo_id: asset.photo_id.clone(),
                    reason: e.to_string(),
                })?,
            );
        }
        Ok(canonical_tags(tags))
    }
}

/// Photo search against the Flickr REST API plus place search against the
/// Google Places text search API. Either key may be absent, in which case
/// the corresponding mode reports a provider error.
pub struct RemoteProvider {
    flickr_key: Option<String>,
    places_key: Option<String>,
    client: Client,
}

impl RemoteProvider {
    pub const NAME: &'static str = "remote";
    const FLICKR_URL: &'static str = "https://api.flickr.com/services/rest/";
    const PLACES_URL: &'static str = "https://maps.googleapis.com/maps/api/place";
    const PER_PAGE: usize = 250;

    pub fn new(flickr_key: Option<String>, places_key: Option<String>) -> Result<Self, ProviderError> {
        let client = client().map_err(|e| ProviderError::new(Self::NAME, e.to_string()))?;
        Ok(Self {
            flickr_key,
            places_key,
            client,
        })
    }

    /// Reads `FLICKR_API_KEY` and `GOOGLE_PLACES_API_KEY`.
    pub fn from_env() -> Result<Self, ProviderError> {
        let var = |name| std::env::var(name).ok().filter(|v: &String| !v.is_empty());
        Self::new(var("FLICKR_API_KEY"), var("GOOGLE_PLACES_API_KEY"))
    }

    fn key<'a>(key: &'a Option<String>, what: &str) -> Result<&'a str, ProviderError> {
        key.as_deref()
            .ok_or_else(|| ProviderError::new(Self::NAME, format!("no API key configured for {what}")))
    }
}

fn f64_field(v: &Value, name: &str) -> Option<f64> {
    match v.get(name)? {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

impl Provider for RemoteProvider {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn search_photos(&self, region: &str, keywords: &[String]) -> Result<Vec<GeoPhoto>, ProviderError> {
        let key = Self::key(&self.flickr_key, "photo search")?;
        let query = [
            ("method", "flickr.photos.search".to_string()),
            ("api_key", key.to_string()),
            ("text", format!("{region} {}", keywords.join(" "))),
            ("has_geo", "1".into()),
            ("extras", "geo,tags".into()),
            ("per_page", Self::PER_PAGE.to_string()),
            ("format", "json".into()),
            ("nojsoncallback", "1".into()),
        ];
        let body = get_json(&self.client, Self::NAME, Self::FLICKR_URL, &query)?;
        if body.get("stat").and_then(Value::as_str) != Some("ok") {
            let message = body
                .get("message")
                .and_then(Value::as_str)
                .unwrap_or("photo search failed");
            return Err(ProviderError::new(Self::NAME, message));
        }
        let items = body
            .pointer("/photos/photo")
            .and_then(Value::as_array)
            .cloned()
            .unwrap_or_default();
        Ok(items
            .iter()
            .filter_map(|p| {
                let photo_id = p.get("id").and_then(Value::as_str)?.to_string();
                let (lat, lng) = (f64_field(p, "latitude")?, f64_field(p, "longitude")?);
                let title = p.get("title").and_then(Value::as_str).unwrap_or_default().to_string();
                let tags: Vec<String> = p
                    .get("tags")
                    .and_then(Value::as_str)
                    .unwrap_or_default()
                    .split_whitespace()
                    .map(str::to_string)
                    .collect();
                let relevance = keyword_relevance(keywords, &tags, &title);
                (relevance > 0.0).then_some(GeoPhoto {
                    photo_id,
                    lat,
                    lng,
                    title,
                    tags,
                    relevance,
                })
            })
            .collect())
    }

    fn search_places(&self, region: &str, keywords: &[String]) -> Result<Vec<Spot>, ProviderError> {
        let key = Self::key(&self.places_key, "place search")?;
        let query = [
            ("query", format!("{} in {region}", keywords.join(" "))),
            ("key", key.to_string()),
        ];
        let url = format!("{}/textsearch/json", Self::PLACES_URL);
        let body = get_json(&self.client, Self::NAME, &url, &query)?;
        let results = body
            .get("results")
            .and_then(Value::as_array)
            .cloned()
            .unwrap_or_default();
        Ok(results
            .iter()
            .filter_map(|p| {
                let place_id = p.get("place_id").and_then(Value::as_str)?;
                let name = p.get("name").and_then(Value::as_str).unwrap_or(place_id).to_string();
                let location = p.pointer("/geometry/location")?;
                let types: Vec<String> = p
                    .get("types")
                    .and_then(Value::as_array)
                    .map(|a| {
                        a.iter()
                            .filter_map(Value::as_str)
                            .map(|t| t.replace('_', " "))
                            .collect()
                    })
                    .unwrap_or_default();
                Some(Spot {
                    spot_id: format!("place:{place_id}"),
                    relevance: keyword_relevance(keywords, &types, &name),
                    name,
                    lat: f64_field(location, "lat")?,
                    lng: f64_field(location, "lng")?,
                    nearby_count: p.get("user_ratings_total").and_then(Value::as_u64).unwrap_or(0) as usize,
                    review_score: f64_field(p, "rating"),
                    details: None,
                    member_photo_ids: Vec::new(),
                })
            })
            .collect())
    }

    fn fetch_details(&self, spot: &Spot) -> Result<SpotDetails, ProviderError> {
        let fallback = SpotDetails {
            description: format!("{}: {} photos taken here", spot.name, spot.nearby_count),
            address: None,
            url: None,
        };
        let (Some(place_id), Some(key)) = (spot.spot_id.strip_prefix("place:"), self.places_key.as_deref()) else {
            return Ok(fallback);
        };
        let query = [
            ("place_id", place_id.to_string()),
            ("fields", "name,formatted_address,url,editorial_summary".into()),
            ("key", key.to_string()),
        ];
        let url = format!("{}/details/json", Self::PLACES_URL);
        let body = get_json(&self.client, Self::NAME, &url, &query)?;
        let result = body.get("result").cloned().unwrap_or(Value::Null);
        let text = |ptr: &str| result.pointer(ptr).and_then(Value::as_str).map(str::to_string);
        Ok(SpotDetails {
            description: text("/editorial_summary/overview").unwrap_or_else(|| spot.name.clone()),
            address: text("/formatted_address"),
            url: text("/url"),
        })
    }
}
