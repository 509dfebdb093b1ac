//! Search providers: the interface and the offline fixture implementation.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{keyword_relevance, GeoPhoto, Spot, SpotDetails};
use crate::geo::{haversine_m, GeoPoint};
use crate::ingest::normalize_keyword;

/// A failure inside a provider, tagged with the provider's name.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("provider {provider} failed: {message}")]
pub struct ProviderError {
    pub provider: String,
    pub message: String,
}

impl ProviderError {
    pub fn new(provider: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            provider: provider.into(),
            message: message.into(),
        }
    }
}

/// A source of geotagged photos, place candidates and place details.
pub trait Provider: Send + Sync {
    fn name(&self) -> &str;

    /// Photos in `region` related to `keywords`, with relevance filled in.
    fn search_photos(&self, region: &str, keywords: &[String]) -> Result<Vec<GeoPhoto>, ProviderError>;

    /// Place candidates in `region` related to `keywords`.
    fn search_places(&self, region: &str, keywords: &[String]) -> Result<Vec<Spot>, ProviderError>;

    fn fetch_details(&self, spot: &Spot) -> Result<SpotDetails, ProviderError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixturePhoto {
    pub photo_id: String,
    pub lat: f64,
    pub lng: f64,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixturePlace {
    pub place_id: String,
    pub name: String,
    pub lat: f64,
    pub lng: f64,
    #[serde(default)]
    pub review_score: Option<f64>,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default)]
    pub nearby_count: usize,
    #[serde(default)]
    pub details: Option<SpotDetails>,
}

/// One region's fixture file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionFixture {
    pub region: String,
    #[serde(default)]
    pub photos: Vec<FixturePhoto>,
    #[serde(default)]
    pub places: Vec<FixturePlace>,
}

/// Deterministic offline provider backed by per-region JSON files.
///
/// Region names match case-insensitively; an unknown region yields empty
/// results. Details for photo-derived spots come from the nearest fixture
/// place within [`FixtureProvider::DETAIL_RADIUS_M`], otherwise they are
/// summarised from the spot itself.
#[derive(Debug, Clone, Default)]
pub struct FixtureProvider {
    regions: BTreeMap<String, RegionFixture>,
}

impl FixtureProvider {
    pub const NAME: &'static str = "fixture";
    pub const DETAIL_RADIUS_M: f64 = 1_000.0;

    fn error(message: impl Into<String>) -> ProviderError {
        ProviderError::new(Self::NAME, message)
    }

    pub fn from_regions(regions: impl IntoIterator<Item = RegionFixture>) -> Result<Self, ProviderError> {
        let mut map = BTreeMap::new();
        for region in regions {
            for p in &region.photos {
                GeoPoint::new(p.lat, p.lng).map_err(|e| Self::error(format!("photo {}: {e}", p.photo_id)))?;
            }
            for p in &region.places {
                GeoPoint::new(p.lat, p.lng).map_err(|e| Self::error(format!("place {}: {e}", p.place_id)))?;
            }
            let key = normalize_keyword(&region.region).ok_or_else(|| Self::error("fixture with empty region"))?;
            if map.insert(key, region).is_some() {
                return Err(Self::error("two fixture files for the same region"));
            }
        }
        Ok(Self { regions: map })
    }

    /// Load every `*.json` file in `dir` as a [`RegionFixture`].
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, ProviderError> {
        let dir = dir.as_ref();
        let entries = fs::read_dir(dir).map_err(|e| Self::error(format!("{}: {e}", dir.display())))?;
        let mut paths: Vec<_> = entries
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let regions = paths
            .iter()
            .map(|path| {
                let text = fs::read_to_string(path).map_err(|e| Self::error(format!("{}: {e}", path.display())))?;
                serde_json::from_str::<RegionFixture>(&text)
                    .map_err(|e| Self::error(format!("{}: {e}", path.display())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_regions(regions)
    }

    pub fn regions(&self) -> impl Iterator<Item = &RegionFixture> {
        self.regions.values()
    }

    fn region(&self, name: &str) -> Option<&RegionFixture> {
        normalize_keyword(name).and_then(|k| self.regions.get(&k))
    }

    fn place(&self, place_id: &str) -> Option<&FixturePlace> {
        self.regions
            .values()
            .flat_map(|r| &r.places)
            .find(|p| p.place_id == place_id)
    }

    fn place_details(place: &FixturePlace) -> SpotDetails {
        place.details.clone().unwrap_or_else(|| SpotDetails {
            description: place.name.clone(),
            address: None,
            url: None,
        })
    }
}

impl Provider for FixtureProvider {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn search_photos(&self, region: &str, keywords: &[String]) -> Result<Vec<GeoPhoto>, ProviderError> {
        let Some(region) = self.region(region) else {
            return Ok(Vec::new());
        };
        Ok(region
            .photos
            .iter()
            .filter_map(|p| {
                let relevance = keyword_relevance(keywords, &p.tags, &p.title);
                (relevance > 0.0).then(|| GeoPhoto {
                    photo_id: p.photo_id.clone(),
                    lat: p.lat,
                    lng: p.lng,
                    title: p.title.clone(),
                    tags: p.tags.clone(),
                    relevance,
                })
            })
            .collect())
    }

    fn search_places(&self, region: &str, keywords: &[String]) -> Result<Vec<Spot>, ProviderError> {
        let Some(region) = self.region(region) else {
            return Ok(Vec::new());
        };
        Ok(region
            .places
            .iter()
            .filter_map(|p| {
                let relevance = keyword_relevance(keywords, &p.tags, &p.name);
                (relevance > 0.0).then(|| Spot {
                    spot_id: format!("place:{}", p.place_id),
                    name: p.name.clone(),
                    lat: p.lat,
                    lng: p.lng,
                    nearby_count: p.nearby_count,
                    relevance,
                    review_score: p.review_score,
                    details: None,
                    member_photo_ids: Vec::new(),
                })
            })
            .collect())
    }

    fn fetch_details(&self, spot: &Spot) -> Result<SpotDetails, ProviderError> {
        if let Some(place_id) = spot.spot_id.strip_prefix("place:") {
            return self
                .place(place_id)
                .map(Self::place_details)
                .ok_or_else(|| Self::error(format!("unknown place {place_id}")));
        }
        let nearest = self
            .regions
            .values()
            .flat_map(|r| &r.places)
            .map(|p| (haversine_m(spot.point(), GeoPoint { lat: p.lat, lng: p.lng }), p))
            .filter(|(d, _)| *d <= Self::DETAIL_RADIUS_M)
            .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.place_id.cmp(&b.1.place_id)));
        Ok(match nearest {
            Some((_, place)) => Self::place_details(place),
            None => SpotDetails {
                description: format!("{}: {} photos taken here", spot.name, spot.nearby_count),
                address: None,
                url: None,
            },
        })
    }
}
