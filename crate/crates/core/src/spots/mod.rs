//! Sightseeing-spot retrieval for a region and a set of query keywords.
//!
//! In photo-search mode, geotagged photos matching the query are grouped
//! around dense seeds; groups that are both large and relevant enough become
//! spots. In place-search mode the provider's place candidates are used as-is.
//! Either way the spots are ranked, capped and decorated with details.

mod provider;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{haversine_m, GeoPoint};
use crate::ingest::normalize_keyword;
use crate::params::SpotParams;

pub use provider::{FixturePhoto, FixturePlace, FixtureProvider, Provider, ProviderError, RegionFixture};

pub const DEFAULT_RADIUS_M: f64 = 300.0;
pub const DEFAULT_MIN_NEARBY: usize = 5;
pub const DEFAULT_MIN_RELEVANCE: f64 = 0.5;
pub const DEFAULT_LIMIT: usize = 20;

#[derive(Debug, Error)]
pub enum SpotError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderMode {
    PlaceSearch,
    #[default]
    PhotoSearch,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingMode {
    ReviewScore,
    #[default]
    KeywordRelevance,
    PhotoCount,
}

macro_rules! snake_case_enum {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$(<$ty>::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self { $(<$ty>::$variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(<$ty>::$variant),)+
                    other => Err(format!(
                        "unknown value `{other}`, expected one of: {}",
                        [$($name),+].join(", ")
                    )),
                }
            }
        }
    };
}

snake_case_enum!(ProviderMode { PlaceSearch => "place_search", PhotoSearch => "photo_search" });
snake_case_enum!(RankingMode {
    ReviewScore => "review_score",
    KeywordRelevance => "keyword_relevance",
    PhotoCount => "photo_count",
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotQuery {
    pub region: String,
    /// Normalised, de-duplicated, in first-seen order.
    pub keywords: Vec<String>,
    pub provider_mode: ProviderMode,
    pub ranking_mode: RankingMode,
}

impl SpotQuery {
    pub fn new<S: AsRef<str>>(
        region: &str,
        keywords: &[S],
        provider_mode: ProviderMode,
        ranking_mode: RankingMode,
    ) -> Result<Self, SpotError> {
        let region = region.trim();
        if region.is_empty() {
            return Err(SpotError::InvalidQuery("region is empty".into()));
        }
        let mut normalized: Vec<String> = Vec::with_capacity(keywords.len());
        for k in keywords {
            if let Some(k) = normalize_keyword(k.as_ref()) {
                if !normalized.contains(&k) {
                    normalized.push(k);
                }
            }
        }
        if normalized.is_empty() {
            return Err(SpotError::InvalidQuery("no query keywords".into()));
        }
        Ok(Self {
            region: region.to_string(),
            keywords: normalized,
            provider_mode,
            ranking_mode,
        })
    }
}

/// A geotagged photo returned by a photo-search provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoPhoto {
    pub photo_id: String,
    pub lat: f64,
    pub lng: f64,
    pub title: String,
    pub tags: Vec<String>,
    /// Fraction of the query keywords this photo matches.
    pub relevance: f64,
}

impl GeoPhoto {
    pub fn point(&self) -> GeoPoint {
        GeoPoint {
            lat: self.lat,
            lng: self.lng,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotDetails {
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spot {
    pub spot_id: String,
    pub name: String,
    pub lat: f64,
    pub lng: f64,
    pub nearby_count: usize,
    pub relevance: f64,
    pub review_score: Option<f64>,
    pub details: Option<SpotDetails>,
    /// Photos aggregated into this spot; empty for provider places.
    #[serde(default)]
    pub member_photo_ids: Vec<String>,
}

impl Spot {
    pub fn point(&self) -> GeoPoint {
        GeoPoint {
            lat: self.lat,
            lng: self.lng,
        }
    }
}

/// Lowercase word tokens of free text.
fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Fraction of `keywords` found among `tags` (exact, normalised) or as a
/// contiguous token run in `title`.
pub fn keyword_relevance<S: AsRef<str>>(keywords: &[String], tags: &[S], title: &str) -> f64 {
    if keywords.is_empty() {
        return 0.0;
    }
    let tags: Vec<String> = tags.iter().filter_map(|t| normalize_keyword(t.as_ref())).collect();
    let title_tokens = tokens(title);
    let hits = keywords
        .iter()
        .filter(|k| {
            if tags.iter().any(|t| t == *k) {
                return true;
            }
            let needle = tokens(k);
            !needle.is_empty() && title_tokens.windows(needle.len()).any(|w| w == needle.as_slice())
        })
        .count();
    hits as f64 / keywords.len() as f64
}

/// Photos within `radius_m` of `center`, boundary inclusive.
pub fn count_nearby(photos: &[GeoPhoto], center: GeoPoint, radius_m: f64) -> usize {
    photos
        .iter()
        .filter(|p| haversine_m(p.point(), center) <= radius_m)
        .count()
}

/// Greedy density clustering of query-matching photos into candidate spots.
///
/// Repeatedly the unassigned photo with the most unassigned photos within
/// `radius_m` (itself included; ties to the smaller `photo_id`) seeds a group
/// that takes all of those photos. A group becomes a spot when it has at
/// least `min_nearby` photos and a mean relevance of at least
/// `min_relevance`. Spots come out in seed order.
pub fn aggregate_spots(photos: &[GeoPhoto], params: &SpotParams) -> Vec<Spot> {
    let mut photos: Vec<&GeoPhoto> = photos.iter().collect();
    photos.sort_by(|a, b| a.photo_id.cmp(&b.photo_id));
    photos.dedup_by(|a, b| a.photo_id == b.photo_id);
    let n = photos.len();

    // symmetric by construction; the live counts below rely on it
    let mut neighbors: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for i in 0..n {
        for j in i + 1..n {
            if haversine_m(photos[i].point(), photos[j].point()) <= params.radius_m {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }
    let mut live_count: Vec<usize> = neighbors.iter().map(Vec::len).collect();
    let mut assigned = vec![false; n];
    let mut spots = Vec::new();

    loop {
        let seed = (0..n)
            .filter(|&i| !assigned[i])
            .max_by(|&a, &b| live_count[a].cmp(&live_count[b]).then_with(|| b.cmp(&a)));
        let Some(seed) = seed else { break };

        let members: Vec<usize> = neighbors[seed].iter().copied().filter(|&j| !assigned[j]).collect();
        for &q in &members {
            assigned[q] = true;
            for &r in &neighbors[q] {
                live_count[r] -= 1;
            }
        }

        let count = members.len() as f64;
        let lat = members.iter().map(|&i| photos[i].lat).sum::<f64>() / count;
        let lng = members.iter().map(|&i| photos[i].lng).sum::<f64>() / count;
        let relevance = members.iter().map(|&i| photos[i].relevance).sum::<f64>() / count;
        if members.len() < params.min_nearby || relevance < params.min_relevance {
            continue;
        }
        let seed_photo = photos[seed];
        spots.push(Spot {
            spot_id: format!("photo:{}", seed_photo.photo_id),
            name: if seed_photo.title.trim().is_empty() {
                seed_photo.photo_id.clone()
            } else {
                seed_photo.title.clone()
            },
            lat,
            lng,
            nearby_count: members.len(),
            relevance,
            review_score: None,
            details: None,
            member_photo_ids: members.iter().map(|&i| photos[i].photo_id.clone()).collect(),
        });
    }
    spots
}

/// Order spots for display. Every mode sorts descending on its key and
/// breaks ties by `spot_id`; missing review scores sort last.
pub fn rank_spots(mut spots: Vec<Spot>, mode: RankingMode) -> Vec<Spot> {
    spots.sort_by(|a, b| {
        let primary = match mode {
            RankingMode::ReviewScore => match (a.review_score, b.review_score) {
                (Some(x), Some(y)) => y.total_cmp(&x),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => std::cmp::Ordering::Equal,
            },
            RankingMode::KeywordRelevance => b.relevance.total_cmp(&a.relevance),
            RankingMode::PhotoCount => b.nearby_count.cmp(&a.nearby_count),
        };
        primary.then_with(|| a.spot_id.cmp(&b.spot_id))
    });
    spots
}

/// Run a query against a provider and return at most `params.limit` ranked
/// spots with details attached.
pub fn search_spots(query: &SpotQuery, provider: &dyn Provider, params: &SpotParams) -> Result<Vec<Spot>, SpotError> {
    let candidates = match query.provider_mode {
        ProviderMode::PhotoSearch => {
            let photos = provider.search_photos(&query.region, &query.keywords)?;
            aggregate_spots(&photos, params)
        }
        ProviderMode::PlaceSearch => provider.search_places(&query.region, &query.keywords)?,
    };
    let mut ranked = rank_spots(candidates, query.ranking_mode);
    ranked.truncate(params.limit);
    for spot in &mut ranked {
        spot.details = Some(provider.fetch_details(spot)?);
    }
    Ok(ranked)
}
