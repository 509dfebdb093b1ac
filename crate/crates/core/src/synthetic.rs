//! Seeded synthetic corpora shaped like a personal travel-photo collection:
//! a few broad concepts that co-occur with many specific ones, plus a long
//! tail of rare tags.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geo::GeoPoint;
use crate::ingest::{PhotoCorpus, PhotoRecord, TagAssignment};

const THEMES: &[(&str, &[&str])] = &[
    (
        "nature",
        &[
            "forest",
            "lake",
            "mountain",
            "river",
            "waterfall",
            "tree",
            "grass",
            "flower",
            "valley",
            "hill",
        ],
    ),
    (
        "animal",
        &[
            "cat", "dog", "bird", "horse", "deer", "fox", "bear", "cow", "sheep", "duck", "swan", "penguin",
        ],
    ),
    (
        "water",
        &[
            "ocean", "beach", "sand", "wave", "boat", "harbor", "island", "coast", "pier",
        ],
    ),
    (
        "building",
        &[
            "temple",
            "shrine",
            "castle",
            "church",
            "tower",
            "bridge",
            "house",
            "skyscraper",
            "gate",
        ],
    ),
    (
        "food",
        &[
            "sushi", "ramen", "noodle", "dessert", "fruit", "coffee", "bread", "seafood", "plate",
        ],
    ),
    ("person", &["man", "woman", "child", "group", "smile", "clothing"]),
    ("sky", &["cloud", "sunset", "sunrise", "night", "star", "moon"]),
    ("vehicle", &["car", "train", "bus", "bicycle", "airplane", "station"]),
    ("indoor", &["room", "table", "museum", "shop", "restaurant", "window"]),
    ("snow", &["ice", "ski", "winter", "frost"]),
];

const TAIL: usize = 120;

/// A deterministic corpus of `n` photos.
pub fn synthetic_corpus(n: usize, seed: u64) -> PhotoCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let photos = (0..n)
        .map(|i| {
            let mut tags = Vec::new();
            let outdoor = rng.random_bool(0.7);
            if outdoor {
                tags.push(("outdoor".to_string(), rng.random_range(0.6..1.0)));
            }
            let themes = rng.random_range(1..=2);
            for _ in 0..themes {
                let (broad, specific) = THEMES.choose(&mut rng).expect("themes");
                if rng.random_bool(0.8) {
                    tags.push((broad.to_string(), rng.random_range(0.4..1.0)));
                }
                for _ in 0..rng.random_range(1..=3) {
                    let k = specific.choose(&mut rng).expect("keywords");
                    tags.push((k.to_string(), rng.random_range(0.2..1.0)));
                }
            }
            if rng.random_bool(0.15) {
                tags.push((
                    format!("rare{:03}", rng.random_range(0..TAIL)),
                    rng.random_range(0.1..0.9),
                ));
            }
            let tags = tags
                .into_iter()
                .map(|(k, c)| TagAssignment::new(&k, c).expect("generated tags are valid"))
                .collect();
            let mut photo = PhotoRecord::new(format!("IMG_{i:05}"), format!("photos/IMG_{i:05}.jpg"), tags);
            if rng.random_bool(0.3) {
                photo.geo = Some(
                    GeoPoint::new(rng.random_range(26.0..45.0), rng.random_range(127.0..146.0)).expect("in range"),
                );
            }
            photo
        })
        .collect();
    PhotoCorpus::new(photos).expect("generated ids are unique")
}
