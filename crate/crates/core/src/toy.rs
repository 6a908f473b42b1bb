//! The three-table movie database used throughout the docs and tests:
//! genres of movies (GM), directors of movies (MD) and ages of directors (DA).

use std::sync::Arc;

use crate::chain::{ChainQuery, Semantics};
use crate::domain::AttributeDomain;
use crate::relation::BinaryRelation;

pub const GENRES: [&str; 3] = ["Romance", "Drama", "History"];
pub const DIRECTORS: [&str; 2] = ["C. Waitt", "T. George"];

pub fn genre() -> Arc<AttributeDomain> {
    AttributeDomain::new("Genre", GENRES).unwrap().shared()
}

pub fn movie() -> Arc<AttributeDomain> {
    AttributeDomain::numbered("Movie", "m", 7).shared()
}

pub fn director() -> Arc<AttributeDomain> {
    AttributeDomain::new("Director", DIRECTORS).unwrap().shared()
}

pub fn age() -> Arc<AttributeDomain> {
    AttributeDomain::new("Age", ["30", "60"])
        .unwrap()
        .with_values(vec![30.0, 60.0])
        .unwrap()
        .shared()
}

pub fn gm() -> BinaryRelation {
    BinaryRelation::from_label_pairs(
        genre(),
        movie(),
        [
            ("Romance", "m1"),
            ("Romance", "m2"),
            ("Drama", "m3"),
            ("Drama", "m4"),
            ("Drama", "m5"),
            ("Drama", "m6"),
            ("Drama", "m7"),
            ("History", "m6"),
            ("History", "m7"),
        ],
    )
    .unwrap()
}

pub fn md() -> BinaryRelation {
    let pairs = (1..=7).map(|m| (m, if m <= 5 { "C. Waitt" } else { "T. George" }));
    let labels: Vec<(String, &str)> = pairs.map(|(m, d)| (format!("m{m}"), d)).collect();
    BinaryRelation::from_label_pairs(movie(), director(), labels.iter().map(|(m, d)| (m.as_str(), *d)))
        .unwrap()
}

pub fn da() -> BinaryRelation {
    BinaryRelation::from_label_pairs(director(), age(), [("C. Waitt", "30"), ("T. George", "60")])
        .unwrap()
}

/// `GM ⋈ MD ⋈ DA` under path-count semantics, named `GM`, `MD`, `DA`.
pub fn chain() -> ChainQuery {
    ChainQuery::new(vec![gm(), md(), da()])
        .unwrap()
        .with_names(["GM", "MD", "DA"])
        .with_semantics(Semantics::PathCount)
}
