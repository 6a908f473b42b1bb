//! Synthetic gender/user/movie/genre tables with a planted pattern, and
//! structure-free counterparts ("anti-tables") of each.
//!
//! In the structured tables men mostly watch the first `n_manly_movies`
//! movies and women the rest, and those movies mostly carry genres from the
//! first or second half of the genre list respectively. Chaining
//! `SU ⋈ UM ⋈ MG` therefore separates the genre distributions of the two
//! genders; replacing any one table by its anti-table breaks the pattern.

use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{ChainQuery, Semantics};
use crate::domain::AttributeDomain;
use crate::error::{Error, Result};
use crate::io::write_relation;
use crate::randomize::stream_rng;
use crate::relation::BinaryRelation;
use crate::stats::L1Distance;

pub const MEN: &str = "M";
pub const WOMEN: &str = "F";

const STRUCTURED_SALT: u64 = 0x5354_5255;
const ANTI_SALT: u64 = 0x414e_5449;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub n_men: usize,
    pub n_women: usize,
    pub n_movies: usize,
    /// The first this many movies are the ones men prefer.
    pub n_manly_movies: usize,
    /// Probability that a user watches a movie of their own side.
    pub p_watch_match: f64,
    /// Probability that a user watches a movie of the other side.
    pub p_watch_mismatch: f64,
    /// Even; the first half are the manly genres.
    pub n_genres: usize,
    /// Probability that a genre draw comes from the movie's own side.
    pub p_genre_match: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 0,
            n_men: 30,
            n_women: 20,
            n_movies: 100,
            n_manly_movies: 60,
            p_watch_match: 0.40,
            p_watch_mismatch: 0.05,
            n_genres: 6,
            p_genre_match: 0.9,
        }
    }
}

impl SyntheticConfig {
    pub fn with_seed(seed: u64) -> Self {
        SyntheticConfig {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, p) in [
            ("p_watch_match", self.p_watch_match),
            ("p_watch_mismatch", self.p_watch_mismatch),
            ("p_genre_match", self.p_genre_match),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(field, format!("probability {p} is outside [0, 1]")));
            }
        }
        for (field, n) in [
            ("n_men", self.n_men),
            ("n_women", self.n_women),
            ("n_movies", self.n_movies),
            ("n_genres", self.n_genres),
        ] {
            if n == 0 {
                return Err(Error::config(field, "must be positive"));
            }
        }
        if self.n_manly_movies > self.n_movies {
            return Err(Error::config("n_manly_movies", "exceeds n_movies"));
        }
        if !self.n_genres.is_multiple_of(2) {
            return Err(Error::config("n_genres", "must be even (two equal sides)"));
        }
        Ok(())
    }

    pub fn n_users(&self) -> usize {
        self.n_men + self.n_women
    }
}

/// Gender × User, User × Movie and Movie × Genre.
#[derive(Clone, Debug)]
pub struct SyntheticTables {
    pub su: BinaryRelation,
    pub um: BinaryRelation,
    pub mg: BinaryRelation,
}

impl SyntheticTables {
    pub fn relations(&self) -> [&BinaryRelation; 3] {
        [&self.su, &self.um, &self.mg]
    }
}

struct Domains {
    gender: Arc<AttributeDomain>,
    user: Arc<AttributeDomain>,
    movie: Arc<AttributeDomain>,
    genre: Arc<AttributeDomain>,
}

fn domains(cfg: &SyntheticConfig) -> Domains {
    Domains {
        gender: AttributeDomain::new("Gender", [MEN, WOMEN]).expect("distinct").shared(),
        user: AttributeDomain::numbered("User", "u", cfg.n_users()).shared(),
        movie: AttributeDomain::numbered("Movie", "m", cfg.n_movies).shared(),
        genre: AttributeDomain::numbered("Genre", "G", cfg.n_genres).shared(),
    }
}

fn gender_table(d: &Domains, men: &[usize], women: &[usize]) -> BinaryRelation {
    let edges = men.iter().map(|&u| (0, u)).chain(women.iter().map(|&u| (1, u)));
    BinaryRelation::new(d.gender.clone(), d.user.clone(), edges).expect("in bounds")
}

/// Two genre draws per movie; a repeated draw leaves a single genre.
fn genre_table(d: &Domains, cfg: &SyntheticConfig, rng: &mut ChaCha8Rng, draw: impl Fn(usize, &mut ChaCha8Rng) -> usize) -> BinaryRelation {
    let edges: Vec<(usize, usize)> = (0..cfg.n_movies)
        .flat_map(|m| [(m, draw(m, rng)), (m, draw(m, rng))])
        .collect();
    BinaryRelation::new(d.movie.clone(), d.genre.clone(), edges).expect("in bounds")
}

/// Tables with the planted gender/genre pattern.
pub fn generate_structured(cfg: &SyntheticConfig) -> Result<SyntheticTables> {
    cfg.validate()?;
    let d = domains(cfg);
    let mut rng = stream_rng(cfg.seed, STRUCTURED_SALT, 0);

    let men: Vec<usize> = (0..cfg.n_men).collect();
    let women: Vec<usize> = (cfg.n_men..cfg.n_users()).collect();
    let su = gender_table(&d, &men, &women);

    let mut um_edges = Vec::new();
    for u in 0..cfg.n_users() {
        let is_man = u < cfg.n_men;
        for m in 0..cfg.n_movies {
            let manly = m < cfg.n_manly_movies;
            let p = if is_man == manly {
                cfg.p_watch_match
            } else {
                cfg.p_watch_mismatch
            };
            if rng.random_bool(p) {
                um_edges.push((u, m));
            }
        }
    }
    let um = BinaryRelation::new(d.user.clone(), d.movie.clone(), um_edges)?;

    let half = cfg.n_genres / 2;
    let mg = genre_table(&d, cfg, &mut rng, |m, rng| {
        let manly_movie = m < cfg.n_manly_movies;
        let own_side = rng.random_bool(cfg.p_genre_match);
        let manly_genre = manly_movie == own_side;
        let offset = if manly_genre { 0 } else { half };
        offset + rng.random_range(0..half)
    });

    Ok(SyntheticTables { su, um, mg })
}

/// Structure-free tables over the same domains: random gender assignment,
/// uniform watching at the average probability, uniform genres.
pub fn generate_anti(cfg: &SyntheticConfig) -> Result<SyntheticTables> {
    cfg.validate()?;
    let d = domains(cfg);
    let mut rng = stream_rng(cfg.seed, ANTI_SALT, 0);

    let mut users: Vec<usize> = (0..cfg.n_users()).collect();
    users.shuffle(&mut rng);
    let (men, women) = users.split_at(cfg.n_men);
    let su = gender_table(&d, men, women);

    let p = (cfg.p_watch_match + cfg.p_watch_mismatch) / 2.0;
    let mut um_edges = Vec::new();
    for u in 0..cfg.n_users() {
        for m in 0..cfg.n_movies {
            if rng.random_bool(p) {
                um_edges.push((u, m));
            }
        }
    }
    let um = BinaryRelation::new(d.user.clone(), d.movie.clone(), um_edges)?;

    let mg = genre_table(&d, cfg, &mut rng, |_, rng| rng.random_range(0..cfg.n_genres));

    Ok(SyntheticTables { su, um, mg })
}

/// `SU ⋈ UM ⋈ MG` under path-count semantics, named `SU`, `UM`, `MG`.
pub fn synthetic_chain(su: &BinaryRelation, um: &BinaryRelation, mg: &BinaryRelation) -> Result<ChainQuery> {
    Ok(ChainQuery::new(vec![su.clone(), um.clone(), mg.clone()])?
        .with_names(["SU", "UM", "MG"])
        .with_semantics(Semantics::PathCount))
}

/// L1 distance between the genre distributions reached from men and from women.
pub fn gender_genre_distance() -> L1Distance {
    L1Distance {
        group_a: MEN.into(),
        group_b: WOMEN.into(),
    }
}

/// File names used by [`write_tables`], structured then anti.
pub const TABLE_FILES: [&str; 6] = ["su.tsv", "um.tsv", "mg.tsv", "rsu.tsv", "rum.tsv", "rmg.tsv"];

/// Writes both table sets into `dir` as relation files.
pub fn write_tables(dir: &Path, structured: &SyntheticTables, anti: &SyntheticTables) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tables = structured.relations().into_iter().chain(anti.relations());
    for (rel, name) in tables.zip(TABLE_FILES) {
        write_relation(rel, dir.join(name))?;
    }
    Ok(())
}
