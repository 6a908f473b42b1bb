//! Loader for the MovieLens-100K files (`u.data`, `u.user`, `u.item`, and
//! optionally `u.genre` and `u.occupation`).
//!
//! A rating means the user watched the movie; the rating value is ignored.
//! Movies without any of the 18 named genres are dropped from every table.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::domain::AttributeDomain;
use crate::error::{Error, Result};
use crate::relation::BinaryRelation;

/// Genre flags of `u.item`, in file order; the first one is not a genre.
pub const GENRE_FLAGS: [&str; 19] = [
    "unknown",
    "Action",
    "Adventure",
    "Animation",
    "Children's",
    "Comedy",
    "Crime",
    "Documentary",
    "Drama",
    "Fantasy",
    "Film-Noir",
    "Horror",
    "Musical",
    "Mystery",
    "Romance",
    "Sci-Fi",
    "Thriller",
    "War",
    "Western",
];

/// Movie count of the published summary tables; the loader reports any
/// difference instead of failing.
pub const EXPECTED_MOVIES: usize = 1680;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LoadReport {
    pub users: usize,
    pub raw_movies: usize,
    pub kept_movies: usize,
    /// Ids of movies dropped for having no named genre.
    pub dropped_movies: Vec<String>,
    pub rating_lines: usize,
    /// Repeated (user, movie) pairs collapsed into one edge.
    pub duplicate_ratings: usize,
    /// Ratings of dropped movies.
    pub ratings_of_dropped: usize,
}

impl LoadReport {
    /// A note when the kept movie count differs from [`EXPECTED_MOVIES`].
    pub fn discrepancy(&self) -> Option<String> {
        (self.kept_movies != EXPECTED_MOVIES).then(|| {
            format!(
                "kept {} of {} movies; the reference count is {}",
                self.kept_movies, self.raw_movies, EXPECTED_MOVIES
            )
        })
    }
}

/// The MovieLens relations: users × movies, movies × genres, users ×
/// occupations, users × gender, and users × age (one-to-one into an `Age`
/// domain whose labels are the user ids and whose values are the ages).
#[derive(Clone, Debug)]
pub struct MovieLens {
    pub um: BinaryRelation,
    pub mg: BinaryRelation,
    pub uo: BinaryRelation,
    pub us: BinaryRelation,
    pub ua: BinaryRelation,
    pub report: LoadReport,
}

impl MovieLens {
    /// A table by name; reversed names (`MU`, `GM`, `OU`, `SU`, `AU`) give
    /// the transposes.
    pub fn table(&self, name: &str) -> Option<BinaryRelation> {
        let direct = |n: &str| match n {
            "UM" => Some(&self.um),
            "MG" => Some(&self.mg),
            "UO" => Some(&self.uo),
            "US" => Some(&self.us),
            "UA" => Some(&self.ua),
            _ => None,
        };
        if let Some(rel) = direct(name) {
            return Some(rel.clone());
        }
        let reversed: String = name.chars().rev().collect();
        direct(&reversed).map(BinaryRelation::transpose)
    }

    /// Mean age over all users.
    pub fn mean_age(&self) -> f64 {
        let ages = self.ua.col_domain().values().expect("ages attached");
        ages.iter().sum::<f64>() / ages.len() as f64
    }
}

fn parse_error(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

/// Lines of a file decoded as ISO-8859-1, so any byte sequence is accepted.
fn latin1_lines(path: &Path) -> Result<Vec<String>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(bytes
        .split(|&b| b == b'\n')
        .map(|line| {
            let line = line.strip_suffix(b"\r").unwrap_or(line);
            line.iter().map(|&b| b as char).collect()
        })
        .collect())
}

fn numbered_lines(lines: &[String]) -> impl Iterator<Item = (usize, &str)> {
    lines
        .iter()
        .enumerate()
        .map(|(i, l)| (i + 1, l.as_str()))
        .filter(|(_, l)| !l.trim().is_empty())
}

struct User {
    id: String,
    age: f64,
    gender: String,
    occupation: String,
}

fn read_users(path: &Path) -> Result<Vec<User>> {
    let lines = latin1_lines(path)?;
    let mut users = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in numbered_lines(&lines) {
        let f: Vec<&str> = line.split('|').collect();
        if f.len() < 4 {
            return Err(parse_error(path, n, "expected `id|age|gender|occupation|zip`"));
        }
        let id = f[0].trim().to_string();
        if id.is_empty() || !seen.insert(id.clone()) {
            return Err(parse_error(path, n, format!("missing or repeated user id `{id}`")));
        }
        let age: f64 = f[1]
            .trim()
            .parse()
            .map_err(|_| parse_error(path, n, format!("age `{}` is not a number", f[1])))?;
        let gender = f[2].trim().to_string();
        if gender != "M" && gender != "F" {
            return Err(parse_error(path, n, format!("gender `{gender}` is not M or F")));
        }
        users.push(User {
            id,
            age,
            gender,
            occupation: f[3].trim().to_string(),
        });
    }
    Ok(users)
}

struct Movie {
    id: String,
    genres: Vec<usize>,
}

fn read_items(path: &Path) -> Result<Vec<Movie>> {
    let lines = latin1_lines(path)?;
    let mut movies = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in numbered_lines(&lines) {
        let f: Vec<&str> = line.split('|').collect();
        if f.len() < 1 + GENRE_FLAGS.len() {
            return Err(parse_error(
                path,
                n,
                format!("expected at least {} `|`-separated fields, got {}", 1 + GENRE_FLAGS.len(), f.len()),
            ));
        }
        let id = f[0].trim().to_string();
        if id.is_empty() || !seen.insert(id.clone()) {
            return Err(parse_error(path, n, format!("missing or repeated movie id `{id}`")));
        }
        let flags = &f[f.len() - GENRE_FLAGS.len()..];
        let mut genres = Vec::new();
        for (g, flag) in flags.iter().enumerate() {
            match flag.trim() {
                "1" if g > 0 => genres.push(g - 1),
                "0" | "1" => {}
                other => return Err(parse_error(path, n, format!("genre flag `{other}` is not 0 or 1"))),
            }
        }
        movies.push(Movie { id, genres });
    }
    Ok(movies)
}

/// Optional list file: the first `|`-separated field of each non-empty line.
fn read_list(path: &Path) -> Result<Option<Vec<String>>> {
    if !path.exists() {
        return Ok(None);
    }
    let lines = latin1_lines(path)?;
    Ok(Some(
        numbered_lines(&lines)
            .map(|(_, l)| l.split('|').next().unwrap_or("").trim().to_string())
            .filter(|s| !s.is_empty())
            .collect(),
    ))
}

fn file(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

/// Loads a MovieLens-100K directory.
pub fn load_movielens(dir: impl AsRef<Path>) -> Result<MovieLens> {
    let dir = dir.as_ref();
    let users = read_users(&file(dir, "u.user"))?;
    let movies = read_items(&file(dir, "u.item"))?;

    let genre_names: Vec<String> = match read_list(&file(dir, "u.genre"))? {
        Some(list) if list.len() == GENRE_FLAGS.len() => list[1..].to_vec(),
        Some(list) => {
            return Err(parse_error(
                &file(dir, "u.genre"),
                1,
                format!("expected {} genres, found {}", GENRE_FLAGS.len(), list.len()),
            ))
        }
        None => GENRE_FLAGS[1..].iter().map(|s| s.to_string()).collect(),
    };
    let mut occupations = read_list(&file(dir, "u.occupation"))?.unwrap_or_default();
    for u in &users {
        if !occupations.contains(&u.occupation) {
            occupations.push(u.occupation.clone());
        }
    }

    let user_domain = AttributeDomain::new("User", users.iter().map(|u| u.id.clone()))?.shared();
    let kept: Vec<&Movie> = movies.iter().filter(|m| !m.genres.is_empty()).collect();
    let dropped: Vec<String> = movies.iter().filter(|m| m.genres.is_empty()).map(|m| m.id.clone()).collect();
    let movie_domain = AttributeDomain::new("Movie", kept.iter().map(|m| m.id.clone()))?.shared();
    let genre_domain = AttributeDomain::new("Genre", genre_names)?.shared();
    let occupation_domain = AttributeDomain::new("Occupation", occupations)?.shared();
    let gender_domain = AttributeDomain::new("Gender", ["M", "F"])?.shared();
    let age_domain = AttributeDomain::new("Age", users.iter().map(|u| u.id.clone()))?
        .with_values(users.iter().map(|u| u.age).collect())?
        .shared();

    let ratings_path = file(dir, "u.data");
    let lines = latin1_lines(&ratings_path)?;
    let dropped_set: HashSet<&str> = dropped.iter().map(String::as_str).collect();
    let known_movies: HashSet<&str> = movies.iter().map(|m| m.id.as_str()).collect();
    let mut pairs: HashSet<(usize, usize)> = HashSet::new();
    let mut um_edges = Vec::new();
    let mut report = LoadReport {
        users: users.len(),
        raw_movies: movies.len(),
        kept_movies: kept.len(),
        dropped_movies: dropped.clone(),
        ..LoadReport::default()
    };
    for (n, line) in numbered_lines(&lines) {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 {
            return Err(parse_error(&ratings_path, n, "expected `user<TAB>item<TAB>rating<TAB>timestamp`"));
        }
        report.rating_lines += 1;
        let (user, item) = (f[0].trim(), f[1].trim());
        let u = user_domain
            .index_of(user)
            .ok_or_else(|| parse_error(&ratings_path, n, format!("unknown user id `{user}`")))?;
        if !known_movies.contains(item) {
            return Err(parse_error(&ratings_path, n, format!("unknown movie id `{item}`")));
        }
        if dropped_set.contains(item) {
            report.ratings_of_dropped += 1;
            continue;
        }
        let m = movie_domain.index_of(item).expect("kept movie");
        if pairs.insert((u, m)) {
            um_edges.push((u, m));
        } else {
            report.duplicate_ratings += 1;
        }
    }

    let um = BinaryRelation::new(user_domain.clone(), movie_domain.clone(), um_edges)?;
    let mg = BinaryRelation::new(
        movie_domain.clone(),
        genre_domain,
        kept.iter().enumerate().flat_map(|(i, m)| m.genres.iter().map(move |&g| (i, g))),
    )?;
    let occupation_index: HashMap<&str, usize> = occupation_domain
        .labels()
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let uo = BinaryRelation::new(
        user_domain.clone(),
        occupation_domain.clone(),
        users.iter().enumerate().map(|(i, u)| (i, occupation_index[u.occupation.as_str()])),
    )?;
    let us = BinaryRelation::new(
        user_domain.clone(),
        gender_domain,
        users.iter().enumerate().map(|(i, u)| (i, usize::from(u.gender == "F"))),
    )?;
    let ua = BinaryRelation::identity_between(user_domain, Arc::clone(&age_domain))?;

    Ok(MovieLens {
        um,
        mg,
        uo,
        us,
        ua,
        report,
    })
}
