//! End-to-end acceptance checks. Prints one PASS/FAIL/SKIP line per
//! criterion and exits nonzero if any criterion fails.
//!
//! The MovieLens criterion runs only when `MOVIELENS_DIR` names an ml-100k
//! directory; `MOVIELENS_SAMPLES` overrides its sample count (default 999).

use std::collections::HashMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use relsig::datagen::{self, SyntheticConfig, SyntheticTables};
use relsig::movielens::{load_movielens, MovieLens};
use relsig::oracle::{
    count_margin_class, enumerate_margin_class, exact_expected_path_matrix, exact_null_distribution, exact_p_value,
    run_proposition_suite, PropositionChecker, SuiteConfig,
};
use relsig::parallel::{with_threads, ExecMode};
use relsig::randomize::swap_randomize;
use relsig::report::machine_report;
use relsig::significance::{expected_path_matrix, run_family, run_hypothesis_with};
use relsig::stats::{ProportionDifference, WeightedAverage};
use relsig::toy;
use relsig::{
    AttributeDomain, BinaryRelation, ChainQuery, HypothesisSpec, PointSelection, RandomizationPoint, Result,
    Semantics, SignificanceReport, Statistic, SwapChainConfig, Tail,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const SEED: u64 = 1;
const SYNTHETIC_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

enum Status {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    status: Status,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: impl Into<String>) -> Self {
        Outcome {
            status: if ok { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        }
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// ---------------------------------------------------------------- 1

fn toy_products() -> Result<Outcome> {
    let (gm, md, da) = (toy::gm(), toy::md(), toy::da());
    let boolean = gm.boolean_product(&md)?.boolean_product(&da)?.to_dense();
    let paths = toy::chain().evaluate()?.to_rows();
    let expected_bool = vec![vec![1u8, 0], vec![1, 1], vec![0, 1]];
    let expected_paths = vec![vec![2u64, 0], vec![3, 2], vec![0, 2]];
    let chained = gm.path_product(&md)?.then(&da)?.to_rows();
    let ok = boolean == expected_bool && paths == expected_paths && chained == expected_paths;
    Ok(Outcome::check(ok, format!("boolean {boolean:?}, paths {paths:?}")))
}

// ---------------------------------------------------------------- 2

struct ToyHypothesis {
    group: &'static str,
    tail: Tail,
    /// Published sampled p-values at sw(GM), sw(MD), sw(DA).
    published: [Option<f64>; 3],
}

const TOY_HYPOTHESES: [ToyHypothesis; 3] = [
    ToyHypothesis {
        group: "Romance",
        tail: Tail::Lower,
        published: [Some(0.131), None, Some(0.495)],
    },
    ToyHypothesis {
        group: "History",
        tail: Tail::Upper,
        published: [None, Some(0.045), Some(0.495)],
    },
    ToyHypothesis {
        group: "Drama",
        tail: Tail::Lower,
        published: [None, None, Some(0.495)],
    },
];

fn toy_p_values() -> Result<Outcome> {
    let chain = toy::chain();
    let points = [
        RandomizationPoint::relation(0),
        RandomizationPoint::relation(1),
        RandomizationPoint::relation(2),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for h in &TOY_HYPOTHESES {
        let stat: Arc<dyn Statistic> = Arc::new(WeightedAverage { group: h.group.into() });
        let spec = HypothesisSpec::new(chain.clone(), stat.clone(), h.tail).with_seed(SEED);
        let report = run_hypothesis_with(&spec, ExecMode::available())?;
        let original = report.points[0].original;
        for (point, published) in points.iter().zip(h.published) {
            let Some(published) = published else { continue };
            let sampled = report
                .point(*point)
                .map(|p| p.p_value)
                .expect("distinct selection covers every relation of the toy chain");
            let null = exact_null_distribution(&chain, *point, stat.as_ref(), 100_000)?;
            let exact = exact_p_value(&null, original, h.tail, Some(spec.samples));
            let good = close(sampled, exact, 0.03) && close(exact, published, 0.03);
            ok &= good;
            detail.push(format!(
                "{}/{}: sampled {sampled:.4} exact {exact:.4} published {published}",
                h.group,
                point.label(chain.names())
            ));
        }
    }
    Ok(Outcome::check(ok, detail.join("; ")))
}

// ---------------------------------------------------------------- 3

const PUBLISHED_EXPECTATIONS: [(usize, [[f64; 2]; 3]); 3] = [
    (0, [[0.849, 1.151], [3.269, 1.731], [0.882, 1.118]]),
    (1, [[1.413, 0.587], [3.587, 1.413], [1.455, 0.545]]),
    (2, [[0.984, 1.016], [2.492, 2.508], [1.016, 0.984]]),
];

fn toy_expectations() -> Result<Outcome> {
    let chain = toy::chain();
    let mut ok = true;
    let mut detail = Vec::new();
    for (position, published) in PUBLISHED_EXPECTATIONS {
        let point = RandomizationPoint::relation(position);
        let sampled = expected_path_matrix(&chain, point, 10_000, SEED)?;
        let exact = exact_expected_path_matrix(&chain, point, 100_000)?;
        let mut worst: f64 = 0.0;
        let mut worst_exact: f64 = 0.0;
        for (i, row) in published.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                worst = worst.max((sampled.get(i, k) - v).abs());
                worst_exact = worst_exact.max((exact.get(i, k) - v).abs());
            }
        }
        ok &= worst <= 0.05;
        detail.push(format!(
            "{}: max |sampled - published| {worst:.4} (exact vs published {worst_exact:.4})",
            point.label(chain.names())
        ));
    }
    Ok(Outcome::check(ok, detail.join("; ")))
}

// ---------------------------------------------------------------- 4

fn propositions() -> Result<Outcome> {
    let cfg = SuiteConfig {
        trials: 100,
        ..SuiteConfig::default()
    };
    let outcomes = run_proposition_suite(&PropositionChecker::new(), &cfg)?;
    let failed: Vec<String> = outcomes
        .iter()
        .filter_map(|o| o.counterexample.as_ref().map(|c| c.to_string()))
        .collect();
    let held: usize = outcomes.iter().map(|o| o.held).sum();
    let na: usize = outcomes.iter().map(|o| o.not_applicable).sum();
    let ok = outcomes.len() == 12 && failed.is_empty() && outcomes.iter().all(|o| o.held > 0);
    let mut detail = format!("{} identities, {held} instances held, {na} not applicable", outcomes.len());
    if !failed.is_empty() {
        detail.push_str(&format!("; counterexamples: {}", failed.join(" | ")));
    }
    Ok(Outcome::check(ok, detail))
}

// ---------------------------------------------------------------- 5

fn dense(name: &str, rows: &[&[u8]]) -> BinaryRelation {
    let r = AttributeDomain::numbered(format!("{name}Row"), "r", rows.len()).shared();
    let c = AttributeDomain::numbered(format!("{name}Col"), "c", rows[0].len()).shared();
    BinaryRelation::from_dense(r, c, rows).expect("rectangular fixture")
}

fn uniformity_fixtures() -> Vec<(&'static str, BinaryRelation)> {
    vec![
        ("toy GM", toy::gm()),
        ("toy MD", toy::md()),
        ("toy DA", toy::da()),
        ("2x2 identity", dense("I2", &[&[1, 0], &[0, 1]])),
        ("3x3 margin 2", dense("K3", &[&[1, 1, 0], &[0, 1, 1], &[1, 0, 1]])),
        ("3x4 mixed", dense("M34", &[&[1, 1, 0, 0], &[0, 1, 1, 0], &[1, 0, 1, 1]])),
        ("4x4 margin 2", dense("K4", &[&[1, 1, 0, 0], &[0, 1, 1, 0], &[0, 0, 1, 1], &[1, 0, 0, 1]])),
        ("4x5 mixed", dense("M45", &[&[1, 1, 1, 0, 0], &[1, 0, 0, 1, 0], &[0, 1, 0, 1, 1], &[0, 0, 1, 0, 1]])),
        (
            "5x5 margin 2",
            dense(
                "K5",
                &[&[1, 1, 0, 0, 0], &[0, 1, 1, 0, 0], &[0, 0, 1, 1, 0], &[0, 0, 0, 1, 1], &[1, 0, 0, 0, 1]],
            ),
        ),
    ]
}

fn uniformity() -> Result<Outcome> {
    const SAMPLES: usize = 50_000;
    const MEMBER_LIMIT: usize = 5_000;
    let mut ok = true;
    let mut detail = Vec::new();
    for (salt, (name, rel)) in uniformity_fixtures().into_iter().enumerate() {
        if count_margin_class(&rel.row_sums(), &rel.col_sums()) > MEMBER_LIMIT as u128 {
            continue;
        }
        let class = enumerate_margin_class(&rel, MEMBER_LIMIT)?;
        let index: HashMap<Vec<u8>, usize> =
            class.members.iter().enumerate().map(|(i, m)| (m.canonical_bytes(), i)).collect();
        let cfg = SwapChainConfig::new(SEED + salt as u64);
        let mut counts = vec![0u64; class.len()];
        let mut preserved = 0usize;
        for s in 0..SAMPLES {
            let sample = swap_randomize(&rel, &cfg.with_sample(s as u64));
            if sample.row_sums() == rel.row_sums() && sample.col_sums() == rel.col_sums() {
                preserved += 1;
            }
            if let Some(&i) = index.get(&sample.canonical_bytes()) {
                counts[i] += 1;
            }
        }
        let in_class: u64 = counts.iter().sum();
        let margins_ok = preserved == SAMPLES && in_class == SAMPLES as u64;
        let p = if class.len() > 1 {
            let expected = SAMPLES as f64 / class.len() as f64;
            let chi2: f64 = counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
            1.0 - ChiSquared::new((class.len() - 1) as f64).expect("positive df").cdf(chi2)
        } else {
            1.0
        };
        let good = margins_ok && p > 0.01;
        ok &= good;
        detail.push(format!("{name} ({} members) p={p:.3}{}", class.len(), if margins_ok { "" } else { " MARGINS BROKEN" }));
    }
    Ok(Outcome::check(ok, detail.join("; ")))
}

// ---------------------------------------------------------------- 6 and 8

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum TableSet {
    Original,
    AntiSu,
    AntiUm,
    AntiMg,
}

const TABLE_SETS: [TableSet; 4] = [TableSet::Original, TableSet::AntiSu, TableSet::AntiUm, TableSet::AntiMg];

impl TableSet {
    fn chain(self, s: &SyntheticTables, a: &SyntheticTables) -> Result<ChainQuery> {
        let (su, um, mg) = match self {
            TableSet::Original => (&s.su, &s.um, &s.mg),
            TableSet::AntiSu => (&a.su, &s.um, &s.mg),
            TableSet::AntiUm => (&s.su, &a.um, &s.mg),
            TableSet::AntiMg => (&s.su, &s.um, &a.mg),
        };
        datagen::synthetic_chain(su, um, mg)
    }

    /// Points whose randomization touches the anti-table, in the
    /// five-point layout `sw(SU), sw(I1), sw(UM), sw(I2), sw(MG)`. A
    /// junction next to a one-per-column left relation draws the same null
    /// as that relation, so `sw(I1)` goes with `sw(SU)`.
    fn touching_points(self) -> Vec<RandomizationPoint> {
        let (r, j) = (RandomizationPoint::relation, RandomizationPoint::junction);
        match self {
            TableSet::Original => vec![],
            TableSet::AntiSu => vec![r(0), j(0)],
            TableSet::AntiUm => vec![r(0), j(0), r(1), j(1)],
            TableSet::AntiMg => vec![j(1), r(2)],
        }
    }
}

fn synthetic_reports(mode: ExecMode) -> Result<Vec<(u64, TableSet, SignificanceReport)>> {
    let mut out = Vec::new();
    for seed in SYNTHETIC_SEEDS {
        let cfg = SyntheticConfig::with_seed(seed);
        let (s, a) = (datagen::generate_structured(&cfg)?, datagen::generate_anti(&cfg)?);
        for set in TABLE_SETS {
            let spec = HypothesisSpec::new(set.chain(&s, &a)?, Arc::new(datagen::gender_genre_distance()), Tail::Upper)
                .with_seed(seed)
                .with_points(PointSelection::All);
            out.push((seed, set, run_hypothesis_with(&spec, mode)?));
        }
    }
    Ok(out)
}

fn synthetic(reports: &[(u64, TableSet, SignificanceReport)]) -> Outcome {
    let floor = 1.0 / 1000.0 + 1e-12;
    let mut detail = Vec::new();

    let originals: Vec<&SignificanceReport> =
        reports.iter().filter(|(_, set, _)| *set == TableSet::Original).map(|(_, _, r)| r).collect();
    let a_ok = originals.iter().all(|r| r.points.len() == 5 && r.points.iter().all(|p| p.p_value <= floor));
    detail.push(format!(
        "(a) original p-values {:?}",
        originals.iter().map(|r| r.p_values()).collect::<Vec<_>>()
    ));

    let mut b_ok = true;
    for set in &TABLE_SETS[1..] {
        for point in set.touching_points() {
            let insignificant = reports
                .iter()
                .filter(|(_, s, _)| s == set)
                .filter(|(_, _, r)| r.point(point).is_some_and(|p| p.p_value > 0.05))
                .count();
            b_ok &= insignificant >= 4;
            detail.push(format!("(b) {set:?} {point}: p>0.05 in {insignificant}/5"));
        }
    }

    let mut c_ok = true;
    let mut values = Vec::new();
    for (seed, set, r) in reports {
        let v = r.points[0].original;
        c_ok &= if *set == TableSet::Original { (1.0..=1.45).contains(&v) } else { v < 0.3 };
        values.push(format!("{seed}/{set:?}={v:.3}"));
    }
    detail.push(format!("(c) statistic {}", values.join(" ")));
    Outcome::check(a_ok && b_ok && c_ok, detail.join("; "))
}

fn render(reports: &[(u64, TableSet, SignificanceReport)]) -> Vec<String> {
    reports.iter().map(|(_, _, r)| machine_report(r, true)).collect()
}

fn determinism(reference: &[String]) -> Result<Outcome> {
    let mut ok = true;
    let mut detail = Vec::new();
    let rerun = render(&synthetic_reports(ExecMode::available())?);
    ok &= rerun == reference;
    detail.push(format!("rerun identical: {}", rerun == reference));
    let sequential = render(&synthetic_reports(ExecMode::Sequential)?);
    ok &= sequential == reference;
    detail.push(format!("sequential identical: {}", sequential == reference));
    for threads in [1, 3] {
        let threaded = with_threads(Some(threads), || synthetic_reports(ExecMode::available()))?;
        let same = render(&threaded) == reference;
        ok &= same;
        detail.push(format!("{threads} worker(s) identical: {same}"));
    }
    Ok(Outcome::check(ok, detail.join("; ")))
}

// ---------------------------------------------------------------- 7

/// Published Men − Women watch percentages by genre, with the published
/// grouping: 1 significant towards men, -1 towards women, 0 neither.
const GENDER_GENRE: [(&str, f64, i8); 18] = [
    ("Action", 2.5, 1),
    ("Sci-Fi", 1.5, 1),
    ("Thriller", 1.1, 1),
    ("Adventure", 0.8, 1),
    ("Crime", 0.6, 1),
    ("War", 0.5, 1),
    ("Horror", 0.4, 1),
    ("Western", 0.2, 1),
    ("Film-Noir", 0.1, 0),
    ("Mystery", 0.0, 0),
    ("Documentary", 0.0, 0),
    ("Fantasy", -0.1, 0),
    ("Animation", -0.2, -1),
    ("Musical", -0.5, -1),
    ("Children's", -1.0, -1),
    ("Comedy", -1.3, -1),
    ("Drama", -2.3, -1),
    ("Romance", -2.3, -1),
];

/// Genres whose viewer mean age was significant under every randomization.
const AGE_STARRED: [&str; 10] = [
    "Film-Noir",
    "Romance",
    "Comedy",
    "Thriller",
    "Adventure",
    "Children's",
    "Sci-Fi",
    "Action",
    "Horror",
    "Animation",
];

fn movielens() -> Result<Outcome> {
    let Some(dir) = std::env::var_os("MOVIELENS_DIR") else {
        return Ok(Outcome {
            status: Status::Skip,
            detail: "MOVIELENS_DIR not set".into(),
        });
    };
    let samples: usize = std::env::var("MOVIELENS_SAMPLES").ok().and_then(|s| s.parse().ok()).unwrap_or(999);
    let floor = 1.0 / (samples as f64 + 1.0) + 1e-12;
    let ml = load_movielens(&dir)?;
    let mut ok = true;
    let mut detail = Vec::new();

    let mean_row = |r: &BinaryRelation| r.nnz() as f64 / r.n_rows() as f64;
    let dims = |r: &BinaryRelation| (r.n_rows(), r.n_cols());
    let t3 = dims(&ml.um) == (943, 1680)
        && close(mean_row(&ml.um), 106.0, 0.5)
        && close(mean_row(&ml.mg), 1.7, 0.05)
        && dims(&ml.uo) == (943, 21)
        && dims(&ml.us) == (943, 2)
        && dims(&ml.ua) == (943, 943);
    ok &= t3;
    detail.push(format!(
        "tables: UM {:?} mean {:.2}, MG mean {:.3}",
        dims(&ml.um),
        mean_row(&ml.um),
        mean_row(&ml.mg)
    ));

    let gender_chain = |ml: &MovieLens| -> Result<ChainQuery> {
        Ok(ChainQuery::new(vec![ml.table("SU").unwrap(), ml.um.clone(), ml.mg.clone()])?
            .with_names(["SU", "UM", "MG"])
            .with_semantics(Semantics::PathCount))
    };
    let base = HypothesisSpec::new(gender_chain(&ml)?, Arc::new(datagen::gender_genre_distance()), Tail::Upper)
        .with_samples(samples)
        .with_seed(SEED)
        .with_points(PointSelection::All);

    let t5 = run_hypothesis_with(&base, ExecMode::available())?;
    let t5_ok = t5.points.len() == 5 && close(t5.points[0].original, 0.16, 0.005) && t5.points.iter().all(|p| p.p_value <= floor);
    ok &= t5_ok;
    detail.push(format!("L1 {:.4} p {:?}", t5.points[0].original, t5.p_values()));

    let original_paths = base.chain.evaluate()?;
    let members = GENDER_GENRE
        .iter()
        .map(|(genre, _, _)| {
            let stat = ProportionDifference {
                group_a: datagen::MEN.into(),
                group_b: datagen::WOMEN.into(),
                target: (*genre).into(),
            };
            let tail = if stat.evaluate(&original_paths)? >= 0.0 { Tail::Upper } else { Tail::Lower };
            Ok((Arc::new(stat) as Arc<dyn Statistic>, tail))
        })
        .collect::<Result<Vec<_>>>()?;
    let t6 = run_family(&base, &members, ExecMode::available())?;
    let mut values_ok = true;
    let mut class_matches = 0;
    for ((genre, published, group), report) in GENDER_GENRE.iter().zip(&t6) {
        let original = report.points[0].original;
        values_ok &= close(original, *published, 0.05);
        let all_significant = report.points.iter().all(|p| p.p_value <= 0.05);
        let class = match (all_significant, report.tail) {
            (false, _) => 0,
            (true, Tail::Lower) => -1,
            (true, _) => 1,
        };
        class_matches += usize::from(class == *group);
        if class != *group || !close(original, *published, 0.05) {
            detail.push(format!("{genre}: {original:.3} (published {published}), class {class} vs {group}"));
        }
    }
    ok &= values_ok && class_matches >= 16;
    detail.push(format!("gender/genre values within 0.05: {values_ok}, grouping matches {class_matches}/18"));

    let age_chain = ChainQuery::new(vec![ml.table("GM").unwrap(), ml.table("MU").unwrap(), ml.ua.clone()])?
        .with_names(["GM", "MU", "UA"])
        .with_semantics(Semantics::PathCount);
    let age_paths = age_chain.evaluate()?;
    let mean_age = ml.mean_age();
    let members = GENDER_GENRE
        .iter()
        .map(|(genre, _, _)| {
            let stat = WeightedAverage { group: (*genre).into() };
            let tail = if stat.evaluate(&age_paths)? >= mean_age { Tail::Upper } else { Tail::Lower };
            Ok((Arc::new(stat) as Arc<dyn Statistic>, tail))
        })
        .collect::<Result<Vec<_>>>()?;
    let age_spec = HypothesisSpec::new(age_chain, members[0].0.clone(), Tail::Upper)
        .with_samples(samples)
        .with_seed(SEED)
        .with_points(PointSelection::Distinct);
    let t8 = run_family(&age_spec, &members, ExecMode::available())?;
    let mut star_matches = 0;
    for ((genre, _, _), report) in GENDER_GENRE.iter().zip(&t8) {
        let starred = report.points.iter().all(|p| p.p_value <= 0.05);
        let published = AGE_STARRED.contains(genre);
        star_matches += usize::from(starred == published);
        if starred != published {
            detail.push(format!("{genre}: mean age {:.1} starred {starred}", report.points[0].original));
        }
    }
    ok &= star_matches >= 15;
    detail.push(format!("age stars match {star_matches}/18 ({} points)", t8[0].points.len()));

    Ok(Outcome::check(ok, detail.join("; ")))
}

// ----------------------------------------------------------------

fn main() -> ExitCode {
    // `cargo test -- --list` and friends pass harness flags; nothing to list.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut failed = 0;
    let mut report = |id: &str, name: &str, start: Instant, outcome: Result<Outcome>| {
        let outcome = outcome.unwrap_or_else(|e| Outcome::check(false, format!("error: {e}")));
        let tag = match outcome.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Skip => "SKIP",
        };
        println!(
            "{tag} criterion {id} {name} ({:.1}s): {}",
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    };

    let t = Instant::now();
    report("1", "toy products", t, toy_products());
    let t = Instant::now();
    report("2", "toy p-values", t, toy_p_values());
    let t = Instant::now();
    report("3", "expected path matrices", t, toy_expectations());
    let t = Instant::now();
    report("4", "proposition suite", t, propositions());
    let t = Instant::now();
    report("5", "swap uniformity", t, uniformity());

    let t = Instant::now();
    let synthetic_run = synthetic_reports(ExecMode::available());
    let reference = synthetic_run.as_ref().ok().map(|r| render(r));
    report("6", "synthetic tables", t, synthetic_run.map(|r| synthetic(&r)));
    let t = Instant::now();
    report("7", "movielens", t, movielens());
    let t = Instant::now();
    let det = match reference {
        Some(reference) => determinism(&reference),
        None => Ok(Outcome::check(false, "criterion 6 did not produce reports")),
    };
    report("8", "determinism", t, det);

    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
