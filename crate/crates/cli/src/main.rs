//! `relsig`: run significance tests on chain-join queries from experiment
//! files, inspect path matrices, check the swap identities, and prepare
//! datasets.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use relsig::datagen::{self, SyntheticConfig};
use relsig::io::write_relation;
use relsig::movielens::load_movielens;
use relsig::oracle::{run_proposition_suite, PropositionChecker, PropositionId, SuiteConfig};
use relsig::parallel::{with_threads, ExecMode};
use relsig::report::{human_report, machine_report, mean_matrix_text, path_matrix_text};
use relsig::significance::{expected_path_matrix_with, run_hypothesis_with, DEFAULT_SAMPLES, QUICK_SAMPLES};
use relsig::{BinaryRelation, RandomizationPoint, StatisticRegistry, SwapChainConfig};

use crate::config::{Experiment, Overrides};

#[derive(Parser)]
#[command(name = "relsig", version, about = "Significance testing for chain-join queries over binary relations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the hypothesis of an experiment file at every randomization point.
    Test {
        config: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
        /// Use a small sample count for a quick look.
        #[arg(long, conflicts_with = "samples")]
        quick: bool,
        #[arg(long)]
        seed: Option<u64>,
        /// lower, upper or two_sided.
        #[arg(long)]
        tail: Option<String>,
        /// `distinct`, `all`, or a comma list such as `relation:0,junction:1`.
        #[arg(long)]
        points: Option<String>,
        #[arg(long)]
        threads: Option<usize>,
        /// Run on the calling thread only.
        #[arg(long)]
        sequential: bool,
        /// Report prefix; writes `<prefix>.txt` and `<prefix>.tsv`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include every null value in the machine report.
        #[arg(long)]
        null_values: bool,
    },
    /// Print the chain's path matrix and, with --point, its expectation under
    /// that randomization.
    Paths {
        config: PathBuf,
        #[arg(long)]
        point: Option<RandomizationPoint>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the swap/permutation identities on random small instances.
    Props {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_rows: usize,
        #[arg(long, default_value_t = 4)]
        max_inner: usize,
        #[arg(long, default_value_t = 3)]
        max_cols: usize,
        /// Check only these identities (e.g. P0a,T4).
        #[arg(long, value_delimiter = ',')]
        only: Vec<PropositionId>,
        /// Use a deliberately wrong product (negative control).
        #[arg(long, hide = true)]
        faulty_product: bool,
    },
    /// Write synthetic tables, their anti-tables and ready-to-run experiment files.
    GenSynthetic {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Convert an ml-100k directory into relation files.
    IngestMovielens {
        /// Directory holding u.data, u.item and u.user.
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Test {
            config,
            samples,
            quick,
            seed,
            tail,
            points,
            threads,
            sequential,
            out,
            null_values,
        } => {
            let overrides = Overrides {
                samples: if quick { Some(QUICK_SAMPLES) } else { samples },
                seed,
                tail,
                points,
            };
            cmd_test(&config, &overrides, threads, sequential, out.as_deref(), null_values)
        }
        Command::Paths {
            config,
            point,
            samples,
            seed,
            threads,
            out,
        } => cmd_paths(&config, point, samples, seed, threads, out.as_deref()),
        Command::Props {
            trials,
            seed,
            max_rows,
            max_inner,
            max_cols,
            only,
            faulty_product,
        } => {
            let cfg = SuiteConfig {
                max_rows,
                max_inner,
                max_cols,
                trials,
                seed,
            };
            cmd_props(&cfg, &only, faulty_product)
        }
        Command::GenSynthetic { out, seed, samples } => cmd_gen_synthetic(&out, seed, samples),
        Command::IngestMovielens { dir, out } => cmd_ingest(&dir, &out),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_test(
    config: &Path,
    overrides: &Overrides,
    threads: Option<usize>,
    sequential: bool,
    out: Option<&Path>,
    null_values: bool,
) -> Result<ExitCode> {
    let exp = Experiment::load(config)?;
    let spec = exp.hypothesis(&StatisticRegistry::with_builtins(), overrides)?;
    let threads = exp.threads(threads)?;
    let mode = if sequential { ExecMode::Sequential } else { ExecMode::available() };
    let report = with_threads(threads, || run_hypothesis_with(&spec, mode))?;

    let human = human_report(&report);
    let machine = machine_report(&report, null_values || exp.config.output.null_values);
    let prefix = exp.output_prefix(out);
    let (txt, tsv) = (with_suffix(&prefix, ".txt"), with_suffix(&prefix, ".tsv"));
    write_file(&txt, &human)?;
    write_file(&tsv, &machine)?;
    print!("{human}");
    println!("reports written to {} and {}", txt.display(), tsv.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_paths(
    config: &Path,
    point: Option<RandomizationPoint>,
    samples: usize,
    seed: u64,
    threads: Option<usize>,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let exp = Experiment::load(config)?;
    let chain = exp.chain()?;
    let original = chain.evaluate()?;
    let mut text = path_matrix_text("original", &original);
    text.push_str(&mean_matrix_text("original proportions", &original.row_proportions()));
    if let Some(point) = point {
        if samples == 0 {
            bail!("--samples must be at least 1");
        }
        let label = point.label(chain.names());
        let cfg = SwapChainConfig::new(seed);
        let expected = with_threads(exp.threads(threads)?, || {
            expected_path_matrix_with(&chain, point, samples, &cfg, ExecMode::available())
        })?;
        text.push_str(&mean_matrix_text(&format!("expected under {label}, {samples} samples"), &expected));
        text.push_str(&mean_matrix_text(&format!("expected proportions under {label}"), &expected.row_proportions()));
    }
    match out {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

/// The boolean product with entry (0, 0) forced to 1.
fn faulty_product(a: &BinaryRelation, b: &BinaryRelation) -> relsig::Result<BinaryRelation> {
    let product = a.boolean_product(b)?;
    let mut dense = product.to_dense();
    if let Some(cell) = dense.first_mut().and_then(|row| row.first_mut()) {
        *cell = 1;
    }
    BinaryRelation::from_dense(product.row_domain().clone(), product.col_domain().clone(), &dense)
}

fn cmd_props(cfg: &SuiteConfig, only: &[PropositionId], faulty: bool) -> Result<ExitCode> {
    if cfg.trials == 0 {
        eprintln!("warning: --trials 0 checks nothing; every identity passes vacuously");
    }
    let checker = if faulty {
        PropositionChecker::with_product(faulty_product)
    } else {
        PropositionChecker::new()
    };
    let outcomes = run_proposition_suite(&checker, cfg)?;
    let mut failures = 0;
    for o in outcomes.iter().filter(|o| only.is_empty() || only.contains(&o.id)) {
        match &o.counterexample {
            None => println!(
                "ok    {:<4} {} ({} held, {} not applicable)",
                o.id.name(),
                o.id.statement(),
                o.held,
                o.not_applicable
            ),
            Some(c) => {
                failures += 1;
                println!("FAIL  {:<4} {}\n{c}", o.id.name(), o.id.statement());
            }
        }
    }
    if failures > 0 {
        println!("{failures} identity check(s) failed");
        Ok(ExitCode::FAILURE)
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn synthetic_config(su: &str, um: &str, mg: &str, samples: usize, seed: u64) -> String {
    format!(
        r#"[relations]
SU = "{su}"
UM = "{um}"
MG = "{mg}"

[chain]
order = ["SU", "UM", "MG"]
semantics = "path_count"

[hypothesis]
statistic = "l1_distance"
tail = "upper"
samples = {samples}
seed = {seed}
points = "all"

[hypothesis.parameters]
group_a = "{men}"
group_b = "{women}"
"#,
        men = datagen::MEN,
        women = datagen::WOMEN,
    )
}

fn cmd_gen_synthetic(out: &Path, seed: u64, samples: usize) -> Result<ExitCode> {
    let cfg = SyntheticConfig::with_seed(seed);
    let structured = datagen::generate_structured(&cfg)?;
    let anti = datagen::generate_anti(&cfg)?;
    datagen::write_tables(out, &structured, &anti)?;
    let configs = [
        ("synthetic.toml", ["su.tsv", "um.tsv", "mg.tsv"]),
        ("anti_su.toml", ["rsu.tsv", "um.tsv", "mg.tsv"]),
        ("anti_um.toml", ["su.tsv", "rum.tsv", "mg.tsv"]),
        ("anti_mg.toml", ["su.tsv", "um.tsv", "rmg.tsv"]),
    ];
    for (name, [su, um, mg]) in configs {
        write_file(&out.join(name), &synthetic_config(su, um, mg, samples, seed))?;
    }
    println!("wrote tables and experiment files to {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_ingest(dir: &Path, out: &Path) -> Result<ExitCode> {
    let ml = load_movielens(dir)?;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    for (name, rel) in [("um", &ml.um), ("mg", &ml.mg), ("uo", &ml.uo), ("us", &ml.us), ("ua", &ml.ua)] {
        write_relation(rel, out.join(format!("{name}.tsv")))?;
        let mean = rel.nnz() as f64 / rel.n_rows().max(1) as f64;
        println!("{name}: {} x {}, {} ones, {mean:.2} per row", rel.n_rows(), rel.n_cols(), rel.nnz());
    }
    let r = &ml.report;
    println!(
        "{} users, {} of {} movies kept, {} ratings ({} duplicates, {} of dropped movies)",
        r.users, r.kept_movies, r.raw_movies, r.rating_lines, r.duplicate_ratings, r.ratings_of_dropped
    );
    if let Some(note) = r.discrepancy() {
        eprintln!("note: {note}");
    }
    Ok(ExitCode::SUCCESS)
}
