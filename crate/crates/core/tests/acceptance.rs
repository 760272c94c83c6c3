//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use xslt_evolve::corpus::{graded_corpus, CorpusPair};
use xslt_evolve::evolve::{EvolveConfig, Problem};
use xslt_evolve::experiment::{run_experiment, ExperimentSpec, Summary};
use xslt_evolve::fitness::line_diff;
use xslt_evolve::fixtures::{H2_PATH_SHEET, H2_TEMPLATE_CHAIN_SHEET, XHTML_PAGE};
use xslt_evolve::genome::{Genome, InitParams, StructureType};
use xslt_evolve::variation::{apply_unary, crossover_template, OperatorKind, OperatorTable};
use xslt_evolve::xml::{parse_xml, TagCatalog};
use xslt_evolve::xslt::{parse_stylesheet, transform_lines, TransformLimits};

const RUNS: usize = 30;
const BASE_SEED: u64 = 0;
const EASY_MIN_SUCCESSES: usize = 28;
const EASY_MAX_MEDIAN_EVALUATIONS: f64 = 10_000.0;
const EASY_TIME_BUDGET: Duration = Duration::from_secs(15 * 60);
const HARD_PAIR: usize = 6;
const HARD_MIN_MARGIN: isize = 8;
const CLOSURE_APPLICATIONS: usize = 10_000;
const ROULETTE_DRAWS: usize = 100_000;
const ROULETTE_ABS_TOLERANCE: f64 = 0.02;
const ROULETTE_MIN_P: f64 = 0.01;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn main() -> ExitCode {
    let started = Instant::now();
    let corpus = graded_corpus();
    let easy = easy_pair_runs(&corpus);

    let criteria: Vec<(&str, Check)> = vec![
        ("oracle transformation", Box::new(oracle_transformation)),
        ("diff oracle", Box::new(diff_oracle)),
        ("easy-pair success rate", Box::new(|| easy_success(&easy))),
        ("evaluations scale", Box::new(|| easy_evaluations(&easy))),
        ("type 2 superiority on the hard pair", Box::new(|| hard_pair(&corpus))),
        ("operator closure", Box::new(|| closure(&corpus))),
        ("determinism", Box::new(|| determinism(&corpus))),
        ("roulette fidelity", Box::new(roulette)),
    ];

    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] criterion {} ({name}): {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn oracle_transformation() -> Outcome {
    let expected = ["First test", "Second test", "That's another test"];
    let doc = parse_xml(XHTML_PAGE).unwrap();
    let limits = TransformLimits::default();
    let mut details = Vec::new();
    let mut pass = true;
    for (label, text) in [
        ("template chain", H2_TEMPLATE_CHAIN_SHEET),
        ("absolute path", H2_PATH_SHEET),
    ] {
        let sheet = parse_stylesheet(text).unwrap();
        let lines = transform_lines(&sheet, &doc, limits).unwrap();
        let mut times: Vec<Duration> = (0..201)
            .map(|_| {
                let t = Instant::now();
                let out = transform_lines(&sheet, &doc, limits).unwrap();
                let e = t.elapsed();
                assert_eq!(out, lines);
                e
            })
            .collect();
        times.sort();
        let median = times[times.len() / 2];
        let ok = lines == expected && median < Duration::from_millis(1);
        pass &= ok;
        details.push(format!("{label} sheet {lines:?} in {median:?}"));
    }
    outcome(pass, details.join("; "))
}

fn brute_lcs(a: &[u8], b: &[u8]) -> usize {
    // Largest subset of `a`, by bitmask, that is a subsequence of `b`.
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let n = mask.count_ones() as usize;
        if n <= best {
            continue;
        }
        let mut j = 0;
        let mut ok = true;
        for (i, x) in a.iter().enumerate() {
            if mask & (1 << i) == 0 {
                continue;
            }
            while j < b.len() && b[j] != *x {
                j += 1;
            }
            if j == b.len() {
                ok = false;
                break;
            }
            j += 1;
        }
        if ok {
            best = n;
        }
    }
    best
}

fn dp_lcs(a: &[String], b: &[String]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] {
                t[i - 1][j - 1] + 1
            } else {
                t[i - 1][j].max(t[i][j - 1])
            };
        }
    }
    t[a.len()][b.len()]
}

fn all_sequences(max_len: usize, alphabet: u8) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for c in 0..alphabet {
                let mut t: Vec<u8> = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn diff_oracle() -> Outcome {
    let seqs = all_sequences(6, 3);
    let as_lines: Vec<Vec<String>> = seqs
        .iter()
        .map(|s| s.iter().map(|c| ((b'a' + c) as char).to_string()).collect())
        .collect();
    let mut exhaustive = 0u64;
    let mut mismatches = 0u64;
    for (a, la) in seqs.iter().zip(&as_lines) {
        for (b, lb) in seqs.iter().zip(&as_lines) {
            let lcs = brute_lcs(a, b);
            if line_diff(la, lb) != (a.len() - lcs, b.len() - lcs) {
                mismatches += 1;
            }
            exhaustive += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let words = ["alpha", "beta", "gamma", "delta", "eps"];
    for _ in 0..10_000 {
        let gen = |rng: &mut ChaCha8Rng| -> Vec<String> {
            let n = rng.gen_range(7..40);
            let k = rng.gen_range(2..=words.len());
            (0..n).map(|_| words[rng.gen_range(0..k)].to_owned()).collect()
        };
        let a = gen(&mut rng);
        let b = gen(&mut rng);
        let lcs = dp_lcs(&a, &b);
        if line_diff(&a, &b) != (a.len() - lcs, b.len() - lcs) {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("{exhaustive} exhaustive pairs + 10000 random pairs, {mismatches} mismatches"),
    )
}

struct PairRuns {
    id: usize,
    summary: Summary,
}

struct EasyRuns {
    pairs: Vec<PairRuns>,
    elapsed: Duration,
}

fn experiment(pair: &CorpusPair, stype: StructureType) -> Summary {
    let problem = Problem::new(pair.input_doc(), &pair.target_doc());
    let mut spec = ExperimentSpec::new(EvolveConfig::new(stype));
    spec.runs = RUNS;
    spec.base_seed = BASE_SEED;
    let records = run_experiment(&spec, &problem).expect("valid experiment");
    Summary::of(&records)
}

fn easy_pair_runs(corpus: &[CorpusPair]) -> EasyRuns {
    let t = Instant::now();
    let pairs = corpus[..4]
        .iter()
        .map(|p| PairRuns {
            id: p.id,
            summary: experiment(p, StructureType::Type1),
        })
        .collect();
    EasyRuns {
        pairs,
        elapsed: t.elapsed(),
    }
}

fn easy_success(easy: &EasyRuns) -> Outcome {
    let counts: Vec<String> = easy
        .pairs
        .iter()
        .map(|p| format!("pair {} {}/{}", p.id, p.summary.successes, p.summary.runs))
        .collect();
    let pass = easy.pairs.iter().all(|p| p.summary.successes >= EASY_MIN_SUCCESSES) && easy.elapsed < EASY_TIME_BUDGET;
    outcome(
        pass,
        format!(
            "{} (need >= {EASY_MIN_SUCCESSES}), {:.1}s (budget {}s)",
            counts.join(", "),
            easy.elapsed.as_secs_f64(),
            EASY_TIME_BUDGET.as_secs()
        ),
    )
}

fn easy_evaluations(easy: &EasyRuns) -> Outcome {
    let medians: Vec<String> = easy
        .pairs
        .iter()
        .map(|p| match p.summary.median {
            Some(m) => format!("pair {} median {m}", p.id),
            None => format!("pair {} no successes", p.id),
        })
        .collect();
    let pass = easy
        .pairs
        .iter()
        .all(|p| p.summary.median.is_some_and(|m| m <= EASY_MAX_MEDIAN_EVALUATIONS));
    outcome(
        pass,
        format!("{} (limit {EASY_MAX_MEDIAN_EVALUATIONS})", medians.join(", ")),
    )
}

fn hard_pair(corpus: &[CorpusPair]) -> Outcome {
    let pair = corpus.iter().find(|p| p.id == HARD_PAIR).unwrap();
    let t1 = experiment(pair, StructureType::Type1).successes;
    let t2 = experiment(pair, StructureType::Type2).successes;
    let margin = t2 as isize - t1 as isize;
    outcome(
        margin >= HARD_MIN_MARGIN,
        format!(
            "pair {HARD_PAIR}: type 1 {t1}/{RUNS}, type 2 {t2}/{RUNS}, margin {margin} (need >= {HARD_MIN_MARGIN})"
        ),
    )
}

fn closure(corpus: &[CorpusPair]) -> Outcome {
    let params = InitParams::default();
    let catalogs: Vec<TagCatalog> = corpus.iter().map(|p| TagCatalog::build(&p.input_doc())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = 0usize;
    let mut bad_noops = 0usize;
    let mut applied = 0usize;
    let mut noops = 0usize;
    let mut checks = 0usize;
    for stype in [StructureType::Type1, StructureType::Type2] {
        let table = OperatorTable::default_for(stype);
        for kind in OperatorKind::legal_for(stype) {
            // A random walk per catalog, restarted now and then, so operators
            // meet grown genomes as well as fresh ones.
            let mut walkers: Vec<Genome> = catalogs
                .iter()
                .map(|c| Genome::random(stype, c, &params, &mut rng))
                .collect();
            for i in 0..CLOSURE_APPLICATIONS {
                let ci = i % catalogs.len();
                let catalog = &catalogs[ci];
                if rng.gen_bool(0.04) {
                    walkers[ci] = Genome::random(stype, catalog, &params, &mut rng);
                }
                let background = table.select_operator(&mut rng);
                if background != OperatorKind::CrossoverTemplate {
                    apply_unary(background, &mut walkers[ci], catalog, &params, &mut rng).unwrap();
                }
                let before = walkers[ci].sheet.clone();
                let changed = if kind == OperatorKind::CrossoverTemplate {
                    let mut mate = Genome::random(stype, catalog, &params, &mut rng);
                    let mate_before = mate.sheet.clone();
                    let changed = crossover_template(&mut walkers[ci], &mut mate, &mut rng).unwrap();
                    checks += 1;
                    if !mate.validate(catalog).is_empty() {
                        violations += 1;
                    }
                    if !changed && mate.sheet != mate_before {
                        bad_noops += 1;
                    }
                    changed
                } else {
                    apply_unary(kind, &mut walkers[ci], catalog, &params, &mut rng).unwrap()
                };
                checks += 1;
                if !walkers[ci].validate(catalog).is_empty() {
                    violations += 1;
                    walkers[ci] = Genome::random(stype, catalog, &params, &mut rng);
                }
                if changed {
                    applied += 1;
                } else {
                    noops += 1;
                    if walkers[ci].sheet != before {
                        bad_noops += 1;
                    }
                }
            }
        }
    }
    outcome(
        violations == 0 && bad_noops == 0,
        format!(
            "{} applications ({applied} changed, {noops} no-ops), {checks} validations, {violations} violations, {bad_noops} no-ops that altered a genome",
            applied + noops
        ),
    )
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn determinism(corpus: &[CorpusPair]) -> Outcome {
    let work = tempfile::tempdir().unwrap();
    let pair = &corpus[4];
    let input = work.path().join("input.xml");
    let target = work.path().join("target.xml");
    std::fs::write(&input, &pair.input).unwrap();
    std::fs::write(&target, &pair.target).unwrap();
    let config = work.path().join("settings.conf");
    std::fs::write(&config, "evolve.population = 64\ninit.filter-probability = 0.25\n").unwrap();

    let mut outputs = Vec::new();
    for stype in ["1", "2"] {
        for attempt in 0..2 {
            let out = work.path().join(format!("out-{stype}-{attempt}"));
            let status = Command::new(env!("CARGO_BIN_EXE_xslt-evolve"))
                .args(["evolve", "--type", stype, "--runs", "3", "--seed", "42", "--gens", "40"])
                .arg("--input")
                .arg(&input)
                .arg("--target")
                .arg(&target)
                .arg("--config")
                .arg(&config)
                .arg("--out")
                .arg(&out)
                .output()
                .unwrap();
            if !status.status.success() {
                return outcome(
                    false,
                    format!("evolve failed: {}", String::from_utf8_lossy(&status.stderr)),
                );
            }
            outputs.push((stype, read_dir_bytes(&out)));
        }
    }
    let mut pass = true;
    let mut files = 0;
    for pair in outputs.chunks(2) {
        let (a, b) = (&pair[0].1, &pair[1].1);
        pass &= a == b && a.contains_key("stats.csv") && a.contains_key("run-2.xsl");
        files += a.len();
    }
    outcome(
        pass,
        format!("2 invocations x 2 structure types, {files} files per invocation pair byte-identical: {pass}"),
    )
}

fn roulette() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for stype in [StructureType::Type1, StructureType::Type2] {
        let table = OperatorTable::default_for(stype);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut counts: BTreeMap<OperatorKind, usize> = BTreeMap::new();
        for _ in 0..ROULETTE_DRAWS {
            *counts.entry(table.select_operator(&mut rng)).or_default() += 1;
        }
        let kinds: Vec<OperatorKind> = OperatorKind::legal_for(stype).collect();
        let n = ROULETTE_DRAWS as f64;
        let mut chi2 = 0.0;
        let mut worst = 0.0f64;
        for &k in &kinds {
            let p = table.probability(k);
            let observed = counts.get(&k).copied().unwrap_or(0) as f64;
            chi2 += (observed - n * p).powi(2) / (n * p);
            worst = worst.max((observed / n - p).abs());
        }
        let stray = counts.keys().filter(|k| !kinds.contains(k)).count();
        let p_value = 1.0 - ChiSquared::new((kinds.len() - 1) as f64).unwrap().cdf(chi2);
        let ok = stray == 0 && worst <= ROULETTE_ABS_TOLERANCE && p_value > ROULETTE_MIN_P;
        pass &= ok;
        details.push(format!(
            "{stype}: max |freq - p| {worst:.4}, chi2 {chi2:.2}, p {p_value:.3}"
        ));
    }
    outcome(pass, details.join("; "))
}
