//! Generational evolutionary loop with tournament selection and elitism.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::fitness::FitnessVector;
use crate::genome::{Genome, InitParams, StructureType};
use crate::variation::{apply_unary, crossover_template, OperatorKind, OperatorTable, TableError};
use crate::xml::{Document, TagCatalog, LINE_TAG};
use crate::xslt::{transform_lines, Stylesheet, TransformLimits, DEFAULT_WRAPPER_TAG};

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveConfig {
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    pub stype: StructureType,
    pub elitism: usize,
    pub seed: u64,
    pub table: OperatorTable,
    pub init: InitParams,
    /// Derived from the problem when `None`.
    pub limits: Option<TransformLimits>,
    pub applications_per_offspring: usize,
    pub wrapper_tag: String,
    /// Element wrapping each `value-of` in rendered stylesheets.
    pub line_tag: String,
}

impl EvolveConfig {
    pub fn new(stype: StructureType) -> Self {
        Self {
            population: 128,
            generations: 200,
            tournament: 5,
            stype,
            elitism: 1,
            seed: 0,
            table: OperatorTable::default_for(stype),
            init: InitParams::default(),
            limits: None,
            applications_per_offspring: 1,
            wrapper_tag: DEFAULT_WRAPPER_TAG.to_owned(),
            line_tag: LINE_TAG.to_owned(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if self.tournament < 2 || self.population < self.tournament {
            return Err(ConfigError::Tournament {
                population: self.population,
                tournament: self.tournament,
            });
        }
        if self.elitism >= self.population {
            return Err(ConfigError::Elitism {
                population: self.population,
                elitism: self.elitism,
            });
        }
        if self.applications_per_offspring == 0 {
            return Err(ConfigError::Applications);
        }
        if self.table.stype != self.stype {
            return Err(ConfigError::TableType {
                table: self.table.stype,
                run: self.stype,
            });
        }
        self.table.check()?;
        self.init.check().map_err(ConfigError::Init)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("need population ({population}) >= tournament ({tournament}) >= 2")]
    Tournament { population: usize, tournament: usize },
    #[error("elitism ({elitism}) must be below the population size ({population})")]
    Elitism { population: usize, elitism: usize },
    #[error("applications per offspring must be at least 1")]
    Applications,
    #[error("operator table is for {table} but the run evolves {run}")]
    TableType { table: StructureType, run: StructureType },
    #[error("operator table: {0}")]
    Table(#[from] TableError),
    #[error("initialization: {0}")]
    Init(String),
    #[error("seed stylesheet {index} is not a valid {stype} genome: {violations}")]
    SeedGenome {
        index: usize,
        stype: StructureType,
        violations: String,
    },
}

/// One input/target example.
#[derive(Debug, Clone)]
pub struct Problem {
    pub input: Document,
    pub catalog: TagCatalog,
    pub target: Vec<String>,
}

impl Problem {
    pub fn new(input: Document, target: &Document) -> Self {
        Self::from_lines(input, target.canonical_lines())
    }

    pub fn from_lines(input: Document, target: Vec<String>) -> Self {
        let catalog = TagCatalog::build(&input);
        Self { input, catalog, target }
    }

    pub fn default_limits(&self) -> TransformLimits {
        TransformLimits::for_problem(self.input.height(), self.target.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCount {
    pub applied: u64,
    pub noop: u64,
}

/// Population statistics after one generation. Means skip individuals
/// whose transform overflowed; they are `NaN` when every one did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub generation: usize,
    pub best: FitnessVector,
    pub mean_deletions: f64,
    pub mean_additions: f64,
    pub mean_length: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best: Genome,
    pub fitness: FitnessVector,
    pub success: bool,
    pub evaluations: u64,
    pub generations: usize,
    pub wall_time: Duration,
    pub history: Vec<HistoryRow>,
    pub op_counts: BTreeMap<OperatorKind, OpCount>,
    /// Second crossover children dropped for lack of room.
    pub discarded_children: u64,
}

impl RunResult {
    /// Everything except wall time, for determinism checks.
    pub fn same_outcome(&self, other: &RunResult) -> bool {
        self.best == other.best
            && self.fitness == other.fitness
            && self.success == other.success
            && self.evaluations == other.evaluations
            && self.generations == other.generations
            && self.op_counts == other.op_counts
            && self.discarded_children == other.discarded_children
            && self.history.len() == other.history.len()
            && self.history.iter().zip(&other.history).all(|(a, b)| {
                a.generation == b.generation
                    && a.best == b.best
                    && a.mean_deletions.to_bits() == b.mean_deletions.to_bits()
                    && a.mean_additions.to_bits() == b.mean_additions.to_bits()
                    && a.mean_length.to_bits() == b.mean_length.to_bits()
            })
    }
}

/// Best of `k` distinct uniformly drawn individuals; ties go to the lower
/// population index.
pub fn tournament_select<R: Rng + ?Sized>(fitness: &[FitnessVector], k: usize, rng: &mut R) -> usize {
    assert!(k >= 1 && k <= fitness.len(), "tournament of {k} from {}", fitness.len());
    sample(rng, fitness.len(), k)
        .into_iter()
        .min_by_key(|&i| (fitness[i], i))
        .unwrap()
}

fn evaluate_pending(pop: &mut [Genome], problem: &Problem, limits: TransformLimits) -> u64 {
    let evaluated: u64 = pop
        .par_iter_mut()
        .filter(|g| g.fitness.is_none())
        .map(|g| {
            g.fitness = Some(g.evaluate(&problem.input, &problem.target, limits));
            1
        })
        .sum();
    evaluated
}

fn fitness_of(g: &Genome) -> FitnessVector {
    g.fitness.expect("individual evaluated")
}

fn history_row(generation: usize, pop: &[Genome]) -> HistoryRow {
    let fits: Vec<FitnessVector> = pop.iter().map(fitness_of).collect();
    let best = *fits.iter().min().unwrap();
    let real: Vec<&FitnessVector> = fits.iter().filter(|f| !f.is_worst()).collect();
    let n = real.len() as f64;
    let mean = |f: fn(&FitnessVector) -> usize| {
        if real.is_empty() {
            f64::NAN
        } else {
            real.iter().map(|v| f(v) as f64).sum::<f64>() / n
        }
    };
    HistoryRow {
        generation,
        best,
        mean_deletions: mean(|v| v.deletions),
        mean_additions: mean(|v| v.additions),
        mean_length: mean(|v| v.length),
    }
}

/// Runs one evolution from a random initial population.
pub fn run_evolution(config: &EvolveConfig, problem: &Problem) -> Result<RunResult, ConfigError> {
    run_evolution_seeded(config, problem, &[])
}

/// Like [`run_evolution`], with `seeds` placed at the head of the initial
/// population ahead of random individuals.
pub fn run_evolution_seeded(
    config: &EvolveConfig,
    problem: &Problem,
    seeds: &[Stylesheet],
) -> Result<RunResult, ConfigError> {
    config.check()?;
    let started = Instant::now();
    let limits = config.limits.unwrap_or_else(|| problem.default_limits());
    let catalog = &problem.catalog;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut pop: Vec<Genome> = Vec::with_capacity(config.population);
    for (index, sheet) in seeds.iter().take(config.population).enumerate() {
        let g = Genome::new(config.stype, sheet.clone());
        let violations = g.validate(catalog);
        if !violations.is_empty() {
            return Err(ConfigError::SeedGenome {
                index,
                stype: config.stype,
                violations: format!("{violations:?}"),
            });
        }
        pop.push(g);
    }
    while pop.len() < config.population {
        let mut g = Genome::random(config.stype, catalog, &config.init, &mut rng);
        g.sheet.wrapper_tag = config.wrapper_tag.clone();
        g.sheet.line_tag = config.line_tag.clone();
        pop.push(g);
    }

    let mut evaluations = evaluate_pending(&mut pop, problem, limits);
    let mut history = vec![history_row(0, &pop)];
    let mut op_counts: BTreeMap<OperatorKind, OpCount> = OperatorKind::legal_for(config.stype)
        .map(|k| (k, OpCount::default()))
        .collect();
    let mut discarded_children = 0;
    let mut generation = 0;

    while !history.last().unwrap().best.is_solution() && generation < config.generations {
        generation += 1;
        let fits: Vec<FitnessVector> = pop.iter().map(fitness_of).collect();
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by_key(|&i| (fits[i], i));

        let mut next: Vec<Genome> = order[..config.elitism].iter().map(|&i| pop[i].clone()).collect();
        while next.len() < config.population {
            let parent = tournament_select(&fits, config.tournament, &mut rng);
            let mut children = vec![pop[parent].clone()];
            for application in 0..config.applications_per_offspring {
                let kind = config.table.select_operator(&mut rng);
                let count = op_counts.entry(kind).or_default();
                if kind == OperatorKind::CrossoverTemplate {
                    let mate = tournament_select(&fits, config.tournament, &mut rng);
                    let mut other = pop[mate].clone();
                    let applied = crossover_template(&mut children[0], &mut other, &mut rng).expect("same type");
                    if applied {
                        count.applied += 1
                    } else {
                        count.noop += 1
                    }
                    if application == 0 {
                        children.push(other);
                    }
                } else {
                    for child in children.iter_mut() {
                        let applied = apply_unary(kind, child, catalog, &config.init, &mut rng).expect("legal kind");
                        if applied {
                            count.applied += 1
                        } else {
                            count.noop += 1
                        }
                    }
                }
            }
            for child in children {
                if next.len() < config.population {
                    next.push(child);
                } else {
                    discarded_children += 1;
                }
            }
        }
        pop = next;
        evaluations += evaluate_pending(&mut pop, problem, limits);
        history.push(history_row(generation, &pop));
    }

    let best_index = (0..pop.len()).min_by_key(|&i| (fitness_of(&pop[i]), i)).unwrap();
    let best = pop.swap_remove(best_index);
    let fitness = fitness_of(&best);
    let success = fitness.is_solution();
    if success {
        let lines = transform_lines(&best.sheet, &problem.input, limits).expect("solution transforms");
        assert_eq!(lines, problem.target, "solution failed its re-check");
    }
    Ok(RunResult {
        best,
        fitness,
        success,
        evaluations,
        generations: generation,
        wall_time: started.elapsed(),
        history,
        op_counts,
        discarded_children,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::xml::parse_xml;
    use crate::xslt::parse_stylesheet;

    fn h2_problem() -> Problem {
        let input = parse_xml(XHTML_PAGE).unwrap();
        let target = ["First test", "Second test", "That's another test"]
            .map(String::from)
            .to_vec();
        Problem::from_lines(input, target)
    }

    #[test]
    fn config_checks() {
        let mut c = EvolveConfig::new(StructureType::Type1);
        c.check().unwrap();
        c.tournament = 1;
        assert!(matches!(c.check(), Err(ConfigError::Tournament { .. })));
        let mut c = EvolveConfig::new(StructureType::Type1);
        c.population = 4;
        assert!(matches!(c.check(), Err(ConfigError::Tournament { .. })));
        let mut c = EvolveConfig::new(StructureType::Type1);
        c.elitism = 128;
        assert!(matches!(c.check(), Err(ConfigError::Elitism { .. })));
        let mut c = EvolveConfig::new(StructureType::Type2);
        c.table = OperatorTable::default_for(StructureType::Type1);
        assert!(matches!(c.check(), Err(ConfigError::TableType { .. })));
    }

    #[test]
    fn exhaustive_tournament_returns_best() {
        let fits: Vec<FitnessVector> = [5, 3, 9, 3, 7].iter().map(|&d| FitnessVector::new(d, 0, 1)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(tournament_select(&fits, fits.len(), &mut rng), 1);
        }
    }

    #[test]
    fn unit_tournament_is_uniform() {
        let fits = vec![FitnessVector::new(0, 0, 1); 4];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            counts[tournament_select(&fits, 1, &mut rng)] += 1;
        }
        for c in counts {
            assert!((9_000..11_000).contains(&c), "{counts:?}");
        }
    }

    #[test]
    fn planted_solution_succeeds_immediately() {
        let problem = h2_problem();
        let sheet = parse_stylesheet(H2_PATH_SHEET_ABSOLUTE_MATCH).unwrap();
        let mut config = EvolveConfig::new(StructureType::Type2).with_seed(3);
        config.population = 16;
        let r = run_evolution_seeded(&config, &problem, &[sheet]).unwrap();
        assert!(r.success);
        assert_eq!(r.generations, 0);
        assert_eq!(r.evaluations, 16);
        assert_eq!(r.history.len(), 1);
    }

    #[test]
    fn invalid_seed_rejected() {
        let problem = h2_problem();
        let sheet = parse_stylesheet(H2_PATH_SHEET).unwrap();
        let config = EvolveConfig::new(StructureType::Type2);
        assert!(matches!(
            run_evolution_seeded(&config, &problem, &[sheet]),
            Err(ConfigError::SeedGenome { .. })
        ));
    }

    #[test]
    fn runs_are_deterministic_and_monotone() {
        let problem = h2_problem();
        for stype in [StructureType::Type1, StructureType::Type2] {
            let mut config = EvolveConfig::new(stype).with_seed(42);
            config.population = 32;
            config.generations = 15;
            let a = run_evolution(&config, &problem).unwrap();
            let b = run_evolution(&config, &problem).unwrap();
            assert!(a.same_outcome(&b));
            assert!(a.evaluations <= (config.population * (a.generations + 1)) as u64);
            for w in a.history.windows(2) {
                assert!(w[1].best <= w[0].best);
            }
            assert_eq!(a.success, a.fitness.is_solution());
        }
    }

    #[test]
    fn h2_extraction_is_found() {
        let problem = h2_problem();
        let mut successes = 0;
        for seed in 0..5 {
            let config = EvolveConfig::new(StructureType::Type1).with_seed(seed);
            if run_evolution(&config, &problem).unwrap().success {
                successes += 1;
            }
        }
        assert!(successes >= 4, "{successes}/5");
    }
}
