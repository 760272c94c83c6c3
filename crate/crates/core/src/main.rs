use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use xslt_evolve::config::ConfigFile;
use xslt_evolve::corpus::{write_corpus, CorpusProfile};
use xslt_evolve::evolve::{EvolveConfig, Problem};
use xslt_evolve::experiment::{run_experiment, write_reports, ExperimentSpec, Summary};
use xslt_evolve::fitness::evaluate;
use xslt_evolve::genome::StructureType;
use xslt_evolve::xml::{parse_xml, Document, LINE_TAG};
use xslt_evolve::xslt::{parse_stylesheet_with, transform, Stylesheet, TransformLimits};

/// Evolve restricted XSLT stylesheets from an input/target XML example.
#[derive(Parser)]
#[command(name = "xslt-evolve", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of seeded evolutions and write stylesheets and CSV reports.
    Evolve(EvolveArgs),
    /// Apply a stylesheet to an XML document and print the result.
    Apply {
        stylesheet: PathBuf,
        input: PathBuf,
        #[arg(long, default_value = LINE_TAG)]
        line_tag: String,
    },
    /// Print the fitness of a stylesheet on an input/target pair.
    Fitness {
        stylesheet: PathBuf,
        input: PathBuf,
        target: PathBuf,
        #[arg(long, default_value = LINE_TAG)]
        line_tag: String,
    },
    /// Write the bundled example corpus with its solution stylesheets.
    GenCorpus {
        dir: PathBuf,
        #[arg(long, default_value = "graded")]
        profile: CorpusProfile,
    },
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Genome layout: 1 (tag templates) or 2 (absolute-path templates).
    #[arg(long = "type")]
    stype: Option<StructureType>,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    gens: Option<usize>,
    #[arg(long)]
    tournament: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; run i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Flat `key = value` settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "evolve-out")]
    out: PathBuf,
    /// Name of the output root element.
    #[arg(long, conflicts_with = "wrapper_from_root")]
    wrapper_tag: Option<String>,
    /// Name the output root after the input document's root element.
    #[arg(long)]
    wrapper_from_root: bool,
    #[arg(long)]
    line_tag: Option<String>,
    /// Record per-run wall time in the stats CSV.
    #[arg(long)]
    timing: bool,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Evolve(args) => cmd_evolve(args),
        Command::Apply {
            stylesheet,
            input,
            line_tag,
        } => {
            let sheet = load_sheet(&stylesheet, &line_tag)?;
            let doc = load_xml(&input)?;
            let out = transform(&sheet, &doc, TransformLimits::default())
                .with_context(|| format!("applying {}", stylesheet.display()))?;
            print!("{}", out.serialize(true));
            Ok(())
        }
        Command::Fitness {
            stylesheet,
            input,
            target,
            line_tag,
        } => {
            let sheet = load_sheet(&stylesheet, &line_tag)?;
            let doc = load_xml(&input)?;
            let target = load_xml(&target)?.canonical_lines_with(&line_tag);
            println!("{}", evaluate(&sheet, &doc, &target, TransformLimits::default()));
            Ok(())
        }
        Command::GenCorpus { dir, profile } => {
            let written = write_corpus(&dir, profile).with_context(|| format!("writing {}", dir.display()))?;
            println!("wrote {} files to {}", written.len(), dir.display());
            Ok(())
        }
    }
}

fn cmd_evolve(args: EvolveArgs) -> Result<()> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let from_file = file.experiment()?;
    let Some(stype) = args.stype.or(from_file.stype) else {
        bail!("no structure type: pass --type 1|2 or set evolve.type in the config file");
    };
    let mut config = EvolveConfig::new(stype);
    file.apply(&mut config)
        .with_context(|| format!("config file {}", args.config.as_ref().unwrap().display()))?;

    let input = load_xml(&args.input)?;
    let target = load_xml(&args.target)?;
    if let Some(n) = args.pop {
        config.population = n;
    }
    if let Some(n) = args.gens {
        config.generations = n;
    }
    if let Some(n) = args.tournament {
        config.tournament = n;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(tag) = args.wrapper_tag {
        config.wrapper_tag = tag;
    } else if args.wrapper_from_root {
        let root = input
            .element_children(input.root())
            .next()
            .context("input has no root element")?;
        config.wrapper_tag = input.tag(root).unwrap().to_owned();
    }
    if let Some(tag) = args.line_tag {
        config.line_tag = tag;
    }
    config.check().context("invalid evolution settings")?;

    let problem = Problem::from_lines(input, target.canonical_lines_with(&config.line_tag));
    let mut spec = ExperimentSpec::new(config);
    spec.runs = args.runs.or(from_file.runs).unwrap_or(spec.runs);
    spec.timing = args.timing;

    let records = run_experiment(&spec, &problem)?;
    for r in &records {
        let res = &r.result;
        println!(
            "run {} seed {}: {} after {} evaluations ({} generations), {}",
            r.run,
            r.seed,
            if res.success { "solved" } else { "unsolved" },
            res.evaluations,
            res.generations,
            res.fitness
        );
    }
    write_reports(&args.out, &records, spec.timing)?;
    let s = Summary::of(&records);
    match s.median {
        Some(m) => println!("{}/{} runs solved, median evaluations {m}", s.successes, s.runs),
        None => println!("0/{} runs solved", s.runs),
    }
    println!("reports in {}", args.out.display());
    Ok(())
}

fn load_xml(path: &Path) -> Result<Document> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_xml(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_sheet(path: &Path, line_tag: &str) -> Result<Stylesheet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_stylesheet_with(&text, line_tag)
        .with_context(|| format!("{} is outside the supported subset", path.display()))
}
