//! Constrained stylesheet genomes.
//!
//! A type 1 genome has a frozen root template applying `/<root-tag>`, and
//! templates matching bare tag names whose instructions use relative paths;
//! unmatched elements fall through to the built-in rules. A type 2 genome
//! has a root template made only of simple absolute `apply-templates`, one
//! template per select (same order, match equal to the select) and only
//! `value-of` inside those templates.

use std::fmt;
use std::str::FromStr;

use rand::distributions::WeightedIndex;
use rand::prelude::*;

use crate::fitness::{self, FitnessVector};
use crate::xml::{Document, TagCatalog, TagPath};
use crate::xpath::{resolves, PathExpr, Step};
use crate::xslt::{Instruction, InstructionKind, MatchPattern, Stylesheet, Template, TransformLimits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StructureType {
    Type1,
    Type2,
}

impl fmt::Display for StructureType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StructureType::Type1 => "type1",
            StructureType::Type2 => "type2",
        })
    }
}

impl FromStr for StructureType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "1" | "type1" => Ok(StructureType::Type1),
            "2" | "type2" => Ok(StructureType::Type2),
            other => Err(format!("unknown structure type {other:?} (expected 1 or 2)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitParams {
    pub min_templates: usize,
    pub max_templates: usize,
    pub min_instructions: usize,
    pub max_instructions: usize,
    /// Exponent of the shallow-first weighting of new template matches.
    pub shallow_bias: f64,
    /// Chance that a generated path step gets a cardinal filter, when its
    /// tag has repeated siblings somewhere in the input.
    pub filter_probability: f64,
}

impl Default for InitParams {
    fn default() -> Self {
        Self {
            min_templates: 1,
            max_templates: 4,
            min_instructions: 1,
            max_instructions: 3,
            shallow_bias: 1.0,
            filter_probability: 0.2,
        }
    }
}

impl InitParams {
    pub fn check(&self) -> Result<(), String> {
        if self.min_templates < 1 || self.min_templates > self.max_templates {
            return Err(format!(
                "template bounds must satisfy 1 <= min <= max, got [{}, {}]",
                self.min_templates, self.max_templates
            ));
        }
        if self.min_instructions < 1 || self.min_instructions > self.max_instructions {
            return Err(format!(
                "instruction bounds must satisfy 1 <= min <= max, got [{}, {}]",
                self.min_instructions, self.max_instructions
            ));
        }
        if !self.shallow_bias.is_finite() || self.shallow_bias < 0.0 {
            return Err(format!(
                "shallow bias must be finite and >= 0, got {}",
                self.shallow_bias
            ));
        }
        if !(0.0..=1.0).contains(&self.filter_probability) {
            return Err(format!(
                "filter probability must lie in [0, 1], got {}",
                self.filter_probability
            ));
        }
        Ok(())
    }
}

/// A broken structural invariant. `template` indexes `sheet.templates`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    RootTemplateMissing,
    RootTemplateAltered,
    ExtraRootTemplate { template: usize },
    NoTemplates,
    EmptyBody { template: usize },
    UnknownMatch { template: usize },
    MatchKind { template: usize },
    AbsoluteSelect { template: usize, instruction: usize },
    SelfApply { template: usize, instruction: usize },
    Unwrapped { template: usize, instruction: usize },
    KindMismatch { template: usize, instruction: usize },
    Unresolvable { template: usize, instruction: usize },
    RootSelect { instruction: usize },
    TemplateCount { applies: usize, templates: usize },
    OrderMismatch { template: usize },
    ApplyInPathTemplate { template: usize, instruction: usize },
    LeafNotSelf { template: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Genome {
    pub stype: StructureType,
    pub sheet: Stylesheet,
    pub fitness: Option<FitnessVector>,
}

/// Catalog paths an instruction inside `template` is relative to.
pub fn template_bases(template: &Template, catalog: &TagCatalog) -> Vec<TagPath> {
    match &template.pattern {
        MatchPattern::Root => Vec::new(),
        MatchPattern::Tag(t) => catalog.paths_of(t).to_vec(),
        MatchPattern::Path(p) => p
            .to_tag_path()
            .filter(|tp| catalog.contains_path(tp))
            .into_iter()
            .collect(),
    }
}

/// Root template of a type 1 genome: applies `/<root-tag>`.
pub fn type1_root(catalog: &TagCatalog) -> Template {
    Template::new(
        MatchPattern::Root,
        vec![Instruction::apply(PathExpr::from_tag_path(&catalog.root_path()))],
    )
}

/// Instruction kind implied by a select in a type 1 genome.
pub fn type1_instruction(select: PathExpr) -> Instruction {
    if select.is_self() {
        Instruction::value_of(select)
    } else {
        Instruction::apply(select)
    }
}

impl Genome {
    pub fn new(stype: StructureType, sheet: Stylesheet) -> Self {
        Self {
            stype,
            sheet,
            fitness: None,
        }
    }

    /// Templates plus instructions, root template included.
    pub fn size(&self) -> usize {
        self.sheet.size()
    }

    pub fn non_root_count(&self) -> usize {
        self.sheet.templates.len().saturating_sub(1)
    }

    pub fn evaluate<S: AsRef<str>>(&self, input: &Document, target: &[S], limits: TransformLimits) -> FitnessVector {
        fitness::evaluate(&self.sheet, input, target, limits)
    }

    pub fn is_valid(&self, catalog: &TagCatalog) -> bool {
        self.validate(catalog).is_empty()
    }

    pub fn validate(&self, catalog: &TagCatalog) -> Vec<Violation> {
        let mut v = Vec::new();
        let templates = &self.sheet.templates;
        match templates.first() {
            Some(t) if t.is_root() => {}
            _ => {
                v.push(Violation::RootTemplateMissing);
                return v;
            }
        }
        if templates.len() < 2 {
            v.push(Violation::NoTemplates);
        }
        for (i, t) in templates.iter().enumerate() {
            if t.body.is_empty() {
                v.push(Violation::EmptyBody { template: i });
            }
            if i > 0 && t.is_root() {
                v.push(Violation::ExtraRootTemplate { template: i });
            }
        }
        match self.stype {
            StructureType::Type1 => self.validate_type1(catalog, &mut v),
            StructureType::Type2 => self.validate_type2(catalog, &mut v),
        }
        v
    }

    fn validate_type1(&self, catalog: &TagCatalog, v: &mut Vec<Violation>) {
        let templates = &self.sheet.templates;
        if templates[0] != type1_root(catalog) {
            v.push(Violation::RootTemplateAltered);
        }
        for (ti, t) in templates.iter().enumerate().skip(1) {
            match &t.pattern {
                MatchPattern::Tag(tag) if catalog.contains_tag(tag) => {}
                MatchPattern::Tag(_) => {
                    v.push(Violation::UnknownMatch { template: ti });
                    continue;
                }
                _ => {
                    v.push(Violation::MatchKind { template: ti });
                    continue;
                }
            }
            let bases = template_bases(t, catalog);
            for (ii, instr) in t.body.iter().enumerate() {
                check_common(instr, ti, ii, v);
                if instr.select.is_self() != (instr.kind == InstructionKind::ValueOf) {
                    v.push(Violation::KindMismatch {
                        template: ti,
                        instruction: ii,
                    });
                }
                if !instr.select.is_absolute() && !resolves(&instr.select, catalog, &bases) {
                    v.push(Violation::Unresolvable {
                        template: ti,
                        instruction: ii,
                    });
                }
            }
        }
    }

    fn validate_type2(&self, catalog: &TagCatalog, v: &mut Vec<Violation>) {
        let templates = &self.sheet.templates;
        let root = &templates[0];
        for (ii, instr) in root.body.iter().enumerate() {
            let ok = instr.is_apply() && instr.select.to_tag_path().is_some_and(|p| catalog.contains_path(&p));
            if !ok {
                v.push(Violation::RootSelect { instruction: ii });
            }
        }
        if root.body.len() != templates.len() - 1 {
            v.push(Violation::TemplateCount {
                applies: root.body.len(),
                templates: templates.len() - 1,
            });
        }
        for (ti, t) in templates.iter().enumerate().skip(1) {
            let path = match &t.pattern {
                MatchPattern::Path(p) => p,
                _ => {
                    v.push(Violation::MatchKind { template: ti });
                    continue;
                }
            };
            if root.body.get(ti - 1).map(|i| &i.select) != Some(path) {
                v.push(Violation::OrderMismatch { template: ti });
            }
            let bases = template_bases(t, catalog);
            if bases.is_empty() {
                v.push(Violation::UnknownMatch { template: ti });
                continue;
            }
            for (ii, instr) in t.body.iter().enumerate() {
                check_common(instr, ti, ii, v);
                if instr.is_apply() {
                    v.push(Violation::ApplyInPathTemplate {
                        template: ti,
                        instruction: ii,
                    });
                }
                if !instr.select.is_absolute() && !resolves(&instr.select, catalog, &bases) {
                    v.push(Violation::Unresolvable {
                        template: ti,
                        instruction: ii,
                    });
                }
            }
            if catalog.is_leaf_path(&bases[0])
                && !(t.body.len() == 1 && t.body[0].select.is_self() && !t.body[0].is_apply())
            {
                v.push(Violation::LeafNotSelf { template: ti });
            }
        }
    }

    /// A fresh random genome satisfying all invariants of `stype`.
    pub fn random<R: Rng + ?Sized>(
        stype: StructureType,
        catalog: &TagCatalog,
        params: &InitParams,
        rng: &mut R,
    ) -> Genome {
        let k = rng.gen_range(params.min_templates..=params.max_templates);
        let mut templates = Vec::with_capacity(k + 1);
        match stype {
            StructureType::Type1 => {
                templates.push(type1_root(catalog));
                for _ in 0..k {
                    let tag = shallow_biased_tag(catalog, params.shallow_bias, rng);
                    templates.push(random_type1_template(catalog, &tag, params, rng));
                }
            }
            StructureType::Type2 => {
                let mut root = Template::new(MatchPattern::Root, Vec::with_capacity(k));
                for _ in 0..k {
                    let path = shallow_biased_path(catalog, params.shallow_bias, rng);
                    let (apply, template) = random_type2_template(catalog, &path, params, rng);
                    root.body.push(apply);
                    templates.push(template);
                }
                templates.insert(0, root);
            }
        }
        Genome::new(stype, Stylesheet::new(templates))
    }
}

fn check_common(instr: &Instruction, ti: usize, ii: usize, v: &mut Vec<Violation>) {
    if instr.select.is_absolute() {
        v.push(Violation::AbsoluteSelect {
            template: ti,
            instruction: ii,
        });
    }
    if instr.is_apply() && instr.select.is_self() {
        v.push(Violation::SelfApply {
            template: ti,
            instruction: ii,
        });
    }
    if !instr.is_apply() && !instr.wrapped {
        v.push(Violation::Unwrapped {
            template: ti,
            instruction: ii,
        });
    }
}

/// Tag drawn with weight (height - shallowest depth + 1)^bias.
pub fn shallow_biased_tag<R: Rng + ?Sized>(catalog: &TagCatalog, bias: f64, rng: &mut R) -> String {
    let tags: Vec<&str> = catalog.tags().collect();
    let h = catalog.height() as f64;
    let weights = tags
        .iter()
        .map(|t| (h - catalog.min_depth(t).unwrap_or(1) as f64 + 1.0).powf(bias));
    let dist = WeightedIndex::new(weights).expect("catalog has tags");
    tags[dist.sample(rng)].to_owned()
}

/// Catalog path drawn with weight (height - depth + 1)^bias.
pub fn shallow_biased_path<R: Rng + ?Sized>(catalog: &TagCatalog, bias: f64, rng: &mut R) -> TagPath {
    let paths: Vec<&TagPath> = catalog.paths().collect();
    let h = catalog.height() as f64;
    let weights = paths.iter().map(|p| (h - p.depth() as f64 + 1.0).powf(bias));
    let dist = WeightedIndex::new(weights).expect("catalog has paths");
    paths[dist.sample(rng)].clone()
}

/// Random downward walk of child steps from `base`, at least one step long,
/// each step filtered with probability `filter_probability` when its tag
/// repeats among siblings. Returns `.` when `base` has no element children.
pub fn random_relative_path<R: Rng + ?Sized>(
    catalog: &TagCatalog,
    base: &TagPath,
    filter_probability: f64,
    rng: &mut R,
) -> PathExpr {
    let mut cur = base.clone();
    let mut steps = Vec::new();
    loop {
        let kids = match catalog.child_tags(&cur) {
            Some(k) if !k.is_empty() => k,
            _ => break,
        };
        let tag = kids.iter().nth(rng.gen_range(0..kids.len())).unwrap().clone();
        cur = cur.child(&tag);
        let max = catalog.max_siblings(&tag);
        let mut step = Step::child(tag);
        if max > 1 && rng.gen_bool(filter_probability) {
            step = step.with_filter(rng.gen_range(1..=max) as u32);
        }
        steps.push(step);
        if rng.gen_bool(0.5) {
            break;
        }
    }
    if steps.is_empty() {
        PathExpr::self_expr()
    } else {
        PathExpr::new(false, steps).expect("child steps")
    }
}

/// A random instruction valid in a type 1 template whose tag occurs at
/// `bases`.
pub fn random_type1_instruction<R: Rng + ?Sized>(
    catalog: &TagCatalog,
    bases: &[TagPath],
    filter_probability: f64,
    rng: &mut R,
) -> Instruction {
    let base = &bases[rng.gen_range(0..bases.len())];
    if catalog.is_leaf_path(base) || rng.gen_bool(0.5) {
        Instruction::value_of(PathExpr::self_expr())
    } else {
        type1_instruction(random_relative_path(catalog, base, filter_probability, rng))
    }
}

/// A random `value-of` valid in the type 2 template matching `path`.
pub fn random_type2_instruction<R: Rng + ?Sized>(
    catalog: &TagCatalog,
    path: &TagPath,
    filter_probability: f64,
    rng: &mut R,
) -> Instruction {
    Instruction::value_of(random_relative_path(catalog, path, filter_probability, rng))
}

pub fn random_type1_body<R: Rng + ?Sized>(
    catalog: &TagCatalog,
    tag: &str,
    params: &InitParams,
    rng: &mut R,
) -> Vec<Instruction> {
    let bases = catalog.paths_of(tag);
    let m = rng.gen_range(params.min_instructions..=params.max_instructions);
    (0..m)
        .map(|_| random_type1_instruction(catalog, bases, params.filter_probability, rng))
        .collect()
}

pub fn random_type1_template<R: Rng + ?Sized>(
    catalog: &TagCatalog,
    tag: &str,
    params: &InitParams,
    rng: &mut R,
) -> Template {
    Template::new(
        MatchPattern::Tag(tag.to_owned()),
        random_type1_body(catalog, tag, params, rng),
    )
}

pub fn random_type2_body<R: Rng + ?Sized>(
    catalog: &TagCatalog,
    path: &TagPath,
    params: &InitParams,
    rng: &mut R,
) -> Vec<Instruction> {
    if catalog.is_leaf_path(path) {
        return vec![Instruction::value_of(PathExpr::self_expr())];
    }
    let m = rng.gen_range(params.min_instructions..=params.max_instructions);
    (0..m)
        .map(|_| random_type2_instruction(catalog, path, params.filter_probability, rng))
        .collect()
}

/// A root `apply-templates` and its matching template for `path`.
pub fn random_type2_template<R: Rng + ?Sized>(
    catalog: &TagCatalog,
    path: &TagPath,
    params: &InitParams,
    rng: &mut R,
) -> (Instruction, Template) {
    let select = PathExpr::from_tag_path(path);
    let template = Template::new(
        MatchPattern::Path(select.clone()),
        random_type2_body(catalog, path, params, rng),
    );
    (Instruction::apply(select), template)
}
