use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{check_legal, OperatorGroup, OperatorKind, VariationError};
use crate::genome::{
    random_relative_path, random_type1_body, random_type1_instruction, random_type1_template, random_type2_body,
    random_type2_instruction, random_type2_template, shallow_biased_path, shallow_biased_tag, template_bases,
    type1_instruction, Genome, InitParams, StructureType,
};
use crate::xml::{TagCatalog, TagPath};
use crate::xpath::{catalog_reach, PathExpr};
use crate::xslt::{Instruction, MatchPattern, Template};

/// Swaps one random non-root template between two parents. For type 2 the
/// root selects at the swapped positions travel with their templates.
pub fn crossover_template<R: Rng + ?Sized>(
    a: &mut Genome,
    b: &mut Genome,
    rng: &mut R,
) -> Result<bool, VariationError> {
    if a.stype != b.stype {
        return Err(VariationError::MixedParents);
    }
    let (na, nb) = (a.sheet.templates.len(), b.sheet.templates.len());
    if na < 2 || nb < 2 {
        return Ok(false);
    }
    let i = rng.gen_range(1..na);
    let j = rng.gen_range(1..nb);
    std::mem::swap(&mut a.sheet.templates[i], &mut b.sheet.templates[j]);
    if a.stype == StructureType::Type2 {
        std::mem::swap(
            &mut a.sheet.templates[0].body[i - 1],
            &mut b.sheet.templates[0].body[j - 1],
        );
    }
    a.fitness = None;
    b.fitness = None;
    Ok(true)
}

/// Applies a single-parent structural operator in place.
pub fn mutate_structure<R: Rng + ?Sized>(
    g: &mut Genome,
    kind: OperatorKind,
    catalog: &TagCatalog,
    params: &InitParams,
    rng: &mut R,
) -> Result<bool, VariationError> {
    if kind.group() != OperatorGroup::Structural || kind == OperatorKind::CrossoverTemplate {
        return Err(VariationError::WrongEntryPoint {
            kind,
            expected: "single-parent structural",
        });
    }
    check_legal(kind, g)?;
    let changed = match kind {
        OperatorKind::AddTemplate => add_template(g, catalog, params, rng),
        OperatorKind::MutateTemplate => mutate_template(g, catalog, params, rng),
        OperatorKind::RemoveTemplate => remove_template(g, rng),
        OperatorKind::AddApply => add_apply(g, catalog, params, rng),
        OperatorKind::RemoveApply => remove_apply(g, rng),
        OperatorKind::MutateApply1 => mutate_apply_1(g, catalog, rng),
        OperatorKind::MutateApply2 => mutate_apply_2(g, catalog, params, rng),
        OperatorKind::SetTemplateNull => set_template_null(g, rng),
        _ => unreachable!("entry point checked above"),
    };
    if changed {
        g.fitness = None;
    }
    Ok(changed)
}

fn type2_path(t: &Template) -> TagPath {
    match &t.pattern {
        MatchPattern::Path(p) => p.to_tag_path().expect("type 2 match is a simple absolute path"),
        other => panic!("type 2 template with match {other}"),
    }
}

/// Non-root templates whose bodies may hold more than `.`.
fn open_templates(g: &Genome, catalog: &TagCatalog) -> Vec<usize> {
    (1..g.sheet.templates.len())
        .filter(|&t| match g.stype {
            StructureType::Type1 => true,
            StructureType::Type2 => !catalog.is_leaf_path(&type2_path(&g.sheet.templates[t])),
        })
        .collect()
}

fn random_instruction<R: Rng + ?Sized>(
    g: &Genome,
    t: usize,
    catalog: &TagCatalog,
    params: &InitParams,
    rng: &mut R,
) -> Instruction {
    let template = &g.sheet.templates[t];
    let p = params.filter_probability;
    match g.stype {
        StructureType::Type1 => random_type1_instruction(catalog, &template_bases(template, catalog), p, rng),
        StructureType::Type2 => random_type2_instruction(catalog, &type2_path(template), p, rng),
    }
}

fn make_instruction(stype: StructureType, select: PathExpr) -> Instruction {
    match stype {
        StructureType::Type1 => type1_instruction(select),
        StructureType::Type2 => Instruction::value_of(select),
    }
}

fn add_template<R: Rng + ?Sized>(g: &mut Genome, catalog: &TagCatalog, params: &InitParams, rng: &mut R) -> bool {
    let pos = rng.gen_range(1..=g.sheet.templates.len());
    match g.stype {
        StructureType::Type1 => {
            let tag = shallow_biased_tag(catalog, params.shallow_bias, rng);
            let t = random_type1_template(catalog, &tag, params, rng);
            g.sheet.templates.insert(pos, t);
        }
        StructureType::Type2 => {
            let path = shallow_biased_path(catalog, params.shallow_bias, rng);
            let (apply, t) = random_type2_template(catalog, &path, params, rng);
            g.sheet.templates.insert(pos, t);
            g.sheet.templates[0].body.insert(pos - 1, apply);
        }
    }
    true
}

fn mutate_template<R: Rng + ?Sized>(g: &mut Genome, catalog: &TagCatalog, params: &InitParams, rng: &mut R) -> bool {
    if g.sheet.templates.len() < 2 {
        return false;
    }
    let t = rng.gen_range(1..g.sheet.templates.len());
    let body = match (&g.sheet.templates[t].pattern, g.stype) {
        (MatchPattern::Tag(tag), StructureType::Type1) => random_type1_body(catalog, tag, params, rng),
        (_, StructureType::Type2) => random_type2_body(catalog, &type2_path(&g.sheet.templates[t]), params, rng),
        (other, _) => panic!("type 1 template with match {other}"),
    };
    g.sheet.templates[t].body = body;
    true
}

fn delete_template(g: &mut Genome, t: usize) {
    g.sheet.templates.remove(t);
    if g.stype == StructureType::Type2 {
        g.sheet.templates[0].body.remove(t - 1);
    }
}

/// Keeps at least one non-root template.
fn remove_template<R: Rng + ?Sized>(g: &mut Genome, rng: &mut R) -> bool {
    if g.non_root_count() < 2 {
        return false;
    }
    let t = rng.gen_range(1..g.sheet.templates.len());
    delete_template(g, t);
    true
}

fn add_apply<R: Rng + ?Sized>(g: &mut Genome, catalog: &TagCatalog, params: &InitParams, rng: &mut R) -> bool {
    let Some(&t) = open_templates(g, catalog).choose(rng) else {
        return false;
    };
    let instr = random_instruction(g, t, catalog, params, rng);
    let body = &mut g.sheet.templates[t].body;
    let pos = rng.gen_range(0..=body.len());
    body.insert(pos, instr);
    true
}

/// Removes one instruction; a template left empty goes with it. Refused
/// while only one non-root template exists.
fn remove_apply<R: Rng + ?Sized>(g: &mut Genome, rng: &mut R) -> bool {
    if g.non_root_count() < 2 {
        return false;
    }
    let t = rng.gen_range(1..g.sheet.templates.len());
    let body = &mut g.sheet.templates[t].body;
    let i = rng.gen_range(0..body.len());
    body.remove(i);
    if body.is_empty() {
        delete_template(g, t);
    }
    true
}

fn instruction_sites(g: &Genome, templates: &[usize]) -> Vec<(usize, usize)> {
    templates
        .iter()
        .flat_map(|&t| (0..g.sheet.templates[t].body.len()).map(move |i| (t, i)))
        .collect()
}

/// Every unfiltered child-only relative path from the template's
/// occurrences, plus `.`.
fn enumerate_relatives(catalog: &TagCatalog, bases: &[TagPath]) -> Vec<Vec<String>> {
    let mut out = BTreeSet::new();
    out.insert(Vec::new());
    for base in bases {
        for p in catalog.paths_below(base) {
            out.insert(p.tags()[base.depth()..].to_vec());
        }
    }
    out.into_iter().collect()
}

fn mutate_apply_1<R: Rng + ?Sized>(g: &mut Genome, catalog: &TagCatalog, rng: &mut R) -> bool {
    let sites = instruction_sites(g, &open_templates(g, catalog));
    let Some(&(t, i)) = sites.choose(rng) else {
        return false;
    };
    let bases = template_bases(&g.sheet.templates[t], catalog);
    let options = enumerate_relatives(catalog, &bases);
    let tags = options.choose(rng).unwrap().clone();
    g.sheet.templates[t].body[i] = make_instruction(g.stype, PathExpr::relative(tags));
    true
}

/// Keeps a random prefix of the current select and grows a fresh tail
/// below one of the places that prefix reaches.
fn mutate_apply_2<R: Rng + ?Sized>(g: &mut Genome, catalog: &TagCatalog, params: &InitParams, rng: &mut R) -> bool {
    let sites = instruction_sites(g, &open_templates(g, catalog));
    let Some(&(t, i)) = sites.choose(rng) else {
        return false;
    };
    let bases = template_bases(&g.sheet.templates[t], catalog);
    let current = &g.sheet.templates[t].body[i].select;
    let keep = rng.gen_range(0..=current.named_len());
    let prefix = if keep == 0 {
        PathExpr::self_expr()
    } else {
        PathExpr::new(false, current.steps()[..keep].to_vec()).expect("prefix of a valid relative path")
    };
    let reach: Vec<TagPath> = catalog_reach(&prefix, catalog, &bases).into_iter().collect();
    let from = reach.choose(rng).expect("valid select reaches the catalog");
    let tail = random_relative_path(catalog, from, params.filter_probability, rng);
    let mut steps = if prefix.is_self() {
        Vec::new()
    } else {
        prefix.steps().to_vec()
    };
    if !tail.is_self() {
        steps.extend(tail.steps().iter().cloned());
    }
    let select = if steps.is_empty() {
        PathExpr::self_expr()
    } else {
        PathExpr::new(false, steps).expect("relative path with named steps")
    };
    g.sheet.templates[t].body[i] = make_instruction(g.stype, select);
    true
}

fn set_template_null<R: Rng + ?Sized>(g: &mut Genome, rng: &mut R) -> bool {
    if g.sheet.templates.len() < 2 {
        return false;
    }
    let t = rng.gen_range(1..g.sheet.templates.len());
    g.sheet.templates[t].body = vec![Instruction::value_of(PathExpr::self_expr())];
    true
}
