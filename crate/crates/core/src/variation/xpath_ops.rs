use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{check_legal, OperatorGroup, OperatorKind, VariationError};
use crate::genome::{random_type2_instruction, template_bases, type1_instruction, Genome, InitParams, StructureType};
use crate::xml::{TagCatalog, TagPath};
use crate::xpath::{catalog_reach, PathExpr, Step};
use crate::xslt::{Instruction, MatchPattern};

type Site = (usize, usize);

/// Rewrites one randomly chosen select expression with an XPath-group
/// operator. Type 1 root templates are never touched; type 2 root selects
/// only take part in branch operators, with their templates repaired.
pub fn mutate_xpath<R: Rng + ?Sized>(
    g: &mut Genome,
    kind: OperatorKind,
    catalog: &TagCatalog,
    params: &InitParams,
    rng: &mut R,
) -> Result<bool, VariationError> {
    if kind.group() != OperatorGroup::XPath {
        return Err(VariationError::WrongEntryPoint {
            kind,
            expected: "XPath",
        });
    }
    check_legal(kind, g)?;
    let changed = match kind {
        OperatorKind::XpAddFilter => add_filter(g, catalog, rng),
        OperatorKind::XpMutateFilter => mutate_filter(g, catalog, rng),
        OperatorKind::XpRemoveFilter => remove_filter(g, rng),
        OperatorKind::XpAddBranch => add_branch(g, catalog, params, rng),
        OperatorKind::XpSetSelf => set_self(g, rng),
        OperatorKind::XpSetDescendant => set_descendant(g, rng),
        OperatorKind::XpRemoveBranch => remove_branch(g, catalog, rng),
        _ => unreachable!("group checked above"),
    };
    if changed {
        g.fitness = None;
    }
    Ok(changed)
}

fn body_sites(g: &Genome) -> impl Iterator<Item = Site> + '_ {
    g.sheet
        .templates
        .iter()
        .enumerate()
        .skip(1)
        .flat_map(|(t, tpl)| (0..tpl.body.len()).map(move |i| (t, i)))
}

fn root_sites(g: &Genome) -> impl Iterator<Item = Site> + '_ {
    let n = match g.stype {
        StructureType::Type1 => 0,
        StructureType::Type2 => g.sheet.templates[0].body.len(),
    };
    (0..n).map(|i| (0, i))
}

fn select(g: &Genome, (t, i): Site) -> &PathExpr {
    &g.sheet.templates[t].body[i].select
}

fn instr_mut(g: &mut Genome, (t, i): Site) -> &mut Instruction {
    &mut g.sheet.templates[t].body[i]
}

/// Replaces a body select, keeping the type 1 rule that `.` is read with
/// `value-of` and everything else is applied.
fn replace_select(g: &mut Genome, site: Site, new: PathExpr) {
    let stype = g.stype;
    let instr = instr_mut(g, site);
    *instr = match stype {
        StructureType::Type1 => type1_instruction(new),
        StructureType::Type2 => Instruction::value_of(new),
    };
}

/// Picks a site and one of its step indices from `(site, steps)` candidates.
fn pick<R: Rng + ?Sized>(cands: &[(Site, Vec<usize>)], rng: &mut R) -> Option<(Site, usize)> {
    let (site, steps) = cands.choose(rng)?;
    Some((*site, *steps.choose(rng)?))
}

fn step_candidates<F>(g: &Genome, pred: F) -> Vec<(Site, Vec<usize>)>
where
    F: Fn(&Step) -> bool,
{
    body_sites(g)
        .filter_map(|s| {
            let e = select(g, s);
            if e.is_self() {
                return None;
            }
            let steps: Vec<usize> = e
                .steps()
                .iter()
                .enumerate()
                .filter(|(_, st)| pred(st))
                .map(|(i, _)| i)
                .collect();
            (!steps.is_empty()).then_some((s, steps))
        })
        .collect()
}

fn add_filter<R: Rng + ?Sized>(g: &mut Genome, catalog: &TagCatalog, rng: &mut R) -> bool {
    let cands = step_candidates(g, |st| st.filter.is_none());
    let Some((site, i)) = pick(&cands, rng) else {
        return false;
    };
    let tag = select(g, site).steps()[i].name().unwrap().to_owned();
    let k = rng.gen_range(1..=catalog.max_siblings(&tag).max(1)) as u32;
    let mut e = select(g, site).clone();
    e.set_filter(i, Some(k));
    instr_mut(g, site).select = e;
    true
}

fn mutate_filter<R: Rng + ?Sized>(g: &mut Genome, catalog: &TagCatalog, rng: &mut R) -> bool {
    let cands = step_candidates(g, |st| {
        st.filter.is_some() && catalog.max_siblings(st.name().unwrap()) > 1
    });
    let Some((site, i)) = pick(&cands, rng) else {
        return false;
    };
    let step = &select(g, site).steps()[i];
    let max = catalog.max_siblings(step.name().unwrap()) as u32;
    let old = step.filter.unwrap();
    let mut k = rng.gen_range(1..max);
    if k >= old {
        k += 1;
    }
    let mut e = select(g, site).clone();
    e.set_filter(i, Some(k));
    instr_mut(g, site).select = e;
    true
}

fn remove_filter<R: Rng + ?Sized>(g: &mut Genome, rng: &mut R) -> bool {
    let cands = step_candidates(g, |st| st.filter.is_some());
    let Some((site, i)) = pick(&cands, rng) else {
        return false;
    };
    let mut e = select(g, site).clone();
    e.set_filter(i, None);
    instr_mut(g, site).select = e;
    true
}

fn set_self<R: Rng + ?Sized>(g: &mut Genome, rng: &mut R) -> bool {
    let cands: Vec<Site> = body_sites(g).filter(|s| !select(g, *s).is_self()).collect();
    let Some(&site) = cands.choose(rng) else {
        return false;
    };
    *instr_mut(g, site) = Instruction::value_of(PathExpr::self_expr());
    true
}

fn set_descendant<R: Rng + ?Sized>(g: &mut Genome, rng: &mut R) -> bool {
    let cands: Vec<(Site, Vec<usize>)> = body_sites(g)
        .filter_map(|s| {
            let n = select(g, s).named_len();
            (n >= 3).then(|| (s, (1..n - 1).collect()))
        })
        .collect();
    let Some((site, i)) = pick(&cands, rng) else {
        return false;
    };
    let mut e = select(g, site).clone();
    e.collapse_to_descendant(i);
    instr_mut(g, site).select = e;
    true
}

fn add_branch<R: Rng + ?Sized>(g: &mut Genome, catalog: &TagCatalog, params: &InitParams, rng: &mut R) -> bool {
    let mut cands: Vec<(Site, Vec<String>)> = Vec::new();
    for s in body_sites(g) {
        let bases = template_bases(&g.sheet.templates[s.0], catalog);
        let mut kids = BTreeSet::new();
        for p in catalog_reach(select(g, s), catalog, &bases) {
            if let Some(c) = catalog.child_tags(&p) {
                kids.extend(c.iter().cloned());
            }
        }
        if !kids.is_empty() {
            cands.push((s, kids.into_iter().collect()));
        }
    }
    for s in root_sites(g) {
        if let Some(p) = select(g, s).to_tag_path() {
            if let Some(c) = catalog.child_tags(&p).filter(|c| !c.is_empty()) {
                cands.push((s, c.iter().cloned().collect()));
            }
        }
    }
    let Some((site, kids)) = cands.choose(rng) else {
        return false;
    };
    let site = *site;
    let tag = kids.choose(rng).unwrap().clone();
    if site.0 == 0 {
        let old = select(g, site).to_tag_path().unwrap();
        retarget_deeper(g, site.1, &old, &tag, catalog, params, rng);
    } else {
        let mut e = select(g, site).clone();
        e.push_child(tag);
        replace_select(g, site, e);
    }
    true
}

fn remove_branch<R: Rng + ?Sized>(g: &mut Genome, catalog: &TagCatalog, rng: &mut R) -> bool {
    let mut cands: Vec<Site> = body_sites(g).filter(|s| !select(g, *s).is_self()).collect();
    cands.extend(root_sites(g).filter(|s| select(g, *s).named_len() >= 2));
    let Some(&site) = cands.choose(rng) else {
        return false;
    };
    if site.0 == 0 {
        let old = select(g, site).to_tag_path().unwrap();
        retarget_shallower(g, site.1, &old, catalog);
    } else {
        let mut e = select(g, site).clone();
        e.pop_step();
        replace_select(g, site, e);
    }
    true
}

/// Type 2 root select `i` grows from `old` to `old/tag`; the paired
/// template follows, and its selects drop the now-implied leading step.
fn retarget_deeper<R: Rng + ?Sized>(
    g: &mut Genome,
    i: usize,
    old: &TagPath,
    tag: &str,
    catalog: &TagCatalog,
    params: &InitParams,
    rng: &mut R,
) {
    let new = old.child(tag);
    let new_expr = PathExpr::from_tag_path(&new);
    g.sheet.templates[0].body[i].select = new_expr.clone();
    let template = &mut g.sheet.templates[i + 1];
    template.pattern = MatchPattern::Path(new_expr);
    if catalog.is_leaf_path(&new) {
        template.body = vec![Instruction::value_of(PathExpr::self_expr())];
        return;
    }
    for instr in &mut template.body {
        if instr.select.is_self() {
            continue;
        }
        let steps = instr.select.steps();
        let stripped = if steps[0].name() == Some(tag) {
            if steps.len() == 1 {
                Some(PathExpr::self_expr())
            } else {
                PathExpr::new(false, steps[1..].to_vec()).ok()
            }
        } else {
            None
        };
        *instr = match stripped {
            Some(e) => Instruction::value_of(e),
            None => random_type2_instruction(catalog, &new, params.filter_probability, rng),
        };
    }
}

/// Type 2 root select `i` shrinks from `old` to its parent; the paired
/// template's selects gain the removed tag as their first step.
fn retarget_shallower(g: &mut Genome, i: usize, old: &TagPath, catalog: &TagCatalog) {
    let tags = old.tags();
    let removed = tags[tags.len() - 1].clone();
    let parent = TagPath::new(tags[..tags.len() - 1].to_vec());
    debug_assert!(catalog.contains_path(&parent));
    let new_expr = PathExpr::from_tag_path(&parent);
    g.sheet.templates[0].body[i].select = new_expr.clone();
    let template = &mut g.sheet.templates[i + 1];
    template.pattern = MatchPattern::Path(new_expr);
    for instr in &mut template.body {
        let mut steps = vec![Step::child(removed.clone())];
        if !instr.select.is_self() {
            steps.extend(instr.select.steps().iter().cloned());
        }
        instr.select = PathExpr::new(false, steps).expect("named relative steps");
    }
}
