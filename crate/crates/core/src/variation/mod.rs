//! Variation operators and the two-stage operator roulette.
//!
//! Every operator maps a valid genome to a valid genome. When an operator
//! has nothing it can legally change it leaves the genome untouched and
//! reports a no-op.

mod structural;
mod xpath_ops;

pub use structural::{crossover_template, mutate_structure};
pub use xpath_ops::mutate_xpath;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::genome::{Genome, InitParams, StructureType};
use crate::xml::TagCatalog;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperatorKind {
    XpAddFilter,
    XpMutateFilter,
    XpRemoveFilter,
    XpAddBranch,
    XpSetSelf,
    XpSetDescendant,
    XpRemoveBranch,
    CrossoverTemplate,
    AddTemplate,
    MutateTemplate,
    RemoveTemplate,
    AddApply,
    RemoveApply,
    MutateApply1,
    MutateApply2,
    SetTemplateNull,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorGroup {
    XPath,
    Structural,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 16] = [
        OperatorKind::XpAddFilter,
        OperatorKind::XpMutateFilter,
        OperatorKind::XpRemoveFilter,
        OperatorKind::XpAddBranch,
        OperatorKind::XpSetSelf,
        OperatorKind::XpSetDescendant,
        OperatorKind::XpRemoveBranch,
        OperatorKind::CrossoverTemplate,
        OperatorKind::AddTemplate,
        OperatorKind::MutateTemplate,
        OperatorKind::RemoveTemplate,
        OperatorKind::AddApply,
        OperatorKind::RemoveApply,
        OperatorKind::MutateApply1,
        OperatorKind::MutateApply2,
        OperatorKind::SetTemplateNull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::XpAddFilter => "xp-add-filter",
            OperatorKind::XpMutateFilter => "xp-mutate-filter",
            OperatorKind::XpRemoveFilter => "xp-remove-filter",
            OperatorKind::XpAddBranch => "xp-add-branch",
            OperatorKind::XpSetSelf => "xp-set-self",
            OperatorKind::XpSetDescendant => "xp-set-descendant",
            OperatorKind::XpRemoveBranch => "xp-remove-branch",
            OperatorKind::CrossoverTemplate => "crossover-template",
            OperatorKind::AddTemplate => "add-template",
            OperatorKind::MutateTemplate => "mutate-template",
            OperatorKind::RemoveTemplate => "remove-template",
            OperatorKind::AddApply => "add-apply",
            OperatorKind::RemoveApply => "remove-apply",
            OperatorKind::MutateApply1 => "mutate-apply-1",
            OperatorKind::MutateApply2 => "mutate-apply-2",
            OperatorKind::SetTemplateNull => "set-template-null",
        }
    }

    pub fn group(self) -> OperatorGroup {
        if self.name().starts_with("xp-") {
            OperatorGroup::XPath
        } else {
            OperatorGroup::Structural
        }
    }

    pub fn is_legal_for(self, stype: StructureType) -> bool {
        self != OperatorKind::XpSetDescendant || stype == StructureType::Type1
    }

    /// Kinds usable on `stype`, in declaration order.
    pub fn legal_for(stype: StructureType) -> impl Iterator<Item = OperatorKind> {
        Self::ALL.into_iter().filter(move |k| k.is_legal_for(stype))
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown operator {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VariationError {
    #[error("{kind} cannot be applied to {stype} genomes")]
    IllegalKind { kind: OperatorKind, stype: StructureType },
    #[error("{kind} is not a {expected} operator")]
    WrongEntryPoint { kind: OperatorKind, expected: &'static str },
    #[error("crossover parents have different structure types")]
    MixedParents,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("weight of {kind} must be finite and >= 0, got {weight}")]
    BadWeight { kind: OperatorKind, weight: f64 },
    #[error("{kind} is not available for {stype} genomes")]
    IllegalKind { kind: OperatorKind, stype: StructureType },
    #[error("the {0:?} group has zero total weight")]
    EmptyGroup(OperatorGroup),
    #[error("group balance must lie in [0, 1], got {0}")]
    BadBalance(f64),
}

/// Roulette weights for one structure type.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTable {
    pub stype: StructureType,
    pub weights: BTreeMap<OperatorKind, f64>,
    /// Probability of spinning the XPath group rather than the structural one.
    pub group_balance: f64,
}

impl OperatorTable {
    /// Weights from the reference priority table. The XPath block there is
    /// cumulative and is differenced here; the structural block is direct.
    pub fn default_for(stype: StructureType) -> Self {
        use OperatorKind::*;
        let xpath: &[(OperatorKind, f64)] = match stype {
            StructureType::Type1 => &[
                (XpSetSelf, 0.10),
                (XpSetDescendant, 0.14),
                (XpRemoveBranch, 0.15),
                (XpAddFilter, 0.14),
                (XpMutateFilter, 0.16),
                (XpRemoveFilter, 0.14),
                (XpAddBranch, 0.16),
            ],
            StructureType::Type2 => &[
                (XpSetSelf, 0.10),
                (XpRemoveBranch, 0.17),
                (XpAddFilter, 0.18),
                (XpMutateFilter, 0.19),
                (XpRemoveFilter, 0.19),
                (XpAddBranch, 0.16),
            ],
        };
        let structural = [
            (CrossoverTemplate, 0.11),
            (AddTemplate, 0.20),
            (MutateTemplate, 0.10),
            (RemoveTemplate, 0.12),
            (AddApply, 0.10),
            (MutateApply1, 0.10),
            (MutateApply2, 0.14),
            (RemoveApply, 0.10),
            (SetTemplateNull, 0.03),
        ];
        Self {
            stype,
            weights: xpath.iter().copied().chain(structural).collect(),
            group_balance: 0.5,
        }
    }

    pub fn weight(&self, kind: OperatorKind) -> f64 {
        self.weights.get(&kind).copied().unwrap_or(0.0)
    }

    pub fn set_weight(&mut self, kind: OperatorKind, weight: f64) {
        self.weights.insert(kind, weight);
    }

    pub fn group_total(&self, group: OperatorGroup) -> f64 {
        self.weights
            .iter()
            .filter(|(k, _)| k.group() == group)
            .map(|(_, w)| w)
            .sum()
    }

    pub fn check(&self) -> Result<(), TableError> {
        if !(0.0..=1.0).contains(&self.group_balance) {
            return Err(TableError::BadBalance(self.group_balance));
        }
        for (&kind, &weight) in &self.weights {
            if !weight.is_finite() || weight < 0.0 {
                return Err(TableError::BadWeight { kind, weight });
            }
            if weight > 0.0 && !kind.is_legal_for(self.stype) {
                return Err(TableError::IllegalKind {
                    kind,
                    stype: self.stype,
                });
            }
        }
        for group in [OperatorGroup::XPath, OperatorGroup::Structural] {
            if self.group_total(group) <= 0.0 {
                return Err(TableError::EmptyGroup(group));
            }
        }
        Ok(())
    }

    /// Long-run selection probability of `kind` under `select_operator`.
    pub fn probability(&self, kind: OperatorKind) -> f64 {
        let group = kind.group();
        let p_group = match group {
            OperatorGroup::XPath => self.group_balance,
            OperatorGroup::Structural => 1.0 - self.group_balance,
        };
        p_group * self.weight(kind) / self.group_total(group)
    }

    /// Picks a group by `group_balance`, then an operator within it with
    /// probability proportional to its weight.
    pub fn select_operator<R: Rng + ?Sized>(&self, rng: &mut R) -> OperatorKind {
        let group = if rng.gen_bool(self.group_balance) {
            OperatorGroup::XPath
        } else {
            OperatorGroup::Structural
        };
        let members: Vec<(OperatorKind, f64)> = self
            .weights
            .iter()
            .filter(|(k, w)| k.group() == group && **w > 0.0)
            .map(|(k, w)| (*k, *w))
            .collect();
        let total: f64 = members.iter().map(|(_, w)| w).sum();
        let mut x = rng.gen::<f64>() * total;
        for &(kind, w) in &members {
            if x < w {
                return kind;
            }
            x -= w;
        }
        members.last().expect("group has positive weight").0
    }
}

/// Applies a single-parent operator in place. Returns whether the genome
/// was changed; the cached fitness is cleared when it was.
pub fn apply_unary<R: Rng + ?Sized>(
    kind: OperatorKind,
    g: &mut Genome,
    catalog: &TagCatalog,
    params: &InitParams,
    rng: &mut R,
) -> Result<bool, VariationError> {
    match kind.group() {
        OperatorGroup::XPath => mutate_xpath(g, kind, catalog, params, rng),
        OperatorGroup::Structural => mutate_structure(g, kind, catalog, params, rng),
    }
}

fn check_legal(kind: OperatorKind, g: &Genome) -> Result<(), VariationError> {
    if kind.is_legal_for(g.stype) {
        Ok(())
    } else {
        Err(VariationError::IllegalKind { kind, stype: g.stype })
    }
}
