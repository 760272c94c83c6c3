//! Interpreter for the three-instruction XSLT subset: `template`,
//! `apply-templates` and `value-of`, plus the built-in default rules.

mod render;
mod transform;

pub use render::{parse_stylesheet, parse_stylesheet_with, render_stylesheet, StylesheetError};
pub use transform::{match_template, transform, transform_lines, TransformError};

use std::fmt;

use crate::xml::LINE_TAG;
use crate::xpath::PathExpr;

/// Default name of the output document's root element.
pub const DEFAULT_WRAPPER_TAG: &str = "output";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MatchPattern {
    /// `/`, the document node.
    Root,
    /// A bare element name.
    Tag(String),
    /// An absolute path; matches nodes it selects from the document node.
    Path(PathExpr),
}

impl fmt::Display for MatchPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchPattern::Root => f.write_str("/"),
            MatchPattern::Tag(t) => f.write_str(t),
            MatchPattern::Path(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstructionKind {
    ApplyTemplates,
    ValueOf,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub kind: InstructionKind,
    pub select: PathExpr,
    /// `value-of` output goes inside a line element.
    pub wrapped: bool,
}

impl Instruction {
    pub fn apply(select: PathExpr) -> Self {
        Self {
            kind: InstructionKind::ApplyTemplates,
            select,
            wrapped: false,
        }
    }

    pub fn value_of(select: PathExpr) -> Self {
        Self {
            kind: InstructionKind::ValueOf,
            select,
            wrapped: true,
        }
    }

    pub fn is_apply(&self) -> bool {
        self.kind == InstructionKind::ApplyTemplates
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Template {
    pub pattern: MatchPattern,
    pub body: Vec<Instruction>,
}

impl Template {
    pub fn new(pattern: MatchPattern, body: Vec<Instruction>) -> Self {
        Self { pattern, body }
    }

    pub fn is_root(&self) -> bool {
        self.pattern == MatchPattern::Root
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stylesheet {
    pub templates: Vec<Template>,
    /// Name of the output root element.
    pub wrapper_tag: String,
    /// Element that wraps each `value-of` result.
    pub line_tag: String,
}

impl Stylesheet {
    pub fn new(templates: Vec<Template>) -> Self {
        Self {
            templates,
            wrapper_tag: DEFAULT_WRAPPER_TAG.to_owned(),
            line_tag: LINE_TAG.to_owned(),
        }
    }

    pub fn with_wrapper_tag(mut self, tag: impl Into<String>) -> Self {
        self.wrapper_tag = tag.into();
        self
    }

    pub fn with_line_tag(mut self, tag: impl Into<String>) -> Self {
        self.line_tag = tag.into();
        self
    }

    /// Template count plus instruction count.
    pub fn size(&self) -> usize {
        self.templates.len() + self.templates.iter().map(|t| t.body.len()).sum::<usize>()
    }
}

/// Guards against runaway stylesheets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransformLimits {
    pub max_recursion_depth: usize,
    pub max_output_lines: usize,
}

impl TransformLimits {
    /// Input tree height + 8 levels; 16 lines per target line plus 64.
    pub fn for_problem(input_height: usize, target_lines: usize) -> Self {
        Self {
            max_recursion_depth: input_height + 8,
            max_output_lines: 16 * target_lines + 64,
        }
    }
}

impl Default for TransformLimits {
    fn default() -> Self {
        Self {
            max_recursion_depth: 64,
            max_output_lines: 100_000,
        }
    }
}
