use thiserror::Error;

use super::{InstructionKind, MatchPattern, Stylesheet, Template, TransformLimits};
use crate::xml::{push_text_lines, BuildError, Document, DocumentBuilder, NodeId};
use crate::xpath::{eval_path, Context};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("template recursion deeper than {0}")]
    RecursionOverflow(usize),
    #[error("output longer than {0} lines")]
    OutputOverflow(usize),
    #[error("cannot build output: {0}")]
    Build(#[from] BuildError),
}

trait Sink {
    fn line(&mut self, value: &str) -> Result<(), TransformError>;
    fn text(&mut self, text: &str) -> Result<(), TransformError>;
}

struct DocSink<'a> {
    builder: DocumentBuilder,
    line_tag: &'a str,
}

impl Sink for DocSink<'_> {
    fn line(&mut self, value: &str) -> Result<(), TransformError> {
        self.builder.start_element(self.line_tag, Vec::new())?;
        self.builder.text(value)?;
        self.builder.end_element()?;
        Ok(())
    }

    fn text(&mut self, text: &str) -> Result<(), TransformError> {
        if !text.trim().is_empty() {
            self.builder.text(text)?;
        }
        Ok(())
    }
}

struct LineSink {
    lines: Vec<String>,
}

impl Sink for LineSink {
    fn line(&mut self, value: &str) -> Result<(), TransformError> {
        self.lines.push(value.trim().to_owned());
        Ok(())
    }

    fn text(&mut self, text: &str) -> Result<(), TransformError> {
        push_text_lines(text, &mut self.lines);
        Ok(())
    }
}

struct Run<'a, S> {
    sheet: &'a Stylesheet,
    doc: &'a Document,
    limits: TransformLimits,
    sink: S,
    emitted: usize,
}

impl<S: Sink> Run<'_, S> {
    fn count(&mut self) -> Result<(), TransformError> {
        self.emitted += 1;
        if self.emitted > self.limits.max_output_lines {
            return Err(TransformError::OutputOverflow(self.limits.max_output_lines));
        }
        Ok(())
    }

    fn start(&mut self) -> Result<(), TransformError> {
        match self.sheet.templates.iter().find(|t| t.is_root()) {
            Some(root) => self.exec(root, Context::Document, 0),
            None => self.apply_to(self.doc.root(), 1),
        }
    }

    fn apply_to(&mut self, node: NodeId, depth: usize) -> Result<(), TransformError> {
        if depth > self.limits.max_recursion_depth {
            return Err(TransformError::RecursionOverflow(self.limits.max_recursion_depth));
        }
        if let Some(text) = self.doc.text(node) {
            self.count()?;
            return self.sink.text(text);
        }
        match match_template(node, self.sheet, self.doc) {
            Some(t) => self.exec(t, Context::Node(node), depth),
            None => {
                for &c in self.doc.children(node) {
                    self.apply_to(c, depth + 1)?;
                }
                Ok(())
            }
        }
    }

    fn exec(&mut self, template: &Template, ctx: Context, depth: usize) -> Result<(), TransformError> {
        for instr in &template.body {
            let selected = eval_path(&instr.select, ctx, self.doc);
            match instr.kind {
                InstructionKind::ApplyTemplates => {
                    for n in selected {
                        self.apply_to(n, depth + 1)?;
                    }
                }
                InstructionKind::ValueOf => {
                    let value = selected.first().map(|&n| self.doc.string_value(n)).unwrap_or_default();
                    self.count()?;
                    if instr.wrapped {
                        self.sink.line(&value)?;
                    } else {
                        self.sink.text(&value)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Applies `sheet` to `input`. The output root is the sheet's wrapper tag and
/// holds line elements and stray text only.
pub fn transform(sheet: &Stylesheet, input: &Document, limits: TransformLimits) -> Result<Document, TransformError> {
    let mut builder = DocumentBuilder::new();
    builder.start_element(sheet.wrapper_tag.as_str(), Vec::new())?;
    let mut run = Run {
        sheet,
        doc: input,
        limits,
        sink: DocSink {
            builder,
            line_tag: &sheet.line_tag,
        },
        emitted: 0,
    };
    run.start()?;
    let mut builder = run.sink.builder;
    builder.end_element()?;
    Ok(builder.finish()?)
}

/// Same as `transform` followed by canonical line extraction, without
/// materializing the output tree.
pub fn transform_lines(
    sheet: &Stylesheet,
    input: &Document,
    limits: TransformLimits,
) -> Result<Vec<String>, TransformError> {
    let mut run = Run {
        sheet,
        doc: input,
        limits,
        sink: LineSink { lines: Vec::new() },
        emitted: 0,
    };
    run.start()?;
    Ok(run.sink.lines)
}

/// First template whose pattern matches `node`; text nodes never match.
pub fn match_template<'s>(node: NodeId, sheet: &'s Stylesheet, doc: &Document) -> Option<&'s Template> {
    let tag = doc.tag(node)?;
    sheet.templates.iter().find(|t| match &t.pattern {
        MatchPattern::Root => false,
        MatchPattern::Tag(name) => name == tag,
        MatchPattern::Path(expr) => {
            if expr.is_simple_absolute() {
                let last_matches = expr.steps().last().and_then(|s| s.name()) == Some(tag);
                last_matches
                    && doc.tag_path_equals(node, &expr.steps().iter().filter_map(|s| s.name()).collect::<Vec<_>>())
            } else {
                eval_path(expr, Context::Document, doc).binary_search(&node).is_ok()
            }
        }
    })
}
