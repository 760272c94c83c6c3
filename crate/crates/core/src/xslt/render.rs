use std::fmt::Write;

use thiserror::Error;

use super::{Instruction, InstructionKind, MatchPattern, Stylesheet, Template};
use crate::xml::writer::escape_attr;
use crate::xml::{parse_xml, Document, NodeId, XmlError, LINE_TAG};
use crate::xpath::{parse_xpath, XPathError};

const XSL_NS: &str = "http://www.w3.org/1999/XSL/Transform";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StylesheetError {
    #[error("malformed XML: {0}")]
    Xml(#[from] XmlError),
    #[error("root element must be xsl:stylesheet, found <{0}>")]
    NotAStylesheet(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("<{element}> is missing the {attribute} attribute")]
    MissingAttribute { element: String, attribute: String },
    #[error("bad XPath {text:?}: {source}")]
    XPath { text: String, source: XPathError },
}

/// Renders runnable XSLT 1.0 text.
pub fn render_stylesheet(sheet: &Stylesheet) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\"?>\n");
    let _ = writeln!(out, "<xsl:stylesheet version=\"1.0\" xmlns:xsl=\"{XSL_NS}\">");
    out.push_str("  <xsl:output method=\"xml\" indent='yes'/>\n");
    for t in &sheet.templates {
        if t.is_root() {
            out.push_str("  <xsl:template match=\"/\">\n");
            let _ = writeln!(out, "    <{}>", sheet.wrapper_tag);
            for i in &t.body {
                render_instruction(i, &sheet.line_tag, 6, &mut out);
            }
            let _ = writeln!(out, "    </{}>", sheet.wrapper_tag);
        } else {
            out.push_str("  <xsl:template match='");
            escape_attr(&t.pattern.to_string(), '\'', &mut out);
            out.push_str("'>\n");
            for i in &t.body {
                render_instruction(i, &sheet.line_tag, 4, &mut out);
            }
        }
        out.push_str("  </xsl:template>\n");
    }
    out.push_str("</xsl:stylesheet>\n");
    out
}

fn render_instruction(instr: &Instruction, line_tag: &str, indent: usize, out: &mut String) {
    for _ in 0..indent {
        out.push(' ');
    }
    let mut select = String::new();
    escape_attr(&instr.select.to_string(), '\'', &mut select);
    match instr.kind {
        InstructionKind::ApplyTemplates => {
            let _ = writeln!(out, "<xsl:apply-templates select='{select}'/>");
        }
        InstructionKind::ValueOf if instr.wrapped => {
            let _ = writeln!(out, "<{line_tag}><xsl:value-of select='{select}'/></{line_tag}>");
        }
        InstructionKind::ValueOf => {
            let _ = writeln!(out, "<xsl:value-of select='{select}'/>");
        }
    }
}

fn required_attr<'d>(doc: &'d Document, id: NodeId, name: &str) -> Result<&'d str, StylesheetError> {
    doc.attribute(id, name)
        .ok_or_else(|| StylesheetError::MissingAttribute {
            element: doc.tag(id).unwrap_or_default().to_owned(),
            attribute: name.to_owned(),
        })
}

fn xpath(text: &str) -> Result<crate::xpath::PathExpr, StylesheetError> {
    parse_xpath(text).map_err(|source| StylesheetError::XPath {
        text: text.to_owned(),
        source,
    })
}

fn is_xsl(tag: &str) -> bool {
    tag.starts_with("xsl:")
}

/// Parses XSLT text into the restricted model, rejecting anything outside it.
///
/// The root template may wrap its instructions in one literal element, which
/// becomes the wrapper tag. Inside templates only `xsl:apply-templates`,
/// `xsl:value-of` and `<line><xsl:value-of/></line>` are accepted.
pub fn parse_stylesheet(text: &str) -> Result<Stylesheet, StylesheetError> {
    parse_stylesheet_with(text, LINE_TAG)
}

pub fn parse_stylesheet_with(text: &str, line_tag: &str) -> Result<Stylesheet, StylesheetError> {
    let doc = parse_xml(text)?;
    let root = doc.root();
    let root_tag = doc.tag(root).unwrap_or_default();
    if root_tag != "xsl:stylesheet" && root_tag != "xsl:transform" {
        return Err(StylesheetError::NotAStylesheet(root_tag.to_owned()));
    }
    let mut sheet = Stylesheet::new(Vec::new()).with_line_tag(line_tag);
    for child in doc.children(root).iter().copied() {
        let tag = match doc.tag(child) {
            Some(t) => t,
            None => return Err(StylesheetError::Unsupported("text at stylesheet level".into())),
        };
        match tag {
            "xsl:output" => {}
            "xsl:template" => {
                let m = required_attr(&doc, child, "match")?;
                let pattern = parse_pattern(m)?;
                let mut body_parent = child;
                if pattern == MatchPattern::Root {
                    let kids = doc.children(child);
                    if let [only] = kids {
                        if let Some(t) = doc.tag(*only) {
                            if !is_xsl(t) && t != line_tag {
                                sheet.wrapper_tag = t.to_owned();
                                body_parent = *only;
                            }
                        }
                    }
                }
                let body = parse_body(&doc, body_parent, line_tag)?;
                sheet.templates.push(Template::new(pattern, body));
            }
            other => return Err(StylesheetError::Unsupported(format!("<{other}>"))),
        }
    }
    Ok(sheet)
}

fn parse_pattern(m: &str) -> Result<MatchPattern, StylesheetError> {
    let m = m.trim();
    if m == "/" {
        return Ok(MatchPattern::Root);
    }
    let expr = xpath(m)?;
    if expr.is_absolute() {
        return Ok(MatchPattern::Path(expr));
    }
    if expr.steps().len() == 1 && expr.steps()[0].filter.is_none() && !expr.is_self() {
        return Ok(MatchPattern::Tag(expr.steps()[0].name().unwrap().to_owned()));
    }
    Err(StylesheetError::Unsupported(format!("match pattern {m:?}")))
}

fn parse_body(doc: &Document, parent: NodeId, line_tag: &str) -> Result<Vec<Instruction>, StylesheetError> {
    let mut body = Vec::new();
    for &c in doc.children(parent) {
        let tag = match doc.tag(c) {
            Some(t) => t,
            None => return Err(StylesheetError::Unsupported("literal text in template".into())),
        };
        match tag {
            "xsl:apply-templates" => {
                if doc.element_children(c).next().is_some() {
                    return Err(StylesheetError::Unsupported("xsl:apply-templates with content".into()));
                }
                let sel = required_attr(doc, c, "select")?;
                body.push(Instruction::apply(xpath(sel)?));
            }
            "xsl:value-of" => {
                let sel = required_attr(doc, c, "select")?;
                let mut i = Instruction::value_of(xpath(sel)?);
                i.wrapped = false;
                body.push(i);
            }
            t if t == line_tag => {
                let kids = doc.children(c);
                match kids {
                    [only] if doc.tag(*only) == Some("xsl:value-of") => {
                        let sel = required_attr(doc, *only, "select")?;
                        body.push(Instruction::value_of(xpath(sel)?));
                    }
                    _ => {
                        return Err(StylesheetError::Unsupported(format!(
                            "<{line_tag}> must hold exactly one xsl:value-of"
                        )))
                    }
                }
            }
            other => return Err(StylesheetError::Unsupported(format!("<{other}>"))),
        }
    }
    Ok(body)
}
