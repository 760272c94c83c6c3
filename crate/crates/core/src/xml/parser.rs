use super::{BuildError, Document, DocumentBuilder, XmlError};

/// Parses a well-formed XML document.
///
/// Comments, processing instructions, the XML declaration and a DOCTYPE
/// without internal subset are skipped. Whitespace-only text is dropped.
/// Namespace prefixes are kept as part of the tag name.
pub fn parse_xml(text: &str) -> Result<Document, XmlError> {
    Parser::new(text).run()
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    builder: DocumentBuilder,
    pending: String,
}

fn is_name_char(c: char) -> bool {
    !(c.is_whitespace() || matches!(c, '/' | '>' | '=' | '<' | '"' | '\'' | '&'))
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            pos: 0,
            builder: DocumentBuilder::new(),
            pending: String::new(),
        }
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> XmlError {
        let before = &self.src[..pos.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
        XmlError {
            line,
            column,
            message: message.into(),
        }
    }

    fn error(&self, message: impl Into<String>) -> XmlError {
        self.error_at(self.pos, message)
    }

    fn build_err(&self, pos: usize, e: BuildError) -> XmlError {
        self.error_at(pos, e.to_string())
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn skip_past(&mut self, terminator: &str, what: &str) -> Result<(), XmlError> {
        match self.rest().find(terminator) {
            Some(i) => {
                self.pos += i + terminator.len();
                Ok(())
            }
            None => Err(self.error(format!("unterminated {what}"))),
        }
    }

    fn run(mut self) -> Result<Document, XmlError> {
        while self.pos < self.src.len() {
            let rest = self.rest();
            if rest.starts_with("<!--") {
                self.skip_past("-->", "comment")?;
            } else if rest.starts_with("<?") {
                self.flush_text()?;
                self.skip_past("?>", "processing instruction")?;
            } else if rest.starts_with("<![CDATA[") {
                return Err(self.error("CDATA sections are not supported"));
            } else if rest.starts_with("<!") {
                self.flush_text()?;
                self.skip_doctype()?;
            } else if rest.starts_with("</") {
                self.flush_text()?;
                self.end_tag()?;
            } else if rest.starts_with('<') {
                self.flush_text()?;
                self.start_tag()?;
            } else {
                self.char_data()?;
            }
        }
        self.flush_text()?;
        let end = self.src.len();
        self.builder.finish().map_err(|e| match e {
            BuildError::NoRoot => XmlError {
                line: 1,
                column: 1,
                message: "no root element".into(),
            },
            e => Parser::new(self.src).build_err(end, e),
        })
    }

    fn skip_doctype(&mut self) -> Result<(), XmlError> {
        let start = self.pos;
        let mut depth = 0usize;
        for (i, c) in self.rest().char_indices() {
            match c {
                '[' => depth += 1,
                ']' => depth = depth.saturating_sub(1),
                '>' if depth == 0 => {
                    self.pos += i + 1;
                    return Ok(());
                }
                _ => {}
            }
        }
        Err(self.error_at(start, "unterminated declaration"))
    }

    fn flush_text(&mut self) -> Result<(), XmlError> {
        if self.pending.is_empty() {
            return Ok(());
        }
        let text = std::mem::take(&mut self.pending);
        if text.trim().is_empty() {
            return Ok(());
        }
        let pos = self.pos;
        self.builder.text(text).map_err(|e| self.build_err(pos, e))
    }

    fn char_data(&mut self) -> Result<(), XmlError> {
        let end = self.rest().find('<').map_or(self.src.len(), |i| self.pos + i);
        let raw = &self.src[self.pos..end];
        let decoded = self.decode(raw, self.pos)?;
        self.pending.push_str(&decoded);
        self.pos = end;
        Ok(())
    }

    fn decode(&self, raw: &str, base: usize) -> Result<String, XmlError> {
        if !raw.contains('&') {
            return Ok(raw.to_owned());
        }
        let mut out = String::with_capacity(raw.len());
        let mut rest = raw;
        while let Some(amp) = rest.find('&') {
            out.push_str(&rest[..amp]);
            let after = &rest[amp + 1..];
            let offset = base + (raw.len() - rest.len()) + amp;
            let semi = after
                .find(';')
                .ok_or_else(|| self.error_at(offset, "unterminated entity reference"))?;
            let name = &after[..semi];
            let ch = match name {
                "lt" => '<',
                "gt" => '>',
                "amp" => '&',
                "quot" => '"',
                "apos" => '\'',
                _ if name.starts_with("#x") => u32::from_str_radix(&name[2..], 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| self.error_at(offset, format!("bad character reference &{name};")))?,
                _ if name.starts_with('#') => name[1..]
                    .parse::<u32>()
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| self.error_at(offset, format!("bad character reference &{name};")))?,
                _ => return Err(self.error_at(offset, format!("unknown entity &{name};"))),
            };
            out.push(ch);
            rest = &after[semi + 1..];
        }
        out.push_str(rest);
        Ok(out)
    }

    fn name(&mut self) -> Result<&'a str, XmlError> {
        let rest = self.rest();
        let len = rest.find(|c| !is_name_char(c)).unwrap_or(rest.len());
        if len == 0 {
            return Err(self.error("expected a name"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn start_tag(&mut self) -> Result<(), XmlError> {
        let start = self.pos;
        self.pos += 1;
        let tag = self.name()?;
        let mut attributes: Vec<(String, String)> = Vec::new();
        loop {
            let had_ws = {
                let before = self.pos;
                self.skip_ws();
                self.pos > before
            };
            match self.peek() {
                Some('>') => {
                    self.pos += 1;
                    self.builder
                        .start_element(tag, attributes)
                        .map_err(|e| self.build_err(start, e))?;
                    return Ok(());
                }
                Some('/') => {
                    if !self.rest().starts_with("/>") {
                        return Err(self.error("expected '/>'"));
                    }
                    self.pos += 2;
                    self.builder
                        .start_element(tag, attributes)
                        .map_err(|e| self.build_err(start, e))?;
                    self.builder.end_element().map_err(|e| self.build_err(start, e))?;
                    return Ok(());
                }
                None => return Err(self.error_at(start, format!("unterminated tag <{tag}"))),
                Some(_) if !had_ws => {
                    return Err(self.error("expected whitespace before attribute"));
                }
                Some(_) => {
                    let attr_pos = self.pos;
                    let name = self.name()?;
                    self.skip_ws();
                    if self.peek() != Some('=') {
                        return Err(self.error(format!("attribute {name} has no value")));
                    }
                    self.pos += 1;
                    self.skip_ws();
                    let quote = match self.peek() {
                        Some(q @ ('"' | '\'')) => q,
                        _ => return Err(self.error("expected quoted attribute value")),
                    };
                    self.pos += 1;
                    let close = self
                        .rest()
                        .find(quote)
                        .ok_or_else(|| self.error("unterminated attribute value"))?;
                    let raw = &self.src[self.pos..self.pos + close];
                    if raw.contains('<') {
                        return Err(self.error("'<' in attribute value"));
                    }
                    let value = self.decode(raw, self.pos)?;
                    self.pos += close + 1;
                    if attributes.iter().any(|(k, _)| k == name) {
                        return Err(self.error_at(attr_pos, format!("duplicate attribute {name}")));
                    }
                    attributes.push((name.to_owned(), value));
                }
            }
        }
    }

    fn end_tag(&mut self) -> Result<(), XmlError> {
        let start = self.pos;
        self.pos += 2;
        let tag = self.name()?;
        self.skip_ws();
        if self.peek() != Some('>') {
            return Err(self.error("expected '>'"));
        }
        self.pos += 1;
        match self.builder.open_tag() {
            Some(open) if open == tag => {}
            Some(open) => return Err(self.error_at(start, format!("mismatched end tag </{tag}>, expected </{open}>"))),
            None => return Err(self.error_at(start, format!("unexpected end tag </{tag}>"))),
        }
        self.builder.end_element().map_err(|e| self.build_err(start, e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::XHTML_PAGE;

    #[test]
    fn parses_xhtml_page() {
        let doc = parse_xml(XHTML_PAGE).unwrap();
        assert_eq!(doc.tag(doc.root()), Some("html"));
        let body = doc
            .element_children(doc.root())
            .find(|&c| doc.tag(c) == Some("body"))
            .unwrap();
        let tags: Vec<_> = doc.element_children(body).map(|c| doc.tag(c).unwrap()).collect();
        assert_eq!(tags, ["h1", "h2", "p", "h2", "h2"]);
    }

    #[test]
    fn minimal_document() {
        let doc = parse_xml("<a/>").unwrap();
        assert_eq!(doc.tag(doc.root()), Some("a"));
        assert!(doc.children(doc.root()).is_empty());
    }

    #[test]
    fn two_children_with_text() {
        let doc = parse_xml("<a><b>x</b><b>y</b></a>").unwrap();
        let kids = doc.children(doc.root()).to_vec();
        assert_eq!(kids.len(), 2);
        assert_eq!(doc.string_value(kids[0]), "x");
        assert_eq!(doc.string_value(kids[1]), "y");
    }

    #[test]
    fn entities_and_attributes() {
        let doc = parse_xml(r#"<a k='1' j="a&amp;b">x &lt; y &#65;&#x42;</a>"#).unwrap();
        assert_eq!(doc.attribute(doc.root(), "k"), Some("1"));
        assert_eq!(doc.attribute(doc.root(), "j"), Some("a&b"));
        assert_eq!(doc.string_value(doc.root()), "x < y AB");
    }

    #[test]
    fn comments_merge_surrounding_text() {
        let doc = parse_xml("<a>x<!-- c -->y</a>").unwrap();
        assert_eq!(doc.children(doc.root()).len(), 1);
        assert_eq!(doc.string_value(doc.root()), "xy");
    }

    #[test]
    fn prefixed_tags_are_opaque() {
        let doc = parse_xml(r#"<xsl:stylesheet xmlns:xsl="u"><xsl:template match="/"/></xsl:stylesheet>"#).unwrap();
        assert_eq!(doc.tag(doc.root()), Some("xsl:stylesheet"));
    }

    #[test]
    fn doctype_skipped() {
        let doc = parse_xml("<!DOCTYPE a [<!ELEMENT a ANY>]>\n<a>t</a>").unwrap();
        assert_eq!(doc.string_value(doc.root()), "t");
    }

    #[test]
    fn errors_carry_position() {
        let e = parse_xml("<a>\n  <b></c>\n</a>").unwrap_err();
        assert_eq!((e.line, e.column), (2, 6));
        assert!(e.message.contains("mismatched"));

        let e = parse_xml("<a/><b/>").unwrap_err();
        assert!(e.message.contains("more than one root"), "{e}");

        let e = parse_xml("<a><b></a>").unwrap_err();
        assert!(e.message.contains("mismatched"), "{e}");

        let e = parse_xml("<a><b>").unwrap_err();
        assert!(e.message.contains("unclosed"), "{e}");

        let e = parse_xml("<a x=1/>").unwrap_err();
        assert!(e.message.contains("quoted"), "{e}");

        let e = parse_xml("<a x='1' x='2'/>").unwrap_err();
        assert!(e.message.contains("duplicate"), "{e}");

        let e = parse_xml("<a>&nbsp;</a>").unwrap_err();
        assert!(e.message.contains("unknown entity"), "{e}");

        assert!(parse_xml("").is_err());
        assert!(parse_xml("text<a/>").is_err());
        assert!(parse_xml("<a><![CDATA[x]]></a>").is_err());
    }
}
