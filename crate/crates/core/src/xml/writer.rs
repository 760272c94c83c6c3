use std::fmt::Write;

use super::{Document, NodeId, NodeKind};

/// Serializes a document without an XML declaration.
///
/// With `indent`, element-only content is laid out one child per line;
/// elements holding any text are written inline so that character data is
/// never altered. Adjacent text nodes are separated by a newline, which keeps
/// their canonical lines apart after re-parsing.
pub fn serialize(doc: &Document, indent: bool) -> String {
    let mut out = String::new();
    write_node(doc, doc.root(), indent, 0, &mut out);
    if indent {
        out.push('\n');
    }
    out
}

pub(crate) fn escape_text(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            c => out.push(c),
        }
    }
}

pub(crate) fn escape_attr(s: &str, quote: char, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '"' if quote == '"' => out.push_str("&quot;"),
            '\'' if quote == '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
}

fn write_node(doc: &Document, id: NodeId, indent: bool, level: usize, out: &mut String) {
    let (tag, attributes) = match doc.kind(id) {
        NodeKind::Text(t) => {
            escape_text(t, out);
            return;
        }
        NodeKind::Element { tag, attributes } => (tag, attributes),
    };
    out.push('<');
    out.push_str(tag);
    for (k, v) in attributes {
        let _ = write!(out, " {k}=\"");
        escape_attr(v, '"', out);
        out.push('"');
    }
    let children = doc.children(id);
    if children.is_empty() {
        out.push_str("/>");
        return;
    }
    out.push('>');
    let mixed = children.iter().any(|&c| !doc.is_element(c));
    let block = indent && !mixed;
    let mut prev_text = false;
    for &c in children {
        let is_text = !doc.is_element(c);
        if block {
            out.push('\n');
            push_indent(level + 1, out);
        } else if is_text && prev_text {
            out.push('\n');
        }
        write_node(doc, c, indent && !mixed, level + 1, out);
        prev_text = is_text;
    }
    if block {
        out.push('\n');
        push_indent(level, out);
    }
    let _ = write!(out, "</{tag}>");
}

fn push_indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::XHTML_PAGE;
    use crate::xml::{parse_xml, DocumentBuilder};

    #[test]
    fn empty_element() {
        let doc = parse_xml("<a/>").unwrap();
        assert_eq!(serialize(&doc, false), "<a/>");
    }

    #[test]
    fn escapes_text() {
        let mut b = DocumentBuilder::new();
        b.start_element("a", vec![]).unwrap();
        b.text("a<b").unwrap();
        b.end_element().unwrap();
        let doc = b.finish().unwrap();
        assert_eq!(serialize(&doc, false), "<a>a&lt;b</a>");
    }

    #[test]
    fn round_trips_page() {
        let doc = parse_xml(XHTML_PAGE).unwrap();
        for indent in [false, true] {
            let again = parse_xml(&serialize(&doc, indent)).unwrap();
            assert!(doc.isomorphic(&again), "indent={indent}");
        }
    }

    #[test]
    fn indented_layout() {
        let doc = parse_xml("<a><b>x</b><c/></a>").unwrap();
        assert_eq!(serialize(&doc, true), "<a>\n  <b>x</b>\n  <c/>\n</a>\n");
    }

    #[test]
    fn attributes_keep_insertion_order() {
        let doc = parse_xml(r#"<a z="1" y="&quot;"/>"#).unwrap();
        assert_eq!(serialize(&doc, false), r#"<a z="1" y="&quot;"/>"#);
    }
}
