//! Immutable XML document model.
//!
//! Nodes live in a flat arena ordered by a pre-order walk, so a `NodeId` is
//! also the node's document-order index and every subtree occupies a
//! contiguous id range.

mod catalog;
mod parser;
pub(crate) mod writer;

pub use catalog::{TagCatalog, TagPath};
pub use parser::parse_xml;
pub use writer::serialize;

use std::fmt;

use thiserror::Error;

/// Tag of the elements that mark intended output lines.
pub const LINE_TAG: &str = "line";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct XmlError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Index of a node in its document. Ordering is document order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Element {
        tag: String,
        attributes: Vec<(String, String)>,
    },
    Text(String),
}

#[derive(Debug, Clone)]
struct NodeData {
    kind: NodeKind,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    /// One past the last id of this node's subtree.
    end: u32,
    depth: u32,
}

#[derive(Debug, Clone)]
pub struct Document {
    nodes: Vec<NodeData>,
    source_name: String,
}

impl Document {
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    pub fn with_source_name(mut self, name: impl Into<String>) -> Self {
        self.source_name = name.into();
        self
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.nodes[id.index()].kind
    }

    pub fn tag(&self, id: NodeId) -> Option<&str> {
        match &self.nodes[id.index()].kind {
            NodeKind::Element { tag, .. } => Some(tag),
            NodeKind::Text(_) => None,
        }
    }

    pub fn text(&self, id: NodeId) -> Option<&str> {
        match &self.nodes[id.index()].kind {
            NodeKind::Text(t) => Some(t),
            NodeKind::Element { .. } => None,
        }
    }

    pub fn is_element(&self, id: NodeId) -> bool {
        matches!(self.nodes[id.index()].kind, NodeKind::Element { .. })
    }

    pub fn attributes(&self, id: NodeId) -> &[(String, String)] {
        match &self.nodes[id.index()].kind {
            NodeKind::Element { attributes, .. } => attributes,
            NodeKind::Text(_) => &[],
        }
    }

    pub fn attribute(&self, id: NodeId, name: &str) -> Option<&str> {
        self.attributes(id)
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].parent
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.index()].children
    }

    pub fn element_children(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.children(id).iter().copied().filter(|&c| self.is_element(c))
    }

    /// Strict descendants in document order.
    pub fn descendants(&self, id: NodeId) -> impl Iterator<Item = NodeId> {
        let data = &self.nodes[id.index()];
        (id.0 + 1..data.end).map(NodeId)
    }

    /// Depth of a node; the root element has depth 1.
    pub fn depth(&self, id: NodeId) -> usize {
        self.nodes[id.index()].depth as usize
    }

    /// Element tags from the root element down to `id` (inclusive).
    pub fn tag_path(&self, id: NodeId) -> Vec<&str> {
        let mut path = Vec::with_capacity(self.depth(id));
        let mut cur = Some(id);
        while let Some(n) = cur {
            if let Some(tag) = self.tag(n) {
                path.push(tag);
            }
            cur = self.parent(n);
        }
        path.reverse();
        path
    }

    /// Whether the root-to-node tag path of `id` equals `tags`.
    pub fn tag_path_equals<S: AsRef<str>>(&self, id: NodeId, tags: &[S]) -> bool {
        if !self.is_element(id) || self.depth(id) != tags.len() {
            return false;
        }
        let mut cur = Some(id);
        for expected in tags.iter().rev() {
            match cur {
                Some(n) if self.tag(n) == Some(expected.as_ref()) => cur = self.parent(n),
                _ => return false,
            }
        }
        true
    }

    /// Number of element levels (a lone root element has height 1).
    pub fn height(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Element { .. }))
            .map(|n| n.depth as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn element_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Element { .. }))
            .count()
    }

    /// Concatenated character data of all descendant text nodes.
    pub fn string_value(&self, id: NodeId) -> String {
        if let Some(t) = self.text(id) {
            return t.to_owned();
        }
        let mut out = String::new();
        for d in self.descendants(id) {
            if let NodeKind::Text(t) = &self.nodes[d.index()].kind {
                out.push_str(t);
            }
        }
        out
    }

    /// Canonical comparable lines using the default `line` marker tag.
    pub fn canonical_lines(&self) -> Vec<String> {
        self.canonical_lines_with(LINE_TAG)
    }

    /// Extracts output lines: each `line_tag` element gives its trimmed string
    /// value, and text outside such elements gives one entry per non-empty
    /// trimmed physical line.
    pub fn canonical_lines_with(&self, line_tag: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut i = 0u32;
        let total = self.nodes.len() as u32;
        while i < total {
            let data = &self.nodes[i as usize];
            match &data.kind {
                NodeKind::Element { tag, .. } if tag == line_tag => {
                    out.push(self.string_value(NodeId(i)).trim().to_owned());
                    i = data.end;
                    continue;
                }
                NodeKind::Element { .. } => {}
                NodeKind::Text(t) => push_text_lines(t, &mut out),
            }
            i += 1;
        }
        out
    }

    pub fn serialize(&self, indent: bool) -> String {
        serialize(self, indent)
    }

    /// Structural equality: same kinds, tags, attributes, text and shape.
    pub fn isomorphic(&self, other: &Document) -> bool {
        self.nodes.len() == other.nodes.len()
            && self
                .nodes
                .iter()
                .zip(&other.nodes)
                .all(|(a, b)| a.kind == b.kind && a.parent == b.parent && a.children == b.children)
    }
}

pub(crate) fn push_text_lines(text: &str, out: &mut Vec<String>) {
    for l in text.lines() {
        let l = l.trim();
        if !l.is_empty() {
            out.push(l.to_owned());
        }
    }
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(self, true))
    }
}

/// Incremental pre-order construction of a `Document`.
#[derive(Debug, Default)]
pub struct DocumentBuilder {
    nodes: Vec<NodeData>,
    open: Vec<NodeId>,
    closed_root: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("more than one root element")]
    MultipleRoots,
    #[error("text outside the root element")]
    TextOutsideRoot,
    #[error("no root element")]
    NoRoot,
    #[error("unclosed element <{0}>")]
    Unclosed(String),
    #[error("end tag without open element")]
    NothingOpen,
    #[error("invalid tag name {0:?}")]
    BadTag(String),
}

impl DocumentBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, kind: NodeKind) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        let parent = self.open.last().copied();
        let depth = parent.map_or(1, |p| self.nodes[p.index()].depth + 1);
        if let Some(p) = parent {
            self.nodes[p.index()].children.push(id);
        }
        self.nodes.push(NodeData {
            kind,
            parent,
            children: Vec::new(),
            end: id.0 + 1,
            depth,
        });
        id
    }

    pub fn start_element(
        &mut self,
        tag: impl Into<String>,
        attributes: Vec<(String, String)>,
    ) -> Result<NodeId, BuildError> {
        let tag = tag.into();
        if tag.is_empty() || tag.chars().any(char::is_whitespace) {
            return Err(BuildError::BadTag(tag));
        }
        if self.open.is_empty() && (self.closed_root || !self.nodes.is_empty()) {
            return Err(BuildError::MultipleRoots);
        }
        let id = self.push(NodeKind::Element { tag, attributes });
        self.open.push(id);
        Ok(id)
    }

    /// Appends a text node; empty strings are ignored.
    pub fn text(&mut self, text: impl Into<String>) -> Result<(), BuildError> {
        let text = text.into();
        if text.is_empty() {
            return Ok(());
        }
        if self.open.is_empty() {
            return Err(BuildError::TextOutsideRoot);
        }
        self.push(NodeKind::Text(text));
        Ok(())
    }

    pub fn end_element(&mut self) -> Result<NodeId, BuildError> {
        let id = self.open.pop().ok_or(BuildError::NothingOpen)?;
        self.nodes[id.index()].end = self.nodes.len() as u32;
        if self.open.is_empty() {
            self.closed_root = true;
        }
        Ok(id)
    }

    pub fn open_tag(&self) -> Option<&str> {
        self.open.last().and_then(|id| match &self.nodes[id.index()].kind {
            NodeKind::Element { tag, .. } => Some(tag.as_str()),
            NodeKind::Text(_) => None,
        })
    }

    pub fn finish(self) -> Result<Document, BuildError> {
        if let Some(&open) = self.open.last() {
            let tag = match &self.nodes[open.index()].kind {
                NodeKind::Element { tag, .. } => tag.clone(),
                NodeKind::Text(_) => String::new(),
            };
            return Err(BuildError::Unclosed(tag));
        }
        if self.nodes.is_empty() {
            return Err(BuildError::NoRoot);
        }
        Ok(Document {
            nodes: self.nodes,
            source_name: String::new(),
        })
    }
}
