//! The XPath subset used by evolved stylesheets: tag steps separated by `/`
//! or `//`, an optional cardinal predicate `[k]` per step, and the self
//! expression `.`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::xml::{Document, NodeId, TagCatalog, TagPath};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum XPathError {
    #[error("empty expression")]
    Empty,
    #[error("filter must be a positive integer in {0:?}")]
    BadFilter(String),
    #[error("trailing slash in {0:?}")]
    TrailingSlash(String),
    #[error("'.' cannot be combined with other steps in {0:?}")]
    SelfCombined(String),
    #[error("invalid step {step:?} in {expr:?}")]
    BadStep { step: String, expr: String },
    #[error("expected an absolute path, got {0}")]
    NotAbsolute(String),
    #[error("expected a relative path, got {0}")]
    NotRelative(String),
    #[error("path {0} does not resolve in the input")]
    Unresolvable(String),
    #[error("path {0} is not a simple child-only path")]
    NotSimple(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Child,
    Descendant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeTest {
    Name(String),
    SelfNode,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Step {
    pub axis: Axis,
    pub test: NodeTest,
    /// 1-based position among the nodes this step selects from one context.
    pub filter: Option<u32>,
}

impl Step {
    pub fn child(tag: impl Into<String>) -> Self {
        Self {
            axis: Axis::Child,
            test: NodeTest::Name(tag.into()),
            filter: None,
        }
    }

    pub fn descendant(tag: impl Into<String>) -> Self {
        Self {
            axis: Axis::Descendant,
            test: NodeTest::Name(tag.into()),
            filter: None,
        }
    }

    pub fn with_filter(mut self, k: u32) -> Self {
        self.filter = Some(k);
        self
    }

    pub fn name(&self) -> Option<&str> {
        match &self.test {
            NodeTest::Name(n) => Some(n),
            NodeTest::SelfNode => None,
        }
    }
}

/// A parsed path expression.
///
/// Invariant: either the lone self step, or one or more named steps whose
/// first step uses the child axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathExpr {
    absolute: bool,
    steps: Vec<Step>,
}

/// Where evaluation of a relative path starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Context {
    /// The document node, parent of the root element.
    Document,
    Node(NodeId),
}

impl PathExpr {
    pub fn self_expr() -> Self {
        Self {
            absolute: false,
            steps: vec![Step {
                axis: Axis::Child,
                test: NodeTest::SelfNode,
                filter: None,
            }],
        }
    }

    pub fn new(absolute: bool, steps: Vec<Step>) -> Result<Self, XPathError> {
        let expr = Self { absolute, steps };
        expr.check()?;
        Ok(expr)
    }

    pub fn relative<I, S>(tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let steps: Vec<Step> = tags.into_iter().map(Step::child).collect();
        if steps.is_empty() {
            return Self::self_expr();
        }
        Self { absolute: false, steps }
    }

    pub fn from_tag_path(path: &TagPath) -> Self {
        Self {
            absolute: true,
            steps: path.tags().iter().map(Step::child).collect(),
        }
    }

    fn check(&self) -> Result<(), XPathError> {
        if self.steps.is_empty() {
            return Err(XPathError::Empty);
        }
        let has_self = self.steps.iter().any(|s| s.test == NodeTest::SelfNode);
        if has_self && (self.steps.len() > 1 || self.absolute) {
            return Err(XPathError::SelfCombined(self.to_string()));
        }
        if has_self && (self.steps[0].filter.is_some() || self.steps[0].axis != Axis::Child) {
            return Err(XPathError::SelfCombined(self.to_string()));
        }
        if self.steps[0].axis != Axis::Child {
            return Err(XPathError::BadStep {
                step: self.steps[0].name().unwrap_or(".").to_owned(),
                expr: self.to_string(),
            });
        }
        if self.steps.iter().any(|s| s.filter == Some(0)) {
            return Err(XPathError::BadFilter(self.to_string()));
        }
        Ok(())
    }

    pub fn is_absolute(&self) -> bool {
        self.absolute
    }

    pub fn is_self(&self) -> bool {
        self.steps.len() == 1 && self.steps[0].test == NodeTest::SelfNode
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Number of named (non-self) steps.
    pub fn named_len(&self) -> usize {
        if self.is_self() {
            0
        } else {
            self.steps.len()
        }
    }

    /// Child-axis steps only, no filters.
    pub fn is_simple(&self) -> bool {
        !self.is_self() && self.steps.iter().all(|s| s.axis == Axis::Child && s.filter.is_none())
    }

    pub fn is_simple_absolute(&self) -> bool {
        self.absolute && self.is_simple()
    }

    /// The tag path of a simple absolute expression.
    pub fn to_tag_path(&self) -> Option<TagPath> {
        if !self.is_simple_absolute() {
            return None;
        }
        Some(TagPath::new(
            self.steps.iter().filter_map(|s| s.name().map(str::to_owned)).collect(),
        ))
    }

    /// Sets or clears the filter of named step `i`.
    pub fn set_filter(&mut self, i: usize, filter: Option<u32>) {
        assert!(!self.is_self(), "self step carries no filter");
        assert!(filter != Some(0));
        self.steps[i].filter = filter;
    }

    /// Appends a child step; `.` becomes a one-step relative path.
    pub fn push_child(&mut self, tag: impl Into<String>) {
        if self.is_self() {
            self.steps.clear();
        }
        self.steps.push(Step::child(tag));
    }

    /// Drops the last named step. A relative path reduced to nothing becomes
    /// `.`; an absolute path keeps at least one step (returns `None`).
    pub fn pop_step(&mut self) -> Option<Step> {
        if self.is_self() || (self.absolute && self.steps.len() == 1) {
            return None;
        }
        let step = self.steps.pop();
        if self.steps.is_empty() {
            *self = Self::self_expr();
        }
        step
    }

    /// Removes intermediate step `i` and turns its successor into a
    /// descendant step: `/a/b/c` with `i = 1` becomes `/a//c`.
    pub fn collapse_to_descendant(&mut self, i: usize) {
        assert!(i > 0 && i + 1 < self.steps.len(), "step {i} is not intermediate");
        self.steps.remove(i);
        self.steps[i].axis = Axis::Descendant;
    }
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_self() {
            return f.write_str(".");
        }
        for (i, step) in self.steps.iter().enumerate() {
            let name = step.name().unwrap_or(".");
            match (step.axis, step.filter) {
                (Axis::Child, _) if i > 0 || self.absolute => f.write_str("/")?,
                (Axis::Child, _) => {}
                // `a//b[k]` would mean the k-th `b` child of each descendant, so
                // filtered descendant steps use the explicit axis.
                (Axis::Descendant, Some(_)) => f.write_str("/descendant::")?,
                (Axis::Descendant, None) => f.write_str("//")?,
            }
            f.write_str(name)?;
            if let Some(k) = step.filter {
                write!(f, "[{k}]")?;
            }
        }
        Ok(())
    }
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':'))
}

/// Parses `.` | [`/`] step ((`/` | `//`) step)* with step = name [`[`k`]`].
pub fn parse_xpath(text: &str) -> Result<PathExpr, XPathError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(XPathError::Empty);
    }
    if text == "." {
        return Ok(PathExpr::self_expr());
    }
    if text.ends_with('/') {
        return Err(XPathError::TrailingSlash(text.to_owned()));
    }
    let (absolute, body) = match text.strip_prefix('/') {
        Some(rest) if rest.starts_with('/') => {
            return Err(XPathError::BadStep {
                step: "//".into(),
                expr: text.to_owned(),
            })
        }
        Some(rest) => (true, rest),
        None => (false, text),
    };

    let mut steps = Vec::new();
    let mut descendant_next = false;
    for raw in body.split('/') {
        if raw.is_empty() {
            if descendant_next || steps.is_empty() {
                return Err(XPathError::BadStep {
                    step: "//".into(),
                    expr: text.to_owned(),
                });
            }
            descendant_next = true;
            continue;
        }
        let (mut axis, raw) = match raw.strip_prefix("descendant::") {
            Some(r) if !descendant_next && !steps.is_empty() => (Axis::Descendant, r),
            Some(_) => {
                return Err(XPathError::BadStep {
                    step: raw.to_owned(),
                    expr: text.to_owned(),
                })
            }
            None => (Axis::Child, raw),
        };
        if descendant_next {
            axis = Axis::Descendant;
            descendant_next = false;
        }
        let (name, filter) = match raw.find('[') {
            Some(open) => {
                let inner = raw[open + 1..]
                    .strip_suffix(']')
                    .ok_or_else(|| XPathError::BadFilter(text.to_owned()))?;
                let k: u32 = inner.parse().map_err(|_| XPathError::BadFilter(text.to_owned()))?;
                if k == 0 {
                    return Err(XPathError::BadFilter(text.to_owned()));
                }
                (&raw[..open], Some(k))
            }
            None => (raw, None),
        };
        if name == "." {
            return Err(XPathError::SelfCombined(text.to_owned()));
        }
        if !valid_name(name) {
            return Err(XPathError::BadStep {
                step: raw.to_owned(),
                expr: text.to_owned(),
            });
        }
        steps.push(Step {
            axis,
            test: NodeTest::Name(name.to_owned()),
            filter,
        });
    }
    PathExpr::new(absolute, steps)
}

impl FromStr for PathExpr {
    type Err = XPathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_xpath(s)
    }
}

fn apply_filter(matches: impl Iterator<Item = NodeId>, filter: Option<u32>, out: &mut Vec<NodeId>) {
    match filter {
        None => out.extend(matches),
        Some(k) => out.extend(matches.skip(k as usize - 1).take(1)),
    }
}

/// Evaluates `expr` from `context`; the result is in document order without
/// duplicates. Absolute paths start at the document node.
pub fn eval_path(expr: &PathExpr, context: Context, doc: &Document) -> Vec<NodeId> {
    let start = if expr.absolute { Context::Document } else { context };
    if expr.is_self() {
        return match start {
            Context::Node(n) => vec![n],
            Context::Document => vec![doc.root()],
        };
    }
    let mut current: Vec<NodeId> = Vec::new();
    let mut next: Vec<NodeId> = Vec::new();
    for (i, step) in expr.steps.iter().enumerate() {
        let name = step.name().expect("named step");
        next.clear();
        if i == 0 && start == Context::Document {
            let root = doc.root();
            match step.axis {
                Axis::Child => apply_filter(
                    std::iter::once(root).filter(|&r| doc.tag(r) == Some(name)),
                    step.filter,
                    &mut next,
                ),
                Axis::Descendant => apply_filter(
                    std::iter::once(root)
                        .chain(doc.descendants(root))
                        .filter(|&n| doc.tag(n) == Some(name)),
                    step.filter,
                    &mut next,
                ),
            }
        } else {
            if i == 0 {
                if let Context::Node(n) = start {
                    current.clear();
                    current.push(n);
                }
            }
            for &ctx in &current {
                match step.axis {
                    Axis::Child => apply_filter(
                        doc.children(ctx).iter().copied().filter(|&c| doc.tag(c) == Some(name)),
                        step.filter,
                        &mut next,
                    ),
                    Axis::Descendant => apply_filter(
                        doc.descendants(ctx).filter(|&c| doc.tag(c) == Some(name)),
                        step.filter,
                        &mut next,
                    ),
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        std::mem::swap(&mut current, &mut next);
        if current.is_empty() {
            break;
        }
    }
    current
}

/// Concatenates an absolute base with a relative (or self) path.
pub fn join_paths(base: &PathExpr, rel: &PathExpr) -> Result<PathExpr, XPathError> {
    if !base.absolute {
        return Err(XPathError::NotAbsolute(base.to_string()));
    }
    if rel.absolute {
        return Err(XPathError::NotRelative(rel.to_string()));
    }
    if rel.is_self() {
        return Ok(base.clone());
    }
    let mut steps = base.steps.clone();
    steps.extend(rel.steps.iter().cloned());
    PathExpr::new(true, steps)
}

/// Catalogued tag paths an expression can reach structurally (filters are
/// ignored). Relative expressions start from `bases`.
pub fn catalog_reach(expr: &PathExpr, catalog: &TagCatalog, bases: &[TagPath]) -> BTreeSet<TagPath> {
    let mut current: BTreeSet<TagPath> = BTreeSet::new();
    if expr.is_self() {
        current.extend(bases.iter().cloned());
        return current;
    }
    for (i, step) in expr.steps.iter().enumerate() {
        let name = step.name().expect("named step");
        let mut next = BTreeSet::new();
        if i == 0 && expr.absolute {
            match step.axis {
                Axis::Child if catalog.root_tag() == name => {
                    next.insert(catalog.root_path());
                }
                Axis::Child => {}
                Axis::Descendant => next.extend(catalog.paths_of(name).iter().cloned()),
            }
        } else {
            let from: Vec<&TagPath> = if i == 0 {
                bases.iter().collect()
            } else {
                current.iter().collect()
            };
            for p in from {
                match step.axis {
                    Axis::Child => {
                        if catalog.child_tags(p).is_some_and(|c| c.contains(name)) {
                            next.insert(p.child(name));
                        }
                    }
                    Axis::Descendant => next.extend(catalog.paths_below(p).filter(|q| q.last() == Some(name)).cloned()),
                }
            }
        }
        current = next;
        if current.is_empty() {
            break;
        }
    }
    current
}

/// Whether `expr` resolves against the catalog from at least one base, with
/// every filter within the observed sibling counts of its tag.
pub fn resolves(expr: &PathExpr, catalog: &TagCatalog, bases: &[TagPath]) -> bool {
    let filters_ok = expr.steps.iter().all(|s| match (s.name(), s.filter) {
        (Some(name), Some(k)) => k as usize <= catalog.max_siblings(name),
        _ => true,
    });
    filters_ok && !catalog_reach(expr, catalog, bases).is_empty()
}

/// True iff every node selected by the absolute `expr` has no element
/// children. Filters are not taken into account.
pub fn path_depth_is_max(expr: &PathExpr, catalog: &TagCatalog) -> Result<bool, XPathError> {
    if !expr.absolute {
        return Err(XPathError::NotAbsolute(expr.to_string()));
    }
    let reached = catalog_reach(expr, catalog, &[]);
    if reached.is_empty() {
        return Err(XPathError::Unresolvable(expr.to_string()));
    }
    Ok(reached.iter().all(|p| catalog.is_leaf_path(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::XHTML_PAGE;
    use crate::xml::parse_xml;

    fn p(s: &str) -> PathExpr {
        parse_xpath(s).unwrap()
    }

    #[test]
    fn parses_filtered_steps() {
        let e = p("chapter[3]/para[5]");
        assert!(!e.is_absolute());
        assert_eq!(
            e.steps(),
            &[
                Step::child("chapter").with_filter(3),
                Step::child("para").with_filter(5)
            ]
        );
    }

    #[test]
    fn parses_descendant_step() {
        let e = p("chapter[2]//line");
        assert_eq!(
            e.steps(),
            &[Step::child("chapter").with_filter(2), Step::descendant("line")]
        );
        assert_eq!(e.to_string(), "chapter[2]//line");
    }

    #[test]
    fn parses_self() {
        assert!(p(".").is_self());
        assert_eq!(p(".").to_string(), ".");
    }

    #[test]
    fn filtered_descendant_renders_explicit_axis() {
        let e = PathExpr::new(false, vec![Step::child("a"), Step::descendant("b").with_filter(2)]).unwrap();
        assert_eq!(e.to_string(), "a/descendant::b[2]");
        assert_eq!(p("a/descendant::b[2]"), e);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_xpath(""), Err(XPathError::Empty));
        assert!(matches!(parse_xpath("a[0]"), Err(XPathError::BadFilter(_))));
        assert!(matches!(parse_xpath("a[-1]"), Err(XPathError::BadFilter(_))));
        assert!(matches!(parse_xpath("a/"), Err(XPathError::TrailingSlash(_))));
        assert!(matches!(parse_xpath("a/."), Err(XPathError::SelfCombined(_))));
        assert!(matches!(parse_xpath("./a"), Err(XPathError::SelfCombined(_))));
        assert!(parse_xpath("//a").is_err());
        assert!(parse_xpath("a///b").is_err());
        assert!(parse_xpath("a/*").is_err());
        assert!(parse_xpath("@id").is_err());
        assert!(parse_xpath("a[1").is_err());
        assert!(parse_xpath("..").is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "/html/body/h2",
            "a[2]",
            "/a//b",
            "a/b[3]//c",
            ".",
            "/a/descendant::c[2]/d",
        ] {
            assert_eq!(p(s).to_string(), s);
        }
    }

    #[test]
    fn eval_absolute_h2() {
        let doc = parse_xml(XHTML_PAGE).unwrap();
        let nodes = eval_path(&p("/html/body/h2"), Context::Node(doc.root()), &doc);
        let values: Vec<_> = nodes.iter().map(|&n| doc.string_value(n)).collect();
        assert_eq!(values, ["First test", "Second test", "That's another test"]);
    }

    #[test]
    fn eval_self() {
        let doc = parse_xml(XHTML_PAGE).unwrap();
        for i in [0usize, 3, 7] {
            let n = doc.descendants(doc.root()).nth(i).unwrap_or(doc.root());
            assert_eq!(eval_path(&p("."), Context::Node(n), &doc), vec![n]);
        }
    }

    #[test]
    fn eval_filter() {
        let doc = parse_xml("<a><b>x</b><b>y</b></a>").unwrap();
        let ctx = Context::Node(doc.root());
        let r = eval_path(&p("b[2]"), ctx, &doc);
        assert_eq!(r.len(), 1);
        assert_eq!(doc.string_value(r[0]), "y");
        assert!(eval_path(&p("b[3]"), ctx, &doc).is_empty());
    }

    #[test]
    fn filters_bind_per_context() {
        let doc = parse_xml("<r><s><i>1</i><i>2</i></s><s><i>3</i><i>4</i></s></r>").unwrap();
        let r = eval_path(&p("/r/s/i[2]"), Context::Document, &doc);
        let v: Vec<_> = r.iter().map(|&n| doc.string_value(n)).collect();
        assert_eq!(v, ["2", "4"]);
        let r = eval_path(&p("/r//i"), Context::Document, &doc);
        assert_eq!(r.len(), 4);
        let r = eval_path(&p("/r/descendant::i[3]"), Context::Document, &doc);
        assert_eq!(doc.string_value(r[0]), "3");
    }

    #[test]
    fn descendant_is_strict_and_deduplicated() {
        let doc = parse_xml("<a><a><a/></a></a>").unwrap();
        let r = eval_path(&p("a//a"), Context::Document, &doc);
        assert_eq!(r.len(), 2);
        let r = eval_path(&p("/a//a//a"), Context::Document, &doc);
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn relative_from_document_node_matches_root() {
        let doc = parse_xml(XHTML_PAGE).unwrap();
        assert_eq!(eval_path(&p("html"), Context::Document, &doc), vec![doc.root()]);
        assert!(eval_path(&p("html"), Context::Node(doc.root()), &doc).is_empty());
    }

    #[test]
    fn joins() {
        assert_eq!(
            join_paths(&p("/book"), &p("chapter[2]")).unwrap().to_string(),
            "/book/chapter[2]"
        );
        assert_eq!(
            join_paths(&p("/book/title"), &p(".")).unwrap().to_string(),
            "/book/title"
        );
        assert_eq!(join_paths(&p("/a"), &p("b//c")).unwrap().to_string(), "/a/b//c");
        assert!(join_paths(&p("/a"), &p("/b")).is_err());
        assert!(join_paths(&p("a"), &p("b")).is_err());
    }

    #[test]
    fn max_depth() {
        let doc = parse_xml(XHTML_PAGE).unwrap();
        let cat = TagCatalog::build(&doc);
        assert_eq!(path_depth_is_max(&p("/html/body/h2"), &cat), Ok(true));
        assert_eq!(path_depth_is_max(&p("/html"), &cat), Ok(false));
        assert!(path_depth_is_max(&p("/html/nope"), &cat).is_err());
        let cat = TagCatalog::build(&parse_xml("<a/>").unwrap());
        assert_eq!(path_depth_is_max(&p("/a"), &cat), Ok(true));
    }

    #[test]
    fn structural_edits() {
        let mut e = p("/book/chapter/title");
        e.collapse_to_descendant(1);
        assert_eq!(e.to_string(), "/book//title");

        let mut e = p("/book/chapter/title");
        e.pop_step();
        assert_eq!(e.to_string(), "/book/chapter");

        let mut e = p("/book/chapter");
        e.set_filter(1, Some(4));
        assert_eq!(e.to_string(), "/book/chapter[4]");

        let mut e = p("a");
        e.pop_step();
        assert!(e.is_self());
        e.push_child("b");
        assert_eq!(e.to_string(), "b");

        let mut e = p("/a");
        assert!(e.pop_step().is_none());
    }

    #[test]
    fn reach_in_catalog() {
        let doc = parse_xml(XHTML_PAGE).unwrap();
        let cat = TagCatalog::build(&doc);
        let body = cat.paths_of("body").to_vec();
        assert!(resolves(&p("h2[3]"), &cat, &body));
        assert!(!resolves(&p("h2[4]"), &cat, &body));
        assert!(!resolves(&p("title"), &cat, &body));
        let r = catalog_reach(&p("/html//br"), &cat, &[]);
        assert_eq!(r.iter().map(|t| t.to_string()).collect::<Vec<_>>(), ["/html/body/p/br"]);
    }
}
