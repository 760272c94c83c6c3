use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Document, NodeId};

/// Root-to-node sequence of element tags.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TagPath(Vec<String>);

impl TagPath {
    pub fn new(tags: Vec<String>) -> Self {
        Self(tags)
    }

    pub fn tags(&self) -> &[String] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn last(&self) -> Option<&str> {
        self.0.last().map(String::as_str)
    }

    pub fn child(&self, tag: &str) -> TagPath {
        let mut v = self.0.clone();
        v.push(tag.to_owned());
        TagPath(v)
    }

    /// True when `self` is a strict prefix of `other`.
    pub fn is_proper_prefix_of(&self, other: &TagPath) -> bool {
        other.0.len() > self.0.len() && other.0[..self.0.len()] == self.0[..]
    }
}

impl fmt::Display for TagPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.0 {
            write!(f, "/{t}")?;
        }
        Ok(())
    }
}

/// Where every element tag occurs in an input document.
///
/// Operators consult it so that every tag they insert into a path exists
/// in the input at that position.
#[derive(Debug, Clone)]
pub struct TagCatalog {
    root_tag: String,
    children: BTreeMap<TagPath, BTreeSet<String>>,
    by_tag: BTreeMap<String, Vec<TagPath>>,
    max_siblings: BTreeMap<String, usize>,
    height: usize,
}

impl TagCatalog {
    pub fn build(doc: &Document) -> Self {
        let mut children: BTreeMap<TagPath, BTreeSet<String>> = BTreeMap::new();
        let mut max_siblings: BTreeMap<String, usize> = BTreeMap::new();
        let mut stack: Vec<(NodeId, TagPath)> = Vec::new();

        let root = doc.root();
        let root_tag = doc.tag(root).unwrap_or_default().to_owned();
        let root_path = TagPath(vec![root_tag.clone()]);
        max_siblings.insert(root_tag.clone(), 1);
        stack.push((root, root_path));

        while let Some((id, path)) = stack.pop() {
            let kids = children.entry(path.clone()).or_default();
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for c in doc.element_children(id) {
                let tag = doc.tag(c).unwrap();
                kids.insert(tag.to_owned());
                *counts.entry(tag).or_default() += 1;
            }
            for (tag, n) in counts {
                let m = max_siblings.entry(tag.to_owned()).or_default();
                *m = (*m).max(n);
            }
            for c in doc.element_children(id).collect::<Vec<_>>().into_iter().rev() {
                stack.push((c, path.child(doc.tag(c).unwrap())));
            }
        }

        let mut by_tag: BTreeMap<String, Vec<TagPath>> = BTreeMap::new();
        for path in children.keys() {
            by_tag
                .entry(path.last().unwrap().to_owned())
                .or_default()
                .push(path.clone());
        }
        let height = children.keys().map(TagPath::depth).max().unwrap_or(0);
        Self {
            root_tag,
            children,
            by_tag,
            max_siblings,
            height,
        }
    }

    pub fn root_tag(&self) -> &str {
        &self.root_tag
    }

    pub fn root_path(&self) -> TagPath {
        TagPath(vec![self.root_tag.clone()])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.by_tag.keys().map(String::as_str)
    }

    pub fn contains_tag(&self, tag: &str) -> bool {
        self.by_tag.contains_key(tag)
    }

    /// All distinct root-to-node paths, in lexicographic order.
    pub fn paths(&self) -> impl Iterator<Item = &TagPath> {
        self.children.keys()
    }

    pub fn contains_path(&self, path: &TagPath) -> bool {
        self.children.contains_key(path)
    }

    pub fn paths_of(&self, tag: &str) -> &[TagPath] {
        self.by_tag.get(tag).map_or(&[], Vec::as_slice)
    }

    /// Tags of element children found under any node at `path`.
    pub fn child_tags(&self, path: &TagPath) -> Option<&BTreeSet<String>> {
        self.children.get(path)
    }

    /// True when no node at `path` has element children.
    pub fn is_leaf_path(&self, path: &TagPath) -> bool {
        self.children.get(path).is_some_and(BTreeSet::is_empty)
    }

    /// Catalogued paths strictly below `path`.
    pub fn paths_below<'a>(&'a self, path: &'a TagPath) -> impl Iterator<Item = &'a TagPath> + 'a {
        self.children
            .range(path.clone()..)
            .map(|(p, _)| p)
            .skip(1)
            .take_while(move |p| path.is_proper_prefix_of(p))
    }

    /// Largest number of same-tag siblings observed for `tag`.
    pub fn max_siblings(&self, tag: &str) -> usize {
        self.max_siblings.get(tag).copied().unwrap_or(0)
    }

    /// Depth of the shallowest occurrence of `tag`.
    pub fn min_depth(&self, tag: &str) -> Option<usize> {
        self.paths_of(tag).iter().map(TagPath::depth).min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::XHTML_PAGE;
    use crate::xml::parse_xml;

    fn tp(s: &str) -> TagPath {
        TagPath(s.split('/').filter(|t| !t.is_empty()).map(String::from).collect())
    }

    #[test]
    fn page_catalog() {
        let doc = parse_xml(XHTML_PAGE).unwrap();
        let cat = TagCatalog::build(&doc);
        assert_eq!(cat.paths_of("h2"), &[tp("/html/body/h2")]);
        let body: Vec<_> = cat.child_tags(&tp("/html/body")).unwrap().iter().cloned().collect();
        assert_eq!(body, ["h1", "h2", "p"]);
        assert_eq!(cat.max_siblings("h2"), 3);
        assert_eq!(cat.height(), 4);
        assert!(cat.is_leaf_path(&tp("/html/body/h2")));
        assert!(!cat.is_leaf_path(&tp("/html")));
        let below: Vec<String> = cat.paths_below(&tp("/html/body")).map(|p| p.to_string()).collect();
        assert_eq!(
            below,
            ["/html/body/h1", "/html/body/h2", "/html/body/p", "/html/body/p/br"]
        );
    }

    #[test]
    fn single_element() {
        let cat = TagCatalog::build(&parse_xml("<a/>").unwrap());
        assert_eq!(cat.tags().collect::<Vec<_>>(), ["a"]);
        assert_eq!(cat.height(), 1);
    }

    #[test]
    fn nested_path() {
        let cat = TagCatalog::build(&parse_xml("<a><b><c/></b></a>").unwrap());
        assert_eq!(cat.height(), 3);
        assert_eq!(cat.paths_of("c")[0].to_string(), "/a/b/c");
        assert_eq!(cat.min_depth("c"), Some(3));
    }

    #[test]
    fn paths_below_stops_at_siblings_sharing_a_prefix() {
        let cat = TagCatalog::build(&parse_xml("<a><b><c/></b><bb/></a>").unwrap());
        let below: Vec<String> = cat.paths_below(&tp("/a/b")).map(|p| p.to_string()).collect();
        assert_eq!(below, ["/a/b/c"]);
    }
}
