//! Deterministic graded corpus of input/target pairs with known solutions.
//!
//! Every pair ships a hand-written solution stylesheet for each genome
//! layout; the target document is the output of the type 2 solution.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::xml::{Document, DocumentBuilder};
use crate::xslt::{parse_stylesheet, transform, TransformLimits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorpusProfile {
    #[default]
    Graded,
}

impl FromStr for CorpusProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "graded" => Ok(CorpusProfile::Graded),
            other => Err(format!("unknown corpus profile {other:?} (expected graded)")),
        }
    }
}

impl fmt::Display for CorpusProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("graded")
    }
}

#[derive(Debug, Clone)]
pub struct CorpusPair {
    /// 1-based, in order of increasing difficulty.
    pub id: usize,
    pub name: &'static str,
    pub description: &'static str,
    pub input: String,
    pub target: String,
    /// Solution in the tag-template layout.
    pub type1_solution: String,
    /// Solution in the absolute-path layout.
    pub type2_solution: String,
}

impl CorpusPair {
    pub fn input_doc(&self) -> Document {
        crate::xml::parse_xml(&self.input).expect("corpus input parses")
    }

    pub fn target_doc(&self) -> Document {
        crate::xml::parse_xml(&self.target).expect("corpus target parses")
    }

    pub fn file_stem(&self) -> String {
        format!("pair-{}-{}", self.id, self.name)
    }
}

enum Node {
    El(&'static str, Vec<Node>),
    Text(String),
}

fn el(tag: &'static str, kids: Vec<Node>) -> Node {
    Node::El(tag, kids)
}

fn leaf(tag: &'static str, text: impl Into<String>) -> Node {
    Node::El(tag, vec![Node::Text(text.into())])
}

fn build(root: &Node) -> Document {
    fn walk(n: &Node, b: &mut DocumentBuilder) {
        match n {
            Node::El(tag, kids) => {
                b.start_element(*tag, Vec::new()).unwrap();
                for k in kids {
                    walk(k, b);
                }
                b.end_element().unwrap();
            }
            Node::Text(t) => b.text(t.as_str()).unwrap(),
        }
    }
    let mut b = DocumentBuilder::new();
    walk(root, &mut b);
    b.finish().unwrap()
}

const SHEET_HEAD: &str = r#"<?xml version="1.0"?>
<xsl:stylesheet version="1.0" xmlns:xsl="http://www.w3.org/1999/XSL/Transform">
  <xsl:output method="xml" indent='yes'/>
"#;

/// Wraps template markup into a complete stylesheet.
fn sheet(templates: &str) -> String {
    format!("{SHEET_HEAD}{templates}</xsl:stylesheet>\n")
}

fn pair(id: usize, name: &'static str, description: &'static str, input: Node, type1: &str, type2: &str) -> CorpusPair {
    let doc = build(&input);
    let type2_solution = sheet(type2);
    let oracle = parse_stylesheet(&type2_solution).expect("corpus solution parses");
    let out = transform(&oracle, &doc, TransformLimits::default()).expect("corpus solution runs");
    CorpusPair {
        id,
        name,
        description,
        input: format!("<?xml version=\"1.0\"?>\n{}", doc.serialize(true)),
        target: format!("<?xml version=\"1.0\"?>\n{}", out.serialize(true)),
        type1_solution: sheet(type1),
        type2_solution,
    }
}

const FRUIT: [&str; 8] = [
    "Apples",
    "Bananas",
    "Cherries",
    "Dates",
    "Elderberries",
    "Figs",
    "Grapes",
    "Honeydew",
];

fn flat_list() -> CorpusPair {
    let items = FRUIT.iter().map(|f| leaf("item", *f)).collect();
    pair(
        1,
        "flat-list",
        "every item of a flat list",
        el("list", items),
        r#"  <xsl:template match="/"><output><xsl:apply-templates select="/list"/></output></xsl:template>
  <xsl:template match="item"><line><xsl:value-of select="."/></line></xsl:template>
"#,
        r#"  <xsl:template match="/"><output><xsl:apply-templates select="/list/item"/></output></xsl:template>
  <xsl:template match="/list/item"><line><xsl:value-of select="."/></line></xsl:template>
"#,
    )
}

fn xhtml_headings() -> CorpusPair {
    let body = vec![
        leaf("h1", "Release notes"),
        leaf("p", "Notes for the spring release."),
        leaf("h2", "Installation"),
        el(
            "p",
            vec![
                Node::Text("Unpack the archive".into()),
                el("br", vec![]),
                Node::Text("and run setup".into()),
            ],
        ),
        leaf("h2", "New features"),
        el(
            "ul",
            vec![
                leaf("li", "Faster start"),
                leaf("li", "Dark theme"),
                leaf("li", "Plugin API"),
            ],
        ),
        leaf("h2", "Known issues"),
        leaf("p", "Printing is slow on some systems."),
        leaf("h2", "Credits"),
    ];
    pair(
        2,
        "xhtml-headings",
        "second-level headings of an XHTML page",
        el(
            "html",
            vec![el("head", vec![leaf("title", "Release notes")]), el("body", body)],
        ),
        r#"  <xsl:template match="/"><output><xsl:apply-templates select="/html"/></output></xsl:template>
  <xsl:template match="html"><xsl:apply-templates select="body/h2"/></xsl:template>
"#,
        r#"  <xsl:template match="/"><output><xsl:apply-templates select="/html/body/h2"/></output></xsl:template>
  <xsl:template match="/html/body/h2"><line><xsl:value-of select="."/></line></xsl:template>
"#,
    )
}

const CDS: [(&str, &str, &str, &str); 6] = [
    ("Empire Burlesque", "Bob Dylan", "USA", "1985"),
    ("Hide your heart", "Bonnie Tyler", "UK", "1988"),
    ("Greatest Hits", "Dolly Parton", "USA", "1982"),
    ("Still got the blues", "Gary Moore", "UK", "1990"),
    ("Eros", "Eros Ramazzotti", "EU", "1997"),
    ("One night only", "Bee Gees", "UK", "1998"),
];

fn catalog_titles() -> CorpusPair {
    let cds = CDS
        .iter()
        .map(|(title, artist, country, year)| {
            el(
                "cd",
                vec![
                    leaf("title", *title),
                    leaf("artist", *artist),
                    leaf("country", *country),
                    leaf("year", *year),
                ],
            )
        })
        .collect();
    pair(
        3,
        "catalog-titles",
        "the title of every record in a catalog",
        el("catalog", cds),
        r#"  <xsl:template match="/"><output><xsl:apply-templates select="/catalog"/></output></xsl:template>
  <xsl:template match="cd"><xsl:apply-templates select="title"/></xsl:template>
"#,
        r#"  <xsl:template match="/"><output><xsl:apply-templates select="/catalog/cd/title"/></output></xsl:template>
  <xsl:template match="/catalog/cd/title"><line><xsl:value-of select="."/></line></xsl:template>
"#,
    )
}

const NEWS: [(&str, &str); 6] = [
    ("Rust 2.0 announced", "Mon, 02 Mar 2026"),
    ("XSLT turns 27", "Tue, 03 Mar 2026"),
    ("Evolving stylesheets", "Wed, 04 Mar 2026"),
    ("Feeds are back", "Thu, 05 Mar 2026"),
    ("A week of parsers", "Fri, 06 Mar 2026"),
    ("Weekend reading", "Sat, 07 Mar 2026"),
];

fn rss_item_titles() -> CorpusPair {
    let mut channel = vec![
        leaf("title", "Example feed"),
        leaf("link", "http://example.org/"),
        leaf("description", "News about markup"),
    ];
    for (i, (title, date)) in NEWS.iter().enumerate() {
        channel.push(el(
            "item",
            vec![
                leaf("title", *title),
                leaf("link", format!("http://example.org/{}", i + 1)),
                leaf("description", format!("Story number {}", i + 1)),
                leaf("pubDate", *date),
            ],
        ));
    }
    pair(
        4,
        "rss-item-titles",
        "item titles of an RSS feed, without the channel title",
        el("rss", vec![el("channel", channel)]),
        r#"  <xsl:template match="/"><output><xsl:apply-templates select="/rss"/></output></xsl:template>
  <xsl:template match="channel"><xsl:apply-templates select="item/title"/></xsl:template>
"#,
        r#"  <xsl:template match="/"><output><xsl:apply-templates select="/rss/channel/item/title"/></output></xsl:template>
  <xsl:template match="/rss/channel/item/title"><line><xsl:value-of select="."/></line></xsl:template>
"#,
    )
}

const CLASSES: [(&str, [&str; 4]); 3] = [
    ("Algebra", ["Ana", "Ben", "Cai", "Dee"]),
    ("Botany", ["Eli", "Fay", "Gus", "Hal"]),
    ("Chemistry", ["Ida", "Jon", "Kim", "Lea"]),
];

fn second_students() -> CorpusPair {
    let classes = CLASSES
        .iter()
        .map(|(name, students)| {
            let students = students
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    el(
                        "student",
                        vec![leaf("name", *s), leaf("grade", format!("{}", 70 + 7 * i))],
                    )
                })
                .collect();
            el(
                "class",
                vec![
                    leaf("name", *name),
                    leaf("teacher", format!("Dr. {name}")),
                    el("students", students),
                ],
            )
        })
        .collect();
    pair(
        5,
        "second-students",
        "the second student of every class, needing a cardinal filter",
        el("school", classes),
        r#"  <xsl:template match="/"><output><xsl:apply-templates select="/school"/></output></xsl:template>
  <xsl:template match="class"><xsl:apply-templates select="students/student[2]/name"/></xsl:template>
"#,
        r#"  <xsl:template match="/"><output><xsl:apply-templates select="/school/class"/></output></xsl:template>
  <xsl:template match="/school/class"><line><xsl:value-of select="students/student[2]/name"/></line></xsl:template>
"#,
    )
}

const ALBUMS: [(&str, [&str; 5]); 3] = [
    (
        "Blue Train",
        [
            "Blue Train",
            "Moment's Notice",
            "Locomotion",
            "I'm Old Fashioned",
            "Lazy Bird",
        ],
    ),
    (
        "Kind of Blue",
        [
            "So What",
            "Freddie Freeloader",
            "Blue in Green",
            "All Blues",
            "Flamenco Sketches",
        ],
    ),
    (
        "Time Out",
        [
            "Blue Rondo",
            "Strange Meadow Lark",
            "Take Five",
            "Three to Get Ready",
            "Kathy's Waltz",
        ],
    ),
];

fn album_digest() -> CorpusPair {
    let albums = ALBUMS
        .iter()
        .map(|(title, tracks)| {
            let tracks = tracks.iter().map(|t| leaf("track", *t)).collect();
            el("album", vec![leaf("title", *title), el("tracks", tracks)])
        })
        .collect();
    pair(
        6,
        "album-digest",
        "the third track of every album, then all album titles",
        el("albums", albums),
        r#"  <xsl:template match="/"><output><xsl:apply-templates select="/albums"/></output></xsl:template>
  <xsl:template match="albums"><xsl:apply-templates select="album/tracks/track[3]"/><xsl:apply-templates select="album/title"/></xsl:template>
"#,
        r#"  <xsl:template match="/"><output><xsl:apply-templates select="/albums/album"/><xsl:apply-templates select="/albums/album/title"/></output></xsl:template>
  <xsl:template match="/albums/album"><line><xsl:value-of select="tracks/track[3]"/></line></xsl:template>
  <xsl:template match="/albums/album/title"><line><xsl:value-of select="."/></line></xsl:template>
"#,
    )
}

/// (team name, members)
type Team = (&'static str, [&'static str; 3]);

const DEPARTMENTS: [(&str, [Team; 2]); 4] = [
    (
        "Research",
        [("Compilers", ["Ada", "Bo", "Cy"]), ("Databases", ["Di", "Ed", "Flo"])],
    ),
    (
        "Sales",
        [("North", ["Gia", "Hu", "Ivo"]), ("South", ["Jo", "Kai", "Lu"])],
    ),
    (
        "Support",
        [("Phones", ["Mo", "Nia", "Oz"]), ("Email", ["Pia", "Quin", "Ray"])],
    ),
    (
        "Finance",
        [("Audit", ["Sal", "Tia", "Uma"]), ("Payroll", ["Vic", "Wes", "Xia"])],
    ),
];

fn team_members() -> CorpusPair {
    let departments = DEPARTMENTS
        .iter()
        .map(|(dept, teams)| {
            let mut kids = vec![leaf("name", *dept), leaf("budget", format!("{}k", dept.len() * 50))];
            for (team, members) in teams {
                let mut team_kids = vec![leaf("name", *team)];
                for (i, m) in members.iter().enumerate() {
                    let role = if i == 0 { "lead" } else { "engineer" };
                    team_kids.push(el("member", vec![leaf("name", *m), leaf("role", role)]));
                }
                kids.push(el("team", team_kids));
            }
            el("department", kids)
        })
        .collect();
    pair(
        7,
        "team-members",
        "department names, then the second member of each department's first team",
        el("company", departments),
        r#"  <xsl:template match="/"><output><xsl:apply-templates select="/company"/></output></xsl:template>
  <xsl:template match="company">
    <xsl:apply-templates select="department/name"/>
    <xsl:apply-templates select="department/team[1]/member[2]/name"/>
  </xsl:template>
"#,
        r#"  <xsl:template match="/"><output>
    <xsl:apply-templates select="/company/department/name"/>
    <xsl:apply-templates select="/company/department"/>
  </output></xsl:template>
  <xsl:template match="/company/department/name"><line><xsl:value-of select="."/></line></xsl:template>
  <xsl:template match="/company/department"><line><xsl:value-of select="team/member[2]/name"/></line></xsl:template>
"#,
    )
}

/// The bundled pairs, easiest first.
pub fn graded_corpus() -> Vec<CorpusPair> {
    vec![
        flat_list(),
        xhtml_headings(),
        catalog_titles(),
        rss_item_titles(),
        second_students(),
        album_digest(),
        team_members(),
    ]
}

pub fn corpus(profile: CorpusProfile) -> Vec<CorpusPair> {
    match profile {
        CorpusProfile::Graded => graded_corpus(),
    }
}

/// Writes `<stem>.input.xml`, `<stem>.target.xml`, `<stem>.type1.xsl` and
/// `<stem>.type2.xsl` for every pair; returns the written paths.
pub fn write_corpus(dir: &Path, profile: CorpusProfile) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for p in corpus(profile) {
        let stem = p.file_stem();
        for (suffix, body) in [
            ("input.xml", &p.input),
            ("target.xml", &p.target),
            ("type1.xsl", &p.type1_solution),
            ("type2.xsl", &p.type2_solution),
        ] {
            let path = dir.join(format!("{stem}.{suffix}"));
            fs::write(&path, body)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{Genome, StructureType};
    use crate::xml::TagCatalog;
    use crate::xslt::transform_lines;

    #[test]
    fn solutions_validate_and_reproduce_targets() {
        for p in graded_corpus() {
            let input = p.input_doc();
            let catalog = TagCatalog::build(&input);
            let target = p.target_doc().canonical_lines();
            assert!(!target.is_empty(), "{}", p.name);
            for (stype, text) in [
                (StructureType::Type1, &p.type1_solution),
                (StructureType::Type2, &p.type2_solution),
            ] {
                let sheet = parse_stylesheet(text).unwrap();
                let g = Genome::new(stype, sheet.clone());
                assert_eq!(g.validate(&catalog), vec![], "{} {stype}", p.name);
                let lines = transform_lines(&sheet, &input, TransformLimits::default()).unwrap();
                assert_eq!(lines, target, "{} {stype}", p.name);
            }
        }
    }

    #[test]
    fn graded_shapes() {
        let pairs = graded_corpus();
        assert_eq!(pairs.len(), 7);
        let mut heights = Vec::new();
        for p in &pairs {
            let doc = p.input_doc();
            let n = doc.len();
            assert!((10..=200).contains(&n), "{}: {n} nodes", p.name);
            assert!((2..=5).contains(&doc.height()), "{}: height {}", p.name, doc.height());
            heights.push(doc.height());
        }
        assert_eq!(heights.first(), Some(&2));
        assert_eq!(heights.iter().max(), Some(&5));
    }

    #[test]
    fn regeneration_is_identical() {
        let a = graded_corpus();
        let b = graded_corpus();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.input, y.input);
            assert_eq!(x.target, y.target);
        }
    }

    #[test]
    fn reordering_pair_differs_from_document_order() {
        let p = &graded_corpus()[5];
        let target = p.target_doc().canonical_lines();
        assert_eq!(
            target,
            [
                "Locomotion",
                "Blue in Green",
                "Take Five",
                "Blue Train",
                "Kind of Blue",
                "Time Out"
            ]
        );
    }
}
