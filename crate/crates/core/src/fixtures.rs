//! Small reference documents and stylesheets used by tests and examples.

/// A simplified XHTML page with three `h2` headings.
pub const XHTML_PAGE: &str = r#"<?xml version="1.0" ?>
<html>
  <head>
    <title>Test page</title>
  </head>
  <body>
    <h1>Test page</h1>
    <h2>First test</h2>
    <p>Some stuff<br />
    Some more stuff</p>
    <h2>Second test</h2>
    <h2>That's another test</h2>
  </body>
</html>
"#;

/// Extracts the `h2` headings with a template for every element on the way down.
pub const H2_TEMPLATE_CHAIN_SHEET: &str = r#"<?xml version="1.0"?>
<xsl:stylesheet version="1.0" xmlns:xsl="http://www.w3.org/1999/XSL/Transform">
  <xsl:output method="xml" indent='yes'/>
  <xsl:template match="/" >
    <output>
      <xsl:apply-templates select='html' />
    </output>
  </xsl:template>
  <xsl:template match='html'>
    <xsl:apply-templates select='body'/>
  </xsl:template>
  <xsl:template match='body'>
    <xsl:apply-templates select='h2'/>
  </xsl:template>
  <xsl:template match='h2'>
    <line><xsl:value-of select='.' /></line>
  </xsl:template>
</xsl:stylesheet>
"#;

/// Extracts the `h2` headings with a single absolute path.
pub const H2_PATH_SHEET: &str = r#"<?xml version="1.0"?>
<xsl:stylesheet version="1.0" xmlns:xsl="http://www.w3.org/1999/XSL/Transform">
 <xsl:output method="xml" indent='yes'/>
 <xsl:template match="/" >
  <output>
   <xsl:apply-templates select='/html/body/h2'/>
  </output>
 </xsl:template>

 <xsl:template match='h2'>
   <line><xsl:value-of select='.' /></line>
 </xsl:template>
</xsl:stylesheet>
"#;

/// The path-based `h2` extractor written in the absolute-match layout.
pub const H2_PATH_SHEET_ABSOLUTE_MATCH: &str = r#"<?xml version="1.0"?>
<xsl:stylesheet version="1.0" xmlns:xsl="http://www.w3.org/1999/XSL/Transform">
 <xsl:output method="xml" indent='yes'/>
 <xsl:template match="/" >
  <output>
   <xsl:apply-templates select='/html/body/h2'/>
  </output>
 </xsl:template>
 <xsl:template match='/html/body/h2'>
   <line><xsl:value-of select='.' /></line>
 </xsl:template>
</xsl:stylesheet>
"#;

/// A book with chapters, paragraphs and nested `line` elements.
pub const BOOK: &str = r#"<book>
  <title>A Book</title>
  <chapter>
    <para>1.1</para>
  </chapter>
  <chapter>
    <para>2.1</para>
    <section><line>2.s.1</line><line>2.s.2</line></section>
  </chapter>
  <chapter>
    <para>3.1</para><para>3.2</para><para>3.3</para><para>3.4</para><para>3.5</para>
  </chapter>
</book>
"#;

/// Tag-name templates over relative paths.
pub const BOOK_TAG_TEMPLATES_SHEET: &str = r#"<xsl:stylesheet version="1.0" xmlns:xsl="http://www.w3.org/1999/XSL/Transform">
<xsl:template match="/" >
    <xsl:apply-templates select="/book"/>
</xsl:template>
<xsl:template match="book">
    <xsl:apply-templates select="chapter[2]"/>
    <xsl:apply-templates select="chapter[3]/para[5]"/>
    <xsl:apply-templates select="chapter[2]//line"/>
</xsl:template>
<xsl:template match="title">
    <line><xsl:value-of select="."/></line>
</xsl:template>
</xsl:stylesheet>
"#;

/// Absolute-path templates mirrored by the root template's selects.
pub const BOOK_PATH_TEMPLATES_SHEET: &str = r#"<xsl:stylesheet version="1.0" xmlns:xsl="http://www.w3.org/1999/XSL/Transform">
<xsl:template match="/" >
    <xsl:apply-templates select="/book"/>
    <xsl:apply-templates select="/book/title"/>
</xsl:template>
<xsl:template match="/book">
    <line><xsl:value-of select="chapter[2]"/></line>
    <line><xsl:value-of select="chapter[3]/para[5]"/></line>
    <line><xsl:value-of select="chapter[2]//line"/></line>
</xsl:template>
<xsl:template match="/book/title">
    <line><xsl:value-of select="."/></line>
</xsl:template>
</xsl:stylesheet>
"#;
