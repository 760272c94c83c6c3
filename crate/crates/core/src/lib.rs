//! Evolutionary synthesis of XSLT stylesheets from a single input/target
//! XML example pair.
//!
//! Stylesheets are restricted to `template`, `apply-templates` and
//! `value-of`, and are evolved as one of two constrained genome layouts:
//! tag-name templates that lean on the built-in rules ([`StructureType::Type1`](genome::StructureType::Type1))
//! or absolute-path templates mirrored by the root template's selects
//! ([`StructureType::Type2`](genome::StructureType::Type2)).

pub mod config;
pub mod corpus;
pub mod evolve;
pub mod experiment;
pub mod fitness;
pub mod genome;
pub mod variation;
pub mod xml;
pub mod xpath;
pub mod xslt;

pub mod fixtures;
