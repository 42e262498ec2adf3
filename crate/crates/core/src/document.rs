//! Versioned JSON document: a tree, optional petal parameters, named
//! placements and named reports. Angles are stored in radians.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::construct::ConstraintReport;
use crate::geom::{Point2, Tolerance};
use crate::model::{Configuration, LinkTree, ModelError};
use crate::motion::{CspaceCensus, MonitorReport, ProbeRecord, UnlockReport};
use crate::petal::PetalParams;

pub const DOCUMENT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported document version {0}, expected {DOCUMENT_VERSION}")]
    Version(u32),
    #[error("configuration {name:?} has {got} points but the tree has {expected} joints")]
    PlacementSize { name: String, expected: usize, got: usize },
    #[error("no configuration named {0:?}")]
    MissingConfiguration(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "report", rename_all = "snake_case")]
pub enum Report {
    Constraints(ConstraintReport),
    Monitor(MonitorReport),
    Census(CspaceCensus),
    Probe(ProbeRecord),
    Unlock(UnlockReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub version: u32,
    pub tree: LinkTree,
    pub params: Option<PetalParams>,
    pub configurations: BTreeMap<String, Vec<Point2>>,
    #[serde(default)]
    pub reports: BTreeMap<String, Report>,
}

impl Document {
    pub fn new(tree: LinkTree, params: Option<PetalParams>) -> Self {
        Document {
            version: DOCUMENT_VERSION,
            tree,
            params,
            configurations: BTreeMap::new(),
            reports: BTreeMap::new(),
        }
    }

    /// Stores the placement of `c` under `name`, replacing any previous one.
    pub fn insert_configuration(&mut self, name: &str, c: &Configuration) {
        self.configurations.insert(name.to_string(), c.placement().to_vec());
    }

    pub fn insert_report(&mut self, name: &str, report: Report) {
        self.reports.insert(name.to_string(), report);
    }

    /// Rebuilds the named configuration, checking lengths against the tree.
    pub fn configuration(&self, name: &str, tol: &Tolerance) -> Result<Configuration, DocumentError> {
        let pts = self
            .configurations
            .get(name)
            .ok_or_else(|| DocumentError::MissingConfiguration(name.to_string()))?;
        Ok(Configuration::new(Arc::new(self.tree.clone()), pts.clone(), tol)?)
    }

    /// Version and placement sizes; lengths are checked on use.
    pub fn validate(&self) -> Result<(), DocumentError> {
        if self.version != DOCUMENT_VERSION {
            return Err(DocumentError::Version(self.version));
        }
        let expected = self.tree.joint_count();
        for (name, pts) in &self.configurations {
            if pts.len() != expected {
                return Err(DocumentError::PlacementSize {
                    name: name.clone(),
                    expected,
                    got: pts.len(),
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        let doc: Document = serde_json::from_str(text).map_err(|e| DocumentError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DocumentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DocumentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DocumentError> {
        let path = path.as_ref();
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text).map_err(|source| DocumentError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_locked_config, check_constraints};

    fn sample() -> Document {
        let p = PetalParams::new(5, 0.9511, 0.299).unwrap();
        let c = build_locked_config(&p).unwrap();
        let mut doc = Document::new(c.tree().as_ref().clone(), Some(p));
        doc.insert_configuration("locked", &c);
        doc.insert_report("constraints", Report::Constraints(check_constraints(5, 0.9511, 0.299)));
        doc
    }

    #[test]
    fn round_trip_is_exact() {
        let doc = sample();
        let back = Document::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn undefined_margins_survive() {
        let mut doc = sample();
        doc.insert_report("bad", Report::Constraints(check_constraints(5, 0.6, 0.3)));
        assert_eq!(Document::from_json(&doc.to_json()).unwrap(), doc);
    }

    #[test]
    fn empty_text_is_a_parse_error() {
        assert!(matches!(Document::from_json(""), Err(DocumentError::Parse { .. })));
    }

    #[test]
    fn parse_error_has_position() {
        let err = Document::from_json("{\n  \"version\": 1,\n  oops").unwrap_err();
        let DocumentError::Parse { line, .. } = err else {
            panic!("{err}")
        };
        assert_eq!(line, 3);
    }

    #[test]
    fn wrong_version_and_size_are_rejected() {
        let mut doc = sample();
        doc.version = 2;
        assert!(matches!(
            Document::from_json(&doc.to_json()),
            Err(DocumentError::Version(2))
        ));
        let mut doc = sample();
        doc.configurations.get_mut("locked").unwrap().pop();
        assert!(matches!(
            Document::from_json(&doc.to_json()),
            Err(DocumentError::PlacementSize { .. })
        ));
    }

    #[test]
    fn missing_configuration() {
        let doc = sample();
        assert!(doc.configuration("locked", &Tolerance::default()).is_ok());
        assert!(matches!(
            doc.configuration("open", &Tolerance::default()),
            Err(DocumentError::MissingConfiguration(_))
        ));
    }
}
