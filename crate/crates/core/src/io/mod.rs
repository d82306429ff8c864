//! Readers and writers for both models, plus a structural PSM differ.
//!
//! * PIM XMI: `<uml:UMLPackage name="…">` with `<class name parent?>`
//!   children holding `<attr name type/>` and `<op name stereotype?/>`.
//! * PIM DSL: the `.uml` text format, see [`dsl`].
//! * PSM XMI: three resource roots (`ViewPackage`, `actionmappings`,
//!   `formbeans`) under an `xmi:XMI` wrapper, forwards as fragment paths.

pub mod diff;
pub mod dsl;
pub mod pim_xmi;
pub mod psm_xmi;
pub mod xml;

use thiserror::Error;

use crate::psm::PsmViolation;

pub use diff::{diff_psm, DiffKind, Difference, ModelDiff};
pub use dsl::parse_pim_dsl;
pub use pim_xmi::{parse_pim_xmi, write_pim_xmi};
pub use psm_xmi::{parse_psm_xmi, read_psm_xmi_unchecked, write_psm_xmi};
pub use xml::{XmiDocument, XmlElement, XmlError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReadError {
    #[error(transparent)]
    XmlMalformed(#[from] XmlError),
    #[error("{path}: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("class `{class}` names unknown parent `{parent}`")]
    UnresolvedRef { class: String, parent: String },
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: class `{name}` declared twice")]
    DuplicateClass {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("{line}:{column}: class `{class}` names unknown parent `{parent}`")]
    UnknownParent {
        class: String,
        parent: String,
        line: usize,
        column: usize,
    },
    #[error("{path}: unresolvable fragment `{fragment}`")]
    BadPath { path: String, fragment: String },
}

impl ReadError {
    pub fn code(&self) -> &'static str {
        match self {
            ReadError::XmlMalformed(_) => "xml-malformed",
            ReadError::SchemaViolation { .. } => "schema-violation",
            ReadError::UnresolvedRef { .. } => "unresolved-ref",
            ReadError::Parse { .. } => "parse-error",
            ReadError::DuplicateClass { .. } => "duplicate-class",
            ReadError::UnknownParent { .. } => "unknown-parent",
            ReadError::BadPath { .. } => "bad-path",
        }
    }

    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        ReadError::SchemaViolation {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WriteError {
    #[error("model is invalid ({} violation(s))", .0.len())]
    InvalidModel(Vec<PsmViolation>),
}

impl WriteError {
    pub fn code(&self) -> &'static str {
        "invalid-model"
    }
}
