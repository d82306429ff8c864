//! Model-driven generation of MVC 2 web controller models.
//!
//! A UML class diagram whose classes carry Create/Retrieve/Update/Delete
//! operations ([`pim`]) is transformed by a two-phase matched-rule engine
//! ([`engine`]) running the CRUD rules ([`crud`]) into a Struts-style
//! controller model ([`psm`]): JSP views, action mappings and form beans.
//! [`io`] reads and writes both models, [`codegen`] scaffolds a
//! `struts-config.xml` and stub files, and [`batch`] runs many
//! transformations at once.

pub mod batch;
pub mod codegen;
pub mod crud;
pub mod engine;
pub mod io;
pub mod pim;
pub mod psm;
pub mod synth;

pub use crud::{build_crud_module, transform, transform_traced, TransformError};
pub use engine::{execute, Execution, RuleModule, SourceElement, TraceStore};
pub use pim::{validate_pim, UmlModel};
pub use psm::{validate_psm, StrutsModel};
