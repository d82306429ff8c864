//! Transforming many models at once.
//!
//! With the `parallel` feature (on by default) models are spread over the
//! rayon thread pool; without it the same functions run sequentially. The
//! rule module is built once and shared by every run.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::crud::{build_crud_module, transform_with, TransformError};
use crate::engine::RuleModule;
use crate::pim::UmlModel;
use crate::psm::StrutsModel;

pub type Outcome = Result<StrutsModel, TransformError>;

/// Transforms every model, preserving input order in the output.
pub fn transform_all(models: &[UmlModel]) -> Vec<Outcome> {
    let module = build_crud_module();
    #[cfg(feature = "parallel")]
    {
        models
            .par_iter()
            .map(|m| transform_with(&module, m))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_sequential(&module, models)
    }
}

/// Always single-threaded, regardless of features.
pub fn transform_all_sequential(models: &[UmlModel]) -> Vec<Outcome> {
    run_sequential(&build_crud_module(), models)
}

fn run_sequential(module: &RuleModule, models: &[UmlModel]) -> Vec<Outcome> {
    models.iter().map(|m| transform_with(module, m)).collect()
}

/// Applies `f` to every item, in parallel when the feature is enabled.
pub fn map_all<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
