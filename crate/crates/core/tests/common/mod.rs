//! Helpers shared by the integration tests: fixture loading, a seeded
//! forest corpus and a brute-force reference transformation.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use mvc2gen_core::codegen::{generate, STRUTS_CONFIG};
use mvc2gen_core::io::XmiDocument;
use mvc2gen_core::pim::{TypeRef, UmlModel};
use mvc2gen_core::psm::{Action, ActionForm, ActionForward, JspPage, StrutsModel};
use mvc2gen_core::synth::random_crud_forest;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const CORPUS_SEED: u64 = 0x5eed_c0de;
pub const CORPUS_SIZE: usize = 200;
pub const MAX_CLASSES: usize = 10;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// The same 200 random forests on every run.
pub fn corpus() -> Vec<UmlModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE)
        .map(|_| random_crud_forest(&mut rng, MAX_CLASSES))
        .collect()
}

/// Reference transformation written directly from the naming table,
/// sharing nothing with the rule engine. Only meant for forests where
/// every class carries the four CRUD operations.
pub fn oracle(model: &UmlModel) -> StrutsModel {
    let classes = &model.package.classifiers;
    let parent = |c: usize| match classes[c].opposite.ty {
        TypeRef::Classifier(p) => Some(classes[p.0].name.clone()),
        TypeRef::DataType(_) => None,
    };

    let mut defs: Vec<(String, usize, usize)> = Vec::new();
    for (c, class) in classes.iter().enumerate() {
        for (o, op) in class.operations.iter().enumerate() {
            defs.push((op.name.clone(), c, o));
        }
    }
    defs.sort();

    let mut out = StrutsModel::default();
    if !model.package.name.is_empty() {
        out.views.name = Some(model.package.name.clone());
    }
    let pages: Vec<String> = defs
        .iter()
        .filter(|(op, _, _)| op != "Delete")
        .map(|(op, c, _)| format!("{op}{}.jsp", classes[*c].name))
        .collect();
    out.views.views = pages.iter().map(|p| JspPage { name: p.clone() }).collect();

    for (op, c, _) in &defs {
        let class = &classes[*c].name;
        let up = parent(*c);
        let landing = if op == "Delete" {
            format!("Retrieve{class}.jsp")
        } else {
            format!("{op}{class}.jsp")
        };
        out.actions.actions.push(Action {
            path: format!("/{op}{class}"),
            name: (op != "Retrieve" || up.is_some()).then(|| format!("{op}{class}Form")),
            type_name: format!("{op}{class}Action"),
            input: up.map(|p| {
                if op == "Delete" {
                    format!("/Retrieve{p}.jsp")
                } else {
                    format!("/{op}{p}.jsp")
                }
            }),
            forwards: vec![ActionForward {
                name: "Success".into(),
                target: pages
                    .iter()
                    .position(|p| *p == landing)
                    .expect("landing page"),
            }],
        });
    }

    for (op, c, _) in &defs {
        if op == "Create" || op == "Update" {
            out.forms.forms.push(ActionForm {
                name: format!("{op}{}EndForm", classes[*c].name),
            });
        }
    }
    for (op, c, _) in &defs {
        if op != "Retrieve" || parent(*c).is_some() {
            out.forms.forms.push(ActionForm {
                name: format!("{op}{}Form", classes[*c].name),
            });
        }
    }
    out
}

pub fn roots(model: &UmlModel) -> usize {
    model.class_ids().filter(|&c| model.is_root(c)).count()
}

/// Checks that the descriptor only names generated classes and pages.
pub fn check_consistency(model: &StrutsModel, pkg: &str) -> Result<(), String> {
    let files = generate(model, pkg).map_err(|e| e.to_string())?;
    let expected =
        model.views.views.len() + model.actions.actions.len() + model.forms.forms.len() + 1;
    if files.len() != expected {
        return Err(format!("{} files, expected {expected}", files.len()));
    }
    let src = format!("src/{}", pkg.replace('.', "/"));
    let config = XmiDocument::parse(files.get(STRUTS_CONFIG).ok_or("no config")?)
        .map_err(|e| e.to_string())?;
    let [beans, mappings] = config.root.children.as_slice() else {
        return Err("config needs form-beans and action-mappings".into());
    };

    let mut bean_names = BTreeSet::new();
    for bean in &beans.children {
        let name = bean.get("name").ok_or("form-bean without name")?;
        let ty = bean.get("type").ok_or("form-bean without type")?;
        let class = ty
            .strip_prefix(&format!("{pkg}."))
            .ok_or(format!("{ty} outside {pkg}"))?;
        if !files.contains(&format!("{src}/{class}.java")) {
            return Err(format!("no stub for form-bean type {ty}"));
        }
        bean_names.insert(name.to_owned());
    }
    for action in &mappings.children {
        let ty = action.get("type").ok_or("action without type")?;
        let class = ty
            .strip_prefix(&format!("{pkg}."))
            .ok_or(format!("{ty} outside {pkg}"))?;
        if !files.contains(&format!("{src}/{class}.java")) {
            return Err(format!("no stub for action type {ty}"));
        }
        if let Some(form) = action.get("name") {
            if !bean_names.contains(form) {
                return Err(format!("action names unknown form-bean {form}"));
            }
        }
        for fwd in &action.children {
            let page = fwd.get("path").ok_or("forward without path")?;
            if !files.contains(&format!("web{page}")) {
                return Err(format!("forward to missing page {page}"));
            }
        }
    }
    Ok(())
}
