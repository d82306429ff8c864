//! Scaffolding from a controller model: a `struts-config.xml` deployment
//! descriptor and placeholder view, controller and form files.
//!
//! Layout under the output directory:
//!
//! ```text
//! struts-config.xml
//! web/<Page>.jsp
//! src/<package path>/<ActionType>.java
//! src/<package path>/<FormName>Bean.java
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::io::xml::{XmiDocument, XmlElement};
use crate::psm::{validate_psm, Action, PsmViolation, StrutsModel};

pub const DEFAULT_PACKAGE: &str = "app.web";
pub const STRUTS_CONFIG: &str = "struts-config.xml";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodegenError {
    #[error("model is invalid ({} violation(s))", .0.len())]
    InvalidModel(Vec<PsmViolation>),
    #[error("`{0}` is not a dot-separated identifier")]
    InvalidPackage(String),
    #[error("`{0}` cannot be used as a file name")]
    UnsafeName(String),
    #[error("action `{action}` uses undeclared form bean `{form}`")]
    UnknownFormBean { action: String, form: String },
    #[error("two generated files would share the path `{0}`")]
    Collision(String),
}

impl CodegenError {
    pub fn code(&self) -> &'static str {
        match self {
            CodegenError::InvalidModel(_) => "invalid-model",
            CodegenError::InvalidPackage(_) => "invalid-package",
            CodegenError::UnsafeName(_) => "unsafe-name",
            CodegenError::UnknownFormBean { .. } => "unknown-form-bean",
            CodegenError::Collision(_) => "collision",
        }
    }
}

/// Relative path → file content. Iteration is in path order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GeneratedFileSet {
    files: BTreeMap<String, String>,
}

impl GeneratedFileSet {
    fn insert(&mut self, path: String, content: String) -> Result<(), CodegenError> {
        let safe = !path.is_empty()
            && !path.starts_with('/')
            && path
                .split('/')
                .all(|seg| !seg.is_empty() && seg != "." && seg != "..");
        if !safe {
            return Err(CodegenError::UnsafeName(path));
        }
        if self.files.contains_key(&path) {
            return Err(CodegenError::Collision(path));
        }
        self.files.insert(path, content);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn get(&self, path: &str) -> Option<&str> {
        self.files.get(path).map(String::as_str)
    }

    pub fn contains(&self, path: &str) -> bool {
        self.files.contains_key(path)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.files.iter().map(|(p, c)| (p.as_str(), c.as_str()))
    }

    /// Writes every file below `dir`, creating directories as needed.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        for (path, content) in &self.files {
            let target = dir.join(path);
            if let Some(parent) = target.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(target, content)?;
        }
        Ok(())
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_' || c == '$')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
}

fn check_package(pkg: &str) -> Result<(), CodegenError> {
    if pkg.split('.').all(is_identifier) {
        Ok(())
    } else {
        Err(CodegenError::InvalidPackage(pkg.to_owned()))
    }
}

fn check_model(model: &StrutsModel) -> Result<(), CodegenError> {
    let violations = validate_psm(model);
    if !violations.is_empty() {
        return Err(CodegenError::InvalidModel(violations));
    }
    let forms: HashSet<&str> = model.forms.forms.iter().map(|f| f.name.as_str()).collect();
    for action in &model.actions.actions {
        if let Some(form) = &action.name {
            if !forms.contains(form.as_str()) {
                return Err(CodegenError::UnknownFormBean {
                    action: action.path.clone(),
                    form: form.clone(),
                });
            }
        }
    }
    Ok(())
}

fn form_bean_class(form: &str) -> String {
    format!("{form}Bean")
}

fn forward_url(model: &StrutsModel, action: &Action) -> Option<String> {
    let fwd = action.forwards.first()?;
    model.forward_page(fwd).map(|p| format!("/{}", p.name))
}

/// Deployment descriptor. Forwards carry page URLs rather than fragment
/// paths; form-bean types are `pkg.<FormName>Bean`.
pub fn emit_struts_config(model: &StrutsModel, pkg: &str) -> Result<XmiDocument, CodegenError> {
    check_package(pkg)?;
    check_model(model)?;

    let mut beans = XmlElement::new("form-beans");
    for form in &model.forms.forms {
        beans = beans.child(
            XmlElement::new("form-bean")
                .attr("name", &form.name)
                .attr("type", format!("{pkg}.{}", form_bean_class(&form.name))),
        );
    }

    let mut mappings = XmlElement::new("action-mappings");
    for action in &model.actions.actions {
        let mut el = XmlElement::new("action")
            .attr("path", &action.path)
            .attr("type", format!("{pkg}.{}", action.type_name))
            .opt_attr("name", action.name.as_deref())
            .opt_attr("input", action.input.as_deref());
        for fwd in &action.forwards {
            let page = &model.views.views[fwd.target].name;
            el = el.child(
                XmlElement::new("forward")
                    .attr("name", &fwd.name)
                    .attr("path", format!("/{page}")),
            );
        }
        mappings = mappings.child(el);
    }

    Ok(XmiDocument::new(
        XmlElement::new("struts-config")
            .child(beans)
            .child(mappings),
    ))
}

/// One placeholder per page, action and form.
pub fn emit_stub_files(model: &StrutsModel, pkg: &str) -> Result<GeneratedFileSet, CodegenError> {
    check_package(pkg)?;
    check_model(model)?;
    let src = format!("src/{}", pkg.replace('.', "/"));
    let mut files = GeneratedFileSet::default();

    for (i, page) in model.views.views.iter().enumerate() {
        if page.name.contains(['/', '\\']) {
            return Err(CodegenError::UnsafeName(page.name.clone()));
        }
        let sources: Vec<&str> = model
            .actions
            .actions
            .iter()
            .filter(|a| a.forwards.iter().any(|f| f.target == i))
            .map(|a| a.path.as_str())
            .collect();
        let cited = if sources.is_empty() {
            "no action".to_owned()
        } else {
            sources.join(", ")
        };
        files.insert(
            format!("web/{}", page.name),
            format!(
                "<%-- {}: view stub, forward target of {cited} --%>\n<%-- TODO: page content --%>\n",
                page.name
            ),
        )?;
    }

    for action in &model.actions.actions {
        if !is_identifier(&action.type_name) {
            return Err(CodegenError::UnsafeName(action.type_name.clone()));
        }
        let mut header = format!("// Controller stub for action {}", action.path);
        if let Some(form) = &action.name {
            header += &format!(", form {form}");
        }
        if let Some(input) = &action.input {
            header += &format!(", input {input}");
        }
        let forward = forward_url(model, action).unwrap_or_else(|| "-".into());
        files.insert(
            format!("{src}/{}.java", action.type_name),
            format!(
                "package {pkg};\n\n{header}.\npublic class {} {{\n    // TODO: implement execute(); on success forward to {forward}\n}}\n",
                action.type_name
            ),
        )?;
    }

    for form in &model.forms.forms {
        let class = form_bean_class(&form.name);
        if !is_identifier(&class) {
            return Err(CodegenError::UnsafeName(form.name.clone()));
        }
        files.insert(
            format!("{src}/{class}.java"),
            format!(
                "package {pkg};\n\n// Form stub for form bean {}.\npublic class {class} {{\n    // TODO: form properties\n}}\n",
                form.name
            ),
        )?;
    }
    Ok(files)
}

/// Stubs plus `struts-config.xml`.
pub fn generate(model: &StrutsModel, pkg: &str) -> Result<GeneratedFileSet, CodegenError> {
    let config = emit_struts_config(model, pkg)?;
    let mut files = emit_stub_files(model, pkg)?;
    files.insert(STRUTS_CONFIG.to_owned(), config.to_string())?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psm::{ActionForm, ActionForward, JspPage};

    fn model() -> StrutsModel {
        let mut m = StrutsModel::default();
        m.views.views.push(JspPage {
            name: "RetrieveCi.jsp".into(),
        });
        m.actions.actions.push(Action {
            path: "/DeleteCi".into(),
            name: Some("DeleteCiForm".into()),
            type_name: "DeleteCiAction".into(),
            input: None,
            forwards: vec![ActionForward {
                name: "Success".into(),
                target: 0,
            }],
        });
        m.forms.forms.push(ActionForm {
            name: "DeleteCiForm".into(),
        });
        m
    }

    #[test]
    fn config_layout() {
        let text = emit_struts_config(&model(), "app.web").unwrap().to_string();
        assert_eq!(
            text,
            r#"<?xml version="1.0" encoding="UTF-8"?>
<struts-config>
  <form-beans>
    <form-bean name="DeleteCiForm" type="app.web.DeleteCiFormBean"/>
  </form-beans>
  <action-mappings>
    <action path="/DeleteCi" type="app.web.DeleteCiAction" name="DeleteCiForm">
      <forward name="Success" path="/RetrieveCi.jsp"/>
    </action>
  </action-mappings>
</struts-config>
"#
        );
    }

    #[test]
    fn empty_model() {
        let doc = emit_struts_config(&StrutsModel::default(), DEFAULT_PACKAGE).unwrap();
        assert_eq!(doc.root.children.len(), 2);
        assert!(emit_stub_files(&StrutsModel::default(), DEFAULT_PACKAGE)
            .unwrap()
            .is_empty());
        assert_eq!(
            generate(&StrutsModel::default(), DEFAULT_PACKAGE)
                .unwrap()
                .len(),
            1
        );
    }

    #[test]
    fn stubs() {
        let files = emit_stub_files(&model(), "com.acme").unwrap();
        let paths: Vec<_> = files.iter().map(|(p, _)| p).collect();
        assert_eq!(
            paths,
            [
                "src/com/acme/DeleteCiAction.java",
                "src/com/acme/DeleteCiFormBean.java",
                "web/RetrieveCi.jsp"
            ]
        );
        let action = files.get("src/com/acme/DeleteCiAction.java").unwrap();
        assert!(action.starts_with("package com.acme;\n"));
        assert!(action.contains("action /DeleteCi, form DeleteCiForm"));
        assert!(action.contains("TODO"));
        assert!(files
            .get("web/RetrieveCi.jsp")
            .unwrap()
            .contains("/DeleteCi"));
        assert_eq!(emit_stub_files(&model(), "com.acme").unwrap(), files);
    }

    #[test]
    fn rejects_bad_input() {
        for pkg in ["a..b", "", ".a", "a.", "1a", "a-b"] {
            assert_eq!(
                emit_stub_files(&model(), pkg).unwrap_err().code(),
                "invalid-package",
                "{pkg}"
            );
        }
        let mut m = model();
        m.forms.forms.clear();
        assert_eq!(
            emit_struts_config(&m, "a").unwrap_err().code(),
            "unknown-form-bean"
        );
        let mut m = model();
        m.views.views[0].name = "../x.jsp".into();
        assert_eq!(emit_stub_files(&m, "a").unwrap_err().code(), "unsafe-name");
        let mut m = model();
        m.actions.actions[0].forwards[0].target = 3;
        assert_eq!(
            emit_stub_files(&m, "a").unwrap_err().code(),
            "invalid-model"
        );
        let mut m = model();
        m.actions.actions.push(Action {
            path: "/Other".into(),
            ..m.actions.actions[0].clone()
        });
        assert_eq!(emit_stub_files(&m, "a").unwrap_err().code(), "collision");
    }
}
