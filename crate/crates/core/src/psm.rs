//! Target (platform-specific) meta-model: the controller tier of an MVC 2
//! web application. Three resource roots in fixed order: the view package,
//! the action mapping and the form bean.
//!
//! Cross references (forward → page) are held as indices into the view list
//! and only become fragment strings such as `/0/@view.3` when serialized.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

pub const VIEW_ROOT: usize = 0;
pub const ACTION_ROOT: usize = 1;
pub const FORM_ROOT: usize = 2;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StrutsModel {
    pub views: ViewPackage,
    pub actions: ActionMapping,
    pub forms: FormBean,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ViewPackage {
    pub name: Option<String>,
    pub views: Vec<JspPage>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JspPage {
    pub name: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActionMapping {
    pub actions: Vec<Action>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub path: String,
    /// Form-bean name; absent when the action takes no form.
    pub name: Option<String>,
    /// Controller class name.
    pub type_name: String,
    pub input: Option<String>,
    pub forwards: Vec<ActionForward>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionForward {
    pub name: String,
    /// Index of the target page in the view package.
    pub target: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormBean {
    pub forms: Vec<ActionForm>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionForm {
    pub name: String,
}

/// Position of an element inside a [`StrutsModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementRef {
    ViewPackage,
    View(usize),
    ActionMapping,
    Action(usize),
    /// `(action, forward)`
    Forward(usize, usize),
    FormBean,
    Form(usize),
}

/// Borrowed view of a model element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Element<'a> {
    ViewPackage(&'a ViewPackage),
    View(&'a JspPage),
    ActionMapping(&'a ActionMapping),
    Action(&'a Action),
    Forward(&'a ActionForward),
    FormBean(&'a FormBean),
    Form(&'a ActionForm),
}

impl StrutsModel {
    pub fn element(&self, el: ElementRef) -> Option<Element<'_>> {
        Some(match el {
            ElementRef::ViewPackage => Element::ViewPackage(&self.views),
            ElementRef::View(i) => Element::View(self.views.views.get(i)?),
            ElementRef::ActionMapping => Element::ActionMapping(&self.actions),
            ElementRef::Action(i) => Element::Action(self.actions.actions.get(i)?),
            ElementRef::Forward(a, f) => {
                Element::Forward(self.actions.actions.get(a)?.forwards.get(f)?)
            }
            ElementRef::FormBean => Element::FormBean(&self.forms),
            ElementRef::Form(i) => Element::Form(self.forms.forms.get(i)?),
        })
    }

    /// Every contained element, roots first then their contents in order.
    pub fn elements(&self) -> Vec<ElementRef> {
        let mut out = vec![ElementRef::ViewPackage];
        out.extend((0..self.views.views.len()).map(ElementRef::View));
        out.push(ElementRef::ActionMapping);
        for (a, action) in self.actions.actions.iter().enumerate() {
            out.push(ElementRef::Action(a));
            out.extend((0..action.forwards.len()).map(|f| ElementRef::Forward(a, f)));
        }
        out.push(ElementRef::FormBean);
        out.extend((0..self.forms.forms.len()).map(ElementRef::Form));
        out
    }

    /// The page a forward lands on, if its target index is in range.
    pub fn forward_page(&self, fwd: &ActionForward) -> Option<&JspPage> {
        self.views.views.get(fwd.target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FragmentError {
    #[error("element is not contained in the model")]
    NotContained,
    #[error("malformed fragment path `{0}`")]
    BadPath(String),
    #[error("fragment path `{0}` addresses no element")]
    OutOfRange(String),
}

impl FragmentError {
    pub fn code(&self) -> &'static str {
        match self {
            FragmentError::NotContained => "not-contained",
            FragmentError::BadPath(_) => "bad-path",
            FragmentError::OutOfRange(_) => "out-of-range",
        }
    }
}

/// `/R/@feature.N` path of a contained element; nested elements chain
/// segments, e.g. `/1/@action.2/@forward.0`.
pub fn fragment_path(model: &StrutsModel, el: ElementRef) -> Result<String, FragmentError> {
    if model.element(el).is_none() {
        return Err(FragmentError::NotContained);
    }
    Ok(match el {
        ElementRef::ViewPackage => format!("/{VIEW_ROOT}"),
        ElementRef::View(i) => format!("/{VIEW_ROOT}/@view.{i}"),
        ElementRef::ActionMapping => format!("/{ACTION_ROOT}"),
        ElementRef::Action(i) => format!("/{ACTION_ROOT}/@action.{i}"),
        ElementRef::Forward(a, f) => format!("/{ACTION_ROOT}/@action.{a}/@forward.{f}"),
        ElementRef::FormBean => format!("/{FORM_ROOT}"),
        ElementRef::Form(i) => format!("/{FORM_ROOT}/@form.{i}"),
    })
}

/// Parses a fragment path without looking at any model.
pub fn parse_fragment(path: &str) -> Result<ElementRef, FragmentError> {
    let bad = || FragmentError::BadPath(path.to_owned());
    let rest = path.strip_prefix('/').ok_or_else(bad)?;
    let mut segments = rest.split('/');
    let root: usize = segments
        .next()
        .filter(|s| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()))
        .ok_or_else(bad)?
        .parse()
        .map_err(|_| bad())?;

    let mut steps = Vec::new();
    for seg in segments {
        let (feature, index) = seg
            .strip_prefix('@')
            .and_then(|s| s.split_once('.'))
            .ok_or_else(bad)?;
        if index.is_empty() || !index.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        steps.push((feature, index.parse::<usize>().map_err(|_| bad())?));
    }

    match (root, steps.as_slice()) {
        (VIEW_ROOT, []) => Ok(ElementRef::ViewPackage),
        (VIEW_ROOT, [("view", i)]) => Ok(ElementRef::View(*i)),
        (ACTION_ROOT, []) => Ok(ElementRef::ActionMapping),
        (ACTION_ROOT, [("action", i)]) => Ok(ElementRef::Action(*i)),
        (ACTION_ROOT, [("action", a), ("forward", f)]) => Ok(ElementRef::Forward(*a, *f)),
        (FORM_ROOT, []) => Ok(ElementRef::FormBean),
        (FORM_ROOT, [("form", i)]) => Ok(ElementRef::Form(*i)),
        (0..=2, _) => Err(bad()),
        _ => Err(FragmentError::OutOfRange(path.to_owned())),
    }
}

/// Inverse of [`fragment_path`].
pub fn resolve_fragment(model: &StrutsModel, path: &str) -> Result<ElementRef, FragmentError> {
    let el = parse_fragment(path)?;
    match model.element(el) {
        Some(_) => Ok(el),
        None => Err(FragmentError::OutOfRange(path.to_owned())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PsmViolationCode {
    EmptyName,
    DuplicateView,
    DuplicatePath,
    DuplicateForm,
    BadPath,
    BadPageName,
    ForwardCount,
    DanglingForward,
}

impl PsmViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            PsmViolationCode::EmptyName => "empty-name",
            PsmViolationCode::DuplicateView => "duplicate-view",
            PsmViolationCode::DuplicatePath => "duplicate-path",
            PsmViolationCode::DuplicateForm => "duplicate-form",
            PsmViolationCode::BadPath => "bad-action-path",
            PsmViolationCode::BadPageName => "bad-page-name",
            PsmViolationCode::ForwardCount => "forward-count",
            PsmViolationCode::DanglingForward => "dangling-forward",
        }
    }
}

impl fmt::Display for PsmViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsmViolation {
    pub path: String,
    pub code: PsmViolationCode,
    pub message: String,
}

impl fmt::Display for PsmViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.path, self.code, self.message)
    }
}

pub fn validate_psm(model: &StrutsModel) -> Vec<PsmViolation> {
    let mut out = Vec::new();
    let mut push = |path: String, code, message: String| {
        out.push(PsmViolation {
            path,
            code,
            message,
        })
    };

    let mut seen = HashSet::new();
    for (i, page) in model.views.views.iter().enumerate() {
        let path = format!("/0/@view.{i}");
        if page.name.is_empty() {
            push(path, PsmViolationCode::EmptyName, "page has no name".into());
            continue;
        }
        if !page.name.ends_with(".jsp") {
            push(
                path.clone(),
                PsmViolationCode::BadPageName,
                format!("page `{}` does not end in .jsp", page.name),
            );
        }
        if !seen.insert(page.name.as_str()) {
            push(
                path,
                PsmViolationCode::DuplicateView,
                format!("page `{}` listed twice", page.name),
            );
        }
    }

    let mut seen = HashSet::new();
    for (a, action) in model.actions.actions.iter().enumerate() {
        let path = format!("/1/@action.{a}");
        if !action.path.starts_with('/') {
            push(
                path.clone(),
                PsmViolationCode::BadPath,
                format!("action path `{}` must start with /", action.path),
            );
        }
        if action.type_name.is_empty() {
            push(
                path.clone(),
                PsmViolationCode::EmptyName,
                "action has no type".into(),
            );
        }
        if !seen.insert(action.path.as_str()) {
            push(
                path.clone(),
                PsmViolationCode::DuplicatePath,
                format!("action path `{}` mapped twice", action.path),
            );
        }
        if action.forwards.len() != 1 {
            push(
                path.clone(),
                PsmViolationCode::ForwardCount,
                format!("expected one forward, found {}", action.forwards.len()),
            );
        }
        for (f, fwd) in action.forwards.iter().enumerate() {
            if model.forward_page(fwd).is_none() {
                push(
                    format!("{path}/@forward.{f}"),
                    PsmViolationCode::DanglingForward,
                    format!("forward `{}` targets missing view {}", fwd.name, fwd.target),
                );
            }
        }
    }

    let mut seen = HashSet::new();
    for (i, form) in model.forms.forms.iter().enumerate() {
        let path = format!("/2/@form.{i}");
        if form.name.is_empty() {
            push(path, PsmViolationCode::EmptyName, "form has no name".into());
        } else if !seen.insert(form.name.as_str()) {
            push(
                path,
                PsmViolationCode::DuplicateForm,
                format!("form `{}` declared twice", form.name),
            );
        }
    }
    out
}
