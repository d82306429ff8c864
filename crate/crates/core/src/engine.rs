//! Two-phase matched-rule transformation engine with trace links.
//!
//! A [`RuleModule`] is a list of [`MatchedRule`]s. Each rule matches source
//! elements of one kind (optionally filtered by a guard) and instantiates one
//! or more named [`TargetTemplate`]s per match. Execution runs in two phases:
//!
//! 1. every match instantiates its target elements and records a trace entry
//!    `(source, template name) -> target`;
//! 2. every binding is evaluated with the complete trace available, so
//!    expressions can reach any target through [`BindingContext::resolve`]
//!    and [`BindingContext::resolve_temp`].
//!
//! Templates flagged `suppress_if_unnamed` are the exception: their bindings
//! must not use the trace and are evaluated while instantiating. When all of
//! them come out undefined no element is created and no trace entry written,
//! so later lookups see undefined and collections drop the hole.
//!
//! A source element may be matched by several rules, but by at most one
//! *default* rule; rules marked [`MatchedRule::nodefault`] contribute targets
//! reachable only by name. Trace keys are unique across all rules.
//!
//! The generic target graph is finally projected onto a [`StrutsModel`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::pim::{ClassId, OpId, UmlModel};
use crate::psm::{
    Action, ActionForm, ActionForward, ElementRef, JspPage, StrutsModel, ViewPackage,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SourceElement {
    Package,
    Classifier(ClassId),
    Operation(OpId),
}

impl SourceElement {
    pub fn kind(self) -> SourceKind {
        match self {
            SourceElement::Package => SourceKind::Package,
            SourceElement::Classifier(_) => SourceKind::Classifier,
            SourceElement::Operation(_) => SourceKind::Operation,
        }
    }

    pub fn describe(self, model: &UmlModel) -> String {
        match self {
            SourceElement::Package => format!("package `{}`", model.name()),
            SourceElement::Classifier(c) => format!("class `{}`", model.classifier(c).name),
            SourceElement::Operation(op) => format!(
                "operation `{}.{}`",
                model.classifier(op.class).name,
                model.operation(op).name
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceKind {
    Package,
    Classifier,
    Operation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetKind {
    ViewPackage,
    JspPage,
    ActionMapping,
    Action,
    ActionForward,
    FormBean,
    ActionForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    /// Optional string.
    Str,
    /// Mandatory string.
    RequiredStr,
    /// Mandatory reference to an element of the given kind.
    Ref(TargetKind),
    /// Ordered containment of elements of the given kind.
    Many(TargetKind),
}

impl TargetKind {
    fn features(self) -> &'static [(&'static str, Shape)] {
        use Shape::*;
        match self {
            TargetKind::ViewPackage => &[("name", Str), ("view", Many(TargetKind::JspPage))],
            TargetKind::JspPage => &[("name", RequiredStr)],
            TargetKind::ActionMapping => &[("action", Many(TargetKind::Action))],
            TargetKind::Action => &[
                ("path", RequiredStr),
                ("name", Str),
                ("type", RequiredStr),
                ("input", Str),
                ("forward", Many(TargetKind::ActionForward)),
            ],
            TargetKind::ActionForward => {
                &[("name", RequiredStr), ("path", Ref(TargetKind::JspPage))]
            }
            TargetKind::FormBean => &[("form", Many(TargetKind::ActionForm))],
            TargetKind::ActionForm => &[("name", RequiredStr)],
        }
    }

    fn shape(self, feature: &str) -> Option<Shape> {
        self.features()
            .iter()
            .find(|(name, _)| *name == feature)
            .map(|(_, shape)| *shape)
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Handle to a target element created during execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TargetId(pub usize);

/// Result of evaluating a binding expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BindingValue {
    Str(String),
    Undefined,
    Target(TargetId),
    /// A source element; assignment resolves it through its default target.
    Source(SourceElement),
    Collection(Vec<BindingValue>),
}

impl BindingValue {
    pub fn str(s: impl Into<String>) -> Self {
        BindingValue::Str(s.into())
    }

    pub fn is_undefined(&self) -> bool {
        matches!(self, BindingValue::Undefined)
    }
}

impl From<Option<String>> for BindingValue {
    fn from(v: Option<String>) -> Self {
        v.map_or(BindingValue::Undefined, BindingValue::Str)
    }
}

impl From<Option<TargetId>> for BindingValue {
    fn from(v: Option<TargetId>) -> Self {
        v.map_or(BindingValue::Undefined, BindingValue::Target)
    }
}

pub type GuardFn = dyn Fn(&UmlModel, SourceElement) -> Result<bool, String> + Send + Sync;
pub type BindingFn =
    dyn Fn(&BindingContext<'_>, SourceElement) -> Result<BindingValue, String> + Send + Sync;

#[derive(Clone)]
pub struct Binding {
    pub feature: String,
    expr: Arc<BindingFn>,
}

impl fmt::Debug for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Binding")
            .field("feature", &self.feature)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub struct TargetTemplate {
    pub local_name: String,
    pub kind: TargetKind,
    pub bindings: Vec<Binding>,
    pub suppress_if_unnamed: bool,
}

impl TargetTemplate {
    pub fn new(local_name: impl Into<String>, kind: TargetKind) -> Self {
        TargetTemplate {
            local_name: local_name.into(),
            kind,
            bindings: Vec::new(),
            suppress_if_unnamed: false,
        }
    }

    pub fn bind<F>(mut self, feature: impl Into<String>, expr: F) -> Self
    where
        F: Fn(&BindingContext<'_>, SourceElement) -> Result<BindingValue, String>
            + Send
            + Sync
            + 'static,
    {
        self.bindings.push(Binding {
            feature: feature.into(),
            expr: Arc::new(expr),
        });
        self
    }

    /// Drop the element (and its trace entry) when every binding is undefined.
    pub fn suppress_if_unnamed(mut self) -> Self {
        self.suppress_if_unnamed = true;
        self
    }
}

#[derive(Clone)]
pub struct MatchedRule {
    pub name: String,
    pub source_kind: SourceKind,
    guard: Option<Arc<GuardFn>>,
    pub targets: Vec<TargetTemplate>,
    /// Whether the first template is the default target of matched sources.
    pub is_default: bool,
}

impl fmt::Debug for MatchedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatchedRule")
            .field("name", &self.name)
            .field("source_kind", &self.source_kind)
            .field("guarded", &self.guard.is_some())
            .field("targets", &self.targets)
            .field("is_default", &self.is_default)
            .finish()
    }
}

impl MatchedRule {
    pub fn new(name: impl Into<String>, source_kind: SourceKind) -> Self {
        MatchedRule {
            name: name.into(),
            source_kind,
            guard: None,
            targets: Vec::new(),
            is_default: true,
        }
    }

    /// Takes the rule out of default resolution. Several rules may match the
    /// same element as long as at most one of them is a default rule.
    pub fn nodefault(mut self) -> Self {
        self.is_default = false;
        self
    }

    pub fn guard<F>(mut self, guard: F) -> Self
    where
        F: Fn(&UmlModel, SourceElement) -> Result<bool, String> + Send + Sync + 'static,
    {
        self.guard = Some(Arc::new(guard));
        self
    }

    /// Appends a target template. The first one is the rule's default target.
    pub fn to(mut self, template: TargetTemplate) -> Self {
        self.targets.push(template);
        self
    }

    fn matches(&self, model: &UmlModel, src: SourceElement) -> Result<bool, EngineError> {
        if src.kind() != self.source_kind {
            return Ok(false);
        }
        match &self.guard {
            None => Ok(true),
            Some(guard) => guard(model, src).map_err(|message| EngineError::GuardFailure {
                rule: self.name.clone(),
                source_element: src.describe(model),
                message,
            }),
        }
    }

    fn check(&self) -> Result<(), EngineError> {
        if self.targets.is_empty() {
            return Err(EngineError::EmptyRule(self.name.clone()));
        }
        for (i, t) in self.targets.iter().enumerate() {
            if self.targets[..i]
                .iter()
                .any(|o| o.local_name == t.local_name)
            {
                return Err(EngineError::DuplicateTemplate {
                    rule: self.name.clone(),
                    template: t.local_name.clone(),
                });
            }
            for b in &t.bindings {
                if t.kind.shape(&b.feature).is_none() {
                    return Err(EngineError::UnknownFeature {
                        rule: self.name.clone(),
                        template: t.local_name.clone(),
                        feature: b.feature.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RuleModule {
    rules: Vec<MatchedRule>,
}

impl RuleModule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, rule: MatchedRule) -> Result<(), EngineError> {
        if self.rules.iter().any(|r| r.name == rule.name) {
            return Err(EngineError::DuplicateRule(rule.name));
        }
        rule.check()?;
        self.rules.push(rule);
        Ok(())
    }

    pub fn with_rule(mut self, rule: MatchedRule) -> Result<Self, EngineError> {
        self.register(rule)?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> &[MatchedRule] {
        &self.rules
    }

    pub fn rule(&self, name: &str) -> Option<&MatchedRule> {
        self.rules.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("rule `{0}` is already registered")]
    DuplicateRule(String),
    #[error("rule `{0}` declares no target template")]
    EmptyRule(String),
    #[error("rule `{rule}` declares template `{template}` twice")]
    DuplicateTemplate { rule: String, template: String },
    #[error("rule `{rule}` template `{template}` binds unknown feature `{feature}`")]
    UnknownFeature {
        rule: String,
        template: String,
        feature: String,
    },
    #[error("{source_element} is matched by several rules: {}", rules.join(", "))]
    AmbiguousMatch {
        source_element: String,
        rules: Vec<String>,
    },
    #[error("guard of rule `{rule}` failed on {source_element}: {message}")]
    GuardFailure {
        rule: String,
        source_element: String,
        message: String,
    },
    #[error("binding `{rule}.{template}.{feature}` failed: {message}")]
    BindingFailed {
        rule: String,
        template: String,
        feature: String,
        message: String,
    },
    #[error("binding `{rule}.{template}.{feature}` refers to {source_element}, which has no trace entry")]
    UnresolvedReference {
        rule: String,
        template: String,
        feature: String,
        source_element: String,
    },
    #[error("trace entry ({source_element}, `{template}`) written twice")]
    TraceOverwrite {
        source_element: String,
        template: String,
    },
    #[error("binding `{rule}.{template}.{feature}` has the wrong type: {message}")]
    TypeMismatch {
        rule: String,
        template: String,
        feature: String,
        message: String,
    },
    #[error("`{rule}.{template}` leaves mandatory feature `{feature}` unset")]
    MissingFeature {
        rule: String,
        template: String,
        feature: String,
    },
    #[error("more than one {0} root was created")]
    MultipleRoots(TargetKind),
    #[error("{kind} created by `{rule}.{template}` is referenced but not contained in a root")]
    UncontainedTarget {
        kind: TargetKind,
        rule: String,
        template: String,
    },
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::DuplicateRule(_) => "duplicate-rule",
            EngineError::EmptyRule(_) => "empty-rule",
            EngineError::DuplicateTemplate { .. } => "duplicate-template",
            EngineError::UnknownFeature { .. } => "unknown-feature",
            EngineError::AmbiguousMatch { .. } => "ambiguous-match",
            EngineError::GuardFailure { .. } => "guard-failure",
            EngineError::BindingFailed { .. } => "binding-failed",
            EngineError::UnresolvedReference { .. } => "unresolved-reference",
            EngineError::TraceOverwrite { .. } => "trace-overwrite",
            EngineError::TypeMismatch { .. } => "type-mismatch",
            EngineError::MissingFeature { .. } => "missing-feature",
            EngineError::MultipleRoots(_) => "multiple-roots",
            EngineError::UncontainedTarget { .. } => "uncontained-target",
        }
    }
}

/// Trace links recorded while instantiating targets. Entries are write-once.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceStore {
    entries: BTreeMap<(SourceElement, String), TargetId>,
    defaults: BTreeMap<SourceElement, TargetId>,
    kinds: Vec<TargetKind>,
    placement: HashMap<TargetId, ElementRef>,
}

impl TraceStore {
    fn record(
        &mut self,
        model: &UmlModel,
        src: SourceElement,
        template: &str,
        id: TargetId,
        is_default: bool,
    ) -> Result<(), EngineError> {
        let key = (src, template.to_owned());
        if self.entries.contains_key(&key) {
            return Err(EngineError::TraceOverwrite {
                source_element: src.describe(model),
                template: template.to_owned(),
            });
        }
        self.entries.insert(key, id);
        if is_default {
            self.defaults.insert(src, id);
        }
        Ok(())
    }

    /// Target created from the first template of the rule that matched `src`.
    pub fn resolve(&self, src: SourceElement) -> Option<TargetId> {
        self.defaults.get(&src).copied()
    }

    /// Target created from `src`'s template named `name`.
    pub fn resolve_temp(&self, src: SourceElement, name: &str) -> Option<TargetId> {
        self.entries.get(&(src, name.to_owned())).copied()
    }

    pub fn kind(&self, id: TargetId) -> Option<TargetKind> {
        self.kinds.get(id.0).copied()
    }

    /// Where the target ended up in the projected model, if anywhere.
    pub fn element(&self, id: TargetId) -> Option<ElementRef> {
        self.placement.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (SourceElement, &str, TargetId)> + '_ {
        self.entries
            .iter()
            .map(|((s, n), id)| (*s, n.as_str(), *id))
    }
}

/// What a binding expression can see.
pub struct BindingContext<'a> {
    model: &'a UmlModel,
    trace: Option<&'a TraceStore>,
}

impl<'a> BindingContext<'a> {
    pub fn model(&self) -> &'a UmlModel {
        self.model
    }

    /// The trace, or `None` while targets are still being created.
    pub fn trace(&self) -> Option<&'a TraceStore> {
        self.trace
    }

    fn require_trace(&self) -> Result<&'a TraceStore, String> {
        self.trace
            .ok_or_else(|| "the trace is not available while targets are being created".to_owned())
    }

    pub fn resolve(&self, src: SourceElement) -> Result<BindingValue, String> {
        Ok(self.require_trace()?.resolve(src).into())
    }

    pub fn resolve_temp(&self, src: SourceElement, name: &str) -> Result<BindingValue, String> {
        Ok(self.require_trace()?.resolve_temp(src, name).into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Atom {
    Str(String),
    Target(TargetId),
}

struct Node {
    kind: TargetKind,
    rule: usize,
    template: usize,
    source: SourceElement,
    values: Vec<(String, Vec<Atom>)>,
    bound: bool,
}

/// Output of a run: the projected target model and the trace behind it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub model: StrutsModel,
    pub trace: TraceStore,
}

struct Run<'a> {
    module: &'a RuleModule,
    source: &'a UmlModel,
    nodes: Vec<Node>,
    trace: TraceStore,
}

/// Runs every rule of `module` over `source`.
pub fn execute(module: &RuleModule, source: &UmlModel) -> Result<Execution, EngineError> {
    let mut run = Run {
        module,
        source,
        nodes: Vec::new(),
        trace: TraceStore::default(),
    };
    run.instantiate()?;
    run.bind()?;
    run.project()
}

fn source_elements(model: &UmlModel) -> impl Iterator<Item = SourceElement> + '_ {
    std::iter::once(SourceElement::Package)
        .chain(model.class_ids().map(SourceElement::Classifier))
        .chain(model.op_ids().map(SourceElement::Operation))
}

impl<'a> Run<'a> {
    fn instantiate(&mut self) -> Result<(), EngineError> {
        let model = self.source;
        for src in source_elements(model) {
            let mut matched = Vec::new();
            for (r, rule) in self.module.rules.iter().enumerate() {
                if rule.matches(model, src)? {
                    matched.push(r);
                }
            }
            let defaults: Vec<usize> = matched
                .iter()
                .copied()
                .filter(|&r| self.module.rules[r].is_default)
                .collect();
            if defaults.len() > 1 {
                return Err(EngineError::AmbiguousMatch {
                    source_element: src.describe(model),
                    rules: defaults
                        .iter()
                        .map(|&r| self.module.rules[r].name.clone())
                        .collect(),
                });
            }
            for r in matched {
                self.instantiate_match(r, src)?;
            }
        }
        Ok(())
    }

    fn instantiate_match(&mut self, r: usize, src: SourceElement) -> Result<(), EngineError> {
        let model = self.source;
        let rule = &self.module.rules[r];
        for (t, template) in rule.targets.iter().enumerate() {
            let mut node = Node {
                kind: template.kind,
                rule: r,
                template: t,
                source: src,
                values: Vec::new(),
                bound: false,
            };
            if template.suppress_if_unnamed {
                let ctx = BindingContext { model, trace: None };
                node.values = self.evaluate(&ctx, r, t, src)?;
                node.bound = true;
                if node.values.iter().all(|(_, v)| v.is_empty()) {
                    continue;
                }
            }
            let id = TargetId(self.nodes.len());
            self.trace.kinds.push(template.kind);
            self.nodes.push(node);
            self.trace.record(
                model,
                src,
                &template.local_name,
                id,
                rule.is_default && t == 0,
            )?;
        }
        Ok(())
    }

    fn bind(&mut self) -> Result<(), EngineError> {
        let ctx = BindingContext {
            model: self.source,
            trace: Some(&self.trace),
        };
        let mut bound = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            if node.bound {
                bound.push(None);
            } else {
                bound.push(Some(self.evaluate(
                    &ctx,
                    node.rule,
                    node.template,
                    node.source,
                )?));
            }
        }
        for (node, values) in self.nodes.iter_mut().zip(bound) {
            if let Some(values) = values {
                node.values = values;
                node.bound = true;
            }
        }
        Ok(())
    }

    fn evaluate(
        &self,
        ctx: &BindingContext<'_>,
        r: usize,
        t: usize,
        src: SourceElement,
    ) -> Result<Vec<(String, Vec<Atom>)>, EngineError> {
        let rule = &self.module.rules[r];
        let template = &rule.targets[t];
        let mut out = Vec::with_capacity(template.bindings.len());
        for binding in &template.bindings {
            let value = (binding.expr)(ctx, src).map_err(|message| EngineError::BindingFailed {
                rule: rule.name.clone(),
                template: template.local_name.clone(),
                feature: binding.feature.clone(),
                message,
            })?;
            let mut atoms = Vec::new();
            self.flatten(ctx, value, &mut atoms)
                .map_err(|s| EngineError::UnresolvedReference {
                    rule: rule.name.clone(),
                    template: template.local_name.clone(),
                    feature: binding.feature.clone(),
                    source_element: s.describe(self.source),
                })?;
            out.push((binding.feature.clone(), atoms));
        }
        Ok(out)
    }

    /// Flattens nested collections, drops undefined members and resolves
    /// source elements to their default targets.
    fn flatten(
        &self,
        ctx: &BindingContext<'_>,
        value: BindingValue,
        out: &mut Vec<Atom>,
    ) -> Result<(), SourceElement> {
        match value {
            BindingValue::Undefined => {}
            BindingValue::Str(s) => out.push(Atom::Str(s)),
            BindingValue::Target(id) => out.push(Atom::Target(id)),
            BindingValue::Source(src) => match ctx.trace.and_then(|t| t.resolve(src)) {
                Some(id) => out.push(Atom::Target(id)),
                None => return Err(src),
            },
            BindingValue::Collection(items) => {
                for item in items {
                    self.flatten(ctx, item, out)?;
                }
            }
        }
        Ok(())
    }

    fn names(&self, id: TargetId) -> (String, String) {
        let node = &self.nodes[id.0];
        let rule = &self.module.rules[node.rule];
        (
            rule.name.clone(),
            rule.targets[node.template].local_name.clone(),
        )
    }

    fn single_root(&self, kind: TargetKind) -> Result<Option<TargetId>, EngineError> {
        let mut roots = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.kind == kind)
            .map(|(i, _)| TargetId(i));
        let first = roots.next();
        if roots.next().is_some() {
            return Err(EngineError::MultipleRoots(kind));
        }
        Ok(first)
    }

    fn project(mut self) -> Result<Execution, EngineError> {
        let mut model = StrutsModel::default();

        if let Some(root) = self.single_root(TargetKind::ViewPackage)? {
            self.trace.placement.insert(root, ElementRef::ViewPackage);
            model.views = ViewPackage {
                name: self.opt_str(root, "name")?,
                views: Vec::new(),
            };
            for (i, page) in self.many(root, "view")?.into_iter().enumerate() {
                self.trace
                    .placement
                    .entry(page)
                    .or_insert(ElementRef::View(i));
                model.views.views.push(JspPage {
                    name: self.req_str(page, "name")?,
                });
            }
        }

        if let Some(root) = self.single_root(TargetKind::ActionMapping)? {
            self.trace.placement.insert(root, ElementRef::ActionMapping);
            for (a, id) in self.many(root, "action")?.into_iter().enumerate() {
                self.trace
                    .placement
                    .entry(id)
                    .or_insert(ElementRef::Action(a));
                let mut action = Action {
                    path: self.req_str(id, "path")?,
                    name: self.opt_str(id, "name")?,
                    type_name: self.req_str(id, "type")?,
                    input: self.opt_str(id, "input")?,
                    forwards: Vec::new(),
                };
                for (f, fwd) in self.many(id, "forward")?.into_iter().enumerate() {
                    self.trace
                        .placement
                        .entry(fwd)
                        .or_insert(ElementRef::Forward(a, f));
                    let page = self.req_ref(fwd, "path")?;
                    let target = match self.trace.placement.get(&page) {
                        Some(ElementRef::View(i)) => *i,
                        _ => {
                            let (rule, template) = self.names(page);
                            return Err(EngineError::UncontainedTarget {
                                kind: TargetKind::JspPage,
                                rule,
                                template,
                            });
                        }
                    };
                    action.forwards.push(ActionForward {
                        name: self.req_str(fwd, "name")?,
                        target,
                    });
                }
                model.actions.actions.push(action);
            }
        }

        if let Some(root) = self.single_root(TargetKind::FormBean)? {
            self.trace.placement.insert(root, ElementRef::FormBean);
            for (i, form) in self.many(root, "form")?.into_iter().enumerate() {
                self.trace
                    .placement
                    .entry(form)
                    .or_insert(ElementRef::Form(i));
                model.forms.forms.push(ActionForm {
                    name: self.req_str(form, "name")?,
                });
            }
        }

        Ok(Execution {
            model,
            trace: self.trace,
        })
    }

    fn atoms(&self, id: TargetId, feature: &str) -> &[Atom] {
        self.nodes[id.0]
            .values
            .iter()
            .find(|(f, _)| f == feature)
            .map_or(&[], |(_, v)| v.as_slice())
    }

    fn mismatch(&self, id: TargetId, feature: &str, message: String) -> EngineError {
        let (rule, template) = self.names(id);
        EngineError::TypeMismatch {
            rule,
            template,
            feature: feature.to_owned(),
            message,
        }
    }

    fn opt_str(&self, id: TargetId, feature: &str) -> Result<Option<String>, EngineError> {
        match self.atoms(id, feature) {
            [] => Ok(None),
            [Atom::Str(s)] => Ok(Some(s.clone())),
            other => Err(self.mismatch(id, feature, format!("expected a string, got {other:?}"))),
        }
    }

    fn req_str(&self, id: TargetId, feature: &str) -> Result<String, EngineError> {
        self.opt_str(id, feature)?.ok_or_else(|| {
            let (rule, template) = self.names(id);
            EngineError::MissingFeature {
                rule,
                template,
                feature: feature.to_owned(),
            }
        })
    }

    fn req_ref(&self, id: TargetId, feature: &str) -> Result<TargetId, EngineError> {
        let Some(Shape::Ref(kind)) = self.nodes[id.0].kind.shape(feature) else {
            unreachable!("feature schema");
        };
        match self.atoms(id, feature) {
            [] => {
                let (rule, template) = self.names(id);
                Err(EngineError::MissingFeature {
                    rule,
                    template,
                    feature: feature.to_owned(),
                })
            }
            [Atom::Target(t)] if self.nodes[t.0].kind == kind => Ok(*t),
            other => Err(self.mismatch(id, feature, format!("expected one {kind}, got {other:?}"))),
        }
    }

    fn many(&self, id: TargetId, feature: &str) -> Result<Vec<TargetId>, EngineError> {
        let Some(Shape::Many(kind)) = self.nodes[id.0].kind.shape(feature) else {
            unreachable!("feature schema");
        };
        self.atoms(id, feature)
            .iter()
            .map(|atom| match atom {
                Atom::Target(t) if self.nodes[t.0].kind == kind => Ok(*t),
                other => Err(self.mismatch(id, feature, format!("expected {kind}, got {other:?}"))),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pim::{crud_chain, ModelBuilder};
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn op_page_rule() -> MatchedRule {
        MatchedRule::new("Op2Page", SourceKind::Operation).to(TargetTemplate::new(
            "page",
            TargetKind::JspPage,
        )
        .bind("name", |ctx, src| {
            let SourceElement::Operation(op) = src else {
                unreachable!()
            };
            Ok(BindingValue::str(format!(
                "{}{}.jsp",
                ctx.model().operation(op).name,
                ctx.model().classifier(op.class).name
            )))
        }))
    }

    fn package_rule() -> MatchedRule {
        MatchedRule::new("P2View", SourceKind::Package).to(TargetTemplate::new(
            "vp",
            TargetKind::ViewPackage,
        )
        .bind("view", |ctx, _| {
            Ok(BindingValue::Collection(
                ctx.model()
                    .op_ids()
                    .map(|op| BindingValue::Source(SourceElement::Operation(op)))
                    .collect(),
            ))
        }))
    }

    #[test]
    fn registration() {
        let mut module = RuleModule::new();
        assert!(module.is_empty());
        module.register(op_page_rule()).unwrap();
        assert_eq!(module.len(), 1);
        assert_eq!(
            module.register(op_page_rule()).unwrap_err().code(),
            "duplicate-rule"
        );
        let empty = MatchedRule::new("E", SourceKind::Package);
        assert_eq!(module.register(empty).unwrap_err().code(), "empty-rule");
        let dup = MatchedRule::new("D", SourceKind::Package)
            .to(TargetTemplate::new("x", TargetKind::FormBean))
            .to(TargetTemplate::new("x", TargetKind::FormBean));
        assert_eq!(
            module.register(dup).unwrap_err().code(),
            "duplicate-template"
        );
        let bad = MatchedRule::new("B", SourceKind::Package).to(TargetTemplate::new(
            "x",
            TargetKind::FormBean,
        )
        .bind("colour", |_, _| Ok(BindingValue::Undefined)));
        assert_eq!(module.register(bad).unwrap_err().code(), "unknown-feature");
        assert_eq!(module.len(), 1);
    }

    #[test]
    fn empty_module_gives_empty_output() {
        let m = crud_chain("p", &["A", "B"]);
        let run = execute(&RuleModule::new(), &m).unwrap();
        assert_eq!(run.model, StrutsModel::default());
        assert!(run.trace.is_empty());
    }

    #[test]
    fn default_resolution_through_source_values() {
        let module = RuleModule::new()
            .with_rule(package_rule())
            .unwrap()
            .with_rule(op_page_rule())
            .unwrap();
        let m = crud_chain("p", &["A"]);
        let run = execute(&module, &m).unwrap();
        let names: Vec<_> = run
            .model
            .views
            .views
            .iter()
            .map(|p| p.name.as_str())
            .collect();
        assert_eq!(
            names,
            ["CreateA.jsp", "DeleteA.jsp", "RetrieveA.jsp", "UpdateA.jsp"]
        );
        let op = SourceElement::Operation(m.op_ids().nth(2).unwrap());
        let id = run.trace.resolve(op).unwrap();
        assert_eq!(run.trace.resolve(op), Some(id));
        assert_eq!(run.trace.resolve_temp(op, "page"), Some(id));
        assert_eq!(run.trace.element(id), Some(ElementRef::View(2)));
        assert_eq!(
            run.trace.resolve(SourceElement::Classifier(ClassId(0))),
            None
        );
        assert_eq!(run.trace.len(), 5);
    }

    #[test]
    fn unmatched_source_reference_is_an_error() {
        let module = RuleModule::new().with_rule(package_rule()).unwrap();
        let m = crud_chain("p", &["A"]);
        let err = execute(&module, &m).unwrap_err();
        assert_eq!(err.code(), "unresolved-reference");
    }

    #[test]
    fn ambiguous_match() {
        let module = RuleModule::new()
            .with_rule(op_page_rule())
            .unwrap()
            .with_rule(MatchedRule {
                name: "Other".into(),
                ..op_page_rule()
            })
            .unwrap();
        let err = execute(&module, &crud_chain("p", &["A"])).unwrap_err();
        assert_eq!(err.code(), "ambiguous-match");
    }

    #[test]
    fn guards_select_and_fail_loudly() {
        let only_create = op_page_rule().guard(|m, src| match src {
            SourceElement::Operation(op) => Ok(m.operation(op).name == "Create"),
            _ => Err("not an operation".into()),
        });
        let module = RuleModule::new().with_rule(only_create).unwrap();
        let run = execute(&module, &crud_chain("p", &["A", "B"])).unwrap();
        assert_eq!(run.trace.len(), 2);

        let failing = op_page_rule().guard(|_, _| Err("boom".into()));
        let module = RuleModule::new().with_rule(failing).unwrap();
        let err = execute(&module, &crud_chain("p", &["A"])).unwrap_err();
        assert_eq!(err.code(), "guard-failure");
    }

    #[test]
    fn bindings_see_a_complete_trace() {
        let m = crud_chain("p", &["A", "B", "C"]);
        let expected = 1 + m.op_ids().count();
        let probes = Arc::new(AtomicUsize::new(0));
        let seen = probes.clone();
        let probe = MatchedRule::new("Probe", SourceKind::Operation).to(TargetTemplate::new(
            "page",
            TargetKind::JspPage,
        )
        .bind("name", move |ctx, _| {
            let trace = ctx.trace().ok_or("no trace")?;
            if trace.len() != expected {
                return Err(format!("partial trace: {} of {expected}", trace.len()));
            }
            seen.fetch_add(1, Ordering::SeqCst);
            Ok(BindingValue::str("x.jsp"))
        }));
        let module = RuleModule::new()
            .with_rule(package_rule())
            .unwrap()
            .with_rule(probe)
            .unwrap();
        execute(&module, &m).unwrap();
        assert_eq!(probes.load(Ordering::SeqCst), m.op_ids().count());
    }

    #[test]
    fn suppressed_templates_leave_no_trace() {
        let rule = MatchedRule::new("Op2Page", SourceKind::Operation).to(TargetTemplate::new(
            "page",
            TargetKind::JspPage,
        )
        .suppress_if_unnamed()
        .bind("name", |ctx, src| {
            let SourceElement::Operation(op) = src else {
                unreachable!()
            };
            let name = &ctx.model().operation(op).name;
            Ok((name != "Delete").then(|| format!("{name}.jsp")).into())
        }));
        let vp = MatchedRule::new("P2View", SourceKind::Package).to(TargetTemplate::new(
            "vp",
            TargetKind::ViewPackage,
        )
        .bind("view", |ctx, _| {
            ctx.model()
                .op_ids()
                .map(|op| ctx.resolve_temp(SourceElement::Operation(op), "page"))
                .collect::<Result<Vec<_>, _>>()
                .map(BindingValue::Collection)
        }));
        let module = RuleModule::new()
            .with_rule(vp)
            .unwrap()
            .with_rule(rule)
            .unwrap();
        let m = crud_chain("p", &["A"]);
        let run = execute(&module, &m).unwrap();
        assert_eq!(run.model.views.views.len(), 3);
        let delete = SourceElement::Operation(
            m.sibling_named(
                OpId {
                    class: ClassId(0),
                    index: 0,
                },
                "Delete",
            )
            .unwrap(),
        );
        assert_eq!(run.trace.resolve_temp(delete, "page"), None);
        assert_eq!(run.trace.resolve(delete), None);
        assert_eq!(run.trace.len(), 4);
    }

    #[test]
    fn suppressible_bindings_cannot_use_the_trace() {
        let rule = MatchedRule::new("R", SourceKind::Operation).to(TargetTemplate::new(
            "page",
            TargetKind::JspPage,
        )
        .suppress_if_unnamed()
        .bind("name", |ctx, src| ctx.resolve(src)));
        let module = RuleModule::new().with_rule(rule).unwrap();
        let err = execute(&module, &crud_chain("p", &["A"])).unwrap_err();
        assert_eq!(err.code(), "binding-failed");
    }

    #[test]
    fn type_and_presence_checks() {
        let no_name = MatchedRule::new("R", SourceKind::Operation)
            .to(TargetTemplate::new("page", TargetKind::JspPage));
        let module = RuleModule::new()
            .with_rule(package_rule())
            .unwrap()
            .with_rule(no_name)
            .unwrap();
        assert_eq!(
            execute(&module, &crud_chain("p", &["A"]))
                .unwrap_err()
                .code(),
            "missing-feature"
        );

        let wrong = MatchedRule::new("R", SourceKind::Operation).to(TargetTemplate::new(
            "page",
            TargetKind::JspPage,
        )
        .bind("name", |_, _| {
            Ok(BindingValue::Collection(vec![
                BindingValue::str("a"),
                BindingValue::str("b"),
            ]))
        }));
        let module = RuleModule::new()
            .with_rule(package_rule())
            .unwrap()
            .with_rule(wrong)
            .unwrap();
        assert_eq!(
            execute(&module, &crud_chain("p", &["A"]))
                .unwrap_err()
                .code(),
            "type-mismatch"
        );

        let two_roots = MatchedRule::new("C", SourceKind::Classifier)
            .to(TargetTemplate::new("fb", TargetKind::FormBean));
        let module = RuleModule::new().with_rule(two_roots).unwrap();
        assert_eq!(
            execute(&module, &crud_chain("p", &["A", "B"]))
                .unwrap_err()
                .code(),
            "multiple-roots"
        );
    }

    #[test]
    fn forwards_must_land_on_contained_pages() {
        let action = MatchedRule::new("O2Action", SourceKind::Operation)
            .to(TargetTemplate::new("frm", TargetKind::Action)
                .bind("path", |_, _| Ok(BindingValue::str("/x")))
                .bind("type", |_, _| Ok(BindingValue::str("X")))
                .bind("forward", |ctx, src| ctx.resolve_temp(src, "fr")))
            .to(TargetTemplate::new("fr", TargetKind::ActionForward)
                .bind("name", |_, _| Ok(BindingValue::str("Success")))
                .bind("path", |ctx, src| ctx.resolve_temp(src, "jsp")))
            .to(TargetTemplate::new("jsp", TargetKind::JspPage)
                .bind("name", |_, _| Ok(BindingValue::str("x.jsp"))));
        let mapping = MatchedRule::new("P2M", SourceKind::Package).to(TargetTemplate::new(
            "m",
            TargetKind::ActionMapping,
        )
        .bind("action", |ctx, _| {
            Ok(BindingValue::Collection(
                ctx.model()
                    .op_ids()
                    .map(|op| BindingValue::Source(SourceElement::Operation(op)))
                    .collect(),
            ))
        }));
        let m = ModelBuilder::new("p")
            .class(crate::pim::ClassDecl::new("A").op(crate::pim::Operation::new("Go")))
            .build()
            .unwrap();
        let module = RuleModule::new()
            .with_rule(mapping)
            .unwrap()
            .with_rule(action)
            .unwrap();
        assert_eq!(
            execute(&module, &m).unwrap_err().code(),
            "uncontained-target"
        );
    }

    #[test]
    fn collections_drop_undefined_members() {
        use proptest::prelude::*;
        let mut runner = proptest::test_runner::TestRunner::default();
        runner
            .run(&prop::collection::vec(any::<bool>(), 0..12), |mask| {
                let holes = mask.iter().filter(|d| !**d).count();
                let mask = Arc::new(mask);
                let shared = mask.clone();
                let vp = MatchedRule::new("P", SourceKind::Package).to(TargetTemplate::new(
                    "vp",
                    TargetKind::ViewPackage,
                )
                .bind("view", move |ctx, _| {
                    let ops: Vec<_> = ctx.model().op_ids().collect();
                    Ok(BindingValue::Collection(
                        shared
                            .iter()
                            .zip(ops)
                            .map(|(keep, op)| {
                                if *keep {
                                    BindingValue::Collection(vec![BindingValue::Source(
                                        SourceElement::Operation(op),
                                    )])
                                } else {
                                    BindingValue::Undefined
                                }
                            })
                            .collect(),
                    ))
                }));
                let module = RuleModule::new()
                    .with_rule(vp)
                    .unwrap()
                    .with_rule(op_page_rule())
                    .unwrap();
                let mut decl = crate::pim::ClassDecl::new("A");
                for i in 0..mask.len() {
                    decl = decl.op(crate::pim::Operation::new(format!("Op{i:02}")));
                }
                let m = ModelBuilder::new("p").class(decl).build().unwrap();
                let run = execute(&module, &m).unwrap();
                let kept: Vec<String> = mask
                    .iter()
                    .enumerate()
                    .filter(|(_, k)| **k)
                    .map(|(i, _)| format!("Op{i:02}A.jsp"))
                    .collect();
                let got: Vec<String> = run
                    .model
                    .views
                    .views
                    .iter()
                    .map(|p| p.name.clone())
                    .collect();
                prop_assert_eq!(got.len(), mask.len() - holes);
                prop_assert_eq!(got, kept);
                Ok(())
            })
            .unwrap();
    }
}
