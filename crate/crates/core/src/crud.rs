//! The six CRUD transformation rules and the name-derivation functions
//! they share.
//!
//! | rule              | source    | targets                          |
//! |-------------------|-----------|----------------------------------|
//! | P2View            | package   | `vout` ViewPackage               |
//! | O2JspPage         | operation | `jsp` JspPage                    |
//! | UML2ActionMapping | package   | `act` ActionMapping              |
//! | O2Action          | operation | `frm` Action, `fr` ActionForward |
//! | P2FormBean        | package   | `fmb` FormBean                   |
//! | O2ActionForm      | operation | `actf`, `actf1` ActionForm       |
//!
//! All three operation rules match every operation. O2Action is the default
//! rule for operations (its `frm` Action is what plain resolution returns);
//! O2JspPage and O2ActionForm are `nodefault` rules whose targets are reached
//! through `resolve_temp` only. The package rules follow the same pattern
//! with P2View as the default.

use thiserror::Error;

use crate::engine::{
    execute, BindingContext, BindingValue, EngineError, Execution, MatchedRule, RuleModule,
    SourceElement, SourceKind, TargetKind, TargetTemplate,
};
use crate::pim::{validate_pim, OpId, UmlModel, Violation, VOID};
use crate::psm::StrutsModel;

pub const SUCCESS: &str = "Success";

/// Operation classification by exact name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CrudKind {
    Create,
    Retrieve,
    Update,
    Delete,
    Other(String),
}

impl CrudKind {
    pub fn of(name: &str) -> Self {
        match name {
            "Create" => CrudKind::Create,
            "Retrieve" => CrudKind::Retrieve,
            "Update" => CrudKind::Update,
            "Delete" => CrudKind::Delete,
            other => CrudKind::Other(other.to_owned()),
        }
    }
}

fn op_and_owner(model: &UmlModel, op: OpId) -> (&str, &str) {
    (
        model.operation(op).name.as_str(),
        model.classifier(op.class).name.as_str(),
    )
}

fn kind(model: &UmlModel, op: OpId) -> CrudKind {
    CrudKind::of(&model.operation(op).name)
}

/// `CreateCi.jsp`; Delete operations have no page.
pub fn jsp_name(model: &UmlModel, op: OpId) -> Option<String> {
    let (name, class) = op_and_owner(model, op);
    (kind(model, op) != CrudKind::Delete).then(|| format!("{name}{class}.jsp"))
}

pub fn action_path(model: &UmlModel, op: OpId) -> String {
    let (name, class) = op_and_owner(model, op);
    format!("/{name}{class}")
}

pub fn action_type(model: &UmlModel, op: OpId) -> String {
    let (name, class) = op_and_owner(model, op);
    format!("{name}{class}Action")
}

/// Form bean used by the action; a root class's Retrieve takes none.
pub fn action_form_name(model: &UmlModel, op: OpId) -> Option<String> {
    let (name, class) = op_and_owner(model, op);
    let root_retrieve =
        model.opposite_type_name(op.class) == VOID && kind(model, op) == CrudKind::Retrieve;
    (!root_retrieve).then(|| format!("{name}{class}Form"))
}

/// Page the action is entered from: the parent's page for the same
/// operation, or the parent's Retrieve page for deletes. Roots have none.
pub fn action_input(model: &UmlModel, op: OpId) -> Option<String> {
    let parent = model.opposite_type_name(op.class);
    if parent == VOID {
        return None;
    }
    Some(match kind(model, op) {
        CrudKind::Delete => format!("/Retrieve{parent}.jsp"),
        _ => format!("/{}{parent}.jsp", model.operation(op).name),
    })
}

pub fn end_form_name(model: &UmlModel, op: OpId) -> Option<String> {
    let (name, class) = op_and_owner(model, op);
    matches!(kind(model, op), CrudKind::Create | CrudKind::Update)
        .then(|| format!("{name}{class}EndForm"))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("Delete on `{class}` has no sibling Retrieve to forward to")]
pub struct MissingRetrieve {
    pub class: String,
}

/// Operation whose page the action's Success forward lands on. Deletes go
/// back to the owner's Retrieve listing, everything else to its own page.
pub fn forward_target(model: &UmlModel, op: OpId) -> Result<OpId, MissingRetrieve> {
    if kind(model, op) != CrudKind::Delete {
        return Ok(op);
    }
    model
        .sibling_named(op, "Retrieve")
        .ok_or_else(|| MissingRetrieve {
            class: model.classifier(op.class).name.clone(),
        })
}

fn operation(src: SourceElement) -> Result<OpId, String> {
    match src {
        SourceElement::Operation(op) => Ok(op),
        other => Err(format!("expected an operation, got {other:?}")),
    }
}

fn over_method_defs(ctx: &BindingContext<'_>, template: &str) -> Result<BindingValue, String> {
    ctx.model()
        .all_method_defs()
        .into_iter()
        .map(|op| ctx.resolve_temp(SourceElement::Operation(op), template))
        .collect::<Result<Vec<_>, _>>()
        .map(BindingValue::Collection)
}

/// Template names, as used by `resolve_temp`.
pub mod templates {
    pub const JSP: &str = "jsp";
    pub const ACTION: &str = "frm";
    pub const FORWARD: &str = "fr";
    pub const FORM: &str = "actf";
    pub const END_FORM: &str = "actf1";
}

fn p2view() -> MatchedRule {
    MatchedRule::new("P2View", SourceKind::Package).to(TargetTemplate::new(
        "vout",
        TargetKind::ViewPackage,
    )
    .bind("name", |ctx, _| {
        let name = ctx.model().name();
        Ok((!name.is_empty()).then(|| name.to_owned()).into())
    })
    .bind("view", |ctx, _| over_method_defs(ctx, templates::JSP)))
}

fn uml2action_mapping() -> MatchedRule {
    MatchedRule::new("UML2ActionMapping", SourceKind::Package)
        .nodefault()
        .to(TargetTemplate::new("act", TargetKind::ActionMapping)
            .bind("action", |ctx, _| over_method_defs(ctx, templates::ACTION)))
}

fn p2form_bean() -> MatchedRule {
    MatchedRule::new("P2FormBean", SourceKind::Package)
        .nodefault()
        .to(
            TargetTemplate::new("fmb", TargetKind::FormBean).bind("form", |ctx, _| {
                Ok(BindingValue::Collection(vec![
                    over_method_defs(ctx, templates::END_FORM)?,
                    over_method_defs(ctx, templates::FORM)?,
                ]))
            }),
        )
}

fn o2action_templates() -> [TargetTemplate; 2] {
    let action = TargetTemplate::new(templates::ACTION, TargetKind::Action)
        .bind("path", |ctx, src| {
            Ok(BindingValue::Str(action_path(ctx.model(), operation(src)?)))
        })
        .bind("name", |ctx, src| {
            Ok(action_form_name(ctx.model(), operation(src)?).into())
        })
        .bind("type", |ctx, src| {
            Ok(BindingValue::Str(action_type(ctx.model(), operation(src)?)))
        })
        .bind("input", |ctx, src| {
            Ok(action_input(ctx.model(), operation(src)?).into())
        })
        .bind("forward", |ctx, src| {
            Ok(BindingValue::Collection(vec![
                ctx.resolve_temp(src, templates::FORWARD)?
            ]))
        });
    let forward = TargetTemplate::new(templates::FORWARD, TargetKind::ActionForward)
        .bind("name", |_, _| Ok(BindingValue::str(SUCCESS)))
        .bind("path", |ctx, src| {
            let target = forward_target(ctx.model(), operation(src)?).map_err(|e| e.to_string())?;
            ctx.resolve_temp(SourceElement::Operation(target), templates::JSP)
        });
    [action, forward]
}

fn o2jsp_template() -> TargetTemplate {
    TargetTemplate::new(templates::JSP, TargetKind::JspPage)
        .suppress_if_unnamed()
        .bind("name", |ctx, src| {
            Ok(jsp_name(ctx.model(), operation(src)?).into())
        })
}

fn o2action_form_templates() -> [TargetTemplate; 2] {
    [
        TargetTemplate::new(templates::FORM, TargetKind::ActionForm)
            .suppress_if_unnamed()
            .bind("name", |ctx, src| {
                Ok(action_form_name(ctx.model(), operation(src)?).into())
            }),
        TargetTemplate::new(templates::END_FORM, TargetKind::ActionForm)
            .suppress_if_unnamed()
            .bind("name", |ctx, src| {
                Ok(end_form_name(ctx.model(), operation(src)?).into())
            }),
    ]
}

/// Names of the six rules, in registration order.
pub const RULE_NAMES: [&str; 6] = [
    "P2View",
    "O2JspPage",
    "UML2ActionMapping",
    "O2Action",
    "P2FormBean",
    "O2ActionForm",
];

/// The six CRUD rules, registered in [`RULE_NAMES`] order.
pub fn build_crud_module() -> RuleModule {
    let [action, forward] = o2action_templates();
    let [form, end_form] = o2action_form_templates();

    let mut module = RuleModule::new();
    for rule in [
        p2view(),
        MatchedRule::new("O2JspPage", SourceKind::Operation)
            .nodefault()
            .to(o2jsp_template()),
        uml2action_mapping(),
        MatchedRule::new("O2Action", SourceKind::Operation)
            .to(action)
            .to(forward),
        p2form_bean(),
        MatchedRule::new("O2ActionForm", SourceKind::Operation)
            .nodefault()
            .to(form)
            .to(end_form),
    ] {
        module.register(rule).expect("CRUD rules are well-formed");
    }
    module
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("invalid input model ({} violation(s))", .0.len())]
    InvalidInput(Vec<Violation>),
    #[error(transparent)]
    MissingRetrieve(#[from] MissingRetrieve),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl TransformError {
    pub fn code(&self) -> &'static str {
        match self {
            TransformError::InvalidInput(_) => "invalid-input",
            TransformError::MissingRetrieve(_) => "missing-retrieve",
            TransformError::Engine(e) => e.code(),
        }
    }
}

/// Validates the model, then runs the CRUD module and keeps the trace.
pub fn transform_traced(model: &UmlModel) -> Result<Execution, TransformError> {
    run_checked(&build_crud_module(), model)
}

pub fn transform(model: &UmlModel) -> Result<StrutsModel, TransformError> {
    transform_traced(model).map(|run| run.model)
}

/// [`transform`] with a prebuilt module, for callers running many models.
pub fn transform_with(
    module: &RuleModule,
    model: &UmlModel,
) -> Result<StrutsModel, TransformError> {
    run_checked(module, model).map(|run| run.model)
}

fn run_checked(module: &RuleModule, model: &UmlModel) -> Result<Execution, TransformError> {
    let violations = validate_pim(model);
    if !violations.is_empty() {
        return Err(TransformError::InvalidInput(violations));
    }
    for op in model.op_ids() {
        forward_target(model, op)?;
    }
    Ok(execute(module, model)?)
}
