use crate::io::xml::{XmiDocument, XmlElement};
use crate::io::{ReadError, WriteError};
use crate::psm::{
    fragment_path, parse_fragment, validate_psm, Action, ActionForm, ActionForward, ElementRef,
    JspPage, StrutsModel,
};

pub const XMI_NS: &str = "http://www.omg.org/XMI";
pub const STRUTS_NS: &str = "http://mvc2gen/struts";

const VIEW_TAG: &str = "ViewPackage";
const ACTION_TAG: &str = "actionmappings";
const FORM_TAG: &str = "formbeans";

/// Serializes a valid PSM. Unset optional attributes are omitted; `<action>`
/// attributes are always in path, name, type, input order.
pub fn write_psm_xmi(model: &StrutsModel) -> Result<XmiDocument, WriteError> {
    let violations = validate_psm(model);
    if !violations.is_empty() {
        return Err(WriteError::InvalidModel(violations));
    }

    let mut views = XmlElement::new(VIEW_TAG).opt_attr("name", model.views.name.as_deref());
    for page in &model.views.views {
        views = views.child(XmlElement::new("view").attr("name", &page.name));
    }

    let mut actions = XmlElement::new(ACTION_TAG);
    for action in &model.actions.actions {
        let mut el = XmlElement::new("action")
            .attr("path", &action.path)
            .opt_attr("name", action.name.as_deref())
            .attr("type", &action.type_name)
            .opt_attr("input", action.input.as_deref());
        for fwd in &action.forwards {
            let path = fragment_path(model, ElementRef::View(fwd.target))
                .expect("validated forwards resolve");
            el = el.child(
                XmlElement::new("forward")
                    .attr("name", &fwd.name)
                    .attr("path", path),
            );
        }
        actions = actions.child(el);
    }

    let mut forms = XmlElement::new(FORM_TAG);
    for form in &model.forms.forms {
        forms = forms.child(XmlElement::new("form").attr("name", &form.name));
    }

    Ok(XmiDocument::new(
        XmlElement::new("xmi:XMI")
            .attr("xmi:version", "2.0")
            .attr("xmlns:xmi", XMI_NS)
            .attr("xmlns:struts", STRUTS_NS)
            .child(views)
            .child(actions)
            .child(forms),
    ))
}

/// Reads a PSM document and checks that every forward fragment lands on a
/// view of the document.
pub fn parse_psm_xmi(doc: &XmiDocument) -> Result<StrutsModel, ReadError> {
    let model = read_psm_xmi_unchecked(doc)?;
    for (a, action) in model.actions.actions.iter().enumerate() {
        for (f, fwd) in action.forwards.iter().enumerate() {
            if model.forward_page(fwd).is_none() {
                return Err(ReadError::BadPath {
                    path: format!("/1/@action.{a}/@forward.{f}"),
                    fragment: format!("/0/@view.{}", fwd.target),
                });
            }
        }
    }
    Ok(model)
}

/// Like [`parse_psm_xmi`] but keeps forwards whose view index is out of
/// range, so that validation can report them as dangling.
pub fn read_psm_xmi_unchecked(doc: &XmiDocument) -> Result<StrutsModel, ReadError> {
    let root = &doc.root;
    if root.local_name() != "XMI" {
        return Err(ReadError::schema(
            format!("/{}", root.tag),
            "document root must be xmi:XMI",
        ));
    }
    let [views, actions, forms] = root.children.as_slice() else {
        return Err(ReadError::schema(
            "/",
            format!("expected 3 resource roots, found {}", root.children.len()),
        ));
    };
    for (i, (el, tag)) in [(views, VIEW_TAG), (actions, ACTION_TAG), (forms, FORM_TAG)]
        .into_iter()
        .enumerate()
    {
        if el.tag != tag {
            return Err(ReadError::schema(
                format!("/{i}"),
                format!("expected <{tag}>, found <{}>", el.tag),
            ));
        }
    }

    let mut model = StrutsModel::default();
    only_attrs(views, "/0", &["name"])?;
    model.views.name = views.get("name").map(str::to_owned);
    for (i, el) in views.children.iter().enumerate() {
        let path = format!("/0/@view.{i}");
        expect_tag(el, &path, "view")?;
        only_attrs(el, &path, &["name"])?;
        model.views.views.push(JspPage {
            name: required(el, &path, "name")?.to_owned(),
        });
    }

    only_attrs(actions, "/1", &[])?;
    for (a, el) in actions.children.iter().enumerate() {
        let path = format!("/1/@action.{a}");
        expect_tag(el, &path, "action")?;
        only_attrs(el, &path, &["path", "name", "type", "input"])?;
        let mut action = Action {
            path: required(el, &path, "path")?.to_owned(),
            name: el.get("name").map(str::to_owned),
            type_name: required(el, &path, "type")?.to_owned(),
            input: el.get("input").map(str::to_owned),
            forwards: Vec::new(),
        };
        for (f, fwd) in el.children.iter().enumerate() {
            let path = format!("{path}/@forward.{f}");
            expect_tag(fwd, &path, "forward")?;
            only_attrs(fwd, &path, &["name", "path"])?;
            let fragment = required(fwd, &path, "path")?;
            let target = match parse_fragment(fragment) {
                Ok(ElementRef::View(i)) => i,
                _ => {
                    return Err(ReadError::BadPath {
                        path,
                        fragment: fragment.to_owned(),
                    })
                }
            };
            action.forwards.push(ActionForward {
                name: required(fwd, &path, "name")?.to_owned(),
                target,
            });
        }
        model.actions.actions.push(action);
    }

    only_attrs(forms, "/2", &[])?;
    for (i, el) in forms.children.iter().enumerate() {
        let path = format!("/2/@form.{i}");
        expect_tag(el, &path, "form")?;
        only_attrs(el, &path, &["name"])?;
        model.forms.forms.push(ActionForm {
            name: required(el, &path, "name")?.to_owned(),
        });
    }
    Ok(model)
}

fn expect_tag(el: &XmlElement, path: &str, tag: &str) -> Result<(), ReadError> {
    if el.tag == tag {
        Ok(())
    } else {
        Err(ReadError::schema(
            path,
            format!("expected <{tag}>, found <{}>", el.tag),
        ))
    }
}

fn required<'a>(el: &'a XmlElement, path: &str, key: &str) -> Result<&'a str, ReadError> {
    el.get(key)
        .ok_or_else(|| ReadError::schema(path, format!("missing attribute `{key}`")))
}

fn only_attrs(el: &XmlElement, path: &str, allowed: &[&str]) -> Result<(), ReadError> {
    match el
        .attrs
        .iter()
        .find(|(k, _)| !allowed.contains(&k.as_str()))
    {
        Some((k, _)) => Err(ReadError::schema(
            path,
            format!("unexpected attribute `{k}`"),
        )),
        None => Ok(()),
    }
}
