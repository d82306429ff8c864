use crate::io::xml::{XmiDocument, XmlElement};
use crate::io::ReadError;
use crate::pim::{BuildError, ClassDecl, ModelBuilder, Operation, TypeRef, UmlModel};

pub const UML_NS: &str = "http://mvc2gen/uml";

/// Builds a source model from its XMI form. Classifier and operation order
/// follow document order.
pub fn parse_pim_xmi(doc: &XmiDocument) -> Result<UmlModel, ReadError> {
    let root = &doc.root;
    if root.local_name() != "UMLPackage" {
        return Err(ReadError::schema(
            format!("/{}", root.tag),
            "document root must be uml:UMLPackage",
        ));
    }
    check_attrs(root, "/UMLPackage", &["name"])?;
    let mut builder = ModelBuilder::new(root.get("name").unwrap_or_default());

    for (c, class) in root.children.iter().enumerate() {
        let path = format!("/UMLPackage/{}[{c}]", class.tag);
        if class.tag != "class" {
            return Err(ReadError::schema(path, "expected <class>"));
        }
        check_attrs(class, &path, &["name", "parent"])?;
        let mut decl = ClassDecl::new(required(class, &path, "name")?);
        if let Some(parent) = class.get("parent") {
            decl = decl.parent(parent);
        }
        for (m, member) in class.children.iter().enumerate() {
            let path = format!("{path}/{}[{m}]", member.tag);
            match member.tag.as_str() {
                "attr" => {
                    check_attrs(member, &path, &["name", "type"])?;
                    decl = decl.attr(
                        required(member, &path, "name")?,
                        required(member, &path, "type")?,
                    );
                }
                "op" => {
                    check_attrs(member, &path, &["name", "stereotype"])?;
                    let mut op = Operation::new(required(member, &path, "name")?);
                    if let Some(st) = member.get("stereotype") {
                        op.stereotype = Some(
                            st.parse()
                                .map_err(|e| ReadError::schema(path.clone(), format!("{e}")))?,
                        );
                    }
                    decl = decl.op(op);
                }
                _ => return Err(ReadError::schema(path, "expected <attr> or <op>")),
            }
        }
        builder.push(decl);
    }

    builder.build().map_err(|e| match e {
        BuildError::UnresolvedParent { class, parent } => {
            ReadError::UnresolvedRef { class, parent }
        }
    })
}

fn required<'a>(el: &'a XmlElement, path: &str, key: &str) -> Result<&'a str, ReadError> {
    el.get(key)
        .ok_or_else(|| ReadError::schema(path, format!("missing attribute `{key}`")))
}

/// Namespace declarations and `xmi:*` attributes are tolerated anywhere.
fn check_attrs(el: &XmlElement, path: &str, allowed: &[&str]) -> Result<(), ReadError> {
    for (key, _) in &el.attrs {
        let ignorable = key.starts_with("xmlns") || key.starts_with("xmi:");
        if !ignorable && !allowed.contains(&key.as_str()) {
            return Err(ReadError::schema(
                path,
                format!("unexpected attribute `{key}`"),
            ));
        }
    }
    Ok(())
}

/// Serializes a source model in the form [`parse_pim_xmi`] reads.
pub fn write_pim_xmi(model: &UmlModel) -> XmiDocument {
    let mut root = XmlElement::new("uml:UMLPackage")
        .attr("xmlns:uml", UML_NS)
        .attr("name", model.name());
    for id in model.class_ids() {
        let class = model.classifier(id);
        let mut el = XmlElement::new("class").attr("name", &class.name);
        if let TypeRef::Classifier(parent) = class.opposite.ty {
            el = el.attr("parent", &model.classifier(parent).name);
        }
        for prop in &class.properties {
            el = el.child(
                XmlElement::new("attr")
                    .attr("name", &prop.name)
                    .attr("type", model.type_name(prop.ty).unwrap_or_default()),
            );
        }
        for op in &class.operations {
            el = el.child(
                XmlElement::new("op")
                    .attr("name", &op.name)
                    .opt_attr("stereotype", op.stereotype.map(|s| s.keyword())),
            );
        }
        root = root.child(el);
    }
    XmiDocument::new(root)
}
