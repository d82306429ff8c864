//! Source (platform-independent) meta-model: a single UML package of
//! classifiers carrying CRUD operations, linked into master–detail chains
//! through a mandatory `opposite` association end.
//!
//! A classifier whose opposite end is typed by the reserved `Void` data type
//! is a root of its chain. Every other classifier points at its parent.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Name of the built-in data type that marks a root classifier.
pub const VOID: &str = "Void";

/// Name given to the synthesized opposite association end.
pub const OPPOSITE_END: &str = "opposite";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DataTypeId(pub usize);

/// Addresses an operation by its owning classifier and declaration index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpId {
    pub class: ClassId,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TypeRef {
    Classifier(ClassId),
    DataType(DataTypeId),
}

/// CRUD stereotypes from the profile vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stereotype {
    Create,
    Retrieve,
    Update,
    Delete,
}

impl Stereotype {
    pub const ALL: [Stereotype; 4] = [
        Stereotype::Create,
        Stereotype::Retrieve,
        Stereotype::Update,
        Stereotype::Delete,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Stereotype::Create => "Create",
            Stereotype::Retrieve => "Retrieve",
            Stereotype::Update => "Update",
            Stereotype::Delete => "Delete",
        }
    }
}

impl fmt::Display for Stereotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown stereotype `{0}`")]
pub struct UnknownStereotype(pub String);

impl FromStr for Stereotype {
    type Err = UnknownStereotype;

    /// Case-insensitive, so `<<retrieve>>` and `Retrieve` both parse.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stereotype::ALL
            .into_iter()
            .find(|st| st.keyword().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownStereotype(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Property {
    pub name: String,
    pub ty: TypeRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    pub name: String,
    pub stereotype: Option<Stereotype>,
}

impl Operation {
    pub fn new(name: impl Into<String>) -> Self {
        Operation {
            name: name.into(),
            stereotype: None,
        }
    }

    /// An operation named after, and tagged with, a CRUD stereotype.
    pub fn crud(stereotype: Stereotype) -> Self {
        Operation {
            name: stereotype.keyword().to_owned(),
            stereotype: Some(stereotype),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classifier {
    pub name: String,
    pub properties: Vec<Property>,
    pub operations: Vec<Operation>,
    pub opposite: Property,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataType {
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UmlPackage {
    pub name: String,
    pub classifiers: Vec<Classifier>,
    pub datatypes: Vec<DataType>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UmlModel {
    pub package: UmlPackage,
}

impl UmlModel {
    /// An empty model whose package already declares `Void`.
    pub fn new(package_name: impl Into<String>) -> Self {
        UmlModel {
            package: UmlPackage {
                name: package_name.into(),
                classifiers: Vec::new(),
                datatypes: vec![DataType {
                    name: VOID.to_owned(),
                }],
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.package.name
    }

    pub fn classifier(&self, id: ClassId) -> &Classifier {
        &self.package.classifiers[id.0]
    }

    pub fn datatype(&self, id: DataTypeId) -> &DataType {
        &self.package.datatypes[id.0]
    }

    pub fn operation(&self, id: OpId) -> &Operation {
        &self.classifier(id.class).operations[id.index]
    }

    pub fn class_ids(&self) -> impl Iterator<Item = ClassId> + '_ {
        (0..self.package.classifiers.len()).map(ClassId)
    }

    /// Every operation in declaration order: classifiers first, then
    /// operations within each classifier.
    pub fn op_ids(&self) -> impl Iterator<Item = OpId> + '_ {
        self.package
            .classifiers
            .iter()
            .enumerate()
            .flat_map(|(c, class)| {
                (0..class.operations.len()).map(move |index| OpId {
                    class: ClassId(c),
                    index,
                })
            })
    }

    pub fn class_by_name(&self, name: &str) -> Option<ClassId> {
        self.package
            .classifiers
            .iter()
            .position(|c| c.name == name)
            .map(ClassId)
    }

    pub fn datatype_by_name(&self, name: &str) -> Option<DataTypeId> {
        self.package
            .datatypes
            .iter()
            .position(|d| d.name == name)
            .map(DataTypeId)
    }

    /// Name of the element a type reference points at, if it resolves.
    pub fn type_name(&self, ty: TypeRef) -> Option<&str> {
        match ty {
            TypeRef::Classifier(id) => self.package.classifiers.get(id.0).map(|c| c.name.as_str()),
            TypeRef::DataType(id) => self.package.datatypes.get(id.0).map(|d| d.name.as_str()),
        }
    }

    /// Parent classifier in the master–detail chain, `None` for roots.
    pub fn parent(&self, id: ClassId) -> Option<ClassId> {
        match self.classifier(id).opposite.ty {
            TypeRef::Classifier(p) => Some(p),
            TypeRef::DataType(_) => None,
        }
    }

    pub fn is_root(&self, id: ClassId) -> bool {
        self.opposite_type_name(id) == VOID
    }

    /// Name of the type at the far side of the classifier's opposite end.
    /// `"Void"` exactly for roots.
    pub fn opposite_type_name(&self, id: ClassId) -> &str {
        self.type_name(self.classifier(id).opposite.ty)
            .unwrap_or("")
    }

    /// All operations of all classifiers ordered by operation name, then
    /// classifier declaration index, then operation declaration index.
    pub fn all_method_defs(&self) -> Vec<OpId> {
        let mut ops: Vec<OpId> = self.op_ids().collect();
        ops.sort_by(|a, b| {
            self.operation(*a)
                .name
                .cmp(&self.operation(*b).name)
                .then(a.class.cmp(&b.class))
                .then(a.index.cmp(&b.index))
        });
        ops
    }

    /// The sibling operation of `op`'s owner with the given name.
    pub fn sibling_named(&self, op: OpId, name: &str) -> Option<OpId> {
        self.classifier(op.class)
            .operations
            .iter()
            .position(|o| o.name == name)
            .map(|index| OpId {
                class: op.class,
                index,
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationCode {
    EmptyName,
    ReservedName,
    DuplicateClassifier,
    DuplicateOperation,
    StereotypeMismatch,
    DanglingType,
    BadOpposite,
    Cycle,
    MissingVoid,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::EmptyName => "empty-name",
            ViolationCode::ReservedName => "reserved-name",
            ViolationCode::DuplicateClassifier => "duplicate-classifier",
            ViolationCode::DuplicateOperation => "duplicate-operation",
            ViolationCode::StereotypeMismatch => "stereotype-mismatch",
            ViolationCode::DanglingType => "dangling-type",
            ViolationCode::BadOpposite => "bad-opposite",
            ViolationCode::Cycle => "cycle",
            ViolationCode::MissingVoid => "missing-void",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub code: ViolationCode,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.path, self.code, self.message)
    }
}

/// Checks well-formedness of a source model. An empty result means valid.
pub fn validate_pim(model: &UmlModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |path: String, code: ViolationCode, message: String| {
        out.push(Violation {
            path,
            code,
            message,
        })
    };

    let void = model.datatype_by_name(VOID);
    if void.is_none() {
        push(
            "/".into(),
            ViolationCode::MissingVoid,
            "package does not declare the Void data type".into(),
        );
    }

    let mut seen = HashSet::new();
    for (c, class) in model.package.classifiers.iter().enumerate() {
        let path = format!("/{}", class.name);
        if class.name.is_empty() {
            push(
                format!("/@classifiers.{c}"),
                ViolationCode::EmptyName,
                "classifier has no name".into(),
            );
        } else if class.name == VOID {
            push(
                path.clone(),
                ViolationCode::ReservedName,
                "`Void` is reserved for the root marker".into(),
            );
        }
        if !class.name.is_empty() && !seen.insert(class.name.as_str()) {
            push(
                path.clone(),
                ViolationCode::DuplicateClassifier,
                format!("classifier `{}` declared more than once", class.name),
            );
        }

        for (p, prop) in class.properties.iter().enumerate() {
            if model.type_name(prop.ty).is_none() {
                push(
                    format!("{path}/@properties.{p}"),
                    ViolationCode::DanglingType,
                    format!("property `{}` has an unresolved type", prop.name),
                );
            }
        }

        match class.opposite.ty {
            TypeRef::DataType(d) if Some(d) != void => push(
                format!("{path}/@opposite"),
                ViolationCode::BadOpposite,
                "opposite end must target a classifier or Void".into(),
            ),
            ty if model.type_name(ty).is_none() => push(
                format!("{path}/@opposite"),
                ViolationCode::DanglingType,
                "opposite end has an unresolved type".into(),
            ),
            _ => {}
        }

        let mut op_names = HashSet::new();
        for (o, op) in class.operations.iter().enumerate() {
            let op_path = format!("{path}/@operations.{o}");
            if op.name.is_empty() {
                push(
                    op_path.clone(),
                    ViolationCode::EmptyName,
                    "operation has no name".into(),
                );
            }
            if !op_names.insert(op.name.as_str()) {
                push(
                    op_path.clone(),
                    ViolationCode::DuplicateOperation,
                    format!("operation `{}` declared twice on `{}`", op.name, class.name),
                );
            }
            if let Some(st) = op.stereotype {
                if op.name != st.keyword() {
                    push(
                        op_path,
                        ViolationCode::StereotypeMismatch,
                        format!("operation `{}` carries stereotype <<{}>>", op.name, st),
                    );
                }
            }
        }
    }

    for id in model.class_ids() {
        if on_cycle(model, id) {
            push(
                format!("/{}", model.classifier(id).name),
                ViolationCode::Cycle,
                "parent chain loops back to this classifier".into(),
            );
        }
    }
    out
}

fn on_cycle(model: &UmlModel, start: ClassId) -> bool {
    let n = model.package.classifiers.len();
    let mut cur = start;
    for _ in 0..n {
        match model.classifier(cur).opposite.ty {
            TypeRef::Classifier(p) if p.0 < n => {
                if p == start {
                    return true;
                }
                cur = p;
            }
            _ => return false,
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("class `{class}` names unknown parent `{parent}`")]
    UnresolvedParent { class: String, parent: String },
}

/// Declaration of one classifier for [`ModelBuilder`]. Parents and
/// attribute types are given by name and resolved at build time.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    pub parent: Option<String>,
    pub attrs: Vec<(String, String)>,
    pub ops: Vec<Operation>,
}

impl ClassDecl {
    pub fn new(name: impl Into<String>) -> Self {
        ClassDecl {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn parent(mut self, parent: impl Into<String>) -> Self {
        self.parent = Some(parent.into());
        self
    }

    pub fn attr(mut self, name: impl Into<String>, ty: impl Into<String>) -> Self {
        self.attrs.push((name.into(), ty.into()));
        self
    }

    pub fn op(mut self, op: Operation) -> Self {
        self.ops.push(op);
        self
    }

    /// Create, Delete, Retrieve, Update, in that order.
    pub fn crud(mut self) -> Self {
        for st in [
            Stereotype::Create,
            Stereotype::Delete,
            Stereotype::Retrieve,
            Stereotype::Update,
        ] {
            self.ops.push(Operation::crud(st));
        }
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct ModelBuilder {
    name: String,
    classes: Vec<ClassDecl>,
}

impl ModelBuilder {
    pub fn new(package_name: impl Into<String>) -> Self {
        ModelBuilder {
            name: package_name.into(),
            classes: Vec::new(),
        }
    }

    pub fn class(mut self, decl: ClassDecl) -> Self {
        self.classes.push(decl);
        self
    }

    pub fn push(&mut self, decl: ClassDecl) {
        self.classes.push(decl);
    }

    /// Resolves names and produces the model. Duplicate class names and
    /// cycles are left for [`validate_pim`] to report; name lookups pick the
    /// first declaration. Attribute types that name no classifier become
    /// data types of the package.
    pub fn build(self) -> Result<UmlModel, BuildError> {
        let mut model = UmlModel::new(self.name);
        let mut index: HashMap<&str, ClassId> = HashMap::new();
        for (i, decl) in self.classes.iter().enumerate() {
            index.entry(decl.name.as_str()).or_insert(ClassId(i));
        }
        let void = TypeRef::DataType(DataTypeId(0));

        let mut classifiers = Vec::with_capacity(self.classes.len());
        for decl in &self.classes {
            let opposite_ty = match &decl.parent {
                None => void,
                Some(parent) => match index.get(parent.as_str()) {
                    Some(&id) => TypeRef::Classifier(id),
                    None => {
                        return Err(BuildError::UnresolvedParent {
                            class: decl.name.clone(),
                            parent: parent.clone(),
                        })
                    }
                },
            };
            let mut properties = Vec::with_capacity(decl.attrs.len());
            for (name, ty) in &decl.attrs {
                let ty = match index.get(ty.as_str()) {
                    Some(&id) => TypeRef::Classifier(id),
                    None => TypeRef::DataType(intern_datatype(&mut model, ty)),
                };
                properties.push(Property {
                    name: name.clone(),
                    ty,
                });
            }
            classifiers.push(Classifier {
                name: decl.name.clone(),
                properties,
                operations: decl.ops.clone(),
                opposite: Property {
                    name: OPPOSITE_END.to_owned(),
                    ty: opposite_ty,
                },
            });
        }
        model.package.classifiers = classifiers;
        Ok(model)
    }
}

fn intern_datatype(model: &mut UmlModel, name: &str) -> DataTypeId {
    if let Some(id) = model.datatype_by_name(name) {
        return id;
    }
    model.package.datatypes.push(DataType {
        name: name.to_owned(),
    });
    DataTypeId(model.package.datatypes.len() - 1)
}

/// A single master–detail chain where every class carries full CRUD:
/// `names[0]` is the root and each later class is the child of the one
/// before it.
pub fn crud_chain(package: &str, names: &[&str]) -> UmlModel {
    let mut builder = ModelBuilder::new(package);
    for (i, name) in names.iter().enumerate() {
        let mut decl = ClassDecl::new(*name).crud();
        if i > 0 {
            decl = decl.parent(names[i - 1]);
        }
        builder.push(decl);
    }
    builder
        .build()
        .expect("chain parents are declared in order")
}
