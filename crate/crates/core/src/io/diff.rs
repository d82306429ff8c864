//! Structural comparison of two PSMs, reported by fragment path.
//!
//! Each container is compared position by position. When both sides hold
//! the same elements in a different order, a single `order` difference is
//! reported for the container instead of one mismatch per slot.

use std::fmt;

use crate::psm::{Action, StrutsModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiffKind {
    Missing,
    Extra,
    AttrMismatch,
    Order,
}

impl DiffKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DiffKind::Missing => "missing",
            DiffKind::Extra => "extra",
            DiffKind::AttrMismatch => "attr-mismatch",
            DiffKind::Order => "order",
        }
    }
}

impl fmt::Display for DiffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Difference {
    pub path: String,
    pub kind: DiffKind,
    pub expected: Option<String>,
    pub actual: Option<String>,
}

impl fmt::Display for Difference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} expected={} actual={}",
            self.path,
            self.kind,
            self.expected.as_deref().unwrap_or("-"),
            self.actual.as_deref().unwrap_or("-")
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelDiff {
    pub differences: Vec<Difference>,
}

impl ModelDiff {
    pub fn is_empty(&self) -> bool {
        self.differences.is_empty()
    }

    pub fn len(&self) -> usize {
        self.differences.len()
    }
}

impl fmt::Display for ModelDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.differences {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Attribute list of an element, in serialization order.
type Attrs = Vec<(&'static str, Option<String>)>;

fn render(attrs: &Attrs) -> String {
    attrs
        .iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| format!("{k}=\"{v}\"")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn action_attrs(action: &Action) -> Attrs {
    vec![
        ("path", Some(action.path.clone())),
        ("name", action.name.clone()),
        ("type", Some(action.type_name.clone())),
        ("input", action.input.clone()),
    ]
}

struct Differ {
    out: Vec<Difference>,
}

impl Differ {
    fn push(
        &mut self,
        path: String,
        kind: DiffKind,
        expected: Option<String>,
        actual: Option<String>,
    ) {
        self.out.push(Difference {
            path,
            kind,
            expected,
            actual,
        });
    }

    fn attrs(&mut self, path: &str, expected: &Attrs, actual: &Attrs) {
        for ((key, e), (_, a)) in expected.iter().zip(actual) {
            if e != a {
                let show = |v: &Option<String>| v.as_ref().map(|v| format!("{key}=\"{v}\""));
                self.push(path.to_owned(), DiffKind::AttrMismatch, show(e), show(a));
            }
        }
    }

    /// Compares two ordered lists. `key` identifies an element for order
    /// detection, `each` compares one aligned pair.
    fn list<T>(
        &mut self,
        prefix: &str,
        expected: &[T],
        actual: &[T],
        key: impl Fn(&T) -> String,
        mut each: impl FnMut(&mut Self, &str, &T, &T),
    ) where
        T: PartialEq,
    {
        let ek: Vec<String> = expected.iter().map(&key).collect();
        let ak: Vec<String> = actual.iter().map(&key).collect();
        if ek != ak && ek.len() == ak.len() {
            let (mut es, mut as_) = (ek.clone(), ak.clone());
            es.sort();
            as_.sort();
            if es == as_ {
                self.push(
                    prefix.to_owned(),
                    DiffKind::Order,
                    Some(ek.join(",")),
                    Some(ak.join(",")),
                );
                return;
            }
        }
        for (i, (e, a)) in expected.iter().zip(actual).enumerate() {
            each(self, &format!("{prefix}.{i}"), e, a);
        }
        for (i, e) in expected.iter().enumerate().skip(actual.len()) {
            self.push(
                format!("{prefix}.{i}"),
                DiffKind::Missing,
                Some(key(e)),
                None,
            );
        }
        for (i, a) in actual.iter().enumerate().skip(expected.len()) {
            self.push(format!("{prefix}.{i}"), DiffKind::Extra, None, Some(key(a)));
        }
    }
}

/// Differences needed to turn `expected` into `actual`; empty iff the two
/// models are structurally identical.
pub fn diff_psm(expected: &StrutsModel, actual: &StrutsModel) -> ModelDiff {
    let mut d = Differ { out: Vec::new() };

    d.attrs(
        "/0",
        &vec![("name", expected.views.name.clone())],
        &vec![("name", actual.views.name.clone())],
    );
    d.list(
        "/0/@view",
        &expected.views.views,
        &actual.views.views,
        |p| p.name.clone(),
        |d, path, e, a| {
            d.attrs(
                path,
                &vec![("name", Some(e.name.clone()))],
                &vec![("name", Some(a.name.clone()))],
            )
        },
    );

    let action_key = |a: &Action| render(&action_attrs(a));
    d.list(
        "/1/@action",
        &expected.actions.actions,
        &actual.actions.actions,
        action_key,
        |d, path, e, a| {
            d.attrs(path, &action_attrs(e), &action_attrs(a));
            let fwd_attrs = |f: &crate::psm::ActionForward| -> Attrs {
                vec![
                    ("name", Some(f.name.clone())),
                    ("path", Some(format!("/0/@view.{}", f.target))),
                ]
            };
            d.list(
                &format!("{path}/@forward"),
                &e.forwards,
                &a.forwards,
                |f| format!("{}->{}", f.name, f.target),
                |d, path, fe, fa| d.attrs(path, &fwd_attrs(fe), &fwd_attrs(fa)),
            );
        },
    );

    d.list(
        "/2/@form",
        &expected.forms.forms,
        &actual.forms.forms,
        |f| f.name.clone(),
        |d, path, e, a| {
            d.attrs(
                path,
                &vec![("name", Some(e.name.clone()))],
                &vec![("name", Some(a.name.clone()))],
            )
        },
    );

    ModelDiff { differences: d.out }
}
