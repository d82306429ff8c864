//! Textual class-diagram format (`.uml` files).
//!
//! ```text
//! package shop {
//!   class Customer { crud }
//!   class Order parent Customer {
//!     attr total : Float;
//!     <<retrieve>> op Retrieve;
//!     op Archive
//!   }
//! }
//! ```
//!
//! The `package` wrapper is optional; without it the package name is empty.
//! Semicolons after members are optional and `//` starts a line comment.
//! `crud` expands to Create, Delete, Retrieve and Update, in that order.

use std::collections::HashMap;

use crate::io::ReadError;
use crate::pim::{ClassDecl, ModelBuilder, Operation, Stereotype, UmlModel};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    Colon,
    Semi,
    StereoOpen,
    StereoClose,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::StereoOpen => "`<<`".into(),
            Tok::StereoClose => "`>>`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ReadError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, column };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        match c {
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            '/' => {
                bump(&mut chars);
                if chars.peek() != Some(&'/') {
                    return Err(parse_error(pos, "expected `//` comment"));
                }
                while chars.peek().is_some_and(|&c| c != '\n') {
                    bump(&mut chars);
                }
            }
            '{' | '}' | ':' | ';' => {
                bump(&mut chars);
                out.push((
                    match c {
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        ':' => Tok::Colon,
                        _ => Tok::Semi,
                    },
                    pos,
                ));
            }
            '<' | '>' => {
                bump(&mut chars);
                if chars.peek() != Some(&c) {
                    return Err(parse_error(pos, format!("expected `{c}{c}`")));
                }
                bump(&mut chars);
                out.push((
                    if c == '<' {
                        Tok::StereoOpen
                    } else {
                        Tok::StereoClose
                    },
                    pos,
                ));
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while chars
                    .peek()
                    .is_some_and(|&c| c.is_alphanumeric() || c == '_')
                {
                    ident.extend(bump(&mut chars));
                }
                out.push((Tok::Ident(ident), pos));
            }
            other => return Err(parse_error(pos, format!("unexpected character `{other}`"))),
        }
    }
    out.push((Tok::Eof, Pos { line, column }));
    Ok(out)
}

fn parse_error(pos: Pos, message: impl Into<String>) -> ReadError {
    ReadError::Parse {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let tok = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        tok
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect(&mut self, want: Tok) -> Result<(), ReadError> {
        let (tok, pos) = self.next();
        if tok == want {
            Ok(())
        } else {
            Err(parse_error(
                pos,
                format!("expected {}, found {}", want.describe(), tok.describe()),
            ))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ReadError> {
        self.expect(Tok::Ident(kw.to_owned()))
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), ReadError> {
        match self.next() {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (tok, pos) => Err(parse_error(
                pos,
                format!("expected {what}, found {}", tok.describe()),
            )),
        }
    }

    fn optional_semi(&mut self) {
        if *self.peek() == Tok::Semi {
            self.next();
        }
    }
}

struct Declared {
    decl: ClassDecl,
    pos: Pos,
    parent_pos: Option<Pos>,
}

pub fn parse_pim_dsl(text: &str) -> Result<UmlModel, ReadError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let mut classes = Vec::new();
    let mut package = String::new();

    if p.is_keyword("package") {
        p.next();
        package = p.ident("package name")?.0;
        p.expect(Tok::LBrace)?;
        while *p.peek() != Tok::RBrace {
            classes.push(class_decl(&mut p)?);
        }
        p.expect(Tok::RBrace)?;
    } else {
        while *p.peek() != Tok::Eof {
            classes.push(class_decl(&mut p)?);
        }
    }
    p.expect(Tok::Eof)?;

    let mut seen: HashMap<&str, ()> = HashMap::new();
    for c in &classes {
        if seen.insert(c.decl.name.as_str(), ()).is_some() {
            return Err(ReadError::DuplicateClass {
                name: c.decl.name.clone(),
                line: c.pos.line,
                column: c.pos.column,
            });
        }
    }
    for c in &classes {
        if let (Some(parent), Some(pos)) = (&c.decl.parent, c.parent_pos) {
            if !seen.contains_key(parent.as_str()) {
                return Err(ReadError::UnknownParent {
                    class: c.decl.name.clone(),
                    parent: parent.clone(),
                    line: pos.line,
                    column: pos.column,
                });
            }
        }
    }

    let mut builder = ModelBuilder::new(package);
    for c in classes {
        builder.push(c.decl);
    }
    Ok(builder
        .build()
        .expect("parents were checked against declared classes"))
}

fn class_decl(p: &mut Parser) -> Result<Declared, ReadError> {
    if !p.is_keyword("class") {
        let (tok, pos) = p.next();
        return Err(parse_error(
            pos,
            format!("expected `class`, found {}", tok.describe()),
        ));
    }
    p.next();
    let (name, pos) = p.ident("class name")?;
    let mut decl = ClassDecl::new(name);
    let mut parent_pos = None;
    if p.is_keyword("parent") {
        p.next();
        let (parent, at) = p.ident("parent class name")?;
        decl = decl.parent(parent);
        parent_pos = Some(at);
    }
    p.expect(Tok::LBrace)?;
    loop {
        match p.peek().clone() {
            Tok::RBrace => break,
            Tok::Ident(kw) if kw == "crud" => {
                p.next();
                decl = decl.crud();
            }
            Tok::Ident(kw) if kw == "attr" => {
                p.next();
                let (attr, _) = p.ident("attribute name")?;
                p.expect(Tok::Colon)?;
                let (ty, _) = p.ident("attribute type")?;
                decl = decl.attr(attr, ty);
            }
            Tok::Ident(kw) if kw == "op" => {
                p.next();
                decl = decl.op(Operation::new(p.ident("operation name")?.0));
            }
            Tok::StereoOpen => {
                p.next();
                let (stereo, at) = p.ident("stereotype")?;
                let stereotype: Stereotype = stereo
                    .parse()
                    .map_err(|e| parse_error(at, format!("{e}")))?;
                p.expect(Tok::StereoClose)?;
                p.keyword("op")?;
                let (op, _) = p.ident("operation name")?;
                decl = decl.op(Operation {
                    name: op,
                    stereotype: Some(stereotype),
                });
            }
            other => {
                return Err(parse_error(
                    p.pos(),
                    format!("expected a class member, found {}", other.describe()),
                ))
            }
        }
        p.optional_semi();
    }
    p.expect(Tok::RBrace)?;
    Ok(Declared {
        decl,
        pos,
        parent_pos,
    })
}
