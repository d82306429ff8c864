use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mvc2gen_core::codegen::{generate, DEFAULT_PACKAGE};
use mvc2gen_core::io::{
    diff_psm, parse_pim_dsl, parse_pim_xmi, parse_psm_xmi, read_psm_xmi_unchecked, write_psm_xmi,
    XmiDocument,
};
use mvc2gen_core::{transform, validate_pim, validate_psm, StrutsModel, TransformError, UmlModel};

/// Transforms UML CRUD class diagrams into Struts MVC 2 controller models.
#[derive(Parser)]
#[command(name = "mvc2gen", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transform a class diagram into a Struts model document.
    Transform {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Input format; guessed from the file extension when omitted.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Check a class diagram or a Struts model document.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Compare two Struts model documents.
    Diff { expected: PathBuf, actual: PathBuf },
    /// Generate struts-config.xml and stub sources.
    Codegen {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = DEFAULT_PACKAGE)]
        package: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Uml,
    Xmi,
}

/// Exit statuses: 1 for invalid models and differences, 2 for unreadable
/// input, 3 for file-system errors.
struct Failure {
    status: u8,
    lines: Vec<String>,
    /// Findings about the models rather than errors; printed to stdout.
    report: bool,
}

impl Failure {
    fn new(status: u8, message: impl Display) -> Self {
        Failure {
            status,
            lines: vec![message.to_string()],
            report: false,
        }
    }

    fn io(path: &Path, err: impl Display) -> Self {
        Failure::new(3, format!("{}: {err}", path.display()))
    }

    fn report(lines: Vec<String>) -> Self {
        Failure {
            status: 1,
            lines,
            report: true,
        }
    }

    fn parse(path: &Path, err: impl Display) -> Self {
        Failure::new(2, format!("{}: {err}", path.display()))
    }
}

enum Input {
    Pim(UmlModel),
    Psm(StrutsModel),
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn guess_format(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some("uml") => Format::Uml,
        _ => Format::Xmi,
    }
}

fn read_pim(path: &Path, format: Format) -> Result<UmlModel, Failure> {
    let text = read(path)?;
    match format {
        Format::Uml => parse_pim_dsl(&text).map_err(|e| Failure::parse(path, e)),
        Format::Xmi => XmiDocument::parse(&text)
            .map_err(|e| Failure::parse(path, e))
            .and_then(|doc| parse_pim_xmi(&doc).map_err(|e| Failure::parse(path, e))),
    }
}

/// Reads either model kind. PSM forwards are kept even when dangling so that
/// validation can report them.
fn read_any(path: &Path) -> Result<Input, Failure> {
    if guess_format(path) == Format::Uml {
        return read_pim(path, Format::Uml).map(Input::Pim);
    }
    let doc = XmiDocument::parse(&read(path)?).map_err(|e| Failure::parse(path, e))?;
    if doc.root.local_name() == "UMLPackage" {
        parse_pim_xmi(&doc).map(Input::Pim)
    } else {
        read_psm_xmi_unchecked(&doc).map(Input::Psm)
    }
    .map_err(|e| Failure::parse(path, e))
}

fn read_psm(path: &Path) -> Result<StrutsModel, Failure> {
    let doc = XmiDocument::parse(&read(path)?).map_err(|e| Failure::parse(path, e))?;
    parse_psm_xmi(&doc).map_err(|e| Failure::parse(path, e))
}

fn run_transform(pim: &UmlModel) -> Result<StrutsModel, Failure> {
    transform(pim).map_err(|e| match e {
        TransformError::InvalidInput(violations) => Failure {
            lines: violations.iter().map(ToString::to_string).collect(),
            ..Failure::new(1, "")
        },
        other => Failure::new(1, format!("{}: {other}", other.code())),
    })
}

fn summary(model: &StrutsModel) -> String {
    format!(
        "views={} actions={} forms={}",
        model.views.views.len(),
        model.actions.actions.len(),
        model.forms.forms.len()
    )
}

fn run(cli: Cli) -> Result<Vec<String>, Failure> {
    match cli.command {
        Command::Transform { input, out, format } => {
            let pim = read_pim(&input, format.unwrap_or_else(|| guess_format(&input)))?;
            let psm = run_transform(&pim)?;
            let doc = write_psm_xmi(&psm).map_err(|e| Failure::new(1, e))?;
            fs::write(&out, doc.to_string()).map_err(|e| Failure::io(&out, e))?;
            Ok(vec![summary(&psm)])
        }
        Command::Validate { input } => {
            let lines: Vec<String> = match read_any(&input)? {
                Input::Pim(m) => validate_pim(&m).iter().map(ToString::to_string).collect(),
                Input::Psm(m) => validate_psm(&m).iter().map(ToString::to_string).collect(),
            };
            if lines.is_empty() {
                Ok(vec!["OK".into()])
            } else {
                Err(Failure::report(lines))
            }
        }
        Command::Diff { expected, actual } => {
            let d = diff_psm(&read_psm(&expected)?, &read_psm(&actual)?);
            if d.is_empty() {
                Ok(vec![])
            } else {
                Err(Failure::report(
                    d.differences.iter().map(ToString::to_string).collect(),
                ))
            }
        }
        Command::Codegen {
            input,
            out,
            package,
        } => {
            let psm = match read_any(&input)? {
                Input::Pim(m) => run_transform(&m)?,
                Input::Psm(m) => m,
            };
            let files = generate(&psm, &package).map_err(|e| Failure::new(1, e))?;
            files.write_to(&out).map_err(|e| Failure::io(&out, e))?;
            Ok(vec![format!(
                "{} files written to {}",
                files.len(),
                out.display()
            )])
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            for line in failure.lines {
                if failure.report {
                    println!("{line}");
                } else {
                    eprintln!("{line}");
                }
            }
            ExitCode::from(failure.status)
        }
    }
}
