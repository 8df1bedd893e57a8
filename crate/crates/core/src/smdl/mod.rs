//! SMDL: a plain-text format for state machine models.
//!
//! ```text
//! machine CDPlayer {
//!   var track : int = 0;
//!
//!   state Busy initial history entry FTS { track := 1 } {
//!     state Playing initial do spin;
//!     final;
//!   };
//!
//!   trans finish : Playing -> Busy.final if (track >= 3);
//! }
//! ```
//!
//! `-> X.H` targets the shallow history of composite `X`, `-> X.final` its
//! final state and `-> final` the final state of the root region.
//! Comments run from `#` to end of line.

mod lexer;
mod parser;
mod printer;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use lexer::Pos;
pub use printer::print;

use crate::smd::{validate, ElementRef, Issue, Machine, StateMachine};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}{}", expected_suffix(.expected))]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}

/// A validation issue located in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub pos: Pos,
    pub issue: Issue,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.issue)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmdlError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("invalid model:\n{}", render(.0))]
    Invalid(Vec<Diagnostic>),
}

fn render(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// A parsed model together with the source position of each named element.
#[derive(Debug, Clone)]
pub struct SmdlDocument {
    pub model: StateMachine,
    spans: HashMap<ElementRef, Pos>,
}

impl SmdlDocument {
    pub fn position(&self, element: &ElementRef) -> Pos {
        self.spans
            .get(element)
            .or_else(|| self.spans.get(&ElementRef::Machine))
            .copied()
            .unwrap_or(Pos { line: 1, column: 1 })
    }

    /// Validation issues of the model, each located in the source.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        validate(&self.model)
            .issues
            .into_iter()
            .map(|issue| Diagnostic {
                pos: self.position(&issue.element),
                issue,
            })
            .collect()
    }
}

pub fn parse_document(text: &str) -> Result<SmdlDocument, SyntaxError> {
    parser::parse_document(text)
}

/// Parses SMDL text into a (not yet validated) model.
pub fn parse(text: &str) -> Result<StateMachine, SyntaxError> {
    parse_document(text).map(|d| d.model)
}

/// Parses and validates.
pub fn load(text: &str) -> Result<Machine, SmdlError> {
    let doc = parse_document(text)?;
    let diags = doc.diagnostics();
    if !diags.is_empty() {
        return Err(SmdlError::Invalid(diags));
    }
    Ok(Machine::new(doc.model).expect("diagnostics were empty"))
}
