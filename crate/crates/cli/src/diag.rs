//! Diagnostics, exit codes and the structured output document.

use std::fmt;

use gsens_core::eval::RuntimeError;
use gsens_core::session::GsError;
use gsens_core::syntax::Span;
use serde_json::{json, Value as Json};

/// Version of the `--json` document layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Type = 1,
    Violation = 2,
    Runtime = 3,
    Parse = 4,
    Io = 5,
}

impl Exit {
    pub fn of(e: &GsError) -> Exit {
        match e {
            GsError::Syntax(_) => Exit::Parse,
            GsError::Desugar(_) | GsError::Type(_) => Exit::Type,
            GsError::Runtime(RuntimeError::SensitivityViolation { .. }) => Exit::Violation,
            GsError::Runtime(_) => Exit::Runtime,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub file: String,
    pub line: usize,
    pub col: usize,
    pub code: &'static str,
    pub message: String,
}

pub fn runtime_code(e: &RuntimeError) -> &'static str {
    match e {
        RuntimeError::SensitivityViolation { .. } => "R001",
        RuntimeError::DivisionByZero { .. } => "R002",
        RuntimeError::UserError { .. } => "R003",
        RuntimeError::BudgetExhausted { .. } => "R004",
        RuntimeError::Stuck { .. } => "R005",
    }
}

impl Diagnostic {
    pub fn new(file: &str, src: &str, span: Option<Span>, code: &'static str, message: String) -> Diagnostic {
        let (line, col) = span.map_or((0, 0), |s| s.line_col(src));
        Diagnostic { file: file.to_string(), line, col, code, message }
    }

    pub fn from_error(file: &str, src: &str, e: &GsError) -> Diagnostic {
        let code = match e {
            GsError::Syntax(_) => "P001",
            GsError::Desugar(_) => "E004",
            GsError::Type(t) => t.code.code(),
            GsError::Runtime(r) => runtime_code(r),
        };
        let mut message = e.to_string();
        if let GsError::Type(t) = e {
            if let (Some(found), Some(expected)) = (&t.found, &t.expected) {
                message = format!("{} (found `{}`, expected `{}`)", message, found, expected);
            }
        }
        Diagnostic::new(file, src, e.span(), code, message)
    }

    pub fn io(file: &str, e: &std::io::Error) -> Diagnostic {
        Diagnostic { file: file.to_string(), line: 0, col: 0, code: "IO01", message: e.to_string() }
    }

    pub fn to_json(&self) -> Json {
        json!({
            "severity": "error",
            "file": self.file,
            "line": self.line,
            "col": self.col,
            "code": self.code,
            "message": self.message,
        })
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error {}:{}:{} {} {}", self.file, self.line, self.col, self.code, self.message)
    }
}

/// One invocation's result, printed either as text or as one JSON document.
pub struct Outcome {
    pub command: &'static str,
    pub exit: Exit,
    pub diagnostics: Vec<Diagnostic>,
    /// Human-readable lines for stdout.
    pub lines: Vec<String>,
    /// Command-specific fields merged into the JSON document.
    pub fields: serde_json::Map<String, Json>,
}

impl Outcome {
    pub fn new(command: &'static str) -> Outcome {
        Outcome { command, exit: Exit::Ok, diagnostics: Vec::new(), lines: Vec::new(), fields: Default::default() }
    }

    pub fn fail(mut self, exit: Exit, d: Diagnostic) -> Outcome {
        self.exit = exit;
        self.diagnostics.push(d);
        self
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    pub fn field(&mut self, k: &str, v: impl Into<Json>) {
        self.fields.insert(k.to_string(), v.into());
    }

    pub fn emit(self, as_json: bool) -> i32 {
        if as_json {
            let mut doc = serde_json::Map::new();
            doc.insert("schema".into(), json!(SCHEMA_VERSION));
            doc.insert("command".into(), json!(self.command));
            doc.insert("exit_code".into(), json!(self.exit as i32));
            doc.insert("diagnostics".into(), Json::Array(self.diagnostics.iter().map(Diagnostic::to_json).collect()));
            for key in ["value", "monitored_effect"] {
                doc.insert(key.into(), Json::Null);
            }
            doc.extend(self.fields);
            println!("{}", Json::Object(doc));
        } else {
            for l in &self.lines {
                println!("{}", l);
            }
            for d in &self.diagnostics {
                eprintln!("{}", d);
            }
        }
        self.exit as i32
    }
}
