//! Surface language: lexing, parsing, printing and desugaring.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod desugar;

pub use ast::{Def, EffExpr, EffTerm, Expr, ExprKind, Param, Program, Span, Stmt, TyExpr, TyKind};
pub use parser::{parse_effect, parse_expr, parse_program, parse_type, ParseError, SyntaxError};
