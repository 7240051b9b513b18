//! Line-oriented interactive session.

use std::io::{self, BufRead, IsTerminal, Write};

use gsens_core::eval::msens;
use gsens_core::session::{GsError, ItemResult, Session};
use gsens_core::syntax::{parse_program, SyntaxError};

use crate::diag::Diagnostic;

const HELP: &str = ":type e   show the type of e\n:trace e  evaluate e, printing each step\n:quit     leave";

/// Does the error sit at the end of the input, so more lines may fix it?
fn incomplete(src: &str, e: &SyntaxError) -> bool {
    e.span().lo as usize >= src.trim_end().len()
}

fn show(it: &ItemResult) -> String {
    match it {
        ItemResult::Bound { name, ty, value: Some(v) } if v.ty.is_base() => format!("{} : {} = {}", name, ty, v.u),
        ItemResult::Bound { name, ty, .. } => format!("{} : {}", name, ty),
        ItemResult::Value { ty, value: Some(v) } => format!("{} : {}  (monitored: {})", v.u, ty, msens(&v.ev)),
        ItemResult::Value { ty, value: None } => format!("- : {}", ty),
    }
}

fn report(out: &mut impl Write, src: &str, e: &GsError) -> io::Result<()> {
    writeln!(out, "{}", Diagnostic::from_error("<repl>", src, e))
}

fn run(session: &mut Session, out: &mut impl Write, src: &str) -> io::Result<()> {
    match session.run_source(src) {
        Ok(items) => {
            for it in &items {
                writeln!(out, "{}", show(it))?;
            }
            Ok(())
        }
        Err(e) => report(out, src, &e),
    }
}

/// Reads from `input` until end of file or `:quit`, writing results and
/// diagnostics to `out`. Errors never end the session.
pub fn repl(input: impl BufRead, out: &mut impl Write, seed: u64, step_budget: u64, prompt: bool) -> io::Result<()> {
    let mut session = Session::new().with_seed(seed).with_budget(step_budget);
    let mut pending = String::new();
    let mut lines = input.lines();
    loop {
        if prompt {
            write!(out, "{}", if pending.is_empty() { "gs> " } else { "... " })?;
            out.flush()?;
        }
        let Some(line) = lines.next() else { break };
        let line = line?;
        let trimmed = line.trim();
        if pending.is_empty() {
            if trimmed.is_empty() {
                continue;
            }
            if let Some(cmd) = trimmed.strip_prefix(':') {
                let (name, arg) = cmd.split_once(char::is_whitespace).unwrap_or((cmd, ""));
                match name {
                    "quit" | "q" => break,
                    "help" => writeln!(out, "{}", HELP)?,
                    "type" | "t" => match session.type_of(arg) {
                        Ok(g) => writeln!(out, "{}", g)?,
                        Err(e) => report(out, arg, &e)?,
                    },
                    "trace" => {
                        session.set_trace(Some(Box::new(|s| println!("{}", s))));
                        run(&mut session, out, arg)?;
                        session.set_trace(None);
                    }
                    _ => writeln!(out, "unknown command :{}\n{}", name, HELP)?,
                }
                continue;
            }
        }
        pending.push_str(&line);
        pending.push('\n');
        match parse_program(&pending) {
            Err(e) if incomplete(&pending, &e) => continue,
            _ => {}
        }
        let src = std::mem::take(&mut pending);
        run(&mut session, out, &src)?;
    }
    Ok(())
}

pub fn main(seed: u64, step_budget: u64) -> io::Result<()> {
    let stdin = io::stdin();
    let prompt = stdin.is_terminal();
    repl(stdin.lock(), &mut io::stdout(), seed, step_budget, prompt)
}
