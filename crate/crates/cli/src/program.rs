//! `check` and `run`.

use std::cell::RefCell;
use std::rc::Rc;

use gsens_core::eval::msens;
use gsens_core::session::{ItemResult, Session};
use serde_json::json;

use crate::diag::{Diagnostic, Exit, Outcome};

pub fn read(file: &str, command: &'static str) -> Result<String, Outcome> {
    std::fs::read_to_string(file).map_err(|e| Outcome::new(command).fail(Exit::Io, Diagnostic::io(file, &e)))
}

fn item_name(it: &ItemResult) -> &str {
    match it {
        ItemResult::Bound { name, .. } => name,
        ItemResult::Value { .. } => "-",
    }
}

pub fn check(file: &str) -> Outcome {
    let src = match read(file, "check") {
        Ok(s) => s,
        Err(o) => return o,
    };
    let mut out = Outcome::new("check");
    match Session::check_only().run_source(&src) {
        Ok(items) => {
            let mut list = Vec::new();
            for it in &items {
                out.line(format!("{} : {}", item_name(it), it.ty()));
                list.push(json!({ "name": item_name(it), "type": it.ty().to_string() }));
            }
            if let Some(last) = items.last() {
                out.field("type", last.ty().to_string());
            }
            out.field("items", list);
            out
        }
        Err(e) => out.fail(Exit::of(&e), Diagnostic::from_error(file, &src, &e)),
    }
}

pub struct RunOptions {
    pub seed: u64,
    pub step_budget: u64,
    pub trace: bool,
    pub json: bool,
}

pub fn run(file: &str, opts: &RunOptions) -> Outcome {
    let src = match read(file, "run") {
        Ok(s) => s,
        Err(o) => return o,
    };
    let mut out = Outcome::new("run");
    if let Err(e) = Session::check_only().run_source(&src) {
        return out.fail(Exit::of(&e), Diagnostic::from_error(file, &src, &e));
    }
    let steps = Rc::new(RefCell::new(Vec::new()));
    let mut session = Session::new().with_seed(opts.seed).with_budget(opts.step_budget);
    if opts.trace {
        let sink = steps.clone();
        let live = !opts.json;
        session = session.with_trace(move |s| {
            if live {
                println!("{}", s);
            } else {
                sink.borrow_mut().push(s.to_string());
            }
        });
    }
    let result = session.run_source(&src);
    if opts.trace && opts.json {
        out.field("trace", steps.borrow().clone());
    }
    match result {
        Ok(items) => {
            if let Some(it) = items.last() {
                if let Some(v) = it.value() {
                    let ms = msens(&v.ev);
                    let prefix = match it {
                        ItemResult::Bound { name, .. } => format!("{} = ", name),
                        ItemResult::Value { .. } => String::new(),
                    };
                    out.line(format!("{}{} : {}  (monitored: {})", prefix, v.u, v.ty, ms));
                    out.field("value", v.u.to_string());
                    out.field("type", v.ty.to_string());
                    out.field("monitored_effect", ms.to_string());
                    out.field("evidence", v.ev.to_string());
                }
            }
            out
        }
        Err(e) => out.fail(Exit::of(&e), Diagnostic::from_error(file, &src, &e)),
    }
}
