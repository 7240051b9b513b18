//! The environment machine against the substitution reducer, on every
//! corpus program, with each target function applied to generated inputs.

use std::path::PathBuf;

use gsens_core::eval::subst::{agrees, Reducer};
use gsens_core::eval::Machine;
use gsens_core::session::elaborate_closed;
use gsens_core::syntax::ast::{Stmt, TyKind};
use gsens_core::syntax::parse_program;
use gsens_core::validate::validate;

const BUDGET: u64 = 200_000;

fn corpus() -> Vec<(String, String)> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut out = Vec::new();
    for dir in ["mp", "worked"] {
        let mut files: Vec<_> = std::fs::read_dir(root.join(dir)).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        for f in files {
            if f.extension().is_some_and(|e| e == "gsoul") {
                let name = format!("{}/{}", dir, f.file_stem().unwrap().to_string_lossy());
                out.push((name, std::fs::read_to_string(&f).unwrap()));
            }
        }
    }
    out
}

/// Appends a call of the program's last definition when every parameter is
/// a number, boolean or unit. Sensitive number parameters receive the
/// resource `q` itself; the rest receive literals.
fn with_call(src: &str, arg: f64) -> Option<String> {
    let prog = parse_program(src).ok()?;
    let Some(Stmt::Def(d)) = prog.items.last() else { return None };
    if !d.tparams.is_empty() {
        return None;
    }
    let mut args = Vec::new();
    for p in &d.params {
        args.push(match (&p.ty.kind, p.res || !p.ty.eff.is_empty()) {
            (TyKind::Number, true) => "q".to_string(),
            (TyKind::Number, false) => format!("{}", arg),
            (TyKind::Boolean, _) => (arg > 0.0).to_string(),
            (TyKind::Unit, _) => "()".to_string(),
            _ => return None,
        });
    }
    let inst = if d.rparams.is_empty() { String::new() } else { format!("[{}]", vec!["q"; d.rparams.len()].join(", ")) };
    Some(format!("{}\nlet res q = {};\n{}{}({})", src, arg, d.name, inst, args.join(", ")))
}

fn programs() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (name, src) in corpus() {
        let calls: Vec<_> = [3.0, -2.0, 0.0].iter().filter_map(|a| with_call(&src, *a)).collect();
        if calls.is_empty() {
            out.push((name, src));
        } else {
            out.extend(calls.into_iter().enumerate().map(|(i, c)| (format!("{}#{}", name, i), c)));
        }
    }
    out
}

#[test]
fn corpus_has_enough_programs_with_calls() {
    let ps = programs();
    assert!(ps.len() >= 150, "{} programs", ps.len());
    assert!(ps.iter().filter(|(n, _)| n.contains('#')).count() >= 150);
}

#[test]
fn machine_agrees_with_substitution() {
    let mut compared = 0;
    let mut values = 0;
    let mut failures = Vec::new();
    for (name, src) in programs() {
        let (t, g) = match elaborate_closed(&src) {
            Ok(x) => x,
            Err(_) => continue,
        };
        match validate(&t) {
            Ok(h) if h.alpha_eq(&g) => {}
            Ok(h) => failures.push(format!("{}: validator type {} differs from {}", name, h, g)),
            Err(e) => failures.push(format!("{}: {}", name, e)),
        }
        for seed in [0, 1] {
            let v = Machine::new(seed).with_budget(BUDGET).eval(&t);
            let r = Reducer::new(seed).with_budget(BUDGET).normalize(&t);
            compared += 1;
            match (&v, &r) {
                (Ok(v), Ok(r)) if agrees(v, r) => values += 1,
                (Err(a), Err(b)) if a.kind() == b.kind() && a.kind() != "Stuck" => {}
                _ => failures.push(format!(
                    "{} (seed {}): machine {:?}, reducer {:?}",
                    name,
                    seed,
                    v.as_ref().map(|v| v.to_string()).map_err(|e| e.to_string()),
                    r.as_ref().map(|t| t.to_string()).map_err(|e| e.to_string())
                )),
            }
        }
    }
    assert!(compared >= 300, "{} comparisons", compared);
    assert!(values >= 200, "{} of {} comparisons ended in values", values, compared);
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
