//! `test mp`, `test gg` and `test evidence`.

use std::path::Path;

use gsens_harness::corpus::load_dir;
use gsens_harness::evidence::interval_chain;
use gsens_harness::{
    ctrans_assoc_fuzz, ctrans_monotonicity_fuzz, gg_fuzz, mp_check, parse_distance, parse_sens_env, ts_mp_check,
    CorpusProgram, GgKind, HarnessError, MPSpec,
};
use gsens_core::ctrans;
use serde_json::json;

use crate::diag::{Diagnostic, Exit, Outcome};

fn harness_failure(command: &'static str, file: &str, src: &str, e: &HarnessError) -> Outcome {
    let out = Outcome::new(command);
    match e {
        HarnessError::Program(g) => out.fail(Exit::of(g), Diagnostic::from_error(file, src, g)),
        other => out.fail(Exit::Type, Diagnostic::new(file, src, None, "H001", other.to_string())),
    }
}

fn load(command: &'static str, path: &str) -> Result<Vec<CorpusProgram>, Outcome> {
    let p = Path::new(path);
    let io = |e: std::io::Error| Outcome::new(command).fail(Exit::Io, Diagnostic::io(path, &e));
    if p.is_dir() {
        load_dir(p).map_err(io)
    } else {
        let source = std::fs::read_to_string(p).map_err(io)?;
        let name = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        Ok(vec![CorpusProgram { name, source }])
    }
}

pub struct MpOptions<'a> {
    pub pairs: usize,
    pub delta: Option<&'a str>,
    pub sigma: Option<&'a str>,
    pub ts: bool,
    pub seed: u64,
    pub step_budget: Option<u64>,
}

pub fn mp(path: &str, opts: &MpOptions) -> Outcome {
    let command = "test mp";
    let programs = match load(command, path) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let mut out = Outcome::new(command);
    let mut reports = Vec::new();
    for p in &programs {
        let file = if programs.len() == 1 { path.to_string() } else { format!("{}/{}.gsoul", path, p.name) };
        let spec = (|| {
            let mut spec = MPSpec::from_source(&p.name, &p.source)?;
            if let Some(d) = opts.delta {
                spec = spec.with_delta(parse_distance(d)?)?;
            }
            if let Some(s) = opts.sigma {
                spec = spec.with_sigma(parse_sens_env(s)?);
            }
            if let Some(b) = opts.step_budget {
                spec = spec.with_step_budget(b);
            }
            Ok::<_, HarnessError>(spec)
        })();
        let spec = match spec {
            Ok(s) => s,
            Err(e) => return harness_failure(command, &file, &p.source, &e),
        };
        let report = if opts.ts {
            match ts_mp_check(&spec, opts.pairs, opts.seed) {
                Ok(r) => r,
                Err(e) => return harness_failure(command, &file, &p.source, &e),
            }
        } else {
            mp_check(&spec, opts.pairs, opts.seed)
        };
        out.line(report.to_string());
        if !report.passed() {
            out.exit = Exit::Violation;
        }
        reports.push(json!({
            "program": report.name,
            "trials": report.trials,
            "successes": report.successes,
            "error_pairs": report.error_pairs,
            "violations": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "termination_mismatches": report.termination_mismatches(),
            "max_ratio": report.max_ratio,
            "bound": spec.bound().value(),
        }));
    }
    out.field("reports", reports);
    out
}

pub fn gg(path: &str, widenings: usize, kinds: &[GgKind], seed: u64) -> Outcome {
    let command = "test gg";
    let programs = match load(command, path) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let mut out = Outcome::new(command);
    let mut reports = Vec::new();
    for kind in kinds {
        let report = gg_fuzz(*kind, &programs, widenings, seed);
        out.line(report.to_string());
        if !report.passed() {
            out.exit = Exit::Violation;
        }
        reports.push(json!({
            "guarantee": format!("{:?}", kind),
            "widenings": report.widenings,
            "applicable": report.applicable,
            "counterexamples": report.counterexamples.iter().map(|c| json!({
                "program": c.program,
                "reason": c.reason,
                "widened": c.widened,
            })).collect::<Vec<_>>(),
        }));
    }
    out.field("reports", reports);
    out
}

pub fn evidence(trials: usize, seed: u64) -> Outcome {
    let mut out = Outcome::new("test evidence");
    let mut reports = Vec::new();
    for report in [ctrans_assoc_fuzz(trials, seed), ctrans_monotonicity_fuzz(trials, seed)] {
        out.line(report.to_string());
        if !report.passed() {
            out.exit = Exit::Violation;
        }
        reports.push(json!({
            "law": report.law,
            "trials": report.trials,
            "defined": report.defined,
            "failures": report.failures,
        }));
    }
    let [e1, e2, e3] = interval_chain();
    let left = ctrans(&e1, &e2).and_then(|e| ctrans(&e, &e3));
    let right = ctrans(&e2, &e3).and_then(|e| ctrans(&e1, &e));
    let undefined = left.is_none() && right.is_none();
    out.line(format!(
        "{:<14} {} ∘ {} ∘ {} undefined both ways: {}",
        "interval chain", e1, e2, e3, undefined
    ));
    if !undefined {
        out.exit = Exit::Violation;
    }
    out.field("reports", reports);
    out.field("interval_chain_undefined", undefined);
    out
}
