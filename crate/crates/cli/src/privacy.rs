//! `dp glm`, `dp gat` and `dp verify`.

use gsens_core::eval::RuntimeError;
use gsens_core::session::GsError;
use gsens_dp::{dp_ratio_test, DpError, Gat, Glm, RatioConfig, Verdict};
use gsens_harness::HarnessError;
use serde_json::json;

use crate::diag::{runtime_code, Diagnostic, Exit, Outcome};

fn failure(command: &'static str, e: DpError) -> Outcome {
    let out = Outcome::new(command);
    let (exit, code) = match &e {
        DpError::Scale(_) | DpError::Epsilon(_) => (Exit::Io, "A001"),
        DpError::Program(HarnessError::Program(g)) => (Exit::of(g), "H002"),
        DpError::Program(_) => (Exit::Type, "H001"),
        DpError::Runtime(r) => (Exit::of(&GsError::Runtime(r.clone())), runtime_code(r)),
    };
    out.fail(exit, Diagnostic { file: "<mechanism>".into(), line: 0, col: 0, code, message: e.to_string() })
}

fn runtime(command: &'static str, e: RuntimeError) -> Outcome {
    failure(command, DpError::Runtime(e))
}

pub fn glm(query: &str, eps: f64, input: f64, runs: usize, seed: u64) -> Outcome {
    let command = "dp glm";
    let m = match Glm::new(query, eps) {
        Ok(m) => m,
        Err(e) => return failure(command, e),
    };
    let mut out = Outcome::new(command);
    let mut values = Vec::new();
    for i in 0..runs as u64 {
        match m.run(input, seed.wrapping_add(i)) {
            Ok(v) => {
                out.line(format!("{}", v));
                values.push(v);
            }
            Err(e) => return runtime(command, e),
        }
    }
    out.field("values", values);
    out
}

pub fn gat(queries: &[String], threshold: f64, eps: f64, input: f64, runs: usize, seed: u64) -> Outcome {
    let command = "dp gat";
    let qs: Vec<&str> = queries.iter().map(String::as_str).collect();
    let m = match Gat::new(&qs, threshold, eps) {
        Ok(m) => m,
        Err(e) => return failure(command, e),
    };
    let mut out = Outcome::new(command);
    let mut picks = Vec::new();
    for i in 0..runs as u64 {
        match m.run(input, seed.wrapping_add(i)) {
            Ok(k) => {
                out.line(format!("{}", k));
                picks.push(k);
            }
            Err(e) => return runtime(command, e),
        }
    }
    out.field("indices", picks);
    out
}

pub struct VerifyOptions<'a> {
    pub query: &'a str,
    pub eps: f64,
    pub db1: f64,
    pub db2: f64,
    pub config: RatioConfig,
}

/// Exit 0 when every qualifying bin is within bounds, 2 when one is not, 3
/// when too few bins qualify to decide.
pub fn verify(opts: &VerifyOptions) -> Outcome {
    let command = "dp verify";
    let m = match Glm::new(opts.query, opts.eps) {
        Ok(m) => m,
        Err(e) => return failure(command, e),
    };
    let report = dp_ratio_test(|x, s| m.run(x, s), opts.db1, opts.db2, opts.eps, &opts.config);
    let mut out = Outcome::new(command);
    out.line(report.to_string());
    out.exit = match report.verdict {
        Verdict::Pass => Exit::Ok,
        Verdict::Fail => Exit::Violation,
        Verdict::Inconclusive => Exit::Runtime,
    };
    out.field(
        "report",
        json!({
            "eps": report.eps,
            "verdict": format!("{:?}", report.verdict),
            "qualifying_bins": report.qualifying_bins,
            "max_log_ratio": report.max_log_ratio,
            "limit": report.limit,
            "errors": [report.errors.0, report.errors.1],
            "edges": report.edges,
            "counts1": report.counts1,
            "counts2": report.counts2,
        }),
    );
    out
}
