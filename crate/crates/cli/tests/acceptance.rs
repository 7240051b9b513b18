//! The twelve acceptance criteria, one line each. Time limits are part of
//! each verdict.

use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use gsens_core::eval::{msens, Machine, RuntimeError, Value};
use gsens_core::session::Session;
use gsens_core::{Const, ResourceVar, Sens, StaticSensEnv};
use gsens_dp::{dp_ratio_test, Gat, Glm, RatioConfig, Verdict};
use gsens_harness::corpus::{bounded_specs, mp_corpus, worked_corpus};
use gsens_harness::evidence::interval_chain;
use gsens_harness::{
    ctrans_assoc_fuzz, ctrans_monotonicity_fuzz, gg_fuzz, mp_check, parse_distance, parse_sens_env, ts_mp_check,
    GgKind, HarnessError, MPSpec,
};

const SEED: u64 = 2024;

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn exit_code(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_gsens"))
        .args(args)
        .env_remove("GSENS_SEED")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .unwrap()
        .code()
        .unwrap()
}

fn worked(name: &str) -> String {
    corpus_dir().join("worked").join(name).to_string_lossy().into_owned()
}

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Duration,
    check: fn() -> Result<String, String>,
}

fn outcome_table() -> Result<String, String> {
    // Sensitivity of `l` by row; columns apply f (0r), g (1r), h (3r).
    let expected = [("3r", [1, 1, 0]), ("unknown", [2, 0, 0]), ("0-3r", [2, 0, 0]), ("1-3r", [1, 0, 0])];
    let mut counts = [0; 3];
    let mut wrong = Vec::new();
    for (row, codes) in expected {
        for (col, want) in ["f", "g", "h"].iter().zip(codes) {
            let got = exit_code(&["run", &worked(&format!("table_{}_{}.gsoul", row, col))]);
            if got != want {
                wrong.push(format!("{} applied to {}: exit {} instead of {}", col, row, got, want));
            }
            counts[match got {
                1 => 0,
                2 => 1,
                _ => 2,
            }] += 1;
        }
    }
    let summary = format!("{} type errors, {} runtime errors, {} successes", counts[0], counts[1], counts[2]);
    if wrong.is_empty() && counts == [3, 2, 7] {
        Ok(summary)
    } else {
        Err(format!("{}; {}", summary, wrong.join("; ")))
    }
}

fn scale_boundary() -> Result<String, String> {
    let (ten, eleven) = (exit_code(&["run", &worked("scale_10.gsoul")]), exit_code(&["run", &worked("scale_11.gsoul")]));
    let msg = format!("f(scale(10,x)) exit {}, f(scale(11,x)) exit {}", ten, eleven);
    if (ten, eleven) == (0, 2) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn monitored_recursion() -> Result<String, String> {
    let r = ResourceVar::named("r");
    let mut seen = Vec::new();
    for n in [0u32, 1, 2, 5] {
        let src = format!(
            "let res r = 3;
def scale(n: Number, res v: Number): Number[?v] =
  if (n == 0) then 0 else v + scale(n - 1, v);
scale({}, r)",
            n
        );
        let item = Session::new().run_last(&src).map_err(|e| e.to_string())?.ok_or("no result")?;
        let v = item.value().ok_or("no value")?;
        let ms = msens(&v.ev);
        let want = StaticSensEnv::from_entries([(r.clone(), Sens::new(n as f64).unwrap())]);
        if ms != want || v.as_real() != Some(3.0 * n as f64) {
            return Err(format!("n = {}: value {:?}, monitored {}", n, v.as_real(), ms));
        }
        seen.push(format!("{}:{}", n, ms));
    }
    Ok(format!("monitored lower bounds {}", seen.join(" ")))
}

fn delayed_refutation() -> Result<String, String> {
    let code = exit_code(&["run", &worked("delayed.gsoul")]);
    if code == 2 {
        Ok("(Λr2. 5::r1::?r1::r2)[r1] exit 2".into())
    } else {
        Err(format!("exit {}", code))
    }
}

fn desk_metric_preservation() -> Result<String, String> {
    let src = std::fs::read_to_string(worked("x_plus_2y.gsoul")).map_err(|e| e.to_string())?;
    let spec = MPSpec::from_source("x_plus_2y", &src)
        .and_then(|s| s.with_delta(parse_distance("2r")?))
        .map_err(|e| e.to_string())?
        .with_sigma(parse_sens_env("5r").map_err(|e| e.to_string())?);
    let params: Vec<_> = spec.target.params().cloned().collect();
    let run = |x: f64, y: f64| {
        let args = [Value::input(Const::Real(x), &params[0]), Value::input(Const::Real(y), &params[1])];
        spec.target.apply(&mut Machine::new(SEED), &args).map(|v| v.as_real().unwrap())
    };
    let (o1, o2) = (run(2.0, 4.0).map_err(|e| e.to_string())?, run(4.0, 8.0).map_err(|e| e.to_string())?);
    let bound = spec.bound().value();
    if (o1, o2) != (10.0, 20.0) || (o1 - o2).abs() > bound + 1e-9 {
        return Err(format!("worked pair gave {} and {} against bound {}", o1, o2, bound));
    }
    let report = mp_check(&spec, 1000, SEED);
    if !report.passed() || report.trials != 1000 {
        return Err(report.to_string());
    }
    Ok(format!("outputs {} and {} within {}; 1000 pairs, 0 violations", o1, o2, bound))
}

fn corpus_metric_preservation() -> Result<String, String> {
    let corpus = mp_corpus().map_err(|e| e.to_string())?;
    if corpus.len() < 50 {
        return Err(format!("only {} programs", corpus.len()));
    }
    let mut violations = Vec::new();
    let mut trials = 0;
    for p in &corpus {
        let spec = p.spec().map_err(|e| format!("{}: {}", p.name, e))?;
        let report = mp_check(&spec, 200, SEED);
        trials += report.trials;
        violations.extend(report.violations.iter().map(|v| format!("{}: {}", p.name, v)));
    }
    if violations.is_empty() {
        Ok(format!("{} programs, {} pairs, 0 violations", corpus.len(), trials))
    } else {
        Err(format!("{} violations, first: {}", violations.len(), violations[0]))
    }
}

fn termination_sensitive() -> Result<String, String> {
    let corpus = mp_corpus().map_err(|e| e.to_string())?;
    let specs = bounded_specs(&corpus).map_err(|e| e.to_string())?;
    if specs.len() < 20 {
        return Err(format!("only {} bounded programs", specs.len()));
    }
    let (mut mismatches, mut violations) = (0, 0);
    for spec in &specs {
        let report = ts_mp_check(spec, 200, SEED).map_err(|e| format!("{}: {}", spec.name, e))?;
        mismatches += report.termination_mismatches();
        violations += report.violations.len();
    }
    let cex = std::fs::read_to_string(worked("counterexample.gsoul")).map_err(|e| e.to_string())?;
    let cex = MPSpec::from_source("counterexample", &cex).map_err(|e| e.to_string())?;
    let rejected = matches!(ts_mp_check(&cex, 10, SEED), Err(HarnessError::Unbounded(_)));
    let msg = format!(
        "{} bounded programs, {} termination mismatches, {} violations, unbounded counterexample rejected: {}",
        specs.len(),
        mismatches,
        violations,
        rejected
    );
    if mismatches == 0 && violations == 0 && rejected {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn evidence_laws() -> Result<String, String> {
    let assoc = ctrans_assoc_fuzz(100_000, SEED);
    let mono = ctrans_monotonicity_fuzz(100_000, SEED);
    let [e1, e2, e3] = interval_chain();
    let chain = gsens_core::ctrans(&e1, &e2).and_then(|e| gsens_core::ctrans(&e, &e3)).is_none()
        && gsens_core::ctrans(&e2, &e3).and_then(|e| gsens_core::ctrans(&e1, &e)).is_none();
    let msg = format!(
        "associativity {}/{} defined, {} failures; monotonicity {}/{} defined, {} failures; interval chain undefined: {}",
        assoc.defined,
        assoc.trials,
        assoc.failures.len(),
        mono.defined,
        mono.trials,
        mono.failures.len(),
        chain
    );
    if assoc.passed() && mono.passed() && chain {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn gradual_guarantees() -> Result<String, String> {
    let mut corpus = mp_corpus().map_err(|e| e.to_string())?;
    corpus.extend(worked_corpus().map_err(|e| e.to_string())?);
    let s = gg_fuzz(GgKind::Static, &corpus, 1000, SEED);
    let d = gg_fuzz(GgKind::Dynamic, &corpus, 1000, SEED);
    let msg = format!(
        "static {} widenings ({} applicable), {} counterexamples; dynamic {} ({} applicable), {} counterexamples",
        s.widenings,
        s.applicable,
        s.counterexamples.len(),
        d.widenings,
        d.applicable,
        d.counterexamples.len()
    );
    if s.passed() && d.passed() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn glm_behaviour() -> Result<String, String> {
    let id = Glm::new("fn (y: Number[db]) => y", 1.0).map_err(|e| e.to_string())?;
    let double = Glm::new("fn (y: Number[db]) => y + y", 1.0).map_err(|e| e.to_string())?;
    let inputs = [-50.0, -3.5, -1.0, 0.0, 0.25, 1.0, 2.0, 7.0, 42.0, 1000.0];
    let mut runs = 0;
    for seed in 0..100u64 {
        for x in inputs {
            runs += 1;
            if let Err(e) = id.run(x, seed) {
                return Err(format!("identity failed on {} (seed {}): {}", x, seed, e));
            }
            match double.run(x, seed) {
                Err(RuntimeError::SensitivityViolation { .. }) => {}
                other => return Err(format!("doubling on {} (seed {}) gave {:?}", x, seed, other.map_err(|e| e.to_string()))),
            }
        }
    }
    Ok(format!("{} inputs x 100 seeds: identity always succeeds, doubling always violates ({} runs each)", inputs.len(), runs))
}

fn glm_privacy() -> Result<String, String> {
    let id = Glm::new("fn (y: Number[db]) => y", 1.0).map_err(|e| e.to_string())?;
    let cfg = RatioConfig { samples: 200_000, bins: 40, min_bin: 500, tau: 0.15, seed: SEED };
    let report = dp_ratio_test(|x, s| id.run(x, s), 0.0, 1.0, 1.0, &cfg);
    let max_ratio = report.max_log_ratio.exp();
    let msg = format!(
        "{} qualifying bins, max ratio {:.4} against limit {:.4}, errors {:?}",
        report.qualifying_bins, max_ratio, report.limit, report.errors
    );
    if report.verdict == Verdict::Pass && max_ratio <= 1f64.exp() * 1.15 && report.errors == (0, 0) {
        Ok(msg)
    } else {
        Err(format!("{} verdict {:?}", msg, report.verdict))
    }
}

fn gat_selection() -> Result<String, String> {
    let mixed = ["fn (y: Number[db]) => y - 1000", "fn (y: Number[db]) => y + y + y", "fn (y: Number[db]) => y"];
    let gat = Gat::new(&mixed, 50.0, 1.0).map_err(|e| e.to_string())?;
    let mut picks = [0usize; 4];
    for seed in 0..1000 {
        let k = gat.run(100.0, seed).map_err(|e| e.to_string())?;
        picks[(k + 1) as usize] += 1;
    }
    let over = Gat::new(&["fn (y: Number[db]) => y + y", "fn (y: Number[db]) => y + y + y"], 50.0, 1.0)
        .map_err(|e| e.to_string())?;
    let mut minus_one = 0;
    for seed in 0..1000 {
        if over.run(100.0, seed).map_err(|e| e.to_string())? == -1 {
            minus_one += 1;
        }
    }
    let msg = format!(
        "[1,3,1] picks -1:{} 0:{} 1:{} 2:{}; all-oversensitive returned -1 in {}/1000",
        picks[0], picks[1], picks[2], picks[3], minus_one
    );
    if picks[2] == 0 && minus_one == 1000 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

const CRITERIA: [Criterion; 12] = [
    Criterion { id: 1, title: "outcome table", limit: Duration::from_secs(1), check: outcome_table },
    Criterion { id: 2, title: "scale boundary", limit: Duration::from_secs(1), check: scale_boundary },
    Criterion { id: 3, title: "monitored recursion", limit: Duration::from_secs(1), check: monitored_recursion },
    Criterion { id: 4, title: "delayed refutation", limit: Duration::from_secs(1), check: delayed_refutation },
    Criterion { id: 5, title: "desk metric preservation", limit: Duration::from_secs(5), check: desk_metric_preservation },
    Criterion { id: 6, title: "corpus metric preservation", limit: Duration::from_secs(120), check: corpus_metric_preservation },
    Criterion { id: 7, title: "termination-sensitive MP", limit: Duration::from_secs(120), check: termination_sensitive },
    Criterion { id: 8, title: "evidence laws", limit: Duration::from_secs(30), check: evidence_laws },
    Criterion { id: 9, title: "gradual guarantees", limit: Duration::from_secs(120), check: gradual_guarantees },
    Criterion { id: 10, title: "GLM behaviour", limit: Duration::from_secs(60), check: glm_behaviour },
    Criterion { id: 11, title: "GLM privacy", limit: Duration::from_secs(60), check: glm_privacy },
    Criterion { id: 12, title: "GAT selection", limit: Duration::from_secs(30), check: gat_selection },
];

fn main() {
    let mut failed = Vec::new();
    for c in &CRITERIA {
        let start = Instant::now();
        let result = (c.check)();
        let took = start.elapsed();
        let (verdict, detail) = match &result {
            Ok(d) if took <= c.limit => ("PASS", d.clone()),
            Ok(d) => ("FAIL", format!("{} (over the {:?} limit)", d, c.limit)),
            Err(d) => ("FAIL", d.clone()),
        };
        println!("criterion {:>2} {} {:<27} {:>8.2}s  {}", c.id, verdict, c.title, took.as_secs_f64(), detail);
        if verdict == "FAIL" {
            failed.push(c.id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {:?}", failed);
        std::process::exit(1);
    }
}
