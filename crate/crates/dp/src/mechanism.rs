//! GLM and GAT, run as GSoul programs.

use gsens_core::eval::{Machine, RuntimeError, Value};
use gsens_core::Const;
use gsens_harness::Target;

use crate::DpError;

/// The gradual Laplace mechanism: checks at runtime that `f` is
/// 1-sensitive in `x` before adding noise.
pub const GLM_SOURCE: &str = "def GLM<T>(
      res x: T,
      f: T[1x] -> Number[?x],
      eps: Number,
) = laplace(f(x) :: Number[1x], 1, eps);
";

/// Gradual above-threshold: the index of the first 1-sensitive query whose
/// noisy answer reaches the noisy threshold. Queries failing the GLM check
/// are skipped.
pub const GAT_SOURCE: &str = "def GAT<T>(
      res db: T,
      fs: List<T[1db] -> Number[?db]>,
      thr: Number,
      eps: Number,
): Number = {
  let noisyThr = laplace(thr, 1, eps / 2);
  fs.indexOf(
    fn (f: T[1db] -> Number[?db]) =>
      try {
        let noisyVal = GLM<T>(db, f, eps / 4);
        noisyVal >= noisyThr;
      } catch { false; }
  );
};
";

/// Step budget for one mechanism run.
const BUDGET: u64 = 1_000_000;

fn positive(eps: f64) -> Result<f64, DpError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(eps)
    } else {
        Err(DpError::Epsilon(eps))
    }
}

fn literal(x: f64) -> String {
    if x < 0.0 {
        format!("(0 - {})", -x)
    } else {
        format!("{}", x)
    }
}

fn run_target(target: &Target, x: f64, seed: u64) -> Result<f64, RuntimeError> {
    let param = target.params().next().expect("one parameter");
    let v = target.apply(&mut Machine::new(seed).with_budget(BUDGET), &[Value::input(Const::Real(x), param)])?;
    Ok(v.as_real().expect("mechanisms return numbers"))
}

/// GLM specialized to `Number`, with the query `f` given as source text of a
/// function over the resource `db`, e.g. `fn (y: Number[db]) => y + y`.
#[derive(Clone, Debug)]
pub struct Glm {
    target: Target,
}

impl Glm {
    pub fn new(query: &str, eps: f64) -> Result<Glm, DpError> {
        let src = format!(
            "{}def mechanism(res db: Number): Number = GLM<Number>(db, {}, {});\n",
            GLM_SOURCE,
            query,
            literal(positive(eps)?)
        );
        Ok(Glm { target: Target::from_source(&src)? })
    }

    pub fn run(&self, x: f64, seed: u64) -> Result<f64, RuntimeError> {
        run_target(&self.target, x, seed)
    }
}

pub fn glm(x: f64, query: &str, eps: f64, seed: u64) -> Result<f64, DpError> {
    Ok(Glm::new(query, eps)?.run(x, seed)?)
}

/// GAT specialized to `Number`; queries are function sources over `db`.
#[derive(Clone, Debug)]
pub struct Gat {
    target: Target,
}

impl Gat {
    pub fn new(queries: &[&str], thr: f64, eps: f64) -> Result<Gat, DpError> {
        let list = if queries.is_empty() {
            "List<Number[1db] -> Number[?db]>()".to_string()
        } else {
            format!("List({})", queries.join(", "))
        };
        let src = format!(
            "{}{}def mechanism(res db: Number): Number = GAT<Number>(db, {}, {}, {});\n",
            GLM_SOURCE,
            GAT_SOURCE,
            list,
            literal(thr),
            literal(positive(eps)?)
        );
        Ok(Gat { target: Target::from_source(&src)? })
    }

    /// Index of the selected query, or -1.
    pub fn run(&self, db: f64, seed: u64) -> Result<i64, RuntimeError> {
        Ok(run_target(&self.target, db, seed)? as i64)
    }
}

pub fn gat(db: f64, queries: &[&str], thr: f64, eps: f64, seed: u64) -> Result<i64, DpError> {
    Ok(Gat::new(queries, thr, eps)?.run(db, seed)?)
}
