//! Corpus programs on disk.

use std::io;
use std::path::{Path, PathBuf};

use gsens_core::syntax::parse_program;

use crate::mp::MPSpec;
use crate::HarnessError;

/// Most AST nodes a metric-preservation corpus program may have.
pub const MAX_NODES: usize = 30;

#[derive(Clone, Debug)]
pub struct CorpusProgram {
    pub name: String,
    pub source: String,
}

impl CorpusProgram {
    /// Expression nodes in the whole program, types excluded.
    pub fn size(&self) -> Result<usize, HarnessError> {
        let prog = parse_program(&self.source).map_err(|e| HarnessError::Program(e.into()))?;
        Ok(prog.items.iter().map(|s| s.size()).sum())
    }

    pub fn spec(&self) -> Result<MPSpec, HarnessError> {
        MPSpec::from_source(&self.name, &self.source)
    }
}

/// All `.gsoul` files of `dir`, sorted by name.
pub fn load_dir(dir: &Path) -> io::Result<Vec<CorpusProgram>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|x| x == "gsoul"));
    files.sort();
    files
        .into_iter()
        .map(|p| {
            Ok(CorpusProgram {
                name: p.file_stem().unwrap_or_default().to_string_lossy().into_owned(),
                source: std::fs::read_to_string(&p)?,
            })
        })
        .collect()
}

/// The corpus shipped with the workspace.
pub fn shipped_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn mp_corpus() -> io::Result<Vec<CorpusProgram>> {
    load_dir(&shipped_dir().join("mp"))
}

pub fn worked_corpus() -> io::Result<Vec<CorpusProgram>> {
    load_dir(&shipped_dir().join("worked"))
}

/// Specs of the corpus programs whose claims and distances are bounded.
pub fn bounded_specs(corpus: &[CorpusProgram]) -> Result<Vec<MPSpec>, HarnessError> {
    let mut out = Vec::new();
    for p in corpus {
        let spec = p.spec()?;
        if spec.is_bounded() {
            out.push(spec);
        }
    }
    Ok(out)
}
