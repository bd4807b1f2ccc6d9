#![allow(dead_code)]

pub mod fixture;
pub mod oracles;
pub mod synth;

use std::path::{Path, PathBuf};

use proctext_core::pipeline::PipelineConfig;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/pipeline")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden")
}

/// The bundled fixture configuration, writing into `out`.
pub fn config_with_out(out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::load(fixture_dir().join("config.json")).unwrap();
    cfg.out_dir = out.to_path_buf();
    cfg
}

/// Every file below `dir`, relative to it, sorted.
pub fn artifact_files(dir: &Path) -> Vec<PathBuf> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap().filter_map(|e| e.ok()) {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    files.sort();
    files
}
