#![allow(dead_code)]

use std::path::{Path, PathBuf};

use smd2cpn::smd::Machine;
use smd2cpn::smdl;

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// (file stem, source text) for every corpus model, sorted by name.
pub fn corpus() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .filter_map(|e| {
            let path = e.ok()?.path();
            (path.extension()? == "smdl").then(|| {
                let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
                (stem, std::fs::read_to_string(&path).unwrap())
            })
        })
        .collect();
    out.sort();
    out
}

pub fn corpus_machines() -> Vec<(String, Machine)> {
    corpus()
        .into_iter()
        .map(|(name, text)| {
            let m = smdl::load(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, m)
        })
        .collect()
}

pub mod gen;
pub mod naive;
