#![allow(dead_code)]

pub mod gen;

use std::path::PathBuf;

use cogniview::syntax::{parse_source, ModuleAst, SourceUnit};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Every corpus program, sorted by file name.
pub fn corpus() -> Vec<SourceUnit> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            name.ends_with(".mpy") && !name.ends_with(".view.mpy")
        })
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            SourceUnit::new(name, std::fs::read_to_string(&p).unwrap())
        })
        .collect()
}

pub fn corpus_file(name: &str) -> SourceUnit {
    let text = std::fs::read_to_string(corpus_dir().join(name)).expect("corpus file");
    SourceUnit::new(name, text)
}

pub fn parse(src: &str) -> ModuleAst {
    parse_source(&SourceUnit::new("t.mpy", src)).expect("test program parses")
}
