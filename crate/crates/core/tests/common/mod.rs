//! Shared helpers for the integration tests.
//!
//! `sim` is a deliberately separate implementation of gate semantics: it
//! decodes literals itself, evaluates cells by type name and clocks
//! flip-flops directly, with no use of the crate's Boolean engine.
#![allow(dead_code)]

pub mod criteria;
pub mod mutate;
pub mod sim;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use gatescope::hdl::parse_verilog;
use gatescope::library::GateLibrary;
use gatescope::netlist::Netlist;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn library() -> Arc<GateLibrary> {
    Arc::new(GateLibrary::builtin())
}

pub fn load(name: &str) -> Netlist {
    let path = fixtures().join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_verilog(&text, library()).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Every design used for round-trip and false-positive checks: the corpus
/// directory plus the FSM and obfuscation fixtures.
pub fn corpus_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixtures().join("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .chain(
            std::fs::read_dir(fixtures())
                .unwrap()
                .map(|e| e.unwrap().path())
                .filter(|p| {
                    let name = p.file_name().unwrap().to_string_lossy();
                    name.starts_with("fsm_") || name.starts_with("harpoon")
                }),
        )
        .filter(|p| p.extension().is_some_and(|e| e == "v"))
        .collect();
    files.sort();
    files
}

pub const FSM_FIXTURES: [&str; 5] = [
    "fsm_toggle.v",
    "fsm_counter2.v",
    "fsm_gray3.v",
    "fsm_enable_toggle.v",
    "fsm_mealy4.v",
];
