//! Shared inputs for the benchmarks.

use std::path::PathBuf;

use docseek_core::document::{build_outline, ingest_parsed, InputFormat, OutlineOptions, ParsedDocument};
use docseek_core::Outline;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn netflix_layout() -> ParsedDocument {
    ingest_parsed(&fixture("docs/netflix10k.mineru.json"), InputFormat::MineruJson).expect("netflix fixture")
}

pub fn netflix_outline() -> Outline {
    build_outline(&netflix_layout(), &OutlineOptions::default())
}
