//! Regenerate the bundled sample data in `data/`.
//!
//! cargo run -p pestpulse --example generate_sample [-- <out-dir> [seed]]

use std::fs::File;
use std::path::PathBuf;

use pestpulse::ingest::write_records;
use pestpulse::synthetic::{area_table, corpus, random_walk, CorpusSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"));
    std::fs::create_dir_all(&dir)?;
    let seed = std::env::args()
        .nth(2)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0);
    let spec = CorpusSpec {
        seed,
        ..CorpusSpec::default()
    };
    write_records(File::create(dir.join("kcc.csv"))?, &corpus(&spec))?;
    area_table(&spec).to_csv(File::create(dir.join("gca.csv"))?)?;
    let mut walk = String::from("t,value\n");
    for (t, v) in random_walk(300, 42).iter().enumerate() {
        walk.push_str(&format!("{t},{v}\n"));
    }
    std::fs::write(dir.join("random_walk.csv"), walk)?;
    Ok(())
}
