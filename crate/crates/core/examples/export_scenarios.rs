//! Regenerates the scenario JSON files under `data/` from the builtin
//! builders. Run after editing a builder:
//!
//! ```text
//! cargo run --example export_scenarios
//! ```

use crossing_sim::scenarios::ScenarioLibrary;

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&dir).unwrap();
    let lib = ScenarioLibrary::builtin();
    for name in lib.names() {
        let spec = lib.spec(name).unwrap();
        let json = serde_json::to_string_pretty(spec).unwrap();
        let path = dir.join(format!("{name}.json"));
        std::fs::write(&path, json + "\n").unwrap();
        println!("wrote {}", path.display());
    }
}
