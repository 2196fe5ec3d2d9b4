//! The shipped configuration files stay in step with the built-in designs.

use std::path::{Path, PathBuf};

use clsk::bench::{SweepConfig, SweepSpec};
use clsk::topology::{example1, example2, NetworkDesign};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn preset_files_match_builtin_designs() {
    for (file, preset) in [("example1.toml", example1()), ("example2.toml", example2())] {
        let loaded = NetworkDesign::load(&configs().join(file)).unwrap();
        assert_eq!(loaded, preset, "{file}");
        loaded.to_design().unwrap();
    }
}

#[test]
fn sweep_files_expand_to_cells() {
    let cases = [
        ("sweep_example1.toml", example1(), 8 + 14),
        ("sweep_example2.toml", example2(), 6),
        ("sweep_quick.toml", example1(), 2 + 4),
    ];
    for (file, design, n) in cases {
        let text = std::fs::read_to_string(configs().join(file)).unwrap();
        let spec: SweepSpec = toml::from_str(&text).unwrap_or_else(|e| panic!("{file}: {e}"));
        let cfg = SweepConfig::from_spec(design.to_design().unwrap(), &spec).unwrap();
        let cells = cfg.cells().unwrap_or_else(|e| panic!("{file}: {e}"));
        assert_eq!(cells.len(), n, "{file}");
        assert!(cells.iter().all(|c| c.bits >= 100 && c.bits <= 10_000), "{file}");
    }
}
