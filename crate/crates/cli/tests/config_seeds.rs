use std::path::{Path, PathBuf};

use coherent_cli::config::{Experiment, ExperimentConfig, ModelConfig};

#[test]
fn config_fuzz_seeds_parse_and_validate() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus/experiment_config");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let p = entry.unwrap().path();
        let text = std::fs::read_to_string(&p).unwrap();
        let config: ExperimentConfig = toml::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        if !matches!(config.model, ModelConfig::Gridded { .. }) {
            let e =
                Experiment::new(config, Path::new("/nonexistent")).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            assert!(e.n() <= e.steps);
        }
        seen += 1;
    }
    assert!(seen >= 3);
}
