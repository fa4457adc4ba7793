#![no_main]

use coherent_cli::config::{Experiment, ExperimentConfig, ModelConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(config) = toml::from_str::<ExperimentConfig>(text) else {
        return;
    };
    // gridded configs name a file on disk; only the analytic models are
    // validated here
    if matches!(config.model, ModelConfig::Gridded { .. }) {
        return;
    }
    if let Ok(e) = Experiment::new(config, std::path::Path::new("/nonexistent")) {
        assert!(e.n() >= 1 && e.n() <= e.steps);
        assert_eq!(e.hash.len(), 16);
    }
});
