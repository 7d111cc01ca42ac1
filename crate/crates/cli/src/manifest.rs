use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use trackfda::experiment::ExperimentConfig;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Record of one command invocation, enough to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Full argument vector as given.
    pub args: Vec<String>,
    pub config: ExperimentConfig,
    pub inputs: Vec<String>,
    pub output_dir: String,
    pub timings: Vec<StageTiming>,
}

impl RunManifest {
    pub fn new(command: &str, config: ExperimentConfig, inputs: Vec<String>, output_dir: &Path) -> Self {
        Self {
            tool: env!("CARGO_BIN_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command: command.to_owned(),
            args: std::env::args().collect(),
            config,
            inputs,
            output_dir: output_dir.display().to_string(),
            timings: Vec::new(),
        }
    }

    /// Runs `f`, recording its wall time under `stage`.
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(StageTiming {
            stage: stage.to_owned(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn write(&self) -> Result<()> {
        let path = Path::new(&self.output_dir).join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let mut m = RunManifest::new(
            "grid",
            ExperimentConfig::default(),
            vec!["in.txt".into()],
            Path::new("out"),
        );
        let v = m.time("stage", || 7);
        assert_eq!(v, 7);
        assert_eq!(m.timings.len(), 1);
        let back: RunManifest = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.config, ExperimentConfig::default());
    }
}
