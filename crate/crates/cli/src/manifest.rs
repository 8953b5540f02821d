//! JSON run manifests: command, configuration, files and timings.

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};

use labelrank::experiment::Algorithm;

pub struct Manifest {
    fields: Map<String, Value>,
    timings: Map<String, Value>,
    started: Instant,
    last: Instant,
}

impl Manifest {
    pub fn start(command: &str, seed: u64) -> Self {
        let mut fields = Map::new();
        fields.insert("command".into(), json!(command));
        fields.insert("seed".into(), json!(seed));
        fields.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        let now = Instant::now();
        Manifest {
            fields,
            timings: Map::new(),
            started: now,
            last: now,
        }
    }

    /// Records the time since the previous lap under `name`.
    pub fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.timings.insert(
            format!("{name}_ms"),
            json!((now - self.last).as_secs_f64() * 1e3),
        );
        self.last = now;
    }

    pub fn algorithm(&mut self, algo: Algorithm) {
        self.fields.insert("algorithm".into(), json!(algo.name()));
    }

    pub fn config(&mut self, config: Value) {
        self.fields.insert("config".into(), config);
    }

    pub fn extra(&mut self, key: &str, value: Value) {
        self.fields.insert(key.into(), value);
    }

    pub fn inputs(&mut self, paths: &[&Path]) {
        self.fields.insert("inputs".into(), paths_json(paths));
    }

    pub fn outputs(&mut self, paths: &[&Path]) {
        self.fields.insert("outputs".into(), paths_json(paths));
    }

    pub fn write(mut self, path: &Path) -> Result<()> {
        self.timings.insert(
            "total_ms".into(),
            json!(self.started.elapsed().as_secs_f64() * 1e3),
        );
        self.fields
            .insert("timings".into(), Value::Object(self.timings));
        let text = serde_json::to_string_pretty(&Value::Object(self.fields))? + "\n";
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
    }
}

fn paths_json(paths: &[&Path]) -> Value {
    json!(paths
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>())
}
