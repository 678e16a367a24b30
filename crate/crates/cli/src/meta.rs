//! Run metadata written next to every command's outputs. Contents are
//! fully determined by the invocation, never by the clock, so repeated runs
//! are byte-identical.

use std::path::Path;

use bidlab_core::{Error, Result};
use serde_json::{json, Value};

pub struct RunMeta {
    command: &'static str,
    parameters: Value,
    warnings: Vec<String>,
    extra: serde_json::Map<String, Value>,
}

impl RunMeta {
    pub fn new(command: &'static str, parameters: Value) -> Self {
        RunMeta {
            command,
            parameters,
            warnings: Vec::new(),
            extra: serde_json::Map::new(),
        }
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn insert(&mut self, key: &str, value: Value) {
        self.extra.insert(key.to_string(), value);
    }

    /// Write `<command>.meta.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut body = serde_json::Map::new();
        body.insert("command".into(), json!(self.command));
        body.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        body.insert("parameters".into(), self.parameters.clone());
        body.insert("warnings".into(), json!(self.warnings));
        for (k, v) in &self.extra {
            body.insert(k.clone(), v.clone());
        }
        let path = dir.join(format!("{}.meta.json", self.command.replace('-', "_")));
        bidlab_core::io::write_json(&path, &Value::Object(body))
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        source: e,
    })
}

pub fn path_str(path: &Path) -> Value {
    json!(path.display().to_string())
}

pub fn opt_path_str(path: &Option<std::path::PathBuf>) -> Value {
    match path {
        Some(p) => path_str(p),
        None => Value::Null,
    }
}
