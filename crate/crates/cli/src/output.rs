//! Record sinks. Every JSON record carries the configuration hash.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value};

use crate::Failure;

pub struct Sink {
    out: Box<dyn Write>,
    hash: String,
    path: Option<String>,
}

impl Sink {
    /// Opens `path` (creating missing parent directories), or stdout.
    pub fn open(path: Option<&str>, hash: &str) -> Result<Self, Failure> {
        let out: Box<dyn Write> = match path {
            Some(p) => {
                if let Some(dir) = Path::new(p).parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).map_err(|e| unwritable(p, e))?;
                }
                Box::new(BufWriter::new(File::create(p).map_err(|e| unwritable(p, e))?))
            }
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Self {
            out,
            hash: hash.to_string(),
            path: path.map(str::to_string),
        })
    }

    pub fn is_stdout(&self) -> bool {
        self.path.is_none()
    }

    /// Writes one JSON line, tagged with `record` and the config hash.
    pub fn record(&mut self, kind: &str, body: Value) -> Result<(), Failure> {
        let line = tag(kind, &self.hash, body);
        self.raw(&format!("{line}\n"))
    }

    pub fn raw(&mut self, text: &str) -> Result<(), Failure> {
        let path = self.path.clone().unwrap_or_else(|| "stdout".into());
        self.out.write_all(text.as_bytes()).map_err(|e| unwritable(&path, e))
    }

    pub fn finish(mut self) -> Result<(), Failure> {
        let path = self.path.clone().unwrap_or_else(|| "stdout".into());
        self.out.flush().map_err(|e| unwritable(&path, e))
    }
}

pub fn tag(kind: &str, hash: &str, body: Value) -> Value {
    let mut map = match body {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    };
    map.insert("record".into(), Value::String(kind.into()));
    map.insert("config_hash".into(), Value::String(hash.into()));
    Value::Object(map)
}

fn unwritable(path: &str, e: io::Error) -> Failure {
    Failure::Usage(format!("cannot write {path}: {e}"))
}
