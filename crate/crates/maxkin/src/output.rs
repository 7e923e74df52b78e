//! Deterministic text output: CSV files with `#` metadata lines and the
//! run summary.

use std::fmt::Write as _;
use std::path::Path;

use maxkin_core::model::{MaxwellModel, TransformKind};

use crate::run::RunError;

/// Fixed-width scientific notation keeps outputs diff-able across runs.
pub fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

/// FNV-1a over the canonical atom serialization: a stable fingerprint of the
/// discretized model for output provenance.
pub fn model_hash(model: &MaxwellModel) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for b in bytes {
            h ^= u64::from(*b);
            h = h.wrapping_mul(PRIME);
        }
    };
    eat(match model.transform {
        TransformKind::Fourier => b"fourier",
        TransformKind::Laplace => b"laplace",
    });
    eat(&model.dimension_hint.unwrap_or(0).to_le_bytes());
    for term in &model.terms {
        eat(&(term.order as u64).to_le_bytes());
        for node in &term.nodes {
            eat(&node.weight.to_bits().to_le_bytes());
            for a in &node.scales {
                eat(&a.to_bits().to_le_bytes());
            }
        }
    }
    h
}

/// A CSV under construction: metadata lines, one header, data rows and an
/// optional trailing summary block.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(task: &str, model: &MaxwellModel, config_echo: &str) -> Self {
        let mut buf = String::new();
        let _ = writeln!(buf, "# maxkin {task}");
        let _ = writeln!(buf, "# model_hash = {:016x}", model_hash(model));
        let _ = writeln!(buf, "# config: {config_echo}");
        Csv { buf }
    }

    pub fn header(&mut self, columns: &str) {
        let _ = writeln!(self.buf, "{columns}");
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.buf, "{}", fields.join(","));
    }

    pub fn comment(&mut self, line: &str) {
        let _ = writeln!(self.buf, "# {line}");
    }

    pub fn write_to(&self, dir: &Path, name: &str) -> Result<(), RunError> {
        std::fs::write(dir.join(name), &self.buf)?;
        Ok(())
    }
}

/// The run summary: resolved parameters and headline numbers.
#[derive(Default)]
pub struct Summary {
    lines: Vec<String>,
}

impl Summary {
    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.lines.push(format!("{key} = {}", value.into()));
    }

    pub fn section(&mut self, name: &str) {
        self.lines.push(format!("# {name}"));
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), RunError> {
        let mut text = self.lines.join("\n");
        text.push('\n');
        std::fs::write(dir.join("summary.txt"), text)?;
        Ok(())
    }
}
