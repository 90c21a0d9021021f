use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use salem_core::cantor::{level_measure, CantorMeasure};
use salem_core::dimension::EnergySpec;
use salem_core::sumset::{PipelineConfig, Shape};
use salem_core::AtomMeasure;

/// Raw config text, its hash, and where outputs go.
pub struct Context {
    pub text: String,
    pub sha256: String,
    pub base: PathBuf,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

impl Context {
    pub fn load(path: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<Self> {
        let path = path.ok_or_else(|| anyhow!("--config is required"))?;
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let sha256 = hex::encode(Sha256::digest(text.as_bytes()));
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self {
            text,
            sha256,
            base,
            seed,
            out: out.to_path_buf(),
        })
    }

    pub fn parse<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_str(&self.text).context("invalid config")
    }

    /// Paths in configs are relative to the config file.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        let p = self.out.join(name);
        fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }

    /// Pretty JSON with `config_sha256` and `seed` ahead of the payload.
    pub fn write_json<T: Serialize>(&self, name: &str, seed: u64, payload: &T) -> Result<PathBuf> {
        let mut obj = serde_json::Map::new();
        obj.insert("config_sha256".into(), Value::String(self.sha256.clone()));
        obj.insert("seed".into(), Value::from(seed));
        match serde_json::to_value(payload)? {
            Value::Object(m) => obj.extend(m),
            other => {
                obj.insert("result".into(), other);
            }
        }
        self.write(name, &(serde_json::to_string_pretty(&Value::Object(obj))? + "\n"))
    }

    pub fn load_measure(&self, p: &Path) -> Result<CantorMeasure> {
        let p = self.resolve(p);
        let text = fs::read_to_string(&p).with_context(|| format!("reading measure {}", p.display()))?;
        let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
        let inner = match v {
            Value::Object(mut m) if m.contains_key("measure") => m.remove("measure").unwrap(),
            other => other,
        };
        Ok(serde_json::from_value(inner).with_context(|| format!("decoding measure {}", p.display()))?)
    }

    pub fn load_atoms(&self, p: &Path) -> Result<AtomMeasure<f64>> {
        let p = self.resolve(p);
        let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
        serde_json::from_str(&text).with_context(|| format!("decoding atoms {}", p.display()))
    }

    /// A set description: any [`Shape`], or
    /// `{"kind": "cantor_ref", "path": ..., "level": ...}` naming a stored
    /// measure whose level grid becomes a `grid` shape.
    pub fn shape(&self, v: &Value) -> Result<Shape> {
        if v.get("kind").and_then(Value::as_str) == Some("cantor_ref") {
            let r: CantorRef = serde_json::from_value(v.clone()).context("invalid cantor_ref")?;
            let cm = self.load_measure(&r.path)?;
            let level = r.level.unwrap_or(cm.depth());
            return Ok(Shape::Grid {
                grid: level_measure(&cm, level)?,
            });
        }
        serde_json::from_value(v.clone()).context("invalid set description")
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CantorRef {
    #[allow(dead_code)]
    kind: String,
    path: PathBuf,
    level: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructConfig {
    pub alpha: f64,
    pub n_star: u64,
    pub depth: usize,
    #[serde(default)]
    pub seed: u64,
    pub k_max: Option<u64>,
    pub zeta0: Option<f64>,
    pub d0: Option<f64>,
    pub retry_cap: Option<u32>,
    /// Atoms `[[y, w], ...]` of a product factor whose bounds are also
    /// certified.
    pub nu: Option<AtomMeasure<f64>>,
}

fn default_window() -> (f64, f64) {
    (16.0, 4096.0)
}

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub measure: PathBuf,
    pub level: Option<usize>,
    /// Defaults to the measure's own `k_max`.
    pub k_max: Option<u64>,
    #[serde(default = "default_window")]
    pub window: (f64, f64),
    #[serde(default = "yes")]
    pub log_correct: bool,
    /// Atom file for a product factor.
    pub product: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DimInput {
    Measure { path: PathBuf },
    SelfSimilar { base: u64, digits: Vec<u64>, depth: usize },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimConfig {
    pub input: DimInput,
    #[serde(default = "default_window")]
    pub window: (f64, f64),
    #[serde(default = "yes")]
    pub log_correct: bool,
    pub product: Option<PathBuf>,
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum EnergyMethods {
    Direct,
    Fourier,
    Both,
}

fn default_methods() -> EnergyMethods {
    EnergyMethods::Both
}

fn default_rule_points() -> usize {
    4096
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    pub input: Value,
    pub spec: EnergySpec,
    #[serde(default = "default_methods")]
    pub method: EnergyMethods,
    /// Midpoint atoms for the direct sum over a continuum.
    #[serde(default = "default_rule_points")]
    pub rule_points: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumsetConfig {
    pub r: Value,
    pub y: Value,
    pub z: Value,
    pub d: usize,
    pub pipeline: PipelineConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    pub measure: PathBuf,
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Csv,
    Json,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportConfig {
    pub measure: PathBuf,
    pub level: Option<usize>,
    pub format: ExportFormat,
}

pub fn check_window(w: (f64, f64)) -> Result<()> {
    if !(w.0 >= 0.0 && w.1 > w.0) {
        bail!("window [{}, {}] is empty", w.0, w.1);
    }
    Ok(())
}
