//! Flat `key = value` configuration files in TOML syntax.
//!
//! Every key is optional. Size-dependent parameters accept the string
//! `"auto"`, which defers to the image-size rule. Unknown keys are rejected.
//!
//! ```
//! let cfg = dermsal::config::parse_config("spatial.theta_degrees = 30\npost.se_radius = \"auto\"").unwrap();
//! assert_eq!(cfg.spatial.theta_degrees, 30.0);
//! assert_eq!(dermsal::config::parse_config(&dermsal::config::render_config(&cfg)).unwrap(), cfg);
//! ```

use std::path::Path;

use dermsal_core::coarse::WeightMode;
use dermsal_core::{IntensityMode, PipelineConfig};
use toml::Value;

use crate::error::{AppError, Result};

/// Every recognized key, in the order `render_config` writes them.
pub const KEYS: &[&str] = &[
    "intensity_mode",
    "io.resize_max",
    "hair.enabled",
    "hair.se_length",
    "hair.threshold",
    "guided.radius",
    "guided.epsilon",
    "guided.subsample",
    "spatial.theta_degrees",
    "spatial.guided.radius",
    "spatial.guided.epsilon",
    "spatial.guided.subsample",
    "lab.variance_denominator",
    "coarse.patch_size",
    "coarse.seed",
    "coarse.whitened",
    "coarse.weight_mode",
    "freq.kernel_size",
    "freq.f0",
    "freq.sigma_ratio",
    "freq.gaussian_sigma",
    "freq.w_opp",
    "freq.w_lab",
    "fusion.chart_mode",
    "fusion.entropy_bins",
    "post.se_radius",
    "post.keep_largest",
];

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => out.push((key, other.clone())),
        }
    }
}

fn bad(key: &str, want: &str, got: &Value) -> AppError {
    AppError::Config(format!("{key}: expected {want}, got {got}"))
}

fn as_bool(key: &str, v: &Value) -> Result<bool> {
    v.as_bool().ok_or_else(|| bad(key, "a boolean", v))
}

fn as_float(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(bad(key, "a number", v)),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize> {
    v.as_integer()
        .and_then(|i| usize::try_from(i).ok())
        .ok_or_else(|| bad(key, "a non-negative integer", v))
}

fn is_auto(v: &Value) -> bool {
    v.as_str() == Some("auto")
}

fn auto_usize(key: &str, v: &Value) -> Result<Option<usize>> {
    if is_auto(v) {
        Ok(None)
    } else {
        as_usize(key, v).map(Some).map_err(|_| bad(key, "an integer or \"auto\"", v))
    }
}

fn auto_float(key: &str, v: &Value) -> Result<Option<f64>> {
    if is_auto(v) {
        Ok(None)
    } else {
        as_float(key, v).map(Some).map_err(|_| bad(key, "a number or \"auto\"", v))
    }
}

fn floats<const N: usize>(key: &str, v: &Value) -> Result<[f64; N]> {
    let want = format!("an array of {N} numbers");
    let arr = v.as_array().filter(|a| a.len() == N).ok_or_else(|| bad(key, &want, v))?;
    let mut out = [0.0; N];
    for (o, x) in out.iter_mut().zip(arr) {
        *o = as_float(key, x).map_err(|_| bad(key, &want, v))?;
    }
    Ok(out)
}

/// Applies one key to `cfg`.
pub fn set_key(cfg: &mut PipelineConfig, key: &str, v: &Value) -> Result<()> {
    match key {
        "intensity_mode" => {
            let s = v.as_str().ok_or_else(|| bad(key, "a string", v))?;
            cfg.color.intensity_mode = IntensityMode::parse(s)
                .ok_or_else(|| bad(key, "\"broadly_tuned\" or \"raw_rgb\"", v))?;
        }
        "io.resize_max" => cfg.io.resize_max = as_usize(key, v)?,
        "hair.enabled" => cfg.hair.enabled = as_bool(key, v)?,
        "hair.se_length" => cfg.hair.se_length = auto_usize(key, v)?,
        "hair.threshold" => cfg.hair.threshold = as_float(key, v)?,
        "guided.radius" => cfg.guided.radius = auto_usize(key, v)?,
        "guided.epsilon" => cfg.guided.epsilon = as_float(key, v)?,
        "guided.subsample" => cfg.guided.subsample = as_usize(key, v)?,
        "spatial.theta_degrees" => cfg.spatial.theta_degrees = as_float(key, v)?,
        "spatial.guided.radius" => cfg.spatial.guided.radius = auto_usize(key, v)?,
        "spatial.guided.epsilon" => cfg.spatial.guided.epsilon = as_float(key, v)?,
        "spatial.guided.subsample" => cfg.spatial.guided.subsample = as_usize(key, v)?,
        "lab.variance_denominator" => cfg.lab.variance_denominator = as_bool(key, v)?,
        "coarse.patch_size" => cfg.coarse.patch_size = auto_usize(key, v)?,
        "coarse.seed" => cfg.coarse.seed = as_usize(key, v)? as u64,
        "coarse.whitened" => cfg.coarse.whitened = as_bool(key, v)?,
        "coarse.weight_mode" => {
            let s = v.as_str().ok_or_else(|| bad(key, "a string", v))?;
            cfg.coarse.weight_mode =
                WeightMode::parse(s).ok_or_else(|| bad(key, "\"membership\" or \"uniform\"", v))?;
        }
        "freq.kernel_size" => cfg.freq.kernel_size = as_usize(key, v)?,
        "freq.f0" => cfg.freq.f0 = as_float(key, v)?,
        "freq.sigma_ratio" => cfg.freq.sigma_ratio = as_float(key, v)?,
        "freq.gaussian_sigma" => cfg.freq.gaussian_sigma = auto_float(key, v)?,
        "freq.w_opp" => cfg.freq.w_opp = floats(key, v)?,
        "freq.w_lab" => cfg.freq.w_lab = floats(key, v)?,
        "fusion.chart_mode" => cfg.fusion.chart_mode = as_bool(key, v)?,
        "fusion.entropy_bins" => cfg.fusion.entropy_bins = as_usize(key, v)?,
        "post.se_radius" => cfg.post.se_radius = auto_usize(key, v)?,
        "post.keep_largest" => cfg.post.keep_largest = as_bool(key, v)?,
        _ => return Err(AppError::Config(format!("unknown key `{key}`"))),
    }
    Ok(())
}

/// Parses a config text over the defaults and validates the result.
pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| AppError::Config(e.to_string()))?;
    let mut entries = Vec::new();
    flatten("", &table, &mut entries);
    let mut cfg = PipelineConfig::default();
    for (k, v) in &entries {
        set_key(&mut cfg, k, v)?;
    }
    cfg.validate().map_err(|e| AppError::Config(e.to_string()))?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<PipelineConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_config(&text)
}

fn auto<T: Into<Value>>(v: Option<T>) -> Value {
    v.map_or_else(|| Value::String("auto".into()), Into::into)
}

fn array(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| Value::Float(x)).collect())
}

fn int(v: usize) -> Value {
    Value::Integer(v as i64)
}

/// The value `render_config` writes for `key`.
pub fn get_key(cfg: &PipelineConfig, key: &str) -> Option<Value> {
    let v = match key {
        "intensity_mode" => Value::String(cfg.color.intensity_mode.name().into()),
        "io.resize_max" => int(cfg.io.resize_max),
        "hair.enabled" => Value::Boolean(cfg.hair.enabled),
        "hair.se_length" => auto(cfg.hair.se_length.map(int)),
        "hair.threshold" => Value::Float(cfg.hair.threshold),
        "guided.radius" => auto(cfg.guided.radius.map(int)),
        "guided.epsilon" => Value::Float(cfg.guided.epsilon),
        "guided.subsample" => int(cfg.guided.subsample),
        "spatial.theta_degrees" => Value::Float(cfg.spatial.theta_degrees),
        "spatial.guided.radius" => auto(cfg.spatial.guided.radius.map(int)),
        "spatial.guided.epsilon" => Value::Float(cfg.spatial.guided.epsilon),
        "spatial.guided.subsample" => int(cfg.spatial.guided.subsample),
        "lab.variance_denominator" => Value::Boolean(cfg.lab.variance_denominator),
        "coarse.patch_size" => auto(cfg.coarse.patch_size.map(int)),
        "coarse.seed" => Value::Integer(cfg.coarse.seed as i64),
        "coarse.whitened" => Value::Boolean(cfg.coarse.whitened),
        "coarse.weight_mode" => Value::String(cfg.coarse.weight_mode.name().into()),
        "freq.kernel_size" => int(cfg.freq.kernel_size),
        "freq.f0" => Value::Float(cfg.freq.f0),
        "freq.sigma_ratio" => Value::Float(cfg.freq.sigma_ratio),
        "freq.gaussian_sigma" => auto(cfg.freq.gaussian_sigma.map(Value::Float)),
        "freq.w_opp" => array(&cfg.freq.w_opp),
        "freq.w_lab" => array(&cfg.freq.w_lab),
        "fusion.chart_mode" => Value::Boolean(cfg.fusion.chart_mode),
        "fusion.entropy_bins" => int(cfg.fusion.entropy_bins),
        "post.se_radius" => auto(cfg.post.se_radius.map(int)),
        "post.keep_largest" => Value::Boolean(cfg.post.keep_largest),
        _ => return None,
    };
    Some(v)
}

/// The effective configuration with every key spelled out.
pub fn render_config(cfg: &PipelineConfig) -> String {
    let mut out = String::new();
    for key in KEYS {
        let v = get_key(cfg, key).expect("every listed key renders");
        out.push_str(&format!("{key} = {v}\n"));
    }
    out
}
