//! Run configuration: command-line flags layered over an optional
//! `key=value` file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use alpha2_dynamo::pencil::x0_range;

/// Error in user-supplied configuration; maps to exit status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct X0Range {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl X0Range {
    /// `min:max:step`, or a single value.
    pub fn parse(s: &str) -> Result<Self, UsageError> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |p: &str| {
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| UsageError(format!("invalid number `{p}` in x0 range `{s}`")))
        };
        match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                Ok(Self { min: v, max: v, step: 1.0 })
            }
            [a, b, c] => {
                let r = Self { min: num(a)?, max: num(b)?, step: num(c)? };
                if !(r.step > 0.0) {
                    return usage(format!("x0 step must be positive, got {}", r.step));
                }
                if r.max < r.min {
                    return usage(format!("x0 range is empty: {} > {}", r.min, r.max));
                }
                Ok(r)
            }
            _ => usage(format!("x0 must be `min:max:step` or a single value, got `{s}`")),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        x0_range(self.min, self.max, self.step)
    }
}

pub fn parse_l_list(s: &str) -> Result<Vec<usize>, UsageError> {
    let out: Result<Vec<usize>, _> = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<usize>().map_err(|_| UsageError(format!("invalid l value `{p}`"))))
        .collect();
    let out = out?;
    if out.is_empty() {
        return usage("l list is empty");
    }
    Ok(out)
}

pub fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>, UsageError> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| UsageError(format!("invalid {what} value `{p}`")))
        })
        .collect()
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return usage(format!("{}:{}: expected key=value", path.display(), k + 1));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Options a command can receive from either source.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub l: Option<String>,
    pub x0: Option<String>,
    pub length: Option<f64>,
    pub n: Option<usize>,
    pub out: Option<PathBuf>,
    pub svg: bool,
    pub delta: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub l_list: Vec<usize>,
    pub x0: X0Range,
    pub length: f64,
    pub n: usize,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
    pub deltas: Vec<f64>,
}

pub struct Defaults {
    pub l: &'static str,
    pub x0: &'static str,
}

pub const KNOWN_KEYS: [&str; 7] = ["l", "x0", "L", "n", "out", "svg", "delta"];

impl RunConfig {
    pub fn resolve(flags: &Overrides, file: &BTreeMap<String, String>, defaults: &Defaults) -> Result<Self, UsageError> {
        if let Some(k) = file.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return usage(format!("unknown config key `{k}`"));
        }
        let pick = |flag: &Option<String>, key: &str, fallback: &str| -> String {
            flag.clone()
                .or_else(|| file.get(key).cloned())
                .unwrap_or_else(|| fallback.to_string())
        };
        let l_list = parse_l_list(&pick(&flags.l, "l", defaults.l))?;
        let x0 = X0Range::parse(&pick(&flags.x0, "x0", defaults.x0))?;
        let length = match (flags.length, file.get("L")) {
            (Some(v), _) => v,
            (None, Some(s)) => s.parse().map_err(|_| UsageError(format!("invalid L `{s}`")))?,
            (None, None) => 100.0,
        };
        let n = match (flags.n, file.get("n")) {
            (Some(v), _) => v,
            (None, Some(s)) => s.parse().map_err(|_| UsageError(format!("invalid n `{s}`")))?,
            (None, None) => 8000,
        };
        let output_dir = flags
            .out
            .clone()
            .or_else(|| file.get("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let emit_svg = flags.svg
            || match file.get("svg").map(String::as_str) {
                None | Some("false") | Some("0") => false,
                Some("true") | Some("1") => true,
                Some(v) => return usage(format!("invalid svg flag `{v}`")),
            };
        let deltas = parse_f64_list(&pick(&flags.delta, "delta", "-0.1,-0.05,-0.025,0,0.025,0.05,0.1"), "delta")?;
        let cfg = Self { l_list, x0, length, n, output_dir, emit_svg, deltas };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        if !(self.length > 10.0 && self.length.is_finite()) {
            return usage(format!("L must exceed 10, got {}", self.length));
        }
        if self.n < 100 {
            return usage(format!("n must be at least 100, got {}", self.n));
        }
        if !(self.x0.step > 0.0) {
            return usage("x0 step must be positive");
        }
        Ok(())
    }
}
