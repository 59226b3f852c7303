//! Flat `key = value` experiment configuration.
//!
//! A config is a list of assignments. Keys are dotted paths, values are
//! numbers, booleans, bare or quoted strings, or `[a, b, ...]` arrays.
//! Several assignments may share a line; `#` starts a comment.
//!
//! ```text
//! command = lsq
//! seed = 1
//! alpha = 0.1
//! lsq.nodes = 100   lsq.rows = 2
//! analyze.grid = [250, 500, 1000]
//! ```
//!
//! Values are layered: built-in defaults, then the preset, then the config
//! file, then `--set` flags in order, then `--seed`.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Bool(bool),
    Str(String),
    List(Vec<f64>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "\"{s}\""),
            Value::List(v) => {
                let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "[{}]", items.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Int,
    Float,
    Bool,
    Choice(&'static [&'static str]),
    Text,
    IntList,
}

struct Key {
    name: &'static str,
    kind: Kind,
    default: Option<&'static str>,
}

const fn key(name: &'static str, kind: Kind, default: &'static str) -> Key {
    Key {
        name,
        kind,
        default: Some(default),
    }
}

const fn required(name: &'static str, kind: Kind) -> Key {
    Key {
        name,
        kind,
        default: None,
    }
}

const COMMANDS: &[&str] = &["lsq", "track", "mc", "analyze", "selftest"];

const SCHEMA: &[Key] = &[
    required("command", Kind::Choice(COMMANDS)),
    required("seed", Kind::Int),
    key("alpha", Kind::Float, "0.1"),
    key("horizon", Kind::Int, "1000"),
    key("seeds", Kind::Int, "1"),
    key("lsq.nodes", Kind::Int, "100"),
    key("lsq.rows", Kind::Int, "2"),
    key("lsq.dim", Kind::Int, "3"),
    key("lsq.sigma_obs", Kind::Float, "0.1"),
    key("lsq.trajectory", Kind::Choice(&["decaying", "constant", "static"]), "decaying"),
    key("lsq.scale", Kind::Float, "0.05"),
    key("lsq.decay", Kind::Float, "0.75"),
    key("lsq.speed", Kind::Float, "0.01"),
    key("lsq.sampling", Kind::Choice(&["growing", "full"]), "growing"),
    key("lsq.rho", Kind::Float, "1"),
    key("lsq.zero_columns", Kind::IntList, "[]"),
    key("lsq.scenario_seed", Kind::Int, "-1"),
    key("analyze.grid", Kind::IntList, "[250, 500, 1000, 2000, 4000]"),
    key("track.scenario", Kind::Choice(&["diverging", "large"]), "diverging"),
    key("track.theta", Kind::Float, "-1"),
    key("track.eps_w", Kind::Float, "0.54"),
    key("track.eta", Kind::Float, "0.54"),
    key("track.speed_cap", Kind::Float, "0.2"),
    key("track.alpha_lambda", Kind::Float, "0.05"),
    key("track.alpha_nu", Kind::Float, "0.05"),
    key("track.nu_init", Kind::Float, "-1"),
    key("track.target_noise", Kind::Float, "0.02"),
    key("track.sign", Kind::Choice(&["printed", "ascent"]), "printed"),
    key("track.clip_speed", Kind::Bool, "true"),
    key("track.reference_iters", Kind::Int, "0"),
    key("track.burn_in", Kind::Int, "50"),
    key("mc.source", Kind::Choice(&["synthetic", "movielens"]), "synthetic"),
    key("mc.path", Kind::Text, "\"\""),
    key("mc.rows", Kind::Int, "40"),
    key("mc.cols", Kind::Int, "30"),
    key("mc.rank", Kind::Int, "2"),
    key("mc.drift", Kind::Float, "0.01"),
    key("mc.observed", Kind::Float, "0.4"),
    key("mc.windows", Kind::Int, "20"),
    key("mc.step", Kind::Float, "1"),
    key("mc.lambda", Kind::Float, "-1"),
    key("mc.repeats", Kind::Int, "1"),
    key("mc.window_days", Kind::Float, "30"),
    key("mc.max_users", Kind::Int, "500"),
    key("mc.max_items", Kind::Int, "500"),
];

pub const PRESETS: &[(&str, &str)] = &[
    ("fig1", "command = lsq  seed = 1  alpha = 0.1  horizon = 4000  seeds = 50"),
    ("fig2", "command = track  seed = 1  horizon = 500  track.scenario = diverging"),
    ("fig4", "command = track  seed = 1  horizon = 100  track.scenario = large"),
    (
        "movielens",
        "command = mc  seed = 1  mc.source = movielens  mc.path = \"ratings.dat\"  mc.step = 1",
    ),
];

fn schema(name: &str) -> Option<&'static Key> {
    SCHEMA.iter().find(|k| k.name == name)
}

/// Splits text into `(line, key, raw value)` triples.
fn assignments(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let mut rest = line.trim_start();
        while !rest.is_empty() && !rest.starts_with('#') {
            let Some(eq) = rest.find('=') else {
                return err(format!("line {ln}: expected `key = value`, found `{}`", rest.trim()));
            };
            let name = rest[..eq].trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return err(format!("line {ln}: malformed key `{name}`"));
            }
            let after = rest[eq + 1..].trim_start();
            let (raw, tail) = match after.chars().next() {
                Some('[') => match after.find(']') {
                    Some(end) => after.split_at(end + 1),
                    None => return err(format!("line {ln}: unterminated array for `{name}`")),
                },
                Some('"') => match after[1..].find('"') {
                    Some(end) => after.split_at(end + 2),
                    None => return err(format!("line {ln}: unterminated string for `{name}`")),
                },
                Some(_) => after.split_at(after.find(char::is_whitespace).unwrap_or(after.len())),
                None => return err(format!("line {ln}: missing value for `{name}`")),
            };
            out.push((ln, name.to_string(), raw.to_string()));
            rest = tail.trim_start();
        }
    }
    Ok(out)
}

fn parse_value(name: &str, kind: Kind, raw: &str) -> Result<Value, ConfigError> {
    let mismatch = |what: &str| ConfigError(format!("key `{name}`: expected {what}, got `{raw}`"));
    let unquoted = raw.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(raw);
    match kind {
        Kind::Int => {
            let v: i64 = raw.parse().map_err(|_| mismatch("an integer"))?;
            Ok(Value::Num(v as f64))
        }
        Kind::Float => {
            let v: f64 = raw.parse().map_err(|_| mismatch("a number"))?;
            if !v.is_finite() {
                return Err(mismatch("a finite number"));
            }
            Ok(Value::Num(v))
        }
        Kind::Bool => match raw {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(mismatch("true or false")),
        },
        Kind::Choice(options) => {
            if options.contains(&unquoted) {
                Ok(Value::Str(unquoted.to_string()))
            } else {
                Err(mismatch(&format!("one of {}", options.join(", "))))
            }
        }
        Kind::Text => Ok(Value::Str(unquoted.to_string())),
        Kind::IntList => {
            let inner = raw
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| mismatch("an array `[...]`"))?;
            let items = inner
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<i64>().map(|v| v as f64).map_err(|_| mismatch("an array of integers")))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Value::List(items))
        }
    }
}

/// Resolved configuration: every schema key mapped to a value.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    values: BTreeMap<String, Value>,
}

/// Layered configuration under construction.
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    values: BTreeMap<String, Value>,
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Applies every assignment in `text`; later assignments win.
    pub fn apply_text(&mut self, text: &str) -> Result<&mut Self, ConfigError> {
        for (ln, name, raw) in assignments(text)? {
            let Some(k) = schema(&name) else {
                return err(format!("line {ln}: unknown key `{name}`"));
            };
            self.values.insert(name.clone(), parse_value(&name, k.kind, &raw)?);
        }
        Ok(self)
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<&mut Self, ConfigError> {
        let Some((name, raw)) = assignment.split_once('=') else {
            return err(format!("--set expects key=value, got `{assignment}`"));
        };
        let name = name.trim();
        let Some(k) = schema(name) else {
            return err(format!("unknown key `{name}`"));
        };
        self.values.insert(name.to_string(), parse_value(name, k.kind, raw.trim())?);
        Ok(self)
    }

    pub fn preset(&mut self, name: &str) -> Result<&mut Self, ConfigError> {
        match PRESETS.iter().find(|(n, _)| *n == name) {
            Some((_, text)) => self.apply_text(text),
            None => {
                let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                err(format!("unknown preset `{name}` (available: {})", names.join(", ")))
            }
        }
    }

    pub fn build(&self) -> Result<Config, ConfigError> {
        let mut values = BTreeMap::new();
        for k in SCHEMA {
            let v = match (self.values.get(k.name), k.default) {
                (Some(v), _) => v.clone(),
                (None, Some(d)) => parse_value(k.name, k.kind, d)?,
                (None, None) => return err(format!("missing required key `{}`", k.name)),
            };
            values.insert(k.name.to_string(), v);
        }
        let config = Config { values };
        config.validate()?;
        Ok(config)
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        ConfigBuilder::new().apply_text(text)?.build()
    }

    fn get(&self, name: &str) -> &Value {
        self.values
            .get(name)
            .unwrap_or_else(|| panic!("key `{name}` is not in the schema"))
    }

    pub fn float(&self, name: &str) -> f64 {
        match self.get(name) {
            Value::Num(v) => *v,
            other => panic!("key `{name}` holds {other}"),
        }
    }

    pub fn int(&self, name: &str) -> i64 {
        self.float(name) as i64
    }

    /// Nonnegative integer; validation guarantees the cast is lossless.
    pub fn count(&self, name: &str) -> usize {
        self.int(name).max(0) as usize
    }

    pub fn flag(&self, name: &str) -> bool {
        match self.get(name) {
            Value::Bool(b) => *b,
            other => panic!("key `{name}` holds {other}"),
        }
    }

    pub fn text(&self, name: &str) -> &str {
        match self.get(name) {
            Value::Str(s) => s,
            other => panic!("key `{name}` holds {other}"),
        }
    }

    pub fn list(&self, name: &str) -> Vec<usize> {
        match self.get(name) {
            Value::List(v) => v.iter().map(|x| *x as usize).collect(),
            other => panic!("key `{name}` holds {other}"),
        }
    }

    pub fn command(&self) -> &str {
        self.text("command")
    }

    pub fn seed(&self) -> u64 {
        self.int("seed") as u64
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.int("seed") < 0 {
            return err("key `seed`: must be >= 0");
        }
        for name in [
            "horizon",
            "seeds",
            "lsq.nodes",
            "lsq.rows",
            "lsq.dim",
            "mc.rows",
            "mc.cols",
            "mc.rank",
            "mc.windows",
            "mc.repeats",
        ] {
            if self.int(name) < 1 {
                return err(format!("key `{name}`: must be >= 1"));
            }
        }
        for name in ["alpha", "mc.step", "mc.window_days", "lsq.rho"] {
            if !(self.float(name) > 0.0) {
                return err(format!("key `{name}`: must be positive"));
            }
        }
        for name in ["track.reference_iters", "track.burn_in", "mc.max_users", "mc.max_items"] {
            if self.int(name) < 0 {
                return err(format!("key `{name}`: must be >= 0"));
            }
        }
        if !(0.0..=1.0).contains(&self.float("mc.observed")) {
            return err("key `mc.observed`: must lie in [0, 1]");
        }
        let dim = self.count("lsq.dim");
        if let Some(c) = self.list("lsq.zero_columns").into_iter().find(|c| *c >= dim) {
            return err(format!("key `lsq.zero_columns`: column {c} outside 0..{dim}"));
        }
        if self.list("analyze.grid").is_empty() {
            return err("key `analyze.grid`: must not be empty");
        }
        if self.text("mc.source") == "movielens" && self.text("mc.path").is_empty() {
            return err("key `mc.path`: required when mc.source = movielens");
        }
        Ok(())
    }

    /// One `key = value` line per key, sorted; the input to the config hash.
    pub fn canonical(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
