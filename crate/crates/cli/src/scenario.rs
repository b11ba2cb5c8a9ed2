//! Scenario files: a command, an action, an `[inputs]` table and optional
//! `[tolerances]`.
//!
//! ```toml
//! name = "strip-poincare"
//! command = "verify"
//! action = "poincare"
//!
//! [inputs]
//! field = "strip"
//! n = 33
//!
//! [tolerances]
//! h2 = 10.0
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Params,
    Exact,
    Solve,
    Verify,
    Parabolic,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Params => "params",
            Command::Exact => "exact",
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Parabolic => "parabolic",
        }
    }

    pub fn actions(self) -> &'static [&'static str] {
        match self {
            Command::Params => &["check", "menu", "perturb"],
            Command::Exact => &["eval", "residual", "ode"],
            Command::Solve => &["slab", "radial"],
            Command::Verify => &["kato", "boundary", "picone", "poincare", "jacobi", "gradient-bound"],
            Command::Parabolic => &["check"],
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Command::Params, Command::Exact, Command::Solve, Command::Verify, Command::Parabolic]
            .into_iter()
            .find(|c| c.name() == s)
    }
}

/// A malformed or inconsistent configuration; maps to exit status 2.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDoc {
    name: Option<String>,
    command: Option<String>,
    action: Option<String>,
    #[serde(default)]
    inputs: toml::Table,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
struct TypedDoc<T> {
    inputs: T,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub command: Command,
    pub action: String,
    pub inputs: toml::Table,
    pub tolerances: BTreeMap<String, f64>,
    /// Path and text of the config file, kept while the inputs are untouched
    /// so that diagnostics can point at lines.
    source: Option<(PathBuf, String)>,
}

impl Scenario {
    /// A scenario read from `path`. `expect` pins command and action when the
    /// file is used from a subcommand; the file may then omit them.
    pub fn from_file(path: &Path, expect: Option<(Command, &str)>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: cannot read config: {e}", path.display())))?;
        Self::from_text(&text, Some(path), expect)
    }

    pub fn from_text(text: &str, path: Option<&Path>, expect: Option<(Command, &str)>) -> Result<Self, ConfigError> {
        let label = path.map_or_else(|| "<config>".to_string(), |p| p.display().to_string());
        let doc: FileDoc = toml::from_str(text).map_err(|e| ConfigError(format!("{label}: {}", e.to_string().trim_end())))?;
        let command = match (doc.command.as_deref(), expect) {
            (Some(c), _) => {
                let parsed = Command::parse(c).ok_or_else(|| {
                    ConfigError(format!("{label}: field `command`: unknown command `{c}`"))
                })?;
                if let Some((want, _)) = expect {
                    if want != parsed {
                        return Err(ConfigError(format!(
                            "{label}: field `command`: file is for `{c}`, invoked as `{}`",
                            want.name()
                        )));
                    }
                }
                parsed
            }
            (None, Some((want, _))) => want,
            (None, None) => return Err(ConfigError(format!("{label}: missing field `command`"))),
        };
        let action = match (doc.action, expect) {
            (Some(a), Some((_, want))) if a != want => {
                return Err(ConfigError(format!("{label}: field `action`: file is for `{a}`, invoked as `{want}`")))
            }
            (Some(a), _) => a,
            (None, Some((_, want))) => want.to_string(),
            (None, None) => return Err(ConfigError(format!("{label}: missing field `action`"))),
        };
        let mut s = Self::new(command, &action, doc.inputs)?;
        s.tolerances = doc.tolerances;
        s.name = doc
            .name
            .or_else(|| path.and_then(|p| p.file_stem()).map(|s| s.to_string_lossy().into_owned()))
            .unwrap_or_else(|| s.name.clone());
        s.source = Some((path.map_or_else(|| PathBuf::from("<config>"), Path::to_path_buf), text.to_string()));
        Ok(s)
    }

    pub fn new(command: Command, action: &str, inputs: toml::Table) -> Result<Self, ConfigError> {
        if !command.actions().contains(&action) {
            return Err(ConfigError(format!(
                "field `action`: `{}` has no action `{action}` (expected one of {})",
                command.name(),
                command.actions().join(", ")
            )));
        }
        Ok(Self {
            name: format!("{}-{action}", command.name()),
            command,
            action: action.to_string(),
            inputs,
            tolerances: BTreeMap::new(),
            source: None,
        })
    }

    /// Applies `KEY=VAL` to the inputs; `VAL` is read as a TOML value and
    /// falls back to a bare string.
    pub fn set_input(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = split_assignment(assignment)?;
        let value = toml::from_str::<toml::Table>(&format!("v = {value}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        self.inputs.insert(key.to_string(), value);
        self.source = None;
        Ok(())
    }

    pub fn set_tolerance(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = split_assignment(assignment)?;
        let v: f64 = value
            .parse()
            .map_err(|_| ConfigError(format!("--tol {key}: `{value}` is not a number")))?;
        self.tolerances.insert(key.to_string(), v);
        Ok(())
    }

    /// The inputs as a typed struct, with a line diagnostic when they came
    /// straight from a file.
    pub fn typed_inputs<T: DeserializeOwned>(&self) -> Result<T, ConfigError> {
        match &self.source {
            Some((path, text)) if !self.inputs.is_empty() => toml::from_str::<TypedDoc<T>>(text).map(|d| d.inputs).map_err(|e| {
                ConfigError(format!("{}: [inputs]: {}", path.display(), e.to_string().trim_end()))
            }),
            _ => toml::Value::Table(self.inputs.clone())
                .try_into()
                .map_err(|e: toml::de::Error| {
                    ConfigError(format!("[inputs]: {}", e.to_string().trim_end()))
                }),
        }
    }

    /// Tolerance `key`, falling back to `default`. Rejects keys outside `allowed`.
    pub fn tolerance(&self, allowed: &[&str], key: &str, default: f64) -> Result<f64, ConfigError> {
        if let Some(bad) = self.tolerances.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(ConfigError(format!(
                "field `tolerances.{bad}`: not used by `{} {}` (expected one of {})",
                self.command.name(),
                self.action,
                allowed.join(", ")
            )));
        }
        let v = self.tolerances.get(key).copied().unwrap_or(default);
        if v.is_nan() || v < 0.0 {
            return Err(ConfigError(format!("field `tolerances.{key}`: must be >= 0, got {v}")));
        }
        Ok(v)
    }

    pub fn tolerance_given(&self, key: &str) -> bool {
        self.tolerances.contains_key(key)
    }

    pub fn label(&self) -> String {
        self.source.as_ref().map_or_else(|| self.name.clone(), |(p, _)| p.display().to_string())
    }
}

fn split_assignment(s: &str) -> Result<(&str, &str), ConfigError> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim(), v.trim())),
        _ => Err(ConfigError(format!("expected KEY=VAL, got `{s}`"))),
    }
}
