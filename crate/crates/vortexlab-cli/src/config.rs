//! Experiment configuration files.
//!
//! A configuration is INI text: `key = value` lines, optionally grouped under
//! `[section]` headers, with `#`/`;` comments.  Arrays are comma lists, with or
//! without brackets (`weights = [1, 2]`).  Every named section is one
//! scenario; keys outside any section are defaults shared by all scenarios.
//! A file without sections is a single scenario called `default`.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::{Ini, ParseOption};

/// Scenario name used when the configuration has no sections.
pub const DEFAULT_SCENARIO: &str = "default";

/// A configuration problem, located at a line of the file when possible.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl ConfigError {
    pub fn new(line: Option<usize>, message: impl Into<String>) -> Self {
        ConfigError { line, message: message.into() }
    }
}

#[derive(Clone, Debug)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

#[derive(Clone, Debug)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

/// A parsed configuration file.
#[derive(Debug)]
pub struct Config {
    base_dir: PathBuf,
    general: Vec<Entry>,
    sections: Vec<Section>,
    used_general: RefCell<BTreeSet<String>>,
}

/// Records the line of every section header and key, in file order.
fn locate(text: &str) -> (Vec<usize>, HashMap<(Option<String>, String), Vec<usize>>) {
    let mut headers = Vec::new();
    let mut keys: HashMap<(Option<String>, String), Vec<usize>> = HashMap::new();
    let mut current: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.split(']').next().unwrap_or("").trim().to_string();
            headers.push(n + 1);
            current = Some(name);
        } else if let Some(pos) = line.find(['=', ':']) {
            keys.entry((current.clone(), line[..pos].trim().to_string())).or_default().push(n + 1);
        }
    }
    for v in keys.values_mut() {
        v.reverse();
    }
    (headers, keys)
}

fn valid_scenario_name(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

impl Config {
    /// Reads and parses a configuration file; relative paths inside it are
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(None, format!("cannot read {}: {e}", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Config::parse(&text, &dir)
    }

    /// Configuration used when no file is given: one scenario, all defaults.
    pub fn defaults() -> Config {
        Config { base_dir: PathBuf::new(), general: Vec::new(), sections: Vec::new(), used_general: RefCell::default() }
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Config, ConfigError> {
        // The INI parser would read an unterminated header up to the end of the
        // file; report it at its own line instead.
        if let Some(n) = text.lines().position(|l| l.trim_start().starts_with('[') && !l.contains(']')) {
            return Err(ConfigError::new(Some(n + 1), "unterminated section header"));
        }
        let opt = ParseOption { enabled_escape: false, ..ParseOption::default() };
        let ini = Ini::load_from_str_opt(text, opt).map_err(|e| ConfigError::new(Some(e.line), e.msg.to_string()))?;
        let (headers, mut key_lines) = locate(text);
        let mut header_lines = headers.into_iter();
        let mut general = Vec::new();
        let mut sections: Vec<Section> = Vec::new();
        for (name, props) in ini.iter() {
            let section_line = match name {
                Some(_) => header_lines.next().unwrap_or(0),
                None => 0,
            };
            let mut entries: Vec<Entry> = Vec::new();
            for (key, value) in props.iter() {
                let line =
                    key_lines.get_mut(&(name.map(str::to_string), key.to_string())).and_then(Vec::pop).unwrap_or(0);
                if entries.iter().any(|e| e.key == key) {
                    return Err(ConfigError::new(Some(line), format!("duplicate key `{key}`")));
                }
                entries.push(Entry { key: key.to_string(), value: value.trim().to_string(), line });
            }
            match name {
                None => general.extend(entries),
                Some(name) => {
                    if !valid_scenario_name(name) {
                        return Err(ConfigError::new(
                            Some(section_line),
                            format!("section name `{name}` must use only letters, digits, `-`, `_` and `.`"),
                        ));
                    }
                    if sections.iter().any(|s| s.name == name) {
                        return Err(ConfigError::new(Some(section_line), format!("duplicate section `[{name}]`")));
                    }
                    sections.push(Section { name: name.to_string(), line: section_line, entries });
                }
            }
        }
        if general.is_empty() && sections.is_empty() {
            return Err(ConfigError::new(None, "configuration is empty"));
        }
        Ok(Config { base_dir: base_dir.to_path_buf(), general, sections, used_general: RefCell::default() })
    }

    /// Global seed from the shared section, if present.
    pub fn seed(&self) -> Result<Option<u64>, ConfigError> {
        self.used_general.borrow_mut().insert("seed".into());
        self.general.iter().find(|e| e.key == "seed").map(|e| parse_scalar(e, &e.value)).transpose()
    }

    /// One scope per scenario, in file order.
    pub fn scenarios(&self) -> Vec<Scope<'_>> {
        if self.sections.is_empty() {
            return vec![Scope { config: self, name: DEFAULT_SCENARIO.into(), line: None, own: &[], used: RefCell::default() }];
        }
        self.sections
            .iter()
            .map(|s| Scope { config: self, name: s.name.clone(), line: Some(s.line), own: &s.entries, used: RefCell::default() })
            .collect()
    }

    /// Fails on shared keys that no scenario consumed.
    pub fn check_general_used(&self) -> Result<(), ConfigError> {
        let used = self.used_general.borrow();
        match self.general.iter().find(|e| !used.contains(&e.key)) {
            Some(e) => Err(ConfigError::new(Some(e.line), format!("unknown key `{}`", e.key))),
            None => Ok(()),
        }
    }
}

fn parse_scalar<T: FromStr>(e: &Entry, s: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    s.trim().parse().map_err(|err| ConfigError::new(Some(e.line), format!("`{}`: cannot parse `{}`: {err}", e.key, s.trim())))
}

/// The keys visible to one scenario: its own section over the shared defaults.
#[derive(Debug)]
pub struct Scope<'a> {
    config: &'a Config,
    pub name: String,
    line: Option<usize>,
    own: &'a [Entry],
    used: RefCell<BTreeSet<String>>,
}

impl<'a> Scope<'a> {
    fn entry(&self, key: &str) -> Option<&'a Entry> {
        if let Some(e) = self.own.iter().find(|e| e.key == key) {
            self.used.borrow_mut().insert(key.into());
            return Some(e);
        }
        let e = self.config.general.iter().find(|e| e.key == key)?;
        self.config.used_general.borrow_mut().insert(key.into());
        Some(e)
    }

    /// Whether `key` is set for this scenario (does not consume it).
    pub fn has(&self, key: &str) -> bool {
        self.own.iter().chain(&self.config.general).any(|e| e.key == key)
    }

    /// An error located at `key` (or at the section header when unset).
    pub fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        let line = self.own.iter().chain(&self.config.general).find(|e| e.key == key).map(|e| e.line).or(self.line);
        ConfigError::new(line, format!("[{}] {}", self.name, message.into()))
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.entry(key).map(|e| parse_scalar(e, &e.value)).transpose()
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.opt(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.opt(key)?.ok_or_else(|| self.error(key, format!("missing required key `{key}`")))
    }

    /// A value from a fixed list of words.
    pub fn choice(&self, key: &str, options: &[&'static str], default: &'static str) -> Result<&'static str, ConfigError> {
        match self.entry(key) {
            None => Ok(default),
            Some(e) => options.iter().copied().find(|o| *o == e.value).ok_or_else(|| {
                ConfigError::new(Some(e.line), format!("`{key}` must be one of {}, got `{}`", options.join("|"), e.value))
            }),
        }
    }

    pub fn opt_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let Some(e) = self.entry(key) else { return Ok(None) };
        let body = e.value.trim();
        let body = match body.strip_prefix('[') {
            Some(rest) => rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::new(Some(e.line), format!("`{key}`: unterminated `[`")))?,
            None => body,
        };
        if body.trim().is_empty() {
            return Ok(Some(Vec::new()));
        }
        body.split(',').map(|s| parse_scalar(e, s)).collect::<Result<_, _>>().map(Some)
    }

    pub fn list<T: FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.opt_list(key)?.unwrap_or(default))
    }

    /// A path, resolved against the configuration file's directory.
    pub fn opt_path(&self, key: &str) -> Option<PathBuf> {
        self.entry(key).map(|e| self.config.base_dir.join(&e.value))
    }

    /// Fails on keys of this scenario's own section that were never read.
    pub fn check_used(&self) -> Result<(), ConfigError> {
        let used = self.used.borrow();
        match self.own.iter().find(|e| !used.contains(&e.key)) {
            Some(e) => Err(ConfigError::new(Some(e.line), format!("[{}] unknown key `{}`", self.name, e.key))),
            None => Ok(()),
        }
    }
}
