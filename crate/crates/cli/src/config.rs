//! `key = value` run files. Keys are long flag names without the dashes;
//! flags given on the command line take precedence.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use clap::ValueEnum;

use crate::error::CliError;

pub const KNOWN_KEYS: &[&str] = &[
    "chi", "kappa", "seed", "out", "format", "h0", "h1", "h2", "r", "gamma", "c", "t-final", "method", "step",
    "rtol", "atol", "sample-every", "max-steps", "generator", "summary", "samples", "chi-range", "kappa-range",
    "grid", "c-max", "seed-point", "svg",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", no + 1)))?;
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("config line {}: unknown key {key:?}", no + 1)));
            }
            if entries.insert(key.clone(), value.trim().to_owned()).is_some() {
                return Err(CliError::Usage(format!("config line {}: duplicate key {key:?}", no + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| CliError::Usage(format!("config key {key}: {e}"))))
            .transpose()
    }

    pub fn get_enum<T: ValueEnum>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.raw(key)
            .map(|v| T::from_str(v, true).map_err(|e| CliError::Usage(format!("config key {key}: {e}"))))
            .transpose()
    }

    /// Semicolon-separated list.
    pub fn get_list<T>(&self, key: &str) -> Result<Vec<T>, CliError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        let Some(v) = self.raw(key) else { return Ok(vec![]) };
        v.split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<T>().map_err(|e| CliError::Usage(format!("config key {key}: {e}"))))
            .collect()
    }
}

/// Flag value, else file value.
pub fn pick<T>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>, CliError>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

pub fn pick_enum<T: ValueEnum>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>, CliError> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get_enum(key),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::{Format, Span};

    #[test]
    fn parses_lines_and_comments() {
        let f = ConfigFile::parse("# run\nchi = 1.5\n\nkappa=-2\nchi_range = 0:2\nformat = JSON\n").unwrap();
        assert_eq!(f.get::<f64>("chi").unwrap(), Some(1.5));
        assert_eq!(f.get::<f64>("kappa").unwrap(), Some(-2.0));
        assert_eq!(f.get::<Span>("chi-range").unwrap(), Some(Span { lo: 0.0, hi: 2.0 }));
        assert_eq!(f.get_enum::<Format>("format").unwrap(), Some(Format::Json));
        assert_eq!(f.get::<f64>("h0").unwrap(), None);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(ConfigFile::parse("chi 1"), Err(CliError::Usage(_))));
        assert!(matches!(ConfigFile::parse("colour = red"), Err(CliError::Usage(_))));
        assert!(matches!(ConfigFile::parse("chi = 1\nchi = 2"), Err(CliError::Usage(_))));
        let f = ConfigFile::parse("chi = abc").unwrap();
        assert!(f.get::<f64>("chi").is_err());
    }

    #[test]
    fn flags_take_precedence() {
        let f = ConfigFile::parse("chi = 3").unwrap();
        assert_eq!(pick(Some(1.0), &f, "chi").unwrap(), Some(1.0));
        assert_eq!(pick::<f64>(None, &f, "chi").unwrap(), Some(3.0));
    }

    #[test]
    fn lists() {
        let f = ConfigFile::parse("seed-point = 0,0.1; 3.14,0").unwrap();
        let v: Vec<crate::args::SeedPoint> = f.get_list("seed-point").unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].c, 0.1);
    }
}
