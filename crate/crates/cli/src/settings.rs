//! `key = value` settings from an optional file, overridden by flags.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("config line {}: expected `key = value`", i + 1)))?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Settings { values })
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Settings::default()),
            Some(p) => Settings::parse(&std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?),
        }
    }

    /// Applies a flag value when the flag was given.
    pub fn flag(&mut self, key: &str, value: Option<impl ToString>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v.to_string());
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.values
            .get(key)
            .map(|v| v.parse().map_err(|_| CliError::config(format!("bad value `{v}` for {key}"))))
            .transpose()
    }

    pub fn get_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Fails on any key outside `known`.
    pub fn check_keys(&self, known: impl Fn(&str) -> bool) -> Result<(), CliError> {
        match self.values.keys().find(|k| !known(k)) {
            Some(k) => Err(CliError::config(format!("unknown config key `{k}`"))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let mut s = Settings::parse("# header\nepochs = 10\nlr_factor=0.5 # trailing\n\n").unwrap();
        s.flag("epochs", Some(3));
        s.flag("warmup_steps", None::<u64>);
        assert_eq!(s.get::<usize>("epochs").unwrap(), Some(3));
        assert_eq!(s.get::<f64>("lr_factor").unwrap(), Some(0.5));
        assert_eq!(s.get::<u64>("warmup_steps").unwrap(), None);
        assert!(s.get::<usize>("lr_factor").is_err());
        assert!(s.check_keys(|k| k == "epochs").is_err());
        assert!(Settings::parse("no equals sign").is_err());
    }
}
