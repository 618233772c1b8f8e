//! Plain-text `key = value` files with optional `[section]` headers.

use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    /// Empty for keys before the first section header.
    pub section: String,
    pub key: String,
    pub value: String,
    pub line: usize,
}

impl Entry {
    pub fn parse<T: FromStr>(&self) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.value
            .parse()
            .map_err(|e| self.error(format!("{}: {e}", self.key)))
    }

    pub fn parse_bool(&self) -> Result<bool, ConfigError> {
        match self.value.to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            _ => Err(self.error(format!(
                "{}: expected a boolean, got `{}`",
                self.key, self.value
            ))),
        }
    }

    /// Comma-separated list; empty value gives an empty list.
    pub fn list(&self) -> Vec<String> {
        self.value
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    }

    pub fn error(&self, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: self.line,
            message: message.into(),
        }
    }

    pub fn unknown(&self) -> ConfigError {
        let name = if self.section.is_empty() {
            self.key.clone()
        } else {
            format!("[{}] {}", self.section, self.key)
        };
        self.error(format!("unknown key {name}"))
    }
}

/// Parses lines of `key = value`; `#` starts a comment.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError {
                line,
                message: format!("malformed section header `{body}`"),
            })?;
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| ConfigError {
            line,
            message: format!("expected `key = value`, got `{body}`"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError {
                line,
                message: "empty key".into(),
            });
        }
        out.push(Entry {
            section: section.clone(),
            key: key.to_string(),
            value: value.trim().to_string(),
            line,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let text = "seed = 3\n[reward] # weights\nreward = distance\nbeta_distance=0.5\n\n[eval]\nagents = a, b ,c\n";
        let e = parse_entries(text).unwrap();
        assert_eq!(e.len(), 4);
        assert_eq!(e[0].section, "");
        assert_eq!(e[1].section, "reward");
        assert_eq!(e[2].parse::<f64>().unwrap(), 0.5);
        assert_eq!(e[3].list(), vec!["a", "b", "c"]);
        assert_eq!(e[3].line, 7);
    }

    #[test]
    fn malformed_lines() {
        assert_eq!(parse_entries("a = 1\nnonsense\n").unwrap_err().line, 2);
        assert!(parse_entries("[open\n").is_err());
        let e = parse_entries("x = abc").unwrap();
        assert!(e[0].parse::<f64>().is_err());
        assert!(e[0].parse_bool().is_err());
    }
}
