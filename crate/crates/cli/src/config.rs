//! `key = value` config files merged into the argument list.
//!
//! Keys are flag names without the leading dashes. A key whose flag already
//! appears on the command line is ignored, so flags win. Boolean flags take
//! `true` or `false`.

use std::fs;

#[derive(Debug)]
pub struct ConfigError(pub String);

pub fn parse(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected key = value", i + 1)))?;
        let key = k.trim();
        if key.is_empty() || key.starts_with('-') {
            return Err(ConfigError(format!("line {}: bad key '{key}'", i + 1)));
        }
        let value = v.trim().trim_matches('"');
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn has_flag(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    let prefixed = format!("{flag}=");
    args.iter().any(|a| *a == flag || a.starts_with(&prefixed))
}

/// Returns `args` with the config file's entries appended as flags.
pub fn merge(args: Vec<String>) -> Result<Vec<String>, ConfigError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| ConfigError(format!("{path}: {e}")))?;
    let mut merged = args.clone();
    for (key, value) in parse(&text)? {
        if key == "config" || has_flag(&args, &key) {
            continue;
        }
        match value.as_str() {
            "true" => merged.push(format!("--{key}")),
            "false" => {}
            _ => {
                merged.push(format!("--{key}"));
                merged.push(value);
            }
        }
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_comments_and_quotes() {
        let kv = parse("# run\nq = 4\n\nlambda=\"3.5\"\n").unwrap();
        assert_eq!(kv, vec![("q".into(), "4".into()), ("lambda".into(), "3.5".into())]);
        assert!(parse("q 4").is_err());
    }

    #[test]
    fn flags_take_precedence() {
        let args = strings(&["mfrc", "critical-points", "--q=3"]);
        assert!(has_flag(&args, "q"));
        assert!(!has_flag(&args, "lambda"));
        assert_eq!(config_path(&strings(&["x", "--config", "a.cfg"])), Some("a.cfg".into()));
    }
}
