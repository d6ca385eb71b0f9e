//! Flat JSON config files, merged into the argument list so that explicit
//! flags still win.

use serde_json::Value;
use std::path::Path;

/// Returns `argv` with the keys of the `--config` file spliced in right
/// after the subcommand. Keys whose flag already appears on the command
/// line are dropped, so explicit flags take precedence over the file.
pub fn merge(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    let path = match argv[pos].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => argv
            .get(pos + 1)
            .cloned()
            .ok_or_else(|| "--config needs a file path".to_string())?,
    };
    let given = |flag: &str| {
        argv.iter()
            .any(|a| a == flag || a.strip_prefix(flag).is_some_and(|r| r.starts_with('=')))
    };
    let injected: Vec<String> = flags_from_file(Path::new(&path))?
        .into_iter()
        .filter(|(flag, _)| !given(flag))
        .flat_map(|(flag, value)| std::iter::once(flag).chain(value))
        .collect();
    let sub = argv
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map(|i| i + 2)
        .unwrap_or(argv.len());
    let mut out = argv[..sub.min(argv.len())].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[sub.min(argv.len())..]);
    Ok(out)
}

/// `(flag, value)` pairs; switches carry no value and `snake_case` keys map
/// to their dashed flag names.
fn flags_from_file(path: &Path) -> Result<Vec<(String, Option<String>)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let Value::Object(map) = value else {
        return Err("config must be a flat JSON object".into());
    };
    let mut flags = Vec::new();
    for (key, v) in map {
        if key == "config" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Bool(true) => flags.push((flag, None)),
            Value::Bool(false) | Value::Null => {}
            Value::Number(n) => flags.push((flag, Some(n.to_string()))),
            Value::String(s) => flags.push((flag, Some(s))),
            Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|i| match i {
                        Value::String(s) => Ok(s.clone()),
                        Value::Number(n) => Ok(n.to_string()),
                        _ => Err(format!("config key {key}: arrays hold numbers or strings")),
                    })
                    .collect::<Result<_, _>>()?;
                flags.push((flag, Some(parts.join(","))));
            }
            Value::Object(_) => return Err(format!("config key {key}: nested objects are not allowed")),
        }
    }
    Ok(flags)
}
