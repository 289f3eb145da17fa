//! Dotted-path parameter overrides applied to a scenario document before loading,
//! e.g. `rbso.m_s=300` or `signal.a=12.5`.

use anyhow::{bail, Context, Result};
use toml::Value;

/// Applies `key.path=value` pairs to the document and re-serializes it.
pub fn apply_overrides(doc: &str, sets: &[(String, String)]) -> Result<String> {
    let mut root: Value = toml::from_str(doc).context("parsing scenario document")?;
    for (path, raw) in sets {
        let value = parse_literal(raw);
        set_path(&mut root, path, value)
            .with_context(|| format!("applying override `{path}={raw}`"))?;
    }
    toml::to_string(&root).context("re-serializing scenario document")
}

/// Splits a `key=value` command-line argument.
pub fn parse_set_arg(arg: &str) -> Result<(String, String)> {
    match arg.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => bail!("override `{arg}` must look like key.path=value"),
    }
}

/// Interprets the raw text as a TOML literal (number, bool, array, ...), falling
/// back to a plain string.
fn parse_literal(raw: &str) -> Value {
    let probe = format!("v = {raw}");
    match toml::from_str::<Value>(&probe) {
        Ok(Value::Table(mut t)) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        _ => Value::String(raw.to_string()),
    }
}

fn set_path(root: &mut Value, path: &str, new_value: Value) -> Result<()> {
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        bail!("empty segment in path `{path}`");
    }
    let mut cursor = root;
    for segment in &segments[..segments.len() - 1] {
        let table = cursor
            .as_table_mut()
            .with_context(|| format!("`{segment}` is not a table in `{path}`"))?;
        cursor = table
            .entry(segment.to_string())
            .or_insert_with(|| Value::Table(toml::map::Map::new()));
    }
    let last = segments[segments.len() - 1];
    let table = cursor
        .as_table_mut()
        .with_context(|| format!("parent of `{last}` is not a table in `{path}`"))?;
    table.insert(last.to_string(), new_value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = "seed = 1\n[rbso]\nm_s = 500\n";

    #[test]
    fn overrides_existing_key() {
        let out = apply_overrides(DOC, &[("rbso.m_s".into(), "123".into())]).unwrap();
        let v: Value = toml::from_str(&out).unwrap();
        assert_eq!(v["rbso"]["m_s"].as_integer(), Some(123));
    }

    #[test]
    fn overrides_top_level_seed() {
        let out = apply_overrides(DOC, &[("seed".into(), "99".into())]).unwrap();
        let v: Value = toml::from_str(&out).unwrap();
        assert_eq!(v["seed"].as_integer(), Some(99));
    }

    #[test]
    fn parses_arrays_and_floats() {
        let out = apply_overrides(
            DOC,
            &[("targets".into(), "[[1.0, 2.0]]".into()), ("signal.a".into(), "12.5".into())],
        )
        .unwrap();
        let v: Value = toml::from_str(&out).unwrap();
        assert!(v["targets"].as_array().is_some());
        assert_eq!(v["signal"]["a"].as_float(), Some(12.5));
    }

    #[test]
    fn rejects_path_through_scalar() {
        let err = apply_overrides(DOC, &[("seed.inner".into(), "1".into())]).unwrap_err();
        assert!(format!("{err:#}").contains("seed.inner"));
    }

    #[test]
    fn parses_set_argument() {
        assert!(parse_set_arg("a.b=3").is_ok());
        assert!(parse_set_arg("noequals").is_err());
        assert!(parse_set_arg("=3").is_err());
    }
}
