//! Flat `key = value` config files, merged into the argument list so that
//! command-line flags override file values.

use std::path::Path;

use crate::CliError;

/// Flags that take no value; in a config file they are `true` or `false`.
const SWITCHES: &[&str] = &["doubled-energies", "no-plot"];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn to_flags(entries: &[(String, String)]) -> Result<Vec<String>, CliError> {
    let mut flags = Vec::new();
    for (k, v) in entries {
        if SWITCHES.contains(&k.as_str()) {
            match v.as_str() {
                "true" => flags.push(format!("--{k}")),
                "false" => {}
                _ => return Err(CliError::Usage(format!("config key {k} must be true or false"))),
            }
        } else {
            flags.push(format!("--{k}"));
            flags.extend(v.split_whitespace().map(str::to_string));
        }
    }
    Ok(flags)
}

/// Removes `--config FILE` from `args` and splices the file's settings in
/// right after the subcommand name, ahead of the explicit flags.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(
                it.next()
                    .ok_or_else(|| CliError::Usage("--config needs a file".into()))?,
            );
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Usage(format!("cannot read config {path}: {e}")))?;
    let flags = to_flags(&parse(&text)?)?;
    let split = rest.len().min(2);
    let mut out: Vec<String> = rest[..split].to_vec();
    out.extend(flags);
    out.extend_from_slice(&rest[split..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_comments_and_underscores() {
        let e = parse("# run\nn = 4\n\noptimizer=grad # inline\ndoubled_energies = true\n").unwrap();
        assert_eq!(
            e,
            vec![
                ("n".into(), "4".into()),
                ("optimizer".into(), "grad".into()),
                ("doubled-energies".into(), "true".into())
            ]
        );
        assert!(parse("n 4").is_err());
    }

    #[test]
    fn file_values_precede_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "n = 6\nseed = 3\ndoubled-energies = false\n").unwrap();
        let args = strings(&[
            "spinvar",
            "mgm-ground",
            "--config",
            path.to_str().unwrap(),
            "--n",
            "4",
        ]);
        assert_eq!(
            expand(args).unwrap(),
            strings(&["spinvar", "mgm-ground", "--n", "6", "--seed", "3", "--n", "4"])
        );
    }
}
