//! `key = value` config files. Each key names a long flag of the selected
//! command; values are spliced into the argument list unless the same flag
//! was given on the command line.

use std::ffi::OsString;

use clap::{Arg, ArgAction, Command};

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// keys may be written with `_` or `-` and an optional leading `--`.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {}: expected `key = value`, got `{line}`", i + 1));
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        let value = value.trim();
        let value = value
            .strip_prefix('"')
            .and_then(|v| v.strip_suffix('"'))
            .unwrap_or(value);
        out.push((key, value.to_string()));
    }
    Ok(out)
}

fn spellings(arg: &Arg) -> Vec<String> {
    let mut v: Vec<String> = arg
        .get_long()
        .into_iter()
        .chain(arg.get_all_aliases().unwrap_or_default())
        .map(|l| format!("--{l}"))
        .collect();
    if let Some(s) = arg.get_short() {
        v.push(format!("-{s}"));
    }
    v
}

fn matches_key(arg: &Arg, key: &str) -> bool {
    arg.get_long() == Some(key) || arg.get_all_aliases().unwrap_or_default().contains(&key)
}

fn given(argv: &[OsString], arg: &Arg) -> bool {
    let names = spellings(arg);
    argv.iter().filter_map(|a| a.to_str()).any(|a| {
        names
            .iter()
            .any(|n| a == n || a.strip_prefix(n.as_str()).is_some_and(|r| r.starts_with('=')))
    })
}

/// Value of `--config` in `argv`, if present.
pub fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        match a.to_str() {
            Some("--config") => return it.next().cloned(),
            Some(s) if s.starts_with("--config=") => return Some(s["--config=".len()..].into()),
            _ => {}
        }
    }
    None
}

/// Index of the subcommand token in `argv` (`argv[0]` is the program name).
fn subcommand_index(argv: &[OsString], cmd: &Command) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let a = argv[i].to_str()?;
        if cmd.find_subcommand(a).is_some() {
            return Some(i);
        }
        let takes_value = cmd
            .get_arguments()
            .any(|arg| arg.get_action().takes_values() && spellings(arg).iter().any(|n| n == a));
        i += if takes_value { 2 } else { 1 };
    }
    None
}

/// Splices `entries` into `argv` right after the subcommand token. Keys that
/// belong only to other subcommands are ignored; unknown keys are an error.
pub fn merge(
    argv: Vec<OsString>,
    cmd: &Command,
    entries: &[(String, String)],
) -> Result<Vec<OsString>, String> {
    let Some(at) = subcommand_index(&argv, cmd) else {
        return Ok(argv);
    };
    let sub = cmd
        .find_subcommand(argv[at].to_str().unwrap_or_default())
        .expect("subcommand index points at a subcommand");
    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            return Err("config files cannot include other config files".into());
        }
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| matches_key(a, key));
        let Some(arg) = arg else {
            let elsewhere = cmd
                .get_subcommands()
                .any(|s| s.get_arguments().any(|a| matches_key(a, key)));
            if elsewhere {
                continue;
            }
            return Err(format!("unknown config key `{key}`"));
        };
        if given(&argv, arg) {
            continue;
        }
        let long = arg.get_long().expect("config keys match long flags");
        match arg.get_action() {
            ArgAction::SetTrue => match value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" => extra.push(format!("--{long}").into()),
                "false" | "no" | "0" => {}
                _ => {
                    return Err(format!(
                        "config key `{key}`: expected true or false, got `{value}`"
                    ))
                }
            },
            _ => extra.push(format!("--{long}={value}").into()),
        }
    }
    let mut out = argv;
    out.splice(at + 1..at + 1, extra);
    Ok(out)
}
