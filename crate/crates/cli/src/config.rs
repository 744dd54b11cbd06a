// SPDX-License-Identifier: Apache-2.0

//! Command-line normalization and `--config` files.
//!
//! A config file holds `key=value` lines naming long options of the chosen
//! subcommand (`#` starts a comment). Its entries are spliced in right after
//! the subcommand, ahead of the user's own flags, so flags given on the
//! command line override the file.

use std::path::Path;

use anyhow::{bail, Context, Result};

const SUBCOMMANDS: [&str; 5] = ["generate", "metrics", "threshold", "sweep", "study"];
const VALUED_COMMON: [&str; 4] = ["--seed", "--out", "--config", "--threads"];

/// Moves common options written before the subcommand behind it and inserts
/// config-file entries.
pub fn resolve_argv(raw: Vec<String>) -> Result<Vec<String>> {
    let mut iter = raw.into_iter();
    let prog = iter.next().unwrap_or_else(|| "mxepi".into());
    let rest: Vec<String> = iter.collect();

    let mut before = Vec::new();
    let mut i = 0;
    let mut sub = None;
    while i < rest.len() {
        let a = &rest[i];
        if VALUED_COMMON.contains(&a.as_str()) {
            before.push(a.clone());
            if let Some(v) = rest.get(i + 1) {
                before.push(v.clone());
            }
            i += 2;
        } else if VALUED_COMMON.iter().any(|f| a.starts_with(&format!("{f}="))) {
            before.push(a.clone());
            i += 1;
        } else if SUBCOMMANDS.contains(&a.as_str()) {
            sub = Some(i);
            break;
        } else {
            // Help, version or an unknown token: let clap report it.
            return Ok(std::iter::once(prog).chain(rest).collect());
        }
    }
    let Some(sub) = sub else {
        return Ok(std::iter::once(prog).chain(rest).collect());
    };
    let after = &rest[sub + 1..];

    let config_path = find_config(&before).or_else(|| find_config(after));
    let from_file = match config_path {
        Some(p) => load(Path::new(&p))?,
        None => Vec::new(),
    };

    let mut argv = vec![prog, rest[sub].clone()];
    argv.extend(from_file);
    argv.extend(before);
    argv.extend(after.iter().cloned());
    Ok(argv)
}

fn find_config(args: &[String]) -> Option<String> {
    let mut found = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            found = args.get(i + 1).cloned();
        } else if let Some(v) = a.strip_prefix("--config=") {
            found = Some(v.to_string());
        }
    }
    found
}

/// Reads a config file into long-option arguments.
pub fn load(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse(&text).with_context(|| format!("in config {}", path.display()))
}

pub fn parse(text: &str) -> Result<Vec<String>> {
    let mut args = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected key=value", idx + 1);
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key.starts_with('-') {
            bail!("line {}: bad key `{key}`", idx + 1);
        }
        if key == "config" {
            bail!("line {}: config files cannot include other configs", idx + 1);
        }
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            _ => args.push(format!("--{key}={value}")),
        }
    }
    Ok(args)
}
