//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys mirror the
//! fields of [`SimConfig`] plus the sweep settings:
//!
//! ```text
//! profile = scaled            # or `paper`; applied before all other keys
//! tick_size = 0.01
//! fundamental = 10000
//! n_agents = 1000
//! w1_max = 1
//! w2_max = 100
//! w3_max = 1
//! tau_max = 10000
//! sigma_eps = 0.03
//! sigma_is_variance = false
//! price_spread = 1000
//! t_c = 10000
//! n_additional = 99
//! aa_kind = ata               # none | afa | ata
//! ta = 100000
//! t_end = 2000000
//! seed = 1
//! activation = one_per_loop   # or all_at_start
//! na_values = 0,1,20,40,60,80,99
//! aa_kinds = afa,ata
//! seeds = 1,2,3               # or: n_seeds = 30 (seeds 1..=30)
//! out = results/
//! stride = 100
//! write_runs = false
//! ```

use std::path::PathBuf;

use crate::agents::AdditionalKind;
use crate::error::{Error, Result};
use crate::sim::{Activation, SimConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub sim: SimConfig,
    pub na_values: Option<Vec<u32>>,
    pub aa_kinds: Option<Vec<AdditionalKind>>,
    pub seeds: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
    pub stride: Option<u64>,
    pub write_runs: Option<bool>,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            sim: SimConfig::scaled(),
            na_values: None,
            aa_kinds: None,
            seeds: None,
            out: None,
            stride: None,
            write_runs: None,
        }
    }
}

/// `none` maps to `None`.
pub fn parse_kind(s: &str) -> std::result::Result<Option<AdditionalKind>, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "none" => Ok(None),
        "afa" | "fundamental" => Ok(Some(AdditionalKind::Fundamental)),
        "ata" | "technical" => Ok(Some(AdditionalKind::Technical)),
        other => Err(format!("unknown agent kind `{other}` (expected none, afa or ata)")),
    }
}

fn parse_list<T: std::str::FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| format!("bad list element `{s}`")))
        .collect()
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected a boolean, got `{v}`")),
    }
}

fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
    let cleaned: String = v.chars().filter(|c| *c != '_').collect();
    cleaned
        .parse()
        .or_else(|_| {
            // allow 2e6 style integers
            cleaned
                .parse::<f64>()
                .ok()
                .filter(|x| x.fract() == 0.0)
                .and_then(|x| format!("{x:.0}").parse().ok())
                .ok_or(())
        })
        .map_err(|_| format!("bad number `{v}`"))
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(l, _)| l).trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::ConfigSyntax {
                line: i + 1,
                message: format!("expected key = value, got `{line}`"),
            });
        };
        entries.push((i + 1, k.trim().to_ascii_lowercase(), v.trim().to_string()));
    }

    let mut cfg = ConfigFile::default();
    if let Some((line, _, v)) = entries.iter().find(|(_, k, _)| k == "profile") {
        cfg.sim = match v.as_str() {
            "paper" => SimConfig::paper_scale(),
            "scaled" => SimConfig::scaled(),
            _ => {
                return Err(Error::ConfigSyntax {
                    line: *line,
                    message: format!("unknown profile `{v}`"),
                })
            }
        };
    }
    for (line, key, value) in &entries {
        apply(&mut cfg, key, value).map_err(|message| Error::ConfigSyntax {
            line: *line,
            message,
        })?;
    }
    Ok(cfg)
}

fn apply(cfg: &mut ConfigFile, key: &str, v: &str) -> std::result::Result<(), String> {
    let s = &mut cfg.sim;
    match key {
        "profile" => {}
        "tick_size" => s.tick_size = num(v)?,
        "fundamental" => s.fundamental = num(v)?,
        "n_agents" => s.n_agents = num(v)?,
        "w1_max" => s.w1_max = num(v)?,
        "w2_max" => s.w2_max = num(v)?,
        "w3_max" => s.w3_max = num(v)?,
        "tau_max" => s.tau_max = num(v)?,
        "sigma_eps" => s.sigma_eps = num(v)?,
        "sigma_is_variance" => s.sigma_is_variance = parse_bool(v)?,
        "price_spread" => s.price_spread = num(v)?,
        "t_c" => s.t_c = num(v)?,
        "n_additional" => s.n_additional = num(v)?,
        "aa_kind" => s.aa_kind = parse_kind(v)?,
        "ta" => s.ta = num(v)?,
        "t_end" => s.t_end = num(v)?,
        "seed" => s.seed = num(v)?,
        "activation" => {
            s.activation = match v {
                "one_per_loop" => Activation::OnePerLoop,
                "all_at_start" => Activation::AllAtStart,
                _ => return Err(format!("unknown activation `{v}`")),
            }
        }
        "na_values" => cfg.na_values = Some(parse_list(v)?),
        "aa_kinds" => {
            let kinds = v
                .split(',')
                .filter(|k| !k.trim().is_empty())
                .map(parse_kind)
                .collect::<std::result::Result<Vec<_>, _>>()?;
            cfg.aa_kinds = Some(kinds.into_iter().flatten().collect());
        }
        "seeds" => cfg.seeds = Some(parse_list(v)?),
        "n_seeds" => {
            let n: u64 = num(v)?;
            cfg.seeds = Some((1..=n).collect());
        }
        "out" => cfg.out = Some(PathBuf::from(v)),
        "stride" => cfg.stride = Some(num(v)?),
        "write_runs" => cfg.write_runs = Some(parse_bool(v)?),
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}
