//! Sweep configuration files.
//!
//! ```text
//! # comment
//! n0 = 2..6
//! n1 = 2..6
//! k0 = all
//! k1 = 0,1,3..4
//! p = 4,6
//! checks = partial,joint
//! format = csv
//! ```
//!
//! Ranges `lo..hi` are inclusive. `n0`, `n1` and `p` are required; `k0`
//! and `k1` default to `all`, `checks` to both. Unknown or repeated keys
//! are errors.

use std::collections::BTreeMap;

use qwcount_core::analysis::{CountRange, SweepChecks, SweepConfig};

use crate::output::Format;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepFile {
    pub config: SweepConfig,
    pub format: Option<Format>,
}

const KEYS: [&str; 7] = ["n0", "n1", "k0", "k1", "p", "checks", "format"];

pub fn parse_sweep_config(text: &str) -> Result<SweepFile, String> {
    let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| format!("line {line_no}: expected 'key = value'"))?;
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(format!("line {line_no}: unknown key '{key}'"));
        }
        if value.is_empty() {
            return Err(format!("line {line_no}: empty value for '{key}'"));
        }
        if entries.insert(key, (line_no, value)).is_some() {
            return Err(format!("line {line_no}: '{key}' given more than once"));
        }
    }

    let required = |key: &str| entries.get(key).copied().ok_or_else(|| format!("missing required key '{key}'"));
    let ints = |(line, v): (usize, &str)| parse_int_list(v).map_err(|e| format!("line {line}: {e}"));
    let counts = |key: &str| match entries.get(key) {
        None => Ok(CountRange::All),
        Some(&(_, "all")) => Ok(CountRange::All),
        Some(&entry) => ints(entry).map(CountRange::Values),
    };

    let n0 = ints(required("n0")?)?;
    let n1 = ints(required("n1")?)?;
    let p = ints(required("p")?)?
        .into_iter()
        .map(|v| u32::try_from(v).map_err(|_| format!("p = {v} is out of range")))
        .collect::<Result<Vec<_>, _>>()?;
    let checks = match entries.get("checks") {
        None => SweepChecks::default(),
        Some(&(line, v)) => {
            let mut checks = SweepChecks { partial: false, joint: false };
            for item in v.split(',').map(str::trim) {
                match item {
                    "partial" => checks.partial = true,
                    "joint" => checks.joint = true,
                    other => return Err(format!("line {line}: unknown check '{other}'")),
                }
            }
            checks
        }
    };
    let format = match entries.get("format") {
        None => None,
        Some(&(line, v)) => Some(v.parse::<Format>().map_err(|e| format!("line {line}: {e}"))?),
    };

    let config = SweepConfig { n0, n1, k0: counts("k0")?, k1: counts("k1")?, p, checks };
    config.validate().map_err(|e| e.to_string())?;
    Ok(SweepFile { config, format })
}

fn parse_int_list(value: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim) {
        if let Some((lo, hi)) = item.split_once("..") {
            let lo = parse_int(lo)?;
            let hi = parse_int(hi)?;
            if lo > hi {
                return Err(format!("empty range '{item}'"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(parse_int(item)?);
        }
    }
    Ok(out)
}

fn parse_int(s: &str) -> Result<usize, String> {
    s.trim().parse::<usize>().map_err(|_| format!("'{}' is not a non-negative integer", s.trim()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_example() {
        let text =
            "# grid\nn0 = 2..4\nn1 = 3\nk0 = all\nk1 = 0, 2..3\np = 4,6  # two sizes\nchecks = joint\nformat = json\n";
        let f = parse_sweep_config(text).unwrap();
        assert_eq!(f.config.n0, vec![2, 3, 4]);
        assert_eq!(f.config.n1, vec![3]);
        assert_eq!(f.config.k0, CountRange::All);
        assert_eq!(f.config.k1, CountRange::Values(vec![0, 2, 3]));
        assert_eq!(f.config.p, vec![4, 6]);
        assert_eq!(f.config.checks, SweepChecks { partial: false, joint: true });
        assert_eq!(f.format, Some(Format::Json));
    }

    #[test]
    fn defaults() {
        let f = parse_sweep_config("n0 = 1\nn1 = 1\np = 3\n").unwrap();
        assert_eq!(f.config.k0, CountRange::All);
        assert_eq!(f.config.checks, SweepChecks::default());
        assert_eq!(f.format, None);
    }

    #[test]
    fn rejects_bad_files() {
        for text in [
            "n0 = 1\nn1 = 1\np = 3\nq = 1\n",
            "n0 = 1\nn0 = 2\nn1 = 1\np = 3\n",
            "n0 = 1\np = 3\n",
            "n0 = 3..1\nn1 = 1\np = 3\n",
            "n0 = x\nn1 = 1\np = 3\n",
            "n0 = 1\nn1 = 1\np = 3\nformat = xml\n",
            "n0 = 1\nn1 = 1\np = 3\nchecks = everything\n",
            "n0 = 1\nn1 = 1\np = 3\nk0 = 5\n",
            "n0 = 1\nn1 = 1\np =\n",
            "n0 1\n",
        ] {
            assert!(parse_sweep_config(text).is_err(), "{text:?}");
        }
    }
}
