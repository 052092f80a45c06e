//! Effective options: a `key=value` config file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use entropy_bump::io::read_grid_function;
use entropy_bump::lab::{max_resolution_from_env, trial_rng, TrialConfig, WeightFamily};
use entropy_bump::{EpsilonSpec, OrliczSpec, Weight};

/// Keys accepted in config files, matching the long flag names.
pub const KEYS: [&str; 12] =
    ["n", "trials", "seed", "eps", "phi", "weight", "s-list", "a", "bound", "out", "plot", "collection"];

#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<E: std::error::Error> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, UsageError>;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()))
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str, path: &Path) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = || format!("{}:{}", path.display(), i + 1);
        let Some((key, value)) = line.split_once('=') else {
            return usage(format!("{}: expected `key = value`, found `{line}`", at()));
        };
        let key = key.trim().trim_start_matches("--").to_string();
        if !KEYS.contains(&key.as_str()) {
            return usage(format!("{}: unknown key `{key}` (known: {})", at(), KEYS.join(", ")));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return usage(format!("{}: duplicate key `{key}`", at()));
        }
    }
    Ok(map)
}

/// The merged option map for one run.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub subcommand: String,
    pub options: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn get(&self, key: &str) -> Option<&str> {
        debug_assert!(KEYS.contains(&key));
        self.options.get(key).map(String::as_str)
    }

    pub fn parsed<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().or_else(|e| usage(format!("--{key} `{v}`: {e}"))),
        }
    }

    /// Record the default so the report echoes every effective value.
    pub fn default_to(&mut self, key: &str, value: impl ToString) {
        self.options.entry(key.into()).or_insert_with(|| value.to_string());
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(PathBuf::from)
    }

    pub fn eps(&self) -> Result<EpsilonSpec> {
        self.parsed("eps", EpsilonSpec::LogPow { p: 2.0 })
    }

    pub fn phi(&self) -> Result<Option<OrliczSpec>> {
        self.get("phi").map(|v| v.parse().or_else(|e| usage(format!("--phi `{v}`: {e}")))).transpose()
    }

    pub fn s_list(&self, default: &[f64]) -> Result<Vec<f64>> {
        match self.get("s-list") {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|t| t.trim().parse::<f64>().or_else(|_| usage(format!("--s-list: `{t}` is not a number"))))
                .collect(),
        }
    }

    /// `--weight` as a family spec (`power:0.5`) or a grid-function file.
    pub fn weight_source(&self) -> Result<Option<WeightSource>> {
        let Some(v) = self.get("weight") else { return Ok(None) };
        if let Ok(family) = v.parse::<WeightFamily>() {
            return Ok(Some(WeightSource::Family(family)));
        }
        let g = read_grid_function(Path::new(v))?;
        Ok(Some(WeightSource::File(Weight::new(g)?)))
    }

    /// Checks that output directories exist before any computation.
    pub fn check_outputs(&self) -> Result<()> {
        for key in ["out", "plot"] {
            if let Some(p) = self.path(key) {
                let parent = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
                if !parent.is_dir() {
                    return usage(format!("--{key}: directory {} does not exist", parent.display()));
                }
            }
        }
        Ok(())
    }

    /// Trial configuration with `bound` defaulting to `default_bound`.
    pub fn trial_config(&mut self, default_n: u32, default_trials: usize, default_bound: f64) -> Result<TrialConfig> {
        self.default_to("trials", default_trials);
        self.default_to("seed", 0);
        self.default_to("a", 4);
        self.default_to("bound", default_bound);
        self.default_to("eps", "log_pow:p=2");
        let weight = self.weight_source()?;
        let n = match &weight {
            Some(WeightSource::File(w)) => {
                if let Some(given) = self.get("n") {
                    if given.parse::<u32>().ok() != Some(w.resolution()) {
                        return usage(format!("--n {given} disagrees with the weight file resolution {}", w.resolution()));
                    }
                }
                w.resolution()
            }
            _ => self.parsed("n", default_n)?,
        };
        self.default_to("n", n);
        let mut cfg = TrialConfig::new(n, self.parsed("trials", default_trials)?, self.parsed("seed", 0u64)?);
        cfg.max_resolution = max_resolution_from_env()?;
        cfg.eps = self.eps()?;
        cfg.phi = self.phi()?;
        cfg.a = self.parsed("a", 4.0)?;
        cfg.bound = self.parsed("bound", default_bound)?;
        match weight {
            Some(WeightSource::Family(f)) => cfg.weights = vec![f],
            Some(WeightSource::File(w)) => cfg.weights = vec![WeightFamily::Raw { values: w.values().to_vec() }],
            None => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// A single weight for the table subcommands.
    pub fn single_weight(&mut self, default_n: u32) -> Result<Weight> {
        let Some(source) = self.weight_source()? else {
            return usage("--weight is required (a file or a family such as power:0.5)");
        };
        self.default_to("seed", 0);
        match source {
            WeightSource::File(w) => Ok(w),
            WeightSource::Family(f) => {
                let n = self.parsed("n", default_n)?;
                let cap = max_resolution_from_env()?;
                if n > cap {
                    return usage(format!("resolution {n} exceeds the cap {cap}"));
                }
                self.default_to("n", n);
                Ok(f.draw(n, &mut trial_rng(self.parsed("seed", 0u64)?, 0))?)
            }
        }
    }
}

pub enum WeightSource {
    Family(WeightFamily),
    File(Weight),
}
