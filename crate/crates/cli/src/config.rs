//! Plain-text `key = value` experiment configs.

use foliated_core::{Atlas, ChartPoint, FourierSeries};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

/// Anything wrong with the config file or its values. Maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

const COMMON: &[&str] = &["experiment", "manifold", "f_coeffs", "u_coeffs", "A", "seed", "out", "workers"];

/// Keys accepted by each subcommand in addition to [`COMMON`].
pub fn allowed_keys(command: &str) -> &'static [&'static str] {
    match command {
        "flow" => &[
            "z",
            "T",
            "k",
            "dt",
            "stride",
            "c",
            "driver",
            "mode",
            "path_index",
            "wrap",
            "reorthonormalize",
        ],
        "semigroup" => &["z", "t", "n_paths", "k", "dt", "mode", "test_fn", "form"],
        "invariant" => &["N"],
        "dilate" => &["N", "source", "samples"],
        "carriere" => &["N", "n_quad", "bins", "max_mode"],
        "verify" => &["groups", "n_paths", "k", "dt"],
        _ => &[],
    }
}

/// Parsed config for one subcommand, with the effective seed.
#[derive(Debug, Clone)]
pub struct Config {
    pub command: String,
    entries: BTreeMap<String, String>,
    pub seed: u64,
}

impl Config {
    pub fn load(command: &str, path: &Path, seed_override: Option<u64>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(command, &text, seed_override)
    }

    pub fn parse(command: &str, text: &str, seed_override: Option<u64>) -> Result<Self, ConfigError> {
        let extra = allowed_keys(command);
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected `key = value`", lineno + 1));
            };
            let (k, v) = (k.trim(), v.trim());
            if !COMMON.contains(&k) && !extra.contains(&k) {
                return err(format!("line {}: unknown key `{k}` for `{command}`", lineno + 1));
            }
            if v.is_empty() {
                return err(format!("line {}: empty value for `{k}`", lineno + 1));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return err(format!("line {}: duplicate key `{k}`", lineno + 1));
            }
        }
        if let Some(exp) = entries.get("experiment") {
            if exp != command {
                return err(format!("`experiment = {exp}` does not match subcommand `{command}`"));
            }
        }
        let seed = match seed_override {
            Some(s) => s,
            None => match entries.get("seed") {
                Some(s) => s.parse().map_err(|_| ConfigError(format!("`seed`: cannot parse `{s}` as u64")))?,
                None => return err("`seed` is mandatory (config key or --seed)"),
            },
        };
        entries.insert("seed".into(), seed.to_string());
        Ok(Self {
            command: command.to_string(),
            entries,
            seed,
        })
    }

    /// First 16 hex digits of the SHA-256 of the canonical config.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("command={}\n", self.command));
        for (k, v) in &self.entries {
            h.update(format!("{k}={v}\n"));
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn out_dir(&self, cli: Option<PathBuf>) -> PathBuf {
        cli.or_else(|| self.get("out").map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."))
    }

    fn parse_one<T: std::str::FromStr>(key: &str, s: &str) -> Result<T, ConfigError> {
        s.trim()
            .parse()
            .map_err(|_| ConfigError(format!("`{key}`: cannot parse `{}`", s.trim())))
    }

    pub fn value<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.get(key) {
            Some(s) => Self::parse_one(key, s),
            None => Ok(default),
        }
    }

    pub fn list<T: std::str::FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>, ConfigError> {
        match self.get(key) {
            Some(s) => s.split(',').map(|x| Self::parse_one(key, x)).collect(),
            None => Ok(default),
        }
    }

    /// Strictly positive knob.
    pub fn positive<T>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T: std::str::FromStr + PartialOrd + Default + Copy,
    {
        let v = self.value(key, default)?;
        if !(v > T::default()) {
            return err(format!("`{key}` must be positive"));
        }
        Ok(v)
    }

    pub fn boolean(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(other) => err(format!("`{key}`: expected true or false, got `{other}`")),
        }
    }

    pub fn workers(&self) -> Result<Option<usize>, ConfigError> {
        match self.get("workers") {
            None => Ok(None),
            Some(_) => Ok(Some(self.positive("workers", 1usize)?)),
        }
    }

    /// Build the manifold from `manifold`, `f_coeffs`, `u_coeffs` and `A`.
    pub fn atlas(&self) -> Result<Atlas, ConfigError> {
        let coeffs = |key: &str| -> Result<FourierSeries, ConfigError> {
            Ok(FourierSeries::sines(self.list(key, Vec::new())?))
        };
        let built = match self.get("manifold") {
            Some("e1") => {
                for key in ["u_coeffs", "A"] {
                    if self.get(key).is_some() {
                        return err(format!("`{key}` does not apply to manifold e1"));
                    }
                }
                Atlas::build_e1(coeffs("f_coeffs")?)
            }
            Some("e2") => {
                if self.get("f_coeffs").is_some() {
                    return err("`f_coeffs` does not apply to manifold e2");
                }
                Atlas::build_e2(self.matrix()?, coeffs("u_coeffs")?)
            }
            Some(other) => return err(format!("`manifold`: expected e1 or e2, got `{other}`")),
            None => return err("`manifold` is required"),
        };
        built.map_err(|e| ConfigError(e.to_string()))
    }

    fn matrix(&self) -> Result<[[i64; 2]; 2], ConfigError> {
        let Some(s) = self.get("A") else {
            return Ok([[2, 1], [1, 1]]);
        };
        let rows: Vec<Vec<i64>> = s
            .split(';')
            .map(|r| r.split(',').map(|x| Self::parse_one("A", x)).collect())
            .collect::<Result<_, _>>()?;
        if rows.len() != 2 || rows.iter().any(|r| r.len() != 2) {
            return err("`A`: expected `a,b;c,d`");
        }
        Ok([[rows[0][0], rows[0][1]], [rows[1][0], rows[1][1]]])
    }

    /// A point with one coordinate per manifold dimension.
    pub fn point(&self, atlas: &Atlas) -> Result<ChartPoint, ConfigError> {
        let n = atlas.n();
        let z: Vec<f64> = self.list("z", vec![0.0; n])?;
        if z.len() != n {
            return err(format!("`z`: expected {n} coordinates, got {}", z.len()));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return err("`z`: coordinates must be finite");
        }
        Ok(ChartPoint::from_slice(&z))
    }
}
