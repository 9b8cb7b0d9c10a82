//! `key = value` configuration with `[section]` headers.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.field) {
            (Some(l), Some(k)) => write!(f, "line {l}, `{k}`: {}", self.msg),
            (Some(l), None) => write!(f, "line {l}: {}", self.msg),
            (None, Some(k)) => write!(f, "`{k}`: {}", self.msg),
            (None, None) => write!(f, "{}", self.msg),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default)]
pub struct Ini {
    /// section -> key -> (value, line)
    sections: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

impl Ini {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut ini = Ini::default();
        let mut section = String::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let s = raw.split(['#', ';']).next().unwrap_or("").trim();
            if s.is_empty() {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError {
                    line: Some(line),
                    field: None,
                    msg: "unterminated section header".into(),
                })?;
                section = name.trim().to_string();
                ini.sections.entry(section.clone()).or_default();
                continue;
            }
            let (key, value) = s.split_once('=').ok_or_else(|| ConfigError {
                line: Some(line),
                field: None,
                msg: format!("expected `key = value`, got `{s}`"),
            })?;
            let key = key.trim().to_string();
            let entry = ini.sections.entry(section.clone()).or_default();
            if entry.contains_key(&key) {
                return Err(ConfigError { line: Some(line), field: Some(qualified(&section, &key)), msg: "duplicate key".into() });
            }
            entry.insert(key, (value.trim().to_string(), line));
        }
        Ok(ini)
    }

    fn raw(&self, section: &str, key: &str) -> Option<&(String, usize)> {
        self.sections.get(section).and_then(|s| s.get(key))
    }

    fn field<T>(&self, section: &str, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, ConfigError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some((v, line)) => parse(v)
                .map(Some)
                .map_err(|msg| ConfigError { line: Some(*line), field: Some(qualified(section, key)), msg }),
        }
    }

    fn check_known(&self, known: &[(&str, &[&str])]) -> Result<(), ConfigError> {
        for (sec, keys) in &self.sections {
            let Some((_, allowed)) = known.iter().find(|(s, _)| s == sec) else {
                let line = keys.values().map(|v| v.1).min();
                return Err(ConfigError { line, field: None, msg: format!("unknown section [{sec}]") });
            };
            for (k, (_, line)) in keys {
                if !allowed.contains(&k.as_str()) {
                    return Err(ConfigError { line: Some(*line), field: Some(qualified(sec, k)), msg: "unknown key".into() });
                }
            }
        }
        Ok(())
    }
}

fn qualified(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

/// A real number, or a multiple of `pi` such as `pi/2`, `3pi/2`, `1.5*pi`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return if v.is_finite() { Ok(v) } else { Err(format!("`{s}` is not finite")) };
    }
    let lower = s.to_ascii_lowercase().replace(' ', "");
    let Some(at) = lower.find("pi") else {
        return Err(format!("`{s}` is not a number"));
    };
    let (head, tail) = (&lower[..at], &lower[at + 2..]);
    let head = head.trim_end_matches('*');
    let coef = match head {
        "" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| format!("bad coefficient in `{s}`"))?,
    };
    let den = match tail {
        "" => 1.0,
        t => t
            .strip_prefix('/')
            .and_then(|d| d.parse::<f64>().ok())
            .filter(|d| *d != 0.0)
            .ok_or_else(|| format!("bad denominator in `{s}`"))?,
    };
    Ok(coef * PI / den)
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_real).collect()
}

/// `γ:ν` pairs separated by commas.
pub fn parse_pairs(s: &str) -> Result<Vec<(f64, f64)>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|item| {
            let (g, n) = item.split_once(':').ok_or_else(|| format!("expected `gamma:nu`, got `{}`", item.trim()))?;
            Ok((parse_real(g)?, parse_real(n)?))
        })
        .collect()
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("`{s}` is not a boolean")),
    }
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.parse::<usize>().map_err(|e| format!("`{s}`: {e}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Geometry,
    Poisson,
    Kernel,
    Calculus,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Geometry, Suite::Poisson, Suite::Kernel, Suite::Calculus];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Poisson => "poisson",
            Suite::Kernel => "kernel",
            Suite::Calculus => "calculus",
        }
    }

    fn parse(s: &str) -> Result<Suite, String> {
        Suite::ALL.into_iter().find(|x| x.name() == s.trim()).ok_or_else(|| format!("unknown suite `{}`", s.trim()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub z_half: f64,
    pub m: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub measure_factor: f64,
    pub stability: f64,
    pub poisson: f64,
    pub kernel: f64,
    pub calculus: f64,
    pub angle_independence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RhsSpec {
    Manufactured,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kappa: f64,
    pub p_list: Vec<f64>,
    pub pairs: Vec<(f64, f64)>,
    pub poisson_pairs: Vec<(f64, f64)>,
    pub calculus_pairs: Vec<(f64, f64)>,
    pub grid: GridSpec,
    pub tol: Tolerances,
    pub seed: u64,
    pub suites: Vec<Suite>,
    pub out: PathBuf,
    pub c_gauss: f64,
    /// `None` means `0.9·π/κ`.
    pub lambda: Option<f64>,
    pub rhs: RhsSpec,
    pub blowup: bool,
    pub apriori: bool,
    pub operator_norms: bool,
}

const KNOWN: &[(&str, &[&str])] = &[
    ("domain", &["kappa"]),
    ("weights", &["p", "pairs", "gamma", "nu"]),
    ("grid", &["z", "m", "n"]),
    ("tolerances", &["measure_factor", "stability", "poisson", "kernel", "calculus", "angle_independence"]),
    ("run", &["seed", "suites", "out"]),
    ("kernel", &["c_gauss", "lambda"]),
    ("poisson", &["pairs", "rhs", "blowup", "apriori"]),
    ("calculus", &["pairs", "operator_norms"]),
];

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError { line: None, field: None, msg: format!("{}: {e}", path.display()) })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_str_in(&text, base)
    }

    /// Parse, resolving a relative `rhs = file:` path against `base`.
    pub fn from_str_in(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let ini = Ini::parse(text)?;
        ini.check_known(KNOWN)?;
        let kappa = ini.field("domain", "kappa", parse_real)?.ok_or_else(|| ConfigError {
            line: None,
            field: Some("domain.kappa".into()),
            msg: "required".into(),
        })?;
        let p_list = ini.field("weights", "p", parse_list)?.unwrap_or_else(|| vec![2.0]);
        let pairs = match ini.field("weights", "pairs", parse_pairs)? {
            Some(p) => p,
            None => {
                let g = ini.field("weights", "gamma", parse_list)?.unwrap_or_default();
                let n = ini.field("weights", "nu", parse_list)?.unwrap_or_default();
                g.iter().flat_map(|&a| n.iter().map(move |&b| (a, b))).collect()
            }
        };
        let poisson_pairs = ini.field("poisson", "pairs", parse_pairs)?.unwrap_or_else(|| pairs.clone());
        let calculus_pairs = ini.field("calculus", "pairs", parse_pairs)?.unwrap_or_else(|| pairs.clone());
        let grid = GridSpec {
            z_half: ini.field("grid", "z", parse_real)?.unwrap_or(8.0),
            m: ini.field("grid", "m", parse_usize)?.unwrap_or(512),
            n: ini.field("grid", "n", parse_usize)?.unwrap_or(128),
        };
        let tol = Tolerances {
            measure_factor: ini.field("tolerances", "measure_factor", parse_real)?.unwrap_or(50.0),
            stability: ini.field("tolerances", "stability", parse_real)?.unwrap_or(0.05),
            poisson: ini.field("tolerances", "poisson", parse_real)?.unwrap_or(1e-8),
            kernel: ini.field("tolerances", "kernel", parse_real)?.unwrap_or(1e-10),
            calculus: ini.field("tolerances", "calculus", parse_real)?.unwrap_or(1e-6),
            angle_independence: ini.field("tolerances", "angle_independence", parse_real)?.unwrap_or(1e-8),
        };
        let seed = ini.field("run", "seed", |s| s.parse::<u64>().map_err(|e| format!("`{s}`: {e}")))?.unwrap_or(0);
        let suites = match ini.field("run", "suites", |s| s.split(',').map(Suite::parse).collect::<Result<Vec<_>, _>>())? {
            Some(mut s) => {
                s.sort();
                s.dedup();
                s
            }
            None => Suite::ALL.to_vec(),
        };
        let out = ini.field("run", "out", |s| Ok(PathBuf::from(s)))?.unwrap_or_else(|| PathBuf::from("reports"));
        let rhs = match ini.field("poisson", "rhs", |s| Ok(s.to_string()))? {
            None => RhsSpec::Manufactured,
            Some(s) if s == "manufactured" => RhsSpec::Manufactured,
            Some(s) => match s.strip_prefix("file:") {
                Some(p) => {
                    let p = PathBuf::from(p.trim());
                    RhsSpec::File(if p.is_absolute() { p } else { base.join(p) })
                }
                None => {
                    let line = ini.raw("poisson", "rhs").map(|v| v.1);
                    return Err(ConfigError {
                        line,
                        field: Some("poisson.rhs".into()),
                        msg: format!("expected `manufactured` or `file:<path>`, got `{s}`"),
                    });
                }
            },
        };
        let cfg = RunConfig {
            kappa,
            p_list,
            pairs,
            poisson_pairs,
            calculus_pairs,
            grid,
            tol,
            seed,
            suites,
            out,
            c_gauss: ini.field("kernel", "c_gauss", parse_real)?.unwrap_or(0.125),
            lambda: ini.field("kernel", "lambda", parse_real)?,
            rhs,
            blowup: ini.field("poisson", "blowup", parse_bool)?.unwrap_or(true),
            apriori: ini.field("poisson", "apriori", parse_bool)?.unwrap_or(true),
            operator_norms: ini.field("calculus", "operator_norms", parse_bool)?.unwrap_or(true),
        };
        cfg.validate(&ini)?;
        Ok(cfg)
    }

    fn validate(&self, ini: &Ini) -> Result<(), ConfigError> {
        let err = |sec: &str, key: &str, msg: String| ConfigError {
            line: ini.raw(sec, key).map(|v| v.1),
            field: Some(qualified(sec, key)),
            msg,
        };
        if !(self.kappa > 0.0 && self.kappa < 2.0 * PI) {
            return Err(err("domain", "kappa", format!("κ = {} outside (0, 2π)", self.kappa)));
        }
        if let Some(p) = self.p_list.iter().find(|&&p| !(p > 1.0)) {
            return Err(err("weights", "p", format!("p = {p} must exceed 1")));
        }
        if self.grid.m < 4 || self.grid.m % 2 == 1 || self.grid.n < 4 {
            return Err(err("grid", "m", format!("need even M ≥ 4 and N ≥ 4 (got {}×{})", self.grid.m, self.grid.n)));
        }
        if !(self.c_gauss > 0.0) {
            return Err(err("kernel", "c_gauss", "must be positive".into()));
        }
        Ok(())
    }

    /// `λ` for the refined kernel bound.
    pub fn lambda(&self) -> f64 {
        self.lambda.unwrap_or(0.9 * PI / self.kappa)
    }
}
