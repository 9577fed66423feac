//! Flat sectioned `key = value` problem files.
//!
//! ```text
//! # linear scalar potential
//! [couplings]
//! zeta1 = 1
//! [shape]
//! kind = linear
//! a = 1
//! solve.n_max = 5
//! ```
//!
//! A key may be written inside its section or fully qualified anywhere.

use std::fmt::Write as _;

use diracsusy::model::{Constants, Couplings, Spin, TabulatedShape};
use diracsusy::Error;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: syntax error: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: {reason}")]
    Domain { line: usize, reason: String },
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("constants", &["m", "c", "hbar"]),
    ("couplings", &["zeta1", "zeta2", "zeta3", "eps", "m_shift", "e_shift"]),
    ("shape", &["kind", "a", "q", "xs", "fs"]),
    ("dimension", &["kind", "k", "s", "B", "Efield", "C"]),
    ("solve", &["n_max", "window"]),
    ("grid", &["xmin", "xmax", "n_points"]),
];

pub const DEFAULT_N_MAX: usize = 5;
pub const DEFAULT_N_POINTS: usize = 4001;

#[derive(Clone, Debug, PartialEq)]
pub enum ShapeConfig {
    /// Superpotential slope a.
    Linear { a: f64 },
    /// Strength q of the −q/x superpotential.
    InverseLinear { q: f64 },
    /// Samples of the profile s(x).
    Tabulated { xs: Vec<f64>, fs: Vec<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DimensionConfig {
    OnePlusOne,
    /// Crossed fields: magnetic B, electric Efield, scalar slope C.
    TwoPlusOne {
        k: f64,
        s: Spin,
        b: f64,
        efield: f64,
        c: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridConfig {
    pub xmin: Option<f64>,
    pub xmax: Option<f64>,
    pub n_points: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemConfig {
    pub constants: Constants,
    pub couplings: Couplings,
    pub shape: ShapeConfig,
    pub dimension: DimensionConfig,
    pub n_max: usize,
    pub window: Option<(f64, f64)>,
    pub grid: GridConfig,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            constants: Constants::default(),
            couplings: Couplings::default(),
            shape: ShapeConfig::Linear { a: 1.0 },
            dimension: DimensionConfig::OnePlusOne,
            n_max: DEFAULT_N_MAX,
            window: None,
            grid: GridConfig { xmin: None, xmax: None, n_points: DEFAULT_N_POINTS },
        }
    }
}

/// Raw assignments before validation: (section, key) → (line, value).
type Entries = Vec<((String, String), (usize, String))>;

fn lex(text: &str) -> Result<Entries, ConfigError> {
    let mut section: Option<String> = None;
    let mut out: Entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Syntax { line, reason: "unterminated section header".into() })?
                .trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(ConfigError::UnknownKey { line, key: format!("[{name}]") });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line, reason: "expected `key = value`".into() })?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(ConfigError::Syntax { line, reason: format!("`{key}` has no value") });
        }
        let (sec, name) = match (key.split_once('.'), &section) {
            (Some((s, k)), _) => (s.trim().to_string(), k.trim().to_string()),
            (None, Some(s)) => (s.clone(), key.to_string()),
            (None, None) => {
                return Err(ConfigError::Syntax { line, reason: format!("`{key}` is outside any section") })
            }
        };
        let known = SECTIONS.iter().any(|(s, keys)| *s == sec && keys.contains(&name.as_str()));
        if !known {
            return Err(ConfigError::UnknownKey { line, key: format!("{sec}.{name}") });
        }
        if out.iter().any(|(k, _)| k.0 == sec && k.1 == name) {
            return Err(ConfigError::Syntax { line, reason: format!("`{sec}.{name}` set twice") });
        }
        out.push(((sec, name), (line, value.to_string())));
    }
    Ok(out)
}

struct Reader {
    entries: Entries,
}

impl Reader {
    fn get(&self, sec: &str, key: &str) -> Option<(usize, &str)> {
        self.entries.iter().find(|(k, _)| k.0 == sec && k.1 == key).map(|(_, (l, v))| (*l, v.as_str()))
    }

    fn line_of(&self, sec: &str, key: &str) -> usize {
        self.get(sec, key).map_or(0, |(l, _)| l)
    }

    fn number(&self, sec: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(sec, key).map(|(line, v)| number(line, key, v)).transpose()
    }

    fn number_or(&self, sec: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.number(sec, key)?.unwrap_or(default))
    }

    fn count(&self, sec: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(sec, key) {
            None => Ok(default),
            Some((line, v)) => v
                .parse()
                .map_err(|_| ConfigError::Syntax { line, reason: format!("`{key}` must be a nonnegative integer") }),
        }
    }

    fn list(&self, sec: &str, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.get(sec, key).map(|(line, v)| v.split(',').map(|t| number(line, key, t.trim())).collect()).transpose()
    }
}

fn number(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 =
        v.parse().map_err(|_| ConfigError::Syntax { line, reason: format!("`{key}` is not a number: {v}") })?;
    if !x.is_finite() {
        return Err(ConfigError::Domain { line, reason: format!("`{key}` must be finite") });
    }
    Ok(x)
}

pub fn parse_pair(v: &str) -> Result<(f64, f64), String> {
    let (a, b) = v.split_once(',').ok_or("expected `lo,hi`")?;
    let a: f64 = a.trim().parse().map_err(|_| format!("not a number: {a}"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("not a number: {b}"))?;
    if !(a.is_finite() && b.is_finite()) {
        return Err("bounds must be finite".into());
    }
    Ok((a, b))
}

fn domain(line: usize, reason: impl Into<String>) -> ConfigError {
    ConfigError::Domain { line, reason: reason.into() }
}

pub fn parse_config(text: &str) -> Result<ProblemConfig, ConfigError> {
    let r = Reader { entries: lex(text)? };
    let d = ProblemConfig::default();

    let k = Constants {
        m: r.number_or("constants", "m", d.constants.m)?,
        c: r.number_or("constants", "c", d.constants.c)?,
        hbar: r.number_or("constants", "hbar", d.constants.hbar)?,
    };
    if let Err(e) = k.check() {
        let key = match e {
            Error::InvalidParameter { name, .. } | Error::NonFinite(name) => name,
            _ => "m",
        };
        return Err(domain(r.line_of("constants", key), e.to_string()));
    }

    let couplings = Couplings {
        zeta1: r.number_or("couplings", "zeta1", 0.0)?,
        zeta2: r.number_or("couplings", "zeta2", 0.0)?,
        zeta3: r.number_or("couplings", "zeta3", 0.0)?,
        eps: r.number_or("couplings", "eps", 0.0)?,
        m_shift: r.number_or("couplings", "m_shift", 0.0)?,
        e_shift: r.number_or("couplings", "e_shift", 0.0)?,
    };

    let kind = r.get("shape", "kind").map(|(l, v)| (l, v.to_string()));
    let kind_line = kind.as_ref().map_or(0, |k| k.0);
    let misplaced = |keys: &[&str], kind: &str| -> Result<(), ConfigError> {
        match keys.iter().find(|key| r.get("shape", key).is_some()) {
            Some(key) => Err(domain(r.line_of("shape", key), format!("`shape.{key}` does not apply to {kind}"))),
            None => Ok(()),
        }
    };
    let shape = match kind.as_ref().map_or("linear", |k| k.1.as_str()) {
        "linear" => {
            misplaced(&["q", "xs", "fs"], "linear")?;
            let a = r.number_or("shape", "a", 1.0)?;
            if a == 0.0 {
                return Err(domain(r.line_of("shape", "a"), "`shape.a` must be nonzero"));
            }
            ShapeConfig::Linear { a }
        }
        "inverse_linear" => {
            misplaced(&["a", "xs", "fs"], "inverse_linear")?;
            let q = r.number_or("shape", "q", 1.0)?;
            if !(q > 0.0) {
                return Err(domain(r.line_of("shape", "q"), "`shape.q` must be positive"));
            }
            ShapeConfig::InverseLinear { q }
        }
        "tabulated" => {
            misplaced(&["a", "q"], "tabulated")?;
            let (xs, fs) = match (r.list("shape", "xs")?, r.list("shape", "fs")?) {
                (Some(xs), Some(fs)) => (xs, fs),
                _ => return Err(domain(kind_line, "tabulated shape needs `xs` and `fs`")),
            };
            if let Err(e) = TabulatedShape::from_samples(xs.clone(), fs.clone()) {
                return Err(domain(r.line_of("shape", "xs"), e.to_string()));
            }
            ShapeConfig::Tabulated { xs, fs }
        }
        other => return Err(domain(kind_line, format!("unknown shape kind `{other}`"))),
    };

    let dim_kind = r.get("dimension", "kind").map(|(l, v)| (l, v.to_string()));
    let dimension = match dim_kind.as_ref().map_or("one_plus_one", |k| k.1.as_str()) {
        "one_plus_one" => {
            if let Some(key) = ["k", "s", "B", "Efield", "C"].into_iter().find(|key| r.get("dimension", key).is_some())
            {
                return Err(domain(
                    r.line_of("dimension", key),
                    format!("`dimension.{key}` needs kind = two_plus_one"),
                ));
            }
            DimensionConfig::OnePlusOne
        }
        "two_plus_one" => {
            let line = dim_kind.as_ref().map_or(0, |k| k.0);
            if couplings != Couplings::default() {
                return Err(domain(line, "two_plus_one takes its potentials from B, Efield and C, not [couplings]"));
            }
            if shape != (ShapeConfig::Linear { a: 1.0 }) {
                return Err(domain(line, "two_plus_one needs the default linear shape (a = 1)"));
            }
            let s = r.number_or("dimension", "s", 1.0)?;
            let s =
                Spin::from_sign(s).map_err(|_| domain(r.line_of("dimension", "s"), "`dimension.s` must be 1 or -1"))?;
            let b = r.number_or("dimension", "B", 1.0)?;
            if b == 0.0 {
                return Err(domain(r.line_of("dimension", "B"), "`dimension.B` must be nonzero"));
            }
            DimensionConfig::TwoPlusOne {
                k: r.number_or("dimension", "k", 0.0)?,
                s,
                b,
                efield: r.number_or("dimension", "Efield", 0.0)?,
                c: r.number_or("dimension", "C", 0.0)?,
            }
        }
        other => return Err(domain(dim_kind.as_ref().map_or(0, |k| k.0), format!("unknown dimension kind `{other}`"))),
    };

    let n_max = r.count("solve", "n_max", DEFAULT_N_MAX)?;
    let window = match r.get("solve", "window") {
        None => None,
        Some((line, v)) => {
            let (lo, hi) = parse_pair(v).map_err(|e| ConfigError::Syntax { line, reason: format!("`window`: {e}") })?;
            if !(hi > lo) {
                return Err(domain(line, "`solve.window` needs lo < hi"));
            }
            Some((lo, hi))
        }
    };

    let grid = GridConfig {
        xmin: r.number("grid", "xmin")?,
        xmax: r.number("grid", "xmax")?,
        n_points: r.count("grid", "n_points", DEFAULT_N_POINTS)?,
    };
    if grid.n_points < 16 {
        return Err(domain(r.line_of("grid", "n_points"), "`grid.n_points` must be at least 16"));
    }
    let half_line = matches!(shape, ShapeConfig::InverseLinear { .. });
    match (grid.xmin, grid.xmax) {
        (Some(x), _) if half_line && x <= 0.0 => {
            return Err(domain(
                r.line_of("grid", "xmin"),
                "inverse_linear lives on x > 0; `grid.xmin` must be positive",
            ))
        }
        (Some(_), _) if half_line => {
            return Err(domain(r.line_of("grid", "xmin"), "half-line grids start at the origin; set only `grid.xmax`"))
        }
        (Some(_), None) | (None, Some(_)) if !half_line => {
            let key = if grid.xmin.is_some() { "xmin" } else { "xmax" };
            return Err(domain(r.line_of("grid", key), "`grid.xmin` and `grid.xmax` go together"));
        }
        (Some(lo), Some(hi)) if !(hi > lo) => {
            return Err(domain(r.line_of("grid", "xmax"), "`grid.xmax` must exceed `grid.xmin`"))
        }
        (_, Some(hi)) if !(hi > 0.0) => return Err(domain(r.line_of("grid", "xmax"), "`grid.xmax` must be positive")),
        _ => {}
    }

    Ok(ProblemConfig { constants: k, couplings, shape, dimension, n_max, window, grid })
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Canonical text. `f64` display is shortest round-trip, so parsing the
/// output gives back an equal config.
pub fn serialize(cfg: &ProblemConfig) -> String {
    let mut s = String::new();
    let k = &cfg.constants;
    let _ = writeln!(s, "[constants]\nm = {}\nc = {}\nhbar = {}", k.m, k.c, k.hbar);
    if cfg.dimension == DimensionConfig::OnePlusOne {
        let c = &cfg.couplings;
        let _ = writeln!(
            s,
            "\n[couplings]\nzeta1 = {}\nzeta2 = {}\nzeta3 = {}\neps = {}\nm_shift = {}\ne_shift = {}",
            c.zeta1, c.zeta2, c.zeta3, c.eps, c.m_shift, c.e_shift
        );
    }
    let _ = match &cfg.shape {
        ShapeConfig::Linear { a } => writeln!(s, "\n[shape]\nkind = linear\na = {a}"),
        ShapeConfig::InverseLinear { q } => writeln!(s, "\n[shape]\nkind = inverse_linear\nq = {q}"),
        ShapeConfig::Tabulated { xs, fs } => {
            writeln!(s, "\n[shape]\nkind = tabulated\nxs = {}\nfs = {}", join(xs), join(fs))
        }
    };
    let _ = match cfg.dimension {
        DimensionConfig::OnePlusOne => writeln!(s, "\n[dimension]\nkind = one_plus_one"),
        DimensionConfig::TwoPlusOne { k, s: spin, b, efield, c } => writeln!(
            s,
            "\n[dimension]\nkind = two_plus_one\nk = {k}\ns = {}\nB = {b}\nEfield = {efield}\nC = {c}",
            spin.sign()
        ),
    };
    let _ = writeln!(s, "\n[solve]\nn_max = {}", cfg.n_max);
    if let Some((lo, hi)) = cfg.window {
        let _ = writeln!(s, "window = {lo}, {hi}");
    }
    let _ = writeln!(s, "\n[grid]\nn_points = {}", cfg.grid.n_points);
    if let Some(x) = cfg.grid.xmin {
        let _ = writeln!(s, "xmin = {x}");
    }
    if let Some(x) = cfg.grid.xmax {
        let _ = writeln!(s, "xmax = {x}");
    }
    s
}

/// Overrides one numeric key, written `section.key`, and revalidates.
pub fn with_param(cfg: &ProblemConfig, path: &str, value: f64) -> Result<ProblemConfig, ConfigError> {
    let bad = |reason: String| ConfigError::Domain { line: 0, reason };
    let (sec, key) = path.split_once('.').ok_or_else(|| bad(format!("`{path}` is not of the form section.key")))?;
    let numeric = SECTIONS.iter().any(|(s, keys)| *s == sec && keys.contains(&key))
        && !matches!(key, "kind" | "xs" | "fs" | "window" | "n_max" | "n_points" | "s");
    if !numeric {
        return Err(ConfigError::UnknownKey { line: 0, key: format!("{path} (not a continuous numeric key)") });
    }
    let text = serialize(cfg);
    let mut out = String::new();
    let mut current = "";
    for line in text.lines() {
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name;
        }
        let replaced = current == sec && line.split_once('=').is_some_and(|(k, _)| k.trim() == key);
        if !replaced {
            out.push_str(line);
            out.push('\n');
        }
    }
    let _ = writeln!(out, "{path} = {value}");
    parse_config(&out)
}
