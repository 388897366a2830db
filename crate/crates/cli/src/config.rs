//! Plain-text `key = value` configuration with `[section]` headers.
//!
//! ```text
//! [grid]
//! n = 1          # dimension, 1 or 2
//! L = 60         # half width: the box is [-L, L)^n
//! N = 2048       # points per axis, power of two
//!
//! [pde]
//! q = 2          # number, fraction such as 5/3, or `critical` for 1 + 1/(n + beta)
//! beta = 0.5
//! a = 1          # comma-separated convection vector, one entry per axis
//! flux = odd_power
//!
//! [run]
//! dt = 1e-3
//! T = 50
//! ```
//!
//! Every key is listed in [`KEYS`]; anything else is rejected with its line
//! number.

use std::fmt::{self, Display, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;
use zml_core::evolution::{FluxKind, Scheme};
use zml_core::GridSpec;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: unknown key `{key}` in section [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },

    #[error("missing required key `{key}` in section [{section}]")]
    MissingRequired { section: String, key: String },

    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },

    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, ConfigError>;

/// `(section, key, description)` for every accepted key.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("grid", "n", "spatial dimension, 1 or 2 (default 1)"),
    ("grid", "L", "box half width; required"),
    ("grid", "N", "points per axis, a power of two >= 16; required"),
    ("pde", "q", "nonlinearity exponent: number, a/b, or `critical`; required"),
    ("pde", "beta", "low-frequency order of the data in (0, 1); required"),
    ("pde", "a", "convection vector, comma separated (default 1 along the first axis)"),
    ("pde", "flux", "`odd_power` for u|u|^{q-1} or `power` for u^q (default odd_power)"),
    ("data", "kind", "fractional_bump | compact_bump | dipole | miyakawa (default fractional_bump)"),
    ("data", "mass", "mass of the undifferentiated profile (default 1)"),
    ("data", "width", "Gaussian width of fractional_bump and dipole (default 1)"),
    ("data", "radius", "support radius of compact_bump and miyakawa (default 2)"),
    ("data", "axis", "derivative axis of dipole (default 0)"),
    ("run", "t0", "initial time (default 0)"),
    ("run", "T", "final time; required"),
    ("run", "dt", "time step; required"),
    ("run", "scheme", "ifrk4 | etdrk2 (default ifrk4)"),
    ("run", "pad", "dealiasing padding factor >= 2 (default 2)"),
    ("run", "samples", "log-spaced sample times after t0 (default 40)"),
    ("run", "first_sample", "first log-spaced sample (default T/1000 or t0)"),
    ("run", "waiver", "allow sqrt(T) > L/4 (default false)"),
    ("run", "blowup", "sup-norm blowup threshold (default 1e6 max|u0|)"),
    ("analysis", "fit_lo", "lower end of the decay-fit window (default: last decade)"),
    ("analysis", "fit_hi", "upper end of the decay-fit window (default T)"),
    ("analysis", "extra_p", "extra Lebesgue exponents recorded at every sample"),
    ("analysis", "picard_intervals", "intervals of the graded Picard time grid (default 48)"),
    ("analysis", "picard_sigma", "sigma nodes of the Duhamel quadrature (default 64)"),
    ("analysis", "picard_kmax", "maximum Picard iterations (default 12)"),
    ("analysis", "picard_epsilon", "Besov smallness gate (default none)"),
    ("analysis", "waive_balance", "allow Picard iteration with q != q* (default false)"),
    ("analysis", "perturbation", "mass of the dipole added in stability runs (default 0.05)"),
    ("analysis", "control", "also run the v0 = 2 u0 stability control (default true)"),
    ("analysis", "oracle_tolerance", "max relative L-infinity error vs Cole-Hopf (default 1e-5)"),
    ("analysis", "oracle_nodes", "trapezoid nodes of the Cole-Hopf quadrature (default 24001)"),
    ("analysis", "sweep_q", "q values of a sweep, comma separated"),
    ("analysis", "sweep_beta", "beta values of a sweep, comma separated"),
    ("analysis", "input", "norms.csv consumed by the fit command"),
];

const REQUIRED: &[(&str, &str)] = &[
    ("grid", "L"),
    ("grid", "N"),
    ("pde", "q"),
    ("pde", "beta"),
    ("run", "T"),
    ("run", "dt"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    FractionalBump,
    CompactBump,
    Dipole,
    Miyakawa,
}

impl DataKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DataKind::FractionalBump => "fractional_bump",
            DataKind::CompactBump => "compact_bump",
            DataKind::Dipole => "dipole",
            DataKind::Miyakawa => "miyakawa",
        }
    }
}

impl FromStr for DataKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fractional_bump" => Ok(DataKind::FractionalBump),
            "compact_bump" => Ok(DataKind::CompactBump),
            "dipole" => Ok(DataKind::Dipole),
            "miyakawa" => Ok(DataKind::Miyakawa),
            other => Err(format!("unknown data kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSection {
    pub dim: usize,
    pub half_width: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeSection {
    pub q: f64,
    pub beta: f64,
    pub a: Vec<f64>,
    pub flux: FluxKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSection {
    pub kind: DataKind,
    pub mass: f64,
    pub width: f64,
    pub radius: f64,
    pub axis: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub t0: f64,
    pub horizon: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub pad: usize,
    pub samples: usize,
    pub first_sample: Option<f64>,
    pub waiver: bool,
    pub blowup: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSection {
    pub fit_lo: Option<f64>,
    pub fit_hi: Option<f64>,
    pub extra_p: Vec<f64>,
    pub picard_intervals: usize,
    pub picard_sigma: usize,
    pub picard_kmax: usize,
    pub picard_epsilon: Option<f64>,
    pub waive_balance: bool,
    pub perturbation: f64,
    pub control: bool,
    pub oracle_tolerance: f64,
    pub oracle_nodes: usize,
    pub sweep_q: Vec<f64>,
    pub sweep_beta: Vec<f64>,
    pub input: Option<PathBuf>,
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub grid: GridSection,
    pub pde: PdeSection,
    pub data: DataSection,
    pub run: RunSection,
    pub analysis: AnalysisSection,
}

struct Entry {
    line: usize,
    section: String,
    key: String,
    value: String,
}

struct Entries(Vec<Entry>);

impl Entries {
    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.0
            .iter()
            .rev()
            .find(|e| e.section == section && e.key == key)
    }

    fn parsed<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|err| ConfigError::Parse {
                line: e.line,
                message: format!("`{key}`: {err}"),
            }),
        }
    }

    fn number(&self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) => parse_number(&e.value).map(Some).map_err(|message| ConfigError::Parse {
                line: e.line,
                message: format!("`{key}`: {message}"),
            }),
        }
    }

    fn list(&self, section: &str, key: &str) -> Result<Vec<f64>> {
        match self.get(section, key) {
            None => Ok(Vec::new()),
            Some(e) => e
                .value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    parse_number(s).map_err(|message| ConfigError::Parse {
                        line: e.line,
                        message: format!("`{key}`: {message}"),
                    })
                })
                .collect(),
        }
    }
}

/// Accepts decimal numbers and fractions `a/b`.
pub fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| format!("bad number `{s}`"))?;
            let den: f64 = den.trim().parse().map_err(|_| format!("bad number `{s}`"))?;
            num / den
        }
        None => s.parse().map_err(|_| format!("bad number `{s}`"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut section: Option<String> = None;
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Parse {
                line,
                message: format!("malformed section header `{content}`"),
            })?;
            let name = name.trim();
            if !KEYS.iter().any(|(s, _, _)| *s == name) {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("unknown section [{name}]"),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("expected `key = value`, found `{content}`"),
        })?;
        let section = section.clone().ok_or_else(|| ConfigError::Parse {
            line,
            message: "key outside of any section".into(),
        })?;
        let key = key.trim();
        if !KEYS.iter().any(|(s, k, _)| *s == section && *k == key) {
            return Err(ConfigError::UnknownKey {
                line,
                section,
                key: key.to_string(),
            });
        }
        entries.push(Entry {
            line,
            section,
            key: key.to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(Entries(entries))
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

impl Config {
    pub fn parse_str(text: &str) -> Result<Self> {
        let e = tokenize(text)?;
        for (section, key) in REQUIRED {
            if e.get(section, key).is_none() {
                return Err(ConfigError::MissingRequired {
                    section: section.to_string(),
                    key: key.to_string(),
                });
            }
        }

        let dim = e.parsed::<usize>("grid", "n")?.unwrap_or(1);
        let grid = GridSection {
            dim,
            half_width: e.number("grid", "L")?.unwrap(),
            points: e.parsed::<usize>("grid", "N")?.unwrap(),
        };
        GridSpec::new(grid.dim, grid.half_width, grid.points)
            .map_err(|err| invalid("grid", err.to_string()))?;

        let beta = e.number("pde", "beta")?.unwrap();
        let q = match e.get("pde", "q") {
            Some(entry) if entry.value == "critical" => zml_core::critical_exponent(dim, beta),
            _ => e.number("pde", "q")?.unwrap(),
        };
        let a = match e.get("pde", "a") {
            Some(_) => e.list("pde", "a")?,
            None => {
                let mut a = vec![0.0; dim];
                a[0] = 1.0;
                a
            }
        };
        if a.len() != dim {
            return Err(invalid("a", format!("{} components for n = {dim}", a.len())));
        }
        let flux = match e.get("pde", "flux").map(|v| v.value.as_str()) {
            None | Some("odd_power") => FluxKind::OddPower,
            Some("power") => FluxKind::Power,
            Some(other) => return Err(invalid("flux", format!("unknown flux `{other}`"))),
        };
        let pde = PdeSection { q, beta, a, flux };

        let data = DataSection {
            kind: e.parsed::<DataKind>("data", "kind")?.unwrap_or(DataKind::FractionalBump),
            mass: e.number("data", "mass")?.unwrap_or(1.0),
            width: e.number("data", "width")?.unwrap_or(1.0),
            radius: e.number("data", "radius")?.unwrap_or(2.0),
            axis: e.parsed::<usize>("data", "axis")?.unwrap_or(0),
        };
        if data.axis >= dim {
            return Err(invalid("axis", format!("axis {} for n = {dim}", data.axis)));
        }

        let scheme = match e.get("run", "scheme").map(|v| v.value.as_str()) {
            None | Some("ifrk4") => Scheme::Ifrk4,
            Some("etdrk2") => Scheme::Etdrk2,
            Some(other) => return Err(invalid("scheme", format!("unknown scheme `{other}`"))),
        };
        let run = RunSection {
            t0: e.number("run", "t0")?.unwrap_or(0.0),
            horizon: e.number("run", "T")?.unwrap(),
            dt: e.number("run", "dt")?.unwrap(),
            scheme,
            pad: e.parsed::<usize>("run", "pad")?.unwrap_or(2),
            samples: e.parsed::<usize>("run", "samples")?.unwrap_or(40),
            first_sample: e.number("run", "first_sample")?,
            waiver: e.parsed::<bool>("run", "waiver")?.unwrap_or(false),
            blowup: e.number("run", "blowup")?,
        };

        let analysis = AnalysisSection {
            fit_lo: e.number("analysis", "fit_lo")?,
            fit_hi: e.number("analysis", "fit_hi")?,
            extra_p: e.list("analysis", "extra_p")?,
            picard_intervals: e.parsed("analysis", "picard_intervals")?.unwrap_or(48),
            picard_sigma: e.parsed("analysis", "picard_sigma")?.unwrap_or(64),
            picard_kmax: e.parsed("analysis", "picard_kmax")?.unwrap_or(12),
            picard_epsilon: e.number("analysis", "picard_epsilon")?,
            waive_balance: e.parsed("analysis", "waive_balance")?.unwrap_or(false),
            perturbation: e.number("analysis", "perturbation")?.unwrap_or(0.05),
            control: e.parsed("analysis", "control")?.unwrap_or(true),
            oracle_tolerance: e.number("analysis", "oracle_tolerance")?.unwrap_or(1e-5),
            oracle_nodes: e.parsed("analysis", "oracle_nodes")?.unwrap_or(24001),
            sweep_q: e.list("analysis", "sweep_q")?,
            sweep_beta: e.list("analysis", "sweep_beta")?,
            input: e.get("analysis", "input").map(|v| PathBuf::from(&v.value)),
        };

        Ok(Config {
            grid,
            pde,
            data,
            run,
            analysis,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::new(self.grid.dim, self.grid.half_width, self.grid.points)
            .expect("validated at parse time")
    }

    /// Canonical text form; parsing it yields an identical `Config`.
    pub fn dump(&self) -> String {
        self.to_string()
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let g = &self.grid;
        writeln!(s, "[grid]\nn = {}\nL = {}\nN = {}\n", g.dim, g.half_width, g.points)?;
        let p = &self.pde;
        let flux = match p.flux {
            FluxKind::OddPower => "odd_power",
            FluxKind::Power => "power",
        };
        writeln!(
            s,
            "[pde]\nq = {}\nbeta = {}\na = {}\nflux = {flux}\n",
            p.q,
            p.beta,
            join(&p.a)
        )?;
        let d = &self.data;
        writeln!(
            s,
            "[data]\nkind = {}\nmass = {}\nwidth = {}\nradius = {}\naxis = {}\n",
            d.kind.as_str(),
            d.mass,
            d.width,
            d.radius,
            d.axis
        )?;
        let r = &self.run;
        let scheme = match r.scheme {
            Scheme::Ifrk4 => "ifrk4",
            Scheme::Etdrk2 => "etdrk2",
        };
        writeln!(
            s,
            "[run]\nt0 = {}\nT = {}\ndt = {}\nscheme = {scheme}\npad = {}\nsamples = {}\nwaiver = {}",
            r.t0, r.horizon, r.dt, r.pad, r.samples, r.waiver
        )?;
        if let Some(v) = r.first_sample {
            writeln!(s, "first_sample = {v}")?;
        }
        if let Some(v) = r.blowup {
            writeln!(s, "blowup = {v}")?;
        }
        let a = &self.analysis;
        writeln!(s, "\n[analysis]")?;
        if let Some(v) = a.fit_lo {
            writeln!(s, "fit_lo = {v}")?;
        }
        if let Some(v) = a.fit_hi {
            writeln!(s, "fit_hi = {v}")?;
        }
        writeln!(s, "extra_p = {}", join(&a.extra_p))?;
        writeln!(
            s,
            "picard_intervals = {}\npicard_sigma = {}\npicard_kmax = {}",
            a.picard_intervals, a.picard_sigma, a.picard_kmax
        )?;
        if let Some(v) = a.picard_epsilon {
            writeln!(s, "picard_epsilon = {v}")?;
        }
        writeln!(
            s,
            "waive_balance = {}\nperturbation = {}\ncontrol = {}\noracle_tolerance = {}\noracle_nodes = {}",
            a.waive_balance, a.perturbation, a.control, a.oracle_tolerance, a.oracle_nodes
        )?;
        writeln!(s, "sweep_q = {}\nsweep_beta = {}", join(&a.sweep_q), join(&a.sweep_beta))?;
        if let Some(v) = &a.input {
            writeln!(s, "input = {}", v.display())?;
        }
        f.write_str(&s)
    }
}
