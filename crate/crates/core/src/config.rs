//! Scenario files: one `key = value` per line, `#` starts a comment, nested
//! settings use dotted keys (`kernel.type`, `eps.0`).
//!
//! Every key is checked. Unknown, duplicated, malformed and missing keys are
//! rejected with the key named; physics parameters never take defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::delay::{BlendWeights, Kernel, RevisedMode};
use crate::error::{Error, Result};
use crate::fractional::FracOrder;
use crate::state::StateVec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Classical,
    MetriplecticFirst,
    MetriplecticSecond,
    Literal38,
    Literal10,
    Delay,
    DelayRevised,
    Fractional,
    FractionalDelay,
}

impl SystemKind {
    pub const ALL: [SystemKind; 9] = [
        SystemKind::Classical,
        SystemKind::MetriplecticFirst,
        SystemKind::MetriplecticSecond,
        SystemKind::Literal38,
        SystemKind::Literal10,
        SystemKind::Delay,
        SystemKind::DelayRevised,
        SystemKind::Fractional,
        SystemKind::FractionalDelay,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::Classical => "classical",
            SystemKind::MetriplecticFirst => "metriplectic-first",
            SystemKind::MetriplecticSecond => "metriplectic-second",
            SystemKind::Literal38 => "literal38",
            SystemKind::Literal10 => "literal10",
            SystemKind::Delay => "delay",
            SystemKind::DelayRevised => "delay-revised",
            SystemKind::Fractional => "fractional",
            SystemKind::FractionalDelay => "fractional-delay",
        }
    }

    pub fn is_fractional(self) -> bool {
        matches!(self, SystemKind::Fractional | SystemKind::FractionalDelay)
    }

    /// Systems driven by a distributed delay kernel.
    pub fn uses_kernel(self) -> bool {
        matches!(self, SystemKind::Delay | SystemKind::DelayRevised)
    }

    /// Systems with blend weights.
    pub fn uses_weights(self) -> bool {
        matches!(self, SystemKind::Delay | SystemKind::DelayRevised | SystemKind::FractionalDelay)
    }

    /// Systems with a revised (metric) leg in constructed or literal form.
    pub fn uses_mode(self) -> bool {
        matches!(self, SystemKind::DelayRevised | SystemKind::FractionalDelay)
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        SystemKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = SystemKind::ALL.iter().map(|k| k.as_str()).collect();
                format!("unknown system `{s}`; expected one of {}", names.join(", "))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputSpec {
    pub path: PathBuf,
    pub format: OutputFormat,
}

/// Monitored functionals available to `simulate`.
pub const MONITOR_NAMES: [&str; 3] = ["h1", "c1", "h3"];

/// Complex rectangle and grid for the `roots` analysis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanSpec {
    pub region: [f64; 4],
    pub grid: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub system: SystemKind,
    pub m: Option<f64>,
    pub x0: Option<StateVec>,
    pub alpha: Option<FracOrder>,
    /// Point delay of the fractional delay system.
    pub tau: Option<f64>,
    pub kernel: Option<Kernel>,
    pub weights: Option<BlendWeights>,
    pub mode: Option<RevisedMode>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub monitors: Vec<String>,
    pub output: Option<OutputSpec>,
    pub seed: Option<u64>,
    pub scan: Option<ScanSpec>,
}

/// Raw entry with its source line.
#[derive(Clone, Debug)]
struct Entry {
    value: String,
    line: usize,
}

struct Raw {
    path: PathBuf,
    entries: BTreeMap<String, Entry>,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

impl Raw {
    fn parse(text: &str, path: &Path) -> Result<Raw> {
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(parse_err(path, line, format!("expected `key = value`, found `{content}`")));
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-')) {
                return Err(parse_err(path, line, format!("invalid key `{key}`")));
            }
            if value.is_empty() {
                return Err(parse_err(path, line, format!("empty value for `{key}`")));
            }
            if let Some(prev) = entries.get(key) {
                let prev: &Entry = prev;
                return Err(parse_err(path, line, format!("duplicate key `{key}` (first set on line {})", prev.line)));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(Raw {
            path: path.to_path_buf(),
            entries,
        })
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn err(&self, key: &str, e: &Entry, message: impl fmt::Display) -> Error {
        Error::config(key, format!("{message} (line {} of {})", e.line, self.path.display()))
    }

    fn parsed<T: FromStr>(&mut self, key: &str, what: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|_| self.err(key, &e, format!("expected {what}, found `{}`", e.value))),
        }
    }

    fn real(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => parse_real(&e.value)
                .map(Some)
                .map_err(|m| self.err(key, &e, m)),
        }
    }

    fn reals(&mut self, key: &str, n: usize) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => {
                let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
                if parts.len() != n {
                    return Err(self.err(key, &e, format!("expected {n} comma-separated reals, found {}", parts.len())));
                }
                parts
                    .iter()
                    .map(|p| parse_real(p))
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map(Some)
                    .map_err(|m| self.err(key, &e, m))
            }
        }
    }

    /// Four weights given either as `key = a, b, c, d` or as `key.0 .. key.3`.
    fn weights(&mut self, key: &str) -> Result<Option<[f64; 4]>> {
        let whole = self.reals(key, 4)?;
        let mut parts = [None; 4];
        for (i, p) in parts.iter_mut().enumerate() {
            *p = self.real(&format!("{key}.{i}"))?;
        }
        let any_part = parts.iter().any(Option::is_some);
        match (whole, any_part) {
            (Some(_), true) => Err(Error::config(key, "give either the list form or the dotted form, not both")),
            (Some(v), false) => Ok(Some([v[0], v[1], v[2], v[3]])),
            (None, false) => Ok(None),
            (None, true) => {
                let mut out = [0.0; 4];
                for (i, p) in parts.iter().enumerate() {
                    out[i] = p.ok_or_else(|| Error::config(format!("{key}.{i}"), "missing weight component"))?;
                }
                Ok(Some(out))
            }
        }
    }
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("expected a real number, found `{s}`"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("value `{s}` is not finite"))
    }
}

fn require<T>(v: Option<T>, key: &str, system: SystemKind) -> Result<T> {
    v.ok_or_else(|| Error::config(key, format!("required for system `{system}`")))
}

fn forbid<T>(v: &Option<T>, key: &str, system: SystemKind) -> Result<()> {
    if v.is_some() {
        Err(Error::config(key, format!("not used by system `{system}`")))
    } else {
        Ok(())
    }
}

impl ScenarioConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    /// Parses scenario text; `origin` names the source in diagnostics.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut raw = Raw::parse(text, origin)?;
        let system: SystemKind = match raw.take("system") {
            None => return Err(Error::config("system", "missing required key")),
            Some(e) => e.value.parse().map_err(|m: String| raw.err("system", &e, m))?,
        };
        let m = raw.real("m")?;
        let x0 = raw.reals("x0", 3)?.map(|v| StateVec::new(v[0], v[1], v[2]));
        let alpha_raw = raw.real("alpha")?;
        let tau = raw.real("tau")?;
        let dt = raw.real("dt")?;
        let t_end = raw.real("t_end")?;
        let seed = raw.parsed::<u64>("seed", "a non-negative integer")?;
        let mode = match raw.take("mode") {
            None => None,
            Some(e) => Some(match e.value.as_str() {
                "constructed" => RevisedMode::Constructed,
                "literal" => RevisedMode::Literal,
                other => return Err(raw.err("mode", &e, format!("expected `constructed` or `literal`, found `{other}`"))),
            }),
        };
        let monitors = match raw.take("monitors") {
            None => Vec::new(),
            Some(e) => {
                let names: Vec<String> = e.value.split(',').map(|s| s.trim().to_string()).collect();
                for (i, n) in names.iter().enumerate() {
                    if !MONITOR_NAMES.contains(&n.as_str()) {
                        return Err(raw.err("monitors", &e, format!("unknown monitor `{n}`; expected any of h1, c1, h3")));
                    }
                    if names[..i].contains(n) {
                        return Err(raw.err("monitors", &e, format!("monitor `{n}` listed twice")));
                    }
                }
                names
            }
        };
        let kernel = Self::kernel(&mut raw)?;
        let eps = raw.weights("eps")?;
        let delta = raw.weights("delta")?;
        let output = Self::output(&mut raw)?;
        let scan = Self::scan(&mut raw)?;

        if let Some((key, e)) = raw.entries.iter().next() {
            return Err(Error::config(
                key.clone(),
                format!("unknown key (line {} of {})", e.line, raw.path.display()),
            ));
        }

        // per-system presence rules
        let alpha = if system.is_fractional() {
            let a = require(alpha_raw, "alpha", system)?;
            Some(FracOrder::new(a).map_err(|e| Error::config("alpha", e.to_string()))?)
        } else {
            forbid(&alpha_raw, "alpha", system)?;
            None
        };
        if system == SystemKind::FractionalDelay {
            let t = require(tau, "tau", system)?;
            if !(t > 0.0) {
                return Err(Error::config("tau", format!("must be positive, got {t}")));
            }
        } else {
            forbid(&tau, "tau", system)?;
        }
        if system.uses_kernel() {
            require(kernel, "kernel.type", system)?;
        } else {
            forbid(&kernel, "kernel.type", system)?;
        }
        let weights = if system.uses_weights() {
            let e = require(eps, "eps", system)?;
            let d = require(delta, "delta", system)?;
            Some(BlendWeights::new(e, d).map_err(|err| Error::config("eps/delta", err.to_string()))?)
        } else {
            forbid(&eps, "eps", system)?;
            forbid(&delta, "delta", system)?;
            None
        };
        if !system.uses_mode() {
            forbid(&mode, "mode", system)?;
        }
        if let Some(dt) = dt {
            if !(dt > 0.0) {
                return Err(Error::config("dt", format!("must be positive, got {dt}")));
            }
        }
        if let Some(t) = t_end {
            if !(t > 0.0) {
                return Err(Error::config("t_end", format!("must be positive, got {t}")));
            }
        }
        Ok(ScenarioConfig {
            system,
            m,
            x0,
            alpha,
            tau,
            kernel,
            weights,
            mode,
            dt,
            t_end,
            monitors,
            output,
            seed,
            scan,
        })
    }

    fn kernel(raw: &mut Raw) -> Result<Option<Kernel>> {
        let Some(e) = raw.take("kernel.type") else {
            for k in ["kernel.a", "kernel.tau", "kernel.alpha"] {
                if raw.entries.contains_key(k) {
                    return Err(Error::config(k, "kernel parameter given without `kernel.type`"));
                }
            }
            return Ok(None);
        };
        let a = raw.real("kernel.a")?;
        let tau = raw.real("kernel.tau")?;
        let alpha = raw.real("kernel.alpha")?;
        let need = |v: Option<f64>, key: &str| v.ok_or_else(|| Error::config(key, format!("required for kernel `{}`", e.value)));
        let reject = |v: Option<f64>, key: &str| {
            if v.is_some() {
                Err(Error::config(key, format!("not a parameter of kernel `{}`", e.value)))
            } else {
                Ok(())
            }
        };
        let k = match e.value.as_str() {
            "uniform" => {
                reject(alpha, "kernel.alpha")?;
                Kernel::Uniform {
                    a: need(a, "kernel.a")?,
                    tau: need(tau, "kernel.tau")?,
                }
            }
            "exponential" | "erlang" => {
                reject(a, "kernel.a")?;
                reject(tau, "kernel.tau")?;
                let alpha = need(alpha, "kernel.alpha")?;
                if e.value == "exponential" {
                    Kernel::Exponential { alpha }
                } else {
                    Kernel::Erlang { alpha }
                }
            }
            "dirac" => {
                reject(a, "kernel.a")?;
                reject(alpha, "kernel.alpha")?;
                Kernel::Dirac {
                    tau: need(tau, "kernel.tau")?,
                }
            }
            other => {
                return Err(raw.err(
                    "kernel.type",
                    &e,
                    format!("unknown kernel `{other}`; expected uniform, exponential, erlang or dirac"),
                ))
            }
        };
        k.validated().map(Some).map_err(|err| Error::config("kernel", err.to_string()))
    }

    fn output(raw: &mut Raw) -> Result<Option<OutputSpec>> {
        let path = raw.take("output");
        let format = raw.take("format");
        let Some(p) = path else {
            if format.is_some() {
                return Err(Error::config("format", "given without `output`"));
            }
            return Ok(None);
        };
        let path = PathBuf::from(&p.value);
        let format = match format {
            Some(f) => match f.value.as_str() {
                "csv" => OutputFormat::Csv,
                "json" => OutputFormat::Json,
                other => return Err(raw.err("format", &f, format!("expected `csv` or `json`, found `{other}`"))),
            },
            None => match path.extension().and_then(|s| s.to_str()) {
                Some("csv") => OutputFormat::Csv,
                Some("json") => OutputFormat::Json,
                _ => return Err(raw.err("format", &p, "cannot infer the format from the output extension; set `format`")),
            },
        };
        Ok(Some(OutputSpec { path, format }))
    }

    fn scan(raw: &mut Raw) -> Result<Option<ScanSpec>> {
        let region = raw.reals("scan.region", 4)?;
        let grid = raw.parsed::<usize>("scan.grid", "a positive integer")?;
        match (region, grid) {
            (None, None) => Ok(None),
            (Some(r), Some(g)) => {
                if !(r[0] < r[1] && r[2] < r[3]) {
                    return Err(Error::config("scan.region", "expected re_min < re_max and im_min < im_max"));
                }
                if g < 3 {
                    return Err(Error::config("scan.grid", "must be at least 3"));
                }
                Ok(Some(ScanSpec {
                    region: [r[0], r[1], r[2], r[3]],
                    grid: g,
                }))
            }
            (Some(_), None) => Err(Error::config("scan.grid", "required with `scan.region`")),
            (None, Some(_)) => Err(Error::config("scan.region", "required with `scan.grid`")),
        }
    }

    pub fn require_x0(&self) -> Result<StateVec> {
        self.x0.ok_or_else(|| Error::config("x0", "required to simulate"))
    }

    pub fn require_dt(&self) -> Result<f64> {
        self.dt.ok_or_else(|| Error::config("dt", "required to simulate"))
    }

    pub fn require_t_end(&self) -> Result<f64> {
        self.t_end.ok_or_else(|| Error::config("t_end", "required to simulate"))
    }

    pub fn require_m(&self) -> Result<f64> {
        let m = self.m.ok_or_else(|| Error::config("m", "required to analyze equilibria"))?;
        if m == 0.0 {
            return Err(Error::config("m", "must be nonzero"));
        }
        Ok(m)
    }

    /// Echo of the configuration for output metadata.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config is serializable")
    }
}
