//! Flags, the `key = value` config file and the sweep grammar.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::Parser;
use tavis_core::space::SystemParams;

/// Keys accepted both as `--flag` and in the config file.
pub const KEYS: [&str; 13] = [
    "n-emitters",
    "kappa",
    "gamma",
    "pump",
    "dephasing",
    "nmax",
    "method",
    "trajectories",
    "t-total",
    "t-burn-in",
    "seed",
    "sweep",
    "output",
];

/// Rates are in units of g.
#[derive(Parser, Debug, Clone, Default)]
#[command(
    name = "tavis",
    version,
    about = "Steady-state sweeps of the open Tavis-Cummings model",
    allow_negative_numbers = true
)]
pub struct CliArgs {
    #[arg(long)]
    pub n_emitters: Option<String>,
    #[arg(long)]
    pub kappa: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    /// Incoherent pump rate P_x.
    #[arg(long)]
    pub pump: Option<String>,
    /// Pure dephasing rate γ*.
    #[arg(long)]
    pub dephasing: Option<String>,
    /// Largest photon cutoff tried (direct) or cutoff used (mcwf).
    #[arg(long)]
    pub nmax: Option<String>,
    /// direct | mcwf | adiabatic | analytic | auto
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub trajectories: Option<String>,
    #[arg(long)]
    pub t_total: Option<String>,
    #[arg(long)]
    pub t_burn_in: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// `param:log|linear:lo:hi:count` or `param:list:v1,v2,...`
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<String>,
}

impl CliArgs {
    fn flag_values(&self) -> [(&'static str, &Option<String>); 13] {
        [
            ("n-emitters", &self.n_emitters),
            ("kappa", &self.kappa),
            ("gamma", &self.gamma),
            ("pump", &self.pump),
            ("dephasing", &self.dephasing),
            ("nmax", &self.nmax),
            ("method", &self.method),
            ("trajectories", &self.trajectories),
            ("t-total", &self.t_total),
            ("t-burn-in", &self.t_burn_in),
            ("seed", &self.seed),
            ("sweep", &self.sweep),
            ("output", &self.output),
        ]
    }
}

/// Where a setting came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Line(n) => write!(f, "line {n}"),
            Self::Flag => write!(f, "command line"),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { key: String, origin: Origin },
    #[error("{origin}: bad value for `{key}`: {reason}")]
    Malformed {
        key: String,
        origin: Origin,
        reason: String,
    },
    #[error("missing required field `{key}`")]
    Missing { key: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Direct,
    Mcwf,
    Adiabatic,
    Analytic,
    /// Direct up to dimension 4096, trajectories above.
    Auto,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Direct => "direct",
            Self::Mcwf => "mcwf",
            Self::Adiabatic => "adiabatic",
            Self::Analytic => "analytic",
            Self::Auto => "auto",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Kappa,
    NEmitters,
    Dephasing,
    Pump,
}

impl SweepParam {
    fn key(self) -> &'static str {
        match self {
            Self::Kappa => "kappa",
            Self::NEmitters => "n-emitters",
            Self::Dephasing => "dephasing",
            Self::Pump => "pump",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    Log { lo: f64, hi: f64, count: usize },
    Linear { lo: f64, hi: f64, count: usize },
    List(Vec<f64>),
}

impl Grid {
    /// Grid points; the end points are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        let spaced = |lo: f64, hi: f64, count: usize, map: &dyn Fn(f64) -> f64| {
            (0..count)
                .map(|k| {
                    if k == 0 {
                        lo
                    } else if k + 1 == count {
                        hi
                    } else {
                        map(k as f64 / (count - 1) as f64)
                    }
                })
                .collect()
        };
        match self {
            Self::Log { lo, hi, count } => {
                let (a, b) = (lo.log10(), hi.log10());
                spaced(*lo, *hi, *count, &|s| 10f64.powf(a + s * (b - a)))
            }
            Self::Linear { lo, hi, count } => spaced(*lo, *hi, *count, &|s| lo + s * (hi - lo)),
            Self::List(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub grid: Grid,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryOverrides {
    pub n_trajectories: Option<usize>,
    pub t_total: Option<f64>,
    pub t_burn_in: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    /// Values for everything that is not swept.
    pub base: SystemParams,
    pub sweep: Option<Sweep>,
    pub method: Method,
    pub nmax: Option<usize>,
    pub trajectories: TrajectoryOverrides,
    pub output: Option<PathBuf>,
}

impl SweepSpec {
    /// One parameter set per grid point, in grid order.
    pub fn points(&self) -> Vec<SystemParams> {
        let Some(sw) = &self.sweep else {
            return vec![self.base];
        };
        sw.grid
            .values()
            .into_iter()
            .map(|v| {
                let p = self.base;
                match sw.param {
                    SweepParam::Kappa => p.with_kappa(v),
                    SweepParam::Dephasing => p.with_dephasing(v),
                    SweepParam::Pump => p.with_pump(v),
                    SweepParam::NEmitters => SystemParams {
                        n_emitters: v as usize,
                        ..p
                    },
                }
            })
            .collect()
    }
}

type Entries = BTreeMap<String, (String, Origin)>;

fn read_file(path: &Path, out: &mut Entries) -> Result<(), ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_text(&text, out)
}

fn parse_text(text: &str, out: &mut Entries) -> Result<(), ConfigError> {
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or(ConfigError::Syntax { line })?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey {
                key,
                origin: Origin::Line(line),
            });
        }
        out.insert(key, (value.trim().to_string(), Origin::Line(line)));
    }
    Ok(())
}

/// Merges the config file (if any) with flags, flags taking precedence.
pub fn parse_config(args: &CliArgs) -> Result<SweepSpec, ConfigError> {
    let mut entries = Entries::new();
    if let Some(path) = &args.config {
        read_file(path, &mut entries)?;
    }
    for (key, value) in args.flag_values() {
        if let Some(v) = value {
            entries.insert(key.to_string(), (v.clone(), Origin::Flag));
        }
    }
    build(&entries)
}

/// As [`parse_config`] for config text already in memory.
pub fn parse_config_text(text: &str, args: &CliArgs) -> Result<SweepSpec, ConfigError> {
    let mut entries = Entries::new();
    parse_text(text, &mut entries)?;
    for (key, value) in args.flag_values() {
        if let Some(v) = value {
            entries.insert(key.to_string(), (v.clone(), Origin::Flag));
        }
    }
    build(&entries)
}

fn malformed(key: &str, origin: Origin, reason: impl Into<String>) -> ConfigError {
    ConfigError::Malformed {
        key: key.to_string(),
        origin,
        reason: reason.into(),
    }
}

fn number(key: &str, value: &str, origin: Origin) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| malformed(key, origin, format!("`{value}` is not a finite number")))
}

fn rate(key: &str, value: &str, origin: Origin) -> Result<f64, ConfigError> {
    let v = number(key, value, origin)?;
    if v < 0.0 {
        return Err(malformed(key, origin, format!("rate must be nonnegative, got {v}")));
    }
    Ok(v)
}

fn integer(key: &str, value: &str, origin: Origin) -> Result<u64, ConfigError> {
    value
        .parse::<u64>()
        .map_err(|_| malformed(key, origin, format!("`{value}` is not a nonnegative integer")))
}

fn parse_sweep(value: &str, origin: Origin) -> Result<Sweep, ConfigError> {
    let bad = |reason: String| malformed("sweep", origin, reason);
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    let param = match parts[0] {
        "kappa" => SweepParam::Kappa,
        "n_emitters" | "n-emitters" => SweepParam::NEmitters,
        "dephasing" => SweepParam::Dephasing,
        "pump_px" | "pump" => SweepParam::Pump,
        other => return Err(bad(format!("cannot sweep `{other}`"))),
    };
    let num = |s: &str| number("sweep", s, origin);
    let grid = match (parts.get(1).copied(), parts.len()) {
        (Some(kind @ ("log" | "linear")), 5) => {
            let (lo, hi) = (num(parts[2])?, num(parts[3])?);
            let count = integer("sweep", parts[4], origin)? as usize;
            if count == 0 {
                return Err(bad("grid needs at least one point".into()));
            }
            if kind == "log" {
                if lo <= 0.0 || hi <= 0.0 {
                    return Err(bad("log grids need positive bounds".into()));
                }
                Grid::Log { lo, hi, count }
            } else {
                Grid::Linear { lo, hi, count }
            }
        }
        (Some("list"), 3) => {
            let v = parts[2]
                .split(',')
                .map(|s| num(s.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            Grid::List(v)
        }
        _ => {
            return Err(bad(format!(
                "`{value}` does not match param:log|linear:lo:hi:count or param:list:v1,..."
            )))
        }
    };
    let values = grid.values();
    if values.is_empty() {
        return Err(bad("grid is empty".into()));
    }
    for &v in &values {
        let ok = match param {
            SweepParam::NEmitters => v >= 1.0 && v.fract() == 0.0,
            SweepParam::Kappa | SweepParam::Dephasing | SweepParam::Pump => v >= 0.0,
        };
        if !ok {
            return Err(bad(format!("{v} is not a valid {}", param.key())));
        }
    }
    Ok(Sweep { param, grid })
}

fn build(e: &Entries) -> Result<SweepSpec, ConfigError> {
    let get = |k: &str| e.get(k).map(|(v, o)| (v.as_str(), *o));
    let sweep = get("sweep").map(|(v, o)| parse_sweep(v, o)).transpose()?;
    let swept = sweep.as_ref().map(|s| s.param);

    let n_emitters = match get("n-emitters") {
        Some((v, o)) => {
            let n = integer("n-emitters", v, o)?;
            if n == 0 {
                return Err(malformed("n-emitters", o, "must be at least 1"));
            }
            n as usize
        }
        None if swept == Some(SweepParam::NEmitters) => 1,
        None => return Err(ConfigError::Missing { key: "n-emitters".into() }),
    };
    let rate_or = |k: &str, default: Option<f64>, param: SweepParam| match get(k) {
        Some((v, o)) => rate(k, v, o),
        None if swept == Some(param) => Ok(0.0),
        None => default.ok_or(ConfigError::Missing { key: k.into() }),
    };
    let kappa = rate_or("kappa", None, SweepParam::Kappa)?;
    let pump = rate_or("pump", Some(0.0), SweepParam::Pump)?;
    let dephasing = rate_or("dephasing", Some(0.0), SweepParam::Dephasing)?;
    let gamma = match get("gamma") {
        Some((v, o)) => rate("gamma", v, o)?,
        None => 0.0,
    };
    let base = SystemParams::new(n_emitters)
        .with_kappa(kappa)
        .with_gamma(gamma)
        .with_pump(pump)
        .with_dephasing(dephasing);

    let method = match get("method") {
        None => Method::Direct,
        Some((v, o)) => match v {
            "direct" => Method::Direct,
            "mcwf" => Method::Mcwf,
            "adiabatic" => Method::Adiabatic,
            "analytic" => Method::Analytic,
            "auto" => Method::Auto,
            other => {
                return Err(malformed(
                    "method",
                    o,
                    format!("`{other}` is not one of direct, mcwf, adiabatic, analytic, auto"),
                ))
            }
        },
    };
    let nmax = get("nmax")
        .map(|(v, o)| integer("nmax", v, o).map(|n| n as usize))
        .transpose()?;
    let positive_time = |k: &str| -> Result<Option<f64>, ConfigError> {
        get(k)
            .map(|(v, o)| {
                let t = number(k, v, o)?;
                if t < 0.0 {
                    return Err(malformed(k, o, "time must be nonnegative"));
                }
                Ok(t)
            })
            .transpose()
    };
    let trajectories = TrajectoryOverrides {
        n_trajectories: get("trajectories")
            .map(|(v, o)| integer("trajectories", v, o).map(|n| n as usize))
            .transpose()?,
        t_total: positive_time("t-total")?,
        t_burn_in: positive_time("t-burn-in")?,
        seed: get("seed").map(|(v, o)| integer("seed", v, o)).transpose()?,
    };
    Ok(SweepSpec {
        base,
        sweep,
        method,
        nmax,
        trajectories,
        output: get("output").map(|(v, _)| PathBuf::from(v)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> CliArgs {
        let mut v = vec!["tavis"];
        v.extend_from_slice(list);
        CliArgs::try_parse_from(v).unwrap()
    }

    #[test]
    fn log_grid_hits_end_points() {
        let g = Grid::Log {
            lo: 1e-2,
            hi: 1e6,
            count: 60,
        };
        let v = g.values();
        assert_eq!(v.len(), 60);
        assert_eq!((v[0], v[59]), (1e-2, 1e6));
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        let single = Grid::Linear {
            lo: 3.0,
            hi: 5.0,
            count: 1,
        };
        assert_eq!(single.values(), vec![3.0]);
    }

    #[test]
    fn sweep_grammar() {
        let s = parse_sweep("pump_px:list:0.1, 0.2,0.4", Origin::Flag).unwrap();
        assert_eq!(s.grid.values(), vec![0.1, 0.2, 0.4]);
        assert_eq!(s.param, SweepParam::Pump);
        let bad = ["kappa:log:0:1:5", "omega:linear:0:1:3", "kappa:log:1:2", "n_emitters:list:1,2.5"];
        for b in bad {
            assert!(parse_sweep(b, Origin::Flag).is_err(), "{b}");
        }
    }

    #[test]
    fn unknown_key_names_line() {
        let e = parse_config_text("kappa = 1\n\n# note\nomega = 3\n", &args(&["--n-emitters", "2"]));
        assert_eq!(
            e.unwrap_err(),
            ConfigError::UnknownKey {
                key: "omega".into(),
                origin: Origin::Line(4)
            }
        );
    }

    #[test]
    fn missing_fields() {
        let e = parse_config_text("", &args(&["--kappa", "1"])).unwrap_err();
        assert_eq!(e, ConfigError::Missing { key: "n-emitters".into() });
        let e = parse_config_text("", &args(&["--n-emitters", "2"])).unwrap_err();
        assert_eq!(e, ConfigError::Missing { key: "kappa".into() });
        assert!(parse_config_text("", &args(&["--n-emitters", "2", "--sweep", "kappa:list:1"])).is_ok());
    }
}
