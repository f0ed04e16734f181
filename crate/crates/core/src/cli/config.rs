//! Resolution of run settings from defaults, an optional key=value file and
//! command-line flags, in increasing priority.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{QicasError, Result};
use crate::fci::FciOptions;
use crate::model::HubbardParams;
use crate::optimizer::{QicasConfig, RotationScope};

/// Every recognised setting, in manifest order.
pub const KEYS: &[&str] = &[
    "hubbard",
    "periodic",
    "fcidump",
    "nelec",
    "ms2",
    "tol",
    "max-iter",
    "max-space-dim",
    "cas",
    "active",
    "seed",
    "restarts",
    "coarse-step",
    "fine-step",
    "eps1",
    "eps2",
    "n-cycle",
    "scope",
    "basis-file",
    "n",
    "scale",
    "min-run",
    "out",
    "precision",
    "jobs",
];

pub type RawConfig = BTreeMap<String, String>;

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<RawConfig> {
    let mut raw = RawConfig::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| QicasError::Config(format!("line {}: expected key=value, got `{line}`", n + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(QicasError::Config(format!("line {}: unknown key `{k}`", n + 1)));
        }
        raw.insert(k.to_string(), v.trim().to_string());
    }
    Ok(raw)
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    Hubbard(HubbardParams),
    Fcidump(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: InputSource,
    pub nelec: Option<usize>,
    pub ms2: Option<i32>,
    pub fci: FciOptions,
    /// `(N_CAS, D_CAS)`; `D_CAS` may be left for size selection.
    pub cas: Option<(usize, Option<usize>)>,
    pub active: Option<Vec<usize>>,
    pub qicas: QicasConfig,
    pub basis_file: Option<PathBuf>,
    pub n: usize,
    pub scale: f64,
    pub min_run: usize,
    pub out: PathBuf,
    pub precision: usize,
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| QicasError::Config(format!("invalid value `{v}` for {key}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(QicasError::Config(format!("invalid value `{v}` for {key} (expected true|false)"))),
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl RunConfig {
    pub fn resolve(raw: &RawConfig) -> Result<Self> {
        let get = |k: &str| raw.get(k).map(String::as_str);
        let input = match (get("hubbard"), get("fcidump")) {
            (Some(_), Some(_)) => {
                return Err(QicasError::Config("give either --hubbard or --fcidump, not both".into()));
            }
            (None, None) => return Err(QicasError::Config("an input is required: --hubbard L,t,U or --fcidump PATH".into())),
            (Some(value), None) => {
                let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(QicasError::Config(format!("--hubbard expects L,t,U, got `{value}`")));
                }
                let periodic = get("periodic").map(|v| parse_bool("periodic", v)).transpose()?.unwrap_or(false);
                InputSource::Hubbard(HubbardParams {
                    sites: parse("hubbard", parts[0])?,
                    t: parse("hubbard", parts[1])?,
                    u: parse("hubbard", parts[2])?,
                    periodic,
                })
            }
            (None, Some(path)) => InputSource::Fcidump(PathBuf::from(path)),
        };

        let fci_default = FciOptions::default();
        let fci = FciOptions {
            tol: get("tol").map(|v| parse("tol", v)).transpose()?.unwrap_or(fci_default.tol),
            max_iter: get("max-iter").map(|v| parse("max-iter", v)).transpose()?.unwrap_or(fci_default.max_iter),
            max_space_dim: get("max-space-dim")
                .map(|v| parse("max-space-dim", v))
                .transpose()?
                .unwrap_or(fci_default.max_space_dim),
            ..fci_default
        };

        let cas = match get("cas") {
            None => None,
            Some(v) => {
                let nums: Vec<usize> = parse_list("cas", v)?;
                match nums.as_slice() {
                    [n] => Some((*n, None)),
                    [n, d] => Some((*n, Some(*d))),
                    _ => return Err(QicasError::Config(format!("--cas expects N or N,D, got `{v}`"))),
                }
            }
        };
        let active = get("active").map(|v| parse_list("active", v)).transpose()?;

        let q_default = QicasConfig::default();
        let eps1 = get("eps1").map(|v| parse("eps1", v)).transpose()?.unwrap_or(q_default.eps1);
        let qicas = QicasConfig {
            coarse_step: get("coarse-step")
                .map(|v| parse("coarse-step", v))
                .transpose()?
                .unwrap_or(q_default.coarse_step),
            fine_step: get("fine-step")
                .map(|v| parse("fine-step", v))
                .transpose()?
                .unwrap_or(q_default.fine_step),
            eps1,
            eps2: get("eps2").map(|v| parse("eps2", v)).transpose()?.unwrap_or(10.0 * eps1),
            n_cycle: get("n-cycle").map(|v| parse("n-cycle", v)).transpose()?.unwrap_or(q_default.n_cycle),
            rotation_scope: get("scope")
                .map(str::parse::<RotationScope>)
                .transpose()?
                .unwrap_or(q_default.rotation_scope),
            seed: get("seed").map(|v| parse("seed", v)).transpose()?.unwrap_or(q_default.seed),
            restarts: get("restarts").map(|v| parse("restarts", v)).transpose()?.unwrap_or(q_default.restarts),
            jobs: get("jobs").map(|v| parse("jobs", v)).transpose()?.unwrap_or(1),
        };
        qicas.validate()?;

        let cfg = RunConfig {
            input,
            nelec: get("nelec").map(|v| parse("nelec", v)).transpose()?,
            ms2: get("ms2").map(|v| parse("ms2", v)).transpose()?,
            fci,
            cas,
            active,
            qicas,
            basis_file: get("basis-file").map(PathBuf::from),
            n: get("n").map(|v| parse("n", v)).transpose()?.unwrap_or(200),
            scale: get("scale").map(|v| parse("scale", v)).transpose()?.unwrap_or(0.2),
            min_run: get("min-run")
                .map(|v| parse("min-run", v))
                .transpose()?
                .unwrap_or(crate::measures::DEFAULT_MIN_RUN),
            out: PathBuf::from(get("out").unwrap_or("qicas-out")),
            precision: get("precision").map(|v| parse("precision", v)).transpose()?.unwrap_or(9),
        };
        if !(cfg.scale >= 0.0 && cfg.scale.is_finite()) {
            return Err(QicasError::Config(format!("--scale must be non-negative, got {}", cfg.scale)));
        }
        if cfg.precision > 17 {
            return Err(QicasError::Config(format!("--precision {} exceeds 17", cfg.precision)));
        }
        Ok(cfg)
    }

    /// The fully resolved settings, one `key=value` per line.
    pub fn manifest(&self, command: &str) -> String {
        let mut lines = vec![
            format!("command={command}"),
            format!("version={}", env!("CARGO_PKG_VERSION")),
        ];
        match &self.input {
            InputSource::Hubbard(p) => {
                lines.push(format!("hubbard={},{:?},{:?}", p.sites, p.t, p.u));
                lines.push(format!("periodic={}", p.periodic));
            }
            InputSource::Fcidump(path) => lines.push(format!("fcidump={}", path.display())),
        }
        let opt = |v: Option<String>| v.unwrap_or_else(|| "default".into());
        lines.push(format!("nelec={}", opt(self.nelec.map(|v| v.to_string()))));
        lines.push(format!("ms2={}", opt(self.ms2.map(|v| v.to_string()))));
        lines.push(format!("tol={:e}", self.fci.tol));
        lines.push(format!("max-iter={}", self.fci.max_iter));
        lines.push(format!("max-space-dim={}", self.fci.max_space_dim));
        lines.push(format!(
            "cas={}",
            match self.cas {
                None => "none".into(),
                Some((n, None)) => n.to_string(),
                Some((n, Some(d))) => format!("{n},{d}"),
            }
        ));
        lines.push(format!(
            "active={}",
            self.active.as_ref().map_or("none".into(), |a| a
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(","))
        ));
        let q = &self.qicas;
        lines.push(format!("seed={}", q.seed));
        lines.push(format!("restarts={}", q.restarts));
        lines.push(format!("coarse-step={:e}", q.coarse_step));
        lines.push(format!("fine-step={:e}", q.fine_step));
        lines.push(format!("eps1={:e}", q.eps1));
        lines.push(format!("eps2={:e}", q.eps2));
        lines.push(format!("n-cycle={}", q.n_cycle));
        lines.push(format!("scope={}", q.rotation_scope.as_str()));
        lines.push(format!(
            "basis-file={}",
            self.basis_file.as_ref().map_or("none".into(), |p| p.display().to_string())
        ));
        lines.push(format!("n={}", self.n));
        lines.push(format!("scale={:?}", self.scale));
        lines.push(format!("min-run={}", self.min_run));
        lines.push(format!("out={}", self.out.display()));
        lines.push(format!("precision={}", self.precision));
        lines.push(format!("jobs={}", q.jobs));
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }
}
