//! Run configuration: defaults, an optional key=value file, then flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fockzero::fock_norm::QuadratureSpec;
use fockzero::{LatticeSpec, TruncationPolicy};

use crate::Failure;

/// Values a flag or config line may set. `None` means "not given".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub r_shift: Option<f64>,
    pub p: Option<Vec<f64>>,
    pub rho_max: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub m_min: Option<usize>,
    pub max_doublings: Option<u32>,
    pub radial_step: Option<f64>,
    pub angular_step: Option<f64>,
}

impl Overrides {
    /// Fields set in `self` win over `base`.
    pub fn layered_over(self, base: Overrides) -> Overrides {
        Overrides {
            alpha: self.alpha.or(base.alpha),
            r_shift: self.r_shift.or(base.r_shift),
            p: self.p.or(base.p),
            rho_max: self.rho_max.or(base.rho_max),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
            tol: self.tol.or(base.tol),
            m_min: self.m_min.or(base.m_min),
            max_doublings: self.max_doublings.or(base.max_doublings),
            radial_step: self.radial_step.or(base.radial_step),
            angular_step: self.angular_step.or(base.angular_step),
        }
    }
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: LatticeSpec,
    pub p_exponents: Vec<f64>,
    pub rho_max: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub policy: TruncationPolicy,
    pub quadrature: QuadratureSpec,
}

pub const DEFAULT_R: f64 = 0.75;
pub const DEFAULT_SEED: u64 = 7;

impl RunConfig {
    pub fn resolve(o: Overrides) -> Result<Self, Failure> {
        let alpha = o.alpha.unwrap_or(std::f64::consts::PI);
        let spec = LatticeSpec::new(alpha, o.r_shift.unwrap_or(DEFAULT_R)).map_err(Failure::config)?;
        let d = TruncationPolicy::default();
        let policy = TruncationPolicy::new(
            o.m_min.unwrap_or(d.m_min),
            o.tol.unwrap_or(d.tol),
            o.max_doublings.unwrap_or(d.max_doublings),
        )
        .map_err(Failure::config)?;
        let q = QuadratureSpec::default();
        let quadrature = QuadratureSpec::new(
            o.radial_step.unwrap_or(q.radial_step()),
            o.angular_step.unwrap_or(q.angular_step()),
        )
        .map_err(Failure::config)?;
        let p_exponents = o.p.unwrap_or_else(|| vec![2.0]);
        if p_exponents.is_empty() || p_exponents.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Failure::config_msg("p must be a nonempty list of positive numbers"));
        }
        let rho_max = o.rho_max.unwrap_or(32.0 * spec.a());
        if !(rho_max.is_finite() && rho_max > 0.0) {
            return Err(Failure::config_msg(format!("rho_max must satisfy rho_max > 0 (got {rho_max})")));
        }
        Ok(Self {
            spec,
            p_exponents,
            rho_max,
            output_dir: o.out.unwrap_or_else(|| PathBuf::from("fockzero-out")),
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            policy,
            quadrature,
        })
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, Failure> {
    value
        .trim()
        .parse()
        .map_err(|_| Failure::config_msg(format!("cannot parse {key} = {value:?}")))
}

/// Comma-separated list of positive reals.
pub fn parse_list(value: &str) -> Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("not a number: {s:?}")))
        .collect()
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Overrides, Failure> {
    let mut seen = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Failure::config_msg(format!("line {}: expected key = value", lineno + 1)))?;
        seen.insert(k.trim().to_string(), v.trim().to_string());
    }
    let mut o = Overrides::default();
    for (k, v) in &seen {
        match k.as_str() {
            "alpha" => o.alpha = Some(parse_num(k, v)?),
            "R" | "r_shift" => o.r_shift = Some(parse_num(k, v)?),
            "p" => o.p = Some(parse_list(v).map_err(Failure::config_msg)?),
            "rho_max" => o.rho_max = Some(parse_num(k, v)?),
            "seed" => o.seed = Some(parse_num(k, v)?),
            "out" => o.out = Some(PathBuf::from(v)),
            "tol" => o.tol = Some(parse_num(k, v)?),
            "m_min" => o.m_min = Some(parse_num(k, v)?),
            "max_doublings" => o.max_doublings = Some(parse_num(k, v)?),
            "radial_step" => o.radial_step = Some(parse_num(k, v)?),
            "angular_step" => o.angular_step = Some(parse_num(k, v)?),
            other => return Err(Failure::config_msg(format!("unknown config key {other:?}"))),
        }
    }
    Ok(o)
}

pub fn read_config_file(path: &Path) -> Result<Overrides, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config_msg(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}
