//! Line-oriented `key = value` experiment configuration with `#` comments.
//! Model and window fields accept arithmetic expressions in the sequence
//! index `n`; everything else is a literal.

use std::fmt;
use std::path::PathBuf;

use gibbseg::functionals::FunctionalKind;
use gibbseg::geometry::{Domain, Window};
use gibbseg::model::{LengthLaw, ModelParams};

use crate::expr::{self, Expr};

/// A configuration error with the offending line number (0 = whole file).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "config error at line {}: {}", self.line, self.message)
        } else {
            write!(f, "config error: {}", self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowShapeKind {
    Square,
    Disk,
}

/// Which functionals an experiment evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionalChoice {
    Phi,
    Psi,
    Both,
}

impl FunctionalChoice {
    pub fn kinds(&self) -> Vec<FunctionalKind> {
        match self {
            FunctionalChoice::Phi => vec![FunctionalKind::Count],
            FunctionalChoice::Psi => vec![FunctionalKind::LengthWeighted],
            FunctionalChoice::Both => {
                vec![FunctionalKind::Count, FunctionalKind::LengthWeighted]
            }
        }
    }
}

/// Parsed experiment configuration. `tau`, `beta`, the window size and the
/// margin are expressions in `n`; scalar commands evaluate them at the first
/// sequence index.
#[derive(Debug)]
pub struct ExperimentConfig {
    pub tau: Expr,
    pub beta: Expr,
    pub radius: f64,
    pub length_law: LengthLaw,
    pub window_shape: WindowShapeKind,
    pub window_size: Expr,
    pub margin: Expr,
    pub sweeps: u64,
    pub burn_in: u64,
    pub replicates: usize,
    pub mc_points: usize,
    pub mc_se_target: Option<f64>,
    pub seed: u64,
    pub functional: FunctionalChoice,
    pub ns: Vec<u64>,
    pub out: PathBuf,
    pub parallelism: usize,
    pub potential_bound: f64,
    pub sharp_b: bool,
    pub gnz_mc_points: usize,
    /// Verbatim text of the parsed file, echoed into metadata sidecars.
    pub source: String,
}

impl ExperimentConfig {
    /// Resolved model parameters at index `n`.
    pub fn params_at(&self, n: u64) -> Result<ModelParams, ConfigError> {
        ModelParams::new(
            self.tau.eval(n as f64),
            self.beta.eval(n as f64),
            self.radius,
            self.length_law,
        )
        .map_err(|e| ConfigError::at(0, e.to_string()))
    }

    pub fn window_at(&self, n: u64) -> Result<Window, ConfigError> {
        let size = self.window_size.eval(n as f64);
        match self.window_shape {
            WindowShapeKind::Square => Window::square(size),
            WindowShapeKind::Disk => Window::disk(size),
        }
        .map_err(|e| ConfigError::at(0, e.to_string()))
    }

    pub fn domain_at(&self, n: u64) -> Result<Domain, ConfigError> {
        let window = self.window_at(n)?;
        Domain::new(window, self.margin.eval(n as f64))
            .map_err(|e| ConfigError::at(0, e.to_string()))
    }
}

fn parse_expr(line: usize, value: &str) -> Result<Expr, ConfigError> {
    expr::parse(value).map_err(|e| ConfigError::at(line, format!("bad expression: {e}")))
}

fn parse_scalar<T: std::str::FromStr>(line: usize, value: &str, what: &str) -> Result<T, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|_| ConfigError::at(line, format!("bad {what}: '{value}'")))
}

/// Parses `name(arg1, arg2, ...)`, returning the name and raw arguments.
fn parse_call(line: usize, value: &str) -> Result<(String, Vec<String>), ConfigError> {
    let open = value
        .find('(')
        .ok_or_else(|| ConfigError::at(line, format!("expected name(...), got '{value}'")))?;
    if !value.trim_end().ends_with(')') {
        return Err(ConfigError::at(line, format!("missing ')' in '{value}'")));
    }
    let name = value[..open].trim().to_string();
    let inner = value.trim_end();
    let args_src = &inner[open + 1..inner.len() - 1];
    let args = args_src
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    Ok((name, args))
}

pub fn parse_config(source: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut tau = None;
    let mut beta = None;
    let mut radius = None;
    let mut length_law = None;
    let mut window = None;
    let mut margin = None;
    let mut sweeps = None;
    let mut burn_in = None;
    let mut replicates = None;
    let mut mc_points = None;
    let mut mc_se_target = None;
    let mut seed = None;
    let mut functional = None;
    let mut ns = None;
    let mut out = None;
    let mut parallelism = None;
    let mut potential_bound = None;
    let mut sharp_b = None;
    let mut gnz_mc_points = None;

    for (idx, raw) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ConfigError::at(lineno, format!("expected 'key = value', got '{line}'"))
        })?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(ConfigError::at(lineno, format!("empty value for '{key}'")));
        }

        macro_rules! set_once {
            ($slot:ident, $val:expr) => {{
                if $slot.is_some() {
                    return Err(ConfigError::at(lineno, format!("duplicate key '{key}'")));
                }
                $slot = Some($val);
            }};
        }

        match key {
            "tau" => set_once!(tau, parse_expr(lineno, value)?),
            "beta" => set_once!(beta, parse_expr(lineno, value)?),
            "r" => set_once!(radius, parse_scalar::<f64>(lineno, value, "radius")?),
            "length_law" => {
                let (name, args) = parse_call(lineno, value)?;
                let law = match (name.as_str(), args.len()) {
                    ("fixed", 1) => {
                        LengthLaw::Fixed(parse_scalar::<f64>(lineno, &args[0], "length")?)
                    }
                    ("uniform", 2) => LengthLaw::Uniform(
                        parse_scalar::<f64>(lineno, &args[0], "length bound")?,
                        parse_scalar::<f64>(lineno, &args[1], "length bound")?,
                    ),
                    _ => {
                        return Err(ConfigError::at(
                            lineno,
                            format!("length_law must be fixed(l) or uniform(a, b), got '{value}'"),
                        ))
                    }
                };
                law.validate()
                    .map_err(|e| ConfigError::at(lineno, e.to_string()))?;
                set_once!(length_law, law);
            }
            "window" => {
                let (name, args) = parse_call(lineno, value)?;
                if args.len() != 1 {
                    return Err(ConfigError::at(
                        lineno,
                        format!("window takes one size expression, got '{value}'"),
                    ));
                }
                let shape = match name.as_str() {
                    "square" => WindowShapeKind::Square,
                    "disk" => WindowShapeKind::Disk,
                    other => {
                        return Err(ConfigError::at(
                            lineno,
                            format!("window shape must be square or disk, got '{other}'"),
                        ))
                    }
                };
                set_once!(window, (shape, parse_expr(lineno, &args[0])?));
            }
            "margin" => set_once!(margin, parse_expr(lineno, value)?),
            "sweeps" => set_once!(sweeps, parse_scalar::<u64>(lineno, value, "sweep count")?),
            "burn_in" => set_once!(burn_in, parse_scalar::<u64>(lineno, value, "burn-in")?),
            "replicates" => {
                set_once!(replicates, parse_scalar::<usize>(lineno, value, "replicates")?)
            }
            "mc_points" => {
                set_once!(mc_points, parse_scalar::<usize>(lineno, value, "mc_points")?)
            }
            "mc_se_target" => {
                let v = parse_scalar::<f64>(lineno, value, "mc_se_target")?;
                set_once!(mc_se_target, if v > 0.0 { Some(v) } else { None });
            }
            "seed" => set_once!(seed, parse_scalar::<u64>(lineno, value, "seed")?),
            "functional" => {
                let choice = match value {
                    "phi" => FunctionalChoice::Phi,
                    "psi" => FunctionalChoice::Psi,
                    "both" => FunctionalChoice::Both,
                    other => {
                        return Err(ConfigError::at(
                            lineno,
                            format!("functional must be phi, psi or both, got '{other}'"),
                        ))
                    }
                };
                set_once!(functional, choice);
            }
            "ns" => {
                let mut list = Vec::new();
                for part in value.split(',') {
                    list.push(parse_scalar::<u64>(lineno, part, "sequence index")?);
                }
                if list.is_empty() || list.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(ConfigError::at(
                        lineno,
                        "ns must be a strictly increasing list of indices",
                    ));
                }
                set_once!(ns, list);
            }
            "out" => set_once!(out, PathBuf::from(value)),
            "parallelism" => {
                set_once!(parallelism, parse_scalar::<usize>(lineno, value, "parallelism")?)
            }
            "a" => set_once!(potential_bound, parse_scalar::<f64>(lineno, value, "potential bound")?),
            "sharp_b" => set_once!(sharp_b, parse_scalar::<bool>(lineno, value, "sharp_b")?),
            "gnz_mc_points" => set_once!(
                gnz_mc_points,
                parse_scalar::<usize>(lineno, value, "gnz_mc_points")?
            ),
            other => {
                return Err(ConfigError::at(lineno, format!("unknown key '{other}'")));
            }
        }
    }

    let radius = radius.ok_or_else(|| ConfigError::at(0, "missing key 'r'"))?;
    let window =
        window.ok_or_else(|| ConfigError::at(0, "missing key 'window'"))?;
    let sweeps = sweeps.unwrap_or(4000);
    let burn_in = burn_in.unwrap_or_else(|| sweeps / 2);
    if sweeps == 0 || sweeps <= burn_in {
        return Err(ConfigError::at(0, "sweeps must exceed burn_in"));
    }
    let config = ExperimentConfig {
        tau: tau.ok_or_else(|| ConfigError::at(0, "missing key 'tau'"))?,
        beta: beta.unwrap_or(Expr::Num(0.0)),
        radius,
        length_law: length_law.ok_or_else(|| ConfigError::at(0, "missing key 'length_law'"))?,
        window_shape: window.0,
        window_size: window.1,
        margin: margin.unwrap_or(Expr::Num(8.0 * radius)),
        sweeps,
        burn_in,
        replicates: replicates.unwrap_or(500),
        mc_points: mc_points.unwrap_or(100_000),
        mc_se_target: mc_se_target.unwrap_or(Some(0.005)),
        seed: seed.unwrap_or(0),
        functional: functional.unwrap_or(FunctionalChoice::Both),
        ns: ns.unwrap_or_else(|| vec![1]),
        out: out.unwrap_or_else(|| PathBuf::from("out")),
        parallelism: parallelism.unwrap_or(0),
        potential_bound: potential_bound.unwrap_or(1.0),
        sharp_b: sharp_b.unwrap_or(false),
        gnz_mc_points: gnz_mc_points.unwrap_or(2000),
        source: source.to_string(),
    };
    // fail fast on unresolvable model parameters at the first index
    config.params_at(config.ns[0]).map_err(|mut e| {
        e.message = format!("at n = {}: {}", config.ns[0], e.message);
        e
    })?;
    config.domain_at(config.ns[0])?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "\
# minimal experiment
tau = 1.0
beta = 0.5 / n
r = 0.5
length_law = fixed(1.0)
window = square(2 * sqrt(n))
margin = 4
sweeps = 100
burn_in = 50
replicates = 10
seed = 7
functional = both
ns = 1, 4, 16
out = results
";

    #[test]
    fn parses_valid_config() {
        let cfg = parse_config(GOOD).unwrap();
        assert_eq!(cfg.ns, vec![1, 4, 16]);
        assert_eq!(cfg.seed, 7);
        let p = cfg.params_at(4).unwrap();
        assert!((p.beta - 0.125).abs() < 1e-15);
        let w = cfg.window_at(4).unwrap();
        assert!((w.area() - 16.0).abs() < 1e-12);
        assert!((cfg.margin.eval(1.0) - 4.0).abs() < 1e-15);
        assert_eq!(cfg.functional, FunctionalChoice::Both);
    }

    #[test]
    fn unknown_key_reports_line() {
        let src = "tau = 1\nbogus = 3\n";
        let err = parse_config(src).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("unknown key"));
    }

    #[test]
    fn duplicate_key_rejected() {
        let src = format!("{GOOD}tau = 2\n");
        let err = parse_config(&src).unwrap_err();
        assert!(err.message.contains("duplicate"));
    }

    #[test]
    fn sweeps_must_exceed_burn_in() {
        let src = GOOD.replace("sweeps = 100", "sweeps = 50");
        let err = parse_config(&src).unwrap_err();
        assert!(err.message.contains("sweeps must exceed burn_in"));
        let src = GOOD.replace("sweeps = 100", "sweeps = 0");
        assert!(parse_config(&src).is_err());
    }

    #[test]
    fn defaults_are_applied() {
        let src = "tau = 1\nr = 0.5\nlength_law = fixed(1)\nwindow = square(10)\n";
        let cfg = parse_config(src).unwrap();
        assert_eq!(cfg.sweeps, 4000);
        assert_eq!(cfg.burn_in, 2000);
        assert!((cfg.margin.eval(1.0) - 4.0).abs() < 1e-15); // 8 R
        assert_eq!(cfg.ns, vec![1]);
        assert_eq!(cfg.mc_se_target, Some(0.005));
    }

    #[test]
    fn invalid_model_values_rejected() {
        let src = "tau = -1\nr = 0.5\nlength_law = fixed(1)\nwindow = square(10)\n";
        assert!(parse_config(src).is_err());
        let src = "tau = 1\nr = 0.5\nlength_law = fixed(2.0)\nwindow = square(10)\n";
        assert!(parse_config(src).is_err()); // length exceeds 2R
        let src = "tau = 1\nr = 0.5\nlength_law = fixed(1)\nwindow = hex(10)\n";
        assert!(parse_config(src).is_err());
        let src = "tau = 1\nr = 0.5\nlength_law = fixed(1)\nwindow = square(10)\nns = 4, 2\n";
        assert!(parse_config(src).is_err());
    }
}
