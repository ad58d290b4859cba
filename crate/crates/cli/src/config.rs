//! Problem configuration: a flat sectioned key-value file (INI-like) with
//! exact rational number parsing.
//!
//! ```text
//! [problem]
//! variant = symmetric
//!
//! [kernel]
//! builtin = lidstone
//!
//! [split]
//! f_up = 1 + x/2
//! f_down = 1/(1+x)
//!
//! [params]
//! b = 1
//! c = 1/4
//! ```
//!
//! Numbers are decimals or rationals `p/q`; rationals are preserved
//! exactly wherever thresholds admit closed forms. Kernel branches are
//! term lists `t_pow tau_pow coeff` separated by `;`.

use hamkit_core::cone::ConeVariant;
use hamkit_core::kernel::{BivariatePoly, Interval, Kernel, KernelError};
use hamkit_core::solver::{InitialGuess, SolverConfig};
use hamkit_core::split::{MonotoneSplit, SplitError};
use hamkit_core::quadrature::{QuadratureConfig, QuadratureError};
use hamkit_core::Rational;
use num::{BigInt, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("unknown key '{key}' in section [{section}]")]
    UnknownKey { section: String, key: String },
    #[error("duplicate key '{key}' in section [{section}]")]
    DuplicateKey { section: String, key: String },
    #[error("missing required {0}")]
    Missing(&'static str),
    #[error("invalid value for '{key}': {message}")]
    InvalidValue { key: String, message: String },
    #[error("kernel block must set either 'builtin' or explicit branches, not both")]
    AmbiguousKernel,
    #[error("unknown builtin kernel '{0}' (available: lidstone)")]
    UnknownBuiltin(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Parses `p/q` or a decimal with optional exponent into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty number".to_string());
    }
    if let Some((num, den)) = s.split_once('/') {
        let p = BigInt::from_str(num.trim()).map_err(|e| format!("bad numerator: {e}"))?;
        let q = BigInt::from_str(den.trim()).map_err(|e| format!("bad denominator: {e}"))?;
        if q.is_zero() {
            return Err("zero denominator".to_string());
        }
        return Ok(Rational::new(p, q));
    }
    // Decimal: [sign] digits [. digits] [e[sign]digits]
    let (mantissa, exp10) = match s.to_ascii_lowercase().split_once('e') {
        Some((m, e)) => (
            m.to_string(),
            i64::from_str(e).map_err(|err| format!("bad exponent: {err}"))?,
        ),
        None => (s.to_string(), 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i.to_string(), f.to_string()),
        None => (mantissa, String::new()),
    };
    let digits = format!(
        "{}{}",
        if int_part.is_empty() || int_part == "-" || int_part == "+" {
            format!("{int_part}0")
        } else {
            int_part
        },
        frac_part
    );
    let value = BigInt::from_str(&digits).map_err(|e| format!("bad number: {e}"))?;
    let shift = exp10 - frac_part_len(s);
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(value);
    if shift >= 0 {
        r *= Rational::from_integer(num::pow::pow(ten, shift as usize));
    } else {
        r /= Rational::from_integer(num::pow::pow(ten, (-shift) as usize));
    }
    Ok(r)
}

fn frac_part_len(s: &str) -> i64 {
    let mantissa = match s.to_ascii_lowercase().split_once('e') {
        Some((m, _)) => m.to_string(),
        None => s.to_string(),
    };
    match mantissa.split_once('.') {
        Some((_, f)) => f.len() as i64,
        None => 0,
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum KernelConfig {
    Builtin(String),
    Explicit {
        name: String,
        #[serde(skip)]
        domain: (Rational, Rational),
        k: f64,
        #[serde(skip)]
        lower: Vec<(usize, usize, Rational)>,
        #[serde(skip)]
        upper: Vec<(usize, usize, Rational)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitConfig {
    pub f_up: String,
    pub f_down: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamsConfig {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverSettings {
    pub grid_points: usize,
    pub max_iterations: usize,
    pub residual_tol: f64,
    pub damping: f64,
    pub divergence_factor: f64,
    pub initial: InitialGuess,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let base = SolverConfig::default();
        Self {
            grid_points: base.grid_points,
            max_iterations: base.max_iterations,
            residual_tol: base.residual_tol,
            damping: base.damping,
            divergence_factor: base.divergence_factor,
            initial: InitialGuess::Zero,
        }
    }
}

impl SolverSettings {
    pub fn to_config(self) -> SolverConfig {
        SolverConfig {
            grid_points: self.grid_points,
            max_iterations: self.max_iterations,
            residual_tol: self.residual_tol,
            damping: self.damping,
            divergence_factor: self.divergence_factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadSettings {
    pub nodes_per_panel: usize,
    pub panels: usize,
    pub crease_split: bool,
}

impl Default for QuadSettings {
    fn default() -> Self {
        let base = QuadratureConfig::default();
        Self {
            nodes_per_panel: base.nodes_per_panel(),
            panels: base.panels(),
            crease_split: base.crease_split(),
        }
    }
}

impl QuadSettings {
    pub fn to_config(self) -> Result<QuadratureConfig, ConfigError> {
        Ok(QuadratureConfig::new(
            self.nodes_per_panel,
            self.panels,
            self.crease_split,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemConfig {
    pub variant: ConeVariant,
    pub kernel: KernelConfig,
    pub split: SplitConfig,
    pub params: Option<ParamsConfig>,
    pub solver: SolverSettings,
    pub quadrature: QuadSettings,
}

impl ProblemConfig {
    pub fn build_kernel(&self) -> Result<Kernel, ConfigError> {
        match &self.kernel {
            KernelConfig::Builtin(name) => match name.as_str() {
                "lidstone" => Ok(hamkit_core::kernel::lidstone_kernel()),
                other => Err(ConfigError::UnknownBuiltin(other.to_string())),
            },
            KernelConfig::Explicit {
                name,
                domain,
                k,
                lower,
                upper,
            } => {
                let interval =
                    Interval::new(rational_to_f64(&domain.0), rational_to_f64(&domain.1))?;
                let lower = BivariatePoly::from_terms(lower);
                let upper = BivariatePoly::from_terms(upper);
                Ok(Kernel::new(name.clone(), interval, *k, lower, upper)?)
            }
        }
    }

    pub fn build_split(&self) -> Result<MonotoneSplit, ConfigError> {
        Ok(MonotoneSplit::from_expressions(
            &self.split.f_up,
            &self.split.f_down,
        )?)
    }

    pub fn require_params(&self) -> Result<ParamsConfig, ConfigError> {
        self.params.ok_or(ConfigError::Missing(
            "[params] section (b and c at minimum)",
        ))
    }
}

struct Sections {
    map: BTreeMap<String, BTreeMap<String, String>>,
}

impl Sections {
    fn take(&mut self, section: &str) -> BTreeMap<String, String> {
        self.map.remove(section).unwrap_or_default()
    }
}

fn split_sections(text: &str) -> Result<Sections, ConfigError> {
    const KNOWN: &[&str] = &[
        "problem",
        "kernel",
        "split",
        "params",
        "solver",
        "quadrature",
    ];
    let mut map: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or(ConfigError::Malformed {
                line: lineno,
                message: "unterminated section header".to_string(),
            })?;
            let name = name.trim().to_ascii_lowercase();
            if !KNOWN.contains(&name.as_str()) {
                return Err(ConfigError::UnknownSection(name));
            }
            map.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigError::Malformed {
            line: lineno,
            message: "expected 'key = value'".to_string(),
        })?;
        let section = current.clone().ok_or(ConfigError::Malformed {
            line: lineno,
            message: "key outside any [section]".to_string(),
        })?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        let entry = map.entry(section.clone()).or_default();
        if entry.contains_key(&key) {
            return Err(ConfigError::DuplicateKey { section, key });
        }
        entry.insert(key, value);
    }
    Ok(Sections { map })
}

fn reject_unknown(
    section: &str,
    entries: &BTreeMap<String, String>,
    allowed: &[&str],
) -> Result<(), ConfigError> {
    for key in entries.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey {
                section: section.to_string(),
                key: key.clone(),
            });
        }
    }
    Ok(())
}

fn value_rational(entries: &BTreeMap<String, String>, key: &str) -> Result<Option<Rational>, ConfigError> {
    entries
        .get(key)
        .map(|v| {
            parse_rational(v).map_err(|message| ConfigError::InvalidValue {
                key: key.to_string(),
                message,
            })
        })
        .transpose()
}

fn value_f64(entries: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>, ConfigError> {
    Ok(value_rational(entries, key)?.as_ref().map(rational_to_f64))
}

fn value_usize(entries: &BTreeMap<String, String>, key: &str) -> Result<Option<usize>, ConfigError> {
    entries
        .get(key)
        .map(|v| {
            v.trim().parse::<usize>().map_err(|e| ConfigError::InvalidValue {
                key: key.to_string(),
                message: e.to_string(),
            })
        })
        .transpose()
}

fn value_bool(entries: &BTreeMap<String, String>, key: &str) -> Result<Option<bool>, ConfigError> {
    entries
        .get(key)
        .map(|v| match v.trim().to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(ConfigError::InvalidValue {
                key: key.to_string(),
                message: format!("expected true/false, got '{other}'"),
            }),
        })
        .transpose()
}

fn parse_terms(key: &str, text: &str) -> Result<Vec<(usize, usize, Rational)>, ConfigError> {
    let bad = |message: String| ConfigError::InvalidValue {
        key: key.to_string(),
        message,
    };
    let mut terms = Vec::new();
    for piece in text.split(';') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        let mut fields = piece.split_whitespace();
        let ti = fields
            .next()
            .ok_or_else(|| bad("missing t power".to_string()))?
            .parse::<usize>()
            .map_err(|e| bad(format!("bad t power: {e}")))?;
        let tj = fields
            .next()
            .ok_or_else(|| bad("missing tau power".to_string()))?
            .parse::<usize>()
            .map_err(|e| bad(format!("bad tau power: {e}")))?;
        let coeff = fields
            .next()
            .ok_or_else(|| bad("missing coefficient".to_string()))?;
        let coeff = parse_rational(coeff).map_err(|e| bad(format!("bad coefficient: {e}")))?;
        if fields.next().is_some() {
            return Err(bad(format!(
                "term '{piece}' has extra fields (expected 't_pow tau_pow coeff')"
            )));
        }
        terms.push((ti, tj, coeff));
    }
    if terms.is_empty() {
        return Err(bad("no terms given".to_string()));
    }
    Ok(terms)
}

pub fn parse_config(text: &str) -> Result<ProblemConfig, ConfigError> {
    let mut sections = split_sections(text)?;

    let problem = sections.take("problem");
    reject_unknown("problem", &problem, &["variant"])?;
    let variant = match problem.get("variant").map(|s| s.to_ascii_lowercase()) {
        Some(v) if v == "general" => ConeVariant::General,
        Some(v) if v == "symmetric" => ConeVariant::Symmetric,
        Some(other) => {
            return Err(ConfigError::InvalidValue {
                key: "variant".to_string(),
                message: format!("expected 'general' or 'symmetric', got '{other}'"),
            })
        }
        None => return Err(ConfigError::Missing("[problem] variant")),
    };

    let kernel_entries = sections.take("kernel");
    reject_unknown(
        "kernel",
        &kernel_entries,
        &["builtin", "name", "domain", "k", "lower", "upper"],
    )?;
    let kernel = match kernel_entries.get("builtin") {
        Some(name) => {
            if kernel_entries.len() > 1 {
                return Err(ConfigError::AmbiguousKernel);
            }
            KernelConfig::Builtin(name.trim().to_ascii_lowercase())
        }
        None => {
            let domain_text = kernel_entries
                .get("domain")
                .ok_or(ConfigError::Missing("[kernel] domain"))?;
            let mut ends = domain_text.split_whitespace();
            let lo = ends
                .next()
                .map(parse_rational)
                .transpose()
                .map_err(|message| ConfigError::InvalidValue {
                    key: "domain".to_string(),
                    message,
                })?
                .ok_or(ConfigError::Missing("[kernel] domain left endpoint"))?;
            let hi = ends
                .next()
                .map(parse_rational)
                .transpose()
                .map_err(|message| ConfigError::InvalidValue {
                    key: "domain".to_string(),
                    message,
                })?
                .ok_or(ConfigError::Missing("[kernel] domain right endpoint"))?;
            let k = value_f64(&kernel_entries, "k")?
                .ok_or(ConfigError::Missing("[kernel] k"))?;
            let lower = parse_terms(
                "lower",
                kernel_entries
                    .get("lower")
                    .ok_or(ConfigError::Missing("[kernel] lower"))?,
            )?;
            let upper = parse_terms(
                "upper",
                kernel_entries
                    .get("upper")
                    .ok_or(ConfigError::Missing("[kernel] upper"))?,
            )?;
            KernelConfig::Explicit {
                name: kernel_entries
                    .get("name")
                    .cloned()
                    .unwrap_or_else(|| "custom".to_string()),
                domain: (lo, hi),
                k,
                lower,
                upper,
            }
        }
    };

    let split_entries = sections.take("split");
    reject_unknown("split", &split_entries, &["f_up", "f_down"])?;
    let split = SplitConfig {
        f_up: split_entries
            .get("f_up")
            .ok_or(ConfigError::Missing("[split] f_up"))?
            .clone(),
        f_down: split_entries
            .get("f_down")
            .ok_or(ConfigError::Missing("[split] f_down"))?
            .clone(),
    };

    let params_entries = sections.take("params");
    reject_unknown("params", &params_entries, &["a", "b", "c", "d"])?;
    let params = if params_entries.is_empty() {
        None
    } else {
        let b = value_f64(&params_entries, "b")?.ok_or(ConfigError::Missing("[params] b"))?;
        let c = value_f64(&params_entries, "c")?.ok_or(ConfigError::Missing("[params] c"))?;
        Some(ParamsConfig {
            a: value_f64(&params_entries, "a")?.unwrap_or(0.0),
            b,
            c,
            d: value_f64(&params_entries, "d")?.unwrap_or(0.0),
        })
    };

    let solver_entries = sections.take("solver");
    reject_unknown(
        "solver",
        &solver_entries,
        &[
            "grid_points",
            "max_iterations",
            "residual_tol",
            "damping",
            "divergence_factor",
            "initial",
            "initial_scale",
        ],
    )?;
    let defaults = SolverSettings::default();
    let initial = match solver_entries.get("initial").map(|s| s.to_ascii_lowercase()) {
        None => defaults.initial,
        Some(v) if v == "zero" => InitialGuess::Zero,
        Some(v) if v == "linear" => InitialGuess::Linear {
            scale: value_f64(&solver_entries, "initial_scale")?.unwrap_or(1.0),
        },
        Some(other) => {
            return Err(ConfigError::InvalidValue {
                key: "initial".to_string(),
                message: format!("expected 'zero' or 'linear', got '{other}'"),
            })
        }
    };
    let solver = SolverSettings {
        grid_points: value_usize(&solver_entries, "grid_points")?.unwrap_or(defaults.grid_points),
        max_iterations: value_usize(&solver_entries, "max_iterations")?
            .unwrap_or(defaults.max_iterations),
        residual_tol: value_f64(&solver_entries, "residual_tol")?.unwrap_or(defaults.residual_tol),
        damping: value_f64(&solver_entries, "damping")?.unwrap_or(defaults.damping),
        divergence_factor: value_f64(&solver_entries, "divergence_factor")?
            .unwrap_or(defaults.divergence_factor),
        initial,
    };

    let quad_entries = sections.take("quadrature");
    reject_unknown(
        "quadrature",
        &quad_entries,
        &["nodes_per_panel", "panels", "crease_split"],
    )?;
    let qdefaults = QuadSettings::default();
    let quadrature = QuadSettings {
        nodes_per_panel: value_usize(&quad_entries, "nodes_per_panel")?
            .unwrap_or(qdefaults.nodes_per_panel),
        panels: value_usize(&quad_entries, "panels")?.unwrap_or(qdefaults.panels),
        crease_split: value_bool(&quad_entries, "crease_split")?.unwrap_or(qdefaults.crease_split),
    };

    // Anything left over is a section we know but failed to consume; the
    // known-section check already rejected truly unknown ones.
    debug_assert!(sections.map.is_empty());

    Ok(ProblemConfig {
        variant,
        kernel,
        split,
        params,
        solver,
        quadrature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "\
[problem]
variant = symmetric

[kernel]
builtin = lidstone

[split]
f_up = 1 + x/2
f_down = 1/(1+x)

[params]
b = 1
c = 1/4
";

    #[test]
    fn parses_the_example_config() {
        let cfg = parse_config(EXAMPLE).unwrap();
        assert_eq!(cfg.variant, ConeVariant::Symmetric);
        assert_eq!(cfg.kernel, KernelConfig::Builtin("lidstone".to_string()));
        let params = cfg.params.unwrap();
        assert_eq!((params.a, params.b, params.c, params.d), (0.0, 1.0, 0.25, 0.0));
        assert_eq!(cfg.solver.grid_points, 129);
        assert_eq!(cfg.quadrature.nodes_per_panel, 16);
        cfg.build_kernel().unwrap();
        cfg.build_split().unwrap();
    }

    #[test]
    fn parses_rationals_and_decimals_exactly() {
        assert_eq!(parse_rational("1/4").unwrap(), Rational::new(1.into(), 4.into()));
        assert_eq!(parse_rational("-7/48").unwrap(), Rational::new((-7).into(), 48.into()));
        assert_eq!(parse_rational("0.25").unwrap(), Rational::new(1.into(), 4.into()));
        assert_eq!(parse_rational("2.5e-1").unwrap(), Rational::new(1.into(), 4.into()));
        assert_eq!(parse_rational("3").unwrap(), Rational::from_integer(3.into()));
        assert_eq!(parse_rational("1e3").unwrap(), Rational::from_integer(1000.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn explicit_kernel_round_trips_through_builder() {
        let text = "\
[problem]
variant = symmetric

[kernel]
name = beam
domain = 0 1
k = 1
lower = 1 3 1/6; 0 3 -1/6; 3 1 1/6; 2 1 -1/2; 1 1 1/3
upper = 1 3 1/6; 1 2 -1/2; 3 1 1/6; 1 1 1/3; 3 0 -1/6

[split]
f_up = 1
f_down = 0
";
        let cfg = parse_config(text).unwrap();
        let kernel = cfg.build_kernel().unwrap();
        assert_eq!(kernel.name(), "beam");
        // Same polynomial as the builtin.
        let builtin = hamkit_core::kernel::lidstone_kernel();
        for (t, tau) in [(0.3, 0.7), (0.8, 0.2), (0.5, 0.5)] {
            assert_eq!(
                kernel.eval(t, tau).unwrap(),
                builtin.eval(t, tau).unwrap()
            );
        }
    }

    #[test]
    fn rejects_unknown_sections_keys_and_duplicates() {
        assert!(matches!(
            parse_config("[bogus]\nx = 1\n"),
            Err(ConfigError::UnknownSection(_))
        ));
        let text = format!("{EXAMPLE}\n[solver]\nwarp = 9\n");
        assert!(matches!(
            parse_config(&text),
            Err(ConfigError::UnknownKey { .. })
        ));
        let text = "[problem]\nvariant = symmetric\nvariant = general\n";
        assert!(matches!(
            parse_config(text),
            Err(ConfigError::DuplicateKey { .. })
        ));
    }

    #[test]
    fn missing_required_fields_are_reported() {
        assert!(matches!(
            parse_config("[problem]\nvariant = symmetric\n"),
            Err(ConfigError::Missing(_))
        ));
        let text = "[problem]\nvariant = symmetric\n[kernel]\nbuiltin = lidstone\n[split]\nf_up = 1\n";
        assert!(matches!(
            parse_config(text),
            Err(ConfigError::Missing(_))
        ));
    }

    #[test]
    fn builtin_and_explicit_kernel_are_mutually_exclusive() {
        let text = "\
[problem]
variant = symmetric
[kernel]
builtin = lidstone
k = 1
[split]
f_up = 1
f_down = 0
";
        assert!(matches!(
            parse_config(text),
            Err(ConfigError::AmbiguousKernel)
        ));
    }

    #[test]
    fn solver_and_quadrature_overrides_apply() {
        let text = "\
[problem]
variant = symmetric
[kernel]
builtin = lidstone
[split]
f_up = 1
f_down = 0
[solver]
grid_points = 65
damping = 0.5
initial = linear
initial_scale = 2
[quadrature]
nodes_per_panel = 8
panels = 4
crease_split = false
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.solver.grid_points, 65);
        assert_eq!(cfg.solver.damping, 0.5);
        assert_eq!(cfg.solver.initial, InitialGuess::Linear { scale: 2.0 });
        assert_eq!(cfg.quadrature.nodes_per_panel, 8);
        assert_eq!(cfg.quadrature.panels, 4);
        assert!(!cfg.quadrature.crease_split);
    }

    #[test]
    fn unknown_builtin_is_rejected_at_build() {
        let text = "\
[problem]
variant = symmetric
[kernel]
builtin = mystery
[split]
f_up = 1
f_down = 0
";
        let cfg = parse_config(text).unwrap();
        assert!(matches!(
            cfg.build_kernel(),
            Err(ConfigError::UnknownBuiltin(_))
        ));
    }
}
