//! Flat `key=value` experiment configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::dynamics::Params;
use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;
use crate::problem::parse_floats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Q,
    P,
    A,
    Alpha,
}

impl SweepAxis {
    pub fn apply(self, params: &mut Params, value: f64) {
        match self {
            SweepAxis::Q => params.q = value,
            SweepAxis::P => params.p = value,
            SweepAxis::A => params.a = value,
            SweepAxis::Alpha => params.alpha = value,
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "q" => Ok(SweepAxis::Q),
            "p" => Ok(SweepAxis::P),
            "a" => Ok(SweepAxis::A),
            "alpha" => Ok(SweepAxis::Alpha),
            other => Err(Error::Config(format!(
                "sweep axis must be one of q, p, a, alpha (got `{other}`)"
            ))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::Q => "q",
            SweepAxis::P => "p",
            SweepAxis::A => "a",
            SweepAxis::Alpha => "alpha",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = Error;

    /// `name=v1,v2,...`
    fn from_str(s: &str) -> Result<Self> {
        let (name, list) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("sweep must look like name=v1,v2,... (got `{s}`)")))?;
        let axis: SweepAxis = name.parse()?;
        let values = if list.trim().is_empty() {
            Vec::new()
        } else {
            parse_floats(list).map_err(|e| Error::Config(format!("sweep values `{list}`: {e}")))?
        };
        if values.is_empty() {
            return Err(Error::Config(format!("sweep over {axis} has no values")));
        }
        Ok(Sweep { axis, values })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub svg: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Self { csv: true, svg: false }
    }
}

impl FromStr for Formats {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut f = Formats { csv: false, svg: false };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "csv" => f.csv = true,
                "svg" => f.svg = true,
                other => return Err(Error::Config(format!("unknown output format `{other}`"))),
            }
        }
        if !f.csv && !f.svg {
            return Err(Error::Config("no output format given".into()));
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: String,
    pub alpha: f64,
    pub q: f64,
    pub a: f64,
    pub p: f64,
    pub t0: f64,
    pub t_end: f64,
    /// `None` means all ones.
    pub x0: Option<Vec<f64>>,
    /// `None` means all minus ones.
    pub v0: Option<Vec<f64>>,
    pub integrator: IntegratorConfig,
    pub sweep: Option<Sweep>,
    pub out: PathBuf,
    pub formats: Formats,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: "quad:5,1".into(),
            alpha: 3.5,
            q: 0.7,
            a: 1.0,
            p: 1.2,
            t0: 1.0,
            t_end: 100.0,
            x0: None,
            v0: None,
            integrator: IntegratorConfig::default(),
            sweep: None,
            out: PathBuf::from("out"),
            formats: Formats::default(),
        }
    }
}

/// Splits config text into `(key, value)` pairs. `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got `{line}`", lineno + 1)))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("{key}: cannot parse `{value}`: {e}")))
}

fn vector(key: &str, value: &str) -> Result<Vec<f64>> {
    parse_floats(value).map_err(|e| Error::Config(format!("{key}: cannot parse `{value}`: {e}")))
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_pairs(&parse_pairs(text)?)?;
        Ok(c)
    }

    pub fn apply_pairs(&mut self, pairs: &[(String, String)]) -> Result<()> {
        for (k, v) in pairs {
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Sets one key. Dashes and underscores in keys are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "problem" => self.problem = value.to_string(),
            "alpha" => self.alpha = num(&key, value)?,
            "q" => self.q = num(&key, value)?,
            "a" => self.a = num(&key, value)?,
            "p" => self.p = num(&key, value)?,
            "t0" => self.t0 = num(&key, value)?,
            "t_end" => self.t_end = num(&key, value)?,
            "x0" => self.x0 = Some(vector(&key, value)?),
            "v0" => self.v0 = Some(vector(&key, value)?),
            "rel_tol" => self.integrator.rel_tol = num(&key, value)?,
            "abs_tol" => self.integrator.abs_tol = num(&key, value)?,
            "initial_step" => self.integrator.initial_step = Some(num(&key, value)?),
            "max_step" => self.integrator.max_step = Some(num(&key, value)?),
            "max_rhs_evals" => {
                self.integrator.max_rhs_evals = num::<f64>(&key, value).and_then(|v| {
                    if v >= 1.0 && v.fract() == 0.0 && v < u64::MAX as f64 {
                        Ok(v as u64)
                    } else {
                        Err(Error::Config(format!("max_rhs_evals must be a positive integer (got `{value}`)")))
                    }
                })?
            }
            "sample_points_per_decade" | "points_per_decade" => {
                self.integrator.sample_points_per_decade = num(&key, value)?
            }
            "sweep" => self.sweep = Some(value.parse()?),
            "out" => self.out = PathBuf::from(value),
            "format" => self.formats = value.parse()?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Flow parameters before any sweep value is applied.
    pub fn base_params(&self, dim: usize) -> Params {
        Params {
            alpha: self.alpha,
            q: self.q,
            a: self.a,
            p: self.p,
            t0: self.t0,
            u0: self.x0.clone().unwrap_or_else(|| vec![1.0; dim]),
            v0: self.v0.clone().unwrap_or_else(|| vec![-1.0; dim]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_with_comments() {
        let text = "# fig-1 style run\nproblem = quad:5,1\nq=0.3 # slow damping\n\nt-end=1e3\nx0=1,2\nsweep=p=0.5,1.0\nformat=csv,svg\nmax_rhs_evals=1e6\n";
        let c = ExperimentConfig::from_text(text).unwrap();
        assert_eq!(c.q, 0.3);
        assert_eq!(c.t_end, 1e3);
        assert_eq!(c.x0, Some(vec![1.0, 2.0]));
        assert_eq!(c.integrator.max_rhs_evals, 1_000_000);
        assert_eq!(
            c.sweep,
            Some(Sweep {
                axis: SweepAxis::P,
                values: vec![0.5, 1.0]
            })
        );
        assert!(c.formats.csv && c.formats.svg);
    }

    #[test]
    fn later_values_override() {
        let mut c = ExperimentConfig::from_text("q=0.3\nalpha=4").unwrap();
        c.apply_pairs(&[("q".into(), "0.9".into())]).unwrap();
        assert_eq!(c.q, 0.9);
        assert_eq!(c.alpha, 4.0);
    }

    #[test]
    fn errors() {
        assert!(ExperimentConfig::from_text("q").is_err());
        assert!(ExperimentConfig::from_text("colour=red").is_err());
        assert!(ExperimentConfig::from_text("q=abc").is_err());
        assert!(ExperimentConfig::from_text("sweep=q=").is_err());
        assert!(ExperimentConfig::from_text("sweep=beta=1,2").is_err());
        assert!(ExperimentConfig::from_text("format=png").is_err());
        assert!(ExperimentConfig::from_text("max_rhs_evals=2.5").is_err());
    }
}
