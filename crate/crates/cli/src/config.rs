//! `key = value` run configuration and the unit conversion it implies.

use std::fmt;
use std::path::Path;

use fedosov_core::charts::PhysParams;
use fedosov_core::numerics::QuadratureConfig;
use fedosov_core::verification::DEFAULT_SEED;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Natural,
    /// Inputs in SI; converted with the mass, ħ and length scale below.
    SiRescaled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub units: Units,
    /// Particle mass (kg in SI mode).
    pub mass: f64,
    /// Reduced Planck constant (J s in SI mode).
    pub hbar: f64,
    /// Length unit in metres; only read in SI mode.
    pub length: f64,
    pub seed: u64,
    pub quad_abs_tol: f64,
    pub quad_rel_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            units: Units::Natural,
            mass: 1.0,
            hbar: 1.0,
            length: 1.0,
            seed: DEFAULT_SEED,
            quad_abs_tol: 1e-12,
            quad_rel_tol: 1e-12,
        }
    }
}

/// SI value of one natural unit of each quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    pub energy: f64,
    pub action: f64,
    pub length: f64,
    pub time: f64,
    pub momentum: f64,
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("config `{key}` must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let num = || -> Result<f64, CliError> {
                value.parse::<f64>().map_err(|_| CliError::Usage(format!("config `{key}`: `{value}` is not a number")))
            };
            match key {
                "units" => {
                    cfg.units = match value {
                        "natural" => Units::Natural,
                        "si" | "SI" | "si-rescaled" => Units::SiRescaled,
                        other => return Err(CliError::Usage(format!("config `units`: unknown mode `{other}`"))),
                    }
                }
                "mass" => cfg.mass = positive(key, num()?)?,
                "hbar" => cfg.hbar = positive(key, num()?)?,
                "length" => cfg.length = positive(key, num()?)?,
                "quad_abs_tol" => cfg.quad_abs_tol = positive(key, num()?)?,
                "quad_rel_tol" => cfg.quad_rel_tol = positive(key, num()?)?,
                "seed" => {
                    cfg.seed = value.parse().map_err(|_| CliError::Usage(format!("config `seed`: `{value}` is not an integer")))?
                }
                other => return Err(CliError::Usage(format!("config line {}: unknown key `{other}`", n + 1))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("reading {}: {e}", p.display())))?;
                RunConfig::parse(&text)
            }
        }
    }

    /// Parameters the core sees. In SI mode everything is measured in the
    /// natural units fixed by the mass, ħ and length, so both are one.
    pub fn params(&self) -> PhysParams {
        match self.units {
            Units::Natural => PhysParams { m: self.mass, hbar: self.hbar },
            Units::SiRescaled => PhysParams::natural(),
        }
    }

    pub fn scales(&self) -> Option<Scales> {
        match self.units {
            Units::Natural => None,
            Units::SiRescaled => {
                let time = self.mass * self.length * self.length / self.hbar;
                Some(Scales {
                    energy: self.hbar / time,
                    action: self.hbar,
                    length: self.length,
                    time,
                    momentum: self.hbar / self.length,
                })
            }
        }
    }

    pub fn energy(&self, v: f64) -> f64 {
        self.scales().map_or(v, |s| v / s.energy)
    }

    pub fn action(&self, v: f64) -> f64 {
        self.scales().map_or(v, |s| v / s.action)
    }

    pub fn length(&self, v: f64) -> f64 {
        self.scales().map_or(v, |s| v / s.length)
    }

    pub fn momentum(&self, v: f64) -> f64 {
        self.scales().map_or(v, |s| v / s.momentum)
    }

    pub fn time(&self, v: f64) -> f64 {
        self.scales().map_or(v, |s| v / s.time)
    }

    pub fn quadrature(&self) -> Result<QuadratureConfig, CliError> {
        QuadratureConfig::new(self.quad_abs_tol, self.quad_rel_tol).map_err(|e| CliError::Usage(e.to_string()))
    }
}

impl fmt::Display for RunConfig {
    /// Canonical form; parsing it gives back an equal config because
    /// floats print in their shortest round-trip form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let units = match self.units {
            Units::Natural => "natural",
            Units::SiRescaled => "si",
        };
        write!(
            f,
            "units = {units}; mass = {:?}; hbar = {:?}; length = {:?}; seed = {}; quad_abs_tol = {:?}; quad_rel_tol = {:?}",
            self.mass, self.hbar, self.length, self.seed, self.quad_abs_tol, self.quad_rel_tol
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_parses_back_to_the_same_config() {
        let cfg = RunConfig::parse("units = si\nmass = 9.1093837015e-31 # electron\nhbar=1.054571817e-34\nlength = 1e-9\nseed = 7\n").unwrap();
        let echoed = cfg.to_string().replace("; ", "\n");
        assert_eq!(RunConfig::parse(&echoed).unwrap(), cfg);
        assert_eq!(cfg.to_string(), RunConfig::parse(&echoed).unwrap().to_string());
    }

    #[test]
    fn bad_lines_are_usage_errors() {
        for text in ["mass 2", "mass = -1", "colour = red", "units = imperial", "seed = 1.5"] {
            assert!(matches!(RunConfig::parse(text), Err(CliError::Usage(_))), "{text}");
        }
    }

    #[test]
    fn si_scales_are_consistent() {
        let cfg = RunConfig::parse("units = si\nmass = 2\nhbar = 3\nlength = 5").unwrap();
        let s = cfg.scales().unwrap();
        assert!((s.time - 2.0 * 25.0 / 3.0).abs() < 1e-15);
        assert!((s.energy * s.time - 3.0).abs() < 1e-15);
        assert!((s.momentum * s.length - 3.0).abs() < 1e-15);
        // p²/2M in SI over the energy unit equals p²/2 in natural units.
        let p_si = 4.0 * s.momentum;
        assert!((cfg.energy(p_si * p_si / (2.0 * 2.0)) - 8.0).abs() < 1e-12);
        assert_eq!(cfg.params(), PhysParams::natural());
        assert!(RunConfig::default().scales().is_none());
    }
}
