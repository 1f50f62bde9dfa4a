//! Experiment configuration read from `key = value` text files.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::material::MaterialParams;
use crate::mesh::BeamParams;
use crate::quality::QualityThresholds;
use crate::vem::{Alpha0, Lumping};

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Material overrides applied on top of the mesh material.
    pub youngs_modulus: Option<f64>,
    pub poisson_ratio: Option<f64>,
    pub density: Option<f64>,
    /// None selects 1 in 2D and h_E in 3D.
    pub alpha0: Option<Alpha0>,
    pub lumping: Lumping,
    pub thresholds: QualityThresholds,
    pub threads: Option<usize>,
    pub power_tol: f64,
    pub power_max_iter: usize,
    /// T_max in units of the transit time T = length / c_L.
    pub t_max_transits: f64,
    /// Ramp duration in units of the VEM critical step.
    pub tau_steps: f64,
    pub beam: BeamParams,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            youngs_modulus: None,
            poisson_ratio: None,
            density: None,
            alpha0: None,
            lumping: Lumping::Auto,
            thresholds: QualityThresholds::default(),
            threads: None,
            power_tol: 1e-6,
            power_max_iter: 200_000,
            t_max_transits: 3.0,
            tau_steps: 100.0,
            beam: BeamParams::default(),
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parse(format!("config key '{key}': cannot parse '{v}'")))
}

fn positive(key: &str, v: &str) -> Result<f64> {
    let x: f64 = num(key, v)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Parse(format!(
            "config key '{key}' must be positive, got '{v}'"
        )));
    }
    Ok(x)
}

impl Config {
    /// Parses `key = value` lines; `#` starts a comment. Unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Config::default();
        let mut seen = std::collections::BTreeSet::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("config line {}: expected key = value", ln + 1))
            })?;
            let (k, v) = (k.trim(), v.trim());
            if !seen.insert(k.to_string()) {
                return Err(Error::Parse(format!(
                    "config line {}: duplicate key '{k}'",
                    ln + 1
                )));
            }
            c.set(k, v)?;
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Config::parse(&text)
    }

    /// Sets one key; used for both files and command-line overrides.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "E" => self.youngs_modulus = Some(positive(key, v)?),
            "nu" => {
                let x: f64 = num(key, v)?;
                if !(-1.0 < x && x < 0.5) {
                    return Err(Error::Parse(format!(
                        "config key 'nu' must lie in (-1, 0.5), got '{v}'"
                    )));
                }
                self.poisson_ratio = Some(x);
            }
            "rho" => self.density = Some(positive(key, v)?),
            "alpha0" => self.alpha0 = Some(v.parse()?),
            "lumping" => self.lumping = v.parse()?,
            "theta_ang" => self.thresholds.theta_ang = positive(key, v)?,
            "theta_face" => self.thresholds.theta_face = positive(key, v)?,
            "theta_edge" => self.thresholds.theta_edge = positive(key, v)?,
            "theta_vol" => self.thresholds.theta_vol = positive(key, v)?,
            "threads" => {
                let n: usize = num(key, v)?;
                if n == 0 {
                    return Err(Error::Parse(
                        "config key 'threads' must be at least 1".into(),
                    ));
                }
                self.threads = Some(n);
            }
            "power_tol" => self.power_tol = positive(key, v)?,
            "power_max_iter" => self.power_max_iter = num(key, v)?,
            "t_max_transits" => self.t_max_transits = positive(key, v)?,
            "tau_steps" => self.tau_steps = positive(key, v)?,
            "beam_delta_a" => self.beam.delta_a = positive(key, v)?,
            "beam_delta_b" => self.beam.delta_b = positive(key, v)?,
            _ => return Err(Error::Parse(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Mesh material with the configured overrides applied.
    pub fn material(&self, base: &MaterialParams) -> Result<MaterialParams> {
        let m = MaterialParams {
            youngs_modulus: self.youngs_modulus.unwrap_or(base.youngs_modulus),
            poisson_ratio: self.poisson_ratio.unwrap_or(base.poisson_ratio),
            density: self.density.unwrap_or(base.density),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn alpha0_for(&self, dim: usize) -> Alpha0 {
        self.alpha0.unwrap_or_else(|| Alpha0::default_for(dim))
    }

    /// Canonical text form: set keys in fixed order, floats with 17 significant digits.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        for (k, v) in [
            ("E", self.youngs_modulus),
            ("nu", self.poisson_ratio),
            ("rho", self.density),
        ] {
            if let Some(v) = v {
                let _ = writeln!(s, "{k} = {v:.16e}");
            }
        }
        match self.alpha0 {
            None => {}
            Some(Alpha0::Unit) => s.push_str("alpha0 = unit\n"),
            Some(Alpha0::Diameter) => s.push_str("alpha0 = diameter\n"),
            Some(Alpha0::Value(v)) => {
                let _ = writeln!(s, "alpha0 = {v:.16e}");
            }
        }
        let t = &self.thresholds;
        let _ = writeln!(s, "lumping = {}", self.lumping);
        let _ = writeln!(s, "theta_ang = {:.16e}", t.theta_ang);
        let _ = writeln!(s, "theta_face = {:.16e}", t.theta_face);
        let _ = writeln!(s, "theta_edge = {:.16e}", t.theta_edge);
        let _ = writeln!(s, "theta_vol = {:.16e}", t.theta_vol);
        let _ = writeln!(s, "power_tol = {:.16e}", self.power_tol);
        let _ = writeln!(s, "power_max_iter = {}", self.power_max_iter);
        let _ = writeln!(s, "t_max_transits = {:.16e}", self.t_max_transits);
        let _ = writeln!(s, "tau_steps = {:.16e}", self.tau_steps);
        let _ = writeln!(s, "beam_delta_a = {:.16e}", self.beam.delta_a);
        let _ = writeln!(s, "beam_delta_b = {:.16e}", self.beam.delta_b);
        s
    }
}
