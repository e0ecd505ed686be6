//! Run configuration: JSON file, flag overrides, exact angle literals.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use handq_core::error::{Error, Result};
use handq_core::qubo::PenaltyConfig;
use handq_core::solver::SaParams;

/// Env var holding the default output directory.
pub const OUT_DIR_ENV: &str = "HANDQ_OUT_DIR";

/// Parses an angle in radians from a decimal literal or a `pi` expression
/// (`pi`, `2pi`, `pi/36`, `2*pi/3`, `-pi/2`), evaluated exactly from the f64
/// `PI` constant so e.g. "pi/36" never drifts through a decimal printout.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s = text.trim().to_ascii_lowercase().replace(' ', "");
    let bad = || Error::Parse(format!("invalid angle literal {text:?}"));
    if let Some(pos) = s.find("pi") {
        let (left, right) = (&s[..pos], &s[pos + 2..]);
        let coeff = match left.trim_end_matches('*') {
            "" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        let divisor = match right {
            "" => 1.0,
            d => {
                let d = d.strip_prefix('/').ok_or_else(bad)?;
                let d: f64 = d.parse().map_err(|_| bad())?;
                if d == 0.0 {
                    return Err(bad());
                }
                d
            }
        };
        Ok(coeff * std::f64::consts::PI / divisor)
    } else {
        s.parse::<f64>().map_err(|_| bad())
    }
}

/// Angle field that may be a JSON number or a "pi/36"-style string.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Literal(String),
    Radians(f64),
}

impl Angle {
    pub fn radians(&self) -> Result<f64> {
        match self {
            Angle::Literal(s) => parse_angle(s),
            Angle::Radians(v) => Ok(*v),
        }
    }
}

/// On-disk config document; every field optional, defaults applied on load.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub resolution: Option<Angle>,
    pub voxel_size: Option<f64>,
    pub penalties: Option<PenaltyConfig>,
    pub sa: Option<SaParams>,
    pub output_dir: Option<PathBuf>,
    pub d_h_override: Option<u32>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub resolution: f64,
    pub voxel_size: f64,
    pub penalties: PenaltyConfig,
    pub sa: SaParams,
    pub output_dir: PathBuf,
    pub d_h_override: Option<u32>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            resolution: std::f64::consts::PI / 36.0,
            voxel_size: 0.05,
            penalties: PenaltyConfig::default(),
            sa: SaParams::default(),
            output_dir: default_output_dir(),
            d_h_override: None,
        }
    }
}

fn default_output_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

impl RunConfig {
    /// Loads a config file (if given) over the defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)?;
            let file: ConfigFile = serde_json::from_str(&text)?;
            if let Some(a) = file.resolution {
                cfg.resolution = a.radians()?;
            }
            if let Some(v) = file.voxel_size {
                cfg.voxel_size = v;
            }
            if let Some(p) = file.penalties {
                cfg.penalties = p;
            }
            if let Some(sa) = file.sa {
                cfg.sa = sa;
            }
            if let Some(dir) = file.output_dir {
                cfg.output_dir = dir;
            }
            if file.d_h_override.is_some() {
                cfg.d_h_override = file.d_h_override;
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "resolution must be positive, got {}",
                self.resolution
            )));
        }
        if !(self.voxel_size > 0.0 && self.voxel_size.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "voxel_size must be positive, got {}",
                self.voxel_size
            )));
        }
        self.penalties.validate()?;
        self.sa.validate()?;
        Ok(())
    }

    /// SHA-256 of the canonical serialized config, for report provenance.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canon.as_bytes());
        let mut out = String::with_capacity(64);
        for b in digest {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}

/// Provenance block embedded in every report file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportProvenance {
    pub tool_version: String,
    pub config_hash: String,
}

impl ReportProvenance {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config.hash(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angle_literals_are_exact() {
        assert_eq!(parse_angle("pi/36").unwrap(), PI / 36.0);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_angle("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
    }

    #[test]
    fn bad_angles_are_parse_errors() {
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("pi*2").is_err());
        assert!(parse_angle("").is_err());
    }

    #[test]
    fn default_resolution_is_five_degrees() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.resolution, PI / 36.0);
        assert_eq!(cfg.voxel_size, 0.05);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.hash(), b.hash());
        b.voxel_size = 0.1;
        assert_ne!(a.hash(), b.hash());
    }
}
