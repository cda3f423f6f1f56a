//! JSON run configuration. Every key is optional; unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adaptation::{DEFAULT_CADENCE, DEFAULT_MAX_LEVEL, DEFAULT_MIN_LEVEL};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::solver::DEFAULT_FOURIER;
use crate::stencil::StencilConfig;
use crate::wavelet1d::WaveletSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Default: the five-lobed star.
    pub geometry: Geometry,
    /// `"N.Ntilde"`, default `"6.2"`.
    pub wavelet: WaveletSpec,
    pub stencil: StencilConfig,
    pub compress: CompressConfig,
    pub diffusion: DiffusionConfig,
    /// Prefix of every output file.
    pub out_prefix: String,
    /// Worker-thread cap; `None` uses all cores.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            geometry: Geometry::star(),
            wavelet: WaveletSpec::default(),
            stencil: StencilConfig::default(),
            compress: CompressConfig::default(),
            diffusion: DiffusionConfig::default(),
            out_prefix: "iwt".into(),
            threads: None,
        }
    }
}

/// Geometric sequence `from, ..., to` with `count` entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.from];
        }
        // Base 10 keeps decade points such as 1e-8 exact.
        let (a, b) = (self.from.log10(), self.to.log10());
        let last = self.count - 1;
        (0..self.count)
            .map(|i| match i {
                0 => self.from,
                i if i == last => self.to,
                i => 10f64.powf(a + (b - a) * i as f64 / last as f64),
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.from > 0.0 && self.to > 0.0 && self.count >= 1) {
            return Err(Error::Config(format!(
                "sweep needs positive ends and at least one value, got {self:?}"
            )));
        }
        Ok(())
    }
}

impl std::str::FromStr for Sweep {
    type Err = Error;

    /// `from:to:count`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Config(format!("sweep must look like 1e-8:1e-2:13, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let sweep = Sweep {
            from: parts[0].trim().parse().map_err(|_| bad())?,
            to: parts[1].trim().parse().map_err(|_| bad())?,
            count: parts[2].trim().parse().map_err(|_| bad())?,
        };
        sweep.validate()?;
        Ok(sweep)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompressConfig {
    /// Finest level of the sampled field. Default 10.
    pub max_level: u32,
    /// Number of forward transforms. Default 4.
    pub levels: usize,
    /// Detail threshold. Default 1e-4.
    pub eps: f64,
    pub sweep: Option<Sweep>,
}

impl Default for CompressConfig {
    fn default() -> Self {
        CompressConfig {
            max_level: 10,
            levels: 4,
            eps: 1e-4,
            sweep: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffusionConfig {
    /// Refinement threshold at the base level. Default 1e-4.
    pub eps_r: f64,
    /// `eps_r / eps_c`. Default 100.
    pub eps_ratio: f64,
    /// Threshold scaling exponent. Default 2.
    pub k: u32,
    /// Steps between adaptation events. Default 10.
    pub cadence: usize,
    /// Default 1.
    pub t_final: f64,
    /// `dt / h^2`. Default 0.2.
    pub fourier: f64,
    /// Starting and base level. Default 5.
    pub start_level: u32,
    pub min_level: u32,
    pub max_level: u32,
    /// Level of the fixed-resolution reference run, if any.
    pub ref_level: Option<u32>,
    /// Ghost-fit radius in grid spacings; default `N`.
    pub ghost_radius: Option<f64>,
    pub sweep: Option<Sweep>,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        DiffusionConfig {
            eps_r: 1e-4,
            eps_ratio: 100.0,
            k: 2,
            cadence: DEFAULT_CADENCE,
            t_final: 1.0,
            fourier: DEFAULT_FOURIER,
            start_level: DEFAULT_MIN_LEVEL,
            min_level: DEFAULT_MIN_LEVEL,
            max_level: DEFAULT_MAX_LEVEL,
            ref_level: None,
            ghost_radius: None,
            sweep: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.stencil.validate()?;
        let c = &self.compress;
        if c.levels == 0 || c.max_level > 14 || (c.levels as u32) > c.max_level {
            return Err(Error::Config(format!(
                "compress needs 1 <= levels <= max_level <= 14, got levels {} max_level {}",
                c.levels, c.max_level
            )));
        }
        if !(c.eps >= 0.0) {
            return Err(Error::Config(format!(
                "eps must be non-negative, got {}",
                c.eps
            )));
        }
        let d = &self.diffusion;
        if !(d.t_final > 0.0 && d.fourier > 0.0 && d.eps_ratio >= 1.0 && d.eps_r > 0.0) {
            return Err(Error::Config(
                "diffusion needs positive t_final, fourier, eps_r and eps_ratio >= 1".into(),
            ));
        }
        if !(d.min_level <= d.start_level && d.start_level <= d.max_level && d.max_level <= 14) {
            return Err(Error::Config(format!(
                "levels must satisfy min <= start <= max <= 14, got {} {} {}",
                d.min_level, d.start_level, d.max_level
            )));
        }
        if d.ghost_radius.is_some_and(|r| !(r > 0.0)) {
            return Err(Error::Config("ghost_radius must be positive".into()));
        }
        for s in [c.sweep, d.sweep].into_iter().flatten() {
            s.validate()?;
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_partial_files() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let cfg = RunConfig::from_json(
            r#"{"wavelet": "4.0", "geometry": {"type": "circle", "center": [0.5, 0.5], "r": 0.2},
                "diffusion": {"eps_r": 1e-3}}"#,
        )
        .unwrap();
        assert_eq!(cfg.wavelet, WaveletSpec::new(4, 0).unwrap());
        assert_eq!(cfg.diffusion.eps_r, 1e-3);
        assert_eq!(cfg.diffusion.k, 2);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_json(r#"{"wavelett": "6.2"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"diffusion": {"epsr": 1}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"wavelet": "5.2"}"#).is_err());
    }

    #[test]
    fn sweeps() {
        let s: Sweep = "1e-8:1e-2:7".parse().unwrap();
        let v = s.values();
        assert_eq!(v.len(), 7);
        assert!((v[0] - 1e-8).abs() < 1e-20 && (v[6] - 1e-2).abs() < 1e-14);
        assert_eq!((v[0], v[1], v[6]), (1e-8, 1e-7, 1e-2));
        assert!("1e-8:1e-2".parse::<Sweep>().is_err());
        assert!("0:1:3".parse::<Sweep>().is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let mut cfg = RunConfig::default();
        cfg.compress.sweep = Some(Sweep {
            from: 1e-8,
            to: 1e-2,
            count: 13,
        });
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}
