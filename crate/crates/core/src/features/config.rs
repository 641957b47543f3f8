use crate::{Error, Result};

/// Scale schedule: `r_s = r0 * phi^s` for `s in 0..scales`, with grid cell
/// size `r_s / rho` at each scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleConfig {
    pub r0: f64,
    pub scales: usize,
    pub phi: f64,
    pub rho: f64,
}

impl ScaleConfig {
    /// Street-scale preset: 8 scales from 0.1 m doubling up to 12.8 m, rho 5.
    pub const OUTDOOR: ScaleConfig = ScaleConfig {
        r0: 0.1,
        scales: 8,
        phi: 2.0,
        rho: 5.0,
    };

    /// Room-scale preset: as outdoor with r0 = 0.05 m.
    pub const INDOOR: ScaleConfig = ScaleConfig {
        r0: 0.05,
        scales: 8,
        phi: 2.0,
        rho: 5.0,
    };

    pub fn new(r0: f64, scales: usize, phi: f64, rho: f64) -> Result<Self> {
        let cfg = Self { r0, scales, phi, rho };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "outdoor" => Ok(Self::OUTDOOR),
            "indoor" => Ok(Self::INDOOR),
            other => Err(Error::param(format!("unknown preset {other:?} (outdoor, indoor)"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(Error::param(format!("r0 must be > 0, got {}", self.r0)));
        }
        if self.scales == 0 {
            return Err(Error::param("scale count must be >= 1"));
        }
        if !(self.phi > 1.0 && self.phi.is_finite()) {
            return Err(Error::param(format!("phi must be > 1, got {}", self.phi)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::param(format!("rho must be > 0, got {}", self.rho)));
        }
        Ok(())
    }

    pub fn radius(&self, s: usize) -> f64 {
        self.r0 * self.phi.powi(s as i32)
    }

    pub fn cell_size(&self, s: usize) -> f64 {
        self.radius(s) / self.rho
    }

    pub fn with_rho(self, rho: f64) -> Self {
        Self { rho, ..self }
    }
}

impl Default for ScaleConfig {
    fn default() -> Self {
        Self::OUTDOOR
    }
}
