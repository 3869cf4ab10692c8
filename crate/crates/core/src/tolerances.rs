//! Float tolerances shared by the numeric paths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ENV_VAR: &str = "GAPFORGE_TOLERANCES";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// eigenvalues above `-psd` count as nonnegative
    pub psd: f64,
    pub eig: f64,
    /// relative to the largest eigenvalue
    pub rank: f64,
    pub zero: f64,
    pub angles: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            psd: 1e-9,
            eig: 1e-10,
            rank: 1e-8,
            zero: 1e-7,
            angles: 4096,
        }
    }
}

impl Tolerances {
    /// Defaults overridden by `GAPFORGE_TOLERANCES` when it is set.
    pub fn from_env() -> Result<Self> {
        let mut t = Tolerances::default();
        if let Ok(v) = std::env::var(ENV_VAR) {
            t.apply_overrides(&v)?;
        }
        Ok(t)
    }

    /// Apply a list such as `psd=1e-8,zero=1e-6,angles=1024`.
    pub fn apply_overrides(&mut self, list: &str) -> Result<()> {
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::parse(ENV_VAR, format!("expected key=value, got {item:?}")))?;
            let bad = |e: &dyn std::fmt::Display| Error::parse(ENV_VAR, format!("{k}: {e}"));
            match k.trim() {
                "psd" => self.psd = v.trim().parse().map_err(|e| bad(&e))?,
                "eig" => self.eig = v.trim().parse().map_err(|e| bad(&e))?,
                "rank" => self.rank = v.trim().parse().map_err(|e| bad(&e))?,
                "zero" => self.zero = v.trim().parse().map_err(|e| bad(&e))?,
                "angles" => self.angles = v.trim().parse().map_err(|e| bad(&e))?,
                other => return Err(Error::parse(ENV_VAR, format!("unknown key {other:?}"))),
            }
        }
        if self.angles < 8 {
            return Err(Error::InvalidArgument("angles must be at least 8".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides() {
        let mut t = Tolerances::default();
        t.apply_overrides("psd=1e-8, angles=512").unwrap();
        assert_eq!(t.psd, 1e-8);
        assert_eq!(t.angles, 512);
        assert_eq!(t.zero, 1e-7);
        assert!(t.apply_overrides("foo=1").is_err());
        assert!(t.apply_overrides("psd").is_err());
    }
}
