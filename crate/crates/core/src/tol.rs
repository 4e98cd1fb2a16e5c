//! Numerical tolerances shared by the geometric and numerical layers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable that overrides the relative kernel and level tolerances.
pub const DEFAULT_TOL_ENV: &str = "GML_DEFAULT_TOL";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Coordinates with `|x_i| <= supp_tol` are outside the support.
    pub supp_tol: f64,
    /// Accepted deviation of an ingested representative from unit norm after normalization.
    pub norm_tol: f64,
    /// Relative level tolerance; absolute tolerance is `level_rel * max|level|`.
    pub level_rel: f64,
    /// Relative eigenvalue tolerance for kernels; absolute is `kernel_rel * max|entry|`.
    pub kernel_rel: f64,
    /// Relative Frobenius tolerance for pairwise commutators.
    pub comm_rel: f64,
    pub hull_tol: f64,
    pub fix_tol: f64,
    pub gap_tol: f64,
    pub mono_tol: f64,
    /// Smallest admissible singular value of the subalgebra basis.
    pub rank_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            supp_tol: 1e-13,
            norm_tol: 1e-12,
            level_rel: 1e-12,
            kernel_rel: 1e-12,
            comm_rel: 1e-10,
            hull_tol: 1e-9,
            fix_tol: 1e-10,
            gap_tol: 1e-9,
            mono_tol: 1e-12,
            rank_tol: 1e-10,
        }
    }
}

impl Tolerances {
    /// Defaults, with `GML_DEFAULT_TOL` (if set) replacing `level_rel` and `kernel_rel`.
    pub fn from_env() -> Result<Self> {
        let mut tol = Self::default();
        if let Ok(raw) = std::env::var(DEFAULT_TOL_ENV) {
            let value: f64 = raw
                .trim()
                .parse()
                .map_err(|_| Error::Argument(format!("{DEFAULT_TOL_ENV}={raw} is not a number")))?;
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Argument(format!("{DEFAULT_TOL_ENV} must be positive")));
            }
            tol.level_rel = value;
            tol.kernel_rel = value;
        }
        Ok(tol)
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Argument(format!("tolerance {key} must be positive, got {value}")));
        }
        let slot = match key {
            "supp_tol" => &mut self.supp_tol,
            "norm_tol" => &mut self.norm_tol,
            "level_rel" | "level_tol" => &mut self.level_rel,
            "kernel_rel" | "kernel_tol" => &mut self.kernel_rel,
            "comm_rel" | "comm_tol" => &mut self.comm_rel,
            "hull_tol" => &mut self.hull_tol,
            "fix_tol" => &mut self.fix_tol,
            "gap_tol" => &mut self.gap_tol,
            "mono_tol" => &mut self.mono_tol,
            "rank_tol" => &mut self.rank_tol,
            _ => return Err(Error::Argument(format!("unknown tolerance '{key}'"))),
        };
        *slot = value;
        Ok(())
    }

    pub fn as_map(&self) -> BTreeMap<String, f64> {
        [
            ("comm_rel", self.comm_rel),
            ("fix_tol", self.fix_tol),
            ("gap_tol", self.gap_tol),
            ("hull_tol", self.hull_tol),
            ("kernel_rel", self.kernel_rel),
            ("level_rel", self.level_rel),
            ("mono_tol", self.mono_tol),
            ("norm_tol", self.norm_tol),
            ("rank_tol", self.rank_tol),
            ("supp_tol", self.supp_tol),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    /// Absolute level tolerance for a collection of levels.
    pub fn level_tol(&self, levels: impl IntoIterator<Item = f64>) -> f64 {
        let scale = levels.into_iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.level_rel * scale
    }
}
