//! Numerical tolerances shared by every engine.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One record holding every validation tolerance and size limit.
///
/// Defaults are the values the engines are tested against; scenario files and
/// the `--tol name=value` flag may override individual fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Ket normalization.
    pub norm: f64,
    /// Largest allowed |M - M†| entry.
    pub herm: f64,
    /// |tr M - 1|.
    pub trace: f64,
    /// Smallest allowed eigenvalue is `-psd`.
    pub psd: f64,
    /// ‖U†U - I‖ entry-wise.
    pub unitary: f64,
    /// Eigenvalues at or below this contribute nothing to entropy.
    pub zero: f64,
    /// Branches lighter than this are dropped from a decomposition.
    pub branch: f64,
    /// Spectrum comparisons and degenerate-eigenvalue clustering.
    pub spec: f64,
    /// Erasure feasibility threshold on the L∞ spectral distance.
    pub erasure: f64,
    /// ESP reduced-state comparison.
    pub esp: f64,
    /// Projector identities of a macrostate partition.
    pub partition: f64,
    /// Largest total Hilbert-space dimension any state may have.
    pub max_dim: usize,
    /// Largest common denominator accepted by the general strategy.
    pub max_denominator: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            norm: 1e-12,
            herm: 1e-12,
            trace: 1e-10,
            psd: 1e-10,
            unitary: 1e-10,
            zero: 1e-14,
            branch: 1e-12,
            spec: 1e-10,
            erasure: 1e-9,
            esp: 1e-10,
            partition: 1e-10,
            max_dim: 4096,
            max_denominator: 64,
        }
    }
}

impl Tolerances {
    /// Names accepted by [`Tolerances::set`].
    pub const NAMES: [&'static str; 13] = [
        "norm",
        "herm",
        "trace",
        "psd",
        "unitary",
        "zero",
        "branch",
        "spec",
        "erasure",
        "esp",
        "partition",
        "max_dim",
        "max_denominator",
    ];

    /// Overrides one field by name.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::param(format!("tolerance `{name}` must be finite and non-negative")));
        }
        match name {
            "norm" => self.norm = value,
            "herm" => self.herm = value,
            "trace" => self.trace = value,
            "psd" => self.psd = value,
            "unitary" => self.unitary = value,
            "zero" => self.zero = value,
            "branch" => self.branch = value,
            "spec" => self.spec = value,
            "erasure" => self.erasure = value,
            "esp" => self.esp = value,
            "partition" => self.partition = value,
            "max_dim" => self.max_dim = value as usize,
            "max_denominator" => self.max_denominator = value as usize,
            _ => {
                return Err(Error::param(format!(
                    "unknown tolerance `{name}` (known: {})",
                    Self::NAMES.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parses a `name=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::param(format!("expected name=value, got `{spec}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::param(format!("bad tolerance value in `{spec}`")))?;
        self.set(name.trim(), value)
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if dim > self.max_dim {
            Err(Error::Capacity {
                requested: dim,
                limit: self.max_dim,
            })
        } else {
            Ok(())
        }
    }
}
