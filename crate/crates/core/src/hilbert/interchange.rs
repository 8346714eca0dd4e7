use serde::{Deserialize, Serialize};

use super::DensityMatrix;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Text interchange form of a square complex matrix: the dimension plus
/// row-major `[re, im]` pairs, serialized as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixDocument {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixDocument { dim, entries }
    }

    pub fn from_state(rho: &DensityMatrix) -> Self {
        Self::from_matrix(rho.matrix())
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::Parse {
                location: "entries".into(),
                message: format!(
                    "expected {} entries for dim {}, found {}",
                    self.dim * self.dim,
                    self.dim,
                    self.entries.len()
                ),
            });
        }
        Ok(CMatrix::from_fn(self.dim, self.dim, |i, j| {
            let [re, im] = self.entries[i * self.dim + j];
            linalg::c(re, im)
        }))
    }

    pub fn to_state(&self, tol: &Tolerances) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_matrix()?, tol)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }
}
