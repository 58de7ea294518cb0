//! The shared JSON wire format for matrices and the file schemas built on it.
//!
//! A matrix is `{"rows": r, "cols": c, "re": [[..]], "im": [[..]]}`; `"im"`
//! may be omitted for real matrices, and a `"dims": [d1, d2]` annotation
//! marks a bipartite tensor factorization. Block symbols are
//! `{"a": m, "b": m, "c": m}`, conditioners `{"l": m}`, and free CP maps
//! `{"r": m, "s": m}`.

use serde::{Deserialize, Serialize};

use crate::mat::{CMat, CVec, C64};
use crate::{Error, Result};

/// Wire form of a complex matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
    /// Bipartite factorization annotation, used by density-matrix files.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> MatrixJson {
        let (rows, cols) = m.dim();
        let re = (0..rows).map(|i| (0..cols).map(|j| m[(i, j)].re).collect()).collect();
        let any_im = m.iter().any(|z| z.im != 0.0);
        let im = any_im
            .then(|| (0..rows).map(|i| (0..cols).map(|j| m[(i, j)].im).collect()).collect());
        MatrixJson { rows, cols, re, im, dims: None }
    }

    pub fn with_dims(mut self, dims: (usize, usize)) -> MatrixJson {
        self.dims = Some([dims.0, dims.1]);
        self
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let (rows, cols) = (self.rows, self.cols);
        let check = |data: &Vec<Vec<f64>>| -> Result<()> {
            if data.len() != rows || data.iter().any(|r| r.len() != cols) {
                return Err(Error::DimensionMismatch {
                    expected: rows * cols,
                    got: data.iter().map(|r| r.len()).sum(),
                });
            }
            Ok(())
        };
        check(&self.re)?;
        if let Some(im) = &self.im {
            check(im)?;
        }
        let mut m = CMat::zeros((rows, cols));
        for i in 0..rows {
            for j in 0..cols {
                let im = self.im.as_ref().map(|v| v[i][j]).unwrap_or(0.0);
                m[(i, j)] = C64::new(self.re[i][j], im);
            }
        }
        if !crate::mat::is_finite(&m) {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    /// Interpret a `rows × 1` matrix as a vector.
    pub fn to_vector(&self) -> Result<CVec> {
        if self.cols != 1 {
            return Err(Error::DimensionMismatch { expected: self.rows, got: self.rows * self.cols });
        }
        let m = self.to_matrix()?;
        Ok(m.column(0).to_owned())
    }
}

/// Wire form of a block symbol.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockSymbolJson {
    pub a: MatrixJson,
    pub b: MatrixJson,
    pub c: MatrixJson,
}

impl BlockSymbolJson {
    pub fn from_block(block: &crate::symbols::BlockSymbol) -> BlockSymbolJson {
        BlockSymbolJson {
            a: MatrixJson::from_matrix(block.a().matrix()),
            b: MatrixJson::from_matrix(block.b()),
            c: MatrixJson::from_matrix(block.c().matrix()),
        }
    }

    pub fn to_block(&self, tol: &crate::Tolerances) -> Result<crate::symbols::BlockSymbol> {
        crate::symbols::BlockSymbol::new(
            &self.a.to_matrix()?,
            &self.b.to_matrix()?,
            &self.c.to_matrix()?,
            tol,
        )
    }
}

/// Wire form of an exponential conditioner: just `L`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionerJson {
    pub l: MatrixJson,
}

/// Wire form of a free CP map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CpMapJson {
    pub r: MatrixJson,
    pub s: MatrixJson,
}

impl CpMapJson {
    pub fn from_map(map: &crate::cp_maps::FreeCPMap) -> CpMapJson {
        CpMapJson {
            r: MatrixJson::from_matrix(map.r()),
            s: MatrixJson::from_matrix(map.s()),
        }
    }
}
