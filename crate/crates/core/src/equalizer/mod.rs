//! Linear equalizers for the delay-Doppler channel.
//!
//! Two families solve the same problems:
//!
//! * dense oracles work on the explicit `NM x NM` channel matrix and cost
//!   `O((NM)^3)`;
//! * the `fft2` equalizers diagonalize the doubly block circulant channel with
//!   the 2D DFT, so the whole solve is two 2D transforms plus one pass over
//!   the spectrum.
//!
//! Every call reports the number of complex multiplications it performed.

mod dense;
mod fast;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DdGrid;

pub use dense::{dense_mmse_mults, dense_zf_mults, mmse_dense, zf_dense, ZF_CONDITION_LIMIT};
pub use fast::{mmse_fft2, mmse_fft2_with_epsilon, zf_fft2, zf_fft2_with_epsilon};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    DenseZf,
    DenseMmse,
    Fft2Zf,
    Fft2Mmse,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::DenseZf,
        Method::DenseMmse,
        Method::Fft2Zf,
        Method::Fft2Mmse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::DenseZf => "dense-zf",
            Method::DenseMmse => "dense-mmse",
            Method::Fft2Zf => "fft2-zf",
            Method::Fft2Mmse => "fft2-mmse",
        }
    }

    /// Needs the materialized channel matrix.
    pub fn is_dense(self) -> bool {
        matches!(self, Method::DenseZf | Method::DenseMmse)
    }

    pub fn is_mmse(self) -> bool {
        matches!(self, Method::DenseMmse | Method::Fft2Mmse)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown equalizer method `{s}`")))
    }
}

/// Variance of the delay-Doppler noise per complex sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma2: f64,
}

impl NoiseModel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::Config(format!(
                "noise variance must be finite and non-negative, got {sigma2}"
            )));
        }
        Ok(NoiseModel { sigma2 })
    }

    pub fn noiseless() -> Self {
        NoiseModel { sigma2: 0.0 }
    }

    /// `sigma^2 = 10^(-snr/10)` for unit-energy symbols.
    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        Self::new(10f64.powf(-snr_db / 10.0))
    }

    pub fn sigma2(self) -> f64 {
        self.sigma2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualizedFrame {
    pub estimate: DdGrid,
    pub method: Method,
    /// Complex multiplications consumed, including channel diagonalization
    /// for the `fft2` methods.
    pub mults: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_roundtrip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
            assert_eq!(
                serde_json::to_string(&m).unwrap(),
                format!("\"{}\"", m.as_str())
            );
        }
        assert!("fft-zf".parse::<Method>().is_err());
    }

    #[test]
    fn noise_model_validation() {
        assert!(NoiseModel::new(-1e-3).is_err());
        assert!(NoiseModel::new(f64::NAN).is_err());
        assert_eq!(NoiseModel::from_snr_db(10.0).unwrap().sigma2(), 0.1);
        assert_eq!(NoiseModel::from_snr_db(f64::INFINITY).unwrap().sigma2(), 0.0);
    }
}
