use serde::Deserialize;

use crate::error::{CliError, Result};

const DEFAULT: &str = include_str!("../grids/verify.toml");

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyGrid {
    pub monotone: MonotoneGrid,
    pub lemma1: Lemma1Grid,
    pub lemma2: Lemma2Grid,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotoneGrid {
    pub m_max: u64,
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma1Grid {
    pub pairs: Vec<(u64, u64)>,
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma2Grid {
    pub pairs: Vec<(u64, u64)>,
    pub lambda_scale: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl VerifyGrid {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Grid(e.to_string()))
    }

    /// The grid shipped with the binary.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT).expect("bundled grid parses")
    }

    pub fn load(path: Option<&std::path::Path>) -> Result<Self> {
        match path {
            None => Ok(Self::builtin()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|source| CliError::Io { path: p.display().to_string(), source })?;
                Self::parse(&text)
            }
        }
    }
}
