use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Physical constants of the model: particle mass `m ≥ 0`, coupling `λ`
/// (attractive when negative), and screening strength `μ ≥ 0` (`μ = 0` is the
/// unscreened Coulomb kernel).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct Params {
    m: f64,
    lambda: f64,
    mu: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    m: f64,
    lambda: f64,
    mu: f64,
}

impl TryFrom<RawParams> for Params {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        Params::new(r.m, r.lambda, r.mu)
    }
}

impl From<Params> for RawParams {
    fn from(p: Params) -> Self {
        RawParams { m: p.m, lambda: p.lambda, mu: p.mu }
    }
}

impl Params {
    pub fn new(m: f64, lambda: f64, mu: f64) -> Result<Self> {
        if m < 0.0 || !m.is_finite() {
            return Err(Error::Config(format!("mass must satisfy m ≥ 0, got {m}")));
        }
        if mu < 0.0 || !mu.is_finite() {
            return Err(Error::Config(format!("screening must satisfy μ ≥ 0, got {mu}")));
        }
        if !lambda.is_finite() {
            return Err(Error::Config(format!("coupling λ must be finite, got {lambda}")));
        }
        Ok(Params { m, lambda, mu })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}
