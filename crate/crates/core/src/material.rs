use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-phase bar material and loading horizon.
///
/// The weak phase has stiffness `a0` (scaled by ε in the damage model), the
/// sound phase `a1`, and damaging a unit volume costs `kappa`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub kappa: f64,
    pub a0: f64,
    pub a1: f64,
    pub length: f64,
    pub horizon: f64,
}

impl Default for MaterialParams {
    /// Desk-scale values with unit yield stress and elastic threshold 0.5.
    fn default() -> Self {
        MaterialParams {
            kappa: 0.5,
            a0: 1.0,
            a1: 2.0,
            length: 1.0,
            horizon: 2.0,
        }
    }
}

impl MaterialParams {
    pub fn new(kappa: f64, a0: f64, a1: f64, length: f64, horizon: f64) -> Result<Self> {
        let m = MaterialParams {
            kappa,
            a0,
            a1,
            length,
            horizon,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("kappa", self.kappa),
            ("a0", self.a0),
            ("a1", self.a1),
            ("length", self.length),
            ("horizon", self.horizon),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if self.a0 >= self.a1 {
            return Err(Error::InvalidParams(format!(
                "need a0 < a1, got a0 = {}, a1 = {}",
                self.a0, self.a1
            )));
        }
        Ok(())
    }

    /// Radius `s* = sqrt(2 κ a0)` of the yield interval K.
    pub fn yield_stress(&self) -> f64 {
        (2.0 * self.kappa * self.a0).sqrt()
    }

    /// Largest boundary jump `s* L / a1` carried by a purely elastic bar.
    pub fn elastic_jump_threshold(&self) -> f64 {
        self.yield_stress() * self.length / self.a1
    }

    /// Overshoot factor `sqrt(a1 / (a1 - ε a0))` of the ε-model plateau stress.
    pub fn overshoot(&self, eps: f64) -> Result<f64> {
        let d = self.a1 - eps * self.a0;
        if !(eps > 0.0 && d > 0.0) {
            return Err(Error::InvalidParams(format!(
                "eps must satisfy 0 < eps * a0 < a1, got eps = {eps}"
            )));
        }
        Ok((self.a1 / d).sqrt())
    }

    /// `|σ| ≤ s*`; the boundary of K counts as inside.
    pub fn in_yield_set(&self, sigma: f64) -> bool {
        sigma.abs() <= self.yield_stress()
    }

    /// Support function of K, i.e. the plastic dissipation of an increment `q`.
    pub fn support(&self, q: f64) -> f64 {
        self.yield_stress() * q.abs()
    }
}
