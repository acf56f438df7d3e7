use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::funcs::{FSpec, PhiSpec};

/// The compact set `K` whose distance function enters the weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KSet {
    Origin,
    Ball { radius: f64 },
    PointSet { centers: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(rename = "N")]
    pub n: usize,
    pub phi: PhiSpec,
    pub f: FSpec,
    #[serde(rename = "K")]
    pub k: KSet,
}

impl ProblemSpec {
    pub fn new(n: usize, phi: PhiSpec, f: FSpec, k: KSet) -> ProblemSpec {
        ProblemSpec { n, phi, f, k }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return domain("dimension must be at least 2");
        }
        self.phi.validate()?;
        self.f.validate()?;
        match &self.k {
            KSet::Origin => Ok(()),
            KSet::Ball { radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return domain("ball radius must be positive");
                }
                Ok(())
            }
            KSet::PointSet { centers } => {
                if centers.is_empty() {
                    return domain("point set must not be empty");
                }
                if let Some(c) = centers.iter().find(|c| c.len() != self.n) {
                    return domain(format!("center {c:?} does not live in R^{}", self.n));
                }
                for (i, a) in centers.iter().enumerate() {
                    for b in &centers[i + 1..] {
                        if dist(a, b) == 0.0 {
                            return domain(format!("repeated center {a:?}"));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Finite point sets, the origin included.
    pub fn is_degenerate(&self) -> bool {
        matches!(self.k, KSet::Origin | KSet::PointSet { .. })
    }

    /// Radial distance to `K` for a radial profile centred at the origin.
    pub fn radial_delta(&self, r: f64) -> f64 {
        match &self.k {
            KSet::Ball { radius } => r - radius,
            _ => r,
        }
    }

    /// `delta_K(x)` for a point of `R^N`.
    pub fn delta(&self, x: &[f64]) -> f64 {
        match &self.k {
            KSet::Origin => norm(x),
            KSet::Ball { radius } => norm(x) - radius,
            KSet::PointSet { centers } => centers.iter().map(|c| dist(x, c)).fold(f64::INFINITY, f64::min),
        }
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
