use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::grid::{Grading, RadialGrid};
use crate::error::{domain, LabError, Result};

/// Sampled radial function with a monotone cubic (PCHIP) interpolant.
///
/// Geometric grids interpolate in `ln r`, all others in `r`. Values may be
/// zero on the boundary nodes of Dirichlet problems with zero data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    grid: RadialGrid,
    values: Vec<f64>,
    slopes: Vec<f64>,
    log_coords: bool,
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if del[i - 1] * del[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    if n > 2 {
        d[0] = end(h[0], h[1], del[0], del[1]);
        d[n - 1] = end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    } else {
        d[0] = del[0];
        d[1] = del[0];
    }
    d
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<RadialProfile> {
        if values.len() != grid.len() {
            return domain(format!("{} values for {} nodes", values.len(), grid.len()));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(LabError::Domain(format!(
                "profile value {} at r = {:e} is not a nonnegative number",
                values[i],
                grid.nodes()[i]
            )));
        }
        let log_coords = matches!(grid.grading(), Grading::Geometric { .. });
        let x = Self::coords(&grid, log_coords);
        let slopes = pchip_slopes(&x, &values);
        Ok(RadialProfile { grid, values, slopes, log_coords })
    }

    /// Builds a profile by sampling `u` at the grid nodes.
    pub fn sample(grid: RadialGrid, u: impl Fn(f64) -> f64) -> Result<RadialProfile> {
        let v = grid.nodes().iter().map(|&r| u(r)).collect();
        RadialProfile::new(grid, v)
    }

    fn coords(grid: &RadialGrid, log_coords: bool) -> Vec<f64> {
        if log_coords {
            grid.nodes().iter().map(|r| r.ln()).collect()
        } else {
            grid.nodes().to_vec()
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn dimension(&self) -> usize {
        self.grid.dimension()
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.grid.first() && r <= self.grid.last()
    }

    fn locate(&self, r: f64) -> Option<(usize, f64, f64)> {
        if !self.contains(r) {
            return None;
        }
        let nodes = self.grid.nodes();
        let i = nodes.partition_point(|&x| x <= r).clamp(1, nodes.len() - 1) - 1;
        let (x0, x1, x) =
            if self.log_coords { (nodes[i].ln(), nodes[i + 1].ln(), r.ln()) } else { (nodes[i], nodes[i + 1], r) };
        let h = x1 - x0;
        Some((i, (x - x0) / h, h))
    }

    /// Interpolated value, `None` outside the grid.
    pub fn eval(&self, r: f64) -> Option<f64> {
        let (i, t, h) = self.locate(r)?;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        Some((2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1)
    }

    /// Derivative `du/dr` of the interpolant.
    pub fn derivative(&self, r: f64) -> Option<f64> {
        let (i, t, h) = self.locate(r)?;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let dx = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * d1)
            / h;
        Some(if self.log_coords { dx / r } else { dx })
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(*v))
    }

    /// Node values on `[lo, hi]` as `(r, u)` pairs.
    pub fn window(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        self.grid.window(lo, hi).map(|i| (self.grid.nodes()[i], self.values[i])).collect()
    }

    pub fn map_values(&self, f: impl Fn(f64, f64) -> f64) -> Result<RadialProfile> {
        let v = self.grid.nodes().iter().zip(&self.values).map(|(&r, &u)| f(r, u)).collect();
        RadialProfile::new(self.grid.clone(), v)
    }

    /// CSV with header `r,u`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,u\n");
        for (r, u) in self.grid.nodes().iter().zip(&self.values) {
            let _ = writeln!(s, "{},{}", sci(*r), sci(*u));
        }
        s
    }

    pub fn from_csv(text: &str, dimension: usize) -> Result<RadialProfile> {
        let mut lines = text.lines();
        match lines.next().map(str::trim) {
            Some("r,u") => {}
            other => return Err(LabError::Config(format!("expected header `r,u`, found {other:?}"))),
        }
        let mut r = Vec::new();
        let mut u = Vec::new();
        for (k, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| LabError::Config(format!("line {}: cannot parse `{line}`", k + 2)))
            };
            r.push(parse(it.next())?);
            u.push(parse(it.next())?);
        }
        RadialProfile::new(RadialGrid::from_nodes(r, dimension)?, u)
    }
}

/// Scientific notation with 17 significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolant_reproduces_nodes() {
        let g = RadialGrid::geometric(0.1, 10.0, 40, 3).unwrap();
        let p = RadialProfile::sample(g, |r| 2.0 / r.sqrt()).unwrap();
        for (r, u) in p.nodes().iter().zip(p.values()) {
            assert!((p.eval(*r).unwrap() - u).abs() <= 1e-14 * u);
        }
        assert!(p.eval(20.0).is_none());
    }

    #[test]
    fn interpolant_is_accurate_between_nodes() {
        let g = RadialGrid::geometric(0.1, 10.0, 200, 3).unwrap();
        let p = RadialProfile::sample(g, |r| 2.0 / r.sqrt()).unwrap();
        for &r in &[0.1234, 0.77, 1.0, 3.3, 9.99] {
            let e = 2.0 / f64::sqrt(r);
            assert!((p.eval(r).unwrap() / e - 1.0).abs() < 1e-6);
            let de = -1.0 / (r * r.sqrt());
            assert!((p.derivative(r).unwrap() / de - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let g = RadialGrid::geometric(0.1, 10.0, 20, 3).unwrap();
        let p = RadialProfile::sample(g, |r| (1.0 + r).ln() / 3.0).unwrap();
        let q = RadialProfile::from_csv(&p.to_csv(), 3).unwrap();
        assert_eq!(p.values(), q.values());
        assert_eq!(p.nodes(), q.nodes());
    }

    #[test]
    fn negative_values_are_rejected() {
        let g = RadialGrid::uniform(0.0, 1.0, 16, 1).unwrap();
        assert!(RadialProfile::sample(g, |t| t - 0.5).is_err());
    }
}
