use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Grading {
    Geometric {
        ratio: f64,
    },
    Uniform {
        spacing: f64,
    },
    /// `origin` followed by `origin + d_k` with `d_k` geometric.
    Offset {
        origin: f64,
        ratio: f64,
    },
    Graded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    grading: Grading,
    dimension: usize,
}

fn is_geometric(nodes: &[f64]) -> Option<f64> {
    if nodes[0] <= 0.0 {
        return None;
    }
    let q = (nodes[nodes.len() - 1] / nodes[0]).powf(1.0 / (nodes.len() - 1) as f64);
    let ok = nodes.windows(2).all(|w| ((w[1] / w[0]) / q - 1.0).abs() < 1e-12);
    ok.then_some(q)
}

impl RadialGrid {
    pub fn from_nodes(nodes: Vec<f64>, dimension: usize) -> Result<RadialGrid> {
        if nodes.len() < MIN_NODES {
            return domain(format!("a grid needs at least {MIN_NODES} nodes, got {}", nodes.len()));
        }
        if nodes[0] < 0.0 || nodes.iter().any(|x| !x.is_finite()) || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("grid nodes must be finite, nonnegative and strictly increasing");
        }
        if dimension >= 2 && nodes[0] == 0.0 {
            return domain("radial grids in N >= 2 must avoid r = 0");
        }
        let grading = if let Some(ratio) = is_geometric(&nodes) {
            Grading::Geometric { ratio }
        } else {
            let h = (nodes[nodes.len() - 1] - nodes[0]) / (nodes.len() - 1) as f64;
            if nodes.windows(2).all(|w| ((w[1] - w[0]) / h - 1.0).abs() < 1e-9) {
                Grading::Uniform { spacing: h }
            } else {
                let o = nodes[0];
                let shifted: Vec<f64> = nodes[1..].iter().map(|x| x - o).collect();
                match is_geometric(&shifted) {
                    Some(ratio) if shifted.len() >= 2 => Grading::Offset { origin: o, ratio },
                    _ => Grading::Graded,
                }
            }
        };
        Ok(RadialGrid { nodes, grading, dimension })
    }

    pub fn geometric(ra: f64, rb: f64, count: usize, dimension: usize) -> Result<RadialGrid> {
        if !(ra > 0.0 && rb > ra) {
            return domain(format!("geometric grid needs 0 < ra < rb, got ({ra}, {rb})"));
        }
        let l = (rb / ra).ln();
        let mut nodes: Vec<f64> = (0..count).map(|k| ra * (l * k as f64 / (count - 1) as f64).exp()).collect();
        if let Some(last) = nodes.last_mut() {
            *last = rb;
        }
        RadialGrid::from_nodes(nodes, dimension)
    }

    /// Nodes `2^(k/per_octave)` for `|k| <= log2(n) per_octave`. Grids built
    /// with the same `per_octave` share their nodes bit for bit, so the inner
    /// annulus is an exact subgrid of every larger one.
    pub fn nested_symmetric(n: f64, per_octave: usize, dimension: usize) -> Result<RadialGrid> {
        let k = (n.log2() * per_octave as f64).round() as i64;
        if k < 1 {
            return domain("nested grid needs n > 1");
        }
        let nodes = (-k..=k).map(|j| (j as f64 / per_octave as f64).exp2()).collect();
        RadialGrid::from_nodes(nodes, dimension)
    }

    pub fn uniform(a: f64, b: f64, count: usize, dimension: usize) -> Result<RadialGrid> {
        if !(b > a) {
            return domain("uniform grid needs a < b");
        }
        let h = (b - a) / (count - 1) as f64;
        let mut nodes: Vec<f64> = (0..count).map(|k| a + h * k as f64).collect();
        if let Some(last) = nodes.last_mut() {
            *last = b;
        }
        RadialGrid::from_nodes(nodes, dimension)
    }

    /// `origin` and `origin + d_min 2^(k/per_octave)` up to `origin + d_max`.
    pub fn offset_geometric(
        origin: f64,
        d_min: f64,
        d_max: f64,
        per_octave: usize,
        dimension: usize,
    ) -> Result<RadialGrid> {
        if !(d_min > 0.0 && d_max > d_min) {
            return domain("offset grid needs 0 < d_min < d_max");
        }
        let k = ((d_max / d_min).log2() * per_octave as f64).round() as i64;
        let mut nodes = vec![origin];
        nodes.extend((0..=k).map(|j| origin + d_min * (j as f64 / per_octave as f64).exp2()));
        RadialGrid::from_nodes(nodes, dimension)
    }

    /// Geometric towards both ends of `[0, 1]`: used for the boundary-layer
    /// gauge, whose interesting structure sits at `t -> 0`.
    pub fn two_sided(d_min: f64, per_octave: usize, dimension: usize) -> Result<RadialGrid> {
        let k = ((0.5 / d_min).log2() * per_octave as f64).round() as i64;
        let half: Vec<f64> = (0..=k).map(|j| 0.5 * (-(j as f64) / per_octave as f64).exp2()).collect();
        let mut nodes = vec![0.0];
        nodes.extend(half.iter().rev().copied());
        nodes.extend(half.iter().skip(1).map(|d| 1.0 - d));
        nodes.push(1.0);
        RadialGrid::from_nodes(nodes, dimension)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Index range of nodes inside `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let a = self.nodes.partition_point(|&r| r < lo);
        let b = self.nodes.partition_point(|&r| r <= hi);
        a..b.max(a)
    }

    /// Index of a node equal to `r` up to a relative `1e-12`.
    pub fn find(&self, r: f64) -> Option<usize> {
        let i = self.nodes.partition_point(|&x| x < r * (1.0 - 1e-12));
        (i < self.nodes.len() && (self.nodes[i] - r).abs() <= 1e-12 * r.abs().max(1e-300)).then_some(i)
    }

    /// Same nodes, a different dimension label.
    pub fn with_dimension(&self, dimension: usize) -> RadialGrid {
        RadialGrid { nodes: self.nodes.clone(), grading: self.grading, dimension }
    }

    pub fn same_nodes(&self, other: &RadialGrid) -> bool {
        self.nodes.len() == other.nodes.len()
            && self.nodes.iter().zip(&other.nodes).all(|(a, b)| (a - b).abs() <= 1e-14 * a.abs().max(b.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_grid_has_constant_ratio() {
        let g = RadialGrid::geometric(0.125, 8.0, 33, 3).unwrap();
        match g.grading() {
            Grading::Geometric { ratio } => assert!((ratio - 64f64.powf(1.0 / 32.0)).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
        assert_eq!(g.first(), 0.125);
        assert_eq!(g.last(), 8.0);
    }

    #[test]
    fn nested_grids_share_nodes() {
        let a = RadialGrid::nested_symmetric(4.0, 8, 3).unwrap();
        let b = RadialGrid::nested_symmetric(16.0, 8, 3).unwrap();
        let off = b.find(a.first()).unwrap();
        for (i, r) in a.nodes().iter().enumerate() {
            assert_eq!(*r, b.nodes()[off + i]);
        }
    }

    #[test]
    fn too_few_nodes_are_rejected() {
        assert!(RadialGrid::geometric(1.0, 2.0, 8, 3).is_err());
        assert!(RadialGrid::from_nodes(vec![0.0; 20], 3).is_err());
    }

    #[test]
    fn grading_detection() {
        let u = RadialGrid::uniform(0.0, 1.0, 32, 1).unwrap();
        assert!(matches!(u.grading(), Grading::Uniform { .. }));
        let o = RadialGrid::offset_geometric(1.0, 1e-3, 1.0, 8, 3).unwrap();
        assert!(matches!(o.grading(), Grading::Offset { .. }));
        let t = RadialGrid::two_sided(1e-3, 8, 1).unwrap();
        assert!(matches!(t.grading(), Grading::Graded));
        assert_eq!(t.first(), 0.0);
        assert_eq!(t.last(), 1.0);
    }
}
