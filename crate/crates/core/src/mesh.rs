//! Regular mesh partition of the region and per-mesh radio-parameter
//! distributions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{RemError, Result};
use crate::geom::{Point, Rect};
use crate::scene::CoverageScene;

/// Default sub-sampling resolution per mesh side.
pub const DEFAULT_SUBSAMPLES: usize = 32;

const SUM_TOLERANCE: f64 = 1e-9;

/// `m x m` meshes over `[0, L]^2`, indexed row-major from the lower-left
/// corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshGrid {
    edge: f64,
    side: usize,
}

impl MeshGrid {
    pub fn new(edge: f64, side: usize) -> Result<Self> {
        if side == 0 {
            return Err(RemError::domain(
                "mesh grid needs at least one mesh per side",
            ));
        }
        if !(edge.is_finite() && edge > 0.0) {
            return Err(RemError::domain("mesh grid edge must be positive"));
        }
        Ok(MeshGrid { edge, side })
    }

    pub fn for_scene(scene: &CoverageScene, side: usize) -> Result<Self> {
        Self::new(scene.region_edge(), side)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn region_edge(&self) -> f64 {
        self.edge
    }

    /// `M = m^2`
    pub fn count(&self) -> usize {
        self.side * self.side
    }

    /// Mesh edge `ε = L / m`.
    pub fn epsilon(&self) -> f64 {
        self.edge / self.side as f64
    }

    pub fn row_col(&self, i: usize) -> (usize, usize) {
        (i / self.side, i % self.side)
    }

    pub fn rect(&self, i: usize) -> Rect {
        let (row, col) = self.row_col(i);
        let eps = self.epsilon();
        let x0 = col as f64 * eps;
        let y0 = row as f64 * eps;
        // Last row/column end exactly on the region edge.
        let x1 = if col + 1 == self.side {
            self.edge
        } else {
            (col + 1) as f64 * eps
        };
        let y1 = if row + 1 == self.side {
            self.edge
        } else {
            (row + 1) as f64 * eps
        };
        Rect::new(x0, y0, x1, y1)
    }

    /// Mesh containing `p`; points on shared edges go to the upper/right
    /// mesh except on the far region edges.
    pub fn locate(&self, p: Point) -> usize {
        let eps = self.epsilon();
        let col = ((p.x / eps).floor().max(0.0) as usize).min(self.side - 1);
        let row = ((p.y / eps).floor().max(0.0) as usize).min(self.side - 1);
        row * self.side + col
    }

    /// Rectangle covering mesh `i` and its 8-neighborhood.
    pub fn neighborhood(&self, i: usize) -> Rect {
        let (row, col) = self.row_col(i);
        let lo_r = row.saturating_sub(1);
        let lo_c = col.saturating_sub(1);
        let hi_r = (row + 1).min(self.side - 1);
        let hi_c = (col + 1).min(self.side - 1);
        let a = self.rect(lo_r * self.side + lo_c);
        let b = self.rect(hi_r * self.side + hi_c);
        Rect::new(a.x0, a.y0, b.x1, b.y1)
    }
}

/// Area fractions `p_j` of each radio parameter inside one mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshDistribution {
    probs: Vec<f64>,
    area: f64,
}

impl MeshDistribution {
    pub fn new(probs: Vec<f64>, area: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(RemError::domain(
                "distribution needs at least one parameter",
            ));
        }
        if !(area.is_finite() && area > 0.0) {
            return Err(RemError::domain(format!(
                "mesh area must be positive, got {area}"
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(RemError::domain(
                "probabilities must be finite and non-negative",
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(RemError::domain(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(MeshDistribution { probs, area })
    }

    /// Mesh covered entirely by parameter `j`.
    pub fn pure(n: usize, j: usize, area: f64) -> Result<Self> {
        if j >= n {
            return Err(RemError::domain(format!("parameter {j} outside [0, {n})")));
        }
        let mut probs = vec![0.0; n];
        probs[j] = 1.0;
        Self::new(probs, area)
    }

    fn from_counts(counts: &[u32], total: u32, area: f64) -> Self {
        let denom = total as f64;
        MeshDistribution {
            probs: counts.iter().map(|&c| c as f64 / denom).collect(),
            area,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn num_parameters(&self) -> usize {
        self.probs.len()
    }

    /// Dominant parameter; ties go to the lowest index.
    pub fn majority(&self) -> usize {
        let mut best = 0;
        for (j, &p) in self.probs.iter().enumerate().skip(1) {
            if p > self.probs[best] {
                best = j;
            }
        }
        best
    }

    pub fn is_pure(&self) -> bool {
        self.probs.iter().filter(|&&p| p > 0.0).count() <= 1
    }

    /// Area-weighted mixture of two meshes.
    pub fn fuse(&self, other: &MeshDistribution) -> Result<MeshDistribution> {
        if self.probs.len() != other.probs.len() {
            return Err(RemError::domain(format!(
                "cannot fuse distributions over {} and {} parameters",
                self.probs.len(),
                other.probs.len()
            )));
        }
        let area = self.area + other.area;
        let (w1, w2) = (self.area / area, other.area / area);
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| w1 * a + w2 * b)
            .collect();
        Ok(MeshDistribution { probs, area })
    }

    /// Fuses any non-empty set of meshes into one.
    pub fn fuse_all(parts: &[MeshDistribution]) -> Result<MeshDistribution> {
        let first = parts
            .first()
            .ok_or_else(|| RemError::domain("nothing to fuse"))?;
        let n = first.probs.len();
        if parts.iter().any(|d| d.probs.len() != n) {
            return Err(RemError::domain(
                "cannot fuse distributions of different sizes",
            ));
        }
        let area: f64 = parts.iter().map(|d| d.area).sum();
        let mut probs = vec![0.0; n];
        for d in parts {
            for (acc, p) in probs.iter_mut().zip(&d.probs) {
                *acc += d.area * p;
            }
        }
        probs.iter_mut().for_each(|p| *p /= area);
        Ok(MeshDistribution { probs, area })
    }
}

/// Estimates the parameter distribution over `rect` from an `r x r` lattice
/// of cell-center sub-points.
pub fn estimate_rect(scene: &CoverageScene, rect: &Rect, r: usize) -> Result<MeshDistribution> {
    if r == 0 {
        return Err(RemError::domain("subsample count must be at least 1"));
    }
    let n = scene.num_parameters();
    let area = rect.area();
    if scene.is_uniform_on(rect) {
        // No circle touches the rectangle, so every lattice point agrees.
        let c = Point::new(0.5 * (rect.x0 + rect.x1), 0.5 * (rect.y0 + rect.y1));
        return MeshDistribution::pure(n, scene.parameter_at(c.x, c.y) as usize, area);
    }
    let mut counts = vec![0u32; n];
    let dx = rect.width() / r as f64;
    let dy = rect.height() / r as f64;
    for a in 0..r {
        let y = rect.y0 + (a as f64 + 0.5) * dy;
        for b in 0..r {
            let x = rect.x0 + (b as f64 + 0.5) * dx;
            counts[scene.parameter_at(x, y) as usize] += 1;
        }
    }
    Ok(MeshDistribution::from_counts(&counts, (r * r) as u32, area))
}

pub fn estimate_distribution(
    scene: &CoverageScene,
    grid: &MeshGrid,
    i: usize,
    r: usize,
) -> Result<MeshDistribution> {
    if i >= grid.count() {
        return Err(RemError::domain(format!(
            "mesh index {i} outside [0, {})",
            grid.count()
        )));
    }
    estimate_rect(scene, &grid.rect(i), r)
}

/// Splits mesh `i` into `q x q` children and estimates each one.
/// Children are ordered row-major from the mesh's lower-left corner.
pub fn subdivide(
    scene: &CoverageScene,
    grid: &MeshGrid,
    i: usize,
    q: usize,
    r: usize,
) -> Result<Vec<MeshDistribution>> {
    if q < 2 {
        return Err(RemError::domain("subdivision factor must be at least 2"));
    }
    if i >= grid.count() {
        return Err(RemError::domain(format!("mesh index {i} out of range")));
    }
    let parent = grid.rect(i);
    let w = parent.width() / q as f64;
    let h = parent.height() / q as f64;
    (0..q * q)
        .map(|c| {
            let (row, col) = (c / q, c % q);
            let x0 = parent.x0 + col as f64 * w;
            let y0 = parent.y0 + row as f64 * h;
            let x1 = if col + 1 == q { parent.x1 } else { x0 + w };
            let y1 = if row + 1 == q { parent.y1 } else { y0 + h };
            estimate_rect(scene, &Rect::new(x0, y0, x1, y1), r)
        })
        .collect()
}

/// Meshes of a region together with their area weights `α_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPartition {
    meshes: Vec<MeshDistribution>,
    weights: Vec<f64>,
}

impl RegionPartition {
    /// Builds a partition whose weights are `area_i / total_area`.
    pub fn new(meshes: Vec<MeshDistribution>, total_area: f64) -> Result<Self> {
        if meshes.is_empty() {
            return Err(RemError::domain("partition needs at least one mesh"));
        }
        let n = meshes[0].num_parameters();
        if meshes.iter().any(|d| d.num_parameters() != n) {
            return Err(RemError::domain(
                "all meshes must share the parameter count",
            ));
        }
        let weights: Vec<f64> = meshes.iter().map(|d| d.area() / total_area).collect();
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(RemError::domain(format!(
                "area weights sum to {sum}; meshes do not tile the region"
            )));
        }
        Ok(RegionPartition { meshes, weights })
    }

    /// Sub-sampled estimate of every mesh of `grid`. Meshes are evaluated in
    /// parallel; the result is identical to sequential evaluation.
    pub fn estimate(scene: &CoverageScene, grid: &MeshGrid, r: usize) -> Result<Self> {
        let meshes = (0..grid.count())
            .into_par_iter()
            .map(|i| estimate_rect(scene, &grid.rect(i), r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(meshes, scene.area())
    }

    pub fn meshes(&self) -> &[MeshDistribution] {
        &self.meshes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.meshes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.meshes.is_empty()
    }

    pub fn num_parameters(&self) -> usize {
        self.meshes[0].num_parameters()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Disk, NetworkCoverage};

    fn half_plane_scene() -> CoverageScene {
        // A huge disk whose boundary is nearly the vertical line x = 0.5.
        let r = 1.0e6;
        CoverageScene::new(
            1.0,
            vec![NetworkCoverage {
                index: 1,
                disks: vec![Disk::new(0.5 - r, 0.5, r)],
            }],
        )
        .unwrap()
    }

    #[test]
    fn grid_geometry() {
        let g = MeshGrid::new(2.0, 4).unwrap();
        assert_eq!(g.count(), 16);
        assert_eq!(g.epsilon() * 4.0, 2.0);
        assert_eq!(g.rect(0), Rect::new(0.0, 0.0, 0.5, 0.5));
        assert_eq!(g.rect(5), Rect::new(0.5, 0.5, 1.0, 1.0));
        assert_eq!(g.locate(Point::new(0.6, 0.1)), 1);
        assert_eq!(g.locate(Point::new(0.1, 0.6)), 4);
        assert_eq!(g.locate(Point::new(2.0, 2.0)), 15);
        assert!(MeshGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn empty_mesh_is_pure_zero() {
        let s = CoverageScene::new(
            1.0,
            vec![NetworkCoverage {
                index: 1,
                disks: vec![Disk::new(0.9, 0.9, 0.05)],
            }],
        )
        .unwrap();
        let g = MeshGrid::new(1.0, 4).unwrap();
        let d = estimate_distribution(&s, &g, 0, 16).unwrap();
        assert_eq!(d.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn bisected_mesh_is_balanced() {
        let s = half_plane_scene();
        let g = MeshGrid::new(1.0, 1).unwrap();
        let d = estimate_distribution(&s, &g, 0, 64).unwrap();
        assert!((d.probs()[0] - 0.5).abs() <= 1.0 / 64.0);
        assert!((d.probs()[1] - 0.5).abs() <= 1.0 / 64.0);
        assert_eq!(d.probs().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn majority_tie_breaks_low() {
        let d = MeshDistribution::new(vec![0.6, 0.4], 1.0).unwrap();
        assert_eq!(d.majority(), 0);
        let u = MeshDistribution::new(vec![0.25; 4], 1.0).unwrap();
        assert_eq!(u.majority(), 0);
        let p = MeshDistribution::pure(8, 1, 1.0).unwrap();
        assert_eq!(p.majority(), 1);
    }

    #[test]
    fn fuse_examples() {
        let a = MeshDistribution::pure(4, 1, 2.0).unwrap();
        let b = MeshDistribution::pure(4, 3, 2.0).unwrap();
        let f = a.fuse(&b).unwrap();
        assert_eq!(f.probs(), &[0.0, 0.5, 0.0, 0.5]);
        assert_eq!(f.area(), 4.0);

        let d = MeshDistribution::new(vec![0.2, 0.3, 0.5], 1.5).unwrap();
        let same = d.fuse(&d).unwrap();
        for (x, y) in same.probs().iter().zip(d.probs()) {
            assert!((x - y).abs() < 1e-15);
        }

        let p1 = MeshDistribution::new(vec![1.0, 0.0], 1.0).unwrap();
        let p2 = MeshDistribution::new(vec![0.0, 1.0], 3.0).unwrap();
        assert_eq!(p1.fuse(&p2).unwrap().probs(), &[0.25, 0.75]);

        let wrong = MeshDistribution::pure(8, 0, 1.0).unwrap();
        assert!(matches!(a.fuse(&wrong), Err(RemError::Domain(_))));
    }

    #[test]
    fn distribution_validation() {
        assert!(MeshDistribution::new(vec![0.5, 0.4], 1.0).is_err());
        assert!(MeshDistribution::new(vec![1.2, -0.2], 1.0).is_err());
        assert!(MeshDistribution::new(vec![1.0], 0.0).is_err());
        assert!(MeshDistribution::pure(2, 2, 1.0).is_err());
    }

    #[test]
    fn subdivide_pure_mesh() {
        let s = half_plane_scene();
        let g = MeshGrid::new(1.0, 4).unwrap();
        // Mesh 3 (lower-right) lies entirely at x >= 0.75, outside coverage.
        let kids = subdivide(&s, &g, 3, 3, 8).unwrap();
        assert_eq!(kids.len(), 9);
        assert!(kids.iter().all(|k| k.probs() == [1.0, 0.0]));
        let total: f64 = kids.iter().map(MeshDistribution::area).sum();
        assert!((total - g.rect(3).area()).abs() < 1e-15);
        assert!(subdivide(&s, &g, 3, 1, 8).is_err());
    }

    #[test]
    fn partition_weights_sum_to_one() {
        let s = half_plane_scene();
        let g = MeshGrid::new(1.0, 8).unwrap();
        let part = RegionPartition::estimate(&s, &g, 8).unwrap();
        assert_eq!(part.len(), 64);
        assert!((part.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partition_rejects_incomplete_tiling() {
        let d = MeshDistribution::pure(2, 0, 0.25).unwrap();
        assert!(RegionPartition::new(vec![d.clone(), d], 1.0).is_err());
    }
}
