//! Synthetic heterogeneous coverage over a square region.
//!
//! Each of the `T` networks covers a union of closed disks. The radio
//! parameter at a location packs the detection bits of all networks into
//! an integer in `[0, 2^T)`, bit `k - 1` set iff network `k` is detected.

use std::f64::consts::TAU;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{RemError, Result};
use crate::geom::{self, Point, Rect};

/// Largest supported network count; keeps `N = 2^T` at 256 parameters.
pub const MAX_NETWORKS: usize = 8;

/// Default resolution of the raster boundary estimator.
pub const DEFAULT_RASTER_RESOLUTION: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl Disk {
    pub fn new(cx: f64, cy: f64, r: f64) -> Self {
        Disk { cx, cy, r }
    }

    pub fn center(&self) -> Point {
        Point::new(self.cx, self.cy)
    }

    /// Closed membership test.
    #[inline]
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let dx = x - self.cx;
        let dy = y - self.cy;
        dx * dx + dy * dy <= self.r * self.r
    }

    #[inline]
    fn strictly_contains(&self, p: Point) -> bool {
        let dx = p.x - self.cx;
        let dy = p.y - self.cy;
        dx * dx + dy * dy < self.r * self.r
    }

    /// Whether the circle (not the disk) touches the closed rectangle.
    pub fn circle_meets_rect(&self, rect: &Rect) -> bool {
        let c = self.center();
        let r2 = self.r * self.r;
        rect.min_dist2(c) <= r2 && r2 <= rect.max_dist2(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCoverage {
    pub index: u32,
    pub disks: Vec<Disk>,
}

impl NetworkCoverage {
    #[inline]
    pub fn covers(&self, x: f64, y: f64) -> bool {
        self.disks.iter().any(|d| d.contains(x, y))
    }
}

/// On-disk layout of a scene; validated on conversion.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SceneFile {
    region_edge: f64,
    networks: Vec<NetworkCoverage>,
}

/// Square region `[0, L]^2` with `T` networks. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SceneFile", into = "SceneFile")]
pub struct CoverageScene {
    region_edge: f64,
    networks: Vec<NetworkCoverage>,
}

impl TryFrom<SceneFile> for CoverageScene {
    type Error = RemError;

    fn try_from(f: SceneFile) -> Result<Self> {
        CoverageScene::new(f.region_edge, f.networks)
    }
}

impl From<CoverageScene> for SceneFile {
    fn from(s: CoverageScene) -> Self {
        SceneFile {
            region_edge: s.region_edge,
            networks: s.networks,
        }
    }
}

/// A piece of the coverage boundary: the counter-clockwise arc of `disk`'s
/// circle from angle `start` spanning `sweep` radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryArc {
    pub network: u32,
    pub disk: Disk,
    pub start: f64,
    pub sweep: f64,
}

impl BoundaryArc {
    pub fn length(&self) -> f64 {
        self.disk.r * self.sweep
    }

    pub fn point_at(&self, t: f64) -> Point {
        geom::on_circle(self.disk.center(), self.disk.r, self.start + t * self.sweep)
    }

    /// Exact test of whether the arc meets a closed rectangle.
    pub fn intersects_rect(&self, rect: &Rect) -> bool {
        if !self.disk.circle_meets_rect(rect) {
            return false;
        }
        if rect.contains(self.point_at(0.0)) || rect.contains(self.point_at(1.0)) {
            return true;
        }
        // Otherwise the arc must cross one of the rectangle's edges.
        let c = self.disk.center();
        let r = self.disk.r;
        let vertical = [rect.x0, rect.x1]
            .into_iter()
            .flat_map(|x| geom::circle_vertical_line(c, r, x));
        let horizontal = [rect.y0, rect.y1]
            .into_iter()
            .flat_map(|y| geom::circle_horizontal_line(c, r, y));
        vertical.chain(horizontal).any(|a| {
            let p = geom::on_circle(c, r, a);
            let eps = 1e-12 * (1.0 + rect.width().abs() + rect.height().abs());
            p.x >= rect.x0 - eps
                && p.x <= rect.x1 + eps
                && p.y >= rect.y0 - eps
                && p.y <= rect.y1 + eps
                && geom::angle_in_span(a, self.start, self.sweep)
        })
    }
}

impl CoverageScene {
    /// Validates and builds a scene. Networks may be given in any order;
    /// they are stored sorted by index.
    pub fn new(region_edge: f64, mut networks: Vec<NetworkCoverage>) -> Result<Self> {
        if !(region_edge.is_finite() && region_edge > 0.0) {
            return Err(RemError::InvalidScene(format!(
                "region edge must be positive and finite, got {region_edge}"
            )));
        }
        if networks.is_empty() {
            return Err(RemError::InvalidScene("scene has no networks".into()));
        }
        if networks.len() > MAX_NETWORKS {
            return Err(RemError::InvalidScene(format!(
                "{} networks exceeds the maximum of {MAX_NETWORKS}",
                networks.len()
            )));
        }
        networks.sort_by_key(|n| n.index);
        for (pos, net) in networks.iter().enumerate() {
            if net.index as usize != pos + 1 {
                return Err(RemError::InvalidScene(format!(
                    "network indices must be unique and contiguous from 1; found {} at position {}",
                    net.index,
                    pos + 1
                )));
            }
            if net.disks.is_empty() {
                return Err(RemError::InvalidScene(format!(
                    "network {} has no disks",
                    net.index
                )));
            }
            for d in &net.disks {
                if !(d.cx.is_finite() && d.cy.is_finite()) {
                    return Err(RemError::InvalidScene(format!(
                        "network {} has a disk with non-finite center",
                        net.index
                    )));
                }
                if !(d.r.is_finite() && d.r > 0.0) {
                    return Err(RemError::InvalidScene(format!(
                        "network {} has a disk with non-positive radius {}",
                        net.index, d.r
                    )));
                }
            }
        }
        Ok(CoverageScene {
            region_edge,
            networks,
        })
    }

    pub fn region_edge(&self) -> f64 {
        self.region_edge
    }

    pub fn area(&self) -> f64 {
        self.region_edge * self.region_edge
    }

    pub fn networks(&self) -> &[NetworkCoverage] {
        &self.networks
    }

    /// `T`
    pub fn num_networks(&self) -> usize {
        self.networks.len()
    }

    /// `N = 2^T`
    pub fn num_parameters(&self) -> usize {
        1 << self.networks.len()
    }

    pub fn region(&self) -> Rect {
        Rect::new(0.0, 0.0, self.region_edge, self.region_edge)
    }

    fn check_point(&self, p: Point) -> Result<()> {
        if !p.is_finite() || !self.region().contains(p) {
            return Err(RemError::domain(format!(
                "point ({}, {}) lies outside the region [0, {}]^2",
                p.x, p.y, self.region_edge
            )));
        }
        Ok(())
    }

    /// Whether network `k` (1-based) is detected at `p`.
    pub fn detect(&self, k: usize, p: Point) -> Result<bool> {
        self.check_point(p)?;
        if k == 0 || k > self.networks.len() {
            return Err(RemError::domain(format!(
                "network index {k} outside [1, {}]",
                self.networks.len()
            )));
        }
        Ok(self.networks[k - 1].covers(p.x, p.y))
    }

    pub fn radio_parameter(&self, p: Point) -> Result<u32> {
        self.check_point(p)?;
        Ok(self.parameter_at(p.x, p.y))
    }

    /// Unchecked field evaluation for hot loops; callers guarantee the point
    /// is inside the region.
    #[inline]
    pub fn parameter_at(&self, x: f64, y: f64) -> u32 {
        let mut value = 0u32;
        for (bit, net) in self.networks.iter().enumerate() {
            if net.covers(x, y) {
                value |= 1 << bit;
            }
        }
        value
    }

    /// Whether the parameter field is provably constant on `rect`: no circle
    /// of the scene touches it.
    pub fn is_uniform_on(&self, rect: &Rect) -> bool {
        self.networks
            .iter()
            .flat_map(|n| n.disks.iter())
            .all(|d| !d.circle_meets_rect(rect))
    }

    /// The set where the parameter field changes value, as circle arcs
    /// clipped to the region.
    pub fn boundary_arcs(&self) -> Vec<BoundaryArc> {
        let region = self.region();
        let mut arcs = Vec::new();
        for net in &self.networks {
            for (i, disk) in net.disks.iter().enumerate() {
                let c = disk.center();
                let r = disk.r;
                let mut shadowed = false;
                let mut angles = Vec::new();
                for x in [0.0, self.region_edge] {
                    angles.extend(geom::circle_vertical_line(c, r, x));
                }
                for y in [0.0, self.region_edge] {
                    angles.extend(geom::circle_horizontal_line(c, r, y));
                }
                for (j, other) in net.disks.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    if other == disk {
                        // Duplicate disks share one boundary; keep the first.
                        if j < i {
                            shadowed = true;
                        }
                        continue;
                    }
                    angles.extend(geom::circle_circle(c, r, other.center(), other.r));
                }
                if shadowed {
                    continue;
                }
                let on_boundary = |a: f64| {
                    let p = geom::on_circle(c, r, a);
                    region.contains(p)
                        && !net
                            .disks
                            .iter()
                            .enumerate()
                            .any(|(j, o)| j != i && o != disk && o.strictly_contains(p))
                };
                if angles.is_empty() {
                    if on_boundary(0.0) {
                        arcs.push(BoundaryArc {
                            network: net.index,
                            disk: *disk,
                            start: 0.0,
                            sweep: TAU,
                        });
                    }
                    continue;
                }
                angles.sort_by(f64::total_cmp);
                angles.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
                for w in 0..angles.len() {
                    let start = angles[w];
                    let end = if w + 1 < angles.len() {
                        angles[w + 1]
                    } else {
                        angles[0] + TAU
                    };
                    let sweep = end - start;
                    if sweep <= 0.0 {
                        continue;
                    }
                    if on_boundary(start + 0.5 * sweep) {
                        arcs.push(BoundaryArc {
                            network: net.index,
                            disk: *disk,
                            start,
                            sweep,
                        });
                    }
                }
            }
        }
        arcs
    }

    /// Analytic total boundary length `ξ` inside the region.
    pub fn boundary_length(&self) -> f64 {
        self.boundary_arcs().iter().map(BoundaryArc::length).sum()
    }

    /// Raster estimate of `ξ` from an `f x f` sample lattice spanning the
    /// region (corners included).
    ///
    /// Each network is sampled through its signed clearance
    /// `max_d (r_d - |p - c_d|)`, whose sign is the detection bit; marching
    /// squares with linear edge interpolation traces where the bit flips.
    /// Summing over networks gives the length of the parameter-change set.
    pub fn boundary_length_raster(&self, f: usize) -> Result<f64> {
        if f < 2 {
            return Err(RemError::domain("raster resolution must be at least 2"));
        }
        let h = self.region_edge / (f - 1) as f64;
        let mut total = 0.0;
        for net in &self.networks {
            let field: Vec<f64> = (0..f * f)
                .into_par_iter()
                .map(|idx| {
                    let x = (idx % f) as f64 * h;
                    let y = (idx / f) as f64 * h;
                    net.disks
                        .iter()
                        .map(|d| d.r - ((x - d.cx).powi(2) + (y - d.cy).powi(2)).sqrt())
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect();
            let rows: Vec<f64> = (0..f - 1)
                .into_par_iter()
                .map(|row| {
                    (0..f - 1)
                        .map(|col| {
                            let bl = field[row * f + col];
                            let br = field[row * f + col + 1];
                            let tr = field[(row + 1) * f + col + 1];
                            let tl = field[(row + 1) * f + col];
                            contour_length_in_cell([bl, br, tr, tl], h)
                        })
                        .sum::<f64>()
                })
                .collect();
            // Sequential reduction keeps the result independent of scheduling.
            total += rows.iter().sum::<f64>();
        }
        Ok(total)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RemError::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()? + "\n").map_err(|e| RemError::io(path, e))
    }
}

/// Length of the zero contour inside one marching-squares cell with corner
/// values ordered bottom-left, bottom-right, top-right, top-left.
fn contour_length_in_cell(v: [f64; 4], h: f64) -> f64 {
    let inside = v.map(|z| z >= 0.0);
    if inside.iter().all(|&b| b) || inside.iter().all(|&b| !b) {
        return 0.0;
    }
    // Corner positions in cell-local units.
    const CORNERS: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
    // Edge e joins corner e and corner e+1.
    let crossing: [Option<(f64, f64)>; 4] = std::array::from_fn(|a| {
        let b = (a + 1) % 4;
        (inside[a] != inside[b]).then(|| {
            let t = v[a] / (v[a] - v[b]);
            let (ax, ay) = CORNERS[a];
            let (bx, by) = CORNERS[b];
            (ax + t * (bx - ax), ay + t * (by - ay))
        })
    });
    let seg = |p: (f64, f64), q: (f64, f64)| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
    let hits: Vec<(f64, f64)> = crossing.iter().flatten().copied().collect();
    let len = if hits.len() == 2 {
        seg(hits[0], hits[1])
    } else {
        // Saddle: cut off the two corners whose side differs from the center.
        let center_inside = v.iter().sum::<f64>() / 4.0 >= 0.0;
        (0..4)
            .filter(|&c| inside[c] != center_inside)
            .map(|c| {
                let prev = crossing[(c + 3) % 4].expect("saddle has four crossings");
                let next = crossing[c].expect("saddle has four crossings");
                seg(prev, next)
            })
            .sum()
    };
    len * h
}

/// Parameters for [`generate_scene`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    pub networks: usize,
    pub region_edge: f64,
    pub seed: u64,
    pub radius_min: f64,
    pub radius_max: f64,
    pub disks_per_network: usize,
}

impl Default for SceneParams {
    fn default() -> Self {
        SceneParams {
            networks: 3,
            region_edge: 1.0,
            seed: 0,
            radius_min: 0.15,
            radius_max: 0.3,
            disks_per_network: 1,
        }
    }
}

/// Random scene with disk centers uniform on the region and radii uniform
/// on `[radius_min, radius_max]`. Deterministic in the seed.
pub fn generate_scene(params: &SceneParams) -> Result<CoverageScene> {
    let SceneParams {
        networks,
        region_edge,
        seed,
        radius_min,
        radius_max,
        disks_per_network,
    } = *params;
    if networks == 0 || networks > MAX_NETWORKS {
        return Err(RemError::domain(format!(
            "network count {networks} outside [1, {MAX_NETWORKS}]"
        )));
    }
    if !(region_edge.is_finite() && region_edge > 0.0) {
        return Err(RemError::domain("region edge must be positive"));
    }
    if !(radius_min > 0.0 && radius_min <= radius_max && radius_max.is_finite()) {
        return Err(RemError::domain(format!(
            "invalid radius range [{radius_min}, {radius_max}]"
        )));
    }
    if disks_per_network == 0 {
        return Err(RemError::domain("disks_per_network must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nets = (1..=networks)
        .map(|index| NetworkCoverage {
            index: index as u32,
            disks: (0..disks_per_network)
                .map(|_| {
                    let cx = rng.gen::<f64>() * region_edge;
                    let cy = rng.gen::<f64>() * region_edge;
                    let r = radius_min + rng.gen::<f64>() * (radius_max - radius_min);
                    Disk::new(cx, cy, r)
                })
                .collect(),
        })
        .collect();
    CoverageScene::new(region_edge, nets)
}
