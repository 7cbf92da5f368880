//! Experiment driver: sweeps over mesh counts, deployment schemes and
//! densities, with results persisted as CSV plus a JSON run record.

pub mod figure;
pub mod render;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    empty_mesh_stats, entropy_scaling_upper, kappa, rpe_estimate, rpe_scaling_upper,
    sensor_requirements, BoundsConfig, SensorCount,
};
use crate::deploy::{build_rem, deploy_one_per_mesh, deploy_random, Scheme};
use crate::error::{RemError, Result};
use crate::mesh::{MeshGrid, RegionPartition};
use crate::metrics::{measured_rem_error, region_entropy, region_rpe};
use crate::scene::{generate_scene, CoverageScene, SceneParams, DEFAULT_RASTER_RESOLUTION};

pub const RESULTS_CSV: &str = "results.csv";
pub const RUN_JSON: &str = "run.json";

/// Sub-sampling default for sweeps.
pub const SWEEP_SUBSAMPLES: usize = 32;
/// Sub-sampling default for single-REM reports.
pub const REPORT_SUBSAMPLES: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SceneSource {
    File { path: PathBuf },
    Generate(SceneParams),
    Inline { scene: CoverageScene },
}

impl SceneSource {
    pub fn load(&self) -> Result<CoverageScene> {
        match self {
            SceneSource::File { path } => CoverageScene::load(path),
            SceneSource::Generate(p) => generate_scene(p),
            SceneSource::Inline { scene } => Ok(scene.clone()),
        }
    }
}

fn default_betas() -> Vec<f64> {
    vec![0.02, 0.04, 0.06, 0.08, 0.1]
}

fn default_raster() -> usize {
    DEFAULT_RASTER_RESOLUTION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub scene: SceneSource,
    /// Meshes per side `m`; each point uses `M = m^2`.
    pub mesh_sides: Vec<usize>,
    pub schemes: Vec<Scheme>,
    /// Density ratios `k = J/M` for the random scheme.
    #[serde(default)]
    pub k_values: Vec<f64>,
    pub seeds: usize,
    pub master_seed: u64,
    pub subsamples: usize,
    #[serde(default = "default_raster")]
    pub raster_resolution: usize,
    /// Target RPEs for the sensor-requirement table.
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
}

impl SweepSpec {
    pub fn new(scene: SceneSource, mesh_sides: Vec<usize>, schemes: Vec<Scheme>) -> Self {
        SweepSpec {
            scene,
            mesh_sides,
            schemes,
            k_values: vec![1.0],
            seeds: 20,
            master_seed: 0,
            subsamples: SWEEP_SUBSAMPLES,
            raster_resolution: DEFAULT_RASTER_RESOLUTION,
            betas: default_betas(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mesh_sides.is_empty() || self.mesh_sides.contains(&0) {
            return Err(RemError::Config(
                "mesh sides must be non-empty and >= 1".into(),
            ));
        }
        if self.schemes.is_empty() {
            return Err(RemError::Config("at least one scheme is required".into()));
        }
        if self.seeds == 0 {
            return Err(RemError::Config("seeds must be >= 1".into()));
        }
        if self.subsamples == 0 {
            return Err(RemError::Config("subsamples must be >= 1".into()));
        }
        if self.schemes.contains(&Scheme::Random) {
            if self.k_values.is_empty() {
                return Err(RemError::Config(
                    "random scheme needs at least one k".into(),
                ));
            }
            if self.k_values.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
                return Err(RemError::Config("k values must be positive".into()));
            }
        }
        if self.betas.iter().any(|b| !(*b > 0.0 && *b < 1.0)) {
            return Err(RemError::Config("beta values must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// Sweep points in their canonical order.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut pts = Vec::new();
        for &side in &self.mesh_sides {
            for &scheme in &self.schemes {
                let ks: Vec<f64> = match scheme {
                    Scheme::OnePerMesh => vec![1.0],
                    Scheme::Random => self.k_values.clone(),
                };
                for k in ks {
                    for replicate in 0..self.seeds {
                        let index = pts.len() as u64;
                        pts.push(SweepPoint {
                            side,
                            scheme,
                            k,
                            replicate,
                            seed: derive_seed(self.master_seed, index),
                        });
                    }
                }
            }
        }
        pts
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub side: usize,
    pub scheme: Scheme,
    pub k: f64,
    pub replicate: usize,
    pub seed: u64,
}

impl SweepPoint {
    pub fn sensors(&self) -> usize {
        let m = self.side * self.side;
        match self.scheme {
            Scheme::OnePerMesh => m,
            Scheme::Random => (self.k * m as f64).round() as usize,
        }
    }
}

/// SplitMix64 finalizer over `(master, index)`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One row of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheme: Scheme,
    #[serde(rename = "M")]
    pub mesh_count: usize,
    #[serde(rename = "J")]
    pub sensors: usize,
    pub k: f64,
    pub seed: u64,
    pub region_rpe: f64,
    pub measured_rem_error: f64,
    pub region_entropy: f64,
    pub predicted_rpe: f64,
    pub entropy_upper: f64,
    pub rpe_upper: f64,
    pub empty_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Mean and sample standard deviation (0 for a single value).
    pub fn of(values: &[f64]) -> MeanStd {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanStd { mean, std }
    }
}

/// Seed-aggregated results for one `(scheme, M, k)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scheme: Scheme,
    pub mesh_side: usize,
    pub mesh_count: usize,
    pub sensors: usize,
    pub k: f64,
    pub replicates: usize,
    pub region_rpe: MeanStd,
    pub measured_rem_error: MeanStd,
    pub region_entropy: MeanStd,
    pub empty_fraction: MeanStd,
    pub predicted_rpe: f64,
    pub rpe_upper: f64,
    pub entropy_upper: f64,
    /// `(1 - 1/M)^J`
    pub expected_empty_fraction: f64,
    /// `κ/√M + e^{-k}(1 - 1/N)` for the random scheme; `κ/√M` otherwise.
    pub predicted_error_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequirementRow {
    pub beta: f64,
    pub k: f64,
    pub m1: u64,
    pub m2: u64,
    /// `None` when `β ≤ e^{-k}(1 - 1/N)`.
    pub m3: Option<u64>,
}

/// Errors of both schemes at an equal sensor count `J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedResult {
    pub sensors: usize,
    pub one_per_mesh_mesh_count: usize,
    pub one_per_mesh_error: f64,
    pub random_mesh_count: usize,
    pub random_k: f64,
    pub random_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool_version: String,
    pub config: SweepSpec,
    pub scene: CoverageScene,
    pub num_parameters: usize,
    pub xi_analytic: f64,
    pub xi_raster: f64,
    pub kappa: f64,
    pub rows: Vec<SweepRow>,
    pub aggregates: Vec<Aggregate>,
    #[serde(default)]
    pub requirements: Vec<RequirementRow>,
    #[serde(default)]
    pub pairs: Vec<PairedResult>,
    pub wall_clock_secs: f64,
}

impl RunRecord {
    pub fn aggregate(&self, scheme: Scheme, mesh_count: usize, k: f64) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.scheme == scheme && a.mesh_count == mesh_count && a.k == k)
    }

    /// Serializes the rows exactly as written to the results CSV.
    pub fn csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.into_inner()
            .map_err(|e| RemError::Config(format!("csv buffer: {e}")))
    }

    /// Writes `results.csv` and `run.json` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|e| RemError::io(dir, e))?;
        let csv_path = dir.join(RESULTS_CSV);
        std::fs::write(&csv_path, self.csv_bytes()?).map_err(|e| RemError::io(&csv_path, e))?;
        let json_path = dir.join(RUN_JSON);
        let json = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&json_path, json).map_err(|e| RemError::io(&json_path, e))?;
        Ok((csv_path, json_path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RemError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn evaluate_point(
    scene: &CoverageScene,
    grid: &MeshGrid,
    part: &RegionPartition,
    base: &SweepRow,
    point: &SweepPoint,
) -> Result<SweepRow> {
    let dep = match point.scheme {
        Scheme::OnePerMesh => deploy_one_per_mesh(scene, grid, point.seed),
        Scheme::Random => deploy_random(scene, point.sensors(), point.seed),
    };
    let rem = build_rem(scene, grid, &dep, point.seed);
    Ok(SweepRow {
        scheme: point.scheme,
        sensors: dep.len(),
        k: point.k,
        seed: point.seed,
        measured_rem_error: measured_rem_error(part, &rem)?,
        empty_fraction: rem.empty_fraction(),
        ..base.clone()
    })
}

fn aggregate_rows(
    spec: &SweepSpec,
    points: &[SweepPoint],
    rows: &[SweepRow],
    n: usize,
) -> Result<Vec<Aggregate>> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let p0 = points[start];
        let end = start + spec.seeds;
        let group = &rows[start..end];
        let col = |f: fn(&SweepRow) -> f64| group.iter().map(f).collect::<Vec<_>>();
        let first = &group[0];
        let (p_empty, _) = empty_mesh_stats(first.mesh_count, first.sensors as u64)?;
        let bound = match p0.scheme {
            Scheme::OnePerMesh => first.predicted_rpe,
            Scheme::Random => first.predicted_rpe + (-p0.k).exp() * (1.0 - 1.0 / n as f64),
        };
        out.push(Aggregate {
            scheme: p0.scheme,
            mesh_side: p0.side,
            mesh_count: first.mesh_count,
            sensors: first.sensors,
            k: p0.k,
            replicates: group.len(),
            region_rpe: MeanStd::of(&col(|r| r.region_rpe)),
            measured_rem_error: MeanStd::of(&col(|r| r.measured_rem_error)),
            region_entropy: MeanStd::of(&col(|r| r.region_entropy)),
            empty_fraction: MeanStd::of(&col(|r| r.empty_fraction)),
            predicted_rpe: first.predicted_rpe,
            rpe_upper: first.rpe_upper,
            entropy_upper: first.entropy_upper,
            expected_empty_fraction: p_empty,
            predicted_error_bound: bound,
        });
        start = end;
    }
    Ok(out)
}

/// Evaluates every `(m, scheme, k, seed)` point of the sweep.
///
/// The region partition depends only on the scene and `m`, so it is
/// estimated once per mesh count and shared by all points at that count.
/// Points run in parallel and are collected in canonical order, so the
/// output does not depend on scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<RunRecord> {
    spec.validate()?;
    let started = Instant::now();
    let scene = spec.scene.load()?;
    let n = scene.num_parameters();
    let edge = scene.region_edge();
    let xi = scene.boundary_length();
    let xi_raster = scene.boundary_length_raster(spec.raster_resolution)?;
    let points = spec.points();

    let mut contexts = std::collections::HashMap::new();
    for &side in &spec.mesh_sides {
        if contexts.contains_key(&side) {
            continue;
        }
        let grid = MeshGrid::for_scene(&scene, side)?;
        let part = RegionPartition::estimate(&scene, &grid, spec.subsamples)?;
        let m = grid.count();
        let base = SweepRow {
            scheme: Scheme::OnePerMesh,
            mesh_count: m,
            sensors: 0,
            k: 0.0,
            seed: 0,
            region_rpe: region_rpe(&part),
            measured_rem_error: 0.0,
            region_entropy: region_entropy(&part),
            predicted_rpe: rpe_estimate(xi, edge, m),
            entropy_upper: entropy_scaling_upper(xi, edge, n, m),
            rpe_upper: rpe_scaling_upper(xi, edge, n, m),
            empty_fraction: 0.0,
        };
        contexts.insert(side, (grid, part, base));
    }
    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|p| {
            let (grid, part, base) = &contexts[&p.side];
            evaluate_point(&scene, grid, part, base, p)
        })
        .collect::<Result<_>>()?;
    let aggregates = aggregate_rows(spec, &points, &rows, n)?;

    Ok(RunRecord {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: spec.clone(),
        scene,
        num_parameters: n,
        xi_analytic: xi,
        xi_raster,
        kappa: kappa(xi, edge),
        rows,
        aggregates,
        requirements: Vec::new(),
        pairs: Vec::new(),
        wall_clock_secs: started.elapsed().as_secs_f64(),
    })
}

/// Runs both schemes and adds the sensor-requirement table and equal-`J`
/// pairings.
pub fn compare_schemes(spec: &SweepSpec) -> Result<RunRecord> {
    if !(spec.schemes.contains(&Scheme::OnePerMesh) && spec.schemes.contains(&Scheme::Random)) {
        return Err(RemError::Config(
            "compare needs both one-per-mesh and random schemes".into(),
        ));
    }
    let mut record = run_sweep(spec)?;
    let edge = record.scene.region_edge();
    for &beta in &spec.betas {
        for &k in &spec.k_values {
            let req = sensor_requirements(&BoundsConfig {
                n: record.num_parameters,
                xi: record.xi_analytic,
                edge,
                beta,
                k,
            })?;
            let count = |c: SensorCount| c.count().unwrap_or(0);
            record.requirements.push(RequirementRow {
                beta,
                k,
                m1: count(req.m1),
                m2: count(req.m2),
                m3: req.m3.count(),
            });
        }
    }
    let mut pairs = Vec::new();
    for rand in record
        .aggregates
        .iter()
        .filter(|a| a.scheme == Scheme::Random)
    {
        if let Some(opm) = record
            .aggregates
            .iter()
            .find(|a| a.scheme == Scheme::OnePerMesh && a.sensors == rand.sensors)
        {
            pairs.push(PairedResult {
                sensors: rand.sensors,
                one_per_mesh_mesh_count: opm.mesh_count,
                one_per_mesh_error: opm.measured_rem_error.mean,
                random_mesh_count: rand.mesh_count,
                random_k: rand.k,
                random_error: rand.measured_rem_error.mean,
            });
        }
    }
    record.pairs = pairs;
    Ok(record)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SweepSpec {
        let mut spec = SweepSpec::new(
            SceneSource::Generate(SceneParams {
                networks: 3,
                seed: 1,
                ..SceneParams::default()
            }),
            vec![8, 16],
            vec![Scheme::OnePerMesh, Scheme::Random],
        );
        spec.k_values = vec![1.0, 4.0];
        spec.seeds = 3;
        spec.subsamples = 8;
        spec.raster_resolution = 128;
        spec
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    #[test]
    fn sweep_shape_and_determinism() {
        let spec = small_spec();
        let a = run_sweep(&spec).unwrap();
        // 2 sides x (1 + 2 k values) x 3 seeds
        assert_eq!(a.rows.len(), 18);
        assert_eq!(a.aggregates.len(), 6);
        let b = run_sweep(&spec).unwrap();
        assert_eq!(a.csv_bytes().unwrap(), b.csv_bytes().unwrap());
        let header = String::from_utf8(a.csv_bytes().unwrap()).unwrap();
        assert!(header.starts_with(
            "scheme,M,J,k,seed,region_rpe,measured_rem_error,region_entropy,predicted_rpe,entropy_upper,rpe_upper,empty_fraction\n"
        ));
        for row in &a.rows {
            assert!(row.measured_rem_error + 1e-12 >= row.region_rpe);
        }
    }

    #[test]
    fn repeated_side_keeps_point_order() {
        let mut spec = small_spec();
        spec.mesh_sides = vec![8, 16, 8];
        spec.schemes = vec![Scheme::OnePerMesh];
        let rec = run_sweep(&spec).unwrap();
        let ms: Vec<usize> = rec.rows.iter().map(|r| r.mesh_count).collect();
        assert_eq!(ms, vec![64, 64, 64, 256, 256, 256, 64, 64, 64]);
        let seeds: Vec<u64> = spec.points().iter().map(|p| p.seed).collect();
        assert_eq!(rec.rows.iter().map(|r| r.seed).collect::<Vec<_>>(), seeds);
    }

    #[test]
    fn compare_requires_both_schemes() {
        let mut spec = small_spec();
        spec.schemes = vec![Scheme::Random];
        assert!(matches!(compare_schemes(&spec), Err(RemError::Config(_))));
    }

    #[test]
    fn compare_builds_requirements_and_pairs() {
        let mut spec = small_spec();
        spec.mesh_sides = vec![8, 16];
        let rec = compare_schemes(&spec).unwrap();
        assert_eq!(
            rec.requirements.len(),
            spec.betas.len() * spec.k_values.len()
        );
        // J = 256 appears for one-per-mesh at 16x16 and random k=4 at 8x8.
        assert!(rec
            .pairs
            .iter()
            .any(|p| p.sensors == 256 && p.random_k == 4.0 && p.random_mesh_count == 64));
    }

    #[test]
    fn spec_validation() {
        let mut spec = small_spec();
        spec.seeds = 0;
        assert!(run_sweep(&spec).is_err());
        let mut spec = small_spec();
        spec.k_values.clear();
        assert!(spec.validate().is_err());
        let mut spec = small_spec();
        spec.mesh_sides = vec![0];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 4.0, 16.0, 64.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.5)).collect();
        assert!((log_log_slope(&x, &y) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn mean_std() {
        let s = MeanStd::of(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.std - 1.0).abs() < 1e-15);
        assert_eq!(MeanStd::of(&[5.0]).std, 0.0);
    }
}
