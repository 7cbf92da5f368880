//! Sensor deployment schemes and REM construction by per-mesh majority vote.

use std::path::Path;

use rand::distributions::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{RemError, Result};
use crate::geom::Point;
use crate::mesh::MeshGrid;
use crate::scene::CoverageScene;

// Disjoint ChaCha stream ids per purpose. Fill streams are offset by the
// mesh index.
const STREAM_ONE_PER_MESH: u64 = 1;
const STREAM_RANDOM: u64 = 2;
const STREAM_FILL_BASE: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    OnePerMesh,
    Random,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::OnePerMesh => "one-per-mesh",
            Scheme::Random => "random",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = RemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-per-mesh" => Ok(Scheme::OnePerMesh),
            "random" => Ok(Scheme::Random),
            other => Err(RemError::Config(format!(
                "unknown scheme '{other}' (expected one-per-mesh or random)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sensor {
    pub position: Point,
    pub reading: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub scheme: Scheme,
    pub sensors: Vec<Sensor>,
    pub seed: u64,
}

impl Deployment {
    /// `J`
    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    /// Number of sensors falling in each mesh of `grid`.
    pub fn counts_per_mesh(&self, grid: &MeshGrid) -> Vec<u32> {
        let mut counts = vec![0u32; grid.count()];
        for s in &self.sensors {
            counts[grid.locate(s.position)] += 1;
        }
        counts
    }

    /// Writes `mesh_index,x,y,reading` rows; the mesh column is left empty
    /// when no grid is given.
    pub fn write_csv(&self, path: &Path, grid: Option<&MeshGrid>) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| RemError::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["mesh_index", "x", "y", "reading"])?;
        for s in &self.sensors {
            let mesh = grid
                .map(|g| g.locate(s.position).to_string())
                .unwrap_or_default();
            w.write_record([
                mesh,
                s.position.x.to_string(),
                s.position.y.to_string(),
                s.reading.to_string(),
            ])?;
        }
        w.flush().map_err(|e| RemError::io(path, e))?;
        Ok(())
    }
}

fn sensor_at(scene: &CoverageScene, x: f64, y: f64) -> Sensor {
    Sensor {
        position: Point::new(x, y),
        reading: scene.parameter_at(x, y),
    }
}

/// One sensor uniformly at random strictly inside every mesh, in mesh order.
pub fn deploy_one_per_mesh(scene: &CoverageScene, grid: &MeshGrid, seed: u64) -> Deployment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_ONE_PER_MESH);
    let sensors = (0..grid.count())
        .map(|i| {
            let r = grid.rect(i);
            let u: f64 = Open01.sample(&mut rng);
            let v: f64 = Open01.sample(&mut rng);
            sensor_at(scene, r.x0 + u * r.width(), r.y0 + v * r.height())
        })
        .collect();
    Deployment {
        scheme: Scheme::OnePerMesh,
        sensors,
        seed,
    }
}

/// `j` sensors i.i.d. uniform over the region, ignoring mesh boundaries.
pub fn deploy_random(scene: &CoverageScene, j: usize, seed: u64) -> Deployment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_RANDOM);
    let edge = scene.region_edge();
    let sensors = (0..j)
        .map(|_| {
            let x = rng.gen::<f64>() * edge;
            let y = rng.gen::<f64>() * edge;
            sensor_at(scene, x, y)
        })
        .collect();
    Deployment {
        scheme: Scheme::Random,
        sensors,
        seed,
    }
}

/// Per-mesh radio parameter assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rem {
    grid: MeshGrid,
    assignment: Vec<u32>,
    filled_randomly: Vec<bool>,
}

impl Rem {
    pub fn new(grid: MeshGrid, assignment: Vec<u32>, filled_randomly: Vec<bool>) -> Result<Self> {
        if assignment.len() != grid.count() || filled_randomly.len() != grid.count() {
            return Err(RemError::domain(format!(
                "REM vectors must have one entry per mesh ({})",
                grid.count()
            )));
        }
        Ok(Rem {
            grid,
            assignment,
            filled_randomly,
        })
    }

    pub fn grid(&self) -> &MeshGrid {
        &self.grid
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn filled_randomly(&self) -> &[bool] {
        &self.filled_randomly
    }

    pub fn empty_count(&self) -> usize {
        self.filled_randomly.iter().filter(|&&b| b).count()
    }

    pub fn empty_fraction(&self) -> f64 {
        self.empty_count() as f64 / self.grid.count() as f64
    }
}

/// Parameter drawn for an empty mesh; depends only on `(seed, mesh)`.
pub fn random_fill(seed: u64, mesh: usize, n: usize) -> u32 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_FILL_BASE + mesh as u64);
    rng.gen_range(0..n as u32)
}

/// Builds the REM: each mesh takes the most frequent sensor reading inside
/// it (ties to the lowest parameter); meshes without sensors get a uniform
/// random parameter.
pub fn build_rem(scene: &CoverageScene, grid: &MeshGrid, dep: &Deployment, seed: u64) -> Rem {
    let n = scene.num_parameters();
    let mut votes: Vec<(usize, u32)> = dep
        .sensors
        .iter()
        .map(|s| (grid.locate(s.position), s.reading))
        .collect();
    votes.sort_unstable();

    let mut assignment: Vec<Option<u32>> = vec![None; grid.count()];
    let mut idx = 0;
    while idx < votes.len() {
        let mesh = votes[idx].0;
        let mut best = (0usize, 0u32);
        while idx < votes.len() && votes[idx].0 == mesh {
            let reading = votes[idx].1;
            let mut run = 0;
            while idx < votes.len() && votes[idx] == (mesh, reading) {
                run += 1;
                idx += 1;
            }
            // Readings arrive in ascending order, so strict > keeps the lowest on ties.
            if run > best.0 {
                best = (run, reading);
            }
        }
        assignment[mesh] = Some(best.1);
    }

    let filled_randomly: Vec<bool> = assignment.iter().map(Option::is_none).collect();
    let assignment = assignment
        .into_iter()
        .enumerate()
        .map(|(i, a)| a.unwrap_or_else(|| random_fill(seed, i, n)))
        .collect();
    Rem {
        grid: *grid,
        assignment,
        filled_randomly,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{generate_scene, SceneParams};

    fn scene() -> CoverageScene {
        generate_scene(&SceneParams {
            networks: 3,
            seed: 5,
            ..SceneParams::default()
        })
        .unwrap()
    }

    #[test]
    fn one_per_mesh_places_one_sensor_in_each_mesh() {
        let s = scene();
        let g = MeshGrid::for_scene(&s, 8).unwrap();
        let d = deploy_one_per_mesh(&s, &g, 11);
        assert_eq!(d.len(), g.count());
        for (i, sensor) in d.sensors.iter().enumerate() {
            let r = g.rect(i);
            let p = sensor.position;
            assert!(p.x > r.x0 && p.x < r.x1 && p.y > r.y0 && p.y < r.y1);
            assert_eq!(sensor.reading, s.parameter_at(p.x, p.y));
        }
        assert!(d.counts_per_mesh(&g).iter().all(|&c| c == 1));
        assert_eq!(d, deploy_one_per_mesh(&s, &g, 11));
        assert_ne!(d, deploy_one_per_mesh(&s, &g, 12));
    }

    #[test]
    fn random_deployment_counts() {
        let s = scene();
        let g = MeshGrid::for_scene(&s, 8).unwrap();
        let d = deploy_random(&s, 300, 3);
        assert_eq!(d.counts_per_mesh(&g).iter().sum::<u32>(), 300);
        let none = deploy_random(&s, 0, 3);
        let rem = build_rem(&s, &g, &none, 3);
        assert!(rem.filled_randomly().iter().all(|&b| b));
        assert_eq!(rem.empty_fraction(), 1.0);
    }

    #[test]
    fn majority_vote_and_ties() {
        let s = scene();
        let g = MeshGrid::for_scene(&s, 1).unwrap();
        let mk = |readings: &[u32]| Deployment {
            scheme: Scheme::Random,
            sensors: readings
                .iter()
                .map(|&r| Sensor {
                    position: Point::new(0.5, 0.5),
                    reading: r,
                })
                .collect(),
            seed: 0,
        };
        assert_eq!(build_rem(&s, &g, &mk(&[5, 5, 3]), 0).assignment(), &[5]);
        assert_eq!(build_rem(&s, &g, &mk(&[6, 2, 6, 2]), 0).assignment(), &[2]);
        assert_eq!(build_rem(&s, &g, &mk(&[7]), 0).filled_randomly(), &[false]);
    }

    #[test]
    fn one_per_mesh_rem_copies_readings() {
        let s = scene();
        let g = MeshGrid::for_scene(&s, 16).unwrap();
        let d = deploy_one_per_mesh(&s, &g, 4);
        let rem = build_rem(&s, &g, &d, 4);
        assert_eq!(rem.empty_count(), 0);
        for (a, sensor) in rem.assignment().iter().zip(&d.sensors) {
            assert_eq!(*a, sensor.reading);
        }
    }

    #[test]
    fn fill_is_order_independent() {
        assert_eq!(random_fill(9, 17, 8), random_fill(9, 17, 8));
        let draws: Vec<u32> = (0..200).map(|i| random_fill(9, i, 8)).collect();
        assert!(draws.iter().all(|&v| v < 8));
        // Every value shows up over 200 meshes.
        for v in 0..8 {
            assert!(draws.contains(&v));
        }
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("random".parse::<Scheme>().unwrap(), Scheme::Random);
        assert_eq!(
            "one-per-mesh".parse::<Scheme>().unwrap(),
            Scheme::OnePerMesh
        );
        assert!("grid".parse::<Scheme>().is_err());
        assert_eq!(
            serde_json::to_string(&Scheme::OnePerMesh).unwrap(),
            "\"one-per-mesh\""
        );
    }

    #[test]
    fn deployment_csv_export() {
        let s = scene();
        let g = MeshGrid::for_scene(&s, 2).unwrap();
        let d = deploy_one_per_mesh(&s, &g, 1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dep.csv");
        d.write_csv(&path, Some(&g)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("mesh_index,x,y,reading"));
        assert_eq!(lines.count(), 4);
        d.write_csv(&path, None).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with(','));
    }
}
