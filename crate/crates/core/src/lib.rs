//! Radio environment map (REM) construction over synthetic multi-network
//! coverage scenes, with accuracy metrics and the analytical sensor-count
//! relations they are checked against.

pub mod bounds;
pub mod cli;
pub mod deploy;
pub mod error;
pub mod geom;
pub mod harness;
pub mod mesh;
pub mod metrics;
pub mod scene;

pub use deploy::{build_rem, deploy_one_per_mesh, deploy_random, Deployment, Rem, Scheme, Sensor};
pub use error::{RemError, Result};
pub use geom::{Point, Rect};
pub use mesh::{MeshDistribution, MeshGrid, RegionPartition};
pub use metrics::MetricsReport;
pub use scene::{generate_scene, CoverageScene, Disk, NetworkCoverage, SceneParams};
