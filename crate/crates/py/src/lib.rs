//! Python bindings for `rem_core`.

// pyo3 0.22 macros expand `PyResult` returns through `Into`.
#![allow(clippy::useless_conversion)]

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rem_core::bounds::{self, BoundsConfig, SensorCount};
use rem_core::harness::render::{render_rem, Palette};
use rem_core::harness::{compare_schemes, run_sweep, SweepSpec};
use rem_core::metrics::{self, MetricsReport};
use rem_core::{
    build_rem, deploy_one_per_mesh, deploy_random, generate_scene, CoverageScene, MeshDistribution,
    MeshGrid, Point, RegionPartition, RemError, SceneParams, Scheme,
};

fn to_py(e: RemError) -> PyErr {
    match e {
        RemError::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(name = "Scene", module = "rem_py", frozen)]
#[derive(Clone)]
struct PyScene {
    inner: CoverageScene,
}

#[pymethods]
impl PyScene {
    /// Random scene; same arguments as `rem scene gen`.
    #[staticmethod]
    #[pyo3(signature = (networks=3, seed=0, edge=1.0, radius_min=0.15, radius_max=0.3, disks_per_network=1))]
    fn generate(
        networks: usize,
        seed: u64,
        edge: f64,
        radius_min: f64,
        radius_max: f64,
        disks_per_network: usize,
    ) -> PyResult<Self> {
        let params = SceneParams {
            networks,
            region_edge: edge,
            seed,
            radius_min,
            radius_max,
            disks_per_network,
        };
        Ok(PyScene {
            inner: generate_scene(&params).map_err(to_py)?,
        })
    }

    /// Builds a scene from `[[(cx, cy, r), ...], ...]`, one list per network.
    #[new]
    #[pyo3(signature = (networks, edge=1.0))]
    fn new(networks: Vec<Vec<(f64, f64, f64)>>, edge: f64) -> PyResult<Self> {
        let nets = networks
            .into_iter()
            .enumerate()
            .map(|(i, disks)| rem_core::NetworkCoverage {
                index: i as u32 + 1,
                disks: disks
                    .into_iter()
                    .map(|(x, y, r)| rem_core::Disk::new(x, y, r))
                    .collect(),
            })
            .collect();
        Ok(PyScene {
            inner: CoverageScene::new(edge, nets).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyScene {
            inner: CoverageScene::from_json_str(text).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyScene {
            inner: CoverageScene::load(&path).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json_string().map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(to_py)
    }

    #[getter]
    fn num_networks(&self) -> usize {
        self.inner.num_networks()
    }

    #[getter]
    fn num_parameters(&self) -> usize {
        self.inner.num_parameters()
    }

    #[getter]
    fn region_edge(&self) -> f64 {
        self.inner.region_edge()
    }

    fn disks(&self) -> Vec<Vec<(f64, f64, f64)>> {
        self.inner
            .networks()
            .iter()
            .map(|n| n.disks.iter().map(|d| (d.cx, d.cy, d.r)).collect())
            .collect()
    }

    /// Whether network `k` (1-based) is detected at `(x, y)`.
    fn detect(&self, k: usize, x: f64, y: f64) -> PyResult<bool> {
        self.inner.detect(k, Point::new(x, y)).map_err(to_py)
    }

    fn radio_parameter(&self, x: f64, y: f64) -> PyResult<u32> {
        self.inner.radio_parameter(Point::new(x, y)).map_err(to_py)
    }

    fn boundary_length(&self) -> f64 {
        self.inner.boundary_length()
    }

    #[pyo3(signature = (resolution=1024))]
    fn boundary_length_raster(&self, resolution: usize) -> PyResult<f64> {
        self.inner.boundary_length_raster(resolution).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Scene(networks={}, edge={}, xi={:.6})",
            self.inner.num_networks(),
            self.inner.region_edge(),
            self.inner.boundary_length()
        )
    }
}

/// Mesh distributions of a scene on an `m x m` grid.
#[pyclass(name = "Partition", module = "rem_py", frozen)]
struct PyPartition {
    scene: CoverageScene,
    grid: MeshGrid,
    inner: RegionPartition,
}

#[pymethods]
impl PyPartition {
    #[new]
    #[pyo3(signature = (scene, mesh_side, subsamples=32))]
    fn new(scene: &PyScene, mesh_side: usize, subsamples: usize) -> PyResult<Self> {
        let grid = MeshGrid::for_scene(&scene.inner, mesh_side).map_err(to_py)?;
        let inner = RegionPartition::estimate(&scene.inner, &grid, subsamples).map_err(to_py)?;
        Ok(PyPartition {
            scene: scene.inner.clone(),
            grid,
            inner,
        })
    }

    #[getter]
    fn mesh_count(&self) -> usize {
        self.grid.count()
    }

    fn probabilities(&self) -> Vec<Vec<f64>> {
        self.inner
            .meshes()
            .iter()
            .map(|d| d.probs().to_vec())
            .collect()
    }

    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn region_rpe(&self) -> f64 {
        metrics::region_rpe(&self.inner)
    }

    fn region_entropy(&self) -> f64 {
        metrics::region_entropy(&self.inner)
    }

    fn per_mesh_rpe(&self) -> PyResult<Vec<f64>> {
        Ok(MetricsReport::compute(&self.inner, None)
            .map_err(to_py)?
            .per_mesh_rpe)
    }

    /// Deploys sensors, builds the REM and returns it.
    #[pyo3(signature = (scheme="one-per-mesh", k=1.0, seed=0))]
    fn build_rem(&self, scheme: &str, k: f64, seed: u64) -> PyResult<PyRem> {
        let scheme: Scheme = scheme.parse().map_err(to_py)?;
        let dep = match scheme {
            Scheme::OnePerMesh => deploy_one_per_mesh(&self.scene, &self.grid, seed),
            Scheme::Random => {
                if !(k.is_finite() && k > 0.0) {
                    return Err(PyValueError::new_err("k must be positive"));
                }
                deploy_random(
                    &self.scene,
                    (k * self.grid.count() as f64).round() as usize,
                    seed,
                )
            }
        };
        let rem = build_rem(&self.scene, &self.grid, &dep, seed);
        let measured = metrics::measured_rem_error(&self.inner, &rem).map_err(to_py)?;
        Ok(PyRem {
            rem,
            partition: self.inner.clone(),
            sensors: dep.len(),
            measured_error: measured,
        })
    }
}

#[pyclass(name = "Rem", module = "rem_py", frozen)]
struct PyRem {
    rem: rem_core::Rem,
    partition: RegionPartition,
    #[pyo3(get)]
    sensors: usize,
    #[pyo3(get)]
    measured_error: f64,
}

#[pymethods]
impl PyRem {
    fn assignment(&self) -> Vec<u32> {
        self.rem.assignment().to_vec()
    }

    fn filled_randomly(&self) -> Vec<bool> {
        self.rem.filled_randomly().to_vec()
    }

    #[getter]
    fn empty_count(&self) -> usize {
        self.rem.empty_count()
    }

    /// Writes `<prefix>_map.ppm` and `<prefix>_error.pgm`; returns both paths.
    #[pyo3(signature = (prefix, scale=8))]
    fn render(&self, prefix: PathBuf, scale: usize) -> PyResult<(PathBuf, PathBuf)> {
        let out = render_rem(
            &self.rem,
            &self.partition,
            &Palette::default(),
            &prefix,
            scale,
        )
        .map_err(to_py)?;
        Ok((out.parameter_map, out.error_map))
    }
}

fn distribution(probs: Vec<f64>, area: f64) -> PyResult<MeshDistribution> {
    MeshDistribution::new(probs, area).map_err(to_py)
}

#[pyfunction]
fn mesh_rpe(probs: Vec<f64>) -> PyResult<f64> {
    Ok(metrics::mesh_rpe(&distribution(probs, 1.0)?))
}

#[pyfunction]
fn mesh_entropy(probs: Vec<f64>) -> PyResult<f64> {
    Ok(metrics::mesh_entropy(&distribution(probs, 1.0)?))
}

/// Area-weighted merge of two meshes; returns `(probs, area)`.
#[pyfunction]
fn fuse(p1: Vec<f64>, area1: f64, p2: Vec<f64>, area2: f64) -> PyResult<(Vec<f64>, f64)> {
    let d = distribution(p1, area1)?
        .fuse(&distribution(p2, area2)?)
        .map_err(to_py)?;
    Ok((d.probs().to_vec(), d.area()))
}

#[pyfunction]
fn fano_upper_psi(p: f64, n: usize) -> PyResult<f64> {
    bounds::fano_upper_psi(p, n).map_err(to_py)
}

#[pyfunction]
fn feder_merhav_phi(p: f64, n: usize) -> PyResult<f64> {
    bounds::feder_merhav_phi(p, n).map_err(to_py)
}

#[pyfunction]
fn entropy_scaling_upper(xi: f64, edge: f64, n: usize, mesh_count: usize) -> f64 {
    bounds::entropy_scaling_upper(xi, edge, n, mesh_count)
}

#[pyfunction]
fn rpe_scaling_upper(xi: f64, edge: f64, n: usize, mesh_count: usize) -> f64 {
    bounds::rpe_scaling_upper(xi, edge, n, mesh_count)
}

#[pyfunction]
fn kappa(xi: f64, edge: f64) -> f64 {
    bounds::kappa(xi, edge)
}

#[pyfunction]
fn rpe_estimate(xi: f64, edge: f64, mesh_count: usize) -> f64 {
    bounds::rpe_estimate(xi, edge, mesh_count)
}

#[pyfunction]
fn expected_cut_constants() -> (f64, f64) {
    bounds::expected_cut_constants()
}

#[pyfunction]
fn empty_mesh_stats(mesh_count: usize, sensors: u64) -> PyResult<(f64, f64)> {
    bounds::empty_mesh_stats(mesh_count, sensors).map_err(to_py)
}

/// `{"m1": int, "m2": int, "m3": int | None}`; `m3` is None when infeasible.
#[pyfunction]
fn sensor_requirements<'py>(
    py: Python<'py>,
    n: usize,
    xi: f64,
    edge: f64,
    beta: f64,
    k: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let req = bounds::sensor_requirements(&BoundsConfig {
        n,
        xi,
        edge,
        beta,
        k,
    })
    .map_err(to_py)?;
    let out = PyDict::new_bound(py);
    let count = |c: SensorCount| c.count();
    out.set_item("m1", count(req.m1))?;
    out.set_item("m2", count(req.m2))?;
    out.set_item("m3", count(req.m3))?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (samples=1_000_000, seed=0))]
fn mc_line<'py>(py: Python<'py>, samples: u64, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let r = py
        .allow_threads(|| bounds::mc_line_oracle(samples, seed))
        .map_err(to_py)?;
    let out = PyDict::new_bound(py);
    out.set_item("samples", r.samples)?;
    out.set_item("seed", r.seed)?;
    out.set_item("mean_xi", r.mean_xi)?;
    out.set_item("mean_pe", r.mean_pe)?;
    out.set_item("std_err_xi", r.std_err_xi)?;
    out.set_item("std_err_pe", r.std_err_pe)?;
    Ok(out)
}

/// Runs a sweep from a spec JSON string and returns the run record as JSON.
/// With `compare=True` both schemes are paired and requirements tabulated.
#[pyfunction]
#[pyo3(signature = (spec_json, compare=false))]
fn sweep(py: Python<'_>, spec_json: &str, compare: bool) -> PyResult<String> {
    let spec: SweepSpec =
        serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let record = py
        .allow_threads(|| {
            if compare {
                compare_schemes(&spec)
            } else {
                run_sweep(&spec)
            }
        })
        .map_err(to_py)?;
    serde_json::to_string(&record).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn rem_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScene>()?;
    m.add_class::<PyPartition>()?;
    m.add_class::<PyRem>()?;
    m.add_function(wrap_pyfunction!(mesh_rpe, m)?)?;
    m.add_function(wrap_pyfunction!(mesh_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(fuse, m)?)?;
    m.add_function(wrap_pyfunction!(fano_upper_psi, m)?)?;
    m.add_function(wrap_pyfunction!(feder_merhav_phi, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_scaling_upper, m)?)?;
    m.add_function(wrap_pyfunction!(rpe_scaling_upper, m)?)?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(rpe_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(expected_cut_constants, m)?)?;
    m.add_function(wrap_pyfunction!(empty_mesh_stats, m)?)?;
    m.add_function(wrap_pyfunction!(sensor_requirements, m)?)?;
    m.add_function(wrap_pyfunction!(mc_line, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
