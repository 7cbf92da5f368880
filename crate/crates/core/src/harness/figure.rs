//! Side-by-side REMs for one scene: one sensor per mesh against random
//! deployments at a few densities.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::render::{render_rem, Palette};
use crate::deploy::{build_rem, deploy_one_per_mesh, deploy_random, Rem, Scheme};
use crate::error::Result;
use crate::mesh::{MeshGrid, RegionPartition};
use crate::metrics::{assignment_errors, measured_rem_error, region_rpe};
use crate::scene::CoverageScene;

/// Meshes whose 3x3 neighborhood is crossed by a network boundary.
pub fn boundary_adjacent_meshes(scene: &CoverageScene, grid: &MeshGrid) -> Vec<bool> {
    let arcs = scene.boundary_arcs();
    (0..grid.count())
        .map(|i| {
            let hood = grid.neighborhood(i);
            arcs.iter().any(|a| a.intersects_rect(&hood))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelSummary {
    pub scheme: Scheme,
    pub k: f64,
    pub sensors: usize,
    pub measured_rem_error: f64,
    pub empty_meshes: usize,
    pub erroneous_meshes: usize,
    /// Erroneous meshes that are boundary-adjacent, over all erroneous ones.
    /// 1.0 when there are none.
    pub boundary_adjacent_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter_map: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_map: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonFigure {
    pub mesh_side: usize,
    pub region_rpe: f64,
    pub panels: Vec<PanelSummary>,
}

fn summarize(
    part: &RegionPartition,
    rem: &Rem,
    adjacent: &[bool],
    scheme: Scheme,
    k: f64,
    sensors: usize,
) -> Result<PanelSummary> {
    let errs = assignment_errors(part, rem.assignment())?;
    let wrong: Vec<usize> = (0..errs.len()).filter(|&i| errs[i] > 1e-12).collect();
    let near = wrong.iter().filter(|&&i| adjacent[i]).count();
    Ok(PanelSummary {
        scheme,
        k,
        sensors,
        measured_rem_error: measured_rem_error(part, rem)?,
        empty_meshes: rem.empty_count(),
        erroneous_meshes: wrong.len(),
        boundary_adjacent_fraction: if wrong.is_empty() {
            1.0
        } else {
            near as f64 / wrong.len() as f64
        },
        parameter_map: None,
        error_map: None,
    })
}

/// Builds the one-per-mesh REM and one random REM per entry of `densities`,
/// all from `seed`. With `out_dir`, each panel is also rendered there.
pub fn comparison_figure(
    scene: &CoverageScene,
    side: usize,
    densities: &[f64],
    seed: u64,
    subsamples: usize,
    out_dir: Option<(&Path, usize)>,
) -> Result<ComparisonFigure> {
    let grid = MeshGrid::for_scene(scene, side)?;
    let part = RegionPartition::estimate(scene, &grid, subsamples)?;
    let adjacent = boundary_adjacent_meshes(scene, &grid);
    let palette = Palette::default();

    let mut runs = vec![(
        Scheme::OnePerMesh,
        1.0,
        deploy_one_per_mesh(scene, &grid, seed),
    )];
    for &k in densities {
        let j = (k * grid.count() as f64).round() as usize;
        runs.push((Scheme::Random, k, deploy_random(scene, j, seed)));
    }

    let mut panels = Vec::with_capacity(runs.len());
    for (scheme, k, dep) in runs {
        let rem = build_rem(scene, &grid, &dep, seed);
        let mut panel = summarize(&part, &rem, &adjacent, scheme, k, dep.len())?;
        if let Some((dir, scale)) = out_dir {
            let name = match scheme {
                Scheme::OnePerMesh => "one_per_mesh".to_string(),
                Scheme::Random => format!("random_k{k}"),
            };
            let paths = render_rem(&rem, &part, &palette, &dir.join(name), scale)?;
            panel.parameter_map = Some(paths.parameter_map);
            panel.error_map = Some(paths.error_map);
        }
        panels.push(panel);
    }
    Ok(ComparisonFigure {
        mesh_side: side,
        region_rpe: region_rpe(&part),
        panels,
    })
}
