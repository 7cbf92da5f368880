//! Radio-parameter error (RPE) and geographic entropy.
//!
//! All entropies are in bits.

use serde::{Deserialize, Serialize};

use crate::deploy::Rem;
use crate::error::{RemError, Result};
use crate::mesh::{MeshDistribution, RegionPartition};

/// `1 - max_j p_j`
pub fn mesh_rpe(d: &MeshDistribution) -> f64 {
    1.0 - d.probs().iter().copied().fold(0.0, f64::max)
}

/// Shannon entropy of the mesh's parameter-area distribution, `0 log 0 = 0`.
pub fn mesh_entropy(d: &MeshDistribution) -> f64 {
    entropy_bits(d.probs())
}

pub fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.log2())
        .sum::<f64>()
}

fn weighted<F: Fn(&MeshDistribution) -> f64>(part: &RegionPartition, f: F) -> f64 {
    part.meshes()
        .iter()
        .zip(part.weights())
        .map(|(d, w)| w * f(d))
        .sum()
}

pub fn region_rpe(part: &RegionPartition) -> f64 {
    weighted(part, mesh_rpe)
}

pub fn region_entropy(part: &RegionPartition) -> f64 {
    weighted(part, mesh_entropy)
}

/// Per-mesh error `1 - p_{i, j_i}` of an arbitrary assignment.
pub fn assignment_errors(part: &RegionPartition, assignment: &[u32]) -> Result<Vec<f64>> {
    if assignment.len() != part.len() {
        return Err(RemError::domain(format!(
            "assignment covers {} meshes, partition has {}",
            assignment.len(),
            part.len()
        )));
    }
    let n = part.num_parameters();
    part.meshes()
        .iter()
        .zip(assignment)
        .map(|(d, &j)| {
            let j = j as usize;
            if j >= n {
                return Err(RemError::domain(format!(
                    "assigned parameter {j} outside [0, {n})"
                )));
            }
            Ok(1.0 - d.probs()[j])
        })
        .collect()
}

/// Area-weighted error of a constructed REM against the ground-truth
/// distributions. Equals [`region_rpe`] when every mesh gets its majority.
pub fn measured_rem_error(part: &RegionPartition, rem: &Rem) -> Result<f64> {
    let errs = assignment_errors(part, rem.assignment())?;
    Ok(errs.iter().zip(part.weights()).map(|(e, w)| e * w).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub region_rpe: f64,
    pub region_entropy: f64,
    pub per_mesh_rpe: Vec<f64>,
    pub per_mesh_entropy: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured_rem_error: Option<f64>,
}

impl MetricsReport {
    pub fn compute(part: &RegionPartition, rem: Option<&Rem>) -> Result<Self> {
        let per_mesh_rpe: Vec<f64> = part.meshes().iter().map(mesh_rpe).collect();
        let per_mesh_entropy: Vec<f64> = part.meshes().iter().map(mesh_entropy).collect();
        let dot = |v: &[f64]| {
            v.iter()
                .zip(part.weights())
                .map(|(x, w)| x * w)
                .sum::<f64>()
        };
        Ok(MetricsReport {
            region_rpe: dot(&per_mesh_rpe),
            region_entropy: dot(&per_mesh_entropy),
            per_mesh_rpe,
            per_mesh_entropy,
            measured_rem_error: rem.map(|r| measured_rem_error(part, r)).transpose()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::MeshGrid;

    fn dist(p: &[f64]) -> MeshDistribution {
        MeshDistribution::new(p.to_vec(), 1.0).unwrap()
    }

    fn regular(meshes: Vec<MeshDistribution>) -> RegionPartition {
        let total = meshes.iter().map(MeshDistribution::area).sum();
        RegionPartition::new(meshes, total).unwrap()
    }

    #[test]
    fn mesh_rpe_examples() {
        assert_eq!(mesh_rpe(&MeshDistribution::pure(4, 2, 1.0).unwrap()), 0.0);
        assert!((mesh_rpe(&dist(&[0.25; 4])) - 0.75).abs() < 1e-15);
        assert!((mesh_rpe(&dist(&[0.6, 0.4])) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn mesh_entropy_examples() {
        assert_eq!(mesh_entropy(&dist(&[0.5, 0.5])), 1.0);
        assert_eq!(
            mesh_entropy(&MeshDistribution::pure(8, 3, 1.0).unwrap()),
            0.0
        );
        assert_eq!(mesh_entropy(&dist(&[0.5, 0.25, 0.25])), 1.5);
    }

    #[test]
    fn region_rpe_examples() {
        let pure = regular(vec![MeshDistribution::pure(2, 0, 1.0).unwrap(); 4]);
        assert_eq!(region_rpe(&pure), 0.0);
        assert_eq!(region_entropy(&pure), 0.0);
        let two = regular(vec![dist(&[0.9, 0.1]), dist(&[0.7, 0.3])]);
        assert!((region_rpe(&two) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn region_entropy_one_bit_mesh() {
        let m = 16;
        let mut meshes = vec![MeshDistribution::pure(2, 0, 1.0).unwrap(); m];
        meshes[5] = dist(&[0.5, 0.5]);
        let part = regular(meshes);
        assert!((region_entropy(&part) - 1.0 / m as f64).abs() < 1e-15);
    }

    #[test]
    fn measured_error_of_assignments() {
        let part = regular(vec![dist(&[0.7, 0.3]), dist(&[0.2, 0.8])]);
        let errs = assignment_errors(&part, &[1, 1]).unwrap();
        assert!((errs[0] - 0.7).abs() < 1e-15);
        assert!((errs[1] - 0.2).abs() < 1e-15);
        assert!(assignment_errors(&part, &[0, 2]).is_err());
        assert!(assignment_errors(&part, &[0]).is_err());

        let grid = MeshGrid::new(2f64.sqrt(), 1).unwrap();
        let single = Rem::new(grid, vec![0], vec![false]).unwrap();
        assert!(measured_rem_error(&part, &single).is_err());
    }

    #[test]
    fn majority_assignment_matches_region_rpe() {
        let part = regular(vec![
            dist(&[0.7, 0.3]),
            dist(&[0.2, 0.8]),
            dist(&[0.5, 0.5]),
            dist(&[0.0, 1.0]),
        ]);
        let grid = MeshGrid::new(2.0, 2).unwrap();
        let majority: Vec<u32> = part.meshes().iter().map(|d| d.majority() as u32).collect();
        let rem = Rem::new(grid, majority, vec![false; 4]).unwrap();
        assert!((measured_rem_error(&part, &rem).unwrap() - region_rpe(&part)).abs() < 1e-15);
    }

    #[test]
    fn report_is_consistent() {
        let part = regular(vec![
            dist(&[0.7, 0.3]),
            dist(&[0.5, 0.5]),
            dist(&[1.0, 0.0]),
            dist(&[0.1, 0.9]),
        ]);
        let rep = MetricsReport::compute(&part, None).unwrap();
        assert!((rep.region_rpe - region_rpe(&part)).abs() < 1e-12);
        assert!((rep.region_entropy - region_entropy(&part)).abs() < 1e-12);
        assert!(rep.measured_rem_error.is_none());
    }
}
