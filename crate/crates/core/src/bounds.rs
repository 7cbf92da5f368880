//! Analytical relations between mesh count, boundary length, RPE and
//! geographic entropy.
//!
//! Covers the Fano-type upper bound `ψ`, the piecewise-linear Feder–Merhav
//! lower bound `φ`, the `O(1/√M)` scaling bounds, the straight-cut mesh
//! model behind the `κ/√M` estimate (with a Monte Carlo oracle for its
//! constants), sensor-count requirements, and random-deployment statistics.
//!
//! Logarithms are base 2 throughout. Inside the line-cut model the mesh edge
//! is normalized to 1.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{RemError, Result};

/// Slack granted to probability arguments that land a rounding error past
/// the edge of their domain.
const DOMAIN_SLACK: f64 = 1e-12;

fn check_parameter_count(n: usize) -> Result<()> {
    if n < 2 {
        return Err(RemError::domain(format!(
            "parameter count must be >= 2, got {n}"
        )));
    }
    Ok(())
}

fn check_probability(p: f64, n: usize) -> Result<f64> {
    check_parameter_count(n)?;
    let hi = (n - 1) as f64 / n as f64;
    if !p.is_finite() || p < -DOMAIN_SLACK || p > hi + DOMAIN_SLACK {
        return Err(RemError::domain(format!(
            "error probability {p} outside [0, {hi}]"
        )));
    }
    Ok(p.clamp(0.0, hi))
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    h(p) + h(1.0 - p)
}

/// Fano upper bound `ψ(p) = H₂(p) + p·log₂(N−1)` on entropy given error
/// probability `p`.
pub fn fano_upper_psi(p: f64, n: usize) -> Result<f64> {
    let p = check_probability(p, n)?;
    Ok(binary_entropy(p) + p * ((n - 1) as f64).log2())
}

/// Slope and intercept `(a_i, b_i)` of segment `i` of the Feder–Merhav bound:
/// `a_i = i(i+1)·log₂((i+1)/i)`, `b_i = log₂ i`.
pub fn feder_merhav_segment(i: usize) -> (f64, f64) {
    let fi = i as f64;
    (fi * (fi + 1.0) * ((fi + 1.0) / fi).log2(), fi.log2())
}

fn breakpoint(i: usize) -> f64 {
    // Left end (i-1)/i of segment i.
    (i - 1) as f64 / i as f64
}

/// Piecewise-linear lower bound `φ(p)` on entropy given error probability.
///
/// Segment `i` covers `[(i−1)/i, i/(i+1)]` and joins `(.., log₂ i)` to
/// `(.., log₂(i+1))`. It is evaluated as an interpolation between its two
/// endpoint values so the breakpoints, including `φ((N−1)/N) = log₂ N`,
/// come out exact.
pub fn feder_merhav_phi(p: f64, n: usize) -> Result<f64> {
    let p = check_probability(p, n)?;
    let last = n - 1;
    let mut i = ((1.0 / (1.0 - p)).floor() as usize).clamp(1, last);
    while i > 1 && p < breakpoint(i) {
        i -= 1;
    }
    while i < last && p > breakpoint(i + 1) {
        i += 1;
    }
    let lo = breakpoint(i);
    let hi = breakpoint(i + 1);
    let t = (p - lo) / (hi - lo);
    let b_lo = (i as f64).log2();
    let b_hi = ((i + 1) as f64).log2();
    Ok((1.0 - t) * b_lo + t * b_hi)
}

/// Scaling bound `(1/√M)·2√2·ξ·log₂N/√S` on region entropy.
pub fn entropy_scaling_upper(xi: f64, edge: f64, n: usize, mesh_count: usize) -> f64 {
    let s = edge * edge;
    2.0 * SQRT_2 * xi * (n as f64).log2() / (s.sqrt() * (mesh_count as f64).sqrt())
}

/// Bound `(1/√M)·(2√2·ξ·L/S)·(1 − 1/N)` on region RPE.
pub fn rpe_scaling_upper(xi: f64, edge: f64, n: usize, mesh_count: usize) -> f64 {
    let s = edge * edge;
    2.0 * SQRT_2 * xi * edge / s * (1.0 - 1.0 / n as f64) / (mesh_count as f64).sqrt()
}

/// Packing upper bound `2√2·ξ/ε` on the number of impure meshes.
pub fn impure_meshes_packing_upper(xi: f64, epsilon: f64) -> f64 {
    2.0 * SQRT_2 * xi / epsilon
}

/// A straight boundary crossing a unit mesh: angle `θ ∈ [0, π/4]` to the
/// horizontal and distance `x` from the reference vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineCut {
    theta: f64,
    x: f64,
}

impl LineCut {
    pub fn new(theta: f64, x: f64) -> Result<Self> {
        if !(theta.is_finite() && (0.0..=FRAC_PI_4 + DOMAIN_SLACK).contains(&theta)) {
            return Err(RemError::domain(format!(
                "cut angle {theta} outside [0, π/4]"
            )));
        }
        let theta = theta.min(FRAC_PI_4);
        let max = Self::support(theta);
        if !(x.is_finite() && x >= 0.0 && x <= max + DOMAIN_SLACK) {
            return Err(RemError::domain(format!(
                "cut offset {x} outside [0, {max}]"
            )));
        }
        Ok(LineCut {
            theta,
            x: x.min(max),
        })
    }

    /// Upper end `√2·sin(θ+π/4)/2` of the offset range: the line through the
    /// mesh center.
    pub fn support(theta: f64) -> f64 {
        SQRT_2 * (theta + FRAC_PI_4).sin() / 2.0
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// Offset where the cut stops clipping a triangle off the corner.
    pub fn x1(&self) -> f64 {
        self.theta.sin()
    }

    pub fn x2(&self) -> f64 {
        (SQRT_2 * (self.theta + FRAC_PI_4).sin() - 2.0 * self.theta.sin()).max(0.0)
    }

    pub fn x3(&self) -> f64 {
        self.x1()
    }
}

/// Length of the cut inside the unit mesh.
pub fn cut_length(c: &LineCut) -> f64 {
    let (t, x) = (c.theta, c.x);
    if x < c.x1() {
        // Corner triangle; x < sin θ implies θ > 0.
        x * (t.tan() + 1.0 / t.tan())
    } else {
        1.0 / t.cos()
    }
}

/// Area of the minority side of the cut.
pub fn cut_rpe(c: &LineCut) -> f64 {
    let (t, x) = (c.theta, c.x);
    if x < c.x1() {
        x * x / (2.0 * t).sin()
    } else {
        x / t.cos() - t.tan() / 2.0
    }
}

/// Closed-form means `(E[ξ_i], E[p_{e,i}])` of the cut length and cut RPE.
pub fn expected_cut_constants() -> (f64, f64) {
    (expected_cut_length(), expected_cut_rpe())
}

/// `−4√2·tanh⁻¹(1−√2)/π ≈ 0.7935`
pub fn expected_cut_length() -> f64 {
    -4.0 * SQRT_2 * (1.0 - SQRT_2).atanh() / PI
}

/// `(π + ln 64)/(12π) ≈ 0.1937`
pub fn expected_cut_rpe() -> f64 {
    (PI + 64f64.ln()) / (12.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McLineResult {
    pub samples: u64,
    pub seed: u64,
    pub mean_xi: f64,
    pub mean_pe: f64,
    pub std_err_xi: f64,
    pub std_err_pe: f64,
}

const MC_BATCH: u64 = 1 << 16;

/// Monte Carlo means of [`cut_length`] and [`cut_rpe`] with `θ` uniform on
/// `[0, π/4]` and `x | θ` uniform on `[0, √2·sin(θ+π/4)/2]`.
///
/// Samples are split into fixed-size batches, each on its own ChaCha stream,
/// so the result does not depend on thread count.
pub fn mc_line_oracle(samples: u64, seed: u64) -> Result<McLineResult> {
    if samples == 0 {
        return Err(RemError::domain("mc_line_oracle needs at least one sample"));
    }
    let batches = samples.div_ceil(MC_BATCH);
    let partial: Vec<[f64; 4]> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = MC_BATCH.min(samples - b * MC_BATCH);
            let mut acc = [0.0; 4];
            for _ in 0..count {
                let theta = rng.gen::<f64>() * FRAC_PI_4;
                let x = rng.gen::<f64>() * LineCut::support(theta);
                let cut = LineCut { theta, x };
                let xi = cut_length(&cut);
                let pe = cut_rpe(&cut);
                acc[0] += xi;
                acc[1] += xi * xi;
                acc[2] += pe;
                acc[3] += pe * pe;
            }
            acc
        })
        .collect();
    let mut tot = [0.0; 4];
    for a in &partial {
        for (t, v) in tot.iter_mut().zip(a) {
            *t += v;
        }
    }
    let n = samples as f64;
    let mean_xi = tot[0] / n;
    let mean_pe = tot[2] / n;
    let std_err = |sum2: f64, mean: f64| {
        if samples < 2 {
            return 0.0;
        }
        let var = ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    };
    Ok(McLineResult {
        samples,
        seed,
        mean_xi,
        mean_pe,
        std_err_xi: std_err(tot[1], mean_xi),
        std_err_pe: std_err(tot[3], mean_pe),
    })
}

/// Estimated number of impure meshes `K = πξ / (−4√2·tanh⁻¹(1−√2)·ε)`.
pub fn estimate_impure_meshes(xi: f64, epsilon: f64) -> Result<f64> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(RemError::domain("mesh edge must be positive"));
    }
    Ok(PI * xi / (-4.0 * SQRT_2 * (1.0 - SQRT_2).atanh() * epsilon))
}

/// `κ` such that the predicted region RPE is `κ/√M`.
pub fn kappa(xi: f64, edge: f64) -> f64 {
    expected_cut_rpe() * PI * xi / (-4.0 * SQRT_2 * (1.0 - SQRT_2).atanh() * edge)
}

/// Predicted region RPE `κ/√M` for one-mesh-one-sensor deployment.
pub fn rpe_estimate(xi: f64, edge: f64, mesh_count: usize) -> f64 {
    kappa(xi, edge) / (mesh_count as f64).sqrt()
}

/// Predicted RPE bound with `J = kM` randomly placed sensors:
/// `κ/√M + e^{−k}(1 − 1/N)`.
pub fn random_rpe_upper(xi: f64, edge: f64, mesh_count: usize, k: f64, n: usize) -> f64 {
    rpe_estimate(xi, edge, mesh_count) + (-k).exp() * (1.0 - 1.0 / n as f64)
}

/// Probability that a given mesh receives none of `j` uniform sensors, and
/// the expected number of such meshes.
pub fn empty_mesh_stats(mesh_count: usize, j: u64) -> Result<(f64, f64)> {
    if mesh_count == 0 {
        return Err(RemError::domain("mesh count must be at least 1"));
    }
    let q = 1.0 - 1.0 / mesh_count as f64;
    let p0 = match i32::try_from(j) {
        Ok(e) => q.powi(e),
        Err(_) => q.powf(j as f64),
    };
    Ok((p0, mesh_count as f64 * p0))
}

/// A required mesh/sensor count, or a target that cannot be reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensorCount {
    Count(u64),
    Infeasible,
}

impl SensorCount {
    pub fn count(&self) -> Option<u64> {
        match self {
            SensorCount::Count(c) => Some(*c),
            SensorCount::Infeasible => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, SensorCount::Count(_))
    }
}

impl std::fmt::Display for SensorCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SensorCount::Count(c) => write!(f, "{c}"),
            SensorCount::Infeasible => f.write_str("infeasible"),
        }
    }
}

impl Serialize for SensorCount {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SensorCount::Count(c) => s.serialize_u64(*c),
            SensorCount::Infeasible => s.serialize_str("infeasible"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensorRequirements {
    /// From the loose scaling bound.
    pub m1: SensorCount,
    /// From the `κ/√M` estimate, one sensor per mesh.
    pub m2: SensorCount,
    /// Random deployment at density `k`.
    pub m3: SensorCount,
}

/// Inputs shared by the analytical formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsConfig {
    /// Number of radio parameters `N`.
    pub n: usize,
    /// Total boundary length `ξ`.
    pub xi: f64,
    /// Region edge `L`.
    pub edge: f64,
    /// Target RPE `β`.
    pub beta: f64,
    /// Sensor density `k = J/M` for random deployment.
    pub k: f64,
}

impl BoundsConfig {
    pub fn validate(&self) -> Result<()> {
        check_parameter_count(self.n)?;
        if !(self.xi.is_finite() && self.xi >= 0.0) {
            return Err(RemError::domain("boundary length must be non-negative"));
        }
        if !(self.edge.is_finite() && self.edge > 0.0) {
            return Err(RemError::domain("region edge must be positive"));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(RemError::domain(format!(
                "target RPE {} outside (0, 1)",
                self.beta
            )));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(RemError::domain(format!(
                "density ratio {} must be positive",
                self.k
            )));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.edge * self.edge
    }
}

fn ceil_count(v: f64) -> u64 {
    // Absorb rounding that would push an exact integer just above itself.
    let r = v.round();
    if (v - r).abs() <= 1e-9 * v.max(1.0) {
        r as u64
    } else {
        v.ceil() as u64
    }
}

/// Unrounded `(M1, M2, M3)`; `M3` is `None` when the random-fill floor
/// `e^{-k}(1 - 1/N)` already reaches `β`.
pub fn sensor_requirements_real(cfg: &BoundsConfig) -> Result<(f64, f64, Option<f64>)> {
    cfg.validate()?;
    let n = cfg.n as f64;
    let m1 = (2.0 * SQRT_2 * cfg.xi * (n - 1.0) / (cfg.edge * n * cfg.beta)).powi(2);
    let kap = kappa(cfg.xi, cfg.edge);
    let m2 = (kap / cfg.beta).powi(2);
    let slack = cfg.beta - (-cfg.k).exp() * (1.0 - 1.0 / n);
    let m3 = (slack > 0.0).then(|| (kap / slack).powi(2));
    Ok((m1, m2, m3))
}

/// Minimum mesh (sensor) counts for region RPE `≤ β`.
pub fn sensor_requirements(cfg: &BoundsConfig) -> Result<SensorRequirements> {
    let (m1, m2, m3) = sensor_requirements_real(cfg)?;
    Ok(SensorRequirements {
        m1: SensorCount::Count(ceil_count(m1)),
        m2: SensorCount::Count(ceil_count(m2)),
        m3: m3.map_or(SensorCount::Infeasible, |v| {
            SensorCount::Count(ceil_count(v))
        }),
    })
}

/// Every analytical quantity for one configuration, optionally evaluated at
/// a specific mesh count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub config: BoundsConfig,
    pub expected_cut_length: f64,
    pub expected_cut_rpe: f64,
    pub kappa: f64,
    pub psi_at_beta: f64,
    pub phi_at_beta: f64,
    pub requirements: SensorRequirements,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at_mesh_count: Option<MeshCountReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshCountReport {
    pub mesh_count: usize,
    pub predicted_rpe: f64,
    pub rpe_upper: f64,
    pub entropy_upper: f64,
    pub impure_meshes_estimate: f64,
    pub impure_meshes_packing_upper: f64,
    pub psi_at_predicted: Option<f64>,
    pub phi_at_predicted: Option<f64>,
    pub sensors_random: u64,
    pub empty_probability: f64,
    pub expected_empty_meshes: f64,
    pub random_rpe_upper: f64,
}

impl BoundsReport {
    pub fn compute(cfg: &BoundsConfig, mesh_count: Option<usize>) -> Result<Self> {
        cfg.validate()?;
        let (e_xi, e_pe) = expected_cut_constants();
        let beta_p = cfg.beta.min((cfg.n - 1) as f64 / cfg.n as f64);
        let at_mesh_count = match mesh_count {
            None => None,
            Some(0) => return Err(RemError::domain("mesh count must be at least 1")),
            Some(m) => {
                let eps = cfg.edge / (m as f64).sqrt();
                let predicted = rpe_estimate(cfg.xi, cfg.edge, m);
                let j = (cfg.k * m as f64).round() as u64;
                let (p0, empty) = empty_mesh_stats(m, j)?;
                Some(MeshCountReport {
                    mesh_count: m,
                    predicted_rpe: predicted,
                    rpe_upper: rpe_scaling_upper(cfg.xi, cfg.edge, cfg.n, m),
                    entropy_upper: entropy_scaling_upper(cfg.xi, cfg.edge, cfg.n, m),
                    impure_meshes_estimate: estimate_impure_meshes(cfg.xi, eps)?,
                    impure_meshes_packing_upper: impure_meshes_packing_upper(cfg.xi, eps),
                    psi_at_predicted: fano_upper_psi(predicted, cfg.n).ok(),
                    phi_at_predicted: feder_merhav_phi(predicted, cfg.n).ok(),
                    sensors_random: j,
                    empty_probability: p0,
                    expected_empty_meshes: empty,
                    random_rpe_upper: random_rpe_upper(cfg.xi, cfg.edge, m, cfg.k, cfg.n),
                })
            }
        };
        Ok(BoundsReport {
            config: *cfg,
            expected_cut_length: e_xi,
            expected_cut_rpe: e_pe,
            kappa: kappa(cfg.xi, cfg.edge),
            psi_at_beta: fano_upper_psi(beta_p, cfg.n)?,
            phi_at_beta: feder_merhav_phi(beta_p, cfg.n)?,
            requirements: sensor_requirements(cfg)?,
            at_mesh_count,
        })
    }

    /// Aligned two-column text rendering.
    pub fn to_table(&self) -> String {
        let c = &self.config;
        let mut rows: Vec<(String, String)> = vec![
            ("N (radio parameters)".into(), c.n.to_string()),
            ("xi (boundary length)".into(), fmt_num(c.xi)),
            ("L (region edge)".into(), fmt_num(c.edge)),
            ("beta (target RPE)".into(), fmt_num(c.beta)),
            ("k (sensor density)".into(), fmt_num(c.k)),
            ("E[xi_i]".into(), fmt_num(self.expected_cut_length)),
            ("E[p_e,i]".into(), fmt_num(self.expected_cut_rpe)),
            ("kappa".into(), fmt_num(self.kappa)),
            ("psi(beta)".into(), fmt_num(self.psi_at_beta)),
            ("phi(beta)".into(), fmt_num(self.phi_at_beta)),
            (
                "M1 (scaling bound)".into(),
                self.requirements.m1.to_string(),
            ),
            ("M2 (one per mesh)".into(), self.requirements.m2.to_string()),
            ("M3 (random)".into(), self.requirements.m3.to_string()),
        ];
        if let Some(m) = &self.at_mesh_count {
            let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_else(|| "n/a".into());
            rows.extend([
                ("M (mesh count)".into(), m.mesh_count.to_string()),
                ("predicted RPE".into(), fmt_num(m.predicted_rpe)),
                ("RPE scaling bound".into(), fmt_num(m.rpe_upper)),
                ("entropy scaling bound".into(), fmt_num(m.entropy_upper)),
                ("K estimate".into(), fmt_num(m.impure_meshes_estimate)),
                (
                    "K packing bound".into(),
                    fmt_num(m.impure_meshes_packing_upper),
                ),
                ("psi(predicted)".into(), opt(m.psi_at_predicted)),
                ("phi(predicted)".into(), opt(m.phi_at_predicted)),
                ("J = kM".into(), m.sensors_random.to_string()),
                ("p0 (empty mesh)".into(), fmt_num(m.empty_probability)),
                (
                    "expected empty meshes".into(),
                    fmt_num(m.expected_empty_meshes),
                ),
                ("random RPE bound".into(), fmt_num(m.random_rpe_upper)),
            ]);
        }
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        rows.iter()
            .map(|(k, v)| format!("{k:<width$}  {v}\n"))
            .collect()
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v:.6}")
}
