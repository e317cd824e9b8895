//! Lloyd K-means over sampled trajectory inputs, used to place hidden nodes
//! along the desired trajectory.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::par::{self, Execution};
use crate::{Error, Result};

/// Half-width of the box around the origin used by [`KmeansInit::NearZero`].
pub const NEAR_ZERO_RADIUS: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KmeansInit {
    /// Centers uniform in `[−0.01, 0.01]^p`.
    #[default]
    NearZero,
    /// Centers at distinct randomly chosen samples.
    RandomDataPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KmeansConfig {
    pub m: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub init: KmeansInit,
}

fn default_max_iters() -> usize {
    500
}

fn default_tol() -> f64 {
    1e-9
}

impl KmeansConfig {
    pub fn new(m: usize, seed: u64) -> Self {
        KmeansConfig {
            m,
            seed,
            max_iters: default_max_iters(),
            tol: default_tol(),
            init: KmeansInit::NearZero,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("kmeans needs at least one cluster"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("kmeans max_iters must be at least 1"));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::invalid(format!("kmeans tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansResult {
    pub centers: Matrix,
    /// Cluster index of each sample; every cluster is nonempty.
    pub assignments: Vec<usize>,
    /// Final `J(μ)`: sum of squared distances to the nearest center.
    pub objective: f64,
    pub iterations: usize,
    /// `J` after each iteration, non-increasing.
    pub history: Vec<f64>,
    pub converged: bool,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index and squared distance of the nearest center; ties go to the lower index.
fn nearest(centers: &Matrix, z: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, mu) in centers.iter_rows().enumerate() {
        let d = sq_dist(z, mu);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// `J = Σ_i min_j ‖Z_i − μ_j‖²`.
pub fn objective(centers: &Matrix, data: &Matrix) -> f64 {
    data.iter_rows().map(|z| nearest(centers, z).1).sum()
}

pub fn kmeans(data: &Matrix, config: &KmeansConfig) -> Result<KmeansResult> {
    kmeans_with(Execution::default(), data, config)
}

pub fn kmeans_with(exec: Execution, data: &Matrix, config: &KmeansConfig) -> Result<KmeansResult> {
    config.validate()?;
    let (n, p, m) = (data.rows(), data.cols(), config.m);
    if n < m {
        return Err(Error::InsufficientData { samples: n, clusters: m });
    }
    if p == 0 || !data.all_finite() {
        return Err(Error::invalid("kmeans data must be finite with positive dimension"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut centers = match config.init {
        KmeansInit::NearZero => {
            let v = (0..m * p)
                .map(|_| rng.random_range(-NEAR_ZERO_RADIUS..NEAR_ZERO_RADIUS))
                .collect();
            Matrix::from_vec(m, p, v)?
        }
        KmeansInit::RandomDataPoint => {
            let picks = index::sample(&mut rng, n, m);
            let rows: Vec<&[f64]> = picks.iter().map(|i| data.row(i)).collect();
            Matrix::from_rows(&rows)?
        }
    };

    let mut history = Vec::new();
    let mut assignments = vec![0usize; n];
    let mut iterations = 0;
    let mut converged = false;
    let mut prev_j = f64::INFINITY;

    while iterations < config.max_iters {
        iterations += 1;
        let near = par::map_range(exec, n, |i| nearest(&centers, data.row(i)));
        let mut dist: Vec<f64> = near.iter().map(|&(_, d)| d).collect();
        for (a, &(j, _)) in assignments.iter_mut().zip(&near) {
            *a = j;
        }
        repair_empty_clusters(data, &mut centers, &mut assignments, &mut dist);

        let mut next = Matrix::zeros(m, p);
        let mut counts = vec![0usize; m];
        for (i, &j) in assignments.iter().enumerate() {
            counts[j] += 1;
            for (acc, v) in next.row_mut(j).iter_mut().zip(data.row(i)) {
                *acc += v;
            }
        }
        for (j, &c) in counts.iter().enumerate() {
            let inv = 1.0 / c as f64;
            next.row_mut(j).iter_mut().for_each(|v| *v *= inv);
        }

        let shift = (0..m)
            .map(|j| sq_dist(centers.row(j), next.row(j)).sqrt())
            .fold(0.0, f64::max);
        centers = next;

        let j_now = objective(&centers, data);
        debug_assert!(
            j_now <= prev_j * (1.0 + 1e-12) + 1e-300,
            "K-means objective increased: {prev_j} -> {j_now}"
        );
        prev_j = j_now;
        history.push(j_now);

        if shift < config.tol {
            converged = true;
            break;
        }
    }

    Ok(KmeansResult {
        objective: prev_j,
        centers,
        assignments,
        iterations,
        history,
        converged,
    })
}

/// Moves, for each empty cluster in index order, the sample that lies farthest
/// from its own center (among clusters with more than one member) into the
/// empty cluster and reseeds that center on it.
fn repair_empty_clusters(data: &Matrix, centers: &mut Matrix, assignments: &mut [usize], dist: &mut [f64]) {
    let m = centers.rows();
    let mut counts = vec![0usize; m];
    for &j in assignments.iter() {
        counts[j] += 1;
    }
    for empty in 0..m {
        if counts[empty] > 0 {
            continue;
        }
        let mut far: Option<(usize, f64)> = None;
        for (i, (&j, &d)) in assignments.iter().zip(dist.iter()).enumerate() {
            if counts[j] > 1 && far.is_none_or(|(_, fd)| d > fd) {
                far = Some((i, d));
            }
        }
        // n ≥ m guarantees a donor cluster with at least two members
        let (i, _) = far.expect("no donor sample for empty cluster");
        counts[assignments[i]] -= 1;
        counts[empty] = 1;
        assignments[i] = empty;
        dist[i] = 0.0;
        centers.row_mut(empty).copy_from_slice(data.row(i));
    }
}
