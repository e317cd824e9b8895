//! Gaussian RBF network with fixed centers and a shared width, trained by the
//! gradient law with switching δ-modification.

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::par::{self, Execution};
use crate::{Error, Result};

/// Linearly parametrized RBF network: `ŴᵀS(Z)` with
/// `S_j(Z) = exp(−‖Z − μ_j‖² / σ²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbfNetwork {
    #[serde(rename = "sigma")]
    pub width: f64,
    /// m × p node positions.
    pub centers: Matrix,
    /// m × n output weights; column `i` feeds output `i`.
    pub weights: Matrix,
}

/// Learning-law constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptConfig {
    /// Learning rate Γ.
    pub gamma: f64,
    /// Leakage δ₀ applied once `‖Ŵ_i‖ ≥ W₀`. Zero disables leakage.
    pub delta0: f64,
    /// Switching threshold W₀. May be `+∞` in code (not representable in JSON).
    pub w0: f64,
}

impl AdaptConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::invalid(format!("adapt.gamma must be non-negative, got {}", self.gamma)));
        }
        if !(self.delta0.is_finite() && self.delta0 >= 0.0) {
            return Err(Error::invalid(format!("adapt.delta0 must be non-negative, got {}", self.delta0)));
        }
        if !(self.w0 > 0.0) {
            return Err(Error::invalid(format!("adapt.w0 must be positive, got {}", self.w0)));
        }
        Ok(())
    }

    /// Leakage for a weight column of norm `norm`; the boundary `norm == W₀` leaks.
    pub fn leakage(&self, norm: f64) -> f64 {
        if norm < self.w0 {
            0.0
        } else {
            self.delta0
        }
    }
}

impl RbfNetwork {
    /// Network with zero weights for `outputs` outputs.
    pub fn new(centers: Matrix, width: f64, outputs: usize) -> Result<Self> {
        let m = centers.rows();
        let net = RbfNetwork {
            width,
            centers,
            weights: Matrix::zeros(m, outputs),
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.centers.rows();
        if m == 0 || self.centers.cols() == 0 {
            return Err(Error::invalid("network needs at least one center of positive dimension"));
        }
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::invalid(format!("sigma must be positive, got {}", self.width)));
        }
        if self.weights.rows() != m || self.weights.cols() == 0 {
            return Err(Error::invalid(format!(
                "weights are {}x{}, expected {m} rows and at least one column",
                self.weights.rows(),
                self.weights.cols()
            )));
        }
        if !self.centers.all_finite() || !self.weights.all_finite() {
            return Err(Error::invalid("network contains non-finite values"));
        }
        Ok(())
    }

    /// Rejects coincident centers. Kept separate from [`validate`](Self::validate)
    /// because rank-deficient networks are legitimate inputs to excitation analysis.
    pub fn validate_distinct(&self) -> Result<()> {
        if self.centers.rows() >= 2 && separation_distance(&self.centers)? == 0.0 {
            return Err(Error::invalid("network has coincident centers"));
        }
        Ok(())
    }

    pub fn nodes(&self) -> usize {
        self.centers.rows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn input_dim(&self) -> usize {
        self.centers.cols()
    }

    pub fn activations(&self, z: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.nodes()];
        self.activations_into(z, &mut s);
        s
    }

    /// Writes `S(z)` into `out` (length m).
    pub fn activations_into(&self, z: &[f64], out: &mut [f64]) {
        debug_assert_eq!(z.len(), self.input_dim());
        let inv = 1.0 / (self.width * self.width);
        for (s, mu) in out.iter_mut().zip(self.centers.iter_rows()) {
            let d2: f64 = mu.iter().zip(z).map(|(a, b)| (b - a) * (b - a)).sum();
            *s = (-d2 * inv).exp();
        }
    }

    /// `ŴᵀS(z)`.
    pub fn output(&self, z: &[f64]) -> Vec<f64> {
        self.output_from_activations(&self.activations(z))
    }

    /// `Ŵᵀs` for precomputed activations.
    pub fn output_from_activations(&self, s: &[f64]) -> Vec<f64> {
        let n = self.outputs();
        let mut y = vec![0.0; n];
        for (sj, w) in s.iter().zip(self.weights.iter_rows()) {
            for (yi, wi) in y.iter_mut().zip(w) {
                *yi += wi * sj;
            }
        }
        y
    }

    /// Weights after one explicit-Euler step of
    /// `Ŵ̇_i = Γ (S e2_i − δ_i Ŵ_i)`, leaving `self` untouched.
    pub fn adapted_weights(&self, cfg: &AdaptConfig, s: &[f64], e2: &[f64], dt: f64) -> Matrix {
        let mut w = self.weights.clone();
        adapt_weights(&mut w, cfg, s, e2, dt);
        w
    }

    /// In-place version of [`adapted_weights`](Self::adapted_weights) for the
    /// single owner of a network during a run.
    pub fn adapt(&mut self, cfg: &AdaptConfig, s: &[f64], e2: &[f64], dt: f64) {
        adapt_weights(&mut self.weights, cfg, s, e2, dt);
    }
}

fn adapt_weights(w: &mut Matrix, cfg: &AdaptConfig, s: &[f64], e2: &[f64], dt: f64) {
    let n = w.cols();
    debug_assert_eq!(e2.len(), n);
    debug_assert_eq!(s.len(), w.rows());
    let mut leak = [0.0; 8];
    let mut leak_vec;
    let leak: &mut [f64] = if n <= leak.len() {
        &mut leak[..n]
    } else {
        leak_vec = vec![0.0; n];
        &mut leak_vec
    };
    for (i, l) in leak.iter_mut().enumerate() {
        *l = cfg.leakage(w.column_norm(i));
    }
    for (j, sj) in s.iter().enumerate() {
        let row = w.row_mut(j);
        for i in 0..n {
            row[i] += cfg.gamma * (sj * e2[i] - leak[i] * row[i]) * dt;
        }
    }
}

/// Cartesian product of per-dimension levels; the last dimension varies fastest.
pub fn lattice_centers(levels: &[Vec<f64>]) -> Result<Matrix> {
    if levels.is_empty() {
        return Err(Error::invalid("lattice needs at least one dimension"));
    }
    if let Some(d) = levels.iter().position(|l| l.is_empty()) {
        return Err(Error::invalid(format!("lattice dimension {d} has no levels")));
    }
    let p = levels.len();
    let m: usize = levels.iter().map(Vec::len).product();
    let mut data = Vec::with_capacity(m * p);
    let mut idx = vec![0usize; p];
    for _ in 0..m {
        data.extend(idx.iter().zip(levels).map(|(&k, l)| l[k]));
        for d in (0..p).rev() {
            idx[d] += 1;
            if idx[d] < levels[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    Matrix::from_vec(m, p, data)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Minimum pairwise distance between centers.
pub fn separation_distance(centers: &Matrix) -> Result<f64> {
    separation_distance_with(Execution::default(), centers)
}

pub fn separation_distance_with(exec: Execution, centers: &Matrix) -> Result<f64> {
    let m = centers.rows();
    if m < 2 {
        return Err(Error::NotApplicable(format!(
            "separation distance needs at least two centers, got {m}"
        )));
    }
    let per_row = par::map_range(exec, m - 1, |j| {
        let a = centers.row(j);
        ((j + 1)..m)
            .map(|k| distance(a, centers.row(k)))
            .fold(f64::INFINITY, f64::min)
    });
    Ok(per_row.into_iter().fold(f64::INFINITY, f64::min))
}

/// `max_Z min_j ‖Z − μ_j‖` over the given samples.
pub fn fill_distance<S: AsRef<[f64]> + Sync>(centers: &Matrix, samples: &[S]) -> Result<f64> {
    fill_distance_with(Execution::default(), centers, samples)
}

pub fn fill_distance_with<S: AsRef<[f64]> + Sync>(
    exec: Execution,
    centers: &Matrix,
    samples: &[S],
) -> Result<f64> {
    if centers.rows() == 0 || samples.is_empty() {
        return Err(Error::invalid("fill distance needs centers and samples"));
    }
    if let Some(bad) = samples.iter().position(|s| s.as_ref().len() != centers.cols()) {
        return Err(Error::invalid(format!(
            "sample {bad} has dimension {}, centers have {}",
            samples[bad].as_ref().len(),
            centers.cols()
        )));
    }
    let nearest = par::map_slice(exec, samples, |z| {
        centers
            .iter_rows()
            .map(|mu| distance(z.as_ref(), mu))
            .fold(f64::INFINITY, f64::min)
    });
    Ok(nearest.into_iter().fold(0.0, f64::max))
}
