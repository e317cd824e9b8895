//! Excitation Gramian `∫ S(Z_d(τ)) S(Z_d(τ))ᵀ dτ` of a node distribution along
//! a trajectory, and its extreme eigenvalues (upper bound α₁, level α₂).

use serde::Serialize;

use crate::matrix::Matrix;
use crate::par::{self, Execution};
use crate::rbfnet::{self, RbfNetwork};
use crate::trajectory::TrajectorySpec;
use crate::{Error, Result};

/// Largest tolerated `|A_ij − A_ji|` for [`pe_levels`].
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Jacobi stops once the off-diagonal Frobenius norm falls below this
/// fraction of the full Frobenius norm.
pub const JACOBI_TOL: f64 = 1e-11;
/// PE verdict threshold per second of window: `α₂ > 1e−8 · T0`.
pub const PE_THRESHOLD_PER_SECOND: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct ExcitationReport {
    #[serde(skip)]
    pub gramian: Matrix,
    pub nodes: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub t0: f64,
    #[serde(rename = "T0")]
    pub window: f64,
    pub dt: f64,
    /// `None` for a single node.
    pub separation: Option<f64>,
    pub fill: f64,
    pub threshold: f64,
    pub persistently_exciting: bool,
}

/// Trapezoidal quadrature of `S Sᵀ` over `[t0, t0 + T0]`.
///
/// The window is split into `ceil(T0/dt)` equal steps, so the effective step
/// is at most `dt`.
pub fn excitation_gramian(net: &RbfNetwork, spec: &TrajectorySpec, t0: f64, window: f64, dt: f64) -> Result<Matrix> {
    excitation_gramian_with(Execution::default(), net, spec, t0, window, dt)
}

pub fn excitation_gramian_with(
    exec: Execution,
    net: &RbfNetwork,
    spec: &TrajectorySpec,
    t0: f64,
    window: f64,
    dt: f64,
) -> Result<Matrix> {
    let (steps, h) = quadrature_grid(window, dt)?;
    if !t0.is_finite() {
        return Err(Error::invalid("t0 must be finite"));
    }
    let m = net.nodes();
    // Rows of S, pre-scaled by sqrt of the trapezoid weight.
    let samples: Vec<Vec<f64>> = par::map_range(exec, steps + 1, |k| {
        let t = t0 + window * (k as f64 / steps as f64);
        let w = if k == 0 || k == steps { 0.5 * h } else { h };
        let mut s = net.activations(&spec.sample(t).as_input());
        let r = w.sqrt();
        s.iter_mut().for_each(|v| *v *= r);
        s
    });

    let mut g = Matrix::zeros(m, m);
    // Each row j sums over time in a fixed order, independent of scheduling.
    par::for_each_chunk_mut(exec, g.as_mut_slice(), m, |j, row| {
        for s in &samples {
            let sj = s[j];
            if sj == 0.0 {
                continue;
            }
            for (gk, sk) in row[j..].iter_mut().zip(&s[j..]) {
                *gk += sj * sk;
            }
        }
    });
    for j in 0..m {
        for k in (j + 1)..m {
            g[(k, j)] = g[(j, k)];
        }
    }
    Ok(g)
}

fn quadrature_grid(window: f64, dt: f64) -> Result<(usize, f64)> {
    if !(window.is_finite() && window > 0.0) {
        return Err(Error::invalid(format!("window T0 must be positive, got {window}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid(format!("quadrature step must be positive, got {dt}")));
    }
    if dt >= window {
        return Err(Error::invalid(format!("quadrature step {dt} must be smaller than the window {window}")));
    }
    let steps = (window / dt - 1e-9).ceil() as usize;
    Ok((steps, window / steps as f64))
}

/// `(α₁, α₂)` = (largest, smallest) eigenvalue of a symmetric matrix.
pub fn pe_levels(gramian: &Matrix) -> Result<(f64, f64)> {
    let eig = symmetric_eigenvalues(gramian)?;
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((hi, lo))
}

/// Eigenvalues (unsorted) of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::invalid(format!("matrix is {}x{}, expected square", a.rows(), a.cols())));
    }
    if a.rows() == 0 {
        return Err(Error::invalid("empty matrix"));
    }
    if !a.all_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let asym = a.max_asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::NonSymmetric { asymmetry: asym });
    }
    Ok(jacobi_eigenvalues(a, JACOBI_TOL))
}

const JACOBI_MAX_SWEEPS: usize = 100;

fn jacobi_eigenvalues(input: &Matrix, tol: f64) -> Vec<f64> {
    let n = input.rows();
    let mut a = input.clone();
    // Symmetrize so that row updates can stand in for column updates.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let total = a.frobenius_norm();
    if total == 0.0 {
        return vec![0.0; n];
    }
    let target = tol * total;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, p, q);
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for (j, v) in a.row(i).iter().enumerate() {
            if i != j {
                s += v * v;
            }
        }
    }
    s.sqrt()
}

/// Annihilates `a[p][q]` with a plane rotation applied from both sides.
fn rotate(a: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    // Skip entries already negligible against both diagonal entries.
    if apq.abs() < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = 0.0;
        a[(q, p)] = 0.0;
        return;
    }
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    let n = a.rows();
    let cols = a.cols();
    let data = a.as_mut_slice();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        // rows p and q mirror columns p and q; read them contiguously
        let akp = data[p * cols + k];
        let akq = data[q * cols + k];
        let new_kp = akp - s * (akq + tau * akp);
        let new_kq = akq + s * (akp - tau * akq);
        data[k * cols + p] = new_kp;
        data[k * cols + q] = new_kq;
        data[p * cols + k] = new_kp;
        data[q * cols + k] = new_kq;
    }
    data[p * cols + p] = app - t * apq;
    data[q * cols + q] = aqq + t * apq;
    data[p * cols + q] = 0.0;
    data[q * cols + p] = 0.0;
}

/// Gramian, PE levels and node-distribution geometry in one report.
pub fn excitation_report(
    net: &RbfNetwork,
    spec: &TrajectorySpec,
    t0: f64,
    window: f64,
    dt: f64,
) -> Result<ExcitationReport> {
    let gramian = excitation_gramian(net, spec, t0, window, dt)?;
    let (alpha1, alpha2) = pe_levels(&gramian)?;
    let separation = match rbfnet::separation_distance(&net.centers) {
        Ok(d) => Some(d),
        Err(Error::NotApplicable(_)) => None,
        Err(e) => return Err(e),
    };
    let inputs: Vec<[f64; 6]> = spec
        .sample_grid(t0, t0 + window, dt)?
        .into_iter()
        .map(|(_, p)| p.as_input())
        .collect();
    let fill = if net.input_dim() == 6 {
        rbfnet::fill_distance(&net.centers, &inputs)?
    } else {
        return Err(Error::invalid(format!(
            "network input dimension {} does not match the trajectory input (6)",
            net.input_dim()
        )));
    };
    let threshold = PE_THRESHOLD_PER_SECOND * window;
    Ok(ExcitationReport {
        nodes: net.nodes(),
        gramian,
        alpha1,
        alpha2,
        t0,
        window,
        dt,
        separation,
        fill,
        threshold,
        persistently_exciting: alpha2 > threshold,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributionComparison {
    pub first: ExcitationReport,
    pub second: ExcitationReport,
    /// `α₂(first) / α₂(second)`.
    pub alpha2_ratio: f64,
}

pub fn compare_distributions(
    first: &RbfNetwork,
    second: &RbfNetwork,
    spec: &TrajectorySpec,
    t0: f64,
    window: f64,
    dt: f64,
) -> Result<DistributionComparison> {
    let a = excitation_report(first, spec, t0, window, dt)?;
    let b = excitation_report(second, spec, t0, window, dt)?;
    Ok(DistributionComparison {
        alpha2_ratio: a.alpha2 / b.alpha2,
        first: a,
        second: b,
    })
}
