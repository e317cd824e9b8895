//! Two-link planar manipulator with point masses at the link tips.
//!
//! `M(q) q̈ + C(q, q̇) q̇ + G(q) = τ`, with `C` in Christoffel form so that
//! `Ṁ − 2C` is skew-symmetric. Joint angles are measured from the horizontal
//! (link 1) and relative to link 1 (link 2).

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec2};

/// Smallest `det M` accepted by [`RobotParams::forward_dynamics`].
pub const MIN_MASS_DET: f64 = 1e-12;

/// 2×2 matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[0.0; 2]; 2]);

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Eigenvalues of a symmetric 2×2 matrix, ascending.
    pub fn sym_eigenvalues(&self) -> (f64, f64) {
        let m = &self.0;
        let mean = 0.5 * (m[0][0] + m[1][1]);
        let half_diff = 0.5 * (m[0][0] - m[1][1]);
        let r = half_diff.hypot(m[0][1]);
        (mean - r, mean + r)
    }

    /// `zᵀ A z`.
    pub fn quad_form(&self, z: Vec2) -> f64 {
        let az = self.mul_vec(z);
        z[0] * az[0] + z[1] * az[1]
    }
}

impl std::ops::Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

impl std::ops::Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        let a = self.0;
        Mat2([[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]])
    }
}

/// Physical constants of the arm. Serializes as `{"m1","m2","l1","l2","g"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotParams {
    /// Point mass at the tip of link 1 (kg).
    pub m1: f64,
    /// Point mass at the tip of link 2 (kg).
    pub m2: f64,
    /// Link 1 length (m).
    pub l1: f64,
    /// Link 2 length (m).
    pub l2: f64,
    /// Gravitational acceleration (m/s²).
    pub g: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        RobotParams {
            m1: 1.0,
            m2: 1.0,
            l1: 1.0,
            l2: 1.0,
            g: 9.8,
        }
    }
}

/// Instantaneous joint positions (rad) and velocities (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointState {
    pub q: Vec2,
    pub qdot: Vec2,
}

impl JointState {
    pub fn new(q: Vec2, qdot: Vec2) -> Self {
        JointState { q, qdot }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.qdot).all(|v| v.is_finite())
    }
}

impl RobotParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("m1", self.m1), ("m2", self.m2), ("l1", self.l1), ("l2", self.l2)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("robot.{name} must be positive, got {v}")));
            }
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::invalid(format!("robot.g must be non-negative, got {}", self.g)));
        }
        Ok(())
    }

    /// `m2 l1 l2`, the coupling coefficient shared by `M` and `C`.
    fn coupling(&self) -> f64 {
        self.m2 * self.l1 * self.l2
    }

    pub fn mass_matrix(&self, q: Vec2) -> Mat2 {
        let c2 = q[1].cos();
        let k = self.coupling();
        let m22 = self.m2 * self.l2 * self.l2;
        let m11 = (self.m1 + self.m2) * self.l1 * self.l1 + m22 + 2.0 * k * c2;
        let m12 = m22 + k * c2;
        Mat2([[m11, m12], [m12, m22]])
    }

    /// Time derivative of `M(q)` along `q̇`; only `q2` enters `M`.
    pub fn mass_matrix_dot(&self, q: Vec2, qdot: Vec2) -> Mat2 {
        let d = -self.coupling() * q[1].sin() * qdot[1];
        Mat2([[2.0 * d, d], [d, 0.0]])
    }

    pub fn coriolis_matrix(&self, q: Vec2, qdot: Vec2) -> Mat2 {
        let h = self.coupling() * q[1].sin();
        Mat2([
            [-h * qdot[1], -h * (qdot[0] + qdot[1])],
            [h * qdot[0], 0.0],
        ])
    }

    pub fn gravity_vector(&self, q: Vec2) -> Vec2 {
        let c1 = q[0].cos();
        let c12 = (q[0] + q[1]).cos();
        let g2 = self.m2 * self.g * self.l2 * c12;
        [(self.m1 + self.m2) * self.g * self.l1 * c1 + g2, g2]
    }

    /// `q̈ = M⁻¹ (τ − C q̇ − G)` via the closed-form 2×2 inverse.
    pub fn forward_dynamics(&self, state: &JointState, tau: Vec2) -> Result<Vec2> {
        let m = self.mass_matrix(state.q);
        let det = m.det();
        if det.abs() < MIN_MASS_DET {
            return Err(Error::DegenerateMass { det });
        }
        let cq = self.coriolis_matrix(state.q, state.qdot).mul_vec(state.qdot);
        let g = self.gravity_vector(state.q);
        let rhs = [tau[0] - cq[0] - g[0], tau[1] - cq[1] - g[1]];
        let a = m.0;
        Ok([
            (a[1][1] * rhs[0] - a[0][1] * rhs[1]) / det,
            (a[0][0] * rhs[1] - a[1][0] * rhs[0]) / det,
        ])
    }

    /// `M(q) q̈ + C(q, q̇) q̇ + G(q)`.
    pub fn inverse_dynamics(&self, q: Vec2, qdot: Vec2, qddot: Vec2) -> Vec2 {
        let mq = self.mass_matrix(q).mul_vec(qddot);
        let cq = self.coriolis_matrix(q, qdot).mul_vec(qdot);
        let g = self.gravity_vector(q);
        [mq[0] + cq[0] + g[0], mq[1] + cq[1] + g[1]]
    }

    /// `½ q̇ᵀ M(q) q̇`.
    pub fn kinetic_energy(&self, state: &JointState) -> f64 {
        0.5 * self.mass_matrix(state.q).quad_form(state.qdot)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn unit() -> RobotParams {
        RobotParams::default()
    }

    #[test]
    fn mass_matrix_at_right_angle_and_straight() {
        assert_eq!(unit().mass_matrix([0.3, FRAC_PI_2]).0[1][1], 1.0);
        let m = unit().mass_matrix([0.0, FRAC_PI_2]).0;
        assert!((m[0][0] - 3.0).abs() < 1e-15 && (m[0][1] - 1.0).abs() < 1e-15);
        assert_eq!(unit().mass_matrix([0.0, 0.0]).0, [[5.0, 2.0], [2.0, 1.0]]);
    }

    #[test]
    fn mass_matrix_positive_definite_over_q2_grid() {
        let p = unit();
        for k in 0..3600 {
            let q2 = 2.0 * PI * k as f64 / 3600.0;
            let m = p.mass_matrix([0.0, q2]);
            assert_eq!(m.0[0][1].to_bits(), m.0[1][0].to_bits());
            assert!(m.sym_eigenvalues().0 > 0.0);
        }
    }

    #[test]
    fn coriolis_vanishes_without_velocity_or_bend() {
        let p = unit();
        assert_eq!(p.coriolis_matrix([0.4, 1.2], [0.0, 0.0]), Mat2([[-0.0, -0.0], [0.0, 0.0]]));
        let c = p.coriolis_matrix([0.4, 0.0], [1.3, -0.7]);
        assert!(c.0.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn gravity_examples() {
        let mut p = unit();
        assert_eq!(p.gravity_vector([0.0, 0.0]), [29.400000000000002, 9.8]);
        let g = p.gravity_vector([FRAC_PI_2, 0.0]);
        assert!(g[0].abs() < 1e-14 && g[1].abs() < 1e-14);
        p.g = 0.0;
        assert_eq!(p.gravity_vector([0.3, 0.2]), [0.0, 0.0]);
    }

    #[test]
    fn gravity_compensation_is_an_equilibrium() {
        let p = unit();
        let s = JointState::new([0.4, -1.1], [0.0, 0.0]);
        let a = p.forward_dynamics(&s, p.gravity_vector(s.q)).unwrap();
        assert!(a[0].abs() < 1e-14 && a[1].abs() < 1e-14);
        let mut free = p;
        free.g = 0.0;
        assert_eq!(free.forward_dynamics(&s, [0.0, 0.0]).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn inverse_dynamics_special_cases() {
        let p = unit();
        assert_eq!(p.inverse_dynamics([0.2, 0.9], [0.0; 2], [0.0; 2]), p.gravity_vector([0.2, 0.9]));
        let mut free = p;
        free.g = 0.0;
        let q = [0.2, 0.9];
        let a = [1.5, -0.25];
        assert_eq!(free.inverse_dynamics(q, [0.0; 2], a), free.mass_matrix(q).mul_vec(a));
    }

    #[test]
    fn validation() {
        assert!(unit().validate().is_ok());
        let bad = RobotParams { l2: 0.0, ..unit() };
        assert!(bad.validate().is_err());
        let bad = RobotParams { g: -1.0, ..unit() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn params_json_is_flat() {
        let s = serde_json::to_string(&unit()).unwrap();
        assert_eq!(s, r#"{"m1":1.0,"m2":1.0,"l1":1.0,"l2":1.0,"g":9.8}"#);
    }
}
