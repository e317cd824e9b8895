//! PID, model-based feedforward and adaptive RBF-network controllers, and the
//! shared composite-error algebra.

use serde::{Deserialize, Serialize};

use crate::dynamics::{JointState, RobotParams};
use crate::rbfnet::{AdaptConfig, RbfNetwork};
use crate::trajectory::DesiredPoint;
use crate::{Error, Result, Vec2};

/// Diagonal gains of all four controllers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSet {
    /// Composite-error weighting `e2 = ė1 + K1 e1`.
    pub k1: Vec2,
    /// Feedback gain on `e2`.
    pub k2: Vec2,
    /// Integral gain (PID only).
    #[serde(default)]
    pub ki: Vec2,
    /// Learning law (RBFNN only).
    pub adapt: AdaptConfig,
}

impl GainSet {
    /// Requires finite, non-negative diagonals. Zero gains are accepted so that
    /// open-loop configurations can be expressed.
    pub fn validate(&self) -> Result<()> {
        for (name, g) in [("k1", self.k1), ("k2", self.k2), ("ki", self.ki)] {
            if g.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::invalid(format!("gains.{name} must be finite and non-negative, got {g:?}")));
            }
        }
        self.adapt.validate()
    }
}

/// Position error, velocity error and composite error `e2 = ė1 + K1 e1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPair {
    pub e1: Vec2,
    pub e1_dot: Vec2,
    pub e2: Vec2,
}

impl ErrorPair {
    pub fn new(qd: Vec2, qd_dot: Vec2, state: &JointState, k1: Vec2) -> Self {
        let e1 = [qd[0] - state.q[0], qd[1] - state.q[1]];
        let e1_dot = [qd_dot[0] - state.qdot[0], qd_dot[1] - state.qdot[1]];
        let e2 = [e1_dot[0] + k1[0] * e1[0], e1_dot[1] + k1[1] * e1[1]];
        ErrorPair { e1, e1_dot, e2 }
    }

    /// Reference velocity `q̇_r = q̇_d + K1 e1`.
    pub fn reference_velocity(&self, desired: &DesiredPoint, k1: Vec2) -> Vec2 {
        [
            desired.qd_dot[0] + k1[0] * self.e1[0],
            desired.qd_dot[1] + k1[1] * self.e1[1],
        ]
    }

    /// Reference acceleration `q̈_r = q̈_d + K1 ė1`.
    pub fn reference_acceleration(&self, desired: &DesiredPoint, k1: Vec2) -> Vec2 {
        [
            desired.qd_ddot[0] + k1[0] * self.e1_dot[0],
            desired.qd_ddot[1] + k1[1] * self.e1_dot[1],
        ]
    }
}

/// Composite tracking error at the current state.
pub fn composite_error(qd: Vec2, qd_dot: Vec2, state: &JointState, k1: Vec2) -> ErrorPair {
    ErrorPair::new(qd, qd_dot, state, k1)
}

fn feedback(k2: Vec2, e2: Vec2) -> Vec2 {
    [k2[0] * e2[0], k2[1] * e2[1]]
}

/// When the PID integral absorbs the current error relative to producing the torque.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralOrder {
    /// `I ← I + e2·dt`, then `τ = K2 e2 + KI I`.
    #[default]
    AccumulateFirst,
    /// `τ = K2 e2 + KI I`, then `I ← I + e2·dt`; the ordering of the RBFNN
    /// controller, which uses its weights before updating them.
    UseFirst,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlLaw {
    Pid { integral: Vec2, order: IntegralOrder },
    Mbff { model: RobotParams },
    Rbfnn { net: RbfNetwork, activations: Vec<f64> },
}

/// A controller and its evolving internal state, owned by a single run.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub gains: GainSet,
    pub law: ControlLaw,
}

/// Everything a controller produced in one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub tau: Vec2,
    pub errors: ErrorPair,
    /// `ŴᵀS(Z_d)` with the weights used for this step (RBFNN only).
    pub network_output: Option<Vec2>,
}

impl ControllerState {
    pub fn pid(gains: GainSet, order: IntegralOrder) -> Self {
        ControllerState {
            gains,
            law: ControlLaw::Pid {
                integral: [0.0; 2],
                order,
            },
        }
    }

    pub fn mbff(gains: GainSet, model: RobotParams) -> Self {
        ControllerState {
            gains,
            law: ControlLaw::Mbff { model },
        }
    }

    pub fn rbfnn(gains: GainSet, net: RbfNetwork) -> Result<Self> {
        net.validate()?;
        if net.outputs() != 2 || net.input_dim() != 6 {
            return Err(Error::invalid(format!(
                "controller network must map 6 inputs to 2 outputs, got {} -> {}",
                net.input_dim(),
                net.outputs()
            )));
        }
        let activations = vec![0.0; net.nodes()];
        Ok(ControllerState {
            gains,
            law: ControlLaw::Rbfnn { net, activations },
        })
    }

    pub fn network(&self) -> Option<&RbfNetwork> {
        match &self.law {
            ControlLaw::Rbfnn { net, .. } => Some(net),
            _ => None,
        }
    }

    /// One control step: errors at the current state, then the torque held
    /// over the next `dt`.
    pub fn step(&mut self, desired: &DesiredPoint, state: &JointState, dt: f64) -> ControlOutput {
        let errors = ErrorPair::new(desired.qd, desired.qd_dot, state, self.gains.k1);
        let (tau, network_output) = match &self.law {
            ControlLaw::Pid { .. } => (self.pid_torque(&errors, dt), None),
            ControlLaw::Mbff { model } => (mbff_torque(model, &self.gains, &errors, desired), None),
            ControlLaw::Rbfnn { .. } => {
                let (tau, nn) = self.rbf_torque(&errors, &desired.as_input(), dt);
                (tau, Some(nn))
            }
        };
        ControlOutput {
            tau,
            errors,
            network_output,
        }
    }

    /// `τ = K2 e2 + KI ∫e2`. Does nothing but return the PD part for non-PID laws.
    pub fn pid_torque(&mut self, err: &ErrorPair, dt: f64) -> Vec2 {
        let (k2, ki) = (self.gains.k2, self.gains.ki);
        let pd = feedback(k2, err.e2);
        let ControlLaw::Pid { integral, order } = &mut self.law else {
            return pd;
        };
        let accumulate = |integral: &mut Vec2| {
            integral[0] += err.e2[0] * dt;
            integral[1] += err.e2[1] * dt;
        };
        if *order == IntegralOrder::AccumulateFirst {
            accumulate(integral);
        }
        let tau = [pd[0] + ki[0] * integral[0], pd[1] + ki[1] * integral[1]];
        if *order == IntegralOrder::UseFirst {
            accumulate(integral);
        }
        tau
    }

    /// `τ = K2 e2 + ŴᵀS(Z_d)` with the current weights, then one learning step.
    /// Returns `(τ, ŴᵀS)`. Non-RBFNN laws return the PD part and a zero output.
    pub fn rbf_torque(&mut self, err: &ErrorPair, zd: &[f64], dt: f64) -> (Vec2, Vec2) {
        let pd = feedback(self.gains.k2, err.e2);
        let adapt = self.gains.adapt;
        let ControlLaw::Rbfnn { net, activations } = &mut self.law else {
            return (pd, [0.0; 2]);
        };
        net.activations_into(zd, activations);
        let y = net.output_from_activations(activations);
        let nn = [y[0], y[1]];
        net.adapt(&adapt, activations, &err.e2, dt);
        ([pd[0] + nn[0], pd[1] + nn[1]], nn)
    }
}

/// `τ = K2 e2 + M(q_d) q̈_d + C(q_d, q̇_d) q̇_d + G(q_d)` with an exact model.
pub fn mbff_torque(model: &RobotParams, gains: &GainSet, err: &ErrorPair, desired: &DesiredPoint) -> Vec2 {
    let ff = model.inverse_dynamics(desired.qd, desired.qd_dot, desired.qd_ddot);
    let pd = feedback(gains.k2, err.e2);
    [pd[0] + ff[0], pd[1] + ff[1]]
}

/// Residuals between the composite dynamics at the actual state and the
/// feedforward dynamics at the desired state.
///
/// `H1` uses `C(q, q̇) q̇_r`, `H2` uses `C(q, q̇) q̇`; both use `M(q) q̈_r + G(q)`.
pub fn residuals(
    params: &RobotParams,
    state: &JointState,
    err: &ErrorPair,
    desired: &DesiredPoint,
    k1: Vec2,
) -> (Vec2, Vec2) {
    let qr_dot = err.reference_velocity(desired, k1);
    let qr_ddot = err.reference_acceleration(desired, k1);
    let m = params.mass_matrix(state.q).mul_vec(qr_ddot);
    let c = params.coriolis_matrix(state.q, state.qdot);
    let g = params.gravity_vector(state.q);
    let target = params.inverse_dynamics(desired.qd, desired.qd_dot, desired.qd_ddot);
    let c_r = c.mul_vec(qr_dot);
    let c_q = c.mul_vec(state.qdot);
    let h1 = [m[0] + c_r[0] + g[0] - target[0], m[1] + c_r[1] + g[1] - target[1]];
    let h2 = [m[0] + c_q[0] + g[0] - target[0], m[1] + c_q[1] + g[1] - target[1]];
    (h1, h2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::trajectory::TrajectorySpec;

    fn gains() -> GainSet {
        GainSet {
            k1: [10.0, 6.0],
            k2: [3.0, 1.8],
            ki: [0.05, 0.05],
            adapt: AdaptConfig {
                gamma: 6.0,
                delta0: 0.001,
                w0: 10.0,
            },
        }
    }

    #[test]
    fn composite_error_cases() {
        let s = JointState::new([0.4, -0.2], [1.0, 0.5]);
        let e = composite_error([0.4, -0.2], [1.0, 0.5], &s, [10.0, 6.0]);
        assert_eq!((e.e1, e.e1_dot, e.e2), ([0.0; 2], [0.0; 2], [0.0; 2]));

        let s = JointState::new([0.0, 0.0], [0.0, 0.0]);
        let e = composite_error([0.1, 0.2], [0.0, 0.0], &s, [10.0, 6.0]);
        assert!((e.e2[0] - 1.0).abs() < 1e-15 && (e.e2[1] - 1.2).abs() < 1e-15);

        let e = composite_error([0.0, 0.0], [0.3, -0.7], &s, [10.0, 6.0]);
        assert_eq!(e.e2, [0.3, -0.7]);
    }

    #[test]
    fn pd_term_decomposes() {
        let g = gains();
        let s = JointState::new([0.13, -0.4], [0.2, 0.9]);
        let e = composite_error([0.2, 0.1], [-0.3, 0.5], &s, g.k1);
        for i in 0..2 {
            let direct = g.k2[i] * e.e2[i];
            let split = g.k1[i] * g.k2[i] * e.e1[i] + g.k2[i] * e.e1_dot[i];
            assert!((direct - split).abs() < 1e-15);
        }
    }

    #[test]
    fn pid_examples() {
        let mut g = gains();
        let mut c = ControllerState::pid(g, IntegralOrder::AccumulateFirst);
        let zero = ErrorPair { e1: [0.0; 2], e1_dot: [0.0; 2], e2: [0.0; 2] };
        assert_eq!(c.pid_torque(&zero, 0.01), [0.0, 0.0]);

        g.ki = [0.0, 0.0];
        let mut c = ControllerState::pid(g, IntegralOrder::AccumulateFirst);
        let unit = ErrorPair { e1: [0.0; 2], e1_dot: [1.0; 2], e2: [1.0, 1.0] };
        assert_eq!(c.pid_torque(&unit, 0.01), [3.0, 1.8]);

        g.k2 = [0.0, 0.0];
        g.ki = [0.05, 0.2];
        let mut c = ControllerState::pid(g, IntegralOrder::AccumulateFirst);
        let constant = ErrorPair { e1: [0.0; 2], e1_dot: [0.0; 2], e2: [0.5, -1.0] };
        let mut tau = [0.0; 2];
        for _ in 0..7 {
            tau = c.pid_torque(&constant, 0.01);
        }
        assert!((tau[0] - 0.05 * 0.5 * 7.0 * 0.01).abs() < 1e-16);
        assert!((tau[1] - 0.2 * -1.0 * 7.0 * 0.01).abs() < 1e-16);

        let mut late = ControllerState::pid(g, IntegralOrder::UseFirst);
        assert_eq!(late.pid_torque(&constant, 0.01), [0.0, 0.0]);
    }

    #[test]
    fn mbff_examples() {
        let p = RobotParams::default();
        let g = gains();
        let d = TrajectorySpec::default().sample(0.7);
        let zero = ErrorPair { e1: [0.0; 2], e1_dot: [0.0; 2], e2: [0.0; 2] };
        assert_eq!(mbff_torque(&p, &g, &zero, &d), p.inverse_dynamics(d.qd, d.qd_dot, d.qd_ddot));
        let still = TrajectorySpec::setpoint([0.3, 0.5]).sample(2.0);
        assert_eq!(mbff_torque(&p, &g, &zero, &still), p.gravity_vector([0.3, 0.5]));
    }

    #[test]
    fn rbf_first_step_is_pure_pd() {
        let net = RbfNetwork::new(Matrix::from_rows(&[[0.0; 6], [1.0; 6]]).unwrap(), 1.1, 2).unwrap();
        let mut c = ControllerState::rbfnn(gains(), net).unwrap();
        let e = ErrorPair { e1: [0.0; 2], e1_dot: [0.0; 2], e2: [0.5, 2.0] };
        let (tau, nn) = c.rbf_torque(&e, &[0.1; 6], 0.01);
        assert_eq!(nn, [0.0, 0.0]);
        assert_eq!(tau, [1.5, 3.6]);
        // weights moved after the torque was produced
        assert!(c.network().unwrap().weights.frobenius_norm() > 0.0);
    }

    #[test]
    fn residuals_vanish_on_perfect_tracking() {
        let p = RobotParams::default();
        let d = TrajectorySpec::default().sample(1.3);
        let s = JointState::new(d.qd, d.qd_dot);
        let e = composite_error(d.qd, d.qd_dot, &s, [10.0, 6.0]);
        let (h1, h2) = residuals(&p, &s, &e, &d, [10.0, 6.0]);
        assert!(h1.iter().chain(&h2).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rbfnn_requires_six_inputs_two_outputs() {
        let net = RbfNetwork::new(Matrix::from_rows(&[[0.0; 3]]).unwrap(), 1.0, 2).unwrap();
        assert!(ControllerState::rbfnn(gains(), net).is_err());
    }
}
