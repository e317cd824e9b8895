//! Periodic desired trajectories and the stacked network input
//! `Z_d = [q_dᵀ, q̇_dᵀ, q̈_dᵀ]ᵀ`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec2};

/// Dimension of the network input `Z_d` for a two-joint arm.
pub const INPUT_DIM: usize = 6;

/// Trajectory of a single joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JointTrajectory {
    /// `offset + amplitude · sin(omega · t + phase)`.
    Sinusoid {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    #[serde(alias = "set_point")]
    Setpoint { constant: f64 },
}

impl JointTrajectory {
    /// (position, velocity, acceleration) at time `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            JointTrajectory::Sinusoid {
                amplitude,
                omega,
                phase,
                offset,
            } => {
                let (s, c) = (omega * t + phase).sin_cos();
                (
                    offset + amplitude * s,
                    amplitude * omega * c,
                    -amplitude * omega * omega * s,
                )
            }
            JointTrajectory::Setpoint { constant } => (constant, 0.0, 0.0),
        }
    }

    /// Componentwise magnitude bounds of (position, velocity, acceleration).
    fn bounds(&self) -> (f64, f64, f64) {
        match *self {
            JointTrajectory::Sinusoid {
                amplitude,
                omega,
                offset,
                ..
            } => {
                let a = amplitude.abs();
                (offset.abs() + a, a * omega, a * omega * omega)
            }
            JointTrajectory::Setpoint { constant } => (constant.abs(), 0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    pub joints: [JointTrajectory; 2],
    /// Common period `t_p` of both joints (s).
    pub period: f64,
}

impl Default for TrajectorySpec {
    /// `q_d1 = sin t`, `q_d2 = cos t`.
    fn default() -> Self {
        TrajectorySpec {
            joints: [
                JointTrajectory::Sinusoid {
                    amplitude: 1.0,
                    omega: 1.0,
                    phase: 0.0,
                    offset: 0.0,
                },
                JointTrajectory::Sinusoid {
                    amplitude: 1.0,
                    omega: 1.0,
                    phase: std::f64::consts::FRAC_PI_2,
                    offset: 0.0,
                },
            ],
            period: 2.0 * std::f64::consts::PI,
        }
    }
}

/// Desired joint positions, velocities and accelerations at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesiredPoint {
    pub qd: Vec2,
    pub qd_dot: Vec2,
    pub qd_ddot: Vec2,
}

impl DesiredPoint {
    /// Stacked network input `[q_d, q̇_d, q̈_d]`.
    pub fn as_input(&self) -> [f64; INPUT_DIM] {
        [
            self.qd[0],
            self.qd[1],
            self.qd_dot[0],
            self.qd_dot[1],
            self.qd_ddot[0],
            self.qd_ddot[1],
        ]
    }
}

impl TrajectorySpec {
    pub fn setpoint(c: Vec2) -> Self {
        TrajectorySpec {
            joints: [
                JointTrajectory::Setpoint { constant: c[0] },
                JointTrajectory::Setpoint { constant: c[1] },
            ],
            period: 1.0,
        }
    }

    /// Checks finiteness, positive frequencies and that `period` is a common
    /// period of every sinusoidal joint.
    pub fn validate(&self) -> Result<()> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(Error::invalid(format!(
                "trajectory.period must be positive, got {}",
                self.period
            )));
        }
        for (i, j) in self.joints.iter().enumerate() {
            match *j {
                JointTrajectory::Sinusoid {
                    amplitude,
                    omega,
                    phase,
                    offset,
                } => {
                    if ![amplitude, omega, phase, offset].iter().all(|v| v.is_finite()) {
                        return Err(Error::invalid(format!("trajectory joint {i} has non-finite fields")));
                    }
                    if omega <= 0.0 {
                        return Err(Error::invalid(format!(
                            "trajectory joint {i}: omega must be positive, got {omega}"
                        )));
                    }
                    let cycles = omega * self.period / (2.0 * std::f64::consts::PI);
                    if (cycles - cycles.round()).abs() > 1e-6 || cycles.round() < 1.0 {
                        return Err(Error::invalid(format!(
                            "trajectory joint {i}: period {} is not a multiple of 2π/omega ({cycles} cycles)",
                            self.period
                        )));
                    }
                }
                JointTrajectory::Setpoint { constant } => {
                    if !constant.is_finite() {
                        return Err(Error::invalid(format!("trajectory joint {i}: non-finite set point")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn sample(&self, t: f64) -> DesiredPoint {
        let (p0, v0, a0) = self.joints[0].eval(t);
        let (p1, v1, a1) = self.joints[1].eval(t);
        DesiredPoint {
            qd: [p0, p1],
            qd_dot: [v0, v1],
            qd_ddot: [a0, a1],
        }
    }

    /// Samples at `t0, t0 + dt, …` up to and including `t1`.
    pub fn sample_grid(&self, t0: f64, t1: f64, dt: f64) -> Result<Vec<(f64, DesiredPoint)>> {
        let n = grid_len(t0, t1, dt)?;
        Ok((0..n)
            .map(|k| {
                let t = t0 + k as f64 * dt;
                (t, self.sample(t))
            })
            .collect())
    }

    /// Network inputs over one period starting at 0, spaced by `dt`.
    pub fn period_inputs(&self, dt: f64) -> Result<Vec<[f64; INPUT_DIM]>> {
        Ok(self
            .sample_grid(0.0, self.period, dt)?
            .into_iter()
            .map(|(_, p)| p.as_input())
            .collect())
    }

    /// Upper bound `Z̄_d` on `‖Z_d(t)‖` from the joint amplitudes.
    pub fn input_bound(&self) -> f64 {
        self.joints
            .iter()
            .map(|j| {
                let (p, v, a) = j.bounds();
                p * p + v * v + a * a
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// `floor((t1 − t0)/dt) + 1`, tolerating round-off at the end point.
pub fn grid_len(t0: f64, t1: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid(format!("grid step must be positive, got {dt}")));
    }
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::invalid(format!("grid needs t1 > t0, got [{t0}, {t1}]")));
    }
    let steps = (t1 - t0) / dt;
    Ok((steps + 1e-9 * steps.max(1.0)).floor() as usize + 1)
}
