//! Fixed-step closed-loop simulation with a zero-order-hold controller.

use serde::{Deserialize, Serialize};

use crate::control::{ControllerState, GainSet};
use crate::dynamics::{JointState, RobotParams};
use crate::matrix::Matrix;
use crate::par::{self, Execution};
use crate::rbfnet::RbfNetwork;
use crate::scenario::{ControllerKind, ControllerSpec};
use crate::trajectory::TrajectorySpec;
use crate::{Error, Result, Vec2};

/// Joint speed beyond which a run is declared diverged (rad/s).
pub const DIVERGENCE_SPEED: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Semi-implicit Euler: velocity first, then position with the new velocity.
    #[default]
    Euler,
    /// Classical fourth-order Runge–Kutta with the torque held constant.
    Rk4,
}

impl std::str::FromStr for Integrator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Integrator::Euler),
            "rk4" => Ok(Integrator::Rk4),
            other => Err(Error::Config(format!("unknown integrator '{other}' (expected euler|rk4)"))),
        }
    }
}

/// One fully specified closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub robot: RobotParams,
    pub trajectory: TrajectorySpec,
    pub controller: ControllerSpec,
    pub gains: GainSet,
    /// Simulated time (s).
    pub duration: f64,
    /// Controller and integration step (s).
    pub dt: f64,
    pub initial: JointState,
    pub integrator: Integrator,
    /// Record every n-th step.
    pub record_decimation: usize,
    /// Seed for any randomized network construction.
    pub seed: u64,
    /// Spacing of stored weight snapshots (s).
    pub snapshot_interval: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.robot.validate()?;
        self.trajectory.validate()?;
        self.gains.validate()?;
        self.controller.validate()?;
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::invalid(format!("duration must be positive, got {}", self.duration)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.dt > self.duration {
            return Err(Error::invalid(format!("dt {} exceeds duration {}", self.dt, self.duration)));
        }
        if self.record_decimation == 0 {
            return Err(Error::invalid("record_decimation must be at least 1"));
        }
        if !(self.snapshot_interval > 0.0) {
            return Err(Error::invalid("snapshot_interval must be positive"));
        }
        if !self.initial.is_finite() {
            return Err(Error::invalid("initial state must be finite"));
        }
        Ok(())
    }

    /// Number of integration steps; the run covers `t = 0, dt, …, steps·dt`.
    pub fn steps(&self) -> usize {
        let n = self.duration / self.dt;
        (n + 1e-9 * n.max(1.0)).floor() as usize
    }

    pub fn with_controller(&self, controller: ControllerSpec) -> Scenario {
        Scenario {
            controller,
            ..self.clone()
        }
    }

    /// Builds the controller state, including the network, before `t = 0`.
    pub fn build_controller(&self) -> Result<ControllerState> {
        Ok(match self.controller.kind {
            ControllerKind::Pid => ControllerState::pid(self.gains, self.controller.integral_order),
            ControllerKind::Mbff => ControllerState::mbff(self.gains, self.robot),
            ControllerKind::Rbfnn => {
                let source = self.controller.network.as_ref().ok_or_else(|| {
                    Error::Config(format!("controller '{}' needs a network source", self.controller.label))
                })?;
                let net = source.build(&self.trajectory, self.seed)?;
                ControllerState::rbfnn(self.gains, net)?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSnapshot {
    pub t: f64,
    pub weights: Matrix,
}

/// Recorded time series of one run. All series share the `t` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub label: String,
    pub kind: ControllerKind,
    pub gains: GainSet,
    pub dt: f64,
    pub record_decimation: usize,
    pub t: Vec<f64>,
    pub q: Vec<Vec2>,
    pub qdot: Vec<Vec2>,
    pub qd: Vec<Vec2>,
    pub e1: Vec<Vec2>,
    pub e2: Vec<Vec2>,
    pub tau: Vec<Vec2>,
    /// Exact feedforward torque at the desired state.
    pub ff: Vec<Vec2>,
    /// `ŴᵀS(Z_d)` (RBFNN only).
    pub nn: Option<Vec<Vec2>>,
    /// `‖Ŵ_i‖` per joint after the step's update (RBFNN only).
    pub weight_norm: Option<Vec<Vec2>>,
    /// Largest per-step `‖ΔŴ_i‖` since the previous record (RBFNN only).
    pub weight_step: Option<Vec<Vec2>>,
    pub snapshots: Vec<WeightSnapshot>,
    pub final_network: Option<RbfNetwork>,
    pub final_state: JointState,
}

impl RunResult {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.t.last().copied().unwrap_or(0.0)
    }
}

fn add_scaled(s: &JointState, d: &(Vec2, Vec2), h: f64) -> JointState {
    JointState {
        q: [s.q[0] + d.0[0] * h, s.q[1] + d.0[1] * h],
        qdot: [s.qdot[0] + d.1[0] * h, s.qdot[1] + d.1[1] * h],
    }
}

/// Advance the plant by `dt` with the torque held constant.
pub fn integrate_step(params: &RobotParams, state: &JointState, tau: Vec2, dt: f64, method: Integrator) -> Result<JointState> {
    match method {
        Integrator::Euler => {
            let a = params.forward_dynamics(state, tau)?;
            let qdot = [state.qdot[0] + a[0] * dt, state.qdot[1] + a[1] * dt];
            let q = [state.q[0] + qdot[0] * dt, state.q[1] + qdot[1] * dt];
            Ok(JointState { q, qdot })
        }
        Integrator::Rk4 => {
            let f = |s: &JointState| -> Result<(Vec2, Vec2)> { Ok((s.qdot, params.forward_dynamics(s, tau)?)) };
            let k1 = f(state)?;
            let k2 = f(&add_scaled(state, &k1, 0.5 * dt))?;
            let k3 = f(&add_scaled(state, &k2, 0.5 * dt))?;
            let k4 = f(&add_scaled(state, &k3, dt))?;
            let comb = |i: usize, pick: fn(&(Vec2, Vec2)) -> Vec2| {
                (pick(&k1)[i] + 2.0 * pick(&k2)[i] + 2.0 * pick(&k3)[i] + pick(&k4)[i]) * dt / 6.0
            };
            Ok(JointState {
                q: [state.q[0] + comb(0, |k| k.0), state.q[1] + comb(1, |k| k.0)],
                qdot: [state.qdot[0] + comb(0, |k| k.1), state.qdot[1] + comb(1, |k| k.1)],
            })
        }
    }
}

/// Runs one scenario from `t = 0` to `duration`.
///
/// Per step: sample the desired point, compute errors and torque (the RBFNN
/// learns after producing its torque), record, then integrate the plant over
/// `dt` with that torque held.
pub fn run(scenario: &Scenario) -> Result<RunResult> {
    scenario.validate()?;
    let controller = scenario.build_controller()?;
    run_with_controller(scenario, controller)
}

/// Like [`run`] but with a caller-built controller (e.g. a hand-placed network).
pub fn run_with_controller(scenario: &Scenario, mut controller: ControllerState) -> Result<RunResult> {
    let steps = scenario.steps();
    let dt = scenario.dt;
    let dec = scenario.record_decimation;
    let cap = steps / dec + 1;
    let is_rbf = controller.network().is_some();
    let series = || Vec::<Vec2>::with_capacity(cap);

    let mut out = RunResult {
        label: scenario.controller.label.clone(),
        kind: scenario.controller.kind,
        gains: scenario.gains,
        dt,
        record_decimation: dec,
        t: Vec::with_capacity(cap),
        q: series(),
        qdot: series(),
        qd: series(),
        e1: series(),
        e2: series(),
        tau: series(),
        ff: series(),
        nn: is_rbf.then(series),
        weight_norm: is_rbf.then(series),
        weight_step: is_rbf.then(series),
        snapshots: Vec::new(),
        final_network: None,
        final_state: scenario.initial,
    };

    let snapshot_every = ((scenario.snapshot_interval / dt).round() as usize).max(1);
    let mut prev_weights: Vec<f64> = controller
        .network()
        .map(|n| n.weights.as_slice().to_vec())
        .unwrap_or_default();
    let mut step_max = [0.0f64; 2];
    let mut state = scenario.initial;

    if let Some(net) = controller.network() {
        out.snapshots.push(WeightSnapshot { t: 0.0, weights: net.weights.clone() });
    }

    for k in 0..=steps {
        let t = k as f64 * dt;
        let desired = scenario.trajectory.sample(t);
        let ctl = controller.step(&desired, &state, dt);

        let mut wnorm = [0.0; 2];
        if let Some(net) = controller.network() {
            let w = net.weights.as_slice();
            let mut d2 = [0.0; 2];
            for (idx, (new, old)) in w.iter().zip(&prev_weights).enumerate() {
                let d = new - old;
                d2[idx % 2] += d * d;
            }
            for i in 0..2 {
                step_max[i] = step_max[i].max(d2[i].sqrt());
                wnorm[i] = net.weights.column_norm(i);
            }
            prev_weights.copy_from_slice(w);
            if k > 0 && k % snapshot_every == 0 {
                out.snapshots.push(WeightSnapshot { t, weights: net.weights.clone() });
            }
        }

        if k % dec == 0 {
            out.t.push(t);
            out.q.push(state.q);
            out.qdot.push(state.qdot);
            out.qd.push(desired.qd);
            out.e1.push(ctl.errors.e1);
            out.e2.push(ctl.errors.e2);
            out.tau.push(ctl.tau);
            out.ff
                .push(scenario.robot.inverse_dynamics(desired.qd, desired.qd_dot, desired.qd_ddot));
            if let (Some(nn), Some(y)) = (out.nn.as_mut(), ctl.network_output) {
                nn.push(y);
            }
            if let Some(v) = out.weight_norm.as_mut() {
                v.push(wnorm);
            }
            if let Some(v) = out.weight_step.as_mut() {
                v.push(step_max);
            }
            step_max = [0.0; 2];
        }

        if k < steps {
            state = integrate_step(&scenario.robot, &state, ctl.tau, dt, scenario.integrator)?;
            let speed = state.qdot[0].hypot(state.qdot[1]);
            if !state.is_finite() || speed > DIVERGENCE_SPEED {
                return Err(Error::Diverged {
                    step: k + 1,
                    time: (k + 1) as f64 * dt,
                    speed,
                });
            }
        }
    }

    out.final_state = state;
    out.final_network = controller.network().cloned();
    Ok(out)
}

/// One run per controller on the same plant, trajectory, step and seed.
/// Failures are reported per entry; results keep the input order.
pub fn run_comparison(base: &Scenario, controllers: &[ControllerSpec]) -> Vec<Result<RunResult>> {
    run_comparison_with(Execution::default(), base, controllers)
}

pub fn run_comparison_with(exec: Execution, base: &Scenario, controllers: &[ControllerSpec]) -> Vec<Result<RunResult>> {
    par::map_slice(exec, controllers, |c| run(&base.with_controller(c.clone())))
}
