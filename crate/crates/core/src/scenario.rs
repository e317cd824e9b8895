//! JSON scenario files: plant, trajectory, gains, controller list, network
//! sources and analysis windows.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clustering::{self, KmeansConfig, KmeansInit};
use crate::control::{GainSet, IntegralOrder};
use crate::dynamics::{JointState, RobotParams};
use crate::matrix::Matrix;
use crate::rbfnet::{self, RbfNetwork};
use crate::simulator::{Integrator, Scenario};
use crate::trajectory::{TrajectorySpec, INPUT_DIM};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    Pid,
    Mbff,
    Rbfnn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSpec {
    /// Row name in comparison tables, e.g. `RBFNN-O`.
    pub label: String,
    pub kind: ControllerKind,
    #[serde(default, skip_serializing_if = "is_default_order")]
    pub integral_order: IntegralOrder,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSource>,
}

fn is_default_order(o: &IntegralOrder) -> bool {
    *o == IntegralOrder::default()
}

impl ControllerSpec {
    pub fn pid(label: &str) -> Self {
        ControllerSpec {
            label: label.to_string(),
            kind: ControllerKind::Pid,
            integral_order: IntegralOrder::default(),
            network: None,
        }
    }

    pub fn mbff(label: &str) -> Self {
        ControllerSpec {
            kind: ControllerKind::Mbff,
            ..ControllerSpec::pid(label)
        }
    }

    pub fn rbfnn(label: &str, network: NetworkSource) -> Self {
        ControllerSpec {
            kind: ControllerKind::Rbfnn,
            network: Some(network),
            ..ControllerSpec::pid(label)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.label.trim().is_empty() {
            return Err(Error::invalid("controller label must not be empty"));
        }
        match (self.kind, &self.network) {
            (ControllerKind::Rbfnn, None) => Err(Error::invalid(format!(
                "controller '{}' is rbfnn but has no network source",
                self.label
            ))),
            (ControllerKind::Rbfnn, Some(src)) => src.validate(),
            (_, Some(_)) => Err(Error::invalid(format!(
                "controller '{}' has a network source but is not rbfnn",
                self.label
            ))),
            _ => Ok(()),
        }
    }
}

/// Where the hidden-node centers of an RBFNN come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkSource {
    /// Cartesian product of `levels` repeated over `dims` input dimensions.
    Lattice {
        levels: Vec<f64>,
        #[serde(default = "default_dims")]
        dims: usize,
        sigma: f64,
    },
    /// Centers listed inline.
    Centers { centers: Matrix, sigma: f64 },
    /// Centers read from a network or centers JSON file. Relative paths are
    /// resolved against the scenario file's directory when loaded.
    CentersFile {
        path: PathBuf,
        /// Overrides the width stored in the file.
        #[serde(default)]
        sigma: Option<f64>,
    },
    /// K-means over trajectory inputs sampled across one period.
    Kmeans {
        nodes: usize,
        sigma: f64,
        #[serde(default = "default_sample_dt")]
        sample_dt: f64,
        #[serde(default)]
        init: KmeansInit,
        #[serde(default = "default_max_iters")]
        max_iters: usize,
        #[serde(default = "default_tol")]
        tol: f64,
        /// Falls back to the scenario seed.
        #[serde(default)]
        seed: Option<u64>,
    },
}

fn default_dims() -> usize {
    INPUT_DIM
}

fn default_sample_dt() -> f64 {
    0.01
}

fn default_max_iters() -> usize {
    500
}

fn default_tol() -> f64 {
    1e-9
}

/// A centers file: either a full network or just `{"centers": …, "sigma": …}`.
#[derive(Debug, Deserialize)]
struct CentersFileContents {
    centers: Matrix,
    #[serde(default)]
    sigma: Option<f64>,
    #[serde(default)]
    #[allow(dead_code)]
    weights: Option<Matrix>,
}

impl NetworkSource {
    pub fn validate(&self) -> Result<()> {
        let sigma = match self {
            NetworkSource::Lattice { levels, dims, sigma } => {
                if levels.is_empty() || *dims == 0 {
                    return Err(Error::invalid("lattice needs levels and at least one dimension"));
                }
                Some(*sigma)
            }
            NetworkSource::Centers { sigma, .. } => Some(*sigma),
            NetworkSource::CentersFile { sigma, .. } => *sigma,
            NetworkSource::Kmeans { nodes, sigma, sample_dt, .. } => {
                if *nodes == 0 {
                    return Err(Error::invalid("kmeans network needs at least one node"));
                }
                if !(*sample_dt > 0.0) {
                    return Err(Error::invalid("kmeans sample_dt must be positive"));
                }
                Some(*sigma)
            }
        };
        match sigma {
            Some(s) if !(s.is_finite() && s > 0.0) => Err(Error::invalid(format!("sigma must be positive, got {s}"))),
            _ => Ok(()),
        }
    }

    /// Centers and width, without weights.
    pub fn centers(&self, trajectory: &TrajectorySpec, seed: u64) -> Result<(Matrix, f64)> {
        self.validate()?;
        match self {
            NetworkSource::Lattice { levels, dims, sigma } => {
                Ok((rbfnet::lattice_centers(&vec![levels.clone(); *dims])?, *sigma))
            }
            NetworkSource::Centers { centers, sigma } => Ok((centers.clone(), *sigma)),
            NetworkSource::CentersFile { path, sigma } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read centers file {}: {e}", path.display())))?;
                let file: CentersFileContents = serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("centers file {}: {e}", path.display())))?;
                let width = sigma.or(file.sigma).ok_or_else(|| {
                    Error::Config(format!("no sigma for centers file {}", path.display()))
                })?;
                Ok((file.centers, width))
            }
            NetworkSource::Kmeans {
                nodes,
                sigma,
                sample_dt,
                init,
                max_iters,
                tol,
                seed: own_seed,
            } => {
                let config = KmeansConfig {
                    m: *nodes,
                    seed: own_seed.unwrap_or(seed),
                    max_iters: *max_iters,
                    tol: *tol,
                    init: *init,
                };
                let result = clustering::kmeans(&trajectory_samples(trajectory, *sample_dt)?, &config)?;
                Ok((result.centers, *sigma))
            }
        }
    }

    /// Zero-weight two-output network.
    pub fn build(&self, trajectory: &TrajectorySpec, seed: u64) -> Result<RbfNetwork> {
        let (centers, width) = self.centers(trajectory, seed)?;
        if centers.cols() != INPUT_DIM {
            return Err(Error::invalid(format!(
                "network centers have dimension {}, expected {INPUT_DIM}",
                centers.cols()
            )));
        }
        RbfNetwork::new(centers, width, 2)
    }

    fn resolve_paths(&mut self, base: &Path) {
        if let NetworkSource::CentersFile { path, .. } = self {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }
}

/// Trajectory inputs over one period as an N × 6 matrix.
pub fn trajectory_samples(trajectory: &TrajectorySpec, dt: f64) -> Result<Matrix> {
    Matrix::from_rows(&trajectory.period_inputs(dt)?)
}

/// Settings of the `pe` analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeConfig {
    #[serde(default)]
    pub t0: f64,
    /// Window length `T0` (s); defaults to two trajectory periods.
    #[serde(default, rename = "T0")]
    pub window: Option<f64>,
    #[serde(default = "default_sample_dt")]
    pub dt: f64,
    #[serde(default)]
    pub gramian_csv: bool,
}

impl Default for PeConfig {
    fn default() -> Self {
        PeConfig {
            t0: 0.0,
            window: None,
            dt: default_sample_dt(),
            gramian_csv: false,
        }
    }
}

/// The on-disk scenario: everything of [`Scenario`] but with a controller list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub robot: RobotParams,
    #[serde(default)]
    pub trajectory: TrajectorySpec,
    pub gains: GainSet,
    pub controllers: Vec<ControllerSpec>,
    pub duration: f64,
    pub dt: f64,
    #[serde(default)]
    pub initial: JointState,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default = "default_decimation")]
    pub record_decimation: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_snapshot_interval")]
    pub snapshot_interval: f64,
    /// Metrics window `[t_a, t_b]`; defaults to the last 20 s.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub pe: PeConfig,
}

fn default_decimation() -> usize {
    1
}

fn default_snapshot_interval() -> f64 {
    10.0
}

impl ScenarioFile {
    /// Reads and validates a scenario. Parse errors carry the JSON path and
    /// line/column of the offending field.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read scenario {}: {e}", path.display())))?;
        let mut file = Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for c in &mut file.controllers {
            if let Some(src) = c.network.as_mut() {
                src.resolve_paths(base);
            }
        }
        Ok(file)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Config(format!(
                "field '{path}' (line {}, column {}): {inner}",
                inner.line(),
                inner.column()
            ))
        })?;
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| match e {
            Error::InvalidArgument(msg) => Error::Config(msg),
            other => other,
        };
        if self.controllers.is_empty() {
            return Err(Error::Config("controllers: list must not be empty".into()));
        }
        // Duplicate labels are allowed; output file names carry the entry index.
        for (i, c) in self.controllers.iter().enumerate() {
            self.scenario_for(c.clone()).validate().map_err(|e| match e {
                Error::InvalidArgument(msg) => Error::Config(format!("controllers[{i}]: {msg}")),
                other => other,
            })?;
        }
        self.metrics_window().map_err(wrap)?;
        let pe = &self.pe;
        if !(pe.dt > 0.0) || pe.window.is_some_and(|w| !(w > pe.dt)) || !pe.t0.is_finite() {
            return Err(Error::Config(format!("pe: invalid window/step {:?}", pe)));
        }
        Ok(())
    }

    pub fn scenario_for(&self, controller: ControllerSpec) -> Scenario {
        Scenario {
            robot: self.robot,
            trajectory: self.trajectory.clone(),
            controller,
            gains: self.gains,
            duration: self.duration,
            dt: self.dt,
            initial: self.initial,
            integrator: self.integrator,
            record_decimation: self.record_decimation,
            seed: self.seed,
            snapshot_interval: self.snapshot_interval,
        }
    }

    /// Scenario with the first controller, used as the base of comparisons.
    pub fn base_scenario(&self) -> Scenario {
        self.scenario_for(self.controllers[0].clone())
    }

    pub fn metrics_window(&self) -> Result<[f64; 2]> {
        let w = self
            .window
            .unwrap_or([(self.duration - 20.0).max(0.0), self.duration]);
        if !(w[0].is_finite() && w[1].is_finite() && w[0] <= w[1] && w[0] >= 0.0 && w[1] <= self.duration + 1e-9) {
            return Err(Error::invalid(format!(
                "window [{}, {}] must lie within [0, {}]",
                w[0], w[1], self.duration
            )));
        }
        Ok(w)
    }

    pub fn pe_window(&self) -> f64 {
        self.pe.window.unwrap_or(2.0 * self.trajectory.period)
    }

    /// Keeps only controllers whose label is in `labels` (in the order given).
    pub fn select_controllers(&mut self, labels: &[String]) -> Result<()> {
        let mut picked = Vec::with_capacity(labels.len());
        for l in labels {
            let c = self
                .controllers
                .iter()
                .find(|c| &c.label == l)
                .ok_or_else(|| Error::Config(format!("no controller labelled '{l}' in scenario")))?;
            picked.push(c.clone());
        }
        self.controllers = picked;
        Ok(())
    }
}
