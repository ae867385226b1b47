use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use consensus_core::dynamics::{
    default_step_size, simulate_continuous_strided, simulate_discrete_strided,
    DEFAULT_CONTINUOUS_STRIDE, DEFAULT_DISCRETE_STRIDE, DEFAULT_DT,
};
use consensus_core::forest::DEFAULT_ENUMERATION_CAP;
use consensus_core::generate::{random_state, seeded_rng};
use consensus_core::{eigenprojector_at_zero, maximal_forest_matrix, Digraph, Error, SquareMatrix};

use crate::{max_abs_diff, to_json, CliError, Outcome, SCHEMA_VERSION};

pub const DEFAULT_T_END: f64 = 50.0;
pub const DEFAULT_STEPS: usize = 10_000;
/// Random initial states are drawn uniformly from this interval.
pub const RANDOM_STATE_RANGE: (f64, f64) = (-10.0, 10.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulationMode {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Values(Vec<f64>),
    File(PathBuf),
    /// Uniform in [`RANDOM_STATE_RANGE`]; `None` falls back to the `--seed` value.
    Random(Option<u64>),
}

impl InitialState {
    /// `random`, `random:<seed>`, a comma-separated list, or a file path.
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let spec = spec.trim();
        if spec == "random" {
            return Ok(InitialState::Random(None));
        }
        if let Some(seed) = spec.strip_prefix("random:") {
            let seed = seed
                .parse()
                .map_err(|_| CliError::Usage(format!("invalid seed in x0 spec `{spec}`")))?;
            return Ok(InitialState::Random(Some(seed)));
        }
        if let Some(values) = parse_numbers(spec) {
            return Ok(InitialState::Values(values));
        }
        Ok(InitialState::File(PathBuf::from(spec)))
    }
}

fn parse_numbers(text: &str) -> Option<Vec<f64>> {
    let values: Option<Vec<f64>> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().ok())
        .collect();
    values.filter(|v| !v.is_empty())
}

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub mode: SimulationMode,
    pub x0: InitialState,
    /// Defaults to `1 / (2 * max out-degree)`.
    pub eps: Option<f64>,
    pub dt: f64,
    pub t_end: f64,
    pub steps: usize,
    /// Defaults to 10 for continuous runs and 1 for discrete runs.
    pub stride: Option<usize>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub forest_cap: usize,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        SimulateOptions {
            mode: SimulationMode::Continuous,
            x0: InitialState::Random(None),
            eps: None,
            dt: DEFAULT_DT,
            t_end: DEFAULT_T_END,
            steps: DEFAULT_STEPS,
            stride: None,
            seed: 0,
            output: None,
            forest_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub schema_version: u32,
    pub command: &'static str,
    pub mode: SimulationMode,
    pub n: usize,
    pub seed: u64,
    pub x0: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    pub stride: usize,
    pub recorded_rows: usize,
    pub output: Option<String>,
    pub final_state: Vec<f64>,
    /// `J x0`, from forest enumeration when the graph is small enough and from
    /// the eigenprojector otherwise.
    pub predicted_limit: Option<Vec<f64>>,
    pub limit_source: Option<&'static str>,
    pub max_deviation: Option<f64>,
}

fn resolve_state(spec: &InitialState, n: usize, seed: u64) -> Result<(Vec<f64>, u64), CliError> {
    match spec {
        InitialState::Values(v) => Ok((v.clone(), seed)),
        InitialState::File(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let v = parse_numbers(&text).ok_or_else(|| {
                CliError::Usage(format!("{}: expected a list of numbers", path.display()))
            })?;
            Ok((v, seed))
        }
        InitialState::Random(explicit) => {
            let seed = explicit.unwrap_or(seed);
            let (lo, hi) = RANDOM_STATE_RANGE;
            Ok((random_state(&mut seeded_rng(seed), n, lo..=hi), seed))
        }
    }
}

/// Reference limit matrix: forest enumeration when feasible, else the
/// eigenprojector. `None` if neither can be computed.
pub(crate) fn limit_matrix(g: &Digraph, forest_cap: usize) -> Option<(SquareMatrix, &'static str)> {
    match maximal_forest_matrix(g, forest_cap) {
        Ok(s) => Some((s.j_matrix, "forest_enumeration")),
        Err(Error::GraphTooLargeForEnumeration(_)) => eigenprojector_at_zero(g)
            .ok()
            .map(|p| (p.matrix, "eigenprojector")),
        Err(_) => None,
    }
}

fn write_csv(path: &Path, traj: &consensus_core::Trajectory) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    traj.write_csv(BufWriter::new(file)).map_err(io_err)
}

pub fn simulate(g: &Digraph, opts: &SimulateOptions) -> Result<Outcome, CliError> {
    let n = g.order();
    let (x0, seed) = resolve_state(&opts.x0, n, opts.seed)?;

    let (traj, eps, stride) = match opts.mode {
        SimulationMode::Continuous => {
            let stride = opts.stride.unwrap_or(DEFAULT_CONTINUOUS_STRIDE);
            let t = simulate_continuous_strided(g, &x0, opts.t_end, opts.dt, stride)?;
            (t, None, stride)
        }
        SimulationMode::Discrete => {
            let stride = opts.stride.unwrap_or(DEFAULT_DISCRETE_STRIDE);
            let eps = opts.eps.unwrap_or_else(|| default_step_size(g));
            let t = simulate_discrete_strided(g, eps, &x0, opts.steps, stride)?;
            (t, Some(eps), stride)
        }
    };

    if let Some(path) = &opts.output {
        write_csv(path, &traj)?;
    }

    let final_state = traj.final_state().to_vec();
    let limit = limit_matrix(g, opts.forest_cap);
    let predicted = limit.as_ref().map(|(j, _)| j.mul_vec(&x0));
    let continuous = opts.mode == SimulationMode::Continuous;

    let summary = SimulationSummary {
        schema_version: SCHEMA_VERSION,
        command: "simulate",
        mode: opts.mode,
        n,
        seed,
        eps,
        dt: continuous.then_some(opts.dt),
        t_end: continuous.then_some(opts.t_end),
        steps: (!continuous).then_some(opts.steps),
        stride,
        recorded_rows: traj.len(),
        output: opts.output.as_ref().map(|p| p.display().to_string()),
        max_deviation: predicted.as_ref().map(|p| max_abs_diff(p, &final_state)),
        predicted_limit: predicted,
        limit_source: limit.map(|(_, src)| src),
        final_state,
        x0,
    };
    Ok(Outcome {
        json: to_json(&summary),
        success: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn parses_state_specs() {
        assert_eq!(
            InitialState::parse("0,2").unwrap(),
            InitialState::Values(vec![0.0, 2.0])
        );
        assert_eq!(
            InitialState::parse("random:42").unwrap(),
            InitialState::Random(Some(42))
        );
        assert_eq!(
            InitialState::parse("random").unwrap(),
            InitialState::Random(None)
        );
        assert_eq!(
            InitialState::parse("states.txt").unwrap(),
            InitialState::File(PathBuf::from("states.txt"))
        );
        assert!(InitialState::parse("random:x").is_err());
    }

    #[test]
    fn discrete_two_cycle_summary() {
        let g = Digraph::unit(2, [(0, 1), (1, 0)]).unwrap();
        let opts = SimulateOptions {
            mode: SimulationMode::Discrete,
            x0: InitialState::Values(vec![0.0, 2.0]),
            eps: Some(0.5),
            steps: 5,
            ..SimulateOptions::default()
        };
        let v: Value = serde_json::from_str(&simulate(&g, &opts).unwrap().json).unwrap();
        assert_eq!(v["final_state"], serde_json::json!([1.0, 1.0]));
        assert!(v["max_deviation"].as_f64().unwrap() <= 1e-12);
        assert_eq!(v["recorded_rows"], 6);
    }

    #[test]
    fn zero_horizon_keeps_only_x0() {
        let g = Digraph::unit(2, [(0, 1), (1, 0)]).unwrap();
        let opts = SimulateOptions {
            x0: InitialState::Values(vec![0.0, 2.0]),
            t_end: 0.0,
            ..SimulateOptions::default()
        };
        let v: Value = serde_json::from_str(&simulate(&g, &opts).unwrap().json).unwrap();
        assert_eq!(v["recorded_rows"], 1);
        assert_eq!(v["final_state"], serde_json::json!([0.0, 2.0]));
    }

    #[test]
    fn random_state_echoes_seed() {
        let g = Digraph::empty(3).unwrap();
        let opts = SimulateOptions {
            x0: InitialState::Random(Some(9)),
            seed: 1,
            t_end: 0.1,
            ..SimulateOptions::default()
        };
        let v: Value = serde_json::from_str(&simulate(&g, &opts).unwrap().json).unwrap();
        assert_eq!(v["seed"], 9);
        assert!(v["x0"]
            .as_array()
            .unwrap()
            .iter()
            .all(|x| x.as_f64().unwrap().abs() <= 10.0));
    }

    #[test]
    fn dimension_mismatch_is_a_validation_error() {
        let g = Digraph::empty(3).unwrap();
        let opts = SimulateOptions {
            x0: InitialState::Values(vec![1.0]),
            ..SimulateOptions::default()
        };
        let err = simulate(&g, &opts).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
