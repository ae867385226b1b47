//! Cross-method verification: every quantity that can be computed two ways is
//! computed both ways and compared.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use consensus_core::dynamics::{
    default_step_size, simulate_continuous_strided, simulate_discrete_strided, DEFAULT_DT,
};
use consensus_core::forest::DEFAULT_ENUMERATION_CAP;
use consensus_core::generate::{all_unit_digraphs, random_digraph, random_state, seeded_rng};
use consensus_core::scc::is_strongly_connected;
use consensus_core::spectral::within_gershgorin;
use consensus_core::{
    cesaro_limit, eigenprojector_at_zero, has_spanning_converging_tree, maximal_forest_matrix,
    numerical_rank, perron_properties, power_limit, rank_report, spectral_report, Digraph, Error,
    SquareMatrix, Tolerances,
};

use crate::simulate::{DEFAULT_STEPS, DEFAULT_T_END, RANDOM_STATE_RANGE};
use crate::{max_abs_diff, read_graph, to_json, CliError, Outcome, SCHEMA_VERSION};

pub const MAX_EXHAUSTIVE_ORDER: usize = 4;
pub const DEFAULT_CESARO_TERMS: usize = 10_000;

pub const PROJECTOR_TOL: f64 = 1e-9;
pub const POWER_TOL: f64 = 1e-8;
pub const CESARO_TOL: f64 = 1e-2;
pub const TRAJECTORY_TOL: f64 = 1e-6;
pub const LOCALIZATION_MARGIN: f64 = 1e-9;
const STOCHASTIC_TOL: f64 = 1e-12;

/// Weight range and arc probability of the random verification graphs.
pub const RANDOM_WEIGHTS: (f64, f64) = (0.1, 2.0);
pub const RANDOM_ARC_PROB: f64 = 0.5;

#[derive(Debug, Clone)]
pub enum GraphSource {
    File(PathBuf),
    /// Every labeled unit-weight digraph on `n` nodes.
    Exhaustive(usize),
    /// `count` weighted digraphs with 3, 4 or 5 nodes.
    Random {
        count: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub tolerances: Tolerances,
    pub forest_cap: usize,
    pub cesaro_terms: usize,
    pub dt: f64,
    pub t_end: f64,
    pub steps: usize,
    /// Seed for the random initial states of the trajectory checks.
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tolerances: Tolerances::default(),
            forest_cap: DEFAULT_ENUMERATION_CAP,
            cesaro_terms: DEFAULT_CESARO_TERMS,
            dt: DEFAULT_DT,
            t_end: DEFAULT_T_END,
            steps: DEFAULT_STEPS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The uncorrected rank formula failing, as it must on graphs whose
    /// components are joined by arcs.
    ExpectedFailure,
    Skipped,
}

struct CheckDef {
    name: &'static str,
    metric: Option<&'static str>,
    tolerance: Option<f64>,
    /// Whether the worst value over graphs is the minimum rather than the maximum.
    worst_is_min: bool,
}

const fn check(
    name: &'static str,
    metric: Option<&'static str>,
    tolerance: Option<f64>,
) -> CheckDef {
    CheckDef {
        name,
        metric,
        tolerance,
        worst_is_min: false,
    }
}

const MAX_DEV: Option<&str> = Some("max_abs_deviation");

const CHECKS: &[CheckDef] = &[
    check("lemma2_original_formula", None, None),
    check("rank_formula", None, None),
    check("zero_multiplicity", None, None),
    CheckDef {
        name: "localization",
        metric: Some("min_nonzero_real_part"),
        tolerance: Some(LOCALIZATION_MARGIN),
        worst_is_min: true,
    },
    check("gershgorin", None, None),
    check("spanning_tree_equivalence", None, None),
    check("in_forest_dimension", None, None),
    check("eigenprojector", None, None),
    check("forest_vs_eigenprojector", MAX_DEV, Some(PROJECTOR_TOL)),
    check(
        "eigenprojector_algebra",
        Some("max_abs_residual"),
        Some(PROJECTOR_TOL),
    ),
    check("perron_thresholds", None, None),
    check("power_limit", MAX_DEV, Some(POWER_TOL)),
    check("cesaro_limit", MAX_DEV, Some(CESARO_TOL)),
    check("trajectory_continuous", MAX_DEV, Some(TRAJECTORY_TOL)),
    check("trajectory_discrete", MAX_DEV, Some(TRAJECTORY_TOL)),
    check("consensus", Some("final_spread"), Some(TRAJECTORY_TOL)),
];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub status: Status,
    pub value: Option<f64>,
    pub detail: Option<String>,
}

impl CheckResult {
    fn pass(value: Option<f64>) -> Self {
        CheckResult {
            status: Status::Pass,
            value,
            detail: None,
        }
    }

    fn fail(value: Option<f64>, detail: impl Into<String>) -> Self {
        CheckResult {
            status: Status::Fail,
            value,
            detail: Some(detail.into()),
        }
    }

    fn skipped(detail: impl Into<String>) -> Self {
        CheckResult {
            status: Status::Skipped,
            value: None,
            detail: Some(detail.into()),
        }
    }

    /// Pass iff `cond`; otherwise fail with `detail`.
    fn expect(cond: bool, value: Option<f64>, detail: impl FnOnce() -> String) -> Self {
        if cond {
            Self::pass(value)
        } else {
            Self::fail(value, detail())
        }
    }

    fn within(value: f64, tol: f64) -> Self {
        Self::expect(value <= tol, Some(value), || {
            format!("{value:e} exceeds {tol:e}")
        })
    }

    pub fn from_error(err: &Error) -> Self {
        Self::fail(None, err.to_string())
    }
}

fn idempotence_and_annihilation(j: &SquareMatrix, l: &SquareMatrix) -> f64 {
    j.mul(j)
        .max_abs_diff(j)
        .max(l.mul(j).max_abs())
        .max(j.mul(l).max_abs())
}

fn spread(x: &[f64]) -> f64 {
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

fn reaches_all_oracle(g: &Digraph) -> bool {
    // BFS on reversed arcs from every candidate root
    let n = g.order();
    let mut incoming = vec![Vec::new(); n];
    for a in g.arcs() {
        incoming[a.target].push(a.source);
    }
    (0..n).any(|root| {
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut queue = vec![root];
        while let Some(v) = queue.pop() {
            for &u in &incoming[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    })
}

/// Runs every check on one graph, in [`CHECKS`] order.
pub fn check_graph(g: &Digraph, graph_id: u64, opts: &VerifyOptions) -> Vec<CheckResult> {
    let n = g.order();
    let l = g.laplacian();
    let rank = rank_report(g);
    let d = rank.d;
    let mut out = Vec::with_capacity(CHECKS.len());

    out.push(if rank.lemma2_formula_valid {
        CheckResult::pass(None)
    } else {
        CheckResult {
            status: Status::ExpectedFailure,
            value: None,
            detail: Some(format!(
                "n - c = {} but rank(L) = n - d = {} (c = {}, d = {})",
                rank.rank_lemma2_original, rank.rank_corrected, rank.c, d
            )),
        }
    });

    match spectral_report(g, opts.tolerances) {
        Ok(s) => {
            out.push(CheckResult::expect(s.numerical_rank == n - d, None, || {
                format!("numerical rank {} but n - d = {}", s.numerical_rank, n - d)
            }));
            out.push(CheckResult::expect(s.zero_multiplicity == d, None, || {
                format!("zero multiplicity {} but d = {d}", s.zero_multiplicity)
            }));
            let margin_ok = s
                .min_nonzero_real_part
                .is_none_or(|m| m > LOCALIZATION_MARGIN);
            out.push(CheckResult::expect(
                s.localization_holds && margin_ok,
                s.min_nonzero_real_part,
                || {
                    format!(
                        "nonzero eigenvalue with real part {:?}",
                        s.min_nonzero_real_part
                    )
                },
            ));
            let slack = 1e-9 * l.max_abs().max(1.0);
            let outside = s
                .eigenvalues
                .iter()
                .find(|z| !within_gershgorin(&l, **z, slack));
            out.push(CheckResult::expect(outside.is_none(), None, || {
                format!("eigenvalue {:?} outside every Gershgorin disk", outside)
            }));
        }
        Err(e) => out.extend(std::iter::repeat_n(CheckResult::from_error(&e), 4)),
    }

    let oracle = reaches_all_oracle(g);
    out.push(CheckResult::expect(
        has_spanning_converging_tree(g) == oracle,
        None,
        || format!("d = {d} but reachability oracle says {oracle}"),
    ));

    let forest = match maximal_forest_matrix(g, opts.forest_cap) {
        Ok(s) => Ok(Some(s)),
        Err(Error::GraphTooLargeForEnumeration(reason)) => Err(CheckResult::skipped(reason)),
        Err(e) => Err(CheckResult::from_error(&e)),
    };
    let forest_j = forest
        .as_ref()
        .ok()
        .and_then(|s| s.as_ref())
        .map(|s| &s.j_matrix);
    out.push(match &forest {
        Ok(Some(s)) => CheckResult::expect(s.d == d, None, || {
            format!("fewest trees {} but sink count {d}", s.d)
        }),
        Ok(None) => unreachable!(),
        Err(skip) => skip.clone(),
    });

    let projector = eigenprojector_at_zero(g);
    out.push(match &projector {
        Ok(_) => CheckResult::pass(None),
        Err(e) => CheckResult::from_error(e),
    });
    let proj_j = projector.as_ref().ok().map(|p| &p.matrix);

    out.push(match (forest_j, proj_j, &forest) {
        (Some(f), Some(p), _) => CheckResult::within(f.max_abs_diff(p), PROJECTOR_TOL),
        (_, None, _) => CheckResult::fail(None, "eigenprojector unavailable"),
        (None, _, Err(skip)) => skip.clone(),
        (None, _, Ok(_)) => unreachable!(),
    });

    let candidates: Vec<&SquareMatrix> = [proj_j, forest_j].into_iter().flatten().collect();
    out.push(if candidates.is_empty() {
        CheckResult::fail(None, "no limit matrix available")
    } else {
        let mut worst = 0.0f64;
        let mut bad_rank = None;
        for j in &candidates {
            worst = worst.max(idempotence_and_annihilation(j, &l));
            match numerical_rank(j, opts.tolerances.rank_tol) {
                Ok(r) if r == d => {}
                Ok(r) => bad_rank = Some(format!("rank of J is {r} but d = {d}")),
                Err(e) => bad_rank = Some(e.to_string()),
            }
        }
        match bad_rank {
            Some(msg) => CheckResult::fail(Some(worst), msg),
            None => CheckResult::within(worst, PROJECTOR_TOL),
        }
    });

    let delta = g.max_out_degree();
    out.push(if delta == 0.0 {
        CheckResult::pass(None)
    } else {
        match (
            perron_properties(g, 1.0 / delta),
            perron_properties(g, 2.0 / delta),
        ) {
            (Ok(at), Ok(over)) => {
                let p = g.perron_matrix(1.0 / delta).expect("positive step");
                let row_err = p
                    .row_sums()
                    .iter()
                    .fold(0.0f64, |m, s| m.max((s - 1.0).abs()));
                CheckResult::expect(
                    at.nonnegative
                        && at.row_stochastic
                        && at.within_threshold
                        && row_err <= STOCHASTIC_TOL
                        && !over.nonnegative
                        && !over.within_threshold,
                    Some(row_err),
                    || format!("eps = 1/max_degree: {at:?}; eps = 2/max_degree: {over:?}"),
                )
            }
            (Err(e), _) | (_, Err(e)) => CheckResult::from_error(&e),
        }
    });

    let reference = forest_j.or(proj_j);
    let eps = default_step_size(g);
    out.push(match (reference, power_limit(g, eps, 64, 1e-13)) {
        (Some(j), Ok(p)) => CheckResult::within(p.matrix.max_abs_diff(j), POWER_TOL),
        (None, _) => CheckResult::fail(None, "no limit matrix available"),
        (_, Err(e)) => CheckResult::from_error(&e),
    });
    out.push(match (reference, cesaro_limit(g, eps, opts.cesaro_terms)) {
        (Some(j), Ok(c)) => CheckResult::within(c.matrix.max_abs_diff(j), CESARO_TOL),
        (None, _) => CheckResult::fail(None, "no limit matrix available"),
        (_, Err(e)) => CheckResult::from_error(&e),
    });

    let (lo, hi) = RANDOM_STATE_RANGE;
    let x0 = random_state(
        &mut seeded_rng(opts.seed ^ graph_id.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        n,
        lo..=hi,
    );
    let target = reference.map(|j| j.mul_vec(&x0));
    let continuous = simulate_continuous_strided(g, &x0, opts.t_end, opts.dt, usize::MAX);
    out.push(match (&target, &continuous) {
        (Some(t), Ok(tr)) => CheckResult::within(max_abs_diff(t, tr.final_state()), TRAJECTORY_TOL),
        (None, _) => CheckResult::fail(None, "no limit matrix available"),
        (_, Err(e)) => CheckResult::from_error(e),
    });
    let discrete = simulate_discrete_strided(g, eps, &x0, opts.steps, usize::MAX);
    out.push(match (&target, &discrete) {
        (Some(t), Ok(tr)) => CheckResult::within(max_abs_diff(t, tr.final_state()), TRAJECTORY_TOL),
        (None, _) => CheckResult::fail(None, "no limit matrix available"),
        (_, Err(e)) => CheckResult::from_error(e),
    });
    out.push(if !is_strongly_connected(g) {
        CheckResult::skipped("not strongly connected")
    } else {
        match &continuous {
            Ok(tr) => CheckResult::within(spread(tr.final_state()), TRAJECTORY_TOL),
            Err(e) => CheckResult::from_error(e),
        }
    });

    debug_assert_eq!(out.len(), CHECKS.len());
    out
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceJson {
    File { path: String },
    Exhaustive { n: usize },
    Random { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureJson {
    pub graph_id: u64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub name: &'static str,
    pub status: Status,
    pub metric: Option<&'static str>,
    pub tolerance: Option<f64>,
    pub worst: Option<f64>,
    pub passed: usize,
    pub failed: usize,
    pub expected_failures: usize,
    pub skipped: usize,
    pub first_failure: Option<FailureJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub source: SourceJson,
    pub seed: u64,
    pub graphs_checked: usize,
    pub passed: bool,
    pub checks: Vec<CheckSummary>,
}

fn summarize(def: &CheckDef, results: &[(u64, &CheckResult)]) -> CheckSummary {
    let count = |s: Status| results.iter().filter(|(_, r)| r.status == s).count();
    let (passed, failed, expected, skipped) = (
        count(Status::Pass),
        count(Status::Fail),
        count(Status::ExpectedFailure),
        count(Status::Skipped),
    );
    let status = if failed > 0 {
        Status::Fail
    } else if expected > 0 {
        Status::ExpectedFailure
    } else if passed == 0 && skipped > 0 {
        Status::Skipped
    } else {
        Status::Pass
    };
    let values = results.iter().filter_map(|(_, r)| r.value);
    let worst = if def.worst_is_min {
        values.min_by(f64::total_cmp)
    } else {
        values.max_by(f64::total_cmp)
    };
    let first_failure = results
        .iter()
        .find(|(_, r)| r.status == Status::Fail)
        .map(|(id, r)| FailureJson {
            graph_id: *id,
            detail: r.detail.clone().unwrap_or_default(),
        });
    CheckSummary {
        name: def.name,
        status,
        metric: def.metric,
        tolerance: def.tolerance,
        worst,
        passed,
        failed,
        expected_failures: expected,
        skipped,
        first_failure,
    }
}

/// Checks every graph (in parallel) and merges the results by graph id.
pub fn verify_graphs(
    source: SourceJson,
    graphs: &[(u64, Digraph)],
    opts: &VerifyOptions,
) -> VerifyReport {
    let per_graph: Vec<(u64, Vec<CheckResult>)> = graphs
        .par_iter()
        .map(|(id, g)| (*id, check_graph(g, *id, opts)))
        .collect();

    let checks: Vec<CheckSummary> = CHECKS
        .iter()
        .enumerate()
        .map(|(k, def)| {
            let column: Vec<(u64, &CheckResult)> =
                per_graph.iter().map(|(id, rs)| (*id, &rs[k])).collect();
            summarize(def, &column)
        })
        .collect();

    VerifyReport {
        schema_version: SCHEMA_VERSION,
        command: "verify",
        source,
        seed: opts.seed,
        graphs_checked: graphs.len(),
        passed: checks.iter().all(|c| c.status != Status::Fail),
        checks,
    }
}

/// Graphs for [`GraphSource::Random`]: orders cycle through 3, 4, 5.
pub fn random_graph_set(count: usize, seed: u64) -> Vec<(u64, Digraph)> {
    let mut rng = seeded_rng(seed);
    let (lo, hi) = RANDOM_WEIGHTS;
    (0..count)
        .map(|i| {
            (
                i as u64,
                random_digraph(&mut rng, 3 + i % 3, RANDOM_ARC_PROB, lo..=hi),
            )
        })
        .collect()
}

pub fn verify_report(source: &GraphSource, opts: &VerifyOptions) -> Result<VerifyReport, CliError> {
    let (label, graphs) = match source {
        GraphSource::File(path) => (
            SourceJson::File {
                path: path.display().to_string(),
            },
            vec![(0, read_graph(path)?)],
        ),
        GraphSource::Exhaustive(n) => {
            if !(1..=MAX_EXHAUSTIVE_ORDER).contains(n) {
                return Err(CliError::Usage(format!(
                    "--exhaustive supports 1..={MAX_EXHAUSTIVE_ORDER} nodes, got {n}"
                )));
            }
            (
                SourceJson::Exhaustive { n: *n },
                all_unit_digraphs(*n).collect(),
            )
        }
        GraphSource::Random { count, seed } => (
            SourceJson::Random {
                count: *count,
                seed: *seed,
            },
            random_graph_set(*count, *seed),
        ),
    };
    Ok(verify_graphs(label, &graphs, opts))
}

pub fn verify(source: &GraphSource, opts: &VerifyOptions) -> Result<Outcome, CliError> {
    let report = verify_report(source, opts)?;
    Ok(Outcome {
        json: to_json(&report),
        success: report.passed,
    })
}
