use serde::Serialize;

use consensus_core::forest::DEFAULT_ENUMERATION_CAP;
use consensus_core::{
    eigenprojector_at_zero, maximal_forest_matrix, rank_report, scc_decompose, spectral_report,
    Digraph, Error, RankReport, SpectralReport, Tolerances,
};

use crate::{to_json, CliError, Outcome, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy)]
pub struct AnalyzeOptions {
    pub tolerances: Tolerances,
    pub forest_cap: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            tolerances: Tolerances::default(),
            forest_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub graph: GraphInfo,
    pub rank_report: RankJson,
    pub components: ComponentsJson,
    pub spectral: SpectralJson,
    pub eigenprojector: EigenprojectorJson,
    pub forest: ForestJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphInfo {
    pub n: usize,
    pub arc_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankJson {
    pub n: usize,
    pub c: usize,
    pub num_sink_sccs: usize,
    pub d: usize,
    pub rank_corrected: usize,
    pub rank_lemma2_original: usize,
    pub lemma2_formula_valid: bool,
    pub sccs_pairwise_disconnected: bool,
}

impl From<RankReport> for RankJson {
    fn from(r: RankReport) -> Self {
        RankJson {
            n: r.n,
            c: r.c,
            num_sink_sccs: r.num_sink_sccs,
            d: r.d,
            rank_corrected: r.rank_corrected,
            rank_lemma2_original: r.rank_lemma2_original,
            lemma2_formula_valid: r.lemma2_formula_valid,
            sccs_pairwise_disconnected: r.sccs_pairwise_disconnected,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentsJson {
    pub components: Vec<Vec<usize>>,
    pub sink_components: Vec<usize>,
    pub condensation_arcs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralJson {
    /// `[re, im]` pairs.
    pub eigenvalues: Vec<[f64; 2]>,
    pub numerical_rank: usize,
    pub zero_multiplicity: usize,
    pub min_nonzero_real_part: Option<f64>,
    pub localization_holds: bool,
    pub zero_tol: f64,
    pub rank_tol: f64,
    pub zero_threshold: f64,
}

impl SpectralJson {
    fn new(r: &SpectralReport, tol: Tolerances) -> Self {
        SpectralJson {
            eigenvalues: r.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            numerical_rank: r.numerical_rank,
            zero_multiplicity: r.zero_multiplicity,
            min_nonzero_real_part: r.min_nonzero_real_part,
            localization_holds: r.localization_holds,
            zero_tol: tol.zero_tol,
            rank_tol: tol.rank_tol,
            zero_threshold: r.zero_threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenprojectorJson {
    pub d: usize,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ForestJson {
    Computed {
        d: usize,
        total_weight: f64,
        forest_count: usize,
        j_matrix: Vec<Vec<f64>>,
    },
    Skipped {
        reason: String,
    },
}

pub fn analysis_report(g: &Digraph, opts: AnalyzeOptions) -> Result<AnalysisReport, CliError> {
    let scc = scc_decompose(g);
    let rank = rank_report(g);
    let spectral = spectral_report(g, opts.tolerances)?;
    let projector = eigenprojector_at_zero(g)?;

    let forest = match maximal_forest_matrix(g, opts.forest_cap) {
        Ok(s) => ForestJson::Computed {
            d: s.d,
            total_weight: s.total_weight,
            forest_count: s.forest_count,
            j_matrix: s.j_matrix.to_rows(),
        },
        Err(Error::GraphTooLargeForEnumeration(reason)) => ForestJson::Skipped { reason },
        Err(e) => return Err(e.into()),
    };

    if spectral.numerical_rank != rank.rank_corrected {
        return Err(CliError::Inconsistent(format!(
            "numerical rank {} differs from n - d = {}",
            spectral.numerical_rank, rank.rank_corrected
        )));
    }
    if spectral.zero_multiplicity != rank.d {
        return Err(CliError::Inconsistent(format!(
            "zero eigenvalue multiplicity {} differs from d = {}",
            spectral.zero_multiplicity, rank.d
        )));
    }

    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        command: "analyze",
        graph: GraphInfo {
            n: g.order(),
            arc_count: g.arc_count(),
        },
        rank_report: rank.into(),
        components: ComponentsJson {
            sink_components: scc.sinks().collect(),
            components: scc.components,
            condensation_arcs: scc.condensation_arcs,
        },
        spectral: SpectralJson::new(&spectral, opts.tolerances),
        eigenprojector: EigenprojectorJson {
            d: projector.d,
            matrix: projector.matrix.to_rows(),
        },
        forest,
    })
}

pub fn analyze(g: &Digraph, opts: AnalyzeOptions) -> Result<Outcome, CliError> {
    let report = analysis_report(g, opts)?;
    Ok(Outcome {
        json: to_json(&report),
        success: true,
    })
}
