//! Batch analysis pipeline: classification, S-detection, constants, and
//! the serialized report consumed by the CLI and the C API.

use serde::Serialize;

use crate::closure::{NegativeCertificate, PositiveCertificate};
use crate::fiber::{classify, CaseLabel, ComponentWitness};
use crate::graph::{build_stallings, StallingsGraph, SubgroupSpec};
use crate::metric::{constants, normalizer_warning, omega, BallFamily, Constants};
use crate::sdetect::{default_bound, is_s_subgroup, SVerdict};
use crate::word::Alphabet;
use crate::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// What the whole pipeline concluded about ACEP. `no_ACEP` is set exactly
/// when the case is 2 or 3 or the S-detector verified a witness; nothing
/// else may set it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AcepVerdict {
    #[serde(rename = "has_ACEP")]
    HasAcep,
    #[serde(rename = "no_ACEP")]
    NoAcep,
    #[serde(rename = "undetermined")]
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphStats {
    pub vertices: usize,
    pub edges: usize,
    pub rank: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessJson {
    pub w: String,
    pub a: String,
    pub verified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SReportJson {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
    pub bound: usize,
    /// Whether a negative answer is exact rather than bounded evidence.
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationJson {
    pub case: u8,
    pub by_case: String,
    pub witnesses: Vec<ComponentWitness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MetricSection {
    pub omega_members: usize,
    pub omega_ranks: Vec<usize>,
    pub normalizer_warning: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub input: SubgroupSpec,
    pub graph: GraphStats,
    pub classification: ClassificationJson,
    pub s_subgroup: SReportJson,
    pub verdict: AcepVerdict,
    pub constants: Constants,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSection>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AnalyzeOptions {
    pub s_bound: Option<usize>,
    pub skip_metric: bool,
}

pub struct Analysis {
    pub alphabet: Alphabet,
    pub graph: StallingsGraph,
    pub report: AnalysisReport,
}

pub fn analyze(spec: &SubgroupSpec, opts: AnalyzeOptions) -> Result<Analysis, Error> {
    let (alphabet, generators) = spec.parse()?;
    let graph = build_stallings(alphabet.rank(), &generators);
    let classification = classify(&graph);
    let bound = opts.s_bound.unwrap_or_else(|| default_bound(&graph)).max(1);
    let s_verdict = is_s_subgroup(&graph, bound);

    let case = match classification.case {
        CaseLabel::Case1 => 1,
        CaseLabel::Case2 => 2,
        CaseLabel::Case3 => 3,
        CaseLabel::Case4 => 4,
    };
    // Only two inference paths exist: the case taxonomy and a verified
    // S-witness.
    let verdict = match classification.case {
        CaseLabel::Case1 => AcepVerdict::HasAcep,
        CaseLabel::Case2 | CaseLabel::Case3 => AcepVerdict::NoAcep,
        CaseLabel::Case4 => {
            if s_verdict.is_yes() {
                AcepVerdict::NoAcep
            } else {
                AcepVerdict::Undetermined
            }
        }
    };
    let s_subgroup = match &s_verdict {
        SVerdict::Yes(witness) => SReportJson {
            status: "yes".into(),
            witness: Some(WitnessJson {
                w: alphabet.format_word(&witness.w),
                a: alphabet.format_word(&witness.a),
                verified: true,
            }),
            bound,
            exact: true,
        },
        SVerdict::NoWithinBound { bound, exact } => SReportJson {
            status: "no_within_bound".into(),
            witness: None,
            bound: *bound,
            exact: *exact,
        },
        SVerdict::Unknown { bound } => SReportJson {
            status: "unknown".into(),
            witness: None,
            bound: *bound,
            exact: false,
        },
    };

    let consts = constants(&graph);
    let metric = if opts.skip_metric {
        None
    } else {
        let family = omega(&graph);
        Some(MetricSection {
            omega_members: family.len(),
            omega_ranks: family.members.iter().map(|m| m.graph.subgroup_rank()).collect(),
            normalizer_warning: normalizer_warning(&graph, &family),
        })
    };

    let report = AnalysisReport {
        schema: SCHEMA_VERSION,
        input: spec.clone(),
        graph: GraphStats {
            vertices: graph.vertex_count(),
            edges: graph.edge_count(),
            rank: graph.subgroup_rank(),
        },
        classification: ClassificationJson {
            case,
            by_case: match classification.verdict {
                crate::fiber::CaseVerdict::HasAcep => "has_ACEP".into(),
                crate::fiber::CaseVerdict::NoAcep => "no_ACEP".into(),
                crate::fiber::CaseVerdict::UndeterminedByCase => "undetermined".into(),
            },
            witnesses: classification.witness_reports(&alphabet),
        },
        s_subgroup,
        verdict,
        constants: consts,
        metric,
    };
    Ok(Analysis { alphabet, graph, report })
}

/// Per-word record of the metric report.
#[derive(Clone, Debug, Serialize)]
pub struct MetricRecord {
    pub word: String,
    pub length: usize,
    pub h_length: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MetricReport {
    pub schema: u32,
    pub constants: Constants,
    pub normalizer_warning: bool,
    pub omega_members: usize,
    pub records: Vec<MetricRecord>,
    /// Automaton sizes of the balls built while answering, k ascending.
    pub ball_states: Vec<usize>,
}

pub fn metric_report(spec: &SubgroupSpec, words: &[String]) -> Result<MetricReport, Error> {
    let (alphabet, generators) = spec.parse()?;
    let graph = build_stallings(alphabet.rank(), &generators);
    let consts = constants(&graph);
    let family = omega(&graph);
    let warning = normalizer_warning(&graph, &family);
    let members = family.len();
    let mut balls = BallFamily::new(alphabet.rank(), family);
    let mut records = Vec::new();
    for text in words {
        let word = alphabet.parse_word(text)?;
        records.push(MetricRecord {
            word: alphabet.format_word(&word),
            length: word.len(),
            h_length: balls.length(&word),
        });
    }
    Ok(MetricReport {
        schema: SCHEMA_VERSION,
        constants: consts,
        normalizer_warning: warning,
        omega_members: members,
        records,
        ball_states: balls.ball_state_counts(),
    })
}

/// Serialized positive certificate.
#[derive(Clone, Debug, Serialize)]
pub struct PositiveJson {
    pub kind: &'static str,
    pub target: String,
    pub factors: Vec<FactorJson>,
    pub verified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorJson {
    pub conjugator: String,
    pub relator: String,
    pub sign: i8,
}

pub fn positive_json(cert: &PositiveCertificate, alphabet: &Alphabet) -> PositiveJson {
    PositiveJson {
        kind: "positive",
        target: alphabet.format_word(&cert.target),
        factors: cert
            .factors
            .iter()
            .map(|f| FactorJson {
                conjugator: alphabet.format_word(&f.conjugator),
                relator: alphabet.format_word(&f.relator),
                sign: if f.inverted { -1 } else { 1 },
            })
            .collect(),
        verified: true,
    }
}

/// Serialized negative certificate; `source` names the free group the
/// quotient is defined on, and `generators` spells its generators.
#[derive(Clone, Debug, Serialize)]
pub struct NegativeJson {
    pub kind: &'static str,
    pub target: String,
    pub source: String,
    pub degree: usize,
    pub generators: Vec<String>,
    pub images: Vec<String>,
    pub verified: bool,
}

pub fn negative_json(
    cert: &NegativeCertificate,
    target_display: String,
    source: String,
    generators: Vec<String>,
) -> NegativeJson {
    NegativeJson {
        kind: "negative",
        target: target_display,
        source,
        degree: cert.quotient.degree,
        generators,
        images: cert.quotient.images.iter().map(|p| p.to_cycles()).collect(),
        verified: true,
    }
}

/// Consistency guard used by tests and the CLI: the final verdict agrees
/// with the taxonomy and the S-result.
pub fn verdict_is_consistent(report: &AnalysisReport) -> bool {
    let s_yes = report.s_subgroup.status == "yes";
    match report.verdict {
        AcepVerdict::HasAcep => report.classification.case == 1 && !s_yes,
        AcepVerdict::NoAcep => matches!(report.classification.case, 2 | 3) || s_yes,
        AcepVerdict::Undetermined => report.classification.case == 4 && !s_yes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(alphabet: &[&str], generators: &[&str]) -> SubgroupSpec {
        SubgroupSpec {
            alphabet: alphabet.iter().map(|s| s.to_string()).collect(),
            generators: generators.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn analyze_h1_yields_no_acep() {
        let analysis =
            analyze(&spec(&["x", "y"], &["xxx", "Yxxxy"]), AnalyzeOptions::default()).unwrap();
        assert_eq!(analysis.report.classification.case, 4);
        assert_eq!(analysis.report.s_subgroup.status, "yes");
        assert_eq!(analysis.report.verdict, AcepVerdict::NoAcep);
        assert!(verdict_is_consistent(&analysis.report));
    }

    #[test]
    fn analyze_h2_stays_undetermined() {
        let analysis =
            analyze(&spec(&["x", "y"], &["xxx", "yyy"]), AnalyzeOptions::default()).unwrap();
        assert_eq!(analysis.report.classification.case, 4);
        assert_eq!(analysis.report.s_subgroup.status, "no_within_bound");
        assert_eq!(analysis.report.verdict, AcepVerdict::Undetermined);
        assert!(verdict_is_consistent(&analysis.report));
    }

    #[test]
    fn analyze_single_generator_has_acep() {
        let analysis =
            analyze(&spec(&["x", "y"], &["x"]), AnalyzeOptions::default()).unwrap();
        assert_eq!(analysis.report.classification.case, 1);
        assert_eq!(analysis.report.verdict, AcepVerdict::HasAcep);
        assert!(verdict_is_consistent(&analysis.report));
        assert_eq!(analysis.report.constants, Constants { diam_gamma: 0, c: 1, c_h: 6 });
    }

    #[test]
    fn analyze_rank_four_example() {
        let analysis = analyze(
            &spec(&["a", "b", "c"], &["aaaa", "aaba", "acaa", "bC"]),
            AnalyzeOptions::default(),
        )
        .unwrap();
        assert_eq!(analysis.report.graph.rank, 4);
        assert_eq!(analysis.report.classification.case, 4);
        assert_eq!(analysis.report.s_subgroup.status, "no_within_bound");
        assert_eq!(analysis.report.verdict, AcepVerdict::Undetermined);
    }

    #[test]
    fn report_serializes_deterministically() {
        let a1 = analyze(&spec(&["x", "y"], &["xx", "yy"]), AnalyzeOptions::default()).unwrap();
        let a2 = analyze(&spec(&["x", "y"], &["xx", "yy"]), AnalyzeOptions::default()).unwrap();
        let j1 = serde_json::to_string_pretty(&a1.report).unwrap();
        let j2 = serde_json::to_string_pretty(&a2.report).unwrap();
        assert_eq!(j1, j2);
        assert!(j1.contains("\"schema\": 1"));
    }

    #[test]
    fn metric_report_basics() {
        let report = metric_report(&spec(&["x", "y"], &["y"]), &["".into(), "xxx".into()])
            .unwrap();
        assert_eq!(report.records[0].h_length, 0);
        assert_eq!(report.records[1].h_length, 3);
        assert!(!report.normalizer_warning);
    }

    #[test]
    fn skip_metric_omits_section() {
        let analysis = analyze(
            &spec(&["x", "y"], &["xx", "yy"]),
            AnalyzeOptions { skip_metric: true, ..Default::default() },
        )
        .unwrap();
        assert!(analysis.report.metric.is_none());
    }
}
