//! `acep`: batch analyzer for finitely generated subgroups of free
//! groups. Subcommands: `analyze` (classification, S-detection,
//! constants), `closure` (normal-closure certificates), and `metric`
//! (`|·|_H` computations).
//!
//! Exit codes: 0 success, 1 input error, 2 inconclusive searches.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use acep::analysis::{
    analyze, metric_report, negative_json, positive_json, AnalyzeOptions, NegativeJson,
    PositiveJson, SCHEMA_VERSION,
};
use acep::closure::{
    closure_member_search, cover, quotient_nonmember, CoveringGraph, FiniteQuotient, NRep, Perm,
    QuotientLimits, SearchBudgets,
};
use acep::fiber::ProductGraph;
use acep::graph::{basis_expr_word, build_stallings, SubgroupSpec};
use acep::word::Word;
use acep::Error;

#[derive(Parser)]
#[command(name = "acep", version, about = "Stallings-automata toolkit for subgroups of free groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a subgroup, decide the S-property, compute the constants.
    Analyze(AnalyzeArgs),
    /// Search membership certificates for normal closures.
    Closure(ClosureArgs),
    /// Compute |·|_H lengths for given words.
    Metric(MetricArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Subgroup spec file: {"alphabet": [...], "generators": [...]}.
    spec: PathBuf,
    /// Directory for DOT exports of the graph and its dotted product.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// S-detector cycle-length bound (default: derived from the graph).
    #[arg(long)]
    s_bound: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Skip the Ω(H) metric section.
    #[arg(long)]
    skip_metric: bool,
}

#[derive(Args)]
struct ClosureArgs {
    /// Subgroup spec file for H.
    spec: PathBuf,
    /// Relators generating N as a normal subgroup of H, comma separated.
    #[arg(long, value_delimiter = ',')]
    relators: Vec<String>,
    /// Quotient of H as permutations in cycle notation, one per basis
    /// word, semicolon separated; N is its kernel.
    #[arg(long, conflicts_with = "relators")]
    quotient: Option<String>,
    /// Target words, repeatable or comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    target: Vec<String>,
    /// Factor budget for positive certificate search.
    #[arg(long, default_value_t = 3)]
    max_factors: usize,
    /// Conjugator length budget for positive certificate search.
    #[arg(long, default_value_t = 3)]
    max_conjugators: usize,
    /// Largest permutation degree for negative certificate search.
    #[arg(long, default_value_t = 5)]
    max_degree: usize,
    /// Write the JSON certificate set here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct MetricArgs {
    /// Subgroup spec file for H.
    spec: PathBuf,
    /// Words to measure, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    words: Vec<String>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help and version are not input errors
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Closure(args) => cmd_closure(args),
        Command::Metric(args) => cmd_metric(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn load_spec(path: &PathBuf) -> Result<SubgroupSpec, Error> {
    let text = fs::read_to_string(path)?;
    SubgroupSpec::from_json(&text)
}

fn emit<T: Serialize>(value: &T, json_path: &Option<PathBuf>) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)?;
    match json_path {
        Some(path) => fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<ExitCode, Error> {
    let spec = load_spec(&args.spec)?;
    let opts = AnalyzeOptions { s_bound: args.s_bound, skip_metric: args.skip_metric };
    let analysis = analyze(&spec, opts)?;
    if let Some(dir) = &args.dot {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("stallings.dot"), analysis.graph.to_dot(&analysis.alphabet))?;
        let product = ProductGraph::of(&analysis.graph, true);
        fs::write(dir.join("product.dot"), product.to_dot(&analysis.alphabet))?;
    }
    emit(&analysis.report, &args.json)?;
    Ok(ExitCode::from(0))
}

#[derive(Serialize)]
struct TargetJson {
    word: String,
    resolved: bool,
    /// Membership in N itself, when decidable (quotient mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    in_n: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    positive: Option<PositiveJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    negative: Option<NegativeJson>,
}

#[derive(Serialize)]
struct ClosureJson {
    schema: u32,
    targets: Vec<TargetJson>,
    max_factors: usize,
    max_conjugators: usize,
    max_degree: usize,
}

fn cmd_closure(args: ClosureArgs) -> Result<ExitCode, Error> {
    let spec = load_spec(&args.spec)?;
    let (alphabet, generators) = spec.parse()?;
    let graph = build_stallings(alphabet.rank(), &generators);
    let basis = graph.basis();
    let budgets = SearchBudgets {
        max_factors: args.max_factors,
        max_conjugator_len: args.max_conjugators,
        ..SearchBudgets::default()
    };
    let limits = QuotientLimits { max_degree: args.max_degree, ..QuotientLimits::default() };

    let targets: Vec<Word> = args
        .target
        .iter()
        .map(|t| alphabet.parse_word(t))
        .collect::<Result<_, _>>()?;

    let covering: Option<CoveringGraph> = match &args.quotient {
        Some(text) => {
            let images = text
                .split(';')
                .map(|p| Perm::parse_cycles(p.trim(), 1))
                .collect::<Result<Vec<_>, _>>()?;
            let q = FiniteQuotient::new(images)?;
            Some(cover(&graph, &basis, &q)?)
        }
        None => None,
    };
    let relators: Vec<Word> = args
        .relators
        .iter()
        .map(|r| alphabet.parse_word(r))
        .collect::<Result<_, _>>()?;
    if covering.is_none() {
        if relators.is_empty() {
            return Err(Error::InvalidSpec("need --relators or --quotient".into()));
        }
        for r in &relators {
            if !graph.member(r) {
                return Err(Error::Precondition(format!(
                    "relator {:?} is not a member of H",
                    alphabet.format_word(r)
                )));
            }
        }
    }

    let mut out = ClosureJson {
        schema: SCHEMA_VERSION,
        targets: Vec::new(),
        max_factors: args.max_factors,
        max_conjugators: args.max_conjugators,
        max_degree: args.max_degree,
    };
    let mut all_resolved = true;
    for target in &targets {
        let mut record = TargetJson {
            word: alphabet.format_word(target),
            resolved: false,
            in_n: None,
            positive: None,
            negative: None,
        };
        match &covering {
            Some(cov) => {
                let in_n = cov.graph.member(target);
                record.in_n = Some(in_n);
                if in_n {
                    record.resolved = true;
                } else {
                    let n_rep = NRep::Cover(cov);
                    if let Some(cert) =
                        closure_member_search(target, alphabet.rank(), &n_rep, &budgets)
                    {
                        record.positive = Some(positive_json(&cert, &alphabet));
                        record.resolved = true;
                    } else {
                        let f_relators = cov.graph.basis().basis_words;
                        if let Some(cert) =
                            quotient_nonmember(target, &f_relators, alphabet.rank(), &limits)
                        {
                            record.negative = Some(negative_json(
                                &cert,
                                alphabet.format_word(target),
                                "F".into(),
                                alphabet.symbols().iter().map(|c| c.to_string()).collect(),
                            ));
                            record.resolved = true;
                        }
                    }
                }
            }
            None => {
                let n_rep = NRep::Relators(&relators);
                if let Some(cert) =
                    closure_member_search(target, alphabet.rank(), &n_rep, &budgets)
                {
                    record.positive = Some(positive_json(&cert, &alphabet));
                    record.resolved = true;
                }
                // the negative side certifies exclusion from N = ⟨⟨R⟩⟩_H
                if let Some(expr) = graph.rewrite_in_basis(&basis, target) {
                    let relator_exprs: Vec<Word> = relators
                        .iter()
                        .map(|r| {
                            basis_expr_word(
                                &graph.rewrite_in_basis(&basis, r).expect("checked above"),
                            )
                        })
                        .collect();
                    if let Some(cert) = quotient_nonmember(
                        &basis_expr_word(&expr),
                        &relator_exprs,
                        basis.basis_words.len(),
                        &limits,
                    ) {
                        record.negative = Some(negative_json(
                            &cert,
                            alphabet.format_word(target),
                            "H-basis".into(),
                            basis
                                .basis_words
                                .iter()
                                .map(|w| alphabet.format_word(w))
                                .collect(),
                        ));
                        record.resolved = true;
                    }
                }
            }
        }
        all_resolved &= record.resolved;
        out.targets.push(record);
    }
    emit(&out, &args.json)?;
    Ok(ExitCode::from(if all_resolved { 0 } else { 2 }))
}

fn cmd_metric(args: MetricArgs) -> Result<ExitCode, Error> {
    let spec = load_spec(&args.spec)?;
    let report = metric_report(&spec, &args.words)?;
    emit(&report, &args.json)?;
    Ok(ExitCode::from(0))
}
