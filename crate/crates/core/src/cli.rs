//! The `blond` command-line tool.
//!
//! Exit codes: 0 on success, 1 when an input fails validation, 2 on I/O
//! failure (and on usage errors). Diagnostics go to stderr; stdout only ever
//! carries complete results.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::checkpoint::{build_axes, count_checkpoints, write_counts_tsv};
use crate::corpus::{load_corpus, AnnotatedDocument, CorpusError, LoadOptions};
use crate::profile::{load_profile, LanguageProfile, ProfileError};
use crate::scoring::{pair_corpus, score_corpus_variants, CorpusScores, ScoreError, Variant};
use crate::stats::{self, StatsError};

/// Directory searched for `<name>.toml` when `--profile` is a bare name.
pub const PROFILE_DIR_ENV: &str = "BLOND_PROFILE_DIR";

#[derive(Debug, Parser)]
#[command(name = "blond", version, about = "Document-level MT evaluation with discourse checkpoints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score a candidate corpus against one or more reference corpora.
    Score(ScoreArgs),
    /// Paired t-test between two per-document score files.
    Compare(CompareArgs),
    /// Pearson correlation between score files (matrix for more than two).
    Correlate(CorrelateArgs),
    /// Write per-sentence checkpoint count matrices as TSV.
    DumpCounts(InputArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    #[arg(long)]
    candidate: PathBuf,
    #[arg(long = "reference", required = true)]
    references: Vec<PathBuf>,
    /// Profile file, or a shipped profile name (en, de).
    #[arg(long)]
    profile: Option<String>,
    /// Reject NER tags the profile does not know.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Comma-separated variants, e.g. blond,dblond,blond-d+.
    #[arg(long, value_delimiter = ',', default_value = "blond")]
    variant: Vec<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    output: OutputFormat,
    /// Also write the count matrices to this file.
    #[arg(long)]
    dump_counts: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    first: PathBuf,
    second: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    output: OutputFormat,
}

#[derive(Debug, Args)]
struct CorrelateArgs {
    /// Metric score file.
    metric: PathBuf,
    /// Human assessment file, or further metric files for a matrix.
    #[arg(required = true)]
    others: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    output: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Tsv,
    Pretty,
}

#[derive(Debug)]
enum CliError {
    Invalid(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Io(m) => m,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Invalid(format!("profile: {e}")),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

impl From<ScoreError> for CliError {
    fn from(e: ScoreError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                2
            } else {
                let _ = write!(stdout, "{e}");
                0
            };
            return code;
        }
    };
    let mut buffer = Vec::new();
    let result = match cli.command {
        Command::Score(args) => cmd_score(&args, &mut buffer),
        Command::Compare(args) => cmd_compare(&args, &mut buffer),
        Command::Correlate(args) => cmd_correlate(&args, &mut buffer),
        Command::DumpCounts(args) => cmd_dump_counts(&args, &mut buffer),
    };
    match result.and_then(|()| stdout.write_all(&buffer).and_then(|()| stdout.flush()).map_err(CliError::from)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.code()
        }
    }
}

fn resolve_profile(requested: Option<&str>) -> Result<LanguageProfile, CliError> {
    let dir = std::env::var_os(PROFILE_DIR_ENV).map(PathBuf::from);
    let name = requested.unwrap_or("en");
    let as_path = Path::new(name);
    if requested.is_some() && as_path.is_file() {
        return Ok(load_profile(as_path)?);
    }
    if let Some(dir) = &dir {
        let candidate = dir.join(format!("{name}.toml"));
        if candidate.is_file() {
            return Ok(load_profile(candidate)?);
        }
    }
    LanguageProfile::builtin(name).ok_or_else(|| CliError::Io(format!("profile '{name}' not found")))
}

struct Inputs {
    profile: LanguageProfile,
    candidates: Vec<AnnotatedDocument>,
    references: Vec<Vec<AnnotatedDocument>>,
}

fn load_inputs(args: &InputArgs) -> Result<Inputs, CliError> {
    let mut profile = resolve_profile(args.profile.as_deref())?;
    if let Some(alpha) = args.alpha {
        profile.alpha = alpha;
    }
    if let Some(eps) = args.epsilon {
        profile.smoothing_epsilon = eps;
    }
    profile.validate()?;
    let options = LoadOptions { strict: args.strict };
    let candidates = load_corpus(&args.candidate, &profile, &options).map_err(|e| prefix(e.into(), &args.candidate))?;
    let mut references = Vec::with_capacity(args.references.len());
    for path in &args.references {
        references.push(load_corpus(path, &profile, &options).map_err(|e| prefix(e.into(), path))?);
    }
    Ok(Inputs { profile, candidates, references })
}

fn prefix(e: CliError, path: &Path) -> CliError {
    let msg = e.message();
    let shown = path.display().to_string();
    let msg = if msg.contains(&shown) { msg.to_string() } else { format!("{shown}: {msg}") };
    match e {
        CliError::Invalid(_) => CliError::Invalid(msg),
        CliError::Io(_) => CliError::Io(msg),
    }
}

fn parse_variants(names: &[String]) -> Result<Vec<Variant>, CliError> {
    let mut out: Vec<Variant> = Vec::new();
    for name in names.iter().filter(|n| !n.trim().is_empty()) {
        let v: Variant = name.parse().map_err(CliError::Invalid)?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(CliError::Invalid("no variant requested".into()));
    }
    Ok(out)
}

fn cmd_score(args: &ScoreArgs, out: &mut Vec<u8>) -> Result<(), CliError> {
    let variants = parse_variants(&args.variant)?;
    let inputs = load_inputs(&args.input)?;
    if variants.iter().any(|v| v.uses_ambiguity()) && inputs.references.iter().flatten().all(|d| d.ambiguity.is_none())
    {
        return Err(CliError::Invalid(
            "\"+\" variants score human-annotated ambiguity terms; add an \"ambiguity\" array to the reference documents"
                .into(),
        ));
    }
    let scored = score_corpus_variants::<f64>(&inputs.candidates, &inputs.references, &inputs.profile, &variants)?;

    if let Some(path) = &args.dump_counts {
        let mut file =
            BufWriter::new(File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?);
        dump_counts(&inputs, &mut file)?;
        file.flush()?;
    }

    match args.output {
        OutputFormat::Json => {
            let variants: Vec<Value> = scored
                .iter()
                .map(|c| {
                    json!({
                        "variant": c.summary.variant.name(),
                        "documents": c.reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
                        "summary": c.summary.to_json(),
                    })
                })
                .collect();
            serde_json::to_writer(&mut *out, &json!({ "variants": variants })).map_err(std::io::Error::from)?;
            out.push(b'\n');
        }
        OutputFormat::Tsv => write_score_tsv(&scored, out),
        OutputFormat::Pretty => write_score_pretty(&scored, out),
    }
    Ok(())
}

fn write_score_tsv(scored: &[CorpusScores<f64>], out: &mut Vec<u8>) {
    let mut s = String::new();
    for corpus in scored {
        let names: Vec<String> = corpus
            .reports
            .first()
            .map(|r| r.components.iter().map(|c| c.component.to_string()).collect())
            .unwrap_or_default();
        let _ = writeln!(s, "doc_id\tvariant\ttotal\tlp\t{}", names.join("\t"));
        for r in &corpus.reports {
            let comps: Vec<String> =
                r.components.iter().map(|c| if c.defined { format!("{:.4}", c.value) } else { "NA".into() }).collect();
            let _ = writeln!(
                s,
                "{}\t{}\t{:.4}\t{:.4}\t{}",
                r.doc_id,
                r.variant,
                r.total,
                r.length_penalty,
                comps.join("\t")
            );
        }
        let m = &corpus.summary;
        let _ =
            writeln!(s, "#summary\t{}\tmean={:.4}\tvariance={:.4}\tn_docs={}", m.variant, m.mean, m.variance, m.n_docs);
    }
    out.extend_from_slice(s.as_bytes());
}

fn write_score_pretty(scored: &[CorpusScores<f64>], out: &mut Vec<u8>) {
    let mut s = String::new();
    let id_width = scored[0].reports.iter().map(|r| r.doc_id.len()).max().unwrap_or(6).max(6);
    let _ = write!(s, "{:<id_width$}", "doc_id");
    for c in scored {
        let _ = write!(s, "  {:>18}", c.summary.variant.name());
    }
    s.push('\n');
    for i in 0..scored[0].reports.len() {
        let _ = write!(s, "{:<id_width$}", scored[0].reports[i].doc_id);
        for c in scored {
            let _ = write!(s, "  {:>18.2}", c.reports[i].total);
        }
        s.push('\n');
    }
    let _ = write!(s, "{:<id_width$}", "mean (var)");
    for c in scored {
        let cell = format!("{:.2} ({:.2})", c.summary.mean, c.summary.variance);
        let _ = write!(s, "  {cell:>18}");
    }
    s.push('\n');
    out.extend_from_slice(s.as_bytes());
}

fn dump_counts(inputs: &Inputs, out: &mut dyn Write) -> Result<(), CliError> {
    for (cand, refs) in pair_corpus(&inputs.candidates, &inputs.references)? {
        for (i, reference) in refs.iter().enumerate() {
            for axis in build_axes(reference, &inputs.profile) {
                write_counts_tsv(out, &cand.doc_id, &format!("reference[{i}]"), &count_checkpoints(reference, &axis))?;
                write_counts_tsv(
                    out,
                    &cand.doc_id,
                    &format!("candidate/reference[{i}]"),
                    &count_checkpoints(cand, &axis),
                )?;
            }
        }
    }
    Ok(())
}

fn cmd_dump_counts(args: &InputArgs, out: &mut Vec<u8>) -> Result<(), CliError> {
    let inputs = load_inputs(args)?;
    dump_counts(&inputs, out)
}

fn fmt_t(t: f64) -> String {
    if t.is_finite() {
        format!("{t:.4}")
    } else if t > 0.0 {
        "+inf".into()
    } else {
        "-inf".into()
    }
}

fn cmd_compare(args: &CompareArgs, out: &mut Vec<u8>) -> Result<(), CliError> {
    let a = stats::read_score_csv::<f64>(&args.first)?;
    let b = stats::read_score_csv::<f64>(&args.second)?;
    let result = stats::paired_t(&a, &b)?;
    match args.output {
        OutputFormat::Json => {
            let mut v = result.to_json();
            v["first"] = json!(args.first.display().to_string());
            v["second"] = json!(args.second.display().to_string());
            serde_json::to_writer(&mut *out, &v).map_err(std::io::Error::from)?;
            out.push(b'\n');
        }
        OutputFormat::Tsv => {
            let text = format!(
                "t\tp\tband\tn\n{}\t{:.4}\t{}\t{}\n",
                fmt_t(result.t),
                result.p_two_sided,
                result.band,
                result.n
            );
            out.extend_from_slice(text.as_bytes());
        }
        OutputFormat::Pretty => {
            let text = format!(
                "t = {}  p = {:.4} (two-sided)  band {} {}  n = {}\n",
                fmt_t(result.t),
                result.p_two_sided,
                result.band,
                result.band.marker(),
                result.n
            );
            out.extend_from_slice(text.as_bytes());
        }
    }
    Ok(())
}

fn cmd_correlate(args: &CorrelateArgs, out: &mut Vec<u8>) -> Result<(), CliError> {
    let mut paths = vec![args.metric.clone()];
    paths.extend(args.others.iter().cloned());
    let vectors = paths.iter().map(stats::read_score_csv::<f64>).collect::<Result<Vec<_>, _>>()?;

    if vectors.len() == 2 {
        let r = stats::pearson(&vectors[0], &vectors[1])?;
        let text = match args.output {
            OutputFormat::Json => format!("{}\n", r.to_json()),
            OutputFormat::Tsv => {
                format!("r\tci_low\tci_high\tn\n{:.4}\t{:.4}\t{:.4}\t{}\n", r.r, r.ci_low, r.ci_high, r.n)
            }
            OutputFormat::Pretty => {
                format!("r = {:.4}  95% CI ({:.4}, {:.4})  n = {}\n", r.r, r.ci_low, r.ci_high, r.n)
            }
        };
        out.extend_from_slice(text.as_bytes());
        return Ok(());
    }

    let labels: Vec<String> = vectors.iter().map(|v| v.system_id.clone()).collect();
    let matrix = stats::correlation_matrix(&vectors)?;
    if args.output == OutputFormat::Json {
        serde_json::to_writer(&mut *out, &json!({ "labels": labels, "r": matrix })).map_err(std::io::Error::from)?;
        out.push(b'\n');
    } else {
        let mut s = format!("\t{}\n", labels.join("\t"));
        for (label, row) in labels.iter().zip(&matrix) {
            let cells: Vec<String> = row.iter().map(|r| format!("{r:.4}")).collect();
            let _ = writeln!(s, "{label}\t{}", cells.join("\t"));
        }
        out.extend_from_slice(s.as_bytes());
    }
    Ok(())
}
