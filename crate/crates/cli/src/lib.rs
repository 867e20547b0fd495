//! Argument handling and output for the `seg-metrics` binary.

use std::io::Write;
use std::path::PathBuf;

use clap::{CommandFactory, FromArgMatches, Parser};
use segmetrics::{evaluate, EvaluationRequest, Label, Metric, MetricRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_EVALUATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Evaluate multi-label segmentations against a reference.
#[derive(Debug, Parser)]
#[command(name = "seg-metrics", version)]
pub struct CliArgs {
    /// Reference image, or a directory of reference images
    #[arg(long, value_name = "PATH")]
    pub gdth: PathBuf,

    /// Predicted image, or a directory of predicted images
    #[arg(long, value_name = "PATH")]
    pub pred: PathBuf,

    /// Labels to evaluate, comma separated
    #[arg(long, value_name = "L1,L2,...", value_delimiter = ',', required = true, num_args = 1..)]
    pub labels: Vec<Label>,

    /// Metrics to compute, comma separated (default: all)
    #[arg(long, value_name = "m1,m2,...", value_delimiter = ',', num_args = 1..)]
    pub metrics: Option<Vec<String>>,

    /// Append results to this CSV file
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,

    /// Voxel spacing override, slowest axis first
    #[arg(long, value_name = "s0,s1,s2", value_delimiter = ',', num_args = 3)]
    pub spacing: Option<Vec<f64>>,

    /// Use the 26-neighbourhood for border extraction (default)
    #[arg(long, overrides_with = "no_fully_connected")]
    pub fully_connected: bool,

    /// Use the 6-neighbourhood for border extraction
    #[arg(long, overrides_with = "fully_connected")]
    pub no_fully_connected: bool,

    /// Add tp,tn,fp,fn columns
    #[arg(long)]
    pub tptnfpfn: bool,

    /// Print per-pair progress to stderr
    #[arg(long)]
    pub verbose: bool,
}

impl CliArgs {
    pub fn request(&self) -> segmetrics::Result<EvaluationRequest> {
        let mut req = EvaluationRequest::from_paths(self.labels.clone(), &self.gdth, &self.pred)
            .with_fully_connected(!self.no_fully_connected)
            .with_tptnfpfn(self.tptnfpfn)
            .with_verbose(self.verbose);
        if let Some(names) = &self.metrics {
            req = req.with_metric_names(names)?;
        }
        if let Some(csv) = &self.csv {
            req = req.with_csv(csv);
        }
        if let Some(s) = &self.spacing {
            req = req.with_spacing([s[0], s[1], s[2]]);
        }
        Ok(req)
    }
}

fn metric_help() -> String {
    let mut text = String::from("Metrics:\n");
    for m in Metric::ALL {
        text.push_str(&format!("  {:<12}{}\n", m.name(), m.description()));
    }
    text.push_str(
        "\nSpacing and array axes are listed slowest first (z, y, x), \
         the reverse of the order stored in image headers.",
    );
    text
}

pub fn command() -> clap::Command {
    CliArgs::command().after_help(metric_help())
}

/// Collapses clap's multi-line message to a single line.
fn usage_reason(err: &clap::Error) -> String {
    let text = err.to_string();
    let reason: Vec<&str> = text
        .lines()
        .map(str::trim)
        .take_while(|l| !l.starts_with("Usage:"))
        .filter(|l| !l.is_empty())
        .collect();
    reason.join(" ")
}

fn cell(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.4}")
    }
}

pub fn write_table(out: &mut dyn Write, records: &[MetricRecord], counts: bool) -> std::io::Result<()> {
    let Some(first) = records.first() else {
        return Ok(());
    };
    let name_width = records.iter().map(|r| r.filename.len()).max().unwrap_or(0).max(8);
    let mut header = format!("{:<name_width$}  {:>6}", "filename", "label");
    for m in first.metrics() {
        header.push_str(&format!("  {:>10}", m.name()));
    }
    if counts {
        for c in ["tp", "tn", "fp", "fn"] {
            header.push_str(&format!("  {c:>10}"));
        }
    }
    writeln!(out, "{header}")?;
    for r in records {
        let mut line = format!("{:<name_width$}  {:>6}", r.filename, r.label);
        for (_, v) in &r.values {
            line.push_str(&format!("  {:>10}", cell(*v)));
        }
        if let Some(c) = r.counts.filter(|_| counts) {
            for n in [c.tp, c.tn, c.fp, c.fn_] {
                line.push_str(&format!("  {n:>10}"));
            }
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match command()
        .try_get_matches_from(argv)
        .and_then(|m| CliArgs::from_arg_matches(&m))
    {
        Ok(args) => args,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return EXIT_OK;
            }
            let _ = writeln!(stderr, "{}", usage_reason(&e));
            let _ = writeln!(stderr, "For more information, try '--help'.");
            return EXIT_USAGE;
        }
    };

    let result = args.request().and_then(|req| evaluate(&req));
    match result {
        Ok(evaluation) => {
            for w in &evaluation.warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            if let Err(e) = write_table(stdout, &evaluation.records, args.tptnfpfn) {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_EVALUATION;
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            EXIT_EVALUATION
        }
    }
}
