//! Batch evaluation: pairing inputs, iterating labels and assembling records.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{is_supported, load_volume};
use crate::metric::Metric;
use crate::overlap::{confusion_for_label, ConfusionCounts};
use crate::report::{write_csv, CsvSchema};
use crate::surface::{surface_distance_set, Connectivity};
use crate::volume::{Label, LabelVolume};

/// Filename reported for in-memory inputs.
pub const MEMORY_FILENAME: &str = "<memory>";

/// Largest per-axis spacing difference tolerated between a pair.
pub const SPACING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub enum Inputs {
    /// Two files, or two directories matched by filename.
    Paths { gdth: PathBuf, pred: PathBuf },
    /// Volumes paired by position.
    Volumes {
        gdth: Vec<LabelVolume>,
        pred: Vec<LabelVolume>,
    },
}

/// Fully resolved evaluation settings.
#[derive(Debug, Clone)]
pub struct EvaluationRequest {
    pub labels: Vec<Label>,
    pub inputs: Inputs,
    pub csv_path: Option<PathBuf>,
    /// `None` selects every metric in canonical order.
    pub metrics: Option<Vec<Metric>>,
    /// Replaces the spacing of every input, slowest axis first.
    pub spacing: Option<[f64; 3]>,
    pub fully_connected: bool,
    pub tptnfpfn: bool,
    pub verbose: bool,
}

impl EvaluationRequest {
    pub fn new(labels: Vec<Label>, inputs: Inputs) -> Self {
        Self {
            labels,
            inputs,
            csv_path: None,
            metrics: None,
            spacing: None,
            fully_connected: true,
            tptnfpfn: false,
            verbose: false,
        }
    }

    pub fn from_paths(labels: Vec<Label>, gdth: impl Into<PathBuf>, pred: impl Into<PathBuf>) -> Self {
        Self::new(
            labels,
            Inputs::Paths {
                gdth: gdth.into(),
                pred: pred.into(),
            },
        )
    }

    pub fn from_volumes(labels: Vec<Label>, gdth: Vec<LabelVolume>, pred: Vec<LabelVolume>) -> Self {
        Self::new(labels, Inputs::Volumes { gdth, pred })
    }

    pub fn with_metrics(mut self, metrics: Vec<Metric>) -> Self {
        self.metrics = Some(metrics);
        self
    }

    /// Parses metric names; fails on the first unknown one.
    pub fn with_metric_names<S: AsRef<str>>(self, names: &[S]) -> Result<Self> {
        let metrics = names
            .iter()
            .map(|n| n.as_ref().parse())
            .collect::<Result<Vec<Metric>>>()?;
        Ok(self.with_metrics(metrics))
    }

    pub fn with_csv(mut self, path: impl Into<PathBuf>) -> Self {
        self.csv_path = Some(path.into());
        self
    }

    pub fn with_spacing(mut self, spacing: [f64; 3]) -> Self {
        self.spacing = Some(spacing);
        self
    }

    pub fn with_fully_connected(mut self, fully_connected: bool) -> Self {
        self.fully_connected = fully_connected;
        self
    }

    pub fn with_tptnfpfn(mut self, tptnfpfn: bool) -> Self {
        self.tptnfpfn = tptnfpfn;
        self
    }

    pub fn with_verbose(mut self, verbose: bool) -> Self {
        self.verbose = verbose;
        self
    }

    /// Requested metrics, defaulting to all of them.
    pub fn selected_metrics(&self) -> Vec<Metric> {
        self.metrics.clone().unwrap_or_else(|| Metric::ALL.to_vec())
    }

    pub fn schema(&self) -> CsvSchema {
        CsvSchema::new(self.selected_metrics(), self.tptnfpfn)
    }

    pub fn validate(&self) -> Result<()> {
        if self.labels.is_empty() {
            return Err(Error::InvalidRequest("at least one label is required".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = self.labels.iter().find(|l| !seen.insert(**l)) {
            return Err(Error::InvalidRequest(format!("label {dup} listed twice")));
        }
        if let Some(metrics) = &self.metrics {
            if metrics.is_empty() {
                return Err(Error::InvalidRequest("metric list is empty".into()));
            }
            let mut seen = HashSet::new();
            if let Some(dup) = metrics.iter().find(|m| !seen.insert(**m)) {
                return Err(Error::InvalidRequest(format!("metric {dup} listed twice")));
            }
        }
        if let Some(spacing) = self.spacing {
            crate::volume::validate_spacing(spacing)?;
        }
        if let Inputs::Volumes { gdth, pred } = &self.inputs {
            if gdth.is_empty() || gdth.len() != pred.len() {
                return Err(Error::InvalidRequest(format!(
                    "{} ground-truth volumes for {} predictions",
                    gdth.len(),
                    pred.len()
                )));
            }
        }
        Ok(())
    }
}

/// Metric values for one (file, label).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub filename: String,
    pub label: Label,
    /// Requested metrics in request order. Distance values are NaN when a
    /// surface was empty.
    pub values: Vec<(Metric, f64)>,
    pub counts: Option<ConfusionCounts>,
    /// Distance transforms executed for this record.
    pub distance_transforms: usize,
}

impl MetricRecord {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        self.values.iter().find(|(m, _)| *m == metric).map(|(_, v)| *v)
    }

    pub fn get_named(&self, name: &str) -> Option<f64> {
        name.parse().ok().and_then(|m| self.get(m))
    }

    pub fn metrics(&self) -> impl Iterator<Item = Metric> + '_ {
        self.values.iter().map(|(m, _)| *m)
    }
}

/// Where one side of a pair comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    File(PathBuf),
    Memory(usize),
}

impl Source {
    fn display(&self) -> String {
        match self {
            Source::File(p) => p.display().to_string(),
            Source::Memory(i) => format!("{MEMORY_FILENAME}[{i}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSource {
    pub gdth: Source,
    pub pred: Source,
    /// Name written to the report.
    pub filename: String,
}

/// Records plus any non-fatal diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Evaluation {
    pub records: Vec<MetricRecord>,
    pub warnings: Vec<String>,
}

/// Pairs up the inputs. Unpaired files in directory mode become warnings.
pub fn resolve_pairs(request: &EvaluationRequest) -> Result<(Vec<PairSource>, Vec<String>)> {
    match &request.inputs {
        Inputs::Volumes { gdth, pred } => Ok((
            (0..gdth.len().min(pred.len()))
                .map(|i| PairSource {
                    gdth: Source::Memory(i),
                    pred: Source::Memory(i),
                    filename: MEMORY_FILENAME.to_string(),
                })
                .collect(),
            Vec::new(),
        )),
        Inputs::Paths { gdth, pred } => {
            let gdth_meta = metadata(gdth)?;
            let pred_meta = metadata(pred)?;
            match (gdth_meta.is_dir(), pred_meta.is_dir()) {
                (false, false) => Ok((
                    vec![PairSource {
                        gdth: Source::File(gdth.clone()),
                        pred: Source::File(pred.clone()),
                        filename: file_name(pred),
                    }],
                    Vec::new(),
                )),
                (true, true) => pair_directories(gdth, pred),
                _ => Err(Error::MixedMode),
            }
        }
    }
}

fn metadata(path: &Path) -> Result<std::fs::Metadata> {
    std::fs::metadata(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn list_images(dir: &Path) -> Result<BTreeSet<String>> {
    let entries = std::fs::read_dir(dir).map_err(|source| Error::File {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut names = BTreeSet::new();
    for entry in entries {
        let entry = entry?;
        let path = entry.path();
        if path.is_file() && is_supported(&path) {
            names.insert(entry.file_name().to_string_lossy().into_owned());
        }
    }
    Ok(names)
}

fn pair_directories(gdth: &Path, pred: &Path) -> Result<(Vec<PairSource>, Vec<String>)> {
    let gdth_names = list_images(gdth)?;
    let pred_names = list_images(pred)?;
    let pairs: Vec<PairSource> = gdth_names
        .intersection(&pred_names)
        .map(|name| PairSource {
            gdth: Source::File(gdth.join(name)),
            pred: Source::File(pred.join(name)),
            filename: name.clone(),
        })
        .collect();
    if pairs.is_empty() {
        return Err(Error::NoMatches(gdth.to_path_buf(), pred.to_path_buf()));
    }
    let warnings = gdth_names
        .symmetric_difference(&pred_names)
        .map(|name| {
            let side = if gdth_names.contains(name) { gdth } else { pred };
            format!("unpaired file {} skipped", side.join(name).display())
        })
        .collect();
    Ok((pairs, warnings))
}

/// Evaluates every requested label of one volume pair.
pub fn evaluate_pair(
    gdth: &LabelVolume,
    pred: &LabelVolume,
    request: &EvaluationRequest,
    filename: &str,
) -> Result<Evaluation> {
    if gdth.dims() != pred.dims() {
        return Err(Error::DimsMismatch(gdth.dims(), pred.dims()));
    }
    let spacing = request.spacing.unwrap_or(gdth.spacing());
    if request.spacing.is_none() {
        let other = pred.spacing();
        if spacing
            .iter()
            .zip(other)
            .any(|(a, b)| (a - b).abs() > SPACING_TOLERANCE)
        {
            return Err(Error::SpacingMismatch(spacing, other));
        }
    }

    let metrics = request.selected_metrics();
    let wants_distance = metrics.iter().any(|m| m.is_distance());
    let connectivity = Connectivity::from_fully_connected(request.fully_connected);

    let mut out = Evaluation::default();
    for &label in &request.labels {
        let counts = confusion_for_label(gdth, pred, label)?;

        let surfaces = if wants_distance {
            match surface_distance_set(&gdth.binarize(label), &pred.binarize(label), spacing, connectivity) {
                Ok(set) => Some(set),
                Err(Error::EmptySurface(side)) => {
                    out.warnings.push(format!(
                        "{filename}, label {label}: {side} mask is empty, distance metrics set to nan"
                    ));
                    None
                }
                Err(e) => return Err(e),
            }
        } else {
            None
        };

        let values = metrics
            .iter()
            .map(|&m| {
                let v = if m.is_distance() {
                    surfaces.as_ref().and_then(|s| m.distance_value(s)).unwrap_or(f64::NAN)
                } else {
                    m.overlap_value(&counts).expect("overlap metric")
                };
                (m, v)
            })
            .collect();

        out.records.push(MetricRecord {
            filename: filename.to_string(),
            label,
            values,
            counts: request.tptnfpfn.then_some(counts),
            distance_transforms: surfaces.as_ref().map_or(0, |s| s.transforms()),
        });
    }
    Ok(out)
}

fn load(source: &Source, request: &EvaluationRequest, gdth_side: bool) -> Result<LabelVolume> {
    match (source, &request.inputs) {
        (Source::File(path), _) => load_volume(path, request.spacing),
        (Source::Memory(i), Inputs::Volumes { gdth, pred }) => {
            let vol = if gdth_side { &gdth[*i] } else { &pred[*i] }.clone();
            match request.spacing {
                Some(s) => vol.with_spacing(s),
                None => Ok(vol),
            }
        }
        (Source::Memory(_), Inputs::Paths { .. }) => Err(Error::InvalidRequest("in-memory source in path mode".into())),
    }
}

/// Resolves, loads and evaluates everything; returns records in pair-then-label order.
///
/// Pairs are evaluated in parallel, but output order always follows the
/// sorted pair order. The first failing pair aborts the run.
pub fn evaluate(request: &EvaluationRequest) -> Result<Evaluation> {
    request.validate()?;
    let (pairs, mut warnings) = resolve_pairs(request)?;
    let total = pairs.len();

    let per_pair: Vec<Evaluation> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, pair)| {
            if request.verbose {
                eprintln!("[{}/{}] {}", i + 1, total, pair.filename);
            }
            let wrap = |e: Error| Error::Pair {
                gdth: pair.gdth.display(),
                pred: pair.pred.display(),
                source: Box::new(e),
            };
            let gdth = load(&pair.gdth, request, true).map_err(wrap)?;
            let pred = load(&pair.pred, request, false).map_err(wrap)?;
            evaluate_pair(&gdth, &pred, request, &pair.filename).map_err(wrap)
        })
        .collect::<Result<_>>()?;

    let mut out = Evaluation::default();
    out.warnings.append(&mut warnings);
    for mut e in per_pair {
        out.records.append(&mut e.records);
        out.warnings.append(&mut e.warnings);
    }
    if let Some(path) = &request.csv_path {
        write_csv(&out.records, &request.schema(), path, true)?;
    }
    Ok(out)
}

/// Evaluates the request, appends to its CSV if one is set, and returns the records.
///
/// Warnings go to the `log` facade.
pub fn write_metrics(request: &EvaluationRequest) -> Result<Vec<MetricRecord>> {
    let evaluation = evaluate(request)?;
    for w in &evaluation.warnings {
        log::warn!("{w}");
    }
    Ok(evaluation.records)
}
