//! Overlap- and distance-based evaluation of multi-label 3D segmentations.
//!
//! Volumes are read from MetaImage or NIfTI-1 files (or built in memory),
//! compared label by label, and reported as [`MetricRecord`]s or CSV rows.
//! Distance metrics for a label share a single pair of exact Euclidean
//! distance transforms.
//!
//! The numeric core is generic over the scalar type; the aliases below fix
//! it to `f64` (what the evaluator uses) or `f32`.

pub mod error;
pub mod evaluator;
pub mod io;
pub mod metric;
pub mod overlap;
pub mod report;
pub mod scalar;
pub mod surface;
pub mod volume;

pub use error::{Error, Result, Side};
pub use evaluator::{
    evaluate, evaluate_pair, resolve_pairs, write_metrics, Evaluation, EvaluationRequest, Inputs, MetricRecord,
    PairSource, Source,
};
pub use io::{detect_format, load_metaimage, load_nifti, load_volume, Format};
pub use metric::Metric;
pub use overlap::ConfusionCounts;
pub use report::{read_csv, write_csv, CsvSchema};
pub use scalar::{Real, Scalar};
pub use surface::Connectivity;
pub use volume::{Label, LabelVolume, Mask};

pub type BorderMaskF64 = surface::BorderMask<f64>;
pub type BorderMaskF32 = surface::BorderMask<f32>;
pub type DistanceMapF64 = surface::DistanceMap<f64>;
pub type DistanceMapF32 = surface::DistanceMap<f32>;
pub type SurfaceDistanceSetF64 = surface::SurfaceDistanceSet<f64>;
pub type SurfaceDistanceSetF32 = surface::SurfaceDistanceSet<f32>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
