use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::overlap::{self, ConfusionCounts};
use crate::scalar::{Real, Scalar};
use crate::surface::{self, SurfaceDistanceSet};

/// A selectable evaluation metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Dice,
    Jaccard,
    Precision,
    Recall,
    Specificity,
    Accuracy,
    Fpr,
    Fnr,
    VolumeSimilarity,
    Hausdorff,
    Hausdorff95,
    MeanSurfaceDistance,
    MedianSurfaceDistance,
    StdSurfaceDistance,
}

impl Metric {
    /// Every metric in canonical order; the default selection.
    pub const ALL: [Metric; 14] = [
        Metric::Dice,
        Metric::Jaccard,
        Metric::Precision,
        Metric::Recall,
        Metric::Specificity,
        Metric::Accuracy,
        Metric::Fpr,
        Metric::Fnr,
        Metric::VolumeSimilarity,
        Metric::Hausdorff,
        Metric::Hausdorff95,
        Metric::MeanSurfaceDistance,
        Metric::MedianSurfaceDistance,
        Metric::StdSurfaceDistance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Dice => "dice",
            Metric::Jaccard => "jaccard",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::Specificity => "specificity",
            Metric::Accuracy => "accuracy",
            Metric::Fpr => "fpr",
            Metric::Fnr => "fnr",
            Metric::VolumeSimilarity => "vs",
            Metric::Hausdorff => "hd",
            Metric::Hausdorff95 => "hd95",
            Metric::MeanSurfaceDistance => "msd",
            Metric::MedianSurfaceDistance => "mdsd",
            Metric::StdSurfaceDistance => "stdsd",
        }
    }

    /// One-line definition, used in CLI help.
    pub fn description(self) -> &'static str {
        match self {
            Metric::Dice => "Dice (F1): 2TP / (2TP + FP + FN)",
            Metric::Jaccard => "Jaccard (IoU): TP / (TP + FP + FN)",
            Metric::Precision => "Precision (PPV): TP / (TP + FP)",
            Metric::Recall => "Recall (sensitivity, TPR): TP / (TP + FN)",
            Metric::Specificity => "Specificity (TNR): TN / (TN + FP)",
            Metric::Accuracy => "Accuracy (Rand index): (TP + TN) / total",
            Metric::Fpr => "False positive rate: FP / (FP + TN)",
            Metric::Fnr => "False negative rate: FN / (FN + TP)",
            Metric::VolumeSimilarity => "Volume similarity: 1 - |FN - FP| / (2TP + FP + FN)",
            Metric::Hausdorff => "Hausdorff distance: max of both directed border maxima (mm)",
            Metric::Hausdorff95 => "Hausdorff 95: max of both directed 95th percentiles (mm)",
            Metric::MeanSurfaceDistance => "Mean surface distance over both directions (mm)",
            Metric::MedianSurfaceDistance => "Median surface distance over both directions (mm)",
            Metric::StdSurfaceDistance => "Std (population) of surface distances over both directions (mm)",
        }
    }

    pub fn is_distance(self) -> bool {
        matches!(
            self,
            Metric::Hausdorff
                | Metric::Hausdorff95
                | Metric::MeanSurfaceDistance
                | Metric::MedianSurfaceDistance
                | Metric::StdSurfaceDistance
        )
    }

    /// Value of an overlap metric; `None` for distance metrics.
    pub fn overlap_value<T: Scalar>(self, c: &ConfusionCounts) -> Option<T> {
        Some(match self {
            Metric::Dice => overlap::dice(c),
            Metric::Jaccard => overlap::jaccard(c),
            Metric::Precision => overlap::precision(c),
            Metric::Recall => overlap::recall(c),
            Metric::Specificity => overlap::specificity(c),
            Metric::Accuracy => overlap::accuracy(c),
            Metric::Fpr => overlap::fpr(c),
            Metric::Fnr => overlap::fnr(c),
            Metric::VolumeSimilarity => overlap::volume_similarity(c),
            _ => return None,
        })
    }

    /// Value of a distance metric; `None` for overlap metrics.
    pub fn distance_value<T: Real>(self, s: &SurfaceDistanceSet<T>) -> Option<T> {
        Some(match self {
            Metric::Hausdorff => surface::hausdorff(s),
            Metric::Hausdorff95 => surface::hausdorff95(s),
            Metric::MeanSurfaceDistance => surface::mean_surface_distance(s),
            Metric::MedianSurfaceDistance => surface::median_surface_distance(s),
            Metric::StdSurfaceDistance => surface::std_surface_distance(s),
            _ => return None,
        })
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim();
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| Error::UnknownMetric(key.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!("dsc".parse::<Metric>(), Err(Error::UnknownMetric(n)) if n == "dsc"));
    }

    #[test]
    fn five_distance_metrics() {
        assert_eq!(Metric::ALL.iter().filter(|m| m.is_distance()).count(), 5);
    }
}
