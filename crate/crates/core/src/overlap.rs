//! Confusion counts and the overlap-based metrics derived from them.
//!
//! Every ratio is generic over [`Scalar`] so it can be evaluated in `f32`,
//! `f64` or an exact rational type. Degenerate denominators follow one rule:
//! agreement metrics (dice, jaccard, precision, recall, specificity,
//! accuracy, volume similarity) score an empty-vs-empty comparison as 1 and
//! error rates (fpr, fnr) score it as 0.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::volume::{Label, LabelVolume, Mask};

/// Voxel-level confusion matrix of a prediction against its reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub const fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Voxels in the reference mask.
    pub fn reference_size(&self) -> u64 {
        self.tp + self.fn_
    }

    /// Voxels in the predicted mask.
    pub fn prediction_size(&self) -> u64 {
        self.tp + self.fp
    }

    /// Counts with the roles of reference and prediction exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.tp, self.fn_, self.fp, self.tn)
    }
}

/// Tallies the confusion matrix of `prediction` against `reference`.
pub fn confusion(reference: &Mask, prediction: &Mask) -> Result<ConfusionCounts> {
    if reference.dims() != prediction.dims() {
        return Err(Error::DimsMismatch(reference.dims(), prediction.dims()));
    }
    let mut c = ConfusionCounts::default();
    for (&r, &p) in reference.as_slice().iter().zip(prediction.as_slice()) {
        match (r, p) {
            (true, true) => c.tp += 1,
            (true, false) => c.fn_ += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Confusion matrix for one label straight from two label volumes, without
/// materializing the binary masks.
pub fn confusion_for_label(reference: &LabelVolume, prediction: &LabelVolume, label: Label) -> Result<ConfusionCounts> {
    if reference.dims() != prediction.dims() {
        return Err(Error::DimsMismatch(reference.dims(), prediction.dims()));
    }
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for (&r, &p) in reference.voxels().iter().zip(prediction.voxels()) {
        let (r, p) = (r == label, p == label);
        tp += (r & p) as u64;
        fn_ += (r & !p) as u64;
        fp += (!r & p) as u64;
    }
    let total = reference.len() as u64;
    Ok(ConfusionCounts::new(tp, fp, fn_, total - tp - fp - fn_))
}

#[inline]
fn ratio<T: Scalar>(num: u64, den: u64, if_empty: T) -> T {
    if den == 0 {
        if_empty
    } else {
        T::from_count(num) / T::from_count(den)
    }
}

/// `2·tp / (2·tp + fp + fn)`, also known as F1.
pub fn dice<T: Scalar>(c: &ConfusionCounts) -> T {
    ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_, T::one())
}

/// `tp / (tp + fp + fn)`, intersection over union.
pub fn jaccard<T: Scalar>(c: &ConfusionCounts) -> T {
    ratio(c.tp, c.tp + c.fp + c.fn_, T::one())
}

/// `tp / (tp + fp)`; an empty prediction scores 1 only if the reference is empty too.
pub fn precision<T: Scalar>(c: &ConfusionCounts) -> T {
    let empty = if c.reference_size() == 0 { T::one() } else { T::zero() };
    ratio(c.tp, c.prediction_size(), empty)
}

/// `tp / (tp + fn)`, sensitivity; an empty reference scores 1 only if the prediction is empty too.
pub fn recall<T: Scalar>(c: &ConfusionCounts) -> T {
    let empty = if c.prediction_size() == 0 { T::one() } else { T::zero() };
    ratio(c.tp, c.reference_size(), empty)
}

/// `tn / (tn + fp)`, true negative rate.
pub fn specificity<T: Scalar>(c: &ConfusionCounts) -> T {
    ratio(c.tn, c.tn + c.fp, T::one())
}

/// `(tp + tn) / total`.
pub fn accuracy<T: Scalar>(c: &ConfusionCounts) -> T {
    ratio(c.tp + c.tn, c.total(), T::one())
}

/// `fp / (fp + tn)`.
pub fn fpr<T: Scalar>(c: &ConfusionCounts) -> T {
    ratio(c.fp, c.fp + c.tn, T::zero())
}

/// `fn / (fn + tp)`.
pub fn fnr<T: Scalar>(c: &ConfusionCounts) -> T {
    ratio(c.fn_, c.fn_ + c.tp, T::zero())
}

/// `1 − |fn − fp| / (2·tp + fp + fn)`.
pub fn volume_similarity<T: Scalar>(c: &ConfusionCounts) -> T {
    T::one() - ratio(c.fn_.abs_diff(c.fp), 2 * c.tp + c.fp + c.fn_, T::zero())
}
