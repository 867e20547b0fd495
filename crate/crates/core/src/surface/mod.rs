//! Border extraction, distance transforms and surface-distance metrics.
//!
//! [`surface_distance_set`] runs exactly one distance transform per
//! direction; every distance metric is then a cheap reduction over the two
//! directed multisets it returns.

mod border;
mod edt;
mod stats;

pub use border::{extract_border, BorderMask, Connectivity};
pub use edt::{distance_transform, DistanceMap};
pub use stats::{
    hausdorff, hausdorff95, mean_surface_distance, median_surface_distance, percentile, std_surface_distance,
};

use crate::error::{Error, Result, Side};
use crate::scalar::Real;
use crate::volume::Mask;

/// Samples `dmap_to` at every voxel of `from`, in memory order.
pub fn directed_distances<T: Real>(from: &BorderMask<T>, dmap_to: &DistanceMap<T>) -> Result<Vec<T>> {
    if from.dims() != dmap_to.dims() {
        return Err(Error::DimsMismatch(from.dims(), dmap_to.dims()));
    }
    let values = dmap_to.values();
    Ok(from
        .mask()
        .as_slice()
        .iter()
        .zip(values)
        .filter_map(|(&b, &d)| b.then_some(d))
        .collect())
}

/// Both directed border-to-border distance multisets for one mask pair.
///
/// Each multiset is kept sorted ascending so percentile queries need no
/// further work.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDistanceSet<T: Real> {
    ref_to_pred: Vec<T>,
    pred_to_ref: Vec<T>,
    transforms: usize,
}

impl<T: Real> SurfaceDistanceSet<T> {
    /// Builds a set from raw directed samples (any order).
    pub fn from_directed(mut ref_to_pred: Vec<T>, mut pred_to_ref: Vec<T>) -> Result<Self> {
        if ref_to_pred.is_empty() {
            return Err(Error::EmptySurface(Side::Reference));
        }
        if pred_to_ref.is_empty() {
            return Err(Error::EmptySurface(Side::Prediction));
        }
        sort(&mut ref_to_pred);
        sort(&mut pred_to_ref);
        Ok(Self {
            ref_to_pred,
            pred_to_ref,
            transforms: 0,
        })
    }

    /// Distances from each reference border voxel to the prediction border, ascending.
    pub fn ref_to_pred(&self) -> &[T] {
        &self.ref_to_pred
    }

    /// Distances from each prediction border voxel to the reference border, ascending.
    pub fn pred_to_ref(&self) -> &[T] {
        &self.pred_to_ref
    }

    /// Number of distance transforms that were run to build this set.
    pub fn transforms(&self) -> usize {
        self.transforms
    }

    pub fn swapped(&self) -> Self {
        Self {
            ref_to_pred: self.pred_to_ref.clone(),
            pred_to_ref: self.ref_to_pred.clone(),
            transforms: self.transforms,
        }
    }

    /// Both multisets merged, ascending.
    pub fn pooled(&self) -> Vec<T> {
        let (a, b) = (&self.ref_to_pred, &self.pred_to_ref);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                out.push(a[i]);
                i += 1;
            } else {
                out.push(b[j]);
                j += 1;
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        out
    }
}

fn sort<T: Real>(v: &mut [T]) {
    v.sort_unstable_by(|a, b| a.partial_cmp(b).expect("distances are never NaN"));
}

/// Extracts both borders and measures them against each other.
pub fn surface_distance_set<T: Real>(
    reference: &Mask,
    prediction: &Mask,
    spacing: [T; 3],
    connectivity: Connectivity,
) -> Result<SurfaceDistanceSet<T>> {
    if reference.dims() != prediction.dims() {
        return Err(Error::DimsMismatch(reference.dims(), prediction.dims()));
    }
    let ref_border = extract_border(reference, spacing, connectivity);
    if ref_border.is_empty() {
        return Err(Error::EmptySurface(Side::Reference));
    }
    let pred_border = extract_border(prediction, spacing, connectivity);
    if pred_border.is_empty() {
        return Err(Error::EmptySurface(Side::Prediction));
    }

    // one map alive at a time
    let ref_to_pred = {
        let to_pred = distance_transform(&pred_border)?;
        directed_distances(&ref_border, &to_pred)?
    };
    let pred_to_ref = {
        let to_ref = distance_transform(&ref_border)?;
        directed_distances(&pred_border, &to_ref)?
    };

    let mut set = SurfaceDistanceSet::from_directed(ref_to_pred, pred_to_ref)?;
    set.transforms = 2;
    Ok(set)
}
