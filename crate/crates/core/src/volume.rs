//! In-memory label volumes and binary masks.
//!
//! Axis order everywhere in this crate is memory order, slowest-varying first:
//! index `[a0, a1, a2]` lives at offset `(a0 * dims[1] + a1) * dims[2] + a2`.

use crate::error::{Error, Result};

/// Integer class label stored per voxel.
pub type Label = u32;

/// Grid extents, slowest axis first.
pub type Dims = [usize; 3];

#[inline]
pub(crate) fn voxel_count(dims: Dims) -> usize {
    dims[0] * dims[1] * dims[2]
}

#[inline]
pub(crate) fn offset(dims: Dims, idx: [usize; 3]) -> usize {
    (idx[0] * dims[1] + idx[1]) * dims[2] + idx[2]
}

#[inline]
pub(crate) fn unravel(dims: Dims, off: usize) -> [usize; 3] {
    let a2 = off % dims[2];
    let rest = off / dims[2];
    [rest / dims[1], rest % dims[1], a2]
}

pub(crate) fn validate_spacing(spacing: [f64; 3]) -> Result<()> {
    if spacing.iter().all(|s| s.is_finite() && *s > 0.0) {
        Ok(())
    } else {
        Err(Error::InvalidSpacing(spacing))
    }
}

/// A dense 3D grid of labels with physical voxel spacing in millimetres.
///
/// Immutable once built; cheap to share between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelVolume {
    dims: Dims,
    voxels: Vec<Label>,
    spacing: [f64; 3],
}

impl LabelVolume {
    pub fn new(dims: Dims, voxels: Vec<Label>, spacing: [f64; 3]) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidDims(dims));
        }
        let expected = voxel_count(dims);
        if voxels.len() != expected {
            return Err(Error::DataSizeMismatch {
                expected,
                actual: voxels.len(),
            });
        }
        validate_spacing(spacing)?;
        Ok(Self { dims, voxels, spacing })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn voxels(&self) -> &[Label] {
        &self.voxels
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    pub fn get(&self, idx: [usize; 3]) -> Label {
        self.voxels[offset(self.dims, idx)]
    }

    /// Returns the same grid with a different spacing.
    pub fn with_spacing(mut self, spacing: [f64; 3]) -> Result<Self> {
        validate_spacing(spacing)?;
        self.spacing = spacing;
        Ok(self)
    }

    /// Mask that is true exactly where the voxel equals `label`.
    pub fn binarize(&self, label: Label) -> Mask {
        Mask {
            dims: self.dims,
            data: self.voxels.iter().map(|&v| v == label).collect(),
        }
    }
}

/// Boolean voxel grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    dims: Dims,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(dims: Dims, data: Vec<bool>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidDims(dims));
        }
        if data.len() != voxel_count(dims) {
            return Err(Error::DataSizeMismatch {
                expected: voxel_count(dims),
                actual: data.len(),
            });
        }
        Ok(Self { dims, data })
    }

    pub fn empty(dims: Dims) -> Self {
        Self {
            dims,
            data: vec![false; voxel_count(dims)],
        }
    }

    /// Mask with the given voxels set.
    pub fn from_indices(dims: Dims, indices: &[[usize; 3]]) -> Self {
        let mut mask = Self::empty(dims);
        for &idx in indices {
            mask.set(idx, true);
        }
        mask
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, idx: [usize; 3]) -> bool {
        self.data[offset(self.dims, idx)]
    }

    pub fn set(&mut self, idx: [usize; 3], value: bool) {
        let off = offset(self.dims, idx);
        self.data[off] = value;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    /// Indices of all set voxels in memory order.
    pub fn indices(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let dims = self.dims;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(off, _)| unravel(dims, off))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(values: &[Label]) -> LabelVolume {
        LabelVolume::new([1, 1, values.len()], values.to_vec(), [1.0; 3]).unwrap()
    }

    #[test]
    fn binarize_matches_equality() {
        let mask = line(&[4, 5, 4, 0]).binarize(4);
        assert_eq!(mask.as_slice(), &[true, false, true, false]);
    }

    #[test]
    fn binarize_absent_label_is_empty() {
        assert!(line(&[4, 5, 4, 0]).binarize(9).is_empty());
    }

    #[test]
    fn binarize_uniform_volume_is_full() {
        let mask = line(&[4, 4, 4]).binarize(4);
        assert_eq!(mask.count(), 3);
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(matches!(
            LabelVolume::new([2, 2, 2], vec![0; 7], [1.0; 3]),
            Err(Error::DataSizeMismatch { expected: 8, actual: 7 })
        ));
        assert!(matches!(
            LabelVolume::new([1, 1, 1], vec![0], [0.0, 1.0, 1.0]),
            Err(Error::InvalidSpacing(_))
        ));
        assert!(matches!(
            LabelVolume::new([0, 1, 1], vec![], [1.0; 3]),
            Err(Error::InvalidDims(_))
        ));
    }

    #[test]
    fn offset_and_unravel_agree() {
        let dims = [3, 4, 5];
        for off in 0..voxel_count(dims) {
            assert_eq!(offset(dims, unravel(dims, off)), off);
        }
    }
}
