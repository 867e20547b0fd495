use rayon::prelude::*;

use crate::scalar::Real;
use crate::volume::{offset, Dims, Mask};

/// Neighbourhood used when eroding a mask to find its border.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    /// 6-neighbour cross: voxels sharing a face.
    Face,
    /// Full 3×3×3 block: faces, edges and corners (26 neighbours).
    #[default]
    Full,
}

impl Connectivity {
    pub fn from_fully_connected(fully_connected: bool) -> Self {
        if fully_connected {
            Connectivity::Full
        } else {
            Connectivity::Face
        }
    }

    /// Offsets of the structuring element, excluding the origin.
    pub fn offsets(self) -> Vec<[isize; 3]> {
        let mut out = Vec::with_capacity(26);
        for d0 in -1isize..=1 {
            for d1 in -1isize..=1 {
                for d2 in -1isize..=1 {
                    let manhattan = d0.abs() + d1.abs() + d2.abs();
                    let keep = match self {
                        Connectivity::Face => manhattan == 1,
                        Connectivity::Full => manhattan > 0,
                    };
                    if keep {
                        out.push([d0, d1, d2]);
                    }
                }
            }
        }
        out
    }
}

/// Border voxels of a mask together with the grid spacing they live on.
#[derive(Debug, Clone, PartialEq)]
pub struct BorderMask<T: Real> {
    mask: Mask,
    spacing: [T; 3],
}

impl<T: Real> BorderMask<T> {
    /// Wraps an arbitrary voxel set as seeds, without erosion.
    pub fn from_mask(mask: Mask, spacing: [T; 3]) -> Self {
        Self { mask, spacing }
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn dims(&self) -> Dims {
        self.mask.dims()
    }

    pub fn spacing(&self) -> [T; 3] {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.mask.count()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }
}

/// `mask ∧ ¬erode(mask)`, with everything outside the grid treated as background.
pub fn extract_border<T: Real>(mask: &Mask, spacing: [T; 3], connectivity: Connectivity) -> BorderMask<T> {
    let dims = mask.dims();
    let src = mask.as_slice();
    let neighbours = connectivity.offsets();
    let slab = dims[1] * dims[2];

    let mut out = vec![false; src.len()];
    out.par_chunks_mut(slab).enumerate().for_each(|(a0, plane)| {
        for a1 in 0..dims[1] {
            for a2 in 0..dims[2] {
                let idx = [a0, a1, a2];
                if !src[offset(dims, idx)] {
                    continue;
                }
                let interior = neighbours
                    .iter()
                    .all(|d| neighbour(dims, idx, *d).is_some_and(|n| src[offset(dims, n)]));
                plane[a1 * dims[2] + a2] = !interior;
            }
        }
    });

    BorderMask {
        mask: Mask::new(dims, out).expect("same dims as source"),
        spacing,
    }
}

#[inline]
fn neighbour(dims: Dims, idx: [usize; 3], d: [isize; 3]) -> Option<[usize; 3]> {
    let mut n = [0usize; 3];
    for axis in 0..3 {
        let v = idx[axis].checked_add_signed(d[axis])?;
        if v >= dims[axis] {
            return None;
        }
        n[axis] = v;
    }
    Some(n)
}
