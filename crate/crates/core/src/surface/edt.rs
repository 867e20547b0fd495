//! Exact Euclidean distance transform on anisotropic grids.
//!
//! Squared distances are built one axis at a time with the lower envelope of
//! parabolas (Felzenszwalb & Huttenlocher), which is exact and linear in the
//! line length. Lines are independent, so each pass runs them in parallel;
//! every line is still reduced in the same order, so the output does not
//! depend on the thread count.

use rayon::prelude::*;

use super::border::BorderMask;
use crate::error::{Error, Result, Side};
use crate::scalar::Real;
use crate::volume::{offset, Dims, Mask};

/// Distance in millimetres from every voxel centre to the nearest seed.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMap<T: Real> {
    dims: Dims,
    spacing: [T; 3],
    values: Vec<T>,
}

impl<T: Real> DistanceMap<T> {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> [T; 3] {
        self.spacing
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, idx: [usize; 3]) -> T {
        self.values[offset(self.dims, idx)]
    }
}

/// Exact distance transform of the seed voxels.
///
/// Fails with `EmptySurface` when there is no seed to measure against.
pub fn distance_transform<T: Real>(seeds: &BorderMask<T>) -> Result<DistanceMap<T>> {
    if seeds.is_empty() {
        return Err(Error::EmptySurface(Side::Reference));
    }
    let dims = seeds.dims();
    let spacing = seeds.spacing();
    let mut sq = squared_distance_transform(seeds.mask(), spacing);
    sq.par_iter_mut().for_each(|v| *v = v.sqrt());
    Ok(DistanceMap {
        dims,
        spacing,
        values: sq,
    })
}

/// Squared distances; voxels with no reachable seed stay at +inf.
pub(crate) fn squared_distance_transform<T: Real>(seeds: &Mask, spacing: [T; 3]) -> Vec<T> {
    let dims = seeds.dims();
    let mut grid: Vec<T> = seeds
        .as_slice()
        .iter()
        .map(|&s| if s { T::zero() } else { T::infinity() })
        .collect();
    let weights = spacing.map(|s| s * s);

    // fastest axis: lines are contiguous
    grid.par_chunks_mut(dims[2]).for_each_init(
        || Envelope::new(dims[2]),
        |env, line| env.transform_in_place(line, weights[2]),
    );

    // middle axis: lines stay inside one slab
    let slab = dims[1] * dims[2];
    grid.par_chunks_mut(slab).for_each_init(
        || (Envelope::new(dims[1]), vec![T::zero(); dims[1]]),
        |(env, line), plane| {
            for a2 in 0..dims[2] {
                for a1 in 0..dims[1] {
                    line[a1] = plane[a1 * dims[2] + a2];
                }
                env.transform_in_place(line, weights[1]);
                for a1 in 0..dims[1] {
                    plane[a1 * dims[2] + a2] = line[a1];
                }
            }
        },
    );

    // slowest axis: gather each row of lines, transform, then scatter back
    if dims[0] > 1 {
        let source = &grid;
        let rows: Vec<Vec<T>> = (0..dims[1])
            .into_par_iter()
            .map_init(
                || (Envelope::new(dims[0]), vec![T::zero(); dims[0]]),
                |(env, line), a1| {
                    let mut row = vec![T::zero(); dims[0] * dims[2]];
                    for a2 in 0..dims[2] {
                        for a0 in 0..dims[0] {
                            line[a0] = source[offset(dims, [a0, a1, a2])];
                        }
                        env.transform_in_place(line, weights[0]);
                        row[a2 * dims[0]..(a2 + 1) * dims[0]].copy_from_slice(line);
                    }
                    row
                },
            )
            .collect();
        for (a1, row) in rows.into_iter().enumerate() {
            for a2 in 0..dims[2] {
                for a0 in 0..dims[0] {
                    grid[offset(dims, [a0, a1, a2])] = row[a2 * dims[0] + a0];
                }
            }
        }
    }
    grid
}

/// Scratch buffers for the 1D lower-envelope transform.
struct Envelope<T> {
    sites: Vec<usize>,
    bounds: Vec<T>,
    out: Vec<T>,
}

impl<T: Real> Envelope<T> {
    fn new(n: usize) -> Self {
        Self {
            sites: Vec::with_capacity(n),
            bounds: Vec::with_capacity(n + 1),
            out: vec![T::zero(); n],
        }
    }

    /// `f[q] ← min_p weight·(q − p)² + f[p]` over all finite `f[p]`.
    fn transform_in_place(&mut self, f: &mut [T], weight: T) {
        let n = f.len();
        self.sites.clear();
        self.bounds.clear();
        self.bounds.push(T::neg_infinity());

        let two = T::one() + T::one();
        for q in (0..n).filter(|&q| f[q].is_finite()) {
            let qf = T::from_index(q);
            let fq = f[q] + weight * qf * qf;
            let mut s = T::neg_infinity();
            while let Some(&p) = self.sites.last() {
                let pf = T::from_index(p);
                s = (fq - (f[p] + weight * pf * pf)) / (two * weight * (qf - pf));
                if s <= *self.bounds.last().expect("one bound per site") {
                    self.sites.pop();
                    self.bounds.pop();
                } else {
                    break;
                }
            }
            if self.sites.is_empty() {
                self.bounds.clear();
                self.bounds.push(T::neg_infinity());
            } else {
                self.bounds.push(s);
            }
            self.sites.push(q);
        }
        if self.sites.is_empty() {
            return;
        }

        let mut k = 0;
        for q in 0..n {
            let qf = T::from_index(q);
            while k + 1 < self.sites.len() && self.bounds[k + 1] < qf {
                k += 1;
            }
            let p = self.sites[k];
            let d = qf - T::from_index(p);
            self.out[q] = weight * d * d + f[p];
        }
        f.copy_from_slice(&self.out[..n]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::unravel;
    use proptest::prelude::*;

    fn brute_force(seeds: &Mask, spacing: [f64; 3]) -> Vec<f64> {
        let dims = seeds.dims();
        let points: Vec<_> = seeds.indices().collect();
        (0..seeds.as_slice().len())
            .map(|off| {
                let q = unravel(dims, off);
                points
                    .iter()
                    .map(|p| {
                        (0..3)
                            .map(|a| ((q[a] as f64 - p[a] as f64) * spacing[a]).powi(2))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    fn dt(mask: Mask, spacing: [f64; 3]) -> DistanceMap<f64> {
        distance_transform(&BorderMask::from_mask(mask, spacing)).unwrap()
    }

    #[test]
    fn anisotropic_line() {
        let map = dt(Mask::from_indices([1, 1, 3], &[[0, 0, 0]]), [1.0, 1.0, 2.0]);
        assert_eq!(map.values(), &[0.0, 2.0, 4.0]);
    }

    #[test]
    fn all_seeds_gives_zero() {
        let map = dt(Mask::new([2, 3, 2], vec![true; 12]).unwrap(), [0.7, 1.3, 2.0]);
        assert!(map.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn corner_seed_diagonal() {
        let map = dt(Mask::from_indices([2, 2, 2], &[[0, 0, 0]]), [1.0; 3]);
        assert_eq!(map.get([1, 1, 1]), 3f64.sqrt());
    }

    #[test]
    fn empty_seeds_error() {
        let seeds = BorderMask::<f64>::from_mask(Mask::empty([2, 2, 2]), [1.0; 3]);
        assert!(matches!(distance_transform(&seeds), Err(Error::EmptySurface(_))));
    }

    #[test]
    fn single_precision_agrees() {
        let mask = Mask::from_indices([3, 4, 5], &[[0, 0, 0], [2, 3, 1]]);
        let single = distance_transform(&BorderMask::from_mask(mask.clone(), [1.5f32, 1.0, 0.5])).unwrap();
        let oracle = brute_force(&mask, [1.5, 1.0, 0.5]);
        for (a, b) in single.values().iter().zip(&oracle) {
            assert!((*a as f64 - b).abs() < 1e-5);
        }
    }

    fn arb_case() -> impl Strategy<Value = (Mask, [f64; 3])> {
        (1usize..7, 1usize..7, 1usize..7)
            .prop_flat_map(|(a, b, c)| {
                let n = a * b * c;
                (
                    Just([a, b, c]),
                    proptest::collection::vec(proptest::bool::weighted(0.15), n),
                    0usize..n,
                    proptest::array::uniform3(0.5f64..3.0),
                )
            })
            .prop_map(|(dims, mut bits, forced, spacing)| {
                bits[forced] = true;
                (Mask::new(dims, bits).unwrap(), spacing)
            })
    }

    proptest! {
        #[test]
        fn matches_brute_force((mask, spacing) in arb_case()) {
            let map = dt(mask.clone(), spacing);
            let oracle = brute_force(&mask, spacing);
            for (a, b) in map.values().iter().zip(&oracle) {
                prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
            }
        }

        #[test]
        fn one_lipschitz_between_neighbours((mask, spacing) in arb_case()) {
            let map = dt(mask.clone(), spacing);
            let dims = map.dims();
            for off in 0..map.values().len() {
                let idx = unravel(dims, off);
                for axis in 0..3 {
                    if idx[axis] + 1 < dims[axis] {
                        let mut n = idx;
                        n[axis] += 1;
                        let gap = (map.get(idx) - map.get(n)).abs();
                        prop_assert!(gap <= spacing[axis] + 1e-9);
                    }
                }
            }
            for idx in mask.indices() {
                prop_assert_eq!(map.get(idx), 0.0);
            }
        }
    }
}
