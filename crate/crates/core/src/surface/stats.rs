use super::SurfaceDistanceSet;
use crate::scalar::Real;

/// Percentile `q ∈ [0, 1]` of ascending `sorted` values, interpolating
/// linearly between the two closest order statistics.
pub fn percentile<T: Real>(sorted: &[T], q: T) -> Option<T> {
    let last = sorted.len().checked_sub(1)?;
    let pos = q * T::from_index(last);
    let lo = pos.floor();
    let i = lo.to_usize().unwrap_or(0).min(last);
    let j = (i + 1).min(last);
    let frac = pos - lo;
    Some(sorted[i] + (sorted[j] - sorted[i]) * frac)
}

/// Larger of the two directed maxima.
pub fn hausdorff<T: Real>(s: &SurfaceDistanceSet<T>) -> T {
    let max = |v: &[T]| *v.last().expect("non-empty by construction");
    max(s.ref_to_pred()).max(max(s.pred_to_ref()))
}

/// Larger of the two directed 95th percentiles.
pub fn hausdorff95<T: Real>(s: &SurfaceDistanceSet<T>) -> T {
    let q = T::from_f64_lossy(0.95);
    let p95 = |v: &[T]| percentile(v, q).expect("non-empty by construction");
    p95(s.ref_to_pred()).max(p95(s.pred_to_ref()))
}

fn mean_of<T: Real>(pooled: &[T]) -> T {
    let sum = pooled.iter().fold(T::zero(), |acc, &d| acc + d);
    sum / T::from_index(pooled.len())
}

/// Mean of both directed multisets pooled together.
pub fn mean_surface_distance<T: Real>(s: &SurfaceDistanceSet<T>) -> T {
    mean_of(&s.pooled())
}

/// Median of the pooled multiset.
pub fn median_surface_distance<T: Real>(s: &SurfaceDistanceSet<T>) -> T {
    let pooled = s.pooled();
    let n = pooled.len();
    if n % 2 == 1 {
        pooled[n / 2]
    } else {
        (pooled[n / 2 - 1] + pooled[n / 2]) / (T::one() + T::one())
    }
}

/// Population standard deviation of the pooled multiset.
pub fn std_surface_distance<T: Real>(s: &SurfaceDistanceSet<T>) -> T {
    let pooled = s.pooled();
    let mean = mean_of(&pooled);
    let ss = pooled.iter().fold(T::zero(), |acc, &d| acc + (d - mean) * (d - mean));
    (ss / T::from_index(pooled.len())).sqrt()
}
