//! Shared test helpers: test-only image writers, random fixtures and
//! brute-force oracles that never touch the library's computation paths.
#![allow(dead_code)]

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use segmetrics::{LabelVolume, Mask};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- writers

fn header_order(vol: &LabelVolume) -> ([usize; 3], [f64; 3]) {
    let d = vol.dims();
    let s = vol.spacing();
    ([d[2], d[1], d[0]], [s[2], s[1], s[0]])
}

fn fmt_list<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ")
}

fn metaimage_header(vol: &LabelVolume) -> String {
    let (dims, spacing) = header_order(vol);
    format!(
        "ObjectType = Image\nNDims = 3\nBinaryData = True\nBinaryDataByteOrderMSB = False\n\
         ElementSpacing = {}\nDimSize = {}\nElementType = MET_USHORT\n",
        fmt_list(&spacing),
        fmt_list(&dims)
    )
}

fn u16_payload(vol: &LabelVolume) -> Vec<u8> {
    vol.voxels()
        .iter()
        .flat_map(|&v| u16::try_from(v).expect("test labels fit u16").to_le_bytes())
        .collect()
}

pub fn write_mhd(vol: &LabelVolume, path: &Path) {
    let raw_name = path.with_extension("raw");
    std::fs::write(&raw_name, u16_payload(vol)).unwrap();
    let header = format!(
        "{}ElementDataFile = {}\n",
        metaimage_header(vol),
        raw_name.file_name().unwrap().to_string_lossy()
    );
    std::fs::write(path, header).unwrap();
}

pub fn write_mha(vol: &LabelVolume, path: &Path) {
    let mut bytes = format!("{}ElementDataFile = LOCAL\n", metaimage_header(vol)).into_bytes();
    bytes.extend(u16_payload(vol));
    std::fs::write(path, bytes).unwrap();
}

fn nifti_bytes(vol: &LabelVolume) -> Vec<u8> {
    let (dims, spacing) = header_order(vol);
    let mut h = vec![0u8; 352];
    h[0..4].copy_from_slice(&348i32.to_le_bytes());
    let dim: [i16; 8] = [3, dims[0] as i16, dims[1] as i16, dims[2] as i16, 1, 1, 1, 1];
    for (i, d) in dim.iter().enumerate() {
        h[40 + 2 * i..42 + 2 * i].copy_from_slice(&d.to_le_bytes());
    }
    h[70..72].copy_from_slice(&512i16.to_le_bytes()); // uint16
    h[72..74].copy_from_slice(&16i16.to_le_bytes());
    let pixdim = [1.0f32, spacing[0] as f32, spacing[1] as f32, spacing[2] as f32];
    for (i, p) in pixdim.iter().enumerate() {
        h[76 + 4 * i..80 + 4 * i].copy_from_slice(&p.to_le_bytes());
    }
    h[108..112].copy_from_slice(&352f32.to_le_bytes());
    h[112..116].copy_from_slice(&1f32.to_le_bytes());
    h[344..348].copy_from_slice(b"n+1\0");
    h.extend(u16_payload(vol));
    h
}

pub fn write_nii(vol: &LabelVolume, path: &Path) {
    std::fs::write(path, nifti_bytes(vol)).unwrap();
}

pub fn write_nii_gz(vol: &LabelVolume, path: &Path) {
    let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
    enc.write_all(&nifti_bytes(vol)).unwrap();
    std::fs::write(path, enc.finish().unwrap()).unwrap();
}

/// Writes `vol` in the format implied by the suffix of `path`.
pub fn write_volume(vol: &LabelVolume, path: &Path) {
    let name = path.to_string_lossy();
    if name.ends_with(".mhd") {
        write_mhd(vol, path)
    } else if name.ends_with(".mha") {
        write_mha(vol, path)
    } else if name.ends_with(".nii.gz") {
        write_nii_gz(vol, path)
    } else if name.ends_with(".nii") {
        write_nii(vol, path)
    } else {
        panic!("no test writer for {name}")
    }
}

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

// ---------------------------------------------------------------- fixtures

pub fn random_dims(rng: &mut impl Rng, max: usize) -> [usize; 3] {
    [rng.gen_range(1..=max), rng.gen_range(1..=max), rng.gen_range(1..=max)]
}

pub fn random_spacing(rng: &mut impl Rng) -> [f64; 3] {
    [
        rng.gen_range(0.5..3.0),
        rng.gen_range(0.5..3.0),
        rng.gen_range(0.5..3.0),
    ]
}

/// Random mask with at least one voxel set.
pub fn random_mask(rng: &mut impl Rng, dims: [usize; 3], density: f64) -> Mask {
    let n = dims.iter().product();
    let mut bits: Vec<bool> = (0..n).map(|_| rng.gen_bool(density)).collect();
    let forced = rng.gen_range(0..n);
    bits[forced] = true;
    Mask::new(dims, bits).unwrap()
}

/// Random axis-aligned boxes unioned into a mask; more realistic than noise.
pub fn random_blobby_mask(rng: &mut impl Rng, dims: [usize; 3]) -> Mask {
    let mut mask = Mask::empty(dims);
    for _ in 0..rng.gen_range(1..4) {
        let lo: Vec<usize> = dims.iter().map(|&d| rng.gen_range(0..d)).collect();
        let hi: Vec<usize> = dims.iter().zip(&lo).map(|(&d, &l)| rng.gen_range(l..d) + 1).collect();
        for a in lo[0]..hi[0] {
            for b in lo[1]..hi[1] {
                for c in lo[2]..hi[2] {
                    mask.set([a, b, c], true);
                }
            }
        }
    }
    mask
}

pub fn random_label_volume(rng: &mut impl Rng, dims: [usize; 3], labels: u32, spacing: [f64; 3]) -> LabelVolume {
    let n = dims.iter().product();
    let voxels = (0..n).map(|_| rng.gen_range(0..=labels)).collect();
    LabelVolume::new(dims, voxels, spacing).unwrap()
}

/// Label volume of nested/overlapping spheres; label `k` is a ball around its own centre.
pub fn sphere_labels(dims: [usize; 3], centres: &[([f64; 3], f64)], spacing: [f64; 3]) -> LabelVolume {
    let mut voxels = vec![0u32; dims.iter().product()];
    let mut i = 0;
    for a in 0..dims[0] {
        for b in 0..dims[1] {
            for c in 0..dims[2] {
                let p = [a as f64, b as f64, c as f64];
                for (k, (centre, r)) in centres.iter().enumerate() {
                    let d2: f64 = (0..3).map(|ax| (p[ax] - centre[ax]).powi(2)).sum();
                    if d2 <= r * r {
                        voxels[i] = k as u32 + 1;
                    }
                }
                i += 1;
            }
        }
    }
    LabelVolume::new(dims, voxels, spacing).unwrap()
}

// ---------------------------------------------------------------- oracles

/// Per-voxel set algebra: (tp, fp, fn, tn) as plain counts.
pub fn oracle_counts(reference: &Mask, prediction: &Mask) -> (u64, u64, u64, u64) {
    let r = reference.as_slice();
    let p = prediction.as_slice();
    let inter = (0..r.len()).filter(|&i| r[i] && p[i]).count() as u64;
    let only_r = (0..r.len()).filter(|&i| r[i] && !p[i]).count() as u64;
    let only_p = (0..r.len()).filter(|&i| !r[i] && p[i]).count() as u64;
    let neither = (0..r.len()).filter(|&i| !r[i] && !p[i]).count() as u64;
    (inter, only_p, only_r, neither)
}

/// Border by explicit neighbour enumeration (out-of-grid counts as background).
pub fn oracle_border(mask: &Mask, fully_connected: bool) -> Vec<[usize; 3]> {
    let dims = mask.dims();
    let mut out = Vec::new();
    for a in 0..dims[0] {
        for b in 0..dims[1] {
            for c in 0..dims[2] {
                if !mask.get([a, b, c]) {
                    continue;
                }
                let mut border = false;
                for da in -1i64..=1 {
                    for db in -1i64..=1 {
                        for dc in -1i64..=1 {
                            let steps = da.abs() + db.abs() + dc.abs();
                            if steps == 0 || (!fully_connected && steps > 1) {
                                continue;
                            }
                            let n = [a as i64 + da, b as i64 + db, c as i64 + dc];
                            let inside = (0..3).all(|k| n[k] >= 0 && n[k] < dims[k] as i64);
                            if !inside || !mask.get([n[0] as usize, n[1] as usize, n[2] as usize]) {
                                border = true;
                            }
                        }
                    }
                }
                if border {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// For each point of `from`, the physical distance to the closest point of `to`.
pub fn oracle_directed(from: &[[usize; 3]], to: &[[usize; 3]], spacing: [f64; 3]) -> Vec<f64> {
    from.iter()
        .map(|p| {
            to.iter()
                .map(|q| {
                    (0..3)
                        .map(|k| ((p[k] as f64 - q[k] as f64) * spacing[k]).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct OracleDistances {
    pub ref_to_pred: Vec<f64>,
    pub pred_to_ref: Vec<f64>,
    pub hd: f64,
    pub hd95: f64,
    pub msd: f64,
    pub mdsd: f64,
    pub stdsd: f64,
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn oracle_p95(v: &[f64]) -> f64 {
    let v = sorted(v);
    let rank = 0.95 * (v.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let w = rank - lo as f64;
    v[lo] * (1.0 - w) + v[hi] * w
}

pub fn oracle_distances(
    reference: &Mask,
    prediction: &Mask,
    spacing: [f64; 3],
    fully_connected: bool,
) -> OracleDistances {
    let br = oracle_border(reference, fully_connected);
    let bp = oracle_border(prediction, fully_connected);
    let ref_to_pred = oracle_directed(&br, &bp, spacing);
    let pred_to_ref = oracle_directed(&bp, &br, spacing);
    let all: Vec<f64> = ref_to_pred.iter().chain(&pred_to_ref).copied().collect();
    let n = all.len() as f64;
    let msd = all.iter().sum::<f64>() / n;
    let var = all.iter().map(|d| (d - msd).powi(2)).sum::<f64>() / n;
    let s = sorted(&all);
    let mdsd = if s.len() % 2 == 1 {
        s[s.len() / 2]
    } else {
        0.5 * (s[s.len() / 2 - 1] + s[s.len() / 2])
    };
    OracleDistances {
        hd: s[s.len() - 1],
        hd95: oracle_p95(&ref_to_pred).max(oracle_p95(&pred_to_ref)),
        msd,
        mdsd,
        stdsd: var.sqrt(),
        ref_to_pred: sorted(&ref_to_pred),
        pred_to_ref: sorted(&pred_to_ref),
    }
}
