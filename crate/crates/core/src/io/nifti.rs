use std::io::Read;
use std::path::{Path, PathBuf};

use byteorder::{BigEndian, ByteOrder, LittleEndian};
use flate2::read::MultiGzDecoder;

use super::{canonical_axes, decode_labels, read_file, DataLocation, ElementType, Endian, Rescale, VolumeHeader};
use crate::error::{Error, Result};
use crate::volume::{Label, LabelVolume};

const HEADER_SIZE: usize = 348;
const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

// byte offsets inside the 348-byte header
const DIM: usize = 40;
const DATATYPE: usize = 70;
const PIXDIM: usize = 76;
const VOX_OFFSET: usize = 108;
const SCL_SLOPE: usize = 112;
const SCL_INTER: usize = 116;
const MAGIC: usize = 344;

/// Loads a single-file NIfTI-1 volume, gzip-wrapped or not.
///
/// Orientation (qform/sform) is ignored; only the voxel grid and the
/// spacing magnitudes are used.
pub fn load_nifti(path: impl AsRef<Path>) -> Result<LabelVolume> {
    let (header, voxels) = read(path.as_ref())?;
    LabelVolume::new(header.dims, voxels, header.spacing)
}

pub(super) fn read(path: &Path) -> Result<(VolumeHeader, Vec<Label>)> {
    let bytes = maybe_gunzip(read_file(path)?)?;
    let header = parse_header(&bytes, path)?;
    let rescale = rescale(&bytes, header.endian);

    let external;
    let stored: &[u8] = match &header.data {
        DataLocation::Inline(offset) => bytes.get(*offset..).unwrap_or(&[]),
        DataLocation::External(file) => {
            external = maybe_gunzip(read_file(file)?)?;
            &external
        }
    };
    let needed = header.payload_len();
    if stored.len() < needed {
        return Err(Error::DataSizeMismatch {
            expected: needed,
            actual: stored.len(),
        });
    }
    let voxels = decode_labels(
        &stored[..needed],
        header.element_type,
        header.endian,
        header.voxel_count(),
        rescale,
    )?;
    Ok((header, voxels))
}

fn maybe_gunzip(bytes: Vec<u8>) -> Result<Vec<u8>> {
    if !bytes.starts_with(&GZIP_MAGIC) {
        return Ok(bytes);
    }
    let mut out = Vec::with_capacity(bytes.len() * 4);
    MultiGzDecoder::new(bytes.as_slice())
        .read_to_end(&mut out)
        .map_err(|e| Error::MalformedHeader(format!("corrupt gzip stream: {e}")))?;
    Ok(out)
}

fn detect_endian(bytes: &[u8]) -> Result<Endian> {
    if bytes.len() < HEADER_SIZE {
        return Err(Error::MalformedHeader(format!(
            "file has {} bytes, shorter than a NIfTI-1 header",
            bytes.len()
        )));
    }
    if LittleEndian::read_i32(bytes) == HEADER_SIZE as i32 {
        Ok(Endian::Little)
    } else if BigEndian::read_i32(bytes) == HEADER_SIZE as i32 {
        Ok(Endian::Big)
    } else {
        Err(Error::MalformedHeader("sizeof_hdr is not 348".into()))
    }
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<VolumeHeader> {
    let endian = detect_endian(bytes)?;
    match endian {
        Endian::Little => parse_with::<LittleEndian>(bytes, endian, path),
        Endian::Big => parse_with::<BigEndian>(bytes, endian, path),
    }
}

fn parse_with<B: ByteOrder>(bytes: &[u8], endian: Endian, path: &Path) -> Result<VolumeHeader> {
    let magic = &bytes[MAGIC..MAGIC + 4];
    let single_file = match magic {
        b"n+1\0" => true,
        b"ni1\0" => false,
        _ => {
            return Err(Error::MalformedHeader(format!(
                "bad magic {:?}",
                String::from_utf8_lossy(magic)
            )))
        }
    };

    let dim: Vec<i16> = (0..8).map(|i| B::read_i16(&bytes[DIM + 2 * i..])).collect();
    let ndim = dim[0];
    if !(2..=7).contains(&ndim) {
        return Err(Error::MalformedHeader(format!("dim[0] = {ndim}")));
    }
    let ndim = ndim as usize;
    if dim[1..=ndim].iter().any(|&d| d < 1) {
        return Err(Error::MalformedHeader(format!("non-positive extent in {dim:?}")));
    }
    // trailing singleton dimensions (e.g. a 4D file with one frame) are dropped
    if ndim > 3 && dim[4..=ndim].iter().any(|&d| d != 1) {
        return Err(Error::MalformedHeader(format!(
            "only 2D and 3D label volumes are supported, got dims {:?}",
            &dim[1..=ndim]
        )));
    }
    let spatial = ndim.min(3);
    let extents: Vec<usize> = dim[1..=spatial].iter().map(|&d| d as usize).collect();
    let pixdim: Vec<f64> = (1..=spatial)
        .map(|i| (B::read_f32(&bytes[PIXDIM + 4 * i..]) as f64).abs())
        .collect();
    let (dims, spacing) = canonical_axes(&extents, &pixdim)?;

    let element_type = match B::read_i16(&bytes[DATATYPE..]) {
        2 => ElementType::U8,
        4 => ElementType::I16,
        8 => ElementType::I32,
        16 => ElementType::F32,
        64 => ElementType::F64,
        256 => ElementType::I8,
        512 => ElementType::U16,
        768 => ElementType::U32,
        code => return Err(Error::UnsupportedDatatype(format!("NIfTI datatype code {code}"))),
    };

    let data = if single_file {
        let offset = B::read_f32(&bytes[VOX_OFFSET..]);
        if offset.is_nan() || offset < 0.0 {
            return Err(Error::MalformedHeader(format!("vox_offset = {offset}")));
        }
        DataLocation::Inline((offset as usize).max(HEADER_SIZE))
    } else {
        DataLocation::External(image_path(path))
    };

    Ok(VolumeHeader {
        dims,
        spacing,
        element_type,
        endian,
        data,
        compressed: false,
    })
}

fn rescale(bytes: &[u8], endian: Endian) -> Option<Rescale> {
    let (slope, intercept) = match endian {
        Endian::Little => (
            LittleEndian::read_f32(&bytes[SCL_SLOPE..]),
            LittleEndian::read_f32(&bytes[SCL_INTER..]),
        ),
        Endian::Big => (
            BigEndian::read_f32(&bytes[SCL_SLOPE..]),
            BigEndian::read_f32(&bytes[SCL_INTER..]),
        ),
    };
    // slope 0 means "no scaling"
    let identity = slope == 1.0 && intercept == 0.0;
    (slope.is_finite() && slope != 0.0 && intercept.is_finite() && !identity).then_some(Rescale {
        slope: slope as f64,
        intercept: intercept as f64,
    })
}

/// Data file of a two-file (`ni1`) pair.
fn image_path(header: &Path) -> PathBuf {
    let name = header.to_string_lossy();
    let stem = name
        .strip_suffix(".gz")
        .unwrap_or(&name)
        .trim_end_matches(".nii")
        .trim_end_matches(".hdr");
    PathBuf::from(format!("{stem}.img"))
}
