//! Readers for MetaImage (`.mhd`/`.mha`) and NIfTI-1 (`.nii`/`.nii.gz`) label volumes.
//!
//! Both formats list extents and spacing fastest axis first. Loaders reverse
//! them so that [`LabelVolume`] axis 0 is the slowest-varying memory axis.

mod metaimage;
mod nifti;

pub use metaimage::load_metaimage;
pub use nifti::load_nifti;

use std::path::{Path, PathBuf};

use byteorder::{BigEndian, ByteOrder, LittleEndian};

use crate::error::{Error, Result};
use crate::volume::{validate_spacing, voxel_count, Dims, Label, LabelVolume};

/// Maximum distance from an integer for a float voxel to count as a label.
pub const LABEL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    MetaImage,
    Nifti,
}

/// Picks the reader from the file suffix. The content itself is checked on load.
pub fn detect_format(path: impl AsRef<Path>) -> Result<Format> {
    let path = path.as_ref();
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    if name.ends_with(".mhd") || name.ends_with(".mha") {
        Ok(Format::MetaImage)
    } else if name.ends_with(".nii") || name.ends_with(".nii.gz") {
        Ok(Format::Nifti)
    } else {
        Err(Error::UnsupportedFormat(path.to_path_buf()))
    }
}

/// Whether `path` has one of the readable suffixes.
pub fn is_supported(path: impl AsRef<Path>) -> bool {
    detect_format(path).is_ok()
}

/// Loads a volume, optionally replacing the header spacing.
///
/// `spacing_override` is given in canonical axis order (slowest axis first).
pub fn load_volume(path: impl AsRef<Path>, spacing_override: Option<[f64; 3]>) -> Result<LabelVolume> {
    let path = path.as_ref();
    if let Some(spacing) = spacing_override {
        validate_spacing(spacing)?;
    }
    let (header, voxels) = match detect_format(path)? {
        Format::MetaImage => metaimage::read(path)?,
        Format::Nifti => nifti::read(path)?,
    };
    LabelVolume::new(header.dims, voxels, spacing_override.unwrap_or(header.spacing))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementType {
    U8,
    I8,
    U16,
    I16,
    U32,
    I32,
    F32,
    F64,
}

impl ElementType {
    pub fn size(self) -> usize {
        match self {
            ElementType::U8 | ElementType::I8 => 1,
            ElementType::U16 | ElementType::I16 => 2,
            ElementType::U32 | ElementType::I32 | ElementType::F32 => 4,
            ElementType::F64 => 8,
        }
    }

    fn is_float(self) -> bool {
        matches!(self, ElementType::F32 | ElementType::F64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endian {
    Little,
    Big,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataLocation {
    /// Voxels start at this byte offset of the header file itself.
    Inline(usize),
    /// Voxels live in a separate file.
    External(PathBuf),
}

/// Everything a loader needs from a header, already in canonical axis order.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeHeader {
    pub dims: Dims,
    pub spacing: [f64; 3],
    pub element_type: ElementType,
    pub endian: Endian,
    pub data: DataLocation,
    pub compressed: bool,
}

impl VolumeHeader {
    pub fn voxel_count(&self) -> usize {
        voxel_count(self.dims)
    }

    pub fn payload_len(&self) -> usize {
        self.voxel_count() * self.element_type.size()
    }
}

/// Converts a header-order extent/spacing list (fastest axis first, 2 or 3
/// entries) into canonical order, padding 2D images with a unit-spaced
/// depth-1 axis.
pub(crate) fn canonical_axes(dims: &[usize], spacing: &[f64]) -> Result<(Dims, [f64; 3])> {
    match (dims, spacing) {
        (&[x, y], &[sx, sy]) => Ok(([1, y, x], [1.0, sy, sx])),
        (&[x, y, z], &[sx, sy, sz]) => Ok(([z, y, x], [sz, sy, sx])),
        _ => Err(Error::MalformedHeader(format!(
            "expected 2 or 3 dimensions, found {}",
            dims.len()
        ))),
    }
}

/// Linear intensity rescaling applied before label conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Rescale {
    pub slope: f64,
    pub intercept: f64,
}

/// Decodes raw voxel bytes into labels.
pub(crate) fn decode_labels(
    bytes: &[u8],
    element_type: ElementType,
    endian: Endian,
    count: usize,
    rescale: Option<Rescale>,
) -> Result<Vec<Label>> {
    let expected = count * element_type.size();
    if bytes.len() != expected {
        return Err(Error::DataSizeMismatch {
            expected,
            actual: bytes.len(),
        });
    }
    match endian {
        Endian::Little => decode_with::<LittleEndian>(bytes, element_type, rescale),
        Endian::Big => decode_with::<BigEndian>(bytes, element_type, rescale),
    }
}

fn decode_with<B: ByteOrder>(bytes: &[u8], element_type: ElementType, rescale: Option<Rescale>) -> Result<Vec<Label>> {
    let size = element_type.size();
    let raw = bytes.chunks_exact(size).map(|b| match element_type {
        ElementType::U8 => b[0] as f64,
        ElementType::I8 => b[0] as i8 as f64,
        ElementType::U16 => B::read_u16(b) as f64,
        ElementType::I16 => B::read_i16(b) as f64,
        ElementType::U32 => B::read_u32(b) as f64,
        ElementType::I32 => B::read_i32(b) as f64,
        ElementType::F32 => B::read_f32(b) as f64,
        ElementType::F64 => B::read_f64(b),
    });
    match rescale {
        Some(r) => raw.map(|v| float_to_label(v * r.slope + r.intercept)).collect(),
        None if element_type.is_float() => raw.map(float_to_label).collect(),
        None => raw.map(int_to_label).collect(),
    }
}

#[inline]
fn int_to_label(v: f64) -> Result<Label> {
    if v < 0.0 {
        Err(Error::InvalidLabel(v))
    } else {
        Ok(v as Label)
    }
}

#[inline]
fn float_to_label(v: f64) -> Result<Label> {
    if !v.is_finite() {
        return Err(Error::NonIntegerLabels(v));
    }
    let rounded = v.round();
    if (v - rounded).abs() > LABEL_TOLERANCE {
        return Err(Error::NonIntegerLabels(v));
    }
    if rounded < 0.0 || rounded > Label::MAX as f64 {
        return Err(Error::InvalidLabel(v));
    }
    Ok(rounded as Label)
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}
