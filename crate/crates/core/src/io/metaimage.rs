use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use flate2::read::ZlibDecoder;

use super::{canonical_axes, decode_labels, read_file, DataLocation, ElementType, Endian, VolumeHeader};
use crate::error::{Error, Result};
use crate::volume::{Label, LabelVolume};

/// Loads a `.mhd` (detached raw data) or `.mha` (inline data) MetaImage.
pub fn load_metaimage(path: impl AsRef<Path>) -> Result<LabelVolume> {
    let (header, voxels) = read(path.as_ref())?;
    LabelVolume::new(header.dims, voxels, header.spacing)
}

pub(super) fn read(path: &Path) -> Result<(VolumeHeader, Vec<Label>)> {
    let bytes = read_file(path)?;
    let (fields, data_start) = parse_fields(&bytes)?;
    let header = interpret(&fields, data_start, path)?;

    let payload: Vec<u8>;
    let stored: &[u8] = match &header.data {
        DataLocation::Inline(offset) => &bytes[*offset..],
        DataLocation::External(file) => {
            payload = read_file(file)?;
            &payload
        }
    };
    let skip = header_skip(&fields, stored.len(), &header)?;
    let stored = &stored[skip..];

    let voxels = if header.compressed {
        let mut inflated = Vec::with_capacity(header.payload_len());
        ZlibDecoder::new(stored)
            .read_to_end(&mut inflated)
            .map_err(|e| Error::MalformedHeader(format!("corrupt zlib stream: {e}")))?;
        decode_labels(
            &inflated,
            header.element_type,
            header.endian,
            header.voxel_count(),
            None,
        )?
    } else {
        decode_labels(stored, header.element_type, header.endian, header.voxel_count(), None)?
    };
    Ok((header, voxels))
}

/// Splits the ASCII header into key/value pairs, stopping after
/// `ElementDataFile`. Returns the byte offset just past that line.
fn parse_fields(bytes: &[u8]) -> Result<(HashMap<String, String>, usize)> {
    let mut fields = HashMap::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map_or(bytes.len(), |i| pos + i + 1);
        let line = String::from_utf8_lossy(&bytes[pos..end]);
        pos = end;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::MalformedHeader(format!("expected `Key = Value`, found {line:?}")))?;
        let key = key.trim().to_string();
        let is_last = key.eq_ignore_ascii_case("ElementDataFile");
        fields.insert(key, value.trim().to_string());
        if is_last {
            return Ok((fields, pos));
        }
    }
    Err(Error::MalformedHeader("missing ElementDataFile".into()))
}

fn field<'a>(fields: &'a HashMap<String, String>, key: &str) -> Option<&'a str> {
    fields
        .iter()
        .find(|(k, _)| k.eq_ignore_ascii_case(key))
        .map(|(_, v)| v.as_str())
}

fn required<'a>(fields: &'a HashMap<String, String>, key: &str) -> Result<&'a str> {
    field(fields, key).ok_or_else(|| Error::MalformedHeader(format!("missing {key}")))
}

fn parse_list<T: std::str::FromStr>(value: &str, key: &str) -> Result<Vec<T>> {
    value
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::MalformedHeader(format!("bad {key} entry {t:?}")))
        })
        .collect()
}

fn parse_bool(value: &str) -> bool {
    matches!(value.to_ascii_lowercase().as_str(), "true" | "1")
}

fn element_type(name: &str) -> Result<ElementType> {
    Ok(match name {
        "MET_UCHAR" => ElementType::U8,
        "MET_CHAR" => ElementType::I8,
        "MET_USHORT" => ElementType::U16,
        "MET_SHORT" => ElementType::I16,
        "MET_UINT" | "MET_ULONG" => ElementType::U32,
        "MET_INT" | "MET_LONG" => ElementType::I32,
        "MET_FLOAT" => ElementType::F32,
        "MET_DOUBLE" => ElementType::F64,
        other => return Err(Error::UnsupportedDatatype(other.to_string())),
    })
}

fn interpret(fields: &HashMap<String, String>, data_start: usize, path: &Path) -> Result<VolumeHeader> {
    let ndims: usize = required(fields, "NDims")?
        .parse()
        .map_err(|_| Error::MalformedHeader("bad NDims".into()))?;
    let dim_size: Vec<usize> = parse_list(required(fields, "DimSize")?, "DimSize")?;
    if dim_size.len() != ndims {
        return Err(Error::MalformedHeader(format!(
            "NDims = {ndims} but DimSize has {} entries",
            dim_size.len()
        )));
    }
    let spacing: Vec<f64> = match field(fields, "ElementSpacing").or_else(|| field(fields, "ElementSize")) {
        Some(v) => parse_list(v, "ElementSpacing")?,
        None => vec![1.0; ndims],
    };
    if spacing.len() != ndims {
        return Err(Error::MalformedHeader(
            "ElementSpacing length differs from NDims".into(),
        ));
    }
    let (dims, spacing) = canonical_axes(&dim_size, &spacing)?;

    if let Some(channels) = field(fields, "ElementNumberOfChannels") {
        if channels != "1" {
            return Err(Error::UnsupportedDatatype(format!("{channels} channels per voxel")));
        }
    }
    let element_type = element_type(required(fields, "ElementType")?)?;
    let msb = field(fields, "ElementByteOrderMSB")
        .or_else(|| field(fields, "BinaryDataByteOrderMSB"))
        .is_some_and(parse_bool);
    let compressed = field(fields, "CompressedData").is_some_and(parse_bool);

    let data_file = required(fields, "ElementDataFile")?;
    let data = if data_file.eq_ignore_ascii_case("LOCAL") {
        DataLocation::Inline(data_start)
    } else if data_file.starts_with("LIST") || data_file.contains('%') {
        return Err(Error::MalformedHeader(format!(
            "multi-file ElementDataFile {data_file:?} is not supported"
        )));
    } else {
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        DataLocation::External(dir.join(data_file))
    };

    Ok(VolumeHeader {
        dims,
        spacing,
        element_type,
        endian: if msb { Endian::Big } else { Endian::Little },
        data,
        compressed,
    })
}

/// Bytes to skip before the payload, honouring `HeaderSize` (−1 means the
/// payload is the tail of the file).
fn header_skip(fields: &HashMap<String, String>, available: usize, header: &VolumeHeader) -> Result<usize> {
    let Some(value) = field(fields, "HeaderSize") else {
        return Ok(0);
    };
    let size: i64 = value
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("bad HeaderSize {value:?}")))?;
    let skip = if size == -1 {
        if header.compressed {
            return Err(Error::MalformedHeader("HeaderSize = -1 with compressed data".into()));
        }
        available.checked_sub(header.payload_len())
    } else {
        usize::try_from(size).ok().filter(|&s| s <= available)
    };
    skip.ok_or(Error::DataSizeMismatch {
        expected: header.payload_len(),
        actual: available,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write_mha(dir: &Path, name: &str, header: &str, payload: &[u8]) -> std::path::PathBuf {
        let path = dir.join(name);
        let mut bytes = header.as_bytes().to_vec();
        bytes.extend_from_slice(payload);
        fs::write(&path, bytes).unwrap();
        path
    }

    const MINIMAL: &str = "NDims = 3\nDimSize = 2 2 2\nElementType = MET_UCHAR\n\
                           ElementSpacing = 1 1 1\nElementDataFile = LOCAL\n";

    #[test]
    fn minimal_inline_volume() {
        let dir = tempfile::tempdir().unwrap();
        let payload = [0u8, 1, 2, 3, 4, 5, 6, 7];
        let vol = load_metaimage(write_mha(dir.path(), "a.mha", MINIMAL, &payload)).unwrap();
        assert_eq!(vol.dims(), [2, 2, 2]);
        assert_eq!(vol.voxels(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        // file order is x fastest, so byte 1 is x = 1 and byte 4 is z = 1
        assert_eq!(vol.get([0, 0, 1]), 1);
        assert_eq!(vol.get([1, 0, 0]), 4);
    }

    #[test]
    fn short_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_mha(dir.path(), "a.mha", MINIMAL, &[0u8; 7]);
        assert!(matches!(
            load_metaimage(path),
            Err(Error::DataSizeMismatch { expected: 8, actual: 7 })
        ));
    }

    #[test]
    fn missing_required_keys() {
        let dir = tempfile::tempdir().unwrap();
        for drop in ["NDims", "DimSize", "ElementType"] {
            let header: String = MINIMAL
                .lines()
                .filter(|l| !l.starts_with(drop))
                .map(|l| format!("{l}\n"))
                .collect();
            let path = write_mha(dir.path(), "a.mha", &header, &[0u8; 8]);
            assert!(
                matches!(load_metaimage(&path), Err(Error::MalformedHeader(_))),
                "dropping {drop}"
            );
        }
    }

    #[test]
    fn detached_raw_with_anisotropic_spacing() {
        let dir = tempfile::tempdir().unwrap();
        // x extent 4, y extent 3, z extent 2; value encodes its own position
        let mut raw = Vec::new();
        for z in 0..2u8 {
            for y in 0..3u8 {
                for x in 0..4u8 {
                    raw.push(100 * z + 10 * y + x);
                }
            }
        }
        fs::write(dir.path().join("vol.raw"), &raw).unwrap();
        let header = "ObjectType = Image\nNDims = 3\nBinaryData = True\n\
                      BinaryDataByteOrderMSB = False\nElementSpacing = 1 2 3\n\
                      DimSize = 4 3 2\nElementType = MET_UCHAR\nElementDataFile = vol.raw\n";
        fs::write(dir.path().join("vol.mhd"), header).unwrap();
        let vol = load_metaimage(dir.path().join("vol.mhd")).unwrap();
        assert_eq!(vol.dims(), [2, 3, 4]);
        assert_eq!(vol.spacing(), [3.0, 2.0, 1.0]);
        assert_eq!(vol.get([1, 2, 3]), 123);
        assert_eq!(vol.get([0, 1, 2]), 12);
    }

    #[test]
    fn compressed_big_endian_shorts() {
        use flate2::write::ZlibEncoder;
        use std::io::Write;
        let values: [u16; 4] = [0, 300, 2, 1];
        let raw: Vec<u8> = values.iter().flat_map(|v| v.to_be_bytes()).collect();
        let mut enc = ZlibEncoder::new(Vec::new(), flate2::Compression::default());
        enc.write_all(&raw).unwrap();
        let packed = enc.finish().unwrap();
        let header = format!(
            "NDims = 2\nDimSize = 2 2\nElementType = MET_USHORT\nElementByteOrderMSB = True\n\
             CompressedData = True\nCompressedDataSize = {}\nElementDataFile = LOCAL\n",
            packed.len()
        );
        let dir = tempfile::tempdir().unwrap();
        let vol = load_metaimage(write_mha(dir.path(), "c.mha", &header, &packed)).unwrap();
        assert_eq!(vol.dims(), [1, 2, 2]);
        assert_eq!(vol.spacing(), [1.0, 1.0, 1.0]);
        assert_eq!(vol.voxels(), &[0, 300, 2, 1]);
    }

    #[test]
    fn float_voxels_must_be_integral() {
        let dir = tempfile::tempdir().unwrap();
        let header = "NDims = 3\nDimSize = 1 1 2\nElementType = MET_FLOAT\nElementDataFile = LOCAL\n";
        let ok: Vec<u8> = [3.0f32, 0.0].iter().flat_map(|v| v.to_le_bytes()).collect();
        let vol = load_metaimage(write_mha(dir.path(), "f.mha", header, &ok)).unwrap();
        assert_eq!(vol.voxels(), &[3, 0]);
        let bad: Vec<u8> = [3.25f32, 0.0].iter().flat_map(|v| v.to_le_bytes()).collect();
        assert!(matches!(
            load_metaimage(write_mha(dir.path(), "g.mha", header, &bad)),
            Err(Error::NonIntegerLabels(_))
        ));
    }
}
