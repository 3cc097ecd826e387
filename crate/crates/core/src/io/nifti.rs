//! Minimal NIfTI-1 single-file (`.nii` / `.nii.gz`) reader and writer.
//!
//! Supports 3-D volumes of uint8, int16 and float32 voxels in either byte
//! order. Orientation fields are parsed but not interpreted.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{Error, Result};
use crate::volume::{Entity, GridShape, SegmentationVolume, UncertaintyMap};

pub const HEADER_SIZE: usize = 348;
/// Header plus the four-byte extension flag.
pub const DEFAULT_VOX_OFFSET: usize = 352;
pub const MAGIC: &[u8; 4] = b"n+1\0";

pub const DT_UINT8: i16 = 2;
pub const DT_INT16: i16 = 4;
pub const DT_FLOAT32: i16 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endianness {
    Little,
    Big,
}

/// The subset of NIfTI-1 header fields this crate reads.
#[derive(Debug, Clone, PartialEq)]
pub struct NiftiHeader {
    pub endianness: Endianness,
    pub dim: [i16; 8],
    pub datatype: i16,
    pub bitpix: i16,
    pub pixdim: [f32; 8],
    pub vox_offset: f32,
    pub scl_slope: f32,
    pub scl_inter: f32,
    pub qform_code: i16,
    pub sform_code: i16,
    pub srow: [[f32; 4]; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub enum VoxelData {
    U8(Vec<u8>),
    I16(Vec<i16>),
    F32(Vec<f32>),
}

impl VoxelData {
    pub fn len(&self) -> usize {
        match self {
            VoxelData::U8(v) => v.len(),
            VoxelData::I16(v) => v.len(),
            VoxelData::F32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn datatype(&self) -> i16 {
        match self {
            VoxelData::U8(_) => DT_UINT8,
            VoxelData::I16(_) => DT_INT16,
            VoxelData::F32(_) => DT_FLOAT32,
        }
    }

    fn bitpix(&self) -> i16 {
        match self {
            VoxelData::U8(_) => 8,
            VoxelData::I16(_) => 16,
            VoxelData::F32(_) => 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NiftiVolume {
    pub header: NiftiHeader,
    pub shape: GridShape,
    pub data: VoxelData,
}

impl NiftiVolume {
    fn scaling(&self) -> Option<(f32, f32)> {
        let (s, i) = (self.header.scl_slope, self.header.scl_inter);
        (s != 0.0 && s.is_finite() && (s != 1.0 || i != 0.0)).then_some((s, i))
    }

    /// Voxel values with `scl_slope` / `scl_inter` applied.
    pub fn values_f32(&self) -> Vec<f32> {
        self.clone().into_values_f32()
    }

    pub fn into_values_f32(self) -> Vec<f32> {
        let scaling = self.scaling();
        let raw: Vec<f32> = match self.data {
            VoxelData::U8(v) => v.into_iter().map(|x| x as f32).collect(),
            VoxelData::I16(v) => v.into_iter().map(|x| x as f32).collect(),
            VoxelData::F32(v) => v,
        };
        match scaling {
            Some((s, i)) => raw.into_iter().map(|x| x * s + i).collect(),
            None => raw,
        }
    }

    pub fn into_segmentation(self) -> Result<SegmentationVolume> {
        let shape = self.shape;
        match (self.scaling(), self.data) {
            (None, VoxelData::U8(v)) => SegmentationVolume::new(shape, v),
            (_, data) => {
                let vol = NiftiVolume { data, ..self };
                SegmentationVolume::from_values(shape, &vol.into_values_f32())
            }
        }
    }

    pub fn into_uncertainty(self, entity: Entity) -> Result<UncertaintyMap> {
        let shape = self.shape;
        UncertaintyMap::new(shape, entity, self.into_values_f32())
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    endian: Endianness,
}

impl Cursor<'_> {
    fn i16(&self, at: usize) -> i16 {
        let b = [self.bytes[at], self.bytes[at + 1]];
        match self.endian {
            Endianness::Little => i16::from_le_bytes(b),
            Endianness::Big => i16::from_be_bytes(b),
        }
    }

    fn f32(&self, at: usize) -> f32 {
        let b: [u8; 4] = self.bytes[at..at + 4].try_into().unwrap();
        match self.endian {
            Endianness::Little => f32::from_le_bytes(b),
            Endianness::Big => f32::from_be_bytes(b),
        }
    }
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        // ISIZE trailer: uncompressed length modulo 2^32 of the last member
        let hint = raw
            .get(raw.len().saturating_sub(4)..)
            .map_or(0, |t| u32::from_le_bytes(t.try_into().unwrap()) as usize);
        let mut out = Vec::with_capacity(hint.max(raw.len()));
        MultiGzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn parse_header(path: &Path, bytes: &[u8]) -> Result<NiftiHeader> {
    let not_nifti = || Error::NotNifti {
        path: path.to_path_buf(),
    };
    if bytes.len() < HEADER_SIZE {
        return Err(not_nifti());
    }
    let size: [u8; 4] = bytes[0..4].try_into().unwrap();
    let endian = if i32::from_le_bytes(size) == HEADER_SIZE as i32 {
        Endianness::Little
    } else if i32::from_be_bytes(size) == HEADER_SIZE as i32 {
        Endianness::Big
    } else {
        return Err(not_nifti());
    };
    if &bytes[344..348] != MAGIC {
        return Err(not_nifti());
    }
    let c = Cursor { bytes, endian };
    Ok(NiftiHeader {
        endianness: endian,
        dim: std::array::from_fn(|i| c.i16(40 + 2 * i)),
        datatype: c.i16(70),
        bitpix: c.i16(72),
        pixdim: std::array::from_fn(|i| c.f32(76 + 4 * i)),
        vox_offset: c.f32(108),
        scl_slope: c.f32(112),
        scl_inter: c.f32(116),
        qform_code: c.i16(252),
        sform_code: c.i16(254),
        srow: std::array::from_fn(|r| std::array::from_fn(|k| c.f32(280 + 16 * r + 4 * k))),
    })
}

fn shape_from_dim(path: &Path, dim: &[i16; 8]) -> Result<GridShape> {
    let mismatch = |detail: String| Error::DimMismatch {
        path: path.to_path_buf(),
        detail,
    };
    let ndim = dim[0];
    if !(1..=7).contains(&ndim) {
        return Err(mismatch(format!("dim[0] = {ndim} is not in 1..=7")));
    }
    let ndim = ndim as usize;
    if dim[1..=ndim].iter().any(|&d| d < 1) {
        return Err(mismatch(format!(
            "non-positive extent in {:?}",
            &dim[1..=ndim]
        )));
    }
    if ndim > 3 && dim[4..=ndim].iter().any(|&d| d != 1) {
        return Err(mismatch(format!(
            "expected a 3-D volume, got dims {:?}",
            &dim[1..=ndim]
        )));
    }
    let extent = |i: usize| if i <= ndim { dim[i] as usize } else { 1 };
    GridShape::new([extent(1), extent(2), extent(3)])
        .map_err(|_| mismatch(format!("invalid extents {:?}", &dim[1..=ndim])))
}

fn decode<T, const N: usize>(
    bytes: &[u8],
    endian: Endianness,
    le: fn([u8; N]) -> T,
    be: fn([u8; N]) -> T,
) -> Vec<T> {
    let conv = match endian {
        Endianness::Little => le,
        Endianness::Big => be,
    };
    bytes
        .chunks_exact(N)
        .map(|c| conv(c.try_into().unwrap()))
        .collect()
}

/// Reads a `.nii` or gzip-compressed `.nii.gz` volume.
pub fn read_nifti(path: impl AsRef<Path>) -> Result<NiftiVolume> {
    let path = path.as_ref();
    let bytes = read_all(path)?;
    let header = parse_header(path, &bytes)?;
    let shape = shape_from_dim(path, &header.dim)?;
    let width = match header.datatype {
        DT_UINT8 => 1,
        DT_INT16 => 2,
        DT_FLOAT32 => 4,
        code => {
            return Err(Error::UnsupportedDatatype {
                path: path.to_path_buf(),
                code,
            })
        }
    };
    let offset = if header.vox_offset >= HEADER_SIZE as f32 {
        header.vox_offset as usize
    } else {
        DEFAULT_VOX_OFFSET
    };
    let needed = shape.len() * width;
    let body = bytes
        .get(offset..)
        .filter(|b| b.len() >= needed)
        .map(|b| &b[..needed])
        .ok_or_else(|| Error::DimMismatch {
            path: path.to_path_buf(),
            detail: format!(
                "header declares {} voxels but the file holds {} data bytes",
                shape.len(),
                bytes.len().saturating_sub(offset)
            ),
        })?;
    let e = header.endianness;
    let data = match header.datatype {
        DT_UINT8 => VoxelData::U8(body.to_vec()),
        DT_INT16 => VoxelData::I16(decode(body, e, i16::from_le_bytes, i16::from_be_bytes)),
        _ => VoxelData::F32(decode(body, e, f32::from_le_bytes, f32::from_be_bytes)),
    };
    Ok(NiftiVolume {
        header,
        shape,
        data,
    })
}

fn encode_header(shape: GridShape, data: &VoxelData) -> Result<[u8; DEFAULT_VOX_OFFSET]> {
    if data.len() != shape.len() {
        return Err(Error::VoxelCountMismatch {
            expected: shape.len(),
            actual: data.len(),
        });
    }
    let dims = shape.dims();
    if dims.iter().any(|&d| d > i16::MAX as usize) {
        return Err(Error::InvalidShape(dims));
    }
    let mut out = [0u8; DEFAULT_VOX_OFFSET];
    let put_i16 =
        |out: &mut [u8], at: usize, v: i16| out[at..at + 2].copy_from_slice(&v.to_le_bytes());
    let put_f32 =
        |out: &mut [u8], at: usize, v: f32| out[at..at + 4].copy_from_slice(&v.to_le_bytes());

    out[0..4].copy_from_slice(&(HEADER_SIZE as i32).to_le_bytes());
    let dim = [
        3,
        dims[0] as i16,
        dims[1] as i16,
        dims[2] as i16,
        1,
        1,
        1,
        1,
    ];
    for (i, d) in dim.iter().enumerate() {
        put_i16(&mut out, 40 + 2 * i, *d);
    }
    put_i16(&mut out, 70, data.datatype());
    put_i16(&mut out, 72, data.bitpix());
    for i in 0..4 {
        put_f32(&mut out, 76 + 4 * i, 1.0);
    }
    put_f32(&mut out, 108, DEFAULT_VOX_OFFSET as f32);
    put_f32(&mut out, 112, 1.0);
    out[123] = 2; // xyzt_units: millimetres
    put_i16(&mut out, 254, 1);
    for r in 0..3 {
        put_f32(&mut out, 280 + 16 * r + 4 * r, 1.0);
    }
    out[344..348].copy_from_slice(MAGIC);
    Ok(out)
}

/// Streams the voxels little-endian in bounded blocks.
fn write_body(w: &mut impl Write, data: &VoxelData) -> std::io::Result<()> {
    const BLOCK: usize = 1 << 16;
    let mut buf = Vec::with_capacity(BLOCK * 4);
    match data {
        VoxelData::U8(v) => return w.write_all(v),
        VoxelData::I16(v) => {
            for block in v.chunks(BLOCK) {
                buf.clear();
                buf.extend(block.iter().flat_map(|x| x.to_le_bytes()));
                w.write_all(&buf)?;
            }
        }
        VoxelData::F32(v) => {
            for block in v.chunks(BLOCK) {
                buf.clear();
                buf.extend(block.iter().flat_map(|x| x.to_le_bytes()));
                w.write_all(&buf)?;
            }
        }
    }
    Ok(())
}

/// Serializes a little-endian NIfTI-1 file image: header, empty extension
/// flag, voxels.
pub fn encode_nifti(shape: GridShape, data: &VoxelData) -> Result<Vec<u8>> {
    let header = encode_header(shape, data)?;
    let width = data.bitpix() as usize / 8;
    let mut out = Vec::with_capacity(DEFAULT_VOX_OFFSET + width * data.len());
    out.extend_from_slice(&header);
    write_body(&mut out, data).expect("writing to a Vec cannot fail");
    Ok(out)
}

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

/// Writes a volume; gzip-compressed when the path ends in `.gz`.
pub fn write_nifti(path: impl AsRef<Path>, shape: GridShape, data: &VoxelData) -> Result<()> {
    let path = path.as_ref();
    let header = encode_header(shape, data)?;
    let io_err = |e| Error::io(path, e);
    let file = fs::File::create(path).map_err(io_err)?;
    if is_gz(path) {
        // fixed mtime of zero keeps output byte-identical across runs
        let mut enc = GzEncoder::new(BufWriter::new(file), Compression::fast());
        enc.write_all(&header).map_err(io_err)?;
        write_body(&mut enc, data).map_err(io_err)?;
        enc.finish().map_err(io_err)?.flush().map_err(io_err)?;
    } else {
        let mut w = BufWriter::new(file);
        w.write_all(&header).map_err(io_err)?;
        write_body(&mut w, data).map_err(io_err)?;
        w.flush().map_err(io_err)?;
    }
    Ok(())
}

pub fn write_segmentation(path: impl AsRef<Path>, seg: &SegmentationVolume) -> Result<()> {
    write_nifti(path, seg.shape(), &VoxelData::U8(seg.labels().to_vec()))
}

pub fn write_uncertainty(path: impl AsRef<Path>, map: &UncertaintyMap) -> Result<()> {
    write_nifti(path, map.shape(), &VoxelData::F32(map.values().to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn shape222() -> GridShape {
        GridShape::cube(2).unwrap()
    }

    #[test]
    fn uint8_round_trip_preserves_order() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["v.nii", "v.nii.gz"] {
            let path = dir.path().join(name);
            let data = VoxelData::U8((0..8).collect());
            write_nifti(&path, shape222(), &data).unwrap();
            let vol = read_nifti(&path).unwrap();
            assert_eq!(vol.shape, shape222());
            assert_eq!(vol.data, data);
            assert_eq!(vol.header.datatype, DT_UINT8);
        }
    }

    #[test]
    fn gz_file_is_actually_compressed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.nii.gz");
        write_nifti(
            &path,
            GridShape::cube(16).unwrap(),
            &VoxelData::U8(vec![0; 4096]),
        )
        .unwrap();
        let raw = fs::read(&path).unwrap();
        assert_eq!(&raw[..2], &[0x1f, 0x8b]);
        assert!(raw.len() < 1000);
    }

    #[test]
    fn bad_magic_is_not_nifti() {
        let mut bytes = encode_nifti(shape222(), &VoxelData::U8(vec![0; 8])).unwrap();
        bytes[344..348].copy_from_slice(b"ni1\0");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.nii");
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_nifti(&path), Err(Error::NotNifti { .. })));
        fs::write(&path, b"short").unwrap();
        assert!(matches!(read_nifti(&path), Err(Error::NotNifti { .. })));
    }

    #[test]
    fn float64_is_unsupported() {
        let mut bytes = encode_nifti(shape222(), &VoxelData::F32(vec![0.0; 8])).unwrap();
        bytes[70..72].copy_from_slice(&64i16.to_le_bytes());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f64.nii");
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_nifti(&path),
            Err(Error::UnsupportedDatatype { code: 64, .. })
        ));
    }

    #[test]
    fn truncated_body_and_bad_dims() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.nii");
        let bytes = encode_nifti(shape222(), &VoxelData::I16(vec![1; 8])).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(read_nifti(&path), Err(Error::DimMismatch { .. })));
        let mut bytes = bytes.clone();
        bytes[40..42].copy_from_slice(&4i16.to_le_bytes());
        bytes[48..50].copy_from_slice(&5i16.to_le_bytes());
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_nifti(&path), Err(Error::DimMismatch { .. })));
    }

    fn to_big_endian(le: &[u8], width: usize) -> Vec<u8> {
        let mut be = le.to_vec();
        be[0..4].reverse();
        for at in (40..56).step_by(2).chain([70, 72, 252, 254]) {
            be[at..at + 2].reverse();
        }
        for at in (76..120).step_by(4).chain((280..328).step_by(4)) {
            be[at..at + 4].reverse();
        }
        for c in be[DEFAULT_VOX_OFFSET..].chunks_exact_mut(width) {
            c.reverse();
        }
        be
    }

    #[test]
    fn big_endian_files_are_read() {
        let values: Vec<f32> = (0..8).map(|i| i as f32 * 12.5).collect();
        let le = encode_nifti(shape222(), &VoxelData::F32(values.clone())).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("be.nii");
        fs::write(&path, to_big_endian(&le, 4)).unwrap();
        let vol = read_nifti(&path).unwrap();
        assert_eq!(vol.header.endianness, Endianness::Big);
        assert_eq!(vol.data, VoxelData::F32(values));
    }

    #[test]
    fn scaling_is_applied() {
        let mut bytes = encode_nifti(shape222(), &VoxelData::I16((0..8).collect())).unwrap();
        bytes[112..116].copy_from_slice(&12.5f32.to_le_bytes());
        bytes[116..120].copy_from_slice(&1.0f32.to_le_bytes());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.nii");
        fs::write(&path, &bytes).unwrap();
        let vol = read_nifti(&path).unwrap();
        assert_eq!(vol.values_f32()[3], 38.5);
        let unc = vol.clone().into_uncertainty(Entity::WholeTumor).unwrap();
        assert_eq!(unc.values()[7], 88.5);
        // zero slope means unscaled
        bytes[112..116].copy_from_slice(&0f32.to_le_bytes());
        fs::write(&path, &bytes).unwrap();
        assert_eq!(read_nifti(&path).unwrap().values_f32()[3], 3.0);
    }

    #[test]
    fn labels_read_from_int16_and_float() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.nii.gz");
        write_nifti(
            &path,
            shape222(),
            &VoxelData::F32(vec![0.0, 1.0, 2.0, 4.0, 0.0, 0.0, 0.0, 4.0]),
        )
        .unwrap();
        let seg = read_nifti(&path).unwrap().into_segmentation().unwrap();
        assert_eq!(seg.labels(), &[0, 1, 2, 4, 0, 0, 0, 4]);
        write_nifti(
            &path,
            shape222(),
            &VoxelData::I16(vec![0, 3, 0, 0, 0, 0, 0, 0]),
        )
        .unwrap();
        assert!(matches!(
            read_nifti(&path).unwrap().into_segmentation(),
            Err(Error::InvalidLabel { index: 1, .. })
        ));
    }

    fn voxel_data() -> impl Strategy<Value = VoxelData> {
        prop_oneof![
            proptest::collection::vec(any::<u8>(), 24).prop_map(VoxelData::U8),
            proptest::collection::vec(any::<i16>(), 24).prop_map(VoxelData::I16),
            proptest::collection::vec(-1e6f32..1e6, 24).prop_map(VoxelData::F32),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn write_read_is_lossless(data in voxel_data(), gz in any::<bool>()) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join(if gz { "p.nii.gz" } else { "p.nii" });
            let shape = GridShape::new([2, 3, 4]).unwrap();
            write_nifti(&path, shape, &data).unwrap();
            let vol = read_nifti(&path).unwrap();
            prop_assert_eq!(vol.shape, shape);
            prop_assert_eq!(vol.data, data);
        }
    }
}
