//! Binary containers: MMC1 for Mueller cubes, MMP1 for single scalar planes
//! (parameter maps, status codes, label maps), and ingestion validation.
//!
//! All integers and floats are little-endian.
//!
//! MMC1 layout:
//!
//! ```text
//! magic "MMC1" | version u32 = 1 | height u32 | width u32 | n_wavelengths u32
//! | dtype u32 (0 f32, 1 f64) | flags u32 (bit0 normalized, bit1 m00 plane, bit2 mask)
//! | wavelengths f32 × n_wavelengths | [mask u16, if bit2]
//! | matrices dtype × (Λ·H·W·16), ordered [λ][row][col][i][j]
//! | [m00 plane dtype × (Λ·H·W), if bit1]
//! ```
//!
//! MMP1 layout:
//!
//! ```text
//! magic "MMP1" | height u32 | width u32 | dtype u32 (0 f32, 1 f64, 2 u8) | kind u32
//! | payload dtype × (H·W), row-major
//! ```
//!
//! Readers check every declared size against the bytes actually present
//! before allocating, and reject trailing bytes.

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::luchipman::{LuChipmanMaps, ParameterPlanes, PixelStatus};
use crate::polcore::{ElementMask, MuellerCube, MuellerMatrix, Precision};
use crate::realizability::{scan_cube, DEFAULT_TOL_PHYS};

pub const MMC_MAGIC: [u8; 4] = *b"MMC1";
pub const MMP_MAGIC: [u8; 4] = *b"MMP1";
pub const MMC_VERSION: u32 = 1;

const FLAG_NORMALIZED: u32 = 1;
const FLAG_M00: u32 = 1 << 1;
const FLAG_MASK: u32 = 1 << 2;
const KNOWN_FLAGS: u32 = FLAG_NORMALIZED | FLAG_M00 | FLAG_MASK;

const MMC_FIXED_HEADER: u64 = 28;
const MMP_HEADER: u64 = 20;

fn io_error(path: &Path, e: std::io::Error) -> Error {
    if e.kind() == ErrorKind::NotFound {
        Error::BadPath(path.display().to_string())
    } else {
        Error::Io(e)
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| io_error(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}

/// Bounds-checked little-endian reader over a byte slice.
struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::DimOverflow)?;
        if end > self.buf.len() {
            return Err(Error::TruncatedFile {
                needed: end as u64,
                available: self.buf.len() as u64,
            });
        }
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("slice length checked"))
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn remaining(&self) -> u64 {
        (self.buf.len() - self.pos) as u64
    }
}

fn magic(r: &mut Reader, expected: [u8; 4]) -> Result<()> {
    let found = r.array::<4>()?;
    if found != expected {
        return Err(Error::BadMagic { found, expected });
    }
    Ok(())
}

/// Ensures exactly `needed` payload bytes follow.
fn expect_payload(r: &Reader, needed: u64) -> Result<()> {
    let available = r.remaining();
    if available < needed {
        return Err(Error::TruncatedFile {
            needed: r.pos as u64 + needed,
            available: r.buf.len() as u64,
        });
    }
    if available > needed {
        return Err(Error::TrailingData { extra: available - needed });
    }
    Ok(())
}

fn dtype_size(p: Precision) -> u64 {
    match p {
        Precision::F32 => 4,
        Precision::F64 => 8,
    }
}

fn dtype_code(p: Precision) -> u32 {
    match p {
        Precision::F32 => 0,
        Precision::F64 => 1,
    }
}

fn decode_floats(bytes: &[u8], p: Precision) -> Vec<f64> {
    match p {
        Precision::F32 => bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect(),
        Precision::F64 => bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect(),
    }
}

fn push_float(out: &mut Vec<u8>, x: f64, p: Precision) {
    match p {
        Precision::F32 => out.extend_from_slice(&(x as f32).to_le_bytes()),
        Precision::F64 => out.extend_from_slice(&x.to_le_bytes()),
    }
}

/// Decoded MMC1 header.
#[derive(Clone, Debug, PartialEq)]
pub struct MmcHeader {
    pub version: u32,
    pub height: u32,
    pub width: u32,
    pub n_wavelengths: u32,
    pub dtype: Precision,
    pub normalized: bool,
    pub has_m00_plane: bool,
    pub mask: Option<u16>,
    pub wavelengths: Vec<f32>,
}

impl MmcHeader {
    pub fn header_len(&self) -> u64 {
        MMC_FIXED_HEADER + 4 * self.n_wavelengths as u64 + if self.mask.is_some() { 2 } else { 0 }
    }

    /// Number of matrices, checked against overflow.
    pub fn n_matrices(&self) -> Result<u64> {
        (self.height as u64)
            .checked_mul(self.width as u64)
            .and_then(|x| x.checked_mul(self.n_wavelengths as u64))
            .ok_or(Error::DimOverflow)
    }

    /// Bytes expected after the header.
    pub fn payload_len(&self) -> Result<u64> {
        let n = self.n_matrices()?;
        let per = 16 + u64::from(self.has_m00_plane);
        n.checked_mul(per)
            .and_then(|x| x.checked_mul(dtype_size(self.dtype)))
            .ok_or(Error::DimOverflow)
    }
}

fn parse_mmc_header(r: &mut Reader) -> Result<MmcHeader> {
    magic(r, MMC_MAGIC)?;
    let version = r.u32()?;
    if version != MMC_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let (height, width, n_wavelengths) = (r.u32()?, r.u32()?, r.u32()?);
    if height == 0 || width == 0 || n_wavelengths == 0 {
        return Err(Error::BadHeader(format!(
            "zero dimension (H={height}, W={width}, Λ={n_wavelengths})"
        )));
    }
    let dtype = match r.u32()? {
        0 => Precision::F32,
        1 => Precision::F64,
        d => return Err(Error::BadHeader(format!("unknown dtype {d}"))),
    };
    let flags = r.u32()?;
    if flags & !KNOWN_FLAGS != 0 {
        return Err(Error::BadHeader(format!("unknown flag bits {flags:#x}")));
    }
    let wl_bytes = r.take(
        (n_wavelengths as usize)
            .checked_mul(4)
            .ok_or(Error::DimOverflow)?,
    )?;
    let wavelengths: Vec<f32> = wl_bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    if wavelengths.iter().any(|w| !w.is_finite() || *w <= 0.0) {
        return Err(Error::BadHeader("wavelengths must be finite and positive".into()));
    }
    if wavelengths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadHeader("wavelengths must be strictly increasing".into()));
    }
    let mask = if flags & FLAG_MASK != 0 { Some(r.u16()?) } else { None };
    let normalized = flags & FLAG_NORMALIZED != 0;
    let has_m00_plane = flags & FLAG_M00 != 0;
    if normalized && !has_m00_plane {
        return Err(Error::BadHeader("normalized flag set without an m00 plane".into()));
    }
    Ok(MmcHeader {
        version,
        height,
        width,
        n_wavelengths,
        dtype,
        normalized,
        has_m00_plane,
        mask,
        wavelengths,
    })
}

/// Serializes a cube in its own precision.
pub fn encode_cube(cube: &MuellerCube) -> Vec<u8> {
    let p = cube.precision();
    let n = cube.data().len();
    let mask = cube.mask();
    let m00 = cube.m00_plane();
    let mut flags = 0;
    if cube.is_normalized() {
        flags |= FLAG_NORMALIZED;
    }
    if m00.is_some() {
        flags |= FLAG_M00;
    }
    if mask.is_some() {
        flags |= FLAG_MASK;
    }
    let payload = n * (16 + usize::from(m00.is_some())) * dtype_size(p) as usize;
    let mut out = Vec::with_capacity(34 + 4 * cube.n_wavelengths() + payload);
    out.extend_from_slice(&MMC_MAGIC);
    for v in [
        MMC_VERSION,
        cube.height() as u32,
        cube.width() as u32,
        cube.n_wavelengths() as u32,
        dtype_code(p),
        flags,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for w in cube.wavelengths() {
        out.extend_from_slice(&w.to_le_bytes());
    }
    if let Some(m) = mask {
        out.extend_from_slice(&m.bits.to_le_bytes());
    }
    for m in cube.data() {
        for x in m.to_row_major() {
            push_float(&mut out, x, p);
        }
    }
    if let Some(plane) = m00 {
        for &x in plane {
            push_float(&mut out, x, p);
        }
    }
    out
}

/// Parses an MMC1 byte buffer.
pub fn decode_cube(bytes: &[u8]) -> Result<MuellerCube> {
    let mut r = Reader::new(bytes);
    let header = parse_mmc_header(&mut r)?;
    let n = header.n_matrices()?;
    let payload = header.payload_len()?;
    expect_payload(&r, payload)?;
    let size = dtype_size(header.dtype) as usize;
    let n = n as usize;
    let values = decode_floats(r.take(n * 16 * size)?, header.dtype);
    let data = values
        .chunks_exact(16)
        .map(|c| MuellerMatrix::from_row_major(c.try_into().unwrap()))
        .collect();
    let m00_plane = if header.has_m00_plane {
        Some(decode_floats(r.take(n * size)?, header.dtype))
    } else {
        None
    };
    MuellerCube::from_parts(
        header.height as usize,
        header.width as usize,
        header.wavelengths,
        data,
        header.normalized,
        m00_plane,
        header.mask.map(ElementMask::from_bits),
        header.dtype,
    )
    .map_err(|e| match e {
        Error::DimensionMismatch(msg) => Error::BadHeader(msg),
        e => e,
    })
}

pub fn write_cube(cube: &MuellerCube, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode_cube(cube))
}

pub fn read_cube(path: impl AsRef<Path>) -> Result<MuellerCube> {
    decode_cube(&read_file(path.as_ref())?)
}

/// Reads only the header of an MMC1 file.
pub fn read_cube_header(path: impl AsRef<Path>) -> Result<MmcHeader> {
    let bytes = read_file(path.as_ref())?;
    parse_mmc_header(&mut Reader::new(&bytes))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u32)]
pub enum PlaneKind {
    Delta = 0,
    Ret = 1,
    Diat = 2,
    Status = 3,
    M00 = 4,
    Label = 5,
    /// Minimum coherency eigenvalue from a realizability scan.
    MinEig = 6,
}

impl PlaneKind {
    pub const ALL: [PlaneKind; 7] = [
        Self::Delta,
        Self::Ret,
        Self::Diat,
        Self::Status,
        Self::M00,
        Self::Label,
        Self::MinEig,
    ];

    pub fn code(self) -> u32 {
        self as u32
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    /// Lower-case file-name prefix.
    pub fn file_stem(self) -> &'static str {
        match self {
            Self::Delta => "delta",
            Self::Ret => "ret",
            Self::Diat => "diat",
            Self::Status => "status",
            Self::M00 => "m00",
            Self::Label => "label",
            Self::MinEig => "mineig",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Delta => "DELTA",
            Self::Ret => "RET",
            Self::Diat => "DIAT",
            Self::Status => "STATUS",
            Self::M00 => "M00",
            Self::Label => "LABEL",
            Self::MinEig => "MINEIG",
        }
    }

    pub fn from_file_stem(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.file_stem() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PlaneData {
    F32(Vec<f32>),
    F64(Vec<f64>),
    U8(Vec<u8>),
}

impl PlaneData {
    pub fn len(&self) -> usize {
        match self {
            PlaneData::F32(v) => v.len(),
            PlaneData::F64(v) => v.len(),
            PlaneData::U8(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn code(&self) -> u32 {
        match self {
            PlaneData::F32(_) => 0,
            PlaneData::F64(_) => 1,
            PlaneData::U8(_) => 2,
        }
    }

    /// Values widened to `f64`.
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            PlaneData::F32(v) => v.iter().map(|&x| x as f64).collect(),
            PlaneData::F64(v) => v.clone(),
            PlaneData::U8(v) => v.iter().map(|&x| x as f64).collect(),
        }
    }
}

/// One `H × W` scalar plane.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneFile {
    pub height: usize,
    pub width: usize,
    pub kind: PlaneKind,
    pub data: PlaneData,
}

impl PlaneFile {
    pub fn new(height: usize, width: usize, kind: PlaneKind, data: PlaneData) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::DimensionMismatch("plane dimensions must be nonzero".into()));
        }
        if height.checked_mul(width) != Some(data.len()) {
            return Err(Error::DimensionMismatch(format!(
                "plane {height}×{width} with {} values",
                data.len()
            )));
        }
        Ok(PlaneFile { height, width, kind, data })
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(MMP_HEADER as usize + 8 * self.data.len());
        out.extend_from_slice(&MMP_MAGIC);
        for v in [self.height as u32, self.width as u32, self.data.code(), self.kind.code()] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        match &self.data {
            PlaneData::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            PlaneData::F64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            PlaneData::U8(v) => out.extend_from_slice(v),
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        magic(&mut r, MMP_MAGIC)?;
        let (height, width) = (r.u32()?, r.u32()?);
        if height == 0 || width == 0 {
            return Err(Error::BadHeader(format!("zero dimension (H={height}, W={width})")));
        }
        let dtype = r.u32()?;
        let size = match dtype {
            0 => 4,
            1 => 8,
            2 => 1,
            d => return Err(Error::BadHeader(format!("unknown dtype {d}"))),
        };
        let kind_code = r.u32()?;
        let kind = PlaneKind::from_code(kind_code)
            .ok_or_else(|| Error::BadHeader(format!("unknown plane kind {kind_code}")))?;
        let n = (height as u64).checked_mul(width as u64).ok_or(Error::DimOverflow)?;
        let needed = n.checked_mul(size).ok_or(Error::DimOverflow)?;
        expect_payload(&r, needed)?;
        let payload = r.take(needed as usize)?;
        let data = match dtype {
            0 => PlaneData::F32(
                payload
                    .chunks_exact(4)
                    .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                    .collect(),
            ),
            1 => PlaneData::F64(
                payload
                    .chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                    .collect(),
            ),
            _ => PlaneData::U8(payload.to_vec()),
        };
        Ok(PlaneFile {
            height: height as usize,
            width: width as usize,
            kind,
            data,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), &self.encode())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::decode(&read_file(path.as_ref())?)
    }
}

/// Label id for grey matter.
pub const LABEL_GREY_MATTER: u8 = 0;
/// Label id for white matter.
pub const LABEL_WHITE_MATTER: u8 = 1;
/// Pixels excluded from scoring.
pub const LABEL_UNLABELED: u8 = 255;

pub fn write_label_plane(path: impl AsRef<Path>, height: usize, width: usize, labels: &[u8]) -> Result<()> {
    PlaneFile::new(height, width, PlaneKind::Label, PlaneData::U8(labels.to_vec()))?.write(path)
}

/// Reads a LABEL plane; returns `(height, width, labels)`.
pub fn read_label_plane(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<u8>)> {
    let p = PlaneFile::read(path)?;
    match (p.kind, p.data) {
        (PlaneKind::Label, PlaneData::U8(v)) => Ok((p.height, p.width, v)),
        (kind, _) => Err(Error::BadHeader(format!(
            "expected a u8 LABEL plane, found {}",
            kind.name()
        ))),
    }
}

/// File name of a plane: `<kind>_<λnm>.mmp`.
pub fn plane_file_name(kind: PlaneKind, wavelength: f32) -> String {
    format!("{}_{}.mmp", kind.file_stem(), wavelength)
}

fn parse_plane_file_name(name: &str) -> Option<(PlaneKind, f32)> {
    let stem = name.strip_suffix(".mmp")?;
    let (kind, wl) = stem.split_once('_')?;
    let wl: f32 = wl.parse().ok()?;
    (wl.is_finite() && plane_file_name(PlaneKind::from_file_stem(kind)?, wl) == name)
        .then(|| (PlaneKind::from_file_stem(kind).unwrap(), wl))
}

/// Writes Δ, R, D as f64 planes and the status codes as a u8 plane, one
/// file each per wavelength. Returns the written paths.
pub fn write_maps(maps: &LuChipmanMaps, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    maps.validate()?;
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let (h, w) = (maps.height, maps.width);
    let mut written = Vec::new();
    for (wl, planes) in maps.wavelengths.iter().zip(&maps.planes) {
        let files = [
            (PlaneKind::Delta, PlaneData::F64(planes.depolarization.clone())),
            (PlaneKind::Ret, PlaneData::F64(planes.retardance.clone())),
            (PlaneKind::Diat, PlaneData::F64(planes.diattenuation.clone())),
            (
                PlaneKind::Status,
                PlaneData::U8(planes.status.iter().map(|s| s.code()).collect()),
            ),
        ];
        for (kind, data) in files {
            let path = dir.join(plane_file_name(kind, *wl));
            PlaneFile::new(h, w, kind, data)?.write(&path)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Reads every wavelength found in `dir`. Each wavelength needs all four
/// of DELTA, RET, DIAT and STATUS; other files are ignored.
pub fn read_maps(dir: impl AsRef<Path>) -> Result<LuChipmanMaps> {
    let dir = dir.as_ref();
    let mut found: Vec<(f32, PlaneKind, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| io_error(dir, e))? {
        let entry = entry?;
        let name = entry.file_name();
        let Some((kind, wl)) = name.to_str().and_then(parse_plane_file_name) else {
            continue;
        };
        if matches!(kind, PlaneKind::Delta | PlaneKind::Ret | PlaneKind::Diat | PlaneKind::Status) {
            found.push((wl, kind, entry.path()));
        }
    }
    if found.is_empty() {
        return Err(Error::EmptyInput("no parameter planes in directory"));
    }
    let mut wavelengths: Vec<f32> = found.iter().map(|f| f.0).collect();
    wavelengths.sort_by(f32::total_cmp);
    wavelengths.dedup();

    let mut dims: Option<(usize, usize)> = None;
    let mut planes = Vec::with_capacity(wavelengths.len());
    for &wl in &wavelengths {
        let mut load = |kind: PlaneKind| -> Result<PlaneFile> {
            let path = found
                .iter()
                .find(|f| f.0 == wl && f.1 == kind)
                .map(|f| f.2.clone())
                .ok_or_else(|| Error::MissingPlane {
                    kind: kind.name(),
                    wavelength: wl.to_string(),
                })?;
            let p = PlaneFile::read(&path)?;
            if p.kind != kind {
                return Err(Error::BadHeader(format!(
                    "{} declares kind {}",
                    path.display(),
                    p.kind.name()
                )));
            }
            match dims {
                None => dims = Some((p.height, p.width)),
                Some(d) if d != (p.height, p.width) => {
                    return Err(Error::DimensionMismatch(format!(
                        "{} is {}×{}, expected {}×{}",
                        path.display(),
                        p.height,
                        p.width,
                        d.0,
                        d.1
                    )))
                }
                _ => {}
            }
            Ok(p)
        };
        let float_plane = |p: PlaneFile| match p.data {
            PlaneData::U8(_) => Err(Error::BadHeader(format!("{} plane stored as u8", p.kind.name()))),
            d => Ok(d.to_f64()),
        };
        let depolarization = float_plane(load(PlaneKind::Delta)?)?;
        let retardance = float_plane(load(PlaneKind::Ret)?)?;
        let diattenuation = float_plane(load(PlaneKind::Diat)?)?;
        let status = match load(PlaneKind::Status)?.data {
            PlaneData::U8(v) => v
                .into_iter()
                .map(|c| {
                    PixelStatus::from_code(c)
                        .ok_or_else(|| Error::BadHeader(format!("invalid status code {c}")))
                })
                .collect::<Result<Vec<_>>>()?,
            _ => return Err(Error::BadHeader("STATUS plane must be u8".into())),
        };
        planes.push(ParameterPlanes {
            depolarization,
            retardance,
            diattenuation,
            status,
        });
    }
    let (height, width) = dims.expect("at least one plane read");
    let maps = LuChipmanMaps {
        height,
        width,
        wavelengths,
        planes,
    };
    maps.validate()?;
    Ok(maps)
}

/// Ingestion report for one MMC1 file.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub header: MmcHeader,
    pub file_len: u64,
    pub n_matrices: usize,
    /// NaN entries across matrices and the m00 plane.
    pub nan_count: usize,
    /// Infinite entries across matrices and the m00 plane.
    pub inf_count: usize,
    pub n_physical: usize,
    pub fraction_physical: f64,
    /// Smallest coherency eigenvalue over finite matrices (NaN if none).
    pub min_eigenvalue: f64,
    pub tol_phys: f64,
}

impl ValidationReport {
    pub fn n_unphysical(&self) -> usize {
        self.n_matrices - self.n_physical
    }

    pub fn is_clean(&self) -> bool {
        self.nan_count == 0 && self.inf_count == 0 && self.n_physical == self.n_matrices
    }
}

/// Validates a cube already in memory; `header` and `file_len` are taken
/// from the cube.
pub fn validate_cube(cube: &MuellerCube, tol_phys: f64) -> Result<ValidationReport> {
    let bytes_len = encoded_len(cube);
    let header = MmcHeader {
        version: MMC_VERSION,
        height: cube.height() as u32,
        width: cube.width() as u32,
        n_wavelengths: cube.n_wavelengths() as u32,
        dtype: cube.precision(),
        normalized: cube.is_normalized(),
        has_m00_plane: cube.m00_plane().is_some(),
        mask: cube.mask().map(|m| m.bits),
        wavelengths: cube.wavelengths().to_vec(),
    };
    let entries = cube
        .data()
        .iter()
        .flat_map(|m| m.to_row_major())
        .chain(cube.m00_plane().unwrap_or(&[]).iter().copied());
    let (mut nan_count, mut inf_count) = (0, 0);
    for x in entries {
        nan_count += usize::from(x.is_nan());
        inf_count += usize::from(x.is_infinite());
    }
    let scan = scan_cube(cube, tol_phys)?;
    let min_eigenvalue = scan
        .reports
        .iter()
        .map(|r| r.min_eigenvalue)
        .filter(|x| !x.is_nan())
        .fold(f64::NAN, f64::min);
    Ok(ValidationReport {
        header,
        file_len: bytes_len,
        n_matrices: cube.data().len(),
        nan_count,
        inf_count,
        n_physical: scan.n_physical,
        fraction_physical: scan.fraction_physical,
        min_eigenvalue,
        tol_phys,
    })
}

fn encoded_len(cube: &MuellerCube) -> u64 {
    let n = cube.data().len() as u64;
    let per = 16 + u64::from(cube.m00_plane().is_some());
    MMC_FIXED_HEADER
        + 4 * cube.n_wavelengths() as u64
        + if cube.mask().is_some() { 2 } else { 0 }
        + n * per * dtype_size(cube.precision())
}

/// Reads and validates an MMC1 file at the default physicality tolerance.
pub fn validate_file(path: impl AsRef<Path>) -> Result<ValidationReport> {
    validate_file_with(path, DEFAULT_TOL_PHYS)
}

pub fn validate_file_with(path: impl AsRef<Path>, tol_phys: f64) -> Result<ValidationReport> {
    let bytes = read_file(path.as_ref())?;
    let cube = decode_cube(&bytes)?;
    let mut report = validate_cube(&cube, tol_phys)?;
    report.file_len = bytes.len() as u64;
    Ok(report)
}
