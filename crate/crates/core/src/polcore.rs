//! Core polarimetric types and the canonical Mueller-element constructors.
//!
//! Conventions: Stokes basis `(I, Q, U, V)`, row-major `m(i, j)`, and a
//! linear retarder with fast axis at `θ` written with `C = cos 2θ`,
//! `S = sin 2θ`:
//!
//! ```text
//! [1  0             0             0     ]
//! [0  C²+S²cosδ     SC(1−cosδ)   −S sinδ ]
//! [0  SC(1−cosδ)    S²+C²cosδ     C sinδ ]
//! [0  S sinδ       −C sinδ        cosδ   ]
//! ```
//!
//! The acquisition system's own sign conventions are not known; these are
//! self-consistent, which is what the rotation and decomposition identities
//! rely on.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use crate::error::{Error, Result};

/// Pixels whose `m(0,0)` is at or below this are treated as zero-intensity.
pub const M00_EPS: f64 = 1e-9;

/// One real 4×4 Mueller matrix.
#[derive(Clone, Copy, PartialEq)]
pub struct MuellerMatrix(pub [[f64; 4]; 4]);

impl MuellerMatrix {
    pub const IDENTITY: MuellerMatrix = MuellerMatrix([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);

    pub const ZERO: MuellerMatrix = MuellerMatrix([[0.0; 4]; 4]);

    pub fn new(rows: [[f64; 4]; 4]) -> Self {
        MuellerMatrix(rows)
    }

    pub fn diagonal(d: [f64; 4]) -> Self {
        let mut m = Self::ZERO;
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    pub fn from_row_major(v: &[f64; 16]) -> Self {
        let mut m = Self::ZERO;
        for (k, x) in v.iter().enumerate() {
            m.0[k / 4][k % 4] = *x;
        }
        m
    }

    pub fn to_row_major(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for (k, x) in out.iter_mut().enumerate() {
            *x = self.0[k / 4][k % 4];
        }
        out
    }

    #[inline]
    pub fn m(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                t.0[j][i] = self.0[i][j];
            }
        }
        t
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|x| *x *= c);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    pub fn max_abs_diff(&self, other: &MuellerMatrix) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Lower-right 3×3 block.
    pub fn sub3(&self) -> [[f64; 3]; 3] {
        let mut s = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] = self.0[i + 1][j + 1];
            }
        }
        s
    }

    /// Builds `[[1, 0ᵀ], [col, block]]`.
    pub fn from_blocks(row: [f64; 3], col: [f64; 3], block: [[f64; 3]; 3]) -> Self {
        let mut m = Self::ZERO;
        m.0[0][0] = 1.0;
        for k in 0..3 {
            m.0[0][k + 1] = row[k];
            m.0[k + 1][0] = col[k];
            for j in 0..3 {
                m.0[k + 1][j + 1] = block[k][j];
            }
        }
        m
    }
}

impl Default for MuellerMatrix {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl fmt::Debug for MuellerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Index<(usize, usize)> for MuellerMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for MuellerMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Mul for MuellerMatrix {
    type Output = MuellerMatrix;
    fn mul(self, rhs: MuellerMatrix) -> MuellerMatrix {
        let mut out = MuellerMatrix::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}

/// Divides every entry by `m(0,0)`; returns the normalized matrix and the
/// original gain.
pub fn normalize(m: &MuellerMatrix) -> Result<(MuellerMatrix, f64)> {
    let m00 = m.m(0, 0);
    if !m00.is_finite() {
        return Err(Error::NonFinite);
    }
    if m00 <= M00_EPS {
        return Err(Error::M00NonPositive { m00 });
    }
    let mut out = *m;
    out.0.iter_mut().flatten().for_each(|x| *x /= m00);
    Ok((out, m00))
}

/// Pure diattenuator with diattenuation vector `d`.
pub fn make_diattenuator(d: [f64; 3]) -> Result<MuellerMatrix> {
    let mag = norm3(&d);
    if !(mag <= 1.0) {
        return Err(Error::DOutOfRange { magnitude: mag });
    }
    Ok(MuellerMatrix::from_blocks(d, d, diattenuator_block(&d, mag)))
}

/// `√(1−D²)·I₃ + (1−√(1−D²))·D̂D̂ᵀ`, or `I₃` when `D = 0`.
pub(crate) fn diattenuator_block(d: &[f64; 3], mag: f64) -> [[f64; 3]; 3] {
    let a = (1.0 - mag * mag).max(0.0).sqrt();
    // d[i]*d[j] is evaluated first so the block is exactly symmetric.
    let k = if mag > 0.0 { (1.0 - a) / (mag * mag) } else { 0.0 };
    let mut block = [[0.0; 3]; 3];
    for (i, row) in block.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = k * (d[i] * d[j]);
        }
        row[i] += a;
    }
    block
}

/// Linear retarder with fast axis at `theta` and retardance `delta` (radians).
pub fn make_linear_retarder(theta: f64, delta: f64) -> MuellerMatrix {
    let (s, c) = (2.0 * theta).sin_cos();
    let (sd, cd) = delta.sin_cos();
    MuellerMatrix([
        [1.0, 0.0, 0.0, 0.0],
        // C²+S²cosδ written as 1−S²(1−cosδ) so δ = 0 gives the identity exactly.
        [0.0, 1.0 - s * s * (1.0 - cd), s * c * (1.0 - cd), -s * sd],
        [0.0, s * c * (1.0 - cd), 1.0 - c * c * (1.0 - cd), c * sd],
        [0.0, s * sd, -c * sd, cd],
    ])
}

/// Elliptical retarder: fast axis `axis` on the Poincaré sphere (need not be
/// unit length) and retardance `delta`. An axis `(cos 2θ, sin 2θ, 0)`
/// reproduces [`make_linear_retarder`]. A zero axis gives the identity.
pub fn make_retarder(axis: [f64; 3], delta: f64) -> MuellerMatrix {
    let n = norm3(&axis);
    if n == 0.0 {
        return MuellerMatrix::IDENTITY;
    }
    let a = axis.map(|x| x / n);
    let (s, c) = delta.sin_cos();
    // cI + (1−c)aaᵀ − s[a]×
    let mut block = [[0.0; 3]; 3];
    for (i, row) in block.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = (1.0 - c) * (a[i] * a[j]);
        }
        row[i] += c;
    }
    block[0][1] += s * a[2];
    block[0][2] -= s * a[1];
    block[1][0] -= s * a[2];
    block[1][2] += s * a[0];
    block[2][0] += s * a[1];
    block[2][1] -= s * a[0];
    MuellerMatrix::from_blocks([0.0; 3], [0.0; 3], block)
}

pub fn make_diagonal_depolarizer(a: f64, b: f64, c: f64) -> MuellerMatrix {
    MuellerMatrix::diagonal([1.0, a, b, c])
}

/// Stokes-frame rotation operator `R(θ)`.
pub fn make_rotator(theta: f64) -> MuellerMatrix {
    let (s, c) = (2.0 * theta).sin_cos();
    MuellerMatrix([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, c, s, 0.0],
        [0.0, -s, c, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// `M_Δ · M_R · M_D`.
pub fn compose(
    depolarizer: &MuellerMatrix,
    retarder: &MuellerMatrix,
    diattenuator: &MuellerMatrix,
) -> MuellerMatrix {
    *depolarizer * *retarder * *diattenuator
}

pub(crate) fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// 16-bit mask over Mueller elements; bit `4·i + j` covers `m(i,j)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ElementMask {
    pub bits: u16,
}

impl ElementMask {
    pub const FULL: ElementMask = ElementMask { bits: 0xFFFF };
    /// Upper-left 3×3 (no quarter-wave plates in PSG or PSA).
    pub const UL3X3: ElementMask = ElementMask { bits: 0x0777 };
    /// First row and first column only.
    pub const FIRST_ROW_COL: ElementMask = ElementMask { bits: 0x111F };
    /// Everything except `m(3,3)`.
    pub const LINEAR_ONLY: ElementMask = ElementMask { bits: 0x7FFF };

    pub const PRESETS: [(&'static str, ElementMask); 4] = [
        ("full", Self::FULL),
        ("ul3x3", Self::UL3X3),
        ("first_row_col", Self::FIRST_ROW_COL),
        ("linear_only", Self::LINEAR_ONLY),
    ];

    pub fn from_bits(bits: u16) -> Self {
        ElementMask { bits }
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> bool) -> Self {
        let mut bits = 0u16;
        for i in 0..4 {
            for j in 0..4 {
                if f(i, j) {
                    bits |= 1 << (4 * i + j);
                }
            }
        }
        ElementMask { bits }
    }

    pub fn preset(name: &str) -> Option<Self> {
        let key = name.to_ascii_lowercase().replace('-', "_");
        Self::PRESETS
            .iter()
            .find(|(n, _)| *n == key)
            .map(|(_, m)| *m)
    }

    pub fn name(&self) -> Option<&'static str> {
        Self::PRESETS
            .iter()
            .find(|(_, m)| m == self)
            .map(|(n, _)| *n)
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.bits & (1 << (4 * i + j)) != 0
    }

    pub fn intersect(&self, other: &ElementMask) -> ElementMask {
        ElementMask {
            bits: self.bits & other.bits,
        }
    }

    pub fn is_full(&self) -> bool {
        self.bits == 0xFFFF
    }

    pub fn apply(&self, m: &MuellerMatrix, fill: f64) -> MuellerMatrix {
        let mut out = *m;
        for i in 0..4 {
            for j in 0..4 {
                if !self.contains(i, j) {
                    out.0[i][j] = fill;
                }
            }
        }
        out
    }
}

impl fmt::Debug for ElementMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.name() {
            Some(n) => write!(f, "ElementMask({n})"),
            None => write!(f, "ElementMask({:#06x})", self.bits),
        }
    }
}

/// Storage precision of a cube on disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    F32,
    F64,
}

/// `H × W × Λ` stack of Mueller matrices, stored `[λ][row][col]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MuellerCube {
    height: usize,
    width: usize,
    wavelengths: Vec<f32>,
    data: Vec<MuellerMatrix>,
    normalized: bool,
    m00_plane: Option<Vec<f64>>,
    mask: Option<ElementMask>,
    precision: Precision,
}

impl MuellerCube {
    /// Unnormalized cube without metadata.
    pub fn new(
        height: usize,
        width: usize,
        wavelengths: Vec<f32>,
        data: Vec<MuellerMatrix>,
    ) -> Result<Self> {
        Self::from_parts(height, width, wavelengths, data, false, None, None, Precision::F32)
    }

    /// Validating constructor covering every field.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        height: usize,
        width: usize,
        wavelengths: Vec<f32>,
        data: Vec<MuellerMatrix>,
        normalized: bool,
        m00_plane: Option<Vec<f64>>,
        mask: Option<ElementMask>,
        precision: Precision,
    ) -> Result<Self> {
        if height == 0 || width == 0 || wavelengths.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "cube dimensions must be nonzero (H={height}, W={width}, Λ={})",
                wavelengths.len()
            )));
        }
        if wavelengths.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::DimensionMismatch(
                "wavelengths must be strictly increasing".into(),
            ));
        }
        let n = height
            .checked_mul(width)
            .and_then(|x| x.checked_mul(wavelengths.len()))
            .ok_or(Error::DimOverflow)?;
        if data.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "expected {n} matrices, got {}",
                data.len()
            )));
        }
        if let Some(p) = &m00_plane {
            if p.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "m00 plane has {} entries, expected {n}",
                    p.len()
                )));
            }
        }
        if normalized {
            if m00_plane.is_none() {
                return Err(Error::DimensionMismatch(
                    "normalized cube requires an m00 plane".into(),
                ));
            }
            if data.iter().any(|m| m.m(0, 0) != 1.0) {
                return Err(Error::DimensionMismatch(
                    "normalized cube has a matrix with m(0,0) != 1".into(),
                ));
            }
        }
        let mask = mask.filter(|m| !m.is_full());
        Ok(MuellerCube {
            height,
            width,
            wavelengths,
            data,
            normalized,
            m00_plane,
            mask,
            precision,
        })
    }

    /// Fills a cube from `f(λ index, row, col)`.
    pub fn from_fn(
        height: usize,
        width: usize,
        wavelengths: Vec<f32>,
        f: impl Fn(usize, usize, usize) -> MuellerMatrix,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * wavelengths.len());
        for l in 0..wavelengths.len() {
            for r in 0..height {
                for c in 0..width {
                    data.push(f(l, r, c));
                }
            }
        }
        Self::new(height, width, wavelengths, data)
    }

    pub fn filled(height: usize, width: usize, wavelengths: Vec<f32>, m: MuellerMatrix) -> Result<Self> {
        Self::from_fn(height, width, wavelengths, |_, _, _| m)
    }

    pub fn height(&self) -> usize {
        self.height
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn n_wavelengths(&self) -> usize {
        self.wavelengths.len()
    }
    pub fn wavelengths(&self) -> &[f32] {
        &self.wavelengths
    }
    pub fn data(&self) -> &[MuellerMatrix] {
        &self.data
    }
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
    pub fn m00_plane(&self) -> Option<&[f64]> {
        self.m00_plane.as_deref()
    }
    pub fn mask(&self) -> Option<ElementMask> {
        self.mask
    }
    pub fn precision(&self) -> Precision {
        self.precision
    }
    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    #[inline]
    pub fn offset(&self, wavelength: usize, row: usize, col: usize) -> usize {
        (wavelength * self.height + row) * self.width + col
    }

    pub fn get(&self, wavelength: usize, row: usize, col: usize) -> &MuellerMatrix {
        &self.data[self.offset(wavelength, row, col)]
    }

    pub fn get_mut(&mut self, wavelength: usize, row: usize, col: usize) -> &mut MuellerMatrix {
        let k = self.offset(wavelength, row, col);
        &mut self.data[k]
    }

    pub fn into_parts(self) -> CubeParts {
        CubeParts {
            height: self.height,
            width: self.width,
            wavelengths: self.wavelengths,
            data: self.data,
            normalized: self.normalized,
            m00_plane: self.m00_plane,
            mask: self.mask,
            precision: self.precision,
        }
    }
}

/// Owned fields of a [`MuellerCube`], for rebuilding through
/// [`MuellerCube::from_parts`].
#[derive(Clone, Debug)]
pub struct CubeParts {
    pub height: usize,
    pub width: usize,
    pub wavelengths: Vec<f32>,
    pub data: Vec<MuellerMatrix>,
    pub normalized: bool,
    pub m00_plane: Option<Vec<f64>>,
    pub mask: Option<ElementMask>,
    pub precision: Precision,
}

impl CubeParts {
    pub fn build(self) -> Result<MuellerCube> {
        MuellerCube::from_parts(
            self.height,
            self.width,
            self.wavelengths,
            self.data,
            self.normalized,
            self.m00_plane,
            self.mask,
            self.precision,
        )
    }
}

/// Normalizes every pixel, capturing the pre-normalization `m(0,0)` plane.
///
/// Fails on the first zero-intensity or non-finite pixel; an already
/// normalized cube is returned as is.
pub fn normalize_cube(cube: &MuellerCube) -> Result<MuellerCube> {
    if cube.is_normalized() {
        return Ok(cube.clone());
    }
    let mut data = Vec::with_capacity(cube.data.len());
    let mut gains = Vec::with_capacity(cube.data.len());
    for m in &cube.data {
        let (n, g) = normalize(m)?;
        data.push(n);
        gains.push(g);
    }
    let mut parts = cube.clone().into_parts();
    parts.data = data;
    parts.m00_plane = Some(gains);
    parts.normalized = true;
    parts.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn close(a: &MuellerMatrix, b: &MuellerMatrix, tol: f64) -> bool {
        a.max_abs_diff(b) <= tol
    }

    #[test]
    fn general_retarder_matches_linear_and_is_orthogonal() {
        for (theta, delta) in [(0.0, 0.7), (0.4, FRAC_PI_2), (-1.1, 2.9), (FRAC_PI_4, 0.0)] {
            let (s, c) = (2.0 * theta).sin_cos();
            let g = make_retarder([c, s, 0.0], delta);
            assert!(close(&g, &make_linear_retarder(theta, delta), 1e-15));
        }
        let m = make_retarder([0.3, -0.5, 0.8], 1.9);
        assert!(close(&(m * m.transpose()), &MuellerMatrix::IDENTITY, 1e-15));
        // Retardance is the rotation angle: tr(m_R) = 1 + 2cos δ.
        let tr = m.m(1, 1) + m.m(2, 2) + m.m(3, 3);
        assert!((tr - (1.0 + 2.0 * 1.9f64.cos())).abs() < 1e-15);
        assert_eq!(make_retarder([0.0; 3], 1.0), MuellerMatrix::IDENTITY);
    }

    #[test]
    fn normalize_examples() {
        let (n, g) = normalize(&MuellerMatrix::IDENTITY.scale(2.0)).unwrap();
        assert_eq!(n, MuellerMatrix::IDENTITY);
        assert_eq!(g, 2.0);
        let (n, g) = normalize(&MuellerMatrix::IDENTITY).unwrap();
        assert_eq!((n, g), (MuellerMatrix::IDENTITY, 1.0));
        let mut z = MuellerMatrix::IDENTITY;
        z[(0, 0)] = 0.0;
        assert!(matches!(normalize(&z), Err(Error::M00NonPositive { .. })));
        z[(0, 0)] = -3.0;
        assert!(matches!(normalize(&z), Err(Error::M00NonPositive { .. })));
        z[(0, 0)] = f64::NAN;
        assert!(matches!(normalize(&z), Err(Error::NonFinite)));
    }

    #[test]
    fn normalize_is_idempotent() {
        let m = MuellerMatrix::from_row_major(&[
            3.7, 0.2, -0.4, 0.1, 0.3, 2.9, 0.0, 0.5, -0.2, 0.1, 1.7, 0.3, 0.05, -0.4, 0.2, 0.9,
        ]);
        let once = normalize(&m).unwrap().0;
        assert_eq!(normalize(&once).unwrap().0, once);
    }

    #[test]
    fn diattenuator_examples() {
        assert_eq!(make_diattenuator([0.0; 3]).unwrap(), MuellerMatrix::IDENTITY);
        let md = make_diattenuator([0.6, 0.0, 0.0]).unwrap();
        assert_eq!(md.0[0], [1.0, 0.6, 0.0, 0.0]);
        let expected = MuellerMatrix([
            [1.0, 0.6, 0.0, 0.0],
            [0.6, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.8, 0.0],
            [0.0, 0.0, 0.0, 0.8],
        ]);
        assert!(close(&md, &expected, 1e-15));
        assert!(matches!(
            make_diattenuator([1.5, 0.0, 0.0]),
            Err(Error::DOutOfRange { .. })
        ));
        assert!(make_diattenuator([f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn diattenuator_is_symmetric() {
        for d in [[0.3, -0.2, 0.5], [0.0, 0.9, 0.1], [0.577, 0.577, 0.577]] {
            let m = make_diattenuator(d).unwrap();
            assert_eq!(m, m.transpose());
        }
    }

    #[test]
    fn retarder_examples() {
        let qwp = make_linear_retarder(0.0, FRAC_PI_2);
        let expected = MuellerMatrix([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0, 0.0],
        ]);
        assert!(close(&qwp, &expected, 1e-15));
        for theta in [0.0, 0.3, -1.2, 2.5] {
            assert_eq!(make_linear_retarder(theta, 0.0), MuellerMatrix::IDENTITY);
        }
        let qwp45 = make_linear_retarder(FRAC_PI_4, FRAC_PI_2);
        let expected = MuellerMatrix([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ]);
        assert!(close(&qwp45, &expected, 1e-15));
    }

    #[test]
    fn retarder_block_is_rotation() {
        for k in 0..50 {
            let theta = 0.37 * k as f64 - 4.0;
            let delta = 0.11 * k as f64;
            let r = make_linear_retarder(theta, delta);
            assert_eq!(r.0[0], [1.0, 0.0, 0.0, 0.0]);
            assert!((1..4).all(|i| r.0[i][0] == 0.0));
            let b = r.sub3();
            let det = crate::linalg::det3(&b);
            assert!((det - 1.0).abs() < 1e-12);
            let btb = crate::linalg::mul3(&crate::linalg::transpose3(&b), &b);
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((btb[i][j] - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn depolarizer_examples() {
        assert_eq!(make_diagonal_depolarizer(1.0, 1.0, 1.0), MuellerMatrix::IDENTITY);
        assert_eq!(
            make_diagonal_depolarizer(0.6, 0.5, 0.4),
            MuellerMatrix::diagonal([1.0, 0.6, 0.5, 0.4])
        );
        assert_eq!(
            make_diagonal_depolarizer(0.0, 0.0, 0.0),
            MuellerMatrix::diagonal([1.0, 0.0, 0.0, 0.0])
        );
    }

    #[test]
    fn rotator_examples() {
        assert_eq!(make_rotator(0.0), MuellerMatrix::IDENTITY);
        let expected = MuellerMatrix([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]);
        assert!(close(&make_rotator(FRAC_PI_4), &expected, 1e-16));
        for k in 0..100 {
            let theta = -3.0 + 0.061 * k as f64;
            let r = make_rotator(theta);
            assert!(close(&(r * make_rotator(-theta)), &MuellerMatrix::IDENTITY, 1e-14));
            assert!(close(&(r.transpose() * r), &MuellerMatrix::IDENTITY, 1e-14));
        }
    }

    #[test]
    fn compose_matches_direct_product() {
        assert_eq!(
            compose(&MuellerMatrix::IDENTITY, &MuellerMatrix::IDENTITY, &MuellerMatrix::IDENTITY),
            MuellerMatrix::IDENTITY
        );
        // diag(1,.6,.5,.4)·QWP(0): rows scale QWP rows.
        let got = compose(
            &make_diagonal_depolarizer(0.6, 0.5, 0.4),
            &make_linear_retarder(0.0, FRAC_PI_2),
            &MuellerMatrix::IDENTITY,
        );
        let expected = MuellerMatrix([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.6, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.5],
            [0.0, 0.0, -0.4, 0.0],
        ]);
        assert!(close(&got, &expected, 1e-16));
    }

    #[test]
    fn mask_presets() {
        let ul = ElementMask::UL3X3;
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(ul.contains(i, j), i <= 2 && j <= 2);
                assert!(ElementMask::FULL.contains(i, j));
                assert_eq!(ElementMask::FIRST_ROW_COL.contains(i, j), i == 0 || j == 0);
                assert_eq!(ElementMask::LINEAR_ONLY.contains(i, j), !(i == 3 && j == 3));
            }
        }
        assert_eq!(ElementMask::from_fn(|i, j| i <= 2 && j <= 2), ul);
        assert_eq!(ElementMask::preset("UL3X3"), Some(ul));
        assert_eq!(ElementMask::preset("first-row-col"), Some(ElementMask::FIRST_ROW_COL));
        assert_eq!(ul.name(), Some("ul3x3"));
        assert_eq!(ElementMask::preset("nope"), None);
    }

    #[test]
    fn cube_invariants() {
        let wl = vec![450.0, 500.0];
        let c = MuellerCube::filled(2, 3, wl.clone(), MuellerMatrix::IDENTITY).unwrap();
        assert_eq!(c.data().len(), 12);
        assert_eq!(c.offset(1, 1, 2), 11);
        assert!(MuellerCube::new(2, 3, wl.clone(), vec![MuellerMatrix::IDENTITY; 11]).is_err());
        assert!(MuellerCube::new(0, 3, wl, vec![]).is_err());
        assert!(MuellerCube::filled(1, 1, vec![500.0, 450.0], MuellerMatrix::IDENTITY).is_err());
        assert!(MuellerCube::filled(1, 1, vec![500.0, 500.0], MuellerMatrix::IDENTITY).is_err());
        let unnormalized_flagged = MuellerCube::from_parts(
            1,
            1,
            vec![500.0],
            vec![MuellerMatrix::IDENTITY.scale(2.0)],
            true,
            Some(vec![1.0]),
            None,
            Precision::F32,
        );
        assert!(unnormalized_flagged.is_err());
    }

    #[test]
    fn normalize_cube_captures_gain() {
        let c = MuellerCube::from_fn(2, 2, vec![600.0], |_, r, col| {
            MuellerMatrix::IDENTITY.scale(1.0 + r as f64 + 2.0 * col as f64)
        })
        .unwrap();
        let n = normalize_cube(&c).unwrap();
        assert!(n.is_normalized());
        assert_eq!(n.m00_plane().unwrap(), &[1.0, 3.0, 2.0, 4.0]);
        assert!(n.data().iter().all(|m| *m == MuellerMatrix::IDENTITY));
        assert_eq!(normalize_cube(&n).unwrap(), n);

        let dark = MuellerCube::filled(1, 1, vec![600.0], MuellerMatrix::ZERO).unwrap();
        assert!(matches!(normalize_cube(&dark), Err(Error::M00NonPositive { .. })));
    }
}
